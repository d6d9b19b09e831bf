//! File-output contract: the four artifacts, their CSV headers, the
//! risk-colored SVG, and the decision log content for a close-quarters
//! crossing.

use colav::scenario::{bundled_scenario, emit_outputs, run, RunMeta, ScenarioConfig};

fn emit(config: &ScenarioConfig, dir: &std::path::Path) {
    let (log, metrics) = run(config).unwrap();
    let meta = RunMeta {
        scenario: config.name.clone(),
        decider: config.decider.to_string(),
        seed: config.seed,
        duration: config.duration,
    };
    emit_outputs(&log, &metrics, &meta, &config.own_route, dir).unwrap();
}

#[test]
fn all_four_files_with_documented_headers() {
    let tmp = tempfile::tempdir().unwrap();
    let config = ScenarioConfig {
        duration: 5.0,
        ..ScenarioConfig::default()
    };
    emit(&config, tmp.path());

    for file in [
        "trajectory.csv",
        "decisions.csv",
        "summary.json",
        "trajectory.svg",
    ] {
        assert!(tmp.path().join(file).exists(), "missing {file}");
    }

    let trajectory = std::fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    assert!(trajectory.starts_with(
        "time,own_x,own_y,own_heading,own_yaw_rate,own_speed,\
         target_x,target_y,target_heading,target_speed,\
         desired_heading,los_term,cte_term,colav_term,steering_cmd"
    ));
    // duration / dt + 1 rows plus the header.
    assert_eq!(trajectory.lines().count(), 502);

    let decisions = std::fs::read_to_string(tmp.path().join("decisions.csv")).unwrap();
    assert!(decisions.starts_with(
        "cycle,situation,action,turn,risk,range,dcpa,tcpa,rule_citation,reasoning"
    ));
    assert_eq!(decisions.lines().count(), 6);
}

#[test]
fn far_away_target_renders_in_the_zero_risk_color() {
    let tmp = tempfile::tempdir().unwrap();
    // Default config: target parked 14 km away, risk 0 throughout.
    let config = ScenarioConfig {
        duration: 5.0,
        ..ScenarioConfig::default()
    };
    emit(&config, tmp.path());
    let svg = std::fs::read_to_string(tmp.path().join("trajectory.svg")).unwrap();
    assert!(svg.contains("#00ff28"), "zero-risk color missing");
    assert!(svg.contains("stroke=\"black\""), "own track missing");
}

#[test]
fn crossing_run_logs_a_giveway_row_near_the_published_risk() {
    let tmp = tempfile::tempdir().unwrap();
    let config = bundled_scenario("crossing_giveway").unwrap().unwrap();
    emit(&config, tmp.path());

    let decisions = std::fs::read_to_string(tmp.path().join("decisions.csv")).unwrap();
    let mut found = false;
    for line in decisions.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        // cycle,situation,action,turn,risk,...
        if fields[2] == "Give-way" {
            let risk: f64 = fields[4].parse().unwrap();
            if (risk - 0.86).abs() <= 0.05 {
                found = true;
                assert_eq!(fields[1], "crossing");
                assert_eq!(fields[3], "starboard");
            }
        }
    }
    assert!(found, "no give-way row within 0.05 of risk 0.86");

    // The encounter also colors part of the target track in a hot color.
    let svg = std::fs::read_to_string(tmp.path().join("trajectory.svg")).unwrap();
    assert!(svg.matches("<polyline").count() > 3, "expected multiple risk segments");
}

#[test]
fn summary_reports_discrepancies_for_contradicting_mock() {
    use colav::scenario::DeciderKind;

    let tmp = tempfile::tempdir().unwrap();
    let rule_config = bundled_scenario("crossing_giveway").unwrap().unwrap();
    let (rule_log, _) = run(&rule_config).unwrap();
    let initiation = rule_log.decisions.iter().find(|d| d.consulted).unwrap();
    let echo = format!(
        "SITUATION: {}\nACTION: Give-way, turn starboard\nREASONING: {}",
        initiation.decision.situation, initiation.decision.reasoning
    );
    let bodies = serde_json::json!([
        {"choices": [{"message": {"role": "assistant", "content": echo}}]},
        {"choices": [{"message": {"role": "assistant",
            "content": "SITUATION: crossing\nACTION: Stand-on\nREASONING: fine now"}}]}
    ]);
    let fixtures = tmp.path().join("fixtures.json");
    std::fs::write(&fixtures, bodies.to_string()).unwrap();

    let config = ScenarioConfig {
        decider: DeciderKind::Mock,
        mock_fixtures: Some(fixtures),
        ..rule_config
    };
    emit(&config, tmp.path());

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("summary.json")).unwrap())
            .unwrap();
    let discrepancies = summary["discrepancies"].as_array().unwrap();
    assert!(!discrepancies.is_empty(), "summary lost the discrepancy");
    assert!(discrepancies[0]["detail"]
        .as_str()
        .unwrap()
        .contains("latched"));
    assert!(summary["llm_decisions"].as_u64().unwrap() >= 1);
}
