//! Run outputs: trajectory and decision CSVs, the summary JSON, and a
//! risk-colored trajectory SVG.
//!
//! Numeric formatting is fixed-precision (6 decimals for states, 2 for
//! decision telemetry) so that identical runs produce byte-identical
//! files on any platform.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::llm::DecisionSource;

use super::config::ScenarioError;
use super::runner::{DecisionRecord, StepRecord, SummaryMetrics, TrajectoryLog};

/// Run identification written into the summary.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub scenario: String,
    pub decider: String,
    pub seed: u64,
    pub duration: f64,
}

#[derive(Serialize)]
struct DiscrepancyOut<'a> {
    cycle: u64,
    detail: &'a str,
}

#[derive(Serialize)]
struct SummaryOut<'a> {
    #[serde(flatten)]
    meta: &'a RunMeta,
    metrics: &'a SummaryMetrics,
    llm_decisions: usize,
    fallback_decisions: usize,
    discrepancies: Vec<DiscrepancyOut<'a>>,
}

fn f6(v: f64) -> String {
    format!("{v:.6}")
}

fn f2(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{v:.2}")
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ScenarioError + '_ {
    move |source| ScenarioError::OutputIo {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ScenarioError + '_ {
    move |source| ScenarioError::OutputIo {
        path: path.to_path_buf(),
        source: std::io::Error::other(source),
    }
}

fn write_trajectory_csv(path: &Path, steps: &[StepRecord]) -> Result<(), ScenarioError> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_err(path))?;
    writer
        .write_record([
            "time",
            "own_x",
            "own_y",
            "own_heading",
            "own_yaw_rate",
            "own_speed",
            "target_x",
            "target_y",
            "target_heading",
            "target_speed",
            "desired_heading",
            "los_term",
            "cte_term",
            "colav_term",
            "steering_cmd",
        ])
        .map_err(csv_err(path))?;
    for s in steps {
        writer
            .write_record([
                f6(s.time),
                f6(s.own.x),
                f6(s.own.y),
                f6(s.own.heading),
                f6(s.own.yaw_rate),
                f6(s.own.speed),
                f6(s.target.x),
                f6(s.target.y),
                f6(s.target.heading),
                f6(s.target.speed),
                f6(s.desired_heading),
                f6(s.los_term),
                f6(s.cte_term),
                f6(s.colav_term),
                f6(s.steering_cmd),
            ])
            .map_err(csv_err(path))?;
    }
    writer.flush().map_err(io_err(path))
}

fn write_decisions_csv(path: &Path, decisions: &[DecisionRecord]) -> Result<(), ScenarioError> {
    let mut writer = csv::Writer::from_path(path).map_err(csv_err(path))?;
    writer
        .write_record([
            "cycle",
            "situation",
            "action",
            "turn",
            "risk",
            "range",
            "dcpa",
            "tcpa",
            "rule_citation",
            "reasoning",
        ])
        .map_err(csv_err(path))?;
    for d in decisions {
        writer
            .write_record([
                d.cycle.to_string(),
                d.decision.situation.to_string(),
                d.decision.action.to_string(),
                d.decision.action.turn().to_string(),
                f2(d.risk.risk),
                f2(d.range),
                f2(d.dcpa),
                f2(d.tcpa),
                d.decision.rule_citation.clone(),
                d.decision.reasoning.clone(),
            ])
            .map_err(csv_err(path))?;
    }
    writer.flush().map_err(io_err(path))
}

/// Green-yellow-red ramp over the unit risk interval.
fn risk_color(risk: f64) -> String {
    let r = risk.clamp(0.0, 1.0);
    let red = (255.0 * (2.0 * r).min(1.0)).round() as u8;
    let green = (255.0 * (2.0 * (1.0 - r)).min(1.0)).round() as u8;
    format!("#{red:02x}{green:02x}28")
}

struct Frame {
    min_e: f64,
    min_n: f64,
    scale: f64,
    height: f64,
}

impl Frame {
    fn to_svg(&self, north: f64, east: f64) -> (f64, f64) {
        (
            (east - self.min_e) * self.scale,
            self.height - (north - self.min_n) * self.scale,
        )
    }
}

fn polyline(points: &[(f64, f64)], stroke: &str, width: f64, dashed: bool) -> String {
    let mut coords = String::new();
    for (x, y) in points {
        let _ = write!(coords, "{x:.2},{y:.2} ");
    }
    let dash = if dashed { " stroke-dasharray=\"6 4\"" } else { "" };
    format!(
        "<polyline fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"{dash} points=\"{}\"/>\n",
        coords.trim_end()
    )
}

fn render_svg(log: &TrajectoryLog, meta: &RunMeta, route: &[crate::guidance::Waypoint]) -> String {
    let size = 800.0;
    let margin = 60.0;

    let mut min_n = f64::INFINITY;
    let mut max_n = f64::NEG_INFINITY;
    let mut min_e = f64::INFINITY;
    let mut max_e = f64::NEG_INFINITY;
    let step_points = log
        .steps
        .iter()
        .flat_map(|s| [(s.own.x, s.own.y), (s.target.x, s.target.y)]);
    let route_points = route.iter().map(|wp| (wp.x, wp.y));
    for (n, e) in step_points.chain(route_points) {
        min_n = min_n.min(n);
        max_n = max_n.max(n);
        min_e = min_e.min(e);
        max_e = max_e.max(e);
    }
    if !min_n.is_finite() {
        min_n = 0.0;
        max_n = 1.0;
        min_e = 0.0;
        max_e = 1.0;
    }
    let span = (max_n - min_n).max(max_e - min_e).max(1.0);
    let scale = (size - 2.0 * margin) / span;
    let width = (max_e - min_e) * scale + 2.0 * margin;
    let height = (max_n - min_n) * scale + 2.0 * margin;
    let frame = Frame {
        min_e: min_e - margin / scale,
        min_n: min_n - margin / scale,
        scale,
        height,
    };

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"12\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{} ({} decider, \
         North up)</text>\n",
        meta.scenario, meta.decider
    );

    // Own ship path in black.
    let own_points: Vec<(f64, f64)> = log
        .steps
        .iter()
        .map(|s| frame.to_svg(s.own.x, s.own.y))
        .collect();
    svg.push_str(&polyline(&own_points, "black", 2.0, false));

    // Target path colored by the risk that was current at each step:
    // piecewise by decision cycle, zero before the first decision.
    let mut decision_idx = 0usize;
    let mut current_risk = 0.0;
    let mut segment: Vec<(f64, f64)> = Vec::new();
    let mut segment_color = risk_color(current_risk);
    for s in &log.steps {
        while decision_idx < log.decisions.len() && log.decisions[decision_idx].time <= s.time {
            current_risk = log.decisions[decision_idx].risk.risk;
            decision_idx += 1;
        }
        let color = risk_color(current_risk);
        let point = frame.to_svg(s.target.x, s.target.y);
        if color != segment_color && !segment.is_empty() {
            segment.push(point);
            svg.push_str(&polyline(&segment, &segment_color, 2.5, false));
            segment.clear();
            segment_color = color;
        }
        segment.push(point);
    }
    if segment.len() > 1 {
        svg.push_str(&polyline(&segment, &segment_color, 2.5, false));
    }

    // Waypoints from the own-ship start and turning points: mark the start
    // of the own track and its end, plus target start.
    if let (Some(first), Some(last)) = (log.steps.first(), log.steps.last()) {
        let (x, y) = frame.to_svg(first.own.x, first.own.y);
        let _ = write!(
            svg,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"5\" fill=\"black\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">own start</text>\n",
            x + 8.0,
            y + 4.0
        );
        let (x, y) = frame.to_svg(first.target.x, first.target.y);
        let _ = write!(
            svg,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"5\" fill=\"none\" stroke=\"black\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">target start</text>\n",
            x + 8.0,
            y + 4.0
        );
        let (x, y) = frame.to_svg(last.own.x, last.own.y);
        let _ = writeln!(
            svg,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"8\" height=\"8\" fill=\"black\"/>",
            x - 4.0,
            y - 4.0
        );
    }

    // Route waypoints.
    for (i, wp) in route.iter().enumerate() {
        let (x, y) = frame.to_svg(wp.x, wp.y);
        let _ = write!(
            svg,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"none\" stroke=\"#555\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" \
             fill=\"#555\">W{i}</text>\n",
            x + 6.0,
            y - 6.0
        );
    }

    // Risk legend.
    for (i, r) in [0.0, 0.25, 0.5, 0.75, 1.0].iter().enumerate() {
        let x = 12.0 + i as f64 * 70.0;
        let _ = write!(
            svg,
            "<rect x=\"{x:.0}\" y=\"{:.0}\" width=\"14\" height=\"14\" fill=\"{}\"/>\n\
             <text x=\"{:.0}\" y=\"{:.0}\" font-family=\"sans-serif\" font-size=\"11\">risk {r:.2}</text>\n",
            height - 28.0,
            risk_color(*r),
            x + 18.0,
            height - 16.0
        );
    }

    svg.push_str("</svg>\n");
    svg
}

/// Write `trajectory.csv`, `decisions.csv`, `summary.json`, and
/// `trajectory.svg` into `out_dir` (created if missing). Returns the paths
/// written.
pub fn emit_outputs(
    log: &TrajectoryLog,
    metrics: &SummaryMetrics,
    meta: &RunMeta,
    route: &[crate::guidance::Waypoint],
    out_dir: &Path,
) -> Result<Vec<PathBuf>, ScenarioError> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let trajectory_path = out_dir.join("trajectory.csv");
    write_trajectory_csv(&trajectory_path, &log.steps)?;

    let decisions_path = out_dir.join("decisions.csv");
    write_decisions_csv(&decisions_path, &log.decisions)?;

    let summary_path = out_dir.join("summary.json");
    let llm_decisions = log
        .decisions
        .iter()
        .filter(|d| d.source == DecisionSource::Llm)
        .count();
    let summary = SummaryOut {
        meta,
        metrics,
        llm_decisions,
        fallback_decisions: log.decisions.len() - llm_decisions,
        discrepancies: log
            .decisions
            .iter()
            .filter_map(|d| {
                d.discrepancy.as_deref().map(|detail| DiscrepancyOut {
                    cycle: d.cycle,
                    detail,
                })
            })
            .collect(),
    };
    let mut summary_json =
        serde_json::to_string_pretty(&summary).map_err(|e| ScenarioError::OutputIo {
            path: summary_path.clone(),
            source: std::io::Error::other(e),
        })?;
    summary_json.push('\n');
    std::fs::write(&summary_path, summary_json).map_err(io_err(&summary_path))?;

    let svg_path = out_dir.join("trajectory.svg");
    std::fs::write(&svg_path, render_svg(log, meta, route)).map_err(io_err(&svg_path))?;

    Ok(vec![trajectory_path, decisions_path, summary_path, svg_path])
}
