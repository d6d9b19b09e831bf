//! The HTTP transport against a minimal in-process chat-completions
//! server: wire shape of the request, bearer header handling, retry on
//! server errors, and fallback when the endpoint keeps failing.

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::mpsc;
use std::thread::JoinHandle;

use colav::colregs::{DecisionState, ManeuverAction, Thresholds, Turn};
use colav::llm::{
    Decider, DecisionContext, DecisionSource, LlmConfig, LlmDecider, PromptTemplate,
};
use colav::risk::{EncounterGeometry, RiskBreakdown};

/// Serve `responses` (status, body) pairs one connection at a time, then
/// stop. Returns the request bodies received.
fn spawn_server(responses: Vec<(u16, String)>) -> (String, JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let (ready_tx, ready_rx) = mpsc::channel();
    let handle = std::thread::spawn(move || {
        ready_tx.send(()).unwrap();
        let mut seen = Vec::new();
        for (status, body) in responses {
            let (mut stream, _) = listener.accept().unwrap();
            seen.push(read_request_body(&mut stream));
            let reason = if status == 200 { "OK" } else { "Error" };
            let response = format!(
                "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\n\
                 Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(response.as_bytes()).unwrap();
        }
        seen
    });
    ready_rx.recv().unwrap();
    (format!("http://{addr}"), handle)
}

fn read_request_body(stream: &mut TcpStream) -> String {
    let mut buf = Vec::new();
    let mut chunk = [0u8; 4096];
    loop {
        let n = stream.read(&mut chunk).unwrap();
        buf.extend_from_slice(&chunk[..n]);
        if n == 0 {
            break;
        }
        if let Some(header_end) = find_header_end(&buf) {
            let headers = String::from_utf8_lossy(&buf[..header_end]).to_lowercase();
            let content_length = headers
                .lines()
                .find_map(|line| line.strip_prefix("content-length:"))
                .and_then(|v| v.trim().parse::<usize>().ok())
                .unwrap_or(0);
            if buf.len() >= header_end + 4 + content_length {
                return String::from_utf8_lossy(&buf[header_end + 4..]).to_string();
            }
        }
    }
    String::from_utf8_lossy(&buf).to_string()
}

fn find_header_end(buf: &[u8]) -> Option<usize> {
    buf.windows(4).position(|w| w == b"\r\n\r\n")
}

fn engaged_geometry() -> EncounterGeometry {
    EncounterGeometry {
        range: 431.79,
        bearing: 0.7,
        relative_heading: (-150.09f64).to_radians(),
        cpa_angle: 0.5,
        relative_speed: 22.0,
        own_speed: 16.0,
        target_speed: 8.0,
        dcpa: 257.54,
        tcpa: 16.84,
    }
}

fn high_risk() -> RiskBreakdown {
    RiskBreakdown {
        dcpa_membership: 0.86,
        tcpa_membership: 0.86,
        range_membership: 0.86,
        risk: 0.86,
    }
}

fn chat_body(content: &str) -> String {
    serde_json::json!({
        "id": "chatcmpl-test",
        "object": "chat.completion",
        "choices": [{"index": 0,
                     "message": {"role": "assistant", "content": content},
                     "finish_reason": "stop"}]
    })
    .to_string()
}

fn config_for(endpoint: &str) -> LlmConfig {
    LlmConfig {
        endpoint_url: endpoint.to_string(),
        model: "test-model".to_string(),
        temperature: 0.2,
        timeout_secs: 3.0,
        max_retries: 2,
        api_key_env: "COLAV_TEST_KEY_THAT_IS_UNSET".to_string(),
    }
}

#[test]
fn http_decider_round_trip() {
    let content = "SITUATION: crossing\nACTION: Give-way, turn starboard\n\
                   REASONING: Starboard-side target; Rule 15.";
    let (endpoint, server) = spawn_server(vec![(200, chat_body(content))]);

    let config = config_for(&endpoint);
    let mut decider = LlmDecider::over_http(PromptTemplate::default(), config);
    let geometry = engaged_geometry();
    let risk = high_risk();
    let state = DecisionState::default();
    let thresholds = Thresholds::default();
    let outcome = decider.decide(&DecisionContext {
        cycle: 0,
        geometry: &geometry,
        risk: &risk,
        state: &state,
        thresholds: &thresholds,
    });

    assert_eq!(outcome.source, DecisionSource::Llm);
    assert_eq!(
        outcome.decision.action,
        ManeuverAction::GiveWay(Turn::Starboard)
    );

    let requests = server.join().unwrap();
    let request: serde_json::Value = serde_json::from_str(&requests[0]).unwrap();
    assert_eq!(request["model"], "test-model");
    assert_eq!(request["temperature"], 0.2);
    let prompt = request["messages"][0]["content"].as_str().unwrap();
    for needle in ["0.86", "16.84", "257.54", "431.79", "-150.09"] {
        assert!(prompt.contains(needle), "prompt missing {needle}");
    }
}

#[test]
fn http_decider_retries_server_errors_then_succeeds() {
    let content = "SITUATION: crossing\nACTION: Give-way, turn starboard\nREASONING: Rule 15.";
    let (endpoint, server) = spawn_server(vec![
        (500, r#"{"error": {"message": "overloaded"}}"#.to_string()),
        (200, chat_body(content)),
    ]);

    let mut decider = LlmDecider::over_http(PromptTemplate::default(), config_for(&endpoint));
    let geometry = engaged_geometry();
    let risk = high_risk();
    let state = DecisionState::default();
    let thresholds = Thresholds::default();
    let outcome = decider.decide(&DecisionContext {
        cycle: 0,
        geometry: &geometry,
        risk: &risk,
        state: &state,
        thresholds: &thresholds,
    });

    assert_eq!(outcome.source, DecisionSource::Llm);
    assert_eq!(server.join().unwrap().len(), 2);
}

#[test]
fn http_decider_falls_back_after_persistent_errors() {
    let (endpoint, server) = spawn_server(vec![
        (503, "busy".to_string()),
        (503, "busy".to_string()),
        (503, "busy".to_string()),
    ]);

    let mut decider = LlmDecider::over_http(PromptTemplate::default(), config_for(&endpoint));
    let geometry = engaged_geometry();
    let risk = high_risk();
    let state = DecisionState::default();
    let thresholds = Thresholds::default();
    let outcome = decider.decide(&DecisionContext {
        cycle: 0,
        geometry: &geometry,
        risk: &risk,
        state: &state,
        thresholds: &thresholds,
    });

    // max_retries = 2 means exactly three attempts, then the rule engine
    // answers.
    assert_eq!(outcome.source, DecisionSource::Fallback);
    assert_eq!(
        outcome.decision.action,
        ManeuverAction::GiveWay(Turn::Starboard)
    );
    assert_eq!(server.join().unwrap().len(), 3);
}

#[test]
fn bearer_header_is_sent_when_the_env_var_is_set() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let handle = std::thread::spawn(move || {
        let (mut stream, _) = listener.accept().unwrap();
        let mut buf = Vec::new();
        let mut chunk = [0u8; 4096];
        loop {
            let n = stream.read(&mut chunk).unwrap();
            buf.extend_from_slice(&chunk[..n]);
            if n == 0 || find_header_end(&buf).is_some() {
                break;
            }
        }
        let body = chat_body("SITUATION: crossing\nACTION: Stand-on\nREASONING: clear.");
        let response = format!(
            "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\
             Connection: close\r\n\r\n{body}",
            body.len()
        );
        stream.write_all(response.as_bytes()).unwrap();
        String::from_utf8_lossy(&buf).to_string()
    });

    // Env var manipulation is process-global; this test owns a unique name.
    let var = "COLAV_TEST_BEARER_KEY";
    std::env::set_var(var, "sk-test-123");
    let config = LlmConfig {
        endpoint_url: format!("http://{addr}"),
        api_key_env: var.to_string(),
        ..config_for("unused")
    };
    let mut decider = LlmDecider::over_http(PromptTemplate::default(), config);
    std::env::remove_var(var);

    let geometry = engaged_geometry();
    let risk = high_risk();
    let state = DecisionState::default();
    let thresholds = Thresholds::default();
    let _ = decider.decide(&DecisionContext {
        cycle: 0,
        geometry: &geometry,
        risk: &risk,
        state: &state,
        thresholds: &thresholds,
    });

    let request_head = handle.join().unwrap();
    assert!(
        request_head.contains("Bearer sk-test-123"),
        "no bearer header in: {request_head}"
    );
}
