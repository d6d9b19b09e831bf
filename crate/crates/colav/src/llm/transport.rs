//! Chat-completion transports: the JSON wire shapes, a blocking HTTP
//! client, and the fixture-driven mock used in tests and mock runs.

use std::collections::VecDeque;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{LlmConfig, LlmError};

#[derive(Debug, Clone, Serialize)]
pub struct ChatMessage {
    pub role: &'static str,
    pub content: String,
}

/// OpenAI-compatible chat-completions request body.
#[derive(Debug, Clone, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
}

#[derive(Debug, Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Debug, Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Debug, Deserialize)]
struct WireMessage {
    content: String,
}

/// Pull `choices[0].message.content` out of a chat-completions response
/// body. Unknown fields are ignored for wire compatibility.
pub fn extract_content(body: &str) -> Result<String, LlmError> {
    let response: WireResponse =
        serde_json::from_str(body).map_err(|e| LlmError::MalformedResponse(e.to_string()))?;
    response
        .choices
        .into_iter()
        .next()
        .map(|choice| choice.message.content)
        .ok_or_else(|| LlmError::MalformedResponse("empty choices array".to_string()))
}

/// One attempt against a chat-completion endpoint. Implementations return
/// the raw response body; content extraction and parsing happen above.
pub trait ChatTransport: Send {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, LlmError>;
}

/// Blocking HTTP transport with a per-attempt timeout. The bearer token is
/// read from the environment variable named in the config; when the
/// variable is unset the Authorization header is omitted (local mock
/// endpoints do not need one).
pub struct HttpTransport {
    endpoint: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(config: &LlmConfig) -> Self {
        let timeout = Duration::from_secs_f64(config.timeout_secs.max(0.001));
        let agent = ureq::AgentBuilder::new()
            .timeout_connect(timeout)
            .timeout(timeout)
            .build();
        Self {
            endpoint: config.endpoint_url.clone(),
            api_key: std::env::var(&config.api_key_env).ok(),
            agent,
        }
    }
}

impl ChatTransport for HttpTransport {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, LlmError> {
        let body = serde_json::to_string(request)
            .map_err(|e| LlmError::Transport(format!("request serialization: {e}")))?;
        let mut http = self
            .agent
            .post(&self.endpoint)
            .set("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            http = http.set("Authorization", &format!("Bearer {key}"));
        }
        match http.send_string(&body) {
            Ok(response) => response
                .into_string()
                .map_err(|e| LlmError::Transport(format!("reading response body: {e}"))),
            Err(ureq::Error::Status(code, response)) => Err(LlmError::Transport(format!(
                "HTTP {code}: {}",
                response.into_string().unwrap_or_default()
            ))),
            Err(e) => Err(LlmError::Transport(e.to_string())),
        }
    }
}

/// Scripted transport serving an ordered list of canned response bodies.
///
/// The fixture file is a JSON array; a string element is served verbatim
/// as the body, any other element is serialized back to JSON and served as
/// the body. A run that consumes more responses than the fixture holds
/// gets an exhaustion error (which the decider resolves to rule fallback).
pub struct FixtureTransport {
    bodies: VecDeque<String>,
    served: usize,
}

impl FixtureTransport {
    pub fn from_bodies<I: IntoIterator<Item = String>>(bodies: I) -> Self {
        Self {
            bodies: bodies.into_iter().collect(),
            served: 0,
        }
    }

    /// Wrap plain content strings into chat-completion response bodies.
    pub fn from_contents<I: IntoIterator<Item = String>>(contents: I) -> Self {
        Self::from_bodies(contents.into_iter().map(|content| {
            serde_json::json!({
                "choices": [{"message": {"role": "assistant", "content": content}}]
            })
            .to_string()
        }))
    }

    pub fn from_json_str(text: &str) -> Result<Self, LlmError> {
        let entries: Vec<serde_json::Value> = serde_json::from_str(text)
            .map_err(|e| LlmError::Fixture(format!("fixture file must be a JSON array: {e}")))?;
        let bodies = entries
            .into_iter()
            .map(|entry| match entry {
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            })
            .collect();
        Ok(Self {
            bodies,
            served: 0,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, LlmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LlmError::Fixture(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn remaining(&self) -> usize {
        self.bodies.len()
    }
}

impl ChatTransport for FixtureTransport {
    fn complete(&mut self, _request: &ChatRequest) -> Result<String, LlmError> {
        match self.bodies.pop_front() {
            Some(body) => {
                self.served += 1;
                Ok(body)
            }
            None => Err(LlmError::Fixture(format!(
                "fixture exhausted after {} responses",
                self.served
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extract_content_happy_path() {
        let body = r#"{
            "id": "chatcmpl-1", "object": "chat.completion",
            "choices": [{"index": 0, "message": {"role": "assistant", "content": "hello"},
                         "finish_reason": "stop"}],
            "usage": {"total_tokens": 3}
        }"#;
        assert_eq!(extract_content(body).unwrap(), "hello");
    }

    #[test]
    fn extract_content_rejects_garbage_and_empty_choices() {
        assert!(extract_content("not json").is_err());
        assert!(extract_content(r#"{"choices": []}"#).is_err());
        assert!(extract_content(r#"{"error": {"message": "overloaded"}}"#).is_err());
    }

    #[test]
    fn fixture_serves_in_order_then_exhausts() {
        let mut t = FixtureTransport::from_contents(vec!["a".to_string(), "b".to_string()]);
        let req = ChatRequest {
            model: "m".to_string(),
            messages: vec![],
            temperature: 0.2,
        };
        assert_eq!(extract_content(&t.complete(&req).unwrap()).unwrap(), "a");
        assert_eq!(extract_content(&t.complete(&req).unwrap()).unwrap(), "b");
        assert!(t.complete(&req).is_err());
    }

    #[test]
    fn fixture_file_accepts_strings_and_objects() {
        let json = r#"[
            "plain garbage body",
            {"choices": [{"message": {"role": "assistant", "content": "ok"}}]}
        ]"#;
        let mut t = FixtureTransport::from_json_str(json).unwrap();
        assert_eq!(t.remaining(), 2);
        let req = ChatRequest {
            model: "m".to_string(),
            messages: vec![],
            temperature: 0.2,
        };
        let first = t.complete(&req).unwrap();
        assert!(extract_content(&first).is_err());
        let second = t.complete(&req).unwrap();
        assert_eq!(extract_content(&second).unwrap(), "ok");
    }

    #[test]
    fn fixture_rejects_non_array_files() {
        assert!(FixtureTransport::from_json_str("{}").is_err());
        assert!(FixtureTransport::from_json_str("nonsense").is_err());
    }
}
