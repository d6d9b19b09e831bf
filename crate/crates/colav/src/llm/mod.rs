//! High-level decision makers: the rule engine wrapper, the LLM adapter
//! with its consistency guard and rule fallback, and an opt-in concurrent
//! wrapper that overlaps query latency with control stepping.
//!
//! The adapter consults the model only while a decision is actually in
//! play (encounter initiation and active hold); quiescent cycles and the
//! mechanical release are produced by the rule engine directly so the risk
//! trigger stays authoritative. Every failure mode - transport error,
//! malformed body, unparseable text, exhausted retries, an action that
//! contradicts the latched state - resolves to the rule decision, so the
//! vessel always has a decision.

mod parse;
mod prompt;
mod transport;

pub use parse::parse_response;
pub use prompt::{build_prompt, PromptTemplate};
pub use transport::{
    extract_content, ChatMessage, ChatRequest, ChatTransport, FixtureTransport, HttpTransport,
};

use std::sync::mpsc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colregs::{
    rule_citation, rule_decide, Decision, DecisionState, EncounterPhase, ManeuverAction,
    Situation, Thresholds,
};
use crate::risk::{EncounterGeometry, RiskBreakdown};

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("non-finite {0} telemetry")]
    NonFiniteTelemetry(&'static str),
    #[error("cannot parse model response ({reason})")]
    Parse { reason: String, raw: String },
    #[error("malformed chat response body: {0}")]
    MalformedResponse(String),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("fixture error: {0}")]
    Fixture(String),
}

/// Connection settings for a chat-completions endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub endpoint_url: String,
    pub model: String,
    pub temperature: f64,
    /// Per-attempt timeout, seconds.
    pub timeout_secs: f64,
    /// Retries after the first attempt.
    pub max_retries: u32,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            endpoint_url: "https://api.openai.com/v1/chat/completions".to_string(),
            model: "gpt-4".to_string(),
            temperature: 0.2,
            timeout_secs: 5.0,
            max_retries: 2,
            api_key_env: "COLAV_API_KEY".to_string(),
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.endpoint_url.is_empty() {
            return Err("endpoint_url must not be empty".to_string());
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(format!(
                "temperature must be in [0, 2], got {}",
                self.temperature
            ));
        }
        if !self.timeout_secs.is_finite() || self.timeout_secs <= 0.0 {
            return Err(format!(
                "timeout_secs must be positive, got {}",
                self.timeout_secs
            ));
        }
        Ok(())
    }
}

/// Parsed three-field model output.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplainableAction {
    pub situation: Situation,
    pub action: ManeuverAction,
    pub reasoning: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionSource {
    Llm,
    Fallback,
}

/// Outcome of one decision query, retaining the raw response for audit.
#[derive(Debug, Clone)]
pub struct DeciderOutcome {
    pub decision: Decision,
    pub source: DecisionSource,
    pub latency: Duration,
    pub raw_response: String,
    /// Set when the response contradicted the latched state and was
    /// overridden.
    pub discrepancy: Option<String>,
}

/// Everything a decider sees for one decision cycle.
#[derive(Debug, Clone, Copy)]
pub struct DecisionContext<'a> {
    pub cycle: u64,
    pub geometry: &'a EncounterGeometry,
    pub risk: &'a RiskBreakdown,
    pub state: &'a DecisionState,
    pub thresholds: &'a Thresholds,
}

pub trait Decider: Send {
    fn decide(&mut self, ctx: &DecisionContext) -> DeciderOutcome;
}

/// The deterministic rule engine as a decider.
pub struct RuleDecider;

impl Decider for RuleDecider {
    fn decide(&mut self, ctx: &DecisionContext) -> DeciderOutcome {
        let start = Instant::now();
        let decision = rule_decide(ctx.geometry, ctx.risk, ctx.state, ctx.thresholds);
        DeciderOutcome {
            decision,
            source: DecisionSource::Fallback,
            latency: start.elapsed(),
            raw_response: String::new(),
            discrepancy: None,
        }
    }
}

/// LLM-backed decider over a pluggable transport.
pub struct LlmDecider {
    template: PromptTemplate,
    config: LlmConfig,
    transport: Box<dyn ChatTransport>,
}

impl LlmDecider {
    pub fn new(
        template: PromptTemplate,
        config: LlmConfig,
        transport: Box<dyn ChatTransport>,
    ) -> Self {
        Self {
            template,
            config,
            transport,
        }
    }

    /// Decider talking to the configured HTTP endpoint.
    pub fn over_http(template: PromptTemplate, config: LlmConfig) -> Self {
        let transport = Box::new(HttpTransport::new(&config));
        Self::new(template, config, transport)
    }

    fn fallback(
        rule: Decision,
        raw_response: String,
        discrepancy: Option<String>,
        start: Instant,
    ) -> DeciderOutcome {
        DeciderOutcome {
            decision: rule,
            source: DecisionSource::Fallback,
            latency: start.elapsed(),
            raw_response,
            discrepancy,
        }
    }

    /// Validate a parsed action against the latched state and assemble the
    /// decision. While an encounter is active, the only legal model output
    /// is the latched action; anything else keeps the latch and records
    /// the discrepancy.
    fn guarded(
        &self,
        ctx: &DecisionContext,
        rule: Decision,
        parsed: ExplainableAction,
        raw_response: String,
        start: Instant,
    ) -> DeciderOutcome {
        if ctx.state.active {
            let latched_action = ctx.state.action.unwrap_or(ManeuverAction::StandOn);
            if parsed.action != latched_action {
                let discrepancy = format!(
                    "cycle {}: response proposed {} (turn {}) while {} (turn {}) is latched; \
                     keeping the latched action",
                    ctx.cycle,
                    parsed.action,
                    parsed.action.turn(),
                    latched_action,
                    latched_action.turn(),
                );
                return Self::fallback(rule, raw_response, Some(discrepancy), start);
            }
            let situation = ctx.state.situation.unwrap_or(parsed.situation);
            DeciderOutcome {
                decision: Decision {
                    situation,
                    action: latched_action,
                    rule_citation: rule_citation(situation, latched_action).to_string(),
                    reasoning: parsed.reasoning,
                    phase: EncounterPhase::Engaged,
                },
                source: DecisionSource::Llm,
                latency: start.elapsed(),
                raw_response,
                discrepancy: None,
            }
        } else {
            DeciderOutcome {
                decision: Decision {
                    situation: parsed.situation,
                    action: parsed.action,
                    rule_citation: rule_citation(parsed.situation, parsed.action).to_string(),
                    reasoning: parsed.reasoning,
                    phase: EncounterPhase::Engaged,
                },
                source: DecisionSource::Llm,
                latency: start.elapsed(),
                raw_response,
                discrepancy: None,
            }
        }
    }
}

impl Decider for LlmDecider {
    fn decide(&mut self, ctx: &DecisionContext) -> DeciderOutcome {
        let start = Instant::now();
        let rule = rule_decide(ctx.geometry, ctx.risk, ctx.state, ctx.thresholds);

        // Quiescent cycles and the mechanical release never consult the
        // model; the risk trigger and release predicate stay authoritative.
        if rule.phase != EncounterPhase::Engaged {
            return Self::fallback(rule, String::new(), None, start);
        }

        let prompt = match build_prompt(ctx.geometry, ctx.risk, ctx.state, &self.template) {
            Ok(p) => p,
            Err(_) => return Self::fallback(rule, String::new(), None, start),
        };
        let request = ChatRequest {
            model: self.config.model.clone(),
            messages: vec![ChatMessage {
                role: "user",
                content: prompt,
            }],
            temperature: self.config.temperature,
        };

        let mut last_raw = String::new();
        for _ in 0..=self.config.max_retries {
            let body = match self.transport.complete(&request) {
                Ok(body) => body,
                Err(e) => {
                    last_raw = format!("<transport error: {e}>");
                    continue;
                }
            };
            last_raw = body.clone();
            let content = match extract_content(&body) {
                Ok(content) => content,
                Err(_) => continue,
            };
            match parse_response(&content) {
                Ok(parsed) => return self.guarded(ctx, rule, parsed, body, start),
                Err(_) => continue,
            }
        }
        Self::fallback(rule, last_raw, None, start)
    }
}

struct OwnedContext {
    cycle: u64,
    geometry: EncounterGeometry,
    risk: RiskBreakdown,
    state: DecisionState,
    thresholds: Thresholds,
}

/// Opt-in wrapper running the inner decider on a worker thread so a slow
/// endpoint cannot stall the control loop. While a query is in flight the
/// previous decision is reused (a missed cycle); completed outcomes are
/// applied at the next decision boundary, so the control loop always reads
/// one complete, consistent decision.
pub struct ConcurrentDecider {
    request_tx: Option<mpsc::Sender<OwnedContext>>,
    outcome_rx: mpsc::Receiver<DeciderOutcome>,
    worker: Option<std::thread::JoinHandle<()>>,
    busy: bool,
    last: Option<DeciderOutcome>,
}

impl ConcurrentDecider {
    pub fn new(mut inner: Box<dyn Decider>) -> Self {
        let (request_tx, request_rx) = mpsc::channel::<OwnedContext>();
        let (outcome_tx, outcome_rx) = mpsc::channel();
        let worker = std::thread::spawn(move || {
            while let Ok(owned) = request_rx.recv() {
                let ctx = DecisionContext {
                    cycle: owned.cycle,
                    geometry: &owned.geometry,
                    risk: &owned.risk,
                    state: &owned.state,
                    thresholds: &owned.thresholds,
                };
                if outcome_tx.send(inner.decide(&ctx)).is_err() {
                    break;
                }
            }
        });
        Self {
            request_tx: Some(request_tx),
            outcome_rx,
            worker: Some(worker),
            busy: false,
            last: None,
        }
    }
}

impl Decider for ConcurrentDecider {
    fn decide(&mut self, ctx: &DecisionContext) -> DeciderOutcome {
        let ready = if self.busy {
            match self.outcome_rx.try_recv() {
                Ok(outcome) => {
                    self.busy = false;
                    Some(outcome)
                }
                Err(_) => None,
            }
        } else {
            None
        };

        if !self.busy {
            if let Some(tx) = &self.request_tx {
                let owned = OwnedContext {
                    cycle: ctx.cycle,
                    geometry: *ctx.geometry,
                    risk: *ctx.risk,
                    state: *ctx.state,
                    thresholds: *ctx.thresholds,
                };
                if tx.send(owned).is_ok() {
                    self.busy = true;
                }
            }
        }

        match ready {
            Some(outcome) => {
                self.last = Some(outcome.clone());
                outcome
            }
            // Query still in flight: reuse the previous decision, or the
            // synchronous rule decision on the very first cycles.
            None => self
                .last
                .clone()
                .unwrap_or_else(|| RuleDecider.decide(ctx)),
        }
    }
}

impl Drop for ConcurrentDecider {
    fn drop(&mut self) {
        self.request_tx.take();
        if let Some(worker) = self.worker.take() {
            let _ = worker.join();
        }
    }
}
