//! Deterministic encounter simulator for COLREGs-aware autonomous surface
//! vessel navigation.
//!
//! The crate combines a nonlinear vessel model, line-of-sight waypoint
//! guidance with reactive collision avoidance, a PD heading autopilot,
//! online CPA/fuzzy risk assessment, and a pluggable high-level decision
//! maker (a deterministic rule engine plus an LLM adapter with explainable
//! outputs and rule fallback). Scenarios run closed-loop at 100 Hz control
//! and 1 Hz decision cadence and replay bit-identically for a fixed seed.

pub mod angles;
pub mod colregs;
pub mod control;
pub mod dynamics;
pub mod guidance;
pub mod llm;
pub mod risk;
pub mod scenario;
