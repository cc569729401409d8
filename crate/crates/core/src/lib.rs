//! Engagement analytics for tutoring sessions.
//!
//! Scores sessions with the engagement vector model, ingests timestamped
//! session logs, synthesises calibrated cohorts, compares trial conditions
//! statistically and simulates the tutor's lesson flow.

pub mod analysis;
pub mod cohort;
pub mod condition;
pub mod ingest;
pub mod model;
pub mod orchestrator;
pub mod reproduce;
pub mod stats;

pub use condition::TrialCondition;
pub use model::{EngagementVector, RawMetrics, WeightConfig};
