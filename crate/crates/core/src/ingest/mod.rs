//! Session-log schema, parsing, validation and raw-metric derivation.
//!
//! Perception arrives pre-classified: gaze samples carry an `on_target` flag
//! and expression frames carry one of seven labels. Positive means `happy`;
//! frustrated means `angry`, `sad` or `disgust`.

mod codec;
mod metrics;
mod schema;
mod validate;

use thiserror::Error;

pub use codec::{decode_session_log, parse_session_log, write_session_log};
pub use metrics::{derive_raw_metrics, engagement_rating, satisfaction_score, union_length, IngestOptions};
pub use schema::{
    Event, Expression, QuizAnswerRecord, QuizRecord, SelfReport, SessionLog, StudentProfile, LIKERT_ITEMS,
    QUIZ_QUESTIONS, SCHEMA_VERSION, TEXT_ITEMS,
};
pub use validate::{validate_log, Violation, MAX_AGE, MIN_AGE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unsupported session-log schema_version {0}")]
    UnsupportedVersion(u64),
    #[error("validation failed: {}", join_violations(.0))]
    Validation(Vec<Violation>),
    #[error("metric undefined: {0}")]
    MetricUndefined(String),
}

impl IngestError {
    /// Violation codes, when this is a validation error.
    pub fn codes(&self) -> Vec<&str> {
        match self {
            IngestError::Validation(v) => v.iter().map(|x| x.code.as_str()).collect(),
            _ => Vec::new(),
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
