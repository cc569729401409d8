//! Scoring batches of session logs into engagement vector tables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::condition::TrialCondition;
use crate::ingest::{derive_raw_metrics, satisfaction_score, IngestError, IngestOptions, SessionLog};
use crate::model::{compose_vector, EngagementVector, ModelError, RawMetrics, TimeBounds, WeightConfig};
use crate::stats::CohortVectors;

pub const TABLE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("session {session_id}: {source}")]
    Ingest {
        session_id: String,
        #[source]
        source: IngestError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no sessions found")]
    Empty,
    #[error("cannot read vector table: {0}")]
    Table(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSession {
    pub session_id: String,
    pub condition: TrialCondition,
    pub raw: RawMetrics,
    pub satisfaction: f64,
    pub vector: EngagementVector,
}

/// Replaces cohort-relative time bounds with the fastest and slowest
/// completion times among `raws`.
pub fn resolve_weights(raws: &[RawMetrics], cfg: &WeightConfig) -> Result<WeightConfig, AnalysisError> {
    cfg.validate()?;
    match cfg.time_bounds {
        TimeBounds::Fixed { .. } => Ok(*cfg),
        TimeBounds::CohortRange => {
            if raws.is_empty() {
                return Err(AnalysisError::Empty);
            }
            let lo = raws.iter().map(|r| r.tq_minutes).fold(f64::INFINITY, f64::min);
            let hi = raws.iter().map(|r| r.tq_minutes).fold(f64::NEG_INFINITY, f64::max);
            Ok(cfg.with_time_bounds(lo, hi))
        }
    }
}

/// Scores every log together, so cohort-relative bounds span all of them.
pub fn score_logs(
    logs: &[SessionLog],
    cfg: &WeightConfig,
    opts: &IngestOptions,
) -> Result<(WeightConfig, Vec<ScoredSession>), AnalysisError> {
    if logs.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let raws = logs
        .iter()
        .map(|log| {
            derive_raw_metrics(log, opts).map_err(|source| AnalysisError::Ingest {
                session_id: log.session_id.clone(),
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let resolved = resolve_weights(&raws, cfg)?;
    let scored = logs
        .iter()
        .zip(raws)
        .map(|(log, raw)| {
            Ok(ScoredSession {
                session_id: log.session_id.clone(),
                condition: log.condition,
                satisfaction: satisfaction_score(log).map_err(|source| AnalysisError::Ingest {
                    session_id: log.session_id.clone(),
                    source,
                })?,
                vector: compose_vector(&raw, &resolved)?,
                raw,
            })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    Ok((resolved, scored))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorRow {
    pub session_id: String,
    pub condition: TrialCondition,
    pub e_cog: f64,
    pub e_emo: f64,
    pub e_beh: f64,
    pub e_final: f64,
}

/// Per-session engagement vectors plus the weights they were scored with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorTable {
    pub schema_version: u32,
    pub weights: WeightConfig,
    pub rows: Vec<VectorRow>,
}

impl VectorTable {
    pub fn new(weights: WeightConfig, scored: &[ScoredSession]) -> Self {
        Self {
            schema_version: TABLE_SCHEMA_VERSION,
            weights,
            rows: scored
                .iter()
                .map(|s| VectorRow {
                    session_id: s.session_id.clone(),
                    condition: s.condition,
                    e_cog: s.vector.e_cog,
                    e_emo: s.vector.e_emo,
                    e_beh: s.vector.e_beh,
                    e_final: s.vector.e_final,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("table serialises");
        out.push(b'\n');
        out
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["session_id", "condition", "e_cog", "e_emo", "e_beh", "e_final"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.session_id.clone(),
                r.condition.as_str().to_string(),
                r.e_cog.to_string(),
                r.e_emo.to_string(),
                r.e_beh.to_string(),
                r.e_final.to_string(),
            ])
            .expect("in-memory write");
        }
        w.into_inner().expect("flush")
    }

    /// Reads a JSON table. The schema version is returned separately so
    /// callers can reject mixed versions themselves.
    pub fn from_json(bytes: &[u8]) -> Result<Self, AnalysisError> {
        serde_json::from_slice(bytes).map_err(|e| AnalysisError::Table(e.to_string()))
    }

    /// Groups rows by condition, in order of first appearance.
    pub fn cohorts(&self) -> Vec<CohortVectors> {
        group_vectors(self.rows.iter().map(|r| {
            (
                r.condition,
                EngagementVector {
                    e_cog: r.e_cog,
                    e_emo: r.e_emo,
                    e_beh: r.e_beh,
                    e_final: r.e_final,
                },
            )
        }))
    }
}

pub fn group_vectors(items: impl IntoIterator<Item = (TrialCondition, EngagementVector)>) -> Vec<CohortVectors> {
    let mut out: Vec<CohortVectors> = Vec::new();
    for (condition, v) in items {
        match out.iter_mut().find(|c| c.condition == condition) {
            Some(c) => c.vectors.push(v),
            None => out.push(CohortVectors {
                condition,
                vectors: vec![v],
            }),
        }
    }
    out
}
