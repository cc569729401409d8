//! Trial comparison statistics: Mann-Whitney U, boxplots, z-score radar and reports.

mod descriptive;
mod mwu;
mod report;

use thiserror::Error;

use crate::condition::TrialCondition;

pub use descriptive::{boxplot_stats, mean, quantile_sorted, sample_std, zscore_radar, BoxplotStats};
pub use mwu::{
    exact_p, mann_whitney_u, normal_approx_p, u_statistic, MwuMethod, MwuResult, EXACT_MAX_SMALLER, EXACT_MAX_TOTAL,
};
pub use report::{
    compare_trials, emit_report, parse_report, CohortVectors, ComparisonReport, DescriptiveRow, FinalOrdering,
    PairwiseRow, RadarMatrix, ReportFormat, ALPHA, REPORT_SCHEMA_VERSION,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("need at least {needed} values, got {got}")]
    TooSmall { needed: usize, got: usize },
    #[error("samples must be finite")]
    NotFinite,
    #[error("condition {0} appears more than once")]
    DuplicateCondition(TrialCondition),
    #[error("unknown report format {0:?} (expected json or csv)")]
    UnknownFormat(String),
    #[error("cannot parse report: {0}")]
    Parse(String),
    #[error("unsupported report schema_version {0}")]
    SchemaVersion(u64),
}
