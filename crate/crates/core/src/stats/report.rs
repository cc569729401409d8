//! Trial comparison report and its JSON / CSV forms.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::descriptive::{boxplot_stats, mean, sample_std, zscore_radar, BoxplotStats};
use super::mwu::{mann_whitney_u, MwuResult};
use super::StatsError;
use crate::condition::TrialCondition;
use crate::model::{Component, EngagementVector};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortVectors {
    pub condition: TrialCondition,
    pub vectors: Vec<EngagementVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveRow {
    pub condition: TrialCondition,
    pub component: Component,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub boxplot: BoxplotStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseRow {
    pub component: Component,
    pub condition_a: TrialCondition,
    pub condition_b: TrialCondition,
    pub result: MwuResult,
    pub significant: bool,
}

/// Component means per condition and their row-wise z-scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarMatrix {
    pub indicators: Vec<Component>,
    pub conditions: Vec<TrialCondition>,
    pub means: Vec<Vec<f64>>,
    pub z_scores: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalOrdering {
    /// Conditions sorted by ascending mean final score.
    pub ascending: Vec<TrialCondition>,
    pub means: Vec<f64>,
    /// Whether the input order of conditions has strictly increasing final means.
    pub input_order_increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub conditions: Vec<TrialCondition>,
    pub samples: Vec<CohortVectors>,
    pub descriptive: Vec<DescriptiveRow>,
    pub pairwise: Vec<PairwiseRow>,
    pub radar: RadarMatrix,
    pub final_ordering: FinalOrdering,
}

impl ComparisonReport {
    pub fn pairwise_result(&self, component: Component, a: TrialCondition, b: TrialCondition) -> Option<&PairwiseRow> {
        self.pairwise.iter().find(|r| {
            r.component == component
                && ((r.condition_a == a && r.condition_b == b) || (r.condition_a == b && r.condition_b == a))
        })
    }

    pub fn descriptive_row(&self, condition: TrialCondition, component: Component) -> Option<&DescriptiveRow> {
        self.descriptive
            .iter()
            .find(|r| r.condition == condition && r.component == component)
    }

    /// Rebuilds the report from its embedded samples.
    pub fn recompute(&self) -> Result<ComparisonReport, StatsError> {
        compare_trials(&self.samples)
    }
}

/// Full comparison of cohorts, in the order given.
pub fn compare_trials(cohorts: &[CohortVectors]) -> Result<ComparisonReport, StatsError> {
    if cohorts.len() < 2 {
        return Err(StatsError::TooSmall {
            needed: 2,
            got: cohorts.len(),
        });
    }
    for (i, c) in cohorts.iter().enumerate() {
        if cohorts[..i].iter().any(|d| d.condition == c.condition) {
            return Err(StatsError::DuplicateCondition(c.condition));
        }
        if c.vectors.len() < 2 {
            return Err(StatsError::TooSmall {
                needed: 2,
                got: c.vectors.len(),
            });
        }
    }
    let column = |c: &CohortVectors, k: Component| c.vectors.iter().map(|v| v.component(k)).collect::<Vec<_>>();

    let mut descriptive = Vec::new();
    for c in cohorts {
        for k in Component::ALL {
            let x = column(c, k);
            descriptive.push(DescriptiveRow {
                condition: c.condition,
                component: k,
                n: x.len(),
                mean: mean(&x)?,
                std: sample_std(&x)?,
                boxplot: boxplot_stats(&x)?,
            });
        }
    }

    let mut pairwise = Vec::new();
    for k in Component::PARTS {
        for i in 0..cohorts.len() {
            for j in i + 1..cohorts.len() {
                let result = mann_whitney_u(&column(&cohorts[i], k), &column(&cohorts[j], k))?;
                pairwise.push(PairwiseRow {
                    component: k,
                    condition_a: cohorts[i].condition,
                    condition_b: cohorts[j].condition,
                    significant: result.p_value < ALPHA,
                    result,
                });
            }
        }
    }

    let conditions: Vec<TrialCondition> = cohorts.iter().map(|c| c.condition).collect();
    let means: Vec<Vec<f64>> = Component::ALL
        .iter()
        .map(|&k| cohorts.iter().map(|c| mean(&column(c, k))).collect())
        .collect::<Result<_, _>>()?;
    let z_scores = zscore_radar(&means)?;

    let finals = &means[3];
    let mut order: Vec<usize> = (0..cohorts.len()).collect();
    order.sort_by(|&a, &b| finals[a].total_cmp(&finals[b]));
    let final_ordering = FinalOrdering {
        ascending: order.iter().map(|&i| conditions[i]).collect(),
        means: order.iter().map(|&i| finals[i]).collect(),
        input_order_increasing: finals.windows(2).all(|w| w[0] < w[1]),
    };

    Ok(ComparisonReport {
        schema_version: REPORT_SCHEMA_VERSION,
        conditions: conditions.clone(),
        samples: cohorts.to_vec(),
        descriptive,
        pairwise,
        radar: RadarMatrix {
            indicators: Component::ALL.to_vec(),
            conditions,
            means,
            z_scores,
        },
        final_ordering,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(StatsError::UnknownFormat(other.to_string())),
        }
    }
}

pub fn emit_report(report: &ComparisonReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report).expect("report serialises");
            out.push(b'\n');
            out
        }
        ReportFormat::Csv => emit_csv(report),
    }
}

pub fn parse_report(bytes: &[u8]) -> Result<ComparisonReport, StatsError> {
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| StatsError::Parse(e.to_string()))?;
    match value.get("schema_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(REPORT_SCHEMA_VERSION) => {}
        Some(v) => return Err(StatsError::SchemaVersion(v)),
        None => return Err(StatsError::Parse("missing schema_version".into())),
    }
    serde_json::from_value(value).map_err(|e| StatsError::Parse(e.to_string()))
}

fn table(out: &mut String, name: &str, header: &[&str], rows: Vec<Vec<String>>) {
    let _ = writeln!(out, "# {name}");
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("flush")).expect("utf-8"));
    out.push('\n');
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn emit_csv(r: &ComparisonReport) -> Vec<u8> {
    let mut out = String::new();
    let _ = writeln!(out, "# schema_version,{}", r.schema_version);
    out.push('\n');
    table(
        &mut out,
        "descriptive",
        &[
            "condition",
            "metric",
            "n",
            "mean",
            "std",
            "min",
            "q1",
            "median",
            "q3",
            "max",
            "lower_whisker",
            "upper_whisker",
            "outliers",
        ],
        r.descriptive
            .iter()
            .map(|d| {
                let b = &d.boxplot;
                vec![
                    d.condition.as_str().into(),
                    d.component.as_str().into(),
                    d.n.to_string(),
                    num(d.mean),
                    num(d.std),
                    num(b.min),
                    num(b.q1),
                    num(b.median),
                    num(b.q3),
                    num(b.max),
                    num(b.lower_whisker),
                    num(b.upper_whisker),
                    b.outliers.iter().map(|x| num(*x)).collect::<Vec<_>>().join(";"),
                ]
            })
            .collect(),
    );
    table(
        &mut out,
        "mwu",
        &[
            "metric",
            "condition_a",
            "condition_b",
            "n1",
            "n2",
            "u",
            "p_value",
            "method",
            "significant",
        ],
        r.pairwise
            .iter()
            .map(|p| {
                vec![
                    p.component.as_str().into(),
                    p.condition_a.as_str().into(),
                    p.condition_b.as_str().into(),
                    p.result.n1.to_string(),
                    p.result.n2.to_string(),
                    num(p.result.u_statistic),
                    num(p.result.p_value),
                    p.result.method.as_str().into(),
                    p.significant.to_string(),
                ]
            })
            .collect(),
    );
    let mut radar = Vec::new();
    for (i, k) in r.radar.indicators.iter().enumerate() {
        for (j, c) in r.radar.conditions.iter().enumerate() {
            radar.push(vec![
                k.as_str().into(),
                c.as_str().into(),
                num(r.radar.means[i][j]),
                num(r.radar.z_scores[i][j]),
            ]);
        }
    }
    table(&mut out, "radar", &["metric", "condition", "mean", "z_score"], radar);
    table(
        &mut out,
        "final_ordering",
        &["rank", "condition", "mean_final"],
        r.final_ordering
            .ascending
            .iter()
            .zip(&r.final_ordering.means)
            .enumerate()
            .map(|(i, (c, m))| vec![(i + 1).to_string(), c.as_str().into(), num(*m)])
            .collect(),
    );
    let mut samples = Vec::new();
    for c in &r.samples {
        for (i, v) in c.vectors.iter().enumerate() {
            samples.push(vec![
                c.condition.as_str().into(),
                i.to_string(),
                num(v.e_cog),
                num(v.e_emo),
                num(v.e_beh),
                num(v.e_final),
            ]);
        }
    }
    table(
        &mut out,
        "samples",
        &["condition", "index", "e_cog", "e_emo", "e_beh", "e_final"],
        samples,
    );
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64) -> EngagementVector {
        EngagementVector {
            e_cog: x,
            e_emo: x / 2.0,
            e_beh: 1.0 - x,
            e_final: (x + x / 2.0 + 1.0 - x) / 3.0,
        }
    }

    fn cohort(condition: TrialCondition, xs: &[f64]) -> CohortVectors {
        CohortVectors {
            condition,
            vectors: xs.iter().map(|&x| v(x)).collect(),
        }
    }

    #[test]
    fn identical_cohorts_are_not_significant() {
        let xs = [0.1, 0.4, 0.35, 0.8, 0.6];
        let r = compare_trials(&[
            cohort(TrialCondition::VerbalOnly, &xs),
            cohort(TrialCondition::VerbalGesture, &xs),
        ])
        .unwrap();
        assert_eq!(r.pairwise.len(), 3);
        assert!(r.pairwise.iter().all(|p| p.result.p_value >= 0.9));
        for row in &r.radar.z_scores {
            assert_eq!(row, &vec![0.0, 0.0]);
        }
    }

    #[test]
    fn three_cohorts_give_nine_tests() {
        let r = compare_trials(&[
            cohort(TrialCondition::VerbalOnly, &[0.1, 0.2, 0.3]),
            cohort(TrialCondition::VerbalGesture, &[0.2, 0.3, 0.4]),
            cohort(TrialCondition::VerbalGestureMemory, &[0.5, 0.6, 0.7]),
        ])
        .unwrap();
        assert_eq!(r.pairwise.len(), 9);
        assert_eq!(r.descriptive.len(), 12);
        assert_eq!(r.recompute().unwrap(), r);
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let r = compare_trials(&[
            cohort(TrialCondition::VerbalOnly, &[0.1, 0.25, 0.3]),
            cohort(TrialCondition::VerbalMemory, &[0.2 / 3.0, 0.31, 0.47]),
        ])
        .unwrap();
        let json = emit_report(&r, ReportFormat::Json);
        let back = parse_report(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(emit_report(&back, ReportFormat::Json), json);
    }

    #[test]
    fn rejects_single_cohort_and_unknown_format() {
        assert!(compare_trials(&[cohort(TrialCondition::VerbalOnly, &[0.1, 0.2])]).is_err());
        assert!(matches!(
            "xml".parse::<ReportFormat>(),
            Err(StatsError::UnknownFormat(_))
        ));
    }
}
