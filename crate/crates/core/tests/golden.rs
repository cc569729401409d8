//! Frozen outputs. Set UPDATE_GOLDEN=1 to rewrite them after an intended change.

use std::path::PathBuf;

use engage_core::analysis::{score_logs, VectorTable};
use engage_core::cohort::{reference_weights, simulate_cohort, CohortSpec};
use engage_core::ingest::IngestOptions;
use engage_core::model::Component;
use engage_core::stats::{
    compare_trials, emit_report, parse_report, CohortVectors, ComparisonReport, FinalOrdering, RadarMatrix,
    ReportFormat, ALPHA, REPORT_SCHEMA_VERSION,
};
use engage_core::{TrialCondition, WeightConfig};

const TRIALS: [TrialCondition; 3] = [
    TrialCondition::VerbalOnly,
    TrialCondition::VerbalGesture,
    TrialCondition::VerbalGestureMemory,
];

fn check_golden(name: &str, bytes: &[u8]) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, bytes).unwrap();
    }
    let want = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(want == bytes, "{name} differs from the frozen copy");
}

fn seed_zero_table() -> VectorTable {
    let logs: Vec<_> = TRIALS
        .iter()
        .flat_map(|&c| simulate_cohort(&CohortSpec::new(c, 15, 0)).unwrap())
        .collect();
    let (weights, scored) = score_logs(&logs, &reference_weights(), &IngestOptions::default()).unwrap();
    VectorTable::new(weights, &scored)
}

#[test]
fn vector_table_golden() {
    let logs = simulate_cohort(&CohortSpec::new(TrialCondition::VerbalOnly, 5, 0)).unwrap();
    let (weights, scored) = score_logs(&logs, &WeightConfig::default(), &IngestOptions::default()).unwrap();
    let lo = scored.iter().map(|s| s.raw.tq_minutes).fold(f64::INFINITY, f64::min);
    let hi = scored
        .iter()
        .map(|s| s.raw.tq_minutes)
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(weights.fixed_time_bounds().unwrap(), (lo, hi));
    for s in &scored {
        let r = &s.raw;
        let cog = ((1.0 - (r.tq_minutes - lo) / (hi - lo)) + r.sq_percent / 100.0 + r.gf_percent / 100.0) / 3.0;
        let emo = 0.25 * (r.pe_percent - r.fr_percent + 100.0) / 100.0 + 0.5 * (r.rs_rating - 1.0) / 4.0;
        let beh = ((f64::from(r.if_count) / 12.0).min(1.0) + r.ga_percent / 100.0 + r.vr_percent / 100.0) / 3.0;
        assert!((s.vector.e_cog - cog).abs() < 1e-9);
        assert!((s.vector.e_emo - emo).abs() < 1e-9);
        assert!((s.vector.e_beh - beh).abs() < 1e-9);
    }
    let table = VectorTable::new(weights, &scored);
    check_golden("vector_table.json", &table.to_json());
    check_golden("vector_table.csv", &table.to_csv());
    assert_eq!(VectorTable::from_json(&table.to_json()).unwrap(), table);
}

#[test]
fn seed_zero_report_golden() {
    let report = compare_trials(&seed_zero_table().cohorts()).unwrap();
    assert_eq!(report.pairwise.len(), 9);
    let json = emit_report(&report, ReportFormat::Json);
    check_golden("report_seed0.json", &json);
    check_golden("report_seed0.csv", &emit_report(&report, ReportFormat::Csv));
    assert_eq!(emit_report(&parse_report(&json).unwrap(), ReportFormat::Json), json);
    assert_eq!(report.recompute().unwrap(), report);

    let emo = report
        .pairwise_result(
            Component::Emotional,
            TrialCondition::VerbalOnly,
            TrialCondition::VerbalGestureMemory,
        )
        .unwrap();
    assert!(emo.result.p_value < ALPHA && emo.significant);
    for row in &report.radar.z_scores {
        assert!(row.iter().sum::<f64>().abs() < 1e-9);
    }
}

#[test]
fn identical_cohorts_are_not_different() {
    let table = seed_zero_table();
    let t1 = table.cohorts().remove(0);
    let twin = CohortVectors {
        condition: TrialCondition::VerbalMemory,
        vectors: t1.vectors.clone(),
    };
    let report = compare_trials(&[t1, twin]).unwrap();
    assert!(report
        .pairwise
        .iter()
        .all(|p| p.result.p_value >= 0.9 && !p.significant));
}

#[test]
fn empty_report_is_still_a_document() {
    let report = ComparisonReport {
        schema_version: REPORT_SCHEMA_VERSION,
        conditions: vec![],
        samples: vec![],
        descriptive: vec![],
        pairwise: vec![],
        radar: RadarMatrix {
            indicators: vec![],
            conditions: vec![],
            means: vec![],
            z_scores: vec![],
        },
        final_ordering: FinalOrdering {
            ascending: vec![],
            means: vec![],
            input_order_increasing: false,
        },
    };
    let json = emit_report(&report, ReportFormat::Json);
    assert_eq!(parse_report(&json).unwrap(), report);
    let csv = String::from_utf8(emit_report(&report, ReportFormat::Csv)).unwrap();
    for section in ["# descriptive", "# mwu", "# radar", "# final_ordering", "# samples"] {
        assert!(csv.contains(section), "{section}");
    }
    assert!("yaml".parse::<ReportFormat>().is_err());
}
