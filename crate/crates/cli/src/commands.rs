use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use engage_core::analysis::{score_logs, AnalysisError, VectorTable, TABLE_SCHEMA_VERSION};
use engage_core::cohort::{simulate_cohort_runs, write_cohort, CalibrationError, CohortSpec};
use engage_core::ingest::{parse_session_log, IngestOptions};
use engage_core::orchestrator::write_transcript;
use engage_core::reproduce::{reproduce as run_reproduction, seed_sweep, ReproduceConfig, ReproduceError};
use engage_core::stats::{compare_trials, emit_report, ReportFormat};
use engage_core::{TrialCondition, WeightConfig};

/// Minimum share of sweep seeds that must show the published significance pattern.
pub const SWEEP_PASS_RATE: f64 = 0.8;

pub enum Failure {
    /// Bad input data or a missed tolerance: exit 1.
    Data(anyhow::Error),
    /// Bad flags, configuration or output location: exit 2.
    Usage(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Data(_) => 1,
            Failure::Usage(_) => 2,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Data(e) | Failure::Usage(e) => format!("{e:#}"),
        }
    }
}

type Outcome = Result<(), Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn data(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Data(e.into())
}

fn load_weights(path: Option<&Path>, default: WeightConfig) -> Result<WeightConfig, Failure> {
    let Some(path) = path else { return Ok(default) };
    let bytes = fs::read(path)
        .with_context(|| format!("configuration error: cannot read {}", path.display()))
        .map_err(usage)?;
    let cfg: WeightConfig = serde_json::from_slice(&bytes)
        .with_context(|| format!("configuration error: {} is not a weight config", path.display()))
        .map_err(usage)?;
    cfg.validate()
        .map_err(|e| usage(anyhow!("configuration error in {}: {e}", path.display())))?;
    Ok(cfg)
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(usage)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Outcome {
    match out {
        Some(path) => write_file(path, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .context("cannot write to stdout")
            .map_err(usage),
    }
}

pub fn simulate(condition: TrialCondition, n: usize, seed: u64, out: &Path, transcripts: bool) -> Outcome {
    let spec = CohortSpec::new(condition, n, seed);
    let runs = simulate_cohort_runs(&spec).map_err(|e| match e {
        CalibrationError::InvalidSpec(_) => usage(e),
        other => data(other),
    })?;
    let logs: Vec<_> = runs.iter().map(|r| r.log.clone()).collect();
    let manifest = write_cohort(out, &spec, &logs)
        .with_context(|| format!("cannot write cohort to {}", out.display()))
        .map_err(usage)?;
    if transcripts {
        let dir = out.join("transcripts");
        fs::create_dir_all(&dir)
            .with_context(|| format!("cannot create {}", dir.display()))
            .map_err(usage)?;
        for run in &runs {
            write_file(
                &dir.join(format!("{}.jsonl", run.log.session_id)),
                &write_transcript(run),
            )?;
        }
    }
    eprintln!(
        "wrote {} sessions for {} (seed {seed}) to {}",
        manifest.sessions.len(),
        condition,
        out.display()
    );
    Ok(())
}

fn session_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = fs::read_dir(dir)
        .with_context(|| format!("cannot read input directory {}", dir.display()))
        .map_err(usage)?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn analyze(input: &Path, weights: Option<&Path>, format: ReportFormat, out: Option<&Path>) -> Outcome {
    let cfg = load_weights(weights, WeightConfig::default())?;
    let files = session_files(input)?;
    if files.is_empty() {
        return Err(data(anyhow!("no sessions found in {}", input.display())));
    }
    let mut logs = Vec::new();
    let mut bad = Vec::new();
    for file in &files {
        match fs::read(file)
            .map_err(|e| e.to_string())
            .and_then(|b| parse_session_log(&b).map_err(|e| e.to_string()))
        {
            Ok(log) => logs.push(log),
            Err(e) => bad.push(format!("  {}: {e}", file.display())),
        }
    }
    if !bad.is_empty() {
        return Err(data(anyhow!("invalid session logs:\n{}", bad.join("\n"))));
    }
    let (resolved, scored) = score_logs(&logs, &cfg, &IngestOptions::default()).map_err(|e| match e {
        AnalysisError::Model(_) => usage(e),
        other => data(other),
    })?;
    let table = VectorTable::new(resolved, &scored);
    let bytes = match format {
        ReportFormat::Json => table.to_json(),
        ReportFormat::Csv => table.to_csv(),
    };
    emit(out, &bytes)
}

pub fn compare(inputs: &[PathBuf], out: Option<&Path>) -> Outcome {
    let mut rows = Vec::new();
    let mut weights = None;
    for path in inputs {
        let bytes = fs::read(path)
            .with_context(|| format!("cannot read {}", path.display()))
            .map_err(usage)?;
        let table = VectorTable::from_json(&bytes)
            .with_context(|| path.display().to_string())
            .map_err(data)?;
        if table.schema_version != TABLE_SCHEMA_VERSION {
            return Err(data(anyhow!(
                "{} has schema_version {}, expected {TABLE_SCHEMA_VERSION}",
                path.display(),
                table.schema_version
            )));
        }
        weights.get_or_insert(table.weights);
        rows.extend(table.rows);
    }
    let merged = VectorTable {
        schema_version: TABLE_SCHEMA_VERSION,
        weights: weights.expect("at least one input"),
        rows,
    };
    let cohorts = merged.cohorts();
    if cohorts.len() < 2 {
        return Err(usage(anyhow!("need at least two cohorts, found {}", cohorts.len())));
    }
    let report = compare_trials(&cohorts).map_err(data)?;
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)
                .with_context(|| format!("cannot create {}", dir.display()))
                .map_err(usage)?;
            write_file(&dir.join("report.json"), &emit_report(&report, ReportFormat::Json))?;
            write_file(&dir.join("report.csv"), &emit_report(&report, ReportFormat::Csv))
        }
        None => emit(None, &emit_report(&report, ReportFormat::Json)),
    }
}

fn reproduce_failure(e: ReproduceError) -> Failure {
    match e {
        ReproduceError::Calibration(CalibrationError::InvalidSpec(_)) => usage(e),
        ReproduceError::Analysis(AnalysisError::Model(_)) => usage(e),
        other => data(other),
    }
}

pub fn reproduce(seed: u64, n: usize, weights: Option<&Path>, sweep: Option<u64>, out: Option<&Path>) -> Outcome {
    let defaults = ReproduceConfig::default();
    let cfg = ReproduceConfig {
        seed,
        n,
        weights: load_weights(weights, defaults.weights)?,
    };
    if n < 2 {
        return Err(usage(anyhow!("--n must be at least 2")));
    }
    let r = run_reproduction(&cfg).map_err(reproduce_failure)?;

    println!("seed {seed}, n = {n} per condition");
    println!(
        "{:<10} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "condition", "tq_min", "sq_%", "if", "satisf", "e_cog", "e_emo", "e_beh", "e_final"
    );
    for s in &r.summaries {
        println!(
            "{:<10} {:>9.3} {:>9.2} {:>9.2} {:>9.3} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
            s.condition.label(),
            s.tq_minutes,
            s.sq_percent,
            s.if_count,
            s.satisfaction,
            s.e_cog,
            s.e_emo,
            s.e_beh,
            s.e_final
        );
    }
    println!();
    println!("pairwise Mann-Whitney U (two-sided)");
    for p in &r.report.pairwise {
        println!(
            "  {:<10} {} vs {}  U = {:>6.1}  p = {:.3e}  {}",
            p.component.as_str(),
            p.condition_a.label(),
            p.condition_b.label(),
            p.result.u_statistic,
            p.result.p_value,
            if p.significant { "significant" } else { "n.s." }
        );
    }
    println!();
    for c in &r.checks {
        println!(
            "{} {:<32} target {:<36} reproduced {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.target,
            c.reproduced
        );
    }
    let mut ok = r.all_pass();

    if let Some(count) = sweep {
        let result = seed_sweep(&cfg, count).map_err(reproduce_failure)?;
        let rate = result.match_rate();
        let pass = rate >= SWEEP_PASS_RATE;
        println!(
            "{} significance pattern over {count} seeds from {seed}: {:.1}% match (need {:.0}%)",
            if pass { "PASS" } else { "FAIL" },
            100.0 * rate,
            100.0 * SWEEP_PASS_RATE
        );
        ok &= pass;
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))
            .map_err(usage)?;
        write_file(&dir.join("report.json"), &emit_report(&r.report, ReportFormat::Json))?;
        write_file(&dir.join("report.csv"), &emit_report(&r.report, ReportFormat::Csv))?;
    }
    if ok {
        Ok(())
    } else {
        Err(data(anyhow!("reproduction is outside tolerance")))
    }
}
