//! Deterministic synthetic cohorts calibrated to per-condition aggregates.
//!
//! Each cohort draws one latent quantile per student for each engagement
//! component from stratified strata, so cohort means land close to their
//! targets even at n = 15. Observables tied to a component (completion time,
//! quiz score, rating, query count) move with the component's quantile; the
//! remaining observable of each component (gaze share, expression valence,
//! reply rate) is solved so the component score comes out as drawn. Counts
//! are rounded systematically across the cohort, keeping cohort totals exact.
//! The resulting plans are acted out by the orchestrator to produce logs.

mod sampling;

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use sampling::{stratified_quantiles, systematic_round, TruncatedNormal};

use crate::condition::TrialCondition;
use crate::ingest::{write_session_log, SessionLog, StudentProfile, QUIZ_QUESTIONS};
use crate::model::{time_term, WeightConfig};
use crate::orchestrator::session::{DEFAULT_EXPRESSION_FRAMES, DEFAULT_GAZE_SAMPLES, MIN_QUESTION_MS};
use crate::orchestrator::{run_planned_session, SessionError, SessionRun, StudentPlan, Tutor};

pub const GENERATOR_VERSION: &str = "cohort-synth/1";
pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_COHORT_SIZE: usize = 15;

/// Completion time range the generator draws from, in minutes.
pub const TQ_RANGE_MINUTES: (f64, f64) = (MIN_QUESTION_MS as f64 * QUIZ_QUESTIONS as f64 / 60_000.0, 20.0);
pub const MAX_QUERIES: f64 = 30.0;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("infeasible calibration target: {0}")]
    Infeasible(String),
    #[error("invalid cohort spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Session(#[from] SessionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricTarget {
    pub mean: f64,
    pub sd: f64,
}

const fn target(mean: f64, sd: f64) -> MetricTarget {
    MetricTarget { mean, sd }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Demographics {
    pub age_mean: f64,
    pub age_sd: f64,
    pub age_min: u32,
    pub age_max: u32,
    pub male: u32,
    pub female: u32,
}

/// Cohort-level aggregates a synthetic cohort is calibrated to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    pub tq_minutes: MetricTarget,
    pub sq_percent: MetricTarget,
    pub if_count: MetricTarget,
    /// Post-session satisfaction, `(mean(Q3, Q4) - 1) / 4`.
    pub satisfaction: MetricTarget,
    pub ga_percent: MetricTarget,
    pub e_cog: MetricTarget,
    pub e_emo: MetricTarget,
    pub e_beh: MetricTarget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_e_final: Option<f64>,
    pub demographics: Demographics,
}

/// Published aggregates per condition, with spreads chosen once and frozen.
pub fn default_calibration(condition: TrialCondition) -> CalibrationTargets {
    match condition {
        TrialCondition::VerbalOnly => CalibrationTargets {
            tq_minutes: target(8.3, 1.0),
            sq_percent: target(50.0, 15.0),
            if_count: target(8.0, 1.5),
            satisfaction: target(0.3, 0.1),
            ga_percent: target(0.0, 0.0),
            e_cog: target(0.59, 0.025),
            e_emo: target(0.4, 0.06),
            e_beh: target(0.521, 0.025),
            target_e_final: Some(0.48),
            demographics: Demographics {
                age_mean: 22.0,
                age_sd: 2.4,
                age_min: 18,
                age_max: 25,
                male: 7,
                female: 8,
            },
        },
        TrialCondition::VerbalGesture => CalibrationTargets {
            tq_minutes: target(7.5, 2.0),
            sq_percent: target(66.0, 30.0),
            if_count: target(9.0, 1.5),
            satisfaction: target(0.6, 0.1),
            ga_percent: target(8.5, 1.0),
            e_cog: target(0.658, 0.19),
            e_emo: target(0.6, 0.06),
            e_beh: target(0.578, 0.025),
            target_e_final: Some(0.58),
            demographics: Demographics {
                age_mean: 23.7,
                age_sd: 2.3,
                age_min: 19,
                age_max: 25,
                male: 6,
                female: 9,
            },
        },
        TrialCondition::VerbalGestureMemory => CalibrationTargets {
            tq_minutes: target(6.3, 1.0),
            sq_percent: target(78.0, 15.0),
            if_count: target(11.0, 1.5),
            satisfaction: target(0.75, 0.1),
            ga_percent: target(8.5, 1.0),
            e_cog: target(0.64, 0.025),
            e_emo: target(0.75, 0.06),
            e_beh: target(0.635, 0.025),
            target_e_final: Some(0.64),
            demographics: Demographics {
                age_mean: 24.1,
                age_sd: 2.1,
                age_min: 18,
                age_max: 26,
                male: 8,
                female: 7,
            },
        },
        TrialCondition::VerbalMemory => CalibrationTargets {
            tq_minutes: target(6.0, 1.0),
            sq_percent: target(80.0, 15.0),
            if_count: target(9.0, 1.5),
            satisfaction: target(0.65, 0.1),
            ga_percent: target(0.0, 0.0),
            e_cog: target(0.75, 0.03),
            e_emo: target(0.41, 0.06),
            e_beh: target(0.5, 0.025),
            target_e_final: None,
            demographics: Demographics {
                age_mean: 24.8,
                age_sd: 3.4,
                age_min: 18,
                age_max: 32,
                male: 9,
                female: 6,
            },
        },
    }
}

/// Weights and fixed time bounds the generator solves observables against.
pub fn reference_weights() -> WeightConfig {
    WeightConfig::default().with_time_bounds(0.0, 20.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub condition: TrialCondition,
    pub n: usize,
    pub seed: u64,
    pub targets: CalibrationTargets,
    pub weights: WeightConfig,
}

impl CohortSpec {
    pub fn new(condition: TrialCondition, n: usize, seed: u64) -> Self {
        Self {
            condition,
            n,
            seed,
            targets: default_calibration(condition),
            weights: reference_weights(),
        }
    }

    pub fn validate(&self) -> Result<(), CalibrationError> {
        if self.n < 2 {
            return Err(CalibrationError::InvalidSpec(format!(
                "cohort size must be >= 2, got {}",
                self.n
            )));
        }
        self.weights
            .validate()
            .map_err(|e| CalibrationError::InvalidSpec(e.to_string()))?;
        self.weights
            .fixed_time_bounds()
            .map_err(|e| CalibrationError::InvalidSpec(e.to_string()))?;
        let w = &self.weights;
        if w.lambda[2] == 0.0 || w.gamma[0] == 0.0 || w.beta[2] == 0.0 {
            return Err(CalibrationError::InvalidSpec(
                "gaze, valence and reply-rate weights must be positive for calibration".into(),
            ));
        }
        let t = &self.targets;
        if !self.condition.gestures() && t.ga_percent.mean != 0.0 {
            return Err(CalibrationError::Infeasible(format!(
                "{} has no gestures, so ga_percent must target 0",
                self.condition
            )));
        }
        let d = &t.demographics;
        if d.age_min > d.age_max {
            return Err(CalibrationError::InvalidSpec("age_min above age_max".into()));
        }
        Ok(())
    }
}

fn mix(seed: u64, tag: u64, index: u64) -> u64 {
    let mut z = seed ^ tag.rotate_left(17) ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const COHORT_STREAM: u64 = u64::MAX;

/// One planned student: who they are, what they will do, and the seed for
/// the session's remaining randomness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedStudent {
    pub session_id: String,
    pub profile: StudentProfile,
    pub plan: StudentPlan,
    pub session_seed: u64,
}

const INTERESTS: [&str; 8] = [
    "basketball",
    "chess",
    "painting",
    "hiking",
    "video games",
    "music",
    "cooking",
    "photography",
];

pub fn session_id(condition: TrialCondition, seed: u64, index: usize) -> String {
    format!("{}-{seed}-{index:03}", condition.as_str())
}

fn distribution(name: &str, t: MetricTarget, lo: f64, hi: f64) -> Result<TruncatedNormal, CalibrationError> {
    TruncatedNormal::with_mean(t.mean, t.sd, lo, hi).map_err(|e| match e {
        CalibrationError::Infeasible(m) => CalibrationError::Infeasible(format!("{name}: {m}")),
        other => other,
    })
}

/// Plans every student of the cohort. Pure in the spec.
pub fn plan_cohort(spec: &CohortSpec) -> Result<Vec<PlannedStudent>, CalibrationError> {
    spec.validate()?;
    let t = &spec.targets;
    let w = &spec.weights;
    let (t_min, t_max) = w.fixed_time_bounds().expect("validated");
    let n = spec.n;
    let tag = spec.condition.stream_tag();
    let mut crng = ChaCha8Rng::seed_from_u64(mix(spec.seed, tag, COHORT_STREAM));

    let cog = distribution("e_cog", t.e_cog, 0.0, 1.0)?;
    let emo = distribution("e_emo", t.e_emo, 0.0, 1.0)?;
    let beh = distribution("e_beh", t.e_beh, 0.0, 1.0)?;
    let tq = distribution("tq_minutes", t.tq_minutes, TQ_RANGE_MINUTES.0, TQ_RANGE_MINUTES.1)?;
    let sq = distribution("sq_percent", t.sq_percent, 0.0, 100.0)?;
    let rating = distribution("engagement rating", t.e_emo, 0.0, 1.0)?;
    let queries = distribution("if_count", t.if_count, 0.0, MAX_QUERIES)?;
    let satisfaction = distribution("satisfaction", t.satisfaction, 0.0, 1.0)?;
    let ga = distribution("ga_percent", t.ga_percent, 0.0, 100.0)?;
    let d = t.demographics;
    let age = TruncatedNormal::with_mean(
        d.age_mean
            .clamp(f64::from(d.age_min) + 0.01, f64::from(d.age_max) - 0.01),
        d.age_sd,
        f64::from(d.age_min),
        f64::from(d.age_max),
    )?;

    let u_cog = stratified_quantiles(n, &mut crng);
    let u_emo = stratified_quantiles(n, &mut crng);
    let u_beh = stratified_quantiles(n, &mut crng);
    let u_sat = stratified_quantiles(n, &mut crng);
    let u_age = stratified_quantiles(n, &mut crng);
    let offsets: [f64; 5] = std::array::from_fn(|_| crng.gen());

    let total = (d.male + d.female).max(1) as f64;
    let males = ((n as f64) * f64::from(d.male) / total).round() as usize;
    let mut genders: Vec<&str> = (0..n).map(|i| if i < males { "male" } else { "female" }).collect();
    genders.shuffle(&mut crng);

    let correct = systematic_round(
        &u_cog
            .iter()
            .map(|&u| sq.quantile(u) / 100.0 * QUIZ_QUESTIONS as f64)
            .collect::<Vec<_>>(),
        offsets[0],
    );
    let query_counts = systematic_round(
        &u_beh.iter().map(|&u| queries.quantile(u)).collect::<Vec<_>>(),
        offsets[1],
    );
    let rating_sums = systematic_round(
        &u_emo.iter().map(|&u| 8.0 * rating.quantile(u)).collect::<Vec<_>>(),
        offsets[2],
    );
    let satisfaction_sums = systematic_round(
        &u_sat
            .iter()
            .map(|&u| 8.0 * satisfaction.quantile(u))
            .collect::<Vec<_>>(),
        offsets[3],
    );

    struct Partial {
        rng: ChaCha8Rng,
        qna: u32,
        queries: u32,
        prompts: u32,
        reply_target: f64,
        ga: f64,
    }
    let mut partial = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(spec.seed, tag, i as u64));
        let if_count = query_counts[i].max(0) as u32;
        let qna = rng.gen_range(0..=3u32).min(if_count);
        let ga_i = if spec.condition.gestures() {
            ga.quantile(u_beh[i])
        } else {
            0.0
        };
        let interaction = (f64::from(if_count) / w.i_max).min(1.0);
        let vr =
            ((beh.quantile(u_beh[i]) - w.beta[0] * interaction - w.beta[1] * ga_i / 100.0) / w.beta[2]).clamp(0.0, 1.0);
        let prompts = 1 + crate::orchestrator::DEFAULT_SLIDE_COUNT + qna;
        partial.push(Partial {
            rng,
            qna,
            queries: if_count,
            prompts,
            reply_target: vr * f64::from(prompts),
            ga: ga_i,
        });
    }
    let replies = systematic_round(&partial.iter().map(|p| p.reply_target).collect::<Vec<_>>(), offsets[4]);

    let mut students = Vec::with_capacity(n);
    for (i, mut p) in partial.into_iter().enumerate() {
        let rng = &mut p.rng;
        let k = correct[i].clamp(0, QUIZ_QUESTIONS as i64) as usize;
        let mut answers: [bool; QUIZ_QUESTIONS] = std::array::from_fn(|q| q < k);
        answers.shuffle(rng);

        let tq_i = tq.quantile(1.0 - u_cog[i]);
        let sq_i = 100.0 * k as f64 / QUIZ_QUESTIONS as f64;
        let gf = ((cog.quantile(u_cog[i]) - w.lambda[0] * time_term(tq_i, t_min, t_max) - w.lambda[1] * sq_i / 100.0)
            / w.lambda[2])
            .clamp(0.0, 1.0);

        let rating_sum = rating_sums[i].clamp(0, 8) as u8 + 2;
        let rating_map = f64::from(rating_sum - 2) / 8.0;
        let valence = ((emo.quantile(u_emo[i]) - w.gamma[1] * rating_map) / w.gamma[0]).clamp(0.0, 1.0);
        let (happy, frustrated) = expression_counts(valence, DEFAULT_EXPRESSION_FRAMES);

        let satisfaction_sum = satisfaction_sums[i].clamp(0, 8) as u8 + 2;
        let (q1, q2) = split_pair(rating_sum);
        let (q3, q4) = split_pair(satisfaction_sum);
        let ratings = [q1, q2, q3, q4, rng.gen_range(2..=5), rng.gen_range(2..=5)];

        let reply_count = replies[i].clamp(1, i64::from(p.prompts)) as f64;
        let plan = StudentPlan {
            correct: answers,
            quiz_time_ms: (tq_i * 60_000.0).round() as u64,
            slide_queries: p.queries - p.qna,
            qna_queries: p.qna,
            reply_share: reply_count / f64::from(p.prompts),
            gaze_samples: DEFAULT_GAZE_SAMPLES,
            gaze_on_target: (gf * f64::from(DEFAULT_GAZE_SAMPLES)).round() as u32,
            expression_frames: DEFAULT_EXPRESSION_FRAMES,
            happy_frames: happy,
            frustrated_frames: frustrated,
            gesture_share: (p.ga > 0.0).then_some(p.ga / 100.0),
            ratings,
        };
        let profile = StudentProfile {
            student_id: format!("{}-{:02}", spec.condition.label().to_lowercase(), i + 1),
            age: age.quantile(u_age[i]).round() as u32,
            gender: genders[i].to_string(),
            preferences: BTreeMap::from([(
                "interest".to_string(),
                INTERESTS[rng.gen_range(0..INTERESTS.len())].to_string(),
            )]),
        };
        students.push(PlannedStudent {
            session_id: session_id(spec.condition, spec.seed, i),
            profile,
            plan,
            session_seed: rng.gen(),
        });
    }
    Ok(students)
}

/// Happy and frustrated frame counts whose valence is `valence` to within
/// half a frame. A share of frames stays expressive even at neutral valence.
fn expression_counts(valence: f64, frames: u32) -> (u32, u32) {
    let m = i64::from(frames);
    let diff = ((2.0 * valence - 1.0) * m as f64).round() as i64;
    let mut expressive = (diff.abs() + (3 * m) / 10).min(m);
    if (expressive + diff) % 2 != 0 {
        expressive -= 1;
    }
    (((expressive + diff) / 2) as u32, ((expressive - diff) / 2) as u32)
}

/// Two Likert items whose sum is `sum` (2..=10).
fn split_pair(sum: u8) -> (u8, u8) {
    let hi = sum.div_ceil(2);
    (hi, sum - hi)
}

fn run_student(spec: &CohortSpec, s: &PlannedStudent) -> Result<SessionRun, CalibrationError> {
    let tutor = Tutor::new(spec.condition, s.profile.clone());
    Ok(run_planned_session(&tutor, &s.session_id, &s.plan, s.session_seed)?)
}

/// Session `student_index` of the cohort, with its transcript.
pub fn simulate_session_run(spec: &CohortSpec, student_index: usize) -> Result<SessionRun, CalibrationError> {
    if student_index >= spec.n {
        return Err(CalibrationError::InvalidSpec(format!(
            "student_index {student_index} outside cohort of {}",
            spec.n
        )));
    }
    let students = plan_cohort(spec)?;
    run_student(spec, &students[student_index])
}

pub fn simulate_session(spec: &CohortSpec, student_index: usize) -> Result<SessionLog, CalibrationError> {
    Ok(simulate_session_run(spec, student_index)?.log)
}

pub fn simulate_cohort_runs(spec: &CohortSpec) -> Result<Vec<SessionRun>, CalibrationError> {
    plan_cohort(spec)?.iter().map(|s| run_student(spec, s)).collect()
}

pub fn simulate_cohort(spec: &CohortSpec) -> Result<Vec<SessionLog>, CalibrationError> {
    Ok(simulate_cohort_runs(spec)?.into_iter().map(|r| r.log).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub session_id: String,
    pub file: String,
}

/// Provenance record written next to a generated cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortManifest {
    pub schema_version: u32,
    pub generator_version: String,
    pub condition: TrialCondition,
    pub n: usize,
    pub seed: u64,
    pub targets: CalibrationTargets,
    pub weights: WeightConfig,
    pub sessions: Vec<ManifestEntry>,
}

impl CohortManifest {
    pub fn new(spec: &CohortSpec, logs: &[SessionLog]) -> Self {
        Self {
            schema_version: MANIFEST_SCHEMA_VERSION,
            generator_version: GENERATOR_VERSION.to_string(),
            condition: spec.condition,
            n: spec.n,
            seed: spec.seed,
            targets: spec.targets,
            weights: spec.weights,
            sessions: logs
                .iter()
                .enumerate()
                .map(|(index, log)| ManifestEntry {
                    index,
                    session_id: log.session_id.clone(),
                    file: format!("{}.jsonl", log.session_id),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("manifest serialises");
        out.push(b'\n');
        out
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes every session log plus `manifest.json` into `dir`.
pub fn write_cohort(dir: &Path, spec: &CohortSpec, logs: &[SessionLog]) -> std::io::Result<CohortManifest> {
    std::fs::create_dir_all(dir)?;
    let manifest = CohortManifest::new(spec, logs);
    for (entry, log) in manifest.sessions.iter().zip(logs) {
        std::fs::write(dir.join(&entry.file), write_session_log(log))?;
    }
    std::fs::write(dir.join(MANIFEST_FILE), manifest.to_json())?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_counts_hit_valence() {
        for v in [0.0, 0.2, 0.4, 0.5, 0.61, 0.75, 1.0] {
            let (h, f) = expression_counts(v, 300);
            assert!(h + f <= 300);
            let realised = (f64::from(h) - f64::from(f) + 300.0) / 600.0;
            assert!((realised - v).abs() <= 1.0 / 600.0 + 1e-12, "{v}: {realised}");
        }
    }

    #[test]
    fn pairs_split_evenly() {
        assert_eq!(split_pair(2), (1, 1));
        assert_eq!(split_pair(7), (4, 3));
        assert_eq!(split_pair(10), (5, 5));
    }

    #[test]
    fn small_cohort_is_rejected() {
        assert!(matches!(
            plan_cohort(&CohortSpec::new(TrialCondition::VerbalOnly, 1, 0)),
            Err(CalibrationError::InvalidSpec(_))
        ));
    }

    #[test]
    fn condition_enters_the_stream() {
        let a = simulate_session(&CohortSpec::new(TrialCondition::VerbalOnly, 3, 7), 0).unwrap();
        let b = simulate_session(&CohortSpec::new(TrialCondition::VerbalMemory, 3, 7), 0).unwrap();
        assert_ne!(a.events, b.events);
    }
}
