use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::schema::{Event, SessionLog};
use super::IngestError;
use crate::model::RawMetrics;

/// Knobs for turning a log into raw metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// A reply counts toward the reply rate only within this long after its prompt.
    pub reply_window_ms: u64,
    /// Score sessions with no gaze samples or no expression frames as
    /// gf = 0 and pe = fr = 0 instead of failing.
    pub neutral_defaults: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            reply_window_ms: 10_000,
            neutral_defaults: false,
        }
    }
}

/// Derives the nine scoring inputs from a validated log.
pub fn derive_raw_metrics(log: &SessionLog, opts: &IngestOptions) -> Result<RawMetrics, IngestError> {
    let quiz = &log.quiz;
    let last_answer = quiz
        .answers
        .iter()
        .map(|a| a.answered_at_ms)
        .max()
        .ok_or_else(|| IngestError::MetricUndefined("quiz has no answers".into()))?;
    if last_answer <= quiz.started_at_ms {
        return Err(IngestError::MetricUndefined(
            "quiz completion time is not positive".into(),
        ));
    }
    let tq_minutes = (last_answer - quiz.started_at_ms) as f64 / 60_000.0;
    let sq_percent = 100.0 * quiz.correct_count() as f64 / super::QUIZ_QUESTIONS as f64;

    let mut gaze_total = 0u64;
    let mut gaze_on = 0u64;
    let mut frames = 0u64;
    let mut positive = 0u64;
    let mut frustrated = 0u64;
    let mut queries = 0u32;
    let mut intervals = Vec::new();
    let mut prompt_times: HashMap<&str, u64> = HashMap::new();
    let mut answered: HashMap<&str, bool> = HashMap::new();

    for event in &log.events {
        match event {
            Event::GazeSample { on_target, .. } => {
                gaze_total += 1;
                gaze_on += u64::from(*on_target);
            }
            Event::ExpressionFrame { label, .. } => {
                frames += 1;
                positive += u64::from(label.is_positive());
                frustrated += u64::from(label.is_frustrated());
            }
            Event::StudentQuery { .. } => queries += 1,
            Event::RobotPrompt { t_ms, prompt_id, .. } => {
                prompt_times.insert(prompt_id, *t_ms);
                answered.entry(prompt_id).or_insert(false);
            }
            Event::StudentReply { t_ms, prompt_id } => {
                if let Some(&asked) = prompt_times.get(prompt_id.as_str()) {
                    if *t_ms >= asked && *t_ms - asked <= opts.reply_window_ms {
                        answered.insert(prompt_id, true);
                    }
                }
            }
            Event::GestureInterval { start_ms, end_ms, .. } => intervals.push((*start_ms, *end_ms)),
            Event::QuizAnswer { .. } => {}
        }
    }

    let gf_percent = if gaze_total == 0 {
        if !opts.neutral_defaults {
            return Err(IngestError::MetricUndefined("no gaze samples".into()));
        }
        0.0
    } else {
        100.0 * gaze_on as f64 / gaze_total as f64
    };
    let (pe_percent, fr_percent) = if frames == 0 {
        if !opts.neutral_defaults {
            return Err(IngestError::MetricUndefined("no expression frames".into()));
        }
        (0.0, 0.0)
    } else {
        (
            100.0 * positive as f64 / frames as f64,
            100.0 * frustrated as f64 / frames as f64,
        )
    };

    let rs_rating = engagement_rating(log)?;

    let duration = log.duration_ms();
    let ga_percent = if duration == 0 {
        0.0
    } else {
        (100.0 * union_length(&mut intervals) as f64 / duration as f64).min(100.0)
    };

    let vr_percent = if answered.is_empty() {
        0.0
    } else {
        100.0 * answered.values().filter(|a| **a).count() as f64 / answered.len() as f64
    };

    Ok(RawMetrics {
        tq_minutes,
        sq_percent,
        gf_percent,
        pe_percent,
        fr_percent,
        rs_rating,
        if_count: queries,
        ga_percent,
        vr_percent,
    })
}

fn likert_mean(log: &SessionLog, items: [&str; 2]) -> Result<f64, IngestError> {
    let mut sum = 0.0;
    for item in items {
        let v = log
            .self_report
            .rating(item)
            .ok_or_else(|| IngestError::MetricUndefined(format!("self-report item {item} missing")))?;
        sum += f64::from(v);
    }
    Ok(sum / items.len() as f64)
}

/// Mean of the engagement items (Q1, Q2) on the 1..=5 scale.
pub fn engagement_rating(log: &SessionLog) -> Result<f64, IngestError> {
    likert_mean(log, ["Q1", "Q2"])
}

/// Satisfaction (Q3, Q4) mapped onto `[0, 1]` by `(x - 1) / 4`.
pub fn satisfaction_score(log: &SessionLog) -> Result<f64, IngestError> {
    Ok((likert_mean(log, ["Q3", "Q4"])? - 1.0) / 4.0)
}

/// Total length covered by a set of half-open intervals.
pub fn union_length(intervals: &mut [(u64, u64)]) -> u64 {
    intervals.sort_unstable();
    let mut total = 0;
    let mut current: Option<(u64, u64)> = None;
    for &(start, end) in intervals.iter() {
        if end <= start {
            continue;
        }
        current = match current {
            Some((s, e)) if start <= e => Some((s, e.max(end))),
            Some((s, e)) => {
                total += e - s;
                Some((start, end))
            }
            None => Some((start, end)),
        };
    }
    if let Some((s, e)) = current {
        total += e - s;
    }
    total
}
