use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::schema::{Event, SessionLog, LIKERT_ITEMS, QUIZ_QUESTIONS, SCHEMA_VERSION, TEXT_ITEMS};

/// One broken invariant, with a machine-readable code such as `quiz.incomplete`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: String,
    pub message: String,
}

impl Violation {
    fn new(code: &str, message: impl Into<String>) -> Self {
        Self {
            code: code.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

pub const MIN_AGE: u32 = 16;
pub const MAX_AGE: u32 = 40;

/// Checks every session-log invariant. Returns an empty list iff the log is valid.
pub fn validate_log(log: &SessionLog) -> Vec<Violation> {
    let mut out = Vec::new();

    if log.schema_version != SCHEMA_VERSION {
        out.push(Violation::new(
            "header.schema_version",
            format!("unsupported schema_version {}", log.schema_version),
        ));
    }
    if log.session_id.trim().is_empty() {
        out.push(Violation::new("header.session_id", "session_id is empty"));
    }
    if log.end_ms <= log.start_ms {
        out.push(Violation::new(
            "session.time_range",
            format!("end {} must be after start {}", log.end_ms, log.start_ms),
        ));
    }
    if !(MIN_AGE..=MAX_AGE).contains(&log.student.age) {
        out.push(Violation::new(
            "student.age_out_of_range",
            format!("age {} outside [{MIN_AGE}, {MAX_AGE}]", log.student.age),
        ));
    }

    check_events(log, &mut out);
    check_quiz(log, &mut out);
    check_self_report(log, &mut out);
    out
}

fn check_events(log: &SessionLog, out: &mut Vec<Violation>) {
    if log.events.windows(2).any(|w| w[1].timestamp() < w[0].timestamp()) {
        out.push(Violation::new("events.not_sorted", "events not sorted"));
    }
    let outside = log
        .events
        .iter()
        .filter(|e| e.timestamp() < log.start_ms || e.end_timestamp() > log.end_ms)
        .count();
    if outside > 0 {
        out.push(Violation::new(
            "events.out_of_range",
            format!("{outside} event(s) outside the session window"),
        ));
    }

    let mut prompts_seen: HashSet<&str> = HashSet::new();
    for (i, event) in log.events.iter().enumerate() {
        match event {
            Event::GestureInterval {
                start_ms,
                end_ms,
                gesture_name,
            } if start_ms >= end_ms => {
                out.push(Violation::new(
                    "gesture.empty_interval",
                    format!("events[{i}] gesture {gesture_name:?} has start {start_ms} >= end {end_ms}"),
                ));
            }
            Event::RobotPrompt { prompt_id, .. } => {
                if !prompts_seen.insert(prompt_id.as_str()) {
                    out.push(Violation::new(
                        "prompt.duplicate_id",
                        format!("events[{i}] repeats prompt_id {prompt_id:?}"),
                    ));
                }
            }
            Event::StudentReply { prompt_id, .. } if !prompts_seen.contains(prompt_id.as_str()) => {
                out.push(Violation::new(
                    "reply.unknown_prompt",
                    format!("events[{i}] replies to {prompt_id:?}, which no earlier prompt issued"),
                ));
            }
            Event::QuizAnswer { question_index, .. } if usize::from(*question_index) >= QUIZ_QUESTIONS => {
                out.push(Violation::new(
                    "quiz.question_index",
                    format!("events[{i}] question_index {question_index} outside [0, 4]"),
                ));
            }
            _ => {}
        }
    }
}

fn check_quiz(log: &SessionLog, out: &mut Vec<Violation>) {
    let quiz = &log.quiz;
    let answers = &quiz.answers;
    if answers.len() < QUIZ_QUESTIONS {
        out.push(Violation::new(
            "quiz.incomplete",
            format!("quiz has {} of {QUIZ_QUESTIONS} answers", answers.len()),
        ));
    } else if answers.len() > QUIZ_QUESTIONS {
        out.push(Violation::new(
            "quiz.too_many",
            format!("quiz has {} answers, expected {QUIZ_QUESTIONS}", answers.len()),
        ));
    }
    let mut seen = BTreeSet::new();
    for a in answers {
        if usize::from(a.question_index) >= QUIZ_QUESTIONS {
            out.push(Violation::new(
                "quiz.question_index",
                format!("question_index {} outside [0, 4]", a.question_index),
            ));
        } else if !seen.insert(a.question_index) {
            out.push(Violation::new(
                "quiz.duplicate_question",
                format!("question {} answered twice", a.question_index),
            ));
        }
        if a.answered_at_ms < quiz.started_at_ms {
            out.push(Violation::new(
                "quiz.before_start",
                format!("question {} answered before the quiz started", a.question_index),
            ));
        }
    }
    if quiz.started_at_ms < log.start_ms
        || quiz.started_at_ms > log.end_ms
        || answers.iter().any(|a| a.answered_at_ms > log.end_ms)
    {
        out.push(Violation::new(
            "quiz.out_of_range",
            "quiz timestamps outside the session window",
        ));
    }
    if let Some(last) = answers.iter().map(|a| a.answered_at_ms).max() {
        if last <= quiz.started_at_ms {
            out.push(Violation::new(
                "quiz.zero_duration",
                "quiz completion time must be positive",
            ));
        }
    }

    // Mirrored QuizAnswer events must agree with the record.
    for event in &log.events {
        if let Event::QuizAnswer {
            t_ms,
            question_index,
            correct,
        } = event
        {
            let matches = answers
                .iter()
                .any(|a| a.question_index == *question_index && a.correct == *correct && a.answered_at_ms == *t_ms);
            if !matches {
                out.push(Violation::new(
                    "quiz.event_mismatch",
                    format!("QuizAnswer event for question {question_index} disagrees with the quiz record"),
                ));
            }
        }
    }
}

fn check_self_report(log: &SessionLog, out: &mut Vec<Violation>) {
    let report = &log.self_report;
    for item in LIKERT_ITEMS {
        match report.rating(item) {
            None => out.push(Violation::new("self_report.missing_item", format!("{item} is missing"))),
            Some(v) if !(1..=5).contains(&v) => out.push(Violation::new(
                "self_report.rating_out_of_range",
                format!("{item} = {v} outside [1, 5]"),
            )),
            Some(_) => {}
        }
    }
    for key in report.ratings.keys() {
        if !LIKERT_ITEMS.contains(&key.as_str()) {
            out.push(Violation::new(
                "self_report.unknown_item",
                format!("unexpected rating item {key:?}"),
            ));
        }
    }
    for key in report.comments.keys() {
        if !TEXT_ITEMS.contains(&key.as_str()) {
            out.push(Violation::new(
                "self_report.unknown_item",
                format!("unexpected comment item {key:?}"),
            ));
        }
    }
}
