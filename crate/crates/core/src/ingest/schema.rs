use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::condition::TrialCondition;

/// Current session-log schema version. Readers reject other major versions.
pub const SCHEMA_VERSION: u32 = 1;

/// Questions in the post-lesson quiz.
pub const QUIZ_QUESTIONS: usize = 5;

/// Numeric questionnaire items, 1..=5 Likert.
pub const LIKERT_ITEMS: [&str; 6] = ["Q1", "Q2", "Q3", "Q4", "Q5", "Q6"];
/// Open-ended questionnaire items.
pub const TEXT_ITEMS: [&str; 2] = ["Q7", "Q8"];

/// One student's complete, timestamped session record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub schema_version: u32,
    pub session_id: String,
    pub condition: TrialCondition,
    pub student: StudentProfile,
    pub start_ms: u64,
    pub end_ms: u64,
    pub quiz: QuizRecord,
    pub self_report: SelfReport,
    pub events: Vec<Event>,
}

impl SessionLog {
    pub fn duration_ms(&self) -> u64 {
        self.end_ms.saturating_sub(self.start_ms)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudentProfile {
    pub student_id: String,
    pub age: u32,
    pub gender: String,
    /// Free-form facts the memory-enabled tutor may bring up.
    #[serde(default)]
    pub preferences: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuizRecord {
    pub started_at_ms: u64,
    pub answers: Vec<QuizAnswerRecord>,
}

impl QuizRecord {
    pub fn correct_count(&self) -> usize {
        self.answers.iter().filter(|a| a.correct).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuizAnswerRecord {
    pub question_index: u8,
    pub correct: bool,
    pub answered_at_ms: u64,
}

/// Post-session questionnaire: Q1..Q6 Likert ratings plus open-ended Q7/Q8.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SelfReport {
    pub ratings: BTreeMap<String, u8>,
    #[serde(default)]
    pub comments: BTreeMap<String, String>,
}

impl SelfReport {
    pub fn from_ratings(ratings: [u8; 6]) -> Self {
        Self {
            ratings: LIKERT_ITEMS
                .iter()
                .zip(ratings)
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            comments: BTreeMap::new(),
        }
    }

    pub fn rating(&self, item: &str) -> Option<u8> {
        self.ratings.get(item).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expression {
    Happy,
    Sad,
    Angry,
    Disgust,
    Fear,
    Surprise,
    Neutral,
}

impl Expression {
    pub const ALL: [Expression; 7] = [
        Expression::Happy,
        Expression::Sad,
        Expression::Angry,
        Expression::Disgust,
        Expression::Fear,
        Expression::Surprise,
        Expression::Neutral,
    ];

    pub fn is_positive(self) -> bool {
        self == Expression::Happy
    }

    pub fn is_frustrated(self) -> bool {
        matches!(self, Expression::Angry | Expression::Sad | Expression::Disgust)
    }
}

/// Pre-classified multimodal events. Perception outputs (gaze, expression)
/// arrive already labelled by upstream tools.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    GazeSample {
        t_ms: u64,
        on_target: bool,
    },
    ExpressionFrame {
        t_ms: u64,
        label: Expression,
    },
    StudentQuery {
        t_ms: u64,
        text: String,
    },
    RobotPrompt {
        t_ms: u64,
        prompt_id: String,
        text: String,
    },
    StudentReply {
        t_ms: u64,
        prompt_id: String,
    },
    GestureInterval {
        start_ms: u64,
        end_ms: u64,
        gesture_name: String,
    },
    QuizAnswer {
        t_ms: u64,
        question_index: u8,
        correct: bool,
    },
}

impl Event {
    /// Ordering key; gesture intervals sort by their start.
    pub fn timestamp(&self) -> u64 {
        match self {
            Event::GazeSample { t_ms, .. }
            | Event::ExpressionFrame { t_ms, .. }
            | Event::StudentQuery { t_ms, .. }
            | Event::RobotPrompt { t_ms, .. }
            | Event::StudentReply { t_ms, .. }
            | Event::QuizAnswer { t_ms, .. } => *t_ms,
            Event::GestureInterval { start_ms, .. } => *start_ms,
        }
    }

    /// Latest instant the event touches.
    pub fn end_timestamp(&self) -> u64 {
        match self {
            Event::GestureInterval { end_ms, .. } => *end_ms,
            other => other.timestamp(),
        }
    }

    pub(crate) fn shift(&mut self, delta: u64) {
        match self {
            Event::GazeSample { t_ms, .. }
            | Event::ExpressionFrame { t_ms, .. }
            | Event::StudentQuery { t_ms, .. }
            | Event::RobotPrompt { t_ms, .. }
            | Event::StudentReply { t_ms, .. }
            | Event::QuizAnswer { t_ms, .. } => *t_ms += delta,
            Event::GestureInterval { start_ms, end_ms, .. } => {
                *start_ms += delta;
                *end_ms += delta;
            }
        }
    }
}

impl SessionLog {
    /// Moves every timestamp forward by `delta` milliseconds.
    pub fn shifted(mut self, delta: u64) -> Self {
        self.start_ms += delta;
        self.end_ms += delta;
        self.quiz.started_at_ms += delta;
        for answer in &mut self.quiz.answers {
            answer.answered_at_ms += delta;
        }
        for event in &mut self.events {
            event.shift(delta);
        }
        self
    }
}
