//! Lesson-flow state machine and the scripted tutor policy.
//!
//! Transition table (`n` = slide count):
//!
//! | state               | message                                   | next                  |
//! |---------------------|-------------------------------------------|-----------------------|
//! | Idle                | utterance containing the wake phrase      | Greeting              |
//! | Idle                | any other utterance                       | Idle (ignored)        |
//! | Greeting            | utterance replying to `greet`             | SlideDelivery{0}      |
//! | Greeting            | any other utterance                       | Greeting              |
//! | SlideDelivery{i}    | utterance                                 | SlideDelivery{i}      |
//! | SlideDelivery{i}    | SlideAdvance{i+1}, i+1 < n                | SlideDelivery{i+1}    |
//! | SlideDelivery{n-1}  | SlideAdvance{n}                           | QnA{0}                |
//! | QnA{k}              | query (utterance without `reply_to`)      | QnA{k+1}              |
//! | QnA{k}              | reply (utterance with `reply_to`)         | QnA{k}                |
//! | QnA{k}              | SlideAdvance{n+1}                         | Quiz{0}               |
//! | Quiz{q}             | QuizAnswerSubmit{q}, q < 4                | Quiz{q+1}             |
//! | Quiz{4}             | QuizAnswerSubmit{4}                       | Farewell              |
//! | Quiz{q}             | utterance                                 | Quiz{q}               |
//! | Farewell            | utterance                                 | Farewell              |
//! | Farewell            | SessionEnd                                | Done                  |
//!
//! Every other pair is a protocol error, including any message in `Done` and
//! tutor-originated messages (`TutorReply`, `QuizResult`) arriving as input.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::gesture::{FAREWELL, GREET_WAVE, LEAN_INTEREST, SAD_SLUMP, THUMBS_UP_CHEER, UNDERSTANDING_NOD};
use super::script::{self, QUIZ, VERDICT_SLIDE, WAKE_PHRASE};
use super::wire::{EmpathyMode, WireMessage};
use crate::condition::TrialCondition;
use crate::ingest::{StudentProfile, QUIZ_QUESTIONS};

pub const DEFAULT_SLIDE_COUNT: u32 = 10;
pub const GREETING_PROMPT: &str = "greet";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum LessonState {
    Idle,
    Greeting,
    SlideDelivery {
        slide_index: u32,
    },
    #[serde(rename = "qna")]
    QnA {
        questions_asked: u32,
    },
    Quiz {
        question_index: u8,
    },
    Farewell,
    Done,
}

impl LessonState {
    pub fn name(&self) -> &'static str {
        match self {
            LessonState::Idle => "Idle",
            LessonState::Greeting => "Greeting",
            LessonState::SlideDelivery { .. } => "SlideDelivery",
            LessonState::QnA { .. } => "QnA",
            LessonState::Quiz { .. } => "Quiz",
            LessonState::Farewell => "Farewell",
            LessonState::Done => "Done",
        }
    }

    /// Position of the phase in the lesson flow, 0 for Idle through 6 for Done.
    pub fn phase(&self) -> u8 {
        match self {
            LessonState::Idle => 0,
            LessonState::Greeting => 1,
            LessonState::SlideDelivery { .. } => 2,
            LessonState::QnA { .. } => 3,
            LessonState::Quiz { .. } => 4,
            LessonState::Farewell => 5,
            LessonState::Done => 6,
        }
    }
}

impl fmt::Display for LessonState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LessonState::SlideDelivery { slide_index } => write!(f, "SlideDelivery{{{slide_index}}}"),
            LessonState::QnA { questions_asked } => write!(f, "QnA{{{questions_asked}}}"),
            LessonState::Quiz { question_index } => write!(f, "Quiz{{{question_index}}}"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("protocol error: {message_type} not allowed in {state}: {reason}")]
pub struct ProtocolError {
    pub state: LessonState,
    pub message_type: &'static str,
    pub reason: String,
}

/// The tutor side of a session: capability level, learner profile and lesson size.
#[derive(Debug, Clone)]
pub struct Tutor {
    pub condition: TrialCondition,
    pub profile: StudentProfile,
    pub slide_count: u32,
}

impl Tutor {
    pub fn new(condition: TrialCondition, profile: StudentProfile) -> Self {
        Self {
            condition,
            profile,
            slide_count: DEFAULT_SLIDE_COUNT,
        }
    }

    pub fn with_slide_count(mut self, slide_count: u32) -> Self {
        assert!(slide_count >= 1, "a lesson needs at least one slide");
        self.slide_count = slide_count;
        self
    }

    fn mode(&self) -> EmpathyMode {
        self.condition.into()
    }

    fn reply(&self, text: String, gesture: Option<&str>, prompt_id: Option<String>) -> WireMessage {
        WireMessage::TutorReply {
            text,
            gesture_name: gesture.filter(|_| self.condition.gestures()).map(str::to_string),
            empathy_mode: self.mode(),
            prompt_id,
        }
    }

    fn personal(&self, plain: &str, with_interest: impl FnOnce(&str) -> String) -> String {
        match script::remembered_interest(&self.profile).filter(|_| self.condition.memory()) {
            Some(interest) => with_interest(interest),
            None => plain.to_string(),
        }
    }

    fn introduction(&self) -> String {
        self.personal(script::INTRODUCTION, |interest| {
            format!(
                "{} I remember you enjoy {interest}, so I will use it in a few examples.",
                script::INTRODUCTION
            )
        })
    }

    fn narrate(&self, slide: u32) -> WireMessage {
        let topic = script::slide_topic(slide);
        let text = self.personal(
            &format!("Slide {}: {topic}. What do you think so far?", slide + 1),
            |interest| {
                format!(
                    "Slide {}: {topic}. Think of it the way you would think about {interest}. What do you think so far?",
                    slide + 1
                )
            },
        );
        let gesture = if slide == VERDICT_SLIDE {
            SAD_SLUMP
        } else {
            LEAN_INTEREST
        };
        self.reply(text, Some(gesture), Some(slide_prompt(slide)))
    }

    fn acknowledge(&self) -> WireMessage {
        self.reply("Thank you, that is a good thought.".into(), None, None)
    }

    fn answer_query(&self, k: u32) -> WireMessage {
        let text = self.personal(
            "That is a good question. Socrates believed that examining our beliefs matters more than winning an argument. Does that make sense?",
            |interest| format!(
                "That is a good question. Like practice in {interest}, Socrates believed that examining our beliefs matters more than winning. Does that make sense?"
            ),
        );
        self.reply(text, Some(UNDERSTANDING_NOD), Some(qna_prompt(k)))
    }

    fn quiz_feedback(&self, question: u8, correct: bool) -> WireMessage {
        let plain = if correct {
            "Correct, well done!"
        } else {
            "Not quite, but that is alright. Let us keep going."
        };
        let text = self.personal(plain, |interest| {
            if correct {
                format!("Correct, well done! That was a {interest}-level move.")
            } else {
                format!("Not quite, but that is alright. Even in {interest} we learn from misses.")
            }
        });
        let gesture = if correct { THUMBS_UP_CHEER } else { UNDERSTANDING_NOD };
        let last = usize::from(question) + 1 == QUIZ_QUESTIONS;
        let text = if last {
            format!("{text} That was the last question.")
        } else {
            text
        };
        self.reply(text, Some(gesture), None)
    }

    fn farewell(&self) -> WireMessage {
        let text = self.personal("Thank you for learning with me today. Goodbye!", |interest| {
            format!("Thank you for learning with me today. Enjoy your {interest}, and goodbye!")
        });
        self.reply(text, Some(FAREWELL), None)
    }

    /// Applies one inbound message. Pure: the same state and message always
    /// give the same transition and tutor output.
    pub fn advance(
        &self,
        state: &LessonState,
        msg: &WireMessage,
    ) -> Result<(LessonState, Vec<WireMessage>), ProtocolError> {
        let err = |reason: &str| ProtocolError {
            state: *state,
            message_type: msg.kind(),
            reason: reason.to_string(),
        };
        let n = self.slide_count;
        match (state, msg) {
            (_, WireMessage::TutorReply { .. } | WireMessage::QuizResult { .. }) => {
                Err(err("tutor output cannot be sent to the tutor"))
            }
            (LessonState::Done, _) => Err(err("session is over")),

            (LessonState::Idle, WireMessage::StudentUtterance { text, .. }) => {
                if text.to_lowercase().contains(WAKE_PHRASE) {
                    let intro = self.reply(self.introduction(), Some(GREET_WAVE), Some(GREETING_PROMPT.into()));
                    Ok((LessonState::Greeting, vec![intro]))
                } else {
                    Ok((LessonState::Idle, vec![]))
                }
            }

            (LessonState::Greeting, WireMessage::StudentUtterance { reply_to, .. }) => {
                if reply_to.as_deref() == Some(GREETING_PROMPT) {
                    Ok((LessonState::SlideDelivery { slide_index: 0 }, vec![self.narrate(0)]))
                } else {
                    let nudge = self.reply("Tell me to start when you are ready.".into(), None, None);
                    Ok((LessonState::Greeting, vec![nudge]))
                }
            }

            (LessonState::SlideDelivery { .. }, WireMessage::StudentUtterance { reply_to, .. }) => {
                let out = match reply_to {
                    Some(_) => self.acknowledge(),
                    None => self.reply(
                        "Good question. Keep it in mind as we go, the next slides come back to it.".into(),
                        None,
                        None,
                    ),
                };
                Ok((*state, vec![out]))
            }
            (LessonState::SlideDelivery { slide_index }, WireMessage::SlideAdvance { index }) => {
                if *index != slide_index + 1 {
                    Err(err(&format!("expected page {}, got {index}", slide_index + 1)))
                } else if *index < n {
                    Ok((
                        LessonState::SlideDelivery { slide_index: *index },
                        vec![self.narrate(*index)],
                    ))
                } else {
                    let invite = self.reply(
                        "That was the last slide. Do you have any questions for me?".into(),
                        None,
                        None,
                    );
                    Ok((LessonState::QnA { questions_asked: 0 }, vec![invite]))
                }
            }

            (LessonState::QnA { questions_asked }, WireMessage::StudentUtterance { reply_to, .. }) => match reply_to {
                Some(_) => Ok((*state, vec![self.acknowledge()])),
                None => Ok((
                    LessonState::QnA {
                        questions_asked: questions_asked + 1,
                    },
                    vec![self.answer_query(*questions_asked)],
                )),
            },
            (LessonState::QnA { .. }, WireMessage::SlideAdvance { index }) => {
                if *index == n + 1 {
                    let intro = self.reply(
                        "Now let us begin the quiz. Take your time with each question.".into(),
                        None,
                        None,
                    );
                    Ok((LessonState::Quiz { question_index: 0 }, vec![intro]))
                } else {
                    Err(err(&format!(
                        "only the quiz page {} can follow Q&A, got {index}",
                        n + 1
                    )))
                }
            }

            (
                LessonState::Quiz { question_index },
                WireMessage::QuizAnswerSubmit {
                    question_index: q,
                    choice,
                },
            ) => {
                if q != question_index {
                    return Err(err(&format!(
                        "expected an answer to question {question_index}, got {q}"
                    )));
                }
                let correct = QUIZ[usize::from(*q)].answer == *choice;
                let next = if usize::from(*q) + 1 == QUIZ_QUESTIONS {
                    LessonState::Farewell
                } else {
                    LessonState::Quiz { question_index: q + 1 }
                };
                let result = WireMessage::QuizResult {
                    question_index: *q,
                    correct,
                };
                Ok((next, vec![result, self.quiz_feedback(*q, correct)]))
            }
            (LessonState::Quiz { .. }, WireMessage::StudentUtterance { .. }) => Ok((
                *state,
                vec![self.reply("Let us focus on the question on the screen.".into(), None, None)],
            )),

            (LessonState::Farewell, WireMessage::StudentUtterance { .. }) => {
                Ok((*state, vec![self.reply("You did well today.".into(), None, None)]))
            }
            (LessonState::Farewell, WireMessage::SessionEnd {}) => Ok((LessonState::Done, vec![self.farewell()])),

            _ => Err(err("no transition defined")),
        }
    }
}

pub fn slide_prompt(slide: u32) -> String {
    format!("slide-{slide}")
}

pub fn qna_prompt(k: u32) -> String {
    format!("qna-{k}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn profile() -> StudentProfile {
        StudentProfile {
            student_id: "s01".into(),
            age: 22,
            gender: "female".into(),
            preferences: BTreeMap::from([("interest".to_string(), "basketball".to_string())]),
        }
    }

    fn utter(text: &str) -> WireMessage {
        WireMessage::StudentUtterance {
            text: text.into(),
            reply_to: None,
        }
    }

    #[test]
    fn wake_phrase_starts_greeting() {
        let tutor = Tutor::new(TrialCondition::VerbalOnly, profile());
        let (next, out) = tutor.advance(&LessonState::Idle, &utter("Hi Rick")).unwrap();
        assert_eq!(next, LessonState::Greeting);
        match &out[0] {
            WireMessage::TutorReply {
                text,
                gesture_name,
                prompt_id,
                ..
            } => {
                assert!(text.starts_with("Hello. My name is Rick."));
                assert!(gesture_name.is_none());
                assert_eq!(prompt_id.as_deref(), Some(GREETING_PROMPT));
            }
            other => panic!("unexpected {other:?}"),
        }
        let (next, out) = tutor.advance(&LessonState::Idle, &utter("hello?")).unwrap();
        assert_eq!(next, LessonState::Idle);
        assert!(out.is_empty());
    }

    #[test]
    fn last_quiz_answer_leads_to_farewell() {
        let tutor = Tutor::new(TrialCondition::VerbalGesture, profile());
        let msg = WireMessage::QuizAnswerSubmit {
            question_index: 4,
            choice: QUIZ[4].answer,
        };
        let (next, out) = tutor.advance(&LessonState::Quiz { question_index: 4 }, &msg).unwrap();
        assert_eq!(next, LessonState::Farewell);
        assert_eq!(
            out[0],
            WireMessage::QuizResult {
                question_index: 4,
                correct: true
            }
        );
        assert!(matches!(&out[1], WireMessage::TutorReply { gesture_name: Some(g), .. } if g == THUMBS_UP_CHEER));
    }

    #[test]
    fn quiz_answer_during_slides_is_protocol_error() {
        let tutor = Tutor::new(TrialCondition::VerbalOnly, profile());
        let msg = WireMessage::QuizAnswerSubmit {
            question_index: 0,
            choice: 0,
        };
        let e = tutor
            .advance(&LessonState::SlideDelivery { slide_index: 2 }, &msg)
            .unwrap_err();
        assert_eq!(e.state, LessonState::SlideDelivery { slide_index: 2 });
        assert_eq!(e.message_type, "quiz_answer_submit");
    }

    #[test]
    fn slides_cannot_skip_or_rewind() {
        let tutor = Tutor::new(TrialCondition::VerbalOnly, profile());
        let s = LessonState::SlideDelivery { slide_index: 3 };
        assert!(tutor.advance(&s, &WireMessage::SlideAdvance { index: 5 }).is_err());
        assert!(tutor.advance(&s, &WireMessage::SlideAdvance { index: 2 }).is_err());
        let (next, _) = tutor.advance(&s, &WireMessage::SlideAdvance { index: 4 }).unwrap();
        assert_eq!(next, LessonState::SlideDelivery { slide_index: 4 });
    }

    #[test]
    fn memory_conditions_personalise() {
        for (condition, expect) in [
            (TrialCondition::VerbalMemory, true),
            (TrialCondition::VerbalGestureMemory, true),
            (TrialCondition::VerbalGesture, false),
        ] {
            let tutor = Tutor::new(condition, profile());
            let (_, out) = tutor.advance(&LessonState::Idle, &utter("hi rick")).unwrap();
            let WireMessage::TutorReply { text, .. } = &out[0] else {
                panic!()
            };
            assert_eq!(text.contains("basketball"), expect, "{condition}");
        }
    }

    #[test]
    fn done_accepts_nothing() {
        let tutor = Tutor::new(TrialCondition::VerbalOnly, profile());
        assert!(tutor.advance(&LessonState::Done, &WireMessage::SessionEnd {}).is_err());
        assert!(tutor.advance(&LessonState::Done, &utter("hi rick")).is_err());
    }
}
