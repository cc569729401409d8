//! Seeded end-to-end sessions on a virtual millisecond clock.
//!
//! A synthetic student drives the tutor through the lesson. Every message
//! is encoded, passed through an ordered in-process channel and decoded on
//! the other side, then recorded in the transcript and mirrored into a
//! [`SessionLog`].

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::fsm::{qna_prompt, slide_prompt, LessonState, ProtocolError, Tutor, GREETING_PROMPT};
use super::gesture::{execute_gesture, GestureError, GestureLibrary};
use super::script::{self, QUIZ};
use super::wire::{decode_message, encode_message, ChannelError, Envelope, Inbox, Outbox, WireMessage};
use crate::condition::TrialCondition;
use crate::ingest::{
    Event, Expression, QuizAnswerRecord, QuizRecord, SelfReport, SessionLog, StudentProfile, QUIZ_QUESTIONS,
    SCHEMA_VERSION,
};

pub const TRANSCRIPT_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_GAZE_SAMPLES: u32 = 600;
pub const DEFAULT_EXPRESSION_FRAMES: u32 = 300;

const TUTOR_LATENCY_MS: u64 = 300;
const MS_PER_WORD: u64 = 350;
const SPEECH_LEAD_MS: u64 = 500;
/// Shortest time a student spends on one quiz question.
pub const MIN_QUESTION_MS: u64 = 15_000;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Gesture(#[from] GestureError),
    #[error("invalid student plan: {0}")]
    Plan(String),
}

/// What the synthetic student will do in one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentPlan {
    pub correct: [bool; QUIZ_QUESTIONS],
    /// Time from opening the quiz page to the last answer.
    pub quiz_time_ms: u64,
    /// Spontaneous questions asked while slides are shown.
    pub slide_queries: u32,
    /// Questions asked during the Q&A page; each answer ends with a prompt.
    pub qna_queries: u32,
    /// Share of tutor prompts the student answers. The greeting is always answered.
    pub reply_share: f64,
    pub gaze_samples: u32,
    pub gaze_on_target: u32,
    pub expression_frames: u32,
    pub happy_frames: u32,
    pub frustrated_frames: u32,
    /// Share of the session during which a gesture should be running. Stretches
    /// slide reading time when the gestures alone would cover more.
    pub gesture_share: Option<f64>,
    pub ratings: [u8; 6],
}

impl StudentPlan {
    pub fn query_count(&self) -> u32 {
        self.slide_queries + self.qna_queries
    }

    pub fn validate(&self) -> Result<(), SessionError> {
        let bad = |m: String| Err(SessionError::Plan(m));
        if self.quiz_time_ms < MIN_QUESTION_MS * QUIZ_QUESTIONS as u64 {
            return bad(format!(
                "quiz_time_ms {} below {} ms",
                self.quiz_time_ms,
                MIN_QUESTION_MS * QUIZ_QUESTIONS as u64
            ));
        }
        if !(0.0..=1.0).contains(&self.reply_share) {
            return bad(format!("reply_share {} outside [0, 1]", self.reply_share));
        }
        if self.gaze_samples == 0 || self.gaze_on_target > self.gaze_samples {
            return bad("gaze counts inconsistent".into());
        }
        if self.expression_frames == 0 || self.happy_frames + self.frustrated_frames > self.expression_frames {
            return bad("expression counts inconsistent".into());
        }
        if let Some(g) = self.gesture_share {
            if !(g > 0.0 && g <= 1.0) {
                return bad(format!("gesture_share {g} outside (0, 1]"));
            }
        }
        if self.ratings.iter().any(|r| !(1..=5).contains(r)) {
            return bad("ratings must be 1..=5".into());
        }
        Ok(())
    }

    /// A plausible student for `condition`, independent of any cohort targets.
    pub fn sample(condition: TrialCondition, rng: &mut impl Rng) -> Self {
        let (p_correct, quiz_min, queries) = match condition {
            TrialCondition::VerbalOnly => (0.5, 8.3, 8),
            TrialCondition::VerbalGesture => (0.66, 7.5, 9),
            TrialCondition::VerbalGestureMemory => (0.78, 6.3, 11),
            TrialCondition::VerbalMemory => (0.8, 6.0, 9),
        };
        let correct = std::array::from_fn(|_| rng.gen_bool(p_correct));
        let quiz_min: f64 = quiz_min + rng.gen_range(-1.0..1.0);
        let if_count = (queries + rng.gen_range(-2i32..=2)).max(0) as u32;
        let qna_queries = rng.gen_range(0..=3u32).min(if_count);
        let happy = rng.gen_range(30..150);
        let frustrated = rng.gen_range(10..90);
        Self {
            correct,
            quiz_time_ms: (quiz_min * 60_000.0) as u64,
            slide_queries: if_count - qna_queries,
            qna_queries,
            reply_share: rng.gen_range(0.6..1.0),
            gaze_samples: DEFAULT_GAZE_SAMPLES,
            gaze_on_target: rng.gen_range(300..560),
            expression_frames: DEFAULT_EXPRESSION_FRAMES,
            happy_frames: happy,
            frustrated_frames: frustrated,
            gesture_share: condition.gestures().then(|| rng.gen_range(0.07..0.1)),
            ratings: std::array::from_fn(|_| rng.gen_range(2..=5)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub at_ms: u64,
    pub envelope: Envelope,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionRun {
    pub log: SessionLog,
    pub transcript: Vec<TranscriptEntry>,
    /// Every state the tutor passed through, consecutive duplicates removed.
    pub visited: Vec<LessonState>,
}

pub fn session_id_for(condition: TrialCondition, profile: &StudentProfile, seed: u64) -> String {
    format!("{}-{}-{seed:016x}", condition.as_str(), profile.student_id)
}

/// Runs one session with a student sampled from `seed`.
pub fn run_session(condition: TrialCondition, profile: &StudentProfile, seed: u64) -> Result<SessionRun, SessionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = StudentPlan::sample(condition, &mut rng);
    let tutor = Tutor::new(condition, profile.clone());
    drive(&tutor, &session_id_for(condition, profile, seed), &plan, &mut rng)
}

/// Runs one session following an explicit student plan.
pub fn run_planned_session(
    tutor: &Tutor,
    session_id: &str,
    plan: &StudentPlan,
    seed: u64,
) -> Result<SessionRun, SessionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    drive(tutor, session_id, plan, &mut rng)
}

fn drive(
    tutor: &Tutor,
    session_id: &str,
    plan: &StudentPlan,
    rng: &mut ChaCha8Rng,
) -> Result<SessionRun, SessionError> {
    plan.validate()?;
    let choices = Choices::draw(tutor, plan, rng);
    let library = GestureLibrary::builtin();
    let extra = vec![0; tutor.slide_count as usize];
    let first = Timeline::run(tutor, session_id, plan, &choices, &library, &extra)?;
    let timeline = match plan.gesture_share {
        Some(share) if first.gesture_ms > 0 => {
            let wanted = (first.gesture_ms as f64 / share).round() as u64;
            if wanted > first.end_ms {
                let extra = spread(wanted - first.end_ms, tutor.slide_count as usize);
                Timeline::run(tutor, session_id, plan, &choices, &library, &extra)?
            } else {
                first
            }
        }
        _ => first,
    };
    Ok(timeline.into_run(tutor, session_id, plan, rng))
}

fn spread(total: u64, parts: usize) -> Vec<u64> {
    let base = total / parts as u64;
    let mut out = vec![base; parts];
    out[parts - 1] += total - base * parts as u64;
    out
}

/// Every random choice that shapes the interaction, drawn once so the
/// timeline can be rebuilt with different reading pauses.
struct Choices {
    replied: BTreeSet<String>,
    queries_per_slide: Vec<u32>,
    reaction_ms: Vec<u64>,
    dwell_ms: Vec<u64>,
    quiz_gaps_ms: [u64; QUIZ_QUESTIONS],
    wrong_choice: [u8; QUIZ_QUESTIONS],
    cursor: std::cell::Cell<usize>,
}

impl Choices {
    fn draw(tutor: &Tutor, plan: &StudentPlan, rng: &mut ChaCha8Rng) -> Self {
        let n = tutor.slide_count;
        let mut optional: Vec<String> = (0..n)
            .map(slide_prompt)
            .chain((0..plan.qna_queries).map(qna_prompt))
            .collect();
        let total = optional.len() + 1;
        let replies = ((plan.reply_share * total as f64).round() as usize).clamp(1, total);
        optional.shuffle(rng);
        let mut replied: BTreeSet<String> = optional.into_iter().take(replies - 1).collect();
        replied.insert(GREETING_PROMPT.to_string());

        let mut queries_per_slide = vec![0; n as usize];
        for _ in 0..plan.slide_queries {
            queries_per_slide[rng.gen_range(0..n as usize)] += 1;
        }
        let reaction_ms = (0..256).map(|_| rng.gen_range(800..3_000)).collect();
        let dwell_ms = (0..n).map(|_| rng.gen_range(4_000..12_000)).collect();

        let slack = plan.quiz_time_ms - MIN_QUESTION_MS * QUIZ_QUESTIONS as u64;
        let weights: [f64; QUIZ_QUESTIONS] = std::array::from_fn(|_| rng.gen_range(0.5..1.5));
        let wsum: f64 = weights.iter().sum();
        let mut quiz_gaps_ms = [MIN_QUESTION_MS; QUIZ_QUESTIONS];
        let mut used = 0;
        for (i, w) in weights.iter().enumerate().take(QUIZ_QUESTIONS - 1) {
            let share = (slack as f64 * w / wsum).floor() as u64;
            quiz_gaps_ms[i] += share;
            used += share;
        }
        quiz_gaps_ms[QUIZ_QUESTIONS - 1] += slack - used;
        let wrong_choice = std::array::from_fn(|_| rng.gen_range(1..4));
        Self {
            replied,
            queries_per_slide,
            reaction_ms,
            dwell_ms,
            quiz_gaps_ms,
            wrong_choice,
            cursor: std::cell::Cell::new(0),
        }
    }

    fn reaction(&self) -> u64 {
        let i = self.cursor.get();
        self.cursor.set(i + 1);
        self.reaction_ms[i % self.reaction_ms.len()]
    }
}

struct Timeline {
    transcript: Vec<TranscriptEntry>,
    visited: Vec<LessonState>,
    events: Vec<Event>,
    answers: Vec<QuizAnswerRecord>,
    quiz_started_ms: u64,
    gesture_ms: u64,
    end_ms: u64,
}

struct Channel<'a> {
    tutor: &'a Tutor,
    library: &'a GestureLibrary,
    outbox: Outbox,
    tutor_inbox: Inbox,
    student_inbox: Inbox,
    state: LessonState,
    /// Tutor is speaking or gesturing until this instant.
    busy_until: u64,
    last_prompt_ms: u64,
    tl: Timeline,
}

impl<'a> Channel<'a> {
    fn send(&mut self, at: u64, message: WireMessage) -> Result<(), SessionError> {
        let envelope = self.outbox.wrap(message);
        let received = self.tutor_inbox.receive(&encode_message(&envelope))?;
        self.tl.transcript.push(TranscriptEntry { at_ms: at, envelope });
        // The wake phrase is not a question about the lesson.
        if let WireMessage::StudentUtterance { text, reply_to } = &received.message {
            match reply_to {
                Some(id) => self.tl.events.push(Event::StudentReply {
                    t_ms: at,
                    prompt_id: id.clone(),
                }),
                None if self.state != LessonState::Idle => self.tl.events.push(Event::StudentQuery {
                    t_ms: at,
                    text: text.clone(),
                }),
                None => {}
            }
        }

        let (next, out) = self.tutor.advance(&self.state, &received.message)?;
        self.state = next;
        if self.tl.visited.last() != Some(&next) {
            self.tl.visited.push(next);
        }
        let start = at + TUTOR_LATENCY_MS;
        for message in out {
            let envelope = self.outbox.wrap(message);
            let delivered = self.student_inbox.receive(&encode_message(&envelope))?;
            debug_assert_eq!(delivered, envelope);
            match &envelope.message {
                WireMessage::TutorReply {
                    text,
                    gesture_name,
                    prompt_id,
                    ..
                } => {
                    let speech = SPEECH_LEAD_MS + MS_PER_WORD * script::word_count(text) as u64;
                    let mut busy = speech;
                    if let Some(name) = gesture_name {
                        let trace = execute_gesture(self.library.get(name)?)?;
                        self.tl.events.push(Event::GestureInterval {
                            start_ms: start,
                            end_ms: start + trace.total_duration_ms,
                            gesture_name: name.clone(),
                        });
                        self.tl.gesture_ms += trace.total_duration_ms;
                        busy = busy.max(trace.total_duration_ms);
                    }
                    if let Some(id) = prompt_id {
                        self.last_prompt_ms = start + speech;
                        self.tl.events.push(Event::RobotPrompt {
                            t_ms: start + speech,
                            prompt_id: id.clone(),
                            text: text.clone(),
                        });
                    }
                    self.busy_until = start + busy;
                }
                WireMessage::QuizResult {
                    question_index,
                    correct,
                } => {
                    self.tl.events.push(Event::QuizAnswer {
                        t_ms: at,
                        question_index: *question_index,
                        correct: *correct,
                    });
                    self.tl.answers.push(QuizAnswerRecord {
                        question_index: *question_index,
                        correct: *correct,
                        answered_at_ms: at,
                    });
                }
                _ => {}
            }
            self.tl.transcript.push(TranscriptEntry { at_ms: start, envelope });
        }
        Ok(())
    }

    /// Student answers the most recent prompt if the plan says so.
    fn maybe_reply(&mut self, choices: &Choices, prompt_id: &str) -> Result<(), SessionError> {
        if choices.replied.contains(prompt_id) {
            let at = self.busy_until.max(self.last_prompt_ms) + choices.reaction();
            self.send(
                at,
                WireMessage::StudentUtterance {
                    text: "Yes, I think I follow.".into(),
                    reply_to: Some(prompt_id.to_string()),
                },
            )?;
        }
        Ok(())
    }

    fn ask(&mut self, choices: &Choices, text: &str) -> Result<(), SessionError> {
        let at = self.busy_until + 1_000 + choices.reaction();
        self.send(
            at,
            WireMessage::StudentUtterance {
                text: text.into(),
                reply_to: None,
            },
        )
    }
}

const QUERIES: [&str; 6] = [
    "Why did Socrates refuse to beg for mercy?",
    "What does impiety mean here?",
    "Did Socrates write anything himself?",
    "Why were the Athenians so angry with him?",
    "How many jurors were there?",
    "Could he have escaped?",
];

impl Timeline {
    fn run(
        tutor: &Tutor,
        session_id: &str,
        plan: &StudentPlan,
        choices: &Choices,
        library: &GestureLibrary,
        extra_dwell: &[u64],
    ) -> Result<Self, SessionError> {
        choices.cursor.set(0);
        let n = tutor.slide_count;
        let mut ch = Channel {
            tutor,
            library,
            outbox: Outbox::new(session_id),
            tutor_inbox: Inbox::new(session_id),
            student_inbox: Inbox::new(session_id),
            state: LessonState::Idle,
            busy_until: 0,
            last_prompt_ms: 0,
            tl: Timeline {
                transcript: Vec::new(),
                visited: vec![LessonState::Idle],
                events: Vec::new(),
                answers: Vec::new(),
                quiz_started_ms: 0,
                gesture_ms: 0,
                end_ms: 0,
            },
        };
        let mut query = 0usize;
        let mut next_query = || {
            query += 1;
            QUERIES[(query - 1) % QUERIES.len()]
        };

        ch.send(
            2_000,
            WireMessage::StudentUtterance {
                text: "Hi Rick".into(),
                reply_to: None,
            },
        )?;
        // The greeting is always answered; that reply starts the slides.
        ch.maybe_reply(choices, GREETING_PROMPT)?;

        for slide in 0..n {
            if slide > 0 {
                let at = ch.busy_until + choices.dwell_ms[slide as usize - 1] + extra_dwell[slide as usize - 1];
                ch.send(at, WireMessage::SlideAdvance { index: slide })?;
            }
            ch.maybe_reply(choices, &slide_prompt(slide))?;
            for _ in 0..choices.queries_per_slide[slide as usize] {
                ch.ask(choices, next_query())?;
            }
        }
        let at = ch.busy_until + choices.dwell_ms[n as usize - 1] + extra_dwell[n as usize - 1];
        ch.send(at, WireMessage::SlideAdvance { index: n })?;
        for k in 0..plan.qna_queries {
            ch.ask(choices, next_query())?;
            ch.maybe_reply(choices, &qna_prompt(k))?;
        }

        let quiz_start = ch.busy_until + 1_000 + choices.reaction();
        ch.send(quiz_start, WireMessage::SlideAdvance { index: n + 1 })?;
        ch.tl.quiz_started_ms = quiz_start;
        let mut at = quiz_start;
        #[allow(clippy::needless_range_loop)]
        for q in 0..QUIZ_QUESTIONS {
            at += choices.quiz_gaps_ms[q];
            let answer = QUIZ[q].answer;
            let choice = if plan.correct[q] {
                answer
            } else {
                (answer + choices.wrong_choice[q]) % 4
            };
            ch.send(
                at,
                WireMessage::QuizAnswerSubmit {
                    question_index: q as u8,
                    choice,
                },
            )?;
        }
        let at = ch.busy_until + 1_500;
        ch.send(at, WireMessage::SessionEnd {})?;
        ch.tl.end_ms = ch.busy_until + 1_000;
        if ch.state != LessonState::Done {
            return Err(SessionError::Plan(format!("session stopped in {}", ch.state)));
        }
        Ok(ch.tl)
    }

    fn into_run(mut self, tutor: &Tutor, session_id: &str, plan: &StudentPlan, rng: &mut ChaCha8Rng) -> SessionRun {
        let (start, end) = (0, self.end_ms);
        let span = end - start;
        let at = |k: u32, count: u32| start + (2 * u64::from(k) + 1) * span / (2 * u64::from(count));

        let mut on_target: Vec<bool> = (0..plan.gaze_samples).map(|k| k < plan.gaze_on_target).collect();
        on_target.shuffle(rng);
        for (k, on) in on_target.into_iter().enumerate() {
            self.events.push(Event::GazeSample {
                t_ms: at(k as u32, plan.gaze_samples),
                on_target: on,
            });
        }

        const FRUSTRATED: [Expression; 3] = [Expression::Sad, Expression::Angry, Expression::Disgust];
        const OTHER: [Expression; 8] = [
            Expression::Neutral,
            Expression::Neutral,
            Expression::Neutral,
            Expression::Neutral,
            Expression::Neutral,
            Expression::Neutral,
            Expression::Surprise,
            Expression::Fear,
        ];
        let mut labels: Vec<Expression> = (0..plan.expression_frames)
            .map(|k| {
                if k < plan.happy_frames {
                    Expression::Happy
                } else if k < plan.happy_frames + plan.frustrated_frames {
                    *FRUSTRATED.choose(rng).expect("non-empty")
                } else {
                    *OTHER.choose(rng).expect("non-empty")
                }
            })
            .collect();
        labels.shuffle(rng);
        for (k, label) in labels.into_iter().enumerate() {
            self.events.push(Event::ExpressionFrame {
                t_ms: at(k as u32, plan.expression_frames),
                label,
            });
        }
        self.events.sort_by_key(Event::timestamp);

        let mut self_report = SelfReport::from_ratings(plan.ratings);
        self_report.comments = BTreeMap::from([
            ("Q7".to_string(), "The robot explained the trial clearly.".to_string()),
            ("Q8".to_string(), "More examples would help.".to_string()),
        ]);
        let log = SessionLog {
            schema_version: SCHEMA_VERSION,
            session_id: session_id.to_string(),
            condition: tutor.condition,
            student: tutor.profile.clone(),
            start_ms: start,
            end_ms: end,
            quiz: QuizRecord {
                started_at_ms: self.quiz_started_ms,
                answers: self.answers,
            },
            self_report,
            events: self.events,
        };
        SessionRun {
            log,
            transcript: self.transcript,
            visited: self.visited,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TranscriptHeader {
    schema_version: u32,
    kind: String,
    session_id: String,
    condition: TrialCondition,
}

/// Line-delimited JSON: a header line, then one `{"at_ms", "envelope"}` line per message.
pub fn write_transcript(run: &SessionRun) -> Vec<u8> {
    let header = TranscriptHeader {
        schema_version: TRANSCRIPT_SCHEMA_VERSION,
        kind: "transcript".into(),
        session_id: run.log.session_id.clone(),
        condition: run.log.condition,
    };
    let mut out = serde_json::to_vec(&header).expect("header serialises");
    out.push(b'\n');
    for entry in &run.transcript {
        out.extend(format!("{{\"at_ms\":{},\"envelope\":", entry.at_ms).as_bytes());
        out.extend(encode_message(&entry.envelope));
        out.extend(b"}\n");
    }
    out
}

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("unsupported transcript schema_version {0}")]
    UnsupportedVersion(u32),
}

pub fn read_transcript(bytes: &[u8]) -> Result<Vec<TranscriptEntry>, TranscriptError> {
    let text = std::str::from_utf8(bytes).map_err(|e| TranscriptError::Line {
        line: 0,
        message: e.to_string(),
    })?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or(TranscriptError::Line {
        line: 1,
        message: "empty transcript".into(),
    })?;
    let header: TranscriptHeader = serde_json::from_str(first).map_err(|e| TranscriptError::Line {
        line: 1,
        message: e.to_string(),
    })?;
    if header.schema_version != TRANSCRIPT_SCHEMA_VERSION {
        return Err(TranscriptError::UnsupportedVersion(header.schema_version));
    }
    lines
        .map(|(i, line)| {
            let err = |message: String| TranscriptError::Line { line: i + 1, message };
            let value: serde_json::Value = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
            let at_ms = value["at_ms"].as_u64().ok_or_else(|| err("missing at_ms".into()))?;
            let raw = serde_json::to_vec(&value["envelope"]).map_err(|e| err(e.to_string()))?;
            let envelope = decode_message(&raw).map_err(|e| err(e.to_string()))?;
            Ok(TranscriptEntry { at_ms, envelope })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{derive_raw_metrics, validate_log, IngestOptions};

    fn profile() -> StudentProfile {
        StudentProfile {
            student_id: "p07".into(),
            age: 21,
            gender: "male".into(),
            preferences: BTreeMap::from([("interest".to_string(), "chess".to_string())]),
        }
    }

    #[test]
    fn runs_are_valid_and_reach_done() {
        for condition in TrialCondition::ALL {
            let run = run_session(condition, &profile(), 3).unwrap();
            assert!(validate_log(&run.log).is_empty(), "{:?}", validate_log(&run.log));
            derive_raw_metrics(&run.log, &IngestOptions::default()).unwrap();
            let phases: Vec<u8> = run.visited.iter().map(LessonState::phase).collect();
            let mut dedup = phases.clone();
            dedup.dedup();
            assert_eq!(dedup, vec![0, 1, 2, 3, 4, 5, 6]);
        }
    }

    #[test]
    fn verbal_only_has_no_gestures() {
        let run = run_session(TrialCondition::VerbalOnly, &profile(), 1).unwrap();
        assert!(!String::from_utf8(write_transcript(&run))
            .unwrap()
            .contains("gesture_name"));
        assert!(!run
            .log
            .events
            .iter()
            .any(|e| matches!(e, Event::GestureInterval { .. })));
    }

    #[test]
    fn planned_counts_are_reproduced() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let plan = StudentPlan::sample(TrialCondition::VerbalGesture, &mut rng);
        let tutor = Tutor::new(TrialCondition::VerbalGesture, profile());
        let run = run_planned_session(&tutor, "x", &plan, 11).unwrap();
        let raw = derive_raw_metrics(&run.log, &IngestOptions::default()).unwrap();
        assert_eq!(raw.if_count, plan.query_count());
        assert!((raw.tq_minutes - plan.quiz_time_ms as f64 / 60_000.0).abs() < 1e-12);
        assert_eq!(
            run.log.quiz.correct_count(),
            plan.correct.iter().filter(|c| **c).count()
        );
        assert!((raw.ga_percent / 100.0 - plan.gesture_share.unwrap()).abs() < 1e-3);
        assert!((raw.gf_percent - 100.0 * f64::from(plan.gaze_on_target) / 600.0).abs() < 1e-9);
    }

    #[test]
    fn transcript_round_trips() {
        let run = run_session(TrialCondition::VerbalGestureMemory, &profile(), 5).unwrap();
        let bytes = write_transcript(&run);
        assert_eq!(read_transcript(&bytes).unwrap(), run.transcript);
        assert!(run.transcript.windows(2).all(|w| w[0].envelope.seq < w[1].envelope.seq));
    }
}
