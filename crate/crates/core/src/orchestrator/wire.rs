//! Message envelope exchanged between the course app, the tutor model server
//! and the robot agent: `{"session_id", "seq", "type", "payload"}`.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::condition::TrialCondition;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("malformed envelope: {0}")]
    Malformed(String),
    #[error("envelope is missing field `{0}`")]
    MissingField(&'static str),
    #[error("unknown message type {0:?}")]
    UnknownType(String),
    #[error("invalid payload for {kind}: {message}")]
    Payload { kind: String, message: String },
}

/// How much of the empathy stack a tutor reply draws on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmpathyMode {
    Plain,
    Gestural,
    Personalized,
    GesturalPersonalized,
}

impl From<TrialCondition> for EmpathyMode {
    fn from(c: TrialCondition) -> Self {
        match c {
            TrialCondition::VerbalOnly => EmpathyMode::Plain,
            TrialCondition::VerbalGesture => EmpathyMode::Gestural,
            TrialCondition::VerbalMemory => EmpathyMode::Personalized,
            TrialCondition::VerbalGestureMemory => EmpathyMode::GesturalPersonalized,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "snake_case")]
pub enum WireMessage {
    /// Speech from the student. `reply_to` names the tutor prompt being
    /// answered; without it the utterance is a spontaneous query.
    StudentUtterance {
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reply_to: Option<String>,
    },
    /// Spoken tutor output, optionally paired with a gesture. `prompt_id` is
    /// set when the reply ends by asking the student something.
    TutorReply {
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gesture_name: Option<String>,
        empathy_mode: EmpathyMode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        prompt_id: Option<String>,
    },
    /// Course-app page change: slides `0..n`, then Q&A at `n`, quiz at `n + 1`.
    SlideAdvance {
        index: u32,
    },
    QuizAnswerSubmit {
        question_index: u8,
        choice: u8,
    },
    QuizResult {
        question_index: u8,
        correct: bool,
    },
    SessionEnd {},
}

impl WireMessage {
    pub fn kind(&self) -> &'static str {
        match self {
            WireMessage::StudentUtterance { .. } => "student_utterance",
            WireMessage::TutorReply { .. } => "tutor_reply",
            WireMessage::SlideAdvance { .. } => "slide_advance",
            WireMessage::QuizAnswerSubmit { .. } => "quiz_answer_submit",
            WireMessage::QuizResult { .. } => "quiz_result",
            WireMessage::SessionEnd {} => "session_end",
        }
    }

    pub const KINDS: [&'static str; 6] = [
        "student_utterance",
        "tutor_reply",
        "slide_advance",
        "quiz_answer_submit",
        "quiz_result",
        "session_end",
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub session_id: String,
    pub seq: u64,
    #[serde(flatten)]
    pub message: WireMessage,
}

pub fn encode_message(envelope: &Envelope) -> Vec<u8> {
    serde_json::to_vec(envelope).expect("envelope serialises")
}

pub fn decode_message(bytes: &[u8]) -> Result<Envelope, DecodeError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| DecodeError::Malformed(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| DecodeError::Malformed("envelope must be a JSON object".into()))?;
    let session_id = obj
        .get("session_id")
        .and_then(Value::as_str)
        .ok_or(DecodeError::MissingField("session_id"))?;
    let seq = obj
        .get("seq")
        .and_then(Value::as_u64)
        .ok_or(DecodeError::MissingField("seq"))?;
    let kind = obj
        .get("type")
        .and_then(Value::as_str)
        .ok_or(DecodeError::MissingField("type"))?;
    if !WireMessage::KINDS.contains(&kind) {
        return Err(DecodeError::UnknownType(kind.to_string()));
    }
    if let Some(extra) = obj
        .keys()
        .find(|k| !matches!(k.as_str(), "session_id" | "seq" | "type" | "payload"))
    {
        return Err(DecodeError::Malformed(format!("unexpected envelope field {extra:?}")));
    }
    let payload = obj
        .get("payload")
        .cloned()
        .ok_or(DecodeError::MissingField("payload"))?;
    let tagged = serde_json::json!({ "type": kind, "payload": payload });
    let message: WireMessage = serde_json::from_value(tagged).map_err(|e| DecodeError::Payload {
        kind: kind.to_string(),
        message: e.to_string(),
    })?;
    Ok(Envelope {
        session_id: session_id.to_string(),
        seq,
        message,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("sequence regression: got seq {got} after {last}")]
    SequenceRegression { last: u64, got: u64 },
    #[error("envelope for session {got:?} on channel for {expected:?}")]
    WrongSession { expected: String, got: String },
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Receiving end of an ordered channel: enforces one session and strictly
/// increasing sequence numbers.
#[derive(Debug, Clone)]
pub struct Inbox {
    session_id: String,
    last_seq: Option<u64>,
}

impl Inbox {
    pub fn new(session_id: impl Into<String>) -> Self {
        Self {
            session_id: session_id.into(),
            last_seq: None,
        }
    }

    pub fn accept(&mut self, envelope: &Envelope) -> Result<(), ChannelError> {
        if envelope.session_id != self.session_id {
            return Err(ChannelError::WrongSession {
                expected: self.session_id.clone(),
                got: envelope.session_id.clone(),
            });
        }
        if let Some(last) = self.last_seq {
            if envelope.seq <= last {
                return Err(ChannelError::SequenceRegression {
                    last,
                    got: envelope.seq,
                });
            }
        }
        self.last_seq = Some(envelope.seq);
        Ok(())
    }

    pub fn receive(&mut self, bytes: &[u8]) -> Result<Envelope, ChannelError> {
        let envelope = decode_message(bytes)?;
        self.accept(&envelope)?;
        Ok(envelope)
    }
}

/// Sending end: stamps envelopes with the session id and the next sequence number.
#[derive(Debug, Clone)]
pub struct Outbox {
    session_id: String,
    next_seq: u64,
}

impl Outbox {
    pub fn new(session_id: impl Into<String>) -> Self {
        Self {
            session_id: session_id.into(),
            next_seq: 1,
        }
    }

    pub fn wrap(&mut self, message: WireMessage) -> Envelope {
        let seq = self.next_seq;
        self.next_seq += 1;
        Envelope {
            session_id: self.session_id.clone(),
            seq,
            message,
        }
    }
}
