//! Line-delimited JSON session-log files.
//!
//! Line 1 is a header object carrying `"schema_version": 1` and the session
//! metadata; every following non-blank line is one event object tagged by
//! `"type"`. See `docs/formats.md` for the field-by-field layout.

use serde::{Deserialize, Serialize};

use super::schema::{Event, QuizRecord, SelfReport, SessionLog, StudentProfile, SCHEMA_VERSION};
use super::validate::{validate_log, Violation};
use super::IngestError;
use crate::condition::TrialCondition;

const HEADER_KIND: &str = "session_header";

#[derive(Serialize, Deserialize)]
struct Header {
    schema_version: u32,
    kind: String,
    session_id: String,
    condition: TrialCondition,
    student: StudentProfile,
    start_ms: u64,
    end_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    quiz: Option<QuizRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    self_report: Option<SelfReport>,
}

/// Parses and validates a session log.
pub fn parse_session_log(bytes: &[u8]) -> Result<SessionLog, IngestError> {
    let log = decode_session_log(bytes)?;
    let violations = validate_log(&log);
    if violations.is_empty() {
        Ok(log)
    } else {
        Err(IngestError::Validation(violations))
    }
}

/// Parses a session log without checking its invariants. Structural gaps
/// that validation reports by field (missing quiz or self-report) still fail
/// here, as validation errors.
pub fn decode_session_log(bytes: &[u8]) -> Result<SessionLog, IngestError> {
    let text = std::str::from_utf8(bytes).map_err(|e| IngestError::Parse {
        offset: e.valid_up_to(),
        message: "input is not valid UTF-8".into(),
    })?;

    let mut lines = LineIter::new(text).filter(|(_, line)| !line.trim().is_empty());
    let (header_offset, header_line) = lines.next().ok_or(IngestError::Parse {
        offset: 0,
        message: "empty input: expected a session header".into(),
    })?;

    let value: serde_json::Value =
        serde_json::from_str(header_line).map_err(|e| json_error(header_offset, header_line, &e))?;
    match value.get("schema_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => return Err(IngestError::UnsupportedVersion(v)),
        None => {
            return Err(IngestError::Parse {
                offset: header_offset,
                message: "header is missing numeric field `schema_version`".into(),
            })
        }
    }
    let header: Header = serde_json::from_value(value).map_err(|e| IngestError::Parse {
        offset: header_offset,
        message: format!("invalid header: {e}"),
    })?;
    if header.kind != HEADER_KIND {
        return Err(IngestError::Parse {
            offset: header_offset,
            message: format!("header kind must be {HEADER_KIND:?}, got {:?}", header.kind),
        });
    }

    let mut events = Vec::new();
    for (offset, line) in lines {
        let event: Event = serde_json::from_str(line).map_err(|e| json_error(offset, line, &e))?;
        events.push(event);
    }

    let (quiz, self_report) = match (header.quiz, header.self_report) {
        (Some(quiz), Some(self_report)) => (quiz, self_report),
        (quiz, self_report) => {
            let mut missing = Vec::new();
            if quiz.is_none() {
                missing.push(Violation {
                    code: "quiz.missing".into(),
                    message: "header has no `quiz` record".into(),
                });
            }
            if self_report.is_none() {
                missing.push(Violation {
                    code: "self_report.missing".into(),
                    message: "header has no `self_report`".into(),
                });
            }
            return Err(IngestError::Validation(missing));
        }
    };

    Ok(SessionLog {
        schema_version: header.schema_version,
        session_id: header.session_id,
        condition: header.condition,
        student: header.student,
        start_ms: header.start_ms,
        end_ms: header.end_ms,
        quiz,
        self_report,
        events,
    })
}

/// Serialises a log in canonical form: header line, then one line per event.
pub fn write_session_log(log: &SessionLog) -> Vec<u8> {
    let header = Header {
        schema_version: log.schema_version,
        kind: HEADER_KIND.to_string(),
        session_id: log.session_id.clone(),
        condition: log.condition,
        student: log.student.clone(),
        start_ms: log.start_ms,
        end_ms: log.end_ms,
        quiz: Some(log.quiz.clone()),
        self_report: Some(log.self_report.clone()),
    };
    let mut out = serde_json::to_vec(&header).expect("header serialises");
    out.push(b'\n');
    for event in &log.events {
        serde_json::to_writer(&mut out, event).expect("event serialises");
        out.push(b'\n');
    }
    out
}

fn json_error(line_offset: usize, line: &str, err: &serde_json::Error) -> IngestError {
    // serde_json reports 1-based line/column within the slice it was given.
    let mut local = 0usize;
    for (i, l) in line.split('\n').enumerate() {
        if i + 1 == err.line() {
            local += err.column().saturating_sub(1).min(l.len());
            break;
        }
        local += l.len() + 1;
    }
    IngestError::Parse {
        offset: line_offset + local,
        message: err.to_string(),
    }
}

/// Lines with their starting byte offset.
struct LineIter<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> LineIter<'a> {
    fn new(text: &'a str) -> Self {
        Self { text, pos: 0 }
    }
}

impl<'a> Iterator for LineIter<'a> {
    type Item = (usize, &'a str);

    fn next(&mut self) -> Option<Self::Item> {
        if self.pos >= self.text.len() {
            return None;
        }
        let start = self.pos;
        let rest = &self.text[start..];
        let (line, advance) = match rest.find('\n') {
            Some(i) => (&rest[..i], i + 1),
            None => (rest, rest.len()),
        };
        self.pos += advance;
        Some((start, line.strip_suffix('\r').unwrap_or(line)))
    }
}
