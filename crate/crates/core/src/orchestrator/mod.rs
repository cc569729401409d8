//! Simulated tutoring system: lesson state machine, wire protocol between
//! course app, tutor server and robot, and servo gesture execution.

pub mod fsm;
pub mod gesture;
pub mod script;
pub mod session;
pub mod wire;

pub use fsm::{LessonState, ProtocolError, Tutor, DEFAULT_SLIDE_COUNT};
pub use gesture::{execute_gesture, GestureActionGroup, GestureError, GestureLibrary, GestureTrace, ServoFrame};
pub use session::{
    read_transcript, run_planned_session, run_session, write_transcript, SessionError, SessionRun, StudentPlan,
    TranscriptEntry,
};
pub use wire::{decode_message, encode_message, DecodeError, EmpathyMode, Envelope, Inbox, Outbox, WireMessage};
