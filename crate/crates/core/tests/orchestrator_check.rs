use std::collections::{BTreeMap, HashSet, VecDeque};

use engage_core::ingest::{derive_raw_metrics, validate_log, IngestOptions, StudentProfile};
use engage_core::orchestrator::script::{INTRODUCTION, QUIZ, WAKE_PHRASE};
use engage_core::orchestrator::{
    decode_message, encode_message, execute_gesture, run_session, EmpathyMode, Envelope, GestureActionGroup,
    GestureLibrary, Inbox, LessonState, ServoFrame, Tutor, WireMessage,
};
use engage_core::TrialCondition;
use proptest::prelude::*;

const MAX_DEPTH: usize = 40;
const SHIPPED_LIBRARY: &[u8] = include_bytes!("../../../data/gesture_library.json");

fn profile() -> StudentProfile {
    StudentProfile {
        student_id: "s-01".into(),
        age: 22,
        gender: "male".into(),
        preferences: BTreeMap::from([("interest".to_string(), "chess".to_string())]),
    }
}

fn utter(text: &str, reply_to: Option<&str>) -> WireMessage {
    WireMessage::StudentUtterance {
        text: text.into(),
        reply_to: reply_to.map(str::to_string),
    }
}

fn alphabet(n: u32) -> Vec<WireMessage> {
    let mut out = vec![
        utter("Hi Rick", None),
        utter("hello there", None),
        utter("ready", Some("greet")),
        utter("yes", Some("slide-0")),
        WireMessage::SessionEnd {},
        WireMessage::QuizResult {
            question_index: 0,
            correct: true,
        },
        WireMessage::TutorReply {
            text: "x".into(),
            gesture_name: None,
            empathy_mode: EmpathyMode::Plain,
            prompt_id: None,
        },
    ];
    out.extend((0..=n + 2).map(|index| WireMessage::SlideAdvance { index }));
    for q in 0..=5u8 {
        for choice in 0..2 {
            out.push(WireMessage::QuizAnswerSubmit {
                question_index: q,
                choice,
            });
        }
    }
    out
}

/// The documented transition table, written out independently of the tutor.
fn table(state: LessonState, msg: &WireMessage, n: u32) -> Option<LessonState> {
    use LessonState::*;
    use WireMessage as M;
    match (state, msg) {
        (_, M::TutorReply { .. } | M::QuizResult { .. }) | (Done, _) => None,
        (Idle, M::StudentUtterance { text, .. }) => Some(if text.to_lowercase().contains(WAKE_PHRASE) {
            Greeting
        } else {
            Idle
        }),
        (Greeting, M::StudentUtterance { reply_to, .. }) => Some(if reply_to.as_deref() == Some("greet") {
            SlideDelivery { slide_index: 0 }
        } else {
            Greeting
        }),
        (SlideDelivery { .. }, M::StudentUtterance { .. }) => Some(state),
        (SlideDelivery { slide_index }, M::SlideAdvance { index }) if *index == slide_index + 1 => {
            Some(if *index < n {
                SlideDelivery { slide_index: *index }
            } else {
                QnA { questions_asked: 0 }
            })
        }
        (QnA { questions_asked }, M::StudentUtterance { reply_to: None, .. }) => Some(QnA {
            questions_asked: questions_asked + 1,
        }),
        (QnA { .. }, M::StudentUtterance { .. }) => Some(state),
        (QnA { .. }, M::SlideAdvance { index }) if *index == n + 1 => Some(Quiz { question_index: 0 }),
        (Quiz { question_index }, M::QuizAnswerSubmit { question_index: q, .. }) if *q == question_index => {
            Some(if q + 1 == 5 {
                Farewell
            } else {
                Quiz { question_index: q + 1 }
            })
        }
        (Quiz { .. } | Farewell, M::StudentUtterance { .. }) => Some(state),
        (Farewell, M::SessionEnd {}) => Some(Done),
        _ => None,
    }
}

fn indices(s: LessonState) -> (u8, u32) {
    match s {
        LessonState::SlideDelivery { slide_index } => (s.phase(), slide_index),
        LessonState::QnA { questions_asked } => (s.phase(), questions_asked),
        LessonState::Quiz { question_index } => (s.phase(), u32::from(question_index)),
        other => (other.phase(), 0),
    }
}

fn model_check(condition: TrialCondition, n: u32) -> usize {
    let tutor = Tutor::new(condition, profile()).with_slide_count(n);
    let messages = alphabet(n);
    let mut seen = HashSet::from([LessonState::Idle]);
    let mut queue = VecDeque::from([(LessonState::Idle, 0usize)]);
    let mut checked = 0;
    while let Some((state, depth)) = queue.pop_front() {
        if depth == MAX_DEPTH {
            continue;
        }
        for msg in &messages {
            checked += 1;
            let expected = table(state, msg, n);
            match (tutor.advance(&state, msg), expected) {
                (Ok((next, out)), Some(want)) => {
                    assert_eq!(next, want, "{state} + {msg:?}");
                    assert!(indices(next) >= indices(state), "{state} -> {next} went backwards");
                    for m in &out {
                        match m {
                            WireMessage::TutorReply {
                                gesture_name,
                                empathy_mode,
                                ..
                            } => {
                                assert_eq!(*empathy_mode, EmpathyMode::from(condition));
                                if !condition.gestures() {
                                    assert!(gesture_name.is_none());
                                }
                            }
                            WireMessage::QuizResult { .. } => {
                                assert!(matches!(msg, WireMessage::QuizAnswerSubmit { .. }))
                            }
                            other => panic!("tutor emitted {other:?}"),
                        }
                    }
                    if seen.insert(next) {
                        queue.push_back((next, depth + 1));
                    }
                }
                (Err(e), None) => {
                    assert_eq!(e.state, state);
                    assert_eq!(e.message_type, msg.kind());
                }
                (got, want) => panic!("{state} + {msg:?}: tutor gave {got:?}, table says {want:?}"),
            }
        }
    }
    assert!(
        seen.contains(&LessonState::Done),
        "Done unreachable within {MAX_DEPTH} steps"
    );
    checked
}

#[test]
fn exhaustive_transition_check() {
    for condition in TrialCondition::ALL {
        for n in [1, 3, 10] {
            assert!(model_check(condition, n) > 0);
        }
    }
}

#[test]
fn wake_phrase_starts_the_lesson() {
    let tutor = Tutor::new(TrialCondition::VerbalOnly, profile());
    let (next, out) = tutor.advance(&LessonState::Idle, &utter("hi rick", None)).unwrap();
    assert_eq!(next, LessonState::Greeting);
    match &out[0] {
        WireMessage::TutorReply { text, .. } => {
            assert!(text.starts_with("Hello. My name is Rick.") && text.contains(INTRODUCTION))
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn last_answer_says_goodbye() {
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
}

#[test]
fn shipped_library_matches_builtin() {
    let builtin = GestureLibrary::builtin();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(
            concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/gesture_library.json"),
            builtin.to_json(),
        )
        .unwrap();
    }
    assert_eq!(GestureLibrary::from_json(SHIPPED_LIBRARY).unwrap(), builtin);
    assert_eq!(builtin.groups.len(), 6);
}

#[test]
fn every_builtin_gesture_returns_home() {
    for group in GestureLibrary::builtin().groups {
        let trace = execute_gesture(&group).unwrap();
        assert_eq!(trace.final_pose, group.home_pose, "{}", group.name);
        let sum: u64 = trace.frames.iter().map(|f| u64::from(f.duration_ms)).sum();
        assert_eq!(trace.total_duration_ms, sum);
    }
    let lib = GestureLibrary::builtin();
    let cheer = lib.get("thumbs-up-cheer").unwrap();
    assert_eq!(
        execute_gesture(cheer).unwrap().total_duration_ms,
        cheer.scripted_duration_ms()
    );
}

fn frame() -> impl Strategy<Value = ServoFrame> {
    (1u8..=10, 0.0f64..=240.0, 1u32..2_000).prop_map(|(s, a, d)| ServoFrame::new(s, a, d))
}

fn message() -> impl Strategy<Value = WireMessage> {
    let text = "[ -~]{0,40}";
    let id = prop::option::of("[a-z0-9-]{1,12}");
    prop_oneof![
        (text, id.clone()).prop_map(|(text, reply_to)| WireMessage::StudentUtterance { text, reply_to }),
        (text, id.clone(), 0usize..4, id).prop_map(|(text, gesture_name, mode, prompt_id)| WireMessage::TutorReply {
            text,
            gesture_name,
            empathy_mode: TrialCondition::ALL.map(EmpathyMode::from)[mode],
            prompt_id,
        }),
        any::<u32>().prop_map(|index| WireMessage::SlideAdvance { index }),
        (any::<u8>(), any::<u8>())
            .prop_map(|(question_index, choice)| WireMessage::QuizAnswerSubmit { question_index, choice }),
        (any::<u8>(), any::<bool>()).prop_map(|(question_index, correct)| WireMessage::QuizResult {
            question_index,
            correct
        }),
        Just(WireMessage::SessionEnd {}),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn protocol_round_trip(session_id in "\\PC{1,20}", seq in any::<u64>(), message in message()) {
        let env = Envelope { session_id, seq, message };
        prop_assert_eq!(decode_message(&encode_message(&env)).unwrap(), env);
    }

    #[test]
    fn executed_gestures_end_at_home(
        frames in prop::collection::vec(frame(), 0..20),
        home in prop::array::uniform10(0.0f64..=240.0),
    ) {
        let group = GestureActionGroup { name: "random".into(), frames, home_pose: home };
        let trace = execute_gesture(&group).unwrap();
        prop_assert_eq!(trace.final_pose, home);
        prop_assert_eq!(trace.total_duration_ms, trace.frames.iter().map(|f| u64::from(f.duration_ms)).sum::<u64>());
        let starts: Vec<u64> = trace.frames.iter().map(|f| f.start_ms).collect();
        prop_assert!(starts.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn sessions_yield_valid_logs() {
    let phases = ["Idle", "Greeting", "SlideDelivery", "QnA", "Quiz", "Farewell", "Done"];
    for condition in TrialCondition::ALL {
        for seed in 0..6 {
            let run = run_session(condition, &profile(), seed).unwrap();
            assert_eq!(validate_log(&run.log), vec![], "{condition} seed {seed}");
            derive_raw_metrics(&run.log, &IngestOptions::default())
                .unwrap()
                .validate()
                .unwrap();

            let mut names: Vec<&str> = run.visited.iter().map(LessonState::name).collect();
            names.dedup();
            assert_eq!(names, phases);

            let mut inbox = Inbox::new(run.log.session_id.clone());
            let mut interest_mentioned = false;
            for entry in &run.transcript {
                inbox.accept(&entry.envelope).unwrap();
                if let WireMessage::TutorReply { text, gesture_name, .. } = &entry.envelope.message {
                    assert!(condition.gestures() || gesture_name.is_none());
                    interest_mentioned |= text.contains("chess");
                }
            }
            assert_eq!(interest_mentioned, condition.memory(), "{condition}");
            assert_eq!(run, run_session(condition, &profile(), seed).unwrap());
        }
    }
}
