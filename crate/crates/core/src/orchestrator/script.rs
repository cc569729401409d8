//! Fixed lesson content and the table-driven reply policy's phrasing.

use crate::ingest::StudentProfile;

pub const WAKE_PHRASE: &str = "hi rick";

pub const INTRODUCTION: &str = "Hello. My name is Rick. Today we will go through a series of slides on \
the Apology of Socrates, and afterwards there is a short test with 5 questions on the screen. Thank you \
for making time to learn with me. Tell me to start when you are ready.";

pub const SLIDE_TOPICS: [&str; 10] = [
    "Athens in 399 BC and the democratic courts",
    "Who Socrates was and how he taught",
    "The charges: impiety and corrupting the youth",
    "Meletus, Anytus and Lycon, the accusers",
    "The oracle at Delphi and Socratic wisdom",
    "Socrates questions Meletus in court",
    "The gadfly of Athens",
    "The jury's verdict and the death sentence",
    "Socrates proposes his own penalty",
    "Last words to the jury and what the trial teaches",
];

/// Slide whose narration the tutor delivers with a sad gesture.
pub const VERDICT_SLIDE: u32 = 7;

pub struct QuizQuestion {
    pub text: &'static str,
    pub choices: [&'static str; 4],
    pub answer: u8,
}

pub const QUIZ: [QuizQuestion; 5] = [
    QuizQuestion {
        text: "What were the charges brought against Socrates?",
        choices: [
            "Theft and fraud",
            "Impiety and corrupting the youth",
            "Treason against Sparta",
            "Failing to pay taxes",
        ],
        answer: 1,
    },
    QuizQuestion {
        text: "Who was the principal accuser who questioned Socrates in court?",
        choices: ["Plato", "Crito", "Meletus", "Pericles"],
        answer: 2,
    },
    QuizQuestion {
        text: "What did the oracle at Delphi declare?",
        choices: [
            "Athens would fall",
            "No one was wiser than Socrates",
            "Socrates should leave Athens",
            "The jury would acquit him",
        ],
        answer: 1,
    },
    QuizQuestion {
        text: "To what animal did Socrates compare himself?",
        choices: ["An owl", "A gadfly", "A lion", "A serpent"],
        answer: 1,
    },
    QuizQuestion {
        text: "What sentence did the jury finally impose?",
        choices: ["Exile", "A fine", "Death", "Imprisonment"],
        answer: 2,
    },
];

pub fn slide_topic(index: u32) -> String {
    SLIDE_TOPICS
        .get(index as usize)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("Review part {}", index + 1))
}

/// A preference the memory-enabled tutor can bring up, if the profile has one.
pub fn remembered_interest(profile: &StudentProfile) -> Option<&str> {
    profile
        .preferences
        .get("interest")
        .or_else(|| profile.preferences.values().next())
        .map(String::as_str)
}

/// Number of whitespace-separated words, used to size speech on the virtual clock.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}
