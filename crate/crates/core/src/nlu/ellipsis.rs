use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::Segment;
use crate::text::{is_in, normalize, SUBJECTS};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub completed: bool,
}

struct Frame {
    question: Regex,
    answer: &'static str,
    gerund: &'static str,
}

fn frames() -> &'static [Frame] {
    static FRAMES: OnceLock<Vec<Frame>> = OnceLock::new();
    FRAMES.get_or_init(|| {
        let f = |q: &str, answer, gerund| Frame {
            question: Regex::new(q).expect("static regex"),
            answer,
            gerund,
        };
        vec![
            f(r"\bwhat do you (?:like|love|enjoy) to do\b", "i like to {y}", "i like {y}"),
            f(r"\bwhat (?:is|'s|s)? ?your favou?rite ([a-z ]+?)$", "my favorite {x} is {y}", "my favorite {x} is {y}"),
            f(r"\bwhat's your favou?rite ([a-z ]+?)$", "my favorite {x} is {y}", "my favorite {x} is {y}"),
            f(r"\bwho(?: is|'s) your favou?rite ([a-z ]+?)$", "my favorite {x} is {y}", "my favorite {x} is {y}"),
            f(r"\bwhat (?:kind|type|sort) of [a-z]+ do you (?:like|enjoy)\b", "i like {y}", "i like {y}"),
            f(r"\bwhat do you (?:like|love|enjoy)\b", "i like {y}", "i like {y}"),
            f(r"\bwhat (?:have you been|are you) up to\b", "i've been {y}", "i've been {y}"),
            f(r"\bwhat are your plans\b", "i'm planning to {y}", "i'm planning on {y}"),
            f(r"\bwhere (?:would|do) you (?:like|want) to (?:go|travel)\b", "i'd like to go to {y}", "i'd like to go {y}"),
            f(r"\bwhat was the last thing that made you smile\b", "{y} made me smile", "{y} made me smile"),
        ]
    })
}

const NON_ANSWERS: &[&str] = &[
    "yes", "yeah", "yep", "no", "nope", "nah", "nothing", "ok", "okay", "sure", "maybe", "um",
    "uh", "hmm", "not", "i", "idk",
];

/// Splices a subjectless answer into the frame of the bot's question.
pub fn complete_ellipsis(segment: &Segment, previous_bot_question: &str) -> Completion {
    let unchanged = Completion {
        text: segment.text.clone(),
        completed: false,
    };
    let tokens = segment.tokens();
    let Some(first) = tokens.first() else {
        return unchanged;
    };
    if tokens.iter().any(|t| is_in(t, SUBJECTS)) || is_in(first, NON_ANSWERS) {
        return unchanged;
    }
    let question = normalize(previous_bot_question);
    for frame in frames() {
        let Some(caps) = frame.question.captures(&question) else {
            continue;
        };
        let x = caps.get(1).map_or("", |m| m.as_str().trim());
        let template = if first.ends_with("ing") && first.len() > 4 {
            frame.gerund
        } else {
            frame.answer
        };
        return Completion {
            text: template.replace("{x}", x).replace("{y}", &segment.text),
            completed: true,
        };
    }
    unchanged
}
