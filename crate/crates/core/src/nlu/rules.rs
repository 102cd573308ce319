use super::{DialogAct, FineGrainIntent, Segment};
use crate::text::{contains_phrase, is_in, AUXILIARIES, DETERMINERS, PREPOSITIONS, SUBJECTS, WH_WORDS};

const SPLIT_MARKERS: &[&str] = &["and", "but", "because", "so"];

fn has_subject(tokens: &[&str]) -> bool {
    tokens.iter().any(|t| is_in(t, SUBJECTS))
}

/// Splits on conjunctions and discourse markers when both sides carry a subject.
pub fn segment_utterance(utterance: &str) -> Vec<Segment> {
    let tokens: Vec<&str> = utterance.split_whitespace().collect();
    if tokens.is_empty() {
        return Vec::new();
    }
    let mut pieces: Vec<Vec<&str>> = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for (i, &tok) in tokens.iter().enumerate() {
        if is_in(tok, SPLIT_MARKERS) && !current.is_empty() {
            let right_end = tokens[i + 1..]
                .iter()
                .position(|t| is_in(t, SPLIT_MARKERS))
                .map_or(tokens.len(), |p| i + 1 + p);
            let right = &tokens[i + 1..right_end];
            if !right.is_empty() && has_subject(&current) && has_subject(right) {
                pieces.push(std::mem::take(&mut current));
                continue;
            }
        }
        current.push(tok);
    }
    if !current.is_empty() {
        pieces.push(current);
    }
    pieces
        .into_iter()
        .enumerate()
        .map(|(i, p)| Segment::new(p.join(" "), i))
        .collect()
}

const OPEN_OPINION: &[&[&str]] = &[
    &["what", "do", "you", "think"],
    &["what's", "your", "opinion"],
    &["what", "is", "your", "opinion"],
    &["how", "do", "you", "feel"],
    &["what", "about", "you"],
    &["how", "about", "you"],
    &["what", "would", "you", "do"],
    &["which", "do", "you", "prefer"],
];

const COMMAND_OPENERS: &[&[&str]] = &[
    &["let's"],
    &["lets"],
    &["let", "us"],
    &["tell", "me"],
    &["play"],
    &["talk", "about"],
    &["stop"],
    &["turn"],
    &["please"],
    &["give", "me"],
    &["show", "me"],
    &["volume"],
    &["repeat"],
];

const OPINION_MARKERS: &[&[&str]] = &[
    &["i", "think"],
    &["i", "like"],
    &["i", "love"],
    &["i", "hate"],
    &["i", "enjoy"],
    &["i", "prefer"],
    &["i", "feel"],
    &["i", "believe"],
    &["i", "dislike"],
    &["i", "don't", "like"],
    &["i", "do", "not", "like"],
    &["i", "don't", "think"],
    &["i'm", "a", "fan"],
    &["i'm", "not", "a"],
    &["i'm", "into"],
    &["my", "favorite"],
    &["i", "guess"],
    &["in", "my", "opinion"],
];

const ANSWER_WORDS: &[&str] = &[
    "yes", "yeah", "yep", "yup", "no", "nope", "nah", "ok", "okay", "sure", "maybe", "alright",
    "definitely", "absolutely", "probably", "nothing", "not",
];

const GREETINGS: &[&str] = &["hi", "hello", "hey", "bye", "goodbye", "thanks", "thank"];

fn starts_with_any(tokens: &[&str], phrases: &[&[&str]]) -> bool {
    phrases.iter().any(|p| tokens.starts_with(p))
}

fn contains_any(tokens: &[&str], phrases: &[&[&str]]) -> bool {
    phrases.iter().any(|p| contains_phrase(tokens, p).is_some())
}

pub fn classify_dialog_act(segment: &Segment) -> DialogAct {
    let tokens = segment.tokens();
    let Some(&first) = tokens.first() else {
        return DialogAct::Other;
    };
    if contains_any(&tokens, OPEN_OPINION) {
        return DialogAct::OpenQuestionOpinion;
    }
    if is_in(first, WH_WORDS) || first.starts_with("what's") || first == "who's" || first == "where's" || first == "how's" {
        return DialogAct::Question;
    }
    if is_in(first, AUXILIARIES) && tokens.len() >= 2 {
        return DialogAct::Question;
    }
    if starts_with_any(&tokens, COMMAND_OPENERS) {
        return DialogAct::Command;
    }
    if contains_any(&tokens, OPINION_MARKERS) {
        return DialogAct::Opinion;
    }
    if is_in(first, GREETINGS) {
        return DialogAct::Other;
    }
    if is_in(first, ANSWER_WORDS) || !has_subject(&tokens) {
        return DialogAct::Answer;
    }
    DialogAct::Statement
}

type Table = &'static [(FineGrainIntent, &'static [&'static [&'static str]])];

const FINE_GRAIN: Table = &[
    (
        FineGrainIntent::Hesitant,
        &[&["let", "me", "think"], &["hold", "on"], &["give", "me", "a", "second"], &["i'm", "thinking"]],
    ),
    (
        FineGrainIntent::AnsUnknown,
        &[
            &["i", "don't", "know"],
            &["i", "do", "not", "know"],
            &["not", "sure"],
            &["no", "idea"],
            &["dunno"],
            &["i", "can't", "think"],
            &["i", "don't", "remember"],
        ],
    ),
    (
        FineGrainIntent::NegativeFeeling,
        &[
            &["i'm", "sad"],
            &["i", "am", "sad"],
            &["i", "feel", "sad"],
            &["i'm", "lonely"],
            &["i", "feel", "lonely"],
            &["i'm", "depressed"],
            &["i'm", "stressed"],
            &["i'm", "upset"],
            &["i'm", "anxious"],
            &["i", "feel", "bad"],
            &["i", "feel", "terrible"],
            &["i'm", "not", "feeling", "well"],
            &["i'm", "not", "doing", "well"],
            &["bad", "day"],
            &["i'm", "scared"],
            &["i'm", "worried"],
        ],
    ),
    (
        FineGrainIntent::AnsDislike,
        &[
            &["i", "don't", "like"],
            &["i", "do", "not", "like"],
            &["i", "hate"],
            &["i", "dislike"],
            &["not", "a", "fan"],
            &["not", "a", "big", "fan"],
            &["not", "really", "a", "fan"],
            &["i'm", "not", "into"],
            &["i", "don't", "care", "for"],
            &["i", "don't", "really", "like"],
            &["boring"],
        ],
    ),
    (
        FineGrainIntent::AnsLike,
        &[
            &["i", "like"],
            &["i", "love"],
            &["i", "enjoy"],
            &["i", "really", "like"],
            &["i'm", "a", "fan"],
            &["i'm", "a", "big", "fan"],
            &["i'm", "into"],
            &["my", "favorite"],
            &["love", "it"],
            &["i", "adore"],
        ],
    ),
    (
        FineGrainIntent::AnsInteresting,
        &[&["that's", "interesting"], &["interesting"], &["that's", "cool"], &["that's", "awesome"]],
    ),
];

const NO_OPENERS: &[&[&str]] = &[&["no"], &["nope"], &["nah"], &["not", "really"], &["not", "at", "all"], &["i", "don't"], &["i", "do", "not"]];

const YES_OPENERS: &[&[&str]] = &[
    &["yes"],
    &["yeah"],
    &["yep"],
    &["yup"],
    &["sure"],
    &["ok"],
    &["okay"],
    &["of", "course"],
    &["definitely"],
    &["absolutely"],
    &["why", "not"],
    &["sounds", "good"],
    &["alright"],
    &["let's", "do", "it"],
    &["go", "ahead"],
];

const HESITATION_TOKENS: &[&str] = &["uh", "uhh", "uhhh", "um", "umm", "hmm", "er", "well"];

pub fn classify_fine_grain(segment: &Segment) -> FineGrainIntent {
    let tokens = segment.tokens();
    if tokens.is_empty() {
        return FineGrainIntent::None;
    }
    if tokens.iter().all(|t| is_in(t, HESITATION_TOKENS)) {
        return FineGrainIntent::Hesitant;
    }
    for (intent, phrases) in FINE_GRAIN {
        if contains_any(&tokens, phrases) {
            return *intent;
        }
    }
    if starts_with_any(&tokens, NO_OPENERS) {
        return FineGrainIntent::AnsNo;
    }
    if starts_with_any(&tokens, YES_OPENERS) || matches!(tokens.as_slice(), ["i", "do" | "have" | "did"]) {
        return FineGrainIntent::AnsYes;
    }
    FineGrainIntent::None
}

const HESITANCY_PHRASES: &[&[&str]] = &[
    &["let", "me", "think"],
    &["hold", "on"],
    &["give", "me", "a", "second"],
    &["give", "me", "a", "minute"],
];

const DANGLING: &[&str] = &["it's", "that's", "i'm", "there's", "and", "but", "or", "because", "so", "than"];

const SHORT_ANSWER_OPENERS: &[&str] = &["yes", "yeah", "yep", "no", "nope", "sure"];

/// True when the segment trails off on a function word or is a stalling phrase.
pub fn detect_incomplete(segment: &Segment) -> bool {
    let tokens = segment.tokens();
    let Some(&last) = tokens.last() else {
        return false;
    };
    if contains_any(&tokens, HESITANCY_PHRASES) {
        return true;
    }
    if tokens.iter().all(|t| is_in(t, HESITATION_TOKENS)) {
        return true;
    }
    if is_in(last, DANGLING) || is_in(last, DETERMINERS) {
        return true;
    }
    if is_in(last, PREPOSITIONS) {
        return !is_in(tokens[0], WH_WORDS);
    }
    if is_in(last, AUXILIARIES) {
        let n = tokens.len();
        let after_subject = n >= 2 && is_in(tokens[n - 2], SUBJECTS);
        let short_answer = n == 2 || is_in(tokens[0], SHORT_ANSWER_OPENERS);
        return !(after_subject && short_answer);
    }
    false
}
