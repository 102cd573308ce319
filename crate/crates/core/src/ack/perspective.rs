use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::text::is_in;

/// Speaker/listener token swaps with be-verb agreement fixups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerspectiveMap {
    pub swaps: BTreeMap<String, String>,
    /// Replacement for a swapped "you" found in object position.
    pub object_you: String,
    /// Verb forms rewritten right after a swapped subject, keyed by new subject.
    pub agreement: BTreeMap<String, BTreeMap<String, String>>,
}

const PAIRS: &[(&str, &str)] = &[
    ("i", "you"),
    ("my", "your"),
    ("mine", "yours"),
    ("myself", "yourself"),
    ("i'm", "you're"),
    ("i've", "you've"),
    ("i'd", "you'd"),
    ("i'll", "you'll"),
];

impl Default for PerspectiveMap {
    fn default() -> Self {
        let mut swaps = BTreeMap::new();
        for (a, b) in PAIRS {
            swaps.insert(a.to_string(), b.to_string());
            swaps.insert(b.to_string(), a.to_string());
        }
        swaps.insert("me".into(), "you".into());
        swaps.insert("we".into(), "we".into());
        let agreement = BTreeMap::from([
            (
                "you".to_string(),
                BTreeMap::from([("am".to_string(), "are".to_string()), ("was".to_string(), "were".to_string())]),
            ),
            (
                "i".to_string(),
                BTreeMap::from([("are".to_string(), "am".to_string()), ("were".to_string(), "was".to_string())]),
            ),
        ]);
        Self {
            swaps,
            object_you: "me".into(),
            agreement,
        }
    }
}

/// Tokens after which "you" is still a subject.
const SUBJECT_CONTEXT: &[&str] = &[
    "and", "but", "because", "so", "if", "that", "what", "who", "where", "when", "why", "how",
    "which", "whether", "than", "or", "do", "does", "did", "are", "were", "have", "can",
    "could", "would", "will", "should",
];

impl PerspectiveMap {
    pub fn swap_token(&self, token: &str) -> Option<&str> {
        self.swaps.get(token).map(String::as_str)
    }

    /// Swaps every mapped token of a lowercase token sequence.
    pub fn apply(&self, tokens: &[&str]) -> Vec<String> {
        let mut out: Vec<String> = Vec::with_capacity(tokens.len());
        let mut last_subject: Option<String> = None;
        for (i, &tok) in tokens.iter().enumerate() {
            if let Some(subject) = last_subject.take() {
                if let Some(fix) = self.agreement.get(&subject).and_then(|m| m.get(tok)) {
                    out.push(fix.clone());
                    continue;
                }
            }
            match self.swap_token(tok) {
                Some(swapped) => {
                    let mut swapped = swapped.to_string();
                    if tok == "you" {
                        let prev = i.checked_sub(1).map(|p| tokens[p]);
                        let object = prev.is_some_and(|p| self.swap_token(p).is_none() && !is_in(p, SUBJECT_CONTEXT));
                        if object {
                            swapped = self.object_you.clone();
                        }
                    }
                    if swapped == "i" || swapped == "you" {
                        last_subject = Some(swapped.clone());
                    }
                    out.push(swapped);
                }
                None => out.push(tok.to_string()),
            }
        }
        out
    }

    /// Applies the map to free text and fixes first-person capitalization.
    pub fn apply_text(&self, text: &str) -> String {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        capitalize_i(&self.apply(&tokens).join(" "))
    }
}

/// Uppercases the standalone pronoun "i" and its contractions.
pub fn capitalize_i(text: &str) -> String {
    text.split(' ')
        .map(|t| {
            if t == "i" || t.starts_with("i'") {
                let mut s = String::from("I");
                s.push_str(&t[1..]);
                s
            } else {
                t.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swaps_and_agreement() {
        let p = PerspectiveMap::default();
        assert_eq!(p.apply_text("i like to dance"), "you like to dance");
        assert_eq!(p.apply_text("my mom is a teacher"), "your mom is a teacher");
        assert_eq!(p.apply_text("i am tired"), "you are tired");
        assert_eq!(p.apply_text("i was there"), "you were there");
        assert_eq!(p.apply_text("you are funny"), "I am funny");
        assert_eq!(p.apply_text("i like you"), "you like me");
        assert_eq!(p.apply_text("i'm happy"), "you're happy");
    }

    #[test]
    fn involutive_on_pronouns() {
        let p = PerspectiveMap::default();
        let seq = ["i", "you", "my", "your", "mine", "yours", "myself", "yourself", "i", "i"];
        let once = p.apply(&seq);
        let once_refs: Vec<&str> = once.iter().map(String::as_str).collect();
        assert_eq!(p.apply(&once_refs), seq);
    }
}
