use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsrGate {
    Pass,
    Clarify,
}

/// Confidence equal to the threshold passes.
pub fn check_asr_gate(confidence: f64, threshold: f64) -> AsrGate {
    if confidence < threshold {
        AsrGate::Clarify
    } else {
        AsrGate::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ProfanityScan {
    Clean,
    Flagged { start: usize, end: usize, matched: String },
}

impl ProfanityScan {
    pub fn is_flagged(&self) -> bool {
        matches!(self, Self::Flagged { .. })
    }
}

/// Whole-word, case-insensitive matcher over a profanity lexicon.
#[derive(Debug, Clone)]
pub struct ProfanityFilter {
    pattern: Option<Regex>,
}

impl ProfanityFilter {
    /// Lexicon entries are literal words or phrases.
    pub fn new<S: AsRef<str>>(lexicon: &[S]) -> Result<Self, regex::Error> {
        let mut words: Vec<String> = lexicon
            .iter()
            .map(|w| w.as_ref().trim())
            .filter(|w| !w.is_empty())
            .map(|w| regex::escape(w).replace(r"\ ", r"\s+").replace(' ', r"\s+"))
            .collect();
        if words.is_empty() {
            return Ok(Self { pattern: None });
        }
        words.sort_by_key(|w| std::cmp::Reverse(w.len()));
        let pattern = RegexBuilder::new(&format!(r"\b(?:{})\b", words.join("|")))
            .case_insensitive(true)
            .build()?;
        Ok(Self { pattern: Some(pattern) })
    }

    pub fn scan(&self, text: &str) -> ProfanityScan {
        match self.pattern.as_ref().and_then(|p| p.find(text)) {
            Some(m) => ProfanityScan::Flagged { start: m.start(), end: m.end(), matched: m.as_str().to_string() },
            None => ProfanityScan::Clean,
        }
    }
}

pub fn profanity_scan<S: AsRef<str>>(text: &str, lexicon: &[S]) -> Result<ProfanityScan, regex::Error> {
    Ok(ProfanityFilter::new(lexicon)?.scan(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_boundary() {
        assert_eq!(check_asr_gate(0.0, 0.3), AsrGate::Clarify);
        assert_eq!(check_asr_gate(0.3, 0.3), AsrGate::Pass);
        assert_eq!(check_asr_gate(1.0, 0.3), AsrGate::Pass);
    }

    #[test]
    fn word_boundaries() {
        let f = ProfanityFilter::new(&["ass", "son of a"]).unwrap();
        assert_eq!(f.scan("i love puppies"), ProfanityScan::Clean);
        assert_eq!(f.scan("the grass is green"), ProfanityScan::Clean);
        assert_eq!(
            f.scan("what an ASS"),
            ProfanityScan::Flagged { start: 8, end: 11, matched: "ASS".into() }
        );
        assert!(f.scan("you son  of a gun").is_flagged());
        assert_eq!(ProfanityFilter::new::<&str>(&[]).unwrap().scan("anything"), ProfanityScan::Clean);
    }
}
