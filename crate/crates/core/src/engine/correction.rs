use regex::Regex;

use crate::content::VocabEntry;
use crate::phonetic::PhoneticCode;

const MAX_PASSES: usize = 8;

pub type StopwordFn<'a> = &'a dyn Fn(&str) -> bool;

#[derive(Clone, Copy, PartialEq, Eq)]
enum CodeKind {
    Primary,
    Secondary,
}

fn codes_match(window: &[PhoneticCode], entry: &[PhoneticCode], kind: CodeKind) -> bool {
    window.len() == entry.len()
        && window.iter().zip(entry).all(|(w, e)| match kind {
            CodeKind::Primary => !w.primary.is_empty() && w.primary == e.primary,
            CodeKind::Secondary => !w.secondary.is_empty() && w.secondary == e.secondary,
        })
}

/// Whether a token window may be rewritten into `entry` at all.
fn eligible(window: &[&str], entry: &VocabEntry, is_stop: StopwordFn<'_>) -> bool {
    if window.iter().zip(&entry.tokens).all(|(w, e)| *w == e.as_str()) {
        return false;
    }
    if window.len() == 1 {
        window[0].chars().count() >= 4 && !is_stop(window[0])
    } else {
        window.iter().zip(&entry.tokens).any(|(w, e)| *w == e.as_str())
    }
}

fn phonetic_pass(tokens: &[String], vocabulary: &[&VocabEntry], is_stop: StopwordFn<'_>) -> Option<Vec<String>> {
    let codes: Vec<PhoneticCode> = tokens.iter().map(|t| crate::phonetic::phonetic_encode(t)).collect();
    let longest = vocabulary.iter().map(|v| v.tokens.len()).max().unwrap_or(0);
    for n in (1..=longest.min(tokens.len())).rev() {
        for i in 0..=tokens.len() - n {
            let window: Vec<&str> = tokens[i..i + n].iter().map(String::as_str).collect();
            let candidates: Vec<&&VocabEntry> = vocabulary
                .iter()
                .filter(|v| v.tokens.len() == n && eligible(&window, v, is_stop))
                .collect();
            let hit = [CodeKind::Primary, CodeKind::Secondary]
                .into_iter()
                .find_map(|kind| candidates.iter().find(|v| codes_match(&codes[i..i + n], &v.codes, kind)));
            if let Some(v) = hit {
                let mut out = tokens[..i].to_vec();
                out.extend(v.tokens.iter().cloned());
                out.extend(tokens[i + n..].iter().cloned());
                return Some(out);
            }
        }
    }
    None
}

/// Regex table first, then phonetic substitution against the domain
/// vocabulary, repeated until nothing changes.
pub fn asr_correct_with(
    utterance: &str,
    rules: &[(Regex, String)],
    vocabulary: &[&VocabEntry],
    is_stop: StopwordFn<'_>,
) -> String {
    let mut text = utterance.split_whitespace().collect::<Vec<_>>().join(" ");
    for _ in 0..MAX_PASSES {
        let mut next = text.clone();
        for (re, rep) in rules {
            next = re.replace_all(&next, rep.as_str()).into_owned();
        }
        let tokens: Vec<String> = next.split_whitespace().map(String::from).collect();
        if let Some(t) = phonetic_pass(&tokens, vocabulary, is_stop) {
            next = t.join(" ");
        } else {
            next = tokens.join(" ");
        }
        if next == text {
            break;
        }
        text = next;
    }
    text
}

/// Phonetic correction against a plain phrase list, no regex table.
pub fn asr_correct<S: AsRef<str>>(utterance: &str, domain_vocabulary: &[S]) -> String {
    let entries: Vec<VocabEntry> = domain_vocabulary.iter().map(|p| VocabEntry::new(p.as_ref())).collect();
    let refs: Vec<&VocabEntry> = entries.iter().collect();
    asr_correct_with(utterance, &[], &refs, &|t| DEFAULT_STOPWORDS.contains(&t))
}

pub const DEFAULT_STOPWORDS: &[&str] = &[
    "the", "and", "that", "this", "with", "have", "what", "when", "where", "which", "there", "their", "they",
    "them", "then", "than", "from", "about", "would", "could", "should", "just", "like", "really", "very",
    "your", "yours", "mine", "know", "think", "want", "yeah", "okay", "well", "some", "much", "many", "more",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unchanged_cases() {
        assert_eq!(asr_correct("play friends", &["friends"]), "play friends");
        assert_eq!(asr_correct("play friends", &[] as &[&str]), "play friends");
    }

    #[test]
    fn homophone_title() {
        assert_eq!(asr_correct("i watched the knight before", &["night"]), "i watched the night before");
        assert_eq!(asr_correct("i like frozen to", &["frozen two"]), "i like frozen two");
    }

    #[test]
    fn regex_rules_first() {
        let rules = vec![(Regex::new(r"\bmind craft\b").unwrap(), "minecraft".to_string())];
        assert_eq!(asr_correct_with("i play mind craft", &rules, &[], &|_| false), "i play minecraft");
    }
}
