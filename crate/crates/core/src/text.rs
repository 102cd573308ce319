//! Shared text helpers: normalization, tokenization, suffix stemming and
//! the small closed-class word lists the rule annotators lean on.

/// Lowercases, maps curly apostrophes, drops punctuation other than
/// in-word apostrophes, and collapses whitespace.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last_space = true;
    let chars: Vec<char> = text.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        let c = if c == '\u{2019}' || c == '\u{2018}' { '\'' } else { c };
        if c.is_alphanumeric() {
            out.extend(c.to_lowercase());
            last_space = false;
        } else if c == '\'' {
            let prev = i > 0 && chars[i - 1].is_alphanumeric();
            let next = chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
            if prev && next {
                out.push('\'');
                last_space = false;
            }
        } else if !last_space {
            out.push(' ');
            last_space = true;
        }
    }
    if out.ends_with(' ') {
        out.pop();
    }
    out
}

pub fn tokens(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Suffix-stripping stem (-s, -es, -ed, -ing, then a final -e/-y fold) so
/// that "movies"/"movie" and "dancing"/"dance" land on the same key.
pub fn stem(word: &str) -> String {
    let mut w = word.strip_suffix("'s").unwrap_or(word).to_string();
    let len = |w: &str| w.chars().count();
    if len(&w) > 4 && w.ends_with("ing") {
        w.truncate(w.len() - 3);
    } else if len(&w) > 3 && w.ends_with("ed") {
        w.truncate(w.len() - 2);
    } else if len(&w) > 3 && w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is") {
        w.truncate(w.len() - 1);
    }
    if len(&w) > 3 && w.ends_with('e') {
        w.truncate(w.len() - 1);
    }
    let before_y = w.chars().rev().nth(1).is_some_and(|c| !"aeiou".contains(c));
    if len(&w) > 3 && w.ends_with('y') && before_y {
        w.truncate(w.len() - 1);
        w.push('i');
    }
    w
}

/// Subject-like tokens used by segmentation and clause detection.
pub const SUBJECTS: &[&str] = &[
    "i", "you", "he", "she", "we", "they", "it", "i'm", "you're", "he's", "she's", "we're",
    "they're", "it's", "i've", "you've", "we've", "they've", "i'd", "you'd", "we'd", "they'd",
    "i'll", "you'll", "we'll", "they'll", "my", "your", "his", "her", "our", "their", "there's",
    "that's", "this", "there",
];

pub const FIRST_PERSON: &[&str] = &["i", "i'm", "i've", "i'd", "i'll", "my", "we", "we're", "our"];

pub const WH_WORDS: &[&str] = &["what", "who", "where", "when", "why", "how", "which", "whose", "whom"];

pub const AUXILIARIES: &[&str] = &[
    "do", "does", "did", "is", "are", "was", "were", "am", "can", "could", "would", "will",
    "should", "have", "has", "had", "may", "might", "shall",
];

pub const DETERMINERS: &[&str] = &[
    "the", "a", "an", "my", "your", "his", "her", "our", "their", "this", "these", "those",
    "some", "any", "every", "each", "its",
];

pub const PREPOSITIONS: &[&str] = &[
    "of", "to", "in", "on", "at", "for", "with", "about", "from", "by", "into", "onto", "over",
    "under", "between", "through", "during", "without", "around",
];

pub const NEGATIONS: &[&str] = &[
    "not", "no", "never", "don't", "doesn't", "didn't", "isn't", "wasn't", "aren't", "weren't",
    "can't", "cannot", "won't", "wouldn't", "nothing", "hardly", "neither", "nor", "haven't",
    "hasn't", "shouldn't", "couldn't",
];

pub fn is_in(word: &str, list: &[&str]) -> bool {
    list.contains(&word)
}

/// Uppercases the first character.
pub fn capitalize_first(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Adds a terminal period unless the text already ends in sentence punctuation.
pub fn terminate(s: &str) -> String {
    let trimmed = s.trim_end();
    if trimmed.ends_with(['.', '!', '?']) {
        trimmed.to_string()
    } else {
        format!("{trimmed}.")
    }
}

/// True when the whole-word `phrase` occurs in the token sequence.
pub fn contains_phrase(tokens: &[&str], phrase: &[&str]) -> Option<usize> {
    if phrase.is_empty() || phrase.len() > tokens.len() {
        return None;
    }
    (0..=tokens.len() - phrase.len()).find(|&i| tokens[i..i + phrase.len()] == *phrase)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_strips_punctuation_keeps_apostrophes() {
        assert_eq!(normalize("What is my mother's name?"), "what is my mother's name");
        assert_eq!(normalize("  Hello,   WORLD!! "), "hello world");
        assert_eq!(normalize("'quoted'"), "quoted");
        assert_eq!(normalize("I\u{2019}m here"), "i'm here");
    }

    #[test]
    fn stems() {
        assert_eq!(stem("steaks"), "steak");
        assert_eq!(stem("movies"), stem("movie"));
        assert_eq!(stem("stories"), stem("story"));
        assert_eq!(stem("dancing"), stem("dance"));
        assert_eq!(stem("playing"), "play");
        assert_eq!(stem("played"), "play");
        assert_eq!(stem("dishes"), "dish");
        assert_eq!(stem("class"), "class");
        assert_eq!(stem("virus"), "virus");
        assert_eq!(stem("the"), "the");
    }

    #[test]
    fn phrase_search() {
        let t = tokens("i like the corona virus news");
        assert_eq!(contains_phrase(&t, &["corona", "virus"]), Some(3));
        assert_eq!(contains_phrase(&t, &["virus", "corona"]), None);
    }
}
