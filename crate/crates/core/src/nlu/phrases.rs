use std::collections::HashMap;

use super::{NluResources, Segment};
use crate::text::{is_in, stem, DETERMINERS, NEGATIONS, SUBJECTS};

/// Tokens after which "like" is a verb rather than a filler.
const LIKE_VERB_CONTEXT: &[&str] = &[
    "i", "you", "we", "they", "to", "don't", "do", "does", "didn't", "doesn't", "really",
    "also", "just", "would", "not", "i'd", "you'd", "we'd", "still", "totally", "kinda",
    "definitely", "who", "people", "kids", "and", "actually", "might", "will", "she", "he",
    "dogs", "cats", "should", "could", "i'll", "what", "that",
];

fn is_filler_at(tokens: &[&str], i: usize, filler: &[String]) -> bool {
    if i + filler.len() > tokens.len() {
        return false;
    }
    if !filler.iter().zip(&tokens[i..]).all(|(f, t)| f == t) {
        return false;
    }
    if filler.len() == 1 && filler[0] == "like" {
        return !(i > 0 && is_in(tokens[i - 1], LIKE_VERB_CONTEXT));
    }
    true
}

/// Drops filler tokens; "like" only in non-verb position.
pub fn strip_fillers<'a>(tokens: &[&'a str], res: &NluResources) -> Vec<&'a str> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    'outer: while i < tokens.len() {
        for filler in &res.fillers {
            if is_filler_at(tokens, i, filler) {
                i += filler.len();
                continue 'outer;
            }
        }
        out.push(tokens[i]);
        i += 1;
    }
    out
}

const VERB_STEMS: &[&str] = &[
    "be", "have", "do", "say", "go", "get", "make", "know", "think", "take", "see", "come",
    "want", "look", "use", "find", "give", "tell", "work", "call", "try", "ask", "need",
    "feel", "becom", "leav", "put", "mean", "keep", "let", "begin", "seem", "help", "talk",
    "turn", "start", "show", "hear", "heard", "play", "run", "move", "like", "live", "believ",
    "hold", "bring", "happen", "writ", "sit", "stand", "lose", "pay", "meet", "includ",
    "continu", "set", "learn", "chang", "lead", "understand", "watch", "follow", "stop",
    "creat", "speak", "read", "spend", "grow", "open", "walk", "win", "offer", "remember",
    "love", "consid", "appear", "buy", "wait", "serv", "die", "send", "expect", "build",
    "stay", "fall", "cut", "reach", "kill", "remain", "murder", "eat", "hate", "enjoy",
    "prefer", "listen", "went", "saw", "did", "does", "done", "made", "got", "said", "thought",
    "took", "came", "knew", "told", "felt", "kept", "left", "ate", "won", "bought", "wrote",
    "guess", "hope", "wish", "sound", "mak", "tak", "giv", "hav", "com", "goe", "lik",
];

const ADVERBS: &[&str] = &[
    "really", "very", "so", "too", "also", "just", "always", "never", "sometimes", "often",
    "actually", "pretty", "quite", "much", "more", "most", "well", "still", "even", "ever",
    "again", "already", "yet", "maybe", "probably", "definitely", "totally", "kinda", "sorta",
    "not", "yes", "no", "yeah", "okay", "ok", "sure", "now", "then", "here", "there", "today",
    "anymore", "lot", "lots",
];

const GENERIC_NOUNS: &[&str] = &[
    "year", "years", "time", "times", "thing", "things", "way", "day", "days", "kind", "sort",
    "bit", "stuff", "something", "anything", "nothing", "everything", "one", "ones", "someone",
    "anyone", "everyone", "somebody", "anybody", "fun",
];

fn is_content(token: &str, res: &NluResources) -> bool {
    if res.is_stopword(token)
        || is_in(token, SUBJECTS)
        || is_in(token, DETERMINERS)
        || is_in(token, NEGATIONS)
        || is_in(token, ADVERBS)
        || is_in(token, GENERIC_NOUNS)
        || token.contains('\'')
    {
        return false;
    }
    if token.ends_with("ly") && token.len() > 4 {
        return false;
    }
    let s = stem(token);
    if is_in(&s, VERB_STEMS) || is_in(token, VERB_STEMS) {
        return false;
    }
    !(token.ends_with("ed") && token.len() > 4)
}

/// Catalog entities first (longest match), then maximal runs of content tokens.
pub fn extract_key_phrases(segment: &Segment, res: &NluResources) -> Vec<String> {
    let raw = segment.tokens();
    let tokens = strip_fillers(&raw, res);
    let mut taken = vec![false; tokens.len()];
    let mut spans: Vec<(usize, String)> = Vec::new();
    for entity in &res.entities {
        let n = entity.len();
        if n > tokens.len() {
            continue;
        }
        for i in 0..=tokens.len() - n {
            if taken[i..i + n].iter().any(|&t| t) {
                continue;
            }
            if entity.iter().zip(&tokens[i..i + n]).all(|(e, t)| e == t) {
                taken[i..i + n].iter_mut().for_each(|t| *t = true);
                spans.push((i, entity.join(" ")));
            }
        }
    }
    let mut i = 0;
    while i < tokens.len() {
        if taken[i] || !is_content(tokens[i], res) {
            i += 1;
            continue;
        }
        let start = i;
        while i < tokens.len() && !taken[i] && is_content(tokens[i], res) {
            i += 1;
        }
        spans.push((start, tokens[start..i].join(" ")));
    }
    spans.sort_by_key(|(pos, _)| *pos);
    let mut out: Vec<String> = Vec::new();
    for (_, phrase) in spans {
        if !out.contains(&phrase) {
            out.push(phrase);
        }
    }
    out
}

/// Mean polarity of lexicon hits, flipped by a negation up to three tokens back.
pub fn sentiment_score(segment: &Segment, lexicon: &HashMap<String, f64>) -> f64 {
    let tokens = segment.tokens();
    let mut total = 0.0;
    let mut hits = 0usize;
    for (i, tok) in tokens.iter().enumerate() {
        let polarity = lexicon
            .get(*tok)
            .or_else(|| lexicon.get(&stem(tok)))
            .copied();
        let Some(mut p) = polarity else { continue };
        let window = &tokens[i.saturating_sub(3)..i];
        if window.iter().any(|t| is_in(t, NEGATIONS)) {
            p = -p;
        }
        total += p;
        hits += 1;
    }
    if hits == 0 {
        0.0
    } else {
        (total / hits as f64).clamp(-1.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res() -> NluResources {
        let mut r = NluResources::default();
        r.set_stopwords(["what", "was", "the", "of", "a", "is", "with", "her", "to", "me"]);
        r.add_entities(["wings of fire"]);
        r.set_sentiment([("love".to_string(), 1.0), ("hate".to_string(), -1.0)]);
        r
    }

    fn kp(s: &str) -> Vec<String> {
        extract_key_phrases(&Segment::new(s, 0), &res())
    }

    #[test]
    fn key_phrases_match_examples() {
        assert_eq!(kp("what year was uhhh julius caesar murdered"), ["julius caesar"]);
        assert_eq!(kp("tell her wings of fire"), ["wings of fire"]);
        assert!(kp("").is_empty());
        assert_eq!(kp("i talked to my mom"), ["mom"]);
    }

    #[test]
    fn like_is_only_a_filler_outside_verb_position() {
        let r = res();
        assert_eq!(strip_fillers(&["it", "was", "like", "great"], &r), ["it", "was", "great"]);
        assert_eq!(strip_fillers(&["i", "like", "dogs"], &r), ["i", "like", "dogs"]);
        assert_eq!(strip_fillers(&["you", "know", "dogs"], &r), ["dogs"]);
    }

    #[test]
    fn sentiment_examples() {
        let r = res();
        let s = |t: &str| sentiment_score(&Segment::new(t, 0), &r.sentiment);
        assert_eq!(s("i love this"), 1.0);
        assert_eq!(s("i don't love this"), -1.0);
        assert_eq!(s("the table is brown"), 0.0);
        assert_eq!(s("i love and hate it"), 0.0);
        assert_eq!(s("not that i really love it"), 1.0);
    }
}
