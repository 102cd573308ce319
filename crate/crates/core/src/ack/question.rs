use super::perspective::{capitalize_i, PerspectiveMap};
use crate::text::{is_in, normalize, AUXILIARIES, DETERMINERS, SUBJECTS, WH_WORDS};

const PARTICIPLE_CUES: &[&str] = &[
    "ever", "never", "been", "already", "just", "seen", "heard", "done", "had", "gone", "read",
    "watched", "played", "tried", "met", "eaten", "got", "gotten",
];

const IRREGULAR_PAST: &[(&str, &str)] = &[
    ("eat", "ate"),
    ("say", "said"),
    ("do", "did"),
    ("see", "saw"),
    ("go", "went"),
    ("have", "had"),
    ("make", "made"),
    ("get", "got"),
    ("think", "thought"),
    ("buy", "bought"),
    ("read", "read"),
    ("meet", "met"),
    ("win", "won"),
    ("write", "wrote"),
    ("take", "took"),
    ("come", "came"),
    ("know", "knew"),
    ("tell", "told"),
    ("feel", "felt"),
    ("find", "found"),
    ("give", "gave"),
];

fn past(verb: &str) -> String {
    if let Some((_, p)) = IRREGULAR_PAST.iter().find(|(v, _)| *v == verb) {
        return p.to_string();
    }
    if verb.ends_with('e') {
        format!("{verb}d")
    } else {
        format!("{verb}ed")
    }
}

fn third_person(verb: &str) -> String {
    match verb {
        "have" => "has".into(),
        "do" => "does".into(),
        "go" => "goes".into(),
        _ if verb.ends_with(['s', 'x', 'z']) || verb.ends_with("ch") || verb.ends_with("sh") => format!("{verb}es"),
        _ => format!("{verb}s"),
    }
}

fn looks_verbal(token: &str) -> bool {
    token.ends_with("ed") || token.ends_with("ing") || is_in(token, PARTICIPLE_CUES)
}

/// Length of the subject noun phrase at the start of `rest`.
fn subject_len(rest: &[&str]) -> usize {
    match rest.first() {
        None => 0,
        Some(t) if is_in(t, SUBJECTS) && !is_in(t, DETERMINERS) => 1,
        Some(_) => {
            let mut n = 1;
            while n < rest.len() && !looks_verbal(rest[n]) && !is_in(rest[n], crate::text::PREPOSITIONS) {
                n += 1;
            }
            n
        }
    }
}

/// Turns a direct question into the matching declarative/embedded clause.
fn embed(tokens: &[&str]) -> (Vec<String>, bool) {
    let is_wh = tokens.first().is_some_and(|t| is_in(t, WH_WORDS));
    let (head, rest): (Vec<&str>, &[&str]) = if is_wh {
        // wh-word plus an optional noun ("what year", "which movie", "how many")
        let mut h = 1;
        if tokens.len() > 2 && !is_in(tokens[1], AUXILIARIES) && is_in(tokens[2], AUXILIARIES) {
            h = 2;
        }
        (tokens[..h].to_vec(), &tokens[h..])
    } else {
        (Vec::new(), tokens)
    };
    let Some((&aux, after)) = rest.split_first() else {
        return (head.iter().map(|s| s.to_string()).collect(), is_wh);
    };
    if !is_in(aux, AUXILIARIES) {
        let mut out: Vec<String> = head.iter().map(|s| s.to_string()).collect();
        out.extend(rest.iter().map(|s| s.to_string()));
        return (out, is_wh);
    }
    let mut n = subject_len(after);
    if matches!(aux, "do" | "does" | "did") && n == after.len() && n > 1 {
        n -= 1;
    }
    let (subject, tail) = after.split_at(n);
    let mut out: Vec<String> = head.iter().map(|s| s.to_string()).collect();
    out.extend(subject.iter().map(|s| s.to_string()));
    match aux {
        "do" | "does" | "did" if !tail.is_empty() => {
            let verb = tail[0];
            let third = subject.len() != 1 || !is_in(subject[0], &["i", "you", "we", "they"]);
            out.push(match aux {
                "did" => past(verb),
                "does" if third => third_person(verb),
                _ => verb.to_string(),
            });
            out.extend(tail[1..].iter().map(|s| s.to_string()));
        }
        _ => {
            out.push(aux.to_string());
            out.extend(tail.iter().map(|s| s.to_string()));
        }
    }
    (out, is_wh)
}

fn contract_have(tokens: &mut Vec<String>) {
    let mut i = 0;
    while i + 1 < tokens.len() {
        let next_ok = tokens
            .get(i + 2)
            .is_some_and(|n| is_in(n, PARTICIPLE_CUES) || n.ends_with("ed"));
        if matches!(tokens[i].as_str(), "i" | "you" | "we" | "they") && tokens[i + 1] == "have" && next_ok {
            let merged = format!("{}'ve", tokens[i]);
            tokens.splice(i..i + 2, [merged]);
        }
        i += 1;
    }
}

/// Capitalizes the name that follows a naming cue, and any known proper name.
pub(crate) fn capitalize_names(tokens: &mut [String], proper: &dyn Fn(&str) -> bool) {
    const CUES: &[&[&str]] = &[&["who", "is"], &["who"], &["about"], &["of"], &["named"], &["called"]];
    let n = tokens.len();
    for i in 0..n {
        if proper(&tokens[i]) {
            tokens[i] = crate::text::capitalize_first(&tokens[i]);
        }
    }
    for cue in CUES {
        for i in 0..n {
            if i + cue.len() >= n {
                continue;
            }
            if !cue.iter().zip(&tokens[i..]).all(|(c, t)| c == t) {
                continue;
            }
            let j = i + cue.len();
            let t = &tokens[j];
            let lower = t.to_lowercase();
            let function_word = is_in(&lower, SUBJECTS)
                || is_in(&lower, DETERMINERS)
                || is_in(&lower, AUXILIARIES)
                || is_in(&lower, WH_WORDS)
                || lower == "it"
                || lower == "me"
                || lower.starts_with("i'")
                || lower == "i";
            let cued_name = j + 1 == n || (j + 2 == n && is_in(&tokens[j + 1], &["is", "was"]));
            if !function_word && cued_name {
                tokens[j] = crate::text::capitalize_first(t);
            }
        }
    }
}

/// "I don't know" rewrite of a question the system cannot answer.
pub fn rewrite_unanswerable(
    question: &str,
    prefix: &str,
    perspective: &PerspectiveMap,
    proper: &dyn Fn(&str) -> bool,
) -> String {
    let normalized = normalize(question);
    let tokens: Vec<&str> = normalized.split_whitespace().collect();
    if tokens.is_empty() {
        return format!("{prefix}.");
    }
    let (embedded, is_wh) = embed(&tokens);
    let refs: Vec<&str> = embedded.iter().map(String::as_str).collect();
    let mut swapped = perspective.apply(&refs);
    contract_have(&mut swapped);
    capitalize_names(&mut swapped, proper);
    let clause = capitalize_i(&swapped.join(" "));
    let joiner = if is_wh { " " } else { " if " };
    format!("{prefix}{joiner}{clause}.")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(q: &str) -> String {
        rewrite_unanswerable(q, "I don't know", &PerspectiveMap::default(), &|_| false)
    }

    #[test]
    fn goldens() {
        assert_eq!(r("What is my mother's name?"), "I don't know what your mother's name is.");
        assert_eq!(r("have you ever heard about roblox"), "I don't know if I've ever heard about Roblox.");
        assert_eq!(r("who is maddie"), "I don't know who Maddie is.");
    }

    #[test]
    fn reorders_auxiliaries() {
        assert_eq!(r("what year was julius caesar murdered"), "I don't know what year julius caesar was murdered.");
        assert_eq!(r("where are you going"), "I don't know where I am going.");
        assert_eq!(r("what does my dog eat"), "I don't know what your dog eats.");
        assert_eq!(r("what did you eat"), "I don't know what I ate.");
        assert_eq!(r("who won the game"), "I don't know who won the game.");
        assert_eq!(r("is it raining"), "I don't know if it is raining.");
    }
}
