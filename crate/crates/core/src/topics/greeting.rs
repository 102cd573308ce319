use crate::error::FlowError;
use crate::fsm::{ask_open_question, HandlerOutput, HandlerRegistry, StateCtx, Tracker};
use crate::adaptation::{predict_gender, OpenQuestionCategory};
use crate::text::{capitalize_first, is_in, AUXILIARIES, DETERMINERS, NEGATIONS, SUBJECTS};

const CUES: &[&[&str]] = &[
    &["my", "name", "is"],
    &["my", "name's"],
    &["name", "is"],
    &["call", "me"],
    &["i", "am"],
    &["i'm"],
    &["it's"],
    &["it", "is"],
    &["this", "is"],
];

const NOT_NAMES: &[&str] = &[
    "yes", "no", "yeah", "nope", "hi", "hello", "hey", "ok", "okay", "sure", "not", "good", "fine", "great",
    "doing", "well", "here", "just", "really", "so", "very", "tired", "happy", "sad", "bored", "sorry",
];

/// Name from an introduction ("my name is sam", "i'm sam", or a bare "sam").
pub fn extract_name(utterance: &str) -> Option<String> {
    let tokens: Vec<&str> = utterance.split_whitespace().collect();
    if tokens.iter().any(|t| is_in(t, NEGATIONS)) {
        return None;
    }
    let candidate = CUES
        .iter()
        .find_map(|cue| crate::text::contains_phrase(&tokens, cue).map(|i| i + cue.len()))
        .and_then(|i| tokens.get(i).copied())
        .or_else(|| (tokens.len() == 1).then(|| tokens[0]));
    let name = candidate?;
    let bad = is_in(name, NOT_NAMES)
        || is_in(name, SUBJECTS)
        || is_in(name, DETERMINERS)
        || is_in(name, AUXILIARIES)
        || !name.chars().all(|c| c.is_alphabetic() || c == '-');
    (!bad).then(|| capitalize_first(name))
}

fn start(_: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    match t.profile.name.clone().filter(|_| t.profile.returning) {
        Some(name) => {
            let text = t.render_with("greet_returning", &[("name", &name)])?;
            Ok(HandlerOutput::say(text).then("confirm"))
        }
        None => {
            let text = t.render_plain("greet_new")?;
            Ok(HandlerOutput::say(text).then("ask_name"))
        }
    }
}

fn name(_: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let text = match extract_name(t.utterance) {
        Some(n) => {
            let gender = predict_gender(&n, &t.content.names, t.content.settings.gender_share);
            t.updates.name = Some(n.clone());
            t.updates.gender = Some(gender);
            t.render_with("greet_name_ack", &[("name", &n)])?
        }
        None => t.render_plain("greet_no_name")?,
    };
    Ok(HandlerOutput::say(text).then("next"))
}

/// Welcome-back line followed by the recent-events question.
fn returning_open(_: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let name = t.user_name().unwrap_or_default();
    let welcome = t.render_with("greet_welcome_back", &[("name", &name)])?;
    let q = t.render_plain("open_returning")?;
    t.updates.asked_open.push(OpenQuestionCategory::PastEvent);
    t.attrs.pending_open_question = true;
    t.stop();
    Ok(HandlerOutput::say(format!("{welcome} {q}")))
}

fn open(_: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let q = ask_open_question(t)?;
    t.stop();
    Ok(HandlerOutput::say(q))
}

pub fn register(reg: &mut HandlerRegistry) {
    reg.register("greeting.start", start);
    reg.register("greeting.name", name);
    reg.register("greeting.returning_open", returning_open);
    reg.register("greeting.open", open);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names() {
        assert_eq!(extract_name("my name is sarah"), Some("Sarah".into()));
        assert_eq!(extract_name("i'm john"), Some("John".into()));
        assert_eq!(extract_name("emma"), Some("Emma".into()));
        assert_eq!(extract_name("call me mike please"), Some("Mike".into()));
        assert_eq!(extract_name("i don't want to tell you"), None);
        assert_eq!(extract_name("yes"), None);
        assert_eq!(extract_name("i'm not telling"), None);
    }
}
