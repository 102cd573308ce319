//! Topic-module handlers and their pure decision functions.

pub mod fashion;
pub mod food;
pub mod game;
pub mod greeting;
pub mod movie;
pub mod news;
mod question;

use crate::ack::{ResponseGenerator, ResponseSource};
use crate::error::FlowError;
use crate::fsm::{register_builtins, HandlerOutput, HandlerRegistry, StateCtx, Tracker};

pub use question::{answer_question, AnswerSource, QuestionAnswer};

/// Responds to a free-form request the topic modules do not cover.
fn retrieval_respond(_: &StateCtx<'_>, t: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
    let keywords = t
        .keywords
        .clone()
        .or_else(|| t.key_phrases().into_iter().next())
        .unwrap_or_else(|| "that".to_string());
    let rule = t.render_with("retrieval_unknown", &[("keywords", &keywords)])?;
    let generated = t.content.generator.generate(t.utterance);
    let chosen = t.content.acknowledger.topicality_select(&rule, generated.as_ref(), t.utterance);
    let text = match chosen.source {
        ResponseSource::Generated => {
            let follow = t.render_plain("retrieval_follow")?;
            format!("{} {follow}", crate::text::terminate(&chosen.text))
        }
        ResponseSource::Rule => chosen.text,
    };
    Ok(HandlerOutput::say(text).then("next"))
}

/// Builtins plus every native handler the bundled flows use.
pub fn default_registry() -> HandlerRegistry {
    let mut reg = HandlerRegistry::new();
    register_builtins(&mut reg);
    movie::register(&mut reg);
    game::register(&mut reg);
    food::register(&mut reg);
    news::register(&mut reg);
    fashion::register(&mut reg);
    greeting::register(&mut reg);
    reg.register("retrieval.respond", retrieval_respond);
    reg
}
