use serde::{Deserialize, Serialize};

use crate::ack::ResponseGenerator;
use crate::error::FlowError;
use crate::fsm::Tracker;
use crate::nlu::{Annotation, DialogAct};
use crate::text::{contains_phrase, is_in, normalize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnswerSource {
    Backstory,
    Facts,
    Unanswerable,
    Generated,
    Opinion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionAnswer {
    pub text: String,
    pub source: AnswerSource,
}

const PERSONAL: &[&str] = &["you", "your", "you're", "yours", "yourself"];

/// Backstory, then facts, then an "I don't know" rewrite; open opinion
/// questions get the opinion fallback.
pub fn answer_question(question: &Annotation, tracker: &mut Tracker<'_>) -> Result<QuestionAnswer, FlowError> {
    let content = tracker.content;
    let ack = &content.acknowledger;
    let text = &question.segment.text;
    let user = ack.content_stems(text);
    let tokens = question.segment.tokens();
    let personal = tokens.iter().any(|t| is_in(t, PERSONAL));

    let backstory = content
        .backstory
        .iter()
        .filter(|_| personal)
        .filter_map(|b| {
            let stems = ack.content_stems(&b.question);
            (!stems.is_empty() && stems.is_subset(&user)).then_some((stems.len(), b))
        })
        .max_by_key(|(n, _)| *n);
    if let Some((_, b)) = backstory {
        return Ok(QuestionAnswer { text: b.answer.clone(), source: AnswerSource::Backstory });
    }

    if !personal {
        let fact = content.facts.iter().find(|f| {
            f.keywords.iter().any(|k| {
                let k = normalize(k);
                let kt: Vec<&str> = k.split_whitespace().collect();
                contains_phrase(&tokens, &kt).is_some()
            })
        });
        if let Some(f) = fact {
            return Ok(QuestionAnswer { text: f.fact.clone(), source: AnswerSource::Facts });
        }
    }

    if question.dialog_act == DialogAct::Question {
        let rule = ack.acknowledge_unanswerable_question(text);
        let generated = content.generator.generate(text);
        let chosen = ack.topicality_select(&rule, generated.as_ref(), text);
        let source = match chosen.source {
            crate::ack::ResponseSource::Rule => AnswerSource::Unanswerable,
            crate::ack::ResponseSource::Generated => AnswerSource::Generated,
        };
        return Ok(QuestionAnswer { text: crate::text::terminate(&chosen.text), source });
    }

    let text = tracker.render_plain("question_fallback")?;
    Ok(QuestionAnswer { text, source: AnswerSource::Opinion })
}
