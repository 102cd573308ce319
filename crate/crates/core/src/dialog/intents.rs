use std::fmt;

use serde::{Deserialize, Serialize};

use crate::module::ModuleId;
use crate::nlu::{Annotation, DialogAct, FineGrainIntent};
use crate::text::{contains_phrase, is_in};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntentClass {
    Functional,
    StrongTopic,
    ModerateTopic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "intent", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Intent {
    IncompleteOrHesitant,
    Clarification,
    DeviceRequest { task: String },
    TopicSwitch,
    TopicRequest { topic: ModuleId, keywords: String },
    TopicPreference { topic: ModuleId, polarity: Polarity },
    TopicIntent { candidates: Vec<ModuleId>, keywords: Vec<String> },
}

impl Intent {
    pub fn class(&self) -> IntentClass {
        match self {
            Self::IncompleteOrHesitant | Self::Clarification | Self::DeviceRequest { .. } => IntentClass::Functional,
            Self::TopicSwitch | Self::TopicRequest { .. } => IntentClass::StrongTopic,
            Self::TopicPreference { .. } | Self::TopicIntent { .. } => IntentClass::ModerateTopic,
        }
    }
}

impl fmt::Display for Intent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::IncompleteOrHesitant => f.write_str("Functional.IncompleteOrHesitant"),
            Self::Clarification => f.write_str("Functional.Clarification"),
            Self::DeviceRequest { task } => write!(f, "Functional.DeviceRequest({task})"),
            Self::TopicSwitch => f.write_str("StrongTopic.TopicSwitch"),
            Self::TopicRequest { topic, .. } => write!(f, "StrongTopic.TopicRequest({topic})"),
            Self::TopicPreference { topic, polarity } => {
                let p = match polarity {
                    Polarity::Positive => "positive",
                    Polarity::Negative => "negative",
                };
                write!(f, "ModerateTopic.TopicPreference({topic}, {p})")
            }
            Self::TopicIntent { candidates, .. } => {
                let names: Vec<&str> = candidates.iter().map(ModuleId::as_str).collect();
                write!(f, "ModerateTopic.TopicIntent({})", names.join(", "))
            }
        }
    }
}

/// Conversation facts the classifier needs beyond the annotations.
#[derive(Debug, Clone, Default)]
pub struct IntentContext {
    pub proposed: Option<ModuleId>,
    pub current: Option<ModuleId>,
}

const CLARIFY: &[&[&str]] = &[
    &["what", "did", "you", "say"],
    &["can", "you", "repeat"],
    &["could", "you", "repeat"],
    &["please", "repeat"],
    &["repeat", "that"],
    &["say", "that", "again"],
    &["say", "it", "again"],
    &["come", "again"],
    &["pardon"],
    &["what", "was", "that"],
    &["i", "didn't", "hear", "you"],
    &["i", "didn't", "catch", "that"],
];

const DEVICE: &[(&[&str], &str)] = &[
    (&["volume", "up"], "volume"),
    (&["volume", "down"], "volume"),
    (&["turn", "up", "the", "volume"], "volume"),
    (&["turn", "down", "the", "volume"], "volume"),
    (&["turn", "it", "up"], "volume"),
    (&["turn", "it", "down"], "volume"),
    (&["set", "a", "timer"], "timer"),
    (&["set", "an", "alarm"], "alarm"),
    (&["turn", "on", "the", "lights"], "lights"),
    (&["turn", "off", "the", "lights"], "lights"),
    (&["what's", "the", "weather"], "weather"),
    (&["what", "is", "the", "weather"], "weather"),
    (&["play", "songs", "by"], "play_music"),
    (&["play", "music", "by"], "play_music"),
    (&["play", "some", "music"], "play_music"),
    (&["play", "music"], "play_music"),
    (&["play", "the", "song"], "play_music"),
    (&["add", "to", "my", "shopping", "list"], "shopping_list"),
];

const SWITCH: &[&[&str]] = &[
    &["talk", "about", "something", "else"],
    &["something", "else"],
    &["change", "the", "topic"],
    &["change", "the", "subject"],
    &["different", "topic"],
    &["don't", "want", "to", "talk", "about"],
    &["do", "not", "want", "to", "talk", "about"],
    &["stop", "talking", "about"],
    &["i'm", "bored", "of", "this"],
    &["i'm", "tired", "of", "talking"],
];

const REQUEST: &[&[&str]] = &[
    &["let's", "talk", "about"],
    &["lets", "talk", "about"],
    &["let", "us", "talk", "about"],
    &["can", "we", "talk", "about"],
    &["could", "we", "talk", "about"],
    &["i", "want", "to", "talk", "about"],
    &["i'd", "like", "to", "talk", "about"],
    &["talk", "about"],
    &["let's", "chat", "about"],
    &["tell", "me", "about"],
    &["tell", "me", "the"],
];

fn find_any<'a>(tokens: &[&str], phrases: &'a [&'a [&'a str]]) -> Option<(usize, &'a [&'a str])> {
    phrases
        .iter()
        .filter_map(|p| contains_phrase(tokens, p).map(|i| (i, *p)))
        .min_by_key(|(i, p)| (*i, usize::MAX - p.len()))
}

const TOPICAL_DEVICE_TASKS: &[&str] = &["play_music"];

fn keywords_after(tokens: &[&str], start: usize) -> String {
    tokens[start..]
        .iter()
        .filter(|t| !is_in(t, &["anymore", "please", "now", "instead"]))
        .copied()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Maps annotated segments onto functional, strong and moderate intents.
pub fn classify_intents(annotations: &[Annotation], ctx: &IntentContext) -> Vec<Intent> {
    let mut out: Vec<Intent> = Vec::new();
    let push = |out: &mut Vec<Intent>, i: Intent| {
        if !out.contains(&i) {
            out.push(i);
        }
    };
    let last = annotations.len().saturating_sub(1);
    for (si, a) in annotations.iter().enumerate() {
        let tokens = a.segment.tokens();
        let topics: Vec<ModuleId> = a.topic_candidates.iter().map(|c| c.topic.clone()).collect();
        let triggers: Vec<String> = a.topic_candidates.iter().map(|c| c.trigger_phrase.clone()).collect();

        if si == last && (a.incomplete || a.fine_grain == FineGrainIntent::Hesitant) {
            push(&mut out, Intent::IncompleteOrHesitant);
        }
        if find_any(&tokens, CLARIFY).is_some() {
            push(&mut out, Intent::Clarification);
        }
        let device = DEVICE
            .iter()
            .find(|(p, _)| contains_phrase(&tokens, p).is_some())
            .map(|(p, task)| (contains_phrase(&tokens, p).unwrap_or(0) + p.len(), *task));
        if let Some((end, task)) = device {
            push(&mut out, Intent::DeviceRequest { task: task.to_string() });
            if TOPICAL_DEVICE_TASKS.contains(&task) && !topics.is_empty() {
                let keywords = if end < tokens.len() {
                    vec![keywords_after(&tokens, end)]
                } else {
                    triggers.clone()
                };
                push(&mut out, Intent::TopicIntent { candidates: topics.clone(), keywords });
            }
            continue;
        }

        if a.fine_grain == FineGrainIntent::NegativeFeeling {
            push(
                &mut out,
                Intent::TopicRequest {
                    topic: ModuleId::COMFORT(),
                    keywords: a.segment.text.clone(),
                },
            );
            continue;
        }

        let switch = find_any(&tokens, SWITCH).is_some();
        if switch {
            push(&mut out, Intent::TopicSwitch);
        }
        if let Some((pos, phrase)) = find_any(&tokens, REQUEST) {
            let after = pos + phrase.len();
            if !switch && after < tokens.len() {
                let tail = keywords_after(&tokens, after);
                let requested = a
                    .topic_candidates
                    .iter()
                    .rev()
                    .find(|c| tail.contains(&c.trigger_phrase))
                    .map(|c| c.topic.clone());
                let topic = requested.unwrap_or_else(ModuleId::RETRIEVAL);
                push(&mut out, Intent::TopicRequest { topic, keywords: tail });
                continue;
            }
        }
        if switch {
            continue;
        }

        if let Some(proposed) = &ctx.proposed {
            let mentions = topics.contains(proposed);
            let positive = a.fine_grain.is_positive();
            let negative = a.fine_grain.is_negative() || (mentions && a.sentiment < -0.2);
            if negative {
                push(&mut out, Intent::TopicPreference { topic: proposed.clone(), polarity: Polarity::Negative });
            } else if positive || (mentions && a.dialog_act != DialogAct::Question) {
                push(&mut out, Intent::TopicPreference { topic: proposed.clone(), polarity: Polarity::Positive });
            }
        }
        if !topics.is_empty() {
            let negative_about_topic = a.fine_grain == FineGrainIntent::AnsDislike || a.sentiment < -0.2;
            if !negative_about_topic {
                push(&mut out, Intent::TopicIntent { candidates: topics, keywords: triggers });
            }
        }
    }
    merge_topic_intents(out)
}

/// Folds several TopicIntent entries into one, preserving first-seen order.
fn merge_topic_intents(intents: Vec<Intent>) -> Vec<Intent> {
    let mut merged: Option<(Vec<ModuleId>, Vec<String>)> = None;
    let mut out = Vec::new();
    for i in intents {
        match i {
            Intent::TopicIntent { candidates, keywords } => {
                let (c, k) = merged.get_or_insert_with(|| (Vec::new(), Vec::new()));
                for (t, kw) in candidates.into_iter().zip(keywords.into_iter().chain(std::iter::repeat(String::new()))) {
                    if !c.contains(&t) {
                        c.push(t);
                        k.push(kw);
                    }
                }
            }
            other => out.push(other),
        }
    }
    if let Some((candidates, keywords)) = merged {
        out.push(Intent::TopicIntent { candidates, keywords });
    }
    out
}
