//! Grounding responses: restatements, "I don't know" rewrites, canned acks,
//! and the topicality check over generated text.

mod perspective;
mod question;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use perspective::{capitalize_i, PerspectiveMap};

use crate::nlg::TemplateStore;
use crate::nlu::{complete_ellipsis, FineGrainIntent, Segment};
use crate::text::{is_in, normalize, stem, terminate, FIRST_PERSON, SUBJECTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ResponseSource {
    Rule,
    Generated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorResponse {
    pub text: String,
    pub source: ResponseSource,
}

/// Pluggable response generator; the shipped implementation is canned.
pub trait ResponseGenerator: Send + Sync {
    fn generate(&self, user_text: &str) -> Option<GeneratorResponse>;
}

/// Keyword-to-reply table standing in for a neural generator.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CannedGenerator {
    pub replies: Vec<(String, String)>,
    pub default_reply: Option<String>,
}

impl CannedGenerator {
    pub fn stub() -> Self {
        Self {
            replies: vec![("roblox".into(), "I have heard of it, but I've never played it".into())],
            default_reply: Some("I love movies".into()),
        }
    }
}

impl ResponseGenerator for CannedGenerator {
    fn generate(&self, user_text: &str) -> Option<GeneratorResponse> {
        let norm = normalize(user_text);
        let tokens: Vec<&str> = norm.split_whitespace().collect();
        let text = self
            .replies
            .iter()
            .find(|(k, _)| tokens.contains(&k.as_str()))
            .map(|(_, r)| r.clone())
            .or_else(|| self.default_reply.clone())?;
        Some(GeneratorResponse {
            text,
            source: ResponseSource::Generated,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct Acknowledger {
    pub perspective: PerspectiveMap,
    pub stopwords: HashSet<String>,
    /// Lowercase single-token proper names (catalog entities, people).
    pub proper_names: HashSet<String>,
}

const CLAUSE_BREAKS: &[&str] = &["and", "but", "because", "so"];

fn clauses(tokens: &[&str]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = vec![Vec::new()];
    for &t in tokens {
        if is_in(t, CLAUSE_BREAKS) {
            out.push(Vec::new());
        } else {
            out.last_mut().expect("non-empty").push(t.to_string());
        }
    }
    out.retain(|c| !c.is_empty());
    out
}

impl Acknowledger {
    fn is_proper(&self, token: &str) -> bool {
        self.proper_names.contains(token)
    }

    /// Restates the user's clause from the bot's perspective behind `opener`.
    pub fn acknowledge_statement(
        &self,
        segment: &Segment,
        previous_bot_question: &str,
        opener: &str,
    ) -> String {
        let segment = Segment::new(normalize(&segment.text), segment.index);
        let completed = complete_ellipsis(&segment, previous_bot_question).text;
        let tokens: Vec<&str> = completed.split_whitespace().collect();
        let parts = clauses(&tokens);
        let first_person = parts.iter().find(|c| {
            c.len() >= 2 && is_in(&c[0], FIRST_PERSON) && !is_in(&c[1], SUBJECTS)
        });
        let chosen = first_person.or_else(|| parts.iter().max_by_key(|c| c.len()));
        let Some(clause) = chosen else {
            return "Okay!".to_string();
        };
        let refs: Vec<&str> = clause.iter().map(String::as_str).collect();
        let mut swapped = self.perspective.apply(&refs);
        question::capitalize_names(&mut swapped, &|t| self.is_proper(t));
        let body = capitalize_i(&swapped.join(" "));
        terminate(&format!("{opener} {body}"))
    }

    pub fn acknowledge_unanswerable_question(&self, question: &str) -> String {
        self.unanswerable_with_prefix(question, "I don't know")
    }

    pub fn unanswerable_with_prefix(&self, question: &str, prefix: &str) -> String {
        question::rewrite_unanswerable(question, prefix, &self.perspective, &|t| self.is_proper(t))
    }

    /// Stemmed, case-folded non-stop tokens.
    pub fn content_stems(&self, text: &str) -> HashSet<String> {
        normalize(text)
            .split_whitespace()
            .filter(|t| !self.stopwords.contains(*t))
            .map(stem)
            .collect()
    }

    pub fn topical_overlap(&self, generated: &str, user_segment: &str) -> usize {
        let g = self.content_stems(generated);
        self.content_stems(user_segment).intersection(&g).count()
    }

    /// Generated text wins only when it shares a content token with the user.
    pub fn topicality_select(
        &self,
        rule_text: &str,
        generated: Option<&GeneratorResponse>,
        user_segment: &str,
    ) -> GeneratorResponse {
        match generated {
            Some(g) if !g.text.trim().is_empty() && self.topical_overlap(&g.text, user_segment) > 0 => g.clone(),
            _ => GeneratorResponse {
                text: rule_text.to_string(),
                source: ResponseSource::Rule,
            },
        }
    }
}

/// Template key of the canned ack for a fine-grain intent.
pub fn templated_ack_key(fine_grain: FineGrainIntent) -> String {
    format!("ack_{}", fine_grain.as_str())
}

/// Canned acknowledgment for high-frequency intents, if the table has one.
pub fn templated_ack(fine_grain: FineGrainIntent, templates: &TemplateStore) -> Option<String> {
    let key = templated_ack_key(fine_grain);
    templates.get(&key).ok().map(|t| t.surfaces[0].clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ack() -> Acknowledger {
        Acknowledger {
            stopwords: ["i", "you", "have", "of", "it", "but", "is", "who", "ever", "about", "never", "i've"]
                .into_iter()
                .map(String::from)
                .collect(),
            ..Acknowledger::default()
        }
    }

    #[test]
    fn statement_goldens() {
        let a = ack();
        let hobby = "What do you like to do for fun?";
        assert_eq!(a.acknowledge_statement(&Segment::new("i like to dance", 0), hobby, "Ok,"), "Ok, you like to dance.");
        assert_eq!(a.acknowledge_statement(&Segment::new("dance", 0), hobby, "Ok,"), "Ok, you like to dance.");
        assert_eq!(a.acknowledge_statement(&Segment::new("I like to dance", 0), hobby, "Ok,"), "Ok, you like to dance.");
        assert_eq!(a.acknowledge_statement(&Segment::new("my mom is a teacher", 0), "", "Ok,"), "Ok, your mom is a teacher.");
        assert_eq!(a.acknowledge_statement(&Segment::new("", 0), "", "Ok,"), "Okay!");
    }

    #[test]
    fn picks_first_person_clause() {
        let a = ack();
        let s = Segment::new("the weather was bad so i stayed home all day", 0);
        assert_eq!(a.acknowledge_statement(&s, "", "I see,"), "I see, you stayed home all day.");
    }

    #[test]
    fn topicality() {
        let a = ack();
        let gen = CannedGenerator::stub();
        let roblox = "have you ever heard about roblox";
        let g = gen.generate(roblox).unwrap();
        let chosen = a.topicality_select("rule", Some(&g), roblox);
        assert_eq!(chosen.source, ResponseSource::Generated);
        let maddie = "who is maddie";
        let g = gen.generate(maddie).unwrap();
        assert_eq!(g.text, "I love movies");
        let rule = a.acknowledge_unanswerable_question(maddie);
        let chosen = a.topicality_select(&rule, Some(&g), maddie);
        assert_eq!(chosen.text, "I don't know who Maddie is.");
        assert_eq!(chosen.source, ResponseSource::Rule);
        assert_eq!(a.topicality_select("rule", None, maddie).text, "rule");
    }
}
