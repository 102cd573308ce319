//! User profile and adaptation policies.

mod names;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use names::NameDb;

use crate::module::ModuleId;
use crate::nlu::DialogAct;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Gender {
    Male,
    Female,
    #[default]
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OpenQuestionCategory {
    AskHobby,
    PastEvent,
    FutureEvent,
}

impl OpenQuestionCategory {
    pub const ORDER: [Self; 3] = [Self::AskHobby, Self::PastEvent, Self::FutureEvent];

    /// Template key of the category's question bank.
    pub fn template_key(self) -> &'static str {
        match self {
            Self::AskHobby => "open_ask_hobby",
            Self::PastEvent => "open_past_event",
            Self::FutureEvent => "open_future_event",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    pub name: Option<String>,
    pub predicted_gender: Gender,
    pub preferred_topics: Vec<ModuleId>,
    pub used_topics: BTreeSet<ModuleId>,
    pub dominant_turns: u64,
    pub total_turns: u64,
    pub returning: bool,
    /// Asked categories, least recently asked first.
    pub asked_open_questions: Vec<OpenQuestionCategory>,
}

impl UserProfile {
    pub fn new(user_id: impl Into<String>) -> Self {
        Self {
            user_id: user_id.into(),
            name: None,
            predicted_gender: Gender::Unknown,
            preferred_topics: Vec::new(),
            used_topics: BTreeSet::new(),
            dominant_turns: 0,
            total_turns: 0,
            returning: false,
            asked_open_questions: Vec::new(),
        }
    }

    pub fn dominance_ratio(&self) -> Option<f64> {
        (self.total_turns > 0).then(|| self.dominant_turns as f64 / self.total_turns as f64)
    }

    pub fn mark_used(&mut self, topic: &ModuleId) {
        self.used_topics.insert(topic.clone());
    }

    pub fn add_preferred(&mut self, topic: &ModuleId) {
        if !self.preferred_topics.contains(topic) {
            self.preferred_topics.push(topic.clone());
        }
    }

    pub fn mark_asked(&mut self, category: OpenQuestionCategory) {
        self.asked_open_questions.retain(|c| *c != category);
        self.asked_open_questions.push(category);
    }

    pub fn unused_preferred(&self) -> impl Iterator<Item = &ModuleId> {
        self.preferred_topics
            .iter()
            .filter(|t| !self.used_topics.contains(*t))
    }
}

pub const DOMINANT_ACTS: [DialogAct; 4] = [
    DialogAct::Question,
    DialogAct::Command,
    DialogAct::Opinion,
    DialogAct::Statement,
];

pub fn update_dominance(profile: &mut UserProfile, acts: &[DialogAct]) {
    profile.total_turns += 1;
    if acts.iter().any(|a| DOMINANT_ACTS.contains(a)) {
        profile.dominant_turns += 1;
    }
}

pub fn is_dominant(profile: &UserProfile, threshold: f64) -> bool {
    profile.dominance_ratio().is_some_and(|r| r > threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TransitionStrategy {
    OpenQuestion,
    DirectProposal,
}

pub fn transition_strategy(profile: &UserProfile, threshold: f64) -> TransitionStrategy {
    if is_dominant(profile, threshold) && profile.unused_preferred().next().is_none() {
        TransitionStrategy::OpenQuestion
    } else {
        TransitionStrategy::DirectProposal
    }
}

/// First never-asked category in fixed order, else the least recently asked.
pub fn next_open_question_category(profile: &UserProfile) -> OpenQuestionCategory {
    OpenQuestionCategory::ORDER
        .into_iter()
        .find(|c| !profile.asked_open_questions.contains(c))
        .unwrap_or_else(|| profile.asked_open_questions[0])
}

/// Saves detected topics as preferences and returns the routing target.
pub fn record_open_answer(candidates: &[ModuleId], profile: &mut UserProfile) -> Option<ModuleId> {
    for c in candidates {
        profile.add_preferred(c);
    }
    candidates.first().cloned()
}

pub fn predict_gender(name: &str, db: &NameDb, share: f64) -> Gender {
    db.predict(name, share)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicOrderTable {
    pub male: Vec<ModuleId>,
    pub female: Vec<ModuleId>,
    pub unknown: Vec<ModuleId>,
}

impl TopicOrderTable {
    pub fn for_gender(&self, gender: Gender) -> &[ModuleId] {
        match gender {
            Gender::Male => &self.male,
            Gender::Female => &self.female,
            Gender::Unknown => &self.unknown,
        }
    }

    /// The proposable topic set (taken from the unknown-gender list).
    pub fn proposable(&self) -> BTreeSet<ModuleId> {
        self.unknown.iter().cloned().collect()
    }

    /// Each list must be a permutation of the same registered topic set.
    pub fn validate(&self, registered: &BTreeSet<ModuleId>) -> Vec<String> {
        let mut errors = Vec::new();
        let base = self.proposable();
        for (label, list) in [("male", &self.male), ("female", &self.female), ("unknown", &self.unknown)] {
            let set: BTreeSet<ModuleId> = list.iter().cloned().collect();
            if set.len() != list.len() {
                errors.push(format!("{label} order repeats a topic"));
            }
            if set != base {
                errors.push(format!("{label} order is not a permutation of the proposable topics"));
            }
            for t in list {
                if !registered.contains(t) {
                    errors.push(format!("{label} order names unregistered topic {t}"));
                }
            }
        }
        errors
    }
}

/// Outcome of a next-topic choice, reporting whether `used_topics` was reset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NextTopic {
    pub topic: ModuleId,
    pub reset: bool,
}

/// Preferred first, then the personal order; resets once everything is used.
pub fn select_next_topic(profile: &mut UserProfile, table: &TopicOrderTable) -> NextTopic {
    if let Some(t) = profile.unused_preferred().next() {
        return NextTopic {
            topic: t.clone(),
            reset: false,
        };
    }
    let personal = table.for_gender(profile.predicted_gender);
    if let Some(t) = personal.iter().find(|t| !profile.used_topics.contains(*t)) {
        return NextTopic {
            topic: t.clone(),
            reset: false,
        };
    }
    profile.used_topics.clear();
    let topic = personal.first().cloned().expect("topic order table is non-empty");
    NextTopic { topic, reset: true }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(s: &[&str]) -> Vec<ModuleId> {
        s.iter().map(|s| ModuleId::new(*s)).collect()
    }

    fn table() -> TopicOrderTable {
        TopicOrderTable {
            male: ids(&["GAME", "MOVIE", "ANIMAL"]),
            female: ids(&["ANIMAL", "MOVIE", "GAME"]),
            unknown: ids(&["ANIMAL", "GAME", "MOVIE"]),
        }
    }

    #[test]
    fn dominance() {
        let mut p = UserProfile::new("u");
        assert!(!is_dominant(&p, 0.5));
        update_dominance(&mut p, &[DialogAct::Answer]);
        assert_eq!(p.dominant_turns, 0);
        update_dominance(&mut p, &[DialogAct::Opinion]);
        assert_eq!(p.dominant_turns, 1);
        assert!(!is_dominant(&p, 0.5));
        let mut q = UserProfile::new("q");
        for _ in 0..10 {
            update_dominance(&mut q, &[DialogAct::Question]);
        }
        assert_eq!(q.dominance_ratio(), Some(1.0));
        assert!(is_dominant(&q, 0.5));
    }

    #[test]
    fn strategy() {
        let mut p = UserProfile::new("u");
        p.dominant_turns = 10;
        p.total_turns = 10;
        assert_eq!(transition_strategy(&p, 0.5), TransitionStrategy::OpenQuestion);
        p.preferred_topics = ids(&["GAME", "MOVIE"]);
        assert_eq!(transition_strategy(&p, 0.5), TransitionStrategy::DirectProposal);
        p.dominant_turns = 2;
        p.preferred_topics.clear();
        assert_eq!(transition_strategy(&p, 0.5), TransitionStrategy::DirectProposal);
    }

    #[test]
    fn open_question_order_and_recycling() {
        let mut p = UserProfile::new("u");
        assert_eq!(next_open_question_category(&p), OpenQuestionCategory::AskHobby);
        p.mark_asked(OpenQuestionCategory::AskHobby);
        assert_eq!(next_open_question_category(&p), OpenQuestionCategory::PastEvent);
        p.mark_asked(OpenQuestionCategory::PastEvent);
        p.mark_asked(OpenQuestionCategory::FutureEvent);
        assert_eq!(next_open_question_category(&p), OpenQuestionCategory::AskHobby);
        p.mark_asked(OpenQuestionCategory::AskHobby);
        assert_eq!(next_open_question_category(&p), OpenQuestionCategory::PastEvent);
    }

    #[test]
    fn open_answer_dedupes() {
        let mut p = UserProfile::new("u");
        assert_eq!(record_open_answer(&ids(&["MUSIC", "FOOD"]), &mut p), Some(ModuleId::MUSIC()));
        record_open_answer(&ids(&["FOOD"]), &mut p);
        assert_eq!(p.preferred_topics, ids(&["MUSIC", "FOOD"]));
        assert_eq!(record_open_answer(&[], &mut p), None);
    }

    #[test]
    fn next_topic_rules() {
        let t = table();
        let mut p = UserProfile::new("u");
        p.preferred_topics = ids(&["GAME"]);
        assert_eq!(select_next_topic(&mut p, &t).topic, ModuleId::GAME());
        let mut p = UserProfile::new("u");
        p.predicted_gender = Gender::Female;
        p.mark_used(&ModuleId::ANIMAL());
        assert_eq!(select_next_topic(&mut p, &t).topic, ModuleId::MOVIE());
        for m in ids(&["MOVIE", "GAME"]) {
            p.mark_used(&m);
        }
        let next = select_next_topic(&mut p, &t);
        assert_eq!(next, NextTopic { topic: ModuleId::ANIMAL(), reset: true });
        assert!(p.used_topics.is_empty());
    }

    #[test]
    fn table_validation() {
        let reg: BTreeSet<ModuleId> = ids(&["GAME", "MOVIE", "ANIMAL"]).into_iter().collect();
        assert!(table().validate(&reg).is_empty());
        let mut bad = table();
        bad.male.pop();
        assert!(!bad.validate(&reg).is_empty());
    }
}
