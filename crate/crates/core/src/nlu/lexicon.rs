use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::module::ModuleId;
use crate::text::{normalize, stem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub phrase: String,
    pub class: String,
    #[serde(default)]
    pub topic: Option<ModuleId>,
    pub confidence: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GazetteerFile {
    #[serde(default)]
    pub thresholds: BTreeMap<String, f64>,
    pub entries: Vec<GazetteerEntry>,
}

#[derive(Debug, Clone)]
pub(crate) struct PhraseEntry {
    pub stems: Vec<String>,
    pub surface: String,
    pub topic: ModuleId,
}

/// Lexicons and phrase tables shared by all annotators.
#[derive(Debug, Clone)]
pub struct NluResources {
    pub(crate) first_level: Vec<PhraseEntry>,
    pub(crate) gazetteer: Vec<(Vec<String>, GazetteerEntry)>,
    pub thresholds: BTreeMap<String, f64>,
    pub default_threshold: f64,
    pub suppressed_classes: BTreeSet<String>,
    pub sentiment: HashMap<String, f64>,
    pub(crate) fillers: Vec<Vec<String>>,
    pub stopwords: HashSet<String>,
    pub(crate) entities: Vec<Vec<String>>,
    pub registered: BTreeSet<ModuleId>,
}

impl Default for NluResources {
    fn default() -> Self {
        let mut res = Self {
            first_level: Vec::new(),
            gazetteer: Vec::new(),
            thresholds: BTreeMap::new(),
            default_threshold: 0.6,
            suppressed_classes: ["movie_title", "book_title", "song_name"]
                .into_iter()
                .map(String::from)
                .collect(),
            sentiment: HashMap::new(),
            fillers: Vec::new(),
            stopwords: HashSet::new(),
            entities: Vec::new(),
            registered: BTreeSet::new(),
        };
        res.set_fillers(["uh", "uhhh", "um", "like", "you know"]);
        res
    }
}

fn stems_of(phrase: &str) -> Vec<String> {
    normalize(phrase).split_whitespace().map(stem).collect()
}

impl NluResources {
    pub fn register(&mut self, topic: ModuleId) {
        self.registered.insert(topic);
    }

    pub fn add_first_level<S: AsRef<str>>(&mut self, topic: &ModuleId, phrases: &[S]) {
        for p in phrases {
            let stems = stems_of(p.as_ref());
            if stems.is_empty() {
                continue;
            }
            self.first_level.push(PhraseEntry {
                stems,
                surface: normalize(p.as_ref()),
                topic: topic.clone(),
            });
        }
        // longest phrases match first
        self.first_level.sort_by(|a, b| b.stems.len().cmp(&a.stems.len()));
    }

    pub fn add_gazetteer(&mut self, file: GazetteerFile) {
        self.thresholds.extend(file.thresholds);
        for e in file.entries {
            let tokens = normalize(&e.phrase)
                .split_whitespace()
                .map(String::from)
                .collect();
            self.gazetteer.push((tokens, e));
        }
        self.gazetteer.sort_by(|a, b| b.0.len().cmp(&a.0.len()));
    }

    pub fn set_fillers<S: AsRef<str>>(&mut self, fillers: impl IntoIterator<Item = S>) {
        self.fillers = fillers
            .into_iter()
            .map(|f| normalize(f.as_ref()).split_whitespace().map(String::from).collect())
            .filter(|f: &Vec<String>| !f.is_empty())
            .collect();
        self.fillers.sort_by(|a, b| b.len().cmp(&a.len()));
    }

    pub fn set_stopwords<S: AsRef<str>>(&mut self, words: impl IntoIterator<Item = S>) {
        self.stopwords = words.into_iter().map(|w| normalize(w.as_ref())).collect();
    }

    pub fn set_sentiment(&mut self, lexicon: impl IntoIterator<Item = (String, f64)>) {
        self.sentiment = lexicon
            .into_iter()
            .map(|(w, p)| (normalize(&w), p.clamp(-1.0, 1.0)))
            .collect();
    }

    /// Known multiword entities (catalog titles, names) for key-phrase spans.
    pub fn add_entities<S: AsRef<str>>(&mut self, entities: impl IntoIterator<Item = S>) {
        for e in entities {
            let tokens: Vec<String> = normalize(e.as_ref())
                .split_whitespace()
                .map(String::from)
                .collect();
            if !tokens.is_empty() && !self.entities.contains(&tokens) {
                self.entities.push(tokens);
            }
        }
        self.entities.sort_by(|a, b| b.len().cmp(&a.len()));
    }

    pub fn threshold(&self, class: &str) -> f64 {
        self.thresholds
            .get(class)
            .copied()
            .unwrap_or(self.default_threshold)
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    pub fn first_level_topics(&self) -> BTreeSet<ModuleId> {
        self.first_level.iter().map(|e| e.topic.clone()).collect()
    }

    /// Surface phrases mapped to `topic` at the first level.
    pub fn first_level_phrases(&self, topic: &ModuleId) -> Vec<&str> {
        self.first_level
            .iter()
            .filter(|e| &e.topic == topic)
            .map(|e| e.surface.as_str())
            .collect()
    }
}
