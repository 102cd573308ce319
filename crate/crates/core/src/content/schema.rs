use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ack::CannedGenerator;
use crate::module::ModuleId;
use crate::nlg::{ProsodyConfig, TemplateFile};
use crate::nlu::GazetteerFile;

fn one() -> u32 {
    1
}

/// Envelope shared by every list-shaped pack.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Catalog<T> {
    #[serde(default = "one")]
    pub schema_version: u32,
    pub entries: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovieEntry {
    pub id: u32,
    pub title: String,
    pub keywords: Vec<String>,
    pub popularity: u32,
    pub about: String,
    pub trivia: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSubtopic {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameEntry {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub subtopics: Vec<GameSubtopic>,
    #[serde(default)]
    pub recommended: bool,
    pub pitch: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsItem {
    pub id: String,
    pub title: String,
    pub keywords: Vec<String>,
    pub chunks: Vec<String>,
    #[serde(default)]
    pub debate_ref: Option<String>,
    /// Name of a dedicated pre-news subflow, if the story has one.
    #[serde(default)]
    pub trending_flow: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Debate {
    pub id: String,
    pub topic: String,
    pub pro: String,
    pub con: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaaEntry {
    pub topic: String,
    pub module: ModuleId,
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackstoryEntry {
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactEntry {
    pub keywords: Vec<String>,
    pub fact: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplatesPack {
    #[serde(default = "one")]
    pub schema_version: u32,
    pub templates: TemplateFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NluPack {
    #[serde(default = "one")]
    pub schema_version: u32,
    pub first_level: BTreeMap<ModuleId, Vec<String>>,
    #[serde(default)]
    pub gazetteer: GazetteerFile,
    #[serde(default)]
    pub fillers: Option<Vec<String>>,
    #[serde(default)]
    pub stopwords: Vec<String>,
    #[serde(default)]
    pub sentiment: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfanityPack {
    #[serde(default = "one")]
    pub schema_version: u32,
    pub words: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrectionRule {
    pub pattern: String,
    pub replacement: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsrPack {
    #[serde(default = "one")]
    pub schema_version: u32,
    pub rules: Vec<CorrectionRule>,
    /// Extra domain vocabulary per module, on top of catalog titles.
    #[serde(default)]
    pub vocabulary: BTreeMap<ModuleId, Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicOrderPack {
    #[serde(default = "one")]
    pub schema_version: u32,
    pub male: Vec<ModuleId>,
    pub female: Vec<ModuleId>,
    pub unknown: Vec<ModuleId>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnginePack {
    #[serde(default = "one")]
    pub schema_version: u32,
    pub prosody: ProsodyConfig,
    pub dominance_threshold: f64,
    pub gender_share: f64,
    pub generator: CannedGenerator,
    /// Single-token proper names the acknowledger capitalizes.
    #[serde(default)]
    pub proper_names: Vec<String>,
}
