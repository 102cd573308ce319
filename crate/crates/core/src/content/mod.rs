//! Content packs, the immutable content snapshot, and persistence.

pub mod ordered;
mod packs;
pub mod schema;
mod store;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use regex::Regex;
use serde::de::DeserializeOwned;
use serde_json::Value;

pub use packs::{
    bundled_packs, sha256_hex, ContentIndex, ContentManager, KindIndex, PackKind, PackSet, VersionRecord, BUNDLED,
};
pub use store::{FsStore, MemStore, Store};

use crate::ack::{Acknowledger, CannedGenerator, PerspectiveMap};
use crate::adaptation::{NameDb, TopicOrderTable};
use crate::fsm::{FlowDefinition, FlowFile, HandlerRegistry};
use crate::module::ModuleId;
use crate::nlg::{ProsodyConfig, TemplateFile, TemplateStore};
use crate::nlu::NluResources;
use crate::phonetic::phonetic_encode;
use crate::phonetic::PhoneticCode;
use crate::text::normalize;
use schema::*;

/// A vocabulary phrase with per-token phonetic codes.
#[derive(Debug, Clone, PartialEq)]
pub struct VocabEntry {
    pub phrase: String,
    pub tokens: Vec<String>,
    pub codes: Vec<PhoneticCode>,
}

impl VocabEntry {
    pub fn new(phrase: &str) -> Self {
        let phrase = normalize(phrase);
        let tokens: Vec<String> = phrase.split_whitespace().map(String::from).collect();
        let codes = tokens.iter().map(|t| phonetic_encode(t)).collect();
        Self { phrase, tokens, codes }
    }
}

#[derive(Debug, Clone)]
pub struct EngineSettings {
    pub prosody: ProsodyConfig,
    pub dominance_threshold: f64,
    pub gender_share: f64,
}

/// Every piece of runtime content, validated together and swapped as a unit.
#[derive(Debug, Clone)]
pub struct Content {
    pub templates: TemplateStore,
    pub flows: BTreeMap<ModuleId, FlowDefinition>,
    pub registered: BTreeSet<ModuleId>,
    pub nlu: NluResources,
    pub acknowledger: Acknowledger,
    pub generator: CannedGenerator,
    pub movies: Vec<MovieEntry>,
    pub games: Vec<GameEntry>,
    pub news: Vec<NewsItem>,
    pub debates: Vec<Debate>,
    pub paa: Vec<PaaEntry>,
    pub backstory: Vec<BackstoryEntry>,
    pub facts: Vec<FactEntry>,
    pub names: NameDb,
    pub topic_order: TopicOrderTable,
    pub profanity: Vec<String>,
    pub corrections: Vec<(Regex, String)>,
    pub vocabulary: BTreeMap<ModuleId, Vec<VocabEntry>>,
    pub settings: EngineSettings,
}

/// Template keys the engine renders directly.
pub const REQUIRED_TEMPLATES: &[&str] = &[
    "profanity_redirect",
    "low_asr_clarify",
    "silence_reprompt",
    "incomplete_reprompt",
    "hesitant_reprompt",
    "device_exit",
    "device_topic_offer",
    "clarify_prefix",
    "error_system",
    "reprompt_default",
    "ack_opener",
    "ack_generic",
    "ack_rejection",
    "ack_topic_switch",
    "question_fallback",
    "drift_confirm",
    "open_ask_hobby",
    "open_past_event",
    "open_future_event",
    "open_returning",
    "goodbye",
];

const SYSTEM_MODULES: [fn() -> ModuleId; 2] = [ModuleId::FUNCTIONAL, ModuleId::TRANSITION];

fn parse<T: DeserializeOwned>(kind: PackKind, name: &str, bytes: &[u8], errors: &mut Vec<String>) -> Option<T> {
    match serde_json::from_slice::<T>(bytes) {
        Ok(v) => Some(v),
        Err(e) => {
            errors.push(format!("{kind}/{name}: {e}"));
            None
        }
    }
}

fn template_refs(args: &Value, out: &mut Vec<String>) {
    for field in ["template", "fallback_template"] {
        if let Some(k) = args.get(field).and_then(Value::as_str) {
            out.push(k.to_string());
        }
    }
    if let Some(list) = args.get("templates").and_then(Value::as_array) {
        out.extend(list.iter().filter_map(|v| v.as_str().map(String::from)));
    }
}

impl Content {
    /// Only the bundled packs.
    pub fn bundled(registry: &HandlerRegistry) -> Result<Self, Vec<String>> {
        Self::build(&bundled_packs(), registry)
    }

    /// Parses and cross-validates a full pack set; reports every defect found.
    pub fn build(packs: &PackSet, registry: &HandlerRegistry) -> Result<Self, Vec<String>> {
        let mut errors: Vec<String> = Vec::new();
        let mut template_files: Vec<(String, TemplateFile)> = Vec::new();
        let mut flow_files: Vec<(String, FlowFile)> = Vec::new();
        let mut movies = Vec::new();
        let mut games = Vec::new();
        let mut news = Vec::new();
        let mut debates = Vec::new();
        let mut paa = Vec::new();
        let mut backstory = Vec::new();
        let mut facts = Vec::new();
        let mut names = NameDb::default();
        let mut nlu_pack: Option<NluPack> = None;
        let mut profanity_pack: Option<ProfanityPack> = None;
        let mut asr_pack: Option<AsrPack> = None;
        let mut order_pack: Option<TopicOrderPack> = None;
        let mut engine_pack: Option<EnginePack> = None;

        for ((kind, name), bytes) in packs {
            let e = &mut errors;
            match kind {
                PackKind::Templates => {
                    if let Some(p) = parse::<TemplatesPack>(*kind, name, bytes, e) {
                        template_files.push((name.clone(), p.templates));
                    }
                }
                PackKind::Flows => {
                    if let Some(f) = parse::<FlowFile>(*kind, name, bytes, e) {
                        flow_files.push((name.clone(), f));
                    }
                }
                PackKind::MovieCatalog => movies.extend(parse::<Catalog<MovieEntry>>(*kind, name, bytes, e).map(|c| c.entries).unwrap_or_default()),
                PackKind::GameCatalog => games.extend(parse::<Catalog<GameEntry>>(*kind, name, bytes, e).map(|c| c.entries).unwrap_or_default()),
                PackKind::News => news.extend(parse::<Catalog<NewsItem>>(*kind, name, bytes, e).map(|c| c.entries).unwrap_or_default()),
                PackKind::Debate => debates.extend(parse::<Catalog<Debate>>(*kind, name, bytes, e).map(|c| c.entries).unwrap_or_default()),
                PackKind::Paa => paa.extend(parse::<Catalog<PaaEntry>>(*kind, name, bytes, e).map(|c| c.entries).unwrap_or_default()),
                PackKind::Backstory => backstory.extend(parse::<Catalog<BackstoryEntry>>(*kind, name, bytes, e).map(|c| c.entries).unwrap_or_default()),
                PackKind::Facts => facts.extend(parse::<Catalog<FactEntry>>(*kind, name, bytes, e).map(|c| c.entries).unwrap_or_default()),
                PackKind::NameDb => match std::str::from_utf8(bytes).map_err(|x| x.to_string()).and_then(|t| NameDb::from_csv(t).map_err(|x| x.to_string())) {
                    Ok(db) => {
                        for (n, (m, f)) in db.iter() {
                            names.insert(n, m, f);
                        }
                    }
                    Err(x) => e.push(format!("NAME_DB/{name}: {x}")),
                },
                PackKind::Lexicon => match name.as_str() {
                    "nlu" => nlu_pack = parse(*kind, name, bytes, e),
                    "profanity" => profanity_pack = parse(*kind, name, bytes, e),
                    "asr" => asr_pack = parse(*kind, name, bytes, e),
                    "topic_order" => order_pack = parse(*kind, name, bytes, e),
                    "engine" => engine_pack = parse(*kind, name, bytes, e),
                    other => e.push(format!("LEXICON/{other}: unknown lexicon name")),
                },
            }
        }

        let templates = match TemplateStore::from_groups(template_files.iter().map(|(n, f)| (n.as_str(), f))) {
            Ok(t) => t,
            Err(e) => {
                errors.push(format!("TEMPLATES: {e}"));
                TemplateStore::default()
            }
        };

        let mut flows: BTreeMap<ModuleId, FlowDefinition> = BTreeMap::new();
        for (name, file) in &flow_files {
            if flows.contains_key(&file.module) {
                errors.push(format!("FLOWS/{name}: module {} already has a flow", file.module));
                continue;
            }
            match FlowDefinition::from_file(file, &|h| registry.contains(h)) {
                Ok(def) => {
                    flows.insert(file.module.clone(), def);
                }
                Err(defects) => errors.extend(defects.iter().map(|d| format!("FLOWS/{name}: {d}"))),
            }
        }
        if !templates.is_empty() {
            for def in flows.values() {
                for (id, state) in &def.states {
                    let mut refs = Vec::new();
                    template_refs(&state.args, &mut refs);
                    for r in refs {
                        if !templates.contains(&r) {
                            errors.push(format!("FLOWS/{}: state `{id}` renders unknown template `{r}`", def.module.slug()));
                        }
                    }
                }
            }
            for key in REQUIRED_TEMPLATES {
                if !templates.contains(key) {
                    errors.push(format!("TEMPLATES: required template `{key}` is missing"));
                }
            }
        }

        let mut registered: BTreeSet<ModuleId> = flows.keys().cloned().collect();
        registered.extend(SYSTEM_MODULES.iter().map(|f| f()));

        let mut seen = HashSet::new();
        for m in &movies {
            if !seen.insert(m.id) {
                errors.push(format!("MOVIE_CATALOG: duplicate movie id {}", m.id));
            }
        }
        let mut seen = HashSet::new();
        for g in &games {
            if !seen.insert(g.id.clone()) {
                errors.push(format!("GAME_CATALOG: duplicate game id {}", g.id));
            }
        }
        let debate_ids: HashSet<&str> = debates.iter().map(|d| d.id.as_str()).collect();
        for n in &news {
            if n.chunks.is_empty() {
                errors.push(format!("NEWS: item {} has no chunks", n.id));
            }
            if let Some(d) = &n.debate_ref {
                if !debate_ids.contains(d.as_str()) {
                    errors.push(format!("NEWS: item {} references unknown debate {d}", n.id));
                }
            }
        }
        for p in &paa {
            if !registered.contains(&p.module) {
                errors.push(format!("PAA: topic {} names unregistered module {}", p.topic, p.module));
            }
        }

        let mut nlu = NluResources::default();
        for m in &registered {
            nlu.register(m.clone());
        }
        let mut stopwords: Vec<String> = Vec::new();
        match nlu_pack {
            Some(p) => {
                for (topic, phrases) in &p.first_level {
                    if !registered.contains(topic) {
                        errors.push(format!("LEXICON/nlu: first-level table names unregistered module {topic}"));
                    }
                    nlu.add_first_level(topic, phrases);
                }
                for e in &p.gazetteer.entries {
                    if let Some(t) = &e.topic {
                        if !registered.contains(t) {
                            errors.push(format!("LEXICON/nlu: gazetteer phrase `{}` names unregistered module {t}", e.phrase));
                        }
                    }
                }
                nlu.add_gazetteer(p.gazetteer);
                if let Some(f) = p.fillers {
                    nlu.set_fillers(f);
                }
                stopwords = p.stopwords.clone();
                nlu.set_stopwords(p.stopwords);
                nlu.set_sentiment(p.sentiment);
            }
            None => errors.push("LEXICON/nlu: missing".into()),
        }
        nlu.add_entities(movies.iter().map(|m| m.title.as_str()));
        nlu.add_entities(games.iter().flat_map(|g| std::iter::once(&g.title).chain(&g.aliases)).map(String::as_str));

        let topic_order = match order_pack {
            Some(p) => {
                let t = TopicOrderTable { male: p.male, female: p.female, unknown: p.unknown };
                errors.extend(t.validate(&registered).into_iter().map(|e| format!("LEXICON/topic_order: {e}")));
                if !templates.is_empty() {
                    for topic in &t.unknown {
                        let key = format!("propose_{}", topic.slug());
                        if !templates.contains(&key) {
                            errors.push(format!("TEMPLATES: proposable topic {topic} has no `{key}`"));
                        }
                    }
                }
                t
            }
            None => {
                errors.push("LEXICON/topic_order: missing".into());
                TopicOrderTable { male: vec![], female: vec![], unknown: vec![] }
            }
        };
        if topic_order.unknown.is_empty() && order_pack_missing_ok(&errors) {
            errors.push("LEXICON/topic_order: empty".into());
        }

        let profanity: Vec<String> = match profanity_pack {
            Some(p) => p.words.iter().map(|w| normalize(w)).filter(|w| !w.is_empty()).collect(),
            None => {
                errors.push("LEXICON/profanity: missing".into());
                Vec::new()
            }
        };

        let mut corrections = Vec::new();
        let mut vocabulary: BTreeMap<ModuleId, Vec<VocabEntry>> = BTreeMap::new();
        match asr_pack {
            Some(p) => {
                for r in &p.rules {
                    match Regex::new(&r.pattern) {
                        Ok(re) => corrections.push((re, r.replacement.clone())),
                        Err(e) => errors.push(format!("LEXICON/asr: bad pattern `{}`: {e}", r.pattern)),
                    }
                }
                for (m, words) in &p.vocabulary {
                    vocabulary.entry(m.clone()).or_default().extend(words.iter().map(|w| VocabEntry::new(w)));
                }
            }
            None => errors.push("LEXICON/asr: missing".into()),
        }
        vocabulary.entry(ModuleId::MOVIE()).or_default().extend(movies.iter().map(|m| VocabEntry::new(&m.title)));
        vocabulary
            .entry(ModuleId::GAME())
            .or_default()
            .extend(games.iter().flat_map(|g| std::iter::once(&g.title).chain(&g.aliases)).map(|t| VocabEntry::new(t)));

        let (settings, generator, proper) = match engine_pack {
            Some(p) => (
                EngineSettings {
                    prosody: p.prosody,
                    dominance_threshold: p.dominance_threshold,
                    gender_share: p.gender_share,
                },
                p.generator,
                p.proper_names,
            ),
            None => {
                errors.push("LEXICON/engine: missing".into());
                (
                    EngineSettings { prosody: ProsodyConfig::default(), dominance_threshold: 0.5, gender_share: 0.9 },
                    CannedGenerator::default(),
                    Vec::new(),
                )
            }
        };

        let mut proper_names: HashSet<String> = proper.iter().map(|p| normalize(p)).collect();
        for g in &games {
            for t in std::iter::once(&g.title).chain(&g.aliases) {
                let n = normalize(t);
                if !n.contains(' ') {
                    proper_names.insert(n);
                }
            }
        }
        let acknowledger = Acknowledger {
            perspective: PerspectiveMap::default(),
            stopwords: stopwords.iter().map(|s| normalize(s)).collect(),
            proper_names,
        };

        if !errors.is_empty() {
            return Err(errors);
        }
        Ok(Self {
            templates,
            flows,
            registered,
            nlu,
            acknowledger,
            generator,
            movies,
            games,
            news,
            debates,
            paa,
            backstory,
            facts,
            names,
            topic_order,
            profanity,
            corrections,
            vocabulary,
            settings,
        })
    }

    /// Topic modules with a flow (excludes the system modules).
    pub fn topic_modules(&self) -> impl Iterator<Item = &ModuleId> {
        self.flows.keys()
    }

    pub fn debate(&self, id: &str) -> Option<&Debate> {
        self.debates.iter().find(|d| d.id == id)
    }

    /// Domain vocabulary for a module, or all vocabulary when none is given.
    pub fn vocabulary_for(&self, module: Option<&ModuleId>) -> Vec<&VocabEntry> {
        match module.and_then(|m| self.vocabulary.get(m)) {
            Some(v) => v.iter().collect(),
            None => self.vocabulary.values().flatten().collect(),
        }
    }
}

fn order_pack_missing_ok(errors: &[String]) -> bool {
    !errors.iter().any(|e| e.starts_with("LEXICON/topic_order"))
}
