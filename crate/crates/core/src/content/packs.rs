use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::store::Store;
use super::Content;
use crate::error::ContentError;
use crate::fsm::HandlerRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PackKind {
    Paa,
    Debate,
    MovieCatalog,
    GameCatalog,
    News,
    Backstory,
    Facts,
    NameDb,
    Templates,
    Flows,
    Lexicon,
}

impl PackKind {
    pub const ALL: [PackKind; 11] = [
        Self::Paa,
        Self::Debate,
        Self::MovieCatalog,
        Self::GameCatalog,
        Self::News,
        Self::Backstory,
        Self::Facts,
        Self::NameDb,
        Self::Templates,
        Self::Flows,
        Self::Lexicon,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Paa => "PAA",
            Self::Debate => "DEBATE",
            Self::MovieCatalog => "MOVIE_CATALOG",
            Self::GameCatalog => "GAME_CATALOG",
            Self::News => "NEWS",
            Self::Backstory => "BACKSTORY",
            Self::Facts => "FACTS",
            Self::NameDb => "NAME_DB",
            Self::Templates => "TEMPLATES",
            Self::Flows => "FLOWS",
            Self::Lexicon => "LEXICON",
        }
    }
}

impl fmt::Display for PackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PackKind {
    type Err = ContentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let up = s.trim().to_uppercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == up)
            .ok_or_else(|| ContentError::UnknownKind(s.to_string()))
    }
}

/// Raw pack payloads keyed by (kind, name). Bytes are kept verbatim.
pub type PackSet = BTreeMap<(PackKind, String), Vec<u8>>;

macro_rules! bundle {
    ($(($kind:ident, $name:literal, $path:literal)),* $(,)?) => {
        &[$((PackKind::$kind, $name, include_bytes!(concat!(env!("CARGO_MANIFEST_DIR"), "/data/", $path)))),*]
    };
}

/// Content shipped inside the binary (version 0 of every pack).
pub const BUNDLED: &[(PackKind, &str, &[u8])] = bundle![
    (Templates, "system", "templates/system.json"),
    (Templates, "greeting", "templates/greeting.json"),
    (Templates, "transition", "templates/transition.json"),
    (Templates, "movie", "templates/movie.json"),
    (Templates, "music", "templates/music.json"),
    (Templates, "game", "templates/game.json"),
    (Templates, "food", "templates/food.json"),
    (Templates, "news", "templates/news.json"),
    (Templates, "fashion", "templates/fashion.json"),
    (Templates, "comfort", "templates/comfort.json"),
    (Templates, "daily_life", "templates/daily_life.json"),
    (Templates, "outdoor", "templates/outdoor.json"),
    (Templates, "simple_topics", "templates/simple_topics.json"),
    (Templates, "retrieval", "templates/retrieval.json"),
    (Flows, "greeting", "flows/greeting.json"),
    (Flows, "movie", "flows/movie.json"),
    (Flows, "music", "flows/music.json"),
    (Flows, "game", "flows/game.json"),
    (Flows, "food", "flows/food.json"),
    (Flows, "news", "flows/news.json"),
    (Flows, "fashion", "flows/fashion.json"),
    (Flows, "comfort", "flows/comfort.json"),
    (Flows, "daily_life", "flows/daily_life.json"),
    (Flows, "outdoor", "flows/outdoor.json"),
    (Flows, "animal", "flows/animal.json"),
    (Flows, "sport", "flows/sport.json"),
    (Flows, "book", "flows/book.json"),
    (Flows, "travel", "flows/travel.json"),
    (Flows, "tech", "flows/tech.json"),
    (Flows, "retrieval", "flows/retrieval.json"),
    (Lexicon, "nlu", "lexicon/nlu.json"),
    (Lexicon, "profanity", "lexicon/profanity.json"),
    (Lexicon, "asr", "lexicon/asr.json"),
    (Lexicon, "topic_order", "lexicon/topic_order.json"),
    (Lexicon, "engine", "lexicon/engine.json"),
    (MovieCatalog, "movies", "catalogs/movies.json"),
    (GameCatalog, "games", "catalogs/games.json"),
    (News, "news", "catalogs/news.json"),
    (Debate, "debates", "catalogs/debates.json"),
    (Paa, "paa", "catalogs/paa.json"),
    (Backstory, "backstory", "catalogs/backstory.json"),
    (Facts, "facts", "catalogs/facts.json"),
    (NameDb, "names", "catalogs/names.csv"),
];

pub fn bundled_packs() -> PackSet {
    BUNDLED.iter().map(|(k, n, b)| ((*k, n.to_string()), b.to_vec())).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionRecord {
    pub version: u64,
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindIndex {
    pub versions: Vec<VersionRecord>,
    /// Active version per pack name; names absent here use the bundled payload.
    pub active: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentIndex {
    pub schema_version: u32,
    pub kinds: BTreeMap<PackKind, KindIndex>,
}

const NS: &str = "content";
const INDEX_KEY: &str = "index.json";

fn blob_key(kind: PackKind, version: u64) -> String {
    format!("{}/{version}", kind.as_str())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Versioned content with atomic activation and rollback.
pub struct ContentManager {
    store: Arc<dyn Store>,
    registry: Arc<HandlerRegistry>,
    active: RwLock<Arc<Content>>,
    packs: Mutex<PackSet>,
}

impl ContentManager {
    /// Loads the bundled packs overlaid with whatever the store marks active.
    pub fn open(store: Arc<dyn Store>, registry: Arc<HandlerRegistry>) -> Result<Self, ContentError> {
        let index = Self::read_index(store.as_ref())?;
        let mut packs = bundled_packs();
        for (kind, ki) in &index.kinds {
            for (name, version) in &ki.active {
                let bytes = store
                    .get(NS, &blob_key(*kind, *version))?
                    .ok_or(ContentError::UnknownVersion { kind: kind.to_string(), version: *version })?;
                packs.insert((*kind, name.clone()), bytes);
            }
        }
        let content = Content::build(&packs, &registry)
            .map_err(|errors| ContentError::Invalid { kind: "CONTENT".into(), errors })?;
        Ok(Self {
            store,
            registry,
            active: RwLock::new(Arc::new(content)),
            packs: Mutex::new(packs),
        })
    }

    /// Serves a prebuilt snapshot; ingest and reload still go through the store.
    pub fn from_content(store: Arc<dyn Store>, registry: Arc<HandlerRegistry>, content: Content) -> Self {
        Self {
            store,
            registry,
            active: RwLock::new(Arc::new(content)),
            packs: Mutex::new(bundled_packs()),
        }
    }

    pub fn current(&self) -> Arc<Content> {
        self.active.read().expect("content lock").clone()
    }

    pub fn registry(&self) -> &Arc<HandlerRegistry> {
        &self.registry
    }

    pub fn index(&self) -> Result<ContentIndex, ContentError> {
        Self::read_index(self.store.as_ref())
    }

    /// Payload currently active for (kind, name).
    pub fn active_payload(&self, kind: PackKind, name: &str) -> Option<Vec<u8>> {
        self.packs.lock().expect("packs lock").get(&(kind, name.to_string())).cloned()
    }

    fn read_index(store: &dyn Store) -> Result<ContentIndex, ContentError> {
        match store.get(NS, INDEX_KEY)? {
            Some(b) => Ok(serde_json::from_slice(&b)?),
            None => Ok(ContentIndex { schema_version: 1, kinds: BTreeMap::new() }),
        }
    }

    fn activate(&self, packs: &mut PackSet, key: (PackKind, String), bytes: Vec<u8>) -> Result<Content, ContentError> {
        let mut candidate = packs.clone();
        candidate.insert(key.clone(), bytes.clone());
        let content = Content::build(&candidate, &self.registry)
            .map_err(|errors| ContentError::Invalid { kind: key.0.to_string(), errors })?;
        packs.insert(key, bytes);
        Ok(content)
    }

    /// Validates, stores and activates a new pack version. Nothing changes on failure.
    pub fn ingest(&self, kind: PackKind, name: &str, bytes: Vec<u8>) -> Result<u64, ContentError> {
        let mut packs = self.packs.lock().expect("packs lock");
        let mut index = Self::read_index(self.store.as_ref())?;
        let mut staged = packs.clone();
        let content = self.activate(&mut staged, (kind, name.to_string()), bytes.clone())?;
        let ki = index.kinds.entry(kind).or_default();
        let version = ki.versions.iter().map(|v| v.version).max().unwrap_or(0) + 1;
        self.store.put(NS, &blob_key(kind, version), &bytes)?;
        ki.versions.push(VersionRecord { version, name: name.to_string(), sha256: sha256_hex(&bytes) });
        ki.active.insert(name.to_string(), version);
        index.schema_version = 1;
        self.store.put(NS, INDEX_KEY, &serde_json::to_vec_pretty(&index)?)?;
        *packs = staged;
        *self.active.write().expect("content lock") = Arc::new(content);
        tracing::info!(kind = %kind, name, version, "content pack activated");
        Ok(version)
    }

    /// Re-activates a stored version byte for byte.
    pub fn rollback(&self, kind: PackKind, version: u64) -> Result<String, ContentError> {
        let mut packs = self.packs.lock().expect("packs lock");
        let mut index = Self::read_index(self.store.as_ref())?;
        let unknown = || ContentError::UnknownVersion { kind: kind.to_string(), version };
        let ki = index.kinds.get_mut(&kind).ok_or_else(unknown)?;
        let record = ki.versions.iter().find(|v| v.version == version).cloned().ok_or_else(unknown)?;
        let bytes = self.store.get(NS, &blob_key(kind, version))?.ok_or_else(unknown)?;
        if sha256_hex(&bytes) != record.sha256 {
            return Err(ContentError::Invalid {
                kind: kind.to_string(),
                errors: vec![format!("stored payload for version {version} fails its checksum")],
            });
        }
        let mut staged = packs.clone();
        let content = self.activate(&mut staged, (kind, record.name.clone()), bytes)?;
        ki.active.insert(record.name.clone(), version);
        self.store.put(NS, INDEX_KEY, &serde_json::to_vec_pretty(&index)?)?;
        *packs = staged;
        *self.active.write().expect("content lock") = Arc::new(content);
        tracing::info!(kind = %kind, version, "content pack rolled back");
        Ok(record.name)
    }

    /// Rebuilds from the store, picking up changes made by another process.
    pub fn reload(&self) -> Result<(), ContentError> {
        let fresh = Self::open(self.store.clone(), self.registry.clone())?;
        let packs = fresh.packs.into_inner().expect("packs lock");
        let content = fresh.active.into_inner().expect("content lock");
        *self.packs.lock().expect("packs lock") = packs;
        *self.active.write().expect("content lock") = content;
        Ok(())
    }
}
