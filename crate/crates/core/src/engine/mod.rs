//! The turn pipeline: safety gates, ASR correction, NLU, selection, module
//! execution, SSML, persistence and logging.

pub mod correction;
pub mod gates;
mod pipeline;
mod session;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub use correction::{asr_correct, asr_correct_with};
pub use gates::{check_asr_gate, profanity_scan, AsrGate, ProfanityFilter, ProfanityScan};
pub use pipeline::{is_exit, MAX_CLARIFY_REPEATS, SYSTEM_FALLBACK_TEXT};
pub use session::{conversation_seed, DebugTrace, SessionState};

use crate::adaptation::UserProfile;
use crate::analytics::{LogRecord, TurnRecord};
use crate::content::{Content, ContentManager, MemStore, Store};
use crate::dialog::REPROMPT_KEY;
use crate::error::{EngineError, StoreError};
use crate::fsm::DEFAULT_CHAIN_CAP;
use crate::nlg::{ssml_postprocess, ProsodyConfig};
use crate::topics::default_registry;
use pipeline::Work;

const NS_SESSION: &str = "session";
const NS_PROFILE: &str = "profile";
const NS_LOG: &str = "log";
const NS_TRACE: &str = "trace";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub asr_confidence_threshold: f64,
    #[serde(default)]
    pub profanity_lexicon_path: Option<PathBuf>,
    pub correction_enabled: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self { asr_confidence_threshold: 0.30, profanity_lexicon_path: None, correction_enabled: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub pipeline: PipelineConfig,
    pub seed: u64,
    pub chain_cap: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { pipeline: PipelineConfig::default(), seed: 0, chain_cap: DEFAULT_CHAIN_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnEvent {
    pub conversation_id: String,
    pub user_id: String,
    pub utterance: String,
    pub asr_confidence: f64,
    #[serde(default)]
    pub timestamp: u64,
}

impl TurnEvent {
    pub fn new(conversation_id: &str, user_id: &str, utterance: &str, asr_confidence: f64) -> Self {
        Self {
            conversation_id: conversation_id.into(),
            user_id: user_id.into(),
            utterance: utterance.into(),
            asr_confidence,
            timestamp: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnResponse {
    pub text: String,
    pub ssml: String,
    pub reprompt_ssml: String,
    pub end_session: bool,
    pub trace: DebugTrace,
}

/// Ids double as store keys, so they are restricted to a safe alphabet.
fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && id != "."
        && id != ".."
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.' | '@'))
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// Reads a profanity lexicon: a JSON pack with `words`, or one term per line.
pub fn load_lexicon(path: &std::path::Path) -> Result<Vec<String>, EngineError> {
    let text = std::fs::read_to_string(path).map_err(|e| EngineError::Store(StoreError::Io(e)))?;
    #[derive(Deserialize)]
    struct Pack {
        words: Vec<String>,
    }
    if let Ok(p) = serde_json::from_str::<Pack>(&text) {
        return Ok(p.words);
    }
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from).collect())
}

/// Loads a profile; a known user comes back marked as returning.
pub fn load_profile(store: &dyn Store, user_id: &str) -> UserProfile {
    match store.get(NS_PROFILE, user_id) {
        Ok(Some(bytes)) => match serde_json::from_slice::<UserProfile>(&bytes) {
            Ok(mut p) => {
                p.returning = true;
                p
            }
            Err(e) => {
                tracing::warn!(user_id, error = %e, "unreadable profile, starting fresh");
                UserProfile::new(user_id)
            }
        },
        Ok(None) => UserProfile::new(user_id),
        Err(e) => {
            tracing::warn!(user_id, error = %e, "profile load failed, using an in-memory profile");
            UserProfile::new(user_id)
        }
    }
}

pub fn save_profile(store: &dyn Store, profile: &UserProfile) -> Result<(), StoreError> {
    let bytes = serde_json::to_vec(profile).expect("profile serializes");
    store.put(NS_PROFILE, &profile.user_id, &bytes)
}

type FilterCache = Option<(Arc<Content>, Arc<ProfanityFilter>)>;

pub struct Engine {
    content: Arc<ContentManager>,
    store: Arc<dyn Store>,
    config: EngineConfig,
    lexicon_filter: Option<Arc<ProfanityFilter>>,
    content_filter: Mutex<FilterCache>,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    pending_logs: Mutex<Vec<(String, String, String)>>,
}

impl Engine {
    /// Engine over `store` with the bundled handlers and any content the store holds.
    pub fn open(store: Arc<dyn Store>, config: EngineConfig) -> Result<Self, EngineError> {
        let content = ContentManager::open(store.clone(), Arc::new(default_registry()))?;
        Self::with_content(Arc::new(content), store, config)
    }

    /// In-memory engine with bundled content.
    pub fn in_memory(config: EngineConfig) -> Result<Self, EngineError> {
        Self::open(Arc::new(MemStore::new()), config)
    }

    pub fn with_content(
        content: Arc<ContentManager>,
        store: Arc<dyn Store>,
        config: EngineConfig,
    ) -> Result<Self, EngineError> {
        let t = config.pipeline.asr_confidence_threshold;
        if !(0.0..=1.0).contains(&t) {
            return Err(EngineError::Protocol(format!("asr threshold {t} outside [0,1]")));
        }
        let lexicon_filter = match &config.pipeline.profanity_lexicon_path {
            Some(path) => {
                let words = load_lexicon(path)?;
                let filter = ProfanityFilter::new(&words)
                    .map_err(|e| EngineError::Protocol(format!("profanity lexicon: {e}")))?;
                Some(Arc::new(filter))
            }
            None => None,
        };
        Ok(Self {
            content,
            store,
            config,
            lexicon_filter,
            content_filter: Mutex::new(None),
            locks: Mutex::new(HashMap::new()),
            pending_logs: Mutex::new(Vec::new()),
        })
    }

    pub fn content(&self) -> &Arc<ContentManager> {
        &self.content
    }

    pub fn store(&self) -> &Arc<dyn Store> {
        &self.store
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Re-reads active content from the store and swaps it in.
    pub fn reload(&self) -> Result<(), EngineError> {
        self.content.reload()?;
        Ok(())
    }

    fn profanity_filter(&self, content: &Arc<Content>) -> Arc<ProfanityFilter> {
        if let Some(f) = &self.lexicon_filter {
            return f.clone();
        }
        let mut cache = self.content_filter.lock().expect("filter cache lock");
        if let Some((c, f)) = cache.as_ref() {
            if Arc::ptr_eq(c, content) {
                return f.clone();
            }
        }
        let filter = Arc::new(ProfanityFilter::new(&content.profanity).expect("escaped lexicon compiles"));
        *cache = Some((content.clone(), filter.clone()));
        filter
    }

    fn lock_for(&self, conversation_id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table");
        locks.entry(conversation_id.to_string()).or_default().clone()
    }

    fn load_session(&self, conversation_id: &str) -> Result<Option<SessionState>, EngineError> {
        match self.store.get(NS_SESSION, conversation_id)? {
            Some(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|e| EngineError::Protocol(format!("corrupt session `{conversation_id}`: {e}"))),
            None => Ok(None),
        }
    }

    fn save_session(&self, session: &SessionState) -> Result<(), EngineError> {
        let bytes = serde_json::to_vec(session).expect("session serializes");
        self.store.put(NS_SESSION, &session.conversation_id, &bytes)?;
        Ok(())
    }

    /// Appends durably when possible; lines that fail are retried before the next append.
    fn append(&self, ns: &str, key: &str, line: String) {
        let mut pending = self.pending_logs.lock().expect("pending log lock");
        pending.push((ns.to_string(), key.to_string(), line));
        let mut kept = Vec::new();
        for (ns, key, line) in pending.drain(..) {
            if !kept.is_empty() {
                kept.push((ns, key, line));
                continue;
            }
            if let Err(e) = self.store.append(&ns, &key, &line) {
                tracing::warn!(error = %e, "log append failed, buffering");
                kept.push((ns, key, line));
            }
        }
        *pending = kept;
    }

    pub fn handle_turn(&self, event: &TurnEvent) -> Result<TurnResponse, EngineError> {
        self.handle_turn_with(event, &self.config.pipeline)
    }

    pub fn handle_turn_with(&self, event: &TurnEvent, pipeline: &PipelineConfig) -> Result<TurnResponse, EngineError> {
        let started = Instant::now();
        if !valid_id(&event.conversation_id) {
            return Err(EngineError::Protocol(format!("bad conversation id `{}`", event.conversation_id)));
        }
        if !valid_id(&event.user_id) {
            return Err(EngineError::Protocol(format!("bad user id `{}`", event.user_id)));
        }
        let c = event.asr_confidence;
        if !c.is_finite() || !(0.0..=1.0).contains(&c) {
            return Err(EngineError::Protocol(format!("asr_confidence {c} outside [0,1]")));
        }
        let t = pipeline.asr_confidence_threshold;
        if !(0.0..=1.0).contains(&t) {
            return Err(EngineError::Protocol(format!("asr threshold {t} outside [0,1]")));
        }

        let lock = self.lock_for(&event.conversation_id);
        let _guard = lock.lock().expect("conversation lock");
        let mut session = match self.load_session(&event.conversation_id)? {
            Some(s) => s,
            None => {
                let profile = load_profile(self.store.as_ref(), &event.user_id);
                SessionState::new(&event.conversation_id, profile, self.config.seed)
            }
        };
        if session.user_id != event.user_id {
            return Err(EngineError::Protocol(format!(
                "conversation `{}` belongs to another user",
                event.conversation_id
            )));
        }
        if session.rating.is_some() {
            return Err(EngineError::AlreadyRated(event.conversation_id.clone()));
        }

        let content = self.content.current();
        let filter = self.profanity_filter(&content);
        let mut rng = session.rng();
        let registry = self.content.registry().clone();
        let mut work = Work::new(&content, &registry, &mut session, &mut rng, self.config.chain_cap);
        let outcome = work.run(&event.utterance, c, pipeline, &filter);
        let Work { template_keys, intents, nlu, corrected, proposal_event, error, module_state, .. } = work;

        let ssml = ssml_postprocess(&outcome.text, &content.settings.prosody, &template_keys, &mut rng);
        let text = ssml.text();
        let quiet = ProsodyConfig { filler_probability: 0.0, ..content.settings.prosody.clone() };
        let reprompt = content
            .templates
            .render(REPROMPT_KEY, &Default::default(), &mut session.bags, &mut rng)
            .unwrap_or_else(|_| SYSTEM_FALLBACK_TEXT.to_string());
        let reprompt_ssml = ssml_postprocess(&reprompt, &quiet, &[REPROMPT_KEY.to_string()], &mut rng).ssml;

        let latency_ms = started.elapsed().as_secs_f64() * 1000.0;
        let turn_index = session.turn_index;
        let intent_labels: Vec<String> = intents.iter().map(|i| i.to_string()).collect();
        let trace = DebugTrace {
            turn_index,
            detected_intents: intent_labels.clone(),
            selected_module: outcome.module.clone(),
            reason: outcome.reason,
            entry_method: outcome.entry,
            module_state,
            fsm_path: outcome.fsm_path.clone(),
            nlu_summary: nlu,
            gate: outcome.gate,
            template_keys,
            filler: ssml.filler.clone(),
            corrected_utterance: corrected.clone(),
            error,
            latency_ms,
        };

        session.turn_index += 1;
        session.last_bot_text = text.clone();
        if outcome.substantive {
            session.last_substantive = Some(outcome.text.clone());
            session.clarify_repeats = 0;
        }
        session.save_rng(&rng);

        let record = LogRecord::Turn(TurnRecord {
            conversation_id: event.conversation_id.clone(),
            user_id: event.user_id.clone(),
            turn_index,
            timestamp: event.timestamp,
            utterance: event.utterance.clone(),
            corrected,
            response: text.clone(),
            module_id: outcome.module.clone(),
            entry_method: outcome.entry,
            reason: outcome.reason,
            gate: outcome.gate,
            proposal_event,
            intents: intent_labels,
            fsm_path: outcome.fsm_path,
            latency_ms,
        });
        let line = record.to_line().map_err(|e| EngineError::Protocol(e.to_string()))?;

        self.save_session(&session)?;
        if let Err(e) = save_profile(self.store.as_ref(), &session.profile) {
            tracing::warn!(error = %e, "profile save failed");
        }
        let key = format!("{}.jsonl", event.conversation_id);
        self.append(NS_LOG, &key, line);
        self.append(NS_TRACE, &key, serde_json::to_string(&trace).expect("trace serializes"));

        Ok(TurnResponse { text, ssml: ssml.ssml, reprompt_ssml, end_session: outcome.end_session, trace })
    }

    /// Records the end-of-conversation rating; one per conversation.
    pub fn rate(&self, conversation_id: &str, rating: i64) -> Result<(), EngineError> {
        self.rate_at(conversation_id, rating, now_ms())
    }

    pub fn rate_at(&self, conversation_id: &str, rating: i64, timestamp: u64) -> Result<(), EngineError> {
        if !valid_id(conversation_id) {
            return Err(EngineError::Protocol(format!("bad conversation id `{conversation_id}`")));
        }
        if !(1..=5).contains(&rating) {
            return Err(EngineError::BadRating(rating));
        }
        let lock = self.lock_for(conversation_id);
        let _guard = lock.lock().expect("conversation lock");
        let mut session = self
            .load_session(conversation_id)?
            .ok_or_else(|| EngineError::UnknownConversation(conversation_id.to_string()))?;
        if session.rating.is_some() {
            return Err(EngineError::AlreadyRated(conversation_id.to_string()));
        }
        let record = LogRecord::rating(conversation_id, rating as u8, timestamp)
            .map_err(|e| EngineError::Protocol(e.to_string()))?;
        let line = record.to_line().map_err(|e| EngineError::Protocol(e.to_string()))?;
        session.rating = Some(rating as u8);
        self.save_session(&session)?;
        self.append(NS_LOG, &format!("{conversation_id}.jsonl"), line);
        Ok(())
    }

    pub fn session(&self, conversation_id: &str) -> Result<Option<SessionState>, EngineError> {
        self.load_session(conversation_id)
    }

    pub fn trace(&self, conversation_id: &str) -> Result<Vec<DebugTrace>, EngineError> {
        if !valid_id(conversation_id) || self.load_session(conversation_id)?.is_none() {
            return Err(EngineError::UnknownConversation(conversation_id.to_string()));
        }
        let bytes = self.store.get(NS_TRACE, &format!("{conversation_id}.jsonl"))?.unwrap_or_default();
        let text = String::from_utf8_lossy(&bytes);
        Ok(text.lines().filter_map(|l| serde_json::from_str(l).ok()).collect())
    }

    /// JSON-lines log of one conversation.
    pub fn conversation_log(&self, conversation_id: &str) -> Result<String, EngineError> {
        if !valid_id(conversation_id) {
            return Err(EngineError::UnknownConversation(conversation_id.to_string()));
        }
        let bytes = self
            .store
            .get(NS_LOG, &format!("{conversation_id}.jsonl"))?
            .ok_or_else(|| EngineError::UnknownConversation(conversation_id.to_string()))?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }

    /// Every conversation log, concatenated in key order.
    pub fn export_logs(&self) -> Result<String, EngineError> {
        let mut keys = self.store.list(NS_LOG)?;
        keys.sort();
        let mut out = String::new();
        for k in keys {
            if let Some(bytes) = self.store.get(NS_LOG, &k)? {
                let text = String::from_utf8_lossy(&bytes);
                out.push_str(&text);
                if !text.is_empty() && !text.ends_with('\n') {
                    out.push('\n');
                }
            }
        }
        Ok(out)
    }
}
