use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::adaptation::UserProfile;
use crate::analytics::Gate;
use crate::dialog::{GlobalAttributes, PreviousTurn, SelectionReason};
use crate::module::{EntryMethod, ModuleId, ModuleState};
use crate::nlg::BagSet;
use crate::nlu::Annotation;

/// Per-turn observability record returned with every response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebugTrace {
    pub turn_index: u64,
    pub detected_intents: Vec<String>,
    pub selected_module: ModuleId,
    pub reason: Option<SelectionReason>,
    pub entry_method: EntryMethod,
    pub module_state: Option<ModuleState>,
    pub fsm_path: Vec<String>,
    pub nlu_summary: Vec<Annotation>,
    pub gate: Option<Gate>,
    pub template_keys: Vec<String>,
    pub filler: Option<String>,
    pub corrected_utterance: Option<String>,
    pub error: Option<String>,
    pub latency_ms: f64,
}

/// Everything the engine remembers about one conversation between turns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub conversation_id: String,
    pub user_id: String,
    pub seed: u64,
    /// ChaCha word position, as a decimal string.
    pub rng_position: String,
    pub turn_index: u64,
    pub greeted: bool,
    pub previous: Option<PreviousTurn>,
    pub attrs: GlobalAttributes,
    pub flow_states: BTreeMap<ModuleId, String>,
    pub span_entry: EntryMethod,
    pub conversation_scope: BTreeMap<String, Value>,
    pub bags: BagSet,
    pub profile: UserProfile,
    pub last_bot_text: String,
    pub last_substantive: Option<String>,
    pub clarify_repeats: u32,
    pub rating: Option<u8>,
    pub traces: Vec<DebugTrace>,
}

/// Per-conversation seed: first eight bytes of sha256(engine seed, conversation id).
pub fn conversation_seed(engine_seed: u64, conversation_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(engine_seed.to_le_bytes());
    h.update(conversation_id.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

impl SessionState {
    pub fn new(conversation_id: &str, profile: UserProfile, engine_seed: u64) -> Self {
        Self {
            conversation_id: conversation_id.to_string(),
            user_id: profile.user_id.clone(),
            seed: conversation_seed(engine_seed, conversation_id),
            rng_position: "0".into(),
            turn_index: 0,
            greeted: false,
            previous: None,
            attrs: GlobalAttributes::default(),
            flow_states: BTreeMap::new(),
            span_entry: EntryMethod::Other,
            conversation_scope: BTreeMap::new(),
            bags: BagSet::new(),
            profile,
            last_bot_text: String::new(),
            last_substantive: None,
            clarify_repeats: 0,
            rating: None,
            traces: Vec::new(),
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_word_pos(self.rng_position.parse().unwrap_or(0));
        rng
    }

    pub fn save_rng(&mut self, rng: &ChaCha8Rng) {
        self.rng_position = rng.get_word_pos().to_string();
    }
}
