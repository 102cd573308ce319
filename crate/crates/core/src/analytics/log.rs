use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialog::SelectionReason;
use crate::module::{EntryMethod, ModuleId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    LowAsr,
    Profanity,
    Silence,
    Exit,
}

impl Gate {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::LowAsr => "low_asr",
            Self::Profanity => "profanity",
            Self::Silence => "silence",
            Self::Exit => "exit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProposalEvent {
    pub topic: ModuleId,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub conversation_id: String,
    #[serde(default)]
    pub user_id: String,
    pub turn_index: u64,
    #[serde(default)]
    pub timestamp: u64,
    #[serde(default)]
    pub utterance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrected: Option<String>,
    #[serde(default)]
    pub response: String,
    pub module_id: ModuleId,
    pub entry_method: EntryMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<SelectionReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<Gate>,
    #[serde(default)]
    pub proposal_event: Option<ProposalEvent>,
    #[serde(default)]
    pub intents: Vec<String>,
    #[serde(default)]
    pub fsm_path: Vec<String>,
    #[serde(default)]
    pub latency_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub conversation_id: String,
    pub rating: u8,
    #[serde(default)]
    pub timestamp: u64,
}

/// One JSON line of a conversation log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Turn(TurnRecord),
    Rating(RatingRecord),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogError {
    #[error("record has an empty conversation id")]
    EmptyConversation,
    #[error("rating {0} outside 1..=5")]
    Rating(u8),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("conversation `{conversation}`: turn index {found}, expected {expected}")]
    TurnGap { conversation: String, expected: u64, found: u64 },
    #[error("conversation `{0}` rated more than once")]
    DoubleRating(String),
    #[error("conversation `{0}` has turns after its rating")]
    TurnAfterRating(String),
}

impl LogRecord {
    pub fn conversation_id(&self) -> &str {
        match self {
            Self::Turn(t) => &t.conversation_id,
            Self::Rating(r) => &r.conversation_id,
        }
    }

    pub fn validate(&self) -> Result<(), LogError> {
        if self.conversation_id().is_empty() {
            return Err(LogError::EmptyConversation);
        }
        if let Self::Rating(r) = self {
            if !(1..=5).contains(&r.rating) {
                return Err(LogError::Rating(r.rating));
            }
        }
        Ok(())
    }

    /// Validated JSON line without the trailing newline.
    pub fn to_line(&self) -> Result<String, LogError> {
        self.validate()?;
        serde_json::to_string(self).map_err(|e| LogError::Parse { line: 0, message: e.to_string() })
    }

    pub fn rating(conversation_id: impl Into<String>, rating: u8, timestamp: u64) -> Result<Self, LogError> {
        let r = Self::Rating(RatingRecord { conversation_id: conversation_id.into(), rating, timestamp });
        r.validate()?;
        Ok(r)
    }
}

/// Parses JSON lines; blank lines are skipped.
pub fn parse_log(text: &str) -> Result<Vec<LogRecord>, LogError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: LogRecord =
            serde_json::from_str(line).map_err(|e| LogError::Parse { line: n + 1, message: e.to_string() })?;
        rec.validate().map_err(|e| LogError::Parse { line: n + 1, message: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

/// Checks dense turn indices and at most one trailing rating per conversation.
pub fn check_log(records: &[LogRecord]) -> Result<(), LogError> {
    use std::collections::HashMap;
    let mut next: HashMap<&str, u64> = HashMap::new();
    let mut rated: HashMap<&str, bool> = HashMap::new();
    for r in records {
        let id = r.conversation_id();
        match r {
            LogRecord::Turn(t) => {
                if rated.get(id).copied().unwrap_or(false) {
                    return Err(LogError::TurnAfterRating(id.to_string()));
                }
                let expected = next.entry(id).or_insert(0);
                if t.turn_index != *expected {
                    return Err(LogError::TurnGap {
                        conversation: id.to_string(),
                        expected: *expected,
                        found: t.turn_index,
                    });
                }
                *expected += 1;
            }
            LogRecord::Rating(_) => {
                if rated.insert(id, true).is_some() {
                    return Err(LogError::DoubleRating(id.to_string()));
                }
            }
        }
    }
    Ok(())
}
