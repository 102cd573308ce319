use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::log::{parse_log, LogRecord};
use crate::engine::{Engine, TurnEvent, TurnResponse};
use crate::error::EngineError;

/// One scripted user turn. `expect` is matched against the bot response
/// that precedes this utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonaStep {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
    pub utterance: String,
    #[serde(default = "full_confidence")]
    pub asr_confidence: f64,
}

fn full_confidence() -> f64 {
    0.95
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonaScript {
    pub name: String,
    #[serde(default)]
    pub user_id: Option<String>,
    #[serde(default)]
    pub conversation_id: Option<String>,
    pub steps: Vec<PersonaStep>,
    /// Pattern for the response to the last step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_final: Option<String>,
    #[serde(default)]
    pub rating: Option<u8>,
}

#[derive(Debug, Error)]
pub enum PersonaError {
    #[error("script `{0}` has no steps")]
    Empty(String),
    #[error("bad pattern at turn {turn}: {message}")]
    Pattern { turn: usize, message: String },
    #[error("turn {turn}: response {actual:?} does not match {expected:?}")]
    Mismatch { turn: usize, expected: String, actual: String },
    #[error("turn {turn}: {source}")]
    Engine {
        turn: usize,
        #[source]
        source: EngineError,
    },
    #[error("log: {0}")]
    Log(String),
}

#[derive(Debug, Clone)]
pub struct PersonaRun {
    pub conversation_id: String,
    pub responses: Vec<TurnResponse>,
    pub log: Vec<LogRecord>,
    pub transcript: String,
}

fn check(pattern: &str, turn: usize, actual: &str) -> Result<(), PersonaError> {
    let re = Regex::new(pattern).map_err(|e| PersonaError::Pattern { turn, message: e.to_string() })?;
    if re.is_match(actual) {
        Ok(())
    } else {
        Err(PersonaError::Mismatch { turn, expected: pattern.to_string(), actual: actual.to_string() })
    }
}

/// Drives the engine through a script and returns its log and transcript.
pub fn run_persona(script: &PersonaScript, engine: &Engine) -> Result<PersonaRun, PersonaError> {
    if script.steps.is_empty() {
        return Err(PersonaError::Empty(script.name.clone()));
    }
    let slug: String =
        script.name.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' }).collect();
    let conversation_id = script.conversation_id.clone().unwrap_or_else(|| format!("persona-{slug}"));
    let user_id = script.user_id.clone().unwrap_or_else(|| format!("user-{slug}"));
    let mut responses: Vec<TurnResponse> = Vec::new();
    let mut transcript = String::new();
    for (turn, step) in script.steps.iter().enumerate() {
        if let Some(p) = &step.expect {
            let prior = responses.last().map(|r| r.text.as_str()).unwrap_or("");
            check(p, turn, prior)?;
        }
        let mut event = TurnEvent::new(&conversation_id, &user_id, &step.utterance, step.asr_confidence);
        event.timestamp = turn as u64 * 1000;
        let response = engine.handle_turn(&event).map_err(|source| PersonaError::Engine { turn, source })?;
        transcript.push_str(&format!("USER: {}\nBOT: {}\n", step.utterance, response.text));
        responses.push(response);
    }
    if let Some(p) = &script.expect_final {
        check(p, script.steps.len(), &responses.last().expect("non-empty").text)?;
    }
    if let Some(r) = script.rating {
        engine
            .rate_at(&conversation_id, r as i64, script.steps.len() as u64 * 1000)
            .map_err(|source| PersonaError::Engine { turn: script.steps.len(), source })?;
        transcript.push_str(&format!("RATING: {r}\n"));
    }
    let text = engine
        .conversation_log(&conversation_id)
        .map_err(|source| PersonaError::Engine { turn: script.steps.len(), source })?;
    let log = parse_log(&text).map_err(|e| PersonaError::Log(e.to_string()))?;
    Ok(PersonaRun { conversation_id, responses, log, transcript })
}
