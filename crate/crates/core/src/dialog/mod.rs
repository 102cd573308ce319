//! Intent classification, module selection and error fallback.

mod intents;
mod selector;

use serde::{Deserialize, Serialize};

pub use intents::{classify_intents, Intent, IntentClass, IntentContext, Polarity};
pub use selector::{
    select_module, GlobalAttributes, PreviousTurn, SelectionReason, SelectorContext, SelectorDecision,
};

use crate::nlu::FineGrainIntent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorScope {
    Module,
    System,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FallbackResponse {
    pub template_key: String,
    pub reprompt_key: String,
}

pub const SYSTEM_FALLBACK_KEY: &str = "error_system";
pub const REPROMPT_KEY: &str = "reprompt_default";

/// Fallback template keys for a failed turn.
///
/// Module failures get an intent-matched reply when the user's fine-grain
/// intent has one; everything else gets the system apology.
pub fn error_fallback(fine_grain: FineGrainIntent, scope: ErrorScope) -> FallbackResponse {
    let template_key = match (scope, fine_grain) {
        (ErrorScope::Module, FineGrainIntent::AnsLike) => "error_ans_like",
        (ErrorScope::Module, FineGrainIntent::AnsDislike) => "error_ans_dislike",
        (ErrorScope::Module, FineGrainIntent::AnsYes) => "error_ans_yes",
        (ErrorScope::Module, FineGrainIntent::AnsNo) => "error_ans_no",
        (ErrorScope::Module, FineGrainIntent::AnsInteresting) => "error_ans_interesting",
        _ => SYSTEM_FALLBACK_KEY,
    };
    FallbackResponse {
        template_key: template_key.to_string(),
        reprompt_key: REPROMPT_KEY.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fallback_keys() {
        assert_eq!(error_fallback(FineGrainIntent::AnsLike, ErrorScope::Module).template_key, "error_ans_like");
        assert_eq!(error_fallback(FineGrainIntent::AnsLike, ErrorScope::System).template_key, SYSTEM_FALLBACK_KEY);
        assert_eq!(error_fallback(FineGrainIntent::None, ErrorScope::Module).template_key, SYSTEM_FALLBACK_KEY);
        assert_eq!(error_fallback(FineGrainIntent::None, ErrorScope::Module).reprompt_key, REPROMPT_KEY);
    }
}
