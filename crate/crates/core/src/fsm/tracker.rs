use std::collections::BTreeMap;

use rand::RngCore;
use serde_json::Value;

use crate::adaptation::{Gender, OpenQuestionCategory, UserProfile};
use crate::content::Content;
use crate::dialog::GlobalAttributes;
use crate::error::FlowError;
use crate::module::{EntryMethod, ModuleId, ModuleState};
use crate::nlg::{BagSet, Slots};
use crate::nlu::{Annotation, DialogAct, FineGrainIntent};

/// Result of a scope read. Absence is explicit rather than a default value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lookup<'a> {
    Absent,
    Present(&'a Value),
}

impl<'a> Lookup<'a> {
    pub fn is_absent(&self) -> bool {
        matches!(self, Self::Absent)
    }

    pub fn value(&self) -> Option<&'a Value> {
        match self {
            Self::Absent => None,
            Self::Present(v) => Some(v),
        }
    }

    pub fn as_str(&self) -> Option<&'a str> {
        self.value().and_then(Value::as_str)
    }
}

/// Profile changes a handler requests; applied by the engine after the turn.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProfileUpdates {
    pub name: Option<String>,
    pub gender: Option<Gender>,
    pub preferred: Vec<ModuleId>,
    pub asked_open: Vec<OpenQuestionCategory>,
}

impl ProfileUpdates {
    pub fn apply(&self, profile: &mut UserProfile) {
        if let Some(n) = &self.name {
            profile.name = Some(n.clone());
        }
        if let Some(g) = self.gender {
            profile.predicted_gender = g;
        }
        for t in &self.preferred {
            profile.add_preferred(t);
        }
        for c in &self.asked_open {
            profile.mark_asked(*c);
        }
    }
}

/// Everything a state handler may read or write during one turn.
pub struct Tracker<'a> {
    pub module: ModuleId,
    pub utterance: &'a str,
    pub nlu: &'a [Annotation],
    pub profile: &'a UserProfile,
    pub content: &'a Content,
    pub previous_bot_text: &'a str,
    pub entry: Option<EntryMethod>,
    pub keywords: Option<String>,
    pub turn_scope: BTreeMap<String, Value>,
    pub conversation_scope: &'a mut BTreeMap<String, Value>,
    pub attrs: &'a mut GlobalAttributes,
    pub bags: &'a mut BagSet,
    pub rng: &'a mut dyn RngCore,
    pub updates: ProfileUpdates,
    pub module_state: ModuleState,
    pub template_keys: Vec<String>,
}

impl<'a> Tracker<'a> {
    pub fn turn(&self, key: &str) -> Lookup<'_> {
        self.turn_scope.get(key).map_or(Lookup::Absent, Lookup::Present)
    }

    pub fn conv(&self, key: &str) -> Lookup<'_> {
        self.conversation_scope.get(key).map_or(Lookup::Absent, Lookup::Present)
    }

    pub fn set_turn(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.turn_scope.insert(key.into(), value.into());
    }

    pub fn set_conv(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.conversation_scope.insert(key.into(), value.into());
    }

    pub fn remove_conv(&mut self, key: &str) -> Option<Value> {
        self.conversation_scope.remove(key)
    }

    /// String list stored in conversation scope; absent reads as empty.
    pub fn conv_list(&self, key: &str) -> Vec<String> {
        self.conv(key)
            .value()
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(|v| v.as_str().map(String::from)).collect())
            .unwrap_or_default()
    }

    pub fn push_conv_list(&mut self, key: &str, item: &str) {
        let mut list = self.conv_list(key);
        if !list.iter().any(|i| i == item) {
            list.push(item.to_string());
        }
        self.set_conv(key, list);
    }

    /// The segment that carries the answer: last one with a fine-grain label.
    pub fn primary(&self) -> Option<&'a Annotation> {
        self.nlu
            .iter()
            .rev()
            .find(|a| a.fine_grain != FineGrainIntent::None)
            .or_else(|| self.nlu.last())
    }

    pub fn fine_grain(&self) -> FineGrainIntent {
        self.primary().map_or(FineGrainIntent::None, |a| a.fine_grain)
    }

    pub fn question(&self) -> Option<&'a Annotation> {
        self.nlu.iter().find(|a| a.dialog_act.is_question())
    }

    pub fn acts(&self) -> Vec<DialogAct> {
        self.nlu.iter().map(|a| a.dialog_act).collect()
    }

    pub fn key_phrases(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for a in self.nlu {
            for k in &a.key_phrases {
                if !out.contains(k) {
                    out.push(k.clone());
                }
            }
        }
        out
    }

    pub fn mentions(&self, phrase: &str) -> bool {
        let p: Vec<&str> = phrase.split_whitespace().collect();
        let u: Vec<&str> = self.utterance.split_whitespace().collect();
        crate::text::contains_phrase(&u, &p).is_some()
    }

    /// Name known for the user, this turn's update first.
    pub fn user_name(&self) -> Option<String> {
        self.updates.name.clone().or_else(|| self.profile.name.clone())
    }

    pub fn gender(&self) -> Gender {
        self.updates.gender.unwrap_or(self.profile.predicted_gender)
    }

    pub fn render(&mut self, key: &str, slots: &Slots) -> Result<String, FlowError> {
        let text = self.content.templates.render(key, slots, self.bags, &mut *self.rng)?;
        self.template_keys.push(key.to_string());
        Ok(text)
    }

    pub fn render_plain(&mut self, key: &str) -> Result<String, FlowError> {
        self.render(key, &Slots::new())
    }

    pub fn render_with(&mut self, key: &str, slots: &[(&str, &str)]) -> Result<String, FlowError> {
        let slots: Slots = slots.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        self.render(key, &slots)
    }

    pub fn stop(&mut self) {
        self.module_state = ModuleState::Stop;
    }
}
