use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::bag::ShuffleBag;
use crate::content::ordered::OrderedEntries;
use crate::error::NlgError;

/// Slot values for one render call.
pub type Slots = BTreeMap<String, String>;

/// Per-conversation shuffle-bag state, keyed by template key.
pub type BagSet = BTreeMap<String, ShuffleBag>;

/// On-disk form of one template entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateSpec {
    pub surfaces: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, Value>,
}

/// A template file: `{key: {surfaces: [...], metadata: {...}}}`, parsed with
/// duplicate keys preserved so they can be reported.
pub type TemplateFile = OrderedEntries<TemplateSpec>;

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub key: String,
    pub surfaces: Vec<String>,
    pub metadata: BTreeMap<String, Value>,
    slots: BTreeSet<String>,
}

impl Template {
    pub fn slots(&self) -> &BTreeSet<String> {
        &self.slots
    }
}

fn slot_pattern() -> &'static Regex {
    static RE: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([a-z_][a-z0-9_]*)\}").expect("static regex"))
}

fn slots_of(surface: &str) -> BTreeSet<String> {
    slot_pattern()
        .captures_iter(surface)
        .map(|c| c[1].to_string())
        .collect()
}

/// The merged, immutable template store.
#[derive(Debug, Clone, Default)]
pub struct TemplateStore {
    templates: HashMap<String, Template>,
}

impl TemplateStore {
    /// Merges template groups into one keyed store. Any key defined twice,
    /// within a group or across groups, is fatal.
    pub fn from_groups<'a, I>(groups: I) -> Result<Self, NlgError>
    where
        I: IntoIterator<Item = (&'a str, &'a TemplateFile)>,
    {
        let mut templates: HashMap<String, Template> = HashMap::new();
        let mut origin: HashMap<String, String> = HashMap::new();
        for (group, file) in groups {
            for (key, spec) in file.iter() {
                if let Some(first) = origin.get(key) {
                    return Err(NlgError::DuplicateKey {
                        key: key.clone(),
                        first: first.clone(),
                        second: group.to_string(),
                    });
                }
                let template = Self::build(key, spec)?;
                origin.insert(key.clone(), group.to_string());
                templates.insert(key.clone(), template);
            }
        }
        Ok(Self { templates })
    }

    fn build(key: &str, spec: &TemplateSpec) -> Result<Template, NlgError> {
        let first = spec
            .surfaces
            .first()
            .ok_or_else(|| NlgError::EmptyTemplate(key.to_string()))?;
        let slots = slots_of(first);
        for surface in &spec.surfaces[1..] {
            if slots_of(surface) != slots {
                return Err(NlgError::InconsistentSlots {
                    key: key.to_string(),
                    surface: surface.clone(),
                });
            }
        }
        Ok(Template {
            key: key.to_string(),
            surfaces: spec.surfaces.clone(),
            metadata: spec.metadata.clone(),
            slots,
        })
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.templates.contains_key(key)
    }

    pub fn get(&self, key: &str) -> Result<&Template, NlgError> {
        self.templates
            .get(key)
            .ok_or_else(|| NlgError::UnknownKey(key.to_string()))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }

    pub fn template_metadata(&self, key: &str) -> Result<&BTreeMap<String, Value>, NlgError> {
        Ok(&self.get(key)?.metadata)
    }

    /// Draws a surface for `key` through its shuffle bag and fills slots.
    pub fn render<R: Rng + ?Sized>(
        &self,
        key: &str,
        slots: &Slots,
        bags: &mut BagSet,
        rng: &mut R,
    ) -> Result<String, NlgError> {
        let template = self.get(key)?;
        if let Some(missing) = template.slots.iter().find(|s| !slots.contains_key(*s)) {
            return Err(NlgError::MissingSlot {
                key: key.to_string(),
                slot: missing.clone(),
            });
        }
        let index = bags
            .entry(key.to_string())
            .or_default()
            .draw(template.surfaces.len(), rng);
        Ok(fill(&template.surfaces[index], slots))
    }
}

fn fill(surface: &str, slots: &Slots) -> String {
    slot_pattern()
        .replace_all(surface, |c: &regex::Captures<'_>| {
            slots.get(&c[1]).cloned().unwrap_or_default()
        })
        .into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn store(json: &str) -> Result<TemplateStore, NlgError> {
        let file: TemplateFile = serde_json::from_str(json).unwrap();
        TemplateStore::from_groups([("test", &file)])
    }

    #[test]
    fn substitutes_slots() {
        let s = store(r#"{"ask_seen": {"surfaces": ["Have you seen {movie}?"]}}"#).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let slots = Slots::from([("movie".into(), "Up".into())]);
        let out = s.render("ask_seen", &slots, &mut BagSet::new(), &mut rng).unwrap();
        assert_eq!(out, "Have you seen Up?");
    }

    #[test]
    fn unknown_key_and_missing_slot_are_errors() {
        let s = store(r#"{"ask_seen": {"surfaces": ["Have you seen {movie}?"]}}"#).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut bags = BagSet::new();
        assert!(matches!(
            s.render("nope", &Slots::new(), &mut bags, &mut rng),
            Err(NlgError::UnknownKey(k)) if k == "nope"
        ));
        assert!(matches!(
            s.render("ask_seen", &Slots::new(), &mut bags, &mut rng),
            Err(NlgError::MissingSlot { slot, .. }) if slot == "movie"
        ));
    }

    #[test]
    fn duplicate_key_within_a_file_is_fatal() {
        let err = store(r#"{"a": {"surfaces": ["x"]}, "a": {"surfaces": ["y"]}}"#).unwrap_err();
        assert!(matches!(err, NlgError::DuplicateKey { key, .. } if key == "a"));
    }

    #[test]
    fn duplicate_key_across_groups_is_fatal() {
        let a: TemplateFile = serde_json::from_str(r#"{"k": {"surfaces": ["x"]}}"#).unwrap();
        let b: TemplateFile = serde_json::from_str(r#"{"k": {"surfaces": ["y"]}}"#).unwrap();
        let err = TemplateStore::from_groups([("a", &a), ("b", &b)]).unwrap_err();
        assert!(matches!(err, NlgError::DuplicateKey { first, second, .. } if first == "a" && second == "b"));
    }

    #[test]
    fn inconsistent_slots_rejected() {
        let err = store(r#"{"a": {"surfaces": ["{x}", "{y}"]}}"#).unwrap_err();
        assert!(matches!(err, NlgError::InconsistentSlots { .. }));
    }

    #[test]
    fn metadata_round_trips() {
        let json = r#"{"musician_taylor": {"surfaces": ["{name} writes great songs."],
            "metadata": {"kb_id": "Q26876", "spoken_name": "Taylor Swift"}}}"#;
        let s = store(json).unwrap();
        let meta = s.template_metadata("musician_taylor").unwrap();
        assert_eq!(meta["kb_id"], "Q26876");
        assert_eq!(meta["spoken_name"], "Taylor Swift");
        let plain = store(r#"{"a": {"surfaces": ["x"]}}"#).unwrap();
        assert!(plain.template_metadata("a").unwrap().is_empty());
    }
}
