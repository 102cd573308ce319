use std::collections::HashMap;

use serde::Deserialize;

use super::Gender;
use crate::error::ContentError;

#[derive(Debug, Deserialize)]
struct NameRow {
    name: String,
    male_count: u64,
    female_count: u64,
}

/// Name-frequency table: lowercase name to (male, female) counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameDb {
    counts: HashMap<String, (u64, u64)>,
}

impl NameDb {
    pub fn from_csv(text: &str) -> Result<Self, ContentError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut counts = HashMap::new();
        let mut errors = Vec::new();
        for (line, row) in reader.deserialize::<NameRow>().enumerate() {
            match row {
                Ok(r) if r.name.is_empty() => errors.push(format!("row {}: empty name", line + 2)),
                Ok(r) => {
                    let entry = counts.entry(r.name.to_lowercase()).or_insert((0, 0));
                    entry.0 += r.male_count;
                    entry.1 += r.female_count;
                }
                Err(e) => errors.push(format!("row {}: {e}", line + 2)),
            }
        }
        if errors.is_empty() {
            Ok(Self { counts })
        } else {
            Err(ContentError::Invalid {
                kind: "NAME_DB".into(),
                errors,
            })
        }
    }

    pub fn insert(&mut self, name: &str, male: u64, female: u64) {
        self.counts.insert(name.to_lowercase(), (male, female));
    }

    pub fn counts(&self, name: &str) -> Option<(u64, u64)> {
        self.counts.get(&name.trim().to_lowercase()).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.counts(name).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, (u64, u64))> {
        self.counts.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Majority gender when its share of all occurrences reaches `share`.
    pub fn predict(&self, name: &str, share: f64) -> Gender {
        let Some((m, f)) = self.counts(name) else {
            return Gender::Unknown;
        };
        let total = (m + f) as f64;
        if total == 0.0 {
            Gender::Unknown
        } else if m as f64 / total >= share {
            Gender::Male
        } else if f as f64 / total >= share {
            Gender::Female
        } else {
            Gender::Unknown
        }
    }
}
