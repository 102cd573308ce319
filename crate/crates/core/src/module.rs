use std::fmt;

use serde::{Deserialize, Serialize};

/// Uppercase dialog-module identifier, e.g. `MOVIE`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModuleId(String);

impl ModuleId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into().to_uppercase())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Lowercase form used in template keys and file names.
    pub fn slug(&self) -> String {
        self.0.to_lowercase()
    }

    /// How the bot names the topic in speech.
    pub fn display_name(&self) -> String {
        match self.0.as_str() {
            "ANIMAL" => "animals".into(),
            "MOVIE" => "movies".into(),
            "GAME" => "video games".into(),
            "BOOK" => "books".into(),
            "SPORT" => "sports".into(),
            "TECH" => "technology".into(),
            "NEWS" => "the news".into(),
            "DAILY_LIFE" => "daily life".into(),
            "OUTDOOR" => "the outdoors".into(),
            other => other.to_lowercase().replace('_', " "),
        }
    }
}

impl fmt::Display for ModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ModuleId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

macro_rules! module_ids {
    ($($name:ident),* $(,)?) => {
        impl ModuleId {
            $(
                #[allow(non_snake_case)]
                pub fn $name() -> Self {
                    Self(stringify!($name).to_string())
                }
            )*
        }
    };
}

module_ids!(
    GREETING, MOVIE, MUSIC, GAME, FOOD, NEWS, FASHION, DAILY_LIFE, OUTDOOR, COMFORT, ANIMAL,
    SPORT, BOOK, TRAVEL, TECH, FUNCTIONAL, TRANSITION, RETRIEVAL,
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModuleState {
    Continue,
    Unclear,
    Stop,
}

/// How a module session began.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntryMethod {
    OpenQuestion,
    TopicProposal,
    Other,
}

impl EntryMethod {
    pub const ALL: [EntryMethod; 3] = [Self::OpenQuestion, Self::TopicProposal, Self::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::OpenQuestion => "OPEN_QUESTION",
            Self::TopicProposal => "TOPIC_PROPOSAL",
            Self::Other => "OTHER",
        }
    }
}
