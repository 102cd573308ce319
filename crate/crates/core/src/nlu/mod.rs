//! Rule-based annotators. Every function here is pure over its arguments.

mod ellipsis;
mod lexicon;
mod phrases;
mod rules;
mod topics;

use serde::{Deserialize, Serialize};

use crate::module::ModuleId;

pub use ellipsis::{complete_ellipsis, Completion};
pub use lexicon::{GazetteerEntry, GazetteerFile, NluResources};
pub use phrases::{extract_key_phrases, sentiment_score, strip_fillers};
pub use rules::{classify_dialog_act, classify_fine_grain, detect_incomplete, segment_utterance};
pub use topics::detect_topics;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub text: String,
    pub index: usize,
}

impl Segment {
    pub fn new(text: impl Into<String>, index: usize) -> Self {
        Self {
            text: text.into(),
            index,
        }
    }

    pub fn tokens(&self) -> Vec<&str> {
        self.text.split_whitespace().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DialogAct {
    Question,
    Command,
    Opinion,
    Statement,
    OpenQuestionOpinion,
    Answer,
    Other,
}

impl DialogAct {
    pub fn is_question(self) -> bool {
        matches!(self, Self::Question | Self::OpenQuestionOpinion)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FineGrainIntent {
    AnsLike,
    AnsDislike,
    AnsUnknown,
    AnsYes,
    AnsNo,
    AnsInteresting,
    Hesitant,
    NegativeFeeling,
    None,
}

impl FineGrainIntent {
    pub fn is_positive(self) -> bool {
        matches!(self, Self::AnsLike | Self::AnsYes | Self::AnsInteresting)
    }

    pub fn is_negative(self) -> bool {
        matches!(self, Self::AnsDislike | Self::AnsNo)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::AnsLike => "ans_like",
            Self::AnsDislike => "ans_dislike",
            Self::AnsUnknown => "ans_unknown",
            Self::AnsYes => "ans_yes",
            Self::AnsNo => "ans_no",
            Self::AnsInteresting => "ans_interesting",
            Self::Hesitant => "hesitant",
            Self::NegativeFeeling => "negative_feeling",
            Self::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SourceLevel {
    FirstLevelDb,
    SecondLevelDetector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicCandidate {
    pub topic: ModuleId,
    pub confidence: f64,
    pub source_level: SourceLevel,
    pub trigger_phrase: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub segment: Segment,
    pub dialog_act: DialogAct,
    pub fine_grain: FineGrainIntent,
    pub key_phrases: Vec<String>,
    pub sentiment: f64,
    pub topic_candidates: Vec<TopicCandidate>,
    pub incomplete: bool,
}

/// Runs every annotator over each segment of an already-normalized utterance.
pub fn annotate(utterance: &str, res: &NluResources) -> Vec<Annotation> {
    segment_utterance(utterance)
        .into_iter()
        .map(|segment| annotate_segment(segment, res))
        .collect()
}

pub fn annotate_segment(segment: Segment, res: &NluResources) -> Annotation {
    Annotation {
        dialog_act: classify_dialog_act(&segment),
        fine_grain: classify_fine_grain(&segment),
        key_phrases: extract_key_phrases(&segment, res),
        sentiment: sentiment_score(&segment, &res.sentiment),
        topic_candidates: detect_topics(&segment, res),
        incomplete: detect_incomplete(&segment),
        segment,
    }
}
