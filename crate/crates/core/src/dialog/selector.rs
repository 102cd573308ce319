use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::intents::{Intent, IntentClass, Polarity};
use crate::module::{ModuleId, ModuleState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SelectionReason {
    StrongIntent,
    ContinuePrevious,
    TopicIntent,
    AcceptProposal,
    ProposeNew,
    Functional,
    ErrorFallback,
}

impl SelectionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::StrongIntent => "STRONG_INTENT",
            Self::ContinuePrevious => "CONTINUE_PREVIOUS",
            Self::TopicIntent => "TOPIC_INTENT",
            Self::AcceptProposal => "ACCEPT_PROPOSAL",
            Self::ProposeNew => "PROPOSE_NEW",
            Self::Functional => "FUNCTIONAL",
            Self::ErrorFallback => "ERROR_FALLBACK",
        }
    }
}

/// Module-to-module handoff fields that survive between turns.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalAttributes {
    pub propose_topic: Option<ModuleId>,
    pub propose_keywords: Option<String>,
    pub pending_open_question: bool,
}

impl GlobalAttributes {
    pub fn clear_proposal(&mut self) {
        self.propose_topic = None;
        self.propose_keywords = None;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreviousTurn {
    pub module: ModuleId,
    pub state: ModuleState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectorDecision {
    pub selected_module: ModuleId,
    pub reason: SelectionReason,
    /// Topic the selection keywords refer to (request or accepted proposal).
    pub keywords: Option<String>,
    /// Proposal that was rejected this turn.
    pub rejected: Option<ModuleId>,
    /// Module the new proposal must skip (the one the user left).
    pub exclude: Option<ModuleId>,
}

impl SelectorDecision {
    fn new(selected_module: ModuleId, reason: SelectionReason) -> Self {
        Self {
            selected_module,
            reason,
            keywords: None,
            rejected: None,
            exclude: None,
        }
    }
}

/// Read-only view of what the selector may pick from.
pub struct SelectorContext<'a> {
    pub registered: &'a BTreeSet<ModuleId>,
    /// Ranking for competing topic candidates, best first.
    pub ranking: &'a [ModuleId],
}

fn rank_of(ranking: &[ModuleId], m: &ModuleId) -> usize {
    ranking.iter().position(|r| r == m).unwrap_or(usize::MAX)
}

/// Priority-ordered module selection.
pub fn select_module(
    intents: &[Intent],
    previous: Option<&PreviousTurn>,
    attrs: &GlobalAttributes,
    ctx: &SelectorContext<'_>,
) -> SelectorDecision {
    if ctx.registered.is_empty() {
        return SelectorDecision::new(ModuleId::RETRIEVAL(), SelectionReason::ErrorFallback);
    }
    if intents.iter().any(|i| i.class() == IntentClass::Functional) {
        return SelectorDecision::new(ModuleId::FUNCTIONAL(), SelectionReason::Functional);
    }

    let request = intents.iter().rev().find_map(|i| match i {
        Intent::TopicRequest { topic, keywords } if ctx.registered.contains(topic) => Some((topic, keywords)),
        _ => None,
    });
    if let Some((topic, keywords)) = request {
        let mut d = SelectorDecision::new(topic.clone(), SelectionReason::StrongIntent);
        d.keywords = Some(keywords.clone());
        return d;
    }
    if intents.iter().any(|i| matches!(i, Intent::TopicSwitch)) {
        let mut d = SelectorDecision::new(ModuleId::TRANSITION(), SelectionReason::ProposeNew);
        d.exclude = previous.map(|p| p.module.clone());
        d.rejected = attrs.propose_topic.clone();
        return d;
    }

    if let Some(p) = previous {
        if p.state == ModuleState::Continue && ctx.registered.contains(&p.module) {
            return SelectorDecision::new(p.module.clone(), SelectionReason::ContinuePrevious);
        }
    }

    let proposed = attrs.propose_topic.as_ref();
    let preference = |polarity: Polarity| {
        intents.iter().any(|i| {
            matches!(i, Intent::TopicPreference { topic, polarity: p } if Some(topic) == proposed && *p == polarity)
        })
    };
    let rejected = preference(Polarity::Negative).then(|| proposed.cloned()).flatten();
    let accepted = !preference(Polarity::Negative) && preference(Polarity::Positive);
    let stopped = previous.filter(|p| p.state == ModuleState::Stop).map(|p| &p.module);

    let empty = String::new();
    let mut candidates: Vec<(&ModuleId, &String)> = Vec::new();
    for i in intents {
        if let Intent::TopicIntent { candidates: c, keywords } = i {
            for (n, t) in c.iter().enumerate() {
                let kw = keywords.get(n).unwrap_or(&empty);
                if ctx.registered.contains(t) && Some(t) != stopped && Some(t) != rejected.as_ref() {
                    candidates.push((t, kw));
                }
            }
        }
    }
    if !candidates.is_empty() {
        if let Some(p) = previous.filter(|p| p.state == ModuleState::Unclear) {
            if candidates.iter().any(|(t, _)| **t == p.module) {
                let mut d = SelectorDecision::new(p.module.clone(), SelectionReason::ContinuePrevious);
                d.rejected = rejected;
                return d;
            }
        }
        if let Some(pt) = proposed.filter(|_| accepted) {
            if candidates.iter().any(|(t, _)| *t == pt) {
                let mut d = SelectorDecision::new(pt.clone(), SelectionReason::AcceptProposal);
                d.keywords = attrs.propose_keywords.clone();
                return d;
            }
        }
        let best = candidates
            .iter()
            .enumerate()
            .min_by_key(|(n, (t, _))| (rank_of(ctx.ranking, t), *n))
            .map(|(_, c)| *c)
            .expect("non-empty");
        let mut d = SelectorDecision::new(best.0.clone(), SelectionReason::TopicIntent);
        d.keywords = Some(best.1.clone()).filter(|k| !k.is_empty());
        d.rejected = rejected;
        return d;
    }

    if let Some(pt) = proposed.filter(|_| accepted) {
        if ctx.registered.contains(pt) && Some(pt) != stopped {
            let mut d = SelectorDecision::new(pt.clone(), SelectionReason::AcceptProposal);
            d.keywords = attrs.propose_keywords.clone();
            return d;
        }
    }

    if let Some(p) = previous.filter(|p| p.state == ModuleState::Unclear && ctx.registered.contains(&p.module)) {
        let mut d = SelectorDecision::new(p.module.clone(), SelectionReason::ContinuePrevious);
        d.rejected = rejected;
        return d;
    }
    let mut d = SelectorDecision::new(ModuleId::TRANSITION(), SelectionReason::ProposeNew);
    d.rejected = rejected;
    d.exclude = stopped.cloned();
    d
}
