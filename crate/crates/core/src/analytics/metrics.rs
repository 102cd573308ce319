use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::log::{LogRecord, TurnRecord};
use crate::module::{EntryMethod, ModuleId};

/// Turn-weighted rating statistics for one module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleRating {
    pub total_turns: u64,
    /// Over conversations that touched the module.
    pub avg_turns_per_conversation: f64,
    pub avg_rating: Option<f64>,
    /// Numerator and denominator of `avg_rating`, kept for exact rounding.
    pub rating_weight: u64,
    pub rated_turns: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Acceptance {
    pub accepts: u64,
    pub proposals: u64,
    pub rate: Option<f64>,
}

/// `num / den` rounded half-up to `decimals` places using integer arithmetic.
pub fn round_ratio_half_up(num: u64, den: u64, decimals: u32) -> Option<f64> {
    if den == 0 {
        return None;
    }
    let scale = 10u128.pow(decimals);
    let (n, d) = (num as u128 * scale, den as u128);
    let q = (2 * n + d) / (2 * d);
    Some(q as f64 / scale as f64)
}

/// Half-up rounding of a non-negative real via its shortest decimal form.
pub fn round_half_up(value: f64, decimals: u32) -> f64 {
    let repr = format!("{value}");
    let (int, frac) = repr.split_once('.').unwrap_or((&repr, ""));
    let keep = decimals as usize;
    if frac.len() <= keep || value < 0.0 {
        return (value * 10f64.powi(decimals as i32)).round() / 10f64.powi(decimals as i32);
    }
    let digits: String = format!("{int}{}", &frac[..keep]);
    let mut n: u128 = digits.parse().unwrap_or(0);
    if frac.as_bytes()[keep] >= b'5' {
        n += 1;
    }
    n as f64 / 10f64.powi(decimals as i32)
}

fn turns(logs: &[LogRecord]) -> impl Iterator<Item = &TurnRecord> {
    logs.iter().filter_map(|r| match r {
        LogRecord::Turn(t) => Some(t),
        LogRecord::Rating(_) => None,
    })
}

fn ratings(logs: &[LogRecord]) -> HashMap<&str, u8> {
    logs.iter()
        .filter_map(|r| match r {
            LogRecord::Rating(x) => Some((x.conversation_id.as_str(), x.rating)),
            LogRecord::Turn(_) => None,
        })
        .collect()
}

/// Per-module turn counts and turn-weighted average rating.
pub fn rating_per_turn(logs: &[LogRecord]) -> BTreeMap<ModuleId, ModuleRating> {
    let rated = ratings(logs);
    let mut total: BTreeMap<&ModuleId, u64> = BTreeMap::new();
    let mut convs: BTreeMap<&ModuleId, BTreeSet<&str>> = BTreeMap::new();
    let mut weight: BTreeMap<&ModuleId, (u64, u64)> = BTreeMap::new();
    for t in turns(logs) {
        *total.entry(&t.module_id).or_default() += 1;
        convs.entry(&t.module_id).or_default().insert(&t.conversation_id);
        if let Some(r) = rated.get(t.conversation_id.as_str()) {
            let w = weight.entry(&t.module_id).or_default();
            w.0 += *r as u64;
            w.1 += 1;
        }
    }
    total
        .into_iter()
        .map(|(m, n)| {
            let (num, den) = weight.get(m).copied().unwrap_or((0, 0));
            let stats = ModuleRating {
                total_turns: n,
                avg_turns_per_conversation: n as f64 / convs[m].len() as f64,
                avg_rating: (den > 0).then(|| num as f64 / den as f64),
                rating_weight: num,
                rated_turns: den,
            };
            (m.clone(), stats)
        })
        .collect()
}

/// Whether a module's turns count toward entry spans.
fn is_topic(m: &ModuleId) -> bool {
    *m != ModuleId::FUNCTIONAL() && *m != ModuleId::TRANSITION()
}

/// Module-session entries by entry method.
///
/// A span is a run of turns in one module. FUNCTIONAL turns are transparent;
/// any other module change ends the span, so re-entry counts again.
pub fn entry_distribution(logs: &[LogRecord]) -> BTreeMap<ModuleId, BTreeMap<EntryMethod, u64>> {
    let mut by_conv: BTreeMap<&str, Vec<&TurnRecord>> = BTreeMap::new();
    for t in turns(logs) {
        by_conv.entry(&t.conversation_id).or_default().push(t);
    }
    let mut out: BTreeMap<ModuleId, BTreeMap<EntryMethod, u64>> = BTreeMap::new();
    for list in by_conv.values_mut() {
        list.sort_by_key(|t| t.turn_index);
        let mut current: Option<&ModuleId> = None;
        for t in list.iter() {
            if t.module_id == ModuleId::FUNCTIONAL() {
                continue;
            }
            if current != Some(&t.module_id) && is_topic(&t.module_id) {
                *out.entry(t.module_id.clone()).or_default().entry(t.entry_method).or_default() += 1;
            }
            current = Some(&t.module_id);
        }
    }
    out
}

/// Accepted versus total proposals per topic.
pub fn acceptance_rate(logs: &[LogRecord]) -> BTreeMap<ModuleId, Acceptance> {
    let mut counts: BTreeMap<ModuleId, (u64, u64)> = BTreeMap::new();
    for t in turns(logs) {
        if let Some(p) = &t.proposal_event {
            let c = counts.entry(p.topic.clone()).or_default();
            c.1 += 1;
            if p.accepted {
                c.0 += 1;
            }
        }
    }
    counts
        .into_iter()
        .map(|(m, (a, p))| (m, Acceptance { accepts: a, proposals: p, rate: (p > 0).then(|| a as f64 / p as f64) }))
        .collect()
}
