use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::content::ordered::OrderedEntries;
use crate::module::{EntryMethod, ModuleId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Timing {
    CurrentTurn,
    NextTurn,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub target: String,
    pub timing: Timing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDef {
    pub handler: String,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub args: Value,
    #[serde(default)]
    pub transitions: BTreeMap<String, Transition>,
}

pub const ENTRY_OPEN_QUESTION: &str = "open_question_entry";
pub const ENTRY_PROPOSAL: &str = "proposal_entry";
pub const ENTRY_OTHER: &str = "other_entry";

pub fn entry_point_name(method: EntryMethod) -> &'static str {
    match method {
        EntryMethod::OpenQuestion => ENTRY_OPEN_QUESTION,
        EntryMethod::TopicProposal => ENTRY_PROPOSAL,
        EntryMethod::Other => ENTRY_OTHER,
    }
}

/// A flow file as written on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowFile {
    #[serde(default = "one")]
    pub schema_version: u32,
    pub module: ModuleId,
    pub states: OrderedEntries<StateDef>,
    pub entry_points: BTreeMap<String, String>,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "defect", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FlowDefect {
    Duplicate { state: String },
    BadStateId { state: String },
    Dangling { state: String, transition: String, target: String },
    MissingEntry { entry: String },
    UnknownEntry { entry: String, target: String },
    Unreachable { state: String },
    CurrentTurnCycle { states: Vec<String> },
    UnknownHandler { state: String, handler: String },
}

impl fmt::Display for FlowDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Duplicate { state } => write!(f, "state `{state}` defined twice"),
            Self::BadStateId { state } => write!(f, "state id `{state}` is not `module.flow.state` under this module"),
            Self::Dangling { state, transition, target } => {
                write!(f, "`{state}` transition `{transition}` targets missing state `{target}`")
            }
            Self::MissingEntry { entry } => write!(f, "missing entry point `{entry}`"),
            Self::UnknownEntry { entry, target } => write!(f, "entry point `{entry}` targets missing state `{target}`"),
            Self::Unreachable { state } => write!(f, "state `{state}` is unreachable"),
            Self::CurrentTurnCycle { states } => write!(f, "current-turn cycle through {}", states.join(" -> ")),
            Self::UnknownHandler { state, handler } => write!(f, "state `{state}` uses unknown handler `{handler}`"),
        }
    }
}

/// A validated flow.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowDefinition {
    pub module: ModuleId,
    pub states: BTreeMap<String, StateDef>,
    pub entry_points: BTreeMap<String, String>,
}

impl FlowDefinition {
    /// Builds a flow after structural validation; `known_handler` screens handler names.
    pub fn from_file(file: &FlowFile, known_handler: &dyn Fn(&str) -> bool) -> Result<Self, Vec<FlowDefect>> {
        let mut defects = validate_flow(file);
        for (id, def) in file.states.iter() {
            if !known_handler(&def.handler) {
                defects.push(FlowDefect::UnknownHandler { state: id.clone(), handler: def.handler.clone() });
            }
        }
        if !defects.is_empty() {
            return Err(defects);
        }
        Ok(Self::from_file_unchecked(file))
    }

    /// Skips validation. Later duplicate definitions overwrite earlier ones.
    pub fn from_file_unchecked(file: &FlowFile) -> Self {
        Self {
            module: file.module.clone(),
            states: file.states.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            entry_points: file.entry_points.clone(),
        }
    }

    pub fn entry(&self, name: &str) -> Option<&str> {
        self.entry_points.get(name).map(String::as_str)
    }
}

fn valid_state_id(module: &ModuleId, id: &str) -> bool {
    let parts: Vec<&str> = id.split('.').collect();
    parts.len() == 3 && parts[0] == module.slug() && parts.iter().all(|p| !p.is_empty())
}

/// Structural defects of a flow file; empty means the flow is safe to run.
pub fn validate_flow(file: &FlowFile) -> Vec<FlowDefect> {
    let mut defects = Vec::new();
    for state in file.states.duplicates() {
        defects.push(FlowDefect::Duplicate { state });
    }
    let states: BTreeMap<&str, &StateDef> = file.states.iter().map(|(k, v)| (k.as_str(), v)).collect();
    for id in states.keys() {
        if !valid_state_id(&file.module, id) {
            defects.push(FlowDefect::BadStateId { state: id.to_string() });
        }
    }
    for (id, def) in &states {
        for (name, t) in &def.transitions {
            if !states.contains_key(t.target.as_str()) {
                defects.push(FlowDefect::Dangling {
                    state: id.to_string(),
                    transition: name.clone(),
                    target: t.target.clone(),
                });
            }
        }
    }
    let mut roots = Vec::new();
    for entry in [ENTRY_OPEN_QUESTION, ENTRY_PROPOSAL, ENTRY_OTHER] {
        match file.entry_points.get(entry) {
            None => defects.push(FlowDefect::MissingEntry { entry: entry.to_string() }),
            Some(target) if !states.contains_key(target.as_str()) => {
                defects.push(FlowDefect::UnknownEntry { entry: entry.to_string(), target: target.clone() })
            }
            Some(target) => roots.push(target.as_str()),
        }
    }
    for (entry, target) in &file.entry_points {
        if ![ENTRY_OPEN_QUESTION, ENTRY_PROPOSAL, ENTRY_OTHER].contains(&entry.as_str())
            && !states.contains_key(target.as_str())
        {
            defects.push(FlowDefect::UnknownEntry { entry: entry.clone(), target: target.clone() });
        } else {
            roots.push(target.as_str());
        }
    }

    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut stack: Vec<&str> = roots.into_iter().filter(|r| states.contains_key(r)).collect();
    while let Some(s) = stack.pop() {
        if !seen.insert(s) {
            continue;
        }
        for t in states[s].transitions.values() {
            if states.contains_key(t.target.as_str()) {
                stack.push(t.target.as_str());
            }
        }
    }
    for id in states.keys() {
        if !seen.contains(id) {
            defects.push(FlowDefect::Unreachable { state: id.to_string() });
        }
    }

    for cycle in current_turn_cycles(&states) {
        defects.push(FlowDefect::CurrentTurnCycle { states: cycle });
    }
    defects
}

/// Strongly connected components of the current-turn subgraph that contain a cycle.
fn current_turn_cycles(states: &BTreeMap<&str, &StateDef>) -> Vec<Vec<String>> {
    let edges = |s: &str| -> Vec<&str> {
        states[s]
            .transitions
            .values()
            .filter(|t| t.timing == Timing::CurrentTurn && states.contains_key(t.target.as_str()))
            .map(|t| t.target.as_str())
            .collect()
    };
    // Iterative Tarjan.
    let ids: Vec<&str> = states.keys().copied().collect();
    let pos: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let n = ids.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next = 0;
    let mut out = Vec::new();
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut child)) = work.last_mut() {
            let succ: Vec<usize> = edges(ids[v]).iter().map(|t| pos[t]).collect();
            if *child < succ.len() {
                let w = succ[*child];
                *child += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                let self_loop = comp.len() == 1 && succ.contains(&v);
                if comp.len() > 1 || self_loop {
                    let mut names: Vec<String> = comp.iter().map(|i| ids[*i].to_string()).collect();
                    names.sort();
                    out.push(names);
                }
            }
        }
    }
    out
}
