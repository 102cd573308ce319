use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::Value;

use super::flow::{FlowDefinition, Timing, Transition};
use super::tracker::Tracker;
use crate::error::FlowError;
use crate::module::ModuleState;

pub const DEFAULT_CHAIN_CAP: usize = 8;

/// What one state contributes to the turn.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HandlerOutput {
    pub text: Option<String>,
    pub transition: Option<String>,
}

impl HandlerOutput {
    pub fn say(text: impl Into<String>) -> Self {
        Self { text: Some(text.into()), transition: None }
    }

    pub fn silent() -> Self {
        Self::default()
    }

    pub fn go(name: impl Into<String>) -> Self {
        Self { text: None, transition: Some(name.into()) }
    }

    pub fn then(mut self, name: impl Into<String>) -> Self {
        self.transition = Some(name.into());
        self
    }

    pub fn with_text(mut self, text: Option<String>) -> Self {
        self.text = text;
        self
    }
}

pub struct StateCtx<'a> {
    pub state: &'a str,
    pub args: &'a Value,
    pub transitions: &'a BTreeMap<String, Transition>,
}

impl StateCtx<'_> {
    pub fn arg_str(&self, name: &str) -> Option<&str> {
        self.args.get(name).and_then(Value::as_str)
    }

    pub fn arg_bool(&self, name: &str) -> bool {
        self.args.get(name).and_then(Value::as_bool).unwrap_or(false)
    }

    pub fn has(&self, transition: &str) -> bool {
        self.transitions.contains_key(transition)
    }

    /// `preferred` if this state declares it, else `next` if declared, else none.
    pub fn pick(&self, preferred: &str) -> Option<String> {
        [preferred, "next"].into_iter().find(|t| self.has(t)).map(String::from)
    }

    pub fn fail(&self, message: impl Into<String>) -> FlowError {
        FlowError::Handler { state: self.state.to_string(), message: message.into() }
    }
}

pub trait StateHandler: Send + Sync {
    fn handle(&self, ctx: &StateCtx<'_>, tracker: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError>;
}

impl<F> StateHandler for F
where
    F: Fn(&StateCtx<'_>, &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> + Send + Sync,
{
    fn handle(&self, ctx: &StateCtx<'_>, tracker: &mut Tracker<'_>) -> Result<HandlerOutput, FlowError> {
        self(ctx, tracker)
    }
}

/// Handler kinds by name.
#[derive(Clone, Default)]
pub struct HandlerRegistry {
    handlers: BTreeMap<String, Arc<dyn StateHandler>>,
}

impl HandlerRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: impl Into<String>, handler: impl StateHandler + 'static) {
        self.handlers.insert(name.into(), Arc::new(handler));
    }

    pub fn get(&self, name: &str) -> Option<&Arc<dyn StateHandler>> {
        self.handlers.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.handlers.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.handlers.keys().map(String::as_str)
    }
}

impl std::fmt::Debug for HandlerRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.handlers.keys()).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurnRun {
    pub text: String,
    pub path: Vec<String>,
    /// State to resume from next turn; `None` once the module stops.
    pub next_state: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowFailure {
    pub error: FlowError,
    pub path: Vec<String>,
}

/// Runs states from `start` until a next-turn transition, a stop, or the cap.
pub fn run_turn(
    flow: &FlowDefinition,
    start: &str,
    registry: &HandlerRegistry,
    tracker: &mut Tracker<'_>,
    chain_cap: usize,
) -> Result<TurnRun, FlowFailure> {
    let mut path: Vec<String> = Vec::new();
    let mut fragments: Vec<String> = Vec::new();
    let mut state = start.to_string();
    let fail = |error: FlowError, path: &Vec<String>| FlowFailure { error, path: path.clone() };
    loop {
        if path.len() >= chain_cap {
            return Err(fail(FlowError::ChainCapExceeded { cap: chain_cap, state }, &path));
        }
        let Some(def) = flow.states.get(&state) else {
            return Err(fail(FlowError::UnknownState(state), &path));
        };
        path.push(state.clone());
        let Some(handler) = registry.get(&def.handler) else {
            return Err(fail(
                FlowError::Handler { state: state.clone(), message: format!("unknown handler `{}`", def.handler) },
                &path,
            ));
        };
        let ctx = StateCtx { state: &state, args: &def.args, transitions: &def.transitions };
        let out = handler.handle(&ctx, tracker).map_err(|e| fail(e, &path))?;
        if let Some(t) = out.text.filter(|t| !t.trim().is_empty()) {
            fragments.push(t.trim().to_string());
        }
        if tracker.module_state == ModuleState::Stop {
            return Ok(TurnRun { text: fragments.join(" "), path, next_state: None });
        }
        let Some(name) = out.transition else {
            return Ok(TurnRun { text: fragments.join(" "), path, next_state: Some(state) });
        };
        let Some(t) = def.transitions.get(&name) else {
            return Err(fail(FlowError::UnknownTransition { state, name }, &path));
        };
        match t.timing {
            Timing::CurrentTurn => state = t.target.clone(),
            Timing::NextTurn => {
                return Ok(TurnRun { text: fragments.join(" "), path, next_state: Some(t.target.clone()) });
            }
        }
    }
}
