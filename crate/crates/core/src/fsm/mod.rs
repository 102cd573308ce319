//! Per-module finite-state flows: schema, validation and the turn runtime.

mod builtins;
mod flow;
mod runtime;
mod tracker;

pub use builtins::{acknowledge_turn, ask_open_question, register_builtins};
pub use flow::{
    entry_point_name, validate_flow, FlowDefect, FlowDefinition, FlowFile, StateDef, Timing, Transition,
    ENTRY_OPEN_QUESTION, ENTRY_OTHER, ENTRY_PROPOSAL,
};
pub use runtime::{
    run_turn, FlowFailure, HandlerOutput, HandlerRegistry, StateCtx, StateHandler, TurnRun, DEFAULT_CHAIN_CAP,
};
pub use tracker::{Lookup, ProfileUpdates, Tracker};
