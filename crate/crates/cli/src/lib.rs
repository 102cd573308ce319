//! HTTP turn API and offline tooling for the convokernel engine.

pub mod commands;
pub mod server;
