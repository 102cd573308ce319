pub mod ack;
pub mod adaptation;
pub mod analytics;
pub mod content;
pub mod dialog;
pub mod engine;
pub mod error;
pub mod fsm;
pub mod module;
pub mod nlg;
pub mod nlu;
pub mod phonetic;
pub mod text;
pub mod topics;
