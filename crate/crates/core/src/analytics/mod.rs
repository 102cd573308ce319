//! Evaluation metrics over conversation logs, report rendering, and
//! scripted persona runs.

mod log;
mod metrics;
mod persona;
mod report;

pub use log::{check_log, parse_log, Gate, LogError, LogRecord, ProposalEvent, RatingRecord, TurnRecord};
pub use metrics::{
    acceptance_rate, entry_distribution, rating_per_turn, round_half_up, round_ratio_half_up, Acceptance,
    ModuleRating,
};
pub use persona::{run_persona, PersonaError, PersonaRun, PersonaScript, PersonaStep};
pub use report::{render_report, ReportFormat, ReportKind};
