//! Criterion benchmarks for the convokernel engine. See `benches/`.

use convokernel::engine::TurnEvent;

/// A short mixed conversation used by the turn-latency bench.
pub const SCRIPT: &[&str] = &[
    "hi",
    "my name is alex",
    "i like playing piano and cooking",
    "let's talk about movies",
    "the matrix",
    "yes",
    "no",
    "what do you think about the news",
    "i would rather not say",
    "bye",
];

pub fn script_events(conversation_id: &str) -> Vec<TurnEvent> {
    SCRIPT
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let mut e = TurnEvent::new(conversation_id, "bench-user", u, 0.9);
            e.timestamp = i as u64 * 1000;
            e
        })
        .collect()
}
