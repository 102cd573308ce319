use std::io::BufRead;

use convokernel::engine::{Engine, EngineConfig, TurnEvent};

fn main() -> anyhow::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let engine = Engine::in_memory(EngineConfig { seed, ..EngineConfig::default() })?;
    for line in std::io::stdin().lock().lines() {
        let line = line?;
        let (conf, utt) = match line.split_once('|') {
            Some((c, u)) => (c.trim().parse().unwrap_or(0.95), u.to_string()),
            None => (0.95, line),
        };
        let r = engine.handle_turn(&TurnEvent::new("demo", "demo-user", &utt, conf))?;
        println!("USER: {utt}\nBOT:  {}\n      [{} {:?} {:?} {:?}]", r.text, r.trace.selected_module, r.trace.reason, r.trace.detected_intents, r.trace.fsm_path);
    }
    Ok(())
}
