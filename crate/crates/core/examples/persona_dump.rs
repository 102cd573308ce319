use convokernel::analytics::{run_persona, LogRecord, PersonaScript};
use convokernel::engine::{Engine, EngineConfig};

fn main() -> anyhow::Result<()> {
    let engine = Engine::in_memory(EngineConfig { seed: 7, ..Default::default() })?;
    for path in std::env::args().skip(1) {
        let mut script: PersonaScript = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
        let checked = run_persona(&script, &engine);
        for s in &mut script.steps {
            s.expect = None;
        }
        script.expect_final = None;
        script.conversation_id = Some(format!("dump-{}", script.conversation_id.clone().unwrap_or_default()));
        let run = run_persona(&script, &engine)?;
        println!("== {path}: {}", checked.err().map(|e| e.to_string()).unwrap_or("ok".into()));
        for (rec, resp) in run.log.iter().zip(run.responses.iter()) {
            if let LogRecord::Turn(t) = rec {
                println!("U: {}\nB: {}\n   [{} {:?} {:?} {:?} {:?}]", t.utterance, resp.text, t.module_id, t.reason, t.entry_method, t.proposal_event, t.fsm_path);
            }
        }
    }
    Ok(())
}
