use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use convokernel::analytics::{check_log, parse_log, Gate, LogRecord};
use convokernel::content::{Content, ContentManager, MemStore, Store};
use convokernel::dialog::SelectionReason;
use convokernel::engine::{Engine, EngineConfig, PipelineConfig, TurnEvent, TurnResponse};
use convokernel::error::{EngineError, StoreError};
use convokernel::fsm::{FlowDefinition, FlowFile};
use convokernel::module::ModuleId;
use convokernel::topics::default_registry;

fn engine(seed: u64) -> Engine {
    Engine::in_memory(EngineConfig { seed, ..Default::default() }).unwrap()
}

fn turn(e: &Engine, conv: &str, utt: &str) -> TurnResponse {
    e.handle_turn(&TurnEvent::new(conv, "u1", utt, 0.9)).unwrap()
}

fn xml_text(ssml: &str) -> String {
    let doc = roxmltree::Document::parse(ssml).expect("well-formed ssml");
    doc.descendants().filter(|n| n.is_text()).filter_map(|n| n.text()).collect()
}

const SCRIPT: [&str; 8] = [
    "hi",
    "my name is sarah",
    "i like watching movies",
    "frozen",
    "what did you say",
    "i don't know",
    "let's talk about food",
    "pizza",
];

#[test]
fn low_asr_gate_skips_nlu() {
    let e = engine(1);
    turn(&e, "c1", "hi");
    let r = e.handle_turn(&TurnEvent::new("c1", "u1", "what is the weather", 0.1)).unwrap();
    assert_eq!(r.trace.gate, Some(Gate::LowAsr));
    assert!(r.trace.nlu_summary.is_empty());
    assert!(r.trace.detected_intents.is_empty());
    assert_eq!(r.trace.selected_module, ModuleId::new("FUNCTIONAL"));
    let at_threshold = e.handle_turn(&TurnEvent::new("c1", "u1", "what is the weather", 0.30)).unwrap();
    assert_eq!(at_threshold.trace.gate, None);
}

#[test]
fn per_request_threshold_override() {
    let e = engine(1);
    turn(&e, "c1", "hi");
    let strict = PipelineConfig { asr_confidence_threshold: 0.95, ..Default::default() };
    let r = e.handle_turn_with(&TurnEvent::new("c1", "u1", "my name is sarah", 0.9), &strict).unwrap();
    assert_eq!(r.trace.gate, Some(Gate::LowAsr));
}

#[test]
fn profanity_gate_skips_nlu() {
    let e = engine(1);
    turn(&e, "c1", "hi");
    let r = turn(&e, "c1", "this is a damn mess");
    assert_eq!(r.trace.gate, Some(Gate::Profanity));
    assert!(r.trace.nlu_summary.is_empty());
    assert!(!r.text.to_lowercase().contains("damn"));
}

#[test]
fn protocol_errors_leave_session_untouched() {
    let e = engine(1);
    turn(&e, "c1", "hi");
    let before = e.session("c1").unwrap().unwrap();
    let log_before = e.conversation_log("c1").unwrap();
    for bad in [
        TurnEvent::new("c1", "u1", "hello", 1.5),
        TurnEvent::new("c1", "u1", "hello", f64::NAN),
        TurnEvent::new("c1", "u1", "hello", -0.1),
        TurnEvent::new("c1", "someone-else", "hello", 0.9),
        TurnEvent::new("bad id!", "u1", "hello", 0.9),
        TurnEvent::new("c1", "", "hello", 0.9),
    ] {
        assert!(matches!(e.handle_turn(&bad), Err(EngineError::Protocol(_))), "{bad:?}");
    }
    let bad_threshold = PipelineConfig { asr_confidence_threshold: 2.0, ..Default::default() };
    assert!(e.handle_turn_with(&TurnEvent::new("c1", "u1", "hello", 0.9), &bad_threshold).is_err());
    assert_eq!(e.session("c1").unwrap().unwrap(), before);
    assert_eq!(e.conversation_log("c1").unwrap(), log_before);
}

#[test]
fn rating_rules() {
    let e = engine(1);
    assert!(matches!(e.rate("nobody", 3), Err(EngineError::UnknownConversation(_))));
    turn(&e, "c1", "hi");
    assert!(matches!(e.rate("c1", 0), Err(EngineError::BadRating(0))));
    assert!(matches!(e.rate("c1", 6), Err(EngineError::BadRating(6))));
    e.rate("c1", 4).unwrap();
    assert!(matches!(e.rate("c1", 4), Err(EngineError::AlreadyRated(_))));
    assert!(matches!(e.handle_turn(&TurnEvent::new("c1", "u1", "hi", 0.9)), Err(EngineError::AlreadyRated(_))));
}

#[test]
fn five_turns_give_five_lines_and_a_rating() {
    let e = engine(3);
    for u in &SCRIPT[..5] {
        turn(&e, "c5", u);
    }
    e.rate("c5", 5).unwrap();
    let text = e.conversation_log("c5").unwrap();
    assert_eq!(text.lines().count(), 6);
    let records = parse_log(&text).unwrap();
    check_log(&records).unwrap();
    let turns: Vec<u64> = records
        .iter()
        .filter_map(|r| match r {
            LogRecord::Turn(t) => Some(t.turn_index),
            _ => None,
        })
        .collect();
    assert_eq!(turns, vec![0, 1, 2, 3, 4]);
    assert!(matches!(records.last(), Some(LogRecord::Rating(r)) if r.rating == 5));
    assert_eq!(e.export_logs().unwrap(), text);
}

#[test]
fn malformed_rating_record_is_rejected() {
    assert!(LogRecord::rating("c1", 0, 1).is_err());
    assert!(LogRecord::rating("c1", 6, 1).is_err());
    assert!(LogRecord::rating("", 3, 1).is_err());
    assert!(LogRecord::rating("c1", 3, 1).is_ok());
}

#[test]
fn replay_is_deterministic() {
    let run = |seed| {
        let e = engine(seed);
        SCRIPT.iter().map(|u| turn(&e, "replay", u)).collect::<Vec<_>>()
    };
    let a = run(11);
    let b = run(11);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.text, y.text);
        assert_eq!(x.ssml, y.ssml);
        assert_eq!(x.reprompt_ssml, y.reprompt_ssml);
        assert_eq!(x.trace.fsm_path, y.trace.fsm_path);
        assert_eq!(x.trace.detected_intents, y.trace.detected_intents);
        assert_eq!(x.trace.filler, y.trace.filler);
    }
}

#[test]
fn text_is_stripped_ssml() {
    for seed in 0..5 {
        let e = engine(seed);
        for u in SCRIPT {
            let r = turn(&e, "ssml", u);
            assert_eq!(r.text, xml_text(&r.ssml));
            xml_text(&r.reprompt_ssml);
            if let Some(f) = &r.trace.filler {
                assert!(r.text.starts_with(f.as_str()));
            }
        }
    }
}

#[test]
fn topic_turns_report_fsm_path() {
    let e = engine(2);
    for u in SCRIPT {
        let r = turn(&e, "path", u);
        let m = r.trace.selected_module.as_str();
        if !matches!(m, "FUNCTIONAL" | "TRANSITION") {
            assert!(!r.trace.fsm_path.is_empty(), "{m} {:?}", r.trace);
        }
    }
}

#[test]
fn profile_is_returning_on_second_conversation() {
    let e = engine(1);
    turn(&e, "first", "hi");
    assert!(!e.session("first").unwrap().unwrap().profile.returning);
    turn(&e, "second", "hi");
    assert!(e.session("second").unwrap().unwrap().profile.returning);
}

#[test]
fn trace_endpoint_data() {
    let e = engine(1);
    assert!(matches!(e.trace("missing"), Err(EngineError::UnknownConversation(_))));
    for u in &SCRIPT[..3] {
        turn(&e, "t", u);
    }
    let trace = e.trace("t").unwrap();
    assert_eq!(trace.len(), 3);
    assert_eq!(trace.iter().map(|t| t.turn_index).collect::<Vec<_>>(), vec![0, 1, 2]);
}

#[derive(Default)]
struct Flaky {
    inner: MemStore,
    fail_log: AtomicBool,
    fail_profile: AtomicBool,
}

fn io_error() -> StoreError {
    StoreError::Io(std::io::Error::other("disk unavailable"))
}

impl Store for Flaky {
    fn get(&self, ns: &str, key: &str) -> Result<Option<Vec<u8>>, StoreError> {
        if ns == "profile" && self.fail_profile.load(Ordering::SeqCst) {
            return Err(io_error());
        }
        self.inner.get(ns, key)
    }
    fn put(&self, ns: &str, key: &str, value: &[u8]) -> Result<(), StoreError> {
        if ns == "profile" && self.fail_profile.load(Ordering::SeqCst) {
            return Err(io_error());
        }
        self.inner.put(ns, key, value)
    }
    fn append(&self, ns: &str, key: &str, line: &str) -> Result<(), StoreError> {
        if ns == "log" && self.fail_log.load(Ordering::SeqCst) {
            return Err(io_error());
        }
        self.inner.append(ns, key, line)
    }
    fn list(&self, ns: &str) -> Result<Vec<String>, StoreError> {
        self.inner.list(ns)
    }
}

#[test]
fn log_append_retries_from_buffer() {
    let store = Arc::new(Flaky::default());
    let e = Engine::open(store.clone(), EngineConfig::default()).unwrap();
    turn(&e, "c", "hi");
    store.fail_log.store(true, Ordering::SeqCst);
    turn(&e, "c", "my name is sarah");
    turn(&e, "c", "i like movies");
    assert_eq!(e.conversation_log("c").unwrap().lines().count(), 1);
    store.fail_log.store(false, Ordering::SeqCst);
    turn(&e, "c", "frozen");
    let records = parse_log(&e.conversation_log("c").unwrap()).unwrap();
    assert_eq!(records.len(), 4);
    check_log(&records).unwrap();
}

#[test]
fn profile_io_failure_falls_back_to_memory() {
    let store = Arc::new(Flaky::default());
    store.fail_profile.store(true, Ordering::SeqCst);
    let e = Engine::open(store.clone(), EngineConfig::default()).unwrap();
    let r = turn(&e, "c", "hi");
    assert!(r.text.contains("What's your name?"));
    let p = e.session("c").unwrap().unwrap().profile;
    assert!(!p.returning);
    turn(&e, "c", "my name is sarah");
}

fn cyclic_movie_flow() -> FlowDefinition {
    let file: FlowFile = serde_json::from_value(serde_json::json!({
        "schema_version": 1,
        "module": "MOVIE",
        "states": {
            "movie.loop.a": {
                "handler": "say",
                "args": {"template": "ack_generic"},
                "transitions": {"next": {"target": "movie.loop.b", "timing": "CURRENT_TURN"}}
            },
            "movie.loop.b": {
                "handler": "say",
                "args": {"template": "ack_generic"},
                "transitions": {"next": {"target": "movie.loop.a", "timing": "CURRENT_TURN"}}
            }
        },
        "entry_points": {
            "open_question_entry": "movie.loop.a",
            "proposal_entry": "movie.loop.a",
            "other_entry": "movie.loop.a"
        }
    }))
    .unwrap();
    FlowDefinition::from_file_unchecked(&file)
}

#[test]
fn runtime_cycle_halts_at_chain_cap() {
    let registry = Arc::new(default_registry());
    let mut content = Content::bundled(&registry).unwrap();
    content.flows.insert(ModuleId::new("MOVIE"), cyclic_movie_flow());
    let store: Arc<dyn Store> = Arc::new(MemStore::new());
    let manager = ContentManager::from_content(store.clone(), registry, content);
    let e = Engine::with_content(Arc::new(manager), store, EngineConfig { chain_cap: 8, ..Default::default() }).unwrap();
    turn(&e, "cyc", "hi");
    let r = turn(&e, "cyc", "let's talk about movies");
    assert_eq!(r.trace.reason, Some(SelectionReason::ErrorFallback));
    assert!(r.text.contains("lost my train of thought"), "{}", r.text);
    assert_eq!(r.trace.fsm_path.len(), 8, "{:?}", r.trace.fsm_path);
    assert!(r.trace.error.is_some());
    let next = turn(&e, "cyc", "let's talk about food");
    assert_eq!(next.trace.selected_module, ModuleId::new("FOOD"));
}
