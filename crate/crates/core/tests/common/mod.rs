#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use convokernel::ack::ResponseGenerator;
use convokernel::adaptation::{select_next_topic, Gender, TopicOrderTable, UserProfile};
use convokernel::analytics::{
    acceptance_rate, rating_per_turn, round_ratio_half_up, run_persona, LogRecord, PersonaScript, ProposalEvent,
    TurnRecord,
};
use convokernel::content::Content;
use convokernel::dialog::{select_module, GlobalAttributes, Intent, PreviousTurn, SelectionReason, SelectorContext};
use convokernel::engine::{Engine, EngineConfig};
use convokernel::fsm::{validate_flow, FlowDefect, FlowFile};
use convokernel::module::{EntryMethod, ModuleId};
use convokernel::nlg::{ssml_postprocess, ProsodyConfig, ShuffleBag};
use convokernel::nlu::Segment;
use convokernel::phonetic::phonetic_encode;
use convokernel::topics::default_registry;

pub type Check = Result<String, String>;

pub fn fixture(path: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(path)
}

pub fn bundled_content() -> Content {
    Content::bundled(&default_registry()).expect("bundled content")
}

fn ids(list: &[String]) -> Vec<ModuleId> {
    list.iter().map(ModuleId::new).collect()
}

#[derive(Deserialize)]
struct SelectorTable {
    registered: Vec<String>,
    ranking: Vec<String>,
    cases: Vec<SelectorCase>,
}

#[derive(Deserialize)]
struct SelectorCase {
    name: String,
    intents: Vec<Intent>,
    previous: Option<PreviousTurn>,
    proposed: Option<String>,
    expected: Expected,
}

#[derive(Deserialize)]
struct Expected {
    module: String,
    reason: SelectionReason,
}

pub fn selector_decision_table() -> Check {
    let text = std::fs::read_to_string(fixture("selector_table.json")).map_err(|e| e.to_string())?;
    let table: SelectorTable = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let registered: BTreeSet<ModuleId> = ids(&table.registered).into_iter().collect();
    let ranking = ids(&table.ranking);
    let ctx = SelectorContext { registered: &registered, ranking: &ranking };
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut states = BTreeSet::new();
    for case in &table.cases {
        states.insert(case.previous.as_ref().map(|p| format!("{:?}", p.state)));
        let attrs = GlobalAttributes { propose_topic: case.proposed.as_ref().map(ModuleId::new), ..Default::default() };
        let d = select_module(&case.intents, case.previous.as_ref(), &attrs, &ctx);
        if d.selected_module.as_str() != case.expected.module || d.reason != case.expected.reason {
            failures.push(format!(
                "{}: got {} {:?}, want {} {:?}",
                case.name, d.selected_module, d.reason, case.expected.module, case.expected.reason
            ));
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    if states.len() != 4 {
        return Err(format!("fixture covers {} previous states, want 4", states.len()));
    }
    if !failures.is_empty() {
        return Err(format!("{}/{} cases wrong: {}", failures.len(), table.cases.len(), failures.join("; ")));
    }
    if elapsed >= 1.0 {
        return Err(format!("took {elapsed:.3}s"));
    }
    Ok(format!("{}/{} cases in {:.4}s", table.cases.len(), table.cases.len(), elapsed))
}

/// One rotation episode; returns a description of the first violation.
pub fn rotation_episode(table: &TopicOrderTable, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let all: Vec<ModuleId> = table.unknown.clone();
    let mut profile = UserProfile::new("u");
    profile.predicted_gender = [Gender::Male, Gender::Female, Gender::Unknown][rng.random_range(0..3)];
    let mut preferred = all.clone();
    preferred.shuffle(rng);
    preferred.truncate(rng.random_range(0..=4));
    for p in &preferred {
        profile.add_preferred(p);
    }
    let mut seen: BTreeSet<ModuleId> = profile.used_topics.clone();
    let steps = rng.random_range(1..=3 * all.len());
    for step in 0..steps {
        let before = profile.used_topics.clone();
        let next = select_next_topic(&mut profile, table);
        let exhausted = all.iter().all(|t| before.contains(t));
        if next.reset != exhausted {
            return Err(format!("step {step}: reset={} but exhausted={exhausted}", next.reset));
        }
        if next.reset {
            seen.clear();
        }
        if !seen.insert(next.topic.clone()) {
            return Err(format!("step {step}: {} repeated before exhaustion", next.topic));
        }
        profile.mark_used(&next.topic);
        if rng.random_bool(0.3) {
            // an accepted topic can also surface a new preference
            let extra = all[rng.random_range(0..all.len())].clone();
            profile.add_preferred(&extra);
        }
    }
    Ok(())
}

pub fn topic_rotation(episodes: usize) -> Check {
    let content = bundled_content();
    let mut rng = ChaCha8Rng::seed_from_u64(2020);
    for e in 0..episodes {
        rotation_episode(&content.topic_order, &mut rng).map_err(|m| format!("episode {e}: {m}"))?;
    }
    Ok(format!("{episodes} episodes, no repeats before exhaustion, reset exactly at exhaustion"))
}

/// Accept and proposal counts per topic, with the published two-place ratio.
pub const ACCEPTANCE_TABLE: [(&str, u64, u64, &str); 11] = [
    ("ANIMAL", 4192, 5573, "0.75"),
    ("MUSIC", 1976, 2739, "0.72"),
    ("MOVIE", 4038, 5818, "0.69"),
    ("FOOD", 1332, 2031, "0.66"),
    ("TECH", 665, 1071, "0.62"),
    ("TRAVEL", 629, 1071, "0.59"),
    ("BOOK", 686, 1220, "0.56"),
    ("GAME", 1585, 2930, "0.54"),
    ("NEWS", 371, 795, "0.47"),
    ("SPORT", 1468, 3220, "0.46"),
    ("FASHION", 727, 1804, "0.40"),
];

pub fn turn_record(conv: &str, index: u64, module: &str) -> TurnRecord {
    TurnRecord {
        conversation_id: conv.to_string(),
        user_id: format!("user-{conv}"),
        turn_index: index,
        timestamp: index * 1000,
        utterance: "hello".into(),
        corrected: None,
        response: "hi".into(),
        module_id: ModuleId::new(module),
        entry_method: EntryMethod::Other,
        reason: None,
        gate: None,
        proposal_event: None,
        intents: Vec::new(),
        fsm_path: Vec::new(),
        latency_ms: 1.0,
    }
}

fn proposal_log() -> Vec<LogRecord> {
    let mut logs = Vec::new();
    for (topic, accepts, proposals, _) in ACCEPTANCE_TABLE {
        for n in 0..proposals {
            let conv = format!("{topic}-{n}");
            let mut t = turn_record(&conv, 0, "TRANSITION");
            t.proposal_event = Some(ProposalEvent { topic: ModuleId::new(topic), accepted: n < accepts });
            logs.push(LogRecord::Turn(t));
        }
    }
    logs
}

/// Decimal-string rounding used as an independent check on the integer path.
fn decimal_half_up(num: u64, den: u64) -> String {
    let scaled = num * 1000 / den;
    let (whole, third) = (scaled / 10, scaled % 10);
    let rounded = if third >= 5 { whole + 1 } else { whole };
    format!("{}.{:02}", rounded / 100, rounded % 100)
}

/// Reference aggregation over raw records: linear scans, no shared helpers.
pub fn brute_force_ratings(logs: &[LogRecord]) -> BTreeMap<String, (u64, f64, Option<f64>)> {
    let mut modules: Vec<String> = Vec::new();
    for r in logs {
        if let LogRecord::Turn(t) = r {
            if !modules.contains(&t.module_id.to_string()) {
                modules.push(t.module_id.to_string());
            }
        }
    }
    let mut out = BTreeMap::new();
    for m in modules {
        let mut total = 0u64;
        let mut convs: Vec<&str> = Vec::new();
        let mut sum = 0f64;
        let mut rated = 0u64;
        for r in logs {
            let LogRecord::Turn(t) = r else { continue };
            if t.module_id.as_str() != m {
                continue;
            }
            total += 1;
            if !convs.contains(&t.conversation_id.as_str()) {
                convs.push(&t.conversation_id);
            }
            for q in logs {
                if let LogRecord::Rating(x) = q {
                    if x.conversation_id == t.conversation_id {
                        sum += x.rating as f64;
                        rated += 1;
                    }
                }
            }
        }
        let avg = (rated > 0).then(|| sum / rated as f64);
        out.insert(m, (total, total as f64 / convs.len() as f64, avg));
    }
    out
}

pub fn random_corpus(rng: &mut ChaCha8Rng, conversations: usize) -> Vec<LogRecord> {
    let modules = ["MOVIE", "MUSIC", "ANIMAL", "FOOD", "GAME", "NEWS", "FUNCTIONAL", "TRANSITION"];
    let mut logs = Vec::new();
    for c in 0..conversations {
        let conv = format!("conv-{c}");
        let turns = rng.random_range(1..30);
        for i in 0..turns {
            let m = modules[rng.random_range(0..modules.len())];
            logs.push(LogRecord::Turn(turn_record(&conv, i, m)));
        }
        if rng.random_bool(0.7) {
            logs.push(LogRecord::rating(&conv, rng.random_range(1..=5), turns * 1000).expect("valid rating"));
        }
    }
    logs
}

fn movie_corpus() -> Vec<LogRecord> {
    // 12479 conversations of 7 MOVIE turns, 1123 rated 5 and the rest rated 4
    let mut logs = Vec::new();
    for c in 0..12479u64 {
        let conv = format!("m{c}");
        for i in 0..7 {
            logs.push(LogRecord::Turn(turn_record(&conv, i, "MOVIE")));
        }
        let rating = if c < 1123 { 5 } else { 4 };
        logs.push(LogRecord::rating(&conv, rating, 7000).expect("valid rating"));
    }
    logs
}

pub fn analytics_oracle() -> Check {
    let logs = proposal_log();
    let rates = acceptance_rate(&logs);
    for (topic, accepts, proposals, published) in ACCEPTANCE_TABLE {
        let a = rates.get(&ModuleId::new(topic)).ok_or(format!("{topic} missing"))?;
        if (a.accepts, a.proposals) != (accepts, proposals) {
            return Err(format!("{topic}: counted {}/{}", a.accepts, a.proposals));
        }
        let got = round_ratio_half_up(a.accepts, a.proposals, 2).ok_or("no rate")?;
        if format!("{got:.2}") != published || decimal_half_up(accepts, proposals) != published {
            return Err(format!("{topic}: {got:.2} vs {published}"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let corpus = random_corpus(&mut rng, 300);
    let fast = rating_per_turn(&corpus);
    let slow = brute_force_ratings(&corpus);
    if fast.len() != slow.len() {
        return Err("module sets differ".into());
    }
    for (m, (total, avg_turns, avg)) in &slow {
        let f = &fast[&ModuleId::new(m)];
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
        let avg_ok = match (f.avg_rating, avg) {
            (Some(a), Some(b)) => close(a, *b),
            (None, None) => true,
            _ => false,
        };
        if f.total_turns != *total || !close(f.avg_turns_per_conversation, *avg_turns) || !avg_ok {
            return Err(format!("{m}: {f:?} vs ({total}, {avg_turns}, {avg:?})"));
        }
    }
    let turn_lines = corpus.iter().filter(|r| matches!(r, LogRecord::Turn(_))).count() as u64;
    if fast.values().map(|s| s.total_turns).sum::<u64>() != turn_lines {
        return Err("total turns do not sum to turn lines".into());
    }

    let movie = rating_per_turn(&movie_corpus());
    let m = &movie[&ModuleId::new("MOVIE")];
    let shown = round_ratio_half_up(m.rating_weight, m.rated_turns, 2).ok_or("no movie rating")?;
    if m.total_turns != 87353 || format!("{shown:.2}") != "4.09" {
        return Err(format!("movie: {} turns at {shown:.2}", m.total_turns));
    }
    Ok(format!("11 acceptance ratios exact; {} modules match brute force; MOVIE 87353 turns at 4.09", slow.len()))
}

pub fn ack_goldens() -> Check {
    let content = bundled_content();
    let ack = &content.acknowledger;
    let hobby = "What do you like to do for fun?";
    let dance = ack.acknowledge_statement(&Segment::new("I like to dance", 0), hobby, "Ok,");
    if dance != "Ok, you like to dance." {
        return Err(format!("dance: {dance:?}"));
    }
    let mother = ack.acknowledge_unanswerable_question("What is my mother's name?");
    if mother != "I don't know what your mother's name is." {
        return Err(format!("mother: {mother:?}"));
    }
    let maddie = "who is maddie";
    let rule = ack.acknowledge_unanswerable_question(maddie);
    let generated = content.generator.generate(maddie);
    let chosen = ack.topicality_select(&rule, generated.as_ref(), maddie);
    if generated.is_none() || chosen.text != "I don't know who Maddie is." {
        return Err(format!("maddie: {:?} (generated {generated:?})", chosen.text));
    }
    Ok("dance, mother's name and Maddie goldens match".into())
}

pub fn shuffle_bag(draws: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 2..=10 {
        let mut bag = ShuffleBag::new();
        let mut counts = vec![0usize; n];
        let mut cycle = vec![0usize; n];
        let mut last = None;
        for d in 0..draws {
            let i = bag.draw(n, &mut rng);
            if last == Some(i) {
                return Err(format!("n={n}: immediate repeat at draw {d}"));
            }
            last = Some(i);
            counts[i] += 1;
            cycle[i] += 1;
            if (d + 1) % n == 0 {
                if cycle.iter().any(|&c| c != 1) {
                    return Err(format!("n={n}: cycle ending at draw {d} is not a permutation: {cycle:?}"));
                }
                let k = (d + 1) / n;
                if counts.iter().any(|&c| c != k) {
                    return Err(format!("n={n}: not {k}-fold fair: {counts:?}"));
                }
                cycle.iter_mut().for_each(|c| *c = 0);
            }
        }
    }
    Ok(format!("sizes 2..=10, {draws} draws each"))
}

fn flow_fixture(name: &str) -> Result<FlowFile, String> {
    let text = std::fs::read_to_string(fixture(&format!("flows/{name}.json"))).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| format!("{name}: {e}"))
}

pub fn fsm_safety() -> Check {
    let expect: [(&str, fn(&FlowDefect) -> bool); 4] = [
        ("dangling", |d| matches!(d, FlowDefect::Dangling { .. })),
        ("duplicate", |d| matches!(d, FlowDefect::Duplicate { .. })),
        ("unreachable", |d| matches!(d, FlowDefect::Unreachable { .. })),
        ("current_turn_cycle", |d| matches!(d, FlowDefect::CurrentTurnCycle { .. })),
    ];
    for (name, is) in expect {
        let defects = validate_flow(&flow_fixture(name)?);
        if !defects.iter().any(is) {
            return Err(format!("{name} accepted: {defects:?}"));
        }
    }
    let valid = validate_flow(&flow_fixture("valid")?);
    if !valid.is_empty() {
        return Err(format!("valid fixture rejected: {valid:?}"));
    }
    runtime_cycle()?;
    Ok("4 defective fixtures rejected; runtime cycle halted at 8 states with the error fallback".into())
}

pub fn cyclic_flow_engine(chain_cap: usize) -> Engine {
    use convokernel::content::{ContentManager, MemStore, Store};
    use convokernel::fsm::FlowDefinition;
    use std::sync::Arc;

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
    .expect("cyclic flow json");
    let registry = Arc::new(default_registry());
    let mut content = Content::bundled(&registry).expect("bundled content");
    content.flows.insert(ModuleId::new("MOVIE"), FlowDefinition::from_file_unchecked(&file));
    let store: Arc<dyn Store> = Arc::new(MemStore::new());
    let manager = ContentManager::from_content(store.clone(), registry, content);
    Engine::with_content(Arc::new(manager), store, EngineConfig { chain_cap, ..Default::default() }).expect("engine")
}

fn runtime_cycle() -> Result<(), String> {
    use convokernel::engine::TurnEvent;
    let e = cyclic_flow_engine(8);
    let turn = |u: &str| e.handle_turn(&TurnEvent::new("cycle", "u", u, 0.9)).map_err(|e| e.to_string());
    turn("hi")?;
    let r = turn("let's talk about movies")?;
    if r.trace.reason != Some(SelectionReason::ErrorFallback)
        || r.trace.fsm_path.len() != 8
        || !r.text.contains("lost my train of thought")
    {
        return Err(format!("runtime cycle: {:?} {:?} {:?}", r.trace.reason, r.trace.fsm_path, r.text));
    }
    Ok(())
}

pub fn printable_string(rng: &mut ChaCha8Rng) -> String {
    const EXTRA: &[char] = &['é', 'ß', 'ü', 'ñ', '中', '日', '€', '—', '’', '😀'];
    let len = rng.random_range(0..80);
    (0..len)
        .map(|_| {
            if rng.random_bool(0.9) {
                rng.random_range(0x20u8..0x7f) as char
            } else {
                EXTRA[rng.random_range(0..EXTRA.len())]
            }
        })
        .collect()
}

/// Checks one SSML rendering against an XML parser; returns the violation if any.
pub fn ssml_roundtrip(input: &str, config: &ProsodyConfig, keys: &[String], rng: &mut ChaCha8Rng) -> Result<(), String> {
    let out = ssml_postprocess(input, config, keys, rng);
    let doc = roxmltree::Document::parse(&out.ssml).map_err(|e| format!("{input:?}: {e}: {}", out.ssml))?;
    let text: String = doc.descendants().filter(|n| n.is_text()).filter_map(|n| n.text()).collect();
    let body = match &out.filler {
        Some(f) => text.strip_prefix(f.as_str()).ok_or(format!("{input:?}: filler {f:?} not a prefix"))?,
        None => text.as_str(),
    };
    if body != input {
        return Err(format!("{input:?}: stripped {body:?}"));
    }
    if out.text() != text {
        return Err(format!("{input:?}: strip_markup disagrees with the parser"));
    }
    Ok(())
}

pub fn ssml_fuzz(cases: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let config = ProsodyConfig {
        filler_probability: 0.5,
        rate_overrides: vec![("news_*".into(), "95%".into())],
        ..ProsodyConfig::default()
    };
    for n in 0..cases {
        let input = printable_string(&mut rng);
        let keys = if n % 3 == 0 { vec!["news_present".to_string()] } else { Vec::new() };
        ssml_roundtrip(&input, &config, &keys, &mut rng)?;
    }
    Ok(format!("{cases} printable strings well-formed and round-trip"))
}

pub fn personas_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../personas")
}

pub fn load_personas() -> Result<Vec<PersonaScript>, String> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(personas_dir())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| e.to_string())?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))
        })
        .collect()
}

/// Runs every persona on one engine; returns (transcripts, turns, fallback turns, mean latency).
fn persona_pass(scripts: &[PersonaScript]) -> Result<(Vec<String>, usize, usize, f64), String> {
    let engine = Engine::in_memory(EngineConfig { seed: 7, ..Default::default() }).map_err(|e| e.to_string())?;
    let mut transcripts = Vec::new();
    let (mut turns, mut fallbacks, mut latency) = (0usize, 0usize, 0f64);
    for s in scripts {
        let run = run_persona(s, &engine).map_err(|e| format!("{}: {e}", s.name))?;
        for r in &run.log {
            if let LogRecord::Turn(t) = r {
                turns += 1;
                latency += t.latency_ms;
                if t.reason == Some(SelectionReason::ErrorFallback) {
                    fallbacks += 1;
                }
            }
        }
        transcripts.push(run.transcript);
    }
    Ok((transcripts, turns, fallbacks, latency / turns.max(1) as f64))
}

pub fn persona_suite() -> Check {
    let scripts = load_personas()?;
    if scripts.len() < 6 {
        return Err(format!("only {} personas", scripts.len()));
    }
    let (a, turns, fallbacks, mean) = persona_pass(&scripts)?;
    let (b, ..) = persona_pass(&scripts)?;
    if a != b {
        return Err("transcripts differ between runs with the same seed".into());
    }
    if fallbacks > 0 {
        return Err(format!("{fallbacks} error-fallback turns"));
    }
    if mean >= 200.0 {
        return Err(format!("mean latency {mean:.1} ms"));
    }
    Ok(format!("{} personas, {turns} turns, deterministic, 0 fallbacks, mean latency {mean:.2} ms", scripts.len()))
}

pub fn phonetic_reference() -> Check {
    let text = std::fs::read_to_string(fixture("double_metaphone_reference.tsv")).map_err(|e| e.to_string())?;
    let mut rows = 0;
    let mut wrong = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let mut cols = line.split('\t');
        let word = cols.next().unwrap_or("");
        let primary = cols.next().unwrap_or("");
        let secondary = cols.next().filter(|s| !s.is_empty()).unwrap_or(primary);
        let got = phonetic_encode(word);
        if got.primary != primary || got.secondary != secondary {
            wrong.push(format!("{word}: {}/{}", got.primary, got.secondary));
        }
        rows += 1;
    }
    if rows != 500 {
        return Err(format!("{rows} fixture rows"));
    }
    if !wrong.is_empty() {
        return Err(format!("{} mismatches: {}", wrong.len(), wrong.join(", ")));
    }
    Ok("500/500 words match primary and alternate codes".into())
}

pub fn criteria() -> Vec<(&'static str, fn() -> Check)> {
    vec![
        ("selector decision table", selector_decision_table),
        ("topic rotation", || topic_rotation(10_000)),
        ("analytics oracle", analytics_oracle),
        ("acknowledgement goldens", ack_goldens),
        ("shuffle bag fairness", || shuffle_bag(10_000)),
        ("fsm safety", fsm_safety),
        ("ssml fuzz", || ssml_fuzz(10_000)),
        ("persona suite", persona_suite),
        ("phonetic reference", phonetic_reference),
    ]
}
