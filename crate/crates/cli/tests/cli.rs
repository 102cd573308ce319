use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use serde_json::Value;

use convokernel::analytics::{check_log, parse_log};
use convokernel::content::{FsStore, PackKind};
use convokernel::engine::{Engine, EngineConfig};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_convokernel"));
    cmd.env_remove("CONVOKERNEL_DATA_DIR").env("RUST_LOG", "warn");
    cmd
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn convokernel");
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn personas() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../personas")
}

fn bundled_templates(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/templates").join(format!("{name}.json"))
}

fn simulate(dir: &Path) -> PathBuf {
    let out = dir.join("sim.jsonl");
    run(bin().args(["simulate", "--quiet", "--seed", "7", "--script"]).arg(personas()).arg("--out").arg(&out));
    out
}

fn active(data_dir: &Path, name: &str) -> Vec<u8> {
    let engine = Engine::open(Arc::new(FsStore::open(data_dir).unwrap()), EngineConfig::default()).unwrap();
    engine.content().active_payload(PackKind::Templates, name).unwrap()
}

#[test]
fn simulate_writes_valid_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("one.jsonl");
    let script = personas().join("greeting_new.json");
    let o = run(bin().args(["simulate", "--seed", "1", "--script"]).arg(&script).arg("--out").arg(&out));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("# "), "{stdout}");
    let records = parse_log(&std::fs::read_to_string(&out).unwrap()).unwrap();
    check_log(&records).unwrap();
    assert!(!records.is_empty());
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let strip = |p: PathBuf| {
        let text = std::fs::read_to_string(p).unwrap();
        text.lines()
            .map(|l| {
                let mut v: Value = serde_json::from_str(l).unwrap();
                v.as_object_mut().unwrap().remove("latency_ms");
                v
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(simulate(a.path())), strip(simulate(b.path())));
}

#[test]
fn analyze_all_reports_and_formats() {
    let dir = tempfile::tempdir().unwrap();
    let log = simulate(dir.path());
    for report in ["ratings", "entries", "acceptance"] {
        let json = run(bin().args(["analyze", "--report", report, "--format", "json", "--logs"]).arg(&log));
        let v: Value = serde_json::from_slice(&json.stdout).unwrap_or_else(|e| panic!("{report}: {e}"));
        assert!(!v.is_null());

        let csv = run(bin().args(["analyze", "--report", report, "--format", "csv", "--logs"]).arg(&log));
        let csv = String::from_utf8(csv.stdout).unwrap();
        let widths: Vec<usize> = csv.lines().map(|l| l.split(',').count()).collect();
        assert!(widths.len() >= 2, "{report}: {csv}");
        assert!(widths.iter().all(|w| *w == widths[0]), "{report}: {csv}");

        let table = run(bin().args(["analyze", "--report", report, "--logs"]).arg(&log));
        assert!(!table.stdout.is_empty());
    }
}

#[test]
fn analyze_accepts_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    let o = run(bin().args(["analyze", "--report", "ratings", "--format", "json", "--logs"]).arg(dir.path()));
    serde_json::from_slice::<Value>(&o.stdout).unwrap();
}

#[test]
fn analyze_rejects_malformed_log() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("bad.jsonl");
    std::fs::write(&log, "{\"not\": \"a record\"}\n").unwrap();
    let o = bin().args(["analyze", "--report", "ratings", "--logs"]).arg(&log).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn ingest_then_rollback_restores_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let original = std::fs::read(bundled_templates("food")).unwrap();
    let first = dir.path().join("food.json");
    std::fs::write(&first, &original).unwrap();
    let o = run(bin().args(["ingest", "--kind", "templates", "--file"]).arg(&first).arg("--data-dir").arg(&data));
    let msg = String::from_utf8(o.stdout).unwrap();
    let v1: u64 = msg
        .split("version ")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();

    let mut edited: Value = serde_json::from_slice(&original).unwrap();
    edited["templates"]["food_q_cooking"]["surfaces"] = serde_json::json!(["Do you cook at home?"]);
    std::fs::write(&first, serde_json::to_vec_pretty(&edited).unwrap()).unwrap();
    run(bin().args(["ingest", "--kind", "templates", "--file"]).arg(&first).arg("--data-dir").arg(&data));
    assert_ne!(active(&data, "food"), original);

    run(bin()
        .args(["rollback", "--kind", "templates", "--version", &v1.to_string()])
        .arg("--data-dir")
        .arg(&data));
    assert_eq!(active(&data, "food"), original);
}

#[test]
fn duplicate_template_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let file = dir.path().join("dup.json");
    std::fs::write(
        &file,
        r#"{"schema_version": 1, "templates": {
            "dup_key": {"surfaces": ["One."]},
            "dup_key": {"surfaces": ["Two."]}
        }}"#,
    )
    .unwrap();
    let o = bin().args(["ingest", "--kind", "templates", "--file"]).arg(&file).arg("--data-dir").arg(&data).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("dup_key"));
}

#[test]
fn rollback_to_unknown_version_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["rollback", "--kind", "templates", "--version", "99"])
        .arg("--data-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!o.status.success());
}

#[test]
fn export_logs_reads_data_dir_from_env() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    {
        let engine = Engine::open(Arc::new(FsStore::open(&data).unwrap()), EngineConfig::default()).unwrap();
        let event = |u: &str, t| convokernel::engine::TurnEvent {
            conversation_id: "env-1".into(),
            user_id: "env-user".into(),
            utterance: u.into(),
            asr_confidence: 0.9,
            timestamp: t,
        };
        engine.handle_turn(&event("hi", 1)).unwrap();
        engine.handle_turn(&event("let's talk about food", 2)).unwrap();
        engine.rate("env-1", 5).unwrap();
    }
    let out = dir.path().join("export.jsonl");
    run(bin().env("CONVOKERNEL_DATA_DIR", &data).arg("export-logs").arg("--out").arg(&out));
    let records = parse_log(&std::fs::read_to_string(&out).unwrap()).unwrap();
    check_log(&records).unwrap();
    assert_eq!(records.len(), 3);
}

#[test]
fn unknown_pack_kind_is_a_usage_error() {
    let o = bin().args(["ingest", "--kind", "bogus", "--file", "x.json"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
