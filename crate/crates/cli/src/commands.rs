use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};

use convokernel::analytics::{check_log, parse_log, render_report, run_persona, LogRecord, PersonaScript, ReportFormat, ReportKind};
use convokernel::content::{FsStore, PackKind, Store};
use convokernel::engine::{Engine, EngineConfig};

pub fn open_engine(data_dir: &Path, config: EngineConfig) -> Result<Engine> {
    let store: Arc<dyn Store> =
        Arc::new(FsStore::open(data_dir).with_context(|| format!("opening data dir {}", data_dir.display()))?);
    Ok(Engine::open(store, config)?)
}

/// A file, or every `*.jsonl` file in a directory, in name order.
fn log_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        files.sort();
        Ok(files)
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

pub fn load_logs(path: &Path) -> Result<Vec<LogRecord>> {
    let mut records = Vec::new();
    for file in log_files(path)? {
        let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
        let mut parsed = parse_log(&text).with_context(|| format!("parsing {}", file.display()))?;
        records.append(&mut parsed);
    }
    check_log(&records)?;
    Ok(records)
}

pub fn analyze(logs: &Path, kind: ReportKind, format: ReportFormat) -> Result<String> {
    Ok(render_report(kind, format, &load_logs(logs)?))
}

fn persona_files(path: &Path) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        if files.is_empty() {
            bail!("no persona scripts in {}", path.display());
        }
        Ok(files)
    } else {
        Ok(vec![path.to_path_buf()])
    }
}

pub struct Simulation {
    pub transcript: String,
    pub log_lines: usize,
}

/// Runs one script, or a directory of scripts, on a fresh in-memory engine and
/// writes the resulting JSON-lines log to `out`.
pub fn simulate(script: &Path, seed: u64, out: &Path) -> Result<Simulation> {
    let engine = Engine::in_memory(EngineConfig { seed, ..Default::default() })?;
    let mut transcript = String::new();
    let mut log = String::new();
    for file in persona_files(script)? {
        let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
        let persona: PersonaScript =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", file.display()))?;
        let run = run_persona(&persona, &engine).with_context(|| format!("persona `{}`", persona.name))?;
        transcript.push_str(&format!("# {}\n{}", persona.name, run.transcript));
        log.push_str(&engine.conversation_log(&run.conversation_id)?);
    }
    std::fs::write(out, &log).with_context(|| format!("writing {}", out.display()))?;
    Ok(Simulation { transcript, log_lines: log.lines().count() })
}

pub fn ingest(data_dir: &Path, kind: PackKind, file: &Path, name: Option<&str>) -> Result<(String, u64)> {
    let bytes = std::fs::read(file).with_context(|| format!("reading {}", file.display()))?;
    let name = match name {
        Some(n) => n.to_string(),
        None => file
            .file_stem()
            .and_then(|s| s.to_str())
            .context("cannot derive a pack name from the file name")?
            .to_string(),
    };
    let engine = open_engine(data_dir, EngineConfig::default())?;
    let version = engine.content().ingest(kind, &name, bytes)?;
    Ok((name, version))
}

pub fn rollback(data_dir: &Path, kind: PackKind, version: u64) -> Result<String> {
    let engine = open_engine(data_dir, EngineConfig::default())?;
    Ok(engine.content().rollback(kind, version)?)
}

pub fn export_logs(data_dir: &Path, out: &Path) -> Result<usize> {
    let engine = open_engine(data_dir, EngineConfig::default())?;
    let text = engine.export_logs()?;
    std::fs::write(out, &text).with_context(|| format!("writing {}", out.display()))?;
    Ok(text.lines().count())
}
