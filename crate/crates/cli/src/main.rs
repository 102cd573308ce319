use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Result;
use clap::{Parser, Subcommand};

use convokernel::analytics::{ReportFormat, ReportKind};
use convokernel::content::PackKind;
use convokernel::engine::{EngineConfig, PipelineConfig};
use convokernel_cli::{commands, server};

#[derive(Parser)]
#[command(name = "convokernel", version, about = "Open-domain dialog orchestration engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP turn API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "CONVOKERNEL_DATA_DIR", default_value = "convokernel-data")]
        data_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.30)]
        asr_threshold: f64,
        /// Profanity word list (JSON `{"words": [...]}` or one word per line).
        #[arg(long)]
        profanity_lexicon: Option<PathBuf>,
    },
    /// Compute evaluation reports from conversation logs.
    Analyze {
        /// A JSON-lines log file or a directory of them.
        #[arg(long)]
        logs: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        report: ReportKind,
        #[arg(long, value_parser = parse_format, default_value = "table")]
        format: ReportFormat,
    },
    /// Run persona scripts and write their log.
    Simulate {
        /// A persona JSON file or a directory of them.
        #[arg(long)]
        script: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        quiet: bool,
    },
    /// Validate, store and activate a content pack.
    Ingest {
        #[arg(long, value_parser = parse_pack)]
        kind: PackKind,
        #[arg(long)]
        file: PathBuf,
        /// Pack name; defaults to the file stem.
        #[arg(long)]
        name: Option<String>,
        #[arg(long, env = "CONVOKERNEL_DATA_DIR", default_value = "convokernel-data")]
        data_dir: PathBuf,
    },
    /// Re-activate a stored pack version.
    Rollback {
        #[arg(long, value_parser = parse_pack)]
        kind: PackKind,
        #[arg(long)]
        version: u64,
        #[arg(long, env = "CONVOKERNEL_DATA_DIR", default_value = "convokernel-data")]
        data_dir: PathBuf,
    },
    /// Write every conversation log as one JSON-lines file.
    ExportLogs {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "CONVOKERNEL_DATA_DIR", default_value = "convokernel-data")]
        data_dir: PathBuf,
    },
}

fn parse_kind(s: &str) -> Result<ReportKind, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse()
}

fn parse_pack(s: &str) -> Result<PackKind, String> {
    s.parse().map_err(|e: convokernel::error::ContentError| e.to_string())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();

    match Cli::parse().command {
        Command::Serve { port, host, data_dir, seed, asr_threshold, profanity_lexicon } => {
            let config = EngineConfig {
                pipeline: PipelineConfig {
                    asr_confidence_threshold: asr_threshold,
                    profanity_lexicon_path: profanity_lexicon,
                    ..Default::default()
                },
                seed,
                ..Default::default()
            };
            let engine = Arc::new(commands::open_engine(&data_dir, config)?);
            let addr: SocketAddr = format!("{host}:{port}").parse()?;
            tokio::runtime::Runtime::new()?.block_on(server::serve(engine, addr))?;
        }
        Command::Analyze { logs, report, format } => {
            print!("{}", commands::analyze(&logs, report, format)?);
        }
        Command::Simulate { script, seed, out, quiet } => {
            let sim = commands::simulate(&script, seed, &out)?;
            if !quiet {
                print!("{}", sim.transcript);
            }
            eprintln!("wrote {} log lines to {}", sim.log_lines, out.display());
        }
        Command::Ingest { kind, file, name, data_dir } => {
            let (name, version) = commands::ingest(&data_dir, kind, &file, name.as_deref())?;
            println!("{kind} `{name}` version {version} active");
        }
        Command::Rollback { kind, version, data_dir } => {
            let name = commands::rollback(&data_dir, kind, version)?;
            println!("{kind} `{name}` rolled back to version {version}");
        }
        Command::ExportLogs { out, data_dir } => {
            let n = commands::export_logs(&data_dir, &out)?;
            println!("wrote {n} log lines to {}", out.display());
        }
    }
    Ok(())
}
