use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::{json, Value};

use super::log::LogRecord;
use super::metrics::{acceptance_rate, entry_distribution, rating_per_turn, round_half_up, round_ratio_half_up};
use crate::module::EntryMethod;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Ratings,
    Entries,
    Acceptance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Json,
    Csv,
}

impl FromStr for ReportKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ratings" => Ok(Self::Ratings),
            "entries" => Ok(Self::Entries),
            "acceptance" => Ok(Self::Acceptance),
            other => Err(format!("unknown report `{other}`")),
        }
    }
}

impl FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "table" => Ok(Self::Table),
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

fn two(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into())
}

/// Header plus string rows; numbers already rounded half-up for display.
fn rows(kind: ReportKind, logs: &[LogRecord]) -> (Vec<String>, Vec<Vec<String>>, Value) {
    match kind {
        ReportKind::Ratings => {
            let stats = rating_per_turn(logs);
            let mut ordered: Vec<_> = stats.into_iter().collect();
            ordered.sort_by(|a, b| b.1.total_turns.cmp(&a.1.total_turns).then(a.0.cmp(&b.0)));
            let header = ["module", "total_turns", "avg_turns_per_conversation", "avg_rating"];
            let mut body = Vec::new();
            let mut doc = Vec::new();
            for (m, s) in &ordered {
                let avg_rating = round_ratio_half_up(s.rating_weight, s.rated_turns, 2);
                let avg_turns = round_half_up(s.avg_turns_per_conversation, 2);
                body.push(vec![m.to_string(), s.total_turns.to_string(), format!("{avg_turns:.2}"), two(avg_rating)]);
                doc.push(json!({
                    "module": m,
                    "total_turns": s.total_turns,
                    "avg_turns_per_conversation": avg_turns,
                    "avg_rating": avg_rating,
                }));
            }
            (header.map(String::from).to_vec(), body, Value::Array(doc))
        }
        ReportKind::Entries => {
            let dist = entry_distribution(logs);
            let mut header = vec!["module".to_string()];
            header.extend(EntryMethod::ALL.iter().map(|e| e.as_str().to_string()));
            let mut body = Vec::new();
            let mut doc = serde_json::Map::new();
            for (m, counts) in &dist {
                let mut row = vec![m.to_string()];
                let mut obj = serde_json::Map::new();
                for e in EntryMethod::ALL {
                    let n = counts.get(&e).copied().unwrap_or(0);
                    row.push(n.to_string());
                    obj.insert(e.as_str().into(), json!(n));
                }
                body.push(row);
                doc.insert(m.to_string(), Value::Object(obj));
            }
            (header, body, Value::Object(doc))
        }
        ReportKind::Acceptance => {
            let acc = acceptance_rate(logs);
            let mut ordered: Vec<_> = acc.into_iter().collect();
            ordered.sort_by(|a, b| {
                let ra = round_ratio_half_up(a.1.accepts, a.1.proposals, 2).unwrap_or(-1.0);
                let rb = round_ratio_half_up(b.1.accepts, b.1.proposals, 2).unwrap_or(-1.0);
                rb.total_cmp(&ra).then(a.0.cmp(&b.0))
            });
            let header = ["topic", "accepts", "proposals", "rate"];
            let mut body = Vec::new();
            let mut doc = Vec::new();
            for (m, a) in &ordered {
                let rate = round_ratio_half_up(a.accepts, a.proposals, 2);
                body.push(vec![m.to_string(), a.accepts.to_string(), a.proposals.to_string(), two(rate)]);
                doc.push(json!({"topic": m, "accepts": a.accepts, "proposals": a.proposals, "rate": rate}));
            }
            (header.map(String::from).to_vec(), body, Value::Array(doc))
        }
    }
}

/// Renders one report over parsed logs.
pub fn render_report(kind: ReportKind, format: ReportFormat, logs: &[LogRecord]) -> String {
    let (header, body, doc) = rows(kind, logs);
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(&doc).expect("report serializes") + "\n",
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&header).expect("in-memory csv");
            for r in &body {
                w.write_record(r).expect("in-memory csv");
            }
            String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
        }
        ReportFormat::Table => {
            let mut widths: Vec<usize> = header.iter().map(String::len).collect();
            for r in &body {
                for (i, c) in r.iter().enumerate() {
                    widths[i] = widths[i].max(c.len());
                }
            }
            let mut out = String::new();
            let line = |cells: &[String], out: &mut String| {
                let parts: Vec<String> = cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| if i == 0 { format!("{c:<w$}", w = widths[i]) } else { format!("{c:>w$}", w = widths[i]) })
                    .collect();
                let _ = writeln!(out, "{}", parts.join("  ").trim_end());
            };
            line(&header, &mut out);
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            let _ = writeln!(out, "{}", rule.join("  "));
            for r in &body {
                line(r, &mut out);
            }
            out
        }
    }
}
