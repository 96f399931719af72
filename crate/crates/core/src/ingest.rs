//! Parsing, labeling, filtering and serialization of event logs.
//!
//! Two line-delimited formats are supported with the same field names:
//! CSV with header `timestamp,actor,source,domain,category,kind`, and JSONL
//! with one object per line. Timestamps may be integer epoch seconds or
//! ISO-8601. Malformed lines are counted and reported; parsing only fails
//! when the malformed fraction exceeds a configured limit.

use std::io::{BufRead, BufReader, Read, Write};

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{
    CategoryTable, ContentCategory, EventLog, ShareEvent, TimeWindow, UserTable,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("unreadable stream: {0}")]
    UnreadableStream(#[from] std::io::Error),
    #[error("{malformed} malformed record(s) out of {total} exceeds the limit of {limit}")]
    TooManyMalformed {
        malformed: usize,
        total: usize,
        limit: f64,
    },
    #[error("bad category table: {0}")]
    BadCategoryTable(String),
    #[error("bad header: {0}")]
    BadHeader(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub format: LogFormat,
    /// Parsing fails when malformed records exceed this fraction of all
    /// records. Default 1%.
    pub malformed_limit: f64,
}

impl ParseOptions {
    pub fn new(format: LogFormat) -> Self {
        Self {
            format,
            malformed_limit: 0.01,
        }
    }
}

/// What happened during a parse: how many records were read, rejected,
/// or dropped as self-shares.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub records: usize,
    pub parsed: usize,
    pub malformed: usize,
    pub self_shares_dropped: usize,
}

#[derive(Debug)]
pub struct ParsedLog {
    pub log: EventLog,
    pub report: ParseReport,
}

/// Accepts integer epoch seconds, RFC 3339, `YYYY-MM-DDTHH:MM:SS` (UTC
/// assumed) or bare `YYYY-MM-DD` (midnight UTC).
pub fn parse_timestamp(text: &str) -> Option<i64> {
    let text = text.trim();
    if let Ok(secs) = text.parse::<i64>() {
        return Some(secs);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
        return Some(dt.timestamp());
    }
    if let Ok(naive) = NaiveDateTime::parse_from_str(text, "%Y-%m-%dT%H:%M:%S") {
        return Some(naive.and_utc().timestamp());
    }
    if let Ok(date) = NaiveDate::parse_from_str(text, "%Y-%m-%d") {
        return Some(date.and_hms_opt(0, 0, 0)?.and_utc().timestamp());
    }
    None
}

struct RawRecord {
    timestamp: i64,
    actor: String,
    source: String,
    domain: Option<String>,
    category: ContentCategory,
}

#[derive(Deserialize)]
struct JsonRecord {
    timestamp: serde_json::Value,
    actor: String,
    source: String,
    #[serde(default)]
    domain: Option<String>,
    #[serde(default)]
    category: Option<String>,
    // Accepted but unused: retweets and replies are analyzed identically.
    #[serde(default, rename = "kind")]
    _kind: Option<String>,
}

fn record_from_json(line: &str) -> Option<RawRecord> {
    let rec: JsonRecord = serde_json::from_str(line).ok()?;
    let timestamp = match &rec.timestamp {
        serde_json::Value::Number(n) => n.as_i64()?,
        serde_json::Value::String(s) => parse_timestamp(s)?,
        _ => return None,
    };
    if rec.actor.is_empty() || rec.source.is_empty() {
        return None;
    }
    let category = rec.category.as_deref().unwrap_or("").parse().ok()?;
    Some(RawRecord {
        timestamp,
        actor: rec.actor,
        source: rec.source,
        domain: rec.domain.filter(|d| !d.is_empty()),
        category,
    })
}

/// Parses a line-delimited event stream into a sorted [`EventLog`].
///
/// Self-shares (`actor == source`) are dropped and counted separately;
/// they carry no inter-user link. Returns
/// [`IngestError::TooManyMalformed`] when the malformed fraction exceeds
/// `opts.malformed_limit`.
pub fn parse_events<R: Read>(reader: R, opts: &ParseOptions) -> Result<ParsedLog, IngestError> {
    let mut users = UserTable::new();
    let mut events = Vec::new();
    let mut report = ParseReport::default();

    let mut keep = |raw: Option<RawRecord>, report: &mut ParseReport| {
        report.records += 1;
        match raw {
            Some(rec) if rec.actor == rec.source => {
                report.parsed += 1;
                report.self_shares_dropped += 1;
            }
            Some(rec) => {
                report.parsed += 1;
                events.push(ShareEvent {
                    timestamp: rec.timestamp,
                    actor: users.intern(&rec.actor),
                    source: users.intern(&rec.source),
                    domain: rec.domain.map(Into::into),
                    category: rec.category,
                });
            }
            None => report.malformed += 1,
        }
    };

    match opts.format {
        LogFormat::Csv => {
            let mut csv = csv::ReaderBuilder::new()
                .flexible(true)
                .from_reader(reader);
            let headers = csv.headers().map_err(csv_io_error)?.clone();
            let col = |name: &str| headers.iter().position(|h| h == name);
            let (ts_col, actor_col, source_col) = match (
                col("timestamp"),
                col("actor"),
                col("source"),
            ) {
                (Some(t), Some(a), Some(s)) => (t, a, s),
                _ => {
                    return Err(IngestError::BadHeader(
                        "events CSV must have timestamp, actor and source columns".into(),
                    ))
                }
            };
            let domain_col = col("domain");
            let category_col = col("category");

            for record in csv.records() {
                let raw = record.ok().and_then(|rec| {
                    let field = |i: usize| rec.get(i).unwrap_or("");
                    let timestamp = parse_timestamp(field(ts_col))?;
                    let actor = field(actor_col);
                    let source = field(source_col);
                    if actor.is_empty() || source.is_empty() {
                        return None;
                    }
                    let domain = domain_col.map(|i| field(i)).filter(|d| !d.is_empty());
                    let category = category_col
                        .map(|i| field(i))
                        .unwrap_or("")
                        .parse()
                        .ok()?;
                    Some(RawRecord {
                        timestamp,
                        actor: actor.to_string(),
                        source: source.to_string(),
                        domain: domain.map(str::to_string),
                        category,
                    })
                });
                keep(raw, &mut report);
            }
        }
        LogFormat::Jsonl => {
            for line in BufReader::new(reader).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                keep(record_from_json(&line), &mut report);
            }
        }
    }

    if report.records > 0 {
        let fraction = report.malformed as f64 / report.records as f64;
        if fraction > opts.malformed_limit {
            return Err(IngestError::TooManyMalformed {
                malformed: report.malformed,
                total: report.records,
                limit: opts.malformed_limit,
            });
        }
    }

    Ok(ParsedLog {
        log: EventLog::from_parts(users, events),
        report,
    })
}

fn csv_io_error(err: csv::Error) -> IngestError {
    match err.into_kind() {
        csv::ErrorKind::Io(io) => IngestError::UnreadableStream(io),
        other => IngestError::UnreadableStream(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Convenience wrapper over [`parse_events`] for in-memory text.
pub fn parse_events_str(text: &str, format: LogFormat) -> Result<ParsedLog, IngestError> {
    parse_events(text.as_bytes(), &ParseOptions::new(format))
}

/// Writes the log in canonical form: epoch-second timestamps, empty
/// `kind`, empty category for `Unlabeled`. `parse_events` reads the output
/// back into an identical log.
pub fn write_events<W: Write>(
    log: &EventLog,
    writer: W,
    format: LogFormat,
) -> Result<(), std::io::Error> {
    match format {
        LogFormat::Csv => {
            let mut csv = csv::Writer::from_writer(writer);
            csv.write_record(["timestamp", "actor", "source", "domain", "category", "kind"])?;
            for event in log.events() {
                csv.write_record([
                    event.timestamp.to_string().as_str(),
                    log.user_name(event.actor),
                    log.user_name(event.source),
                    event.domain.as_deref().unwrap_or(""),
                    event.category.as_str(),
                    "",
                ])?;
            }
            csv.flush()?;
        }
        LogFormat::Jsonl => {
            #[derive(Serialize)]
            struct Row<'a> {
                timestamp: i64,
                actor: &'a str,
                source: &'a str,
                #[serde(skip_serializing_if = "Option::is_none")]
                domain: Option<&'a str>,
                category: &'a str,
            }
            let mut writer = writer;
            for event in log.events() {
                let row = Row {
                    timestamp: event.timestamp,
                    actor: log.user_name(event.actor),
                    source: log.user_name(event.source),
                    domain: event.domain.as_deref(),
                    category: event.category.as_str(),
                };
                serde_json::to_writer(&mut writer, &row)?;
                writer.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

pub fn write_events_string(log: &EventLog, format: LogFormat) -> String {
    let mut buf = Vec::new();
    write_events(log, &mut buf, format).expect("in-memory write cannot fail");
    String::from_utf8(buf).expect("canonical output is UTF-8")
}

/// Reads a category table CSV with header `domain,category`.
pub fn parse_category_table<R: Read>(reader: R) -> Result<CategoryTable, IngestError> {
    let mut csv = csv::Reader::from_reader(reader);
    let mut table = CategoryTable::new();
    for record in csv.records() {
        let record = record.map_err(csv_io_error)?;
        let domain = record.get(0).unwrap_or("").trim();
        let category = record.get(1).unwrap_or("").trim();
        if domain.is_empty() {
            return Err(IngestError::BadCategoryTable("empty domain".into()));
        }
        let category: ContentCategory = category
            .parse()
            .map_err(|e| IngestError::BadCategoryTable(format!("{e}")))?;
        table.insert(domain, category);
    }
    Ok(table)
}

/// Applies the category table. Events carrying an explicit category keep
/// it; events whose domain is in the table get the table's category;
/// everything else stays `Unlabeled`. Event count is unchanged.
pub fn label_events(log: EventLog, table: &CategoryTable) -> EventLog {
    let (users, mut events, window) = log.into_parts();
    for event in &mut events {
        if event.category == ContentCategory::Unlabeled {
            if let Some(cat) = event.domain.as_deref().and_then(|d| table.lookup(d)) {
                event.category = cat;
            }
        }
    }
    match window {
        Some(w) => EventLog::with_window(users, events, w),
        None => EventLog::from_parts(users, events),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FilterConfig {
    /// Keep only events inside this window; it becomes the log's study
    /// window. `None` keeps the current window.
    pub range: Option<TimeWindow>,
    /// Drop events that are still `Unlabeled`.
    pub exclude_unlabeled: bool,
}

/// Keeps events satisfying all predicates; order is preserved. An empty
/// result is legal.
pub fn filter_events(log: EventLog, cfg: &FilterConfig) -> EventLog {
    let (users, mut events, window) = log.into_parts();
    events.retain(|event| {
        let in_range = cfg.range.map(|r| r.contains(event.timestamp)).unwrap_or(true);
        let labeled_ok = !cfg.exclude_unlabeled || event.category != ContentCategory::Unlabeled;
        in_range && labeled_ok
    });
    match cfg.range.or(window) {
        Some(w) if events.iter().all(|e| w.contains(e.timestamp)) => {
            EventLog::with_window(users, events, w)
        }
        _ => EventLog::from_parts(users, events),
    }
}
