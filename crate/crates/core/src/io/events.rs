//! Binary and CSV event files.
//!
//! Binary layout, all integers little-endian:
//!
//! | bytes | content |
//! |---|---|
//! | 8 | magic `HOMCOMB\0` |
//! | 2 | version (u16) |
//! | 4 | header length in bytes (u32) |
//! | n | header, UTF-8 `key=value` lines |
//! | 8 | record count (u64) |
//! | 9 each | channel (u8), timestamp in ps (u64) |
//!
//! The CSV variant carries the same header as `# key=value` lines,
//! followed by `channel,timestamp_ps` and one row per record.

use std::fs;
use std::path::Path;

use super::config::{apply_delay, apply_param, delay_entries, param_entries, parse_kv};
use super::write_atomic;
use crate::error::{Error, Result};
use crate::montecarlo::{EventRecord, EventStream, SimConfig};
use crate::observables::DelaySetting;
use crate::params::SourceParams;

pub const MAGIC: &[u8; 8] = b"HOMCOMB\0";
pub const VERSION: u16 = 1;
const RECORD_BYTES: usize = 9;
const CSV_COLUMNS: [&str; 2] = ["channel", "timestamp_ps"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventFormat {
    Binary,
    Csv,
}

impl EventFormat {
    /// CSV for a `.csv` extension, binary otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => EventFormat::Csv,
            _ => EventFormat::Binary,
        }
    }
}

/// Ordered `key=value` metadata of an event file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventHeader {
    pub entries: Vec<(String, String)>,
}

impl EventHeader {
    pub fn from_sim(cfg: &SimConfig) -> Self {
        let mut entries = param_entries(&cfg.params);
        entries.extend(delay_entries(&cfg.delay));
        entries.extend([
            ("pair_rate_hz".to_owned(), cfg.pair_rate.to_string()),
            ("background_rate_hz".to_owned(), cfg.background_rate.to_string()),
            ("jitter_sigma_s".to_owned(), cfg.jitter_sigma.to_string()),
            ("duration_s".to_owned(), cfg.duration.to_string()),
            ("seed".to_owned(), cfg.seed.to_string()),
        ]);
        Self { entries }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Source parameters: defaults overridden by any parameter keys present.
    pub fn params(&self) -> Result<SourceParams> {
        let mut p = SourceParams::default();
        for (k, v) in &self.entries {
            apply_param(&mut p, k, v)?;
        }
        Ok(p)
    }

    /// Delay setting, if the header records one.
    pub fn delay(&self) -> Result<Option<DelaySetting>> {
        if self.get("delay_coarse_half_roundtrips").is_none() {
            return Ok(None);
        }
        let mut d = DelaySetting::derived(0, 0.0);
        for (k, v) in &self.entries {
            apply_delay(&mut d, k, v)?;
        }
        Ok(Some(d))
    }

    fn to_text(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    fn check(&self) -> std::result::Result<(), String> {
        for (k, v) in &self.entries {
            if k.is_empty() || k.contains(['=', '\n', '#']) || v.contains(['\n', '#']) {
                return Err(format!("header entry {k:?}={v:?} cannot be stored"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventFile {
    pub header: EventHeader,
    pub events: EventStream,
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

impl EventFile {
    pub fn to_binary(&self) -> Result<Vec<u8>> {
        self.header.check().map_err(Error::InvalidArgument)?;
        let header = self.header.to_text();
        let header_len = u32::try_from(header.len())
            .map_err(|_| Error::InvalidArgument("event header exceeds 4 GiB".into()))?;
        let n = self.events.records.len();
        let mut out = Vec::with_capacity(8 + 2 + 4 + header.len() + 8 + RECORD_BYTES * n);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&header_len.to_le_bytes());
        out.extend_from_slice(header.as_bytes());
        out.extend_from_slice(&(n as u64).to_le_bytes());
        for r in &self.events.records {
            out.push(r.channel);
            out.extend_from_slice(&r.timestamp.to_le_bytes());
        }
        Ok(out)
    }

    /// Parses a binary event file. `path` is only used in error messages.
    pub fn from_binary(bytes: &[u8], path: &Path) -> Result<Self> {
        let err = |r: &str| format_err(path, r);
        let mut rest = bytes;
        let mut take = |n: usize, what: &str| -> Result<&[u8]> {
            if rest.len() < n {
                return Err(err(&format!("truncated {what}")));
            }
            let (a, b) = rest.split_at(n);
            rest = b;
            Ok(a)
        };
        if take(8, "magic")? != MAGIC {
            return Err(err("bad magic"));
        }
        let version = u16::from_le_bytes(take(2, "version")?.try_into().expect("2 bytes"));
        if version != VERSION {
            return Err(err(&format!("unsupported version {version}")));
        }
        let header_len = u32::from_le_bytes(take(4, "header length")?.try_into().expect("4 bytes")) as usize;
        let text = std::str::from_utf8(take(header_len, "header")?).map_err(|_| err("header is not UTF-8"))?;
        let header = EventHeader {
            entries: parse_kv(text).map_err(|e| err(&e.to_string()))?,
        };
        let n = u64::from_le_bytes(take(8, "record count")?.try_into().expect("8 bytes"));
        let body = rest;
        if (body.len() as u64) != n.saturating_mul(RECORD_BYTES as u64) {
            return Err(err(&format!(
                "record count {n} does not match {} payload bytes",
                body.len()
            )));
        }
        let records = body
            .chunks_exact(RECORD_BYTES)
            .map(|c| EventRecord {
                channel: c[0],
                timestamp: u64::from_le_bytes(c[1..].try_into().expect("8 bytes")),
            })
            .collect();
        let f = EventFile {
            header,
            events: EventStream::new(records),
        };
        f.events.check_sorted().map_err(|e| err(&e.to_string()))?;
        Ok(f)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        self.header.check().map_err(Error::InvalidArgument)?;
        let mut out: Vec<u8> = self.header.entries.iter().flat_map(|(k, v)| format!("# {k}={v}\n").into_bytes()).collect();
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(CSV_COLUMNS)?;
        for r in &self.events.records {
            w.write_record([r.channel.to_string(), r.timestamp.to_string()])?;
        }
        w.flush()?;
        drop(w);
        Ok(out)
    }

    pub fn from_csv(bytes: &[u8], path: &Path) -> Result<Self> {
        let err = |r: String| format_err(path, r);
        let text = std::str::from_utf8(bytes).map_err(|_| err("not UTF-8".into()))?;
        let mut header_text = String::new();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            match line.trim_start().strip_prefix('#') {
                Some(kv) => {
                    header_text.push_str(kv);
                    header_text.push('\n');
                    body_start += line.len();
                }
                None if line.trim().is_empty() => body_start += line.len(),
                None => break,
            }
        }
        let header = EventHeader {
            entries: parse_kv(&header_text).map_err(|e| err(e.to_string()))?,
        };
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(&bytes[body_start..]);
        let cols = rdr.headers().map_err(|e| err(e.to_string()))?;
        if cols.iter().collect::<Vec<_>>() != CSV_COLUMNS {
            return Err(err(format!("expected columns channel,timestamp_ps, got {:?}", cols.iter().collect::<Vec<_>>())));
        }
        let mut records = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row.map_err(|e| err(e.to_string()))?;
            let parse = |j: usize| -> Result<u64> {
                row[j].parse().map_err(|_| err(format!("row {}: bad {} {:?}", i + 1, CSV_COLUMNS[j], &row[j])))
            };
            let channel = u8::try_from(parse(0)?).map_err(|_| err(format!("row {}: bad channel", i + 1)))?;
            records.push(EventRecord {
                channel,
                timestamp: parse(1)?,
            });
        }
        let f = EventFile {
            header,
            events: EventStream::new(records),
        };
        f.events.check_sorted().map_err(|e| err(e.to_string()))?;
        Ok(f)
    }

    /// Sniffs the magic to pick the format.
    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        if bytes.starts_with(MAGIC) {
            Self::from_binary(bytes, path)
        } else if bytes.is_empty() {
            Err(format_err(path, "empty file"))
        } else {
            Self::from_csv(bytes, path)
        }
    }
}

pub fn read_events(path: &Path) -> Result<EventFile> {
    let bytes = fs::read(path).map_err(|e| format_err(path, e.to_string()))?;
    EventFile::from_bytes(&bytes, path)
}

/// Writes atomically in the given format.
pub fn write_events(path: &Path, file: &EventFile, format: EventFormat) -> Result<()> {
    let bytes = match format {
        EventFormat::Binary => file.to_binary()?,
        EventFormat::Csv => file.to_csv()?,
    };
    write_atomic(path, &bytes)
}
