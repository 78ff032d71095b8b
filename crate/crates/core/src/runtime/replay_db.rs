//! Server-side map `ID_i -> M_7` used to spot verbatim login replays, with a
//! line-oriented snapshot format.
//!
//! ```text
//! smartauth-replaydb v1
//! alice01\t3f9a...
//! bob\t07c1...
//! ```
//!
//! Identities are escaped: printable ASCII other than `\` is written as is,
//! `\` becomes `\\`, every other byte becomes `\xHH`. Lines are sorted by
//! identity bytes.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use super::Identity;
use crate::hash_codec::Digest;

pub const SNAPSHOT_HEADER: &str = "smartauth-replaydb v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Freshness {
    Fresh,
    Replayed,
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot io: {0}")]
    Io(#[from] io::Error),
    #[error("snapshot line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> SnapshotError {
    SnapshotError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReplayDb {
    entries: BTreeMap<Identity, Digest>,
}

impl ReplayDb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &Identity) -> Option<&Digest> {
        self.entries.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Identity, &Digest)> {
        self.entries.iter()
    }

    /// Only call after the message has authenticated.
    ///
    /// No entry: store, fresh. Same `M_7` as stored: replayed, unchanged.
    /// Different `M_7`: replace, fresh.
    pub fn check_and_store(&mut self, id: &Identity, m7: &Digest) -> Freshness {
        match self.entries.get_mut(id) {
            Some(stored) if stored == m7 => Freshness::Replayed,
            Some(stored) => {
                *stored = m7.clone();
                Freshness::Fresh
            }
            None => {
                self.entries.insert(id.clone(), m7.clone());
                Freshness::Fresh
            }
        }
    }

    pub fn to_snapshot(&self) -> String {
        let mut out = String::from(SNAPSHOT_HEADER);
        out.push('\n');
        for (id, m7) in &self.entries {
            out.push_str(&escape_id(id.as_bytes()));
            out.push('\t');
            out.push_str(&m7.to_hex());
            out.push('\n');
        }
        out
    }

    pub fn from_snapshot(text: &str) -> Result<Self, SnapshotError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, SNAPSHOT_HEADER)) => {}
            Some((n, other)) => return Err(parse_err(n, format!("bad header `{other}`"))),
            None => return Err(parse_err(1, "missing header")),
        }
        let mut entries = BTreeMap::new();
        let mut width = None;
        for (n, line) in lines {
            let (raw_id, raw_hex) = line
                .split_once('\t')
                .ok_or_else(|| parse_err(n, "expected `<id>\\t<hex>`"))?;
            let id = Identity::new(unescape_id(raw_id).map_err(|m| parse_err(n, m))?);
            let m7 = Digest::from_hex(raw_hex).map_err(|e| parse_err(n, e.to_string()))?;
            if m7.is_empty() {
                return Err(parse_err(n, "empty digest"));
            }
            if *width.get_or_insert(m7.len()) != m7.len() {
                return Err(parse_err(n, "digest width differs from earlier lines"));
            }
            if entries.insert(id.clone(), m7).is_some() {
                return Err(parse_err(n, format!("duplicate identity `{id}`")));
            }
        }
        Ok(ReplayDb { entries })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SnapshotError> {
        fs::write(path, self.to_snapshot())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SnapshotError> {
        Self::from_snapshot(&fs::read_to_string(path)?)
    }
}

fn escape_id(id: &[u8]) -> String {
    let mut out = String::with_capacity(id.len());
    for &b in id {
        match b {
            b'\\' => out.push_str("\\\\"),
            b if b.is_ascii_graphic() => out.push(b as char),
            b => out.push_str(&format!("\\x{b:02x}")),
        }
    }
    out
}

fn unescape_id(s: &str) -> Result<Vec<u8>, String> {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => match bytes.get(i + 1) {
                Some(b'\\') => {
                    out.push(b'\\');
                    i += 2;
                }
                Some(b'x') => {
                    let hex = s.get(i + 2..i + 4).ok_or("truncated \\x escape")?;
                    let v = u8::from_str_radix(hex, 16).map_err(|_| "bad \\x escape")?;
                    out.push(v);
                    i += 4;
                }
                _ => return Err("bad escape".into()),
            },
            b if b.is_ascii_graphic() => {
                out.push(b);
                i += 1;
            }
            b => return Err(format!("unescaped byte 0x{b:02x}")),
        }
    }
    if out.is_empty() {
        return Err("empty identity".into());
    }
    Ok(out)
}
