//! Artifact metadata headers and CSV plumbing shared by every writer.
//!
//! CSV artifacts may start with `# key: value` comment lines; every reader
//! in this crate skips them, and [`read_metadata`] recovers them.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

/// Ordered `key: value` pairs written as leading `#` comment lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metadata {
    entries: Vec<(String, String)>,
}

impl Metadata {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.insert(key, value);
        self
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let key = key.into();
        let value = value.into();
        if let Some(slot) = self.entries.iter_mut().find(|(k, _)| *k == key) {
            slot.1 = value;
        } else {
            self.entries.push((key, value));
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        self.entries.iter().cloned().collect()
    }

    pub fn write_comment_lines<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for (k, v) in &self.entries {
            writeln!(w, "# {k}: {v}")?;
        }
        Ok(())
    }
}

/// Reads the leading `# key: value` block of a delimited text file.
pub fn read_metadata<R: Read>(reader: R) -> std::io::Result<Metadata> {
    let mut meta = Metadata::new();
    for line in BufReader::new(reader).lines() {
        let line = line?;
        let Some(rest) = line.strip_prefix('#') else {
            break;
        };
        if let Some((k, v)) = rest.split_once(':') {
            meta.insert(k.trim(), v.trim());
        }
    }
    Ok(meta)
}

pub fn read_metadata_file(path: &Path) -> std::io::Result<Metadata> {
    read_metadata(std::fs::File::open(path)?)
}

pub(crate) fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader)
}

/// Writes metadata comment lines and returns a CSV writer positioned after them.
pub fn csv_writer<W: Write>(mut inner: W, meta: &Metadata) -> std::io::Result<csv::Writer<W>> {
    meta.write_comment_lines(&mut inner)?;
    Ok(csv::WriterBuilder::new().from_writer(inner))
}

/// Lowercase hex SHA-256 of `bytes`, truncated to `len` characters.
pub fn short_hash(bytes: &[u8], len: usize) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = hex::encode(digest);
    s.truncate(len);
    s
}

/// Shortest round-tripping representation; exponent form for very small or large magnitudes.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}
