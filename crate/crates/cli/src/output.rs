//! Staged artifact writing: everything is rendered in memory first and only
//! lands in the output directory once the whole command has succeeded.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use sentivol_core::artifact::Metadata;
use sentivol_core::data_io::{DataError, DATE_FORMAT};

use crate::config::Resolved;
use crate::error::CliError;

pub const TOOL: &str = concat!("sentivol ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        let name = name.into();
        self.files.retain(|(n, _)| *n != name);
        self.files.push((name, bytes));
    }

    pub fn text(&mut self, name: impl Into<String>, text: String) {
        self.add(name, text.into_bytes());
    }

    /// Renders a CSV writer into the named artifact.
    pub fn csv<F>(&mut self, name: &str, f: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<(), DataError>,
    {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.add(name, buf);
        Ok(())
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Writes every file as `.name.partial`, then renames them all into place.
    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let io = |e: std::io::Error, p: &Path| {
            CliError::config(format!("cannot write {}: {e}", p.display()))
        };
        fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let tmp = dir.join(format!(".{name}.partial"));
            if let Err(e) = fs::write(&tmp, bytes) {
                for (t, _) in &staged {
                    let _ = fs::remove_file(t);
                }
                let _ = fs::remove_file(&tmp);
                return Err(io(e, &tmp));
            }
            staged.push((tmp, dir.join(name)));
        }
        let mut done = Vec::with_capacity(staged.len());
        for (tmp, dest) in staged {
            fs::rename(&tmp, &dest).map_err(|e| io(e, &dest))?;
            done.push(dest);
        }
        Ok(done)
    }
}

/// Per-command state: resolved config and the metadata every artifact carries.
#[derive(Debug, Clone)]
pub struct Context {
    pub resolved: Resolved,
    pub command: String,
}

impl Context {
    pub fn new(resolved: Resolved, command: &str) -> Self {
        Self {
            resolved,
            command: command.to_string(),
        }
    }

    pub fn config(&self) -> &crate::config::RunConfig {
        &self.resolved.config
    }

    pub fn meta(&self, dates: &[NaiveDate]) -> Metadata {
        let c = self.config();
        let range = match (dates.first(), dates.last()) {
            (Some(a), Some(b)) => format!("{}..{}", a.format(DATE_FORMAT), b.format(DATE_FORMAT)),
            _ => "empty".into(),
        };
        Metadata::new()
            .with("tool", TOOL)
            .with("command", self.command.clone())
            .with("config_hash", c.hash())
            .with("seed", c.output.seed.to_string())
            .with("date_range", range)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_writes_everything_and_leaves_no_partials() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::new();
        a.text("a.csv", "x\n".into());
        a.text("b.svg", "<svg/>".into());
        a.text("a.csv", "y\n".into());
        assert_eq!(a.names(), ["b.svg", "a.csv"]);
        a.commit(dir.path()).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("a.csv")).unwrap(), "y\n");
        let leftovers: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().ends_with(".partial"))
            .collect();
        assert!(leftovers.is_empty());
    }
}
