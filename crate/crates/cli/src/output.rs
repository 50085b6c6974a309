//! Output artifacts. Files are assembled in memory and written together
//! after the computation; if any write fails, the ones already written are
//! removed.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Bumped whenever a column or field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

/// `# `-prefixed header with the schema version and the resolved config.
pub fn comment_header(command: &str, config_toml: &str) -> String {
    let mut out = format!("# shear-decay {command} schema_version={SCHEMA_VERSION}\n# config:\n");
    for line in config_toml.lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            out.push_str("#   ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

/// JSON has no comments, so the header travels as two leading fields.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    config: &'a toml::Table,
    #[serde(flatten)]
    body: &'a T,
}

pub fn json_document<T: Serialize>(command: &str, config_toml: &str, body: &T) -> Result<String> {
    let config: toml::Table = toml::from_str(config_toml).context("re-reading resolved config")?;
    let mut text = serde_json::to_string_pretty(&Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        config: &config,
        body,
    })?;
    text.push('\n');
    Ok(text)
}

#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn add(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    /// Write every file into `dir`; on failure remove what was written.
    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written = Vec::new();
        for (name, contents) in &self.files {
            let path = dir.join(name);
            if let Err(e) = fs::write(&path, contents) {
                // the failed file may exist half-written
                let _ = fs::remove_file(&path);
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                return Err(e).with_context(|| format!("writing {}", path.display()));
            }
            written.push(path);
        }
        Ok(written)
    }
}

/// Shortest round-trip formatting, with `nan` for missing values.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_lines_are_comments() {
        let h = comment_header("run", "[run]\nnu = 0.001\n");
        assert!(h.lines().all(|l| l.starts_with('#')));
        assert!(h.contains("schema_version=1"));
        assert!(h.contains("nu = 0.001"));
    }

    #[test]
    fn json_carries_header_fields() {
        #[derive(Serialize)]
        struct Body {
            x: f64,
        }
        let text = json_document("oracle", "[oracle]\nnu = 0.001\n", &Body { x: 2.0 }).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["config"]["oracle"]["nu"], 0.001);
        assert_eq!(v["x"], 2.0);
    }

    #[test]
    fn failed_commit_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let mut set = OutputSet::default();
        set.add("a.csv", "x\n");
        set.add("missing/b.csv", "y\n");
        assert!(set.commit(dir.path()).is_err());
        assert!(!dir.path().join("a.csv").exists());
    }
}
