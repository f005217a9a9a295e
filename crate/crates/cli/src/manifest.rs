//! Run manifests: line-oriented `key TAB value` files written atomically next
//! to every command's output, carrying enough to replay the command.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::errors::CliError;

pub struct ManifestBuilder {
    pairs: Vec<(String, String)>,
    started: Instant,
}

/// JSON-encodes the process argv so replay tooling can split it safely.
fn argv_json() -> String {
    let args: Vec<String> = std::env::args().collect();
    let quoted: Vec<String> = args
        .iter()
        .map(|a| format!("\"{}\"", a.replace('\\', "\\\\").replace('"', "\\\"")))
        .collect();
    format!("[{}]", quoted.join(","))
}

impl ManifestBuilder {
    pub fn new(command: &str) -> Self {
        let mut builder = ManifestBuilder {
            pairs: Vec::new(),
            started: Instant::now(),
        };
        builder.push("command", command);
        builder.push("argv", argv_json());
        builder.push("version", causallp_core::VERSION);
        builder
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.pairs.push((key.to_owned(), value.to_string()));
    }

    pub fn push_path(&mut self, key: &str, path: &Path) {
        self.push(key, path.display());
    }

    pub fn push_all(&mut self, pairs: &[(String, String)]) {
        self.pairs.extend(pairs.iter().cloned());
    }

    /// Appends the wall-clock duration and writes atomically.
    pub fn write(mut self, path: &Path) -> Result<(), CliError> {
        self.push(
            "duration_secs",
            format!("{:.3}", self.started.elapsed().as_secs_f64()),
        );
        let mut out = String::new();
        for (k, v) in &self.pairs {
            out.push_str(k);
            out.push('\t');
            out.push_str(v);
            out.push('\n');
        }
        let tmp = temp_sibling(path);
        {
            let mut file = fs::File::create(&tmp)?;
            file.write_all(out.as_bytes())?;
            file.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

fn temp_sibling(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "manifest".to_owned());
    name.push_str(&format!(".tmp-{}", std::process::id()));
    path.with_file_name(name)
}
