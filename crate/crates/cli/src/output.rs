use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::Format;

/// Echo of one invocation, written next to its output.
#[derive(Debug, Serialize)]
pub struct Manifest<'a, A: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub format: Format,
    pub args: &'a A,
}

impl<'a, A: Serialize> Manifest<'a, A> {
    pub fn new(command: &'static str, seed: u64, format: Format, args: &'a A) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            format,
            args,
        }
    }

    /// `<out>.manifest.json` beside a file output, or one JSON line on stderr.
    pub fn write(&self, out: Option<&Path>) -> Result<()> {
        match out {
            Some(path) => {
                let path = manifest_path(path);
                let json = serde_json::to_string_pretty(self)? + "\n";
                fs::write(&path, json).with_context(|| format!("writing {}", path.display()))
            }
            None => {
                eprintln!("manifest: {}", serde_json::to_string(self)?);
                Ok(())
            }
        }
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

/// Write a report to `out`, or stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Render as pretty JSON or with the given table renderer.
pub fn render<T: Serialize>(format: Format, value: &T, table: impl FnOnce(&T) -> String) -> Result<String> {
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(value)? + "\n",
        Format::Table => table(value),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("out/report.json")), PathBuf::from("out/report.json.manifest.json"));
    }
}
