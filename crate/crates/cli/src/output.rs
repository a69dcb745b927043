//! Deterministic text artifacts and atomic file output.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::CliError;

pub const TOOL: &str = "rydberg";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Round-trip exact decimal form of a double.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn float_or_empty(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

/// Leading `#` lines naming the tool and the resolved config.
pub fn csv_preamble(config: &RunConfig) -> String {
    format!(
        "# tool: {TOOL} {VERSION}\n# config: {}\n",
        serde_json::to_string(&config.provenance()).expect("config serializes")
    )
}

/// JSON document carrying the tool, the resolved config and `body`'s fields.
pub fn json_document(config: &RunConfig, body: Value) -> String {
    let mut doc = json!({
        "tool": TOOL,
        "version": VERSION,
        "config": config.provenance(),
    });
    if let (Value::Object(doc), Value::Object(body)) = (&mut doc, body) {
        doc.extend(body);
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
    text.push('\n');
    text
}

/// Writes through a temporary file in the target directory, then renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(float(0.13), "1.3000000000000000e-1");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, "a\n").unwrap();
        write_atomic(&path, "b\n").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "b\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
