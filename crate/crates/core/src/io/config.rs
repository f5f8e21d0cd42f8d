use std::path::Path;

use crate::error::{Error, Result};

/// Parses flat `key = value` lines. Blank lines and lines starting with `#`
/// are skipped; a value may be empty.
pub fn parse_config(text: &str, path: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: i as u64 + 1,
            column: 1,
            message: "expected `key = value`".into(),
        })?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i as u64 + 1,
                column: 1,
                message: format!("invalid key {key:?}"),
            });
        }
        let value = value.trim().trim_matches('"');
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}
