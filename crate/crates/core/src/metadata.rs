//! Run provenance embedded in every emitted artifact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TOOL_NAME: &str = "asrs";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Reproducible-build convention: when set, replaces the wall clock.
pub const SOURCE_DATE_EPOCH: &str = "SOURCE_DATE_EPOCH";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub command_line: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub seed: Option<u64>,
    /// RFC 3339, UTC.
    pub timestamp: String,
}

impl RunMetadata {
    pub fn new(command_line: Vec<String>, timestamp: String) -> Self {
        RunMetadata {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            command_line,
            inputs: Vec::new(),
            seed: None,
            timestamp,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn add_input(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let sha256 = file_sha256(path)?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256,
        });
        Ok(())
    }

    /// Metadata as `key: value` lines for a table preamble.
    pub fn comment_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("tool: {} {}", self.tool, self.version),
            format!("command: {}", self.command_line.join(" ")),
        ];
        for input in &self.inputs {
            lines.push(format!("input: {} sha256:{}", input.path, input.sha256));
        }
        if let Some(seed) = self.seed {
            lines.push(format!("seed: {seed}"));
        }
        lines.push(format!("timestamp: {}", self.timestamp));
        lines
    }
}

/// Current UTC time as RFC 3339, or `SOURCE_DATE_EPOCH` when it is set.
pub fn current_timestamp() -> Result<String> {
    let secs = match std::env::var(SOURCE_DATE_EPOCH) {
        Ok(v) => v.trim().parse::<i64>().map_err(|_| {
            Error::InvalidConfig(format!("{SOURCE_DATE_EPOCH}={v:?} is not an integer"))
        })?,
        Err(_) => chrono::Utc::now().timestamp(),
    };
    format_timestamp(secs)
}

pub fn format_timestamp(unix_secs: i64) -> Result<String> {
    chrono::DateTime::from_timestamp(unix_secs, 0)
        .map(|t| t.to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
        .ok_or_else(|| Error::InvalidConfig(format!("timestamp {unix_secs} out of range")))
}

/// Looks up `key: value` in a table preamble.
pub fn comment_value<'a>(comments: &'a [String], key: &str) -> Option<&'a str> {
    comments.iter().find_map(|c| {
        c.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(':'))
            .map(str::trim)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn timestamps_are_rfc3339_utc() {
        assert_eq!(format_timestamp(0).unwrap(), "1970-01-01T00:00:00Z");
        assert_eq!(format_timestamp(1_700_000_000).unwrap(), "2023-11-14T22:13:20Z");
    }

    #[test]
    fn comment_lines_are_parseable() {
        let mut meta = RunMetadata::new(vec!["asrs".into(), "score".into()], "1970-01-01T00:00:00Z".into())
            .with_seed(17);
        meta.inputs.push(InputDigest { path: "x.bin".into(), sha256: "00".into() });
        let lines = meta.comment_lines();
        assert_eq!(comment_value(&lines, "seed"), Some("17"));
        assert_eq!(comment_value(&lines, "command"), Some("asrs score"));
        assert_eq!(comment_value(&lines, "input"), Some("x.bin sha256:00"));
        assert_eq!(comment_value(&lines, "missing"), None);
    }
}
