//! Report envelopes, input digests, and atomic file output.
//!
//! Every structured report the tool writes carries the same envelope: tool
//! name, version, the sha256 of every input file, and the parameter map of
//! the invocation. Envelopes serialize with sorted keys (serde_json maps are
//! ordered), so identical invocations produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct Envelope<B: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub inputs: Vec<InputDigest>,
    pub parameters: serde_json::Map<String, serde_json::Value>,
    pub body: B,
}

impl<B: Serialize> Envelope<B> {
    pub fn new(
        inputs: Vec<InputDigest>,
        parameters: serde_json::Map<String, serde_json::Value>,
        body: B,
    ) -> Self {
        Envelope {
            tool: "absnorm",
            version: env!("CARGO_PKG_VERSION"),
            inputs,
            parameters,
            body,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serialization");
        text.push('\n');
        text
    }
}

/// Hash a file the report depends on. The recorded path is the one the caller
/// supplied, not a canonicalised one, so reports do not leak directory roots
/// and rerunning from the same working directory reproduces them exactly.
pub fn digest_file(path: &Path) -> Result<InputDigest> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let sha256 = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256,
    })
}

/// Write-then-rename so readers never observe a half-written report.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())
        .with_context(|| format!("writing {}", path.display()))?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// Decimal form of `v` rounded to 12 significant digits, with no trailing
/// zero padding (the shortest representation of the rounded value).
pub fn fmt12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("rounded float parses");
    format!("{rounded}")
}
