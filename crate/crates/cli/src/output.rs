//! Output plumbing: the JSON envelope and small CSV helpers.
//!
//! Machine-readable output carries no timestamps, so identical arguments and
//! seeds produce byte-identical files.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Uniform JSON shape: {command, params, results, seed, version}.
#[derive(Serialize)]
pub struct Envelope<P: Serialize, R: Serialize> {
    pub command: &'static str,
    pub params: P,
    pub results: R,
    pub seed: u64,
    pub version: &'static str,
}

pub fn version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// Writes to the path when given, stdout otherwise.
pub fn emit(output: &Option<PathBuf>, body: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, body)
            .with_context(|| format!("writing output to {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            if !body.ends_with('\n') {
                out.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

pub fn to_json<P: Serialize, R: Serialize>(envelope: &Envelope<P, R>) -> Result<String> {
    Ok(serde_json::to_string_pretty(envelope)?)
}

/// One CSV line; fields are already formatted.
pub fn csv_line(fields: &[String]) -> String {
    fields.join(",")
}

/// f64 in CSV: shortest round-trip form, empty for None.
pub fn csv_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
