use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

use zeq_core::subspace::BipartiteSubspace;
use zeq_core::upb::{upb_span, Upb};

/// Input that could not be read or parsed (exit status 2).
#[derive(Debug)]
pub struct BadInput(pub String);

impl fmt::Display for BadInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BadInput {}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| BadInput(format!("{}: {e}", path.display())).into())
}

pub fn parse<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| BadInput(format!("{}: {e}", path.display())).into())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse(path, &read_text(path)?)
}

/// A Subspace JSON file, or a UPB JSON file taken as its span.
pub fn read_subspace(path: &Path) -> Result<BipartiteSubspace> {
    let text = read_text(path)?;
    let value: serde_json::Value = parse(path, &text)?;
    if value.get("states").is_some() {
        let upb: Upb = parse(path, &text)?;
        Ok(upb_span(&upb)?)
    } else {
        parse(path, &text)
    }
}

pub fn to_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Where the JSON result and the human summary go.
pub struct Sink {
    output: Option<PathBuf>,
    quiet: bool,
}

impl Sink {
    pub fn new(output: Option<PathBuf>, quiet: bool) -> Self {
        Sink { output, quiet }
    }

    /// JSON to the output file, or to stdout when none is given.
    pub fn json<T: Serialize>(&self, value: &T) -> Result<()> {
        let text = to_pretty(value)?;
        match &self.output {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    /// Summary to stdout, or stderr when stdout carries the JSON.
    pub fn summary(&self, text: &str) {
        if self.quiet {
            return;
        }
        if self.output.is_some() {
            print!("{text}");
        } else {
            eprint!("{text}");
        }
    }

    pub fn output(&self) -> Option<&Path> {
        self.output.as_deref()
    }
}
