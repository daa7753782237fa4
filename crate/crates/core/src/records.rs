//! Versioned JSON artifacts.
//!
//! Every file carries `format_version`, `kind`, `tool_version` and a
//! `provenance` block holding the seed and the fully resolved
//! configuration of the run that produced it. The payload's fields sit at
//! the top level next to those keys. Floats are written with shortest
//! round-trip formatting and parsed exactly.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new<C: Serialize>(seed: Option<u64>, config: &C) -> Result<Self> {
        Ok(Provenance {
            seed,
            config: serde_json::to_value(config)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub format_version: u32,
    pub kind: String,
    pub tool_version: String,
    pub provenance: Provenance,
    #[serde(flatten)]
    pub payload: T,
}

#[derive(Deserialize)]
struct Header {
    format_version: u32,
    kind: String,
}

impl<T> Artifact<T> {
    pub fn new(kind: &str, provenance: Provenance, payload: T) -> Self {
        Artifact {
            format_version: FORMAT_VERSION,
            kind: kind.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            provenance,
            payload,
        }
    }
}

impl<T: Serialize> Artifact<T> {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

impl<T: DeserializeOwned> Artifact<T> {
    /// Parses an artifact, checking the format version and the kind.
    pub fn from_json(text: &str, kind: &str) -> Result<Self> {
        let found = artifact_kind(text)?;
        if found != kind {
            return Err(Error::Format(format!("expected a {kind} record, found {found}")));
        }
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path, kind: &str) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?, kind)
    }
}

/// The `kind` of an artifact, after checking its format version.
pub fn artifact_kind(text: &str) -> Result<String> {
    let h: Header = serde_json::from_str(text)?;
    if h.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format_version {} (this build reads {FORMAT_VERSION})",
            h.format_version
        )));
    }
    Ok(h.kind)
}
