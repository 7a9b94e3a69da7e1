//! File formats: session logs and records, the distribution file, and
//! versioned JSON envelopes for estimation and aggregation outputs.

mod distribution;
mod record;

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregation::AggregationError;
use crate::elicitation::SessionError;

pub use distribution::{emit_distribution, parse_distribution};
pub use record::{SessionHeader, SessionLog, SessionRecord};

/// Version stamped on every file and API payload.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("schema version {found} is not supported (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("expected a {expected} file, found {found}")]
    Kind { found: String, expected: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("replay failed: {0}")]
    Replay(#[from] SessionError),
    #[error("{0}")]
    Mismatch(String),
    #[error(transparent)]
    Distribution(#[from] AggregationError),
}

#[derive(Debug, Serialize, Deserialize)]
struct Envelope<T> {
    schema_version: u32,
    kind: String,
    data: T,
}

pub fn to_versioned_json<T: Serialize>(kind: &str, data: &T) -> Result<String, IoError> {
    let mut text = serde_json::to_string_pretty(&Envelope {
        schema_version: SCHEMA_VERSION,
        kind: kind.to_owned(),
        data,
    })?;
    text.push('\n');
    Ok(text)
}

pub fn from_versioned_json<T: DeserializeOwned>(kind: &str, text: &str) -> Result<T, IoError> {
    #[derive(Deserialize)]
    struct Probe {
        schema_version: u32,
        kind: String,
    }
    let probe: Probe = serde_json::from_str(text)?;
    record::check_version(probe.schema_version)?;
    if probe.kind != kind {
        return Err(IoError::Kind {
            found: probe.kind,
            expected: kind.to_owned(),
        });
    }
    Ok(serde_json::from_str::<Envelope<T>>(text)?.data)
}

pub fn write_versioned<T: Serialize>(path: &Path, kind: &str, data: &T) -> Result<(), IoError> {
    std::fs::write(path, to_versioned_json(kind, data)?)?;
    Ok(())
}

pub fn read_versioned<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<T, IoError> {
    from_versioned_json(kind, &std::fs::read_to_string(path)?)
}
