use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use super::{IoError, SCHEMA_VERSION};
use crate::domain::{GambleSpec, VignetteRatings};
use crate::elicitation::{
    quality_flags, GambleRecord, ParticipantProfile, Phase, QualityConfig, QualityFlag, SessionCondition,
    SessionEvent, SessionState, TranscriptEntry,
};

/// First line of a session log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub schema_version: u32,
    pub session_id: Uuid,
    pub seed: u64,
    pub condition: SessionCondition,
    pub profile: ParticipantProfile,
    pub created_at: DateTime<Utc>,
}

/// A session in exchange form: the header, the full transcript and the
/// outcomes derived from replaying it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    #[serde(flatten)]
    pub header: SessionHeader,
    pub gamble_queue: Vec<GambleSpec>,
    pub transcript: Vec<TranscriptEntry>,
    pub phase: Phase,
    pub own_ls: Option<u8>,
    pub ratings: VignetteRatings,
    pub order_violation: bool,
    pub order_violation_explained: bool,
    pub brackets: Vec<GambleRecord>,
    pub quality_flags: BTreeSet<QualityFlag>,
}

impl SessionRecord {
    pub fn from_state(state: &SessionState, created_at: DateTime<Utc>, quality: &QualityConfig) -> Self {
        Self {
            header: SessionHeader {
                schema_version: SCHEMA_VERSION,
                session_id: state.id(),
                seed: state.seed(),
                condition: state.condition(),
                profile: state.profile().clone(),
                created_at,
            },
            gamble_queue: state.gamble_queue().to_vec(),
            transcript: state.transcript().to_vec(),
            phase: state.phase(),
            own_ls: state.own_ls(),
            ratings: state.ratings().clone(),
            order_violation: state.order_violation(),
            order_violation_explained: state.order_violation_explained(),
            brackets: state.brackets(),
            quality_flags: quality_flags(state, quality),
        }
    }

    /// Replays the transcript into a live session.
    pub fn to_state(&self) -> Result<SessionState, IoError> {
        check_version(self.header.schema_version)?;
        Ok(SessionState::replay(
            self.header.profile.clone(),
            self.header.seed,
            self.header.condition,
            &self.transcript,
        )?)
    }

    /// Replays and checks that the stored outcomes match the transcript.
    pub fn verify(&self, quality: &QualityConfig) -> Result<SessionState, IoError> {
        let state = self.to_state()?;
        let rebuilt = Self::from_state(&state, self.header.created_at, quality);
        if rebuilt != *self {
            return Err(IoError::Mismatch(format!(
                "session {} does not match its transcript",
                self.header.session_id
            )));
        }
        Ok(state)
    }

    /// The events in effect after reverts.
    pub fn applied_events(&self) -> Result<Vec<SessionEvent>, IoError> {
        Ok(self.to_state()?.applied_events().to_vec())
    }

    pub fn to_json(&self) -> Result<String, IoError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let record: Self = serde_json::from_str(text)?;
        check_version(record.header.schema_version)?;
        Ok(record)
    }
}

pub(super) fn check_version(found: u32) -> Result<(), IoError> {
    if found != SCHEMA_VERSION {
        return Err(IoError::SchemaVersion {
            found,
            expected: SCHEMA_VERSION,
        });
    }
    Ok(())
}

/// Line-delimited session log: the header, then one transcript entry per
/// line. Appending one line per event keeps a dropped session recoverable.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub header: SessionHeader,
    pub entries: Vec<TranscriptEntry>,
    /// True when a trailing partial line was discarded.
    pub truncated: bool,
}

impl SessionLog {
    pub fn from_state(state: &SessionState, created_at: DateTime<Utc>) -> Self {
        let record = SessionRecord::from_state(state, created_at, &QualityConfig::default());
        Self {
            header: record.header,
            entries: record.transcript,
            truncated: false,
        }
    }

    pub fn to_jsonl(&self) -> Result<String, IoError> {
        let mut out = serde_json::to_string(&self.header)?;
        out.push('\n');
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e)?);
            out.push('\n');
        }
        Ok(out)
    }

    /// Parses a log, dropping an incomplete final line. A malformed line
    /// anywhere else is an error.
    pub fn parse(text: &str) -> Result<Self, IoError> {
        let complete = text.ends_with('\n');
        let lines: Vec<&str> = text.lines().collect();
        let mut truncated = false;
        let mut header: Option<SessionHeader> = None;
        let mut entries = Vec::new();
        for (i, line) in lines.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let last = i + 1 == lines.len();
            let parsed = if header.is_none() {
                serde_json::from_str::<SessionHeader>(line).map(|h| header = Some(h))
            } else {
                serde_json::from_str::<TranscriptEntry>(line).map(|e| entries.push(e))
            };
            match parsed {
                Ok(()) => {}
                Err(_) if last && !complete => truncated = true,
                Err(e) => {
                    return Err(IoError::Malformed {
                        line: i + 1,
                        message: e.to_string(),
                    })
                }
            }
        }
        let header = header.ok_or(IoError::Malformed {
            line: 1,
            message: "missing header".into(),
        })?;
        check_version(header.schema_version)?;
        Ok(Self {
            header,
            entries,
            truncated,
        })
    }

    pub fn read(path: &Path) -> Result<Self, IoError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), IoError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(self.to_jsonl()?.as_bytes())?;
        w.flush()?;
        Ok(())
    }

    /// Appends one entry to an existing log file.
    pub fn append(path: &Path, entry: &TranscriptEntry) -> Result<(), IoError> {
        let mut f = OpenOptions::new().append(true).open(path)?;
        let mut line = serde_json::to_string(entry)?;
        line.push('\n');
        f.write_all(line.as_bytes())?;
        Ok(())
    }

    pub fn to_state(&self) -> Result<SessionState, IoError> {
        Ok(SessionState::replay(
            self.header.profile.clone(),
            self.header.seed,
            self.header.condition,
            &self.entries,
        )?)
    }

    pub fn to_record(&self, quality: &QualityConfig) -> Result<SessionRecord, IoError> {
        let state = self.to_state()?;
        Ok(SessionRecord::from_state(&state, self.header.created_at, quality))
    }
}
