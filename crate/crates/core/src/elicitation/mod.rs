//! The adaptive survey session: vignette ratings, three gamble blocks walked
//! down the probability ladder, can't-choose handling, LIFO revision and
//! data-quality flags.
//!
//! A [`SessionState`] is a value. Every mutating call returns a new state
//! (or mutates in place via [`SessionState::apply`]) and appends to an
//! append-only transcript; the derived survey position is always the replay
//! of the transcript from the session seed.

mod instrument;
mod prompt;
mod quality;
mod session;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{DomainError, GambleSpec, LifeState};

pub use instrument::{ComparatorTable, Instrument, QualityConfig, Vignette};
pub use prompt::{ChangedField, GambleOptions, GamblePrompt, Odds, Pictogram, Prompt, MAX_PICTOGRAM_ICONS};
pub use quality::{quality_flags, QualityFlag};
pub use session::{create_session, ActiveGamble, GambleRecord, SessionState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SessionCondition {
    GamblesFirst,
    LifeSatisfactionFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    Profile,
    Vignettes,
    Block1,
    Block2,
    Block3,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Response {
    AcceptGamble,
    RefuseGamble,
    CantChoose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantProfile {
    pub age_band: String,
    pub sex: String,
    pub party: String,
    /// Five British Social Attitudes items, Likert 1..=5.
    pub bsa_items: Vec<u8>,
    pub left_right: i32,
    #[serde(default)]
    pub attention_checks_failed: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub completion_seconds: Option<f64>,
}

impl ParticipantProfile {
    pub fn validate(&self) -> Result<(), SessionError> {
        if self.bsa_items.len() != 5 {
            return Err(SessionError::InvalidProfile(format!(
                "expected 5 attitude items, got {}",
                self.bsa_items.len()
            )));
        }
        if let Some(bad) = self.bsa_items.iter().find(|v| !(1..=5).contains(*v)) {
            return Err(SessionError::InvalidProfile(format!(
                "attitude item {bad} outside 1..=5"
            )));
        }
        Ok(())
    }

    /// Summed attitude items (5..=25), the political alignment score.
    pub fn political_score(&self) -> u32 {
        self.bsa_items.iter().map(|&v| v as u32).sum()
    }
}

/// A single ladder response as submitted by a client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceEvent {
    pub gamble: GambleSpec,
    pub ladder_index: usize,
    pub response: Response,
    pub timestamp: DateTime<Utc>,
}

/// Anything a respondent can do to a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SessionEvent {
    OwnLifeSatisfaction {
        value: i64,
    },
    Rating {
        state: LifeState,
        value: i64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        explanation: Option<String>,
    },
    /// Answer to the revise-or-explain prompt without changing ratings.
    /// A blank text means the respondent declined to explain.
    Explain {
        text: String,
    },
    Choice {
        gamble: GambleSpec,
        ladder_index: usize,
        response: Response,
    },
    Back,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub seq: u64,
    pub at: DateTime<Utc>,
    pub event: SessionEvent,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error(transparent)]
    Validation(#[from] DomainError),
    #[error("session is complete")]
    SessionComplete,
    #[error("event does not match the active prompt: {0}")]
    Sequencing(String),
    #[error("nothing to revert")]
    EmptyHistory,
}
