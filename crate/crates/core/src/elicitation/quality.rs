use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{QualityConfig, SessionState};
use crate::domain::{BracketStatus, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityFlag {
    FastCompletion,
    FailedAttention,
    OrderViolationUnexplained,
    IncompletePersonal,
    IncompleteSocietal,
    DroppedConnection,
}

/// Data-quality flags for a finished or abandoned session.
///
/// Completion time comes from the profile when recorded, otherwise from
/// the span of the transcript timestamps.
pub fn quality_flags(state: &SessionState, thresholds: &QualityConfig) -> BTreeSet<QualityFlag> {
    let mut flags = BTreeSet::new();

    let elapsed = state.profile().completion_seconds.or_else(|| {
        let t = state.transcript();
        match (t.first(), t.last()) {
            (Some(a), Some(b)) => Some((b.at - a.at).num_milliseconds() as f64 / 1000.0),
            _ => None,
        }
    });
    if elapsed.is_some_and(|s| s < thresholds.min_completion_seconds) {
        flags.insert(QualityFlag::FastCompletion);
    }
    if state.profile().attention_checks_failed > thresholds.max_attention_failures {
        flags.insert(QualityFlag::FailedAttention);
    }
    if state.order_violation() && !state.order_violation_explained() {
        flags.insert(QualityFlag::OrderViolationUnexplained);
    }

    let incomplete = |context: Context| {
        state
            .gamble_queue()
            .iter()
            .filter(|g| g.context == context)
            .any(|g| !matches!(state.bracket_for(g), Some(b) if b.status == BracketStatus::Resolved))
    };
    if incomplete(Context::Personal) {
        flags.insert(QualityFlag::IncompletePersonal);
    }
    if incomplete(Context::Societal) {
        flags.insert(QualityFlag::IncompleteSocietal);
    }
    if !state.is_done() {
        flags.insert(QualityFlag::DroppedConnection);
    }
    flags
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Block, LifeState};
    use crate::elicitation::{create_session, ParticipantProfile, Prompt, Response, SessionCondition, SessionEvent};
    use chrono::Utc;

    fn profile(seconds: Option<f64>, attention_failed: u32) -> ParticipantProfile {
        ParticipantProfile {
            age_band: "25-34".into(),
            sex: "Male".into(),
            party: "Green Party".into(),
            bsa_items: vec![5, 4, 5, 5, 4],
            left_right: 2,
            attention_checks_failed: attention_failed,
            completion_seconds: seconds,
        }
    }

    /// Runs a whole gambles-first session; `respond` picks the answer per gamble block.
    fn complete(profile: ParticipantProfile, respond: impl Fn(Block) -> Vec<Response>) -> SessionState {
        let mut s = create_session(profile, 31, Some(SessionCondition::GamblesFirst)).unwrap();
        loop {
            match s.next_prompt() {
                Err(_) => return s,
                Ok(Prompt::Gamble(g)) => {
                    let script = respond(g.block);
                    let response = script[g.ladder_index.min(script.len() - 1)];
                    s.apply(
                        SessionEvent::Choice {
                            gamble: g.gamble,
                            ladder_index: g.ladder_index,
                            response,
                        },
                        Utc::now(),
                    )
                    .unwrap();
                }
                Ok(Prompt::OwnLifeSatisfaction { .. }) => s.apply(SessionEvent::OwnLifeSatisfaction { value: 7 }, Utc::now()).unwrap(),
                Ok(Prompt::RateVignette { state, .. }) => {
                    let v = state.rank() as i64 * 2;
                    s.apply(SessionEvent::Rating { state, value: v, explanation: None }, Utc::now()).unwrap()
                }
                Ok(Prompt::ReviseOrExplain { .. }) => unreachable!(),
            }
        }
    }

    #[test]
    fn clean_session_has_no_flags() {
        let s = complete(profile(Some(1500.0), 0), |_| vec![Response::AcceptGamble]);
        assert!(s.is_done());
        assert_eq!(s.brackets().len(), 12);
        assert!(quality_flags(&s, &QualityConfig::default()).is_empty());
    }

    #[test]
    fn fast_and_inattentive() {
        let s = complete(profile(Some(100.0), 1), |_| vec![Response::AcceptGamble]);
        let f = quality_flags(&s, &QualityConfig::default());
        assert!(f.contains(&QualityFlag::FastCompletion));
        assert!(f.contains(&QualityFlag::FailedAttention));
    }

    #[test]
    fn undecidable_personal_gamble_is_incomplete_personal() {
        let s = complete(profile(Some(1500.0), 0), |block| match block {
            Block::NonAdjacentPersonal => vec![Response::CantChoose],
            _ => vec![Response::AcceptGamble],
        });
        let f = quality_flags(&s, &QualityConfig::default());
        assert!(f.contains(&QualityFlag::IncompletePersonal));
        assert!(!f.contains(&QualityFlag::IncompleteSocietal));
    }

    #[test]
    fn abandoned_session_and_declined_explanation() {
        let mut s = create_session(profile(Some(900.0), 0), 3, Some(SessionCondition::LifeSatisfactionFirst)).unwrap();
        s.apply(SessionEvent::OwnLifeSatisfaction { value: 6 }, Utc::now()).unwrap();
        for (st, v) in [(LifeState::A, 9), (LifeState::B, 10), (LifeState::C, 6), (LifeState::D, 4), (LifeState::E, 2)] {
            s.apply(SessionEvent::Rating { state: st, value: v, explanation: None }, Utc::now()).unwrap();
        }
        s.apply(SessionEvent::Explain { text: "  ".into() }, Utc::now()).unwrap();
        let f = quality_flags(&s, &QualityConfig::default());
        assert!(f.contains(&QualityFlag::OrderViolationUnexplained));
        assert!(f.contains(&QualityFlag::DroppedConnection));
        assert!(f.contains(&QualityFlag::IncompletePersonal));
    }
}
