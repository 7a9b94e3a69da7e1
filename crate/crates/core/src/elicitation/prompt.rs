use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ActiveGamble, Instrument, Response, Vignette};
use crate::domain::{
    ordering_violations, Basis, Block, Context, GambleSpec, LifeState, ProbabilityLadder, VignetteRatings,
    LADDER_DENOMINATORS,
};

/// Largest icon array served; smaller odds get a scale caption instead.
pub const MAX_PICTOGRAM_ICONS: u32 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Prompt {
    OwnLifeSatisfaction {
        question: String,
    },
    RateVignette {
        state: LifeState,
        vignette: Vignette,
        own_ls: Option<u8>,
        ratings: BTreeMap<LifeState, u8>,
    },
    ReviseOrExplain {
        violations: Vec<(LifeState, LifeState)>,
        ratings: BTreeMap<LifeState, u8>,
    },
    Gamble(GamblePrompt),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Odds {
    pub numerator: u32,
    pub denominator: u32,
}

impl Odds {
    pub fn text(&self) -> String {
        format!("{} in {}", self.numerator, with_thousands(self.denominator))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pictogram {
    pub numerator: u32,
    pub denominator: u32,
    pub icons: u32,
    pub highlighted: u32,
    /// How many times smaller the real risk is than the drawn array.
    pub scale_divisor: u32,
    pub caption: Option<String>,
}

impl Pictogram {
    pub fn for_denominator(denominator: u32) -> Self {
        let icons = denominator.min(MAX_PICTOGRAM_ICONS);
        let scale_divisor = denominator / icons;
        let caption = (scale_divisor > 1).then(|| {
            format!(
                "The real risk is {} times smaller than shown: 1 in {}.",
                with_thousands(scale_divisor),
                with_thousands(denominator)
            )
        });
        Self {
            numerator: 1,
            denominator,
            icons,
            highlighted: 1,
            scale_divisor,
            caption,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GambleOptions {
    pub certain: String,
    pub win: String,
    pub lose: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChangedField {
    Context,
    Options,
    Odds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GamblePrompt {
    pub gamble: GambleSpec,
    pub block: Block,
    /// Position of the gamble in the session queue (0..12).
    pub position: usize,
    pub ladder_index: usize,
    pub probability: f64,
    pub odds: Odds,
    pub pictogram: Pictogram,
    pub comparator: Option<String>,
    pub options: GambleOptions,
    pub scenario: String,
    pub reminder: Option<String>,
    /// Unchanged context is served collapsed after the first rung.
    pub collapsed: bool,
    pub changed: Vec<ChangedField>,
    pub previous_response: Option<Response>,
    /// Earlier vignette ratings, shown on request under the score basis.
    pub ratings_reference: Option<BTreeMap<LifeState, u8>>,
    /// Vignette descriptions of the states involved, under the letter basis.
    pub vignettes: Option<BTreeMap<LifeState, Vignette>>,
}

pub(crate) fn with_thousands(n: u32) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

fn state_label(state: LifeState, basis: Basis, ratings: &VignetteRatings) -> String {
    match (state, basis) {
        (LifeState::Death, _) => "Death".to_owned(),
        (s, Basis::LifeSatisfactionScores) => match ratings.get(s) {
            Some(v) => format!("Life satisfaction {v} (out of 10)"),
            None => format!("Situation {s}"),
        },
        (s, Basis::Letters) => format!("Situation {s}"),
    }
}

pub(super) fn vignette_prompt(
    instrument: &Instrument,
    ratings: &VignetteRatings,
    own_ls: Option<u8>,
    hold: bool,
) -> Prompt {
    if own_ls.is_none() {
        return Prompt::OwnLifeSatisfaction {
            question: instrument.own_ls_question.clone(),
        };
    }
    if hold {
        return Prompt::ReviseOrExplain {
            violations: ordering_violations(ratings).unwrap_or_default(),
            ratings: ratings.ratings.clone(),
        };
    }
    // Table order: A first.
    let next = LifeState::LIVING
        .iter()
        .rev()
        .copied()
        .find(|s| ratings.get(*s).is_none())
        .unwrap_or(LifeState::A);
    Prompt::RateVignette {
        state: next,
        vignette: instrument.vignettes.get(&next).cloned().unwrap_or(Vignette {
            career: String::new(),
            relationships: String::new(),
            physical_fitness: String::new(),
        }),
        own_ls,
        ratings: ratings.ratings.clone(),
    }
}

pub(super) fn gamble_prompt(
    instrument: &Instrument,
    active: &ActiveGamble,
    position: usize,
    previous_gamble: Option<&GambleSpec>,
    ratings: &VignetteRatings,
) -> Prompt {
    let g = active.gamble;
    let idx = active.ladder_index;
    let denominator = LADDER_DENOMINATORS[idx];
    let changed = if idx > 0 {
        vec![ChangedField::Odds]
    } else if previous_gamble.is_some_and(|p| p.context == g.context) {
        vec![ChangedField::Options, ChangedField::Odds]
    } else {
        vec![ChangedField::Context, ChangedField::Options, ChangedField::Odds]
    };
    let (scenario, reminder) = match g.context {
        Context::Personal => (instrument.personal_scenario.clone(), None),
        Context::Societal => (
            instrument.societal_scenario.clone(),
            Some(instrument.societal_reminder.clone()),
        ),
    };
    let (ratings_reference, vignettes) = match g.basis {
        Basis::LifeSatisfactionScores => (Some(ratings.ratings.clone()), None),
        Basis::Letters => (
            None,
            Some(
                [g.lose, g.baseline, g.win]
                    .iter()
                    .filter_map(|s| instrument.vignettes.get(s).map(|v| (*s, v.clone())))
                    .collect(),
            ),
        ),
    };
    Prompt::Gamble(GamblePrompt {
        gamble: g,
        block: g.block,
        position,
        ladder_index: idx,
        probability: ProbabilityLadder::probability(idx).expect("active rung is on the ladder"),
        odds: Odds {
            numerator: 1,
            denominator,
        },
        pictogram: Pictogram::for_denominator(denominator),
        comparator: instrument.comparators.get(idx).map(str::to_owned),
        options: GambleOptions {
            certain: state_label(g.baseline, g.basis, ratings),
            win: state_label(g.win, g.basis, ratings),
            lose: state_label(g.lose, g.basis, ratings),
        },
        scenario,
        reminder,
        collapsed: idx > 0,
        changed,
        previous_response: active.previous_response,
        ratings_reference,
        vignettes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elicitation::{create_session, ChoiceEvent, SessionCondition};
    use chrono::Utc;

    fn gamble(prompt: Prompt) -> GamblePrompt {
        match prompt {
            Prompt::Gamble(g) => g,
            other => panic!("expected gamble, got {other:?}"),
        }
    }

    fn walk_to_rung(rung: usize) -> GamblePrompt {
        let profile = crate::elicitation::ParticipantProfile {
            age_band: "55+".into(),
            sex: "Male".into(),
            party: "Other".into(),
            bsa_items: vec![3; 5],
            left_right: 5,
            attention_checks_failed: 0,
            completion_seconds: None,
        };
        let mut s = create_session(profile, 21, Some(SessionCondition::GamblesFirst)).unwrap();
        for _ in 0..rung {
            let g = gamble(s.next_prompt().unwrap());
            s = s
                .submit_choice(ChoiceEvent {
                    gamble: g.gamble,
                    ladder_index: g.ladder_index,
                    response: Response::RefuseGamble,
                    timestamp: Utc::now(),
                })
                .unwrap();
        }
        gamble(s.next_prompt().unwrap())
    }

    #[test]
    fn first_rung_is_one_in_two() {
        let p = walk_to_rung(0);
        assert_eq!(p.ladder_index, 0);
        assert_eq!(p.odds.text(), "1 in 2");
        assert_eq!(p.pictogram.icons, 2);
        assert!(!p.collapsed);
    }

    #[test]
    fn refusal_moves_to_one_in_five_and_is_idempotent() {
        let p = walk_to_rung(1);
        assert_eq!(p.odds.denominator, 5);
        assert_eq!(p.changed, vec![ChangedField::Odds]);
        assert_eq!(p.previous_response, Some(Response::RefuseGamble));
        assert!(p.collapsed);
        assert_eq!(walk_to_rung(1), p);
    }

    #[test]
    fn rung_three_carries_one_in_hundred_comparator() {
        let p = walk_to_rung(3);
        assert_eq!(p.odds.text(), "1 in 100");
        assert!(p.comparator.unwrap().contains("1 in 100 risk of dying every 10 years"));
        assert_eq!(p.pictogram.icons, 100);
        assert_eq!(p.pictogram.caption, None);
    }

    #[test]
    fn small_odds_are_capped_with_caption() {
        let p = walk_to_rung(4);
        assert_eq!(p.pictogram.icons, 100);
        assert_eq!(p.pictogram.scale_divisor, 10);
        assert!(p.pictogram.caption.unwrap().contains("1 in 1,000"));
        assert_eq!(Pictogram::for_denominator(1_000_000).scale_divisor, 10_000);
    }

    #[test]
    fn thousands_separator() {
        assert_eq!(with_thousands(2), "2");
        assert_eq!(with_thousands(1000), "1,000");
        assert_eq!(with_thousands(1_000_000), "1,000,000");
    }
}
