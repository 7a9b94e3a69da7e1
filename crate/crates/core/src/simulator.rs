//! Synthetic respondents with known utilities, run through the real
//! session engine. Used to validate the estimators end to end.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand_distr::StandardNormal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Context, GambleSpec, LifeState};
use crate::elicitation::{
    create_session, ParticipantProfile, Prompt, QualityConfig, Response, SessionCondition, SessionError,
    SessionEvent, SessionState,
};
use crate::estimation::CptConfig;
use crate::io::SessionRecord;

/// Ratings given to vignettes A..E.
pub const DEFAULT_RATINGS: [u8; 5] = [10, 8, 6, 4, 2];
pub const DEFAULT_OWN_LS: u8 = 7;
pub const DEFAULT_TIE_EPSILON: f64 = 1e-9;
/// Spacing of the synthetic clock.
pub const SECONDS_PER_EVENT: i64 = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("invalid agent: {0}")]
    InvalidAgent(String),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error("session did not finish within {0} events")]
    Runaway(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sensitivity {
    Deterministic,
    /// Power-logit choice noise; larger is sharper.
    Stochastic { sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    /// Utilities of all six states, Death = 0, strictly increasing.
    pub true_utilities: BTreeMap<LifeState, f64>,
    pub sensitivity: Sensitivity,
    /// Decide with weighted probabilities instead of raw ones.
    pub perceptual_weighting: Option<CptConfig>,
    /// Multiplies the weight on the losing branch in the societal context.
    pub societal_multiplier: f64,
    pub tie_epsilon: f64,
    pub seed: u64,
    pub ratings: [u8; 5],
    pub own_ls: u8,
    pub profile: ParticipantProfile,
    pub condition: Option<SessionCondition>,
}

impl AgentSpec {
    /// A deterministic agent with default ratings and a seed-derived profile.
    pub fn new(true_utilities: BTreeMap<LifeState, f64>, seed: u64) -> Self {
        Self {
            true_utilities,
            sensitivity: Sensitivity::Deterministic,
            perceptual_weighting: None,
            societal_multiplier: 1.0,
            tie_epsilon: DEFAULT_TIE_EPSILON,
            seed,
            ratings: DEFAULT_RATINGS,
            own_ls: DEFAULT_OWN_LS,
            profile: synthetic_profile(seed),
            condition: None,
        }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let bad = |m: String| Err(SimulationError::InvalidAgent(m));
        let mut prev = None;
        for s in LifeState::ALL {
            let Some(&u) = self.true_utilities.get(&s) else {
                return bad(format!("missing utility for {s}"));
            };
            if !u.is_finite() || prev.is_some_and(|p| u <= p) {
                return bad("utilities must be finite and strictly increasing".into());
            }
            prev = Some(u);
        }
        if self.true_utilities[&LifeState::Death] != 0.0 {
            return bad("death utility must be 0".into());
        }
        if let Sensitivity::Stochastic { sigma } = self.sensitivity {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return bad(format!("sigma must be positive, got {sigma}"));
            }
        }
        if !(self.societal_multiplier >= 1.0 && self.societal_multiplier.is_finite()) {
            return bad(format!("societal multiplier {} is below 1", self.societal_multiplier));
        }
        if !(self.tie_epsilon > 0.0) {
            return bad("tie epsilon must be positive".into());
        }
        if self.ratings.iter().chain([&self.own_ls]).any(|&r| r > 10) {
            return bad("ratings must lie in 0..=10".into());
        }
        Ok(())
    }

    fn u(&self, s: LifeState) -> f64 {
        self.true_utilities[&s]
    }

    /// Probability at which the agent is exactly indifferent, or `None` if
    /// weighting makes the advantage non-monotone in a way with no root.
    pub fn indifference_probability(&self, gamble: &GambleSpec) -> Option<f64> {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        if self.advantage(gamble, lo) <= 0.0 || self.advantage(gamble, hi) >= 0.0 {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.advantage(gamble, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    /// Weighted gain of taking the gamble over keeping the baseline.
    pub fn advantage(&self, gamble: &GambleSpec, p: f64) -> f64 {
        let (b, w, l) = (self.u(gamble.baseline), self.u(gamble.win), self.u(gamble.lose));
        let (lose_weight, win_weight) = match &self.perceptual_weighting {
            Some(c) => (c.weight(p), c.weight(1.0 - p)),
            None => (p, 1.0 - p),
        };
        let m = match gamble.context {
            Context::Personal => 1.0,
            Context::Societal => self.societal_multiplier,
        };
        win_weight * (w - b) - m * lose_weight * (b - l)
    }

    /// Modelled probability of accepting the gamble.
    pub fn accept_probability(&self, gamble: &GambleSpec, p: f64) -> f64 {
        let b = self.u(gamble.baseline);
        let v = b + self.advantage(gamble, p);
        match self.sensitivity {
            Sensitivity::Deterministic => match self.advantage(gamble, p) {
                d if d > self.tie_epsilon => 1.0,
                d if d < -self.tie_epsilon => 0.0,
                _ => 0.5,
            },
            Sensitivity::Stochastic { sigma } if v > 0.0 => {
                let z = sigma * (v.ln() - b.ln());
                1.0 / (1.0 + (-z).exp())
            }
            Sensitivity::Stochastic { .. } => 0.0,
        }
    }
}

/// Agent response to one ladder rung. `rng` is only drawn from by
/// stochastic agents.
pub fn decide(agent: &AgentSpec, gamble: &GambleSpec, p: f64, rng: &mut impl Rng) -> Response {
    match agent.sensitivity {
        Sensitivity::Deterministic => {
            let d = agent.advantage(gamble, p);
            if d > agent.tie_epsilon {
                Response::AcceptGamble
            } else if d.abs() <= agent.tie_epsilon {
                Response::CantChoose
            } else {
                Response::RefuseGamble
            }
        }
        Sensitivity::Stochastic { .. } => {
            if rng.gen::<f64>() < agent.accept_probability(gamble, p) {
                Response::AcceptGamble
            } else {
                Response::RefuseGamble
            }
        }
    }
}

/// Timestamps for simulated events: a fixed epoch plus a fixed spacing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticClock {
    pub epoch: DateTime<Utc>,
}

impl Default for SyntheticClock {
    fn default() -> Self {
        Self {
            epoch: Utc.with_ymd_and_hms(2024, 1, 1, 9, 0, 0).unwrap(),
        }
    }
}

impl SyntheticClock {
    /// Time of the event with sequence number `seq`.
    pub fn at(&self, seq: usize) -> DateTime<Utc> {
        self.epoch + Duration::seconds(SECONDS_PER_EVENT * (seq as i64 + 1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub quality: QualityConfig,
    pub clock: SyntheticClock,
    /// Safety cap on events per session.
    pub max_events: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            quality: QualityConfig::default(),
            clock: SyntheticClock::default(),
            max_events: 1_000,
        }
    }
}

/// The event an agent submits in reply to `prompt`.
pub fn respond(agent: &AgentSpec, prompt: &Prompt, rng: &mut impl Rng) -> SessionEvent {
    match prompt {
        Prompt::OwnLifeSatisfaction { .. } => SessionEvent::OwnLifeSatisfaction {
            value: agent.own_ls as i64,
        },
        Prompt::RateVignette { state, .. } => SessionEvent::Rating {
            state: *state,
            value: agent.ratings[(LifeState::A.rank() - state.rank()) as usize] as i64,
            explanation: None,
        },
        Prompt::ReviseOrExplain { .. } => SessionEvent::Explain {
            text: "The descriptions differ in ways the letters do not capture.".into(),
        },
        Prompt::Gamble(g) => SessionEvent::Choice {
            gamble: g.gamble,
            ladder_index: g.ladder_index,
            response: decide(agent, &g.gamble, g.probability, rng),
        },
    }
}

/// Runs one agent through a complete session and returns the live state.
pub fn run_agent_state(agent: &AgentSpec, cfg: &EngineConfig) -> Result<SessionState, SimulationError> {
    agent.validate()?;
    let mut state = create_session(agent.profile.clone(), agent.seed, agent.condition)?;
    let mut rng = ChaCha8Rng::seed_from_u64(agent.seed ^ 0x9e37_79b9_7f4a_7c15);
    while !state.is_done() {
        let seq = state.transcript().len();
        if seq >= cfg.max_events {
            return Err(SimulationError::Runaway(cfg.max_events));
        }
        let event = respond(agent, &state.next_prompt()?, &mut rng);
        state.apply(event, cfg.clock.at(seq))?;
    }
    Ok(state)
}

pub fn run_agent(agent: &AgentSpec, cfg: &EngineConfig) -> Result<SessionRecord, SimulationError> {
    let state = run_agent_state(agent, cfg)?;
    Ok(SessionRecord::from_state(&state, cfg.clock.epoch, &cfg.quality))
}

/// Runs every agent in parallel; output order follows `agents`.
pub fn run_cohort(agents: &[AgentSpec], cfg: &EngineConfig) -> Result<Vec<SessionRecord>, SimulationError> {
    agents.par_iter().map(|a| run_agent(a, cfg)).collect()
}

/// Utilities built from increments above Death.
pub fn utilities_from_increments(increments: [f64; 5]) -> BTreeMap<LifeState, f64> {
    let mut u = 0.0;
    let mut out = BTreeMap::from([(LifeState::Death, 0.0)]);
    for (s, inc) in LifeState::LIVING.into_iter().zip(increments) {
        u += inc;
        out.insert(s, u);
    }
    out
}

/// `U(rank) = rank^exponent`; exponent 1 is risk neutral, below 1 concave.
pub fn power_utilities(exponent: f64) -> BTreeMap<LifeState, f64> {
    LifeState::ALL
        .into_iter()
        .map(|s| (s, (s.rank() as f64).powf(exponent)))
        .collect()
}

/// Strictly concave utilities: five increments from U(0.05, 1), sorted
/// descending.
pub fn random_concave_utilities(rng: &mut impl Rng) -> BTreeMap<LifeState, f64> {
    let mut inc = [0.0_f64; 5];
    for x in &mut inc {
        *x = rng.gen_range(0.05..1.0);
    }
    inc.sort_by(|a, b| b.total_cmp(a));
    utilities_from_increments(inc)
}

const PARTIES: [&str; 5] = ["Conservative", "Labour", "Liberal Democrat", "Green", "Other"];
const AGE_BANDS: [&str; 5] = ["18-24", "25-34", "35-44", "45-54", "55+"];

/// A plausible profile drawn from `seed`.
pub fn synthetic_profile(seed: u64) -> ParticipantProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x2545_f491_4f6c_dd1d));
    ParticipantProfile {
        age_band: AGE_BANDS[rng.gen_range(0..AGE_BANDS.len())].into(),
        sex: if rng.gen_bool(0.5) { "Female" } else { "Male" }.into(),
        party: PARTIES[rng.gen_range(0..PARTIES.len())].into(),
        bsa_items: (0..5).map(|_| rng.gen_range(1..=5)).collect(),
        left_right: rng.gen_range(0..=10),
        attention_checks_failed: 0,
        completion_seconds: None,
    }
}

/// How a cohort's true utilities are generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UtilityModel {
    Power { exponent: f64 },
    /// Increments with `ln inc_k = -drift·k + spread·z_k`, `z_k` standard
    /// normal, so adjacent-gamble ln λ is normal with mean `drift`.
    LogNormalIncrements { drift: f64, spread: f64 },
    RandomConcave,
    Fixed { increments: [f64; 5] },
}

/// A homogeneous cohort description; the `simulate` config file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub size: usize,
    pub seed: u64,
    pub utilities: UtilityModel,
    #[serde(default = "deterministic")]
    pub sensitivity: Sensitivity,
    #[serde(default)]
    pub perceptual_weighting: Option<CptConfig>,
    #[serde(default = "one")]
    pub societal_multiplier: f64,
    #[serde(default)]
    pub condition: Option<SessionCondition>,
    #[serde(default = "default_ratings")]
    pub ratings: [u8; 5],
    #[serde(default = "default_own_ls")]
    pub own_ls: u8,
}

fn deterministic() -> Sensitivity {
    Sensitivity::Deterministic
}
fn one() -> f64 {
    1.0
}
fn default_ratings() -> [u8; 5] {
    DEFAULT_RATINGS
}
fn default_own_ls() -> u8 {
    DEFAULT_OWN_LS
}

impl CohortSpec {
    pub fn new(size: usize, seed: u64, utilities: UtilityModel) -> Self {
        Self {
            size,
            seed,
            utilities,
            sensitivity: Sensitivity::Deterministic,
            perceptual_weighting: None,
            societal_multiplier: 1.0,
            condition: None,
            ratings: DEFAULT_RATINGS,
            own_ls: DEFAULT_OWN_LS,
        }
    }

    /// Expands the spec into agents. Agent `i` gets session seed
    /// `seed + i`; random utilities come from a stream seeded by `seed`.
    pub fn agents(&self) -> Vec<AgentSpec> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.size as u64)
            .map(|i| {
                let utilities = match &self.utilities {
                    UtilityModel::Power { exponent } => power_utilities(*exponent),
                    UtilityModel::LogNormalIncrements { drift, spread } => {
                        utilities_from_increments(std::array::from_fn(|k| {
                            let z: f64 = rng.sample(StandardNormal);
                            (-drift * k as f64 + spread * z).exp()
                        }))
                    }
                    UtilityModel::RandomConcave => random_concave_utilities(&mut rng),
                    UtilityModel::Fixed { increments } => utilities_from_increments(*increments),
                };
                let seed = self.seed.wrapping_add(i);
                AgentSpec {
                    sensitivity: self.sensitivity,
                    perceptual_weighting: self.perceptual_weighting,
                    societal_multiplier: self.societal_multiplier,
                    ratings: self.ratings,
                    own_ls: self.own_ls,
                    condition: self.condition,
                    ..AgentSpec::new(utilities, seed)
                }
            })
            .collect()
    }
}

/// Drives a session with random but valid input, including reverts and
/// can't-choose answers. Used to exercise replay and the HTTP layer.
pub fn erratic_events(seed: u64, clock: &SyntheticClock) -> Result<SessionState, SimulationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let condition = if rng.gen_bool(0.5) {
        SessionCondition::GamblesFirst
    } else {
        SessionCondition::LifeSatisfactionFirst
    };
    let mut state = create_session(synthetic_profile(seed), seed, Some(condition))?;
    let budget = 400;
    while !state.is_done() {
        let seq = state.transcript().len();
        if seq >= budget {
            return Err(SimulationError::Runaway(budget));
        }
        let event = if !state.applied_events().is_empty() && rng.gen_bool(0.08) {
            SessionEvent::Back
        } else {
            match state.next_prompt()? {
                Prompt::OwnLifeSatisfaction { .. } => SessionEvent::OwnLifeSatisfaction {
                    value: rng.gen_range(0..=10),
                },
                Prompt::RateVignette { state: s, .. } => SessionEvent::Rating {
                    state: s,
                    value: rng.gen_range(0..=10),
                    explanation: None,
                },
                Prompt::ReviseOrExplain { .. } => SessionEvent::Explain {
                    text: if rng.gen_bool(0.5) { "they feel similar".into() } else { String::new() },
                },
                Prompt::Gamble(g) => SessionEvent::Choice {
                    gamble: g.gamble,
                    ladder_index: g.ladder_index,
                    response: match rng.gen_range(0..10) {
                        0..=3 => Response::AcceptGamble,
                        4..=8 => Response::RefuseGamble,
                        _ => Response::CantChoose,
                    },
                },
            }
        };
        state.apply(event, clock.at(seq))?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{chain_gambles, Basis, BracketStatus, IndifferenceBracket};
    use crate::estimation::{chain_points, chained_bounds, chained_solve, lambda_from_gamble, indifference_point};

    fn gamble(baseline: LifeState) -> GambleSpec {
        GambleSpec::adjacent(baseline, Context::Personal, Basis::Letters).unwrap()
    }

    fn sqrt_agent() -> AgentSpec {
        AgentSpec::new(power_utilities(0.5), 1)
    }

    #[test]
    fn linear_agent_is_indifferent_at_half() {
        let agent = AgentSpec::new(power_utilities(1.0), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(decide(&agent, &gamble(LifeState::C), 0.5, &mut rng), Response::CantChoose);
        assert_eq!(decide(&agent, &gamble(LifeState::C), 0.2, &mut rng), Response::AcceptGamble);
    }

    #[test]
    fn sqrt_agent_on_death_gamble() {
        let agent = sqrt_agent();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = gamble(LifeState::E);
        assert_eq!(decide(&agent, &g, 0.5, &mut rng), Response::RefuseGamble);
        assert_eq!(decide(&agent, &g, 0.2, &mut rng), Response::AcceptGamble);
        let p = agent.indifference_probability(&g).unwrap();
        assert!((p - (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn weighting_agent_sees_tiny_odds_inflated() {
        let agent = AgentSpec {
            perceptual_weighting: Some(CptConfig::MEDIAN),
            ..sqrt_agent()
        };
        let w = agent.perceptual_weighting.unwrap().weight(1e-6);
        assert!((w - 0.002).abs() < 5e-4);
        // Loss weight at 1e-6 equals the raw-probability loss weight at w.
        let g = gamble(LifeState::E);
        let plain = sqrt_agent();
        let win_w = agent.perceptual_weighting.unwrap().weight(1.0 - 1e-6);
        let expected = win_w * (plain.u(LifeState::D) - 1.0) - w;
        assert!((agent.advantage(&g, 1e-6) - expected).abs() < 1e-15);
    }

    #[test]
    fn full_session_has_twelve_settled_gambles() {
        let rec = run_agent(&sqrt_agent(), &EngineConfig::default()).unwrap();
        assert_eq!(rec.brackets.len(), 12);
        assert!(rec.brackets.iter().all(|g| matches!(
            g.bracket.status,
            BracketStatus::Resolved | BracketStatus::Undecidable
        )));
        assert_eq!(rec.ratings.ratings[&LifeState::A], 10);
        assert_eq!(rec.own_ls, Some(7));
    }

    #[test]
    fn identical_seeds_give_identical_transcripts() {
        let cohort: Vec<_> = (0..20).map(|_| sqrt_agent()).collect();
        let recs = run_cohort(&cohort, &EngineConfig::default()).unwrap();
        assert!(recs.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn true_indifference_lies_in_each_bracket() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..20 {
            let agent = AgentSpec::new(random_concave_utilities(&mut rng), i);
            let state = run_agent_state(&agent, &EngineConfig::default()).unwrap();
            for rec in state.brackets() {
                let p = agent.indifference_probability(&rec.gamble).unwrap();
                let b = rec.bracket;
                assert!(b.is_resolved());
                assert!(b.highest_accepted.probability() <= p && p <= b.lowest_rejected.probability());
            }
        }
    }

    #[test]
    fn chained_bounds_contain_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let agent = AgentSpec::new(random_concave_utilities(&mut rng), 2);
        let state = run_agent_state(&agent, &EngineConfig::default()).unwrap();
        let recs = state.brackets();
        let personal: Vec<_> = recs
            .iter()
            .filter(|r| r.gamble.context == Context::Personal && r.gamble.is_adjacent())
            .collect();
        let brackets: BTreeMap<LifeState, IndifferenceBracket> =
            personal.iter().map(|r| (r.gamble.baseline, r.bracket)).collect();
        assert_eq!(brackets.len(), chain_gambles(Context::Personal, Basis::Letters).len());
        let bounds = chained_bounds(&brackets, None, true).unwrap();
        let scale = agent.u(LifeState::E);
        for (s, (lo, hi)) in bounds {
            let truth = agent.u(s) / scale;
            assert!(lo - 1e-12 <= truth && truth <= hi + 1e-12, "{s}: {lo} {truth} {hi}");
        }
        let points = chain_points(personal.iter().map(|r| (&r.gamble, &r.bracket)));
        assert!(chained_solve(&points, Context::Personal, None, true).is_ok());
    }

    #[test]
    fn societal_multiplier_deepens_societal_brackets() {
        let agent = AgentSpec {
            societal_multiplier: 12.0,
            ..AgentSpec::new(power_utilities(0.5), 4)
        };
        let state = run_agent_state(&agent, &EngineConfig::default()).unwrap();
        for rec in state.brackets().iter().filter(|r| r.gamble.context == Context::Societal) {
            let personal = state
                .brackets()
                .into_iter()
                .find(|r| r.gamble.context == Context::Personal && r.gamble.triple() == rec.gamble.triple())
                .unwrap();
            let ls = lambda_from_gamble(indifference_point(&rec.bracket, rec.gamble.baseline).unwrap(), None);
            let lp = lambda_from_gamble(indifference_point(&personal.bracket, rec.gamble.baseline).unwrap(), None);
            assert!(ls.lambda > lp.lambda);
        }
    }

    #[test]
    fn stochastic_agent_matches_logit() {
        let agent = AgentSpec {
            sensitivity: Sensitivity::Stochastic { sigma: 20.0 },
            ..sqrt_agent()
        };
        let g = gamble(LifeState::B);
        let p = 0.1;
        let v: f64 = p * 3f64.sqrt() + 0.9 * 5f64.sqrt();
        let b: f64 = 2.0;
        let expected = v.powf(20.0) / (v.powf(20.0) + b.powf(20.0));
        assert!((agent.accept_probability(&g, p) - expected).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let hits = (0..20_000)
            .filter(|_| decide(&agent, &g, p, &mut rng) == Response::AcceptGamble)
            .count() as f64
            / 20_000.0;
        assert!((hits - expected).abs() < 0.02);
    }

    #[test]
    fn erratic_sessions_finish_and_replay() {
        for seed in 0..10 {
            let s = erratic_events(seed, &SyntheticClock::default()).unwrap();
            let again = SessionState::replay(s.profile().clone(), s.seed(), s.condition(), s.transcript()).unwrap();
            assert!(again.same_position(&s));
        }
    }

    #[test]
    fn cohort_spec_round_trips_and_validates() {
        let mut spec = CohortSpec::new(3, 42, UtilityModel::RandomConcave);
        spec.sensitivity = Sensitivity::Stochastic { sigma: 20.0 };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<CohortSpec>(&json).unwrap(), spec);
        let minimal: CohortSpec = serde_json::from_str(r#"{"size":2,"seed":1,"utilities":{"kind":"power","exponent":0.5}}"#).unwrap();
        assert_eq!(minimal.sensitivity, Sensitivity::Deterministic);
        assert!(minimal.agents().iter().all(|a| a.validate().is_ok()));

        let mut bad = AgentSpec::new(power_utilities(0.5), 0);
        bad.true_utilities.insert(LifeState::B, 0.1);
        assert!(bad.validate().is_err());
        assert!(run_agent(&bad, &EngineConfig::default()).is_err());
    }
}
