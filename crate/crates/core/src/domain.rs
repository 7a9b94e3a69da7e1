//! Shared domain types: life states, the descending probability ladder,
//! gamble specifications, indifference brackets and vignette ratings.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Absolute tolerance used whenever a probability read from outside the
/// process has to be matched against a ladder rung.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("ladder index {0} is out of range (0..{len})", len = LADDER_DENOMINATORS.len())]
    LadderIndexOutOfRange(usize),
    #[error("ratings are incomplete, missing {0:?}")]
    IncompleteRatings(Vec<LifeState>),
    #[error("rating {0} is outside 0..=10")]
    RatingOutOfRange(i64),
    #[error("{0} is not a rateable life state")]
    NotRateable(LifeState),
    #[error("probability {0} is not 0, 1 or a ladder rung")]
    OffLadderProbability(f64),
}

/// Ordinal life state. Variants are declared in ascending rank so the derived
/// `Ord` is the utility order `Death < E < D < C < B < A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LifeState {
    Death,
    E,
    D,
    C,
    B,
    A,
}

impl LifeState {
    pub const ALL: [LifeState; 6] = [
        LifeState::Death,
        LifeState::E,
        LifeState::D,
        LifeState::C,
        LifeState::B,
        LifeState::A,
    ];

    /// The five vignette states in ascending rank.
    pub const LIVING: [LifeState; 5] = [
        LifeState::E,
        LifeState::D,
        LifeState::C,
        LifeState::B,
        LifeState::A,
    ];

    pub fn rank(self) -> u8 {
        self as u8
    }

    pub fn from_rank(rank: u8) -> Option<Self> {
        Self::ALL.get(rank as usize).copied()
    }

    pub fn is_living(self) -> bool {
        self != LifeState::Death
    }

    pub fn letter(self) -> &'static str {
        match self {
            LifeState::Death => "Death",
            LifeState::E => "E",
            LifeState::D => "D",
            LifeState::C => "C",
            LifeState::B => "B",
            LifeState::A => "A",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "Death" | "death" | "F" => Some(LifeState::Death),
            "E" => Some(LifeState::E),
            "D" => Some(LifeState::D),
            "C" => Some(LifeState::C),
            "B" => Some(LifeState::B),
            "A" => Some(LifeState::A),
            _ => None,
        }
    }
}

impl fmt::Display for LifeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

/// Denominators of the failure probabilities offered, highest odds first.
pub const LADDER_DENOMINATORS: [u32; 8] = [2, 5, 10, 100, 1_000, 10_000, 100_000, 1_000_000];

/// The descending-probability ladder `1/2, 1/5, 1/10, 1/100, ..., 1/10^6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ProbabilityLadder;

impl ProbabilityLadder {
    pub const LEN: usize = LADDER_DENOMINATORS.len();
    pub const LAST: usize = Self::LEN - 1;

    pub fn denominator(index: usize) -> Result<u32, DomainError> {
        LADDER_DENOMINATORS
            .get(index)
            .copied()
            .ok_or(DomainError::LadderIndexOutOfRange(index))
    }

    pub fn probability(index: usize) -> Result<f64, DomainError> {
        Self::denominator(index).map(|d| 1.0 / d as f64)
    }

    pub fn steps() -> impl Iterator<Item = f64> {
        LADDER_DENOMINATORS.iter().map(|&d| 1.0 / d as f64)
    }

    /// Index of the rung equal to `p` (within [`PROBABILITY_TOLERANCE`]).
    pub fn index_of(p: f64) -> Option<usize> {
        Self::steps().position(|s| (s - p).abs() <= PROBABILITY_TOLERANCE)
    }
}

/// Next rung below `current_index`, or `None` when the ladder is exhausted.
pub fn ladder_next(current_index: usize) -> Result<Option<usize>, DomainError> {
    if current_index >= ProbabilityLadder::LEN {
        return Err(DomainError::LadderIndexOutOfRange(current_index));
    }
    Ok((current_index < ProbabilityLadder::LAST).then_some(current_index + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Context {
    Personal,
    Societal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Block {
    AdjacentPersonal,
    AdjacentSocietal,
    NonAdjacentPersonal,
}

impl Block {
    pub fn context(self) -> Context {
        match self {
            Block::AdjacentSocietal => Context::Societal,
            _ => Context::Personal,
        }
    }
}

/// How options are labelled on screen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Basis {
    Letters,
    LifeSatisfactionScores,
}

/// One standard-gamble question: keep `baseline` for certain, or take a
/// gamble that ends in `win` or (with the ladder probability) `lose`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GambleSpec {
    pub baseline: LifeState,
    pub win: LifeState,
    pub lose: LifeState,
    pub context: Context,
    pub block: Block,
    pub basis: Basis,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GambleViolation {
    #[error("death cannot be the baseline state")]
    DeathBaseline,
    #[error("states must satisfy lose < baseline < win")]
    RankOrder,
    #[error("adjacent blocks need unit gaps on both sides")]
    NotAdjacent,
    #[error("non-adjacent blocks need one gap > 1")]
    NoWideGap,
    #[error("gaps must not exceed 3")]
    GapTooWide,
    #[error("block {block:?} does not belong to the {context:?} context")]
    ContextMismatch { block: Block, context: Context },
}

impl GambleSpec {
    /// The chained-gamble triple with `baseline` between its two neighbours.
    pub fn adjacent(baseline: LifeState, context: Context, basis: Basis) -> Option<Self> {
        let rank = baseline.rank();
        if rank == 0 || rank >= 5 {
            return None;
        }
        let block = match context {
            Context::Personal => Block::AdjacentPersonal,
            Context::Societal => Block::AdjacentSocietal,
        };
        Some(Self {
            baseline,
            win: LifeState::from_rank(rank + 1)?,
            lose: LifeState::from_rank(rank - 1)?,
            context,
            block,
            basis,
        })
    }

    pub fn triple(&self) -> (LifeState, LifeState, LifeState) {
        (self.baseline, self.win, self.lose)
    }

    /// `(baseline - lose, win - baseline)` in rank steps.
    pub fn gaps(&self) -> (i16, i16) {
        let (b, w, l) = (
            self.baseline.rank() as i16,
            self.win.rank() as i16,
            self.lose.rank() as i16,
        );
        (b - l, w - b)
    }

    pub fn involves_death(&self) -> bool {
        self.lose == LifeState::Death
    }

    pub fn is_adjacent(&self) -> bool {
        self.gaps() == (1, 1)
    }
}

/// Accepts iff every `GambleSpec` invariant holds; reports the first failure.
pub fn validate_gamble(spec: &GambleSpec) -> Result<(), GambleViolation> {
    if spec.baseline == LifeState::Death {
        return Err(GambleViolation::DeathBaseline);
    }
    if !(spec.lose < spec.baseline && spec.baseline < spec.win) {
        return Err(GambleViolation::RankOrder);
    }
    if spec.block.context() != spec.context {
        return Err(GambleViolation::ContextMismatch {
            block: spec.block,
            context: spec.context,
        });
    }
    let (down, up) = spec.gaps();
    match spec.block {
        Block::AdjacentPersonal | Block::AdjacentSocietal => {
            if (down, up) != (1, 1) {
                return Err(GambleViolation::NotAdjacent);
            }
        }
        Block::NonAdjacentPersonal => {
            if down.max(up) <= 1 {
                return Err(GambleViolation::NoWideGap);
            }
            if down.max(up) > 3 {
                return Err(GambleViolation::GapTooWide);
            }
        }
    }
    Ok(())
}

/// The four chained gambles of one context, in chain order E, D, C, B.
pub fn chain_gambles(context: Context, basis: Basis) -> [GambleSpec; 4] {
    [LifeState::E, LifeState::D, LifeState::C, LifeState::B]
        .map(|b| GambleSpec::adjacent(b, context, basis).expect("interior state"))
}

/// Every rank-legal personal triple with at least one gap above one and no
/// gap above three, in a fixed (baseline, win, lose) order.
pub fn non_adjacent_triples(basis: Basis) -> Vec<GambleSpec> {
    let mut out = Vec::new();
    for baseline in LifeState::LIVING {
        for win in LifeState::ALL.iter().copied().filter(|w| *w > baseline) {
            for lose in LifeState::ALL.iter().copied().filter(|l| *l < baseline) {
                let spec = GambleSpec {
                    baseline,
                    win,
                    lose,
                    context: Context::Personal,
                    block: Block::NonAdjacentPersonal,
                    basis,
                };
                if validate_gamble(&spec).is_ok() {
                    out.push(spec);
                }
            }
        }
    }
    out
}

/// Endpoint of an indifference bracket. Rungs are held by index so ladder
/// membership never depends on float equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    Zero,
    Rung(usize),
    One,
}

impl Bound {
    pub fn probability(self) -> f64 {
        match self {
            Bound::Zero => 0.0,
            Bound::One => 1.0,
            Bound::Rung(i) => 1.0 / LADDER_DENOMINATORS[i] as f64,
        }
    }

    pub fn from_probability(p: f64) -> Result<Self, DomainError> {
        if p.abs() <= PROBABILITY_TOLERANCE {
            Ok(Bound::Zero)
        } else if (p - 1.0).abs() <= PROBABILITY_TOLERANCE {
            Ok(Bound::One)
        } else {
            ProbabilityLadder::index_of(p)
                .map(Bound::Rung)
                .ok_or(DomainError::OffLadderProbability(p))
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.probability())
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let p = f64::deserialize(deserializer)?;
        Bound::from_probability(p).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BracketStatus {
    Resolved,
    Undecidable,
}

/// Highest accepted and lowest rejected failure probability for one gamble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndifferenceBracket {
    pub highest_accepted: Bound,
    pub lowest_rejected: Bound,
    pub status: BracketStatus,
}

impl IndifferenceBracket {
    pub fn resolved(highest_accepted: Bound, lowest_rejected: Bound) -> Self {
        debug_assert!(highest_accepted.probability() < lowest_rejected.probability());
        Self {
            highest_accepted,
            lowest_rejected,
            status: BracketStatus::Resolved,
        }
    }

    pub fn undecidable(lowest_rejected: Bound) -> Self {
        Self {
            highest_accepted: Bound::Zero,
            lowest_rejected,
            status: BracketStatus::Undecidable,
        }
    }

    pub fn is_resolved(&self) -> bool {
        self.status == BracketStatus::Resolved
    }

    /// Bracket from probabilities; both must be 0, 1 or ladder rungs.
    pub fn from_probabilities(highest_accepted: f64, lowest_rejected: f64) -> Result<Self, DomainError> {
        Ok(Self::resolved(
            Bound::from_probability(highest_accepted)?,
            Bound::from_probability(lowest_rejected)?,
        ))
    }
}

/// Vignette ratings (0..=10) and any explanations offered for inversions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VignetteRatings {
    pub ratings: BTreeMap<LifeState, u8>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub explanations: BTreeMap<LifeState, String>,
}

impl VignetteRatings {
    pub fn from_ratings(a: u8, b: u8, c: u8, d: u8, e: u8) -> Result<Self, DomainError> {
        let mut out = Self::default();
        for (s, v) in [
            (LifeState::A, a),
            (LifeState::B, b),
            (LifeState::C, c),
            (LifeState::D, d),
            (LifeState::E, e),
        ] {
            out.set(s, v as i64)?;
        }
        Ok(out)
    }

    pub fn set(&mut self, state: LifeState, value: i64) -> Result<(), DomainError> {
        if !state.is_living() {
            return Err(DomainError::NotRateable(state));
        }
        if !(0..=10).contains(&value) {
            return Err(DomainError::RatingOutOfRange(value));
        }
        self.ratings.insert(state, value as u8);
        Ok(())
    }

    pub fn get(&self, state: LifeState) -> Option<u8> {
        self.ratings.get(&state).copied()
    }

    pub fn missing(&self) -> Vec<LifeState> {
        LifeState::LIVING
            .iter()
            .copied()
            .filter(|s| !self.ratings.contains_key(s))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.missing().is_empty()
    }
}

/// Adjacent pairs `(lower, higher)` whose ratings are strictly inverted.
/// Ties are not violations.
pub fn ordering_violations(ratings: &VignetteRatings) -> Result<Vec<(LifeState, LifeState)>, DomainError> {
    let missing = ratings.missing();
    if !missing.is_empty() {
        return Err(DomainError::IncompleteRatings(missing));
    }
    Ok(LifeState::LIVING
        .windows(2)
        .filter_map(|pair| {
            let (lo, hi) = (pair[0], pair[1]);
            (ratings.ratings[&lo] > ratings.ratings[&hi]).then_some((lo, hi))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_follow_utility_order() {
        let ranks: Vec<u8> = LifeState::ALL.iter().map(|s| s.rank()).collect();
        assert_eq!(ranks, vec![0, 1, 2, 3, 4, 5]);
        assert!(LifeState::Death < LifeState::E && LifeState::B < LifeState::A);
    }

    #[test]
    fn ladder_steps_match_published_odds() {
        let steps: Vec<f64> = ProbabilityLadder::steps().collect();
        assert_eq!(steps.len(), 8);
        assert_eq!(steps[0], 0.5);
        assert_eq!(steps[7], 1e-6);
        for w in steps.windows(2) {
            assert!(w[0] / w[1] >= 2.0, "each rung at least halves the odds");
        }
    }

    #[test]
    fn ladder_next_walks_down_and_stops() {
        assert_eq!(ladder_next(0), Ok(Some(1)));
        assert_eq!(ladder_next(3), Ok(Some(4)));
        assert_eq!(ProbabilityLadder::probability(4).unwrap(), 1e-3);
        assert_eq!(ladder_next(7), Ok(None));
        assert_eq!(ladder_next(8), Err(DomainError::LadderIndexOutOfRange(8)));
    }

    #[test]
    fn canonical_adjacent_triple_is_valid() {
        let g = GambleSpec::adjacent(LifeState::C, Context::Personal, Basis::Letters).unwrap();
        assert_eq!((g.win, g.lose), (LifeState::B, LifeState::D));
        assert_eq!(validate_gamble(&g), Ok(()));
    }

    #[test]
    fn death_baseline_is_rejected() {
        let g = GambleSpec {
            baseline: LifeState::Death,
            win: LifeState::E,
            lose: LifeState::Death,
            context: Context::Personal,
            block: Block::AdjacentPersonal,
            basis: Basis::Letters,
        };
        assert_eq!(validate_gamble(&g), Err(GambleViolation::DeathBaseline));
    }

    #[test]
    fn non_adjacent_membership_matches_enumeration() {
        // Brute force over all 6^3 labelled triples.
        let mut brute = Vec::new();
        for b in LifeState::ALL {
            for w in LifeState::ALL {
                for l in LifeState::ALL {
                    let (rb, rw, rl) = (b.rank() as i32, w.rank() as i32, l.rank() as i32);
                    let legal = rl < rb && rb < rw && b.is_living();
                    let (g1, g2) = (rb - rl, rw - rb);
                    if legal && g1.max(g2) > 1 && g1 <= 3 && g2 <= 3 {
                        brute.push((b, w, l));
                    }
                }
            }
        }
        let mut listed: Vec<_> = non_adjacent_triples(Basis::Letters)
            .iter()
            .map(|g| g.triple())
            .collect();
        brute.sort();
        listed.sort();
        assert_eq!(brute, listed);
        assert!(listed.contains(&(LifeState::D, LifeState::A, LifeState::E)));

        let wide = GambleSpec {
            baseline: LifeState::D,
            win: LifeState::A,
            lose: LifeState::E,
            context: Context::Personal,
            block: Block::NonAdjacentPersonal,
            basis: Basis::Letters,
        };
        assert_eq!(validate_gamble(&wide), Ok(()));
        let adjacent_in_wrong_block = GambleSpec { win: LifeState::C, ..wide };
        assert_eq!(validate_gamble(&adjacent_in_wrong_block), Err(GambleViolation::NoWideGap));
    }

    #[test]
    fn bound_serializes_as_probability() {
        let b = IndifferenceBracket::from_probabilities(0.1, 0.2).unwrap();
        let json = serde_json::to_string(&b).unwrap();
        assert_eq!(json, r#"{"highest_accepted":0.1,"lowest_rejected":0.2,"status":"Resolved"}"#);
        let back: IndifferenceBracket = serde_json::from_str(&json).unwrap();
        assert_eq!(back, b);
        assert!(serde_json::from_str::<Bound>("0.3").is_err());
    }

    #[test]
    fn ordering_violations_examples() {
        let mono = VignetteRatings::from_ratings(10, 8, 6, 4, 2).unwrap();
        assert!(ordering_violations(&mono).unwrap().is_empty());

        let inverted = VignetteRatings::from_ratings(10, 8, 9, 4, 2).unwrap();
        assert_eq!(
            ordering_violations(&inverted).unwrap(),
            vec![(LifeState::C, LifeState::B)]
        );

        let flat = VignetteRatings::from_ratings(5, 5, 5, 5, 5).unwrap();
        assert!(ordering_violations(&flat).unwrap().is_empty());

        let mut partial = VignetteRatings::default();
        partial.set(LifeState::A, 9).unwrap();
        assert!(matches!(
            ordering_violations(&partial),
            Err(DomainError::IncompleteRatings(m)) if m.len() == 4
        ));
    }

    #[test]
    fn rating_range_is_enforced() {
        let mut r = VignetteRatings::default();
        assert_eq!(r.set(LifeState::A, 11), Err(DomainError::RatingOutOfRange(11)));
        assert_eq!(r.set(LifeState::Death, 3), Err(DomainError::NotRateable(LifeState::Death)));
    }

    proptest::proptest! {
        #[test]
        fn violations_empty_iff_non_increasing(vals in proptest::collection::vec(0u8..=10, 5)) {
            let r = VignetteRatings::from_ratings(vals[0], vals[1], vals[2], vals[3], vals[4]).unwrap();
            let monotone = vals.windows(2).all(|w| w[0] >= w[1]);
            proptest::prop_assert_eq!(ordering_violations(&r).unwrap().is_empty(), monotone);
        }
    }
}
