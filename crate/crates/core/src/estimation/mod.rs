//! From brackets to utilities: indifference points, probability weighting,
//! loss aversion, chained standard-gamble solving and the per-participant
//! power-logit fit.

mod mle;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{BracketStatus, Context, GambleSpec, IndifferenceBracket, LifeState};

pub use mle::{
    choice_observations, log_likelihood, mle_fit, numeric_gradient, ChoiceObservation, MleConfig, MleFit,
    MleWarning, MLE_PARAMETERS,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimationError {
    #[error("gamble with baseline {0} is undecidable")]
    NotEstimable(LifeState),
    #[error("no bracket for the gamble with baseline {0}")]
    MissingGamble(LifeState),
    #[error("infinite aversion on the gamble with baseline {0}")]
    InfiniteAversion(LifeState),
    #[error("utilities are not strictly increasing: {0:?}")]
    NonMonotone(Vec<(LifeState, f64)>),
    #[error("loss aversion must be positive, got {0}")]
    InvalidLambda(f64),
    #[error("invalid weighting parameters delta={delta}, gamma={gamma}")]
    InvalidWeighting { delta: f64, gamma: f64 },
    #[error("no accept/refuse choices to fit")]
    NoChoices,
    #[error("optimizer did not converge from any start")]
    NonConvergence,
}

/// Log-scale midpoint of a resolved bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndifferencePoint {
    pub p_star: f64,
    pub infinite_aversion: bool,
}

impl IndifferencePoint {
    pub fn new(p_star: f64) -> Self {
        Self {
            p_star,
            infinite_aversion: p_star == 0.0,
        }
    }
}

/// Indifference point of `bracket`; `baseline` only labels the error.
pub fn indifference_point(
    bracket: &IndifferenceBracket,
    baseline: LifeState,
) -> Result<IndifferencePoint, EstimationError> {
    if bracket.status == BracketStatus::Undecidable {
        return Err(EstimationError::NotEstimable(baseline));
    }
    let lo = bracket.highest_accepted.probability();
    let hi = bracket.lowest_rejected.probability();
    Ok(IndifferencePoint::new((lo * hi).sqrt()))
}

/// Linear-in-log-odds probability weighting with identity value functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CptConfig {
    pub delta: f64,
    pub gamma: f64,
}

impl CptConfig {
    /// Median parameters from the published meta-analysis.
    pub const MEDIAN: CptConfig = CptConfig { delta: 0.77, gamma: 0.44 };
    /// The most distorting published parameter set.
    pub const EXTREME: CptConfig = CptConfig { delta: 1.19, gamma: 0.27 };
    pub const IDENTITY: CptConfig = CptConfig { delta: 1.0, gamma: 1.0 };

    pub fn new(delta: f64, gamma: f64) -> Result<Self, EstimationError> {
        if !(delta.is_finite() && gamma.is_finite() && delta > 0.0 && gamma > 0.0) {
            return Err(EstimationError::InvalidWeighting { delta, gamma });
        }
        Ok(Self { delta, gamma })
    }

    pub fn weight(&self, p: f64) -> f64 {
        probability_weight(p, self)
    }

    /// Decision weight on the worse outcome of a two-outcome gamble,
    /// normalized so the two weights sum to one.
    pub fn loss_share(&self, p: f64) -> f64 {
        let wl = self.weight(p);
        let ww = self.weight(1.0 - p);
        wl / (wl + ww)
    }
}

pub fn probability_weight(p: f64, cpt: &CptConfig) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let num = cpt.delta * p.powf(cpt.gamma);
    num / (num + (1.0 - p).powf(cpt.gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossAversion {
    /// `f64::INFINITY` for respondents who never accepted.
    #[serde(with = "extended_float")]
    pub lambda: f64,
    pub lambda_prime: f64,
}

impl LossAversion {
    pub fn from_lambda(lambda: f64) -> Result<Self, EstimationError> {
        if lambda.is_nan() || lambda <= 0.0 {
            return Err(EstimationError::InvalidLambda(lambda));
        }
        Ok(Self {
            lambda,
            lambda_prime: prime(lambda),
        })
    }

    pub fn is_infinite(&self) -> bool {
        self.lambda.is_infinite()
    }
}

fn prime(lambda: f64) -> f64 {
    if lambda.is_infinite() {
        1.0
    } else {
        (lambda - 1.0) / (lambda + 1.0)
    }
}

/// Loss aversion revealed at indifference on an equal-step gamble.
pub fn lambda_from_gamble(point: IndifferencePoint, cpt: Option<&CptConfig>) -> LossAversion {
    let p = point.p_star;
    let lambda = if p == 0.0 {
        f64::INFINITY
    } else {
        match cpt {
            None => (1.0 - p) / p,
            Some(c) => c.weight(1.0 - p) / c.weight(p),
        }
    };
    LossAversion {
        lambda,
        lambda_prime: prime(lambda),
    }
}

pub fn lambda_prime(l: &LossAversion) -> Result<f64, EstimationError> {
    if l.lambda.is_nan() || l.lambda <= 0.0 {
        return Err(EstimationError::InvalidLambda(l.lambda));
    }
    Ok(prime(l.lambda))
}

/// Inverse of the bounded transform: `(1 + m) / (1 - m)`.
pub fn lambda_from_prime(m: f64) -> f64 {
    if m >= 1.0 {
        f64::INFINITY
    } else {
        (1.0 + m) / (1.0 - m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scale {
    /// Death = 0 and E = 1 (or E = 0 and D = 1 without death).
    Estimation,
    /// Death = 0 and A = 1 (or E = 0 and A = 1 without death).
    Reporting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    ChainedSG,
    ChainedSgCpt,
    DiscreteChoiceMle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityCurve {
    pub context: Context,
    pub include_death: bool,
    pub values: BTreeMap<LifeState, f64>,
    pub scale: Scale,
    pub method: Method,
}

impl UtilityCurve {
    pub fn get(&self, state: LifeState) -> Option<f64> {
        self.values.get(&state).copied()
    }

    /// The same curve divided by its value at A.
    pub fn to_reporting(&self) -> UtilityCurve {
        let top = self.values[&LifeState::A];
        UtilityCurve {
            values: self.values.iter().map(|(s, v)| (*s, v / top)).collect(),
            scale: Scale::Reporting,
            ..self.clone()
        }
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.values
            .values()
            .zip(self.values.values().skip(1))
            .all(|(a, b)| a < b && b.is_finite())
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.values
            .values()
            .zip(self.values.values().skip(1))
            .all(|(a, b)| a <= b && b.is_finite())
    }

    /// Successive differences in rank order.
    pub fn increments(&self) -> Vec<f64> {
        let v: Vec<f64> = self.values.values().copied().collect();
        v.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Indifference points keyed by the baseline of each adjacent gamble.
pub type ChainPoints = BTreeMap<LifeState, IndifferencePoint>;

/// Resolves the brackets of one context's adjacent gambles into points.
/// Missing or undecidable gambles are left out.
pub fn chain_points<'a>(records: impl IntoIterator<Item = (&'a GambleSpec, &'a IndifferenceBracket)>) -> ChainPoints {
    records
        .into_iter()
        .filter(|(g, _)| g.is_adjacent())
        .filter_map(|(g, b)| indifference_point(b, g.baseline).ok().map(|p| (g.baseline, p)))
        .collect()
}

fn loss_share(p: f64, cpt: Option<&CptConfig>) -> f64 {
    match cpt {
        None => p,
        Some(c) => c.loss_share(p),
    }
}

/// Chains the adjacent gambles upward from the anchors.
///
/// With death the anchors are Death = 0 and E = 1 and all four gambles are
/// used. Without death the E-baseline gamble is dropped and the anchors are
/// E = 0 and D = 1. The result is on the estimation scale.
pub fn chained_solve(
    points: &ChainPoints,
    context: Context,
    cpt: Option<&CptConfig>,
    include_death: bool,
) -> Result<UtilityCurve, EstimationError> {
    let shares = chain_shares(points, cpt, include_death)?;
    let values = chain_values(&shares, include_death);
    let curve = UtilityCurve {
        context,
        include_death,
        values,
        scale: Scale::Estimation,
        method: if cpt.is_some() {
            Method::ChainedSgCpt
        } else {
            Method::ChainedSG
        },
    };
    // Shares lie in (0, 1), so every gap is positive; gaps below f64
    // resolution can still leave neighbouring values equal.
    if shares.iter().any(|q| !(*q > 0.0 && *q < 1.0)) || !curve.is_non_decreasing() {
        return Err(EstimationError::NonMonotone(curve.values.into_iter().collect()));
    }
    Ok(curve)
}

fn chain_baselines(include_death: bool) -> &'static [LifeState] {
    if include_death {
        &[LifeState::E, LifeState::D, LifeState::C, LifeState::B]
    } else {
        &[LifeState::D, LifeState::C, LifeState::B]
    }
}

fn chain_shares(
    points: &ChainPoints,
    cpt: Option<&CptConfig>,
    include_death: bool,
) -> Result<Vec<f64>, EstimationError> {
    chain_baselines(include_death)
        .iter()
        .map(|b| {
            let point = points.get(b).ok_or(EstimationError::MissingGamble(*b))?;
            if point.infinite_aversion {
                return Err(EstimationError::InfiniteAversion(*b));
            }
            Ok(loss_share(point.p_star, cpt))
        })
        .collect()
}

/// Solves `U_b = q * U_l + (1 - q) * U_w` for `U_w`, one gamble at a time,
/// in gap form: `U_w - U_b = (U_b - U_l) * q / (1 - q)`.
fn chain_values(shares: &[f64], include_death: bool) -> BTreeMap<LifeState, f64> {
    let first = if include_death { LifeState::Death } else { LifeState::E };
    let mut ladder = vec![0.0, 1.0];
    let mut gap = 1.0;
    for &q in shares {
        gap *= q / (1.0 - q);
        ladder.push(ladder[ladder.len() - 1] + gap);
    }
    ladder
        .into_iter()
        .enumerate()
        .map(|(k, u)| (LifeState::from_rank(first.rank() + k as u8).expect("chain stays within A"), u))
        .collect()
}

/// Utilities implied by the two ends of each bracket, on the estimation
/// scale. Each value is increasing in every share, so the pair bounds every
/// curve consistent with the brackets. An upper bound of `INFINITY` means
/// some bracket reaches certainty.
pub fn chained_bounds(
    brackets: &BTreeMap<LifeState, IndifferenceBracket>,
    cpt: Option<&CptConfig>,
    include_death: bool,
) -> Result<BTreeMap<LifeState, (f64, f64)>, EstimationError> {
    let mut lo_shares = Vec::new();
    let mut hi_shares = Vec::new();
    for b in chain_baselines(include_death) {
        let bracket = brackets.get(b).ok_or(EstimationError::MissingGamble(*b))?;
        if !bracket.is_resolved() {
            return Err(EstimationError::NotEstimable(*b));
        }
        lo_shares.push(loss_share(bracket.highest_accepted.probability(), cpt));
        hi_shares.push(loss_share(bracket.lowest_rejected.probability(), cpt));
    }
    let lo = chain_values(&lo_shares, include_death);
    let hi = chain_values(&hi_shares, include_death);
    Ok(lo
        .into_iter()
        .map(|(s, l)| {
            let h = hi[&s];
            (s, (l, if h.is_nan() { f64::INFINITY } else { h }))
        })
        .collect())
}

/// Utility of death on a death-excluded curve's scale, implied by the
/// E-baseline gamble. `None` under infinite aversion.
pub fn death_knot(
    curve_without_death: &UtilityCurve,
    death_point: IndifferencePoint,
    cpt: Option<&CptConfig>,
) -> Option<f64> {
    if death_point.infinite_aversion {
        return None;
    }
    let q = loss_share(death_point.p_star, cpt);
    let e = curve_without_death.get(LifeState::E)?;
    let d = curve_without_death.get(LifeState::D)?;
    Some((e - (1.0 - q) * d) / q)
}

/// Which gambles a participant-level summary averages over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subset {
    /// The adjacent gamble with this baseline.
    Single(LifeState),
    /// Baselines C and B: gambles among A, B, C and D only.
    PhysHealth,
    /// Baselines D, C and B.
    NoDeath,
    All,
}

impl Subset {
    pub const ROWS: [Subset; 7] = [
        Subset::Single(LifeState::E),
        Subset::Single(LifeState::D),
        Subset::Single(LifeState::C),
        Subset::Single(LifeState::B),
        Subset::PhysHealth,
        Subset::NoDeath,
        Subset::All,
    ];

    pub fn baselines(self) -> Vec<LifeState> {
        match self {
            Subset::Single(b) => vec![b],
            Subset::PhysHealth => vec![LifeState::C, LifeState::B],
            Subset::NoDeath => vec![LifeState::D, LifeState::C, LifeState::B],
            Subset::All => vec![LifeState::E, LifeState::D, LifeState::C, LifeState::B],
        }
    }

    pub fn label(self) -> String {
        match self {
            Subset::Single(b) => {
                let lose = LifeState::from_rank(b.rank() - 1).unwrap_or(LifeState::Death);
                let win = LifeState::from_rank(b.rank() + 1).unwrap_or(LifeState::A);
                format!("{b} vs {win}/{lose}")
            }
            Subset::PhysHealth => "All gambles (phys health)".into(),
            Subset::NoDeath => "All gambles (no death)".into(),
            Subset::All => "All gambles".into(),
        }
    }
}

/// Mean λ′ over the subset, or `None` if any of its gambles is missing
/// (undecidable gambles are absent from `las`).
pub fn participant_summary(las: &BTreeMap<LifeState, LossAversion>, subset: Subset) -> Option<f64> {
    let baselines = subset.baselines();
    let mut sum = 0.0;
    for b in &baselines {
        sum += las.get(b)?.lambda_prime;
    }
    Some(sum / baselines.len() as f64)
}

/// Serde helper writing non-finite floats as strings so JSON stays valid.
pub(crate) mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else if *v < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}
