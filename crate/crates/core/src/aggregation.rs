//! Life-satisfaction-indexed utility functions and Representative Life
//! Satisfaction (RLS) over a binned distribution.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Context, LifeState};
use crate::estimation::{CptConfig, UtilityCurve};

pub const LS_MIN: f64 = 0.0;
pub const LS_MAX: f64 = 10.0;
const BISECTION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregationError {
    #[error("anchor ratings must increase strictly from E to A: {0:?}")]
    NonMonotoneAnchors(Vec<(LifeState, f64)>),
    #[error("curve has no utility for {0}")]
    MissingState(LifeState),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("no utility functions to aggregate")]
    Empty,
    #[error("no RLS solution inside 0..=10")]
    OutOfRange,
}

/// Piecewise-linear utility over the 0..=10 life-satisfaction axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsUtilityFunction {
    pub participant: String,
    /// `(ls, u)` pairs, strictly increasing in `ls`, spanning 0..=10.
    pub knots: Vec<(f64, f64)>,
}

impl LsUtilityFunction {
    pub fn eval(&self, ls: f64) -> f64 {
        let ls = ls.clamp(LS_MIN, LS_MAX);
        let k = &self.knots;
        let i = k.partition_point(|(x, _)| *x <= ls).clamp(1, k.len() - 1);
        let ((x0, y0), (x1, y1)) = (k[i - 1], k[i]);
        y0 + (y1 - y0) * (ls - x0) / (x1 - x0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            participant: self.participant.clone(),
            knots: self.knots.iter().map(|(x, y)| (*x, y * factor)).collect(),
        }
    }

    pub fn is_concave(&self) -> bool {
        let slopes: Vec<f64> = self
            .knots
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        slopes.windows(2).all(|s| s[1] <= s[0] + 1e-12)
    }
}

/// Line through two knots, evaluated at `x`.
fn extend((x0, y0): (f64, f64), (x1, y1): (f64, f64), x: f64) -> f64 {
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Places each state's utility at its anchor rating.
///
/// A Death utility in the curve becomes a knot at `death_ls` when it lies
/// strictly below the lowest anchor. Beyond the outermost knots the function
/// continues linearly to 0 and 10.
pub fn build_ls_function(
    participant: &str,
    curve: &UtilityCurve,
    anchors: &BTreeMap<LifeState, f64>,
    death_ls: f64,
) -> Result<LsUtilityFunction, AggregationError> {
    let mut knots = Vec::with_capacity(7);
    for s in LifeState::LIVING {
        let ls = *anchors.get(&s).ok_or(AggregationError::MissingState(s))?;
        let u = curve.get(s).ok_or(AggregationError::MissingState(s))?;
        knots.push((ls, u));
    }
    let ordered = knots.windows(2).all(|w| w[0].0 < w[1].0)
        && knots.iter().all(|(x, _)| (LS_MIN..=LS_MAX).contains(x));
    if !ordered {
        return Err(AggregationError::NonMonotoneAnchors(
            LifeState::LIVING.iter().copied().zip(knots.iter().map(|k| k.0)).collect(),
        ));
    }
    if let Some(u) = curve.get(LifeState::Death) {
        if death_ls < knots[0].0 {
            knots.insert(0, (death_ls, u));
        }
    }
    if knots[0].0 > LS_MIN {
        let y = extend(knots[0], knots[1], LS_MIN);
        knots.insert(0, (LS_MIN, y));
    }
    let n = knots.len();
    if knots[n - 1].0 < LS_MAX {
        let y = extend(knots[n - 2], knots[n - 1], LS_MAX);
        knots.push((LS_MAX, y));
    }
    Ok(LsUtilityFunction {
        participant: participant.to_owned(),
        knots,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub label: String,
    pub ls_low: u8,
    pub ls_high: u8,
    pub proportion: f64,
    pub representative_ls: f64,
}

impl Band {
    pub fn midpoint(ls_low: u8, ls_high: u8) -> f64 {
        (ls_low as f64 + ls_high as f64) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub bands: Vec<Band>,
}

impl DistributionSpec {
    /// Bands 0-4, 5-6, 7-8 and 9-10 at their midpoints.
    pub fn from_proportions(p: [f64; 4]) -> Result<Self, AggregationError> {
        let edges = [(0, 4), (5, 6), (7, 8), (9, 10)];
        let bands = edges
            .iter()
            .zip(p)
            .map(|(&(lo, hi), proportion)| Band {
                label: format!("{lo}-{hi}"),
                ls_low: lo,
                ls_high: hi,
                proportion,
                representative_ls: Band::midpoint(lo, hi),
            })
            .collect();
        let spec = Self { bands };
        spec.validate()?;
        Ok(spec)
    }

    /// An illustrative UK-like distribution (94% at 5 or above).
    pub fn illustrative() -> Self {
        Self::from_proportions([0.06, 0.16, 0.52, 0.26]).expect("valid proportions")
    }

    /// All mass on one integer score.
    pub fn point_mass(ls: u8) -> Result<Self, AggregationError> {
        let mut spec = Self::from_proportions([0.25; 4])?;
        for b in &mut spec.bands {
            let inside = (b.ls_low..=b.ls_high).contains(&ls);
            b.proportion = if inside { 1.0 } else { 0.0 };
            if inside {
                b.representative_ls = ls as f64;
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), AggregationError> {
        let bad = |m: String| Err(AggregationError::InvalidDistribution(m));
        if self.bands.is_empty() {
            return bad("no bands".into());
        }
        let total: f64 = self.bands.iter().map(|b| b.proportion).sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("proportions sum to {total}"));
        }
        let mut expected_low = 0u8;
        for b in &self.bands {
            if !(b.proportion >= 0.0 && b.proportion.is_finite()) {
                return bad(format!("band {} has proportion {}", b.label, b.proportion));
            }
            if b.ls_low != expected_low || b.ls_high < b.ls_low {
                return bad(format!("band {} breaks 0..10 coverage", b.label));
            }
            if !(b.representative_ls >= b.ls_low as f64 && b.representative_ls <= b.ls_high as f64) {
                return bad(format!("band {} representative outside its range", b.label));
            }
            expected_low = b.ls_high + 1;
        }
        if expected_low != 11 {
            return bad("bands do not reach 10".into());
        }
        Ok(())
    }

    pub fn mean_ls(&self) -> f64 {
        self.bands.iter().map(|b| b.proportion * b.representative_ls).sum()
    }

    /// `E[f(X)]` with X at the band representatives.
    pub fn expectation(&self, f: &LsUtilityFunction) -> f64 {
        self.bands.iter().map(|b| b.proportion * f.eval(b.representative_ls)).sum()
    }

    /// True when all mass sits on a single score.
    pub fn is_degenerate(&self) -> bool {
        let m = self.mean_ls();
        self.bands
            .iter()
            .all(|b| b.proportion == 0.0 || (b.representative_ls - m).abs() < 1e-12)
    }

    pub fn std_dev(&self, f: &LsUtilityFunction) -> f64 {
        let m = self.expectation(f);
        self.bands
            .iter()
            .map(|b| b.proportion * (f.eval(b.representative_ls) - m).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Normalized functions plus the participants dropped for zero variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub functions: Vec<LsUtilityFunction>,
    pub dropped: Vec<String>,
}

/// Scales each function to unit standard deviation under `reference`.
pub fn normalize_curves(fs: &[LsUtilityFunction], reference: &DistributionSpec) -> Result<Normalized, AggregationError> {
    reference.validate()?;
    let mut out = Normalized {
        functions: Vec::with_capacity(fs.len()),
        dropped: Vec::new(),
    };
    for f in fs {
        let sd = reference.std_dev(f);
        if sd > 1e-12 && sd.is_finite() {
            out.functions.push(f.scaled(1.0 / sd));
        } else {
            out.dropped.push(f.participant.clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RlsVariant {
    MeanUtility,
    MedianUtility,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RlsResult {
    pub basis: Context,
    pub variant: RlsVariant,
    pub rls: f64,
    pub mean_ls: f64,
    pub delta_from_mean: f64,
    pub cpt: Option<CptConfig>,
    pub n_participants: usize,
}

/// Smallest `c` in 0..=10 with `g(c) >= target` for non-decreasing `g`.
fn solve_increasing(g: impl Fn(f64) -> f64, target: f64) -> Result<f64, AggregationError> {
    let slack = 1e-12 * target.abs().max(1.0);
    if g(LS_MAX) < target - slack {
        return Err(AggregationError::OutOfRange);
    }
    if g(LS_MIN) >= target - slack {
        return Ok(LS_MIN);
    }
    let (mut lo, mut hi) = (LS_MIN, LS_MAX);
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= target - slack {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Representative Life Satisfaction of `dist` under the given functions.
///
/// MeanUtility solves `mean_i f_i(c) = mean_i E[f_i(X)]`. MedianUtility is
/// the smallest `c` that at least half the participants weakly prefer to
/// the distribution.
pub fn rls(
    fs: &[LsUtilityFunction],
    dist: &DistributionSpec,
    variant: RlsVariant,
    basis: Context,
) -> Result<RlsResult, AggregationError> {
    dist.validate()?;
    if fs.is_empty() {
        return Err(AggregationError::Empty);
    }
    let n = fs.len() as f64;
    let expectations: Vec<f64> = fs.iter().map(|f| dist.expectation(f)).collect();
    let c = match variant {
        RlsVariant::MeanUtility => {
            let target = expectations.iter().sum::<f64>() / n;
            solve_increasing(|c| fs.iter().map(|f| f.eval(c)).sum::<f64>() / n, target)?
        }
        RlsVariant::MedianUtility => {
            let mut thresholds = fs
                .iter()
                .zip(&expectations)
                .map(|(f, e)| solve_increasing(|c| f.eval(c), *e))
                .collect::<Result<Vec<f64>, _>>()?;
            thresholds.sort_by(|a, b| a.total_cmp(b));
            thresholds[fs.len().div_ceil(2) - 1]
        }
    };
    let mean_ls = dist.mean_ls();
    Ok(RlsResult {
        basis,
        variant,
        rls: c,
        mean_ls,
        delta_from_mean: c - mean_ls,
        cpt: None,
        n_participants: fs.len(),
    })
}
