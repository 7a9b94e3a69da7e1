use std::collections::BTreeMap;

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use super::{EstimationError, Method, Scale, UtilityCurve};
use crate::domain::{Context, GambleSpec, LifeState, ProbabilityLadder};
use crate::elicitation::{Response, SessionEvent};

/// Log choice sensitivity followed by the log increments above E
/// (D − E, C − D, B − C, A − B).
pub const MLE_PARAMETERS: usize = 5;

/// Upper σ for the multi-start search before σ is followed outward.
const SIGMA_STAGE: f64 = 100.0;

type Params = [f64; MLE_PARAMETERS];

/// One binary ladder response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChoiceObservation {
    pub gamble: GambleSpec,
    pub p: f64,
    pub accepted: bool,
}

/// Accept/refuse responses of one context in effect after reverts.
/// Can't-choose responses carry no direction and are skipped.
pub fn choice_observations(events: &[SessionEvent], context: Context) -> Vec<ChoiceObservation> {
    events
        .iter()
        .filter_map(|e| match e {
            SessionEvent::Choice {
                gamble,
                ladder_index,
                response,
            } if gamble.context == context && *response != Response::CantChoose => Some(ChoiceObservation {
                gamble: *gamble,
                p: ProbabilityLadder::probability(*ladder_index).ok()?,
                accepted: *response == Response::AcceptGamble,
            }),
            _ => None,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleConfig {
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Box on each log increment.
    pub log_increment_min: f64,
    pub log_increment_max: f64,
    pub step_tolerance: f64,
    pub objective_tolerance: f64,
    pub max_iterations: usize,
    pub gradient_step: f64,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            sigma_min: 1e-4,
            sigma_max: 1e3,
            log_increment_min: -12.0,
            log_increment_max: 8.0,
            step_tolerance: 1e-8,
            objective_tolerance: 1e-10,
            max_iterations: 5_000,
            gradient_step: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MleWarning {
    /// σ sits at its cap.
    SigmaAtCap,
    /// Every choice is reproduced, so σ is not identified.
    Separable,
    IncrementAtBound(LifeState),
    AllChoicesIdentical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleFit {
    pub utilities: UtilityCurve,
    pub sigma: f64,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub mcfadden_r2: f64,
    pub fraction_correct: f64,
    pub n_choices: usize,
    pub starts_converged: usize,
    /// Largest central-difference gradient component at the solution.
    pub gradient_max_abs: f64,
    pub warnings: Vec<MleWarning>,
}

/// Utilities by rank, Death = 0 and E = 1.
fn utilities(theta: &Params) -> [f64; 6] {
    let mut u = [0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
    for k in 0..4 {
        u[k + 2] = u[k + 1] + theta[k + 1].exp();
    }
    u
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Log of the modelled gamble-to-baseline utility ratio, and its
/// derivative with respect to each log increment.
fn log_ratio(u: &[f64; 6], theta: &Params, obs: &ChoiceObservation) -> (f64, [f64; 4]) {
    let (b, w, l) = (
        obs.gamble.baseline.rank() as usize,
        obs.gamble.win.rank() as usize,
        obs.gamble.lose.rank() as usize,
    );
    let ug = obs.p * u[l] + (1.0 - obs.p) * u[w];
    let ub = u[b];
    let mut d = [0.0; 4];
    for (j, dj) in d.iter_mut().enumerate() {
        // Increment j feeds every state of rank >= j + 2.
        let rank = j + 2;
        let e = theta[j + 1].exp();
        let dug = e * (obs.p * f64::from(u8::from(l >= rank)) + (1.0 - obs.p) * f64::from(u8::from(w >= rank)));
        let dub = e * f64::from(u8::from(b >= rank));
        *dj = dug / ug - dub / ub;
    }
    (ug.ln() - ub.ln(), d)
}

fn negative_log_likelihood(theta: &Params, obs: &[ChoiceObservation]) -> (f64, Params) {
    let u = utilities(theta);
    let sigma = theta[0].exp();
    let mut f = 0.0;
    let mut g = [0.0; MLE_PARAMETERS];
    for o in obs {
        let (r, dr) = log_ratio(&u, theta, o);
        // Accepting has probability sigmoid(σ r).
        let z = if o.accepted { sigma * r } else { -sigma * r };
        f += softplus(-z);
        let dz = -sigmoid(-z) * if o.accepted { 1.0 } else { -1.0 };
        g[0] += dz * sigma * r;
        for j in 0..4 {
            g[j + 1] += dz * sigma * dr[j];
        }
    }
    (f, g)
}

/// Log-likelihood of the observations under a curve (Death = 0 scale) and σ.
pub fn log_likelihood(curve: &BTreeMap<LifeState, f64>, sigma: f64, obs: &[ChoiceObservation]) -> f64 {
    obs.iter()
        .map(|o| {
            let ug = o.p * curve[&o.gamble.lose] + (1.0 - o.p) * curve[&o.gamble.win];
            let z = sigma * (ug.ln() - curve[&o.gamble.baseline].ln());
            -softplus(if o.accepted { -z } else { z })
        })
        .sum()
}

/// Central-difference gradient of the log-likelihood in the transformed
/// parameters.
pub fn numeric_gradient(theta: &[f64; MLE_PARAMETERS], obs: &[ChoiceObservation], h: f64) -> [f64; MLE_PARAMETERS] {
    let mut g = [0.0; MLE_PARAMETERS];
    for i in 0..MLE_PARAMETERS {
        let (mut up, mut down) = (*theta, *theta);
        up[i] += h;
        down[i] -= h;
        let fu = negative_log_likelihood(&up, obs).0;
        let fd = negative_log_likelihood(&down, obs).0;
        g[i] = -(fu - fd) / (2.0 * h);
    }
    g
}

struct Optimum {
    theta: Params,
    value: f64,
    converged: bool,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Box-constrained Newton descent with Levenberg damping. The Hessian comes
/// from central differences of the analytic gradient; variables held at a
/// bound by the gradient are frozen for the step.
fn minimize(start: Params, lo: &Params, hi: &Params, obs: &[ChoiceObservation], cfg: &MleConfig) -> Optimum {
    let clamp = |x: &mut Params| {
        for i in 0..MLE_PARAMETERS {
            x[i] = x[i].clamp(lo[i], hi[i]);
        }
    };
    let mut x = start;
    clamp(&mut x);
    let (mut f, mut g) = negative_log_likelihood(&x, obs);
    let mut damping = 1e-3;

    for _ in 0..cfg.max_iterations {
        let free: [bool; MLE_PARAMETERS] = std::array::from_fn(|i| {
            let pinned = lo[i] >= hi[i] || (x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0);
            !pinned
        });
        let gf: Params = std::array::from_fn(|i| if free[i] { g[i] } else { 0.0 });
        if max_abs(&gf) < 1e-10 {
            return Optimum { theta: x, value: f, converged: true };
        }
        let hess = hessian(&x, obs);
        let mut improved = None;
        while damping < 1e12 {
            let Some(d) = damped_step(&hess, &gf, &free, damping) else {
                damping *= 10.0;
                continue;
            };
            let mut trial = x;
            for i in 0..MLE_PARAMETERS {
                trial[i] += d[i];
            }
            clamp(&mut trial);
            let (ft, gt) = negative_log_likelihood(&trial, obs);
            if ft.is_finite() && ft < f {
                improved = Some((trial, ft, gt));
                damping = (damping / 3.0).max(1e-12);
                break;
            }
            damping *= 4.0;
        }
        let Some((xn, fn_, gn)) = improved else {
            // No damped step lowers the objective: a numerical optimum.
            return Optimum {
                theta: x,
                value: f,
                converged: max_abs(&gf) < 1e-6,
            };
        };
        let step = xn.iter().zip(&x).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let df = f - fn_;
        x = xn;
        f = fn_;
        g = gn;
        if step < cfg.step_tolerance && df < cfg.objective_tolerance {
            let gf: Params = std::array::from_fn(|i| if free[i] { g[i] } else { 0.0 });
            return Optimum {
                theta: x,
                value: f,
                converged: max_abs(&gf) < 1e-6,
            };
        }
    }
    Optimum { theta: x, value: f, converged: false }
}

fn hessian(x: &Params, obs: &[ChoiceObservation]) -> SMatrix<f64, MLE_PARAMETERS, MLE_PARAMETERS> {
    let mut h = SMatrix::<f64, MLE_PARAMETERS, MLE_PARAMETERS>::zeros();
    for j in 0..MLE_PARAMETERS {
        let step = 1e-7 * x[j].abs().max(1.0);
        let (mut up, mut down) = (*x, *x);
        up[j] += step;
        down[j] -= step;
        let gu = negative_log_likelihood(&up, obs).1;
        let gd = negative_log_likelihood(&down, obs).1;
        for i in 0..MLE_PARAMETERS {
            h[(i, j)] = (gu[i] - gd[i]) / (2.0 * step);
        }
    }
    (h + h.transpose()) * 0.5
}

/// Solves `(H + μ·diag) d = −g` over the free variables; `None` when the
/// damped matrix is not positive definite.
fn damped_step(
    hess: &SMatrix<f64, MLE_PARAMETERS, MLE_PARAMETERS>,
    g: &Params,
    free: &[bool; MLE_PARAMETERS],
    damping: f64,
) -> Option<Params> {
    let mut m = *hess;
    for i in 0..MLE_PARAMETERS {
        for j in 0..MLE_PARAMETERS {
            if !free[i] || !free[j] {
                m[(i, j)] = if i == j { 1.0 } else { 0.0 };
            }
        }
        if free[i] {
            m[(i, i)] += damping * (1.0 + hess[(i, i)].abs());
        }
    }
    let rhs = SVector::<f64, MLE_PARAMETERS>::from_fn(|i, _| -g[i]);
    let d = m.cholesky()?.solve(&rhs);
    Some(std::array::from_fn(|i| if free[i] { d[i] } else { 0.0 }))
}

/// Zeroes gradient components (of the log-likelihood) that push against an
/// active bound; what remains must vanish at a constrained optimum.
fn projected(g: &Params, x: &Params, lo: &Params, hi: &Params) -> Params {
    std::array::from_fn(|i| {
        let pinned = (x[i] <= lo[i] + 1e-9 && g[i] < 0.0) || (x[i] >= hi[i] - 1e-9 && g[i] > 0.0);
        if pinned {
            0.0
        } else {
            g[i]
        }
    })
}

/// Follows the fit up in σ from where the staged search stopped, one
/// e-fold per step, each fitted from the last. Stops at the first interior
/// optimum, or at the cap when the likelihood keeps rising, as it does for
/// separable choices.
fn raise_sigma(from: Optimum, lo: &Params, hi: &Params, obs: &[ChoiceObservation], cfg: &MleConfig) -> Optimum {
    let mut best = from;
    let mut level = best.theta[0];
    while level < hi[0] {
        level = (level + 1.0).min(hi[0]);
        let mut upper = *hi;
        upper[0] = level;
        let run = minimize(best.theta, lo, &upper, obs, cfg);
        if run.value > best.value {
            break;
        }
        let interior = run.theta[0] < level - 1e-9;
        best = Optimum { converged: true, ..run };
        if interior {
            break;
        }
    }
    best
}

fn start_from_curve(curve: &UtilityCurve, sigma: f64) -> Option<Params> {
    let e = curve.get(LifeState::E)?;
    let ranked = [LifeState::E, LifeState::D, LifeState::C, LifeState::B, LifeState::A];
    let mut theta = [sigma.ln(), 0.0, 0.0, 0.0, 0.0];
    for k in 0..4 {
        let gap = (curve.get(ranked[k + 1])? - curve.get(ranked[k])?) / e;
        if !(gap.is_finite() && gap > 0.0) {
            return None;
        }
        theta[k + 1] = gap.ln();
    }
    Some(theta)
}

/// Fits choice sensitivity and the four utilities above E by maximum
/// likelihood, from a seed curve (if any) and five fixed starts.
pub fn mle_fit(
    obs: &[ChoiceObservation],
    seed: Option<&UtilityCurve>,
    cfg: &MleConfig,
) -> Result<MleFit, EstimationError> {
    if obs.is_empty() {
        return Err(EstimationError::NoChoices);
    }
    let lo = [
        cfg.sigma_min.ln(),
        cfg.log_increment_min,
        cfg.log_increment_min,
        cfg.log_increment_min,
        cfg.log_increment_min,
    ];
    let hi = [
        cfg.sigma_max.ln(),
        cfg.log_increment_max,
        cfg.log_increment_max,
        cfg.log_increment_max,
        cfg.log_increment_max,
    ];
    let fixed: [(f64, [f64; 4]); 5] = [
        (1.0, [1.0, 1.0, 1.0, 1.0]),
        (10.0, [0.5, 0.25, 0.125, 0.0625]),
        (10.0, [0.2, 0.2, 0.2, 0.2]),
        (50.0, [1.0, 0.5, 0.5, 0.25]),
        (3.0, [2.0, 1.0, 0.5, 0.25]),
    ];
    let starts = seed
        .and_then(|c| start_from_curve(c, 10.0))
        .into_iter()
        .chain(fixed.iter().map(|(s, inc)| {
            [s.ln(), inc[0].ln(), inc[1].ln(), inc[2].ln(), inc[3].ln()]
        }));

    // Search with σ held to a moderate range first; near-separable data make
    // the surface too steep for a cold start further out.
    let mut staged = hi;
    staged[0] = hi[0].min(SIGMA_STAGE.ln()).max(lo[0]);
    let mut best: Option<Optimum> = None;
    let mut converged = 0;
    for start in starts {
        let run = minimize(start, &lo, &staged, obs, cfg);
        if !run.converged {
            continue;
        }
        converged += 1;
        if best.as_ref().is_none_or(|b| run.value < b.value - 1e-9) {
            best = Some(run);
        }
    }
    let mut best = best.ok_or(EstimationError::NonConvergence)?;
    if best.theta[0] >= staged[0] - 1e-9 && staged[0] < hi[0] {
        best = raise_sigma(best, &lo, &hi, obs, cfg);
    }

    let theta = best.theta;
    let u = utilities(&theta);
    let values: BTreeMap<LifeState, f64> = LifeState::ALL.iter().copied().zip(u).collect();
    let sigma = theta[0].exp();
    let log_likelihood = -best.value;
    let n = obs.len();
    let null_log_likelihood = n as f64 * 0.5f64.ln();
    let correct = obs
        .iter()
        .filter(|o| {
            let ug = o.p * values[&o.gamble.lose] + (1.0 - o.p) * values[&o.gamble.win];
            let r = ug.ln() - values[&o.gamble.baseline].ln();
            if o.accepted {
                r > 0.0
            } else {
                r < 0.0
            }
        })
        .count();

    let mut warnings = Vec::new();
    if theta[0] >= hi[0] - 1e-9 {
        warnings.push(MleWarning::SigmaAtCap);
    }
    for (k, s) in [LifeState::D, LifeState::C, LifeState::B, LifeState::A].into_iter().enumerate() {
        if theta[k + 1] <= lo[k + 1] + 1e-9 || theta[k + 1] >= hi[k + 1] - 1e-9 {
            warnings.push(MleWarning::IncrementAtBound(s));
        }
    }
    if correct == n {
        warnings.push(MleWarning::Separable);
    }
    if obs.iter().all(|o| o.accepted == obs[0].accepted) {
        warnings.push(MleWarning::AllChoicesIdentical);
    }

    Ok(MleFit {
        utilities: UtilityCurve {
            context: obs[0].gamble.context,
            include_death: true,
            values,
            scale: Scale::Estimation,
            method: Method::DiscreteChoiceMle,
        },
        sigma,
        log_likelihood,
        null_log_likelihood,
        mcfadden_r2: 1.0 - log_likelihood / null_log_likelihood,
        fraction_correct: correct as f64 / n as f64,
        n_choices: n,
        starts_converged: converged,
        gradient_max_abs: max_abs(&projected(&numeric_gradient(&theta, obs, cfg.gradient_step), &theta, &lo, &hi)),
        warnings,
    })
}

impl MleFit {
    /// Transformed parameters of the fit, in the order of [`MLE_PARAMETERS`].
    pub fn parameters(&self) -> [f64; MLE_PARAMETERS] {
        let v = &self.utilities.values;
        [
            self.sigma.ln(),
            (v[&LifeState::D] - v[&LifeState::E]).ln(),
            (v[&LifeState::C] - v[&LifeState::D]).ln(),
            (v[&LifeState::B] - v[&LifeState::C]).ln(),
            (v[&LifeState::A] - v[&LifeState::B]).ln(),
        ]
    }
}
