//! Cohort processing: per-participant estimates from session records, and
//! representative life satisfaction over a cohort.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::{
    build_ls_function, normalize_curves, rls, AggregationError, Band, DistributionSpec, LsUtilityFunction, RlsResult,
    RlsVariant,
};
use crate::domain::{Context, GambleSpec, IndifferenceBracket, LifeState, VignetteRatings};
use crate::elicitation::{ParticipantProfile, QualityFlag};
use crate::estimation::{
    chain_points, chained_solve, choice_observations, death_knot, indifference_point, lambda_from_gamble,
    mle_fit, CptConfig, IndifferencePoint, LossAversion, MleConfig, MleFit, Subset, UtilityCurve,
};
use crate::io::SessionRecord;

pub const CONTEXTS: [Context; 2] = [Context::Personal, Context::Societal];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    /// Probability weighting for the chained solve and λ; `None` is EUM.
    pub cpt: Option<CptConfig>,
    /// Fit the choice model as well; `None` skips it.
    pub mle: Option<MleConfig>,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            cpt: None,
            mle: Some(MleConfig::default()),
        }
    }
}

/// One elicited gamble with its derived quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GambleEstimate {
    pub gamble: GambleSpec,
    pub bracket: IndifferenceBracket,
    /// Absent when the bracket is undecidable.
    pub indifference: Option<IndifferencePoint>,
    pub loss_aversion: Option<LossAversion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFailure {
    pub context: Context,
    pub include_death: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantEstimates {
    pub participant: String,
    pub profile: ParticipantProfile,
    pub ratings: VignetteRatings,
    pub own_ls: Option<u8>,
    pub order_violation: bool,
    pub quality_flags: Vec<QualityFlag>,
    pub cpt: Option<CptConfig>,
    pub gambles: Vec<GambleEstimate>,
    /// Chained curves on the reporting scale.
    pub curves: Vec<UtilityCurve>,
    pub curve_failures: Vec<CurveFailure>,
    /// Death utility on each death-excluded curve's reporting scale.
    pub death_knots: BTreeMap<Context, f64>,
    pub mle: BTreeMap<Context, MleFit>,
    pub mle_failures: BTreeMap<Context, String>,
}

impl ParticipantEstimates {
    pub fn curve(&self, context: Context, include_death: bool) -> Option<&UtilityCurve> {
        self.curves
            .iter()
            .find(|c| c.context == context && c.include_death == include_death)
    }

    /// λ of each adjacent gamble in `context`, keyed by baseline.
    /// Undecidable gambles are absent.
    pub fn adjacent_loss_aversion(&self, context: Context) -> BTreeMap<LifeState, LossAversion> {
        self.gambles
            .iter()
            .filter(|g| g.gamble.context == context && g.gamble.is_adjacent())
            .filter_map(|g| g.loss_aversion.map(|l| (g.gamble.baseline, l)))
            .collect()
    }

    pub fn summary(&self, context: Context, subset: Subset) -> Option<f64> {
        crate::estimation::participant_summary(&self.adjacent_loss_aversion(context), subset)
    }

    fn adjacent_brackets(&self, context: Context) -> impl Iterator<Item = (&GambleSpec, &IndifferenceBracket)> {
        self.gambles
            .iter()
            .filter(move |g| g.gamble.context == context && g.gamble.is_adjacent())
            .map(|g| (&g.gamble, &g.bracket))
    }
}

/// Chained curves (with and without death) and death knots for both
/// contexts, from the stored brackets.
fn chained_curves(
    est: &ParticipantEstimates,
    cpt: Option<&CptConfig>,
) -> (Vec<UtilityCurve>, Vec<CurveFailure>, BTreeMap<Context, f64>) {
    let mut curves = Vec::new();
    let mut failures = Vec::new();
    let mut knots = BTreeMap::new();
    for context in CONTEXTS {
        let points = chain_points(est.adjacent_brackets(context));
        for include_death in [true, false] {
            match chained_solve(&points, context, cpt, include_death) {
                Ok(curve) => {
                    if !include_death {
                        let top = curve.values[&LifeState::A];
                        if let Some(u) = points.get(&LifeState::E).and_then(|p| death_knot(&curve, *p, cpt)) {
                            knots.insert(context, u / top);
                        }
                    }
                    curves.push(curve.to_reporting());
                }
                Err(e) => failures.push(CurveFailure {
                    context,
                    include_death,
                    reason: e.to_string(),
                }),
            }
        }
    }
    (curves, failures, knots)
}

/// Estimates for one verified session record.
pub fn estimate_participant(record: &SessionRecord, opts: &EstimateOptions) -> ParticipantEstimates {
    let cpt = opts.cpt.as_ref();
    let gambles = record
        .brackets
        .iter()
        .map(|r| {
            let indifference = indifference_point(&r.bracket, r.gamble.baseline).ok();
            GambleEstimate {
                gamble: r.gamble,
                bracket: r.bracket,
                indifference,
                loss_aversion: indifference.map(|p| lambda_from_gamble(p, cpt)),
            }
        })
        .collect();
    let mut est = ParticipantEstimates {
        participant: record.header.session_id.to_string(),
        profile: record.header.profile.clone(),
        ratings: record.ratings.clone(),
        own_ls: record.own_ls,
        order_violation: record.order_violation,
        quality_flags: record.quality_flags.iter().copied().collect(),
        cpt: opts.cpt,
        gambles,
        curves: Vec::new(),
        curve_failures: Vec::new(),
        death_knots: BTreeMap::new(),
        mle: BTreeMap::new(),
        mle_failures: BTreeMap::new(),
    };
    let (curves, failures, knots) = chained_curves(&est, cpt);
    est.curves = curves;
    est.curve_failures = failures;
    est.death_knots = knots;

    if let Some(cfg) = &opts.mle {
        let events = match record.applied_events() {
            Ok(e) => e,
            Err(e) => {
                for c in CONTEXTS {
                    est.mle_failures.insert(c, e.to_string());
                }
                return est;
            }
        };
        for context in CONTEXTS {
            let obs = choice_observations(&events, context);
            let seed = est.curve(context, true).map(|c| {
                let e = c.values[&LifeState::E];
                UtilityCurve {
                    values: c.values.iter().map(|(s, v)| (*s, v / e)).collect(),
                    ..c.clone()
                }
            });
            match mle_fit(&obs, seed.as_ref(), cfg) {
                Ok(fit) => {
                    est.mle.insert(context, fit);
                }
                Err(e) => {
                    est.mle_failures.insert(context, e.to_string());
                }
            }
        }
    }
    est
}

/// Estimates every record in parallel; output order follows the input.
pub fn estimate_cohort(records: &[SessionRecord], opts: &EstimateOptions) -> Vec<ParticipantEstimates> {
    records.par_iter().map(|r| estimate_participant(r, opts)).collect()
}

/// The same estimates with λ and chained curves recomputed under a
/// different weighting. The choice-model fits are kept as they are.
pub fn reweight(est: &ParticipantEstimates, cpt: Option<CptConfig>) -> ParticipantEstimates {
    let mut out = est.clone();
    out.cpt = cpt;
    for g in &mut out.gambles {
        g.loss_aversion = g.indifference.map(|p| lambda_from_gamble(p, cpt.as_ref()));
    }
    let (curves, failures, knots) = chained_curves(&out, cpt.as_ref());
    out.curves = curves;
    out.curve_failures = failures;
    out.death_knots = knots;
    out
}

/// Where each living state sits on the 0..10 scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorPolicy {
    /// The participant's own vignette ratings, falling back to the cohort
    /// means when they are incomplete or not strictly ordered.
    ParticipantWithFallback,
    CohortMean,
}

/// Mean rating of each vignette over participants who rated it.
pub fn cohort_mean_anchors(cohort: &[ParticipantEstimates]) -> BTreeMap<LifeState, f64> {
    LifeState::LIVING
        .into_iter()
        .filter_map(|s| {
            let rs: Vec<f64> = cohort
                .iter()
                .filter_map(|p| p.ratings.get(s).map(f64::from))
                .collect();
            (!rs.is_empty()).then(|| (s, rs.iter().sum::<f64>() / rs.len() as f64))
        })
        .collect()
}

fn strictly_ordered(anchors: &BTreeMap<LifeState, f64>) -> bool {
    let v: Vec<f64> = LifeState::LIVING.iter().filter_map(|s| anchors.get(s).copied()).collect();
    v.len() == LifeState::LIVING.len() && v.windows(2).all(|w| w[0] < w[1])
}

pub fn participant_anchors(
    p: &ParticipantEstimates,
    policy: AnchorPolicy,
    cohort_mean: &BTreeMap<LifeState, f64>,
) -> BTreeMap<LifeState, f64> {
    if policy == AnchorPolicy::ParticipantWithFallback {
        let own: BTreeMap<LifeState, f64> = p.ratings.ratings.iter().map(|(s, r)| (*s, f64::from(*r))).collect();
        if strictly_ordered(&own) {
            return own;
        }
    }
    cohort_mean.clone()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RlsOptions {
    pub anchors: AnchorPolicy,
    /// Scale position of Death when a curve carries it.
    pub death_ls: f64,
    pub variants: Vec<RlsVariant>,
    pub bases: Vec<Context>,
}

impl Default for RlsOptions {
    fn default() -> Self {
        Self {
            anchors: AnchorPolicy::ParticipantWithFallback,
            death_ls: 0.0,
            variants: vec![RlsVariant::MeanUtility, RlsVariant::MedianUtility],
            bases: CONTEXTS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedParticipant {
    pub participant: String,
    pub basis: Context,
    pub reason: String,
}

/// The RLS variants for one weighting, plus what went into them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RlsTable {
    pub cpt: Option<CptConfig>,
    pub results: Vec<RlsResult>,
    pub bands: Vec<Band>,
    pub mean_ls: f64,
    /// Curves are scaled to unit standard deviation under this distribution.
    pub normalization_reference: String,
    pub anchors: AnchorPolicy,
    pub death_ls: f64,
    pub dropped: Vec<DroppedParticipant>,
}

/// The utility-over-LS function used for `basis`. Personal curves keep
/// death; societal curves use the death-excluded curve with the death knot
/// re-attached when it is finite.
pub fn basis_function(
    p: &ParticipantEstimates,
    basis: Context,
    anchors: &BTreeMap<LifeState, f64>,
    death_ls: f64,
) -> Result<LsUtilityFunction, String> {
    let curve = match basis {
        Context::Personal => p.curve(basis, true).cloned(),
        Context::Societal => p.curve(basis, false).map(|c| {
            let mut c = c.clone();
            if let Some(u) = p.death_knots.get(&basis) {
                c.values.insert(LifeState::Death, *u);
            }
            c
        }),
    };
    let curve = curve.ok_or_else(|| {
        p.curve_failures
            .iter()
            .find(|f| f.context == basis)
            .map_or_else(|| "no curve".to_owned(), |f| f.reason.clone())
    })?;
    build_ls_function(&p.participant, &curve, anchors, death_ls).map_err(|e| e.to_string())
}

pub fn rls_table(
    cohort: &[ParticipantEstimates],
    dist: &DistributionSpec,
    opts: &RlsOptions,
) -> Result<RlsTable, AggregationError> {
    dist.validate()?;
    // Every curve is flat under a point mass, so scale against even bands.
    let (reference, reference_label) = if dist.is_degenerate() {
        (DistributionSpec::from_proportions([0.25; 4])?, "even bands (input distribution is a point mass)")
    } else {
        (dist.clone(), "input distribution")
    };
    let means = cohort_mean_anchors(cohort);
    let cpt = cohort.first().and_then(|p| p.cpt);
    let mut results = Vec::new();
    let mut dropped = Vec::new();
    for &basis in &opts.bases {
        let mut fs = Vec::new();
        for p in cohort {
            let anchors = participant_anchors(p, opts.anchors, &means);
            match basis_function(p, basis, &anchors, opts.death_ls) {
                Ok(f) => fs.push(f),
                Err(reason) => dropped.push(DroppedParticipant {
                    participant: p.participant.clone(),
                    basis,
                    reason,
                }),
            }
        }
        let normalized = normalize_curves(&fs, &reference)?;
        dropped.extend(normalized.dropped.iter().map(|id| DroppedParticipant {
            participant: id.clone(),
            basis,
            reason: "constant over the distribution".into(),
        }));
        for &variant in &opts.variants {
            let mut r = rls(&normalized.functions, dist, variant, basis)?;
            r.cpt = cpt;
            results.push(r);
        }
    }
    Ok(RlsTable {
        cpt,
        results,
        bands: dist.bands.clone(),
        mean_ls: dist.mean_ls(),
        normalization_reference: reference_label.into(),
        anchors: opts.anchors,
        death_ls: opts.death_ls,
        dropped,
    })
}

/// RLS tables for each weighting, recomputed from the stored brackets.
pub fn sensitivity_rerun(
    cohort: &[ParticipantEstimates],
    weightings: &[Option<CptConfig>],
    dist: &DistributionSpec,
    opts: &RlsOptions,
) -> Result<Vec<RlsTable>, AggregationError> {
    weightings
        .iter()
        .map(|w| {
            let reweighted: Vec<_> = cohort.par_iter().map(|p| reweight(p, *w)).collect();
            rls_table(&reweighted, dist, opts)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{power_utilities, run_agent, AgentSpec, CohortSpec, EngineConfig, UtilityModel};
    use approx::assert_abs_diff_eq;

    fn estimates_for(agent: &AgentSpec, opts: &EstimateOptions) -> ParticipantEstimates {
        estimate_participant(&run_agent(agent, &EngineConfig::default()).unwrap(), opts)
    }

    #[test]
    fn sqrt_agent_curves() {
        let est = estimates_for(&AgentSpec::new(power_utilities(0.5), 1), &EstimateOptions::default());
        assert_eq!(est.gambles.len(), 12);
        assert!(est.curve_failures.is_empty(), "{:?}", est.curve_failures);
        assert_eq!(est.curves.len(), 4);
        let c = est.curve(Context::Personal, true).unwrap();
        assert_eq!(c.values[&LifeState::Death], 0.0);
        assert_eq!(c.values[&LifeState::A], 1.0);
        let nd = est.curve(Context::Societal, false).unwrap();
        assert_eq!(nd.values[&LifeState::E], 0.0);
        assert!(est.death_knots[&Context::Societal] < 0.0);
        assert_eq!(est.mle.len(), 2);
        assert!(est.mle[&Context::Personal].n_choices >= 8);
    }

    #[test]
    fn identity_weighting_matches_eum() {
        let agent = AgentSpec::new(power_utilities(0.4), 8);
        let eum = estimates_for(&agent, &EstimateOptions { cpt: None, mle: None });
        let id = reweight(&eum, Some(CptConfig::IDENTITY));
        for (a, b) in eum.curves.iter().zip(&id.curves) {
            assert_eq!(a.values, b.values);
        }
    }

    #[test]
    fn indifferent_cohort_reads_as_risk_averse() {
        // Can't-choose at 1/2 then accept at 1/5 brackets every gamble at
        // (0.2, 0.5), so risk-neutral agents come out concave.
        let cohort: Vec<_> = CohortSpec::new(5, 3, UtilityModel::Power { exponent: 1.0 })
            .agents()
            .iter()
            .map(|a| estimates_for(a, &EstimateOptions { cpt: None, mle: None }))
            .collect();
        let la = cohort[0].adjacent_loss_aversion(Context::Personal);
        assert_abs_diff_eq!(la[&LifeState::C].lambda, 2.1622776601683793, epsilon = 1e-12);
        let table = rls_table(&cohort, &DistributionSpec::illustrative(), &RlsOptions::default()).unwrap();
        assert_eq!(table.results.len(), 4);
        assert!(table.dropped.is_empty());
        assert!(table.results.iter().all(|r| r.delta_from_mean < 0.0));
    }

    #[test]
    fn concave_cohort_rls_below_mean() {
        let cohort: Vec<_> = CohortSpec::new(12, 7, UtilityModel::RandomConcave)
            .agents()
            .iter()
            .map(|a| estimates_for(a, &EstimateOptions { cpt: None, mle: None }))
            .collect();
        let dist = DistributionSpec::illustrative();
        let table = rls_table(&cohort, &dist, &RlsOptions::default()).unwrap();
        for r in &table.results {
            assert!(r.delta_from_mean < 0.0, "{r:?}");
            assert_abs_diff_eq!(r.delta_from_mean, r.rls - dist.mean_ls(), epsilon = 1e-12);
        }
        let tables = sensitivity_rerun(
            &cohort,
            &[None, Some(CptConfig::MEDIAN), Some(CptConfig::EXTREME)],
            &dist,
            &RlsOptions::default(),
        )
        .unwrap();
        assert_eq!(tables[0].results, table.results);
        for (eum, cpt) in tables[0].results.iter().zip(&tables[1].results) {
            assert!(cpt.delta_from_mean.abs() < eum.delta_from_mean.abs(), "{eum:?} {cpt:?}");
        }
    }

    #[test]
    fn anchors_fall_back_to_cohort_means() {
        let mut agent = AgentSpec::new(power_utilities(0.5), 2);
        agent.ratings = [9, 7, 7, 4, 2];
        let tied = estimates_for(&agent, &EstimateOptions { cpt: None, mle: None });
        let plain = estimates_for(&AgentSpec::new(power_utilities(0.5), 3), &EstimateOptions { cpt: None, mle: None });
        let cohort = vec![tied.clone(), plain.clone()];
        let means = cohort_mean_anchors(&cohort);
        assert_eq!(means[&LifeState::A], 9.5);
        assert_eq!(means[&LifeState::C], 6.5);
        let a = participant_anchors(&tied, AnchorPolicy::ParticipantWithFallback, &means);
        assert_eq!(a, means);
        let b = participant_anchors(&plain, AnchorPolicy::ParticipantWithFallback, &means);
        assert_eq!(b[&LifeState::A], 10.0);
    }
}
