//! Cohort summaries: loss-aversion tables, group tests and plot-ready data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{Context, LifeState};
use crate::elicitation::QualityFlag;
use crate::estimation::{lambda_from_prime, Subset};
use crate::pipeline::{cohort_mean_anchors, participant_anchors, AnchorPolicy, ParticipantEstimates, CONTEXTS};
use crate::stats::{cronbach_alpha, mann_whitney, pearson, tukey_quartiles};

/// One row of the loss-aversion summary. Quartiles are of λ, back
/// transformed from each participant's mean λ′ over the row's gambles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub gamble_or_subset: String,
    pub lambda_p_median: Option<f64>,
    pub lambda_p_q1: Option<f64>,
    pub lambda_p_q3: Option<f64>,
    pub n_p: usize,
    pub lambda_s_median: Option<f64>,
    pub lambda_s_q1: Option<f64>,
    pub lambda_s_q3: Option<f64>,
    pub n_s: usize,
    /// Participants with both contexts defined; the base of the percentages.
    pub n_both: usize,
    pub pct_lambda_p_gt1: Option<f64>,
    pub pct_lambda_s_gt1: Option<f64>,
    pub pct_s_ge_p: Option<f64>,
    pub r_ps: Option<f64>,
    pub r_ps_p: Option<f64>,
    pub r_p_politics: Option<f64>,
    pub r_p_politics_p: Option<f64>,
    pub r_s_politics: Option<f64>,
    pub r_s_politics_p: Option<f64>,
}

fn percent(count: usize, n: usize) -> Option<f64> {
    (n > 0).then(|| 100.0 * count as f64 / n as f64)
}

fn correlate(x: &[f64], y: &[f64]) -> (Option<f64>, Option<f64>) {
    match pearson(x, y) {
        Ok(c) => (Some(c.r), Some(c.p)),
        Err(_) => (None, None),
    }
}

pub fn summary_row(cohort: &[ParticipantEstimates], subset: Subset) -> SummaryRow {
    let mut personal = Vec::new();
    let mut societal = Vec::new();
    let mut pairs = Vec::new();
    let mut p_politics = (Vec::new(), Vec::new());
    let mut s_politics = (Vec::new(), Vec::new());
    for p in cohort {
        let politics = p.profile.political_score() as f64;
        let lp = p.summary(Context::Personal, subset);
        let ls = p.summary(Context::Societal, subset);
        if let Some(v) = lp {
            personal.push(lambda_from_prime(v));
            p_politics.0.push(v);
            p_politics.1.push(politics);
        }
        if let Some(v) = ls {
            societal.push(lambda_from_prime(v));
            s_politics.0.push(v);
            s_politics.1.push(politics);
        }
        if let (Some(a), Some(b)) = (lp, ls) {
            pairs.push((a, b));
        }
    }
    let qp = tukey_quartiles(&personal);
    let qs = tukey_quartiles(&societal);
    let n_both = pairs.len();
    let (xp, xs): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let (r_ps, r_ps_p) = correlate(&xp, &xs);
    let (r_p_politics, r_p_politics_p) = correlate(&p_politics.0, &p_politics.1);
    let (r_s_politics, r_s_politics_p) = correlate(&s_politics.0, &s_politics.1);
    SummaryRow {
        gamble_or_subset: subset.label(),
        lambda_p_median: qp.map(|q| q.median),
        lambda_p_q1: qp.map(|q| q.q1),
        lambda_p_q3: qp.map(|q| q.q3),
        n_p: personal.len(),
        lambda_s_median: qs.map(|q| q.median),
        lambda_s_q1: qs.map(|q| q.q1),
        lambda_s_q3: qs.map(|q| q.q3),
        n_s: societal.len(),
        n_both,
        pct_lambda_p_gt1: percent(pairs.iter().filter(|(a, _)| *a > 0.0).count(), n_both),
        pct_lambda_s_gt1: percent(pairs.iter().filter(|(_, b)| *b > 0.0).count(), n_both),
        pct_s_ge_p: percent(pairs.iter().filter(|(a, b)| b >= a).count(), n_both),
        r_ps,
        r_ps_p,
        r_p_politics,
        r_p_politics_p,
        r_s_politics,
        r_s_politics_p,
    }
}

/// One row per adjacent gamble, then the three gamble subsets.
pub fn summary_table(cohort: &[ParticipantEstimates]) -> Vec<SummaryRow> {
    Subset::ROWS.iter().map(|s| summary_row(cohort, *s)).collect()
}

/// Mann-Whitney test of one party's mean λ′ against everyone else's.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartyTest {
    pub context: Context,
    pub subset: String,
    pub party: String,
    pub n_party: usize,
    pub n_rest: usize,
    pub u: f64,
    pub p: f64,
    pub exact: bool,
}

pub fn party_tests(cohort: &[ParticipantEstimates], subset: Subset) -> Vec<PartyTest> {
    let mut out = Vec::new();
    for context in CONTEXTS {
        let mut by_party: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for p in cohort {
            if let Some(v) = p.summary(context, subset) {
                by_party.entry(p.profile.party.as_str()).or_default().push(v);
            }
        }
        for (party, values) in &by_party {
            let rest: Vec<f64> = by_party
                .iter()
                .filter(|(k, _)| *k != party)
                .flat_map(|(_, v)| v.iter().copied())
                .collect();
            if let Ok(t) = mann_whitney(values, &rest) {
                out.push(PartyTest {
                    context,
                    subset: subset.label(),
                    party: (*party).to_owned(),
                    n_party: values.len(),
                    n_rest: rest.len(),
                    u: t.u,
                    p: t.p,
                    exact: t.exact,
                });
            }
        }
    }
    out
}

/// Data-quality and consistency figures for the whole cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortDiagnostics {
    pub participants: usize,
    pub attitude_alpha: Option<f64>,
    pub order_violations: usize,
    pub pct_order_violations: Option<f64>,
    pub quality_flags: BTreeMap<QualityFlag, usize>,
    pub personal_curves: usize,
    pub societal_curves: usize,
    pub quartile_convention: String,
}

pub fn cohort_diagnostics(cohort: &[ParticipantEstimates]) -> CohortDiagnostics {
    let items: Vec<Vec<f64>> = cohort
        .iter()
        .map(|p| p.profile.bsa_items.iter().map(|&v| v as f64).collect())
        .collect();
    let violations = cohort.iter().filter(|p| p.order_violation).count();
    let mut flags = BTreeMap::new();
    for f in cohort.iter().flat_map(|p| &p.quality_flags) {
        *flags.entry(*f).or_insert(0) += 1;
    }
    CohortDiagnostics {
        participants: cohort.len(),
        attitude_alpha: cronbach_alpha(&items).ok(),
        order_violations: violations,
        pct_order_violations: percent(violations, cohort.len()),
        quality_flags: flags,
        personal_curves: cohort.iter().filter(|p| p.curve(Context::Personal, true).is_some()).count(),
        societal_curves: cohort.iter().filter(|p| p.curve(Context::Societal, true).is_some()).count(),
        quartile_convention: "Tukey hinges (medians of halves, median included when n is odd)".into(),
    }
}

/// Count of each rating per vignette.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingCount {
    pub vignette: LifeState,
    pub rating: u8,
    pub count: usize,
}

pub fn rating_histogram(cohort: &[ParticipantEstimates]) -> Vec<RatingCount> {
    let mut out = Vec::new();
    for vignette in LifeState::LIVING.into_iter().rev() {
        for rating in 0..=10u8 {
            let count = cohort.iter().filter(|p| p.ratings.get(vignette) == Some(rating)).count();
            out.push(RatingCount { vignette, rating, count });
        }
    }
    out
}

/// A curve knot placed on the life-satisfaction axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveKnot {
    pub participant: String,
    pub context: Context,
    pub include_death: bool,
    pub state: LifeState,
    pub ls: f64,
    pub utility: f64,
}

/// Reporting-scale curve knots at each participant's anchor ratings;
/// Death sits at 0.
pub fn curve_knots(cohort: &[ParticipantEstimates], policy: AnchorPolicy) -> Vec<CurveKnot> {
    let means = cohort_mean_anchors(cohort);
    let mut out = Vec::new();
    for p in cohort {
        let anchors = participant_anchors(p, policy, &means);
        for c in &p.curves {
            for (s, u) in &c.values {
                let ls = if *s == LifeState::Death {
                    0.0
                } else {
                    match anchors.get(s) {
                        Some(v) => *v,
                        None => continue,
                    }
                };
                out.push(CurveKnot {
                    participant: p.participant.clone(),
                    context: c.context,
                    include_death: c.include_death,
                    state: *s,
                    ls,
                    utility: *u,
                });
            }
        }
    }
    out
}

/// Personal against societal mean λ′ for one participant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub participant: String,
    pub lambda_prime_personal: f64,
    pub lambda_prime_societal: f64,
    pub party: String,
    pub political_score: u32,
    pub above_diagonal: bool,
}

/// Participants with both summaries defined for `subset`.
pub fn scatter(cohort: &[ParticipantEstimates], subset: Subset) -> Vec<ScatterPoint> {
    cohort
        .iter()
        .filter_map(|p| {
            let a = p.summary(Context::Personal, subset)?;
            let b = p.summary(Context::Societal, subset)?;
            Some(ScatterPoint {
                participant: p.participant.clone(),
                lambda_prime_personal: a,
                lambda_prime_societal: b,
                party: p.profile.party.clone(),
                political_score: p.profile.political_score(),
                above_diagonal: b > a,
            })
        })
        .collect()
}

/// Writes rows as CSV with a header line.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, crate::io::IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::io::IoError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
