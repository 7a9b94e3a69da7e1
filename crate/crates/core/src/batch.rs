//! File-to-file operations behind the command line: simulate a cohort,
//! estimate from session files, aggregate into RLS tables, and report.
//! Outputs are written in a fixed order with fixed float formatting, so
//! identical inputs give byte-identical files.

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::aggregation::{AggregationError, DistributionSpec};
use crate::domain::LifeState;
use crate::elicitation::QualityConfig;
use crate::estimation::{CptConfig, Subset};
use crate::io::{read_versioned, write_versioned, IoError, SessionLog, SessionRecord};
use crate::pipeline::{
    estimate_cohort, sensitivity_rerun, EstimateOptions, ParticipantEstimates, RlsOptions, RlsTable,
};
use crate::report::{
    cohort_diagnostics, curve_knots, party_tests, rating_histogram, scatter, summary_table, to_csv,
};
use crate::simulator::{run_cohort, CohortSpec, EngineConfig, SimulationError};

pub const ESTIMATES_KIND: &str = "estimates";
pub const RLS_KIND: &str = "rls";

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("no input files found")]
    NoInput,
    #[error("all {0} inputs failed to load")]
    AllFailed(usize),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
}

impl From<std::io::Error> for BatchError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.into())
    }
}

/// Inputs that loaded, and the ones skipped with the reason.
#[derive(Debug)]
pub struct Loaded<T> {
    pub items: Vec<T>,
    pub skipped: Vec<(PathBuf, String)>,
}

/// Expands directories into their `.json`/`.jsonl` files, sorted by name.
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, BatchError> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json" || x == "jsonl"))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

/// Reads one session file: a line-delimited log (`.jsonl`) or a record
/// (`.json`, verified against its transcript).
pub fn read_session(path: &Path, quality: &QualityConfig) -> Result<SessionRecord, IoError> {
    if path.extension().is_some_and(|x| x == "jsonl") {
        SessionLog::read(path)?.to_record(quality)
    } else {
        let rec = SessionRecord::from_json(&std::fs::read_to_string(path)?)?;
        rec.verify(quality)?;
        Ok(rec)
    }
}

pub fn load_sessions(inputs: &[PathBuf], quality: &QualityConfig) -> Result<Loaded<SessionRecord>, BatchError> {
    let files = expand_inputs(inputs)?;
    if files.is_empty() {
        return Err(BatchError::NoInput);
    }
    let mut loaded = Loaded {
        items: Vec::new(),
        skipped: Vec::new(),
    };
    for f in files {
        match read_session(&f, quality) {
            Ok(r) => loaded.items.push(r),
            Err(e) => loaded.skipped.push((f, e.to_string())),
        }
    }
    if loaded.items.is_empty() {
        return Err(BatchError::AllFailed(loaded.skipped.len()));
    }
    Ok(loaded)
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), BatchError> {
    std::fs::write(path, to_csv(rows)?)?;
    Ok(())
}

/// Runs a cohort and writes one session log per agent under `out_dir`.
pub fn simulate(spec: &CohortSpec, engine: &EngineConfig, out_dir: &Path) -> Result<Vec<PathBuf>, BatchError> {
    std::fs::create_dir_all(out_dir)?;
    let records = run_cohort(&spec.agents(), engine)?;
    let mut paths = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let path = out_dir.join(format!("{i:05}-{}.jsonl", rec.header.session_id));
        SessionLog {
            header: rec.header.clone(),
            entries: rec.transcript.clone(),
            truncated: false,
        }
        .write(&path)?;
        paths.push(path);
    }
    Ok(paths)
}

#[derive(Debug, Serialize)]
struct CurveRow<'a> {
    participant: &'a str,
    context: crate::domain::Context,
    include_death: bool,
    method: crate::estimation::Method,
    death: Option<f64>,
    e: Option<f64>,
    d: Option<f64>,
    c: Option<f64>,
    b: Option<f64>,
    a: Option<f64>,
}

#[derive(Debug, Serialize)]
struct LossAversionRow<'a> {
    participant: &'a str,
    context: crate::domain::Context,
    block: crate::domain::Block,
    baseline: LifeState,
    win: LifeState,
    lose: LifeState,
    status: crate::domain::BracketStatus,
    highest_accepted: f64,
    lowest_rejected: f64,
    p_star: Option<f64>,
    lambda: Option<f64>,
    lambda_prime: Option<f64>,
}

#[derive(Debug, Serialize)]
struct MleRow<'a> {
    participant: &'a str,
    context: crate::domain::Context,
    sigma: f64,
    log_likelihood: f64,
    mcfadden_r2: f64,
    fraction_correct: f64,
    n_choices: usize,
    starts_converged: usize,
    gradient_max_abs: f64,
    d: f64,
    c: f64,
    b: f64,
    a: f64,
    warnings: String,
}

#[derive(Debug)]
pub struct EstimateOutput {
    pub estimates: Vec<ParticipantEstimates>,
    pub skipped: Vec<(PathBuf, String)>,
    pub files: Vec<PathBuf>,
}

/// Estimates every readable session and writes `estimates.json` plus
/// `curves.csv`, `loss_aversion.csv` and `mle.csv` into `out_dir`.
pub fn estimate(inputs: &[PathBuf], opts: &EstimateOptions, out_dir: &Path) -> Result<EstimateOutput, BatchError> {
    let loaded = load_sessions(inputs, &QualityConfig::default())?;
    let estimates = estimate_cohort(&loaded.items, opts);
    std::fs::create_dir_all(out_dir)?;

    let mut curves = Vec::new();
    let mut las = Vec::new();
    let mut mles = Vec::new();
    for p in &estimates {
        for c in &p.curves {
            let v = |s| c.get(s);
            curves.push(CurveRow {
                participant: &p.participant,
                context: c.context,
                include_death: c.include_death,
                method: c.method,
                death: v(LifeState::Death),
                e: v(LifeState::E),
                d: v(LifeState::D),
                c: v(LifeState::C),
                b: v(LifeState::B),
                a: v(LifeState::A),
            });
        }
        for g in &p.gambles {
            las.push(LossAversionRow {
                participant: &p.participant,
                context: g.gamble.context,
                block: g.gamble.block,
                baseline: g.gamble.baseline,
                win: g.gamble.win,
                lose: g.gamble.lose,
                status: g.bracket.status,
                highest_accepted: g.bracket.highest_accepted.probability(),
                lowest_rejected: g.bracket.lowest_rejected.probability(),
                p_star: g.indifference.map(|i| i.p_star),
                lambda: g.loss_aversion.map(|l| l.lambda),
                lambda_prime: g.loss_aversion.map(|l| l.lambda_prime),
            });
        }
        for (context, fit) in &p.mle {
            let u = &fit.utilities.values;
            mles.push(MleRow {
                participant: &p.participant,
                context: *context,
                sigma: fit.sigma,
                log_likelihood: fit.log_likelihood,
                mcfadden_r2: fit.mcfadden_r2,
                fraction_correct: fit.fraction_correct,
                n_choices: fit.n_choices,
                starts_converged: fit.starts_converged,
                gradient_max_abs: fit.gradient_max_abs,
                d: u[&LifeState::D],
                c: u[&LifeState::C],
                b: u[&LifeState::B],
                a: u[&LifeState::A],
                warnings: fit
                    .warnings
                    .iter()
                    .map(|w| serde_json::to_value(w).map(|v| v.to_string().replace('"', "")).unwrap_or_default())
                    .collect::<Vec<_>>()
                    .join(";"),
            });
        }
    }
    let files = vec![
        out_dir.join("estimates.json"),
        out_dir.join("curves.csv"),
        out_dir.join("loss_aversion.csv"),
        out_dir.join("mle.csv"),
    ];
    write_versioned(&files[0], ESTIMATES_KIND, &estimates)?;
    write_csv(&files[1], &curves)?;
    write_csv(&files[2], &las)?;
    write_csv(&files[3], &mles)?;
    Ok(EstimateOutput {
        estimates,
        skipped: loaded.skipped,
        files,
    })
}

pub fn read_estimates(path: &Path) -> Result<Vec<ParticipantEstimates>, BatchError> {
    Ok(read_versioned(path, ESTIMATES_KIND)?)
}

#[derive(Debug, Serialize)]
struct RlsRow {
    weighting: String,
    basis: crate::domain::Context,
    variant: crate::aggregation::RlsVariant,
    rls: f64,
    mean_ls: f64,
    delta_from_mean: f64,
    n_participants: usize,
    dropped: usize,
}

pub fn weighting_label(cpt: Option<&CptConfig>) -> String {
    match cpt {
        None => "eum".into(),
        Some(c) => format!("cpt(delta={},gamma={})", c.delta, c.gamma),
    }
}

/// RLS tables for EUM and each extra weighting, written as `rls.json` and
/// `rls.csv`.
pub fn aggregate(
    estimates: &[ParticipantEstimates],
    dist: &DistributionSpec,
    extra_weightings: &[CptConfig],
    opts: &RlsOptions,
    out_dir: &Path,
) -> Result<Vec<RlsTable>, BatchError> {
    let weightings: Vec<Option<CptConfig>> = std::iter::once(None)
        .chain(extra_weightings.iter().copied().map(Some))
        .collect();
    let tables = sensitivity_rerun(estimates, &weightings, dist, opts)?;
    std::fs::create_dir_all(out_dir)?;
    write_versioned(&out_dir.join("rls.json"), RLS_KIND, &tables)?;
    let rows: Vec<RlsRow> = tables
        .iter()
        .flat_map(|t| {
            t.results.iter().map(|r| RlsRow {
                weighting: weighting_label(t.cpt.as_ref()),
                basis: r.basis,
                variant: r.variant,
                rls: r.rls,
                mean_ls: r.mean_ls,
                delta_from_mean: r.delta_from_mean,
                n_participants: r.n_participants,
                dropped: t.dropped.iter().filter(|d| d.basis == r.basis).count(),
            })
        })
        .collect();
    write_csv(&out_dir.join("rls.csv"), &rows)?;
    Ok(tables)
}

/// Writes the summary table, party tests, rating histogram, curve knots,
/// scatter data and cohort diagnostics into `out_dir`.
pub fn report(
    estimates: &[ParticipantEstimates],
    scatter_subset: Subset,
    anchors: crate::pipeline::AnchorPolicy,
    out_dir: &Path,
) -> Result<Vec<PathBuf>, BatchError> {
    std::fs::create_dir_all(out_dir)?;
    let files: Vec<PathBuf> = [
        "summary.csv",
        "party_tests.csv",
        "ratings_histogram.csv",
        "curve_knots.csv",
        "scatter.csv",
        "diagnostics.json",
    ]
    .iter()
    .map(|f| out_dir.join(f))
    .collect();
    write_csv(&files[0], &summary_table(estimates))?;
    let tests: Vec<_> = [Subset::PhysHealth, Subset::NoDeath, Subset::All]
        .into_iter()
        .flat_map(|s| party_tests(estimates, s))
        .collect();
    write_csv(&files[1], &tests)?;
    write_csv(&files[2], &rating_histogram(estimates))?;
    write_csv(&files[3], &curve_knots(estimates, anchors))?;
    write_csv(&files[4], &scatter(estimates, scatter_subset))?;
    write_versioned(&files[5], "diagnostics", &cohort_diagnostics(estimates))?;
    Ok(files)
}
