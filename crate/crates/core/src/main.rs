use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand, ValueEnum};

use lifesat::aggregation::{DistributionSpec, RlsVariant};
use lifesat::batch::{self, BatchError};
use lifesat::domain::Context;
use lifesat::elicitation::{Instrument, SessionCondition};
use lifesat::estimation::{CptConfig, MleConfig, Subset};
use lifesat::io::parse_distribution;
use lifesat::pipeline::{AnchorPolicy, EstimateOptions, RlsOptions};
use lifesat::service::{self, ClockMode, ServiceConfig};
use lifesat::simulator::{CohortSpec, EngineConfig, Sensitivity, UtilityModel};

#[derive(Parser)]
#[command(name = "lifesat", version, about = "Life-satisfaction utility elicitation and analysis")]
struct Cli {
    /// Root for session logs and default outputs.
    #[arg(long, global = true, env = "LIFESAT_DATA_DIR", default_value = "data")]
    data_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API.
    Serve(ServeArgs),
    /// Run synthetic respondents through the session engine.
    Simulate(SimulateArgs),
    /// Estimate utilities, loss aversion and choice-model fits from sessions.
    Estimate(EstimateArgs),
    /// Compute representative life satisfaction from estimates.
    Aggregate(AggregateArgs),
    /// Write summary tables and plot-ready data from estimates.
    Report(ReportArgs),
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "LIFESAT_PORT", default_value_t = service::DEFAULT_PORT)]
    port: u16,
    /// Shared token required in the x-lifesat-token header.
    #[arg(long, env = "LIFESAT_TOKEN")]
    token: Option<String>,
    /// Put every new session in this condition.
    #[arg(long, value_enum)]
    condition: Option<ConditionArg>,
    /// JSON file replacing the default survey content and quality thresholds.
    #[arg(long)]
    instrument: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditionArg {
    GamblesFirst,
    LifeSatisfactionFirst,
}

impl From<ConditionArg> for SessionCondition {
    fn from(c: ConditionArg) -> Self {
        match c {
            ConditionArg::GamblesFirst => SessionCondition::GamblesFirst,
            ConditionArg::LifeSatisfactionFirst => SessionCondition::LifeSatisfactionFirst,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Power,
    Concave,
}

#[derive(Args)]
struct SimulateArgs {
    /// Cohort description (JSON); overrides the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    size: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "concave")]
    model: ModelArg,
    /// Exponent for the power model.
    #[arg(long, default_value_t = 0.5)]
    exponent: f64,
    /// Choice sensitivity; omit for deterministic agents.
    #[arg(long)]
    sigma: Option<f64>,
    /// Agents decide with weighted probabilities (needs --weight-gamma too).
    #[arg(long, requires = "weight_gamma")]
    weight_delta: Option<f64>,
    #[arg(long, requires = "weight_delta")]
    weight_gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    societal_multiplier: f64,
    /// Output directory; defaults to <data-dir>/simulated.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum ModeArg {
    Eum,
    Cpt,
}

#[derive(Args)]
struct EstimateArgs {
    /// Session files (.jsonl logs or .json records) or directories of them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "eum")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0.77)]
    delta: f64,
    #[arg(long, default_value_t = 0.44)]
    gamma: f64,
    /// Skip the choice-model fits.
    #[arg(long)]
    no_mle: bool,
    /// Output directory; defaults to <data-dir>/estimates.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Personal,
    Societal,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Mean,
    Median,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnchorArg {
    Participant,
    CohortMean,
}

impl From<AnchorArg> for AnchorPolicy {
    fn from(a: AnchorArg) -> Self {
        match a {
            AnchorArg::Participant => AnchorPolicy::ParticipantWithFallback,
            AnchorArg::CohortMean => AnchorPolicy::CohortMean,
        }
    }
}

#[derive(Args)]
struct AggregateArgs {
    /// estimates.json written by `estimate`.
    #[arg(long)]
    estimates: PathBuf,
    /// Banded distribution CSV; defaults to a built-in illustrative one.
    #[arg(long)]
    distribution: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    basis: BasisArg,
    #[arg(long, value_enum, default_value = "both")]
    variant: VariantArg,
    /// Extra weighting to recompute under, as DELTA,GAMMA. Repeatable.
    #[arg(long, value_parser = parse_cpt)]
    cpt: Vec<CptConfig>,
    /// Add both published weighting parameter sets.
    #[arg(long)]
    sensitivity: bool,
    #[arg(long, value_enum, default_value = "participant")]
    anchors: AnchorArg,
    /// Position of Death on the 0-10 scale.
    #[arg(long, default_value_t = 0.0)]
    death_ls: f64,
    /// Output directory; defaults to <data-dir>/rls.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SubsetArg {
    All,
    NoDeath,
    PhysHealth,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    estimates: PathBuf,
    /// Gambles averaged for the scatter data.
    #[arg(long, value_enum, default_value = "all")]
    subset: SubsetArg,
    #[arg(long, value_enum, default_value = "participant")]
    anchors: AnchorArg,
    /// Output directory; defaults to <data-dir>/report.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_cpt(s: &str) -> Result<CptConfig, String> {
    let (d, g) = s.split_once(',').ok_or("expected DELTA,GAMMA")?;
    let d: f64 = d.trim().parse().map_err(|e| format!("{e}"))?;
    let g: f64 = g.trim().parse().map_err(|e| format!("{e}"))?;
    CptConfig::new(d, g).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<BatchError>() {
                Some(BatchError::NoInput) => ExitCode::from(3),
                Some(BatchError::AllFailed(_)) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let data = cli.data_dir;
    match cli.command {
        Command::Serve(a) => {
            let instrument = match &a.instrument {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)
                    .with_context(|| format!("reading {}", p.display()))?,
                None => Instrument::default(),
            };
            let config = ServiceConfig {
                port: a.port,
                data_dir: data,
                instrument,
                condition_override: a.condition.map(Into::into),
                token: a.token,
                clock: ClockMode::Wall,
            };
            tokio::runtime::Runtime::new()?.block_on(service::serve(config))
        }
        Command::Simulate(a) => {
            let spec = match &a.config {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)
                    .with_context(|| format!("reading {}", p.display()))?,
                None => CohortSpec {
                    sensitivity: a
                        .sigma
                        .map_or(Sensitivity::Deterministic, |sigma| Sensitivity::Stochastic { sigma }),
                    perceptual_weighting: match (a.weight_delta, a.weight_gamma) {
                        (Some(d), Some(g)) => Some(CptConfig::new(d, g)?),
                        _ => None,
                    },
                    societal_multiplier: a.societal_multiplier,
                    ..CohortSpec::new(
                        a.size,
                        a.seed,
                        match a.model {
                            ModelArg::Power => UtilityModel::Power { exponent: a.exponent },
                            ModelArg::Concave => UtilityModel::RandomConcave,
                        },
                    )
                },
            };
            let out = a.out.unwrap_or_else(|| data.join("simulated"));
            let paths = batch::simulate(&spec, &EngineConfig::default(), &out)?;
            println!("wrote {} session logs to {}", paths.len(), out.display());
            Ok(())
        }
        Command::Estimate(a) => {
            let opts = EstimateOptions {
                cpt: match a.mode {
                    ModeArg::Eum => None,
                    ModeArg::Cpt => Some(CptConfig::new(a.delta, a.gamma)?),
                },
                mle: (!a.no_mle).then(MleConfig::default),
            };
            let out = a.out.unwrap_or_else(|| data.join("estimates"));
            let result = batch::estimate(&a.inputs, &opts, &out)?;
            for (path, reason) in &result.skipped {
                eprintln!("skipped {}: {reason}", path.display());
            }
            println!(
                "estimated {} participants ({} skipped) into {}",
                result.estimates.len(),
                result.skipped.len(),
                out.display()
            );
            Ok(())
        }
        Command::Aggregate(a) => {
            let estimates = batch::read_estimates(&a.estimates)?;
            let dist = match &a.distribution {
                Some(p) => parse_distribution(&std::fs::read_to_string(p)?)
                    .with_context(|| format!("reading {}", p.display()))?,
                None => DistributionSpec::illustrative(),
            };
            let mut extra = a.cpt.clone();
            if a.sensitivity {
                extra.extend([CptConfig::MEDIAN, CptConfig::EXTREME]);
            }
            let opts = RlsOptions {
                anchors: a.anchors.into(),
                death_ls: a.death_ls,
                variants: match a.variant {
                    VariantArg::Mean => vec![RlsVariant::MeanUtility],
                    VariantArg::Median => vec![RlsVariant::MedianUtility],
                    VariantArg::Both => vec![RlsVariant::MeanUtility, RlsVariant::MedianUtility],
                },
                bases: match a.basis {
                    BasisArg::Personal => vec![Context::Personal],
                    BasisArg::Societal => vec![Context::Societal],
                    BasisArg::Both => vec![Context::Personal, Context::Societal],
                },
            };
            let out = a.out.unwrap_or_else(|| data.join("rls"));
            let tables = batch::aggregate(&estimates, &dist, &extra, &opts, &out)?;
            println!("distribution mean {:.3}", dist.mean_ls());
            for t in &tables {
                for r in &t.results {
                    println!(
                        "{:<32} {:<8?} {:<13?} rls {:.3}  delta {:+.3}  n {}",
                        batch::weighting_label(t.cpt.as_ref()),
                        r.basis,
                        r.variant,
                        r.rls,
                        r.delta_from_mean,
                        r.n_participants
                    );
                }
            }
            Ok(())
        }
        Command::Report(a) => {
            let estimates = batch::read_estimates(&a.estimates)?;
            let subset = match a.subset {
                SubsetArg::All => Subset::All,
                SubsetArg::NoDeath => Subset::NoDeath,
                SubsetArg::PhysHealth => Subset::PhysHealth,
            };
            let out = a.out.unwrap_or_else(|| data.join("report"));
            let files = batch::report(&estimates, subset, a.anchors.into(), &out)?;
            for f in files {
                println!("{}", f.display());
            }
            Ok(())
        }
    }
}
