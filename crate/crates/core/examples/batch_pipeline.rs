//! The file-based pipeline behind the CLI: simulate, estimate, aggregate
//! and report into a scratch directory.

use lifesat::aggregation::DistributionSpec;
use lifesat::batch;
use lifesat::estimation::{CptConfig, Subset};
use lifesat::pipeline::{AnchorPolicy, EstimateOptions, RlsOptions};
use lifesat::simulator::{CohortSpec, EngineConfig, Sensitivity, UtilityModel};

fn main() -> anyhow::Result<()> {
    let root = tempfile::tempdir()?;
    let spec = CohortSpec {
        sensitivity: Sensitivity::Stochastic { sigma: 25.0 },
        ..CohortSpec::new(30, 3, UtilityModel::RandomConcave)
    };

    let sessions = batch::simulate(&spec, &EngineConfig::default(), &root.path().join("simulated"))?;
    println!("simulated {} sessions", sessions.len());

    let est = batch::estimate(&[root.path().join("simulated")], &EstimateOptions::default(), &root.path().join("estimates"))?;
    println!("estimated {} participants, skipped {}", est.estimates.len(), est.skipped.len());

    let tables = batch::aggregate(
        &est.estimates,
        &DistributionSpec::illustrative(),
        &[CptConfig::MEDIAN],
        &RlsOptions::default(),
        &root.path().join("rls"),
    )?;
    for t in &tables {
        for r in &t.results {
            println!("  {:<28} {:?}/{:?} {:.3}", batch::weighting_label(t.cpt.as_ref()), r.basis, r.variant, r.rls);
        }
    }

    let files = batch::report(&est.estimates, Subset::All, AnchorPolicy::ParticipantWithFallback, &root.path().join("report"))?;
    for f in est.files.iter().chain(&files) {
        println!("wrote {}", f.strip_prefix(root.path())?.display());
    }
    Ok(())
}
