//! Representative life satisfaction for a simulated cohort under a banded
//! distribution read from CSV, repeated under two probability weightings.

use lifesat::aggregation::DistributionSpec;
use lifesat::estimation::CptConfig;
use lifesat::io::parse_distribution;
use lifesat::pipeline::{estimate_cohort, sensitivity_rerun, EstimateOptions, RlsOptions};
use lifesat::simulator::{run_cohort, CohortSpec, EngineConfig, UtilityModel};

fn main() -> anyhow::Result<()> {
    let dist = parse_distribution(include_str!("data/uk_bands.csv"))?;
    let records = run_cohort(
        &CohortSpec {
            societal_multiplier: 2.0,
            ..CohortSpec::new(60, 9, UtilityModel::LogNormalIncrements { drift: 0.8, spread: 1.5 })
        }
        .agents(),
        &EngineConfig::default(),
    )?;
    let cohort = estimate_cohort(&records, &EstimateOptions { mle: None, ..Default::default() });

    let weightings = [None, Some(CptConfig::MEDIAN), Some(CptConfig::EXTREME)];
    for table in sensitivity_rerun(&cohort, &weightings, &dist, &RlsOptions::default())? {
        let label = match table.cpt {
            None => "expected utility".to_owned(),
            Some(c) => format!("weighted δ={} γ={}", c.delta, c.gamma),
        };
        println!("{label} (mean LS {:.2}, {} dropped)", table.mean_ls, table.dropped.len());
        for r in &table.results {
            println!("  {:?}/{:?}: {:.3} ({:+.3}, n = {})", r.basis, r.variant, r.rls, r.delta_from_mean, r.n_participants);
        }
    }

    let everyone_at_seven = DistributionSpec::point_mass(7)?;
    let table = &sensitivity_rerun(&cohort, &[None], &everyone_at_seven, &RlsOptions::default())?[0];
    println!("\npoint mass at 7 ({}):", table.normalization_reference);
    for r in &table.results {
        println!("  {:?}/{:?}: {:.3}", r.basis, r.variant, r.rls);
    }
    Ok(())
}
