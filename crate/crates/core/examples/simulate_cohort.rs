//! Simulates a cohort of respondents and shows how the elicited brackets
//! compare with each agent's true indifference probabilities.

use lifesat::domain::Context;
use lifesat::estimation::CptConfig;
use lifesat::simulator::{run_cohort, CohortSpec, EngineConfig, Sensitivity, UtilityModel};

fn main() -> anyhow::Result<()> {
    let spec = CohortSpec {
        sensitivity: Sensitivity::Stochastic { sigma: 30.0 },
        perceptual_weighting: Some(CptConfig::MEDIAN),
        societal_multiplier: 1.5,
        ..CohortSpec::new(6, 42, UtilityModel::RandomConcave)
    };
    println!("{}", serde_json::to_string_pretty(&spec)?);

    let agents = spec.agents();
    let records = run_cohort(&agents, &EngineConfig::default())?;
    for (agent, record) in agents.iter().zip(&records) {
        let state = record.to_state()?;
        println!(
            "\nagent {} ({} events, {:?}, flags {:?})",
            agent.seed,
            record.transcript.len(),
            state.condition(),
            record.quality_flags
        );
        for r in state.brackets().iter().filter(|r| r.gamble.is_adjacent()) {
            let ctx = if r.gamble.context == Context::Personal { "personal" } else { "societal" };
            println!(
                "  {ctx} baseline {}  true p* {:.4}  bracket {:.4} .. {:.4}",
                r.gamble.baseline.letter(),
                agent.indifference_probability(&r.gamble).unwrap_or(f64::NAN),
                r.bracket.highest_accepted.probability(),
                r.bracket.lowest_rejected.probability()
            );
        }
    }
    Ok(())
}
