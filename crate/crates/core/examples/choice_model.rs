//! Fits the noisy choice model to one simulated respondent and compares
//! the estimate with the truth and with the chained solve.

use lifesat::domain::{Context, LifeState};
use lifesat::estimation::{chain_points, chained_solve, choice_observations, mle_fit, MleConfig, UtilityCurve};
use lifesat::simulator::{power_utilities, run_agent_state, AgentSpec, EngineConfig, Sensitivity};

fn main() -> anyhow::Result<()> {
    let truth = power_utilities(0.6);
    let agent = AgentSpec {
        sensitivity: Sensitivity::Stochastic { sigma: 20.0 },
        ..AgentSpec::new(truth.clone(), 2024)
    };
    let state = run_agent_state(&agent, &EngineConfig::default())?;

    let obs = choice_observations(state.applied_events(), Context::Personal);
    let records = state.brackets();
    let chained = chained_solve(
        &chain_points(records.iter().filter(|r| r.gamble.context == Context::Personal).map(|r| (&r.gamble, &r.bracket))),
        Context::Personal,
        None,
        true,
    )
    .ok();
    let fit = mle_fit(&obs, chained.as_ref(), &MleConfig::default())?;

    println!("{} choices, sigma {:.1}, log-likelihood {:.3} (null {:.3})", fit.n_choices, fit.sigma, fit.log_likelihood, fit.null_log_likelihood);
    println!("McFadden R² {:.3}, {:.0}% reproduced, warnings {:?}", fit.mcfadden_r2, 100.0 * fit.fraction_correct, fit.warnings);

    let top = truth[&LifeState::A];
    let report = |c: &UtilityCurve, s| c.to_reporting().get(s);
    println!("\n{:>6} {:>8} {:>8} {:>8}", "state", "truth", "mle", "chained");
    for s in LifeState::ALL {
        println!(
            "{:>6} {:>8.3} {:>8.3} {:>8}",
            s.letter(),
            truth[&s] / top,
            report(&fit.utilities, s).unwrap_or(f64::NAN),
            chained.as_ref().and_then(|c| report(c, s)).map_or("-".into(), |u| format!("{u:.3}"))
        );
    }
    Ok(())
}
