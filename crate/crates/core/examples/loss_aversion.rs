//! Loss aversion implied by each ladder bracket, with and without
//! probability weighting.

use lifesat::domain::{Bound, IndifferenceBracket, LifeState, ProbabilityLadder, LADDER_DENOMINATORS};
use lifesat::estimation::{indifference_point, lambda_from_gamble, CptConfig};

fn main() -> anyhow::Result<()> {
    println!("{:>20} {:>10} {:>10} {:>10} {:>10}", "bracket", "p*", "eum", "median", "extreme");
    for i in 0..LADDER_DENOMINATORS.len() - 1 {
        let bracket = IndifferenceBracket::resolved(Bound::Rung(i + 1), Bound::Rung(i));
        let point = indifference_point(&bracket, LifeState::C)?;
        let lambdas = [None, Some(&CptConfig::MEDIAN), Some(&CptConfig::EXTREME)]
            .map(|w| lambda_from_gamble(point, w).lambda);
        println!(
            "{:>20} {:>10.3e} {:>10.1} {:>10.1} {:>10.1}",
            format!("1/{} .. 1/{}", LADDER_DENOMINATORS[i + 1], LADDER_DENOMINATORS[i]),
            point.p_star,
            lambdas[0],
            lambdas[1],
            lambdas[2]
        );
    }

    // Refusing every rung leaves the bracket open at zero.
    let never = IndifferenceBracket::resolved(Bound::Zero, Bound::Rung(7));
    let point = indifference_point(&never, LifeState::C)?;
    println!("refused all rungs: λ = {}", lambda_from_gamble(point, None).lambda);

    println!("\nweights of the ladder probabilities:");
    for p in ProbabilityLadder::steps() {
        println!(
            "  p = {p:<9} median {:.5}  extreme {:.5}",
            CptConfig::MEDIAN.weight(p),
            CptConfig::EXTREME.weight(p)
        );
    }
    Ok(())
}
