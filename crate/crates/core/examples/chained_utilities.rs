//! Chains four adjacent-gamble indifference points into a utility curve.

use std::collections::BTreeMap;

use lifesat::domain::{Bound, Context, IndifferenceBracket, LifeState};
use lifesat::estimation::{chained_bounds, chained_solve, death_knot, indifference_point, ChainPoints, CptConfig};

fn main() -> anyhow::Result<()> {
    // Highest accepted rung by baseline; each bracket's other end is one rung up.
    let accepted = [(LifeState::E, 2), (LifeState::D, 1), (LifeState::C, 1), (LifeState::B, 1)];
    let brackets: BTreeMap<LifeState, IndifferenceBracket> = accepted
        .iter()
        .map(|&(s, i)| (s, IndifferenceBracket::resolved(Bound::Rung(i), Bound::Rung(i - 1))))
        .collect();
    let points: ChainPoints = brackets
        .iter()
        .map(|(s, b)| Ok((*s, indifference_point(b, *s)?)))
        .collect::<Result<_, lifesat::estimation::EstimationError>>()?;

    for cpt in [None, Some(CptConfig::MEDIAN)] {
        let label = if cpt.is_some() { "weighted" } else { "expected utility" };
        let with_death = chained_solve(&points, Context::Personal, cpt.as_ref(), true)?;
        let without = chained_solve(&points, Context::Personal, cpt.as_ref(), false)?;
        let bounds = chained_bounds(&brackets, cpt.as_ref(), true)?;
        println!("{label}:");
        println!("  {:>6} {:>10} {:>10} {:>22}", "state", "U", "U/U(A)", "bracket bounds");
        let reporting = with_death.to_reporting();
        for s in LifeState::ALL {
            let (lo, hi) = bounds[&s];
            println!(
                "  {:>6} {:>10.3} {:>10.4} {:>10.3} .. {:<10.3}",
                s.letter(),
                with_death.values[&s],
                reporting.values[&s],
                lo,
                hi
            );
        }
        let knot = death_knot(&without, points[&LifeState::E], cpt.as_ref());
        println!("  death on the E=0, D=1 scale: {:.3}\n", knot.unwrap_or(f64::NEG_INFINITY));
    }
    Ok(())
}
