//! The cohort statistics on small hand-made samples.

use lifesat::stats::{cronbach_alpha, mann_whitney, median, pearson, tukey_quartiles};

fn main() -> anyhow::Result<()> {
    let own_ls = [7.0, 8.0, 6.0, 9.0, 5.0, 7.0, 8.0, 4.0];
    let lambda_prime = [0.62, 0.70, 0.41, 0.88, 0.35, 0.55, 0.74, 0.20];
    let c = pearson(&own_ls, &lambda_prime)?;
    println!("pearson r = {:.3}, p = {:.2e}, n = {}", c.r, c.p, c.n);

    let left = [0.81, 0.64, 0.92, 0.77, 0.70];
    let right = [0.52, 0.61, 0.48, 0.73, 0.58, 0.66];
    let mw = mann_whitney(&left, &right)?;
    println!("mann-whitney U = {}, p = {:.4} ({})", mw.u, mw.p, if mw.exact { "exact" } else { "normal approximation" });

    let items = vec![
        vec![4.0, 3.0, 4.0, 5.0, 4.0],
        vec![2.0, 2.0, 3.0, 2.0, 1.0],
        vec![5.0, 4.0, 5.0, 4.0, 5.0],
        vec![3.0, 3.0, 2.0, 3.0, 3.0],
        vec![1.0, 2.0, 1.0, 2.0, 2.0],
    ];
    println!("cronbach alpha = {:.3}", cronbach_alpha(&items)?);

    let lambdas = [1.2, 2.2, 2.2, 6.1, 30.6, 2.2, 315.2, 6.1, 0.5];
    let q = tukey_quartiles(&lambdas).expect("non-empty");
    println!("λ quartiles {:.1} [{:.1}, {:.1}], median {:?}", q.median, q.q1, q.q3, median(&lambdas));
    Ok(())
}
