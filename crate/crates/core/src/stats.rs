//! Correlation, rank tests, reliability and quartile summaries.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("inputs differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("correlation is undefined for constant input")]
    Constant,
    #[error("total variance is zero")]
    ZeroVariance,
    #[error("ragged item matrix")]
    Ragged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Pearson's r with a two-sided p-value from Student's t on n − 2 df.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFew { needed: 3, got: n });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::Constant);
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
        (2.0 * dist.cdf(-t.abs())).min(1.0)
    };
    Ok(Correlation { r, p, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// Pairs where the first sample wins, ties counting one half.
    pub u: f64,
    pub p: f64,
    pub exact: bool,
}

/// Largest `|a|·|b|` for which the null distribution is enumerated.
pub const EXACT_PAIR_LIMIT: usize = 400;

/// Two-sided Mann-Whitney U test of `a` against `b`.
pub fn mann_whitney(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::TooFew {
            needed: 1,
            got: a.len().min(b.len()),
        });
    }
    let mut twice_u = 0usize;
    for x in a {
        for y in b {
            twice_u += match x.partial_cmp(y) {
                Some(std::cmp::Ordering::Greater) => 2,
                Some(std::cmp::Ordering::Equal) => 1,
                _ => 0,
            };
        }
    }
    let u = twice_u as f64 / 2.0;
    let groups = tie_groups(a, b);
    let (na, nb) = (a.len(), b.len());
    if na * nb <= EXACT_PAIR_LIMIT {
        return Ok(MannWhitney {
            u,
            p: exact_p(&groups, na, nb, twice_u),
            exact: true,
        });
    }

    let n = (na + nb) as f64;
    let tie_term: f64 = groups.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
    let var = na as f64 * nb as f64 / 12.0 * ((n + 1.0) - tie_term);
    let centre = na as f64 * nb as f64 / 2.0;
    let dev = (u - centre).abs();
    let p = if var <= 0.0 {
        1.0
    } else {
        let z = (dev - 0.5).max(0.0) / var.sqrt();
        (2.0 * Normal::standard().cdf(-z)).min(1.0)
    };
    Ok(MannWhitney { u, p, exact: false })
}

/// Sizes of the groups of equal values in the pooled sample, ascending.
fn tie_groups(a: &[f64], b: &[f64]) -> Vec<usize> {
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    pooled.sort_by(|x, y| x.total_cmp(y));
    let mut out = Vec::new();
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j] == pooled[i] {
            j += 1;
        }
        out.push(j - i);
        i = j;
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Permutation distribution of 2U given the tie structure: walk the groups
/// in ascending order, choosing how many of each go to the first sample.
fn exact_p(groups: &[usize], na: usize, nb: usize, observed_twice_u: usize) -> f64 {
    let max = 2 * na * nb;
    // ways[m][v]: arrangements with m first-sample items placed and 2U = v.
    let mut ways = vec![vec![0.0f64; max + 1]; na + 1];
    ways[0][0] = 1.0;
    let mut seen = 0;
    for &size in groups {
        let mut next = vec![vec![0.0f64; max + 1]; na + 1];
        for m in 0..=na.min(seen) {
            let below_b = seen - m;
            for (v, &w) in ways[m].iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for k in 0..=size.min(na - m) {
                    if below_b + (size - k) > nb {
                        continue;
                    }
                    let add = 2 * k * below_b + k * (size - k);
                    next[m + k][v + add] += w * binomial(size, k);
                }
            }
        }
        ways = next;
        seen += size;
    }
    let total: f64 = ways[na].iter().sum();
    let centre = (na * nb) as f64;
    let dev = (observed_twice_u as f64 - centre).abs();
    let tail: f64 = ways[na]
        .iter()
        .enumerate()
        .filter(|(v, _)| (*v as f64 - centre).abs() >= dev - 1e-9)
        .map(|(_, w)| w)
        .sum();
    (tail / total).min(1.0)
}

/// Cronbach's alpha for a participants × items matrix (sample variances).
pub fn cronbach_alpha(rows: &[Vec<f64>]) -> Result<f64, StatsError> {
    let n = rows.len();
    if n < 2 {
        return Err(StatsError::TooFew { needed: 2, got: n });
    }
    let k = rows[0].len();
    if k < 2 {
        return Err(StatsError::TooFew { needed: 2, got: k });
    }
    if rows.iter().any(|r| r.len() != k) {
        return Err(StatsError::Ragged);
    }
    let var = |xs: &[f64]| {
        let m = mean(xs);
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    };
    let item_var: f64 = (0..k)
        .map(|j| var(&rows.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .sum();
    let totals: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
    let total_var = var(&totals);
    if total_var == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let k = k as f64;
    Ok(k / (k - 1.0) * (1.0 - item_var / total_var))
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    Some(sorted_median(&v))
}

fn sorted_median(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        // Midpoint of two infinities stays infinite.
        if v[n / 2 - 1] == v[n / 2] {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Tukey hinges: medians of the lower and upper halves, each half
/// including the median when the count is odd.
pub fn tukey_quartiles(xs: &[f64]) -> Option<Quartiles> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    let half = n.div_ceil(2);
    Some(Quartiles {
        q1: sorted_median(&v[..half]),
        median: sorted_median(&v),
        q3: sorted_median(&v[n - half..]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perfect_and_orthogonal_correlation() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let c = pearson(&x, &y).unwrap();
        assert_abs_diff_eq!(c.r, 1.0, epsilon = 1e-15);
        assert!(c.p < 1e-12);
        let xs: Vec<f64> = (-5..=5).map(f64::from).collect();
        let sq: Vec<f64> = xs.iter().map(|v| v * v).collect();
        assert_abs_diff_eq!(pearson(&xs, &sq).unwrap().r, 0.0, epsilon = 1e-15);
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(StatsError::Constant));
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn rank_test_small_cases() {
        assert_eq!(mann_whitney(&[1.0, 2.0], &[3.0, 4.0]).unwrap().u, 0.0);
        let m = mann_whitney(&[1.0, 3.0], &[2.0, 4.0]).unwrap();
        assert_eq!(m.u, 1.0);
        assert_abs_diff_eq!(m.p, 2.0 / 3.0, epsilon = 1e-12);
        let same = [1.0, 2.0, 3.0];
        let m = mann_whitney(&same, &same).unwrap();
        assert_eq!(m.u, 4.5);
        assert_abs_diff_eq!(m.p, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn large_samples_use_the_normal_approximation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<f64> = (0..40).map(|_| rng.gen_range(0..10) as f64).collect();
        let b: Vec<f64> = (0..40).map(|_| rng.gen_range(2..12) as f64).collect();
        let m = mann_whitney(&a, &b).unwrap();
        assert!(!m.exact);
        assert!(m.p < 0.05);
    }

    #[test]
    fn alpha_of_identical_items_is_one() {
        let rows: Vec<Vec<f64>> = [1.0, 4.0, 2.0, 5.0, 3.0].iter().map(|&v| vec![v; 4]).collect();
        assert_abs_diff_eq!(cronbach_alpha(&rows).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(cronbach_alpha(&[vec![1.0, 1.0], vec![1.0, 1.0]]), Err(StatsError::ZeroVariance));
    }

    #[test]
    fn alpha_of_independent_items_is_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows: Vec<Vec<f64>> = (0..10_000).map(|_| vec![rng.gen(), rng.gen()]).collect();
        assert!(cronbach_alpha(&rows).unwrap().abs() < 0.1);
    }

    #[test]
    fn hinges() {
        let q = tukey_quartiles(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (2.0, 3.0, 4.0));
        let q = tukey_quartiles(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (1.5, 2.5, 3.5));
        assert_eq!(median(&[f64::INFINITY, f64::INFINITY]), Some(f64::INFINITY));
        assert_eq!(median(&[]), None);
    }

    proptest! {
        #[test]
        fn pearson_symmetry_and_affine_invariance(
            pairs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40),
            scale in 0.1f64..10.0,
            shift in -50.0f64..50.0,
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            if let (Ok(a), Ok(b)) = (pearson(&x, &y), pearson(&y, &x)) {
                prop_assert!((a.r - b.r).abs() < 1e-12);
                let xt: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
                let c = pearson(&xt, &y).unwrap();
                prop_assert!((a.r - c.r).abs() < 1e-9);
            }
        }

        #[test]
        fn u_statistics_sum_to_pairs(
            a in prop::collection::vec(0u8..6, 1..15),
            b in prop::collection::vec(0u8..6, 1..15),
        ) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            let (ab, ba) = (mann_whitney(&a, &b).unwrap(), mann_whitney(&b, &a).unwrap());
            prop_assert_eq!(ab.u + ba.u, (a.len() * b.len()) as f64);
            prop_assert!((ab.p - ba.p).abs() < 1e-12);
            prop_assert!(ab.p > 0.0 && ab.p <= 1.0);
        }

        #[test]
        fn alpha_ignores_column_shifts(
            rows in prop::collection::vec(prop::collection::vec(1u8..6, 3), 5..30),
            shift in -5.0f64..5.0,
        ) {
            let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect();
            let shifted: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0] + shift, r[1], r[2]]).collect();
            if let Ok(a) = cronbach_alpha(&rows) {
                prop_assert!((a - cronbach_alpha(&shifted).unwrap()).abs() < 1e-9);
            }
        }
    }
}
