//! Rank statistics and small significance tests.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

/// Ascending 1-based ranks with ties sharing their average rank.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j hold ranks i+1..=j+1
        let avg = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Standard normal quantile function.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

pub fn standard_error(xs: &[f64]) -> f64 {
    sample_sd(xs) / (xs.len() as f64).sqrt()
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&fractional_ranks(x), &fractional_ranks(y))
}

/// Spearman's rho with a two-sided p-value: exact permutation for n < 10,
/// Student-t approximation otherwise.
pub fn spearman_test(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    if n != y.len() || n < 3 {
        return Err(Error::Argument("spearman needs >= 3 paired values".into()));
    }
    let rx = fractional_ranks(x);
    let ry = fractional_ranks(y);
    let rho = pearson(&rx, &ry).ok_or_else(|| Error::Degenerate("constant input to spearman".into()))?;
    let p = if n < 10 {
        permutation_p_value(&rx, &ry, rho)
    } else {
        t_approx_p_value(rho, n)
    };
    Ok((rho, p))
}

fn t_approx_p_value(rho: f64, n: usize) -> f64 {
    let df = n as f64 - 2.0;
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * (1.0 - dist.cdf(t.abs()))).min(1.0)
}

fn permutation_p_value(rx: &[f64], ry: &[f64], rho: f64) -> f64 {
    let mut perm = ry.to_vec();
    let n = perm.len();
    let mut c = vec![0usize; n];
    let (mut extreme, mut total) = (0u64, 0u64);
    let mut tally = |p: &[f64]| {
        total += 1;
        if pearson(rx, p).is_some_and(|r| r.abs() >= rho.abs() - 1e-12) {
            extreme += 1;
        }
    };
    // Heap's algorithm
    tally(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            tally(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    extreme as f64 / total as f64
}

/// One-sided paired t-test of `mean(diffs) > 0`; returns (t, p).
pub fn paired_t_greater(diffs: &[f64]) -> Result<(f64, f64)> {
    if diffs.len() < 2 {
        return Err(Error::Argument("paired t-test needs >= 2 pairs".into()));
    }
    let se = standard_error(diffs);
    let m = mean(diffs);
    if se == 0.0 {
        let p = if m > 0.0 { 0.0 } else { 1.0 };
        return Ok((if m > 0.0 { f64::INFINITY } else { 0.0 }, p));
    }
    let t = m / se;
    let dist = StudentsT::new(0.0, 1.0, diffs.len() as f64 - 1.0).expect("df > 0");
    Ok((t, 1.0 - dist.cdf(t)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(fractional_ranks(&[5.0, 5.0, 9.0]), vec![1.5, 1.5, 3.0]);
        assert_eq!(fractional_ranks(&[3.0, f64::INFINITY, 1.0, f64::INFINITY]), vec![2.0, 3.5, 1.0, 3.5]);
    }

    #[test]
    fn quantiles_match_reference_values() {
        // scipy.stats.norm.ppf
        assert!((normal_quantile(0.25) + 0.6744897501960817).abs() < 1e-14);
        assert!((normal_quantile(0.375) + 0.31863936396437514).abs() < 1e-14);
        assert_eq!(normal_quantile(0.5), 0.0);
    }

    #[test]
    fn spearman_hand_case() {
        // x ranks 1..4, y ranks (1, 3, 2, 4): d² sum = 2, rho = 1 - 6·2/(4·15) = 0.8
        let (rho, p) = spearman_test(&[1.0, 2.0, 3.0, 4.0], &[10.0, 30.0, 20.0, 40.0]).unwrap();
        assert!((rho - 0.8).abs() < 1e-12);
        // 8 of the 24 permutations reach |rho| >= 0.8
        assert!((p - 8.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_monotone() {
        let x: Vec<f64> = (0..12).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| -v * v).collect();
        let (rho, p) = spearman_test(&x, &y).unwrap();
        assert_eq!(rho, -1.0);
        assert_eq!(p, 0.0);
        assert!(spearman_test(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn t_approximation_matches_reference() {
        // scipy.stats.spearmanr reference
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        let y = [2.0, 1.0, 4.0, 3.0, 7.0, 10.0, 5.0, 6.0, 9.0, 8.0];
        let (rho, p) = spearman_test(&x, &y).unwrap();
        let expected_rho = 1.0 - 6.0 * 36.0 / (10.0 * 99.0);
        assert!((rho - expected_rho).abs() < 1e-12);
        assert!((rho - 0.7818181818181817).abs() < 1e-12);
        assert!((p - 0.007547007781067878).abs() < 1e-9, "p={p}");
    }

    #[test]
    fn one_sided_t() {
        let (t, p) = paired_t_greater(&[1.0, 2.0, 3.0, 2.0]).unwrap();
        assert!(t > 0.0 && p < 0.05);
        let (_, p) = paired_t_greater(&[-1.0, -2.0, -1.5]).unwrap();
        assert!(p > 0.5);
    }
}
