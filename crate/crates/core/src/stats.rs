//! Small statistics helpers for experiment summaries.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Median of `xs`, averaging the two middle values for even lengths.
/// NaNs sort last.
pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// 1-based ranks with ties given their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spearman {
    pub rho: f64,
    /// One-sided p-value for `rho > 0`.
    pub p_value: f64,
}

/// Largest sample for which the p-value is computed by enumerating all
/// permutations.
pub const EXACT_SPEARMAN_MAX: usize = 8;

/// Spearman rank correlation with a one-sided p-value against the
/// alternative of positive association. Exact for small samples, Student-t
/// approximation otherwise.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<Spearman> {
    if x.len() != y.len() || x.len() < 3 {
        return None;
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let rho = pearson(&rx, &ry);
    if rho.is_nan() {
        return None;
    }
    let n = x.len();
    let p_value = if n <= EXACT_SPEARMAN_MAX {
        let mut perm = ry.clone();
        let mut hits = 0u64;
        let mut total = 0u64;
        permutations(&mut perm, 0, &mut |p| {
            total += 1;
            if pearson(&rx, p) >= rho - 1e-12 {
                hits += 1;
            }
        });
        hits as f64 / total as f64
    } else {
        let df = (n - 2) as f64;
        let t = rho * (df / (1.0 - rho * rho).max(f64::MIN_POSITIVE)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
        1.0 - dist.cdf(t)
    };
    Some(Spearman { rho, p_value })
}

fn permutations<F: FnMut(&[f64])>(v: &mut [f64], k: usize, visit: &mut F) {
    if k == v.len() {
        visit(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, visit);
        v.swap(k, i);
    }
}

/// Least-squares fit of `y = c x` without intercept.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OriginFit {
    pub slope: f64,
    /// `1 - SS_res / SS_tot` with `SS_tot` taken about the mean of `y`.
    pub r_squared: f64,
}

pub fn fit_through_origin(x: &[f64], y: &[f64]) -> OriginFit {
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let slope = sxy / sxx;
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    OriginFit {
        slope,
        r_squared: 1.0 - ss_res / ss_tot,
    }
}
