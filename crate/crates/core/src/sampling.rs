//! Low-dispersion sampling and random geometric graph construction.

use thiserror::Error;

use crate::graph::{euclidean, EdgeSpec, Graph, GraphError};

#[derive(Debug, Error, PartialEq)]
pub enum SamplingError {
    #[error("no Halton bases given")]
    NoBases,
    #[error("Halton base {0} is not prime")]
    NotPrime(u64),
    #[error("Halton base {0} is repeated")]
    RepeatedBase(u64),
    #[error("point set is empty")]
    NoPoints,
    #[error("connection radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("points have inconsistent dimensions")]
    RaggedPoints,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// The first `d` primes, for use as Halton bases.
pub const PRIMES: [u64; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// Radical inverse of `index` in `base`: the base-`base` digits of `index`
/// mirrored about the radix point.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

fn check_bases(bases: &[u64]) -> Result<(), SamplingError> {
    if bases.is_empty() {
        return Err(SamplingError::NoBases);
    }
    for (i, &b) in bases.iter().enumerate() {
        if !is_prime(b) {
            return Err(SamplingError::NotPrime(b));
        }
        if bases[..i].contains(&b) {
            return Err(SamplingError::RepeatedBase(b));
        }
    }
    Ok(())
}

/// The `index`-th Halton point; component `k` is the radical inverse of
/// `index` in `bases[k]`.
pub fn halton_point(index: u64, bases: &[u64]) -> Result<Vec<f64>, SamplingError> {
    check_bases(bases)?;
    Ok(bases.iter().map(|&b| radical_inverse(index, b)).collect())
}

/// Halton points for indices `start..start + count`.
pub fn halton_points(start: u64, count: usize, bases: &[u64]) -> Result<Vec<Vec<f64>>, SamplingError> {
    check_bases(bases)?;
    Ok((start..start + count as u64)
        .map(|i| bases.iter().map(|&b| radical_inverse(i, b)).collect())
        .collect())
}

/// Connection radius `gamma * (ln n / n)^(1/d)`.
pub fn default_radius(n: usize, dim: usize, gamma: f64) -> f64 {
    let n = n.max(2) as f64;
    gamma * (n.ln() / n).powf(1.0 / dim as f64)
}

/// Connects every pair of points within Euclidean distance `radius`.
///
/// Edge weights are Euclidean lengths, priors start at 1, and edge ids are
/// ordered by `(min endpoint, max endpoint)`.
pub fn build_rgg(points: &[Vec<f64>], radius: f64) -> Result<Graph, SamplingError> {
    if points.is_empty() {
        return Err(SamplingError::NoPoints);
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(SamplingError::BadRadius(radius));
    }
    let dim = points[0].len();
    if dim == 0 || points.iter().any(|p| p.len() != dim) {
        return Err(SamplingError::RaggedPoints);
    }

    // Sweep along the first axis so only nearby candidates are compared.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(a.cmp(&b)));

    let mut pairs = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if points[j][0] - points[i][0] > radius {
                break;
            }
            let d = euclidean(&points[i], &points[j]);
            if d <= radius && d > 0.0 {
                pairs.push((i.min(j), i.max(j), d));
            }
        }
    }
    pairs.sort_by_key(|p| (p.0, p.1));

    let edges = pairs.into_iter().map(|(u, v, d)| EdgeSpec::new(u, v, d)).collect();
    Ok(Graph::new(dim, points.to_vec(), edges)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_examples() {
        assert_eq!(halton_point(0, &[2, 3]).unwrap(), vec![0.0, 0.0]);
        let p = halton_point(1, &[2, 3]).unwrap();
        assert_eq!(p[0], 0.5);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
        let p = halton_point(3, &[2, 3]).unwrap();
        assert_eq!(p[0], 0.75);
        assert!((p[1] - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn halton_rejects_bad_bases() {
        assert_eq!(halton_point(1, &[2, 4]), Err(SamplingError::NotPrime(4)));
        assert_eq!(halton_point(1, &[3, 3]), Err(SamplingError::RepeatedBase(3)));
        assert_eq!(halton_point(1, &[1]), Err(SamplingError::NotPrime(1)));
        assert_eq!(halton_point(1, &[]), Err(SamplingError::NoBases));
    }

    #[test]
    fn halton_components_in_unit_interval() {
        for p in halton_points(0, 500, &[2, 3, 5]).unwrap() {
            assert!(p.iter().all(|&x| (0.0..1.0).contains(&x)));
        }
    }

    #[test]
    fn rgg_small_cases() {
        let g = build_rgg(&[vec![0.1, 0.1], vec![0.15, 0.1]], 0.1).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!((g.edges()[0].weight - 0.05).abs() < 1e-12);
        assert_eq!(g.edges()[0].prior, 1.0);

        let line = [vec![0.1, 0.5], vec![0.3, 0.5], vec![0.5, 0.5]];
        let g = build_rgg(&line, 0.25).unwrap();
        assert_eq!(g.edge_count(), 2);

        assert_eq!(build_rgg(&[], 0.1).unwrap_err(), SamplingError::NoPoints);
        assert_eq!(build_rgg(&line, 0.0).unwrap_err(), SamplingError::BadRadius(0.0));
    }

    #[test]
    fn rgg_edge_ids_are_sorted_by_endpoints() {
        let pts = halton_points(1, 200, &[2, 3]).unwrap();
        let g = build_rgg(&pts, default_radius(200, 2, 2.0)).unwrap();
        let keys: Vec<_> = g.edges().iter().map(|e| (e.endpoints.0, e.endpoints.1)).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert!(keys.iter().all(|(a, b)| a < b));
    }
}
