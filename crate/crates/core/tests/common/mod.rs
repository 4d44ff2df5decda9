#![allow(dead_code)]

use conformal_pce::basis::InputSpec;
use conformal_pce::benchmarks::TestFunction;
use conformal_pce::error::Result;
use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss–Legendre nodes and weights on [-1, 1] from the eigen-decomposition of
/// the Jacobi matrix (Golub–Welsch). Weights are scaled by the uniform density
/// 1/2, so they sum to one.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let beta = kf / (4.0 * kf * kf - 1.0).sqrt();
        jacobi[(k, k - 1)] = beta;
        jacobi[(k - 1, k)] = beta;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Tensor grid of a 1-D rule in `dim` dimensions: (points, weights).
pub fn tensor_rule(n: usize, dim: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mut points = vec![vec![]];
    let mut weights = vec![1.0];
    for _ in 0..dim {
        let mut np = Vec::new();
        let mut nw = Vec::new();
        for (p, pw) in points.iter().zip(&weights) {
            for (xi, wi) in x.iter().zip(&w) {
                let mut q = p.clone();
                q.push(*xi);
                np.push(q);
                nw.push(pw * wi);
            }
        }
        points = np;
        weights = nw;
    }
    (points, weights)
}

/// |a - b| <= max(rel * max(|a|, |b|), abs_floor)
pub fn close(a: f64, b: f64, rel: f64, abs_floor: f64) -> bool {
    (a - b).abs() <= (rel * a.abs().max(b.abs())).max(abs_floor)
}

/// Maximum violation ratio of `close` over paired slices (<= 1 means pass).
pub fn worst_ratio(a: &[f64], b: &[f64], rel: f64, abs_floor: f64) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / (rel * x.abs().max(y.abs())).max(abs_floor))
        .fold(0.0, f64::max)
}

/// Lower end of the two-sided Wilson score interval for a binomial proportion.
pub fn wilson_lower(successes: f64, n: f64, z: f64) -> f64 {
    let p = successes / n;
    let z2 = z * z;
    let center = p + z2 / (2.0 * n);
    let margin = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (center - margin) / (1.0 + z2 / n)
}

/// A polynomial that a total-degree basis of degree >= 2 reproduces exactly.
pub struct ExactQuadratic;

impl TestFunction for ExactQuadratic {
    fn name(&self) -> &str {
        "exact_quadratic"
    }

    fn input_spec(&self) -> InputSpec {
        InputSpec::new(vec![(0.0, 2.0), (-1.0, 3.0)]).unwrap()
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.input_spec().to_reference(x)?;
        Ok(1.5 + 2.0 * x[0] - x[1] + 0.25 * x[0] * x[1] + 0.5 * x[1] * x[1])
    }
}

/// The zero polynomial: every fitted quantity is exactly zero in floating point.
pub struct ZeroTarget;

impl TestFunction for ZeroTarget {
    fn name(&self) -> &str {
        "zero_target"
    }

    fn input_spec(&self) -> InputSpec {
        InputSpec::new(vec![(0.0, 2.0), (-1.0, 3.0)]).unwrap()
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.input_spec().to_reference(x)?;
        Ok(0.0)
    }
}
