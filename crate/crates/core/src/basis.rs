//! Total-degree multi-index sets and orthonormal Legendre bases on boxes.
//!
//! Every input is an independent uniform variable on `[lower, upper]`. Points
//! are mapped affinely onto the reference cube `[-1, 1]^N`, where the
//! univariate Legendre polynomials scaled by `sqrt(2j + 1)` have unit second
//! moment under the uniform density. Multivariate basis functions are tensor
//! products selected by a total-degree multi-index set.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack accepted on the reference cube before a point counts as out of range.
pub const DOMAIN_TOLERANCE: f64 = 1e-12;

/// Largest basis this crate is willing to enumerate.
pub const MAX_BASIS_SIZE: usize = 1 << 24;

/// Partial polynomial degree per input dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(degrees: Vec<usize>) -> Self {
        MultiIndex(degrees)
    }

    pub fn degrees(&self) -> &[usize] {
        &self.0
    }

    pub fn total_degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&d| d == 0)
    }

    /// Graded order: total degree first, then lexicographic on the reversed
    /// index, so `(2,0) < (1,1) < (0,2)`.
    pub fn graded_cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.iter().rev().cmp(other.0.iter().rev()))
    }
}

/// All multi-indices with `|alpha|_1 <= max_degree`, in graded order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiIndexSet {
    input_dim: usize,
    max_degree: usize,
    indices: Vec<MultiIndex>,
}

/// Number of terms `(N+P)! / (N! P!)` in a total-degree basis, or `None` on overflow.
pub fn total_degree_cardinality(input_dim: usize, max_degree: usize) -> Option<usize> {
    // C(N+P, P) built incrementally; each partial product is itself a binomial
    // coefficient, so the division is exact.
    let mut acc: u128 = 1;
    for i in 1..=max_degree as u128 {
        acc = acc.checked_mul(input_dim as u128 + i)? / i;
    }
    usize::try_from(acc).ok()
}

/// Builds the total-degree set for `input_dim` variables up to `max_degree`.
pub fn build_total_degree_set(input_dim: usize, max_degree: usize) -> Result<MultiIndexSet> {
    if input_dim == 0 {
        return Err(Error::Invalid("input dimension must be at least 1".into()));
    }
    let overflow = Error::Overflow {
        input_dim,
        max_degree,
    };
    let size = match total_degree_cardinality(input_dim, max_degree) {
        Some(k) if k <= MAX_BASIS_SIZE => k,
        _ => return Err(overflow),
    };

    let mut indices = Vec::with_capacity(size);
    let mut current = vec![0usize; input_dim];
    enumerate(&mut current, 0, max_degree, &mut indices);
    indices.sort_by(MultiIndex::graded_cmp);
    debug_assert_eq!(indices.len(), size);

    Ok(MultiIndexSet {
        input_dim,
        max_degree,
        indices,
    })
}

fn enumerate(current: &mut [usize], dim: usize, budget: usize, out: &mut Vec<MultiIndex>) {
    if dim == current.len() {
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for d in 0..=budget {
        current[dim] = d;
        enumerate(current, dim + 1, budget - d, out);
    }
    current[dim] = 0;
}

impl MultiIndexSet {
    /// Rebuilds a set from explicit indices, checking that they are exactly the
    /// total-degree set for the given dimensions in canonical order.
    pub fn from_indices(
        input_dim: usize,
        max_degree: usize,
        indices: Vec<MultiIndex>,
    ) -> Result<Self> {
        let expected = build_total_degree_set(input_dim, max_degree)?;
        if expected.indices != indices {
            return Err(Error::Invalid(format!(
                "multi-index set is not the canonical total-degree set for N={input_dim}, P={max_degree}"
            )));
        }
        Ok(expected)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.indices.iter()
    }

    /// Position of the constant term.
    pub fn zero_position(&self) -> usize {
        self.indices
            .iter()
            .position(MultiIndex::is_zero)
            .expect("total-degree set always contains the zero index")
    }
}

/// Supports of independent uniform inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSpec {
    ranges: Vec<(f64, f64)>,
}

impl InputSpec {
    pub fn new(ranges: Vec<(f64, f64)>) -> Result<Self> {
        if ranges.is_empty() {
            return Err(Error::Invalid("input spec needs at least one range".into()));
        }
        for (dim, &(lo, hi)) in ranges.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Invalid(format!(
                    "range {dim} must satisfy lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(InputSpec { ranges })
    }

    /// The reference cube `[-1, 1]^dim`.
    pub fn reference(dim: usize) -> Result<Self> {
        Self::new(vec![(-1.0, 1.0); dim])
    }

    pub fn dim(&self) -> usize {
        self.ranges.len()
    }

    pub fn ranges(&self) -> &[(f64, f64)] {
        &self.ranges
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.ranges
            .iter()
            .map(|&(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }

    /// Affine map of `x` onto `[-1, 1]^N`.
    ///
    /// Results within [`DOMAIN_TOLERANCE`] of the cube are clamped onto it;
    /// anything further out is a domain error naming the dimension.
    pub fn to_reference(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        x.iter()
            .zip(&self.ranges)
            .enumerate()
            .map(|(dim, (&value, &(lower, upper)))| {
                let xi = 2.0 * (value - lower) / (upper - lower) - 1.0;
                if xi.is_nan() || xi.abs() > 1.0 + DOMAIN_TOLERANCE {
                    Err(Error::Domain {
                        dim,
                        value,
                        lower,
                        upper,
                    })
                } else {
                    Ok(xi.clamp(-1.0, 1.0))
                }
            })
            .collect()
    }

    /// Inverse of [`InputSpec::to_reference`].
    pub fn from_reference(&self, xi: &[f64]) -> Result<Vec<f64>> {
        if xi.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: xi.len(),
            });
        }
        Ok(xi
            .iter()
            .zip(&self.ranges)
            .map(|(&t, &(lo, hi))| lo + 0.5 * (t + 1.0) * (hi - lo))
            .collect())
    }
}

/// Orthonormal Legendre values `psi_0(xi), ..., psi_degree(xi)` on `[-1, 1]`.
pub fn legendre_orthonormal(xi: f64, degree: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(degree + 1);
    p.push(1.0);
    if degree >= 1 {
        p.push(xi);
    }
    for j in 1..degree {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0) * xi * p[j] - jf * p[j - 1]) / (jf + 1.0);
        p.push(next);
    }
    for (j, v) in p.iter_mut().enumerate().skip(1) {
        *v *= ((2 * j + 1) as f64).sqrt();
    }
    p
}

/// One design-matrix row: every basis function of `set` evaluated at the
/// reference point `xi`.
pub fn eval_basis_row(xi: &[f64], set: &MultiIndexSet) -> Result<Vec<f64>> {
    if xi.len() != set.input_dim() {
        return Err(Error::Dimension {
            expected: set.input_dim(),
            got: xi.len(),
        });
    }
    let tables = xi
        .iter()
        .enumerate()
        .map(|(dim, &t)| {
            if t.is_nan() || t.abs() > 1.0 + DOMAIN_TOLERANCE {
                Err(Error::Domain {
                    dim,
                    value: t,
                    lower: -1.0,
                    upper: 1.0,
                })
            } else {
                Ok(legendre_orthonormal(t.clamp(-1.0, 1.0), set.max_degree()))
            }
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(set
        .iter()
        .map(|alpha| {
            alpha
                .degrees()
                .iter()
                .zip(&tables)
                .fold(1.0, |acc, (&d, table)| acc * table[d])
        })
        .collect())
}
