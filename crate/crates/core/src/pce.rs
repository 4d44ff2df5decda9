//! Least-squares polynomial chaos expansion with closed-form leave-one-out
//! quantities.
//!
//! The design matrix `D` is factored once as `D = QR`. From that single
//! factorization we get the coefficients, the hat diagonal `h_mm = |q_m|^2`,
//! the leave-one-out residuals `r_m = e_m / (1 - h_mm)`, and the correction
//! rows `G_m = (D^T D)^{-1} d_m r_m = R^{-1} q_m r_m`. A leave-one-out
//! prediction at a new point is then `mu(x*) - d_*^T G_m`, with no refits.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::{eval_basis_row, InputSpec, MultiIndex, MultiIndexSet};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Condition number of `D` above which a fit is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Smallest admissible `1 - h_mm`.
pub const MIN_LEVERAGE_GAP: f64 = 1e-10;

/// Denominators at or below this count as a zero variance.
pub const MIN_VARIANCE: f64 = 1e-300;

/// How `Var(Y)` is estimated for relative errors and normalized scores.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum VarianceEstimator {
    /// Sum of squared non-constant coefficients.
    #[default]
    Coefficients,
    /// Unbiased sample variance of the training outputs.
    Empirical,
}

/// Quantities that only exist for a model fitted in this process.
#[derive(Debug, Clone)]
pub struct FitInfo {
    /// `(D^T D)^{-1}`, materialized from the triangular factor.
    pub normal_inverse: DMatrix<f64>,
    /// 2-norm condition number of the design matrix.
    pub condition_number: f64,
    pub training: Dataset,
}

/// A fitted surrogate together with its leave-one-out machinery.
#[derive(Debug, Clone)]
pub struct PceModel {
    spec: InputSpec,
    index_set: MultiIndexSet,
    coefficients: DVector<f64>,
    hat_diag: DVector<f64>,
    loo_residuals: DVector<f64>,
    loo_corrections: DMatrix<f64>,
    /// Sample variance of the training outputs, kept for serialized models.
    output_sample_variance: f64,
    fit_info: Option<FitInfo>,
}

/// Evaluates every basis function at every input, mapping through `spec` first.
pub fn design_matrix(
    inputs: &[Vec<f64>],
    set: &MultiIndexSet,
    spec: &InputSpec,
) -> Result<DMatrix<f64>> {
    let mut d = DMatrix::zeros(inputs.len(), set.len());
    for (m, x) in inputs.iter().enumerate() {
        let row = eval_basis_row(&spec.to_reference(x)?, set)?;
        for (k, v) in row.into_iter().enumerate() {
            d[(m, k)] = v;
        }
    }
    Ok(d)
}

fn check_compatible(set: &MultiIndexSet, spec: &InputSpec) -> Result<()> {
    if set.input_dim() != spec.dim() {
        return Err(Error::Dimension {
            expected: spec.dim(),
            got: set.input_dim(),
        });
    }
    Ok(())
}

/// Fits the expansion by least squares and precomputes every closed-form
/// leave-one-out quantity.
pub fn fit(data: &Dataset, set: &MultiIndexSet, spec: &InputSpec) -> Result<PceModel> {
    check_compatible(set, spec)?;
    let m = data.len();
    let k = set.len();
    if m < k {
        return Err(Error::Underdetermined {
            samples: m,
            basis: k,
        });
    }

    let d = design_matrix(data.inputs(), set, spec)?;
    let y = DVector::from_column_slice(data.outputs());

    let qr = d.clone().qr();
    let q = qr.q();
    let r = qr.r();

    let singular = r.singular_values();
    let smax = singular.max();
    let smin = singular.min();
    let condition_number = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if condition_number.is_nan() || condition_number > MAX_CONDITION {
        return Err(Error::RankDeficient {
            condition: condition_number,
            limit: MAX_CONDITION,
        });
    }

    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::RankDeficient {
            condition: f64::INFINITY,
            limit: MAX_CONDITION,
        })?;

    let coefficients = &r_inv * (q.transpose() * &y);
    let residuals = &y - &d * &coefficients;
    let hat_diag = DVector::from_fn(m, |i, _| q.row(i).norm_squared());

    let mut loo_residuals = DVector::zeros(m);
    for i in 0..m {
        let gap = 1.0 - hat_diag[i];
        if gap.is_nan() || gap < MIN_LEVERAGE_GAP {
            return Err(Error::Leverage {
                index: i,
                gap,
                limit: MIN_LEVERAGE_GAP,
            });
        }
        loo_residuals[i] = residuals[i] / gap;
    }

    // Row i of Q R^{-T} is (R^{-1} q_i)^T = ((D^T D)^{-1} d_i)^T.
    let mut loo_corrections = &q * r_inv.transpose();
    for (i, mut row) in loo_corrections.row_iter_mut().enumerate() {
        row *= loo_residuals[i];
    }

    let normal_inverse = &r_inv * r_inv.transpose();

    Ok(PceModel {
        spec: spec.clone(),
        index_set: set.clone(),
        coefficients,
        hat_diag,
        loo_residuals,
        loo_corrections,
        output_sample_variance: sample_variance(data.outputs()),
        fit_info: Some(FitInfo {
            normal_inverse,
            condition_number,
            training: data.clone(),
        }),
    })
}

impl PceModel {
    pub fn input_spec(&self) -> &InputSpec {
        &self.spec
    }

    pub fn index_set(&self) -> &MultiIndexSet {
        &self.index_set
    }

    pub fn coefficients(&self) -> &DVector<f64> {
        &self.coefficients
    }

    pub fn hat_diag(&self) -> &DVector<f64> {
        &self.hat_diag
    }

    /// Closed-form leave-one-out residuals `y_m - mu_{~m}(x_m)`.
    pub fn loo_residuals(&self) -> &DVector<f64> {
        &self.loo_residuals
    }

    /// Matrix whose row `m` is `(D^T D)^{-1} d_m r_m`.
    pub fn loo_corrections(&self) -> &DMatrix<f64> {
        &self.loo_corrections
    }

    /// `None` for models loaded from disk.
    pub fn fit_info(&self) -> Option<&FitInfo> {
        self.fit_info.as_ref()
    }

    pub fn training(&self) -> Option<&Dataset> {
        self.fit_info.as_ref().map(|f| &f.training)
    }

    pub fn condition_number(&self) -> Option<f64> {
        self.fit_info.as_ref().map(|f| f.condition_number)
    }

    pub fn n_samples(&self) -> usize {
        self.loo_residuals.len()
    }

    pub fn n_terms(&self) -> usize {
        self.coefficients.len()
    }

    /// Basis evaluations `d_*` at a physical input point.
    pub fn basis_row(&self, x: &[f64]) -> Result<DVector<f64>> {
        let xi = self.spec.to_reference(x)?;
        Ok(DVector::from_vec(eval_basis_row(&xi, &self.index_set)?))
    }

    /// Point prediction `mu(x) = d_*^T c`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.basis_row(x)?.dot(&self.coefficients))
    }

    /// All leave-one-out predictions `mu_{~m}(x)` at a single point, in O(MK).
    pub fn loo_predict(&self, x: &[f64]) -> Result<DVector<f64>> {
        let row = self.basis_row(x)?;
        Ok(self.loo_predict_from_row(&row))
    }

    pub(crate) fn loo_predict_from_row(&self, row: &DVector<f64>) -> DVector<f64> {
        let center = row.dot(&self.coefficients);
        let mut out = &self.loo_corrections * row;
        out.apply(|v| *v = center - *v);
        out
    }

    /// Coefficient-based output variance: sum of squared non-constant coefficients.
    pub fn pce_variance(&self) -> f64 {
        let zero = self.index_set.zero_position();
        self.coefficients
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != zero)
            .map(|(_, c)| c * c)
            .sum()
    }

    /// Output variance under the chosen estimator.
    pub fn output_variance(&self, estimator: VarianceEstimator) -> Result<f64> {
        match estimator {
            VarianceEstimator::Coefficients => Ok(self.pce_variance()),
            VarianceEstimator::Empirical => Ok(self.output_sample_variance),
        }
    }

    /// Mean squared leave-one-out residual over the output variance.
    pub fn relative_loo_error(&self, estimator: VarianceEstimator) -> Result<f64> {
        let variance = self.output_variance(estimator)?;
        if variance.is_nan() || variance <= MIN_VARIANCE {
            return Err(Error::ZeroVariance { variance });
        }
        let mse = self.loo_residuals.norm_squared() / self.n_samples() as f64;
        Ok(mse / variance)
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            input_spec: self.spec.clone(),
            multi_index_set: IndexSetDocument {
                input_dim: self.index_set.input_dim(),
                max_degree: self.index_set.max_degree(),
                indices: self.index_set.indices().to_vec(),
            },
            coefficients: self.coefficients.iter().copied().collect(),
            hat_diag: self.hat_diag.iter().copied().collect(),
            loo_residuals: self.loo_residuals.iter().copied().collect(),
            loo_corrections: self
                .loo_corrections
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            output_sample_variance: self.output_sample_variance,
        }
    }

    pub fn from_document(doc: ModelDocument) -> Result<PceModel> {
        let set = MultiIndexSet::from_indices(
            doc.multi_index_set.input_dim,
            doc.multi_index_set.max_degree,
            doc.multi_index_set.indices,
        )?;
        check_compatible(&set, &doc.input_spec)?;
        let k = set.len();
        let m = doc.loo_residuals.len();
        if doc.coefficients.len() != k {
            return Err(Error::Dimension {
                expected: k,
                got: doc.coefficients.len(),
            });
        }
        if doc.hat_diag.len() != m || doc.loo_corrections.len() != m || m == 0 {
            return Err(Error::Invalid(
                "hat_diag, loo_residuals and loo_corrections must share a non-zero length".into(),
            ));
        }
        if let Some(row) = doc.loo_corrections.iter().find(|row| row.len() != k) {
            return Err(Error::Dimension {
                expected: k,
                got: row.len(),
            });
        }
        let all_finite = doc
            .coefficients
            .iter()
            .chain(&doc.hat_diag)
            .chain(&doc.loo_residuals)
            .chain(doc.loo_corrections.iter().flatten())
            .chain([&doc.output_sample_variance])
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Invalid(
                "model document contains non-finite values".into(),
            ));
        }
        Ok(PceModel {
            spec: doc.input_spec,
            index_set: set,
            coefficients: DVector::from_vec(doc.coefficients),
            hat_diag: DVector::from_vec(doc.hat_diag),
            loo_residuals: DVector::from_vec(doc.loo_residuals),
            loo_corrections: DMatrix::from_fn(m, k, |i, j| doc.loo_corrections[i][j]),
            output_sample_variance: doc.output_sample_variance,
            fit_info: None,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<PceModel> {
        PceModel::from_document(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<PceModel> {
        PceModel::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Serialized form of a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub input_spec: InputSpec,
    pub multi_index_set: IndexSetDocument,
    pub coefficients: Vec<f64>,
    pub hat_diag: Vec<f64>,
    pub loo_residuals: Vec<f64>,
    pub loo_corrections: Vec<Vec<f64>>,
    pub output_sample_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexSetDocument {
    pub input_dim: usize,
    pub max_degree: usize,
    pub indices: Vec<MultiIndex>,
}

pub(crate) fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
}

/// Leave-one-out by explicit refitting.
///
/// Each of the `M` reduced problems is solved from scratch with an SVD,
/// sharing nothing with [`fit`] beyond the basis evaluation. Returns the
/// residuals `y_m - mu_{~m}(x_m)` and, when `query` is given, the reduced
/// models' predictions there.
pub fn brute_force_loo(
    data: &Dataset,
    set: &MultiIndexSet,
    spec: &InputSpec,
    query: Option<&[f64]>,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    check_compatible(set, spec)?;
    let m = data.len();
    let k = set.len();
    if m < k + 1 {
        return Err(Error::Underdetermined {
            samples: m.saturating_sub(1),
            basis: k,
        });
    }
    let d = design_matrix(data.inputs(), set, spec)?;
    let query_row = query
        .map(|x| -> Result<DVector<f64>> {
            Ok(DVector::from_vec(eval_basis_row(
                &spec.to_reference(x)?,
                set,
            )?))
        })
        .transpose()?;

    let mut residuals = Vec::with_capacity(m);
    let mut predictions = query_row.as_ref().map(|_| Vec::with_capacity(m));
    for left_out in 0..m {
        let keep: Vec<usize> = (0..m).filter(|&i| i != left_out).collect();
        let reduced = d.select_rows(&keep);
        let y = DVector::from_iterator(keep.len(), keep.iter().map(|&i| data.outputs()[i]));

        let svd = reduced.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smin > 0.0 && smax / smin <= MAX_CONDITION) {
            return Err(Error::RankDeficient {
                condition: if smin > 0.0 {
                    smax / smin
                } else {
                    f64::INFINITY
                },
                limit: MAX_CONDITION,
            });
        }
        let coef = svd
            .solve(&y, 0.0)
            .map_err(|e| Error::Invalid(e.to_string()))?;

        let fitted = d.row(left_out).transpose().dot(&coef);
        residuals.push(data.outputs()[left_out] - fitted);
        if let (Some(row), Some(out)) = (&query_row, predictions.as_mut()) {
            out.push(row.dot(&coef));
        }
    }
    Ok((residuals, predictions))
}
