//! Jackknife and jackknife+ prediction intervals from leave-one-out residuals.
//!
//! Quantiles are finite-sample order statistics: the upper quantile at
//! significance `s` is the `ceil((1 - s)(M + 1))`-th smallest value, the lower
//! quantile the `floor(s (M + 1))`-th. When the sample is too small for the
//! requested level the bound is infinite rather than clamped.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pce::{PceModel, VarianceEstimator, MIN_VARIANCE};

// Absorbs representation error in (1 - s)(M + 1) so that e.g. s = 0.05,
// M = 19 lands on index 19 and not 20.
const INDEX_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Jackknife,
    JackknifePlus,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Jackknife => "jackknife",
            Method::JackknifePlus => "jackknife_plus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Score {
    /// `|r_m|`
    Absolute,
    /// `|r_m| / sqrt(Var(Y))`, quantile rescaled by `sqrt(Var(Y))` afterwards.
    Normalized,
}

impl Score {
    pub fn as_str(self) -> &'static str {
        match self {
            Score::Absolute => "absolute",
            Score::Normalized => "normalized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConformalConfig {
    pub method: Method,
    pub score: Score,
    pub significance: f64,
    #[serde(default)]
    pub variance: VarianceEstimator,
}

impl ConformalConfig {
    pub fn new(method: Method, score: Score, significance: f64) -> Result<Self> {
        let cfg = ConformalConfig {
            method,
            score,
            significance,
            variance: VarianceEstimator::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_variance(mut self, variance: VarianceEstimator) -> Self {
        self.variance = variance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(Error::Invalid(format!(
                "significance must lie in (0, 1), got {}",
                self.significance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionInterval {
    pub lower: f64,
    pub upper: f64,
    /// Point prediction of the full model.
    pub center: f64,
}

impl PredictionInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    /// Closed-interval membership.
    pub fn contains(&self, y: f64) -> bool {
        self.lower <= y && y <= self.upper
    }
}

/// 1-based rank of the upper order statistic, possibly `M + 1` (unbounded).
pub fn upper_rank(m: usize, significance: f64) -> usize {
    let target = (1.0 - significance) * (m as f64 + 1.0);
    let rank = (target - INDEX_SLACK).ceil().max(1.0) as usize;
    rank.min(m + 1)
}

/// 1-based rank of the lower order statistic, possibly 0 (unbounded).
pub fn lower_rank(m: usize, significance: f64) -> usize {
    m + 1 - upper_rank(m, significance)
}

fn order_statistic(values: &[f64], rank: usize) -> f64 {
    let mut buf = values.to_vec();
    let (_, v, _) = buf.select_nth_unstable_by(rank - 1, f64::total_cmp);
    *v
}

fn check_values(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Invalid("quantile of an empty sample".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid(
            "quantile sample contains non-finite values".into(),
        ));
    }
    Ok(())
}

/// `ceil((1 - s)(M + 1))`-th smallest value, or `+inf` if that exceeds `M`.
pub fn finite_quantile_upper(values: &[f64], significance: f64) -> Result<f64> {
    check_values(values)?;
    let rank = upper_rank(values.len(), significance);
    if rank > values.len() {
        return Ok(f64::INFINITY);
    }
    Ok(order_statistic(values, rank))
}

/// `floor(s (M + 1))`-th smallest value, or `-inf` if that is zero.
pub fn finite_quantile_lower(values: &[f64], significance: f64) -> Result<f64> {
    check_values(values)?;
    let rank = lower_rank(values.len(), significance);
    if rank == 0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(order_statistic(values, rank))
}

/// Non-conformity scores of the training samples.
pub fn scores(model: &PceModel, cfg: &ConformalConfig) -> Result<Vec<f64>> {
    let abs = model.loo_residuals().iter().map(|r| r.abs());
    match cfg.score {
        Score::Absolute => Ok(abs.collect()),
        Score::Normalized => {
            let sigma = score_scale(model, cfg.variance)?;
            Ok(abs.map(|a| a / sigma).collect())
        }
    }
}

fn score_scale(model: &PceModel, estimator: VarianceEstimator) -> Result<f64> {
    let variance = model.output_variance(estimator)?;
    if variance.is_nan() || variance <= MIN_VARIANCE {
        return Err(Error::ZeroVariance { variance });
    }
    Ok(variance.sqrt())
}

/// A model bound to a conformal configuration, with the score-dependent parts
/// precomputed so that many test points can be processed cheaply.
#[derive(Debug, Clone)]
pub struct Conformalizer<'a> {
    model: &'a PceModel,
    cfg: ConformalConfig,
    /// Scores on the original output scale.
    radii: Vec<f64>,
    /// Jackknife half-width.
    half_width: f64,
}

impl<'a> Conformalizer<'a> {
    pub fn new(model: &'a PceModel, cfg: ConformalConfig) -> Result<Self> {
        cfg.validate()?;
        let raw = scores(model, &cfg)?;
        let (radii, half_width) = match cfg.score {
            Score::Absolute => {
                let q = finite_quantile_upper(&raw, cfg.significance)?;
                (raw, q)
            }
            Score::Normalized => {
                let sigma = score_scale(model, cfg.variance)?;
                let q = finite_quantile_upper(&raw, cfg.significance)? * sigma;
                (raw.iter().map(|a| a * sigma).collect(), q)
            }
        };
        Ok(Conformalizer {
            model,
            cfg,
            radii,
            half_width,
        })
    }

    pub fn config(&self) -> &ConformalConfig {
        &self.cfg
    }

    /// Jackknife half-width, or `+inf` when the sample is too small.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn interval(&self, x: &[f64]) -> Result<PredictionInterval> {
        let row = self.model.basis_row(x)?;
        Ok(self.interval_from_row(&row))
    }

    pub(crate) fn interval_from_row(&self, row: &DVector<f64>) -> PredictionInterval {
        let center = row.dot(self.model.coefficients());
        match self.cfg.method {
            Method::Jackknife => PredictionInterval {
                lower: center - self.half_width,
                upper: center + self.half_width,
                center,
            },
            Method::JackknifePlus => {
                let loo = self.model.loo_predict_from_row(row);
                let s = self.cfg.significance;
                let m = self.radii.len();
                let upper_rank = upper_rank(m, s);
                let lower_rank = lower_rank(m, s);
                let upper = if upper_rank > m {
                    f64::INFINITY
                } else {
                    let ups: Vec<f64> = loo.iter().zip(&self.radii).map(|(p, a)| p + a).collect();
                    order_statistic(&ups, upper_rank)
                };
                let lower = if lower_rank == 0 {
                    f64::NEG_INFINITY
                } else {
                    let lows: Vec<f64> = loo.iter().zip(&self.radii).map(|(p, a)| p - a).collect();
                    order_statistic(&lows, lower_rank)
                };
                PredictionInterval {
                    lower,
                    upper,
                    center,
                }
            }
        }
    }
}

/// Symmetric interval `mu(x*) +/- q_{1-s}` of the leave-one-out scores.
pub fn jackknife_interval(
    model: &PceModel,
    x: &[f64],
    cfg: &ConformalConfig,
) -> Result<PredictionInterval> {
    let cfg = ConformalConfig {
        method: Method::Jackknife,
        ..*cfg
    };
    Conformalizer::new(model, cfg)?.interval(x)
}

/// Interval from order statistics of `mu_{~m}(x*) -/+ a_m`.
pub fn jackknife_plus_interval(
    model: &PceModel,
    x: &[f64],
    cfg: &ConformalConfig,
) -> Result<PredictionInterval> {
    let cfg = ConformalConfig {
        method: Method::JackknifePlus,
        ..*cfg
    };
    Conformalizer::new(model, cfg)?.interval(x)
}

/// Fraction of truths inside their (closed) intervals.
pub fn empirical_coverage(intervals: &[PredictionInterval], truths: &[f64]) -> Result<f64> {
    if intervals.len() != truths.len() {
        return Err(Error::Invalid(format!(
            "{} intervals but {} truths",
            intervals.len(),
            truths.len()
        )));
    }
    if intervals.is_empty() {
        return Err(Error::Invalid("coverage of an empty test set".into()));
    }
    let hits = intervals
        .iter()
        .zip(truths)
        .filter(|(iv, &y)| iv.contains(y))
        .count();
    Ok(hits as f64 / intervals.len() as f64)
}
