//! Polynomial chaos expansion surrogates with jackknife and jackknife+
//! conformal prediction intervals.
//!
//! The surrogate is a least-squares fit in an orthonormal Legendre basis over
//! a box of independent uniform inputs. Because the fit is linear in the
//! outputs, every leave-one-out residual and every leave-one-out prediction is
//! available in closed form from a single factorization of the design matrix,
//! so calibrated intervals cost no retraining and no hold-out data.
//!
//! ```
//! use conformal_pce::{basis, benchmarks, conformal, pce};
//! use conformal_pce::benchmarks::{Benchmark, TestFunction};
//!
//! let bench = Benchmark::Meromorphic;
//! let data = benchmarks::sample_design(bench, 160, 1).unwrap();
//! let set = basis::build_total_degree_set(1, 3).unwrap();
//! let model = pce::fit(&data, &set, &bench.input_spec()).unwrap();
//!
//! let cfg = conformal::ConformalConfig::new(
//!     conformal::Method::JackknifePlus,
//!     conformal::Score::Absolute,
//!     0.05,
//! ).unwrap();
//! let iv = conformal::jackknife_plus_interval(&model, &[0.25], &cfg).unwrap();
//! assert!(iv.lower <= iv.center && iv.center <= iv.upper);
//! ```

pub mod basis;
pub mod benchmarks;
pub mod conformal;
pub mod dataset;
pub mod error;
pub mod float;
pub mod harness;
pub mod pce;

pub use basis::{build_total_degree_set, InputSpec, MultiIndex, MultiIndexSet};
pub use benchmarks::{Benchmark, TestFunction};
pub use conformal::{ConformalConfig, Method, PredictionInterval, Score};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use float::fmt_f64;
pub use harness::{CoverageReport, ExperimentConfig, RunRecord};
pub use pce::{fit, PceModel, VarianceEstimator};
