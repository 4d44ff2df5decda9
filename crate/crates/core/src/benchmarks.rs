//! Ground-truth test functions and seeded uniform sampling.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::{total_degree_cardinality, InputSpec};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Version tag mixed into every sampling seed. Bump it only together with a
/// deliberate change of the sampling scheme.
const SAMPLER_TAG: &str = "conformal-pce/sampler/v1";

/// Anything that can play the role of the true model in an experiment.
pub trait TestFunction: Sync {
    fn name(&self) -> &str;

    fn input_spec(&self) -> InputSpec;

    /// Evaluates at a point of the input box.
    fn evaluate(&self, x: &[f64]) -> Result<f64>;

    /// Training-set size for degree `degree` and oversampling `oversampling`.
    /// Defaults to the linear rule `C * K`.
    fn design_size(&self, degree: usize, oversampling: usize) -> Result<usize> {
        let dim = self.input_spec().dim();
        let k = total_degree_cardinality(dim, degree).ok_or(Error::Overflow {
            input_dim: dim,
            max_degree: degree,
        })?;
        k.checked_mul(oversampling).ok_or(Error::Overflow {
            input_dim: dim,
            max_degree: degree,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    Meromorphic,
    OtlCircuit,
    Piston,
    WingWeight,
}

/// One row of a benchmark's input table.
#[derive(Debug, Clone, Copy)]
pub struct Parameter {
    pub symbol: &'static str,
    pub description: &'static str,
    pub unit: &'static str,
    pub lower: f64,
    pub upper: f64,
}

const fn param(
    symbol: &'static str,
    description: &'static str,
    unit: &'static str,
    lower: f64,
    upper: f64,
) -> Parameter {
    Parameter {
        symbol,
        description,
        unit,
        lower,
        upper,
    }
}

const MEROMORPHIC: [Parameter; 1] = [param("x", "input", "-", -1.0, 1.0)];

const OTL: [Parameter; 6] = [
    param("Rb1", "resistance b1", "kOhm", 50.0, 150.0),
    param("Rb2", "resistance b2", "kOhm", 25.0, 70.0),
    param("Rf", "resistance f", "kOhm", 0.5, 30.0),
    param("Rc1", "resistance c1", "kOhm", 1.2, 2.5),
    param("Rc2", "resistance c2", "kOhm", 0.25, 1.2),
    param("beta", "current gain", "A", 50.0, 300.0),
];

const PISTON: [Parameter; 7] = [
    param("M", "piston weight", "kg", 30.0, 60.0),
    param("S", "piston surface area", "m^2", 0.005, 0.02),
    param("V0", "initial gas volume", "m^3", 0.002, 0.01),
    param("k", "spring coefficient", "N/m", 1000.0, 5000.0),
    param("P0", "atmospheric pressure", "N/m^2", 90000.0, 110000.0),
    param("Ta", "ambient temperature", "K", 290.0, 296.0),
    param("T0", "filling gas temperature", "K", 340.0, 360.0),
];

const WING: [Parameter; 10] = [
    param("Sw", "wing area", "ft^2", 150.0, 200.0),
    param("Wfw", "wing fuel weight", "lb", 220.0, 300.0),
    param("A", "aspect ratio", "-", 6.0, 10.0),
    param("Lambda", "quarter-chord sweep", "deg", -10.0, 10.0),
    param("q", "dynamic pressure at cruise", "lb/ft^2", 16.0, 45.0),
    param("lambda", "taper ratio", "-", 0.5, 1.0),
    param("tc", "airfoil thickness to chord ratio", "-", 0.08, 0.18),
    param("Nz", "ultimate load factor", "-", 2.5, 6.0),
    param("Wdg", "flight design gross weight", "lb", 1700.0, 2500.0),
    param("Wp", "paint weight", "lb/ft^2", 0.025, 0.08),
];

impl Benchmark {
    pub const ALL: [Benchmark; 4] = [
        Benchmark::Meromorphic,
        Benchmark::OtlCircuit,
        Benchmark::Piston,
        Benchmark::WingWeight,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Benchmark::Meromorphic => "meromorphic",
            Benchmark::OtlCircuit => "otl_circuit",
            Benchmark::Piston => "piston",
            Benchmark::WingWeight => "wing_weight",
        }
    }

    pub fn parameters(self) -> &'static [Parameter] {
        match self {
            Benchmark::Meromorphic => &MEROMORPHIC,
            Benchmark::OtlCircuit => &OTL,
            Benchmark::Piston => &PISTON,
            Benchmark::WingWeight => &WING,
        }
    }

    pub fn dim(self) -> usize {
        self.parameters().len()
    }

    /// Polynomial degrees studied for this benchmark.
    pub fn degree_grid(self) -> &'static [usize] {
        match self {
            Benchmark::Meromorphic => &[2, 3],
            Benchmark::OtlCircuit => &[1, 2, 3],
            Benchmark::Piston => &[2, 3, 4],
            Benchmark::WingWeight => &[1, 2],
        }
    }

    pub const OVERSAMPLING_GRID: [usize; 4] = [2, 3, 5, 10];
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.id() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown benchmark {s:?}")))
    }
}

fn meromorphic(x: &[f64]) -> f64 {
    const A: f64 = 1.0;
    const B: f64 = 0.5;
    1.0 / (A + B * x[0])
}

fn otl_circuit(x: &[f64]) -> f64 {
    let &[rb1, rb2, rf, rc1, rc2, beta] = x else {
        unreachable!("arity checked by caller")
    };
    let vb1 = 12.0 * rb2 / (rb1 + rb2);
    let gain = beta * (rc2 + 9.0);
    let denom = gain + rf;
    (vb1 + 0.74) * gain / denom + 11.35 * rf / denom + 0.74 * rf * gain / (denom * rc1)
}

fn piston(x: &[f64]) -> f64 {
    let &[mass, area, v0, k, p0, ta, t0] = x else {
        unreachable!("arity checked by caller")
    };
    let a = p0 * area + 19.62 * mass - k * v0 / area;
    let disc = a * a + 4.0 * k * (p0 * v0 / t0) * ta;
    assert!(
        disc >= 0.0,
        "negative discriminant inside the piston input box"
    );
    let v = area / (2.0 * k) * (disc.sqrt() - a);
    2.0 * PI * (mass / (k + area * area * (p0 * v0 / t0) * (ta / (v * v)))).sqrt()
}

fn wing_weight(x: &[f64]) -> f64 {
    let &[sw, wfw, aspect, sweep_deg, q, taper, tc, nz, wdg, wp] = x else {
        unreachable!("arity checked by caller")
    };
    let cos_sweep = sweep_deg.to_radians().cos();
    0.036
        * sw.powf(0.758)
        * wfw.powf(0.0035)
        * (aspect / (cos_sweep * cos_sweep)).powf(0.6)
        * q.powf(0.006)
        * taper.powf(0.04)
        * (100.0 * tc / cos_sweep).powf(-0.3)
        * (nz * wdg).powf(0.49)
        + sw * wp
}

impl TestFunction for Benchmark {
    fn name(&self) -> &str {
        self.id()
    }

    fn input_spec(&self) -> InputSpec {
        InputSpec::new(
            self.parameters()
                .iter()
                .map(|p| (p.lower, p.upper))
                .collect(),
        )
        .expect("benchmark tables have valid ranges")
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        // Validates arity and box membership.
        self.input_spec().to_reference(x)?;
        Ok(match self {
            Benchmark::Meromorphic => meromorphic(x),
            Benchmark::OtlCircuit => otl_circuit(x),
            Benchmark::Piston => piston(x),
            Benchmark::WingWeight => wing_weight(x),
        })
    }

    /// Quadratic rule `C (P + 1)^2` in one dimension, `C K` otherwise.
    fn design_size(&self, degree: usize, oversampling: usize) -> Result<usize> {
        let overflow = Error::Overflow {
            input_dim: self.dim(),
            max_degree: degree,
        };
        let base = match self {
            Benchmark::Meromorphic => (degree + 1).checked_mul(degree + 1),
            _ => total_degree_cardinality(self.dim(), degree),
        };
        base.and_then(|b| b.checked_mul(oversampling))
            .ok_or(overflow)
    }
}

/// Evaluates a benchmark by id.
pub fn evaluate(id: Benchmark, x: &[f64]) -> Result<f64> {
    id.evaluate(x)
}

/// What a sample is for; each purpose draws from its own stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Train,
    Test,
}

impl Stream {
    fn tag(self) -> &'static str {
        match self {
            Stream::Train => "train",
            Stream::Test => "test",
        }
    }
}

/// ChaCha20 generator keyed by SHA-256 of `(tag, function, seed, stream)`.
pub fn stream_rng(function: &str, seed: u64, stream: Stream) -> ChaCha20Rng {
    let mut hasher = Sha256::new();
    hasher.update(SAMPLER_TAG.as_bytes());
    hasher.update([0u8]);
    hasher.update(function.as_bytes());
    hasher.update([0u8]);
    hasher.update(seed.to_le_bytes());
    hasher.update(stream.tag().as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha20Rng::from_seed(key)
}

/// Uniform draw in `[0, 1)` from the top 53 bits of one `u64`.
pub fn unit_uniform<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `count` i.i.d. uniform points of `spec`.
pub fn sample_points<R: RngCore>(spec: &InputSpec, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            spec.ranges()
                .iter()
                .map(|&(lo, hi)| (lo + unit_uniform(rng) * (hi - lo)).min(hi))
                .collect()
        })
        .collect()
}

/// Samples `count` points from `stream` and evaluates the function at them.
pub fn sample_dataset<F: TestFunction + ?Sized>(
    function: &F,
    count: usize,
    seed: u64,
    stream: Stream,
) -> Result<Dataset> {
    if count == 0 {
        return Err(Error::Invalid("sample size must be at least 1".into()));
    }
    let spec = function.input_spec();
    let mut rng = stream_rng(function.name(), seed, stream);
    let inputs = sample_points(&spec, count, &mut rng);
    let outputs = inputs
        .iter()
        .map(|x| function.evaluate(x))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(inputs, outputs)
}

/// Training design of size `count`, deterministic per `(id, count, seed)`.
pub fn sample_design(id: Benchmark, count: usize, seed: u64) -> Result<Dataset> {
    sample_dataset(&id, count, seed, Stream::Train)
}

/// Test set drawn independently of [`sample_design`] for the same seed.
pub fn sample_test(id: Benchmark, count: usize, seed: u64) -> Result<Dataset> {
    sample_dataset(&id, count, seed, Stream::Test)
}

/// Training-set size rule for the benchmark.
pub fn design_size(id: Benchmark, degree: usize, oversampling: usize) -> Result<usize> {
    id.design_size(degree, oversampling)
}
