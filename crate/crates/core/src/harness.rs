//! Coverage experiments over grids of degree, oversampling, method and score.
//!
//! A cell is one `(function, P, C, seed)` tuple: one training design, one fit,
//! one independent test set. Every requested `(method, score)` pair is
//! evaluated on that same fit and yields one [`RunRecord`]. Fit failures are
//! captured per record rather than aborting the grid.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::{build_total_degree_set, eval_basis_row};
use crate::benchmarks::{sample_dataset, Benchmark, Stream, TestFunction};
use crate::conformal::{empirical_coverage, ConformalConfig, Conformalizer, Method, Score};
use crate::dataset::parse_row;
use crate::error::{Error, Result};
use crate::float::{fmt_f64, json_option};
use crate::pce::{fit, VarianceEstimator};

const CELL_TAG: &str = "conformal-pce/cell/v1";

pub const RECORD_COLUMNS: [&str; 12] = [
    "benchmark",
    "P",
    "C",
    "method",
    "score",
    "seed",
    "coverage",
    "mean_width",
    "median_width",
    "rel_loo_error",
    "n_unbounded",
    "failure",
];

pub const SUMMARY_COLUMNS: [&str; 20] = [
    "benchmark",
    "P",
    "C",
    "method",
    "score",
    "n_runs",
    "n_failed",
    "n_unbounded",
    "coverage_mean",
    "coverage_median",
    "coverage_q1",
    "coverage_q3",
    "coverage_min",
    "coverage_max",
    "width_mean",
    "width_median",
    "width_q1",
    "width_q3",
    "width_min",
    "width_max",
];

fn default_significance() -> f64 {
    0.05
}
fn default_seeds() -> usize {
    100
}
fn default_test_size() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub benchmark: Benchmark,
    pub degrees: Vec<usize>,
    pub oversampling: Vec<usize>,
    pub methods: Vec<Method>,
    pub scores: Vec<Score>,
    #[serde(default = "default_significance")]
    pub significance: f64,
    #[serde(default = "default_seeds")]
    pub n_seeds: usize,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    /// Directory receiving the report files.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Full grid for one benchmark: its degrees, all oversampling factors,
    /// both methods, absolute scores.
    pub fn full_grid(benchmark: Benchmark) -> Self {
        ExperimentConfig {
            benchmark,
            degrees: benchmark.degree_grid().to_vec(),
            oversampling: Benchmark::OVERSAMPLING_GRID.to_vec(),
            methods: vec![Method::Jackknife, Method::JackknifePlus],
            scores: vec![Score::Absolute],
            significance: default_significance(),
            n_seeds: default_seeds(),
            test_size: default_test_size(),
            output: None,
        }
    }

    /// Desk-scale profile: 20 seeds, 2000 test points.
    pub fn quick(mut self) -> Self {
        self.n_seeds = 20;
        self.test_size = 2000;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("degrees", self.degrees.is_empty()),
            ("oversampling", self.oversampling.is_empty()),
            ("methods", self.methods.is_empty()),
            ("scores", self.scores.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::Invalid(format!("{name} must not be empty")));
        }
        if self.oversampling.contains(&0) {
            return Err(Error::Invalid(
                "oversampling factors must be positive".into(),
            ));
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return Err(Error::Invalid(format!(
                "significance must lie in (0, 1), got {}",
                self.significance
            )));
        }
        if self.n_seeds == 0 {
            return Err(Error::Invalid("n_seeds must be at least 1".into()));
        }
        if self.test_size == 0 {
            return Err(Error::Invalid("test_size must be at least 1".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Number of records a run of this config produces, failures included.
    pub fn expected_records(&self) -> usize {
        self.degrees.len()
            * self.oversampling.len()
            * self.methods.len()
            * self.scores.len()
            * self.n_seeds
    }
}

/// Metrics of a successful record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMetrics {
    pub coverage: f64,
    /// Mean interval width; infinite when any interval is unbounded.
    pub mean_width: f64,
    pub median_width: f64,
    /// `None` when the coefficient variance vanishes.
    pub rel_loo_error: Option<f64>,
    pub n_unbounded: usize,
    /// `None` for records read back from disk.
    pub condition_number: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub benchmark: String,
    pub degree: usize,
    pub oversampling: usize,
    pub method: Method,
    pub score: Score,
    pub seed: usize,
    pub metrics: Option<CellMetrics>,
    pub failure: Option<String>,
}

type SummaryKey = (String, usize, usize, Method, Score);

impl RunRecord {
    fn key(&self) -> SummaryKey {
        (
            self.benchmark.clone(),
            self.degree,
            self.oversampling,
            self.method,
            self.score,
        )
    }

    fn failed(
        name: &str,
        degree: usize,
        oversampling: usize,
        (method, score): (Method, Score),
        seed: usize,
        err: &Error,
    ) -> Self {
        RunRecord {
            benchmark: name.to_string(),
            degree,
            oversampling,
            method,
            score,
            seed,
            metrics: None,
            failure: Some(err.to_string()),
        }
    }
}

/// Seed of one cell, derived by hashing its coordinates so that changing one
/// grid axis never shifts the draws of another cell.
pub fn cell_seed(function: &str, degree: usize, oversampling: usize, seed_index: usize) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(CELL_TAG.as_bytes());
    for part in [
        function.as_bytes(),
        &(degree as u64).to_le_bytes(),
        &(oversampling as u64).to_le_bytes(),
        &(seed_index as u64).to_le_bytes(),
    ] {
        hasher.update([0u8]);
        hasher.update(part);
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Runs one cell and returns a record for every `(method, score)` pair.
pub fn run_cell_group<F: TestFunction + ?Sized>(
    function: &F,
    degree: usize,
    oversampling: usize,
    seed_index: usize,
    combos: &[(Method, Score)],
    significance: f64,
    test_size: usize,
) -> Vec<RunRecord> {
    let name = function.name();
    let fail_all = |err: Error| {
        combos
            .iter()
            .map(|&c| RunRecord::failed(name, degree, oversampling, c, seed_index, &err))
            .collect::<Vec<_>>()
    };

    let seed = cell_seed(name, degree, oversampling, seed_index);
    let spec = function.input_spec();
    let prepared = (|| -> Result<_> {
        let m = function.design_size(degree, oversampling)?;
        let set = build_total_degree_set(spec.dim(), degree)?;
        let train = sample_dataset(function, m, seed, Stream::Train)?;
        let model = fit(&train, &set, &spec)?;
        let test = sample_dataset(function, test_size, seed, Stream::Test)?;
        let rows = test
            .inputs()
            .iter()
            .map(|x| {
                Ok(DVector::from_vec(eval_basis_row(
                    &spec.to_reference(x)?,
                    &set,
                )?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((model, test, rows))
    })();
    let (model, test, rows) = match prepared {
        Ok(p) => p,
        Err(err) => return fail_all(err),
    };

    let rel_loo_error = model
        .relative_loo_error(VarianceEstimator::Coefficients)
        .ok();

    combos
        .iter()
        .map(|&(method, score)| {
            let outcome = (|| -> Result<CellMetrics> {
                let cfg = ConformalConfig::new(method, score, significance)?;
                let conf = Conformalizer::new(&model, cfg)?;
                let intervals: Vec<_> = rows.iter().map(|r| conf.interval_from_row(r)).collect();
                let coverage = empirical_coverage(&intervals, test.outputs())?;
                let mut widths: Vec<f64> = intervals.iter().map(|iv| iv.width()).collect();
                let n_unbounded = intervals.iter().filter(|iv| !iv.is_bounded()).count();
                let mean_width = widths.iter().sum::<f64>() / widths.len() as f64;
                widths.sort_by(f64::total_cmp);
                Ok(CellMetrics {
                    coverage,
                    mean_width,
                    median_width: quantile_sorted(&widths, 0.5),
                    rel_loo_error,
                    n_unbounded,
                    condition_number: model.condition_number(),
                })
            })();
            match outcome {
                Ok(metrics) => RunRecord {
                    benchmark: name.to_string(),
                    degree,
                    oversampling,
                    method,
                    score,
                    seed: seed_index,
                    metrics: Some(metrics),
                    failure: None,
                },
                Err(err) => RunRecord::failed(
                    name,
                    degree,
                    oversampling,
                    (method, score),
                    seed_index,
                    &err,
                ),
            }
        })
        .collect()
}

/// Runs a single `(function, P, C, method, score, seed)` coordinate.
#[allow(clippy::too_many_arguments)]
pub fn run_cell<F: TestFunction + ?Sized>(
    function: &F,
    degree: usize,
    oversampling: usize,
    method: Method,
    score: Score,
    seed_index: usize,
    significance: f64,
    test_size: usize,
) -> RunRecord {
    run_cell_group(
        function,
        degree,
        oversampling,
        seed_index,
        &[(method, score)],
        significance,
        test_size,
    )
    .pop()
    .expect("one combo yields one record")
}

/// Linear-interpolation quantile of an ascending slice; infinities propagate.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let (a, b) = (sorted[lo], sorted[hi]);
    if lo == hi || a == b {
        a
    } else {
        a + (pos - lo as f64) * (b - a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    /// `None` for an empty sample.
    pub fn from_values(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Stats {
            mean: v.iter().sum::<f64>() / v.len() as f64,
            median: quantile_sorted(&v, 0.5),
            q1: quantile_sorted(&v, 0.25),
            q3: quantile_sorted(&v, 0.75),
            min: v[0],
            max: v[v.len() - 1],
        })
    }

    fn fields(stats: Option<&Stats>) -> [Option<f64>; 6] {
        match stats {
            Some(s) => [s.mean, s.median, s.q1, s.q3, s.min, s.max].map(Some),
            None => [None; 6],
        }
    }
}

/// Aggregates over seeds for one `(benchmark, P, C, method, score)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub benchmark: String,
    pub degree: usize,
    pub oversampling: usize,
    pub method: Method,
    pub score: Score,
    pub n_runs: usize,
    pub n_failed: usize,
    /// Unbounded intervals summed over all successful seeds.
    pub n_unbounded: usize,
    pub coverage: Option<Stats>,
    /// Statistics of the per-seed median width.
    pub width: Option<Stats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    /// Sorted by coordinates, then seed.
    pub records: Vec<RunRecord>,
    pub summaries: Vec<CellSummary>,
}

impl CoverageReport {
    pub fn from_records(mut records: Vec<RunRecord>) -> Self {
        records.sort_by(|a, b| a.key().cmp(&b.key()).then(a.seed.cmp(&b.seed)));
        let mut groups: BTreeMap<SummaryKey, Vec<&RunRecord>> = BTreeMap::new();
        for r in &records {
            groups.entry(r.key()).or_default().push(r);
        }
        let summaries = groups
            .into_iter()
            .map(
                |((benchmark, degree, oversampling, method, score), group)| {
                    let ok: Vec<&CellMetrics> =
                        group.iter().filter_map(|r| r.metrics.as_ref()).collect();
                    let coverages: Vec<f64> = ok.iter().map(|m| m.coverage).collect();
                    let widths: Vec<f64> = ok.iter().map(|m| m.median_width).collect();
                    CellSummary {
                        benchmark,
                        degree,
                        oversampling,
                        method,
                        score,
                        n_runs: group.len(),
                        n_failed: group.len() - ok.len(),
                        n_unbounded: ok.iter().map(|m| m.n_unbounded).sum(),
                        coverage: Stats::from_values(&coverages),
                        width: Stats::from_values(&widths),
                    }
                },
            )
            .collect();
        CoverageReport { records, summaries }
    }

    pub fn failures(&self) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(|r| r.failure.is_some())
    }

    pub fn all_failed(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.failure.is_some())
    }

    pub fn summary(
        &self,
        degree: usize,
        oversampling: usize,
        method: Method,
        score: Score,
    ) -> Option<&CellSummary> {
        self.summaries.iter().find(|s| {
            s.degree == degree
                && s.oversampling == oversampling
                && s.method == method
                && s.score == score
        })
    }

    /// Human-readable summary table.
    pub fn format_table(&self) -> String {
        let mut out = format!(
            "{:<12} {:>2} {:>3} {:<15} {:<10} {:>5} {:>6} {:>9} {:>9} {:>12}\n",
            "benchmark",
            "P",
            "C",
            "method",
            "score",
            "runs",
            "failed",
            "cov_mean",
            "cov_med",
            "width_med"
        );
        for s in &self.summaries {
            let cov = s.coverage.as_ref();
            let show = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
            out += &format!(
                "{:<12} {:>2} {:>3} {:<15} {:<10} {:>5} {:>6} {:>9} {:>9} {:>12}\n",
                s.benchmark,
                s.degree,
                s.oversampling,
                s.method.as_str(),
                s.score.as_str(),
                s.n_runs,
                s.n_failed,
                show(cov.map(|c| c.mean)),
                show(cov.map(|c| c.median)),
                s.width
                    .map(|w| format!("{:.4e}", w.median))
                    .unwrap_or_else(|| "-".into()),
            );
        }
        out
    }
}

/// Runs every cell of `config` against `function`, in parallel.
pub fn run_grid_with<F: TestFunction + ?Sized>(
    function: &F,
    config: &ExperimentConfig,
) -> Result<CoverageReport> {
    config.validate()?;
    let combos: Vec<(Method, Score)> = config
        .methods
        .iter()
        .flat_map(|&m| config.scores.iter().map(move |&s| (m, s)))
        .collect();
    let mut cells = Vec::new();
    for &p in &config.degrees {
        for &c in &config.oversampling {
            for seed in 0..config.n_seeds {
                cells.push((p, c, seed));
            }
        }
    }
    let records: Vec<RunRecord> = cells
        .par_iter()
        .flat_map_iter(|&(p, c, seed)| {
            run_cell_group(
                function,
                p,
                c,
                seed,
                &combos,
                config.significance,
                config.test_size,
            )
        })
        .collect();
    Ok(CoverageReport::from_records(records))
}

pub fn run_grid(config: &ExperimentConfig) -> Result<CoverageReport> {
    run_grid_with(&config.benchmark, config)
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_records_csv<W: Write>(records: &[RunRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        let m = r.metrics.as_ref();
        w.write_record([
            r.benchmark.clone(),
            r.degree.to_string(),
            r.oversampling.to_string(),
            r.method.as_str().to_string(),
            r.score.as_str().to_string(),
            r.seed.to_string(),
            opt(m.map(|m| m.coverage)),
            opt(m.map(|m| m.mean_width)),
            opt(m.map(|m| m.median_width)),
            opt(m.and_then(|m| m.rel_loo_error)),
            m.map(|m| m.n_unbounded.to_string()).unwrap_or_default(),
            r.failure.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_enum<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    Ok(serde_json::from_value(serde_json::Value::String(
        text.to_string(),
    ))?)
}

/// Parses what [`write_records_csv`] wrote. Condition numbers are not stored
/// in CSV and come back as `None`.
pub fn read_records_csv<R: std::io::Read>(reader: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    if rdr.headers()?.iter().ne(RECORD_COLUMNS) {
        return Err(Error::Invalid("unexpected record header".into()));
    }
    let int = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Invalid(format!("not an integer: {s:?}")))
    };
    rdr.records()
        .enumerate()
        .map(|(line, rec)| {
            let rec = rec?;
            let failure = (!rec[11].is_empty()).then(|| rec[11].to_string());
            let metrics = if failure.is_some() {
                None
            } else {
                let nums = parse_row(
                    &csv::StringRecord::from(vec![&rec[6], &rec[7], &rec[8]]),
                    line,
                )?;
                let rel = if rec[9].is_empty() {
                    None
                } else {
                    Some(parse_row(&csv::StringRecord::from(vec![&rec[9]]), line)?[0])
                };
                Some(CellMetrics {
                    coverage: nums[0],
                    mean_width: nums[1],
                    median_width: nums[2],
                    rel_loo_error: rel,
                    n_unbounded: int(&rec[10])?,
                    condition_number: None,
                })
            };
            Ok(RunRecord {
                benchmark: rec[0].to_string(),
                degree: int(&rec[1])?,
                oversampling: int(&rec[2])?,
                method: parse_enum(&rec[3])?,
                score: parse_enum(&rec[4])?,
                seed: int(&rec[5])?,
                metrics,
                failure,
            })
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(summaries: &[CellSummary], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SUMMARY_COLUMNS)?;
    for s in summaries {
        let mut row = vec![
            s.benchmark.clone(),
            s.degree.to_string(),
            s.oversampling.to_string(),
            s.method.as_str().to_string(),
            s.score.as_str().to_string(),
            s.n_runs.to_string(),
            s.n_failed.to_string(),
            s.n_unbounded.to_string(),
        ];
        row.extend(Stats::fields(s.coverage.as_ref()).map(opt));
        row.extend(Stats::fields(s.width.as_ref()).map(opt));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct RecordJson {
    benchmark: String,
    #[serde(rename = "P")]
    degree: usize,
    #[serde(rename = "C")]
    oversampling: usize,
    method: Method,
    score: Score,
    seed: usize,
    #[serde(with = "json_option")]
    coverage: Option<f64>,
    #[serde(with = "json_option")]
    mean_width: Option<f64>,
    #[serde(with = "json_option")]
    median_width: Option<f64>,
    #[serde(with = "json_option")]
    rel_loo_error: Option<f64>,
    n_unbounded: Option<usize>,
    failure: Option<String>,
}

impl From<&RunRecord> for RecordJson {
    fn from(r: &RunRecord) -> Self {
        let m = r.metrics.as_ref();
        RecordJson {
            benchmark: r.benchmark.clone(),
            degree: r.degree,
            oversampling: r.oversampling,
            method: r.method,
            score: r.score,
            seed: r.seed,
            coverage: m.map(|m| m.coverage),
            mean_width: m.map(|m| m.mean_width),
            median_width: m.map(|m| m.median_width),
            rel_loo_error: m.and_then(|m| m.rel_loo_error),
            n_unbounded: m.map(|m| m.n_unbounded),
            failure: r.failure.clone(),
        }
    }
}

#[derive(Serialize)]
struct StatsJson {
    #[serde(with = "json_option")]
    mean: Option<f64>,
    #[serde(with = "json_option")]
    median: Option<f64>,
    #[serde(with = "json_option")]
    q1: Option<f64>,
    #[serde(with = "json_option")]
    q3: Option<f64>,
    #[serde(with = "json_option")]
    min: Option<f64>,
    #[serde(with = "json_option")]
    max: Option<f64>,
}

impl StatsJson {
    fn from_stats(s: Option<&Stats>) -> Option<Self> {
        s.map(|s| StatsJson {
            mean: Some(s.mean),
            median: Some(s.median),
            q1: Some(s.q1),
            q3: Some(s.q3),
            min: Some(s.min),
            max: Some(s.max),
        })
    }
}

#[derive(Serialize)]
struct SummaryJson {
    benchmark: String,
    #[serde(rename = "P")]
    degree: usize,
    #[serde(rename = "C")]
    oversampling: usize,
    method: Method,
    score: Score,
    n_runs: usize,
    n_failed: usize,
    n_unbounded: usize,
    coverage: Option<StatsJson>,
    width: Option<StatsJson>,
}

pub fn write_records_json<W: Write>(records: &[RunRecord], mut writer: W) -> Result<()> {
    let rows: Vec<RecordJson> = records.iter().map(RecordJson::from).collect();
    serde_json::to_writer_pretty(&mut writer, &rows)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn write_summary_json<W: Write>(summaries: &[CellSummary], mut writer: W) -> Result<()> {
    let rows: Vec<SummaryJson> = summaries
        .iter()
        .map(|s| SummaryJson {
            benchmark: s.benchmark.clone(),
            degree: s.degree,
            oversampling: s.oversampling,
            method: s.method,
            score: s.score,
            n_runs: s.n_runs,
            n_failed: s.n_failed,
            n_unbounded: s.n_unbounded,
            coverage: StatsJson::from_stats(s.coverage.as_ref()),
            width: StatsJson::from_stats(s.width.as_ref()),
        })
        .collect();
    serde_json::to_writer_pretty(&mut writer, &rows)?;
    writer.write_all(b"\n")?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

/// Writes `records.<ext>` and `summary.<ext>` into `dir` and returns their paths.
pub fn emit_report(
    report: &CoverageReport,
    dir: &Path,
    format: ReportFormat,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let ext = match format {
        ReportFormat::Csv => "csv",
        ReportFormat::Json => "json",
    };
    let records_path = dir.join(format!("records.{ext}"));
    let summary_path = dir.join(format!("summary.{ext}"));
    let records_file = std::io::BufWriter::new(std::fs::File::create(&records_path)?);
    let summary_file = std::io::BufWriter::new(std::fs::File::create(&summary_path)?);
    match format {
        ReportFormat::Csv => {
            write_records_csv(&report.records, records_file)?;
            write_summary_csv(&report.summaries, summary_file)?;
        }
        ReportFormat::Json => {
            write_records_json(&report.records, records_file)?;
            write_summary_json(&report.summaries, summary_file)?;
        }
    }
    Ok(vec![records_path, summary_path])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(seed: usize, coverage: f64, failure: Option<&str>) -> RunRecord {
        RunRecord {
            benchmark: "meromorphic".into(),
            degree: 2,
            oversampling: 3,
            method: Method::JackknifePlus,
            score: Score::Absolute,
            seed,
            metrics: failure.is_none().then_some(CellMetrics {
                coverage,
                mean_width: f64::INFINITY,
                median_width: 0.125,
                rel_loo_error: Some(1e-7),
                n_unbounded: 3,
                condition_number: None,
            }),
            failure: failure.map(str::to_string),
        }
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_eq!(quantile_sorted(&[1.0, f64::INFINITY], 0.5), f64::INFINITY);
        assert_eq!(quantile_sorted(&[f64::INFINITY; 3], 0.5), f64::INFINITY);
        assert!(quantile_sorted(&[], 0.5).is_nan());
    }

    #[test]
    fn empty_records_give_header_only_csv() {
        let mut buf = Vec::new();
        write_records_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            RECORD_COLUMNS.join(",") + "\n"
        );
    }

    #[test]
    fn record_csv_round_trip() {
        let records = vec![
            record(0, 0.95, None),
            record(1, 0.0, Some("underdetermined: 3 samples, oops")),
        ];
        let mut buf = Vec::new();
        write_records_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains(",inf,"));
        assert_eq!(read_records_csv(buf.as_slice()).unwrap(), records);
    }

    #[test]
    fn summary_counts_failures_separately() {
        let report = CoverageReport::from_records(vec![
            record(2, 0.9, None),
            record(0, 1.0, None),
            record(1, 0.0, Some("leverage")),
        ]);
        assert_eq!(
            report.records.iter().map(|r| r.seed).collect::<Vec<_>>(),
            [0, 1, 2]
        );
        assert_eq!(report.summaries.len(), 1);
        let s = &report.summaries[0];
        assert_eq!((s.n_runs, s.n_failed, s.n_unbounded), (3, 1, 6));
        assert!((s.coverage.unwrap().mean - 0.95).abs() < 1e-15);
        assert_eq!(report.failures().count(), 1);
        assert!(!report.all_failed());
    }

    #[test]
    fn config_validation_and_defaults() {
        let cfg = ExperimentConfig::from_json(
            r#"{"benchmark":"otl_circuit","degrees":[1],"oversampling":[2],
                "methods":["jackknife_plus"],"scores":["normalized"]}"#,
        )
        .unwrap();
        assert_eq!(cfg.significance, 0.05);
        assert_eq!((cfg.n_seeds, cfg.test_size), (100, 10_000));
        assert_eq!(cfg.expected_records(), 100);

        let bad = r#"{"benchmark":"otl_circuit","degrees":[],"oversampling":[2],
                      "methods":["jackknife"],"scores":["absolute"]}"#;
        assert!(ExperimentConfig::from_json(bad).is_err());
        let unknown = r#"{"benchmark":"otl_circuit","degrees":[1],"oversampling":[2],
                          "methods":["jackknife"],"scores":["absolute"],"alpha":0.1}"#;
        assert!(ExperimentConfig::from_json(unknown).is_err());
        let zero_c = r#"{"benchmark":"otl_circuit","degrees":[1],"oversampling":[0],
                         "methods":["jackknife"],"scores":["absolute"]}"#;
        assert!(ExperimentConfig::from_json(zero_c).is_err());
    }

    #[test]
    fn cell_seeds_depend_on_every_coordinate() {
        let base = cell_seed("piston", 2, 3, 4);
        assert_eq!(base, cell_seed("piston", 2, 3, 4));
        for other in [
            cell_seed("wing_weight", 2, 3, 4),
            cell_seed("piston", 3, 3, 4),
            cell_seed("piston", 2, 5, 4),
            cell_seed("piston", 2, 3, 5),
        ] {
            assert_ne!(base, other);
        }
    }

    #[test]
    fn full_grid_sizes() {
        let cfg = ExperimentConfig::full_grid(Benchmark::Meromorphic);
        assert_eq!(cfg.degrees.len() * cfg.oversampling.len(), 8);
        assert_eq!(cfg.expected_records(), 1600);
    }
}
