//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use conformal_pce::basis::{build_total_degree_set, eval_basis_row};
use conformal_pce::benchmarks::{
    design_size, sample_dataset, sample_design, sample_points, stream_rng, Benchmark, Stream,
    TestFunction,
};
use conformal_pce::conformal::{
    empirical_coverage, ConformalConfig, Conformalizer, Method, PredictionInterval, Score,
};
use conformal_pce::harness::{run_grid, write_records_csv, CoverageReport, ExperimentConfig};
use conformal_pce::pce::{brute_force_loo, fit, PceModel};
use rayon::prelude::*;

use common::{tensor_rule, wilson_lower, worst_ratio, ExactQuadratic, ZeroTarget};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn fit_function<F: TestFunction>(f: &F, degree: usize, c: usize, seed: u64) -> PceModel {
    let m = f.design_size(degree, c).unwrap();
    let data = sample_dataset(f, m, seed, Stream::Train).unwrap();
    let set = build_total_degree_set(f.input_spec().dim(), degree).unwrap();
    fit(&data, &set, &f.input_spec()).unwrap()
}

fn smallest_grid() -> Vec<(Benchmark, usize, usize, u64)> {
    let mut cells = Vec::new();
    for b in Benchmark::ALL {
        for c in [2, 3] {
            for seed in 0..5 {
                cells.push((b, b.degree_grid()[0], c, seed));
            }
        }
    }
    cells
}

fn oracle_equivalence() -> Outcome {
    let ratios: Vec<f64> = smallest_grid()
        .into_par_iter()
        .map(|(b, p, c, seed)| {
            let m = design_size(b, p, c).unwrap();
            let data = sample_design(b, m, seed).unwrap();
            let spec = b.input_spec();
            let set = build_total_degree_set(b.dim(), p).unwrap();
            let model = fit(&data, &set, &spec).unwrap();
            let mut rng = stream_rng("acceptance-queries", seed, Stream::Test);
            let queries = sample_points(&spec, 10, &mut rng);
            let closed_res: Vec<f64> = model.loo_residuals().iter().copied().collect();
            let mut worst: f64 = 0.0;
            for x in &queries {
                let (res, pred) = brute_force_loo(&data, &set, &spec, Some(x)).unwrap();
                worst = worst.max(worst_ratio(&closed_res, &res, 1e-8, 1e-10));
                let closed: Vec<f64> = model.loo_predict(x).unwrap().iter().copied().collect();
                worst = worst.max(worst_ratio(&closed, &pred.unwrap(), 1e-8, 1e-10));
            }
            worst
        })
        .collect();
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    outcome(
        worst <= 1.0,
        format!(
            "{} fits, worst error / tolerance = {worst:.3e}",
            ratios.len()
        ),
    )
}

fn orthonormality() -> Outcome {
    let set = build_total_degree_set(3, 4).unwrap();
    let (points, weights) = tensor_rule(5, 3);
    let k = set.len();
    let mut gram = vec![0.0; k * k];
    for (x, w) in points.iter().zip(&weights) {
        let row = eval_basis_row(x, &set).unwrap();
        for i in 0..k {
            for j in 0..k {
                gram[i * k + j] += w * row[i] * row[j];
            }
        }
    }
    let dev = (0..k * k)
        .map(|ij| (gram[ij] - if ij / k == ij % k { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    outcome(dev <= 1e-10, format!("K={k}, max |G - I| = {dev:.3e}"))
}

fn hat_identities() -> Outcome {
    let mut worst_trace: f64 = 0.0;
    let mut in_range = true;
    for (b, p, c, seed) in smallest_grid() {
        let model = fit_function(&b, p, c, seed);
        let h = model.hat_diag();
        in_range &= h.iter().all(|&v| (0.0..=1.0).contains(&v));
        worst_trace = worst_trace.max((h.sum() - model.n_terms() as f64).abs());
    }
    outcome(
        in_range && worst_trace <= 1e-8,
        format!("h in [0,1]: {in_range}, max |trace - K| = {worst_trace:.3e}"),
    )
}

fn intervals_on_test<F: TestFunction>(
    f: &F,
    model: &PceModel,
    method: Method,
    score: Score,
    seed: u64,
    n: usize,
) -> (Vec<PredictionInterval>, Vec<f64>) {
    let cfg = ConformalConfig::new(method, score, 0.05).unwrap();
    let conf = Conformalizer::new(model, cfg).unwrap();
    let test = sample_dataset(f, n, seed, Stream::Test).unwrap();
    let ivs = test
        .inputs()
        .iter()
        .map(|x| conf.interval(x).unwrap())
        .collect();
    (ivs, test.outputs().to_vec())
}

fn exact_recovery() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();

    // Zero polynomial: every quantity is exactly representable.
    let model = fit_function(&ZeroTarget, 2, 5, 0);
    let res = model.loo_residuals().amax();
    for method in [Method::Jackknife, Method::JackknifePlus] {
        let (ivs, y) = intervals_on_test(&ZeroTarget, &model, method, Score::Absolute, 0, 2000);
        let width = ivs.iter().map(|iv| iv.width()).fold(0.0, f64::max);
        let cov = empirical_coverage(&ivs, &y).unwrap();
        pass &= res <= 1e-10 && width == 0.0 && cov == 1.0;
        notes.push(format!(
            "zero/{}: width {width:e}, coverage {cov}",
            method.as_str()
        ));
    }

    // Quadratic in the span: residuals and widths are round-off, so coverage is
    // counted against the interval widened by the same 1e-10 tolerance.
    let model = fit_function(&ExactQuadratic, 2, 5, 0);
    let res = model.loo_residuals().amax();
    for method in [Method::Jackknife, Method::JackknifePlus] {
        let (ivs, y) = intervals_on_test(&ExactQuadratic, &model, method, Score::Absolute, 0, 2000);
        let width = ivs.iter().map(|iv| iv.width()).fold(0.0, f64::max);
        let strict = empirical_coverage(&ivs, &y).unwrap();
        let tolerant = ivs
            .iter()
            .zip(&y)
            .filter(|(iv, &t)| iv.lower - 1e-10 <= t && t <= iv.upper + 1e-10)
            .count() as f64
            / y.len() as f64;
        pass &= res <= 1e-10 && width <= 1e-10 && tolerant == 1.0;
        notes.push(format!(
            "quadratic/{}: max |r| {res:.1e}, width {width:.1e}, coverage {tolerant} (strict {strict})",
            method.as_str()
        ));
    }
    outcome(pass, notes.join("; "))
}

fn normalization_invariance() -> Outcome {
    let b = Benchmark::OtlCircuit;
    let model = fit_function(&b, 2, 3, 0);
    let mut worst: f64 = 0.0;
    for method in [Method::Jackknife, Method::JackknifePlus] {
        let (abs, _) = intervals_on_test(&b, &model, method, Score::Absolute, 0, 500);
        let (norm, _) = intervals_on_test(&b, &model, method, Score::Normalized, 0, 500);
        for (a, n) in abs.iter().zip(&norm) {
            let w = a.width();
            worst = worst.max((a.lower - n.lower).abs().max((a.upper - n.upper).abs()) / w);
        }
    }
    outcome(
        worst <= 1e-12,
        format!("max endpoint gap / width = {worst:.3e}"),
    )
}

fn coverage_configs() -> Vec<ExperimentConfig> {
    [
        (Benchmark::Meromorphic, 3),
        (Benchmark::OtlCircuit, 2),
        (Benchmark::Piston, 2),
        (Benchmark::WingWeight, 1),
    ]
    .into_iter()
    .map(|(b, p)| ExperimentConfig {
        benchmark: b,
        degrees: vec![p],
        oversampling: vec![10],
        methods: vec![Method::Jackknife, Method::JackknifePlus],
        scores: vec![Score::Absolute],
        significance: 0.05,
        n_seeds: 20,
        test_size: 2000,
        output: None,
    })
    .collect()
}

fn mean_coverage(report: &CoverageReport, method: Method) -> f64 {
    let s = report
        .summaries
        .iter()
        .find(|s| s.method == method)
        .unwrap();
    s.coverage.as_ref().map_or(f64::NAN, |c| c.mean)
}

fn coverage_bands(reports: &[CoverageReport]) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for r in reports {
        let jk = mean_coverage(r, Method::Jackknife);
        let jkp = mean_coverage(r, Method::JackknifePlus);
        pass &= r.failures().count() == 0
            && (0.93..=1.0).contains(&jk)
            && (0.92..=1.0).contains(&jkp)
            && jk >= jkp - 0.01;
        notes.push(format!(
            "{} jk {jk:.4} jk+ {jkp:.4}",
            r.records[0].benchmark
        ));
    }
    outcome(pass, notes.join("; "))
}

fn plus_guarantee(reports: &[CoverageReport], test_size: usize) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for r in reports {
        let runs: Vec<_> = r
            .records
            .iter()
            .filter(|x| x.method == Method::JackknifePlus)
            .collect();
        let n = (runs.len() * test_size) as f64;
        let hits: f64 = runs
            .iter()
            .map(|x| (x.metrics.unwrap().coverage * test_size as f64).round())
            .sum();
        let lo = wilson_lower(hits, n, 2.5758);
        pass &= lo >= 0.90;
        notes.push(format!("{} {lo:.4}", r.records[0].benchmark));
    }
    outcome(
        pass,
        format!("99% Wilson lower bounds: {}", notes.join(", ")),
    )
}

fn width_shrinkage() -> Outcome {
    let mut cfg = ExperimentConfig::full_grid(Benchmark::Meromorphic);
    cfg.degrees = vec![2];
    cfg.n_seeds = 50;
    let report = run_grid(&cfg).unwrap();
    let mut pass = report.failures().count() == 0;
    let mut notes = Vec::new();
    for method in [Method::Jackknife, Method::JackknifePlus] {
        let widths: Vec<f64> = [2, 3, 5, 10]
            .iter()
            .map(|&c| {
                let s = report.summary(2, c, method, Score::Absolute).unwrap();
                s.width.as_ref().map_or(f64::NAN, |w| w.mean)
            })
            .collect();
        pass &= widths.windows(2).all(|w| w[0] > w[1]);
        notes.push(format!("{} {widths:.4?}", method.as_str()));
    }
    outcome(pass, notes.join("; "))
}

fn determinism(first: &[CoverageReport]) -> Outcome {
    let bytes = |reports: &[CoverageReport]| {
        let mut out = Vec::new();
        for r in reports {
            write_records_csv(&r.records, &mut out).unwrap();
        }
        out
    };
    let rerun: Vec<_> = coverage_configs()
        .iter()
        .map(|c| run_grid(c).unwrap())
        .collect();
    let (a, b) = (bytes(first), bytes(&rerun));
    outcome(a == b, format!("{} bytes, identical: {}", a.len(), a == b))
}

fn report(n: usize, name: &str, started: Instant, o: Outcome) -> bool {
    println!(
        "{} criterion {n} ({name}): {} [{:.1}s]",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        started.elapsed().as_secs_f64()
    );
    o.pass
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut ok = true;

    let t = Instant::now();
    ok &= report(1, "oracle equivalence", t, oracle_equivalence());
    let t = Instant::now();
    ok &= report(2, "orthonormality", t, orthonormality());
    let t = Instant::now();
    ok &= report(3, "hat identities", t, hat_identities());
    let t = Instant::now();
    ok &= report(4, "exact recovery", t, exact_recovery());
    let t = Instant::now();
    ok &= report(5, "normalization invariance", t, normalization_invariance());

    let t = Instant::now();
    let configs = coverage_configs();
    let reports: Vec<_> = configs.iter().map(|c| run_grid(c).unwrap()).collect();
    ok &= report(6, "coverage bands", t, coverage_bands(&reports));
    let t = Instant::now();
    ok &= report(
        7,
        "jackknife+ guarantee",
        t,
        plus_guarantee(&reports, configs[0].test_size),
    );
    let t = Instant::now();
    ok &= report(8, "width shrinkage", t, width_shrinkage());
    let t = Instant::now();
    ok &= report(9, "determinism", t, determinism(&reports));

    println!(
        "acceptance: {}",
        if ok { "all criteria passed" } else { "FAILED" }
    );
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
