mod common;

use conformal_pce::benchmarks::{evaluate, sample_design, sample_test, Benchmark, TestFunction};

#[test]
fn samples_fill_the_box() {
    for b in Benchmark::ALL {
        let data = sample_design(b, 100_000, 3).unwrap();
        for (dim, &(lo, hi)) in b.input_spec().ranges().iter().enumerate() {
            let col = data.inputs().iter().map(|x| x[dim]);
            let (mn, mx) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(v), b.max(v))
            });
            assert!(mn >= lo && mx <= hi, "{b} dim {dim} escaped the box");
            let tol = 1e-3 * (hi - lo);
            assert!(
                mn - lo <= tol && hi - mx <= tol,
                "{b} dim {dim}: [{mn}, {mx}]"
            );
        }
    }
}

#[test]
fn meromorphic_mean_matches_quadrature() {
    // Oracle: 200-point Gauss–Legendre rule for E[1 / (1 + x / 2)], x ~ U(-1, 1).
    let (nodes, weights) = common::gauss_legendre(200);
    let exact: f64 = nodes
        .iter()
        .zip(&weights)
        .map(|(x, w)| w / (1.0 + 0.5 * x))
        .sum();
    assert!((exact - 3f64.ln()).abs() < 1e-12);

    let data = sample_test(Benchmark::Meromorphic, 1_000_000, 0).unwrap();
    let mean = data.outputs().iter().sum::<f64>() / data.len() as f64;
    assert!((mean - exact).abs() / exact < 5e-3, "{mean} vs {exact}");
}

#[test]
fn evaluation_is_bitwise_deterministic() {
    for b in Benchmark::ALL {
        let data = sample_design(b, 200, 1).unwrap();
        for (x, y) in data.inputs().iter().zip(data.outputs()) {
            assert_eq!(evaluate(b, x).unwrap().to_bits(), y.to_bits());
        }
    }
}

#[test]
fn otl_midpoint_voltage_stays_in_recorded_band() {
    // Regression guard: 1e5 draws observed within [2.67, 24.70] volts.
    let data = sample_test(Benchmark::OtlCircuit, 100_000, 0).unwrap();
    assert!(data.outputs().iter().all(|&v| (2.5..=25.0).contains(&v)));
}

#[test]
fn piston_is_finite_at_box_corners() {
    let b = Benchmark::Piston;
    let ranges = b.input_spec().ranges().to_vec();
    for mask in 0u32..(1 << ranges.len()) {
        let x: Vec<f64> = ranges
            .iter()
            .enumerate()
            .map(|(i, &(lo, hi))| if mask >> i & 1 == 1 { hi } else { lo })
            .collect();
        let y = b.evaluate(&x).unwrap();
        assert!(y.is_finite() && y > 0.0);
    }
}

#[test]
fn dataset_csv_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("design.csv");
    let data = sample_design(Benchmark::WingWeight, 25, 9).unwrap();
    data.save(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("x1,x2,x3,x4,x5,x6,x7,x8,x9,x10,y\n"));
    assert_eq!(conformal_pce::Dataset::load(&path).unwrap(), data);
}
