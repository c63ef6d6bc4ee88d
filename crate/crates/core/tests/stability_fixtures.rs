mod common;

use common::benchmark_spec;
use msstgarch::linalg::{spectral_radius, Matrix};
use msstgarch::{build_c, simulate, stability_report, threshold_m, ModelSpec, RegimeParams, TransitionMatrix};
use nalgebra::DMatrix;

/// Largest eigenvalue modulus from the characteristic polynomial
/// (Faddeev-LeVerrier) and the roots of its companion matrix.
fn charpoly_radius(m: &Matrix) -> f64 {
    let n = m.dim();
    let a = DMatrix::from_row_slice(n, n, m.as_slice());
    let mut coeffs = vec![1.0];
    let mut mk = DMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        mk = &a * &mk + DMatrix::identity(n, n) * coeffs[k - 1];
        let c = -(&a * &mk).trace() / k as f64;
        coeffs.push(c);
    }
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        companion[(0, i)] = -coeffs[i + 1];
        if i + 1 < n {
            companion[(i + 1, i)] = 1.0;
        }
    }
    companion
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[test]
fn benchmark_c_fixture() {
    let c = build_c(&benchmark_spec(), 1e-6).unwrap();
    let expected = [
        [0.7517501455, 0.0, 0.015, 0.0082500045],
        [0.9700005819999998, 0.2425, 0.0, 0.037500017999999996],
        [0.1162500225, 0.0, 0.42500000000000004, 0.23375012750000002],
        [0.15000008999999997, 0.0375, 0.0, 1.06250051],
    ];
    for i in 0..4 {
        for j in 0..4 {
            assert!((c[(i, j)] - expected[i][j]).abs() < 1e-12, "C[{i}][{j}]");
        }
    }
    let rho = spectral_radius(&c).unwrap();
    assert!((rho - 1.0725215773459347).abs() < 1e-10);
    assert!((charpoly_radius(&c) - rho).abs() < 1e-8);
    assert!((threshold_m(&benchmark_spec(), 1e-6).unwrap() - 27.631019115927547).abs() < 1e-10);
}

#[test]
fn power_iteration_matches_charpoly() {
    let m = Matrix::from_rows(&[
        vec![0.625, 0.897, 0.776, 0.225],
        vec![0.3, 0.874, 0.005, 0.821],
        vec![0.797, 0.468, 0.303, 0.278],
        vec![0.255, 0.445, 0.505, 0.553],
    ])
    .unwrap();
    let rho = spectral_radius(&m).unwrap();
    assert!((rho - 2.0258528216703855).abs() < 1e-10);
    assert!((charpoly_radius(&m) - rho).abs() < 1e-8);
}

#[test]
fn scalar_reduction() {
    for (a0, a, b) in [(0.3, 0.2, 0.5), (1.0, 0.05, 0.9), (0.01, 0.0, 0.0)] {
        let spec = ModelSpec::single(RegimeParams::garch(a0, a, b).unwrap()).unwrap();
        let r = stability_report(&spec, 1e-6).unwrap();
        assert!((r.spectral_radius - (a + b)).abs() < 1e-12);
        assert!((r.bound.unwrap() - a0 / (1.0 - a - b)).abs() < 1e-12);
    }
}

fn stable_two_regime() -> ModelSpec {
    ModelSpec::new(
        vec![
            RegimeParams::new(0.3, 0.2, 0.05, 0.5, 1.5).unwrap(),
            RegimeParams::new(1.0, 0.3, 0.1, 0.4, 0.5).unwrap(),
        ],
        TransitionMatrix::two_state(0.97, 0.85).unwrap(),
    )
    .unwrap()
}

#[test]
fn bound_dominates_simulated_moment() {
    let spec = stable_two_regime();
    let report = stability_report(&spec, 1e-6).unwrap();
    assert!(report.is_stable, "{report:?}");
    let bound = report.bound.unwrap();
    let sim = simulate(&spec, 1_000_000, 99, 1000).unwrap();
    let moment = sim.returns.values().iter().map(|y| y * y).sum::<f64>() / 1e6;
    assert!(moment <= bound, "{moment} > {bound}");
    let pi = spec.stationary_distribution();
    let floor: f64 = spec.regimes().iter().zip(&pi).map(|(r, p)| r.a0 * p).sum();
    assert!(bound >= floor);
}

#[test]
fn relabeling_leaves_report_unchanged() {
    let spec = stable_two_regime();
    let swapped = spec.permuted(&[1, 0]).unwrap();
    let a = stability_report(&spec, 1e-6).unwrap();
    let b = stability_report(&swapped, 1e-6).unwrap();
    assert!((a.spectral_radius - b.spectral_radius).abs() < 1e-10);
    assert!((a.bound.unwrap() - b.bound.unwrap()).abs() < 1e-9);
}
