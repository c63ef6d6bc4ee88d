#![allow(clippy::needless_range_loop)]
mod common;

use common::*;
use msstgarch::{log_likelihood, run_filter, simulate, ModelSpec, RegimeParams, TransitionMatrix};

fn two_regime(r1: RegimeParams, r2: RegimeParams) -> ModelSpec {
    ModelSpec::new(vec![r1, r2], TransitionMatrix::two_state(0.95, 0.8).unwrap()).unwrap()
}

#[test]
fn zero_gamma_is_ms_garch() {
    let st = two_regime(
        RegimeParams::new(0.3, 0.25, 0.05, 0.5, 0.0).unwrap(),
        RegimeParams::new(1.5, 0.6, 0.2, 0.2, 0.0).unwrap(),
    );
    let ms = two_regime(
        RegimeParams::garch(0.3, 0.15, 0.5).unwrap(),
        RegimeParams::garch(1.5, 0.4, 0.2).unwrap(),
    );
    let data = simulate(&st, 400, 11, 100).unwrap();
    let sim_ms = simulate(&ms, 400, 11, 100).unwrap();
    for (a, b) in data.returns.values().iter().zip(sim_ms.returns.values()) {
        assert!((a - b).abs() < 1e-12);
    }
    let ra = run_filter(&st, data.returns.values(), None).unwrap();
    let rb = run_filter(&ms, data.returns.values(), None).unwrap();
    for (a, b) in ra.states.iter().zip(&rb.states) {
        for j in 0..2 {
            assert!((a.alpha[j] - b.alpha[j]).abs() < 1e-12);
            assert!((a.h[j] - b.h[j]).abs() < 1e-12 * b.h[j].max(1.0));
        }
    }
    assert!((ra.log_likelihood - rb.log_likelihood).abs() < 1e-12 * rb.log_likelihood.abs().max(1.0));
}

#[test]
fn single_regime_matches_reference_loop() {
    let cases = [
        RegimeParams::garch(0.2, 0.1, 0.8).unwrap(),
        RegimeParams::new(0.3, 0.2, 0.05, 0.5, 1.5).unwrap(),
        RegimeParams::new(1.9, 0.7, 0.1, 0.25, 0.5).unwrap(),
        // no fixed point: falls back to the sample second moment
        RegimeParams::garch(0.1, 0.3, 0.68).unwrap(),
    ];
    for p in cases {
        let spec = ModelSpec::single(p).unwrap();
        let data = simulate(
            &ModelSpec::single(RegimeParams::garch(0.2, 0.1, 0.8).unwrap()).unwrap(),
            1500,
            3,
            50,
        )
        .unwrap();
        let ours = log_likelihood(&spec, data.returns.values()).unwrap();
        let reference = single_regime_log_lik(&p, data.returns.values());
        assert!((ours - reference).abs() < 1e-10, "{ours} vs {reference}");
    }
}

#[test]
fn variance_paths_match_simulation() {
    let spec = benchmark_spec();
    let sim = simulate(&spec, 300, 5, 0).unwrap();
    let y = sim.returns.values();
    for (j, r) in spec.regimes().iter().enumerate() {
        let h = r.variance_path(y, None);
        for t in 0..y.len() {
            assert!((h[t] - sim.variances[j][t]).abs() < 1e-12 * h[t]);
        }
    }
}
