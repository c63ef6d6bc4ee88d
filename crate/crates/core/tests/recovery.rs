mod common;

use common::benchmark_spec;
use msstgarch::inference::ParamPrior;
use msstgarch::inference::{conditional_likelihood, PriorSpec};
use msstgarch::{simulate, Variant};

/// With everything but one scalar held at the truth, the conditional
/// posterior mode on the default grid should sit within two cells of the
/// true value in at least 90% of replications.
#[test]
fn single_axis_modes_near_truth() {
    let truth = benchmark_spec();
    let priors = PriorSpec::for_variant(Variant::MsStGarch, 2);
    let g = 33;
    let reps = 50;
    let mut hits = [0; 10];
    for rep in 0..reps {
        let sim = simulate(&truth, 2000, 1000 + rep, 500).unwrap();
        let data = sim.returns.values();
        for (slot, hit) in hits.iter_mut().enumerate() {
            let (regime, idx) = (slot / 5, slot % 5);
            let ParamPrior::Uniform(interval) = priors.regimes[regime].as_array()[idx] else {
                unreachable!()
            };
            let grid = interval.grid(g);
            let mut best = (f64::NEG_INFINITY, 0.0);
            for &x in &grid {
                if !interval.contains(x) {
                    continue;
                }
                let mut theta = truth.regimes().to_vec();
                theta[regime].set(idx, x);
                let ll = conditional_likelihood(&theta, &sim.states, data).unwrap_or(f64::NEG_INFINITY);
                if ll > best.0 {
                    best = (ll, x);
                }
            }
            let step = interval.width() / (g - 1) as f64;
            if (best.1 - truth.regimes()[regime].get(idx)).abs() <= 2.0 * step + 1e-12 {
                *hit += 1;
            }
        }
    }
    let rates: Vec<f64> = hits.iter().map(|h| *h as f64 / reps as f64).collect();
    for (slot, rate) in rates.iter().enumerate() {
        assert!(*rate >= 0.9, "parameter {slot}: {rate} ({rates:?})");
    }
}
