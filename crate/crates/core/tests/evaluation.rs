mod common;

use common::benchmark_spec;
use msstgarch::evaluation::{
    descriptive_stats, dic, dm_test, lr_cc, lr_ind, lr_uc, rolling_forecast, violations, DmOutcome, ViolationSeries,
};
use msstgarch::inference::{run_gibbs, summarize, PriorSpec};
use msstgarch::{simulate, McmcConfig, ModelSpec, PredictiveDistribution, RegimeParams, Variant};
use rand::Rng;
use rand_distr::StandardNormal;

fn indicators(ones: &[usize], n: usize) -> Vec<bool> {
    (0..n).map(|t| ones.contains(&t)).collect()
}

#[test]
fn independence_statistic_matches_script() {
    // reference values from a separate Python implementation
    let s = ViolationSeries::from_indicators(0.05, vec![], indicators(&[3, 11, 19, 27, 35], 40)).unwrap();
    assert_eq!(s.n11, 0);
    assert!((lr_ind(&s).unwrap() - 1.4759351895299702).abs() < 1e-12);
    let s = ViolationSeries::from_indicators(0.1, vec![], indicators(&[2, 3, 7, 9, 10, 11, 16], 20)).unwrap();
    assert!((lr_ind(&s).unwrap() - 0.17112602175623248).abs() < 1e-12);
    let cc = lr_cc(&s).unwrap();
    assert_eq!(cc, lr_uc(&s).unwrap() + lr_ind(&s).unwrap());
}

#[test]
fn walk_forward_matches_manual_filter() {
    let spec = benchmark_spec();
    let data = simulate(&spec, 120, 8, 300).unwrap().returns.values().to_vec();
    let split = 80;
    let forecasts = rolling_forecast(&spec, &data, split).unwrap();
    // re-walk: regime variances and predicted probabilities by hand
    let p = spec.transition().rows();
    let target = data[..split].iter().map(|y| y * y).sum::<f64>() / split as f64;
    let mut h: Vec<f64> = spec
        .regimes()
        .iter()
        .map(|r| common::first_variance(r, target))
        .collect();
    let mut alpha = common::two_state_stationary(0.97, 0.85).to_vec();
    for (t, &y) in data.iter().enumerate() {
        if t >= split {
            let v: f64 = alpha.iter().zip(&h).map(|(a, b)| a * b).sum();
            assert!((forecasts[t - split].variance - v).abs() < 1e-10 * v.max(1.0));
        }
        let dens: Vec<f64> = alpha
            .iter()
            .zip(&h)
            .map(|(a, hv)| a * common::normal_pdf(y, *hv))
            .collect();
        let s: f64 = dens.iter().sum();
        let filt: Vec<f64> = dens.iter().map(|d| d / s).collect();
        alpha = (0..2).map(|j| filt[0] * p[0][j] + filt[1] * p[1][j]).collect();
        for (hj, r) in h.iter_mut().zip(spec.regimes()) {
            let w = 1.0 / (1.0 + (-r.gamma * y).exp());
            *hj = r.a0 + y * y * (r.a1 * (1.0 - w) + r.a2 * w) + r.b * *hj;
        }
    }
}

#[test]
fn mirrored_levels_give_mirrored_indicators() {
    let mut rng = msstgarch::seeded_rng(2);
    let dists: Vec<PredictiveDistribution> = (0..300)
        .map(|_| {
            let w = rng.random_range(0.05..0.95);
            PredictiveDistribution::new(
                vec![w, 1.0 - w],
                vec![rng.random_range(0.5..2.0), rng.random_range(1.0..4.0)],
            )
            .unwrap()
        })
        .collect();
    let y: Vec<f64> = (0..300).map(|_| 2.0 * rng.sample::<f64, _>(StandardNormal)).collect();
    let flipped: Vec<f64> = y.iter().map(|v| -v).collect();
    for level in [0.99, 0.95, 0.9] {
        let a = violations(&dists, &y, level).unwrap();
        let b = violations(&dists, &flipped, 1.0 - level).unwrap();
        assert_eq!(a.indicators, b.indicators);
        assert_eq!(lr_uc(&a), lr_uc(&b));
    }
}

#[test]
fn dm_power() {
    let mut rng = msstgarch::seeded_rng(100);
    let mut rejections = 0;
    for _ in 0..100 {
        let truth: Vec<f64> = (0..500).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let e1: Vec<f64> = truth
            .iter()
            .map(|_| 0.1 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let e2: Vec<f64> = truth
            .iter()
            .map(|_| 1.0 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        if let DmOutcome::Statistic { statistic, .. } = dm_test(&e1, &e2).unwrap() {
            if statistic < -1.645 {
                rejections += 1;
            }
        }
    }
    assert!(rejections >= 95, "{rejections}");
}

#[test]
fn kurtosis_of_normal_sample() {
    let mut rng = msstgarch::seeded_rng(5);
    let x: Vec<f64> = (0..1_000_000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let s = descriptive_stats(&x).unwrap();
    assert!((s.kurtosis.unwrap() - 3.0).abs() < 0.05);
}

#[test]
fn simulated_benchmark_has_fat_tails() {
    let sim = simulate(&benchmark_spec(), 2500, 12, 500).unwrap();
    assert!(descriptive_stats(sim.returns.values()).unwrap().kurtosis.unwrap() > 3.0);
}

#[test]
fn summary_of_normal_draws() {
    let mut rng = msstgarch::seeded_rng(6);
    let n = 100_000;
    let x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let s = summarize("z", &x);
    assert!(s.mean.abs() < 3.0 / (n as f64).sqrt());
    assert!((s.sd - 1.0).abs() < 0.01);
    assert!((s.q05 + 1.645).abs() < 0.03 && (s.q95 - 1.645).abs() < 0.03);
}

#[test]
fn dic_stable_across_chains() {
    let data = simulate(
        &ModelSpec::single(RegimeParams::garch(0.2, 0.1, 0.8).unwrap()).unwrap(),
        1000,
        31,
        300,
    )
    .unwrap()
    .returns
    .values()
    .to_vec();
    let priors = PriorSpec::for_variant(Variant::Garch, 1);
    let values: Vec<f64> = [1_u64, 2]
        .iter()
        .map(|&seed| {
            let cfg = McmcConfig {
                iterations: 3000,
                burn_in: 1000,
                grid_size: 33,
                seed,
                thinning: 1,
            };
            dic(&run_gibbs(&data, &priors, &cfg).unwrap(), &data).unwrap()
        })
        .collect();
    assert!((values[0] - values[1]).abs() < 2.0, "{values:?}");
}
