//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use msstgarch::{ModelSpec, RegimeParams, TransitionMatrix};

pub fn benchmark_spec() -> ModelSpec {
    ModelSpec::new(
        vec![
            RegimeParams::new(0.3, 0.2, 0.05, 0.5, 1.5).unwrap(),
            RegimeParams::new(1.9, 0.7, 0.1, 0.25, 0.5).unwrap(),
        ],
        TransitionMatrix::two_state(0.97, 0.85).unwrap(),
    )
    .unwrap()
}

pub fn normal_pdf(y: f64, var: f64) -> f64 {
    (-0.5 * y * y / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Variance of the first observation, written out from the rule rather
/// than calling into the library.
pub fn first_variance(p: &RegimeParams, target: f64) -> f64 {
    let denom = 1.0 - 0.5 * (p.a1 + p.a2) - p.b;
    if denom > 0.05 {
        p.a0 / denom
    } else {
        target
    }
}

pub fn variance_path(p: &RegimeParams, data: &[f64], target: f64) -> Vec<f64> {
    let mut h = vec![first_variance(p, target)];
    for &y in &data[..data.len().saturating_sub(1)] {
        let w = 1.0 / (1.0 + (-p.gamma * y).exp());
        let d = p.a1 * (1.0 - w) + p.a2 * w;
        let next = p.a0 + y * y * d + p.b * h.last().unwrap();
        h.push(next);
    }
    h
}

pub fn second_moment(data: &[f64]) -> f64 {
    data.iter().map(|y| y * y).sum::<f64>() / data.len() as f64
}

/// Stationary law of a two-state chain in closed form.
pub fn two_state_stationary(p11: f64, p22: f64) -> [f64; 2] {
    let s = 2.0 - p11 - p22;
    [(1.0 - p22) / s, (1.0 - p11) / s]
}

/// All regime paths of length `n` over `k` regimes.
pub fn all_paths(n: usize, k: usize) -> Vec<Vec<usize>> {
    let total = k.pow(n as u32);
    (0..total)
        .map(|mut code| {
            let mut path = vec![0; n];
            for slot in path.iter_mut() {
                *slot = code % k;
                code /= k;
            }
            path
        })
        .collect()
}

/// Joint weight `p(z_1..z_n) prod_{s < m} N(y_s; H[z_s, s])` for the first
/// `m` observations of a path of length `n >= m`.
pub fn path_weight(path: &[usize], pi: &[f64], p: &[Vec<f64>], paths: &[Vec<f64>], data: &[f64], m: usize) -> f64 {
    let mut w = pi[path[0]];
    for t in 1..path.len() {
        w *= p[path[t - 1]][path[t]];
    }
    for s in 0..m {
        w *= normal_pdf(data[s], paths[path[s]][s]);
    }
    w
}

/// Enumerated predicted probabilities `p(z_t | y_<t)` for `t = 0..=T` and
/// the total likelihood.
pub fn enumerate_filter(spec: &ModelSpec, data: &[f64]) -> (Vec<Vec<f64>>, f64) {
    let k = spec.k();
    let pi = spec.stationary_distribution();
    let p = spec.transition().rows();
    let target = second_moment(data);
    let mut extended = data.to_vec();
    extended.push(0.0);
    let paths: Vec<Vec<f64>> = spec
        .regimes()
        .iter()
        .map(|r| variance_path(r, &extended, target))
        .collect();

    let mut alphas = Vec::new();
    let mut lik = 0.0;
    for t in 0..=data.len() {
        let mut alpha = vec![0.0; k];
        for path in all_paths(t + 1, k) {
            alpha[path[t]] += path_weight(&path, &pi, &p, &paths, data, t);
        }
        let total: f64 = alpha.iter().sum();
        if t == data.len() {
            lik = total;
        }
        alphas.push(alpha.iter().map(|a| a / total).collect());
    }
    (alphas, lik.ln())
}

/// Enumerated posterior over complete regime paths, in [`all_paths`] order.
pub fn enumerate_path_posterior(regimes: &[RegimeParams], transition: &TransitionMatrix, data: &[f64]) -> Vec<f64> {
    let k = regimes.len();
    let pi = transition.initial_distribution();
    let p = transition.rows();
    let target = second_moment(data);
    let paths: Vec<Vec<f64>> = regimes.iter().map(|r| variance_path(r, data, target)).collect();
    let w: Vec<f64> = all_paths(data.len(), k)
        .iter()
        .map(|path| path_weight(path, &pi, &p, &paths, data, data.len()))
        .collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

pub fn path_code(path: &[usize], k: usize) -> usize {
    path.iter().rev().fold(0, |acc, &z| acc * k + z)
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Reference GARCH-type likelihood with a single regime, computed by a
/// plain loop.
pub fn single_regime_log_lik(p: &RegimeParams, data: &[f64]) -> f64 {
    let h = variance_path(p, data, second_moment(data));
    data.iter()
        .zip(&h)
        .map(|(y, v)| -0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * v.ln() - 0.5 * y * y / v)
        .sum()
}
