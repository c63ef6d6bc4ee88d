//! Sufficient condition for a bounded long-run second moment.
//!
//! With `u_j = a1_j + (delta + 1/2)|a2_j - a1_j|`, `v = diag(b)` and
//! backward regime probabilities `p(z_{t-1} = j | z_t = k) = pi_j p_jk / pi_k`,
//! the `K^2 x K^2` matrix `C` has block row `k`, block column `j` equal to
//! `p(z_{t-1} = j | z_t = k) (u e_j' + v)`. Block row `k` stacks
//! `E[H_{m,t} | z_t = k]` over `m`. When `rho(C) < 1`,
//! `lim E[y_t^2] <= sum_k pi_k [(I - C)^{-1} Omega_stacked]_{(k,k)}` with
//! `Omega_j = a0_j + |a2_j - a1_j| M^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::model::ModelSpec;

pub const DEFAULT_DELTA: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub spectral_radius: f64,
    pub is_stable: bool,
    pub delta: f64,
    /// Threshold beyond which every logistic weight is within `delta` of its limit.
    #[serde(rename = "M")]
    pub m: f64,
    /// Upper bound on the long-run second moment; present only when stable.
    pub bound: Option<f64>,
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidDelta(delta));
    }
    Ok(())
}

/// Smallest `M` such that `|y| >= M` puts every logistic weight within
/// `delta` of its limit: `max_j ln((1 - delta)/delta) / gamma_j` over regimes
/// whose weight matters (`gamma_j > 0` and `a1_j != a2_j`); 0 if none do.
pub fn threshold_m(spec: &ModelSpec, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let logit = ((1.0 - delta) / delta).ln();
    Ok(spec
        .regimes()
        .iter()
        .filter(|r| r.gamma > 0.0 && r.a1 != r.a2)
        .map(|r| logit / r.gamma)
        .fold(0.0, f64::max))
}

fn u_vector(spec: &ModelSpec, delta: f64) -> Vec<f64> {
    spec.regimes()
        .iter()
        .map(|r| r.a1 + (delta + 0.5) * (r.a2 - r.a1).abs())
        .collect()
}

/// `p(z_{t-1} = j | z_t = k)` by Bayes' rule, indexed `[k][j]`.
fn backward_probabilities(spec: &ModelSpec) -> Result<Vec<Vec<f64>>> {
    let pi = spec.transition().stationary_distribution()?;
    let k = spec.k();
    if pi.iter().any(|&p| p <= 0.0) {
        return Err(Error::ReducibleChain);
    }
    Ok((0..k)
        .map(|to| {
            (0..k)
                .map(|from| pi[from] * spec.transition().get(from, to) / pi[to])
                .collect()
        })
        .collect())
}

pub fn build_c(spec: &ModelSpec, delta: f64) -> Result<Matrix> {
    check_delta(delta)?;
    let k = spec.k();
    let u = u_vector(spec, delta);
    let back = backward_probabilities(spec)?;
    let mut c = Matrix::zeros(k * k);
    for (block_row, row_probs) in back.iter().enumerate() {
        for (block_col, &p) in row_probs.iter().enumerate() {
            // block = p * (u e_j' + diag(b)) with j = block_col
            for m in 0..k {
                let r = block_row * k + m;
                c[(r, block_col * k + block_col)] += p * u[m];
                c[(r, block_col * k + m)] += p * spec.regimes()[m].b;
            }
        }
    }
    Ok(c)
}

pub fn spectral_radius(matrix: &Matrix) -> Result<f64> {
    linalg::spectral_radius(matrix)
}

pub fn stability_report(spec: &ModelSpec, delta: f64) -> Result<StabilityReport> {
    let m = threshold_m(spec, delta)?;
    let c = build_c(spec, delta)?;
    let rho = spectral_radius(&c)?;
    let mut report = StabilityReport {
        spectral_radius: rho,
        is_stable: rho < 1.0,
        delta,
        m,
        bound: None,
    };
    if !report.is_stable {
        return Ok(report);
    }

    let k = spec.k();
    let omega: Vec<f64> = spec
        .regimes()
        .iter()
        .map(|r| r.a0 + (r.a2 - r.a1).abs() * m * m)
        .collect();
    let stacked: Vec<f64> = (0..k).flat_map(|_| omega.iter().copied()).collect();
    let mut i_minus_c = Matrix::identity(k * k);
    for r in 0..k * k {
        for col in 0..k * k {
            i_minus_c[(r, col)] -= c[(r, col)];
        }
    }
    match i_minus_c.solve(&stacked) {
        Ok(x) => {
            let pi = spec.stationary_distribution();
            report.bound = Some((0..k).map(|j| pi[j] * x[j * k + j]).sum());
        }
        Err(Error::SingularMatrix) => report.is_stable = false,
        Err(e) => return Err(e),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RegimeParams, TransitionMatrix};

    fn garch(a0: f64, a: f64, b: f64) -> ModelSpec {
        ModelSpec::single(RegimeParams::garch(a0, a, b).unwrap()).unwrap()
    }

    #[test]
    fn threshold_inverts_logistic_tail() {
        let delta = 1.0 / (1.0 + 2.0_f64.exp());
        let spec = ModelSpec::single(RegimeParams::new(0.3, 0.2, 0.1, 0.5, 1.0).unwrap()).unwrap();
        assert!((threshold_m(&spec, delta).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_vanishes_without_asymmetry() {
        let spec = ModelSpec::new(
            vec![
                RegimeParams::new(0.3, 0.2, 0.2, 0.5, 1.0).unwrap(),
                RegimeParams::new(1.3, 0.4, 0.4, 0.2, 3.0).unwrap(),
            ],
            TransitionMatrix::two_state(0.9, 0.8).unwrap(),
        )
        .unwrap();
        assert_eq!(threshold_m(&spec, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn threshold_takes_slowest_transition() {
        let spec = ModelSpec::new(
            vec![
                RegimeParams::new(0.3, 0.2, 0.05, 0.5, 1.5).unwrap(),
                RegimeParams::new(1.9, 0.7, 0.1, 0.25, 0.5).unwrap(),
            ],
            TransitionMatrix::two_state(0.97, 0.85).unwrap(),
        )
        .unwrap();
        let delta: f64 = 1e-3;
        let expect = ((1.0 - delta) / delta).ln() / 0.5;
        assert!((threshold_m(&spec, delta).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn delta_range_enforced() {
        let spec = garch(0.3, 0.2, 0.5);
        for d in [0.0, 0.5, -1e-3, 0.7] {
            assert_eq!(threshold_m(&spec, d), Err(Error::InvalidDelta(d)));
            assert!(build_c(&spec, d).is_err());
        }
    }

    #[test]
    fn scalar_c() {
        let c = build_c(&garch(0.3, 0.2, 0.5), DEFAULT_DELTA).unwrap();
        assert_eq!(c.dim(), 1);
        assert!((c[(0, 0)] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn symmetric_chain_blocks() {
        let spec = ModelSpec::new(
            vec![
                RegimeParams::new(0.3, 0.2, 0.05, 0.5, 1.5).unwrap(),
                RegimeParams::new(1.9, 0.7, 0.1, 0.25, 0.5).unwrap(),
            ],
            TransitionMatrix::uniform(2),
        )
        .unwrap();
        let delta = 1e-4;
        let c = build_c(&spec, delta).unwrap();
        let u = [0.2 + (delta + 0.5) * 0.15, 0.7 + (delta + 0.5) * 0.6];
        let b = [0.5, 0.25];
        for block_row in 0..2 {
            for j in 0..2 {
                for m in 0..2 {
                    for n in 0..2 {
                        let mut expect = if n == j { u[m] } else { 0.0 };
                        if n == m {
                            expect += b[m];
                        }
                        let got = c[(block_row * 2 + m, j * 2 + n)];
                        assert!((got - 0.5 * expect).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn scalar_report() {
        let r = stability_report(&garch(0.3, 0.2, 0.5), DEFAULT_DELTA).unwrap();
        assert!((r.spectral_radius - 0.7).abs() < 1e-12);
        assert!(r.is_stable);
        assert!((r.bound.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.m, 0.0);
        assert_eq!(r.delta, DEFAULT_DELTA);
    }

    #[test]
    fn explosive_garch_unstable() {
        let r = stability_report(&garch(0.3, 0.6, 0.5), DEFAULT_DELTA).unwrap();
        assert!((r.spectral_radius - 1.1).abs() < 1e-12);
        assert!(!r.is_stable);
        assert!(r.bound.is_none());
    }

    #[test]
    fn unit_root_is_unstable() {
        let r = stability_report(&garch(0.3, 0.5, 0.5), DEFAULT_DELTA).unwrap();
        assert!(!r.is_stable);
        assert!(r.bound.is_none());
    }
}
