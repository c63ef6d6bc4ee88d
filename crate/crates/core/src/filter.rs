//! Forward filtering of regime probabilities.
//!
//! The filter carries, for the next observation, the predicted regime
//! probabilities `alpha_j = p(z_t = j | y_1..y_{t-1})` and every regime's
//! conditional variance. The one-step predictive density is the normal
//! mixture `sum_j alpha_j N(0, H_j)`, and absorbing an observation reweights
//! the regimes by their component densities before pushing them through the
//! transition matrix. All density arithmetic is done in logs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelSpec, RegimeParams, TransitionMatrix};
use crate::util::{log_sum_exp, mean_square, normal_log_density, standard_normal_cdf};

pub const ALPHA_SUM_TOLERANCE: f64 = 1e-10;

/// Filter state before the next observation arrives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterState {
    /// Predicted regime probabilities for the next observation.
    pub alpha: Vec<f64>,
    /// Per-regime conditional variances for the next observation.
    pub h: Vec<f64>,
    /// Log predictive density of the most recently absorbed observation
    /// (0 for an initial state).
    pub log_lik_increment: f64,
}

impl FilterState {
    pub fn new(alpha: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if alpha.len() != h.len() {
            return Err(Error::DimensionMismatch {
                expected: alpha.len(),
                found: h.len(),
            });
        }
        let sum: f64 = alpha.iter().sum();
        if alpha.iter().any(|a| !(*a >= 0.0)) || (sum - 1.0).abs() > ALPHA_SUM_TOLERANCE {
            return Err(Error::InvalidParameter {
                name: "alpha".into(),
                value: sum,
                reason: "regime probabilities must be nonnegative and sum to 1",
            });
        }
        if let Some(&v) = h.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::NonPositiveVariance(v));
        }
        Ok(Self {
            alpha,
            h,
            log_lik_increment: 0.0,
        })
    }

    /// Stationary regime probabilities and the initial-variance rule, with
    /// `variance_target` as the fallback variance.
    pub fn initial(spec: &ModelSpec, variance_target: Option<f64>) -> Self {
        Self {
            alpha: spec.stationary_distribution(),
            h: spec.initial_variances(variance_target),
            log_lik_increment: 0.0,
        }
    }

    pub fn k(&self) -> usize {
        self.alpha.len()
    }

    pub fn predictive(&self) -> PredictiveDistribution {
        PredictiveDistribution {
            weights: self.alpha.clone(),
            sds: self.h.iter().map(|h| h.sqrt()).collect(),
        }
    }

    pub fn conditional_variance(&self) -> f64 {
        conditional_variance(self)
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            alpha: perm.iter().map(|&p| self.alpha[p]).collect(),
            h: perm.iter().map(|&p| self.h[p]).collect(),
            log_lik_increment: self.log_lik_increment,
        }
    }
}

/// `Var(y_t | past) = sum_j alpha_j H_j`.
pub fn conditional_variance(state: &FilterState) -> f64 {
    state.alpha.iter().zip(&state.h).map(|(a, h)| a * h).sum()
}

/// Result of absorbing one observation.
pub(crate) struct Absorbed {
    /// `p(z_t = j | y_1..y_t)`
    pub filtered: Vec<f64>,
    /// `p(z_{t+1} = j | y_1..y_t)`
    pub predicted: Vec<f64>,
    pub log_density: f64,
}

/// Reweights `alpha` by the component densities of `y` (variances `h`) and
/// propagates through `transition`. `None` when the mixture density is zero.
pub(crate) fn absorb(
    transition: &TransitionMatrix,
    alpha: &[f64],
    h: &[f64],
    y: f64,
    scratch: &mut Vec<f64>,
) -> Option<Absorbed> {
    let k = alpha.len();
    scratch.clear();
    scratch.extend(alpha.iter().zip(h).map(|(&a, &hj)| {
        if a > 0.0 {
            a.ln() + normal_log_density(y, hj)
        } else {
            f64::NEG_INFINITY
        }
    }));
    let lse = log_sum_exp(scratch);
    if !lse.is_finite() {
        return None;
    }
    let filtered: Vec<f64> = scratch.iter().map(|c| (c - lse).exp()).collect();
    let mut predicted = vec![0.0; k];
    for (m, &f) in filtered.iter().enumerate() {
        if f == 0.0 {
            continue;
        }
        for (j, p) in predicted.iter_mut().enumerate() {
            *p += f * transition.get(m, j);
        }
    }
    let s: f64 = predicted.iter().sum();
    predicted.iter_mut().for_each(|p| *p /= s);
    Some(Absorbed {
        filtered,
        predicted,
        log_density: lse,
    })
}

fn step_with(
    regimes: &[RegimeParams],
    transition: &TransitionMatrix,
    state: &FilterState,
    y: f64,
    index: usize,
    scratch: &mut Vec<f64>,
) -> Result<FilterState> {
    if !y.is_finite() {
        return Err(Error::NonFinite { index, value: y });
    }
    let absorbed = absorb(transition, &state.alpha, &state.h, y, scratch).ok_or(Error::DegenerateFilter { index })?;
    let h = regimes
        .iter()
        .zip(&state.h)
        .map(|(p, &hj)| p.variance_step(y, hj))
        .collect();
    Ok(FilterState {
        alpha: absorbed.predicted,
        h,
        log_lik_increment: absorbed.log_density,
    })
}

/// Absorbs `y_new`: advances every regime variance and the predicted regime
/// probabilities, recording the log predictive density of `y_new`.
pub fn filter_step(state: &FilterState, spec: &ModelSpec, y_new: f64) -> Result<FilterState> {
    check_dims(state, spec)?;
    let mut scratch = Vec::with_capacity(spec.k());
    step_with(spec.regimes(), spec.transition(), state, y_new, 0, &mut scratch)
}

fn check_dims(state: &FilterState, spec: &ModelSpec) -> Result<()> {
    if state.k() != spec.k() || state.h.len() != spec.k() {
        return Err(Error::DimensionMismatch {
            expected: spec.k(),
            found: state.k(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRun {
    /// `states[0]` is the initial state and `states[t]` the state after
    /// absorbing `data[t - 1]`; `states.len() == data.len() + 1`.
    pub states: Vec<FilterState>,
    pub log_likelihood: f64,
}

impl FilterRun {
    pub fn last(&self) -> &FilterState {
        self.states.last().expect("filter run always holds its initial state")
    }
}

/// Runs the filter over `data`. Without `init` the filter starts from the
/// stationary regime probabilities and the initial-variance rule with the
/// sample second moment of `data` as fallback target.
pub fn run_filter(spec: &ModelSpec, data: &[f64], init: Option<FilterState>) -> Result<FilterRun> {
    let init = match init {
        Some(s) => {
            check_dims(&s, spec)?;
            s
        }
        None => FilterState::initial(spec, default_target(data)),
    };
    let mut states = Vec::with_capacity(data.len() + 1);
    states.push(init);
    let mut total = 0.0;
    let mut scratch = Vec::with_capacity(spec.k());
    for (t, &y) in data.iter().enumerate() {
        let next = step_with(
            spec.regimes(),
            spec.transition(),
            states.last().unwrap(),
            y,
            t,
            &mut scratch,
        )?;
        total += next.log_lik_increment;
        states.push(next);
    }
    Ok(FilterRun {
        states,
        log_likelihood: total,
    })
}

/// Total log-likelihood `sum_t log f(y_t | past)` with the default
/// initialisation, without keeping the intermediate states.
pub fn log_likelihood(spec: &ModelSpec, data: &[f64]) -> Result<f64> {
    let mut state = FilterState::initial(spec, default_target(data));
    let mut total = 0.0;
    let mut scratch = Vec::with_capacity(spec.k());
    for (t, &y) in data.iter().enumerate() {
        state = step_with(spec.regimes(), spec.transition(), &state, y, t, &mut scratch)?;
        total += state.log_lik_increment;
    }
    Ok(total)
}

pub(crate) fn default_target(data: &[f64]) -> Option<f64> {
    if data.is_empty() {
        None
    } else {
        Some(mean_square(data))
    }
}

/// Filtered probabilities `p(z_t = j | y_1..y_t)` for every t, given
/// precomputed variance paths (`variances[j][t]`). Starts from the
/// transition matrix's initial distribution.
pub(crate) fn filtered_probabilities(
    transition: &TransitionMatrix,
    variances: &[Vec<f64>],
    data: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let k = transition.k();
    let mut alpha = transition.initial_distribution();
    let mut out = Vec::with_capacity(data.len());
    let mut h = vec![0.0; k];
    let mut scratch = Vec::with_capacity(k);
    for (t, &y) in data.iter().enumerate() {
        for (hj, path) in h.iter_mut().zip(variances) {
            *hj = path[t];
        }
        let a = absorb(transition, &alpha, &h, y, &mut scratch).ok_or(Error::DegenerateFilter { index: t })?;
        alpha = a.predicted;
        out.push(a.filtered);
    }
    Ok(out)
}

/// One-step predictive distribution: a zero-mean normal mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveDistribution {
    pub weights: Vec<f64>,
    pub sds: Vec<f64>,
}

pub const QUANTILE_BRACKET_SDS: f64 = 12.0;
pub const QUANTILE_BRACKET_EXPANSIONS: usize = 4;

impl PredictiveDistribution {
    pub fn new(weights: Vec<f64>, sds: Vec<f64>) -> Result<Self> {
        if weights.len() != sds.len() || weights.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                found: sds.len(),
            });
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > ALPHA_SUM_TOLERANCE {
            return Err(Error::InvalidParameter {
                name: "weights".into(),
                value: sum,
                reason: "mixture weights must be a probability vector",
            });
        }
        if let Some(&s) = sds.iter().find(|s| !(**s > 0.0)) {
            return Err(Error::NonPositiveVariance(s));
        }
        Ok(Self { weights, sds })
    }

    pub fn pdf(&self, y: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.sds)
            .map(|(w, s)| w * normal_log_density(y, s * s).exp())
            .sum()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.sds)
            .map(|(w, s)| w * standard_normal_cdf(y / s))
            .sum()
    }

    pub fn variance(&self) -> f64 {
        self.weights.iter().zip(&self.sds).map(|(w, s)| w * s * s).sum()
    }

    pub fn max_sd(&self) -> f64 {
        self.sds.iter().copied().fold(0.0, f64::max)
    }

    pub fn quantile(&self, prob: f64) -> Result<f64> {
        predictive_quantile(self, prob)
    }
}

/// Solves `cdf(q) = prob` by bisection on `[-12 s, 12 s]` with `s` the
/// largest component sd, doubling the bracket up to four times.
pub fn predictive_quantile(dist: &PredictiveDistribution, prob: f64) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::ProbabilityOutOfRange(prob));
    }
    let mut half_width = QUANTILE_BRACKET_SDS * dist.max_sd();
    let mut expansions = 0;
    while (dist.cdf(-half_width) > prob || dist.cdf(half_width) < prob) && expansions < QUANTILE_BRACKET_EXPANSIONS {
        half_width *= 2.0;
        expansions += 1;
    }
    let (mut lo, mut hi) = (-half_width, half_width);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dist.cdf(mid) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
