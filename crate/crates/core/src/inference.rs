//! Bayesian estimation by a three-block Gibbs sampler.
//!
//! Each sweep draws, in order,
//!
//! 1. the regime path by forward filtering and backward sampling,
//! 2. the staying probabilities from their conjugate beta posteriors
//!    (with a Metropolis correction for the stationary start),
//! 3. every scalar of `theta` by griddy Gibbs against the complete-data
//!    likelihood `prod_t N(y_t; 0, H[z_t, t])` under uniform priors.
//!
//! Regime variance paths depend only on the data and that regime's
//! parameters, so a draw for regime `k` only touches the terms with `z_t = k`.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::filtered_probabilities;
use crate::model::{ModelSpec, RegimeParams, TransitionMatrix, Variant};
use crate::util::{draw_categorical, mean_square, normal_log_density, seeded_rng};

/// Uniform prior support. Either end may be open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub lower_open: bool,
    #[serde(default)]
    pub upper_open: bool,
}

impl Interval {
    pub fn closed(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            lower_open: false,
            upper_open: false,
        }
    }

    pub fn open_lower(lower: f64, upper: f64) -> Self {
        Self {
            lower_open: true,
            ..Self::closed(lower, upper)
        }
    }

    pub fn open_upper(lower: f64, upper: f64) -> Self {
        Self {
            upper_open: true,
            ..Self::closed(lower, upper)
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lower_open {
            x > self.lower
        } else {
            x >= self.lower
        };
        let below = if self.upper_open {
            x < self.upper
        } else {
            x <= self.upper
        };
        above && below
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// `g` equally spaced points from `lower` to `upper`.
    pub fn grid(&self, g: usize) -> Vec<f64> {
        let step = self.width() / (g - 1) as f64;
        (0..g)
            .map(|i| {
                if i == g - 1 {
                    self.upper
                } else {
                    self.lower + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamPrior {
    Uniform(Interval),
    Fixed(f64),
}

impl ParamPrior {
    pub fn initial_value(&self) -> f64 {
        match self {
            ParamPrior::Uniform(i) => i.midpoint(),
            ParamPrior::Fixed(v) => *v,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match self {
            ParamPrior::Uniform(i) => i.contains(x),
            ParamPrior::Fixed(v) => x == *v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimePrior {
    pub a0: ParamPrior,
    pub a1: ParamPrior,
    pub a2: ParamPrior,
    pub b: ParamPrior,
    pub gamma: ParamPrior,
}

impl RegimePrior {
    pub fn as_array(&self) -> [ParamPrior; 5] {
        [self.a0, self.a1, self.a2, self.b, self.gamma]
    }
}

impl Default for RegimePrior {
    fn default() -> Self {
        Self {
            a0: ParamPrior::Uniform(Interval::open_lower(0.0, 5.0)),
            a1: ParamPrior::Uniform(Interval::closed(0.0, 2.0)),
            a2: ParamPrior::Uniform(Interval::closed(0.0, 2.0)),
            b: ParamPrior::Uniform(Interval::open_upper(0.0, 1.0)),
            gamma: ParamPrior::Uniform(Interval::open_lower(0.0, 10.0)),
        }
    }
}

/// Beta prior on a staying probability: `eta_ii ~ Beta(stay, leave)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    pub stay: f64,
    pub leave: f64,
}

impl Default for BetaPrior {
    fn default() -> Self {
        Self { stay: 8.0, leave: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub regimes: Vec<RegimePrior>,
    pub transitions: Vec<BetaPrior>,
    /// Ties `a2` to `a1` (symmetric GARCH regimes, where the two are not
    /// separately identified).
    #[serde(default)]
    pub symmetric_shocks: bool,
    /// Enforces `a1 >= a2` by truncating the `a2` grid at the current `a1`.
    #[serde(default)]
    pub leverage: bool,
}

impl PriorSpec {
    /// Default priors for a model variant with `k` regimes.
    ///
    /// Symmetric variants fix `gamma = 0` and tie `a2` to `a1`, so `a1` is
    /// the ordinary ARCH coefficient.
    pub fn for_variant(variant: Variant, k: usize) -> Self {
        let mut regime = RegimePrior::default();
        let symmetric = !variant.has_smooth_transition();
        if symmetric {
            regime.gamma = ParamPrior::Fixed(0.0);
        }
        Self {
            regimes: vec![regime; k],
            transitions: vec![BetaPrior::default(); k],
            symmetric_shocks: symmetric,
            leverage: false,
        }
    }

    pub fn k(&self) -> usize {
        self.regimes.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.regimes.is_empty() {
            return Err(Error::InvalidPrior("no regimes".into()));
        }
        if self.transitions.len() != self.regimes.len() {
            return Err(Error::InvalidPrior(format!(
                "{} regime priors but {} transition priors",
                self.regimes.len(),
                self.transitions.len()
            )));
        }
        for (j, r) in self.regimes.iter().enumerate() {
            for (name, prior) in RegimeParams::NAMES.iter().zip(r.as_array()) {
                let strict = *name == "a0";
                match prior {
                    ParamPrior::Uniform(i) => {
                        if !(i.lower < i.upper) || !i.lower.is_finite() || !i.upper.is_finite() {
                            return Err(Error::InvalidPrior(format!(
                                "{name} of regime {}: need lower < upper, got [{}, {}]",
                                j + 1,
                                i.lower,
                                i.upper
                            )));
                        }
                        let positive_ok = if strict || (*name == "gamma" && !self.symmetric_shocks) {
                            i.lower > 0.0 || (i.lower == 0.0 && i.lower_open)
                        } else {
                            i.lower >= 0.0
                        };
                        if !positive_ok {
                            return Err(Error::InvalidPrior(format!(
                                "{name} of regime {}: lower bound {} violates positivity",
                                j + 1,
                                i.lower
                            )));
                        }
                    }
                    ParamPrior::Fixed(v) => {
                        let ok = if strict { v > 0.0 } else { v >= 0.0 };
                        if !ok || !v.is_finite() {
                            return Err(Error::InvalidPrior(format!(
                                "{name} of regime {} fixed at invalid value {v}",
                                j + 1
                            )));
                        }
                    }
                }
            }
        }
        for (j, t) in self.transitions.iter().enumerate() {
            if !(t.stay > 0.0 && t.leave > 0.0) {
                return Err(Error::InvalidPrior(format!(
                    "beta hyperparameters of regime {} must be > 0",
                    j + 1
                )));
            }
        }
        Ok(())
    }

    /// Whether `regimes` lies in the prior support.
    pub fn contains(&self, regimes: &[RegimeParams]) -> bool {
        regimes.len() == self.k()
            && regimes.iter().zip(&self.regimes).all(|(r, p)| {
                r.as_array()
                    .iter()
                    .zip(p.as_array())
                    .enumerate()
                    .all(|(idx, (&v, prior))| {
                        if idx == 2 && self.symmetric_shocks {
                            v == r.a1
                        } else {
                            prior.contains(v)
                        }
                    })
                    && (!self.leverage || r.a1 >= r.a2)
            })
    }

    fn initial_regimes(&self) -> Vec<RegimeParams> {
        self.regimes
            .iter()
            .map(|p| {
                let mut r = RegimeParams::from_array(p.as_array().map(|q| q.initial_value()));
                if self.symmetric_shocks {
                    r.a2 = r.a1;
                }
                if self.leverage && r.a2 > r.a1 {
                    r.a2 = r.a1;
                }
                r
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub grid_size: usize,
    pub seed: u64,
    pub thinning: usize,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            burn_in: 5_000,
            grid_size: 33,
            seed: 0,
            thinning: 1,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidConfig(format!(
                "burn-in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.grid_size < 3 {
            return Err(Error::InvalidConfig(format!(
                "grid size must be at least 3, got {}",
                self.grid_size
            )));
        }
        if self.thinning == 0 {
            return Err(Error::InvalidConfig("thinning must be at least 1".into()));
        }
        Ok(())
    }

    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thinning
    }
}

/// Current values of all three blocks plus the cached variance paths.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsState {
    pub regimes: Vec<RegimeParams>,
    pub transition: TransitionMatrix,
    /// Zero-based regime per observation.
    pub states: Vec<usize>,
    /// `variances[j][t]`, kept consistent with `regimes` and the data.
    pub variances: Vec<Vec<f64>>,
    /// Fallback initial variance (sample second moment of the data).
    pub variance_target: f64,
}

impl GibbsState {
    pub fn new(
        regimes: Vec<RegimeParams>,
        transition: TransitionMatrix,
        states: Vec<usize>,
        data: &[f64],
    ) -> Result<Self> {
        if transition.k() != regimes.len() {
            return Err(Error::DimensionMismatch {
                expected: regimes.len(),
                found: transition.k(),
            });
        }
        if states.len() != data.len() {
            return Err(Error::LengthMismatch {
                left: states.len(),
                right: data.len(),
            });
        }
        if let Some(&z) = states.iter().find(|&&z| z >= regimes.len()) {
            return Err(Error::InvalidParameter {
                name: "state".into(),
                value: z as f64,
                reason: "regime index out of range",
            });
        }
        for r in &regimes {
            r.validate()?;
        }
        let variance_target = if data.is_empty() { 1.0 } else { mean_square(data) };
        let mut s = Self {
            variances: Vec::new(),
            regimes,
            transition,
            states,
            variance_target,
        };
        s.refresh_variances(data);
        Ok(s)
    }

    pub fn k(&self) -> usize {
        self.regimes.len()
    }

    pub fn refresh_variances(&mut self, data: &[f64]) {
        self.variances = self
            .regimes
            .iter()
            .map(|r| r.variance_path(data, Some(self.variance_target)))
            .collect();
    }

    fn refresh_regime(&mut self, k: usize, data: &[f64]) {
        self.variances[k] = self.regimes[k].variance_path(data, Some(self.variance_target));
    }

    /// `log f(Y | theta, Z)` from the cached variance paths.
    pub fn conditional_log_likelihood(&self, data: &[f64]) -> f64 {
        data.iter()
            .zip(&self.states)
            .enumerate()
            .map(|(t, (&y, &z))| normal_log_density(y, self.variances[z][t]))
            .sum()
    }
}

/// `log f(Y | theta, Z) = sum_t log N(y_t; 0, H[z_t, t])`.
pub fn conditional_likelihood(theta: &[RegimeParams], states: &[usize], data: &[f64]) -> Result<f64> {
    if states.len() != data.len() {
        return Err(Error::LengthMismatch {
            left: states.len(),
            right: data.len(),
        });
    }
    let target = if data.is_empty() { None } else { Some(mean_square(data)) };
    let mut paths = Vec::with_capacity(theta.len());
    for r in theta {
        r.validate()?;
        paths.push(r.variance_path(data, target));
    }
    let mut total = 0.0;
    for (t, (&y, &z)) in data.iter().zip(states).enumerate() {
        let path = paths.get(z).ok_or(Error::DimensionMismatch {
            expected: theta.len(),
            found: z + 1,
        })?;
        let h = path[t];
        if !(h > 0.0) {
            return Err(Error::NonPositiveVariance(h));
        }
        total += normal_log_density(y, h);
    }
    Ok(total)
}

/// Forward filter, backward sample: draws a regime path from
/// `p(Z | theta, eta, Y)`.
pub fn sample_states<R: Rng + ?Sized>(state: &GibbsState, data: &[f64], rng: &mut R) -> Result<Vec<usize>> {
    let n = data.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let filtered = filtered_probabilities(&state.transition, &state.variances, data)?;
    let mut path = vec![0; n];
    path[n - 1] = draw_categorical(&filtered[n - 1], rng).ok_or(Error::DegenerateFilter { index: n - 1 })?;
    let mut weights = vec![0.0; state.k()];
    for t in (0..n - 1).rev() {
        let next = path[t + 1];
        for (j, w) in weights.iter_mut().enumerate() {
            *w = filtered[t][j] * state.transition.get(j, next);
        }
        path[t] = draw_categorical(&weights, rng).ok_or(Error::DegenerateFilter { index: t })?;
    }
    Ok(path)
}

/// Transition counts `n[i][j]` along a regime path.
pub fn transition_counts(states: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut counts = vec![vec![0; k]; k];
    for w in states.windows(2) {
        counts[w[0]][w[1]] += 1;
    }
    counts
}

/// Draws the staying probabilities from their beta posteriors,
/// `eta_ii ~ Beta(stay_i + n_ii, leave_i + n_i,other)`.
pub fn sample_transitions<R: Rng + ?Sized>(
    states: &[usize],
    priors: &PriorSpec,
    rng: &mut R,
) -> Result<TransitionMatrix> {
    match priors.k() {
        1 => Ok(TransitionMatrix::single()),
        2 => {
            let n = transition_counts(states, 2);
            let mut stay = [0.0; 2];
            for i in 0..2 {
                let p = priors.transitions[i];
                let beta = Beta::new(p.stay + n[i][i] as f64, p.leave + n[i][1 - i] as f64)
                    .map_err(|e| Error::InvalidPrior(e.to_string()))?;
                stay[i] = beta.sample(rng);
            }
            TransitionMatrix::stochastic(vec![vec![stay[0], 1.0 - stay[0]], vec![1.0 - stay[1], stay[1]]])
        }
        k => Err(Error::InvalidConfig(format!(
            "transition sampling is implemented for one or two regimes, got {k}"
        ))),
    }
}

/// Transition block of a sweep.
///
/// The beta draw of [`sample_transitions`] ignores that the first regime is
/// drawn from the chain's stationary law, which itself depends on the
/// transition matrix. It is used here as an independence proposal, accepted
/// with probability `min(1, pi'(z_0) / pi(z_0))`, so the block leaves the
/// joint posterior invariant.
pub fn update_transitions<R: Rng + ?Sized>(
    state: &GibbsState,
    priors: &PriorSpec,
    rng: &mut R,
) -> Result<TransitionMatrix> {
    let proposal = sample_transitions(&state.states, priors, rng)?;
    let Some(&first) = state.states.first() else {
        return Ok(proposal);
    };
    if priors.k() == 1 {
        return Ok(proposal);
    }
    let new = proposal.initial_distribution()[first];
    let old = state.transition.initial_distribution()[first];
    if old <= 0.0 || rng.random::<f64>() * old < new {
        Ok(proposal)
    } else {
        Ok(state.transition.clone())
    }
}

fn evaluate_grid<F>(log_kernel: &F, grid: &[f64], interval: &Interval) -> Vec<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    let eval = |&x: &f64| {
        if !interval.contains(x) {
            return f64::NEG_INFINITY;
        }
        let v = log_kernel(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if grid.len() >= 8 {
            return grid.par_iter().map(eval).collect();
        }
    }
    grid.iter().map(eval).collect()
}

/// One griddy-Gibbs draw from the density proportional to `exp(log_kernel)`
/// on `interval`.
///
/// The kernel is tabulated on `g` equally spaced points, integrated by the
/// trapezoid rule, and the cumulative integral is inverted at `u ~ U(0, Phi_G)`
/// by linear interpolation. Grid points outside an open end get zero mass.
pub fn griddy_gibbs_draw<F, R>(log_kernel: F, interval: &Interval, g: usize, rng: &mut R) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
    R: Rng + ?Sized,
{
    griddy_draw_named(&log_kernel, interval, g, rng, "parameter")
}

fn griddy_draw_named<F, R>(log_kernel: &F, interval: &Interval, g: usize, rng: &mut R, name: &str) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
    R: Rng + ?Sized,
{
    if g < 3 {
        return Err(Error::InvalidConfig(format!("grid size must be at least 3, got {g}")));
    }
    if !(interval.width() > 0.0) {
        return Ok(interval.lower);
    }
    let grid = interval.grid(g);
    let log_k = evaluate_grid(log_kernel, &grid, interval);
    let max = log_k.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::DegenerateKernel(name.to_string()));
    }
    if max == f64::INFINITY {
        // point mass: pick uniformly among the infinite grid points
        let spikes: Vec<f64> = grid
            .iter()
            .zip(&log_k)
            .filter(|(_, v)| **v == f64::INFINITY)
            .map(|(x, _)| *x)
            .collect();
        return Ok(spikes[rng.random_range(0..spikes.len())]);
    }
    let k: Vec<f64> = log_k.iter().map(|v| (v - max).exp()).collect();
    let mut cumulative = Vec::with_capacity(g);
    cumulative.push(0.0);
    for i in 1..g {
        let step = grid[i] - grid[i - 1];
        cumulative.push(cumulative[i - 1] + 0.5 * (k[i - 1] + k[i]) * step);
    }
    let total = cumulative[g - 1];
    if !(total > 0.0) {
        return Err(Error::DegenerateKernel(name.to_string()));
    }
    let u = total * (1.0 - rng.random::<f64>());
    let cell = cumulative[1..].partition_point(|&c| c < u).min(g - 2);
    let (c0, c1) = (cumulative[cell], cumulative[cell + 1]);
    let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
    let x = grid[cell] + frac * (grid[cell + 1] - grid[cell]);
    Ok(x.clamp(interval.lower, interval.upper))
}

/// Conditional log-likelihood of regime `k`'s parameters: the terms of
/// `log f(Y | theta, Z)` with `z_t = k`. `weights` caches the logistic
/// weights when `gamma` is not the parameter being varied.
fn regime_kernel(
    params: &RegimeParams,
    k: usize,
    data: &[f64],
    states: &[usize],
    weights: Option<&[f64]>,
    target: f64,
) -> f64 {
    if params.validate().is_err() {
        return f64::NEG_INFINITY;
    }
    let mut h = params.initial_variance(Some(target));
    let mut total = 0.0;
    for (t, (&y, &z)) in data.iter().zip(states).enumerate() {
        if z == k {
            total += -0.5 * (h.ln() + y * y / h);
        }
        let w = match weights {
            Some(w) => w[t],
            None => params.weight(y),
        };
        h = params.a0 + y * y * (params.a1 * (1.0 - w) + params.a2 * w) + params.b * h;
    }
    total
}

fn logistic_weights(params: &RegimeParams, data: &[f64]) -> Vec<f64> {
    data.iter().map(|&y| params.weight(y)).collect()
}

/// Updates every free scalar of `theta` in the fixed order
/// `a0_1, a1_1, a2_1, b_1, gamma_1, a0_2, ...` by griddy Gibbs, holding all
/// other values at their latest draws. Refreshes the cached variance paths.
pub fn sample_theta<R: Rng + ?Sized>(
    state: &mut GibbsState,
    data: &[f64],
    priors: &PriorSpec,
    grid_size: usize,
    rng: &mut R,
) -> Result<()> {
    if priors.k() != state.k() {
        return Err(Error::DimensionMismatch {
            expected: state.k(),
            found: priors.k(),
        });
    }
    let target = state.variance_target;
    for k in 0..state.k() {
        let prior = priors.regimes[k].as_array();
        let mut weights = logistic_weights(&state.regimes[k], data);
        for (idx, name) in RegimeParams::NAMES.iter().enumerate() {
            if idx == 2 && priors.symmetric_shocks {
                state.regimes[k].a2 = state.regimes[k].a1;
                continue;
            }
            let mut interval = match prior[idx] {
                ParamPrior::Fixed(v) => {
                    state.regimes[k].set(idx, v);
                    if idx == 4 {
                        weights = logistic_weights(&state.regimes[k], data);
                    }
                    continue;
                }
                ParamPrior::Uniform(i) => i,
            };
            if idx == 2 && priors.leverage && interval.upper > state.regimes[k].a1 {
                interval.upper = state.regimes[k].a1.max(interval.lower);
                interval.upper_open = false;
            }
            let current = state.regimes[k];
            let states = &state.states;
            let cached = (idx != 4).then_some(weights.as_slice());
            let symmetric = priors.symmetric_shocks;
            let kernel = |x: f64| {
                let mut p = current;
                p.set(idx, x);
                if symmetric && idx == 1 {
                    p.a2 = x;
                }
                regime_kernel(&p, k, data, states, cached, target)
            };
            let label = format!("{name}_{}", k + 1);
            let draw = griddy_draw_named(&kernel, &interval, grid_size, rng, &label)?;
            state.regimes[k].set(idx, draw);
            if symmetric && idx == 1 {
                state.regimes[k].a2 = draw;
            }
            if idx == 4 {
                weights = logistic_weights(&state.regimes[k], data);
            }
        }
        state.refresh_regime(k, data);
    }
    Ok(())
}

/// Orders regimes by increasing `a0`. Returns the relabeled parameters and
/// transition matrix with the permutation (new regime `i` = old `perm[i]`).
pub fn identify(
    regimes: &[RegimeParams],
    transition: &TransitionMatrix,
) -> (Vec<RegimeParams>, TransitionMatrix, Vec<usize>) {
    let mut perm: Vec<usize> = (0..regimes.len()).collect();
    perm.sort_by(|&i, &j| regimes[i].a0.total_cmp(&regimes[j].a0));
    let relabeled = perm.iter().map(|&p| regimes[p]).collect();
    (relabeled, transition.permuted(&perm), perm)
}

/// Retained draws of a Gibbs run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    pub k: usize,
    /// One row per retained sweep: `[a0_1, a1_1, a2_1, b_1, gamma_1, a0_2, ...]`.
    pub theta: Vec<Vec<f64>>,
    /// Staying probabilities `eta_ii` per retained sweep.
    pub eta: Vec<Vec<f64>>,
    /// `log f(Y | theta, Z)` per retained sweep.
    pub log_likelihood: Vec<f64>,
    /// `state_frequencies[t][j]`: share of retained sweeps with `z_t = j`.
    pub state_frequencies: Vec<Vec<f64>>,
    /// Whether each retained draw needed relabeling.
    pub relabeled: Vec<bool>,
    pub failed_sweeps: usize,
    pub config: McmcConfig,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..=self.k)
            .flat_map(|j| RegimeParams::NAMES.iter().map(move |n| format!("{n}_{j}")))
            .collect();
        if self.k > 1 {
            names.extend((1..=self.k).map(|j| format!("eta_{j}{j}")));
        }
        names
    }

    /// Row `i` of the parameter table, aligned with [`Self::param_names`].
    pub fn row(&self, i: usize) -> Vec<f64> {
        let mut row = self.theta[i].clone();
        if self.k > 1 {
            row.extend_from_slice(&self.eta[i]);
        }
        row
    }

    pub fn regimes_at(&self, i: usize) -> Vec<RegimeParams> {
        self.theta[i]
            .chunks(5)
            .map(|c| RegimeParams::from_array([c[0], c[1], c[2], c[3], c[4]]))
            .collect()
    }

    fn transition_from_diag(&self, diag: &[f64]) -> Result<TransitionMatrix> {
        match self.k {
            1 => Ok(TransitionMatrix::single()),
            2 => TransitionMatrix::two_state(diag[0], diag[1]),
            k => Err(Error::InvalidConfig(format!("unsupported regime count {k}"))),
        }
    }

    pub fn spec_at(&self, i: usize) -> Result<ModelSpec> {
        ModelSpec::new(self.regimes_at(i), self.transition_from_diag(&self.eta[i])?)
    }

    /// Model at the posterior means of all parameters.
    pub fn posterior_mean_spec(&self) -> Result<ModelSpec> {
        if self.is_empty() {
            return Err(Error::InsufficientData { needed: 1, found: 0 });
        }
        let n = self.len() as f64;
        let width = self.theta[0].len();
        let mut theta = vec![0.0; width];
        for row in &self.theta {
            for (m, v) in theta.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut eta = vec![0.0; self.k];
        for row in &self.eta {
            for (m, v) in eta.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let regimes = theta
            .chunks(5)
            .map(|c| RegimeParams::new(c[0], c[1], c[2], c[3], c[4]))
            .collect::<Result<Vec<_>>>()?;
        ModelSpec::new(regimes, self.transition_from_diag(&eta)?)
    }
}

/// Runs the three-block Gibbs sampler on `data` with `priors.k()` regimes.
pub fn run_gibbs(data: &[f64], priors: &PriorSpec, config: &McmcConfig) -> Result<PosteriorDraws> {
    const MIN_OBSERVATIONS: usize = 50;
    priors.validate()?;
    config.validate()?;
    if data.len() < MIN_OBSERVATIONS {
        return Err(Error::InsufficientData {
            needed: MIN_OBSERVATIONS,
            found: data.len(),
        });
    }
    if let Some((index, &value)) = data.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    let k = priors.k();
    if k > 2 {
        return Err(Error::InvalidConfig(format!(
            "the Gibbs sampler supports one or two regimes, got {k}"
        )));
    }

    let mut rng = seeded_rng(config.seed);
    let transition = if k == 1 {
        TransitionMatrix::single()
    } else {
        TransitionMatrix::stochastic(vec![vec![0.9, 0.1], vec![0.1, 0.9]])?
    };
    let mut state = GibbsState::new(priors.initial_regimes(), transition, vec![0; data.len()], data)?;
    state.states = sample_states(&state, data, &mut rng)?;

    let retained = config.retained();
    let mut draws = PosteriorDraws {
        k,
        theta: Vec::with_capacity(retained),
        eta: Vec::with_capacity(retained),
        log_likelihood: Vec::with_capacity(retained),
        state_frequencies: vec![vec![0.0; k]; data.len()],
        relabeled: Vec::with_capacity(retained),
        failed_sweeps: 0,
        config: config.clone(),
    };
    let max_failures = config.iterations / 100;

    for sweep in 0..config.iterations {
        if let Err(e) = gibbs_sweep(&mut state, data, priors, config.grid_size, &mut rng) {
            draws.failed_sweeps += 1;
            state.refresh_variances(data);
            if draws.failed_sweeps > max_failures {
                return Err(Error::SamplerFailure {
                    failures: draws.failed_sweeps,
                    sweeps: sweep + 1,
                    last: e.to_string(),
                });
            }
            continue;
        }
        if sweep < config.burn_in || !(sweep - config.burn_in + 1).is_multiple_of(config.thinning) {
            continue;
        }
        let (regimes, transition, perm) = identify(&state.regimes, &state.transition);
        let mut inverse = vec![0; k];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        draws.relabeled.push(perm.iter().enumerate().any(|(i, &p)| i != p));
        draws.theta.push(regimes.iter().flat_map(|r| r.as_array()).collect());
        draws.eta.push(transition.diagonal());
        draws.log_likelihood.push(state.conditional_log_likelihood(data));
        for (freq, &z) in draws.state_frequencies.iter_mut().zip(&state.states) {
            freq[inverse[z]] += 1.0;
        }
    }
    let n = draws.len().max(1) as f64;
    for freq in &mut draws.state_frequencies {
        freq.iter_mut().for_each(|f| *f /= n);
    }
    Ok(draws)
}

fn gibbs_sweep<R: Rng + ?Sized>(
    state: &mut GibbsState,
    data: &[f64],
    priors: &PriorSpec,
    grid_size: usize,
    rng: &mut R,
) -> Result<()> {
    state.states = sample_states(state, data, rng)?;
    state.transition = update_transitions(state, priors, rng)?;
    sample_theta(state, data, priors, grid_size, rng)
}

/// Convenience wrapper: default priors for `variant`, regimes from the variant.
pub fn fit(data: &[f64], variant: Variant, config: &McmcConfig) -> Result<PosteriorDraws> {
    run_gibbs(
        data,
        &PriorSpec::for_variant(variant, variant.default_regimes()),
        config,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub draws: usize,
    pub params: Vec<ParamSummary>,
    /// Share of retained draws that already satisfied the regime ordering.
    pub identification_rate: f64,
}

/// Type-7 (linear interpolation) sample quantile of sorted values.
fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean, sd (divisor n - 1) and 5/50/95% quantiles of `values`.
pub fn summarize(name: &str, values: &[f64]) -> ParamSummary {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let constant = values.iter().all(|&v| v == values[0]);
    let sd = if n > 1 && !constant {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    ParamSummary {
        name: name.to_string(),
        mean,
        sd,
        q05: sorted_quantile(&sorted, 0.05),
        q50: sorted_quantile(&sorted, 0.5),
        q95: sorted_quantile(&sorted, 0.95),
    }
}

pub fn posterior_summary(draws: &PosteriorDraws) -> Result<PosteriorSummary> {
    if draws.is_empty() {
        return Err(Error::InsufficientData { needed: 1, found: 0 });
    }
    let names = draws.param_names();
    let rows: Vec<Vec<f64>> = (0..draws.len()).map(|i| draws.row(i)).collect();
    let params = names
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let col: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            summarize(name, &col)
        })
        .collect();
    let kept = draws.relabeled.iter().filter(|r| !**r).count();
    Ok(PosteriorSummary {
        draws: draws.len(),
        params,
        identification_rate: kept as f64 / draws.relabeled.len().max(1) as f64,
    })
}
