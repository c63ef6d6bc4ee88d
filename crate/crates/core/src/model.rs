//! The MS-STGARCH model family.
//!
//! Returns follow `y_t = eps_t * sqrt(H[z_t, t])` with a hidden Markov chain
//! `z_t` and one variance recursion per regime,
//!
//! ```text
//! H[j, t] = a0_j + y_{t-1}^2 * d_j(y_{t-1}) + b_j * H[j, t-1]
//! d_j(y)  = a1_j * (1 - w_j(y)) + a2_j * w_j(y)
//! w_j(y)  = 1 / (1 + exp(-gamma_j * y))
//! ```
//!
//! Every regime's variance runs on the observed returns regardless of which
//! regime is active, so the full variance paths are deterministic given the
//! data. `gamma = 0` pins the weight at 1/2 (symmetric GARCH), and a single
//! regime reduces the model to ST-GARCH or GARCH.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::util::{draw_categorical, seeded_rng};

/// Row-sum tolerance for transition matrices.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// Denominator floor for using the nested-GARCH fixed point as the initial
/// variance.
pub const FIXED_POINT_MIN_DENOMINATOR: f64 = 0.05;

/// Default number of discarded steps at the start of a simulation.
pub const DEFAULT_BURN_IN: usize = 500;

/// Logistic weight of the previous return. Exactly 1/2 when `gamma == 0`.
#[inline]
pub fn logistic_weight(gamma: f64, y_prev: f64) -> f64 {
    if gamma == 0.0 {
        return 0.5;
    }
    1.0 / (1.0 + (-gamma * y_prev).exp())
}

/// Coefficient on the squared previous return: a convex combination of the
/// negative-shock (`a1`) and positive-shock (`a2`) coefficients.
#[inline]
pub fn shock_coefficient(params: &RegimeParams, y_prev: f64) -> f64 {
    let w = logistic_weight(params.gamma, y_prev);
    params.a1 * (1.0 - w) + params.a2 * w
}

/// One step of a regime's variance recursion.
pub fn regime_variance_step(params: &RegimeParams, y_prev: f64, h_prev: f64) -> Result<f64> {
    if !(h_prev > 0.0) {
        return Err(Error::NonPositiveVariance(h_prev));
    }
    Ok(params.variance_step(y_prev, h_prev))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    pub gamma: f64,
}

impl RegimeParams {
    pub const NAMES: [&'static str; 5] = ["a0", "a1", "a2", "b", "gamma"];

    pub fn new(a0: f64, a1: f64, a2: f64, b: f64, gamma: f64) -> Result<Self> {
        let p = Self { a0, a1, a2, b, gamma };
        p.validate()?;
        Ok(p)
    }

    /// Symmetric GARCH(1,1) regime: `a1 = a2 = alpha`, `gamma = 0`.
    pub fn garch(a0: f64, alpha: f64, b: f64) -> Result<Self> {
        Self::new(a0, alpha, alpha, b, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, value: f64, reason| {
            Err(Error::InvalidParameter {
                name: name.to_string(),
                value,
                reason,
            })
        };
        if !(self.a0 > 0.0) || !self.a0.is_finite() {
            return bad("a0", self.a0, "must be finite and > 0");
        }
        for (name, v) in [("a1", self.a1), ("a2", self.a2), ("b", self.b), ("gamma", self.gamma)] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(name, v, "must be finite and >= 0");
            }
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.a0, self.a1, self.a2, self.b, self.gamma]
    }

    pub fn from_array(v: [f64; 5]) -> Self {
        Self {
            a0: v[0],
            a1: v[1],
            a2: v[2],
            b: v[3],
            gamma: v[4],
        }
    }

    pub fn get(&self, index: usize) -> f64 {
        self.as_array()[index]
    }

    pub fn set(&mut self, index: usize, value: f64) {
        match index {
            0 => self.a0 = value,
            1 => self.a1 = value,
            2 => self.a2 = value,
            3 => self.b = value,
            4 => self.gamma = value,
            _ => panic!("regime parameter index {index} out of range"),
        }
    }

    #[inline]
    pub fn weight(&self, y_prev: f64) -> f64 {
        logistic_weight(self.gamma, y_prev)
    }

    #[inline]
    pub fn shock_coefficient(&self, y_prev: f64) -> f64 {
        shock_coefficient(self, y_prev)
    }

    /// Unchecked variance step; callers guarantee `h_prev > 0`.
    #[inline]
    pub fn variance_step(&self, y_prev: f64, h_prev: f64) -> f64 {
        self.a0 + y_prev * y_prev * self.shock_coefficient(y_prev) + self.b * h_prev
    }

    /// Persistence of the nested symmetric GARCH: `(a1 + a2) / 2 + b`.
    pub fn symmetric_persistence(&self) -> f64 {
        0.5 * (self.a1 + self.a2) + self.b
    }

    /// Variance used for the first observation.
    ///
    /// The nested-GARCH fixed point `a0 / (1 - (a1 + a2)/2 - b)` when that
    /// denominator exceeds 0.05, otherwise `target` (typically the sample
    /// second moment of the data) when it is positive and finite, otherwise 1.
    pub fn initial_variance(&self, target: Option<f64>) -> f64 {
        let denom = 1.0 - self.symmetric_persistence();
        if denom > FIXED_POINT_MIN_DENOMINATOR {
            return self.a0 / denom;
        }
        match target {
            Some(t) if t > 0.0 && t.is_finite() => t,
            _ => 1.0,
        }
    }

    /// Runs this regime's variance recursion over `data`. Entry `t` is the
    /// variance of `data[t]`; entry 0 is [`Self::initial_variance`].
    pub fn variance_path(&self, data: &[f64], target: Option<f64>) -> Vec<f64> {
        let mut out = Vec::with_capacity(data.len());
        let mut h = self.initial_variance(target);
        for &y in data {
            out.push(h);
            h = self.variance_step(y, h);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct TransitionMatrix {
    k: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    /// A row-stochastic matrix that is also irreducible and aperiodic.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = Self::stochastic(rows)?;
        if !m.is_primitive() {
            return Err(Error::ReducibleChain);
        }
        Ok(m)
    }

    /// A row-stochastic matrix with no ergodicity requirement. Samplers use
    /// this since intermediate draws may be (numerically) absorbing.
    pub fn stochastic(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::InvalidTransition("empty matrix".into()));
        }
        let mut entries = Vec::with_capacity(k * k);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: row.len(),
                });
            }
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::InvalidTransition(format!("entry {v} in row {i} outside [0, 1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidTransition(format!("row {i} sums to {sum}")));
            }
            entries.extend_from_slice(row);
        }
        Ok(Self { k, entries })
    }

    pub fn single() -> Self {
        Self {
            k: 1,
            entries: vec![1.0],
        }
    }

    /// Two-regime matrix from its staying probabilities `(eta_11, eta_22)`.
    pub fn two_state(stay_1: f64, stay_2: f64) -> Result<Self> {
        Self::new(vec![vec![stay_1, 1.0 - stay_1], vec![1.0 - stay_2, stay_2]])
    }

    /// Uniform rows `1/K`.
    pub fn uniform(k: usize) -> Self {
        Self {
            k,
            entries: vec![1.0 / k as f64; k * k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.k).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.k).map(|i| self.get(i, i)).collect()
    }

    /// Irreducible and aperiodic: some power of the zero pattern is strictly
    /// positive. Wielandt's bound `(K-1)^2 + 1` is the largest power needed.
    pub fn is_primitive(&self) -> bool {
        let k = self.k;
        let pattern: Vec<bool> = self.entries.iter().map(|&v| v > 0.0).collect();
        let mut power = pattern.clone();
        let max_power = (k - 1) * (k - 1) + 1;
        for step in 1..=max_power {
            if power.iter().all(|&p| p) {
                return true;
            }
            if step == max_power {
                break;
            }
            let mut next = vec![false; k * k];
            for i in 0..k {
                for j in 0..k {
                    next[i * k + j] = (0..k).any(|l| power[i * k + l] && pattern[l * k + j]);
                }
            }
            power = next;
        }
        false
    }

    /// The unique stationary distribution `pi' P = pi'`.
    pub fn stationary_distribution(&self) -> Result<Vec<f64>> {
        if !self.is_primitive() {
            return Err(Error::ReducibleChain);
        }
        let k = self.k;
        if k == 1 {
            return Ok(vec![1.0]);
        }
        // (P' - I) pi = 0 with the last equation replaced by sum(pi) = 1
        let mut a = Matrix::zeros(k);
        for i in 0..k {
            for j in 0..k {
                a[(i, j)] = self.get(j, i) - if i == j { 1.0 } else { 0.0 };
            }
        }
        for j in 0..k {
            a[(k - 1, j)] = 1.0;
        }
        let mut rhs = vec![0.0; k];
        rhs[k - 1] = 1.0;
        let mut pi = a.solve(&rhs)?;
        for p in &mut pi {
            *p = p.max(0.0);
        }
        let s: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= s);
        Ok(pi)
    }

    /// Stationary distribution when it is unique, uniform otherwise.
    pub fn initial_distribution(&self) -> Vec<f64> {
        self.stationary_distribution()
            .unwrap_or_else(|_| vec![1.0 / self.k as f64; self.k])
    }

    /// Relabels states: new state `i` is old state `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let k = self.k;
        let mut entries = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                entries[i * k + j] = self.get(perm[i], perm[j]);
            }
        }
        Self { k, entries }
    }
}

impl TryFrom<Vec<Vec<f64>>> for TransitionMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<TransitionMatrix> for Vec<Vec<f64>> {
    fn from(m: TransitionMatrix) -> Self {
        m.rows()
    }
}

/// Stationary distribution of a transition matrix.
pub fn stationary_distribution(transition: &TransitionMatrix) -> Result<Vec<f64>> {
    transition.stationary_distribution()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Garch,
    StGarch,
    MsGarch,
    MsStGarch,
}

impl Variant {
    pub fn is_switching(self) -> bool {
        matches!(self, Variant::MsGarch | Variant::MsStGarch)
    }

    pub fn has_smooth_transition(self) -> bool {
        matches!(self, Variant::StGarch | Variant::MsStGarch)
    }

    pub fn default_regimes(self) -> usize {
        if self.is_switching() {
            2
        } else {
            1
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Variant::Garch => "GARCH",
            Variant::StGarch => "ST-GARCH",
            Variant::MsGarch => "MS-GARCH",
            Variant::MsStGarch => "MS-STGARCH",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "garch" => Ok(Variant::Garch),
            "stgarch" => Ok(Variant::StGarch),
            "msgarch" => Ok(Variant::MsGarch),
            "msstgarch" => Ok(Variant::MsStGarch),
            other => Err(Error::InvalidConfig(format!("unknown model variant `{other}`"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct ModelSpec {
    regimes: Vec<RegimeParams>,
    transition: TransitionMatrix,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    regimes: Vec<RegimeParams>,
    transition: TransitionMatrix,
}

impl TryFrom<RawSpec> for ModelSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        ModelSpec::new(raw.regimes, raw.transition)
    }
}

impl From<ModelSpec> for RawSpec {
    fn from(s: ModelSpec) -> Self {
        RawSpec {
            regimes: s.regimes,
            transition: s.transition,
        }
    }
}

impl ModelSpec {
    pub fn new(regimes: Vec<RegimeParams>, transition: TransitionMatrix) -> Result<Self> {
        if regimes.is_empty() {
            return Err(Error::InvalidConfig("at least one regime required".into()));
        }
        if transition.k() != regimes.len() {
            return Err(Error::DimensionMismatch {
                expected: regimes.len(),
                found: transition.k(),
            });
        }
        for r in &regimes {
            r.validate()?;
        }
        if !transition.is_primitive() {
            return Err(Error::ReducibleChain);
        }
        Ok(Self { regimes, transition })
    }

    pub fn single(params: RegimeParams) -> Result<Self> {
        Self::new(vec![params], TransitionMatrix::single())
    }

    pub fn k(&self) -> usize {
        self.regimes.len()
    }

    pub fn regimes(&self) -> &[RegimeParams] {
        &self.regimes
    }

    pub fn transition(&self) -> &TransitionMatrix {
        &self.transition
    }

    pub fn variant(&self) -> Variant {
        let smooth = self.regimes.iter().any(|r| r.gamma > 0.0);
        match (self.k() == 1, smooth) {
            (true, false) => Variant::Garch,
            (true, true) => Variant::StGarch,
            (false, false) => Variant::MsGarch,
            (false, true) => Variant::MsStGarch,
        }
    }

    pub fn stationary_distribution(&self) -> Vec<f64> {
        // primitivity is checked at construction
        self.transition
            .stationary_distribution()
            .expect("ModelSpec transition is primitive")
    }

    pub fn initial_variances(&self, target: Option<f64>) -> Vec<f64> {
        self.regimes.iter().map(|r| r.initial_variance(target)).collect()
    }

    /// Relabels regimes: new regime `i` is old regime `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                found: perm.len(),
            });
        }
        let regimes = perm.iter().map(|&p| self.regimes[p]).collect();
        Self::new(regimes, self.transition.permuted(perm))
    }

    /// The same model with regimes ordered by increasing `a0`
    /// (low-volatility regime first), plus the permutation used.
    pub fn canonical(&self) -> (Self, Vec<usize>) {
        let mut perm: Vec<usize> = (0..self.k()).collect();
        perm.sort_by(|&i, &j| self.regimes[i].a0.total_cmp(&self.regimes[j].a0));
        let spec = self.permuted(&perm).expect("permutation preserves validity");
        (spec, perm)
    }
}

/// Zero-mean return series (log returns in percent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    values: Vec<f64>,
    timestamps: Option<Vec<String>>,
}

impl ReturnSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self {
            values,
            timestamps: None,
        })
    }

    pub fn with_timestamps(values: Vec<f64>, timestamps: Vec<String>) -> Result<Self> {
        if values.len() != timestamps.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: timestamps.len(),
            });
        }
        let mut s = Self::new(values)?;
        s.timestamps = Some(timestamps);
        Ok(s)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamps(&self) -> Option<&[String]> {
        self.timestamps.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Requires at least two observations, the floor for any estimation.
    pub fn require_estimable(&self) -> Result<()> {
        if self.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                found: self.len(),
            });
        }
        Ok(())
    }

    pub fn split_at(&self, index: usize) -> (ReturnSeries, ReturnSeries) {
        let (a, b) = self.values.split_at(index);
        let (ta, tb) = match &self.timestamps {
            Some(ts) => {
                let (x, y) = ts.split_at(index);
                (Some(x.to_vec()), Some(y.to_vec()))
            }
            None => (None, None),
        };
        (
            ReturnSeries {
                values: a.to_vec(),
                timestamps: ta,
            },
            ReturnSeries {
                values: b.to_vec(),
                timestamps: tb,
            },
        )
    }
}

impl AsRef<[f64]> for ReturnSeries {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Output of [`simulate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub returns: ReturnSeries,
    /// Zero-based regime index per time step.
    pub states: Vec<usize>,
    /// `variances[j][t]` is regime j's conditional variance at step t.
    pub variances: Vec<Vec<f64>>,
}

/// Simulates `length` returns after discarding `burn_in` steps.
///
/// The chain starts from its stationary distribution and the innovations are
/// i.i.d. standard normal, drawn independently of the chain. Deterministic
/// for a given seed.
pub fn simulate(spec: &ModelSpec, length: usize, rng_seed: u64, burn_in: usize) -> Result<Simulation> {
    if length == 0 {
        return Err(Error::InsufficientData { needed: 1, found: 0 });
    }
    let mut rng = seeded_rng(rng_seed);
    simulate_with(spec, length, burn_in, &mut rng)
}

pub fn simulate_with<R: Rng + ?Sized>(
    spec: &ModelSpec,
    length: usize,
    burn_in: usize,
    rng: &mut R,
) -> Result<Simulation> {
    let k = spec.k();
    let pi = spec.stationary_distribution();
    let mut state = draw_categorical(&pi, rng).ok_or(Error::ReducibleChain)?;
    let mut h = spec.initial_variances(None);

    let mut returns = Vec::with_capacity(length);
    let mut states = Vec::with_capacity(length);
    let mut variances = vec![Vec::with_capacity(length); k];

    for step in 0..burn_in + length {
        let eps: f64 = rng.sample(StandardNormal);
        let y = eps * h[state].sqrt();
        if step >= burn_in {
            returns.push(y);
            states.push(state);
            for (path, hj) in variances.iter_mut().zip(&h) {
                path.push(*hj);
            }
        }
        for (hj, params) in h.iter_mut().zip(spec.regimes()) {
            *hj = params.variance_step(y, *hj);
        }
        state = draw_categorical(spec.transition().row(state), rng)
            .ok_or_else(|| Error::InvalidTransition("row with no mass".into()))?;
    }

    Ok(Simulation {
        returns: ReturnSeries::new(returns)?,
        states,
        variances,
    })
}
