//! Forecast evaluation and model comparison.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::filter::{log_likelihood, run_filter, FilterState, PredictiveDistribution};
use crate::inference::PosteriorDraws;
use crate::model::ModelSpec;
use crate::util::{mean, standard_normal_cdf};

/// One-step-ahead forecast for a single out-of-sample day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayForecast {
    pub variance: f64,
    pub distribution: PredictiveDistribution,
}

/// Filters `data[..split]`, then walks the remaining days emitting each
/// day's predictive mixture before absorbing its return. Parameters stay
/// fixed throughout.
pub fn rolling_forecast(spec: &ModelSpec, data: &[f64], split: usize) -> Result<Vec<DayForecast>> {
    if split >= data.len() {
        return Err(Error::InvalidConfig(format!(
            "split {split} must be smaller than the series length {}",
            data.len()
        )));
    }
    let mut state = run_filter(spec, &data[..split], None)?.last().clone();
    let mut out = Vec::with_capacity(data.len() - split);
    for (offset, &y) in data[split..].iter().enumerate() {
        out.push(forecast_from(&state));
        state = crate::filter::filter_step(&state, spec, y).map_err(|e| match e {
            Error::DegenerateFilter { .. } => Error::DegenerateFilter { index: split + offset },
            Error::NonFinite { value, .. } => Error::NonFinite {
                index: split + offset,
                value,
            },
            other => other,
        })?;
    }
    Ok(out)
}

fn forecast_from(state: &FilterState) -> DayForecast {
    DayForecast {
        variance: state.conditional_variance(),
        distribution: state.predictive(),
    }
}

/// Left tail for `level > 0.5`, right tail otherwise; the nominal
/// violation probability is `1 - level` or `level` respectively.
pub fn violation_probability(level: f64) -> f64 {
    if level > 0.5 {
        1.0 - level
    } else {
        level
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationSeries {
    pub level: f64,
    pub var_forecasts: Vec<f64>,
    pub indicators: Vec<bool>,
    pub n0: usize,
    pub n1: usize,
    pub n00: usize,
    pub n01: usize,
    pub n10: usize,
    pub n11: usize,
}

impl ViolationSeries {
    /// Tallies counts from a given indicator sequence. `var_forecasts` may be
    /// empty when thresholds are not available.
    pub fn from_indicators(level: f64, var_forecasts: Vec<f64>, indicators: Vec<bool>) -> Result<Self> {
        check_level(level)?;
        if !var_forecasts.is_empty() && var_forecasts.len() != indicators.len() {
            return Err(Error::LengthMismatch {
                left: var_forecasts.len(),
                right: indicators.len(),
            });
        }
        let n1 = indicators.iter().filter(|v| **v).count();
        let mut s = Self {
            level,
            n0: indicators.len() - n1,
            n1,
            n00: 0,
            n01: 0,
            n10: 0,
            n11: 0,
            var_forecasts,
            indicators,
        };
        for w in s.indicators.windows(2) {
            match (w[0], w[1]) {
                (false, false) => s.n00 += 1,
                (false, true) => s.n01 += 1,
                (true, false) => s.n10 += 1,
                (true, true) => s.n11 += 1,
            }
        }
        Ok(s)
    }

    /// Synthetic series with `violations` hits in `days` days (first days
    /// violated). Only the totals are meaningful for the independence test.
    pub fn from_counts(level: f64, days: usize, violations: usize) -> Result<Self> {
        if violations > days {
            return Err(Error::InvalidConfig(format!("{violations} violations in {days} days")));
        }
        Self::from_indicators(level, Vec::new(), (0..days).map(|t| t < violations).collect())
    }

    pub fn len(&self) -> usize {
        self.indicators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indicators.is_empty()
    }

    pub fn expected_violations(&self) -> f64 {
        violation_probability(self.level) * self.len() as f64
    }
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::ProbabilityOutOfRange(level));
    }
    Ok(())
}

/// VaR thresholds at `level` (the `1 - level` predictive quantile) and the
/// resulting violation indicators.
pub fn violations(forecasts: &[PredictiveDistribution], realized: &[f64], level: f64) -> Result<ViolationSeries> {
    check_level(level)?;
    if forecasts.len() != realized.len() {
        return Err(Error::LengthMismatch {
            left: forecasts.len(),
            right: realized.len(),
        });
    }
    let thresholds = forecasts
        .iter()
        .map(|d| d.quantile(1.0 - level))
        .collect::<Result<Vec<_>>>()?;
    let indicators = realized
        .iter()
        .zip(&thresholds)
        .map(|(&y, &var)| if level > 0.5 { y < var } else { y > var })
        .collect();
    ViolationSeries::from_indicators(level, thresholds, indicators)
}

/// `n log p`, with `0 log 0 = 0`.
fn xlogy(n: usize, p: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * p.ln()
    }
}

/// Unconditional coverage. `None` when no day or every day is a violation.
pub fn lr_uc(series: &ViolationSeries) -> Option<f64> {
    let n = series.n0 + series.n1;
    if series.n1 == 0 || series.n1 == n {
        return None;
    }
    let phi = violation_probability(series.level);
    let pi = series.n1 as f64 / n as f64;
    let restricted = xlogy(series.n1, phi) + xlogy(series.n0, 1.0 - phi);
    let free = xlogy(series.n1, pi) + xlogy(series.n0, 1.0 - pi);
    Some((-2.0 * (restricted - free)).max(0.0))
}

/// Independence against a first-order Markov alternative. `None` when a
/// transition probability is 0/0.
pub fn lr_ind(series: &ViolationSeries) -> Option<f64> {
    let (n00, n01, n10, n11) = (series.n00, series.n01, series.n10, series.n11);
    let from0 = n00 + n01;
    let from1 = n10 + n11;
    if from0 == 0 || from1 == 0 {
        return None;
    }
    let pi1 = n00 as f64 / from0 as f64;
    let pi2 = n11 as f64 / from1 as f64;
    let pi_star = (n00 + n10) as f64 / (from0 + from1) as f64;
    let restricted = xlogy(n00 + n10, pi_star) + xlogy(n11 + n01, 1.0 - pi_star);
    let free = xlogy(n00, pi1) + xlogy(n01, 1.0 - pi1) + xlogy(n11, pi2) + xlogy(n10, 1.0 - pi2);
    Some((-2.0 * (restricted - free)).max(0.0))
}

pub fn lr_cc(series: &ViolationSeries) -> Option<f64> {
    combine_cc(lr_uc(series), lr_ind(series))
}

pub fn combine_cc(uc: Option<f64>, ind: Option<f64>) -> Option<f64> {
    Some(uc? + ind?)
}

/// Upper tail of chi-square(1).
pub fn chi2_1_sf(x: f64) -> f64 {
    erfc((x / 2.0).sqrt())
}

/// Upper tail of chi-square(2).
pub fn chi2_2_sf(x: f64) -> f64 {
    (-x / 2.0).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestRow {
    pub level: f64,
    pub expected: f64,
    pub observed: usize,
    pub lr_uc: Option<f64>,
    pub lr_ind: Option<f64>,
    pub lr_cc: Option<f64>,
    pub p_uc: Option<f64>,
    pub p_ind: Option<f64>,
    pub p_cc: Option<f64>,
}

impl BacktestRow {
    pub fn from_series(series: &ViolationSeries) -> Self {
        let uc = lr_uc(series);
        let ind = lr_ind(series);
        let cc = combine_cc(uc, ind);
        Self {
            level: series.level,
            expected: series.expected_violations(),
            observed: series.n1,
            lr_uc: uc,
            lr_ind: ind,
            lr_cc: cc,
            p_uc: uc.map(chi2_1_sf),
            p_ind: ind.map(chi2_1_sf),
            p_cc: cc.map(chi2_2_sf),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub model: String,
    pub days: usize,
    pub rows: Vec<BacktestRow>,
}

/// Runs the violation tests at every level. Levels are independent and are
/// evaluated in parallel when the `parallel` feature is on.
pub fn backtest(
    model: &str,
    forecasts: &[PredictiveDistribution],
    realized: &[f64],
    levels: &[f64],
) -> Result<BacktestReport> {
    let one = |&level: &f64| violations(forecasts, realized, level).map(|s| BacktestRow::from_series(&s));
    #[cfg(feature = "parallel")]
    let rows = {
        use rayon::prelude::*;
        levels.par_iter().map(one).collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let rows = levels.iter().map(one).collect::<Result<Vec<_>>>()?;
    Ok(BacktestReport {
        model: model.to_string(),
        days: realized.len(),
        rows,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.3}"))
}

impl BacktestReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("model: {}  days: {}\n", self.model, self.days);
        s.push_str(&format!(
            "{:>6} {:>8} {:>5} {:>8} {:>8} {:>8}\n",
            "alpha", "E(V)", "N", "UC", "IND", "CC"
        ));
        for r in &self.rows {
            s.push_str(&format!(
                "{:>6} {:>8.3} {:>5} {:>8} {:>8} {:>8}\n",
                r.level,
                r.expected,
                r.observed,
                fmt_opt(r.lr_uc),
                fmt_opt(r.lr_ind),
                fmt_opt(r.lr_cc)
            ));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmOptions {
    /// Bartlett-window truncation lag for the long-run variance (0 for
    /// one-step forecasts).
    pub lag: usize,
    /// Harvey-Leybourne-Newbold small-sample correction.
    pub hln: bool,
    /// Forecast horizon entering the HLN factor.
    pub horizon: usize,
}

impl Default for DmOptions {
    fn default() -> Self {
        Self {
            lag: 0,
            hln: false,
            horizon: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DmOutcome {
    /// `p_value` is the lower tail, small when model 1 has lower loss.
    Statistic { statistic: f64, p_value: f64 },
    /// Every loss differential is zero.
    NoDifference,
    /// Constant nonzero loss differential; `better` is 1 or 2.
    Dominance { better: u8 },
}

impl DmOutcome {
    pub fn statistic(&self) -> Option<f64> {
        match self {
            DmOutcome::Statistic { statistic, .. } => Some(*statistic),
            _ => None,
        }
    }
}

pub const DM_MIN_LENGTH: usize = 10;

pub fn dm_test(errors_1: &[f64], errors_2: &[f64]) -> Result<DmOutcome> {
    dm_test_with(errors_1, errors_2, &DmOptions::default())
}

/// Diebold-Mariano test of equal squared-error loss against
/// `E[e1^2 - e2^2] < 0`.
pub fn dm_test_with(errors_1: &[f64], errors_2: &[f64], options: &DmOptions) -> Result<DmOutcome> {
    if errors_1.len() != errors_2.len() {
        return Err(Error::LengthMismatch {
            left: errors_1.len(),
            right: errors_2.len(),
        });
    }
    let t = errors_1.len();
    if t < DM_MIN_LENGTH {
        return Err(Error::InsufficientData {
            needed: DM_MIN_LENGTH,
            found: t,
        });
    }
    let d: Vec<f64> = errors_1.iter().zip(errors_2).map(|(a, b)| a * a - b * b).collect();
    if d.iter().all(|&x| x == d[0]) {
        return Ok(if d[0] == 0.0 {
            DmOutcome::NoDifference
        } else {
            DmOutcome::Dominance {
                better: if d[0] < 0.0 { 1 } else { 2 },
            }
        });
    }
    let n = t as f64;
    let d_bar = d.iter().sum::<f64>() / n;
    let autocov = |lag: usize| {
        d[lag..]
            .iter()
            .zip(&d)
            .map(|(a, b)| (a - d_bar) * (b - d_bar))
            .sum::<f64>()
            / n
    };
    let mut long_run = autocov(0);
    for l in 1..=options.lag.min(t - 1) {
        long_run += 2.0 * (1.0 - l as f64 / (options.lag + 1) as f64) * autocov(l);
    }
    if !(long_run > 0.0) {
        return Ok(DmOutcome::Dominance {
            better: if d_bar < 0.0 { 1 } else { 2 },
        });
    }
    let mut statistic = d_bar / (long_run / n).sqrt();
    if options.hln {
        let h = options.horizon as f64;
        statistic *= ((n + 1.0 - 2.0 * h + h * (h - 1.0) / n) / n).sqrt();
    }
    Ok(DmOutcome::Statistic {
        statistic,
        p_value: standard_normal_cdf(statistic),
    })
}

/// Mean squared and mean absolute difference between variance forecasts
/// and squared returns.
pub fn mse_mae(forecasts: &[f64], squared_returns: &[f64]) -> Result<(f64, f64)> {
    if forecasts.len() != squared_returns.len() {
        return Err(Error::LengthMismatch {
            left: forecasts.len(),
            right: squared_returns.len(),
        });
    }
    if forecasts.is_empty() {
        return Err(Error::InsufficientData { needed: 1, found: 0 });
    }
    let n = forecasts.len() as f64;
    let (mut se, mut ae) = (0.0, 0.0);
    for (f, s) in forecasts.iter().zip(squared_returns) {
        let e = f - s;
        se += e * e;
        ae += e.abs();
    }
    Ok((se / n, ae / n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelAccuracy {
    pub model: String,
    pub mse: f64,
    pub mae: f64,
}

/// Two variance forecast sequences scored against squared returns, with
/// errors `e_it = h_it - y_t^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastComparison {
    pub days: usize,
    pub accuracy: [ModelAccuracy; 2],
    pub dm: DmOutcome,
}

impl ForecastComparison {
    pub fn new(
        names: [&str; 2],
        forecasts_1: &[f64],
        forecasts_2: &[f64],
        returns: &[f64],
        options: &DmOptions,
    ) -> Result<Self> {
        let squared: Vec<f64> = returns.iter().map(|y| y * y).collect();
        let (mse1, mae1) = mse_mae(forecasts_1, &squared)?;
        let (mse2, mae2) = mse_mae(forecasts_2, &squared)?;
        let e1: Vec<f64> = forecasts_1.iter().zip(&squared).map(|(f, s)| f - s).collect();
        let e2: Vec<f64> = forecasts_2.iter().zip(&squared).map(|(f, s)| f - s).collect();
        Ok(Self {
            days: returns.len(),
            accuracy: [
                ModelAccuracy {
                    model: names[0].to_string(),
                    mse: mse1,
                    mae: mae1,
                },
                ModelAccuracy {
                    model: names[1].to_string(),
                    mse: mse2,
                    mae: mae2,
                },
            ],
            dm: dm_test_with(&e1, &e2, options)?,
        })
    }

    pub fn to_text(&self) -> String {
        let [a, b] = &self.accuracy;
        let dm = match self.dm {
            DmOutcome::Statistic { statistic, p_value } => format!("{statistic:.3} (p = {p_value:.3})"),
            DmOutcome::NoDifference => "NA (no difference)".into(),
            DmOutcome::Dominance { better } => format!("NA (model {better} strictly better)"),
        };
        format!(
            "{:<12} {:>10} {:>10}\n{:<12} {:>10.3} {:>10.3}\n{:<12} {:>10.3} {:>10.3}\nDM {} vs {}: {}\n",
            "model", "MSE", "MAE", a.model, a.mse, a.mae, b.model, b.mse, b.mae, a.model, b.model, dm
        )
    }
}

/// `2 log f(Y | theta_hat) - 4 mean_i log f(Y | theta_i)` from the plug-in
/// and per-draw log-likelihoods.
pub fn dic_from_log_likelihoods(plug_in: f64, draws: &[f64]) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::InsufficientData { needed: 1, found: 0 });
    }
    Ok(2.0 * plug_in - 4.0 * mean(draws))
}

/// Deviance information criterion with filter likelihoods and the
/// posterior-mean plug-in. Lower is better.
pub fn dic(draws: &PosteriorDraws, data: &[f64]) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::InsufficientData { needed: 1, found: 0 });
    }
    let plug_in = log_likelihood(&draws.posterior_mean_spec()?, data)?;
    let per_draw = draw_log_likelihoods(draws, data)?;
    dic_from_log_likelihoods(plug_in, &per_draw)
}

fn draw_log_likelihoods(draws: &PosteriorDraws, data: &[f64]) -> Result<Vec<f64>> {
    let one = |i: usize| draws.spec_at(i).and_then(|s| log_likelihood(&s, data));
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..draws.len()).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..draws.len()).map(one).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub mean: f64,
    /// Divisor `n - 1`.
    pub sd: f64,
    /// `m3 / m2^1.5`; `None` for a constant series.
    pub skewness: Option<f64>,
    /// `m4 / m2^2` (normal = 3); `None` for a constant series.
    pub kurtosis: Option<f64>,
    pub max: f64,
    pub min: f64,
}

pub fn descriptive_stats(data: &[f64]) -> Result<DescriptiveStats> {
    const MIN_LEN: usize = 4;
    if data.len() < MIN_LEN {
        return Err(Error::InsufficientData {
            needed: MIN_LEN,
            found: data.len(),
        });
    }
    let n = data.len() as f64;
    let m = mean(data);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in data {
        let d = x - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let sd = (m2 / (n - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let constant = data.iter().all(|&x| x == data[0]);
    Ok(DescriptiveStats {
        n: data.len(),
        mean: m,
        sd: if constant { 0.0 } else { sd },
        skewness: (!constant).then(|| m3 / m2.powf(1.5)),
        kurtosis: (!constant).then(|| m4 / (m2 * m2)),
        max: data.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min: data.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

impl DescriptiveStats {
    pub fn to_text(&self) -> String {
        format!(
            "{:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>6}\n{:>8.3} {:>8.3} {:>8} {:>8.3} {:>8.3} {:>8} {:>6}\n",
            "Mean",
            "Std.dev",
            "Skew",
            "Max",
            "Min",
            "Kurt",
            "n",
            self.mean,
            self.sd,
            fmt_opt(self.skewness),
            self.max,
            self.min,
            fmt_opt(self.kurtosis),
            self.n
        )
    }
}
