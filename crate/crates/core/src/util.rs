//! Small numerical helpers shared across modules.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

/// The random stream used everywhere in the crate. ChaCha8 is portable, so a
/// seed reproduces the same draws on every platform (including wasm).
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Log density of N(0, variance) at `y`.
#[inline]
pub fn normal_log_density(y: f64, variance: f64) -> f64 {
    -LN_SQRT_2PI - 0.5 * variance.ln() - 0.5 * y * y / variance
}

/// Standard normal CDF.
#[inline]
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Draws an index from the (unnormalised, nonnegative) weights `probs` with the
/// sequential scheme: visit j = 0, 1, ... and stop at the first j for which a
/// fresh uniform falls below p_j / sum_{l >= j} p_l.
///
/// Returns `None` when every weight is zero.
pub fn draw_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Option<usize> {
    let mut tail: f64 = probs.iter().sum();
    if !(tail > 0.0) || !tail.is_finite() {
        return None;
    }
    let last = probs.len() - 1;
    for (j, &p) in probs.iter().enumerate() {
        if j == last {
            return Some(j);
        }
        if p > 0.0 {
            let q = p / tail;
            let u: f64 = rng.random();
            if u <= q {
                return Some(j);
            }
        }
        tail -= p;
        if tail <= 0.0 {
            // rounding left nothing for the remaining states; take the last
            // state with positive weight
            return probs.iter().rposition(|&p| p > 0.0);
        }
    }
    Some(last)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean of squares; the natural variance estimate for a zero-mean series.
pub fn mean_square(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64
}
