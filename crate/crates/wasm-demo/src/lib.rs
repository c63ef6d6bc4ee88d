//! Browser bindings: simulate a two-regime path, check second-order
//! stability, and trace each regime's news-impact curve.
//!
//! Every export takes a flat parameter vector
//! `[a0_1, a1_1, a2_1, b_1, gamma_1, a0_2, a1_2, a2_2, b_2, gamma_2, p11, p22]`
//! and returns a JSON string.

use msstgarch::{stability_report, ModelSpec, RegimeParams, TransitionMatrix};
use serde_json::json;
use wasm_bindgen::prelude::*;

const PARAMS: usize = 12;

fn fail(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn spec_from(params: &[f64]) -> Result<ModelSpec, JsValue> {
    if params.len() != PARAMS {
        return Err(fail(format!("expected {PARAMS} parameters, got {}", params.len())));
    }
    let regime = |p: &[f64]| RegimeParams::new(p[0], p[1], p[2], p[3], p[4]).map_err(fail);
    let regimes = vec![regime(&params[..5])?, regime(&params[5..10])?];
    let eta = TransitionMatrix::two_state(params[10], params[11]).map_err(fail)?;
    ModelSpec::new(regimes, eta).map_err(fail)
}

/// Returns `{returns, states, variance}` where `variance` is the active
/// regime's conditional variance and states are 1-based.
#[wasm_bindgen]
pub fn simulate_path(params: &[f64], length: usize, seed: u32) -> Result<String, JsValue> {
    let spec = spec_from(params)?;
    let sim = msstgarch::simulate(&spec, length, u64::from(seed), msstgarch::model::DEFAULT_BURN_IN).map_err(fail)?;
    let variance: Vec<f64> = sim
        .states
        .iter()
        .enumerate()
        .map(|(t, &j)| sim.variances[j][t])
        .collect();
    let states: Vec<usize> = sim.states.iter().map(|j| j + 1).collect();
    Ok(json!({
        "returns": sim.returns.values(),
        "states": states,
        "variance": variance,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn stability(params: &[f64], delta: f64) -> Result<String, JsValue> {
    let report = stability_report(&spec_from(params)?, delta).map_err(fail)?;
    serde_json::to_string(&report).map_err(fail)
}

/// Next-step variance of each regime as a function of the previous return,
/// holding the previous variance at `h_prev`.
#[wasm_bindgen]
pub fn news_impact(params: &[f64], h_prev: f64, span: f64, points: usize) -> Result<String, JsValue> {
    let spec = spec_from(params)?;
    if points < 2 || span.is_nan() || span <= 0.0 {
        return Err(fail("need at least two points and a positive span"));
    }
    let y: Vec<f64> = (0..points)
        .map(|i| -span + 2.0 * span * i as f64 / (points - 1) as f64)
        .collect();
    let curves: Vec<_> = spec
        .regimes()
        .iter()
        .map(|r| {
            json!({
                "weight": y.iter().map(|&v| r.weight(v)).collect::<Vec<_>>(),
                "variance": y.iter().map(|&v| r.variance_step(v, h_prev)).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(json!({ "y": y, "regimes": curves }).to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: [f64; PARAMS] = [0.3, 0.2, 0.05, 0.5, 1.5, 1.9, 0.7, 0.1, 0.25, 0.5, 0.97, 0.85];

    #[test]
    fn simulate_shapes() {
        let v: serde_json::Value = serde_json::from_str(&simulate_path(&REFERENCE, 50, 3).unwrap()).unwrap();
        assert_eq!(v["returns"].as_array().unwrap().len(), 50);
        assert!(v["states"].as_array().unwrap().iter().all(|s| s == 1 || s == 2));
    }

    #[test]
    fn stability_json() {
        let v: serde_json::Value = serde_json::from_str(&stability(&REFERENCE, 1e-6).unwrap()).unwrap();
        assert!(v["spectral_radius"].as_f64().unwrap() > 1.0);
        assert_eq!(v["bound"], serde_json::Value::Null);
    }

    #[test]
    fn news_impact_limits() {
        let v: serde_json::Value = serde_json::from_str(&news_impact(&REFERENCE, 1.0, 5.0, 11).unwrap()).unwrap();
        let w = v["regimes"][0]["weight"].as_array().unwrap();
        assert!(w[0].as_f64().unwrap() < 0.01 && w[10].as_f64().unwrap() > 0.99);
        // y = 0: a0 + b h_prev
        assert!((v["regimes"][1]["variance"][5].as_f64().unwrap() - 2.15).abs() < 1e-12);
    }
}
