//! wasm-bindgen bindings for the static page in `www/`.
//!
//! Each export takes plain numbers or a JSON string and returns a JSON
//! string; the logic lives in [`demo`] so it can be tested natively.

use wasm_bindgen::prelude::*;

pub mod demo {
    use projexp::asymptotics::{asymptotic_report, ScalarPoly, SpectrumConfig, DEFAULT_QUAD_ORDER};
    use projexp::estimator::{estimate, EstimatorConfig};
    use projexp::matcore::{expm_reference, ExpMode, HermitianMatrix, MatrixJson};
    use projexp::moments::{exact_moment, reference_moments};
    use serde_json::json;

    /// The browser runs single threaded, so keep sample counts modest.
    pub const MAX_SAMPLES: u64 = 2_000_000;

    pub fn estimate_expm(
        matrix_json: &str,
        samples: u64,
        seed: u64,
        fourier: bool,
    ) -> Result<String, String> {
        let json: MatrixJson =
            serde_json::from_str(matrix_json).map_err(|e| format!("InvalidJson: {e}"))?;
        let a = HermitianMatrix::new(json.to_matrix().map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let mode = if fourier {
            ExpMode::Fourier
        } else {
            ExpMode::Exp
        };
        let cfg = EstimatorConfig::new(samples.min(MAX_SAMPLES), seed, 1);
        let est = estimate(&a, mode, &cfg).map_err(|e| e.to_string())?;
        let oracle = expm_reference(&a, mode).map_err(|e| e.to_string())?;
        Ok(json!({
            "mode": mode,
            "samples": est.n_samples,
            "estimate": est.mean,
            "stderr": est.stderr,
            "oracle": oracle,
            "z_scores": est.z_scores(&oracle),
            "max_z": est.max_z(&oracle),
            "relative_error": est.relative_error(&oracle),
        })
        .to_string())
    }

    /// Ratio of the simplex integral to its leading prediction on a
    /// geometric grid of `points` values of s in `[1, s_max]`.
    pub fn asymptotic_curve(lambda1: f64, s_max: f64, points: usize) -> Result<String, String> {
        if s_max.is_nan() || s_max <= 1.0 || points < 2 {
            return Err(format!(
                "BadSchedule: need s_max > 1 and at least 2 points, got {s_max}, {points}"
            ));
        }
        let spectrum = SpectrumConfig::from_lambda1(lambda1).map_err(|e| e.to_string())?;
        let step = s_max.ln() / (points - 1) as f64;
        let s_list: Vec<f64> = (0..points).map(|k| (k as f64 * step).exp()).collect();
        let report = asymptotic_report(&spectrum, &s_list, &ScalarPoly::one(), DEFAULT_QUAD_ORDER)
            .map_err(|e| e.to_string())?;
        Ok(json!({
            "lambda1": spectrum.lambda1,
            "lambda2": spectrum.lambda2,
            "rows": report.rows,
            "final_ratio": report.final_ratio(),
            "fitted_constant": report.fitted_constant,
        })
        .to_string())
    }

    /// Exact moments next to the tabulated forms for one dimension.
    pub fn moment_table(dim: usize) -> Result<String, String> {
        let mut rows = Vec::new();
        for order in 0..=projexp::moments::MAX_ORDER {
            let found = exact_moment(dim, order).map_err(|e| e.to_string())?;
            let reference = reference_moments(dim).find(|r| r.order == order);
            let agrees = reference
                .map(|r| r.result().cayley_hamilton_reduced() == found.cayley_hamilton_reduced());
            rows.push(json!({
                "order": order,
                "exact": found.to_string(),
                "reference": reference.map(|r| r.result().to_string()),
                "agrees": agrees,
            }));
        }
        Ok(json!({ "dim": dim, "rows": rows }).to_string())
    }
}

fn to_js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn estimate_expm(
    matrix_json: &str,
    samples: u32,
    seed: u32,
    fourier: bool,
) -> Result<String, JsValue> {
    to_js(demo::estimate_expm(
        matrix_json,
        samples.into(),
        seed.into(),
        fourier,
    ))
}

#[wasm_bindgen]
pub fn asymptotic_curve(lambda1: f64, s_max: f64, points: u32) -> Result<String, JsValue> {
    to_js(demo::asymptotic_curve(lambda1, s_max, points as usize))
}

#[wasm_bindgen]
pub fn moment_table(dim: u32) -> Result<String, JsValue> {
    to_js(demo::moment_table(dim as usize))
}
