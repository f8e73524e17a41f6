//! Browser bindings: unit-ball outlines, dual balls, and norm profiles for
//! the static demo page in `www/`. Inputs are the same JSON norm specs the
//! command-line tool reads.

use absnorm::dual::dual;
use absnorm::geometry::{asq_obstruction, classify_extremes, norm_profile, GeomError};
use absnorm::norm2::AbsoluteNorm;
use absnorm::specfile::NormSpec;
use wasm_bindgen::prelude::*;

fn parse_norm(spec_json: &str) -> Result<AbsoluteNorm, JsError> {
    let spec: NormSpec =
        serde_json::from_str(spec_json).map_err(|e| JsError::new(&e.to_string()))?;
    spec.to_norm().map_err(|e| JsError::new(&e.to_string()))
}

/// Closed outline of the unit ball, flattened as x0, y0, x1, y1, ...
/// The upper arc runs left to right, the mirrored lower arc right to left;
/// joining first to last closes the curve (and draws the vertical segments
/// of max-norm-like balls).
fn outline(f: &AbsoluteNorm, samples: usize) -> Vec<f64> {
    let n = samples.clamp(8, 4096);
    let mut pts = Vec::with_capacity(4 * (n + 1));
    for i in 0..=n {
        let t = -1.0 + 2.0 * i as f64 / n as f64;
        pts.push(t);
        pts.push(f.boundary(t, 1e-9));
    }
    for i in (0..=n).rev() {
        let t = -1.0 + 2.0 * i as f64 / n as f64;
        pts.push(t);
        pts.push(-f.boundary(t, 1e-9));
    }
    pts
}

#[wasm_bindgen]
pub fn ball_polyline(spec_json: &str, samples: usize) -> Result<Vec<f64>, JsError> {
    Ok(outline(&parse_norm(spec_json)?, samples))
}

#[wasm_bindgen]
pub fn dual_ball_polyline(spec_json: &str, samples: usize) -> Result<Vec<f64>, JsError> {
    let f = parse_norm(spec_json)?;
    Ok(outline(&dual(&f, 2048), samples))
}

/// Scalar profile plus classification as a JSON string.
#[wasm_bindgen]
pub fn profile_json(spec_json: &str) -> Result<String, JsError> {
    let f = parse_norm(spec_json)?;
    let profile = norm_profile(&f, 1e-9, 2048);
    let class = match classify_extremes(&f, 256) {
        Ok(c) => serde_json::to_value(c).expect("class serializes"),
        Err(e) => serde_json::Value::String(format!("unclassifiable: {e}")),
    };
    let asq = match asq_obstruction(&f) {
        Ok(v) => serde_json::json!(v),
        Err(GeomError::InfinityNormExcluded) => serde_json::json!("excluded"),
        Err(e) => serde_json::Value::String(format!("unavailable: {e}")),
    };
    let mut value = serde_json::to_value(&profile).expect("profile serializes");
    let map = value.as_object_mut().expect("profile is an object");
    map.insert("class".into(), class);
    map.insert("asq_obstruction".into(), asq);
    serde_json::to_string_pretty(&value).map_err(|e| JsError::new(&e.to_string()))
}
