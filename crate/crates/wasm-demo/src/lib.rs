//! Three glycotrack operations exported to JavaScript for the demo page in
//! `www/`. The plain functions in [`ops`] do the work and are what the
//! native tests exercise; the `#[wasm_bindgen]` shims only translate errors.

use wasm_bindgen::prelude::*;

pub mod ops;

fn js(e: String) -> JsError {
    JsError::new(&e)
}

/// Converts `value` between units of the same quantity: "mg/dL", "mmol/L",
/// "kg" or "lbs".
#[wasm_bindgen(js_name = convert)]
pub fn convert_js(value: f64, from: &str, to: &str) -> Result<f64, JsError> {
    ops::convert(value, from, to).map_err(js)
}

#[wasm_bindgen(js_name = bmi)]
pub fn bmi_js(weight: f64, weight_unit: &str, height_m: f64) -> Result<f64, JsError> {
    ops::bmi(weight, weight_unit, height_m).map_err(js)
}

/// Summary and per-reading classification, as JSON.
#[wasm_bindgen(js_name = glucoseStats)]
pub fn glucose_stats_js(values: &str, unit: &str, low: f64, high: f64) -> Result<String, JsError> {
    let report = ops::glucose_stats(values, unit, low, high).map_err(js)?;
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

/// Weekly diary grid for the diary text, as JSON, glucose shown in `unit`.
#[wasm_bindgen(js_name = weeklyGrid)]
pub fn weekly_grid_js(diary: &str, week_start: &str, tz_offset_min: i32, unit: &str) -> Result<String, JsError> {
    let grid = ops::weekly_grid(diary, week_start, tz_offset_min, unit).map_err(js)?;
    Ok(serde_json::to_string(&grid).expect("grid serializes"))
}
