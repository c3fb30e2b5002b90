//! WebAssembly bindings for the browser demo. Every export returns a JSON
//! string; the plain functions in [`demo`] do the work and are what the
//! native tests exercise.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js<E: std::fmt::Display>(e: E) -> JsError {
    JsError::new(&e.to_string())
}

/// Analytic Full and RWA rates and matching frequencies on an ε grid.
#[wasm_bindgen(js_name = rateCurve)]
pub fn rate_curve(
    kind: &str,
    f_q: f64,
    f_c: f64,
    g: f64,
    eps_max: f64,
    points: usize,
) -> Result<String, JsError> {
    let sys = demo::system(f_q, f_c, g).map_err(js)?;
    let curve = demo::rate_curve(demo::kind(kind).map_err(js)?, &sys, eps_max, points).map_err(js)?;
    serde_json::to_string(&curve).map_err(js)
}

/// Endpoint observable against flat-top length at a fixed drive frequency.
/// A non-positive `f_d` means "use the analytic matching frequency".
#[wasm_bindgen(js_name = endpointTrace)]
#[allow(clippy::too_many_arguments)]
pub fn endpoint_trace(
    kind: &str,
    f_q: f64,
    f_c: f64,
    g: f64,
    eps: f64,
    f_d: f64,
    max_len: f64,
    points: usize,
) -> Result<String, JsError> {
    let sys = demo::system(f_q, f_c, g).map_err(js)?;
    let f_d = (f_d > 0.0).then_some(f_d);
    let trace = demo::endpoint_trace(demo::kind(kind).map_err(js)?, &sys, eps, f_d, max_len, points)
        .map_err(js)?;
    serde_json::to_string(&trace).map_err(js)
}

/// Chevron map around the analytic matching frequency.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn chevron(
    kind: &str,
    f_q: f64,
    f_c: f64,
    g: f64,
    eps: f64,
    half_width: f64,
    n_freq: usize,
    n_len: usize,
) -> Result<String, JsError> {
    let sys = demo::system(f_q, f_c, g).map_err(js)?;
    let map = demo::chevron(demo::kind(kind).map_err(js)?, &sys, eps, half_width, n_freq, n_len)
        .map_err(js)?;
    serde_json::to_string(&map).map_err(js)
}
