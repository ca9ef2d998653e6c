//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export takes the three damping coefficients and an element count
//! per interval (unit intervals `[0,1]`, `[1,2]`, `[2,3]`) and returns a
//! flat `Float64Array` of interleaved pairs that the page plots directly.

use translab::analysis::resolved_band;
use translab::dynamics::{default_dt, simulate};
use translab::spectral::{eigenvalues, grid, ResolventOperator};
use translab::{Discretization, InitialData, Profile, StructureConfig};
use wasm_bindgen::prelude::*;

/// Largest element count per interval the page may request; keeps every
/// operation interactive.
pub const MAX_ELEMENTS: usize = 32;

/// Largest number of `(t, E)` pairs returned by [`energy_decay`].
pub const MAX_TRACE_POINTS: usize = 400;

fn discretize(rho1: f64, rho2: f64, beta: f64, elements: usize) -> Result<Discretization, String> {
    if elements == 0 || elements > MAX_ELEMENTS {
        return Err(format!("elements must be between 1 and {MAX_ELEMENTS}"));
    }
    Discretization::new(StructureConfig::unit(rho1, rho2, beta), elements, elements, elements)
        .map_err(|e| e.to_string())
}

/// Damping regime tag (`DDD`, `UDU`, `Conservative`, `Other`), or an error
/// message for invalid coefficients.
pub fn regime_of(rho1: f64, rho2: f64, beta: f64) -> Result<String, String> {
    StructureConfig::unit(rho1, rho2, beta)
        .validate()
        .map(|cfg| cfg.damping_case().tag().to_string())
        .map_err(|e| e.to_string())
}

/// `(t, E(t) / E(0))` pairs for the structure released at rest from the
/// bump `sin²(πx/3)`.
pub fn energy_decay_pairs(
    rho1: f64,
    rho2: f64,
    beta: f64,
    elements: usize,
    t_final: f64,
) -> Result<Vec<f64>, String> {
    let disc = discretize(rho1, rho2, beta, elements)?;
    let k = std::f64::consts::PI / 3.0;
    let bump = || Profile::function(move |x| (k * x).sin().powi(2), move |x| k * (2.0 * k * x).sin());
    let y0 = disc
        .interpolate(&InitialData::displacement(bump(), bump(), bump()))
        .map_err(|e| e.to_string())?;
    let sim = simulate(&disc.pencil, &y0, default_dt(&disc.cfg), t_final, 0)
        .map_err(|e| e.to_string())?;
    let trace = &sim.trace;
    let e0 = trace.energy[0];
    let stride = trace.len().div_ceil(MAX_TRACE_POINTS).max(1);
    let mut out = Vec::with_capacity(2 * MAX_TRACE_POINTS + 2);
    for i in (0..trace.len()).step_by(stride) {
        out.push(trace.times[i]);
        out.push(trace.energy[i] / e0);
    }
    Ok(out)
}

/// `(Re μ, Im μ)` for every eigenvalue with `|Im μ|` inside the band the
/// default time step resolves. The abscissa of the full spectrum comes
/// from [`abscissa_of`].
pub fn spectrum_pairs(rho1: f64, rho2: f64, beta: f64, elements: usize) -> Result<Vec<f64>, String> {
    let disc = discretize(rho1, rho2, beta, elements)?;
    let band = resolved_band(default_dt(&disc.cfg));
    let report = eigenvalues(&disc.pencil).map_err(|e| e.to_string())?;
    Ok(report
        .eigenvalues
        .iter()
        .filter(|m| m.im.abs() <= band)
        .flat_map(|m| [m.re, m.im])
        .collect())
}

/// Spectral abscissa over the full discrete spectrum.
pub fn abscissa_of(rho1: f64, rho2: f64, beta: f64, elements: usize) -> Result<f64, String> {
    let disc = discretize(rho1, rho2, beta, elements)?;
    eigenvalues(&disc.pencil)
        .map(|r| r.abscissa)
        .map_err(|e| e.to_string())
}

/// `(λ, ‖(iλ - A)⁻¹‖)` on `steps` points of `[-lambda_max, lambda_max]`.
/// Grid points on an eigenvalue carry `+∞`.
pub fn resolvent_pairs(
    rho1: f64,
    rho2: f64,
    beta: f64,
    elements: usize,
    lambda_max: f64,
    steps: usize,
) -> Result<Vec<f64>, String> {
    let disc = discretize(rho1, rho2, beta, elements)?;
    let lambdas = grid(-lambda_max, lambda_max, steps).map_err(|e| e.to_string())?;
    let table = ResolventOperator::new(&disc.pencil)
        .map_err(|e| e.to_string())?
        .sweep(&lambdas);
    Ok(table
        .lambdas
        .iter()
        .zip(&table.norms)
        .flat_map(|(l, n)| [*l, *n])
        .collect())
}

fn js(result: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
    result.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn regime(rho1: f64, rho2: f64, beta: f64) -> Result<String, JsError> {
    regime_of(rho1, rho2, beta).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn energy_decay(
    rho1: f64,
    rho2: f64,
    beta: f64,
    elements: usize,
    t_final: f64,
) -> Result<Vec<f64>, JsError> {
    js(energy_decay_pairs(rho1, rho2, beta, elements, t_final))
}

#[wasm_bindgen]
pub fn spectrum(rho1: f64, rho2: f64, beta: f64, elements: usize) -> Result<Vec<f64>, JsError> {
    js(spectrum_pairs(rho1, rho2, beta, elements))
}

#[wasm_bindgen]
pub fn abscissa(rho1: f64, rho2: f64, beta: f64, elements: usize) -> Result<f64, JsError> {
    abscissa_of(rho1, rho2, beta, elements).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn resolvent_curve(
    rho1: f64,
    rho2: f64,
    beta: f64,
    elements: usize,
    lambda_max: f64,
    steps: usize,
) -> Result<Vec<f64>, JsError> {
    js(resolvent_pairs(rho1, rho2, beta, elements, lambda_max, steps))
}
