//! Browser bindings for the interactive demo in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string, so the page
//! needs no extra glue beyond what `wasm-bindgen --target web` generates.

use giantcz::interference::df_three_point;
use giantcz::protocol::{preset, run_cz, run_dynamics, GateConfig, Geometry, PhaseConvention};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest chain the page may request; keeps each call interactive.
pub const MAX_SITES: usize = 80;

#[derive(Debug, Serialize, PartialEq)]
pub struct DfCurve {
    pub zeta: Vec<f64>,
    /// One row per `zeta`: the non-edge dark frequencies, ascending.
    pub frequencies: Vec<Vec<f64>>,
}

pub fn df_curve(dx: usize, zeta_max: f64, steps: usize) -> Result<DfCurve, String> {
    if !(zeta_max > 0.0 && zeta_max < 2.0) || steps < 2 || steps > 2000 {
        return Err("need 0 < zeta_max < 2 and 2 <= steps <= 2000".into());
    }
    let mut curve = DfCurve {
        zeta: Vec::with_capacity(steps),
        frequencies: Vec::with_capacity(steps),
    };
    for i in 0..steps {
        let zeta = zeta_max * i as f64 / (steps - 1) as f64;
        let sols = df_three_point(dx, zeta).map_err(|e| e.to_string())?;
        curve.zeta.push(zeta);
        curve
            .frequencies
            .push(sols.iter().filter(|s| !s.band_edge).map(|s| s.frequency).collect());
    }
    Ok(curve)
}

/// Three-point gate parameters as exposed on the page. `omega1` is placed on
/// the positive dark frequency, `omega2 = omega1 + alpha1 + detuning`.
pub fn demo_config(num_sites: usize, zeta: f64, g: f64, detuning: f64, t_max: f64) -> Result<GateConfig, String> {
    if !(10..=MAX_SITES).contains(&num_sites) {
        return Err(format!("chain length must be between 10 and {MAX_SITES}"));
    }
    let sols = df_three_point(2, zeta).map_err(|e| e.to_string())?;
    let omega1 = sols
        .iter()
        .filter(|s| !s.band_edge && s.frequency > 0.0)
        .map(|s| s.frequency)
        .next()
        .ok_or("no usable dark frequency for this zeta")?;
    let mut cfg = preset("3e").map_err(|e| e.to_string())?;
    cfg.num_sites = num_sites;
    cfg.geometry = Geometry::ThreePoint { dx: 2, zeta };
    cfg.g = g;
    cfg.omega1 = omega1;
    cfg.alpha1 = -2.0 * omega1;
    cfg.omega2 = omega1 + cfg.alpha1 + detuning;
    cfg.t_max = t_max;
    cfg.dt = (t_max / 400.0).max(0.1);
    cfg.phase_convention = PhaseConvention::None;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

#[derive(Debug, Serialize)]
pub struct Trace {
    pub omega1: f64,
    pub omega2: f64,
    pub t: Vec<f64>,
    pub n11: Vec<f64>,
    pub n20: Vec<f64>,
    pub fidelity: Vec<f64>,
    pub best_fidelity: f64,
    pub best_time: f64,
}

pub fn gate_trace(num_sites: usize, zeta: f64, g: f64, detuning: f64, t_max: f64) -> Result<Trace, String> {
    let cfg = demo_config(num_sites, zeta, g, detuning, t_max)?;
    let dynamics = run_dynamics(&cfg).map_err(|e| e.to_string())?;
    let gate = run_cz(&cfg).map_err(|e| e.to_string())?;
    Ok(Trace {
        omega1: cfg.omega1,
        omega2: cfg.omega2,
        t: dynamics.times,
        n11: dynamics.n11,
        n20: dynamics.n20,
        fidelity: gate.samples.iter().map(|s| s.process_fidelity).collect(),
        best_fidelity: gate.result.process_fidelity,
        best_time: gate.result.gate_time,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

/// Dark frequencies of the three-point layout for `zeta` in `[0, zeta_max]`.
#[wasm_bindgen(js_name = dfCurve)]
pub fn df_curve_js(dx: usize, zeta_max: f64, steps: usize) -> Result<String, JsValue> {
    to_js(df_curve(dx, zeta_max, steps))
}

/// Populations and CZ fidelity over time for a small chain.
#[wasm_bindgen(js_name = gateTrace)]
pub fn gate_trace_js(num_sites: usize, zeta: f64, g: f64, detuning: f64, t_max: f64) -> Result<String, JsValue> {
    to_js(gate_trace(num_sites, zeta, g, detuning, t_max))
}
