//! Browser bindings for the demo page. Each export returns a JSON string.

use perispec::checks::ScanConfig;
use perispec::dynamics::{theorem7_probe, DelaySystem, ForcingSpec};
use perispec::eigen::eigenvalues;
use perispec::resolvent::{rect_grid, resolvent_norm_scan};
use perispec::scan::{grid_mean_norms, spectrum_scan};
use perispec::sequence::BoundedSeq;
use perispec::{CMatrix, CVector, Complex};
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_HORIZON: usize = 1 << 18;
const MAX_GRID: usize = 256;

fn text(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Scalar sequence `Σ_j a_j e^{iφ_j n} + a·rⁿ`, scanned on `grid_size` angles.
pub fn scan_modes_json(
    angles: &[f64],
    amplitudes: &[f64],
    decay_ratio: f64,
    horizon: usize,
    grid_size: usize,
) -> Result<String, String> {
    if angles.len() != amplitudes.len() {
        return Err("angles and amplitudes differ in length".into());
    }
    if horizon > MAX_HORIZON {
        return Err(format!("horizon is capped at {MAX_HORIZON} in the browser"));
    }
    if !(0.0..1.0).contains(&decay_ratio) {
        return Err("decay ratio must lie in [0, 1)".into());
    }
    let x = BoundedSeq::scalar_fn(horizon, |n| {
        let modes: Complex = angles
            .iter()
            .zip(amplitudes)
            .map(|(&phi, &a)| Complex::from_polar(a, phi * n as f64))
            .sum();
        modes + decay_ratio.powi(n as i32)
    })
    .map_err(text)?;
    let cfg = ScanConfig {
        grid_size,
        ..ScanConfig::default()
    };
    let report = spectrum_scan(&x, grid_size, cfg.epsilon_for(&x)).map_err(text)?;
    let curve = grid_mean_norms(&x, grid_size).map_err(text)?;
    Ok(json!({"report": report, "curve": curve}).to_string())
}

/// `log10 ‖(λ − A)⁻¹‖` on an `n × n` grid over `[-r, r]²`; entries are
/// interleaved `re, im` pairs in row-major order.
pub fn resolvent_grid_json(entries: &[f64], half_width: f64, n: usize) -> Result<String, String> {
    if !entries.len().is_multiple_of(2) {
        return Err("entries must be re, im pairs".into());
    }
    let d = (entries.len() / 2).isqrt();
    if d * d * 2 != entries.len() {
        return Err("entries do not form a square matrix".into());
    }
    if !(2..=MAX_GRID).contains(&n) {
        return Err(format!("grid size must lie in 2..={MAX_GRID}"));
    }
    let a = CMatrix::new(d, entries.chunks(2).map(|p| Complex::new(p[0], p[1])).collect()).map_err(text)?;
    let grid = rect_grid((-half_width, half_width), (-half_width, half_width), n, n);
    let log_norms: Vec<Option<f64>> = resolvent_norm_scan(&a, &grid)
        .iter()
        .map(|s| (!s.singular_flag).then(|| s.resolvent_norm.log10()))
        .collect();
    let eigs = eigenvalues(&a).map_err(text)?;
    Ok(json!({"n": n, "half_width": half_width, "log_norms": log_norms, "eigenvalues": eigs}).to_string())
}

/// Delay equation `x_{n+p} = b·xₙ` with scalar `b` and initial values
/// `x₀ … x_{p−1}` given as real numbers.
pub fn delay_probe_json(b_re: f64, b_im: f64, initial: &[f64], horizon: usize) -> Result<String, String> {
    if horizon > MAX_HORIZON {
        return Err(format!("horizon is capped at {MAX_HORIZON} in the browser"));
    }
    let b = CMatrix::from_diag(&[Complex::new(b_re, b_im)]);
    let init: Vec<CVector> = initial.iter().map(|&v| CVector::from_real(&[v])).collect();
    let system = DelaySystem::new(b, init, ForcingSpec::zero()).map_err(text)?;
    let report = theorem7_probe(&system, horizon, 1e-8, &ScanConfig::default()).map_err(text)?;
    serde_json::to_string(&report).map_err(text)
}

#[wasm_bindgen]
pub fn scan_modes(
    angles: &[f64],
    amplitudes: &[f64],
    decay_ratio: f64,
    horizon: usize,
    grid_size: usize,
) -> Result<String, JsValue> {
    scan_modes_json(angles, amplitudes, decay_ratio, horizon, grid_size).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn resolvent_grid(entries: &[f64], half_width: f64, n: usize) -> Result<String, JsValue> {
    resolvent_grid_json(entries, half_width, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn delay_probe(b_re: f64, b_im: f64, initial: &[f64], horizon: usize) -> Result<String, JsValue> {
    delay_probe_json(b_re, b_im, initial, horizon).map_err(|e| JsValue::from_str(&e))
}
