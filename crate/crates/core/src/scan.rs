//! Unit-circle scan of rotated Cesàro means.
//!
//! A point θ is reported when the long-run mean `(1/N) Σ θ⁻ⁿ xₙ` stays above
//! a threshold. This is a computable stand-in for the spectrum of a bounded
//! sequence; for finite sums of eigen-sequences plus a vanishing term the two
//! coincide, in general no such claim is made.

use std::f64::consts::TAU;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CVector, Complex};
use crate::sequence::{angle_of, angular_distance, rotated_mean_range, BoundedSeq};

pub const DEFAULT_GRID_SIZE: usize = 4096;
pub const MIN_GRID_SIZE: usize = 64;
pub const MAX_DETECTIONS: usize = 64;
pub const PROXY_NOTE: &str =
    "detections are points where rotated Cesaro means stay above epsilon; \
     this equals the sequence spectrum for finite sums of eigen-sequences plus a vanishing term";

const GOLDEN_ITERS: usize = 64;

/// `max(1e-6, 0.01·sup‖xₙ‖)`
pub fn default_epsilon(x: &BoundedSeq) -> f64 {
    (0.01 * x.sup_norm()).max(1e-6)
}

/// `max(1e-9, 1e-3·sup‖xₙ‖)`
pub fn default_tol_vanish(x: &BoundedSeq) -> f64 {
    (1e-3 * x.sup_norm()).max(1e-9)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub theta: Complex,
    /// Argument of θ in `[0, 2π)`.
    pub angle: f64,
    pub peak_mean_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumScanReport {
    pub grid_size: usize,
    /// Grid actually searched; oversampled when the horizon exceeds `grid_size`.
    pub search_grid_size: usize,
    pub epsilon: f64,
    pub horizon: usize,
    pub detected: Vec<Detection>,
    pub proxy: String,
}

impl SpectrumScanReport {
    pub fn thetas(&self) -> Vec<Complex> {
        self.detected.iter().map(|d| d.theta).collect()
    }
}

/// Rotated means at `θ_m = e^{2πim/K}`, `m < K`, over the whole horizon.
///
/// Terms are folded modulo `K` before one length-`K` transform, which is
/// exact for any relation between `K` and the horizon.
pub fn grid_means(values: &[CVector], k: usize) -> Vec<CVector> {
    let n = values.len();
    let dim = values[0].dim();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(k);
    let mut columns: Vec<Vec<Complex>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut buf = vec![c(0.0, 0.0); k];
        for (i, x) in values.iter().enumerate() {
            buf[i % k] += x[j];
        }
        fft.process(&mut buf);
        columns.push(buf);
    }
    let inv_n = 1.0 / n as f64;
    (0..k)
        .map(|m| CVector::from((0..dim).map(|j| columns[j][m] * inv_n).collect::<Vec<_>>()))
        .collect()
}

/// `‖grid_means‖` for plotting.
pub fn grid_mean_norms(x: &BoundedSeq, k: usize) -> Result<Vec<f64>> {
    check_grid(k)?;
    Ok(grid_means(x.values(), k).iter().map(|v| v.norm()).collect())
}

fn check_grid(k: usize) -> Result<()> {
    if k < MIN_GRID_SIZE {
        return Err(Error::precondition(format!(
            "grid_size must be at least {MIN_GRID_SIZE}, got {k}"
        )));
    }
    Ok(())
}

/// `(1/N) Σ_{n<N} e^{inδ}`
pub fn dirichlet_mean(delta: f64, n: usize) -> Complex {
    let half = 0.5 * delta;
    let s = half.sin();
    let nf = n as f64;
    if s.abs() < 1e-12 {
        // δ is a multiple of 2π up to rounding
        let k = (delta / TAU).round();
        let rest = delta - k * TAU;
        return Complex::from_polar(1.0, 0.5 * (nf - 1.0) * rest);
    }
    Complex::from_polar((nf * half).sin() / (nf * s), (nf - 1.0) * half)
}

struct Peeled {
    angle: f64,
    v: CVector,
}

fn residual_mean(values: &[CVector], angle: f64, found: &[Peeled]) -> CVector {
    let n = values.len();
    let mut m = rotated_mean_range(values, Complex::from_polar(1.0, angle), 0, n);
    for p in found {
        m.axpy(-dirichlet_mean(p.angle - angle, n), &p.v);
    }
    m
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_ITERS {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
        if b - a < 1e-13 {
            break;
        }
    }
    if f1 >= f2 {
        x1
    } else {
        x2
    }
}

/// Scans the unit circle on a `grid_size`-point grid for persistent rotated
/// means.
///
/// Peaks are taken greedily from the grid of residual means: each maximum is
/// refined by golden-section search on the angle, its contribution
/// `v·D_N(θ̂ − θ_m)` is removed from every grid point, and the search repeats
/// until no residual mean exceeds `epsilon`. Removing the Dirichlet kernel of
/// each found point keeps its sidelobes from being reported as new points.
pub fn spectrum_scan(x: &BoundedSeq, grid_size: usize, epsilon: f64) -> Result<SpectrumScanReport> {
    check_grid(grid_size)?;
    if !(epsilon > 0.0) {
        return Err(Error::precondition(format!("epsilon must be positive, got {epsilon}")));
    }
    let values = x.values();
    let n = values.len();
    let search = grid_size.max(2 * n.next_power_of_two());
    let step = TAU / search as f64;
    let min_sep = TAU / grid_size as f64;

    let mut resid = grid_means(values, search);
    let mut masked = vec![false; search];
    let mut found: Vec<Peeled> = Vec::new();
    let mut detected: Vec<Detection> = Vec::new();

    while detected.len() < MAX_DETECTIONS {
        let best = (0..search)
            .filter(|&m| !masked[m])
            .map(|m| (m, resid[m].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let Some((m, peak)) = best else { break };
        if peak <= epsilon {
            break;
        }
        masked[m] = true;
        let phi0 = m as f64 * step;
        let phi = golden_max(|a| residual_mean(values, a, &found).norm(), phi0 - step, phi0 + step);
        let theta = Complex::from_polar(1.0, phi);
        if detected.iter().any(|d| angular_distance(d.theta, theta) <= min_sep) {
            continue;
        }
        let v = residual_mean(values, phi, &found);
        let raw = rotated_mean_range(values, theta, 0, n).norm();
        if raw <= epsilon {
            continue;
        }
        for (j, r) in resid.iter_mut().enumerate() {
            r.axpy(-dirichlet_mean(phi - j as f64 * step, n), &v);
        }
        found.push(Peeled { angle: phi, v });
        detected.push(Detection {
            theta,
            angle: angle_of(theta),
            peak_mean_norm: raw,
        });
    }
    debug_assert_eq!(found.len(), detected.len());
    detected.sort_by(|a, b| a.angle.total_cmp(&b.angle));

    Ok(SpectrumScanReport {
        grid_size,
        search_grid_size: search,
        epsilon,
        horizon: n,
        detected,
        proxy: PROXY_NOTE.to_string(),
    })
}

pub fn spectrum_scan_default(x: &BoundedSeq) -> Result<SpectrumScanReport> {
    spectrum_scan(x, DEFAULT_GRID_SIZE, default_epsilon(x))
}
