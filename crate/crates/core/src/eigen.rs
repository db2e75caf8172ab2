//! Eigenvalues, spectral radius, peripheral spectrum and power behaviour.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::{classify_log_norms, GrowthClass};
use crate::linalg::{mat_power_seq, operator_norm, CMatrix, Complex, LogNorm};
use crate::poly::{char_poly, poly_roots};

/// Default tolerance for membership in the unit circle.
pub const DEFAULT_PERIPHERAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumInfo {
    pub eigenvalues: Vec<Complex>,
    pub spectral_radius: f64,
    /// Distinct unit-circle eigenvalues, normalized to modulus one and sorted
    /// by argument.
    pub peripheral: Vec<Complex>,
    pub peripheral_tol: f64,
}

impl SpectrumInfo {
    /// Largest modulus among eigenvalues that are not peripheral.
    pub fn interior_radius(&self) -> f64 {
        self.eigenvalues
            .iter()
            .filter(|l| (l.norm() - 1.0).abs() > self.peripheral_tol)
            .map(|l| l.norm())
            .fold(0.0, f64::max)
    }
}

pub fn eigenvalues(a: &CMatrix) -> Result<Vec<Complex>> {
    poly_roots(&char_poly(a))
}

pub fn spectrum_info(a: &CMatrix, peripheral_tol: f64) -> Result<SpectrumInfo> {
    if !(peripheral_tol > 0.0 && peripheral_tol <= 0.1) {
        return Err(Error::precondition(format!(
            "peripheral_tol must lie in (0, 0.1], got {peripheral_tol}"
        )));
    }
    let eigenvalues = eigenvalues(a)?;
    let spectral_radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let on_circle = |z: Complex| (z.norm() - 1.0).abs() <= peripheral_tol;

    let candidates = eigenvalues.iter().copied().filter(|&z| on_circle(z));

    // merge within 10·tol and normalize to the unit circle
    let merge = 10.0 * peripheral_tol;
    let mut groups: Vec<Vec<Complex>> = Vec::new();
    for z in candidates {
        match groups
            .iter_mut()
            .find(|g| g.iter().any(|w| (w - z).norm() <= merge))
        {
            Some(g) => g.push(z),
            None => groups.push(vec![z]),
        }
    }
    let mut peripheral: Vec<Complex> = groups
        .into_iter()
        .map(|g| {
            let m = g.iter().sum::<Complex>() / g.len() as f64;
            m / m.norm()
        })
        .collect();
    peripheral.sort_by(|a, b| a.arg().total_cmp(&b.arg()));

    Ok(SpectrumInfo {
        eigenvalues,
        spectral_radius,
        peripheral,
        peripheral_tol,
    })
}

/// `‖χ_A(A)‖`, with `χ_A(A)` evaluated by Horner's rule.
pub fn cayley_hamilton_residual(a: &CMatrix) -> Result<f64> {
    operator_norm(&char_poly(a).eval_matrix(a))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerBoundReport {
    pub n_max: usize,
    pub sup_norm: f64,
    pub bound: f64,
    pub within_bound: bool,
    pub growth: GrowthClass,
}

impl PowerBoundReport {
    pub fn power_bounded(&self) -> bool {
        self.within_bound && self.growth.is_bounded()
    }
}

/// `sup_{n<=n_max} ‖Aⁿ‖`, a bound check, and a growth classification of the
/// second half of the range.
pub fn power_bounded_probe(a: &CMatrix, n_max: usize, bound: f64) -> Result<PowerBoundReport> {
    if n_max < 8 {
        return Err(Error::precondition("power_bounded_probe needs n_max >= 8"));
    }
    let seq = mat_power_seq(a, n_max)?;
    let sup_norm = seq.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let tail: Vec<(usize, f64)> = seq
        .iter()
        .filter(|p| p.n >= n_max / 2)
        .map(|p| (p.n, p.log_norm.value()))
        .collect();
    Ok(PowerBoundReport {
        n_max,
        sup_norm,
        bound,
        within_bound: sup_norm <= bound,
        growth: classify_log_norms(&tail),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GelfandSample {
    pub n: usize,
    /// `ln‖Aⁿ‖ / n`
    pub rate: LogNorm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GelfandReport {
    pub samples: Vec<GelfandSample>,
    pub estimate: f64,
    pub eig_radius: f64,
    pub discrepancy: f64,
    pub nilpotent: bool,
}

/// Spectral radius as `exp(min_{n ∈ [n_max/2, n_max]} ln‖Aⁿ‖/n)`.
///
/// `ln‖Aⁿ‖` is subadditive, so `ln‖Aⁿ‖/n` converges to its infimum; the
/// minimum over the tail is the estimate.
pub fn gelfand_radius_estimate(a: &CMatrix, n_max: usize) -> Result<GelfandReport> {
    if n_max < 16 {
        return Err(Error::precondition("gelfand_radius_estimate needs n_max >= 16"));
    }
    let seq = mat_power_seq(a, n_max)?;
    let samples: Vec<GelfandSample> = seq
        .iter()
        .map(|p| GelfandSample {
            n: p.n,
            rate: match p.log_norm {
                LogNorm::Finite(l) => LogNorm::Finite(l / p.n as f64),
                LogNorm::NegInfinity => LogNorm::NegInfinity,
            },
        })
        .collect();
    let nilpotent = samples.iter().any(|s| s.rate.is_zero_norm());
    let estimate = if nilpotent {
        0.0
    } else {
        samples
            .iter()
            .filter(|s| s.n >= n_max / 2)
            .map(|s| s.rate.value())
            .fold(f64::INFINITY, f64::min)
            .exp()
    };
    let eig_radius = spectrum_info(a, DEFAULT_PERIPHERAL_TOL)?.spectral_radius;
    Ok(GelfandReport {
        samples,
        estimate,
        eig_radius,
        discrepancy: (estimate - eig_radius).abs(),
        nilpotent,
    })
}
