//! Operational checks that pair a tail statistic with a spectrum scan, and
//! the power-bounded iterate-difference check for matrices.

use serde::{Deserialize, Serialize};

use crate::eigen::{power_bounded_probe, spectrum_info, PowerBoundReport, DEFAULT_PERIPHERAL_TOL};
use crate::error::{Error, Result};
use crate::linalg::{operator_norm, CMatrix, Complex};
use crate::scan::{default_epsilon, default_tol_vanish, spectrum_scan, Detection, DEFAULT_GRID_SIZE};
use crate::sequence::{
    angular_distance, tail_norm, tail_stats, unimodular, BoundedSeq, TailStats, UNIMODULAR_TOL,
};

/// Angular distance within which a scan point is identified with θ.
pub const THETA_MATCH: f64 = 1e-3;
/// Sup-norm bound used when probing power boundedness.
pub const POWER_BOUND: f64 = 1e8;
/// Iterate differences at or below this count as converged.
pub const KTZ_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub grid_size: usize,
    pub epsilon: Option<f64>,
    pub tol_vanish: Option<f64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            grid_size: DEFAULT_GRID_SIZE,
            epsilon: None,
            tol_vanish: None,
        }
    }
}

impl ScanConfig {
    pub fn epsilon_for(&self, x: &BoundedSeq) -> f64 {
        self.epsilon.unwrap_or_else(|| default_epsilon(x))
    }

    pub fn tol_vanish_for(&self, x: &BoundedSeq) -> f64 {
        self.tol_vanish.unwrap_or_else(|| default_tol_vanish(x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Verdict {
    pub tail: TailStats,
    pub tol_vanish: f64,
    pub vanishing: bool,
    pub epsilon: f64,
    pub detected: Vec<Detection>,
    pub scan_empty: bool,
    pub consistent: bool,
}

/// Vanishing tail against an empty scan.
pub fn theorem1_check(x: &BoundedSeq, cfg: &ScanConfig) -> Result<Theorem1Verdict> {
    let tail = tail_norm(x, x.horizon() / 2)?;
    let tol_vanish = cfg.tol_vanish_for(x);
    let epsilon = cfg.epsilon_for(x);
    let scan = spectrum_scan(x, cfg.grid_size, epsilon)?;
    let vanishing = tail.tail_sup <= tol_vanish;
    let scan_empty = scan.detected.is_empty();
    Ok(Theorem1Verdict {
        tail,
        tol_vanish,
        vanishing,
        epsilon,
        detected: scan.detected,
        scan_empty,
        consistent: vanishing == scan_empty,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem3Verdict {
    pub theta: Complex,
    /// Statistics of `x_{n+1} − θxₙ` over `[N/2, N−1)`.
    pub difference_tail: TailStats,
    pub tol_vanish: f64,
    pub difference_vanishes: bool,
    pub epsilon: f64,
    pub detected: Vec<Detection>,
    /// Scan is exactly one point, within [`THETA_MATCH`] of θ.
    pub scan_is_theta: bool,
    /// Scan is empty or exactly θ; a vanishing sequence also has a
    /// vanishing difference.
    pub scan_within_theta: bool,
    pub consistent: bool,
}

/// Vanishing of `x_{n+1} − θxₙ` against a scan concentrated at θ.
pub fn theorem3_check(x: &BoundedSeq, theta: Complex, cfg: &ScanConfig) -> Result<Theorem3Verdict> {
    let theta = unimodular(theta, UNIMODULAR_TOL)?;
    let n = x.horizon();
    let diff = x.difference(theta);
    let difference_tail = tail_stats(&diff, n / 2, n - 1);
    let tol_vanish = cfg.tol_vanish_for(x);
    let epsilon = cfg.epsilon_for(x);
    let scan = spectrum_scan(x, cfg.grid_size, epsilon)?;
    let difference_vanishes = difference_tail.tail_sup <= tol_vanish;
    let near = |d: &Detection| angular_distance(d.theta, theta) <= THETA_MATCH;
    let scan_is_theta = scan.detected.len() == 1 && near(&scan.detected[0]);
    let scan_within_theta = scan.detected.len() <= 1 && scan.detected.iter().all(near);
    Ok(Theorem3Verdict {
        theta,
        difference_tail,
        tol_vanish,
        difference_vanishes,
        epsilon,
        detected: scan.detected,
        scan_is_theta,
        scan_within_theta,
        consistent: difference_vanishes == scan_within_theta,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KtzVerdict {
    pub theta: Complex,
    pub power: PowerBoundReport,
    pub peripheral: Vec<Complex>,
    pub power_bounded: bool,
    pub peripheral_within_theta: bool,
    pub hypotheses_met: bool,
    /// `sup ‖T^{n+1} − θTⁿ‖` over `[n_max/2, n_max]`; absent when the
    /// hypotheses fail.
    pub difference_tail_sup: Option<f64>,
    /// `‖T^{n_max+1} − θT^{n_max}‖`
    pub final_difference_norm: Option<f64>,
    pub tol: f64,
    pub limit_attained: bool,
}

/// Power boundedness and `σ(T) ∩ ∂𝔻 ⊆ {θ}`, then the decay of
/// `T^{n+1} − θTⁿ = Tⁿ(T − θI)`.
pub fn ktz_check(t: &CMatrix, theta: Complex, n_max: usize) -> Result<KtzVerdict> {
    let theta = unimodular(theta, UNIMODULAR_TOL)?;
    let power = power_bounded_probe(t, n_max, POWER_BOUND)?;
    let peripheral = spectrum_info(t, DEFAULT_PERIPHERAL_TOL)?.peripheral;
    let power_bounded = power.power_bounded();
    let peripheral_within_theta = peripheral.iter().all(|&p| (p - theta).norm() <= 1e-6);
    let hypotheses_met = power_bounded && peripheral_within_theta;

    let (mut difference_tail_sup, mut final_difference_norm) = (None, None);
    if hypotheses_met {
        let mut d = t.shift(-theta);
        let mut sup: f64 = 0.0;
        for n in 0..=n_max {
            if n >= n_max / 2 {
                let norm = operator_norm(&d)?;
                sup = sup.max(norm);
                if n == n_max {
                    final_difference_norm = Some(norm);
                }
            }
            if n < n_max {
                d = t * &d;
            }
        }
        difference_tail_sup = Some(sup);
    }
    Ok(KtzVerdict {
        theta,
        power,
        peripheral,
        power_bounded,
        peripheral_within_theta,
        hypotheses_met,
        difference_tail_sup,
        final_difference_norm,
        tol: KTZ_TOL,
        limit_attained: final_difference_norm.is_some_and(|v| v <= KTZ_TOL),
    })
}

/// Rejects thetas that are not unimodular, for callers taking user input.
pub fn require_unimodular(theta: Complex) -> Result<Complex> {
    unimodular(theta, UNIMODULAR_TOL).map_err(|_| {
        Error::precondition(format!("theta {theta} must satisfy ||θ| − 1| <= {UNIMODULAR_TOL:e}"))
    })
}
