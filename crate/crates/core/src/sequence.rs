//! Finite-horizon bounded vector sequences, their tail statistics, rotated
//! Cesàro means and mode decompositions.
//!
//! A bounded sequence `x = {xₙ}` is represented by its first `N` terms. The
//! quotient norm `limsup ‖xₙ‖` is approximated by the supremum over the
//! trailing window `[N/2, N)` together with the slope of `ln‖xₙ‖` against
//! `ln n`, which separates slow decay from persistence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::log_log_slope;
use crate::linalg::{c, CVector, Complex};
use crate::random;

pub const MIN_HORIZON: usize = 16;
/// Powers of a unimodular number are renormalized this often.
pub const RENORMALIZE_EVERY: usize = 1024;
/// Allowed deviation of a rotation from the unit circle.
pub const UNIMODULAR_TOL: f64 = 1e-12;

/// `θ⁰, θ¹, θ², …` by repeated multiplication, renormalized to modulus one
/// every [`RENORMALIZE_EVERY`] steps.
///
/// Complex multiplication commutes with conjugation in IEEE arithmetic, so
/// the powers of `conj(θ)` are exactly the conjugates of the powers of `θ`.
#[derive(Clone, Debug)]
pub struct UnimodularPowers {
    base: Complex,
    current: Complex,
    n: usize,
}

impl UnimodularPowers {
    pub fn new(theta: Complex) -> Self {
        UnimodularPowers {
            base: theta,
            current: c(1.0, 0.0),
            n: 0,
        }
    }
}

impl Iterator for UnimodularPowers {
    type Item = Complex;
    fn next(&mut self) -> Option<Complex> {
        let out = self.current;
        self.n += 1;
        self.current *= self.base;
        if self.n.is_multiple_of(RENORMALIZE_EVERY) {
            self.current /= self.current.norm();
        }
        Some(out)
    }
}

/// Checks `| |θ| − 1 | <= tol` and returns `θ/|θ|`.
pub fn unimodular(theta: Complex, tol: f64) -> Result<Complex> {
    let r = theta.norm();
    if !r.is_finite() || (r - 1.0).abs() > tol {
        return Err(Error::precondition(format!(
            "rotation {theta} is not unimodular (|θ| = {r})"
        )));
    }
    Ok(theta / r)
}

/// Angular distance on the circle, in `[0, π]`.
pub fn angular_distance(a: Complex, b: Complex) -> f64 {
    (a * b.conj()).arg().abs()
}

/// Argument in `[0, 2π)`.
pub fn angle_of(theta: Complex) -> f64 {
    let a = theta.arg();
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub theta: Complex,
    pub v: CVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayType {
    Geometric,
    Power,
    Log,
    None,
}

fn one() -> f64 {
    1.0
}

/// Vanishing perturbation `amplitude · δ(n) · w` with a seeded unit direction `w`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySpec {
    #[serde(rename = "type")]
    pub kind: DecayType,
    #[serde(default)]
    pub param: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

impl DecaySpec {
    pub fn none() -> Self {
        DecaySpec {
            kind: DecayType::None,
            param: 0.0,
            amplitude: 0.0,
        }
    }

    pub fn geometric(ratio: f64) -> Self {
        DecaySpec {
            kind: DecayType::Geometric,
            param: ratio,
            amplitude: 1.0,
        }
    }

    pub fn power(exponent: f64) -> Self {
        DecaySpec {
            kind: DecayType::Power,
            param: exponent,
            amplitude: 1.0,
        }
    }

    pub fn log() -> Self {
        DecaySpec {
            kind: DecayType::Log,
            param: 0.0,
            amplitude: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            DecayType::Geometric => self.param > 0.0 && self.param < 1.0,
            DecayType::Power => self.param > 0.0,
            DecayType::Log | DecayType::None => true,
        };
        if !ok || !self.amplitude.is_finite() {
            return Err(Error::precondition(format!("invalid decay {self:?}")));
        }
        Ok(())
    }

    /// Scalar profile `δ(n)`.
    pub fn profile(&self, n: usize) -> f64 {
        let n = n as f64;
        match self.kind {
            DecayType::Geometric => self.param.powf(n),
            DecayType::Power => (n + 1.0).powf(-self.param),
            DecayType::Log => 1.0 / (n + 2.0).ln(),
            DecayType::None => 0.0,
        }
    }
}

/// Serialized form of a sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceSpec {
    #[serde(alias = "custom_table")]
    Materialized { d: usize, values: Vec<CVector> },
    ModesPlusDecay {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<usize>,
        modes: Vec<ModeSpec>,
        decay: DecaySpec,
        horizon: usize,
        #[serde(default)]
        seed: u64,
    },
}

/// A materialized finite-horizon sequence in C^d.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedSeq {
    dim: usize,
    values: Vec<CVector>,
    sup_norm: f64,
    spec: Option<SequenceSpec>,
}

impl BoundedSeq {
    pub fn from_values(values: Vec<CVector>) -> Result<Self> {
        if values.len() < MIN_HORIZON {
            return Err(Error::precondition(format!(
                "horizon {} is below the minimum of {MIN_HORIZON}",
                values.len()
            )));
        }
        let dim = values[0].dim();
        if dim == 0 {
            return Err(Error::precondition("sequence vectors must be non-empty"));
        }
        let mut sup_norm: f64 = 0.0;
        for (i, v) in values.iter().enumerate() {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.dim(),
                });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(i));
            }
            sup_norm = sup_norm.max(v.norm());
        }
        Ok(BoundedSeq {
            dim,
            values,
            sup_norm,
            spec: None,
        })
    }

    /// Builds a sequence `xₙ = f(n)` for `n < horizon`.
    pub fn from_fn(horizon: usize, f: impl FnMut(usize) -> CVector) -> Result<Self> {
        BoundedSeq::from_values((0..horizon).map(f).collect())
    }

    pub fn scalar_fn(horizon: usize, mut f: impl FnMut(usize) -> Complex) -> Result<Self> {
        BoundedSeq::from_fn(horizon, |n| CVector::from(vec![f(n)]))
    }

    pub fn from_spec(spec: &SequenceSpec) -> Result<Self> {
        match spec {
            SequenceSpec::Materialized { d, values } => {
                let seq = BoundedSeq::from_values(values.clone())?;
                if seq.dim != *d {
                    return Err(Error::DimensionMismatch {
                        expected: *d,
                        found: seq.dim,
                    });
                }
                Ok(seq)
            }
            SequenceSpec::ModesPlusDecay {
                d,
                modes,
                decay,
                horizon,
                seed,
            } => {
                let mut seq = generate_modes_plus_decay(*d, modes, decay, *horizon, *seed)?;
                seq.spec = Some(spec.clone());
                Ok(seq)
            }
        }
    }

    /// Generator description if the sequence came from one, else the
    /// materialized values.
    pub fn to_spec(&self) -> SequenceSpec {
        self.spec.clone().unwrap_or_else(|| self.to_materialized_spec())
    }

    pub fn to_materialized_spec(&self) -> SequenceSpec {
        SequenceSpec::Materialized {
            d: self.dim,
            values: self.values.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[CVector] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// `x_{n+1} − θ·xₙ` for `n < N − 1`.
    pub fn difference(&self, theta: Complex) -> Vec<CVector> {
        self.values
            .windows(2)
            .map(|w| {
                let mut d = w[1].clone();
                d.axpy(-theta, &w[0]);
                d
            })
            .collect()
    }
}

fn generate_modes_plus_decay(
    d: Option<usize>,
    modes: &[ModeSpec],
    decay: &DecaySpec,
    horizon: usize,
    seed: u64,
) -> Result<BoundedSeq> {
    decay.validate()?;
    let dim = match (d, modes.first()) {
        (Some(d), _) => d,
        (None, Some(m)) => m.v.dim(),
        (None, None) => 1,
    };
    let thetas = modes
        .iter()
        .map(|m| {
            if m.v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.v.dim(),
                });
            }
            unimodular(m.theta, 1e-9)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rng = random::rng(seed);
    let mut direction = random::disk_vector(&mut rng, dim);
    let dn = direction.norm();
    if dn > 0.0 {
        direction = direction.scale(c(1.0 / dn, 0.0));
    }
    let mut powers: Vec<UnimodularPowers> = thetas.iter().map(|&t| UnimodularPowers::new(t)).collect();
    BoundedSeq::from_fn(horizon, |n| {
        let mut x = CVector::zeros(dim);
        for (m, p) in modes.iter().zip(powers.iter_mut()) {
            x.axpy(p.next().expect("infinite"), &m.v);
        }
        let w = decay.amplitude * decay.profile(n);
        if w != 0.0 {
            x.axpy(c(w, 0.0), &direction);
        }
        x
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailStats {
    pub window_start: usize,
    pub window_end: usize,
    pub tail_sup: f64,
    /// Slope of `ln‖xₙ‖` against `ln n` over the window; `None` when fewer
    /// than two nonzero terms exist.
    pub trend_slope: Option<f64>,
}

/// Tail statistics of `‖xₙ‖` over `[start, end)`.
pub fn tail_stats(values: &[CVector], start: usize, end: usize) -> TailStats {
    tail_stats_of_norms(start, end, (start..end).map(|n| values[n].norm()))
}

pub fn tail_stats_of_norms(start: usize, end: usize, norms: impl Iterator<Item = f64>) -> TailStats {
    let norms: Vec<f64> = norms.collect();
    let tail_sup = norms.iter().copied().fold(0.0, f64::max);
    let trend_slope = log_log_slope((start..end).zip(norms.iter().copied()));
    TailStats {
        window_start: start,
        window_end: end,
        tail_sup,
        trend_slope,
    }
}

pub fn tail_norm(x: &BoundedSeq, window_start: usize) -> Result<TailStats> {
    if window_start >= x.horizon() {
        return Err(Error::precondition(format!(
            "window start {window_start} is not below the horizon {}",
            x.horizon()
        )));
    }
    Ok(tail_stats(x.values(), window_start, x.horizon()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotatedMeanResult {
    pub theta: Complex,
    pub n_used: usize,
    pub mean: CVector,
    pub mean_norm: f64,
}

/// `(1/(end − start)) Σ_{start <= n < end} θ⁻ⁿ xₙ` for unimodular `θ`.
pub fn rotated_mean_range(values: &[CVector], theta: Complex, start: usize, end: usize) -> CVector {
    debug_assert!(start < end && end <= values.len());
    let dim = values[0].dim();
    let mut acc = CVector::zeros(dim);
    let powers = UnimodularPowers::new(theta.conj());
    for (n, p) in powers.take(end).enumerate().skip(start) {
        acc.axpy(p, &values[n]);
    }
    acc.scale(c(1.0 / (end - start) as f64, 0.0))
}

pub fn rotated_mean(x: &BoundedSeq, theta: Complex, n_used: usize) -> Result<RotatedMeanResult> {
    let theta = unimodular(theta, UNIMODULAR_TOL)?;
    if n_used == 0 || n_used > x.horizon() {
        return Err(Error::precondition(format!(
            "n_used must lie in 1..={}, got {n_used}",
            x.horizon()
        )));
    }
    let mean = rotated_mean_range(x.values(), theta, 0, n_used);
    let mean_norm = mean.norm();
    Ok(RotatedMeanResult {
        theta,
        n_used,
        mean,
        mean_norm,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub theta: Complex,
    pub v: CVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeDecomp {
    pub modes: Vec<Mode>,
    /// Averaging window used for the mode vectors.
    pub mean_window: (usize, usize),
    /// Statistics of `rₙ = xₙ − Σⱼ ϑⱼⁿ vⱼ`.
    pub residual: TailStats,
}

/// Minimum pairwise angular separation for averaging over `len` terms.
pub fn separation_bound(len: usize) -> f64 {
    10.0 / len as f64
}

fn check_separation(thetas: &[Complex], len: usize) -> Result<()> {
    let bound = separation_bound(len);
    for i in 0..thetas.len() {
        for j in 0..i {
            let sep = angular_distance(thetas[i], thetas[j]);
            if sep < bound {
                return Err(Error::precondition(format!(
                    "modes {} and {} ({} and {}) are {sep:e} rad apart, below 10/n = {bound:e}",
                    j, i, thetas[j], thetas[i]
                )));
            }
        }
    }
    Ok(())
}

/// Mode vectors from rotated means over `mean_window`, residual statistics
/// over `residual_window`.
pub fn extract_modes_over(
    values: &[CVector],
    thetas: &[Complex],
    mean_window: (usize, usize),
    residual_window: (usize, usize),
) -> Result<ModeDecomp> {
    let (ms, me) = mean_window;
    let (rs, re) = residual_window;
    if !(ms < me && me <= values.len() && rs < re && re <= values.len()) {
        return Err(Error::precondition("averaging or residual window out of range"));
    }
    let thetas = thetas
        .iter()
        .map(|&t| unimodular(t, UNIMODULAR_TOL))
        .collect::<Result<Vec<_>>>()?;
    check_separation(&thetas, me - ms)?;

    let modes: Vec<Mode> = thetas
        .iter()
        .map(|&theta| Mode {
            theta,
            v: rotated_mean_range(values, theta, ms, me),
        })
        .collect();

    let mut powers: Vec<UnimodularPowers> = thetas.iter().map(|&t| UnimodularPowers::new(t)).collect();
    let mut norms = Vec::with_capacity(re - rs);
    for (n, x) in values.iter().enumerate().take(re) {
        let mut r = x.clone();
        for (m, p) in modes.iter().zip(powers.iter_mut()) {
            r.axpy(-p.next().expect("infinite"), &m.v);
        }
        if n >= rs {
            norms.push(r.norm());
        }
    }
    Ok(ModeDecomp {
        modes,
        mean_window,
        residual: tail_stats_of_norms(rs, re, norms.into_iter()),
    })
}

/// `vⱼ = rotated_mean(x, ϑⱼ, n_used)`, residual over `[n_used/2, n_used)`.
pub fn extract_modes(x: &BoundedSeq, thetas: &[Complex], n_used: usize) -> Result<ModeDecomp> {
    if n_used < 2 || n_used > x.horizon() {
        return Err(Error::precondition(format!(
            "n_used must lie in 2..={}, got {n_used}",
            x.horizon()
        )));
    }
    extract_modes_over(x.values(), thetas, (0, n_used), (n_used / 2, n_used))
}
