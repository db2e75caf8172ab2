//! Forced and delayed linear recurrences `x_{n+p} = Bxₙ + yₙ`, and checks of
//! their long-run behaviour against the peripheral spectrum of `B`.

use serde::{Deserialize, Serialize};

use crate::checks::ScanConfig;
use crate::eigen::spectrum_info;
use crate::error::{Error, Result};
use crate::growth::{classify_log_norms, GrowthClass};
use crate::linalg::{c, CMatrix, CVector, Complex};
use crate::random;
use crate::scan::{default_tol_vanish, spectrum_scan, Detection};
use crate::sequence::{
    angular_distance, extract_modes_over, tail_stats, BoundedSeq, ModeDecomp, TailStats, MIN_HORIZON,
};

/// Trajectories whose norm exceeds this are reported as unbounded.
pub const OVERFLOW_NORM: f64 = 1e100;
pub const MAX_DELAY: usize = 64;
/// Angular tolerance for matching scan points to eigenvalues.
pub const CONTAINMENT_ANGLE: f64 = 1e-2;
/// Residual tolerance relative to `max(1, sup‖xₙ‖)`.
pub const RESIDUAL_RTOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ForcingKind {
    Zero,
    Geometric { ratio: f64 },
    Power { exponent: f64 },
    LogDecay,
    /// `yₙ = values[n]` while the table lasts, zero afterwards.
    CustomTable { values: Vec<CVector> },
}

/// Vanishing forcing `yₙ = δ(n)·direction`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForcingSpec {
    #[serde(flatten)]
    pub kind: ForcingKind,
    /// Seeded random unit vector when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<CVector>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ForcingSpec {
    fn default() -> Self {
        ForcingSpec::zero()
    }
}

impl ForcingSpec {
    pub fn zero() -> Self {
        ForcingSpec {
            kind: ForcingKind::Zero,
            direction: None,
            seed: 0,
        }
    }

    pub fn new(kind: ForcingKind, direction: CVector) -> Self {
        ForcingSpec {
            kind,
            direction: Some(direction),
            seed: 0,
        }
    }

    pub fn seeded(kind: ForcingKind, seed: u64) -> Self {
        ForcingSpec {
            kind,
            direction: None,
            seed,
        }
    }

    /// Whether `Σ‖yₙ‖ < ∞`.
    pub fn summable(&self) -> bool {
        match &self.kind {
            ForcingKind::Zero | ForcingKind::Geometric { .. } | ForcingKind::CustomTable { .. } => true,
            ForcingKind::Power { exponent } => *exponent > 1.0,
            ForcingKind::LogDecay => false,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match &self.kind {
            ForcingKind::Geometric { ratio } => *ratio > 0.0 && *ratio < 1.0,
            ForcingKind::Power { exponent } => *exponent > 0.0,
            _ => true,
        };
        if !ok {
            return Err(Error::precondition(format!("invalid forcing {:?}", self.kind)));
        }
        Ok(())
    }

    /// Binds the spec to a dimension.
    pub fn sampler(&self, dim: usize) -> Result<Forcing<'_>> {
        self.validate()?;
        let direction = match &self.direction {
            Some(d) => d.clone(),
            None => {
                let mut rng = random::rng(self.seed);
                let v = random::disk_vector(&mut rng, dim);
                let n = v.norm();
                if n > 0.0 {
                    v.scale(c(1.0 / n, 0.0))
                } else {
                    v
                }
            }
        };
        if direction.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: direction.dim(),
            });
        }
        if let ForcingKind::CustomTable { values } = &self.kind {
            if let Some(v) = values.iter().find(|v| v.dim() != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.dim(),
                });
            }
        }
        Ok(Forcing { spec: self, direction })
    }
}

pub struct Forcing<'a> {
    spec: &'a ForcingSpec,
    direction: CVector,
}

impl Forcing<'_> {
    /// `yₙ`, or `None` when it is zero.
    pub fn value(&self, n: usize) -> Option<CVector> {
        let nf = n as f64;
        let s = match &self.spec.kind {
            ForcingKind::Zero => return None,
            ForcingKind::CustomTable { values } => return values.get(n).cloned(),
            ForcingKind::Geometric { ratio } => ratio.powf(nf),
            ForcingKind::Power { exponent } => (nf + 1.0).powf(-exponent),
            ForcingKind::LogDecay => 1.0 / (nf + 2.0).ln(),
        };
        Some(self.direction.scale(c(s, 0.0)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DelaySystem {
    pub b: CMatrix,
    pub p: usize,
    pub initial: Vec<CVector>,
    pub forcing: ForcingSpec,
}

impl DelaySystem {
    pub fn new(b: CMatrix, initial: Vec<CVector>, forcing: ForcingSpec) -> Result<Self> {
        let p = initial.len();
        if p == 0 || p > MAX_DELAY {
            return Err(Error::precondition(format!("delay p must lie in 1..={MAX_DELAY}, got {p}")));
        }
        if let Some(v) = initial.iter().find(|v| v.dim() != b.dim()) {
            return Err(Error::DimensionMismatch {
                expected: b.dim(),
                found: v.dim(),
            });
        }
        Ok(DelaySystem { b, p, initial, forcing })
    }
}

fn default_p() -> usize {
    1
}

/// Serialized system: `{"B": .., "p": .., "initial": [..], "forcing": .., "horizon": N}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    #[serde(rename = "B")]
    pub b: CMatrix,
    #[serde(default = "default_p")]
    pub p: usize,
    pub initial: Vec<CVector>,
    #[serde(default)]
    pub forcing: ForcingSpec,
    pub horizon: usize,
}

impl SystemSpec {
    pub fn system(&self) -> Result<DelaySystem> {
        if self.initial.len() != self.p {
            return Err(Error::precondition(format!(
                "system has p = {} but {} initial vectors",
                self.p,
                self.initial.len()
            )));
        }
        DelaySystem::new(self.b.clone(), self.initial.clone(), self.forcing.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub sup_norm: f64,
    pub growth_class: GrowthClass,
    pub bounded_verdict: bool,
    pub horizon: usize,
}

/// Growth of `‖xₙ‖` over the second half of the horizon.
pub fn classify_trajectory(x: &BoundedSeq) -> TrajectoryReport {
    let n = x.horizon();
    let tail: Vec<(usize, f64)> = (n / 2..n).map(|k| (k, x.values()[k].norm().ln())).collect();
    let growth_class = classify_log_norms(&tail);
    TrajectoryReport {
        sup_norm: x.sup_norm(),
        growth_class,
        bounded_verdict: growth_class.is_bounded(),
        horizon: n,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub seq: BoundedSeq,
    pub report: TrajectoryReport,
}

fn iterate(b: &CMatrix, initial: &[CVector], forcing: &ForcingSpec, horizon: usize) -> Result<Trajectory> {
    let p = initial.len();
    if horizon < MIN_HORIZON.max(2 * p) {
        return Err(Error::precondition(format!(
            "horizon {horizon} must be at least max({MIN_HORIZON}, 2p = {})",
            2 * p
        )));
    }
    let y = forcing.sampler(b.dim())?;
    let mut xs: Vec<CVector> = Vec::with_capacity(horizon);
    xs.extend(initial.iter().cloned());
    for n in 0..horizon - p {
        let mut next = b.apply(&xs[n]);
        if let Some(yn) = y.value(n) {
            next = &next + &yn;
        }
        let norm = next.norm();
        if !(norm <= OVERFLOW_NORM) {
            return Err(Error::UnboundedTrajectory { index: n + p, norm });
        }
        xs.push(next);
    }
    let seq = BoundedSeq::from_values(xs)?;
    let report = classify_trajectory(&seq);
    Ok(Trajectory { seq, report })
}

/// `x_{n+1} = Bxₙ + yₙ` from `x₀`.
pub fn simulate_forced(b: &CMatrix, x0: &CVector, forcing: &ForcingSpec, horizon: usize) -> Result<Trajectory> {
    if x0.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            found: x0.dim(),
        });
    }
    iterate(b, std::slice::from_ref(x0), forcing, horizon)
}

/// `x_{n+p} = Bxₙ + yₙ` from `x₀, …, x_{p−1}`.
pub fn simulate_delay(system: &DelaySystem, horizon: usize) -> Result<Trajectory> {
    iterate(&system.b, &system.initial, &system.forcing, horizon)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitTest {
    /// `2·max ‖xₙ − x_{N−1}‖` over the window, an upper bound on its diameter.
    pub diameter_bound: f64,
    pub limit_estimate: CVector,
    pub passes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem6Verdict {
    pub peripheral: Vec<Complex>,
    pub decomposition: ModeDecomp,
    pub tol: f64,
    pub residual_ok: bool,
    /// Present when the peripheral spectrum is empty or `{1}`.
    pub limit_test: Option<LimitTest>,
    pub holds: bool,
}

/// Decomposes a bounded trajectory along the peripheral eigenvalues of `B`.
///
/// Mode vectors are rotated means over the trailing window `[N/2, N)`, and
/// the residual is measured on the same window. Averaging from `n = 0`
/// would carry the transient of the interior spectrum into every mode with
/// weight `1/N`.
pub fn theorem6_verify(b: &CMatrix, trajectory: &BoundedSeq, peripheral_tol: f64) -> Result<Theorem6Verdict> {
    if trajectory.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: b.dim(),
            found: trajectory.dim(),
        });
    }
    if !classify_trajectory(trajectory).bounded_verdict {
        return Err(Error::precondition("trajectory is not classified as bounded"));
    }
    let peripheral = spectrum_info(b, peripheral_tol)?.peripheral;
    let n = trajectory.horizon();
    let window = (n / 2, n);
    let decomposition =
        extract_modes_over(trajectory.values(), &peripheral, window, window).map_err(|e| match e {
            Error::Precondition(msg) => Error::precondition(format!("{msg}; use a longer horizon")),
            e => e,
        })?;
    let tol = RESIDUAL_RTOL * trajectory.sup_norm().max(1.0);
    let residual_ok = decomposition.residual.tail_sup <= tol;

    let limit_test = peripheral
        .iter()
        .all(|&p| (p - 1.0).norm() <= 10.0 * peripheral_tol)
        .then(|| {
            let values = trajectory.values();
            let last = &values[n - 1];
            let diameter_bound = 2.0
                * values[window.0..]
                    .iter()
                    .map(|v| v.distance(last))
                    .fold(0.0, f64::max);
            LimitTest {
                diameter_bound,
                limit_estimate: last.clone(),
                passes: diameter_bound <= tol,
            }
        });
    let holds = residual_ok && limit_test.as_ref().is_none_or(|l| l.passes);
    Ok(Theorem6Verdict {
        peripheral,
        decomposition,
        tol,
        residual_ok,
        limit_test,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem7Report {
    pub p: usize,
    pub horizon: usize,
    pub peripheral: Vec<Complex>,
    /// The single peripheral point, or 1 when the peripheral spectrum is empty.
    pub theta: Option<Complex>,
    pub single_peripheral_point: bool,
    pub trajectory: Option<TrajectoryReport>,
    pub bounded: bool,
    pub hypotheses_met: bool,
    pub tol: Option<f64>,
    /// (i) `sup ‖x_{n+1} − ϑxₙ‖` over the tail.
    pub stated_tail: Option<TailStats>,
    /// (ii) `sup ‖x_{n+p} − ϑxₙ‖` over the tail.
    pub p_step_tail: Option<TailStats>,
    /// (iii) scan of the trajectory against `{μ : μ^p = ϑ}`.
    pub pth_roots: Vec<Complex>,
    pub detected: Vec<Detection>,
    pub detected_at_pth_roots: Vec<Complex>,
    pub detected_elsewhere: Vec<Complex>,
    pub stated_conclusion_holds: Option<bool>,
    pub p_step_conclusion_holds: Option<bool>,
}

fn shifted_difference(values: &[CVector], lag: usize, theta: Complex, start: usize) -> TailStats {
    let n = values.len();
    let norms = (start..n - lag).map(|k| {
        let mut d = values[k + lag].clone();
        d.axpy(-theta, &values[k]);
        d.norm()
    });
    crate::sequence::tail_stats_of_norms(start, n - lag, norms)
}

/// Reports the one-step and `p`-step difference tails of a delay system side
/// by side, with the scan of the trajectory against the `p`-th roots of ϑ.
pub fn theorem7_probe(
    system: &DelaySystem,
    horizon: usize,
    peripheral_tol: f64,
    cfg: &ScanConfig,
) -> Result<Theorem7Report> {
    let p = system.p;
    let peripheral = spectrum_info(&system.b, peripheral_tol)?.peripheral;
    let single_peripheral_point = peripheral.len() <= 1;
    let theta = match peripheral.as_slice() {
        [] => Some(c(1.0, 0.0)),
        [t] => Some(*t),
        _ => None,
    };
    let traj = match simulate_delay(system, horizon) {
        Ok(t) => Some(t),
        Err(Error::UnboundedTrajectory { .. }) => None,
        Err(e) => return Err(e),
    };
    let bounded = traj.as_ref().is_some_and(|t| t.report.bounded_verdict);
    let hypotheses_met = single_peripheral_point && bounded;
    let mut report = Theorem7Report {
        p,
        horizon,
        peripheral,
        theta,
        single_peripheral_point,
        trajectory: traj.as_ref().map(|t| t.report),
        bounded,
        hypotheses_met,
        tol: None,
        stated_tail: None,
        p_step_tail: None,
        pth_roots: Vec::new(),
        detected: Vec::new(),
        detected_at_pth_roots: Vec::new(),
        detected_elsewhere: Vec::new(),
        stated_conclusion_holds: None,
        p_step_conclusion_holds: None,
    };
    let (true, Some(theta), Some(traj)) = (hypotheses_met, theta, traj) else {
        return Ok(report);
    };

    let x = &traj.seq;
    let values = x.values();
    let start = (horizon / 2).min(horizon - p - 1);
    let stated = shifted_difference(values, 1, theta, start);
    let p_step = shifted_difference(values, p, theta, start);
    let tol = cfg.tol_vanish.unwrap_or_else(|| default_tol_vanish(x));

    let root = Complex::from_polar(1.0, theta.arg() / p as f64);
    let pth_roots: Vec<Complex> = (0..p)
        .map(|k| root * Complex::from_polar(1.0, std::f64::consts::TAU * k as f64 / p as f64))
        .collect();
    let scan = spectrum_scan(x, cfg.grid_size, cfg.epsilon_for(x))?;
    let (at_roots, elsewhere): (Vec<Complex>, Vec<Complex>) = scan
        .detected
        .iter()
        .map(|d| d.theta)
        .partition(|&t| pth_roots.iter().any(|&r| angular_distance(r, t) <= CONTAINMENT_ANGLE));

    report.tol = Some(tol);
    report.stated_conclusion_holds = Some(stated.tail_sup <= tol);
    report.p_step_conclusion_holds = Some(p_step.tail_sup <= tol);
    report.stated_tail = Some(stated);
    report.p_step_tail = Some(p_step);
    report.pth_roots = pth_roots;
    report.detected = scan.detected;
    report.detected_at_pth_roots = at_roots;
    report.detected_elsewhere = elsewhere;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentVerdict {
    pub peripheral: Vec<Complex>,
    pub detected: Vec<Detection>,
    pub unmatched: Vec<Detection>,
    pub contained: bool,
}

/// Every scan point of the trajectory lies near a peripheral eigenvalue of `B`.
pub fn spectrum_containment_check(
    b: &CMatrix,
    trajectory: &BoundedSeq,
    peripheral_tol: f64,
    cfg: &ScanConfig,
) -> Result<ContainmentVerdict> {
    if !classify_trajectory(trajectory).bounded_verdict {
        return Err(Error::precondition("trajectory is not classified as bounded"));
    }
    let peripheral = spectrum_info(b, peripheral_tol)?.peripheral;
    let scan = spectrum_scan(trajectory, cfg.grid_size, cfg.epsilon_for(trajectory))?;
    let unmatched: Vec<Detection> = scan
        .detected
        .iter()
        .filter(|d| !peripheral.iter().any(|&p| angular_distance(p, d.theta) <= CONTAINMENT_ANGLE))
        .cloned()
        .collect();
    Ok(ContainmentVerdict {
        peripheral,
        contained: unmatched.is_empty(),
        detected: scan.detected,
        unmatched,
    })
}

/// Trajectory tail statistics on the second half of the horizon.
pub fn trajectory_tail(x: &BoundedSeq) -> TailStats {
    tail_stats(x.values(), x.horizon() / 2, x.horizon())
}
