//! Polynomials, characteristic polynomials and simultaneous root finding.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, Complex};

/// Polynomial with complex coefficients in ascending degree order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub coeffs: Vec<Complex>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex>) -> Self {
        Polynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Polynomial::new(coeffs.iter().map(|&x| c(x, 0.0)).collect())
    }

    /// Monic polynomial with the given roots, `Π (t − rᵢ)`.
    pub fn from_roots(roots: &[Complex]) -> Self {
        let mut coeffs = vec![c(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
            for (i, &a) in coeffs.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * r;
            }
            coeffs = next;
        }
        Polynomial { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex {
        self.coeffs.last().copied().unwrap_or(c(0.0, 0.0))
    }

    pub fn eval(&self, z: Complex) -> Complex {
        self.coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * z + a)
    }

    /// `p(A)` by Horner's rule in matrix arithmetic.
    pub fn eval_matrix(&self, a: &CMatrix) -> CMatrix {
        let d = a.dim();
        let mut acc = CMatrix::zeros(d);
        for &coef in self.coeffs.iter().rev() {
            acc = (&acc * a).shift(coef);
        }
        acc
    }
}

/// Characteristic polynomial `det(λI − A)` by the Faddeev–LeVerrier
/// trace recursion.
pub fn char_poly(a: &CMatrix) -> Polynomial {
    let n = a.dim();
    let mut coeffs = vec![c(0.0, 0.0); n + 1];
    coeffs[n] = c(1.0, 0.0);
    let mut m = CMatrix::zeros(n);
    for k in 1..=n {
        m = (&m * a).shift(coeffs[n - k + 1]);
        let am = a * &m;
        coeffs[n - k] = -am.trace() / k as f64;
    }
    Polynomial { coeffs }
}

pub const ROOT_MAX_SWEEPS: usize = 500;
const ROOT_STEP_RTOL: f64 = 1e-14;
const INIT_ROTATION: f64 = 0.4;

/// Newton ratio `p(z)/p'(z)` plus a flag telling whether `|p(z)|` is at the
/// level of Horner rounding error. Uses the reversed polynomial outside the
/// unit disk to avoid overflow.
fn newton_ratio(monic: &[Complex], z: Complex) -> (Complex, bool, f64) {
    let n = monic.len() - 1;
    let tol = 4.0 * (n as f64 + 1.0) * f64::EPSILON;
    if z.norm() <= 1.0 {
        let mut p = c(0.0, 0.0);
        let mut dp = c(0.0, 0.0);
        let mut bound = 0.0;
        let az = z.norm();
        for &a in monic.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
            bound = bound * az + a.norm();
        }
        let at_noise = p.norm() <= tol * bound;
        (p / dp, at_noise, p.norm())
    } else {
        let w = z.inv();
        let aw = w.norm();
        let mut q = c(0.0, 0.0);
        let mut dq = c(0.0, 0.0);
        let mut bound = 0.0;
        // reversed coefficients: q(w) = Σ a_{n-j} w^j, Horner from j = n down
        for &a in monic.iter() {
            dq = dq * w + q;
            q = q * w + a;
            bound = bound * aw + a.norm();
        }
        let at_noise = q.norm() <= tol * bound;
        let denom = q * n as f64 - w * dq;
        (z * q / denom, at_noise, q.norm())
    }
}

/// All roots (with multiplicity) by Aberth–Ehrlich simultaneous iteration.
///
/// Starts on the circle of radius `1 + max|aᵢ/aₙ|` at roots of unity rotated
/// by 0.4 rad. A root is frozen once its update falls below
/// `1e-14·(1 + |z|)` or its residual reaches Horner rounding level; exact
/// zero roots are deflated up front.
pub fn poly_roots(p: &Polynomial) -> Result<Vec<Complex>> {
    if p.degree() < 1 {
        return Err(Error::precondition("polynomial degree must be at least 1"));
    }
    let lead = p.leading();
    if lead.norm() == 0.0 {
        return Err(Error::precondition("leading coefficient is zero"));
    }
    let monic: Vec<Complex> = p.coeffs.iter().map(|a| a / lead).collect();

    let zeros = monic.iter().take_while(|a| a.re == 0.0 && a.im == 0.0).count();
    let monic = &monic[zeros..];
    let n = monic.len() - 1;
    let mut roots = vec![c(0.0, 0.0); zeros];
    if n == 0 {
        return Ok(roots);
    }

    let radius = 1.0 + monic[..n].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex> = (0..n)
        .map(|k| Complex::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + INIT_ROTATION))
        .collect();
    let mut done = vec![false; n];

    for _ in 0..ROOT_MAX_SWEEPS {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (ratio, at_noise, _) = newton_ratio(monic, z[i]);
            if at_noise {
                done[i] = true;
                continue;
            }
            let s: Complex = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let denom = c(1.0, 0.0) - ratio * s;
            let step = if denom.norm() == 0.0 { ratio } else { ratio / denom };
            if !(step.re.is_finite() && step.im.is_finite()) {
                continue;
            }
            z[i] -= step;
            if step.norm() < ROOT_STEP_RTOL * (1.0 + z[i].norm()) {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            polish_clusters(monic, &mut z);
            roots.extend(z);
            return Ok(roots);
        }
    }
    let residuals = z.iter().map(|&zi| newton_ratio(monic, zi).2).collect();
    Err(Error::RootsNoConvergence {
        sweeps: ROOT_MAX_SWEEPS,
        residuals,
    })
}

const CLUSTER_RADIUS: f64 = 1e-3;

fn derivative(coeffs: &[Complex]) -> Vec<Complex> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, a)| a * i as f64)
        .collect()
}

fn horner(coeffs: &[Complex], z: Complex) -> Complex {
    coeffs.iter().rev().fold(c(0.0, 0.0), |acc, &a| acc * z + a)
}

/// Collapses numerically split multiple roots.
///
/// A root of multiplicity `m` comes out of the iteration as `m` points spread
/// over a radius of order `ε^{1/m}`. It is a simple root of `p^{(m−1)}`, so
/// Newton on that derivative from the cluster centroid recovers it to full
/// accuracy. The collapse is kept only if the polished center is itself at
/// rounding level for `p`, which rejects genuinely distinct close roots.
fn polish_clusters(monic: &[Complex], z: &mut [Complex]) {
    let n = z.len();
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in 0..i {
            if (z[i] - z[j]).norm() <= CLUSTER_RADIUS * (1.0 + z[i].norm()) {
                let (from, to) = (label[i], label[j]);
                for l in label.iter_mut() {
                    if *l == from {
                        *l = to;
                    }
                }
            }
        }
    }
    let mut seen = vec![false; n];
    for i in 0..n {
        let id = label[i];
        if seen[id] {
            continue;
        }
        seen[id] = true;
        let members: Vec<usize> = (0..n).filter(|&j| label[j] == id).collect();
        let m = members.len();
        if m < 2 {
            continue;
        }
        let mut q = monic.to_vec();
        for _ in 0..m - 1 {
            q = derivative(&q);
        }
        let dq = derivative(&q);
        let mut center = members.iter().map(|&j| z[j]).sum::<Complex>() / m as f64;
        for _ in 0..50 {
            let step = horner(&q, center) / horner(&dq, center);
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            center -= step;
            if step.norm() <= 4.0 * f64::EPSILON * (1.0 + center.norm()) {
                break;
            }
        }
        let spread = members.iter().map(|&j| (z[j] - center).norm()).fold(0.0, f64::max);
        let (_, at_noise, _) = newton_ratio(monic, center);
        if at_noise && spread <= 2.0 * CLUSTER_RADIUS * (1.0 + center.norm()) {
            for &j in &members {
                z[j] = center;
            }
        }
    }
}
