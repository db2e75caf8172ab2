//! Resolvent `(λI − A)⁻¹`: direct solves, the Neumann/Laurent series,
//! contour-quadrature coefficient recovery, norm scans and pole probes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::eigen::eigenvalues;
use crate::error::{Error, Result};
use crate::growth::linear_fit;
use crate::linalg::{c, mat_solve, operator_norm, CMatrix, CVector, Complex};

/// Resolvent norms above this are flagged as (numerically) spectral.
pub const SINGULAR_NORM: f64 = 1e14;
pub const UNITARY_TOL: f64 = 1e-10;
pub const ISOMETRY_SLACK: f64 = 1e-9;
/// Approach angle for [`pole_order_probe`].
pub const POLE_APPROACH_ANGLE: f64 = PI / 4.0;
pub const DEFAULT_QUADRATURE_NODES: usize = 256;

pub fn resolvent_direct(a: &CMatrix, lambda: Complex) -> Result<CMatrix> {
    let shifted = a.scale(c(-1.0, 0.0)).shift(lambda);
    mat_solve(&shifted, &CMatrix::identity(a.dim()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NeumannSum {
    pub sum: CMatrix,
    /// `‖A^k_max / λ^(k_max+1)‖`
    pub last_term_norm: f64,
}

const DIVERGENCE_WINDOW: usize = 10;

/// Partial sum `Σ_{n=0}^{k_max} Aⁿ / λⁿ⁺¹`.
///
/// Fails with [`Error::Divergent`] when the norms of the final ten terms are
/// non-decreasing (and nonzero), which is what happens for `|λ| <= ρ(A)`.
pub fn resolvent_neumann(a: &CMatrix, lambda: Complex, k_max: usize) -> Result<NeumannSum> {
    if k_max < 1 {
        return Err(Error::precondition("k_max must be at least 1"));
    }
    if lambda.norm() == 0.0 {
        return Err(Error::precondition("lambda must be nonzero"));
    }
    let inv = lambda.inv();
    let mut term = CMatrix::identity(a.dim()).scale(inv);
    let mut sum = term.clone();
    let mut tail_norms = Vec::with_capacity(DIVERGENCE_WINDOW);
    let first_tracked = k_max.saturating_sub(DIVERGENCE_WINDOW - 1);
    for n in 1..=k_max {
        term = (&term * a).scale(inv);
        sum = &sum + &term;
        if n >= first_tracked {
            tail_norms.push(operator_norm(&term)?);
        }
    }
    let diverging = tail_norms.len() == DIVERGENCE_WINDOW
        && tail_norms.windows(2).all(|w| w[1] >= w[0])
        && tail_norms.last().is_some_and(|&l| l > 0.0);
    if diverging || !sum.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Divergent { last_terms: tail_norms });
    }
    let last_term_norm = match tail_norms.last() {
        Some(&l) => l,
        None => operator_norm(&term)?,
    };
    Ok(NeumannSum { sum, last_term_norm })
}

/// Taylor coefficient `x_k = (1/2πi) ∮_{|z|=R} f(z) z^{-k-1} dz` by the
/// trapezoidal rule on `nodes` equispaced points.
///
/// Exact (up to rounding) for polynomials of degree below `nodes − k`.
pub fn cauchy_coefficient<F>(f: F, k: usize, radius: f64, nodes: usize) -> Result<CVector>
where
    F: Fn(Complex) -> CVector,
{
    if nodes < 4 {
        return Err(Error::precondition("at least 4 quadrature nodes are required"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::precondition("contour radius must be positive"));
    }
    let mut acc: Option<CVector> = None;
    for m in 0..nodes {
        let z = Complex::from_polar(radius, 2.0 * PI * m as f64 / nodes as f64);
        let phase = ((m as u128 * k as u128) % nodes as u128) as f64;
        let weight = Complex::from_polar(1.0, -2.0 * PI * phase / nodes as f64);
        let value = f(z);
        match acc.as_mut() {
            Some(a) => a.axpy(weight, &value),
            None => acc = Some(value.scale(weight)),
        }
    }
    let scale = radius.powi(-(k as i32)) / nodes as f64;
    Ok(acc.expect("nodes >= 4").scale(c(scale, 0.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventSample {
    pub lambda: Complex,
    /// 0 when the solve failed outright.
    pub resolvent_norm: f64,
    pub singular_flag: bool,
}

pub fn resolvent_norm_at(a: &CMatrix, lambda: Complex) -> ResolventSample {
    match resolvent_direct(a, lambda).and_then(|r| operator_norm(&r)) {
        Ok(n) => ResolventSample {
            lambda,
            resolvent_norm: n,
            singular_flag: !n.is_finite() || n > SINGULAR_NORM,
        },
        Err(_) => ResolventSample {
            lambda,
            resolvent_norm: 0.0,
            singular_flag: true,
        },
    }
}

/// Resolvent norm at every grid point, in grid order. Spectral hits are
/// flagged rather than treated as errors.
pub fn resolvent_norm_scan(a: &CMatrix, grid: &[Complex]) -> Vec<ResolventSample> {
    grid.iter().map(|&l| resolvent_norm_at(a, l)).collect()
}

pub fn circle_grid(center: Complex, radius: f64, points: usize) -> Vec<Complex> {
    (0..points)
        .map(|m| center + Complex::from_polar(radius, 2.0 * PI * m as f64 / points as f64))
        .collect()
}

/// Row-major rectangular grid, `nx × ny` points including the corners.
pub fn rect_grid(re: (f64, f64), im: (f64, f64), nx: usize, ny: usize) -> Vec<Complex> {
    let step = |lo: f64, hi: f64, n: usize, i: usize| {
        if n <= 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    };
    (0..ny)
        .flat_map(|j| (0..nx).map(move |i| c(step(re.0, re.1, nx, i), step(im.0, im.1, ny, j))))
        .collect()
}

/// CSV rendering of a scan: `re,im,norm,singular_flag`.
pub fn scan_to_csv(samples: &[ResolventSample]) -> String {
    let mut out = String::from("re,im,norm,singular_flag\n");
    for s in samples {
        out.push_str(&format!(
            "{},{},{},{}\n",
            s.lambda.re, s.lambda.im, s.resolvent_norm, s.singular_flag
        ));
    }
    out
}

fn require_unitary(u: &CMatrix) -> Result<f64> {
    let defect = u.unitarity_defect()?;
    if defect > UNITARY_TOL {
        return Err(Error::precondition(format!(
            "matrix is not unitary: ‖UᴴU − I‖ = {defect:e}"
        )));
    }
    Ok(defect)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    pub samples: usize,
    pub violations: usize,
    /// `min (bound − norm)` over the samples; negative means a violation.
    pub worst_slack: f64,
    pub worst_lambda: Complex,
    pub unitarity_defect: f64,
}

/// Checks `‖(λ − U)⁻¹‖ <= 1/| |λ| − 1 |` (+1e-9) at each sample point.
pub fn isometry_bound_check(u: &CMatrix, samples: &[Complex]) -> Result<IsometryReport> {
    let unitarity_defect = require_unitary(u)?;
    if let Some(l) = samples.iter().find(|l| (l.norm() - 1.0).abs() < 1e-6) {
        return Err(Error::precondition(format!(
            "sample {l} lies within 1e-6 of the unit circle"
        )));
    }
    let mut violations = 0;
    let mut worst_slack = f64::INFINITY;
    let mut worst_lambda = c(0.0, 0.0);
    for &lambda in samples {
        let norm = operator_norm(&resolvent_direct(u, lambda)?)?;
        let bound = 1.0 / (lambda.norm() - 1.0).abs();
        let slack = bound - norm;
        if norm > bound + ISOMETRY_SLACK {
            violations += 1;
        }
        if slack < worst_slack {
            worst_slack = slack;
            worst_lambda = lambda;
        }
    }
    Ok(IsometryReport {
        samples: samples.len(),
        violations,
        worst_slack,
        worst_lambda,
        unitarity_defect,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleProbeReport {
    pub center: Complex,
    pub radii: Vec<f64>,
    pub norms: Vec<f64>,
    /// Least-squares slope of `ln‖R(θ + r·e^{iπ/4})‖` against `−ln r`.
    pub fitted_order: f64,
}

/// Eigenvalues closer to θ than this count as θ itself (multiplicity).
const SAME_EIGENVALUE: f64 = 1e-6;

pub fn pole_order_probe(u: &CMatrix, theta: Complex, radii: &[f64]) -> Result<PoleProbeReport> {
    require_unitary(u)?;
    if radii.len() < 4 {
        return Err(Error::precondition("at least 4 radii are required"));
    }
    if radii.iter().any(|&r| !(1e-8..=0.1).contains(&r)) {
        return Err(Error::precondition("radii must lie in [1e-8, 0.1]"));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::precondition("radii must be strictly decreasing"));
    }
    let r_max = radii[0];
    let r_min = radii[radii.len() - 1];
    let eigs = eigenvalues(u)?;
    let nearest = eigs.iter().map(|l| (l - theta).norm()).fold(f64::INFINITY, f64::min);
    if nearest > (0.01 * r_min).max(1e-12) {
        return Err(Error::precondition(format!(
            "theta {theta} is not an eigenvalue (nearest at distance {nearest:e})"
        )));
    }
    if let Some(other) = eigs
        .iter()
        .find(|l| (*l - theta).norm() > SAME_EIGENVALUE && (*l - theta).norm() < 2.0 * r_max)
    {
        return Err(Error::precondition(format!(
            "eigenvalue {other} is closer than 2·max(radii) = {} to theta",
            2.0 * r_max
        )));
    }
    let dir = Complex::from_polar(1.0, POLE_APPROACH_ANGLE);
    let mut norms = Vec::with_capacity(radii.len());
    for &r in radii {
        norms.push(operator_norm(&resolvent_direct(u, theta + dir * r)?)?);
    }
    let pts: Vec<(f64, f64)> = radii.iter().zip(&norms).map(|(r, n)| (-r.ln(), n.ln())).collect();
    let (fitted_order, _, _) = linear_fit(&pts).expect("distinct radii");
    Ok(PoleProbeReport {
        center: theta,
        radii: radii.to_vec(),
        norms,
        fitted_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    /// Resolvent norm of a normal matrix: 1 / dist(λ, σ).
    fn normal_resolvent_norm(eigs: &[Complex], lambda: Complex) -> f64 {
        1.0 / eigs.iter().map(|e| (lambda - e).norm()).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn direct_examples() {
        let r = resolvent_direct(&CMatrix::zeros(2), c(2.0, 0.0)).unwrap();
        assert_eq!(r, CMatrix::identity(2).scale(c(0.5, 0.0)));
        let r = resolvent_direct(&CMatrix::from_real_diag(&[0.5]), c(2.0, 0.0)).unwrap();
        assert!((r[(0, 0)] - 2.0 / 3.0).norm() < 1e-15);

        let mut rng = random::rng(1);
        for _ in 0..10 {
            let a = random::disk_matrix(&mut rng, 4);
            let rho = crate::eigen::spectrum_info(&a, 1e-8).unwrap().spectral_radius;
            let lambda = Complex::from_polar(2.0 * rho + 1.0, 0.7);
            let r = resolvent_direct(&a, lambda).unwrap();
            let check = &a.scale(c(-1.0, 0.0)).shift(lambda) * &r;
            assert!((&check - &CMatrix::identity(4)).max_abs() < 1e-10);
        }
    }

    #[test]
    fn direct_on_spectrum_is_singular() {
        let a = CMatrix::from_real_diag(&[1.0, 0.5]);
        assert!(matches!(resolvent_direct(&a, c(1.0, 0.0)), Err(Error::Singular { .. })));
    }

    #[test]
    fn neumann_examples() {
        let n = resolvent_neumann(&CMatrix::from_real_diag(&[0.5]), c(2.0, 0.0), 50).unwrap();
        assert!((n.sum[(0, 0)] - 2.0 / 3.0).norm() < 1e-14);

        let lambda = c(0.3, -1.2);
        let n = resolvent_neumann(&CMatrix::zeros(3), lambda, 1).unwrap();
        assert_eq!(n.sum, CMatrix::identity(3).scale(lambda.inv()));
        assert_eq!(n.last_term_norm, 0.0);
    }

    #[test]
    fn neumann_matches_direct() {
        let mut rng = random::rng(2);
        for _ in 0..10 {
            let a = random::disk_matrix(&mut rng, 3);
            let rho = crate::eigen::spectrum_info(&a, 1e-8).unwrap().spectral_radius;
            let lambda = Complex::from_polar(2.0 * rho, 1.1);
            let n = resolvent_neumann(&a, lambda, 200).unwrap();
            let d = resolvent_direct(&a, lambda).unwrap();
            assert!(operator_norm(&(&n.sum - &d)).unwrap() < 1e-8);
        }
    }

    #[test]
    fn neumann_inside_spectrum_is_divergent() {
        let a = CMatrix::from_real_diag(&[2.0, 0.1]);
        assert!(matches!(
            resolvent_neumann(&a, c(1.5, 0.0), 100),
            Err(Error::Divergent { .. })
        ));
        let u = CMatrix::from_diag(&[c(0.0, 1.0)]);
        assert!(resolvent_neumann(&u, c(1.0, 0.0), 50).is_err());
    }

    #[test]
    fn cauchy_constant_and_linear() {
        let cst = CVector::new(vec![c(1.5, -2.0), c(0.25, 0.0)]).unwrap();
        let got = cauchy_coefficient(|_| cst.clone(), 0, 1.0, 8).unwrap();
        assert!(got.distance(&cst) < 1e-15);
        for k in 1..5 {
            let got = cauchy_coefficient(|_| cst.clone(), k, 1.0, 8).unwrap();
            assert!(got.norm() < 1e-15);
        }

        let x0 = CVector::new(vec![c(0.3, 0.1)]).unwrap();
        let x1 = CVector::new(vec![c(-1.0, 2.0)]).unwrap();
        let f = |z: Complex| {
            let mut v = x0.clone();
            v.axpy(z, &x1);
            v
        };
        assert!(cauchy_coefficient(f, 0, 1.0, 8).unwrap().distance(&x0) < 1e-13);
        assert!(cauchy_coefficient(f, 1, 1.0, 8).unwrap().distance(&x1) < 1e-13);
    }

    #[test]
    fn cauchy_rejects_bad_config() {
        assert!(cauchy_coefficient(|_| CVector::zeros(1), 0, 1.0, 3).is_err());
        assert!(cauchy_coefficient(|_| CVector::zeros(1), 0, -1.0, 8).is_err());
    }

    #[test]
    fn scan_examples() {
        let grid = circle_grid(c(0.0, 0.0), 2.0, 16);
        for s in resolvent_norm_scan(&CMatrix::zeros(2), &grid) {
            assert!((s.resolvent_norm - 0.5).abs() < 1e-15 && !s.singular_flag);
        }
        let one = CMatrix::identity(1);
        let s = resolvent_norm_scan(&one, &[c(1.1, 0.0), c(1.01, 0.0)]);
        assert!((s[0].resolvent_norm - 10.0).abs() < 1e-9);
        assert!((s[1].resolvent_norm - 100.0).abs() < 1e-9);

        let u = CMatrix::from_diag(&[c(1.0, 0.0), c(0.0, 1.0)]);
        let s = resolvent_norm_at(&u, c(2.0, 0.0));
        assert!((s.resolvent_norm - 1.0).abs() < 1e-12);

        let hit = resolvent_norm_at(&one, c(1.0, 0.0));
        assert!(hit.singular_flag);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let s = resolvent_norm_scan(&CMatrix::zeros(1), &[c(2.0, 0.0)]);
        assert_eq!(scan_to_csv(&s), "re,im,norm,singular_flag\n2,0,0.5,false\n");
    }

    #[test]
    fn rect_grid_layout() {
        let g = rect_grid((-1.0, 1.0), (0.0, 2.0), 3, 2);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], c(-1.0, 0.0));
        assert_eq!(g[2], c(1.0, 0.0));
        assert_eq!(g[5], c(1.0, 2.0));
    }

    #[test]
    fn isometry_examples() {
        let i = c(0.0, 1.0);
        let u = CMatrix::from_diag(&[i, -i]);
        let norm = resolvent_norm_at(&u, c(2.0, 0.0)).resolvent_norm;
        assert!((norm - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        let rep = isometry_bound_check(&u, &[c(2.0, 0.0)]).unwrap();
        assert_eq!(rep.violations, 0);

        let rep = isometry_bound_check(&CMatrix::identity(2), &[c(1.25, 0.0), c(1.5, 0.0)]).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.worst_slack.abs() < 1e-12);

        assert!(isometry_bound_check(&CMatrix::from_real_diag(&[0.5]), &[c(2.0, 0.0)]).is_err());
        assert!(isometry_bound_check(&CMatrix::identity(1), &[c(1.0 + 1e-7, 0.0)]).is_err());
    }

    #[test]
    fn normal_resolvent_norm_is_inverse_distance() {
        let mut rng = random::rng(9);
        let eigs: Vec<Complex> = (0..4).map(|_| random::unimodular(&mut rng)).collect();
        let u = random::unitary_with_spectrum(&mut rng, &eigs);
        for lambda in circle_grid(c(0.1, 0.0), 1.7, 12) {
            let n = resolvent_norm_at(&u, lambda).resolvent_norm;
            let o = normal_resolvent_norm(&eigs, lambda);
            assert!((n - o).abs() <= 1e-9 * o.max(1.0), "{n} vs {o}");
        }
    }

    #[test]
    fn pole_probe_examples() {
        let radii = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];
        let rep = pole_order_probe(&CMatrix::identity(1), c(1.0, 0.0), &radii).unwrap();
        for (r, n) in rep.radii.iter().zip(&rep.norms) {
            assert!((n * r - 1.0).abs() < 1e-9);
        }
        assert!((rep.fitted_order - 1.0).abs() < 1e-9);

        let u = CMatrix::from_real_diag(&[1.0, -1.0]);
        let rep = pole_order_probe(&u, c(1.0, 0.0), &[0.1, 0.05, 0.01, 0.001]).unwrap();
        assert!((0.95..=1.05).contains(&rep.fitted_order));
    }

    #[test]
    fn pole_probe_preconditions() {
        let u = CMatrix::from_real_diag(&[1.0, -1.0]);
        let radii = [0.1, 0.01, 0.001, 0.0001];
        assert!(pole_order_probe(&u, c(0.0, 1.0), &radii).is_err());
        assert!(pole_order_probe(&u, c(1.0, 0.0), &[0.1, 0.01, 0.001]).is_err());
        assert!(pole_order_probe(&u, c(1.0, 0.0), &[0.01, 0.1, 0.001, 0.0001]).is_err());
        let close = CMatrix::from_diag(&[c(1.0, 0.0), Complex::from_polar(1.0, 0.05)]);
        assert!(pole_order_probe(&close, c(1.0, 0.0), &radii).is_err());
        assert!(pole_order_probe(&CMatrix::from_real_diag(&[0.5]), c(0.5, 0.0), &radii).is_err());
    }
}
