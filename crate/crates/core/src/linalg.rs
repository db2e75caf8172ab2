//! Dense complex linear algebra over C^d.
//!
//! Everything here is small-dimensional (d <= 64) and dense. The operator
//! norm is the spectral 2-norm throughout the crate, so isometries are
//! exactly the unitary matrices.

use std::ops::{Add, Deref, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

pub const MAX_DIM: usize = 64;

/// Relative pivot threshold for [`mat_solve`].
pub const PIVOT_RTOL: f64 = 1e-14;

/// Seed used by [`operator_norm`] for its power-iteration start vector.
pub const DEFAULT_NORM_SEED: u64 = 0x5eed_2017;

const NORM_RTOL: f64 = 1e-12;
const NORM_MAX_ITER: usize = 1000;
/// The Gram matrix is squared this many times before power iteration, so each
/// sweep advances the iteration by 2^GRAM_SQUARINGS Gram applications.
const GRAM_SQUARINGS: usize = 4;

#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn is_finite(z: Complex) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// A vector in C^d.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CVector(Vec<Complex>);

impl CVector {
    pub fn new(entries: Vec<Complex>) -> Result<Self> {
        if let Some(i) = entries.iter().position(|z| !is_finite(*z)) {
            return Err(Error::NonFinite(i));
        }
        Ok(CVector(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        CVector(vec![Complex::new(0.0, 0.0); dim])
    }

    pub fn from_real(values: &[f64]) -> Self {
        CVector(values.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<Complex> {
        self.0
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: Complex) -> CVector {
        CVector(self.0.iter().map(|z| z * s).collect())
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: Complex, other: &CVector) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += s * b;
        }
    }

    pub fn distance(&self, other: &CVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| is_finite(*z))
    }
}

impl Deref for CVector {
    type Target = [Complex];
    fn deref(&self) -> &[Complex] {
        &self.0
    }
}

impl From<Vec<Complex>> for CVector {
    fn from(v: Vec<Complex>) -> Self {
        CVector(v)
    }
}

impl Add for &CVector {
    type Output = CVector;
    fn add(self, rhs: &CVector) -> CVector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CVector {
    type Output = CVector;
    fn sub(self, rhs: &CVector) -> CVector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// Dense square complex matrix, row-major, 1 <= dim <= 64.
///
/// Serialized as `{"d": d, "entries": [[re, im], ...]}` in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct CMatrix {
    dim: usize,
    entries: Vec<Complex>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    d: usize,
    entries: Vec<Complex>,
}

impl TryFrom<MatrixJson> for CMatrix {
    type Error = Error;
    fn try_from(m: MatrixJson) -> Result<CMatrix> {
        CMatrix::new(m.d, m.entries)
    }
}

impl From<CMatrix> for MatrixJson {
    fn from(m: CMatrix) -> MatrixJson {
        MatrixJson {
            d: m.dim,
            entries: m.entries,
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        Err(Error::InvalidDimension(dim))
    } else {
        Ok(())
    }
}

impl CMatrix {
    pub fn new(dim: usize, entries: Vec<Complex>) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if let Some(i) = entries.iter().position(|z| !is_finite(*z)) {
            return Err(Error::NonFinite(i));
        }
        Ok(CMatrix { dim, entries })
    }

    /// Builds a matrix from real rows. Panics on ragged or oversized input;
    /// intended for literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let entries = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), dim, "ragged matrix literal");
                r.iter().map(|&x| c(x, 0.0))
            })
            .collect();
        CMatrix::new(dim, entries).expect("valid matrix literal")
    }

    pub fn zeros(dim: usize) -> Self {
        check_dim(dim).expect("matrix dimension");
        CMatrix {
            dim,
            entries: vec![c(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[Complex]) -> Self {
        let mut m = CMatrix::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        CMatrix::from_diag(&diag.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    pub fn adjoint(&self) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: Complex) -> CMatrix {
        CMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    /// `self + s * I`
    pub fn shift(&self, s: Complex) -> CMatrix {
        let mut out = self.clone();
        for i in 0..self.dim {
            out[(i, i)] += s;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn apply(&self, v: &[Complex]) -> CVector {
        assert_eq!(v.len(), self.dim, "matrix-vector dimension mismatch");
        let d = self.dim;
        let out = (0..d)
            .map(|i| {
                let row = &self.entries[i * d..(i + 1) * d];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect();
        CVector(out)
    }

    /// Flattens to a d^2 vector (row-major).
    pub fn to_vector(&self) -> CVector {
        CVector(self.entries.clone())
    }

    /// Operator-norm distance of `UᴴU` from the identity.
    pub fn unitarity_defect(&self) -> Result<f64> {
        let gram = &self.adjoint() * self;
        operator_norm(&gram.shift(c(-1.0, 0.0)))
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex;
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.entries[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.entries[i * self.dim + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let d = self.dim;
        let mut out = vec![c(0.0, 0.0); d * d];
        for i in 0..d {
            let out_row = &mut out[i * d..(i + 1) * d];
            for k in 0..d {
                let aik = self.entries[i * d + k];
                if aik.re == 0.0 && aik.im == 0.0 {
                    continue;
                }
                let b_row = &rhs.entries[k * d..(k + 1) * d];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += aik * b;
                }
            }
        }
        CMatrix { dim: d, entries: out }
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        CMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        CMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

fn check_same_dim(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    Ok(())
}

pub fn mat_mul(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_same_dim(a, b)?;
    Ok(a * b)
}

/// Solves `a·X = rhs` by Gaussian elimination with row pivoting.
///
/// A pivot whose magnitude is at most `1e-14 · max|a_ij|` is reported as
/// [`Error::Singular`].
pub fn mat_solve(a: &CMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    check_same_dim(a, rhs)?;
    let d = a.dim;
    let threshold = PIVOT_RTOL * a.max_abs();
    let mut lu = a.entries.clone();
    let mut x = rhs.entries.clone();

    for col in 0..d {
        let (pivot_row, magnitude) = (col..d)
            .map(|r| (r, lu[r * d + col].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if magnitude <= threshold {
            return Err(Error::Singular {
                pivot: col,
                magnitude,
                threshold,
            });
        }
        if pivot_row != col {
            for j in 0..d {
                lu.swap(col * d + j, pivot_row * d + j);
                x.swap(col * d + j, pivot_row * d + j);
            }
        }
        let pivot = lu[col * d + col];
        for r in col + 1..d {
            let factor = lu[r * d + col] / pivot;
            if factor.re == 0.0 && factor.im == 0.0 {
                continue;
            }
            for j in col..d {
                let v = lu[col * d + j];
                lu[r * d + j] -= factor * v;
            }
            for j in 0..d {
                let v = x[col * d + j];
                x[r * d + j] -= factor * v;
            }
        }
    }

    for col in (0..d).rev() {
        let pivot = lu[col * d + col];
        for j in 0..d {
            let mut acc = x[col * d + j];
            for k in col + 1..d {
                acc -= lu[col * d + k] * x[k * d + j];
            }
            x[col * d + j] = acc / pivot;
        }
    }
    Ok(CMatrix { dim: d, entries: x })
}

pub fn mat_inverse(a: &CMatrix) -> Result<CMatrix> {
    mat_solve(a, &CMatrix::identity(a.dim))
}

/// Spectral norm (largest singular value) with the default seed.
pub fn operator_norm(a: &CMatrix) -> Result<f64> {
    operator_norm_seeded(a, DEFAULT_NORM_SEED)
}

/// Spectral norm by power iteration on the Gram matrix `AᴴA`.
///
/// The iteration runs on `(AᴴA)^16` (four normalized squarings) and the
/// Rayleigh quotient is taken against `AᴴA` itself. Stops when the relative
/// change of the Rayleigh quotient drops below 1e-12. When the top two
/// singular values nearly coincide the iteration can stall; it then falls
/// back to Jacobi sweeps on the Gram matrix.
pub fn operator_norm_seeded(a: &CMatrix, seed: u64) -> Result<f64> {
    let gram = &a.adjoint() * a;
    let scale = gram.max_abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut accel = gram.scale(c(1.0 / scale, 0.0));
    for _ in 0..GRAM_SQUARINGS {
        accel = &accel * &accel;
        let m = accel.max_abs();
        if m == 0.0 {
            break;
        }
        accel = accel.scale(c(1.0 / m, 0.0));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex> = (0..a.dim)
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    normalize(&mut v);

    let mut prev = f64::NAN;
    for _ in 0..NORM_MAX_ITER {
        let mut w = accel.apply(&v).into_inner();
        if normalize(&mut w) == 0.0 {
            // start vector annihilated by the accelerated operator
            w = gram.apply(&v).into_inner();
            if normalize(&mut w) == 0.0 {
                w = v.clone();
            }
        }
        v = w;
        let rq = a.apply(&v).norm().powi(2);
        if (rq - prev).abs() <= NORM_RTOL * rq {
            return Ok(rq.sqrt());
        }
        prev = rq;
    }
    match gram_top_eigenvalue(&gram) {
        Some(top) => Ok(top.max(0.0).sqrt()),
        None => Err(Error::NoConvergence {
            what: "operator norm power iteration",
            iterations: NORM_MAX_ITER,
            last: prev.sqrt(),
        }),
    }
}

const JACOBI_MAX_SWEEPS: usize = 60;

/// Largest eigenvalue of a Hermitian matrix by cyclic Jacobi rotations on
/// its real embedding `[[Re, −Im], [Im, Re]]`, which has every eigenvalue
/// twice.
fn gram_top_eigenvalue(g: &CMatrix) -> Option<f64> {
    let d = g.dim;
    let n = 2 * d;
    let mut m = vec![0.0; n * n];
    for i in 0..d {
        for j in 0..d {
            let z = g[(i, j)];
            m[i * n + j] = z.re;
            m[i * n + j + d] = -z.im;
            m[(i + d) * n + j] = z.im;
            m[(i + d) * n + j + d] = z.re;
        }
    }
    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Some(0.0);
    }
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            return Some((0..n).map(|i| m[i * n + i]).fold(f64::NEG_INFINITY, f64::max));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for r in 0..n {
                    let arp = m[r * n + p];
                    let arq = m[r * n + q];
                    m[r * n + p] = cs * arp - sn * arq;
                    m[r * n + q] = sn * arp + cs * arq;
                }
                for r in 0..n {
                    let apr = m[p * n + r];
                    let aqr = m[q * n + r];
                    m[p * n + r] = cs * apr - sn * aqr;
                    m[q * n + r] = sn * apr + cs * aqr;
                }
            }
        }
    }
    None
}

fn normalize(v: &mut [Complex]) -> f64 {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
    n
}

/// Natural log of a norm, with an explicit sentinel for an exactly-zero norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogNorm {
    Finite(f64),
    NegInfinity,
}

impl LogNorm {
    pub fn value(self) -> f64 {
        match self {
            LogNorm::Finite(x) => x,
            LogNorm::NegInfinity => f64::NEG_INFINITY,
        }
    }

    pub fn is_zero_norm(self) -> bool {
        matches!(self, LogNorm::NegInfinity)
    }
}

/// One entry of [`mat_power_seq`]: `‖Aⁿ‖ = scaled_norm · exp(log_scale)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSample {
    pub n: usize,
    pub scaled_norm: f64,
    pub log_scale: f64,
    pub log_norm: LogNorm,
}

impl PowerSample {
    /// `‖Aⁿ‖`; may overflow to infinity for fast-growing powers.
    pub fn norm(&self) -> f64 {
        self.log_norm.value().exp()
    }
}

const RESCALE_LOW: f64 = 1e-100;
const RESCALE_HIGH: f64 = 1e100;

/// `ln‖Aⁿ‖` for `n = 1..=n_max`, tracking `Pₙ = Aⁿ / exp(sₙ)` and
/// renormalizing whenever `‖Pₙ‖` leaves `[1e-100, 1e100]`.
pub fn mat_power_seq(a: &CMatrix, n_max: usize) -> Result<Vec<PowerSample>> {
    if n_max < 1 {
        return Err(Error::precondition("n_max must be at least 1"));
    }
    let mut out = Vec::with_capacity(n_max);
    let mut p = CMatrix::identity(a.dim);
    let mut log_scale = 0.0;
    let mut zero = false;
    for n in 1..=n_max {
        if zero {
            out.push(PowerSample {
                n,
                scaled_norm: 0.0,
                log_scale,
                log_norm: LogNorm::NegInfinity,
            });
            continue;
        }
        p = &p * a;
        let mut norm = operator_norm(&p)?;
        if norm == 0.0 {
            zero = true;
            out.push(PowerSample {
                n,
                scaled_norm: 0.0,
                log_scale,
                log_norm: LogNorm::NegInfinity,
            });
            continue;
        }
        if !(RESCALE_LOW..=RESCALE_HIGH).contains(&norm) {
            log_scale += norm.ln();
            p = p.scale(c(1.0 / norm, 0.0));
            norm = operator_norm(&p)?;
        }
        out.push(PowerSample {
            n,
            scaled_norm: norm,
            log_scale,
            log_norm: LogNorm::Finite(norm.ln() + log_scale),
        });
    }
    Ok(out)
}
