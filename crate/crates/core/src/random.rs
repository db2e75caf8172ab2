//! Seeded generators for test matrices and vectors.
//!
//! All randomness in the crate flows through [`rng`], so a seed fully
//! determines every generated object.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{c, CMatrix, CVector, Complex};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from the closed unit disk.
pub fn unit_disk(rng: &mut SeededRng) -> Complex {
    let r = rng.gen::<f64>().sqrt();
    Complex::from_polar(r, rng.gen_range(0.0..2.0 * PI))
}

pub fn unimodular(rng: &mut SeededRng) -> Complex {
    Complex::from_polar(1.0, rng.gen_range(0.0..2.0 * PI))
}

/// Matrix with i.i.d. entries uniform in the unit disk.
pub fn disk_matrix(rng: &mut SeededRng, dim: usize) -> CMatrix {
    let e = (0..dim * dim).map(|_| unit_disk(rng)).collect();
    CMatrix::new(dim, e).expect("valid dimension")
}

pub fn disk_vector(rng: &mut SeededRng, dim: usize) -> CVector {
    CVector::from((0..dim).map(|_| unit_disk(rng)).collect::<Vec<_>>())
}

/// Random unitary as a product of `dim` Householder reflectors times a
/// diagonal of random phases.
pub fn unitary(rng: &mut SeededRng, dim: usize) -> CMatrix {
    let mut u = CMatrix::from_diag(&(0..dim).map(|_| unimodular(rng)).collect::<Vec<_>>());
    for _ in 0..dim {
        let v: Vec<Complex> = (0..dim)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let nsq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if nsq < 1e-8 {
            continue;
        }
        let mut h = CMatrix::identity(dim);
        for i in 0..dim {
            for j in 0..dim {
                h[(i, j)] -= v[i] * v[j].conj() * (2.0 / nsq);
            }
        }
        u = &h * &u;
    }
    u
}

/// A matrix `V` together with its exact inverse, with condition number in
/// `[1, cond]`. Built as `U₁·diag(s)·U₂` with singular values `s ∈ [1, cond]`.
pub fn conditioned_pair(rng: &mut SeededRng, dim: usize, cond: f64) -> (CMatrix, CMatrix) {
    let u1 = unitary(rng, dim);
    let u2 = unitary(rng, dim);
    let mut s: Vec<f64> = (0..dim).map(|_| rng.gen_range(1.0..=cond)).collect();
    s[0] = 1.0;
    if dim > 1 {
        s[dim - 1] = cond;
    }
    let sd = CMatrix::from_real_diag(&s);
    let sinv = CMatrix::from_real_diag(&s.iter().map(|x| 1.0 / x).collect::<Vec<_>>());
    let v = &(&u1 * &sd) * &u2;
    let vinv = &(&u2.adjoint() * &sinv) * &u1.adjoint();
    (v, vinv)
}

/// `V·diag(eigs)·V⁻¹` with `cond(V) <= cond`.
pub fn diagonalizable(rng: &mut SeededRng, eigs: &[Complex], cond: f64) -> CMatrix {
    let (v, vinv) = conditioned_pair(rng, eigs.len(), cond);
    &(&v * &CMatrix::from_diag(eigs)) * &vinv
}

/// Unitary with prescribed eigenvalues: `Q·diag(eigs)·Qᴴ`.
pub fn unitary_with_spectrum(rng: &mut SeededRng, eigs: &[Complex]) -> CMatrix {
    let q = unitary(rng, eigs.len());
    &(&q * &CMatrix::from_diag(eigs)) * &q.adjoint()
}
