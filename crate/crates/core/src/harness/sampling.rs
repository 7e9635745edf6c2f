//! Random generators for the property suites.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::conefun::ConeFunction;
use crate::ppalgebra::{symmetrize, FormPP, Matrix11};
use crate::{CMatrix, C64};

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Entries with independent standard complex normal real and imaginary parts.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| C64::new(normal(rng), normal(rng)))
}

/// Random Hermitian matrix with entries of size about `scale`.
pub fn hermitian_matrix<R: Rng + ?Sized>(rng: &mut R, size: usize, scale: f64) -> CMatrix {
    symmetrize(&complex_gaussian(rng, size, size)).scale(scale)
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> Matrix11 {
    Matrix11::from_hermitian(hermitian_matrix(rng, n, scale))
}

pub fn hermitian_pp<R: Rng + ?Sized>(rng: &mut R, size: usize, scale: f64) -> FormPP {
    FormPP::from_hermitian(hermitian_matrix(rng, size, scale))
}

/// `A A* + 0.1 n I` for a complex Gaussian `A`.
pub fn positive_definite<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Matrix11 {
    let a = complex_gaussian(rng, n, n);
    let m = &a * a.adjoint() + CMatrix::identity(n, n).scale(0.1 * n as f64);
    Matrix11::from_hermitian(symmetrize(&m))
}

/// Haar-distributed unitary matrix: QR of a complex Gaussian with the phases
/// of `diag(R)` divided out.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let qr = complex_gaussian(rng, n, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// A point of the open cone of `f`, found by rejection from shifted
/// Gaussians; the spread of shifts puts some samples close to the boundary.
pub fn cone_point<R: Rng + ?Sized>(rng: &mut R, f: &ConeFunction, scale: f64) -> Vec<f64> {
    loop {
        let shift = rng.random_range(-0.5..3.0) * scale;
        let v: Vec<f64> = (0..f.size()).map(|_| normal(rng) * scale + shift).collect();
        if f.in_cone(&v) {
            return v;
        }
    }
}

/// Strictly positive vector.
pub fn positive_vector<R: Rng + ?Sized>(rng: &mut R, size: usize) -> Vec<f64> {
    (0..size).map(|_| rng.random_range(1e-3..5.0)).collect()
}
