//! Hermitian linear algebra of real `(p,p)`-forms.
//!
//! A real `(1,1)`-form `i h_{ij̄} dz_i ∧ dz̄_j` is stored as the `n × n`
//! Hermitian matrix `h[(i, j)] = h_{ij̄}`. A real `(p,p)`-form is stored as
//! its `N × N` Hermitian coefficient matrix `Ω[(I, J)] = Ω_{IJ̄}`, rows and
//! columns ordered by [`MultiIndexTable`]. Eigenvalues of a `(p,p)`-form are
//! the roots of `det(Ω - λ ω_pp) = 0` where `ω_pp` holds the `p × p` minors of
//! the metric.
//!
//! The coefficient of `h ∧ ω^{p-1}` follows the sum rule: diagonal entries are
//! `Σ_{i∈I} h_{iī}`, entries with `|I ∩ J| = p-1` are `±h_{ij̄}` and all other
//! entries vanish. In particular for `h` with eigenvalues `λ` the eigenvalues
//! of `h ∧ ω^{p-1}` are the `p`-sums `Σ_{i∈I} λ_i`.

pub mod exterior;

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::multiindex::MultiIndexTable;
use crate::{CMatrix, Error, Result, C64};

pub use exterior::{exterior_oracle, ExteriorForm};

/// Relative Hermitian tolerance on inputs.
pub const HERMITIAN_TOL: f64 = 1e-12;

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Largest `|m - m*|` entry relative to the largest entry of `m` (or 1).
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let scale = max_abs(m).max(1.0);
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

/// `(m + m*) / 2`.
pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn check_square(m: &CMatrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Argument(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn checked_hermitian(m: CMatrix, what: &str, tol: f64) -> Result<CMatrix> {
    check_square(&m, what)?;
    let defect = hermitian_defect(&m);
    if defect > tol {
        return Err(Error::Domain(format!(
            "{what} is not Hermitian (relative defect {defect:e})"
        )));
    }
    Ok(symmetrize(&m))
}

/// Coefficients `h_{ij̄}` of a real `(1,1)`-form or Hermitian metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix11(CMatrix);

impl Matrix11 {
    /// Accepts a matrix Hermitian up to [`HERMITIAN_TOL`] and symmetrizes it.
    pub fn new(m: CMatrix) -> Result<Self> {
        checked_hermitian(m, "(1,1) coefficient matrix", HERMITIAN_TOL).map(Self)
    }

    /// Wraps a matrix already known to be Hermitian.
    pub(crate) fn from_hermitian(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMatrix::zeros(n, n))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(d[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// Ascending real eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.0).0
    }

    pub fn is_positive_definite(&self) -> bool {
        hermitian_eigenvalues(&self.0)[0] > 0.0
    }
}

/// Coefficient matrix `Ω_{IJ̄}` of a real `(p,p)`-form.
#[derive(Debug, Clone, PartialEq)]
pub struct FormPP(CMatrix);

impl FormPP {
    pub fn new(m: CMatrix) -> Result<Self> {
        checked_hermitian(m, "(p,p) coefficient matrix", HERMITIAN_TOL).map(Self)
    }

    pub(crate) fn from_hermitian(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn zeros(size: usize) -> Self {
        Self(CMatrix::zeros(size, size))
    }

    pub fn identity(size: usize) -> Self {
        Self(CMatrix::identity(size, size))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        Self(Matrix11::from_real_diagonal(d).0)
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

/// The induced metric `ω_{IJ̄} = det(g_{i_k j̄_l})` on `(p,p)`-forms.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricPP(CMatrix);

impl MetricPP {
    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn identity(size: usize) -> Self {
        Self(CMatrix::identity(size, size))
    }
}

/// Eigenvalues of a `(p,p)`-form with respect to `ω_pp`.
#[derive(Debug, Clone)]
pub struct SpectrumPP {
    /// Ascending eigenvalues `Λ`.
    pub values: Vec<f64>,
    /// Unitary `P` with `Ẑ = P diag(Λ) P*`, where `Ẑ` is the form in the
    /// `ω_pp`-orthonormal frame.
    pub basis: CMatrix,
    /// Lower-triangular `M` with `M M* = ω_pp`.
    pub frame: CMatrix,
}

impl SpectrumPP {
    /// `P diag(Λ) P*`, the form in the reduced frame.
    pub fn reconstruct(&self) -> CMatrix {
        weighted_projector_sum(&self.basis, &self.values)
    }
}

/// `P diag(w) P*`.
pub(crate) fn weighted_projector_sum(basis: &CMatrix, weights: &[f64]) -> CMatrix {
    let size = basis.nrows();
    let mut out = CMatrix::zeros(size, size);
    for (k, &w) in weights.iter().enumerate() {
        let col = basis.column(k);
        for j in 0..size {
            let cj = col[j].conj() * w;
            for i in 0..size {
                out[(i, j)] += col[i] * cj;
            }
        }
    }
    out
}

/// Ascending eigen-decomposition of a Hermitian matrix.
///
/// Eigenvectors are phase-normalized so that the first component of modulus
/// above `1e-12` is real and positive.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let size = m.nrows();
    if size == 1 {
        return (vec![m[(0, 0)].re], CMatrix::identity(1, 1));
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..size).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut basis = CMatrix::zeros(size, size);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let phase = col
            .iter()
            .find(|z| z.norm() > 1e-12)
            .map(|z| z.conj() / z.norm())
            .unwrap_or(C64::new(1.0, 0.0));
        for i in 0..size {
            basis[(i, dst)] = col[i] * phase;
        }
    }
    (values, basis)
}

/// Ascending eigenvalues only.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)].re];
    }
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `p`-th compound matrix: entry `(I, J)` is the minor of `a` on rows `I`,
/// columns `J`.
pub fn compound(a: &CMatrix, table: &MultiIndexTable) -> Result<CMatrix> {
    check_square(a, "compound input")?;
    if a.nrows() != table.n() {
        return Err(Error::Argument(format!(
            "matrix is {}x{}, table is for n = {}",
            a.nrows(),
            a.ncols(),
            table.n()
        )));
    }
    let size = table.size();
    let p = table.p();
    let mut out = CMatrix::zeros(size, size);
    for (r, big_i) in table.list().iter().enumerate() {
        for (c, big_j) in table.list().iter().enumerate() {
            let sub = DMatrix::from_fn(p, p, |k, l| {
                a[(big_i.entries()[k] - 1, big_j.entries()[l] - 1)]
            });
            out[(r, c)] = sub.determinant();
        }
    }
    Ok(out)
}

/// `ω_{IJ̄} = det(g_{i_k j̄_l})`.
pub fn metric_pp(g: &Matrix11, table: &MultiIndexTable) -> Result<MetricPP> {
    if !g.is_positive_definite() {
        return Err(Error::Domain("metric is not positive definite".into()));
    }
    let m = compound(g.matrix(), table)?;
    Ok(MetricPP(symmetrize(&m)))
}

/// Coefficients of `h ∧ ω^{p-1}` in an orthonormal frame (`g = δ`).
pub fn wedge_contribution(h: &Matrix11, table: &MultiIndexTable) -> Result<FormPP> {
    if h.dim() != table.n() {
        return Err(Error::Argument(format!(
            "(1,1) form has dimension {}, table is for n = {}",
            h.dim(),
            table.n()
        )));
    }
    let mut out = CMatrix::zeros(table.size(), table.size());
    add_wedge(&mut out, h.matrix(), table);
    Ok(FormPP(out))
}

pub(crate) fn add_wedge(out: &mut CMatrix, h: &CMatrix, table: &MultiIndexTable) {
    for (r, big_i) in table.list().iter().enumerate() {
        let d: f64 = big_i.entries().iter().map(|&i| h[(i - 1, i - 1)].re).sum();
        out[(r, r)] += C64::new(d, 0.0);
    }
    for pair in table.adjacent_pairs() {
        out[(pair.row, pair.col)] += h[(pair.i, pair.j)] * pair.sign;
    }
}

/// `Z = X + h ∧ ω^{p-1}` with all inputs in a common orthonormal frame.
pub fn assemble_z(x: &FormPP, h: &Matrix11, table: &MultiIndexTable) -> Result<FormPP> {
    if x.size() != table.size() {
        return Err(Error::Argument(format!(
            "(p,p) form has size {}, table has N = {}",
            x.size(),
            table.size()
        )));
    }
    let mut z = wedge_contribution(h, table)?.0;
    z += &x.0;
    Ok(FormPP(z))
}

/// Reduction to a frame in which the metric is the identity.
///
/// With `g = L L*`, a `(1,1)`-form maps to `L⁻¹ h L⁻*` and a `(p,p)`-form
/// to `C(L)⁻¹ X C(L)⁻*` where `C` is the `p`-th compound.
#[derive(Debug, Clone)]
pub struct OrthonormalFrame {
    factor: CMatrix,
    inverse: CMatrix,
}

impl OrthonormalFrame {
    /// Lower-triangular `L` with `L L* = g`.
    pub fn factor(&self) -> &CMatrix {
        &self.factor
    }

    pub fn transform_11(&self, h: &Matrix11) -> Matrix11 {
        Matrix11(symmetrize(&(&self.inverse * h.matrix() * self.inverse.adjoint())))
    }

    pub fn transform_pp(&self, x: &FormPP, table: &MultiIndexTable) -> Result<FormPP> {
        let c = compound(&self.inverse, table)?;
        Ok(FormPP(symmetrize(&(&c * x.matrix() * c.adjoint()))))
    }
}

/// Lower Cholesky factor of a positive definite matrix.
fn cholesky_factor(m: &CMatrix, what: &str) -> Result<CMatrix> {
    if hermitian_eigenvalues(m)[0] <= 0.0 {
        return Err(Error::Domain(format!("{what} is not positive definite")));
    }
    Cholesky::new(m.clone())
        .map(|c| c.l())
        .ok_or_else(|| Error::Domain(format!("{what} is not positive definite")))
}

pub fn orthonormal_frame(g: &Matrix11) -> Result<OrthonormalFrame> {
    let factor = cholesky_factor(g.matrix(), "metric")?;
    let inverse = factor
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Domain("singular Cholesky factor".into()))?;
    Ok(OrthonormalFrame { factor, inverse })
}

/// Solves `det(Z - λ ω_pp) = 0` by Cholesky reduction.
pub fn eigen_pp(z: &FormPP, omega_pp: &MetricPP) -> Result<SpectrumPP> {
    let zm = checked_hermitian(z.0.clone(), "Z", HERMITIAN_TOL)?;
    if omega_pp.0.nrows() != zm.nrows() {
        return Err(Error::Argument(format!(
            "form has size {}, metric has size {}",
            zm.nrows(),
            omega_pp.0.nrows()
        )));
    }
    let frame = cholesky_factor(&omega_pp.0, "ω_pp")?;
    let inv = frame
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Domain("singular Cholesky factor of ω_pp".into()))?;
    let reduced = symmetrize(&(&inv * zm * inv.adjoint()));
    let (values, basis) = hermitian_eigen(&reduced);
    Ok(SpectrumPP {
        values,
        basis,
        frame,
    })
}

/// Spectrum of a form already expressed in an orthonormal frame.
pub fn eigen_orthonormal(z: &FormPP) -> SpectrumPP {
    let (values, basis) = hermitian_eigen(&z.0);
    let size = z.size();
    SpectrumPP {
        values,
        basis,
        frame: CMatrix::identity(size, size),
    }
}
