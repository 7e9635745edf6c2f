//! Linearization of `Z ↦ f(Λ(Z))` and its pull-back to `(1,1)`-forms.
//!
//! Matrices are paired with the trace: with `F = P diag(f_K) P*` the first
//! variation is `δf = tr(F δZ) = Σ F[I,J] δZ[J,I]`, and `G` is defined by
//! `δf = tr(G δ𝔤)` for `Z = X + 𝔤 ∧ ω^{p-1}`. In an orthonormal frame
//!
//! ```text
//! G[i,j] = Σ_{I' ∌ i,j} (-1)^{(i|I'_i) + (j|I'_j)} F[I'_i, I'_j]
//! ```
//!
//! so `G` is a sum of signed principal blocks of `F` and inherits positive
//! semi-definiteness from it.

use serde::{Deserialize, Serialize};

use crate::multiindex::MultiIndexTable;
use crate::ppalgebra::{hermitian_eigenvalues, weighted_projector_sum, SpectrumPP};
use crate::{CMatrix, Error, Result, C64};

/// `F^{IJ̄}`, Hermitian and positive semi-definite on the cone.
#[derive(Debug, Clone, PartialEq)]
pub struct FMatrix(CMatrix);

/// `G^{ij̄}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GMatrix(CMatrix);

impl FMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Argument("F must be square".into()));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.nrows()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.0)
    }
}

impl GMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Argument("G must be square".into()));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.0)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    /// Spectral norm (largest eigenvalue modulus).
    pub fn norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// `F = P diag(∇f) P*` in the frame of `spectrum`.
pub fn f_matrix(spectrum: &SpectrumPP, grad: &[f64]) -> Result<FMatrix> {
    if grad.len() != spectrum.values.len() || spectrum.basis.ncols() != grad.len() {
        return Err(Error::Argument(format!(
            "gradient has {} entries, spectrum has {}",
            grad.len(),
            spectrum.values.len()
        )));
    }
    Ok(FMatrix(weighted_projector_sum(&spectrum.basis, grad)))
}

fn check_table(f: &FMatrix, table: &MultiIndexTable) -> Result<()> {
    if f.size() != table.size() {
        return Err(Error::Argument(format!(
            "F has size {}, table has N = {}",
            f.size(),
            table.size()
        )));
    }
    Ok(())
}

/// `G` by contraction over `(p-1)`-indices. Production path.
pub fn g_matrix_contraction(f: &FMatrix, table: &MultiIndexTable) -> Result<GMatrix> {
    check_table(f, table)?;
    Ok(GMatrix(contract(&f.0, table)))
}

pub(crate) fn contract(f: &CMatrix, table: &MultiIndexTable) -> CMatrix {
    let n = table.n();
    let mut g = CMatrix::zeros(n, n);
    for row in table.insertions() {
        for a in row {
            for b in row {
                g[(a.i, b.i)] += f[(a.rank, b.rank)] * (a.sign * b.sign);
            }
        }
    }
    g
}

/// `G` from the diagonal and `|I ∩ J| = p-1` formulas, computed from the
/// index lists directly. Independent of the contraction tables.
pub fn g_matrix_direct(f: &FMatrix, table: &MultiIndexTable) -> Result<GMatrix> {
    check_table(f, table)?;
    let n = table.n();
    let list = table.list();
    let mut g = CMatrix::zeros(n, n);
    for i in 1..=n {
        let mut acc = C64::new(0.0, 0.0);
        for (r, big_i) in list.iter().enumerate() {
            if big_i.contains(i) {
                acc += f.0[(r, r)];
            }
        }
        g[(i - 1, i - 1)] = acc;
    }
    for (r, big_i) in list.iter().enumerate() {
        for (c, big_j) in list.iter().enumerate() {
            let i_only: Vec<(usize, usize)> = big_i
                .entries()
                .iter()
                .enumerate()
                .filter(|(_, e)| !big_j.contains(**e))
                .map(|(pos, &e)| (pos + 1, e))
                .collect();
            if i_only.len() != 1 {
                continue;
            }
            let j_only: Vec<(usize, usize)> = big_j
                .entries()
                .iter()
                .enumerate()
                .filter(|(_, e)| !big_i.contains(**e))
                .map(|(pos, &e)| (pos + 1, e))
                .collect();
            let ((pi, i), (pj, j)) = (i_only[0], j_only[0]);
            let sign = if (pi + pj) % 2 == 0 { 1.0 } else { -1.0 };
            g[(i - 1, j - 1)] += f.0[(r, c)] * sign;
        }
    }
    Ok(GMatrix(g))
}

/// `f_(α)`, the `α`-th smallest eigenvalue of `F`, `α = pN/n = C(n-1,p-1)`.
pub fn refined_floor(f: &FMatrix, n: usize, p: usize) -> Result<f64> {
    let table_size = crate::multiindex::binomial(n, p);
    if p == 0 || p > n || f.size() != table_size {
        return Err(Error::Argument(format!(
            "F has size {}, C({n},{p}) = {table_size}",
            f.size()
        )));
    }
    let alpha = crate::multiindex::binomial(n - 1, p - 1);
    Ok(f.eigenvalues()[alpha - 1])
}

/// Sum of `|b_{ij}|²` over the block with 1-based `rows` and `cols`.
pub fn unitary_submatrix_sum(b: &CMatrix, rows: &[usize], cols: &[usize]) -> Result<f64> {
    let size = b.nrows();
    if b.ncols() != size {
        return Err(Error::Argument("B must be square".into()));
    }
    let defect = (b.adjoint() * b - CMatrix::identity(size, size))
        .iter()
        .fold(0.0_f64, |m, z| m.max(z.norm()));
    if defect > 1e-10 {
        return Err(Error::Domain(format!("B is not unitary (defect {defect:e})")));
    }
    if rows.iter().chain(cols).any(|&k| k == 0 || k > size) {
        return Err(Error::Argument(format!(
            "block indices must lie in [1, {size}]"
        )));
    }
    Ok(rows
        .iter()
        .flat_map(|&r| cols.iter().map(move |&c| b[(r - 1, c - 1)].norm_sqr()))
        .sum())
}

/// Derivatives of the data `X`, `χ`, `ψ` at one point.
///
/// `*_phi` are derivatives in `φ`, `*_z[k]` in `z_k` (explicit dependence) and
/// `*_zeta[α]` in `ζ_α = ∂_α φ`, all in the Wirtinger sense.
#[derive(Debug, Clone)]
pub struct PointDerivatives {
    pub x_phi: CMatrix,
    pub chi_phi: CMatrix,
    pub psi_phi: f64,
    pub x_z: Vec<CMatrix>,
    pub chi_z: Vec<CMatrix>,
    pub psi_z: Vec<C64>,
    pub x_zeta: Vec<CMatrix>,
    pub chi_zeta: Vec<CMatrix>,
    pub psi_zeta: Vec<C64>,
}

impl PointDerivatives {
    /// Data independent of `z`, `φ` and `∂φ`.
    pub fn zero(n: usize, size: usize) -> Self {
        Self {
            x_phi: CMatrix::zeros(size, size),
            chi_phi: CMatrix::zeros(n, n),
            psi_phi: 0.0,
            x_z: vec![CMatrix::zeros(size, size); n],
            chi_z: vec![CMatrix::zeros(n, n); n],
            psi_z: vec![C64::new(0.0, 0.0); n],
            x_zeta: vec![CMatrix::zeros(size, size); n],
            chi_zeta: vec![CMatrix::zeros(n, n); n],
            psi_zeta: vec![C64::new(0.0, 0.0); n],
        }
    }
}

/// Lower-order coefficients of the linearized operator
/// `𝓛u = u_t - tr(G ∂∂̄u) - 2 Re(B^α ∂_α u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinCoefficients {
    pub b_phi: f64,
    pub b_k: Vec<(f64, f64)>,
    pub b_alpha: Vec<(f64, f64)>,
}

impl LinCoefficients {
    pub fn b_alpha_c(&self) -> Vec<C64> {
        self.b_alpha.iter().map(|&(re, im)| C64::new(re, im)).collect()
    }

    pub fn b_k_c(&self) -> Vec<C64> {
        self.b_k.iter().map(|&(re, im)| C64::new(re, im)).collect()
    }
}

/// `tr(a b)`.
fn pair(a: &CMatrix, b: &CMatrix) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// `B = tr(F X_·) + tr(G χ_·) - ψ_·` for the `φ`, `z_k` and `ζ_α` slots.
pub fn lin_coefficients(
    f: &FMatrix,
    g: &GMatrix,
    derivatives: Option<&PointDerivatives>,
) -> Result<LinCoefficients> {
    let d = derivatives.ok_or_else(|| {
        Error::config(
            "scenario",
            "data provides no derivative callbacks; linearized coefficients are unavailable",
        )
    })?;
    let n = g.dim();
    if d.x_z.len() != n || d.chi_z.len() != n || d.psi_z.len() != n {
        return Err(Error::Argument("z-derivative data has the wrong length".into()));
    }
    if d.x_zeta.len() != n || d.chi_zeta.len() != n || d.psi_zeta.len() != n {
        return Err(Error::Argument("ζ-derivative data has the wrong length".into()));
    }
    let b_phi = (pair(&f.0, &d.x_phi) + pair(&g.0, &d.chi_phi)).re - d.psi_phi;
    let slot = |x: &CMatrix, chi: &CMatrix, psi: C64| -> (f64, f64) {
        let v = pair(&f.0, x) + pair(&g.0, chi) - psi;
        (v.re, v.im)
    };
    let b_k = (0..n).map(|k| slot(&d.x_z[k], &d.chi_z[k], d.psi_z[k])).collect();
    let b_alpha = (0..n)
        .map(|a| slot(&d.x_zeta[a], &d.chi_zeta[a], d.psi_zeta[a]))
        .collect();
    Ok(LinCoefficients { b_phi, b_k, b_alpha })
}
