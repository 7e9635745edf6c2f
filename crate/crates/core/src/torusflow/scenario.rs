//! Built-in scenario data: Fourier-mode `χ`, `ψ`, `φ₀` and constant or
//! gradient-linear `X`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{FlowData, ScalarField, TorusGrid};
use crate::conefun::{ConeFunction, Family};
use crate::linop::PointDerivatives;
use crate::multiindex::MultiIndexTable;
use crate::{CMatrix, Error, Result, C64};

/// `amplitude · cos(2π wave·x + phase)`, with `wave` indexed by real axes
/// `x₁, y₁, x₂, y₂, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub wave: Vec<i64>,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

impl Mode {
    /// `amplitude · cos(2π·freq·x_axis)` in dimension `n`.
    pub fn along(n: usize, axis: usize, freq: i64, amplitude: f64) -> Self {
        let mut wave = vec![0; 2 * n];
        wave[axis] = freq;
        Self {
            wave,
            amplitude,
            phase: 0.0,
        }
    }

    fn arg(&self, x: &[f64]) -> f64 {
        2.0 * PI * self.wave.iter().zip(x).map(|(&w, &v)| w as f64 * v).sum::<f64>() + self.phase
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.amplitude * self.arg(x).cos()
    }

    /// `∂_j` of the mode, `½(∂_{x_j} - i∂_{y_j})`.
    pub fn dz(&self, x: &[f64]) -> Vec<C64> {
        let s = -self.amplitude * 2.0 * PI * self.arg(x).sin();
        (0..self.wave.len() / 2)
            .map(|j| C64::new(0.5 * s * self.wave[2 * j] as f64, -0.5 * s * self.wave[2 * j + 1] as f64))
            .collect()
    }

    /// `|wave|²`.
    pub fn norm2(&self) -> i64 {
        self.wave.iter().map(|w| w * w).sum()
    }
}

/// Off-diagonal entry of a Hermitian coefficient matrix; `(col,row)` gets
/// the conjugate. Indices are 1-based ranks of multi-indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormEntry {
    pub row: usize,
    pub col: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Constant real `(p,p)`-form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormSpec {
    pub diagonal: Vec<f64>,
    #[serde(default)]
    pub entries: Vec<FormEntry>,
}

impl FormSpec {
    pub fn matrix(&self, size: usize, field: &str) -> Result<CMatrix> {
        if self.diagonal.len() != size {
            return Err(Error::config(
                field,
                format!("diagonal has {} entries, expected N = {size}", self.diagonal.len()),
            ));
        }
        let mut m = CMatrix::zeros(size, size);
        for (i, &d) in self.diagonal.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        for e in &self.entries {
            if e.row == 0 || e.col == 0 || e.row > size || e.col > size || e.row == e.col {
                return Err(Error::config(
                    field,
                    format!("entry ({}, {}) must be off-diagonal within 1..={size}", e.row, e.col),
                ));
            }
            let v = C64::new(e.re, e.im);
            m[(e.row - 1, e.col - 1)] = v;
            m[(e.col - 1, e.row - 1)] = v.conj();
        }
        Ok(m)
    }
}

/// `Re(a · ζ_α) Θ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradientTerm {
    pub alpha: usize,
    pub a: [f64; 2],
    pub theta: FormSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChiSpec {
    /// `χ = c·ω`.
    MultipleOfOmega { c: f64 },
    /// `χ = (c + Σ modes)·ω`.
    FourierModes { c: f64, modes: Vec<Mode> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum XSpec {
    Zero,
    ConstantForm { form: FormSpec },
    /// `Ω₀ + Σ Re(a^α ζ_α) Θ_α`.
    GradientLinear { base: FormSpec, terms: Vec<GradientTerm> },
    /// `Ω₀ + ∂ω^{p-1}`-type corrections, which vanish on the flat torus.
    Pluriclosed { form: FormSpec },
}

/// `ψ = constant + Σ modes + Re(Σ a_α ζ_α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiSpec {
    pub constant: f64,
    #[serde(default)]
    pub modes: Vec<Mode>,
    #[serde(default)]
    pub gradient: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Phi0Spec {
    Zero,
    FourierModes { modes: Vec<Mode> },
}

/// Everything that defines the equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub n: usize,
    pub p: usize,
    pub family: Family,
    pub k: usize,
    pub chi: ChiSpec,
    pub x: XSpec,
    pub psi: PsiSpec,
    pub phi0: Phi0Spec,
}

impl ScenarioSpec {
    fn all_modes(&self) -> impl Iterator<Item = (&'static str, &Mode)> {
        let chi: &[Mode] = match &self.chi {
            ChiSpec::FourierModes { modes, .. } => modes,
            ChiSpec::MultipleOfOmega { .. } => &[],
        };
        let phi0: &[Mode] = match &self.phi0 {
            Phi0Spec::FourierModes { modes } => modes,
            Phi0Spec::Zero => &[],
        };
        chi.iter()
            .map(|m| ("chi", m))
            .chain(self.psi.modes.iter().map(|m| ("psi", m)))
            .chain(phi0.iter().map(|m| ("phi0", m)))
    }

    /// Largest wavenumber component over all modes.
    pub fn max_frequency(&self) -> i64 {
        self.all_modes()
            .flat_map(|(_, m)| m.wave.iter().map(|w| w.abs()))
            .max()
            .unwrap_or(0)
    }
}

/// Validated scenario implementing [`FlowData`].
#[derive(Debug, Clone)]
pub struct Scenario {
    spec: ScenarioSpec,
    table: MultiIndexTable,
    cone: ConeFunction,
    omega0: CMatrix,
    terms: Vec<(usize, C64, CMatrix)>,
    psi_gradient: Vec<C64>,
}

impl Scenario {
    pub fn new(spec: &ScenarioSpec) -> Result<Self> {
        let table = MultiIndexTable::enumerate(spec.n, spec.p)
            .map_err(|e| Error::config("p", e.to_string()))?;
        let size = table.size();
        let cone = ConeFunction::new(spec.family, spec.k, size)
            .map_err(|e| Error::config("k", e.to_string()))?;
        for (field, m) in spec.all_modes() {
            if m.wave.len() != 2 * spec.n {
                return Err(Error::config(
                    field,
                    format!("mode wave vector needs {} components", 2 * spec.n),
                ));
            }
            if !m.amplitude.is_finite() || !m.phase.is_finite() {
                return Err(Error::config(field, "mode amplitude and phase must be finite"));
            }
        }
        let (omega0, terms) = match &spec.x {
            XSpec::Zero => (CMatrix::zeros(size, size), Vec::new()),
            XSpec::ConstantForm { form } | XSpec::Pluriclosed { form } => {
                (form.matrix(size, "X.form")?, Vec::new())
            }
            XSpec::GradientLinear { base, terms } => {
                let mut out = Vec::new();
                for t in terms {
                    if t.alpha == 0 || t.alpha > spec.n {
                        return Err(Error::config(
                            "X.terms",
                            format!("alpha must lie in 1..={}", spec.n),
                        ));
                    }
                    out.push((
                        t.alpha - 1,
                        C64::new(t.a[0], t.a[1]),
                        t.theta.matrix(size, "X.terms.theta")?,
                    ));
                }
                (base.matrix(size, "X.base")?, out)
            }
        };
        if !spec.psi.gradient.is_empty() && spec.psi.gradient.len() != spec.n {
            return Err(Error::config(
                "psi.gradient",
                format!("needs {} complex coefficients or none", spec.n),
            ));
        }
        let psi_gradient = spec
            .psi
            .gradient
            .iter()
            .map(|a| C64::new(a[0], a[1]))
            .collect();
        Ok(Self {
            spec: spec.clone(),
            table,
            cone,
            omega0,
            terms,
            psi_gradient,
        })
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    /// `φ₀` sampled on `grid`.
    pub fn initial_field(&self, grid: &TorusGrid) -> ScalarField {
        let values = match &self.spec.phi0 {
            Phi0Spec::Zero => vec![0.0; grid.len()],
            Phi0Spec::FourierModes { modes } => {
                grid.sample(|x| modes.iter().map(|m| m.eval(x)).sum())
            }
        };
        ScalarField { values }
    }

    fn chi_scalar(&self, x: &[f64]) -> f64 {
        match &self.spec.chi {
            ChiSpec::MultipleOfOmega { c } => *c,
            ChiSpec::FourierModes { c, modes } => c + modes.iter().map(|m| m.eval(x)).sum::<f64>(),
        }
    }

    fn sum_dz(&self, modes: &[Mode], x: &[f64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.spec.n];
        for m in modes {
            for (o, v) in out.iter_mut().zip(m.dz(x)) {
                *o += v;
            }
        }
        out
    }
}

impl FlowData for Scenario {
    fn n(&self) -> usize {
        self.spec.n
    }

    fn table(&self) -> &MultiIndexTable {
        &self.table
    }

    fn cone(&self) -> &ConeFunction {
        &self.cone
    }

    fn chi(&self, x: &[f64], _phi: f64, _dz: &[C64]) -> CMatrix {
        let n = self.spec.n;
        CMatrix::identity(n, n).scale(self.chi_scalar(x))
    }

    fn x_form(&self, _x: &[f64], _phi: f64, dz: &[C64]) -> CMatrix {
        let mut m = self.omega0.clone();
        for (alpha, a, theta) in &self.terms {
            m += theta.scale((a * dz[*alpha]).re);
        }
        m
    }

    fn psi(&self, x: &[f64], _phi: f64, dz: &[C64]) -> f64 {
        let modes: f64 = self.spec.psi.modes.iter().map(|m| m.eval(x)).sum();
        let grad: f64 = self
            .psi_gradient
            .iter()
            .zip(dz)
            .map(|(a, z)| (a * z).re)
            .sum();
        self.spec.psi.constant + modes + grad
    }

    fn derivatives(&self, x: &[f64], _phi: f64, _dz: &[C64]) -> Option<PointDerivatives> {
        let n = self.spec.n;
        let mut d = PointDerivatives::zero(n, self.table.size());
        for (alpha, a, theta) in &self.terms {
            d.x_zeta[*alpha] += theta.map(|v| v * (a * 0.5));
        }
        for (slot, a) in d.psi_zeta.iter_mut().zip(&self.psi_gradient) {
            *slot = a * 0.5;
        }
        if let ChiSpec::FourierModes { modes, .. } = &self.spec.chi {
            for (k, v) in self.sum_dz(modes, x).into_iter().enumerate() {
                d.chi_z[k] = CMatrix::identity(n, n).map(|e| e * v);
            }
        }
        d.psi_z = self.sum_dz(&self.spec.psi.modes, x);
        Some(d)
    }

    fn active_axes(&self) -> Vec<bool> {
        let mut active = vec![false; 2 * self.spec.n];
        for (_, m) in self.spec.all_modes() {
            for (a, &w) in m.wave.iter().enumerate() {
                if w != 0 && m.amplitude != 0.0 {
                    active[a] = true;
                }
            }
        }
        active
    }

    fn phi_independent(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_spec() -> ScenarioSpec {
        ScenarioSpec {
            n: 3,
            p: 2,
            family: Family::SigmaKRoot,
            k: 2,
            chi: ChiSpec::MultipleOfOmega { c: 1.0 },
            x: XSpec::Zero,
            psi: PsiSpec {
                constant: 12f64.sqrt(),
                modes: vec![Mode::along(3, 0, 1, 0.1)],
                gradient: vec![],
            },
            phi0: Phi0Spec::Zero,
        }
    }

    #[test]
    fn mode_wirtinger_derivative() {
        let m = Mode {
            wave: vec![1, 2, 0, -1],
            amplitude: 0.7,
            phase: 0.3,
        };
        let x = [0.1, 0.35, 0.6, 0.2];
        let h = 1e-6;
        let fd = |a: usize| {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            (m.eval(&xp) - m.eval(&xm)) / (2.0 * h)
        };
        let dz = m.dz(&x);
        for j in 0..2 {
            let want = C64::new(0.5 * fd(2 * j), -0.5 * fd(2 * j + 1));
            assert!((dz[j] - want).norm() < 1e-8);
        }
    }

    #[test]
    fn active_axes_follow_modes() {
        let s = Scenario::new(&base_spec()).unwrap();
        assert_eq!(s.active_axes(), vec![true, false, false, false, false, false]);
        let mut spec = base_spec();
        spec.phi0 = Phi0Spec::FourierModes {
            modes: vec![Mode::along(3, 3, 2, 0.01)],
        };
        let s = Scenario::new(&spec).unwrap();
        assert_eq!(s.active_axes(), vec![true, false, false, true, false, false]);
    }

    #[test]
    fn validation_errors_name_fields() {
        let mut spec = base_spec();
        spec.psi.modes[0].wave.pop();
        assert!(matches!(Scenario::new(&spec), Err(Error::Config { field, .. }) if field == "psi"));
        let mut spec = base_spec();
        spec.x = XSpec::ConstantForm {
            form: FormSpec {
                diagonal: vec![1.0, 2.0],
                entries: vec![],
            },
        };
        assert!(matches!(Scenario::new(&spec), Err(Error::Config { field, .. }) if field == "X.form"));
        let mut spec = base_spec();
        spec.k = 4;
        assert!(matches!(Scenario::new(&spec), Err(Error::Config { field, .. }) if field == "k"));
    }

    #[test]
    fn gradient_linear_data() {
        let mut spec = base_spec();
        spec.x = XSpec::GradientLinear {
            base: FormSpec {
                diagonal: vec![0.1, 0.2, 0.3],
                entries: vec![FormEntry {
                    row: 1,
                    col: 3,
                    re: 0.05,
                    im: -0.02,
                }],
            },
            terms: vec![GradientTerm {
                alpha: 2,
                a: [0.5, -0.25],
                theta: FormSpec {
                    diagonal: vec![1.0, 0.0, 0.0],
                    entries: vec![],
                },
            }],
        };
        spec.psi.gradient = vec![[0.0, 0.0], [0.2, 0.1], [0.0, 0.0]];
        let s = Scenario::new(&spec).unwrap();
        let dz = [C64::new(0.0, 0.0), C64::new(0.4, 0.6), C64::new(1.0, 0.0)];
        let x = s.x_form(&[0.0; 6], 0.0, &dz);
        let coef = (C64::new(0.5, -0.25) * dz[1]).re;
        assert!((x[(0, 0)].re - (0.1 + coef)).abs() < 1e-15);
        assert_eq!(x[(2, 0)], C64::new(0.05, 0.02));
        let psi = s.psi(&[0.0; 6], 0.0, &dz);
        assert!((psi - (12f64.sqrt() + 0.1 + (C64::new(0.2, 0.1) * dz[1]).re)).abs() < 1e-15);
        let d = s.derivatives(&[0.0; 6], 0.0, &dz).unwrap();
        assert_eq!(d.psi_zeta[1], C64::new(0.1, 0.05));
        assert_eq!(d.x_zeta[1][(0, 0)], C64::new(0.25, -0.125));
    }
}
