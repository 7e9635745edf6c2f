//! Explicit spectral flow on the flat torus.
//!
//! A [`Flow`] couples scenario data ([`FlowData`]) with a [`TorusGrid`] and
//! advances `φ` with Heun steps:
//!
//! ```text
//! φ_t = f(Λ(X[φ] + (χ + ∂∂̄φ) ∧ ω^{p-1})) - ψ[φ]
//! ```
//!
//! The pointwise kernel (assemble, eigenvalues, `f`, `G`) runs in parallel
//! over grid points; every reduction walks the points in index order, so
//! results do not depend on the thread count.

pub mod grid;
pub mod io;
pub mod monitors;
pub mod scenario;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conefun::ConeFunction;
use crate::linop::{
    contract, lin_coefficients, FMatrix, GMatrix, LinCoefficients, PointDerivatives,
};
use crate::multiindex::MultiIndexTable;
use crate::ppalgebra::{add_wedge, hermitian_eigen, hermitian_eigenvalues, weighted_projector_sum};
use crate::{CMatrix, Error, Result, C64};

pub use grid::{RealDerivatives, Spectral, TorusGrid};
pub use scenario::Scenario;

/// Real field over the stored grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value at grid point {i}")));
        }
        Ok(Self { values })
    }

    pub fn constant(len: usize, c: f64) -> Self {
        Self {
            values: vec![c; len],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Compensated mean, summed in index order.
    pub fn mean(&self) -> f64 {
        let mut sum = 0.0;
        let mut carry = 0.0;
        for &v in &self.values {
            let t = sum + v;
            if sum.abs() >= v.abs() {
                carry += (sum - t) + v;
            } else {
                carry += (v - t) + sum;
            }
            sum = t;
        }
        (sum + carry) / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sup - inf`.
    pub fn oscillation(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    fn axpy(&self, a: f64, x: &Self) -> Self {
        Self {
            values: self
                .values
                .iter()
                .zip(&x.values)
                .map(|(v, w)| v + a * w)
                .collect(),
        }
    }
}

/// `φ̃ = φ - mean(φ)`; on the flat torus `∫ω^n` is constant.
pub fn normalize(phi: &ScalarField) -> ScalarField {
    phi.shifted(-phi.mean())
}

/// Scenario data `X[φ]`, `χ[φ]`, `ψ[φ]` evaluated at real coordinates `x`,
/// value `φ` and `ζ = ∂φ`.
pub trait FlowData: Sync {
    fn n(&self) -> usize;

    fn table(&self) -> &MultiIndexTable;

    fn cone(&self) -> &ConeFunction;

    /// `χ_{ij̄}`, an `n×n` Hermitian matrix.
    fn chi(&self, x: &[f64], phi: f64, dz: &[C64]) -> CMatrix;

    /// `X_{IJ̄}`, an `N×N` Hermitian matrix.
    fn x_form(&self, x: &[f64], phi: f64, dz: &[C64]) -> CMatrix;

    fn psi(&self, x: &[f64], phi: f64, dz: &[C64]) -> f64;

    /// Wirtinger derivatives of the data, when available.
    fn derivatives(&self, _x: &[f64], _phi: f64, _dz: &[C64]) -> Option<PointDerivatives> {
        None
    }

    /// Real axes along which some datum varies.
    fn active_axes(&self) -> Vec<bool> {
        vec![true; 2 * self.n()]
    }

    /// True when no datum depends on `φ`, so `B_φ = 0`.
    fn phi_independent(&self) -> bool {
        false
    }
}

/// Cached pointwise quantities of one state.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub phi_t: ScalarField,
    pub margins: Vec<f64>,
    /// Eigenvalues per point, `N` consecutive entries each.
    pub spectra: Vec<f64>,
    /// `∂∂̄φ` per point, `n×n` row-major.
    pub ddbar: Vec<C64>,
    /// `∂φ` per point.
    pub dz: Vec<C64>,
    /// `sup_x λ_max(G)`.
    pub g_max: f64,
    pub min_margin: f64,
    /// `sup_x |∂φ|`.
    pub sup_grad: f64,
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub phi: ScalarField,
    pub t: f64,
    pub dt_last: f64,
    eval: Evaluation,
}

impl FlowState {
    pub fn evaluation(&self) -> &Evaluation {
        &self.eval
    }

    pub fn phi_t(&self) -> &ScalarField {
        &self.eval.phi_t
    }

    pub fn phi_tilde(&self) -> ScalarField {
        normalize(&self.phi)
    }
}

/// Time step controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSettings {
    pub cfl: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub dt_fixed: Option<f64>,
    pub max_halvings: u32,
}

impl Default for StepSettings {
    fn default() -> Self {
        Self {
            cfl: 0.8,
            dt_min: 1e-9,
            dt_max: 1e-2,
            dt_fixed: None,
            max_halvings: 20,
        }
    }
}

/// Termination and recording controls of [`Flow::run`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub t_max: f64,
    /// Convergence is not declared before this time.
    pub t_min: f64,
    pub tol_residual: f64,
    pub record_every: f64,
    /// Keep `φ̃` and `φ_t` at every record.
    pub keep_fields: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            t_max: 10.0,
            t_min: 0.0,
            tol_residual: 1e-5,
            record_every: 0.05,
            keep_fields: false,
        }
    }
}

/// One row of the diagnostics trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    pub residual_sup: f64,
    pub osc_phi_t: f64,
    pub mean_phi_t: f64,
    pub min_phi_t: f64,
    pub max_phi_t: f64,
    pub min_cone_margin: f64,
    pub sup_grad: f64,
    pub dt: f64,
    pub harnack_q: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub phi_tilde: ScalarField,
    pub phi_t: ScalarField,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub phi_tilde: ScalarField,
    /// `(sup φ_t + inf φ_t)/2`, the constant minimizing the sup-residual.
    pub b: f64,
    /// `sup |φ_t - b|`.
    pub residual: f64,
    pub converged: bool,
    pub records: Vec<Record>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: FlowState,
    pub steps: usize,
    pub rejected: usize,
}

struct PointResult {
    rhs: f64,
    margin: f64,
    spectrum: Vec<f64>,
    g_max: f64,
    ddbar: Vec<C64>,
    dz: Vec<C64>,
    lin: Option<(GMatrix, LinCoefficients)>,
}

/// Linearized coefficients at one grid point.
#[derive(Debug, Clone)]
pub struct PointLinearization {
    pub g: GMatrix,
    pub coefficients: LinCoefficients,
}

pub struct Flow<D: FlowData> {
    data: D,
    grid: TorusGrid,
    spectral: Spectral,
    settings: StepSettings,
}

impl<D: FlowData> Flow<D> {
    pub fn new(data: D, grid: TorusGrid, settings: StepSettings) -> Result<Self> {
        if grid.n() != data.n() {
            return Err(Error::Argument(format!(
                "grid is for n = {}, data for n = {}",
                grid.n(),
                data.n()
            )));
        }
        if data.cone().size() != data.table().size() {
            return Err(Error::Argument("cone function size differs from C(n,p)".into()));
        }
        let spectral = Spectral::new(&grid);
        Ok(Self {
            data,
            grid,
            spectral,
            settings,
        })
    }

    pub fn data(&self) -> &D {
        &self.data
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn settings(&self) -> &StepSettings {
        &self.settings
    }

    fn point(
        &self,
        i: usize,
        phi: f64,
        d: &RealDerivatives,
        want_lin: bool,
    ) -> Result<PointResult> {
        let n = self.data.n();
        let table = self.data.table();
        let cone = self.data.cone();
        let x = self.grid.coordinates(i);
        let ddbar = d.ddbar(i);
        let dz = d.dz(i);
        let h = self.data.chi(&x, phi, &dz) + CMatrix::from_row_slice(n, n, &ddbar);
        let mut z = self.data.x_form(&x, phi, &dz);
        add_wedge(&mut z, &h, table);
        let (spectrum, basis) = hermitian_eigen(&z);
        let margin = cone.margin(&spectrum);
        if !cone.is_linear() && !(margin > 0.0) {
            return Err(Error::Admissibility { point: i, margin });
        }
        let value = cone.eval_unchecked(&spectrum);
        let grad = cone.grad_unchecked(&spectrum);
        let rhs = value - self.data.psi(&x, phi, &dz);
        if !rhs.is_finite() {
            return Err(Error::Admissibility {
                point: i,
                margin: f64::NAN,
            });
        }
        let f = weighted_projector_sum(&basis, &grad);
        let g = contract(&f, table);
        let g_max = *hermitian_eigenvalues(&g).last().expect("n >= 1");
        let lin = if want_lin {
            let f = FMatrix::new(f)?;
            let g = GMatrix::new(g)?;
            let derivs = self.data.derivatives(&x, phi, &dz);
            let coefficients = lin_coefficients(&f, &g, derivs.as_ref())?;
            Some((g, coefficients))
        } else {
            None
        };
        Ok(PointResult {
            rhs,
            margin,
            spectrum,
            g_max,
            ddbar,
            dz,
            lin,
        })
    }

    fn points(&self, phi: &ScalarField, want_lin: bool) -> Result<Vec<PointResult>> {
        if phi.len() != self.grid.len() {
            return Err(Error::Argument(format!(
                "field has {} values, grid has {} points",
                phi.len(),
                self.grid.len()
            )));
        }
        let d = self.spectral.derivatives(phi.values());
        let results: Vec<Result<PointResult>> = (0..self.grid.len())
            .into_par_iter()
            .map(|i| self.point(i, phi.values()[i], &d, want_lin))
            .collect();
        let mut worst: Option<Error> = None;
        let mut worst_margin = f64::INFINITY;
        let mut out = Vec::with_capacity(results.len());
        for r in results {
            match r {
                Ok(p) => out.push(p),
                Err(Error::Admissibility { point, margin }) => {
                    let key = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
                    if worst.is_none() || key < worst_margin {
                        worst_margin = key;
                        worst = Some(Error::Admissibility { point, margin });
                    }
                }
                Err(e) => return Err(e),
            }
        }
        match worst {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    /// Pointwise evaluation; fails with the worst inadmissible point.
    pub fn evaluate(&self, phi: &ScalarField) -> Result<Evaluation> {
        let points = self.points(phi, false)?;
        let len = points.len();
        let size = self.data.table().size();
        let n = self.data.n();
        let mut phi_t = Vec::with_capacity(len);
        let mut margins = Vec::with_capacity(len);
        let mut spectra = Vec::with_capacity(len * size);
        let mut ddbar = Vec::with_capacity(len * n * n);
        let mut dz = Vec::with_capacity(len * n);
        let mut g_max = f64::NEG_INFINITY;
        let mut min_margin = f64::INFINITY;
        let mut sup_grad = 0.0_f64;
        for p in points {
            phi_t.push(p.rhs);
            margins.push(p.margin);
            min_margin = min_margin.min(p.margin);
            g_max = g_max.max(p.g_max);
            sup_grad = sup_grad.max(p.dz.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
            spectra.extend(p.spectrum);
            ddbar.extend(p.ddbar);
            dz.extend(p.dz);
        }
        Ok(Evaluation {
            phi_t: ScalarField { values: phi_t },
            margins,
            spectra,
            ddbar,
            dz,
            g_max,
            min_margin,
            sup_grad,
        })
    }

    pub fn state(&self, phi: ScalarField, t: f64) -> Result<FlowState> {
        let eval = self.evaluate(&phi)?;
        Ok(FlowState {
            phi,
            t,
            dt_last: 0.0,
            eval,
        })
    }

    /// Points where `Λ` leaves the cone, with their margins.
    pub fn inadmissible_points(&self, phi: &ScalarField) -> Vec<(usize, f64)> {
        let d = self.spectral.derivatives(phi.values());
        (0..self.grid.len())
            .into_par_iter()
            .filter_map(|i| match self.point(i, phi.values()[i], &d, false) {
                Err(Error::Admissibility { margin, .. }) => Some((i, margin)),
                _ => None,
            })
            .collect()
    }

    /// `f(Λ(Z[φ])) - ψ[φ]`.
    pub fn rhs(&self, phi: &ScalarField) -> Result<ScalarField> {
        Ok(self.evaluate(phi)?.phi_t)
    }

    /// `G` and the lower-order coefficients at every point.
    pub fn linearization(&self, phi: &ScalarField) -> Result<Vec<PointLinearization>> {
        Ok(self
            .points(phi, true)?
            .into_iter()
            .map(|p| {
                let (g, coefficients) = p.lin.expect("requested");
                PointLinearization { g, coefficients }
            })
            .collect())
    }

    fn try_step(&self, state: &FlowState, dt: f64) -> Result<FlowState> {
        let k1 = &state.eval.phi_t;
        let stage = state.phi.axpy(dt, k1);
        let k2 = self.evaluate(&stage)?.phi_t;
        let values: Vec<f64> = state
            .phi
            .values
            .iter()
            .zip(k1.values.iter().zip(&k2.values))
            .map(|(v, (a, b))| v + 0.5 * dt * (a + b))
            .collect();
        let phi = ScalarField::new(values).map_err(|_| Error::Admissibility {
            point: 0,
            margin: f64::NAN,
        })?;
        let eval = self.evaluate(&phi)?;
        Ok(FlowState {
            phi,
            t: state.t + dt,
            dt_last: dt,
            eval,
        })
    }

    /// One Heun step of size at most `dt`; inadmissible stages halve `dt`.
    pub fn step(&self, state: &FlowState, dt: f64) -> Result<FlowState> {
        if !(dt > 0.0) {
            return Err(Error::Argument(format!("time step must be positive, got {dt}")));
        }
        let mut dt = dt;
        let mut margins = Vec::new();
        for _ in 0..=self.settings.max_halvings {
            match self.try_step(state, dt) {
                Ok(next) => return Ok(next),
                Err(Error::Admissibility { margin, .. }) => {
                    margins.push(margin);
                    dt *= 0.5;
                }
                Err(e) => return Err(e),
            }
        }
        Err(Error::FlowBreakdown {
            t: state.t,
            reason: format!(
                "state stays inadmissible after {} halvings (dt = {dt:e})",
                self.settings.max_halvings
            ),
            margins,
        })
    }

    /// Stable step size from the largest eigenvalue of `G` and the highest
    /// resolved frequency.
    pub fn dt_control(&self, state: &FlowState) -> f64 {
        if let Some(dt) = self.settings.dt_fixed {
            return dt;
        }
        let half = self.grid.k() as f64 / 2.0;
        let symbol = 4.0 * PI * PI * self.grid.n() as f64 * half * half;
        let g = state.eval.g_max;
        let dt = if g > 0.0 {
            self.settings.cfl / (g * symbol)
        } else {
            self.settings.dt_max
        };
        dt.clamp(self.settings.dt_min, self.settings.dt_max)
    }

    fn record(state: &FlowState) -> Record {
        let phi_t = &state.eval.phi_t;
        let mean = phi_t.mean();
        Record {
            t: state.t,
            residual_sup: phi_t
                .values
                .iter()
                .fold(0.0, |m, v| m.max((v - mean).abs())),
            osc_phi_t: phi_t.oscillation(),
            mean_phi_t: mean,
            min_phi_t: phi_t.min(),
            max_phi_t: phi_t.max(),
            min_cone_margin: state.eval.min_margin,
            sup_grad: state.eval.sup_grad,
            dt: state.dt_last,
            harnack_q: None,
        }
    }

    /// Evolves from `phi0` until the sup-residual of `f(Λ) = ψ + b`, with `b`
    /// the running mean of `φ_t`, drops below the tolerance after `t_min`, or
    /// `t_max` is reached. Records are taken every `record_every` and the run
    /// only stops on a record time.
    pub fn run(&self, phi0: ScalarField, options: &RunOptions) -> Result<RunOutcome> {
        if !(options.record_every > 0.0) || !(options.t_max >= 0.0) {
            return Err(Error::Argument("record_every must be positive and t_max non-negative".into()));
        }
        let mut state = self.state(phi0, 0.0)?;
        let mut records = vec![Self::record(&state)];
        let mut snapshots = Vec::new();
        let keep = |s: &FlowState, out: &mut Vec<Snapshot>| {
            if options.keep_fields {
                out.push(Snapshot {
                    t: s.t,
                    phi_tilde: s.phi_tilde(),
                    phi_t: s.eval.phi_t.clone(),
                });
            }
        };
        keep(&state, &mut snapshots);
        let mut steps = 0;
        let mut rejected = 0;
        let mut r = 0usize;
        let eps = 1e-12 * options.record_every;
        let converged = loop {
            let last = records.last().expect("non-empty");
            if last.residual_sup <= options.tol_residual && state.t >= options.t_min - eps {
                break true;
            }
            if state.t >= options.t_max - eps {
                break false;
            }
            r += 1;
            let target = r as f64 * options.record_every;
            while target - state.t > eps {
                let want = self.dt_control(&state).min(target - state.t);
                let next = self.step(&state, want)?;
                if next.dt_last < want {
                    rejected += 1;
                }
                steps += 1;
                state = next;
            }
            state.t = target;
            records.push(Self::record(&state));
            keep(&state, &mut snapshots);
        };
        let phi_t = &state.eval.phi_t;
        let b = 0.5 * (phi_t.max() + phi_t.min());
        let residual = 0.5 * phi_t.oscillation();
        Ok(RunOutcome {
            phi_tilde: state.phi_tilde(),
            b,
            residual,
            converged,
            records,
            snapshots,
            final_state: state,
            steps,
            rejected,
        })
    }
}
