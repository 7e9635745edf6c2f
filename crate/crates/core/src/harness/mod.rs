//! Scenario configuration, presets, lemma suites, reports and the command
//! line entry points.

pub mod cli;
pub mod lemmas;
pub mod sampling;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::conefun::{structure_check, ConeFunction, Family, StructureReport};
use crate::multiindex::binomial;
use crate::torusflow::io::{write_diagnostics, FieldDump};
use crate::torusflow::monitors::{
    gradient_bound, max_principle_monitor, oscillation_analysis, GradientBound,
    MaxPrincipleReport, OscillationRatio,
};
use crate::torusflow::scenario::{ChiSpec, Mode, Phi0Spec, PsiSpec, ScenarioSpec, XSpec};
use crate::torusflow::{Flow, FlowData, RunOptions, RunOutcome, ScalarField, Scenario, StepSettings, TorusGrid};
use crate::{Error, Result};

pub use lemmas::fd_g_oracle;

/// Grid layout: every axis, or only the axes the data varies along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    #[default]
    Reduced,
    Full,
}

fn default_k() -> usize {
    16
}
fn default_chi() -> ChiSpec {
    ChiSpec::MultipleOfOmega { c: 1.0 }
}
fn default_x() -> XSpec {
    XSpec::Zero
}
fn default_psi() -> PsiSpec {
    PsiSpec {
        constant: 0.0,
        modes: Vec::new(),
        gradient: Vec::new(),
    }
}
fn default_phi0() -> Phi0Spec {
    Phi0Spec::Zero
}
fn default_cfl() -> f64 {
    0.8
}
fn default_t_max() -> f64 {
    10.0
}
fn default_tol() -> f64 {
    1e-5
}
fn default_record_every() -> f64 {
    0.05
}
fn default_dt_min() -> f64 {
    1e-9
}
fn default_dt_max() -> f64 {
    1e-2
}

/// A run configuration, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n: usize,
    pub p: usize,
    #[serde(rename = "K", default = "default_k")]
    pub grid_points: usize,
    pub family: Family,
    pub k: usize,
    #[serde(default = "default_cfl")]
    pub cfl_factor: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default)]
    pub t_min: f64,
    #[serde(default = "default_tol")]
    pub tol_residual: f64,
    #[serde(default = "default_record_every")]
    pub record_every: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_fixed: Option<f64>,
    #[serde(default)]
    pub grid: GridMode,
    #[serde(default = "default_chi")]
    pub chi: ChiSpec,
    #[serde(rename = "X", default = "default_x")]
    pub x: XSpec,
    #[serde(default = "default_psi")]
    pub psi: PsiSpec,
    #[serde(default = "default_phi0")]
    pub phi0: Phi0Spec,
}

impl ScenarioConfig {
    /// Defaults for everything but the equation type.
    pub fn minimal(n: usize, p: usize, family: Family, k: usize) -> Self {
        Self {
            n,
            p,
            grid_points: default_k(),
            family,
            k,
            cfl_factor: default_cfl(),
            t_max: default_t_max(),
            t_min: 0.0,
            tol_residual: default_tol(),
            record_every: default_record_every(),
            seed: 0,
            dt_min: default_dt_min(),
            dt_max: default_dt_max(),
            dt_fixed: None,
            grid: GridMode::Reduced,
            chi: default_chi(),
            x: default_x(),
            psi: default_psi(),
            phi0: default_phi0(),
        }
    }

    pub fn spec(&self) -> ScenarioSpec {
        ScenarioSpec {
            n: self.n,
            p: self.p,
            family: self.family,
            k: self.k,
            chi: self.chi.clone(),
            x: self.x.clone(),
            psi: self.psi.clone(),
            phi0: self.phi0.clone(),
        }
    }

    pub fn step_settings(&self) -> StepSettings {
        StepSettings {
            cfl: self.cfl_factor,
            dt_min: self.dt_min,
            dt_max: self.dt_max,
            dt_fixed: self.dt_fixed,
            max_halvings: 20,
        }
    }

    pub fn run_options(&self, keep_fields: bool) -> RunOptions {
        RunOptions {
            t_max: self.t_max,
            t_min: self.t_min,
            tol_residual: self.tol_residual,
            record_every: self.record_every,
            keep_fields,
        }
    }

    /// Range, rank and resolution checks.
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 || self.p < 2 || self.p + 1 > self.n {
            return Err(Error::config(
                "p",
                format!("need 2 <= p <= n-1, got n = {}, p = {}", self.n, self.p),
            ));
        }
        if self.n > 6 {
            return Err(Error::config("n", format!("n = {} exceeds the supported maximum 6", self.n)));
        }
        if self.grid_points < 8 || !self.grid_points.is_power_of_two() {
            return Err(Error::config(
                "K",
                format!("must be a power of two >= 8, got {}", self.grid_points),
            ));
        }
        let size = binomial(self.n, self.p);
        if self.k == 0 || self.k > size {
            return Err(Error::config("k", format!("must lie in 1..={size}")));
        }
        let f = ConeFunction::new(self.family, self.k, size)?;
        if !f.rank_condition(self.n, self.p) {
            return Err(Error::config(
                "k",
                format!(
                    "rank condition fails for {} with k = {}: tangent-cone rank {} < N(n-p)/n + 1 = {}",
                    self.family.name(),
                    self.k,
                    f.tangent_cone_rank(),
                    (size * (self.n - self.p)) as f64 / self.n as f64 + 1.0
                ),
            ));
        }
        let positive = [
            ("cfl_factor", self.cfl_factor),
            ("tol_residual", self.tol_residual),
            ("record_every", self.record_every),
            ("dt_min", self.dt_min),
            ("dt_max", self.dt_max),
        ];
        for (field, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(field, format!("must be positive and finite, got {v}")));
            }
        }
        if self.dt_min > self.dt_max {
            return Err(Error::config("dt_min", "must not exceed dt_max"));
        }
        if let Some(dt) = self.dt_fixed {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::config("dt_fixed", format!("must be positive, got {dt}")));
            }
        }
        if !(self.t_max >= 0.0) || !self.t_max.is_finite() {
            return Err(Error::config("t_max", "must be non-negative and finite"));
        }
        if !(self.t_min >= 0.0) || self.t_min > self.t_max {
            return Err(Error::config("t_min", "must lie in [0, t_max]"));
        }
        let spec = self.spec();
        let fmax = spec.max_frequency();
        if 2 * fmax as usize >= self.grid_points {
            return Err(Error::config(
                "K",
                format!("mode frequency {fmax} is not below the Nyquist limit K/2 = {}", self.grid_points / 2),
            ));
        }
        Scenario::new(&spec)?;
        Ok(())
    }
}

/// Parses and validates TOML text.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let field = e
            .message()
            .split('`')
            .nth(1)
            .unwrap_or("config")
            .to_string();
        Error::config(field, e.message().trim().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

/// TOML text that [`parse_config`] reads back to the same value.
pub fn emit(config: &ScenarioConfig) -> Result<String> {
    toml::to_string(config).map_err(|e| Error::config("config", e.to_string()))
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Ready-made scenarios.
pub mod presets {
    use super::*;

    /// `σ₂^{1/2}`, `χ = ω`, `ψ = f(Λ(ω∧ω))`: `φ ≡ 0` is a solution.
    pub fn stationary() -> ScenarioConfig {
        let mut c = ScenarioConfig::minimal(3, 2, Family::SigmaKRoot, 2);
        c.psi.constant = 2.0 * 3f64.sqrt();
        c
    }

    /// Linear heat flow `φ_t = 2Δφ - ε cos(2πx₁)` written with `χ = ω` so
    /// that `ψ` stays above `sup_{∂Γ} f`.
    pub fn sigma1_mode(eps: f64) -> ScenarioConfig {
        let mut c = ScenarioConfig::minimal(3, 2, Family::SigmaKRoot, 1);
        c.psi = PsiSpec {
            constant: 6.0,
            modes: vec![Mode::along(3, 0, 1, eps)],
            gradient: Vec::new(),
        };
        c.t_max = 4.0;
        c.t_min = 4.0;
        c.tol_residual = 1e-9;
        c.record_every = 0.01;
        c
    }

    /// `σ₂^{1/2}`, `χ = ω`, `ψ = 2√3 + ε cos(2πx₁)`.
    pub fn sigma2_mode(eps: f64) -> ScenarioConfig {
        let mut c = stationary();
        c.psi.modes = vec![Mode::along(3, 0, 1, eps)];
        c.t_max = 8.0;
        c.t_min = 5.0;
        c
    }
}

/// Flow and initial field for a validated configuration.
pub fn build_flow(config: &ScenarioConfig) -> Result<(Flow<Scenario>, ScalarField)> {
    config.validate()?;
    let scenario = Scenario::new(&config.spec())?;
    let grid = match config.grid {
        GridMode::Full => TorusGrid::full(config.n, config.grid_points)?,
        GridMode::Reduced => TorusGrid::reduced(config.n, config.grid_points, &scenario.active_axes())?,
    };
    let phi0 = scenario.initial_field(&grid);
    let flow = Flow::new(scenario, grid, config.step_settings())?;
    Ok((flow, phi0))
}

/// `(inf ψ, sup ψ)` bounds from the constant and mode amplitudes.
pub fn psi_range(psi: &PsiSpec) -> (f64, f64) {
    let spread: f64 = psi.modes.iter().map(|m| m.amplitude.abs()).sum();
    (psi.constant - spread, psi.constant + spread)
}

/// Output files of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    pub diagnostics_csv: PathBuf,
    pub report_json: PathBuf,
    pub field_dumps: Vec<PathBuf>,
}

/// Summary of a run, written as JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ScenarioConfig,
    pub structure: StructureReport,
    pub verdict: String,
    pub b: f64,
    pub final_residual: f64,
    pub t_end: f64,
    pub steps: usize,
    pub rejected_steps: usize,
    pub grid_extents: Vec<usize>,
    pub beta: Option<f64>,
    pub deltas: Vec<OscillationRatio>,
    pub max_principle: Option<MaxPrincipleReport>,
    pub gradient: GradientBound,
    pub artifacts: Option<Artifacts>,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn converged(&self) -> bool {
        self.verdict == "converged"
    }
}

/// Structure gate run before any flow.
pub fn structure_gate(config: &ScenarioConfig) -> Result<StructureReport> {
    let f = ConeFunction::new(config.family, config.k, binomial(config.n, config.p))?;
    let report = structure_check(&f, config.n, config.p, psi_range(&config.psi), 2000, config.seed)?;
    if !(report.monotone_ok && report.concave_ok && report.rank_ok) {
        return Err(Error::config(
            "family",
            format!("structure check failed: {:?}", report.counterexamples.first()),
        ));
    }
    Ok(report)
}

/// Summarizes an outcome; monitors that need more trace than is available
/// are skipped with a note.
pub fn summarize(
    config: &ScenarioConfig,
    structure: StructureReport,
    outcome: &RunOutcome,
    grid: &TorusGrid,
) -> Result<RunReport> {
    let mut notes = Vec::new();
    if !structure.boundary_gap_ok {
        notes.push(format!(
            "inf psi does not exceed sup of f on the cone boundary (margin {:?})",
            structure.boundary_gap
        ));
    }
    let (beta, deltas) = match oscillation_analysis(&outcome.records) {
        Ok(rep) => {
            if rep.degenerate {
                notes.push("oscillation of phi_t is at the noise floor from t = 0".into());
            }
            (rep.beta, rep.ratios)
        }
        Err(e) => {
            notes.push(format!("oscillation analysis skipped: {e}"));
            let fit = oscillation_fit_only(&outcome.records);
            (fit, Vec::new())
        }
    };
    // B_φ = 0 for built-in data, K₀ = 0
    let max_principle = Some(max_principle_monitor(&outcome.records)?);
    let converged = outcome.residual <= config.tol_residual && outcome.converged;
    Ok(RunReport {
        config: config.clone(),
        structure,
        verdict: if converged { "converged" } else { "not_converged" }.into(),
        b: outcome.b,
        final_residual: outcome.residual,
        t_end: outcome.final_state.t,
        steps: outcome.steps,
        rejected_steps: outcome.rejected,
        grid_extents: grid.extents().to_vec(),
        beta,
        deltas,
        max_principle,
        gradient: gradient_bound(&outcome.records)?,
        artifacts: None,
        notes,
    })
}

fn oscillation_fit_only(records: &[crate::torusflow::Record]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .take_while(|r| r.osc_phi_t > crate::torusflow::monitors::NOISE_FLOOR)
        .map(|r| (r.t, r.osc_phi_t.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| -sxy / sxx)
}

/// Runs a configuration and writes its artifacts into `out_dir`.
pub fn run_to_dir(config: &ScenarioConfig, out_dir: &Path) -> Result<RunReport> {
    let structure = structure_gate(config)?;
    let (flow, phi0) = build_flow(config)?;
    precheck_admissible(&flow, &phi0)?;
    let outcome = flow.run(phi0.clone(), &config.run_options(false))?;
    let mut report = summarize(config, structure, &outcome, flow.grid())?;
    std::fs::create_dir_all(out_dir)?;
    let csv = out_dir.join("diagnostics.csv");
    write_diagnostics(&csv, &outcome.records)?;
    let (n, p, k) = (config.n, config.p, config.grid_points);
    let mut dumps = Vec::new();
    for (name, t, field) in [
        ("phi_tilde_initial.bin", 0.0, crate::torusflow::normalize(&phi0)),
        ("phi_tilde_final.bin", outcome.final_state.t, outcome.phi_tilde.clone()),
        ("phi_t_final.bin", outcome.final_state.t, outcome.final_state.phi_t().clone()),
    ] {
        let path = out_dir.join(name);
        FieldDump::new(n, p, k, t, &field).write(&path)?;
        dumps.push(path);
    }
    let json = out_dir.join("report.json");
    report.artifacts = Some(Artifacts {
        diagnostics_csv: csv,
        report_json: json.clone(),
        field_dumps: dumps,
    });
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Diagnostic(format!("report serialization: {e}")))?;
    std::fs::write(&json, text)?;
    Ok(report)
}

/// Fails with the list of inadmissible points of `phi0`, if any.
pub fn precheck_admissible<D: FlowData>(flow: &Flow<D>, phi0: &ScalarField) -> Result<()> {
    match flow.evaluate(phi0) {
        Ok(_) => Ok(()),
        Err(Error::Admissibility { .. }) => {
            let bad = flow.inadmissible_points(phi0);
            let listed: Vec<String> = bad
                .iter()
                .take(10)
                .map(|(i, m)| format!("{i} (margin {m:e})"))
                .collect();
            Err(Error::config(
                "phi0",
                format!(
                    "{} inadmissible grid points: {}{}",
                    bad.len(),
                    listed.join(", "),
                    if bad.len() > 10 { ", ..." } else { "" }
                ),
            ))
        }
        Err(e) => Err(e),
    }
}

/// Human-readable rendering of a report.
pub fn render_report(report: &RunReport) -> String {
    let mut s = String::new();
    let c = &report.config;
    s.push_str(&format!(
        "scenario: n = {}, p = {}, f = {} (k = {}), K = {}, grid {:?}\n",
        c.n,
        c.p,
        c.family.name(),
        c.k,
        c.grid_points,
        report.grid_extents
    ));
    s.push_str(&format!(
        "structure: monotone {}, concave {}, rank {} (threshold {:.3}) {}, C0 = {:e}\n",
        report.structure.monotone_ok,
        report.structure.concave_ok,
        report.structure.rank,
        report.structure.rank_threshold,
        if report.structure.rank_ok { "ok" } else { "FAILS" },
        report.structure.c0
    ));
    s.push_str(&format!(
        "verdict: {} at t = {} after {} steps ({} rejected)\n",
        report.verdict, report.t_end, report.steps, report.rejected_steps
    ));
    s.push_str(&format!(
        "b = {:.12e}, sup residual = {:.3e} (tol {:.1e})\n",
        report.b, report.final_residual, c.tol_residual
    ));
    match report.beta {
        Some(b) => s.push_str(&format!("oscillation decay rate beta = {b:.6}\n")),
        None => s.push_str("oscillation decay rate: not fitted\n"),
    }
    if !report.deltas.is_empty() {
        s.push_str("  k   omega(k)        omega(k+1)      delta\n");
        for d in &report.deltas {
            s.push_str(&format!(
                "  {:<3} {:<15.6e} {:<15.6e} {:.6}\n",
                d.k, d.omega_k, d.omega_next, d.delta
            ));
        }
    }
    if let Some(mp) = &report.max_principle {
        s.push_str(&format!(
            "maximum principle: H0 = {:.6e}, H1 = {:.6e}, worst excess {:.3e}, {}\n",
            mp.h0,
            mp.h1,
            mp.worst_excess,
            if mp.holds() { "holds" } else { "VIOLATED" }
        ));
    }
    s.push_str(&format!(
        "gradient: early sup {:.6e}, overall sup {:.6e}, {}\n",
        report.gradient.early,
        report.gradient.overall,
        if report.gradient.holds() { "bounded" } else { "GROWS" }
    ));
    for note in &report.notes {
        s.push_str(&format!("note: {note}\n"));
    }
    if let Some(a) = &report.artifacts {
        s.push_str(&format!("diagnostics: {}\n", a.diagnostics_csv.display()));
        for d in &a.field_dumps {
            s.push_str(&format!("field dump: {}\n", d.display()));
        }
    }
    s
}

/// Plot-ready CSV of the contraction table.
pub fn deltas_csv(report: &RunReport) -> String {
    let mut s = String::from("k,omega_k,omega_next,delta\n");
    for d in &report.deltas {
        s.push_str(&format!("{},{},{},{}\n", d.k, d.omega_k, d.omega_next, d.delta));
    }
    s
}
