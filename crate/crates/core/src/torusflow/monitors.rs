//! Runtime checks on a computed trace: maximum principle for `φ_t`, decay of
//! its oscillation, the Cauchy property of `φ̃`, the linearized evolution
//! identity and the Harnack quantity.

use serde::{Deserialize, Serialize};

use super::{Flow, FlowData, FlowState, Record, ScalarField, Snapshot, Spectral};
use crate::{CMatrix, Error, Result, C64};

/// Values of `ω` at or below this are treated as rounding noise.
pub const NOISE_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleViolation {
    pub t: f64,
    pub min: f64,
    pub max: f64,
}

/// `H₀ ≤ φ_t ≤ H₁` with `H₀, H₁` the extrema of `φ_t` at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPrincipleReport {
    pub h0: f64,
    pub h1: f64,
    pub tolerance: f64,
    pub worst_excess: f64,
    pub violations: Vec<MaxPrincipleViolation>,
}

impl MaxPrincipleReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Maximum principle for `φ`-independent data (`K₀ = 0`).
pub fn max_principle_monitor(records: &[Record]) -> Result<MaxPrincipleReport> {
    let first = records
        .first()
        .ok_or_else(|| Error::Argument("empty trace".into()))?;
    let (h0, h1) = (first.min_phi_t, first.max_phi_t);
    let tolerance = 1e-8 * (h1 - h0);
    let mut worst_excess = 0.0_f64;
    let mut violations = Vec::new();
    for r in records {
        let excess = (h0 - r.min_phi_t).max(r.max_phi_t - h1);
        worst_excess = worst_excess.max(excess);
        if excess > tolerance {
            violations.push(MaxPrincipleViolation {
                t: r.t,
                min: r.min_phi_t,
                max: r.max_phi_t,
            });
        }
    }
    Ok(MaxPrincipleReport {
        h0,
        h1,
        tolerance,
        worst_excess,
        violations,
    })
}

/// `δ_k = ω(k+1)/ω(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationRatio {
    pub k: usize,
    pub omega_k: f64,
    pub omega_next: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    /// Ratios at integer times where both values clear [`NOISE_FLOOR`].
    pub ratios: Vec<OscillationRatio>,
    /// Integer times covered by the trace.
    pub integer_times: usize,
    /// Rate of the least-squares fit `log ω ≈ log C - βt`.
    pub beta: Option<f64>,
    pub log_c: Option<f64>,
    pub fit_points: usize,
    /// First recorded time at which `ω` reached the noise floor.
    pub truncated_at: Option<f64>,
    /// `ω(0)` is already at the noise floor.
    pub degenerate: bool,
}

impl OscillationReport {
    /// Every reported ratio with `k ≥ from` is below one.
    pub fn contracts_from(&self, from: usize) -> bool {
        self.ratios.iter().filter(|r| r.k >= from).all(|r| r.delta < 1.0)
    }
}

fn at_time(records: &[Record], t: f64) -> Option<&Record> {
    records.iter().find(|r| (r.t - t).abs() < 1e-9)
}

/// Integer-time contraction ratios and an exponential fit of `ω(t)`.
pub fn oscillation_analysis(records: &[Record]) -> Result<OscillationReport> {
    let mut omegas = Vec::new();
    while let Some(r) = at_time(records, omegas.len() as f64) {
        omegas.push(r.osc_phi_t);
    }
    if omegas.len() < 5 {
        return Err(Error::Argument(format!(
            "trace covers integer times 0..{} but at least 0..4 are needed",
            omegas.len().saturating_sub(1)
        )));
    }
    let degenerate = omegas[0] <= NOISE_FLOOR;
    let ratios = omegas
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] > NOISE_FLOOR && w[1] > NOISE_FLOOR)
        .map(|(k, w)| OscillationRatio {
            k,
            omega_k: w[0],
            omega_next: w[1],
            delta: w[1] / w[0],
        })
        .collect();
    let cut = records.iter().position(|r| r.osc_phi_t <= NOISE_FLOOR);
    let fit: Vec<(f64, f64)> = records[..cut.unwrap_or(records.len())]
        .iter()
        .map(|r| (r.t, r.osc_phi_t.ln()))
        .collect();
    let (beta, log_c) = if fit.len() >= 2 {
        let (slope, intercept) = linear_fit(&fit);
        (Some(-slope), Some(intercept))
    } else {
        (None, None)
    };
    Ok(OscillationReport {
        ratios,
        integer_times: omegas.len(),
        beta,
        log_c,
        fit_points: fit.len(),
        truncated_at: cut.map(|i| records[i].t),
        degenerate,
    })
}

/// Least-squares line `y = slope·x + intercept`.
fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// `sup|φ̃(t₂) - φ̃(t₁)| ≤ (C/β) e^{-βt₁}` for all recorded `t₁ < t₂`, with
/// `C = max_t ω(t) e^{βt}` taken over the first half of the records whose
/// oscillation is above [`NOISE_FLOOR`]; `t₁` ranges over all of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub beta: f64,
    pub c: f64,
    /// Largest `sup|φ̃(t₂) - φ̃(t₁)| / ((C/β) e^{-βt₁})`.
    pub worst_ratio: f64,
    pub pairs: usize,
}

impl CauchyReport {
    pub fn holds(&self) -> bool {
        self.worst_ratio <= 1.0
    }
}

pub fn cauchy_check(records: &[Record], snapshots: &[Snapshot], beta: f64) -> Result<CauchyReport> {
    if !(beta > 0.0) {
        return Err(Error::Argument(format!("decay rate must be positive, got {beta}")));
    }
    if snapshots.len() < 2 {
        return Err(Error::Argument("need at least two snapshots".into()));
    }
    let resolved = |r: &&Record| r.osc_phi_t > NOISE_FLOOR;
    let horizon = records
        .iter()
        .filter(resolved)
        .map(|r| r.t)
        .fold(f64::NEG_INFINITY, f64::max);
    let start = records.first().map_or(0.0, |r| r.t);
    let c = records
        .iter()
        .filter(resolved)
        .filter(|r| r.t <= start + 0.5 * (horizon - start))
        .map(|r| r.osc_phi_t * (beta * r.t).exp())
        .fold(0.0, f64::max);
    let mut worst_ratio = 0.0_f64;
    let mut pairs = 0;
    for (i, a) in snapshots.iter().enumerate() {
        if a.t > horizon {
            break;
        }
        let bound = c / beta * (-beta * a.t).exp();
        for b in &snapshots[i + 1..] {
            let d = a.phi_tilde.sup_distance(&b.phi_tilde);
            let ratio = if bound > 0.0 {
                d / bound
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            worst_ratio = worst_ratio.max(ratio);
            pairs += 1;
        }
    }
    Ok(CauchyReport {
        beta,
        c,
        worst_ratio,
        pairs,
    })
}

/// Proxy for the uniform gradient bound: `sup|∂φ|` over the whole trace
/// against ten times its value over the first tenth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientBound {
    pub early: f64,
    pub overall: f64,
}

impl GradientBound {
    pub fn holds(&self) -> bool {
        self.overall <= 10.0 * self.early
    }
}

pub fn gradient_bound(records: &[Record]) -> Result<GradientBound> {
    let last = records
        .last()
        .ok_or_else(|| Error::Argument("empty trace".into()))?;
    let cutoff = records[0].t + 0.1 * (last.t - records[0].t);
    let early = records
        .iter()
        .filter(|r| r.t <= cutoff)
        .map(|r| r.sup_grad)
        .fold(0.0, f64::max);
    let overall = records.iter().map(|r| r.sup_grad).fold(0.0, f64::max);
    Ok(GradientBound { early, overall })
}

/// `sup|𝓛u - B_φ u|` for `u = φ_t`, with `∂_t u` from the outer states and
/// coefficients frozen at the middle one.
pub fn verify_linearized_evolution<D: FlowData>(
    flow: &Flow<D>,
    states: &[FlowState],
) -> Result<f64> {
    let [s0, s1, s2] = states else {
        return Err(Error::Argument(format!(
            "need three consecutive states, got {}",
            states.len()
        )));
    };
    let (h0, h1) = (s1.t - s0.t, s2.t - s1.t);
    if !(h0 > 0.0) || (h1 - h0).abs() > 1e-9 * h0 {
        return Err(Error::Argument("states must be equally spaced in time".into()));
    }
    let n = flow.data().n();
    let u1 = s1.phi_t();
    let lin = flow.linearization(&s1.phi)?;
    let d = flow.spectral().derivatives(u1.values());
    let mut residual = 0.0_f64;
    for (i, point) in lin.iter().enumerate() {
        let ut = (s2.phi_t().values()[i] - s0.phi_t().values()[i]) / (h0 + h1);
        let hess = CMatrix::from_row_slice(n, n, &d.ddbar(i));
        let g = point.g.matrix();
        let mut trace = C64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                trace += g[(a, b)] * hess[(b, a)];
            }
        }
        let du = d.dz(i);
        let drift: f64 = point
            .coefficients
            .b_alpha_c()
            .iter()
            .zip(&du)
            .map(|(b, z)| 2.0 * (b * z).re)
            .sum();
        let lu = ut - trace.re - drift - point.coefficients.b_phi * u1.values()[i];
        residual = residual.max(lu.abs());
    }
    Ok(residual)
}

/// `(mean φ¹ - mean φ⁰)/dt` against the trapezoid average of `mean φ_t`.
pub fn mean_identity_defect(s0: &FlowState, s1: &FlowState) -> f64 {
    let dt = s1.t - s0.t;
    let lhs = (s1.phi.mean() - s0.phi.mean()) / dt;
    lhs - 0.5 * (s0.phi_t().mean() + s1.phi_t().mean())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackReport {
    pub alpha: f64,
    pub times: Vec<f64>,
    /// `sup_x (|∂ log u|² - α ∂_t log u)` per time.
    pub q: Vec<f64>,
    /// `Q(t) ≤ C₁ + C₂/t` on `t > 0`.
    pub c1: f64,
    pub c2: f64,
}

impl HarnackReport {
    /// `sup_t Q(t)·t/(1+t)` over `t > 0`.
    pub fn scaled_sup(&self) -> f64 {
        self.times
            .iter()
            .zip(&self.q)
            .filter(|(t, _)| **t > 0.0)
            .map(|(t, q)| q * t / (1.0 + t))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Harnack quantity of a positive solution sampled at increasing times.
pub fn harnack_quantity(
    spectral: &Spectral,
    series: &[(f64, ScalarField)],
    alpha: f64,
) -> Result<HarnackReport> {
    if !(alpha > 1.0) {
        return Err(Error::Argument(format!("alpha must exceed 1, got {alpha}")));
    }
    if series.len() < 3 {
        return Err(Error::Argument("need at least three times".into()));
    }
    for (t, u) in series {
        if let Some(i) = u.values().iter().position(|v| !(*v > 0.0)) {
            return Err(Error::Domain(format!("u is not positive at point {i}, t = {t}")));
        }
    }
    let logs: Vec<Vec<f64>> = series
        .iter()
        .map(|(_, u)| u.values().iter().map(|v| v.ln()).collect())
        .collect();
    let m = series.len();
    let mut q = Vec::with_capacity(m);
    for s in 0..m {
        let (a, b) = match s {
            0 => (0, 1),
            _ if s == m - 1 => (m - 2, m - 1),
            _ => (s - 1, s + 1),
        };
        let dt = series[b].0 - series[a].0;
        let u = &series[s].1;
        let d = spectral.derivatives(u.values());
        let mut sup = f64::NEG_INFINITY;
        for i in 0..u.len() {
            let grad2: f64 = d.dz(i).iter().map(|z| z.norm_sqr()).sum::<f64>() / u.values()[i].powi(2);
            let dlog = (logs[b][i] - logs[a][i]) / dt;
            sup = sup.max(grad2 - alpha * dlog);
        }
        q.push(sup);
    }
    let times: Vec<f64> = series.iter().map(|(t, _)| *t).collect();
    let (c1, c2) = fit_harnack(&times, &q);
    Ok(HarnackReport {
        alpha,
        times,
        q,
        c1,
        c2,
    })
}

/// Least squares in `(1, 1/t)` over `t > 0`, then `C₁` raised so the bound
/// holds at every sample.
fn fit_harnack(times: &[f64], q: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(q)
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, q)| (1.0 / t, *q))
        .collect();
    if pts.is_empty() {
        return (0.0, 0.0);
    }
    let (c2, c1) = linear_fit(&pts);
    let c2 = c2.max(0.0);
    let shift = pts
        .iter()
        .map(|(s, q)| q - (c1 + c2 * s))
        .fold(f64::NEG_INFINITY, f64::max);
    (c1 + shift.max(0.0), c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torusflow::TorusGrid;
    use std::f64::consts::PI;

    fn record(t: f64, osc: f64) -> Record {
        Record {
            t,
            residual_sup: osc / 2.0,
            osc_phi_t: osc,
            mean_phi_t: 0.0,
            min_phi_t: -osc / 2.0,
            max_phi_t: osc / 2.0,
            min_cone_margin: 1.0,
            sup_grad: 1.0,
            dt: 1e-3,
            harnack_q: None,
        }
    }

    #[test]
    fn exponential_trace_fit() {
        let beta = 2.0 * PI * PI;
        let records: Vec<Record> = (0..=100)
            .map(|i| record(i as f64 * 0.05, 0.3 * (-beta * i as f64 * 0.05).exp()))
            .collect();
        let rep = oscillation_analysis(&records).unwrap();
        assert!((rep.beta.unwrap() - beta).abs() < 1e-9 * beta);
        assert!(rep.truncated_at.is_some());
        assert!(rep.contracts_from(0));
        assert!(!rep.degenerate);
        assert!(max_principle_monitor(&records).unwrap().holds());
    }

    #[test]
    fn stationary_trace_is_degenerate() {
        let records: Vec<Record> = (0..=5).map(|i| record(i as f64, 0.0)).collect();
        let rep = oscillation_analysis(&records).unwrap();
        assert!(rep.degenerate);
        assert!(rep.ratios.is_empty());
        assert!(rep.beta.is_none());
        let mp = max_principle_monitor(&records).unwrap();
        assert_eq!((mp.h0, mp.h1), (0.0, 0.0));
        assert!(mp.holds());
    }

    #[test]
    fn cauchy_bound_for_exact_decay() {
        // φ̃(t) = a e^{-βt} cos, so sup|φ̃(t₂) - φ̃(t₁)| = a(e^{-βt₁} - e^{-βt₂})
        let (beta, a) = (3.0, 0.2);
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let records: Vec<Record> = times
            .iter()
            .map(|&t| record(t, 2.0 * a * beta * (-beta * t).exp()))
            .collect();
        let snapshots: Vec<Snapshot> = times
            .iter()
            .map(|&t| {
                let s = a * (-beta * t).exp();
                Snapshot {
                    t,
                    phi_tilde: ScalarField::new(vec![s, -s]).unwrap(),
                    phi_t: ScalarField::new(vec![-beta * s, beta * s]).unwrap(),
                }
            })
            .collect();
        let rep = cauchy_check(&records, &snapshots, beta).unwrap();
        assert_eq!(rep.pairs, 41 * 40 / 2);
        assert!(rep.holds(), "{rep:?}");
        assert!(rep.worst_ratio > 0.4);
        let fast = cauchy_check(&records, &snapshots, 10.0 * beta).unwrap();
        assert!(!fast.holds());
        assert!(cauchy_check(&records, &snapshots, 0.0).is_err());
    }

    #[test]
    fn short_trace_is_rejected() {
        let records: Vec<Record> = (0..=3).map(|i| record(i as f64, 1.0)).collect();
        assert!(oscillation_analysis(&records).is_err());
    }

    #[test]
    fn max_principle_flags_excursion() {
        let mut records: Vec<Record> = (0..5).map(|i| record(i as f64, 1.0)).collect();
        records[3].max_phi_t = 0.6;
        let rep = max_principle_monitor(&records).unwrap();
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].t, 3.0);
    }

    fn series(f: impl Fn(&[f64], f64) -> f64 + Sync, grid: &TorusGrid) -> Vec<(f64, ScalarField)> {
        (0..=40)
            .map(|s| {
                let t = s as f64 * 0.005;
                (t, ScalarField::new(grid.sample(|x| f(x, t))).unwrap())
            })
            .collect()
    }

    #[test]
    fn harnack_constant_is_zero() {
        let grid = TorusGrid::reduced(1, 16, &[true, false]).unwrap();
        let sp = Spectral::new(&grid);
        let rep = harnack_quantity(&sp, &series(|_, _| 2.0, &grid), 2.0).unwrap();
        assert!(rep.q.iter().all(|q| q.abs() < 1e-12));
    }

    #[test]
    fn harnack_single_mode_is_bounded() {
        let grid = TorusGrid::reduced(1, 16, &[true, false]).unwrap();
        let sp = Spectral::new(&grid);
        let lambda = PI * PI;
        let u = |x: &[f64], t: f64| 1.0 + 0.5 * (-lambda * t).exp() * (2.0 * PI * x[0]).cos();
        let rep = harnack_quantity(&sp, &series(u, &grid), 2.0).unwrap();
        assert!(rep.q.iter().all(|q| q.is_finite() && *q < 20.0));
        for (t, q) in rep.times.iter().zip(&rep.q) {
            if *t > 0.0 {
                assert!(*q <= rep.c1 + rep.c2 / t + 1e-12);
            }
        }
        assert!(rep.scaled_sup() < 20.0);
        let neg = vec![(0.0, ScalarField::constant(16, -1.0)); 3];
        assert!(matches!(harnack_quantity(&sp, &neg, 2.0), Err(Error::Domain(_))));
        assert!(harnack_quantity(&sp, &series(u, &grid), 1.0).is_err());
    }
}
