//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use ppflow::conefun::{ConeFunction, Family};
use ppflow::harness::lemmas::{
    admissible_functions, chain_rule_suite, parabolicity_suite, structure_suite,
    sum_structure_suite, unitary_block_suite, LemmaOutcome,
};
use ppflow::harness::{build_flow, presets, ScenarioConfig};
use ppflow::multiindex::MultiIndexTable;
use ppflow::torusflow::monitors::{
    cauchy_check, max_principle_monitor, oscillation_analysis, verify_linearized_evolution,
};
use ppflow::torusflow::{RunOutcome, TorusGrid};
use ppflow::Error;

fn verdict(id: u32, title: &str, pass: bool, detail: &str) {
    println!(
        "criterion {id:>2} [{}] {title}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {id} failed: {title}: {detail}");
}

fn summarize(outcomes: &[&LemmaOutcome]) -> (bool, String) {
    let pass = outcomes.iter().all(|o| o.passed);
    let worst = outcomes
        .iter()
        .filter(|o| !o.passed)
        .chain(outcomes.iter())
        .map(|o| o.line())
        .next()
        .unwrap_or_default();
    let samples: usize = outcomes.iter().map(|o| o.samples).sum();
    (pass, format!("{} suites, {samples} samples; {worst}", outcomes.len()))
}

const DESK: [(usize, usize); 3] = [(3, 2), (4, 2), (4, 3)];

struct PointwiseRun {
    parabolicity: Vec<LemmaOutcome>,
    floor: Vec<LemmaOutcome>,
    dual: Vec<LemmaOutcome>,
    elapsed: Duration,
}

/// Criteria 1-3 share their samples: 10⁴ per (n, p, family).
fn pointwise() -> &'static PointwiseRun {
    static RUN: OnceLock<PointwiseRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let mut run = PointwiseRun {
            parabolicity: Vec::new(),
            floor: Vec::new(),
            dual: Vec::new(),
            elapsed: Duration::ZERO,
        };
        for (n, p) in DESK {
            let table = MultiIndexTable::enumerate(n, p).unwrap();
            let fs = admissible_functions(n, p).unwrap();
            for family in [Family::SigmaKRoot, Family::LogRhoK] {
                let members: Vec<&ConeFunction> =
                    fs.iter().filter(|f| f.family() == family).collect();
                let share = 10_000usize.div_ceil(members.len());
                for (i, f) in members.into_iter().enumerate() {
                    let seed = 100 * n as u64 + 10 * p as u64 + i as u64;
                    let mut out = parabolicity_suite(f, &table, share, seed).unwrap();
                    run.dual.push(out.pop().unwrap());
                    run.floor.push(out.pop().unwrap());
                    run.parabolicity.push(out.pop().unwrap());
                }
            }
        }
        run.elapsed = start.elapsed();
        run
    })
}

#[test]
fn criterion_01_parabolicity() {
    let run = pointwise();
    let (pass, detail) = summarize(&run.parabolicity.iter().collect::<Vec<_>>());
    let fast = run.elapsed < Duration::from_secs(30);
    verdict(
        1,
        "lambda_min(G) >= -1e-10 |G| on 10^4 admissible samples per (n, p, family)",
        pass && fast,
        &format!("{detail}; {:.1} s (limit 30 s)", run.elapsed.as_secs_f64()),
    );
}

#[test]
fn criterion_02_refined_floor() {
    let run = pointwise();
    let (pass, detail) = summarize(&run.floor.iter().collect::<Vec<_>>());
    verdict(2, "lambda_min(G) >= f_(alpha) - 1e-10 |F|", pass, &detail);
}

#[test]
fn criterion_03_dual_formula() {
    let run = pointwise();
    let (pass, detail) = summarize(&run.dual.iter().collect::<Vec<_>>());
    verdict(3, "contraction and direct G agree to 1e-12 relative", pass, &detail);
}

#[test]
fn criterion_04_chain_rule() {
    let mut outcomes = Vec::new();
    for (n, p) in DESK {
        let table = MultiIndexTable::enumerate(n, p).unwrap();
        for (i, f) in admissible_functions(n, p).unwrap().iter().enumerate() {
            let seed = 4000 + 100 * n as u64 + 10 * p as u64 + i as u64;
            outcomes.push(chain_rule_suite(f, &table, 1000, seed).unwrap());
        }
    }
    for family in [Family::SigmaKRoot, Family::LogRhoK] {
        assert!(outcomes.iter().any(|o| o.name.contains(family.name())));
    }
    let (pass, detail) = summarize(&outcomes.iter().collect::<Vec<_>>());
    verdict(4, "analytic G matches finite differences within 1e-5 relative", pass, &detail);
}

#[test]
fn criterion_05_unitary_blocks() {
    let outcomes: Vec<LemmaOutcome> = [3, 6]
        .iter()
        .map(|&size| unitary_block_suite(size, 1000, 5000 + size as u64).unwrap())
        .collect();
    let (pass, detail) = summarize(&outcomes.iter().collect::<Vec<_>>());
    verdict(5, "|rows|+|cols| = N+1 blocks of Haar unitaries have mass >= 1 - 1e-9", pass, &detail);
}

#[test]
fn criterion_06_sum_structure() {
    let outcomes: Vec<LemmaOutcome> = DESK
        .iter()
        .map(|&(n, p)| {
            let table = MultiIndexTable::enumerate(n, p).unwrap();
            sum_structure_suite(&table, 1000, 6000 + n as u64 + p as u64).unwrap()
        })
        .collect();
    let (pass, detail) = summarize(&outcomes.iter().collect::<Vec<_>>());
    verdict(6, "spectrum of g^omega^(p-1) equals p-tuple sums within 1e-9", pass, &detail);
}

/// `2Δ_ℂ u = ψ - mean ψ` by a direct discrete Fourier sum over the grid,
/// with `Δ_ℂ` having symbol `-π²|m|²`.
fn poisson_oracle(grid: &TorusGrid, psi: &[f64]) -> Vec<f64> {
    let len = grid.len();
    let axes: Vec<usize> = (0..2 * grid.n()).filter(|&a| grid.is_active(a)).collect();
    let k = grid.k() as i64;
    let wave = |point: usize| -> Vec<f64> {
        axes.iter()
            .map(|&a| {
                let m = grid.axis_index(point, a) as i64;
                (if m > k / 2 { m - k } else { m }) as f64
            })
            .collect()
    };
    let coords: Vec<Vec<f64>> = (0..len)
        .map(|i| axes.iter().map(|&a| grid.coordinates(i)[a]).collect())
        .collect();
    let phase = |m: &[f64], x: &[f64]| 2.0 * PI * m.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    let mut u = vec![0.0; len];
    for mode in 0..len {
        let m = wave(mode);
        let norm2: f64 = m.iter().map(|v| v * v).sum();
        if norm2 == 0.0 {
            continue;
        }
        let (mut re, mut im) = (0.0, 0.0);
        for (x, v) in coords.iter().zip(psi) {
            re += v * phase(&m, x).cos();
            im -= v * phase(&m, x).sin();
        }
        let scale = 1.0 / (len as f64 * -2.0 * PI * PI * norm2);
        for (x, out) in coords.iter().zip(u.iter_mut()) {
            *out += scale * (re * phase(&m, x).cos() - im * phase(&m, x).sin());
        }
    }
    u
}

#[test]
fn criterion_07_linear_rate_and_poisson_limit() {
    let start = Instant::now();
    let eps = 0.1;
    let cfg = presets::sigma1_mode(eps);
    let (flow, phi0) = build_flow(&cfg).unwrap();
    let outcome = flow.run(phi0, &cfg.run_options(false)).unwrap();
    let rate = 2.0 * PI * PI;
    let beta = oscillation_analysis(&outcome.records).unwrap().beta.unwrap();
    let rate_err = (beta - rate).abs() / rate;

    let grid = flow.grid();
    let psi: Vec<f64> = (0..grid.len())
        .map(|i| 6.0 + eps * (2.0 * PI * grid.coordinates(i)[0]).cos())
        .collect();
    let oracle = poisson_oracle(grid, &psi);
    let limit_err = outcome
        .phi_tilde
        .values()
        .iter()
        .zip(&oracle)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let elapsed = start.elapsed();
    verdict(
        7,
        "sigma_1 single-mode decay rate and elliptic limit",
        outcome.converged
            && rate_err < 0.01
            && limit_err < 1e-8
            && elapsed < Duration::from_secs(60),
        &format!(
            "beta = {beta:.6} vs 2 pi^2 = {rate:.6} (rel {rate_err:.1e}, limit 1e-2); \
             sup|phi_inf - Poisson| = {limit_err:.2e} (limit 1e-8); b = {:.1e}; {:.1} s (limit 60 s)",
            outcome.b,
            elapsed.as_secs_f64()
        ),
    );
}

struct NonlinearRun {
    config: ScenarioConfig,
    outcome: RunOutcome,
    elapsed: Duration,
}

/// `σ₂^{1/2}`, `χ = ω`, `ψ = 2√3 + 0.1 cos(2πx₁)`, `K = 16`.
fn nonlinear() -> &'static NonlinearRun {
    static RUN: OnceLock<NonlinearRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let config = presets::sigma2_mode(0.1);
        assert_eq!(config.grid_points, 16);
        let (flow, phi0) = build_flow(&config).unwrap();
        let outcome = flow.run(phi0, &config.run_options(true)).unwrap();
        NonlinearRun {
            config,
            outcome,
            elapsed: start.elapsed(),
        }
    })
}

#[test]
fn criterion_08_nonlinear_convergence() {
    let run = nonlinear();
    let out = &run.outcome;
    let osc = oscillation_analysis(&out.records).unwrap();
    let beta = osc.beta.unwrap_or(f64::NAN);
    let late: Vec<f64> = osc.ratios.iter().filter(|r| r.k >= 1).map(|r| r.delta).collect();
    let cauchy = cauchy_check(&out.records, &out.snapshots, beta);
    let cauchy_ok = cauchy.as_ref().is_ok_and(|c| c.holds());
    let pass = out.converged
        && out.residual <= run.config.tol_residual
        && run.config.tol_residual <= 1e-5
        && !late.is_empty()
        && late.iter().all(|&d| d < 1.0)
        && beta > 0.0
        && cauchy_ok
        && run.elapsed < Duration::from_secs(600);
    verdict(
        8,
        "sigma_2^(1/2) flow converges with contracting oscillation",
        pass,
        &format!(
            "residual {:.2e} (limit 1e-5) at t = {}, b = {:.6e}; delta_k (k >= 1) = {late:?}; \
             beta = {beta:.4}; Cauchy ratio {}; {:.1} s (limit 600 s)",
            out.residual,
            out.final_state.t,
            out.b,
            cauchy.map_or_else(|e| e.to_string(), |c| format!("{:.3}", c.worst_ratio)),
            run.elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_09_maximum_principle() {
    let run = nonlinear();
    let rep = max_principle_monitor(&run.outcome.records).unwrap();
    verdict(
        9,
        "phi_t stays in [H0, H1] within 1e-8 (H1 - H0)",
        rep.holds() && rep.tolerance == 1e-8 * (rep.h1 - rep.h0),
        &format!(
            "H0 = {:.6e}, H1 = {:.6e}, worst excess {:.2e}, {} violations over {} records",
            rep.h0,
            rep.h1,
            rep.worst_excess,
            rep.violations.len(),
            run.outcome.records.len()
        ),
    );
}

#[test]
fn criterion_10_linearized_evolution() {
    let residual = |cfg: &ScenarioConfig, dt: f64| -> f64 {
        let (flow, phi0) = build_flow(cfg).unwrap();
        let s0 = flow.state(phi0, 0.0).unwrap();
        let s1 = flow.step(&s0, dt).unwrap();
        let s2 = flow.step(&s1, dt).unwrap();
        assert_eq!((s1.dt_last, s2.dt_last), (dt, dt));
        verify_linearized_evolution(&flow, &[s0, s1, s2]).unwrap()
    };
    let nonlinear = presets::sigma2_mode(0.1);
    let coarse = residual(&nonlinear, 2e-4);
    let mid = residual(&nonlinear, 1e-4);
    let fine = residual(&nonlinear, 5e-5);
    let ratios = [coarse / mid, mid / fine];
    let linear = residual(&presets::sigma1_mode(0.1), 1e-4);
    let pass = ratios.iter().all(|r| (3.5..=4.5).contains(r)) && linear < 1e-5;
    verdict(
        10,
        "linearized evolution residual is second order; sigma_1 residual < 1e-5 at dt = 1e-4",
        pass,
        &format!(
            "sigma_2 residuals {coarse:.3e}, {mid:.3e}, {fine:.3e} (ratios {:.3}, {:.3}; band 3.5..4.5); \
             sigma_1 residual {linear:.2e}",
            ratios[0], ratios[1]
        ),
    );
}

#[test]
fn criterion_11_rank_gates() {
    let check = |family: Family, k: usize| ScenarioConfig::minimal(3, 2, family, k).validate();
    let rejected_on_k = |r: ppflow::Result<()>| {
        matches!(r, Err(Error::Config { ref field, .. }) if field == "k")
    };
    let sigma1 = check(Family::SigmaKRoot, 1).is_ok();
    let sigma2 = check(Family::SigmaKRoot, 2).is_ok();
    let sigma3 = rejected_on_k(check(Family::SigmaKRoot, 3));
    let rho2 = check(Family::LogRhoK, 2).is_ok();
    let rho1 = rejected_on_k(check(Family::LogRhoK, 1));
    verdict(
        11,
        "n = 3, p = 2 accepts sigma_1, sigma_2, log rho_2 and rejects sigma_3, log rho_1",
        sigma1 && sigma2 && sigma3 && rho2 && rho1,
        &format!(
            "sigma_1 accepted {sigma1}, sigma_2 accepted {sigma2}, sigma_3 rejected {sigma3}, \
             log rho_2 accepted {rho2}, log rho_1 rejected {rho1}"
        ),
    );
}

#[test]
fn criterion_12_structure_sampling() {
    let mut outcomes = Vec::new();
    for (n, p) in DESK {
        let table = MultiIndexTable::enumerate(n, p).unwrap();
        for family in [Family::SigmaKRoot, Family::LogRhoK] {
            for k in 1..=table.size() {
                let f = ConeFunction::new(family, k, table.size()).unwrap();
                if !f.rank_condition(n, p) {
                    continue;
                }
                let seed = 12_000 + 100 * n as u64 + 10 * p as u64 + k as u64;
                outcomes.extend(structure_suite(&f, n, p, 10_000, seed).unwrap());
            }
        }
    }
    let (pass, detail) = summarize(&outcomes.iter().collect::<Vec<_>>());
    verdict(12, "zero concavity, monotonicity or symmetry violations", pass, &detail);
}
