//! With f = sigma_1 the flow is the heat equation phi_t = 2 Lap phi + 6 - psi.
//! A single cosine in psi decays at rate 2 pi^2 and the limit solves a
//! Poisson equation.

use std::f64::consts::PI;

use ppflow::harness::{build_flow, presets};
use ppflow::torusflow::monitors::oscillation_analysis;

fn main() -> ppflow::Result<()> {
    let eps = 0.1;
    let cfg = presets::sigma1_mode(eps);
    let (flow, phi0) = build_flow(&cfg)?;
    let out = flow.run(phi0, &cfg.run_options(false))?;
    let osc = oscillation_analysis(&out.records)?;
    println!("converged {} at t = {} ({} steps)", out.converged, out.final_state.t, out.steps);
    println!("fitted rate {:.6}, analytic 2 pi^2 = {:.6}", osc.beta.unwrap_or(f64::NAN), 2.0 * PI * PI);

    // 2 Lap u = eps cos(2 pi x1) has u = -eps cos(2 pi x1) / (2 pi^2)
    let grid = flow.grid();
    let err = (0..grid.len())
        .map(|i| {
            let x = grid.coordinates(i)[0];
            (out.phi_tilde.values()[i] + eps * (2.0 * PI * x).cos() / (2.0 * PI * PI)).abs()
        })
        .fold(0.0_f64, f64::max);
    println!("sup distance to the closed-form limit: {err:.3e}, b = {:.3e}", out.b);
    for r in out.records.iter().step_by(10).take(8) {
        println!("  t = {:.2}  osc(phi_t) = {:.6e}", r.t, r.osc_phi_t);
    }
    Ok(())
}
