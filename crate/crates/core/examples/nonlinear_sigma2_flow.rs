//! sigma_2^(1/2) flow with a cosine perturbation of the stationary data, with
//! the oscillation contraction, maximum principle and Cauchy checks.

use ppflow::harness::{build_flow, presets};
use ppflow::torusflow::monitors::{cauchy_check, max_principle_monitor, oscillation_analysis};

fn main() -> ppflow::Result<()> {
    let cfg = presets::sigma2_mode(0.1);
    let (flow, phi0) = build_flow(&cfg)?;
    println!("grid extents {:?}", flow.grid().extents());
    let out = flow.run(phi0, &cfg.run_options(true))?;
    println!(
        "converged {} at t = {}: b = {:.9e}, residual = {:.3e}, {} steps",
        out.converged, out.final_state.t, out.b, out.residual, out.steps
    );
    let osc = oscillation_analysis(&out.records)?;
    for r in &osc.ratios {
        println!("  omega({}) = {:.4e}, delta = {:.3e}", r.k, r.omega_k, r.delta);
    }
    let beta = osc.beta.unwrap_or(f64::NAN);
    println!("beta = {beta:.4}");
    let mp = max_principle_monitor(&out.records)?;
    println!("phi_t in [{:.4e}, {:.4e}]: {}", mp.h0, mp.h1, mp.holds());
    let cauchy = cauchy_check(&out.records, &out.snapshots, beta)?;
    println!("Cauchy ratio {:.3} over {} pairs", cauchy.worst_ratio, cauchy.pairs);
    Ok(())
}
