//! Values, gradients and structure checks of the two cone-function families.

use ppflow::conefun::{structure_check, ConeFunction, Family};

fn main() -> ppflow::Result<()> {
    let (n, p) = (4, 2);
    let size = 6;
    let lambda = [3.0, 2.5, 1.0, 0.5, 0.2, -0.1];
    for family in [Family::SigmaKRoot, Family::LogRhoK] {
        for k in 1..=size {
            let f = ConeFunction::new(family, k, size)?;
            let gate = if f.rank_condition(n, p) { "admissible" } else { "rank fails" };
            if !f.in_cone(&lambda) {
                println!("{:<12} k = {k}: outside the cone (margin {:.3}), {gate}", family.name(), f.margin(&lambda));
                continue;
            }
            let (v, grad) = f.eval_grad(&lambda)?;
            println!(
                "{:<12} k = {k}: f = {v:+.6}, grad = {:.4?}, sup on boundary {:?}, {gate}",
                family.name(),
                grad,
                f.sup_boundary()
            );
        }
    }

    let f = ConeFunction::sigma_root(2, size)?;
    let report = structure_check(&f, n, p, (2.0, 3.0), 2000, 1)?;
    println!(
        "sigma_2^(1/2): monotone {}, concave {}, rank {} (needs > {:.2}), C0 = {:.3e}",
        report.monotone_ok, report.concave_ok, report.rank, report.rank_threshold, report.c0
    );
    Ok(())
}
