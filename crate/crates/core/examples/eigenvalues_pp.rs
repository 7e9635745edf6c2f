//! Eigenvalues of a (p,p)-form with respect to a non-flat metric, computed
//! through the generalized problem and through an orthonormal frame.

use ppflow::multiindex::MultiIndexTable;
use ppflow::ppalgebra::{
    assemble_z, eigen_orthonormal, eigen_pp, metric_pp, orthonormal_frame, FormPP,
    Matrix11,
};
use ppflow::{CMatrix, C64};

fn main() -> ppflow::Result<()> {
    let table = MultiIndexTable::enumerate(3, 2)?;
    let g = Matrix11::new(CMatrix::from_row_slice(
        3,
        3,
        &[
            C64::new(2.0, 0.0), C64::new(0.3, 0.1), C64::new(0.0, 0.0),
            C64::new(0.3, -0.1), C64::new(1.5, 0.0), C64::new(0.0, 0.2),
            C64::new(0.0, 0.0), C64::new(0.0, -0.2), C64::new(1.0, 0.0),
        ],
    ))?;
    let omega_pp = metric_pp(&g, &table)?;
    println!("omega_(IJ) as 2x2 minors of g:\n{}", omega_pp.matrix());

    // Z = X + h ^ omega^{p-1} with a diagonal X and a Hermitian h
    let x = FormPP::new(CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        C64::new(0.5, 0.0),
        C64::new(-0.2, 0.0),
        C64::new(1.0, 0.0),
    ])))?;
    let h = Matrix11::new(CMatrix::identity(3, 3).scale(0.7))?;
    let z = assemble_z(&x, &h, &table)?;
    let spec = eigen_pp(&z, &omega_pp)?;
    println!("Lambda(Z) w.r.t. omega: {:.6?}", spec.values);

    // same spectrum from Z written in a frame where g is the identity
    let frame = orthonormal_frame(&g)?;
    let z_flat = frame.transform_pp(&z, &table)?;
    println!("Lambda in an orthonormal frame: {:.6?}", eigen_orthonormal(&z_flat).values);
    Ok(())
}
