//! Sampled property suites for the pointwise algebra.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sampling;
use crate::conefun::{structure_check, ConeFunction, Family};
use crate::linop::{
    f_matrix, g_matrix_contraction, g_matrix_direct, refined_floor, unitary_submatrix_sum,
    GMatrix,
};
use crate::multiindex::MultiIndexTable;
use crate::ppalgebra::{
    assemble_z, eigen_orthonormal, hermitian_eigenvalues, wedge_contribution, FormPP, Matrix11,
};
use crate::{CMatrix, Error, Result, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaOutcome {
    pub name: String,
    pub passed: bool,
    pub samples: usize,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl LemmaOutcome {
    fn new(name: String, samples: usize, worst: f64, tolerance: f64, passed: bool) -> Self {
        Self {
            name,
            passed,
            samples,
            worst,
            tolerance,
            detail: String::new(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {} (samples {}, worst {:.3e}, tolerance {:.1e}){}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.samples,
            self.worst,
            self.tolerance,
            if self.detail.is_empty() {
                String::new()
            } else {
                format!(": {}", self.detail)
            }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSuiteReport {
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    pub outcomes: Vec<LemmaOutcome>,
}

impl LemmaSuiteReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

/// A pointwise configuration `Z = X + 𝔤 ∧ ω^{p-1}` with `Λ(Z) ∈ Γ`.
#[derive(Debug, Clone)]
pub struct AdmissiblePoint {
    pub x: FormPP,
    pub g: Matrix11,
    pub values: Vec<f64>,
    pub basis: CMatrix,
}

/// Rejection sample of an admissible point. With `near_degenerate` the
/// eigenvalues of `𝔤` contain a pair split by about `1e-9`.
pub fn sample_admissible<R: Rng + ?Sized>(
    rng: &mut R,
    f: &ConeFunction,
    table: &MultiIndexTable,
    near_degenerate: bool,
) -> AdmissiblePoint {
    let n = table.n();
    loop {
        let shift = rng.random_range(-0.5..3.0);
        let g = if near_degenerate {
            let u = sampling::haar_unitary(rng, n);
            let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..2.0) + shift).collect();
            d[1] = d[0] + 1e-9 * rng.random_range(-1.0..1.0);
            let diag = Matrix11::from_real_diagonal(&d);
            Matrix11::new(&u * diag.matrix() * u.adjoint()).expect("Hermitian by construction")
        } else {
            let h = sampling::hermitian_matrix(rng, n, 1.0) + CMatrix::identity(n, n).scale(shift);
            Matrix11::new(h).expect("Hermitian by construction")
        };
        let x = sampling::hermitian_pp(rng, table.size(), 0.3);
        let z = assemble_z(&x, &g, table).expect("sizes match");
        let s = eigen_orthonormal(&z);
        if f.in_cone(&s.values) {
            return AdmissiblePoint {
                x,
                g,
                values: s.values,
                basis: s.basis,
            };
        }
    }
}

fn spectral_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .iter()
        .fold(0.0_f64, |a, v| a.max(v.abs()))
}

fn label(f: &ConeFunction) -> String {
    format!("{} k={}", f.family().name(), f.k())
}

/// Parabolicity, refined floor and dual-formula agreement on the same
/// samples.
pub fn parabolicity_suite(
    f: &ConeFunction,
    table: &MultiIndexTable,
    samples: usize,
    seed: u64,
) -> Result<Vec<LemmaOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, p) = (table.n(), table.p());
    let mut worst_parab = f64::NEG_INFINITY;
    let mut worst_floor = f64::NEG_INFINITY;
    let mut worst_dual = 0.0_f64;
    for s in 0..samples {
        let pt = sample_admissible(&mut rng, f, table, s % 5 == 4);
        let grad = f.grad(&pt.values)?;
        let spectrum = crate::ppalgebra::SpectrumPP {
            values: pt.values.clone(),
            basis: pt.basis.clone(),
            frame: CMatrix::identity(table.size(), table.size()),
        };
        let fm = f_matrix(&spectrum, &grad)?;
        let g1 = g_matrix_contraction(&fm, table)?;
        let g2 = g_matrix_direct(&fm, table)?;
        let eig = g1.eigenvalues();
        let g_norm = g1.norm();
        let f_norm = grad.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        worst_parab = worst_parab.max(-eig[0] / g_norm.max(f64::MIN_POSITIVE));
        let floor = refined_floor(&fm, n, p)?;
        worst_floor = worst_floor.max((floor - eig[0]) / f_norm.max(f64::MIN_POSITIVE));
        let diff = (g1.matrix() - g2.matrix())
            .iter()
            .fold(0.0_f64, |a, z| a.max(z.norm()));
        let scale = g1.matrix().iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        worst_dual = worst_dual.max(diff / scale.max(f64::MIN_POSITIVE));
    }
    let tag = label(f);
    Ok(vec![
        LemmaOutcome::new(
            format!("parabolicity lambda_min(G) >= -1e-10 |G| [{tag}]"),
            samples,
            worst_parab,
            1e-10,
            worst_parab <= 1e-10,
        ),
        LemmaOutcome::new(
            format!("refined floor lambda_min(G) >= f_(alpha) - 1e-10 |F| [{tag}]"),
            samples,
            worst_floor,
            1e-10,
            worst_floor <= 1e-10,
        ),
        LemmaOutcome::new(
            format!("contraction and direct G agree [{tag}]"),
            samples,
            worst_dual,
            1e-12,
            worst_dual <= 1e-12,
        ),
    ])
}

/// `f(Λ(X + 𝔤 ∧ ω^{p-1}))`.
fn value_at(f: &ConeFunction, table: &MultiIndexTable, x: &FormPP, g: &CMatrix) -> Result<f64> {
    let z = assemble_z(x, &Matrix11::new(g.clone())?, table)?;
    f.eval(&eigen_orthonormal(&z).values)
}

/// `G` by fourth-order central differences of `𝔤 ↦ f(Λ(X + 𝔤∧ω^{p-1}))`
/// along Hermitian directions.
pub fn fd_g_oracle(
    f: &ConeFunction,
    table: &MultiIndexTable,
    x: &FormPP,
    g: &Matrix11,
    step: f64,
) -> Result<GMatrix> {
    let n = table.n();
    let scale = 1.0 + g.matrix().iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    if !step.is_finite() || step < 1e-12 * scale {
        return Err(Error::Argument(format!(
            "finite-difference step {step:e} underflows against |g| = {scale:e}"
        )));
    }
    value_at(f, table, x, g.matrix())?;
    let derivative = |dir: &CMatrix| -> Result<f64> {
        let at = |s: f64| value_at(f, table, x, &(g.matrix() + dir.scale(s)));
        let d1 = at(step)? - at(-step)?;
        let d2 = at(2.0 * step)? - at(-2.0 * step)?;
        Ok((8.0 * d1 - d2) / (12.0 * step))
    };
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        let mut e = CMatrix::zeros(n, n);
        e[(i, i)] = C64::new(1.0, 0.0);
        out[(i, i)] = C64::new(derivative(&e)?, 0.0);
        for j in i + 1..n {
            let mut re = CMatrix::zeros(n, n);
            re[(i, j)] = C64::new(1.0, 0.0);
            re[(j, i)] = C64::new(1.0, 0.0);
            let mut im = CMatrix::zeros(n, n);
            im[(i, j)] = C64::new(0.0, 1.0);
            im[(j, i)] = C64::new(0.0, -1.0);
            // tr(G dg): real direction gives 2 Re G_ij, imaginary 2 Im G_ij
            let v = C64::new(derivative(&re)? / 2.0, derivative(&im)? / 2.0);
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    GMatrix::new(out)
}

/// [`fd_g_oracle`] with the step halved until two successive estimates agree
/// to `1e-8` relative, which resolves points close to the cone boundary.
pub fn fd_g_refined(
    f: &ConeFunction,
    table: &MultiIndexTable,
    x: &FormPP,
    g: &Matrix11,
    initial_step: f64,
) -> Result<GMatrix> {
    let mut step = initial_step;
    let mut prev: Option<GMatrix> = None;
    loop {
        match fd_g_oracle(f, table, x, g, step) {
            Ok(cur) => {
                if let Some(p) = &prev {
                    let diff = spectral_norm(&(p.matrix() - cur.matrix()));
                    if diff <= 1e-8 * cur.norm() {
                        return Ok(cur);
                    }
                }
                prev = Some(cur);
            }
            Err(Error::Domain(_)) => prev = None,
            Err(e) => return Err(e),
        }
        step *= 0.5;
        if step < 1e-8 * initial_step {
            return prev.ok_or_else(|| {
                Error::Diagnostic("finite differences never stayed inside the cone".into())
            });
        }
    }
}

/// Analytic `G` against [`fd_g_oracle`], relative to `|G|`.
pub fn chain_rule_suite(
    f: &ConeFunction,
    table: &MultiIndexTable,
    samples: usize,
    seed: u64,
) -> Result<LemmaOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    let mut done = 0;
    for s in 0..samples {
        let pt = sample_admissible(&mut rng, f, table, s % 3 == 2);
        let grad = f.grad(&pt.values)?;
        let spectrum = crate::ppalgebra::SpectrumPP {
            values: pt.values.clone(),
            basis: pt.basis.clone(),
            frame: CMatrix::identity(table.size(), table.size()),
        };
        let g = g_matrix_contraction(&f_matrix(&spectrum, &grad)?, table)?;
        let reach = pt.values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        let fd = fd_g_refined(f, table, &pt.x, &pt.g, 1e-3 * reach).map_err(|e| {
            Error::Diagnostic(format!(
                "finite differences failed at margin {:e}: {e}",
                f.margin(&pt.values)
            ))
        })?;
        let diff = spectral_norm(&(fd.matrix() - g.matrix()));
        worst = worst.max(diff / g.norm().max(f64::MIN_POSITIVE));
        done += 1;
    }
    Ok(LemmaOutcome::new(
        format!("chain rule G vs finite differences [{}]", label(f)),
        done,
        worst,
        1e-5,
        worst <= 1e-5,
    ))
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=k).collect();
    if k == 0 || k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Blocks with `|rows| + |cols| = N + 1` of Haar unitaries carry mass `≥ 1`.
pub fn unitary_block_suite(size: usize, samples: usize, seed: u64) -> Result<LemmaOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let shapes: Vec<(Vec<Vec<usize>>, Vec<Vec<usize>>)> = (1..=size)
        .map(|r| (subsets(size, r), subsets(size, size + 1 - r)))
        .collect();
    for _ in 0..samples {
        let u = sampling::haar_unitary(&mut rng, size);
        for (rows_all, cols_all) in &shapes {
            for rows in rows_all {
                for cols in cols_all {
                    worst = worst.min(unitary_submatrix_sum(&u, rows, cols)?);
                }
            }
        }
    }
    Ok(LemmaOutcome::new(
        format!("unitary blocks |rows|+|cols| = N+1 have mass >= 1 [N={size}]"),
        samples,
        worst,
        1e-9,
        worst >= 1.0 - 1e-9,
    ))
}

/// Eigenvalues of `𝔤 ∧ ω^{p-1}` are the `p`-fold sums of eigenvalues of `𝔤`.
pub fn sum_structure_suite(table: &MultiIndexTable, samples: usize, seed: u64) -> Result<LemmaOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let g = sampling::hermitian(&mut rng, table.n(), 1.0);
        let lam = g.eigenvalues();
        let mut sums: Vec<f64> = table
            .list()
            .iter()
            .map(|idx| idx.entries().iter().map(|&i| lam[i - 1]).sum())
            .collect();
        sums.sort_by(f64::total_cmp);
        let z = wedge_contribution(&g, table)?;
        let got = eigen_orthonormal(&z).values;
        for (a, b) in got.iter().zip(&sums) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(LemmaOutcome::new(
        format!("spectrum of g^omega^(p-1) is p-sums of spectrum of g [n={}, p={}]", table.n(), table.p()),
        samples,
        worst,
        1e-9,
        worst <= 1e-9,
    ))
}

/// Sampled monotonicity and concavity plus permutation symmetry.
pub fn structure_suite(
    f: &ConeFunction,
    n: usize,
    p: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<LemmaOutcome>> {
    let report = structure_check(f, n, p, (1.0, 1.0), samples, seed)?;
    let count = |c: &str| report.counterexamples.iter().filter(|e| e.condition == c).count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut sym_violations = 0;
    let mut worst_sym = 0.0_f64;
    for _ in 0..samples {
        let v = sampling::cone_point(&mut rng, f, 1.0);
        let mut w = v.clone();
        w.shuffle(&mut rng);
        let (a, b) = (f.eval(&v)?, f.eval(&w)?);
        let rel = (a - b).abs() / a.abs().max(1.0);
        worst_sym = worst_sym.max(rel);
        if rel > 1e-12 {
            sym_violations += 1;
        }
    }
    let tag = label(f);
    Ok(vec![
        LemmaOutcome::new(
            format!("monotone f_i >= -1e-12 [{tag}]"),
            samples,
            count("monotone") as f64,
            0.0,
            report.monotone_ok,
        ),
        LemmaOutcome::new(
            format!("concave along segments within 1e-10 [{tag}]"),
            samples,
            count("concave") as f64,
            0.0,
            report.concave_ok,
        ),
        LemmaOutcome::new(
            format!("symmetric under permutations within 1e-12 [{tag}]"),
            samples,
            worst_sym,
            1e-12,
            sym_violations == 0,
        ),
    ])
}

/// Cone functions of both families that pass the rank condition.
pub fn admissible_functions(n: usize, p: usize) -> Result<Vec<ConeFunction>> {
    let table = MultiIndexTable::enumerate(n, p)?;
    let size = table.size();
    let mut out = Vec::new();
    for family in [Family::SigmaKRoot, Family::LogRhoK] {
        for k in 1..=size {
            let f = ConeFunction::new(family, k, size)?;
            if f.rank_condition(n, p) {
                out.push(f);
            }
        }
    }
    Ok(out)
}

/// Every pointwise suite for one `(n, p)`.
pub fn check_lemmas(n: usize, p: usize, samples: usize, seed: u64) -> Result<LemmaSuiteReport> {
    if samples == 0 {
        return Err(Error::Argument("samples must be positive".into()));
    }
    let table = MultiIndexTable::enumerate(n, p)?;
    let mut outcomes = Vec::new();
    let fd_samples = (samples / 10).max(1);
    for (i, f) in admissible_functions(n, p)?.iter().enumerate() {
        let s = seed.wrapping_add(1000 * i as u64);
        outcomes.extend(parabolicity_suite(f, &table, samples, s)?);
        outcomes.push(chain_rule_suite(f, &table, fd_samples, s + 1)?);
        outcomes.extend(structure_suite(f, n, p, samples, s + 2)?);
    }
    outcomes.push(sum_structure_suite(&table, fd_samples, seed + 7)?);
    outcomes.push(unitary_block_suite(table.size(), fd_samples, seed + 11)?);
    Ok(LemmaSuiteReport {
        n,
        p,
        seed,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_oracle_examples() {
        let t = MultiIndexTable::enumerate(3, 2).unwrap();
        let f = ConeFunction::sigma_root(1, 3).unwrap();
        let x = FormPP::zeros(3);
        let g = Matrix11::identity(3);
        let fd = fd_g_oracle(&f, &t, &x, &g, 1e-3).unwrap();
        let want = CMatrix::identity(3, 3).scale(2.0);
        assert!((fd.matrix() - want).iter().all(|z| z.norm() < 1e-9));
        assert!(matches!(fd_g_oracle(&f, &t, &x, &g, 0.0), Err(Error::Argument(_))));
        assert!(matches!(fd_g_oracle(&f, &t, &x, &g, 1e-14), Err(Error::Argument(_))));

        let s2 = ConeFunction::sigma_root(2, 3).unwrap();
        let fd = fd_g_oracle(&s2, &t, &x, &g, 1e-3).unwrap();
        let want = 2.0 / 3f64.sqrt();
        assert!((fd.matrix()[(0, 0)].re - want).abs() < 1e-9);
    }

    #[test]
    fn small_suites_pass() {
        let rep = check_lemmas(3, 2, 200, 7).unwrap();
        for o in &rep.outcomes {
            assert!(o.passed, "{}", o.line());
        }
    }

    #[test]
    fn subsets_enumerate() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 3), vec![vec![1, 2, 3]]);
    }
}
