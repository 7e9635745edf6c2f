//! Symmetric concave cone functions `f(Λ)` and their structure checks.
//!
//! Two families are supported:
//!
//! - `σ_k^{1/k}` on the Gårding cone `Γ_k = {σ_j > 0, j ≤ k}`,
//! - `log ρ_k`, `ρ_k = Π_{|S|=k} Σ_{i∈S} Λ_i`, on the cone `𝒫_k` where every
//!   `k`-sum is positive.
//!
//! Tangent-cone ranks are the closed-form constants `N - k + 1` and `k`;
//! [`verify_tangent_cone_inequality`] gives a sampled cross-check on level
//! sets far from the origin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::multiindex::binomial;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `σ_k^{1/k}`.
    SigmaKRoot,
    /// `log ρ_k`.
    LogRhoK,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::SigmaKRoot => "sigma_k_root",
            Family::LogRhoK => "log_rho_k",
        }
    }
}

/// A cone function of `N` variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeFunction {
    family: Family,
    k: usize,
    size: usize,
}

/// Elementary symmetric values `(σ_1, ..., σ_N)` from the coefficients of
/// `Π (x + Λ_i)`.
pub fn sigma_all(lambda: &[f64]) -> Vec<f64> {
    let n = lambda.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (m, &l) in lambda.iter().enumerate() {
        for j in (1..=m + 1).rev() {
            e[j] += l * e[j - 1];
        }
    }
    e.remove(0);
    e
}

/// `σ_j(Λ | i)` for `j = 1..N-1`: symmetric values with `Λ_i` removed.
fn sigma_excluding(lambda: &[f64], skip: usize) -> Vec<f64> {
    let rest: Vec<f64> = lambda
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, &v)| v)
        .collect();
    sigma_all(&rest)
}

/// Visits every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k == 0 || k > n {
        return;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        visit(&cur);
        let mut t = k;
        while t > 0 && cur[t - 1] == n - k + t - 1 {
            t -= 1;
        }
        if t == 0 {
            return;
        }
        cur[t - 1] += 1;
        for l in t..k {
            cur[l] = cur[l - 1] + 1;
        }
    }
}

impl ConeFunction {
    pub fn new(family: Family, k: usize, size: usize) -> Result<Self> {
        if size == 0 || k == 0 || k > size {
            return Err(Error::Argument(format!(
                "{} needs 1 <= k <= N, got k = {k}, N = {size}",
                family.name()
            )));
        }
        Ok(Self { family, k, size })
    }

    pub fn sigma_root(k: usize, size: usize) -> Result<Self> {
        Self::new(Family::SigmaKRoot, k, size)
    }

    pub fn log_rho(k: usize, size: usize) -> Result<Self> {
        Self::new(Family::LogRhoK, k, size)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of variables `N`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// `sup_{∂Γ} f`; `None` stands for `-∞`.
    pub fn sup_boundary(&self) -> Option<f64> {
        match self.family {
            Family::SigmaKRoot => Some(0.0),
            Family::LogRhoK => None,
        }
    }

    /// Rank of the tangent cone at infinity of the level sets.
    pub fn tangent_cone_rank(&self) -> usize {
        match self.family {
            Family::SigmaKRoot => self.size - self.k + 1,
            Family::LogRhoK => self.k,
        }
    }

    /// `rank ≥ N(n-p)/n + 1`, evaluated in integers.
    pub fn rank_condition(&self, n: usize, p: usize) -> bool {
        self.tangent_cone_rank() * n >= self.size * (n - p) + n
    }

    fn check_len(&self, lambda: &[f64]) -> Result<()> {
        if lambda.len() != self.size {
            return Err(Error::Argument(format!(
                "expected {} eigenvalues, got {}",
                self.size,
                lambda.len()
            )));
        }
        Ok(())
    }

    fn min_k_sum(&self, lambda: &[f64]) -> f64 {
        let mut sorted = lambda.to_vec();
        sorted.sort_by(f64::total_cmp);
        sorted[..self.k].iter().sum()
    }

    /// Distance proxy to `∂Γ`: `min_{j≤k} σ_j` or the smallest `k`-sum.
    /// Positive exactly on the open cone.
    pub fn margin(&self, lambda: &[f64]) -> f64 {
        match self.family {
            Family::SigmaKRoot => sigma_all(lambda)[..self.k]
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min),
            Family::LogRhoK => self.min_k_sum(lambda),
        }
    }

    /// Strict membership in the open cone.
    pub fn in_cone(&self, lambda: &[f64]) -> bool {
        lambda.len() == self.size && self.margin(lambda) > 0.0
    }

    /// `σ₁`, which is linear and parabolic on all of `ℝ^N`.
    pub fn is_linear(&self) -> bool {
        self.family == Family::SigmaKRoot && self.k == 1
    }

    fn check_cone(&self, lambda: &[f64]) -> Result<()> {
        self.check_len(lambda)?;
        if !self.is_linear() && !self.in_cone(lambda) {
            return Err(Error::Domain(format!(
                "{lambda:?} lies outside the cone of {} (k = {})",
                self.family.name(),
                self.k
            )));
        }
        Ok(())
    }

    pub fn eval(&self, lambda: &[f64]) -> Result<f64> {
        self.check_cone(lambda)?;
        Ok(self.eval_unchecked(lambda))
    }

    pub(crate) fn eval_unchecked(&self, lambda: &[f64]) -> f64 {
        match self.family {
            Family::SigmaKRoot => sigma_all(lambda)[self.k - 1].powf(1.0 / self.k as f64),
            Family::LogRhoK => {
                let mut acc = 0.0;
                for_each_subset(self.size, self.k, |s| {
                    acc += s.iter().map(|&i| lambda[i]).sum::<f64>().ln();
                });
                acc
            }
        }
    }

    pub fn grad(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        self.check_cone(lambda)?;
        Ok(self.grad_unchecked(lambda))
    }

    pub(crate) fn grad_unchecked(&self, lambda: &[f64]) -> Vec<f64> {
        let k = self.k;
        match self.family {
            Family::SigmaKRoot => {
                let sk = sigma_all(lambda)[k - 1];
                let lead = sk.powf(1.0 / k as f64 - 1.0) / k as f64;
                (0..self.size)
                    .map(|i| {
                        let without = if k == 1 {
                            1.0
                        } else {
                            sigma_excluding(lambda, i)[k - 2]
                        };
                        lead * without
                    })
                    .collect()
            }
            Family::LogRhoK => {
                let mut g = vec![0.0; self.size];
                for_each_subset(self.size, k, |s| {
                    let inv = 1.0 / s.iter().map(|&i| lambda[i]).sum::<f64>();
                    for &i in s {
                        g[i] += inv;
                    }
                });
                g
            }
        }
    }

    /// `f` and its gradient.
    pub fn eval_grad(&self, lambda: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check_cone(lambda)?;
        Ok((self.eval_unchecked(lambda), self.grad_unchecked(lambda)))
    }
}

/// A sampled failure of a structure condition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Counterexample {
    pub condition: String,
    pub point: Vec<f64>,
    pub detail: String,
}

/// Outcome of [`structure_check`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureReport {
    pub family: Family,
    pub k: usize,
    pub n: usize,
    pub p: usize,
    /// All sampled gradient components `≥ -1e-12`.
    pub monotone_ok: bool,
    /// No sampled segment violated concavity by more than `1e-10`.
    pub concave_ok: bool,
    /// `Σ f_i Λ_i ≥ -C₀ Σ f_i` holds with the fitted finite `C₀`.
    pub euler_bound_ok: bool,
    pub c0: f64,
    /// `inf ψ - sup_{∂Γ} f`; `None` when `sup_{∂Γ} f = -∞`.
    pub boundary_gap: Option<f64>,
    pub boundary_gap_ok: bool,
    pub rank: usize,
    /// `N(n-p)/n + 1`.
    pub rank_threshold: f64,
    pub rank_ok: bool,
    pub samples_used: usize,
    pub counterexamples: Vec<Counterexample>,
    pub notes: Vec<String>,
}

impl StructureReport {
    pub fn all_ok(&self) -> bool {
        self.monotone_ok && self.concave_ok && self.euler_bound_ok && self.boundary_gap_ok && self.rank_ok
    }
}

fn random_cone_point(rng: &mut ChaCha8Rng, f: &ConeFunction) -> Vec<f64> {
    loop {
        let shift = rng.random_range(-0.5..3.0);
        let v: Vec<f64> = (0..f.size())
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                z + shift
            })
            .collect();
        if f.in_cone(&v) {
            return v;
        }
    }
}

/// Sampled monotonicity, concavity and the lower bound `Σ f_i λ_i ≥ -C₀ Σ f_i`,
/// plus the closed-form gap `inf ψ - sup_{∂Γ} f` and the rank test.
pub fn structure_check(
    f: &ConeFunction,
    n: usize,
    p: usize,
    psi_range: (f64, f64),
    sample_count: usize,
    rng_seed: u64,
) -> Result<StructureReport> {
    if sample_count == 0 {
        return Err(Error::Argument("sample_count must be at least 1".into()));
    }
    if p == 0 || p > n || binomial(n, p) != f.size() {
        return Err(Error::Argument(format!(
            "f has {} variables but C({n},{p}) = {}",
            f.size(),
            binomial(n, p)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut counterexamples = Vec::new();
    let mut monotone_ok = true;
    let mut concave_ok = true;
    let mut worst_ratio = f64::INFINITY;

    for _ in 0..sample_count {
        let a = random_cone_point(&mut rng, f);
        let b = random_cone_point(&mut rng, f);
        let t: f64 = rng.random_range(0.0..1.0);

        let (fa, ga) = f.eval_grad(&a)?;
        if let Some(i) = ga.iter().position(|&g| g < -1e-12) {
            monotone_ok = false;
            counterexamples.push(Counterexample {
                condition: "monotone".into(),
                point: a.clone(),
                detail: format!("f_{} = {:e}", i + 1, ga[i]),
            });
        }

        let fb = f.eval(&b)?;
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| t * x + (1.0 - t) * y).collect();
        let fm = f.eval(&mid)?;
        let chord = t * fa + (1.0 - t) * fb;
        if fm < chord - 1e-10 {
            concave_ok = false;
            counterexamples.push(Counterexample {
                condition: "concave".into(),
                point: mid,
                detail: format!("f(mid) = {fm}, chord = {chord}"),
            });
        }

        let sum_g: f64 = ga.iter().sum();
        let sum_gl: f64 = ga.iter().zip(&a).map(|(g, l)| g * l).sum();
        if sum_g > 0.0 {
            worst_ratio = worst_ratio.min(sum_gl / sum_g);
        }
    }

    let c0 = (-worst_ratio).max(0.0);
    let euler_bound_ok = c0.is_finite();
    let boundary_gap = f.sup_boundary().map(|s| psi_range.0 - s);
    let boundary_gap_ok = boundary_gap.is_none_or(|m| m > 0.0);
    let size = f.size();
    let rank = f.tangent_cone_rank();
    let rank_ok = f.rank_condition(n, p);
    let notes = vec![format!(
        "rank is level-independent for {}; checked once for all levels above sup over the cone boundary",
        f.family().name()
    )];

    Ok(StructureReport {
        family: f.family(),
        k: f.k(),
        n,
        p,
        monotone_ok,
        concave_ok,
        euler_bound_ok,
        c0,
        boundary_gap,
        boundary_gap_ok,
        rank,
        rank_threshold: (size * (n - p)) as f64 / n as f64 + 1.0,
        rank_ok,
        samples_used: sample_count,
        counterexamples,
        notes,
    })
}

/// Largest `ε` with `Σ f_i(μ_i - λ_i) ≥ ε Σ f_i + ε` over the samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TangentConeFit {
    pub epsilon: f64,
    pub samples: usize,
    /// Smallest `|λ|` among the level-set samples.
    pub min_norm: f64,
}

impl TangentConeFit {
    /// `ε > 0`: `μ` behaves as a member of the tangent cone on the samples.
    pub fn holds(&self) -> bool {
        self.epsilon > 0.0
    }
}

/// Point of `{f = level}` on the line `w + τ 1`, by bisection in `τ`.
fn level_point_on_diagonal(f: &ConeFunction, w: &[f64], level: f64) -> Option<Vec<f64>> {
    let shifted = |tau: f64| -> Vec<f64> { w.iter().map(|x| x + tau).collect() };
    let value = |tau: f64| -> Option<f64> {
        let v = shifted(tau);
        if f.in_cone(&v) {
            Some(f.eval_unchecked(&v))
        } else {
            None
        }
    };
    let span = w.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let mut lo = -2.0 * span - 1.0;
    if value(lo).is_some_and(|v| v >= level) {
        return None;
    }
    let mut hi = 2.0 * span + 1.0;
    let mut grow = 0;
    while !value(hi).is_some_and(|v| v > level) {
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        match value(mid) {
            Some(v) if v >= level => hi = mid,
            _ => lo = mid,
        }
        if hi - lo <= 1e-14 * span.max(hi.abs()) {
            break;
        }
    }
    Some(shifted(hi))
}

/// Samples the level set `{f = level}` beyond radius `radius` and fits the
/// largest `ε` for which the tangent-cone inequality holds at every sample.
pub fn verify_tangent_cone_inequality(
    f: &ConeFunction,
    level: f64,
    mu: &[f64],
    radius: f64,
    sample_count: usize,
    rng_seed: u64,
) -> Result<TangentConeFit> {
    if mu.len() != f.size() {
        return Err(Error::Argument(format!(
            "μ has {} entries, f has {} variables",
            mu.len(),
            f.size()
        )));
    }
    if sample_count == 0 {
        return Err(Error::Argument("sample_count must be at least 1".into()));
    }
    if let Some(s) = f.sup_boundary() {
        if level <= s {
            return Err(Error::Diagnostic(format!(
                "level {level} does not exceed sup over the boundary ({s})"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut epsilon = f64::INFINITY;
    let mut min_norm = f64::INFINITY;
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < sample_count {
        attempts += 1;
        if attempts > 50 * sample_count + 100 {
            return Err(Error::Diagnostic(format!(
                "level-set sampling found only {accepted} of {sample_count} points beyond radius {radius}"
            )));
        }
        let dir: Vec<f64> = (0..f.size()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let reach = radius * rng.random_range(1.0..4.0);
        let w: Vec<f64> = dir.iter().map(|x| x / norm * reach).collect();
        let Some(lambda) = level_point_on_diagonal(f, &w, level) else {
            continue;
        };
        let lnorm = lambda.iter().map(|x| x * x).sum::<f64>().sqrt();
        if lnorm < radius {
            continue;
        }
        let g = f.grad_unchecked(&lambda);
        let lhs: f64 = g.iter().zip(mu.iter().zip(&lambda)).map(|(gi, (m, l))| gi * (m - l)).sum();
        let sum_g: f64 = g.iter().sum();
        epsilon = epsilon.min(lhs / (sum_g + 1.0));
        min_norm = min_norm.min(lnorm);
        accepted += 1;
    }
    Ok(TangentConeFit {
        epsilon,
        samples: accepted,
        min_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn brute_sigma(l: &[f64], k: usize) -> f64 {
        let mut acc = 0.0;
        for_each_subset(l.len(), k, |s| acc += s.iter().map(|&i| l[i]).product::<f64>());
        acc
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_all(&[1.0, 2.0, 3.0]), vec![6.0, 11.0, 6.0]);
        assert_eq!(sigma_all(&[3.0, 3.0, -1.0]), vec![5.0, 3.0, -9.0]);
        let t = 1.7;
        let v = sigma_all(&[t; 5]);
        for (k, s) in v.iter().enumerate() {
            let want = binomial(5, k + 1) as f64 * t.powi(k as i32 + 1);
            assert!((s - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn sigma_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let l: Vec<f64> = (0..7).map(|_| rng.random_range(-2.0..2.0)).collect();
            let s = sigma_all(&l);
            for k in 1..=7 {
                assert!((s[k - 1] - brute_sigma(&l, k)).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn cone_examples() {
        let s2 = ConeFunction::sigma_root(2, 3).unwrap();
        assert!(s2.in_cone(&[3.0, 3.0, -1.0]));
        assert!(!s2.in_cone(&[1.0, -1.0, -1.0]));
        let r2 = ConeFunction::log_rho(2, 3).unwrap();
        assert!(r2.in_cone(&[-1.0, 2.0, 3.0]));
        assert!(!r2.in_cone(&[-2.0, 2.0, 3.0]));
        assert!(!s2.in_cone(&[1.0, 1.0]));
    }

    #[test]
    fn eval_examples() {
        let s2 = ConeFunction::sigma_root(2, 3).unwrap();
        let (v, g) = s2.eval_grad(&[1.0, 2.0, 3.0]).unwrap();
        let r = 11f64.sqrt();
        assert!((v - r).abs() < 1e-15);
        for (a, b) in g.iter().zip([5.0, 4.0, 3.0]) {
            assert!((a - b / (2.0 * r)).abs() < 1e-15);
        }

        let s1 = ConeFunction::sigma_root(1, 4).unwrap();
        let (v, g) = s1.eval_grad(&[1.0, -2.0, 3.0, 0.5]).unwrap();
        assert!((v - 2.5).abs() < 1e-15);
        assert_eq!(g, vec![1.0; 4]);
        assert_eq!(s1.eval(&[-1.0, -2.0, 0.0, 0.0]).unwrap(), -3.0);

        let r2 = ConeFunction::log_rho(2, 3).unwrap();
        assert!((r2.eval(&[1.0, 2.0, 3.0]).unwrap() - 60f64.ln()).abs() < 1e-14);

        assert!(matches!(s2.eval(&[1.0, -1.0, -1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(ConeFunction::sigma_root(2, 3).unwrap().tangent_cone_rank(), 2);
        assert!(ConeFunction::sigma_root(2, 3).unwrap().rank_condition(3, 2));
        assert!(ConeFunction::sigma_root(1, 3).unwrap().rank_condition(3, 2));
        assert!(!ConeFunction::sigma_root(3, 3).unwrap().rank_condition(3, 2));
        assert!(ConeFunction::log_rho(2, 3).unwrap().rank_condition(3, 2));
        assert!(!ConeFunction::log_rho(1, 3).unwrap().rank_condition(3, 2));
        // n = 4, p = 2: N = 6, pN/n = 3
        assert!(ConeFunction::sigma_root(3, 6).unwrap().rank_condition(4, 2));
        assert!(!ConeFunction::sigma_root(4, 6).unwrap().rank_condition(4, 2));
        assert!(ConeFunction::log_rho(4, 6).unwrap().rank_condition(4, 2));
        assert!(!ConeFunction::log_rho(3, 6).unwrap().rank_condition(4, 2));
        assert!(ConeFunction::new(Family::LogRhoK, 0, 3).is_err());
        assert!(ConeFunction::new(Family::LogRhoK, 4, 3).is_err());
    }

    #[test]
    fn structure_examples() {
        let r = structure_check(&ConeFunction::sigma_root(2, 3).unwrap(), 3, 2, (1.0, 2.0), 200, 1)
            .unwrap();
        assert!(r.rank_ok && r.all_ok());
        assert_eq!(r.rank, 2);
        assert!((r.rank_threshold - 2.0).abs() < 1e-15);
        assert_eq!(r.c0, 0.0);

        let r = structure_check(&ConeFunction::sigma_root(3, 3).unwrap(), 3, 2, (1.0, 2.0), 50, 1)
            .unwrap();
        assert!(!r.rank_ok);

        let r = structure_check(&ConeFunction::log_rho(2, 3).unwrap(), 3, 2, (-5.0, 2.0), 200, 1)
            .unwrap();
        assert!(r.rank_ok && r.all_ok());
        assert!(r.boundary_gap.is_none());

        let r = structure_check(&ConeFunction::sigma_root(2, 3).unwrap(), 3, 2, (-1.0, 2.0), 10, 1)
            .unwrap();
        assert!(!r.boundary_gap_ok);
        assert!(structure_check(&ConeFunction::sigma_root(2, 3).unwrap(), 3, 2, (1.0, 2.0), 0, 1)
            .is_err());
    }

    #[test]
    fn tangent_cone_linear_closed_form() {
        let f = ConeFunction::sigma_root(1, 3).unwrap();
        let mu = [2.0, 3.0, 4.0];
        let fit = verify_tangent_cone_inequality(&f, 1.5, &mu, 10.0, 50, 3).unwrap();
        let want = (9.0 - 1.5) / 4.0;
        assert!((fit.epsilon - want).abs() < 1e-9, "{}", fit.epsilon);
        assert!(fit.holds());
    }

    #[test]
    fn tangent_cone_sigma2() {
        let f = ConeFunction::sigma_root(2, 3).unwrap();
        let fit = verify_tangent_cone_inequality(&f, 1.0, &[10.0; 3], 50.0, 500, 5).unwrap();
        assert!(fit.holds(), "ε = {}", fit.epsilon);
        assert!(fit.min_norm >= 50.0);
    }

    #[test]
    fn tangent_cone_origin_fails() {
        for f in [
            ConeFunction::sigma_root(2, 3).unwrap(),
            ConeFunction::log_rho(2, 3).unwrap(),
        ] {
            let fit = verify_tangent_cone_inequality(&f, 1.0, &[0.0; 3], 20.0, 100, 5).unwrap();
            assert!(!fit.holds());
        }
    }

    #[test]
    fn tangent_cone_rejects_low_level() {
        let f = ConeFunction::sigma_root(2, 3).unwrap();
        assert!(matches!(
            verify_tangent_cone_inequality(&f, -1.0, &[1.0; 3], 10.0, 5, 1),
            Err(Error::Diagnostic(_))
        ));
    }
}
