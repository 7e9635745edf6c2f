//! Brute-force exterior algebra over `dz_1..dz_n, dz̄_1..dz̄_n`.
//!
//! Used as an independent check of [`wedge_contribution`](super::wedge_contribution):
//! forms are expanded monomial by monomial with explicit permutation signs and
//! the `(p,p)` coefficients are read off in the basis
//! `(p-1)! (√-1)^{p²} dz_I ∧ dz̄_J`, which is the normalization in which the
//! coefficient of `ω ∧ ω^{p-1}` has diagonal entries `p` and the eigenvalues of
//! `h ∧ ω^{p-1}` are the `p`-sums of the eigenvalues of `h`.

use std::collections::BTreeMap;

use crate::multiindex::MultiIndexTable;
use crate::ppalgebra::{FormPP, Matrix11};
use crate::{CMatrix, Error, Result, C64};

/// Largest complex dimension the oracle accepts.
pub const MAX_DIM: usize = 3;

/// A form as a sparse map from generator bitmask to coefficient.
///
/// Bit `k < n` is `dz_{k+1}`, bit `n + k` is `dz̄_{k+1}`; a monomial is the
/// wedge of its generators in increasing bit order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExteriorForm {
    n: usize,
    terms: BTreeMap<u32, C64>,
}

/// Sign of `a ∧ b` relative to the sorted monomial `a | b`.
fn merge_sign(a: u32, b: u32) -> f64 {
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let bit = rest.trailing_zeros();
        // generators of `a` above `bit` must move past it
        inversions += (a >> (bit + 1)).count_ones();
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn i_pow(k: usize) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

impl ExteriorForm {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// The constant function 1.
    pub fn one(n: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(0, C64::new(1.0, 0.0));
        Self { n, terms }
    }

    fn dz(&self, i: usize) -> u32 {
        1 << i
    }

    fn dzbar(&self, i: usize) -> u32 {
        1 << (self.n + i)
    }

    /// `√-1 Σ h_{ij̄} dz_i ∧ dz̄_j`.
    pub fn one_one(h: &Matrix11) -> Self {
        let n = h.dim();
        let mut out = Self::zero(n);
        let i_unit = C64::new(0.0, 1.0);
        for i in 0..n {
            for j in 0..n {
                let v = h.matrix()[(i, j)];
                if v.norm() != 0.0 {
                    let key = out.dz(i) | out.dzbar(j);
                    *out.terms.entry(key).or_insert(C64::new(0.0, 0.0)) += i_unit * v;
                }
            }
        }
        out
    }

    /// The flat Kähler form `√-1 Σ dz_j ∧ dz̄_j`.
    pub fn kaehler(n: usize) -> Self {
        Self::one_one(&Matrix11::identity(n))
    }

    /// `Σ (p-1)! (√-1)^{p²} X_{IJ̄} dz_I ∧ dz̄_J`.
    pub fn from_coefficients(x: &FormPP, table: &MultiIndexTable) -> Self {
        let n = table.n();
        let p = table.p();
        let norm = i_pow(p * p) * factorial(p - 1);
        let mut out = Self::zero(n);
        for (r, big_i) in table.list().iter().enumerate() {
            for (c, big_j) in table.list().iter().enumerate() {
                let v = x.matrix()[(r, c)];
                if v.norm() == 0.0 {
                    continue;
                }
                let mut key = 0u32;
                for &i in big_i.entries() {
                    key |= out.dz(i - 1);
                }
                for &j in big_j.entries() {
                    key |= out.dzbar(j - 1);
                }
                out.terms.insert(key, norm * v);
            }
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "forms live over different dimensions");
        let mut terms: BTreeMap<u32, C64> = BTreeMap::new();
        for (&a, &va) in &self.terms {
            for (&b, &vb) in &other.terms {
                if a & b != 0 {
                    continue;
                }
                let v = va * vb * merge_sign(a, b);
                *terms.entry(a | b).or_insert(C64::new(0.0, 0.0)) += v;
            }
        }
        terms.retain(|_, v| v.norm() != 0.0);
        Self { n: self.n, terms }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (&k, &v) in &other.terms {
            *terms.entry(k).or_insert(C64::new(0.0, 0.0)) += v;
        }
        Self { n: self.n, terms }
    }

    pub fn power(&self, k: usize) -> Self {
        (0..k).fold(Self::one(self.n), |acc, _| acc.wedge(self))
    }

    /// Reads the `(p,p)` coefficient matrix; components of other bidegrees are
    /// ignored.
    pub fn pp_coefficients(&self, table: &MultiIndexTable) -> FormPP {
        let n = self.n;
        let p = table.p();
        let norm = i_pow(p * p) * factorial(p - 1);
        let mut m = CMatrix::zeros(table.size(), table.size());
        let low = (1u32 << n) - 1;
        for (&key, &v) in &self.terms {
            let holo = key & low;
            let anti = key >> n;
            if holo.count_ones() as usize != p || anti.count_ones() as usize != p {
                continue;
            }
            let rows: Vec<usize> = (0..n).filter(|b| holo >> b & 1 == 1).map(|b| b + 1).collect();
            let cols: Vec<usize> = (0..n).filter(|b| anti >> b & 1 == 1).map(|b| b + 1).collect();
            let r = table.index0(&rows).expect("sorted p-subset");
            let c = table.index0(&cols).expect("sorted p-subset");
            m[(r, c)] = v / norm;
        }
        FormPP::from_hermitian(m)
    }
}

/// Coefficients of `X + h ∧ ω^{p-1}` by full expansion; `n ≤ 3` only.
pub fn exterior_oracle(
    h: &Matrix11,
    x: Option<&ExteriorForm>,
    table: &MultiIndexTable,
) -> Result<FormPP> {
    let n = table.n();
    if n > MAX_DIM {
        return Err(Error::Unsupported(format!(
            "exterior oracle is limited to n <= {MAX_DIM}, got n = {n}"
        )));
    }
    if h.dim() != n {
        return Err(Error::Argument(format!(
            "(1,1) form has dimension {}, table is for n = {n}",
            h.dim()
        )));
    }
    let omega = ExteriorForm::kaehler(n);
    let mut form = ExteriorForm::one_one(h).wedge(&omega.power(table.p() - 1));
    if let Some(x) = x {
        form = form.add(x);
    }
    Ok(form.pp_coefficients(table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sampling;
    use crate::ppalgebra::wedge_contribution;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    #[test]
    fn merge_sign_matches_transpositions() {
        // dz1 ∧ dz̄1 vs dz̄1 ∧ dz1 in n = 1
        assert_eq!(merge_sign(0b01, 0b10), 1.0);
        assert_eq!(merge_sign(0b10, 0b01), -1.0);
        // (e2) ∧ (e0 e1): e2 moves past two generators
        assert_eq!(merge_sign(0b100, 0b011), 1.0);
        assert_eq!(merge_sign(0b110, 0b001), 1.0);
        assert_eq!(merge_sign(0b010, 0b101), -1.0);
    }

    #[test]
    fn identity_gives_twice_identity() {
        let t = MultiIndexTable::enumerate(3, 2).unwrap();
        let z = exterior_oracle(&Matrix11::identity(3), None, &t).unwrap();
        assert!(max_diff(z.matrix(), &CMatrix::identity(3, 3).scale(2.0)) < 1e-15);
    }

    #[test]
    fn random_hermitian_matches_wedge() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for p in [1, 2, 3] {
            let t = MultiIndexTable::enumerate(3, p).unwrap();
            for _ in 0..50 {
                let h = sampling::hermitian(&mut rng, 3, 1.0);
                let a = exterior_oracle(&h, None, &t).unwrap();
                let b = wedge_contribution(&h, &t).unwrap();
                assert!(max_diff(a.matrix(), b.matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn degree_one_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = MultiIndexTable::enumerate(3, 1).unwrap();
        let h = sampling::hermitian(&mut rng, 3, 1.0);
        let z = exterior_oracle(&h, None, &t).unwrap();
        assert!(max_diff(z.matrix(), h.matrix()) < 1e-15);
    }

    #[test]
    fn single_off_diagonal_sign_table() {
        let t = MultiIndexTable::enumerate(3, 2).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2), (1, 0), (2, 0), (2, 1)] {
            let mut h = CMatrix::zeros(3, 3);
            h[(i, j)] = C64::new(0.4, 0.9);
            h[(j, i)] = C64::new(0.4, -0.9);
            let h = Matrix11::new(h).unwrap();
            let a = exterior_oracle(&h, None, &t).unwrap();
            let b = wedge_contribution(&h, &t).unwrap();
            assert!(max_diff(a.matrix(), b.matrix()) < 1e-15, "entry ({i},{j})");
        }
    }

    #[test]
    fn coefficient_round_trip_with_x() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = MultiIndexTable::enumerate(3, 2).unwrap();
        let x = sampling::hermitian_pp(&mut rng, 3, 1.0);
        let h = sampling::hermitian(&mut rng, 3, 1.0);
        let xf = ExteriorForm::from_coefficients(&x, &t);
        let z = exterior_oracle(&h, Some(&xf), &t).unwrap();
        let want = wedge_contribution(&h, &t).unwrap().into_matrix() + x.matrix();
        assert!(max_diff(z.matrix(), &want) < 1e-14);
    }

    #[test]
    fn rejects_large_dimension() {
        let t = MultiIndexTable::enumerate(4, 2).unwrap();
        assert!(matches!(
            exterior_oracle(&Matrix11::identity(4), None, &t),
            Err(Error::Unsupported(_))
        ));
    }
}
