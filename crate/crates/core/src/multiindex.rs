//! Increasing multi-indices `I = (i_1 < ... < i_p)` in `[1, n]`.
//!
//! All public positions and entries are 1-based. A [`MultiIndexTable`] holds
//! every index of length `p` in lexicographic order (`I < J` when `i_l < j_l`
//! at the first entry where they differ), together with the insertion and
//! sign tables the pointwise kernels need.

use std::collections::HashMap;
use std::fmt;

use crate::{Error, Result};

/// A strictly increasing tuple of 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    entries: Vec<usize>,
}

impl MultiIndex {
    /// Validates that `entries` is strictly increasing and lies in `[1, n]`.
    pub fn new(entries: Vec<usize>, n: usize) -> Result<Self> {
        if entries.iter().any(|&e| e == 0 || e > n) {
            return Err(Error::Argument(format!(
                "multi-index {entries:?} has entries outside [1, {n}]"
            )));
        }
        if entries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument(format!(
                "multi-index {entries:?} is not strictly increasing"
            )));
        }
        Ok(Self { entries })
    }

    /// Builds without range checks; callers guarantee the invariant.
    pub(crate) fn from_sorted(entries: Vec<usize>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0] < w[1]));
        Self { entries }
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.entries.binary_search(&i).is_ok()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// `(i|I)`: the 1-based position of `i` inside `I`.
pub fn position(i: usize, index: &MultiIndex) -> Result<usize> {
    index
        .entries
        .binary_search(&i)
        .map(|k| k + 1)
        .map_err(|_| Error::Argument(format!("{i} is not an entry of {index}")))
}

/// `I'_i`: inserts `i` into `I'` keeping the entries sorted.
pub fn insert(prime: &MultiIndex, i: usize) -> Result<MultiIndex> {
    match prime.entries.binary_search(&i) {
        Ok(_) => Err(Error::Argument(format!("{i} is already an entry of {prime}"))),
        Err(at) => {
            let mut entries = prime.entries.clone();
            entries.insert(at, i);
            Ok(MultiIndex { entries })
        }
    }
}

/// `(-1)^{(i|I) + (j|J)}` as `+1` or `-1`.
pub fn sign_exponent(i: usize, big_i: &MultiIndex, j: usize, big_j: &MultiIndex) -> Result<i32> {
    let a = position(i, big_i)? + position(j, big_j)?;
    Ok(if a % 2 == 0 { 1 } else { -1 })
}

/// One entry of the insertion table: `I'_i` for a fixed `I'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Insertion {
    /// 0-based `i`.
    pub i: usize,
    /// 0-based rank of `I'_i` in the table.
    pub rank: usize,
    /// `(-1)^{(i|I'_i)}`.
    pub sign: f64,
}

/// Ordered pair `(I, J)` with `|I ∩ J| = p - 1`; all fields 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct AdjacentPair {
    pub row: usize,
    pub col: usize,
    /// The entry of `I \ J`.
    pub i: usize,
    /// The entry of `J \ I`.
    pub j: usize,
    /// `(-1)^{(i|I) + (j|J)}`.
    pub sign: f64,
}

/// All increasing `p`-tuples of `[1, n]` in lexicographic order.
#[derive(Debug, Clone)]
pub struct MultiIndexTable {
    n: usize,
    p: usize,
    list: Vec<MultiIndex>,
    ranks: HashMap<Vec<usize>, usize>,
    /// For each `(p-1)`-index `I'` (lexicographic), the insertions `I'_i`.
    insertions: Vec<Vec<Insertion>>,
    adjacent: Vec<AdjacentPair>,
}

fn combinations(n: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if p == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut cur: Vec<usize> = (1..=p).collect();
    loop {
        out.push(cur.clone());
        // advance the rightmost entry that still has room
        let mut k = p;
        while k > 0 && cur[k - 1] == n - p + k {
            k -= 1;
        }
        if k == 0 {
            return out;
        }
        cur[k - 1] += 1;
        for l in k..p {
            cur[l] = cur[l - 1] + 1;
        }
    }
}

/// Binomial coefficient `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for t in 0..k {
        acc = acc * (n - t) / (t + 1);
    }
    acc
}

impl MultiIndexTable {
    /// Enumerates `𝕴_p` for dimension `n`, `1 ≤ p ≤ n`.
    pub fn enumerate(n: usize, p: usize) -> Result<Self> {
        if n == 0 || p == 0 || p > n {
            return Err(Error::Argument(format!(
                "need 1 <= p <= n, got n = {n}, p = {p}"
            )));
        }
        let list: Vec<MultiIndex> = combinations(n, p)
            .into_iter()
            .map(MultiIndex::from_sorted)
            .collect();
        let ranks: HashMap<Vec<usize>, usize> = list
            .iter()
            .enumerate()
            .map(|(k, idx)| (idx.entries.clone(), k))
            .collect();

        let mut insertions = Vec::new();
        for prime in combinations(n, p - 1) {
            let prime = MultiIndex::from_sorted(prime);
            let mut row = Vec::with_capacity(n - p + 1);
            for i in 1..=n {
                if prime.contains(i) {
                    continue;
                }
                let full = insert(&prime, i).expect("i is not in I'");
                let pos = position(i, &full).expect("i was inserted");
                row.push(Insertion {
                    i: i - 1,
                    rank: ranks[&full.entries],
                    sign: if pos % 2 == 0 { 1.0 } else { -1.0 },
                });
            }
            insertions.push(row);
        }

        let mut adjacent = Vec::new();
        for (r, big_i) in list.iter().enumerate() {
            for (c, big_j) in list.iter().enumerate() {
                if r == c {
                    continue;
                }
                let only_i: Vec<usize> = big_i
                    .entries
                    .iter()
                    .copied()
                    .filter(|&e| !big_j.contains(e))
                    .collect();
                if only_i.len() != 1 {
                    continue;
                }
                let only_j: Vec<usize> = big_j
                    .entries
                    .iter()
                    .copied()
                    .filter(|&e| !big_i.contains(e))
                    .collect();
                let (i, j) = (only_i[0], only_j[0]);
                let s = sign_exponent(i, big_i, j, big_j).expect("membership holds");
                adjacent.push(AdjacentPair {
                    row: r,
                    col: c,
                    i: i - 1,
                    j: j - 1,
                    sign: s as f64,
                });
            }
        }

        Ok(Self {
            n,
            p,
            list,
            ranks,
            insertions,
            adjacent,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// `N = C(n, p)`.
    pub fn size(&self) -> usize {
        self.list.len()
    }

    pub fn list(&self) -> &[MultiIndex] {
        &self.list
    }

    /// 1-based position of `index` in the table.
    pub fn rank_of(&self, index: &MultiIndex) -> Result<usize> {
        self.ranks
            .get(&index.entries)
            .map(|k| k + 1)
            .ok_or_else(|| Error::Argument(format!("{index} is not in the table")))
    }

    /// The index at 1-based position `rank`.
    pub fn get(&self, rank: usize) -> Option<&MultiIndex> {
        rank.checked_sub(1).and_then(|k| self.list.get(k))
    }

    pub(crate) fn index0(&self, entries: &[usize]) -> Option<usize> {
        self.ranks.get(entries).copied()
    }

    pub(crate) fn insertions(&self) -> &[Vec<Insertion>] {
        &self.insertions
    }

    pub(crate) fn adjacent_pairs(&self) -> &[AdjacentPair] {
        &self.adjacent
    }

    /// `α = pN/n = C(n-1, p-1)`: how many indices contain a given entry.
    pub fn alpha(&self) -> usize {
        binomial(self.n - 1, self.p - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(e: &[usize], n: usize) -> MultiIndex {
        MultiIndex::new(e.to_vec(), n).unwrap()
    }

    fn entries(t: &MultiIndexTable) -> Vec<Vec<usize>> {
        t.list().iter().map(|m| m.entries().to_vec()).collect()
    }

    #[test]
    fn enumerate_examples() {
        let t = MultiIndexTable::enumerate(3, 2).unwrap();
        assert_eq!(entries(&t), vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
        let t = MultiIndexTable::enumerate(4, 2).unwrap();
        assert_eq!(
            entries(&t),
            vec![
                vec![1, 2],
                vec![1, 3],
                vec![1, 4],
                vec![2, 3],
                vec![2, 4],
                vec![3, 4]
            ]
        );
        let t = MultiIndexTable::enumerate(5, 5).unwrap();
        assert_eq!(entries(&t), vec![vec![1, 2, 3, 4, 5]]);
        assert_eq!(t.size(), 1);
    }

    #[test]
    fn enumerate_rejects_bad_ranges() {
        assert!(MultiIndexTable::enumerate(3, 0).is_err());
        assert!(MultiIndexTable::enumerate(3, 4).is_err());
        assert!(MultiIndexTable::enumerate(0, 0).is_err());
    }

    #[test]
    fn singletons_and_full() {
        for n in 1..7 {
            let t = MultiIndexTable::enumerate(n, 1).unwrap();
            assert_eq!(entries(&t), (1..=n).map(|i| vec![i]).collect::<Vec<_>>());
            assert_eq!(MultiIndexTable::enumerate(n, n).unwrap().size(), 1);
        }
    }

    #[test]
    fn order_is_first_difference() {
        for n in 1..8 {
            for p in 1..=n {
                let t = MultiIndexTable::enumerate(n, p).unwrap();
                assert_eq!(t.size(), binomial(n, p));
                for w in t.list().windows(2) {
                    let (a, b) = (w[0].entries(), w[1].entries());
                    let k = a.iter().zip(b).position(|(x, y)| x != y).unwrap();
                    assert!(a[k] < b[k]);
                }
                for (k, idx) in t.list().iter().enumerate() {
                    assert_eq!(t.rank_of(idx).unwrap(), k + 1);
                    assert_eq!(t.get(k + 1), Some(idx));
                }
            }
        }
    }

    #[test]
    fn position_examples() {
        assert_eq!(position(2, &mi(&[1, 2, 4], 4)).unwrap(), 2);
        assert_eq!(position(1, &mi(&[1, 3], 3)).unwrap(), 1);
        assert_eq!(position(4, &mi(&[1, 2, 4], 4)).unwrap(), 3);
        assert!(position(3, &mi(&[1, 2, 4], 4)).is_err());
    }

    #[test]
    fn insert_examples() {
        assert_eq!(insert(&mi(&[1, 3], 3), 2).unwrap(), mi(&[1, 2, 3], 3));
        assert_eq!(insert(&mi(&[2, 3], 3), 1).unwrap(), mi(&[1, 2, 3], 3));
        assert_eq!(insert(&mi(&[1, 2], 4), 4).unwrap(), mi(&[1, 2, 4], 4));
        assert!(insert(&mi(&[1, 2], 4), 2).is_err());
    }

    #[test]
    fn sign_examples() {
        assert_eq!(sign_exponent(2, &mi(&[1, 2], 3), 3, &mi(&[1, 3], 3)).unwrap(), 1);
        assert_eq!(sign_exponent(1, &mi(&[1, 3], 3), 2, &mi(&[2, 3], 3)).unwrap(), 1);
        assert_eq!(sign_exponent(1, &mi(&[1, 2], 3), 3, &mi(&[2, 3], 3)).unwrap(), -1);
        assert!(sign_exponent(3, &mi(&[1, 2], 3), 3, &mi(&[2, 3], 3)).is_err());
    }

    #[test]
    fn new_validates() {
        assert!(MultiIndex::new(vec![2, 1], 3).is_err());
        assert!(MultiIndex::new(vec![1, 1], 3).is_err());
        assert!(MultiIndex::new(vec![0, 1], 3).is_err());
        assert!(MultiIndex::new(vec![1, 4], 3).is_err());
    }

    #[test]
    fn insertion_position_counts_smaller_entries() {
        for n in 2..7 {
            for p in 2..=n {
                for prime in combinations(n, p - 1) {
                    let prime = MultiIndex::new(prime, n).unwrap();
                    for i in (1..=n).filter(|&i| !prime.contains(i)) {
                        let full = insert(&prime, i).unwrap();
                        let smaller = prime.entries().iter().filter(|&&a| a < i).count();
                        assert_eq!(position(i, &full).unwrap(), 1 + smaller);
                    }
                }
            }
        }
    }

    #[test]
    fn tables_have_expected_sizes() {
        let t = MultiIndexTable::enumerate(4, 2).unwrap();
        assert_eq!(t.alpha(), 3);
        assert_eq!(t.insertions().len(), 4);
        assert!(t.insertions().iter().all(|r| r.len() == 3));
        // each I has p(n-p) neighbours with |I ∩ J| = p - 1
        assert_eq!(t.adjacent_pairs().len(), 6 * 2 * 2);
    }
}
