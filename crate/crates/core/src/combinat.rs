//! Exact binomials and colexicographic ranking of k-subsets.
//!
//! Every row and column of a Radon dictionary is addressed by the colex rank
//! of its node set. The colex rank of a sorted set `s_0 < s_1 < ... < s_{k-1}`
//! is `sum_i C(s_i, i + 1)`, which does not depend on the universe size, so
//! indices stay stable when nodes are appended.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact `C(a, b)` in 64-bit arithmetic. Returns 0 when `b > a`.
pub fn binom(a: u64, b: u64) -> Result<u64> {
    if b > a {
        return Ok(0);
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for i in 0..b {
        // acc * (a - i) / (i + 1) stays integral at every step.
        acc = acc * u128::from(a - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return Err(Error::Overflow { a, b });
        }
    }
    Ok(acc as u64)
}

/// `C(a, b)` for the small arguments used in hot loops. Panics on overflow,
/// which cannot happen for the node counts and orders this crate accepts.
#[inline]
pub(crate) fn binom_small(a: usize, b: usize) -> usize {
    if b > a {
        return 0;
    }
    match b {
        0 => 1,
        1 => a,
        2 => a * (a - 1) / 2,
        3 => a * (a - 1) / 2 * (a - 2) / 3,
        _ => binom(a as u64, b as u64).expect("binomial overflow") as usize,
    }
}

/// Pascal-triangle table of exact binomials `C(a, b)` for `a <= max_n`.
///
/// Entries that do not fit in 64 bits are kept as `None` and reported as
/// [`Error::Overflow`] when read.
#[derive(Debug, Clone)]
pub struct BinomialTable {
    max_n: usize,
    rows: Vec<Vec<Option<u64>>>,
}

impl BinomialTable {
    pub fn new(max_n: usize) -> Self {
        let mut rows: Vec<Vec<Option<u64>>> = Vec::with_capacity(max_n + 1);
        for a in 0..=max_n {
            let mut row = vec![Some(1u64); a + 1];
            for b in 1..a {
                let prev = &rows[a - 1];
                row[b] = match (prev[b - 1], prev[b]) {
                    (Some(x), Some(y)) => x.checked_add(y),
                    _ => None,
                };
            }
            rows.push(row);
        }
        Self { max_n, rows }
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn binom(&self, a: usize, b: usize) -> Result<u64> {
        if a > self.max_n {
            return Err(Error::OutOfTable { a, max_n: self.max_n });
        }
        if b > a {
            return Ok(0);
        }
        self.rows[a][b].ok_or(Error::Overflow { a: a as u64, b: b as u64 })
    }
}

/// A set of node ids stored as a strictly increasing list.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct KSet(Vec<usize>);

impl KSet {
    /// Builds a set from arbitrary ids, sorting them. Duplicates are rejected.
    pub fn new(mut elements: Vec<usize>) -> Result<Self> {
        elements.sort_unstable();
        if elements.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidKSet(format!("duplicate node in {elements:?}")));
        }
        Ok(Self(elements))
    }

    /// Wraps an already strictly increasing list.
    pub fn from_sorted(elements: Vec<usize>) -> Result<Self> {
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidKSet(format!("not strictly increasing: {elements:?}")));
        }
        Ok(Self(elements))
    }

    /// `{start, start+1, ..., start+len-1}`.
    pub fn range(start: usize, len: usize) -> Self {
        Self((start..start + len).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn contains(&self, node: usize) -> bool {
        self.0.binary_search(&node).is_ok()
    }

    pub fn max_element(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn is_subset_of(&self, other: &KSet) -> bool {
        intersection_size(self, other) == self.len()
    }

    pub fn union(&self, other: &KSet) -> KSet {
        let mut v: Vec<usize> = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        v.dedup();
        KSet(v)
    }

    /// Order by colex rank without computing it.
    pub fn colex_cmp(&self, other: &KSet) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            for (a, b) in self.0.iter().rev().zip(other.0.iter().rev()) {
                match a.cmp(b) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }

    /// Calls `f` with the colex rank of every `j`-subset of this set.
    pub fn for_each_subset_rank(&self, j: usize, mut f: impl FnMut(usize)) {
        let k = self.len();
        if j > k {
            return;
        }
        if j == 0 {
            f(0);
            return;
        }
        let mut pos: Vec<usize> = (0..j).collect();
        loop {
            let r = pos
                .iter()
                .enumerate()
                .map(|(i, &p)| binom_small(self.0[p], i + 1))
                .sum();
            f(r);
            // advance positions in colex order
            let mut i = 0;
            while i < j {
                let limit = if i + 1 < j { pos[i + 1] } else { k };
                if pos[i] + 1 < limit {
                    pos[i] += 1;
                    for (t, p) in pos.iter_mut().enumerate().take(i) {
                        *p = t;
                    }
                    break;
                }
                i += 1;
            }
            if i == j {
                return;
            }
        }
    }

    /// All `j`-subsets in colex order.
    pub fn subsets(&self, j: usize) -> Vec<KSet> {
        let mut out = Vec::with_capacity(binom_small(self.len(), j));
        for sub in KSubsets::new(self.len(), j) {
            out.push(KSet(sub.0.iter().map(|&p| self.0[p]).collect()));
        }
        out
    }
}

impl fmt::Debug for KSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for KSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl TryFrom<Vec<usize>> for KSet {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        KSet::new(v)
    }
}

impl From<KSet> for Vec<usize> {
    fn from(s: KSet) -> Self {
        s.0
    }
}

/// Colex rank `sum_i C(s_i, i + 1)`.
pub fn rank_kset(s: &KSet) -> Result<u64> {
    let mut r: u64 = 0;
    for (i, &e) in s.0.iter().enumerate() {
        let c = binom(e as u64, i as u64 + 1)?;
        r = r.checked_add(c).ok_or(Error::Overflow { a: e as u64, b: i as u64 + 1 })?;
    }
    Ok(r)
}

/// Colex rank for sets whose rank is known to fit (row indexing of a dictionary).
#[inline]
pub(crate) fn rank_small(s: &[usize]) -> usize {
    s.iter().enumerate().map(|(i, &e)| binom_small(e, i + 1)).sum()
}

/// Inverse of [`rank_kset`]: the `k`-set whose colex rank is `r`.
pub fn unrank_kset(mut r: u64, k: usize) -> Result<KSet> {
    let mut out = vec![0usize; k];
    for i in (1..=k).rev() {
        // largest c with C(c, i) <= r; c >= i - 1 since C(i - 1, i) = 0
        let mut lo = (i - 1) as u64;
        let mut hi = lo + 1;
        while binom(hi, i as u64)? <= r {
            lo = hi;
            hi = hi.checked_mul(2).ok_or(Error::Overflow { a: hi, b: i as u64 })?;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if binom(mid, i as u64)? <= r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out[i - 1] = lo as usize;
        r -= binom(lo, i as u64)?;
    }
    Ok(KSet(out))
}

/// Size of the intersection of two sorted sets by linear merge.
pub fn intersection_size(a: &KSet, b: &KSet) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    let (x, y) = (&a.0, &b.0);
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Iterator over all `k`-subsets of `{0..n-1}` in colex order.
#[derive(Debug, Clone)]
pub struct KSubsets {
    n: usize,
    current: Option<Vec<usize>>,
}

impl KSubsets {
    pub fn new(n: usize, k: usize) -> Self {
        let current = if k <= n { Some((0..k).collect()) } else { None };
        Self { n, current }
    }
}

impl Iterator for KSubsets {
    type Item = KSet;

    fn next(&mut self) -> Option<KSet> {
        let cur = self.current.as_mut()?;
        let out = KSet(cur.clone());
        let k = cur.len();
        let mut i = 0;
        while i < k {
            let limit = if i + 1 < k { cur[i + 1] } else { self.n };
            if cur[i] + 1 < limit {
                cur[i] += 1;
                for (t, c) in cur.iter_mut().enumerate().take(i) {
                    *c = t;
                }
                break;
            }
            i += 1;
        }
        if i == k {
            self.current = None;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ks(v: &[usize]) -> KSet {
        KSet::new(v.to_vec()).unwrap()
    }

    /// Independent colex enumeration: sort all k-subsets by reversed element order.
    fn colex_by_sort(n: usize, k: usize) -> Vec<Vec<usize>> {
        fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for e in start..n {
                cur.push(e);
                rec(e + 1, n, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, n, k, &mut Vec::new(), &mut out);
        out.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
        out
    }

    #[test]
    fn binom_values() {
        assert_eq!(binom(5, 2).unwrap(), 10);
        assert_eq!(binom(10, 5).unwrap(), 252);
        assert_eq!(binom(4, 7).unwrap(), 0);
        assert_eq!(binom(0, 0).unwrap(), 1);
        assert_eq!(binom(67, 33).unwrap(), 14226520737620288370);
    }

    #[test]
    fn binom_overflow_is_an_error() {
        assert!(matches!(binom(68, 34), Err(Error::Overflow { .. })));
        let t = BinomialTable::new(70);
        assert!(matches!(t.binom(68, 34), Err(Error::Overflow { .. })));
        assert_eq!(t.binom(67, 33).unwrap(), 14226520737620288370);
        assert!(matches!(t.binom(71, 2), Err(Error::OutOfTable { .. })));
    }

    #[test]
    fn table_satisfies_pascal() {
        let t = BinomialTable::new(60);
        for a in 0..=60usize {
            assert_eq!(t.binom(a, 0).unwrap(), 1);
            assert_eq!(t.binom(a, a).unwrap(), 1);
            assert_eq!(t.binom(a, a + 1).unwrap(), 0);
            for b in 1..a {
                let lhs = t.binom(a, b).unwrap();
                assert_eq!(lhs, t.binom(a - 1, b - 1).unwrap() + t.binom(a - 1, b).unwrap());
                assert_eq!(lhs, binom(a as u64, b as u64).unwrap());
            }
        }
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_kset(&ks(&[0, 1])).unwrap(), 0);
        assert_eq!(rank_kset(&ks(&[0, 2])).unwrap(), 1);
        assert_eq!(rank_kset(&ks(&[1, 2])).unwrap(), 2);
        assert_eq!(unrank_kset(0, 3).unwrap(), ks(&[0, 1, 2]));
        assert_eq!(unrank_kset(2, 2).unwrap(), ks(&[1, 2]));
        assert_eq!(unrank_kset(9, 2).unwrap(), ks(&[3, 4]));
    }

    #[test]
    fn rank_matches_enumeration_oracle() {
        for n in 0..9 {
            for k in 0..=n {
                let oracle = colex_by_sort(n, k);
                let ours: Vec<KSet> = KSubsets::new(n, k).collect();
                assert_eq!(ours.len(), oracle.len());
                for (idx, (a, b)) in ours.iter().zip(&oracle).enumerate() {
                    assert_eq!(a.as_slice(), b.as_slice());
                    assert_eq!(rank_kset(a).unwrap(), idx as u64);
                    assert_eq!(rank_small(a.as_slice()), idx);
                }
            }
        }
    }

    #[test]
    fn colex_cmp_agrees_with_rank() {
        let all: Vec<KSet> = KSubsets::new(7, 3).collect();
        for w in all.windows(2) {
            assert_eq!(w[0].colex_cmp(&w[1]), Ordering::Less);
        }
    }

    #[test]
    fn subset_ranks() {
        let s = ks(&[1, 3, 4, 6]);
        let mut got = Vec::new();
        s.for_each_subset_rank(2, |r| got.push(r));
        let want: Vec<usize> = s.subsets(2).iter().map(|t| rank_small(t.as_slice())).collect();
        assert_eq!(got, want);
        assert_eq!(got.len(), 6);
        let mut sorted = got.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, got, "subsets come out in colex order");
    }

    #[test]
    fn intersections() {
        assert_eq!(intersection_size(&ks(&[1, 2, 3]), &ks(&[1, 2, 3])), 3);
        assert_eq!(intersection_size(&ks(&[0, 1, 2, 3, 4]), &ks(&[5, 6, 7, 8, 9])), 0);
        assert_eq!(intersection_size(&ks(&[1, 2, 3, 6, 7]), &ks(&[1, 2, 3, 4, 5])), 3);
    }

    #[test]
    fn kset_validation() {
        assert!(KSet::new(vec![3, 1, 3]).is_err());
        assert!(KSet::from_sorted(vec![1, 1]).is_err());
        assert_eq!(KSet::new(vec![4, 0, 2]).unwrap().as_slice(), &[0, 2, 4]);
        let parsed: KSet = serde_json::from_str("[5,1]").unwrap();
        assert_eq!(parsed.as_slice(), &[1, 5]);
        assert!(serde_json::from_str::<KSet>("[2,2]").is_err());
    }
}
