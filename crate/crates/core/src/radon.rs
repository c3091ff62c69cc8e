//! The implicit Radon dictionary.
//!
//! Rows are the `j`-subsets of `{0..n-1}` in colex order; each column is a
//! candidate clique `tau` whose entries are `1/sqrt(C(|tau|, j))` on the
//! `j`-subsets of `tau` and zero elsewhere, so every column has unit l2 norm.
//! Nothing is materialized unless [`CliqueDictionary::to_dense`] is asked for.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::combinat::{binom, binom_small, intersection_size, rank_small, KSet, KSubsets};
use crate::error::{Error, Result};

/// Default refusal threshold for [`CliqueDictionary::enumerate_full`].
pub const DEFAULT_ENUMERATION_CAP: u64 = 2_000_000;

/// How the candidate list of a dictionary was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DictionaryScope {
    /// Every clique of the listed sizes over the universe.
    Full,
    /// A caller-supplied list.
    Candidates,
}

/// Scale of a column of size `size`: `1/sqrt(C(size, j))`.
#[inline]
pub fn column_scale(size: usize, j: usize) -> f64 {
    1.0 / (binom_small(size, j) as f64).sqrt()
}

/// Inner product of the normalized columns of `tau1` and `tau2`:
/// `C(|tau1 ∩ tau2|, j) / sqrt(C(|tau1|, j) C(|tau2|, j))`.
pub fn gram_entry(tau1: &KSet, tau2: &KSet, j: usize) -> f64 {
    let shared = binom_small(intersection_size(tau1, tau2), j) as f64;
    if shared == 0.0 {
        return 0.0;
    }
    shared * column_scale(tau1.len(), j) * column_scale(tau2.len(), j)
}

/// Sparse signal on cliques. Zero weights are never stored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseSignal {
    entries: BTreeMap<KSet, f64>,
}

impl SparseSignal {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (KSet, f64)>) -> Self {
        let mut s = Self::new();
        for (k, w) in entries {
            s.add(k, w);
        }
        s
    }

    /// Sets the weight of `clique`, removing it when `weight == 0`.
    pub fn set(&mut self, clique: KSet, weight: f64) {
        if weight == 0.0 {
            self.entries.remove(&clique);
        } else {
            self.entries.insert(clique, weight);
        }
    }

    pub fn add(&mut self, clique: KSet, weight: f64) {
        let w = self.entries.get(&clique).copied().unwrap_or(0.0) + weight;
        self.set(clique, w);
    }

    pub fn get(&self, clique: &KSet) -> f64 {
        self.entries.get(clique).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&KSet, f64)> {
        self.entries.iter().map(|(k, &w)| (k, w))
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.values().map(|w| w.abs()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// l1 distance to another signal over the union of supports.
    pub fn l1_distance(&self, other: &SparseSignal) -> f64 {
        let mut d = 0.0;
        for (k, w) in self.iter() {
            d += (w - other.get(k)).abs();
        }
        for (k, w) in other.iter() {
            if !self.entries.contains_key(k) {
                d += w.abs();
            }
        }
        d
    }

    /// Weights in 0/1-incidence units: a normalized weight `x` on `tau`
    /// contributes `x / sqrt(C(|tau|, j))` to each of its `j`-subsets.
    pub fn to_incidence_units(&self, j: usize) -> SparseSignal {
        SparseSignal::from_entries(
            self.iter().map(|(k, w)| (k.clone(), w * column_scale(k.len(), j))),
        )
    }

    /// Inverse of [`SparseSignal::to_incidence_units`].
    pub fn from_incidence_units(raw: &SparseSignal, j: usize) -> SparseSignal {
        SparseSignal::from_entries(raw.iter().map(|(k, w)| (k.clone(), w / column_scale(k.len(), j))))
    }
}

/// Implicit dictionary over an ordered candidate clique list.
#[derive(Debug, Clone)]
pub struct CliqueDictionary {
    n: usize,
    j: usize,
    candidates: Vec<KSet>,
    index: HashMap<KSet, usize>,
    row_count: usize,
    scope: DictionaryScope,
}

impl CliqueDictionary {
    /// Dictionary over an explicit candidate list.
    pub fn new(n: usize, j: usize, candidates: Vec<KSet>) -> Result<Self> {
        Self::build(n, j, candidates, DictionaryScope::Candidates)
    }

    fn build(n: usize, j: usize, candidates: Vec<KSet>, scope: DictionaryScope) -> Result<Self> {
        if j == 0 {
            return Err(Error::Precondition("observation order j must be at least 1".into()));
        }
        let rows = binom(n as u64, j as u64)?;
        let mut index = HashMap::with_capacity(candidates.len());
        for (i, c) in candidates.iter().enumerate() {
            if c.len() < j || c.len() > n {
                return Err(Error::InvalidKSet(format!("candidate {c} has size outside [{j}, {n}]")));
            }
            if c.max_element().is_some_and(|m| m >= n) {
                return Err(Error::InvalidKSet(format!("candidate {c} leaves universe of {n} nodes")));
            }
            if index.insert(c.clone(), i).is_some() {
                return Err(Error::InvalidKSet(format!("duplicate candidate {c}")));
            }
        }
        Ok(Self { n, j, candidates, index, row_count: rows as usize, scope })
    }

    /// All `k`-subsets of `{0..n-1}` in colex order, refusing above the default cap.
    pub fn enumerate_full(n: usize, j: usize, k: usize) -> Result<Self> {
        Self::enumerate_full_sizes(n, j, k..=k, DEFAULT_ENUMERATION_CAP)
    }

    /// Concatenation of the full dictionaries for every size in `sizes`.
    pub fn enumerate_full_sizes(
        n: usize,
        j: usize,
        sizes: std::ops::RangeInclusive<usize>,
        cap: u64,
    ) -> Result<Self> {
        let mut total: u128 = 0;
        for k in sizes.clone() {
            total += binom(n as u64, k as u64).map(u128::from).unwrap_or(u128::MAX / 2);
        }
        if total > u128::from(cap) {
            return Err(Error::EnumerationCap { count: total, cap });
        }
        let mut candidates = Vec::with_capacity(total as usize);
        for k in sizes {
            if k < j {
                return Err(Error::Precondition(format!("clique size {k} below observation order {j}")));
            }
            candidates.extend(KSubsets::new(n, k));
        }
        Self::build(n, j, candidates, DictionaryScope::Full)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn scope(&self) -> DictionaryScope {
        self.scope
    }

    pub fn candidates(&self) -> &[KSet] {
        &self.candidates
    }

    pub fn position(&self, clique: &KSet) -> Option<usize> {
        self.index.get(clique).copied()
    }

    /// Row index of a `j`-set.
    pub fn row_of(&self, sigma: &KSet) -> Result<usize> {
        if sigma.len() != self.j {
            return Err(Error::Dimension { expected: self.j, got: sigma.len() });
        }
        Ok(rank_small(sigma.as_slice()))
    }

    /// The `j`-set of a row index.
    pub fn row_set(&self, row: usize) -> KSet {
        crate::combinat::unrank_kset(row as u64, self.j).expect("row index fits")
    }

    /// Entry `(sigma, tau)` of the dictionary.
    pub fn column_entry(&self, sigma: &KSet, tau: &KSet) -> Result<f64> {
        if sigma.len() != self.j {
            return Err(Error::Dimension { expected: self.j, got: sigma.len() });
        }
        if tau.len() < self.j {
            return Ok(0.0);
        }
        Ok(if sigma.is_subset_of(tau) { column_scale(tau.len(), self.j) } else { 0.0 })
    }

    /// `A x` for a sparse signal (cliques need not be candidates).
    pub fn apply(&self, x: &SparseSignal) -> Vec<f64> {
        let mut out = vec![0.0; self.row_count];
        for (tau, w) in x.iter() {
            let v = w * column_scale(tau.len(), self.j);
            tau.for_each_subset_rank(self.j, |r| out[r] += v);
        }
        out
    }

    /// `A x` for coefficients indexed like the candidate list.
    pub fn apply_coefficients(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.candidates.len() {
            return Err(Error::Dimension { expected: self.candidates.len(), got: coeffs.len() });
        }
        let mut out = vec![0.0; self.row_count];
        for (tau, &w) in self.candidates.iter().zip(coeffs) {
            if w != 0.0 {
                let v = w * column_scale(tau.len(), self.j);
                tau.for_each_subset_rank(self.j, |r| out[r] += v);
            }
        }
        Ok(out)
    }

    /// `A^* y`, one value per candidate.
    pub fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.row_count {
            return Err(Error::Dimension { expected: self.row_count, got: y.len() });
        }
        Ok(self.candidates.iter().map(|tau| column_dot(tau, self.j, y)).collect())
    }

    /// The dense `row_count x len` matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.row_count, self.candidates.len());
        for (c, tau) in self.candidates.iter().enumerate() {
            let v = column_scale(tau.len(), self.j);
            tau.for_each_subset_rank(self.j, |r| m[(r, c)] = v);
        }
        m
    }

    /// Signal with the given coefficients per candidate; zeros are dropped.
    pub fn signal_from_coefficients(&self, coeffs: &[f64]) -> SparseSignal {
        SparseSignal::from_entries(
            self.candidates.iter().zip(coeffs).map(|(k, &w)| (k.clone(), w)),
        )
    }
}

/// `<A_tau, y>` for a single clique against a row vector.
pub fn column_dot(tau: &KSet, j: usize, y: &[f64]) -> f64 {
    let mut acc = 0.0;
    tau.for_each_subset_rank(j, |r| acc += y[r]);
    acc * column_scale(tau.len(), j)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ks(v: &[usize]) -> KSet {
        KSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn column_entries() {
        let d = CliqueDictionary::enumerate_full(10, 2, 5).unwrap();
        let tau = ks(&[0, 1, 2, 3, 4]);
        let e = d.column_entry(&ks(&[0, 1]), &tau).unwrap();
        assert!((e - 1.0 / 10f64.sqrt()).abs() < 1e-15);
        assert!((e - 0.316228).abs() < 1e-6);
        assert_eq!(d.column_entry(&ks(&[5, 6]), &tau).unwrap(), 0.0);
        assert!(matches!(d.column_entry(&ks(&[0, 1, 2]), &tau), Err(Error::Dimension { .. })));

        let d3 = CliqueDictionary::enumerate_full(5, 3, 3).unwrap();
        assert_eq!(d3.column_entry(&ks(&[0, 1, 2]), &ks(&[0, 1, 2])).unwrap(), 1.0);
    }

    #[test]
    fn enumerate_sizes() {
        let d = CliqueDictionary::enumerate_full(10, 2, 5).unwrap();
        assert_eq!((d.row_count(), d.len()), (45, 252));
        let d = CliqueDictionary::enumerate_full(5, 2, 5).unwrap();
        assert_eq!(d.len(), 1);
        let d = CliqueDictionary::enumerate_full(6, 2, 3).unwrap();
        assert_eq!((d.row_count(), d.len()), (15, 20));
        assert_eq!(d.scope(), DictionaryScope::Full);
    }

    #[test]
    fn cap_refusal() {
        let err = CliqueDictionary::enumerate_full_sizes(30, 2, 10..=10, 1000).unwrap_err();
        assert!(matches!(err, Error::EnumerationCap { count: 30045015, cap: 1000 }));
        assert!(CliqueDictionary::enumerate_full(60, 2, 30).is_err());
    }

    #[test]
    fn gram_examples() {
        let a = ks(&[0, 1, 2, 3, 4]);
        assert!((gram_entry(&a, &a, 2) - 1.0).abs() < 1e-15);
        let b = ks(&[2, 3, 4, 5, 6]);
        assert!((gram_entry(&a, &b, 2) - 0.3).abs() < 1e-15);
        assert_eq!(gram_entry(&a, &ks(&[5, 6, 7, 8, 9]), 2), 0.0);
        // mixed sizes: C(2,2)/sqrt(C(3,2) C(4,2))
        let g = gram_entry(&ks(&[0, 1, 2]), &ks(&[1, 2, 5, 6]), 2);
        assert!((g - 1.0 / 18f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn basketball_apply() {
        let d = CliqueDictionary::enumerate_full(10, 2, 5).unwrap();
        let x = SparseSignal::from_entries([(KSet::range(0, 5), 1.0), (KSet::range(5, 5), 1.0)]);
        let b = d.apply(&x);
        let dense = d.to_dense();
        let mut coeffs = vec![0.0; d.len()];
        coeffs[d.position(&KSet::range(0, 5)).unwrap()] = 1.0;
        coeffs[d.position(&KSet::range(5, 5)).unwrap()] = 1.0;
        let oracle = &dense * nalgebra::DVector::from_vec(coeffs);
        let mut intra = 0;
        for r in 0..45 {
            assert!((b[r] - oracle[r]).abs() < 1e-15);
            let s = d.row_set(r);
            let same_team = s.as_slice().iter().all(|&v| v < 5) || s.as_slice().iter().all(|&v| v >= 5);
            if same_team {
                intra += 1;
                assert!((b[r] - 1.0 / 10f64.sqrt()).abs() < 1e-15);
            } else {
                assert_eq!(b[r], 0.0);
            }
        }
        assert_eq!(intra, 20);
    }

    #[test]
    fn unnormalized_single_column_is_indicator() {
        let d = CliqueDictionary::new(6, 2, vec![ks(&[1, 3, 4])]).unwrap();
        let x = SparseSignal::from_entries([(ks(&[1, 3, 4]), 3f64.sqrt())]);
        let b = d.apply(&x);
        for (r, v) in b.iter().enumerate() {
            let inside = d.row_set(r).is_subset_of(&ks(&[1, 3, 4]));
            assert!((v - if inside { 1.0 } else { 0.0 }).abs() < 1e-15);
        }
        assert!(d.apply(&SparseSignal::new()).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn adjoint_of_own_column_is_one() {
        let d = CliqueDictionary::enumerate_full(7, 2, 4).unwrap();
        let tau = ks(&[0, 2, 5, 6]);
        let col = d.apply(&SparseSignal::from_entries([(tau.clone(), 1.0)]));
        let adj = d.apply_adjoint(&col).unwrap();
        assert!((adj[d.position(&tau).unwrap()] - 1.0).abs() < 1e-15);
        assert!(adj.iter().all(|&v| v <= 1.0 + 1e-15));
        assert!(matches!(d.apply_adjoint(&[0.0; 3]), Err(Error::Dimension { .. })));
        assert!(d.apply_adjoint(&[0.0; 21]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn candidate_validation() {
        assert!(CliqueDictionary::new(5, 2, vec![ks(&[1])]).is_err());
        assert!(CliqueDictionary::new(5, 2, vec![ks(&[1, 7])]).is_err());
        assert!(CliqueDictionary::new(5, 2, vec![ks(&[1, 2]), ks(&[2, 1])]).is_err());
    }

    #[test]
    fn incidence_unit_round_trip() {
        let x = SparseSignal::from_entries([(KSet::range(0, 5), 10f64.sqrt())]);
        let raw = x.to_incidence_units(2);
        assert!((raw.get(&KSet::range(0, 5)) - 1.0).abs() < 1e-15);
        let back = SparseSignal::from_incidence_units(&raw, 2);
        assert!(back.l1_distance(&x) < 1e-14);
    }
}
