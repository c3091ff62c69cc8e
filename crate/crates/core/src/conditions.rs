//! Checkable recovery conditions for a clique support `T`.
//!
//! The irrepresentable norm `||A*_{T^c} A_T (A*_T A_T)^{-1}||_inf`, dual
//! certificates, the rank-deficient family that defeats restricted isometry,
//! the overlap and partition guarantees, and the stable-recovery bound.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::combinat::{binom, KSet, KSubsets};
use crate::error::{Error, Result};
use crate::radon::{column_dot, column_scale, gram_entry, CliqueDictionary, DictionaryScope};

/// Grams with reciprocal condition below this are treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IrrReport {
    pub support: Vec<KSet>,
    pub gram_invertible: bool,
    pub gram_rcond: f64,
    pub irr_norm: f64,
    pub holds: bool,
    pub complement_scope: DictionaryScope,
    pub complement_size: usize,
    /// Complement clique attaining the norm.
    pub worst_complement: Option<KSet>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualCertificate {
    /// Values over the `j`-sets.
    pub w: Vec<f64>,
    pub valid: bool,
    /// `max_{tau in T} |<A_tau, w> - sign_tau|`.
    pub support_error: f64,
    /// `max_{tau in T^c} |<A_tau, w>|`.
    pub max_complement: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RipCounterexample {
    pub support: Vec<KSet>,
    /// Coefficients over `support` with `A_T h = 0`.
    pub kernel: Vec<f64>,
    pub rank: usize,
    /// Number of `j`-sets touched by the support.
    pub nonzero_rows: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapVerdict {
    Guaranteed,
    Boundary,
    MayFail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub holds: bool,
    /// `(K-1) C(r,j) / C(k,j)`, required `< 1/4`.
    pub first: f64,
    /// `(C(k-1,j) + (K-1) C(floor((k+r)/2), j)) / C(k,j)`, required `<= 3/4`.
    pub second: f64,
    /// True when `k + r` is odd and the midpoint was floored.
    pub floored: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableBound {
    pub s: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub column_factor: f64,
    pub bound: f64,
}

/// Which overlap family [`overlap_construction`] builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapFamily {
    /// Pairwise overlaps exactly `j-1`; the norm reaches 1.
    Tight,
    /// One pair overlapping in `j` nodes; the norm exceeds 1.
    Excess,
}

/// Gram matrix `A*_T A_T` from the closed-form entries.
pub fn gram(support: &[KSet], j: usize) -> DMatrix<f64> {
    let t = support.len();
    DMatrix::from_fn(t, t, |a, b| gram_entry(&support[a], &support[b], j))
}

fn rcond(g: &DMatrix<f64>) -> f64 {
    if g.is_empty() {
        return 1.0;
    }
    let sv = g.clone().singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

fn check_support(support: &[KSet], j: usize) -> Result<()> {
    if support.is_empty() {
        return Err(Error::Precondition("support is empty".into()));
    }
    for (i, t) in support.iter().enumerate() {
        if t.len() < j {
            return Err(Error::InvalidKSet(format!("clique {t} smaller than j = {j}")));
        }
        if support[..i].contains(t) {
            return Err(Error::InvalidKSet(format!("duplicate clique {t} in support")));
        }
    }
    Ok(())
}

/// Irrepresentable norm over the dictionary's candidates outside `support`.
pub fn irr_norm(dict: &CliqueDictionary, support: &[KSet]) -> Result<IrrReport> {
    let j = dict.j();
    check_support(support, j)?;
    for t in support {
        if dict.position(t).is_none() {
            return Err(Error::InvalidKSet(format!("support clique {t} is not a dictionary candidate")));
        }
    }
    let g = gram(support, j);
    let rc = rcond(&g);
    let mut report = IrrReport {
        support: support.to_vec(),
        gram_invertible: rc >= SINGULAR_RCOND,
        gram_rcond: rc,
        irr_norm: f64::INFINITY,
        holds: false,
        complement_scope: dict.scope(),
        complement_size: dict.len() - support.len(),
        worst_complement: None,
    };
    if !report.gram_invertible {
        return Ok(report);
    }
    let lu = g.lu();
    let mut best = 0.0f64;
    let mut worst = None;
    for tau in dict.candidates() {
        if support.contains(tau) {
            continue;
        }
        let row = DVector::from_iterator(support.len(), support.iter().map(|t| gram_entry(tau, t, j)));
        if row.iter().all(|&v| v == 0.0) {
            continue;
        }
        let sol = lu.solve(&row).ok_or(Error::SingularGram { rcond: rc })?;
        let norm = sol.lp_norm(1);
        if norm > best {
            best = norm;
            worst = Some(tau.clone());
        }
    }
    report.irr_norm = best;
    report.holds = best < 1.0;
    report.worst_complement = worst;
    Ok(report)
}

/// `w = A_T (A*_T A_T)^{-1} signs`, checked on the support and the complement.
pub fn dual_certificate(dict: &CliqueDictionary, support: &[KSet], signs: &[f64]) -> Result<DualCertificate> {
    let j = dict.j();
    check_support(support, j)?;
    if signs.len() != support.len() {
        return Err(Error::Dimension { expected: support.len(), got: signs.len() });
    }
    let g = gram(support, j);
    let rc = rcond(&g);
    if rc < SINGULAR_RCOND {
        return Err(Error::SingularGram { rcond: rc });
    }
    let coef = g.lu().solve(&DVector::from_column_slice(signs)).ok_or(Error::SingularGram { rcond: rc })?;
    let mut w = vec![0.0; dict.row_count()];
    for (t, &c) in support.iter().zip(coef.iter()) {
        let v = c * column_scale(t.len(), j);
        t.for_each_subset_rank(j, |r| w[r] += v);
    }
    let support_error = support
        .iter()
        .zip(signs)
        .map(|(t, s)| (column_dot(t, j, &w) - s).abs())
        .fold(0.0, f64::max);
    let max_complement = dict
        .candidates()
        .iter()
        .filter(|t| !support.contains(t))
        .map(|t| column_dot(t, j, &w).abs())
        .fold(0.0, f64::max);
    let valid = support_error <= 1e-9 && max_complement < 1.0;
    Ok(DualCertificate { w, valid, support_error, max_complement })
}

/// All `k`-subsets of `{0..k+j}` together with a kernel vector of `A_T`.
pub fn rip_counterexample(n: usize, j: usize, k: usize) -> Result<RipCounterexample> {
    if !(j >= 1 && j < k && n > k + j + 1) {
        return Err(Error::Precondition(format!("need 1 <= j < k and n > k + j + 1, got n={n}, j={j}, k={k}")));
    }
    let support: Vec<KSet> = KSubsets::new(k + j + 1, k).collect();
    let dict = CliqueDictionary::new(n, j, support.clone())?;
    let a = dict.to_dense();
    let nonzero_rows = (0..a.nrows()).filter(|&r| a.row(r).iter().any(|&v| v != 0.0)).count();
    let size = a.nrows().max(a.ncols());
    let mut square = DMatrix::zeros(size, a.ncols());
    square.view_mut((0, 0), a.shape()).copy_from(&a);
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = &svd.singular_values;
    let tol = sv.max() * size as f64 * f64::EPSILON;
    let rank = sv.iter().filter(|&&s| s > tol).count();
    let (idx, _) = sv.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let h = v_t.row(idx).transpose();
    let scale = h.amax();
    let kernel: Vec<f64> = h.iter().map(|v| v / scale).collect();
    Ok(RipCounterexample { support, kernel, rank, nonzero_rows })
}

/// Verdict from the largest pairwise overlap `r` among same-size cliques.
pub fn worst_case_guarantee(j: usize, k: usize, r: usize) -> Result<OverlapVerdict> {
    if !(2 <= j && j < k && r < k) {
        return Err(Error::Precondition(format!("need 2 <= j < k and r < k, got j={j}, k={k}, r={r}")));
    }
    Ok(if r + 2 <= j {
        OverlapVerdict::Guaranteed
    } else if r + 1 == j {
        OverlapVerdict::Boundary
    } else {
        OverlapVerdict::MayFail
    })
}

fn binom_u128(a: usize, b: usize) -> Result<u128> {
    Ok(u128::from(binom(a as u64, b as u64)?))
}

/// Guarantee for supports that split into `parts` groups of mutually
/// `r`-overlapping cliques, in exact integer arithmetic.
pub fn partition_guarantee(j: usize, k: usize, r: usize, parts: usize) -> Result<PartitionReport> {
    if !(k < 2 * j && j < k) {
        return Err(Error::Precondition(format!("need (k+1)/2 <= j < k, got j={j}, k={k}")));
    }
    if parts == 0 || r >= k {
        return Err(Error::Precondition(format!("need parts >= 1 and r < k, got parts={parts}, r={r}")));
    }
    let ckj = binom_u128(k, j)?;
    let kk = (parts - 1) as u128;
    let first_num = kk * binom_u128(r, j)?;
    let mid = (k + r) / 2;
    let second_num = binom_u128(k - 1, j)? + kk * binom_u128(mid, j)?;
    let holds = 4 * first_num < ckj && 4 * second_num <= 3 * ckj;
    Ok(PartitionReport {
        holds,
        first: first_num as f64 / ckj as f64,
        second: second_num as f64 / ckj as f64,
        floored: (k + r) % 2 == 1,
    })
}

/// Largest overlap `r` with `r <= (1/(t(1+sqrt t)))^{1/j} k` for a support of size `t`.
pub fn restricted_guarantee(j: usize, k: usize, t: usize) -> Result<usize> {
    if t == 0 || j == 0 {
        return Err(Error::Precondition("need t >= 1 and j >= 1".into()));
    }
    let tf = t as f64;
    let factor = (1.0 / (tf * (1.0 + tf.sqrt()))).powf(1.0 / j as f64);
    Ok((factor * k as f64).floor() as usize)
}

/// `2 s (epsilon + delta) column_factor / (1 - alpha s)`.
pub fn stable_bound(s: usize, alpha: f64, epsilon: f64, delta: f64, column_factor: f64) -> Result<StableBound> {
    if [alpha, epsilon, delta, column_factor].iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::Precondition("stable bound inputs must be finite and nonnegative".into()));
    }
    let as_ = alpha * s as f64;
    if as_ >= 1.0 {
        return Err(Error::Hypothesis(format!("alpha * s = {as_} is not below 1")));
    }
    let bound = 2.0 * s as f64 * (epsilon + delta) * column_factor / (1.0 - as_);
    Ok(StableBound { s, alpha, epsilon, delta, column_factor, bound })
}

/// `||A_T (A*_T A_T)^{-1}||_1`, the largest column 1-norm.
pub fn column_factor(n: usize, j: usize, support: &[KSet]) -> Result<f64> {
    check_support(support, j)?;
    let g = gram(support, j);
    let rc = rcond(&g);
    if rc < SINGULAR_RCOND {
        return Err(Error::SingularGram { rcond: rc });
    }
    let inv = g.try_inverse().ok_or(Error::SingularGram { rcond: rc })?;
    let rows = binom(n as u64, j as u64)? as usize;
    let mut best = 0.0f64;
    let mut col = vec![0.0; rows];
    for i in 0..support.len() {
        col.iter_mut().for_each(|v| *v = 0.0);
        for (l, t) in support.iter().enumerate() {
            let v = inv[(l, i)] * column_scale(t.len(), j);
            if v != 0.0 {
                t.for_each_subset_rank(j, |r| col[r] += v);
            }
        }
        best = best.max(col.iter().map(|v| v.abs()).sum());
    }
    Ok(best)
}

/// True when the cliques are pairwise disjoint.
pub fn mixed_size_guarantee(support: &[KSet]) -> bool {
    let mut seen = std::collections::HashSet::new();
    support.iter().flat_map(|t| t.as_slice()).all(|&v| seen.insert(v))
}

/// Largest pairwise overlap in a support.
pub fn max_overlap(support: &[KSet]) -> usize {
    let mut best = 0;
    for (i, a) in support.iter().enumerate() {
        for b in &support[i + 1..] {
            best = best.max(crate::combinat::intersection_size(a, b));
        }
    }
    best
}

/// Support families on which the irrepresentable norm is 1 or exceeds 1.
///
/// Each `j`-subset `rho_i` of `{0..k-1}` is completed to a `k`-clique with a
/// block of `k-j` fresh nodes, so distinct cliques share at most `j-1` nodes.
/// The excess family adds a second completion of `rho_0`, giving one pair that
/// shares exactly `j` nodes. Returns the node count and the support.
pub fn overlap_construction(j: usize, k: usize, family: OverlapFamily) -> Result<(usize, Vec<KSet>)> {
    if !(1 <= j && j < k) {
        return Err(Error::Precondition(format!("need 1 <= j < k, got j={j}, k={k}")));
    }
    let rhos: Vec<KSet> = KSubsets::new(k, j).collect();
    let block = k - j;
    let mut support = Vec::with_capacity(rhos.len() + 1);
    let mut next = k;
    let mut complete = |rho: &KSet| {
        let mut nodes = rho.as_slice().to_vec();
        nodes.extend(next..next + block);
        next += block;
        KSet::new(nodes).expect("fresh nodes are distinct")
    };
    if family == OverlapFamily::Excess {
        support.push(complete(&rhos[0]));
    }
    for rho in &rhos {
        support.push(complete(rho));
    }
    Ok((next, support))
}
