//! Basis pursuit over a clique dictionary.
//!
//! `P1`: `min ||x||_1  s.t.  A x = b`, and the bounded-noise form
//! `min ||x||_1  s.t.  ||A x - b||_inf <= delta`, both embedded as linear
//! programs through the split `x = x+ - x-`. The dual of the noisy form is
//! `max -delta ||g||_1 - b^T g  s.t.  ||A^* g||_inf <= 1`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::combinat::KSet;
use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpSolution, LpStatus, Tolerances, WarmStart};
use crate::radon::{CliqueDictionary, SparseSignal};

/// Default relative support threshold.
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BpResult {
    pub signal: SparseSignal,
    /// `||x||_1` of the returned signal.
    pub objective: f64,
    /// `||A x - b||_inf`.
    pub residual_inf: f64,
    /// Certified lower bound from the dual multipliers, rescaled to exact feasibility.
    pub dual_value: f64,
    pub gap: f64,
    /// Dual vector over the `j`-sets.
    pub gamma: Vec<f64>,
    pub status: LpStatus,
    pub iterations: usize,
    pub delta: f64,
}

/// Signed-split coefficients `[x+; x-]` for the warm start of the next solve.
#[derive(Debug, Clone)]
pub struct BpWarmStart(WarmStart);

fn check_b(dict: &CliqueDictionary, b: &[f64]) -> Result<()> {
    if b.len() != dict.row_count() {
        return Err(Error::Dimension { expected: dict.row_count(), got: b.len() });
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("observation vector contains non-finite values".into()));
    }
    Ok(())
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, &x| a.max(x.abs()))
}

/// Lower bound `-delta ||g||_1 - b^T g` after scaling `g` into `||A^* g||_inf <= 1`.
pub fn certified_dual_value(dict: &CliqueDictionary, b: &[f64], delta: f64, gamma: &[f64]) -> Result<f64> {
    check_b(dict, b)?;
    if gamma.len() != b.len() {
        return Err(Error::Dimension { expected: b.len(), got: gamma.len() });
    }
    let corr = inf_norm(&dict.apply_adjoint(gamma)?);
    let scale = if corr > 1.0 { 1.0 / corr } else { 1.0 };
    let l1: f64 = gamma.iter().map(|g| g.abs()).sum();
    let bg: f64 = b.iter().zip(gamma).map(|(x, y)| x * y).sum();
    Ok(scale * (-delta * l1 - bg))
}

fn zero_result(dict: &CliqueDictionary, b: &[f64], delta: f64) -> BpResult {
    BpResult {
        signal: SparseSignal::new(),
        objective: 0.0,
        residual_inf: inf_norm(b),
        dual_value: 0.0,
        gap: 0.0,
        gamma: vec![0.0; dict.row_count()],
        status: LpStatus::Optimal,
        iterations: 0,
        delta,
    }
}

fn split_matrix(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let mut out = DMatrix::zeros(m, 2 * n);
    out.view_mut((0, 0), (m, n)).copy_from(a);
    out.view_mut((0, n), (m, n)).copy_from(&(-a));
    out
}

/// The LP for `P1` (`delta = 0`) or the noisy program.
///
/// Variables are `[x+; x-]`, plus for `delta > 0` a residual `r` with
/// `A x+ - A x- - r = b` and the two-sided bound `-delta <= r <= delta`.
pub fn build_primal(dict: &CliqueDictionary, b: &[f64], delta: f64) -> Result<LinearProgram> {
    check_b(dict, b)?;
    if !(delta >= 0.0) {
        return Err(Error::Precondition(format!("delta must be nonnegative, got {delta}")));
    }
    Ok(l1_fit_program(&dict.to_dense(), b, delta))
}

/// [`build_primal`] for an explicit matrix.
pub(crate) fn l1_fit_program(dense: &DMatrix<f64>, b: &[f64], delta: f64) -> LinearProgram {
    let n = dense.ncols();
    let a = split_matrix(dense);
    let bv = DVector::from_column_slice(b);
    if delta == 0.0 {
        return LinearProgram::new(DVector::from_element(2 * n, 1.0))
            .with_equalities(a, bv)
            .nonnegative();
    }
    let m = b.len();
    let mut c = DVector::zeros(2 * n + m);
    c.rows_mut(0, 2 * n).fill(1.0);
    let mut e = DMatrix::zeros(m, 2 * n + m);
    e.view_mut((0, 0), (m, 2 * n)).copy_from(&a);
    let mut g = DMatrix::zeros(2 * m, 2 * n + m);
    for i in 0..m {
        e[(i, 2 * n + i)] = -1.0;
        g[(i, 2 * n + i)] = 1.0;
        g[(m + i, 2 * n + i)] = -1.0;
    }
    let mut bounds = vec![Some(0.0); 2 * n];
    bounds.extend(std::iter::repeat_n(None, m));
    LinearProgram::new(c)
        .with_equalities(e, bv)
        .with_inequalities(g, DVector::from_element(2 * m, delta))
        .with_lower_bounds(bounds)
}

/// The dual program in minimization form over `g = u - v`, `u, v >= 0`:
/// `min delta 1^T(u+v) + b^T(u-v)  s.t.  A^T(u-v) <= 1, -A^T(u-v) <= 1`.
/// Its optimal value is the negated dual optimum.
pub fn build_dual(dict: &CliqueDictionary, b: &[f64], delta: f64) -> Result<LinearProgram> {
    check_b(dict, b)?;
    if !(delta >= 0.0) {
        return Err(Error::Precondition(format!("delta must be nonnegative, got {delta}")));
    }
    let m = b.len();
    let n = dict.len();
    let at = split_matrix(&dict.to_dense().transpose());
    let mut g = DMatrix::zeros(2 * n, 2 * m);
    g.view_mut((0, 0), (n, 2 * m)).copy_from(&at);
    g.view_mut((n, 0), (n, 2 * m)).copy_from(&(-&at));
    let mut c = DVector::zeros(2 * m);
    for i in 0..m {
        c[i] = delta + b[i];
        c[m + i] = delta - b[i];
    }
    Ok(LinearProgram::new(c)
        .with_inequalities(g, DVector::from_element(2 * n, 1.0))
        .nonnegative())
}

/// `g = u - v` from a solution of [`build_dual`].
pub fn dual_vector(sol: &LpSolution) -> Vec<f64> {
    let m = sol.primal.len() / 2;
    (0..m).map(|i| sol.primal[i] - sol.primal[m + i]).collect()
}

fn finish(dict: &CliqueDictionary, b: &[f64], delta: f64, sol: &LpSolution) -> Result<BpResult> {
    let n = dict.len();
    let bscale = 1.0 + inf_norm(b);
    let coeffs: Vec<f64> = (0..n)
        .map(|i| {
            let v = sol.primal[i] - sol.primal[n + i];
            if v.abs() <= 1e-13 * bscale {
                0.0
            } else {
                v
            }
        })
        .collect();
    let signal = dict.signal_from_coefficients(&coeffs);
    let ax = dict.apply_coefficients(&coeffs)?;
    let residual_inf = inf_norm(&ax.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>());
    let gamma: Vec<f64> = sol.dual_eq.iter().copied().collect();
    let dual_value = certified_dual_value(dict, b, delta, &gamma)?;
    let objective = signal.l1_norm();
    Ok(BpResult {
        signal,
        objective,
        residual_inf,
        dual_value,
        gap: objective - dual_value,
        gamma,
        status: sol.status,
        iterations: sol.iterations,
        delta,
    })
}

fn solve_inner(
    dict: &CliqueDictionary,
    b: &[f64],
    delta: f64,
    tol: &Tolerances,
    warm: Option<&BpWarmStart>,
) -> Result<(BpResult, Option<BpWarmStart>)> {
    check_b(dict, b)?;
    if !(delta >= 0.0) {
        return Err(Error::Precondition(format!("delta must be nonnegative, got {delta}")));
    }
    if inf_norm(b) <= delta {
        return Ok((zero_result(dict, b, delta), None));
    }
    let lp = build_primal(dict, b, delta)?;
    let sol = match warm {
        Some(w) if delta > 0.0 && w.0.x.len() == lp.num_vars() => lp::solve_warm(&lp, tol, &w.0)?,
        _ => lp::solve(&lp, tol)?,
    };
    if sol.status != LpStatus::Optimal {
        log::warn!("basis pursuit LP ended with status {:?}", sol.status);
    }
    let res = finish(dict, b, delta, &sol)?;
    let warm = (sol.status == LpStatus::Optimal).then(|| BpWarmStart(sol.warm_start()));
    Ok((res, warm))
}

/// `min ||x||_1  s.t.  A x = b`.
pub fn solve_p1(dict: &CliqueDictionary, b: &[f64]) -> Result<BpResult> {
    solve_p1_with(dict, b, &Tolerances::default())
}

pub fn solve_p1_with(dict: &CliqueDictionary, b: &[f64], tol: &Tolerances) -> Result<BpResult> {
    Ok(solve_inner(dict, b, 0.0, tol, None)?.0)
}

/// `min ||x||_1  s.t.  ||A x - b||_inf <= delta`.
pub fn solve_p1_delta(dict: &CliqueDictionary, b: &[f64], delta: f64) -> Result<BpResult> {
    solve_p1_delta_with(dict, b, delta, &Tolerances::default())
}

pub fn solve_p1_delta_with(dict: &CliqueDictionary, b: &[f64], delta: f64, tol: &Tolerances) -> Result<BpResult> {
    Ok(solve_inner(dict, b, delta, tol, None)?.0)
}

/// Entries with `|w| > threshold * max|w|`, largest first, ties by colex order.
pub fn support(result: &BpResult, threshold: f64) -> Vec<(KSet, f64)> {
    support_of(&result.signal, threshold)
}

pub fn support_of(signal: &SparseSignal, threshold: f64) -> Vec<(KSet, f64)> {
    let cut = threshold.max(0.0) * signal.max_abs();
    let mut out: Vec<(KSet, f64)> = signal
        .iter()
        .filter(|(_, w)| w.abs() > cut)
        .map(|(k, w)| (k.clone(), w))
        .collect();
    out.sort_by(|a, b| {
        b.1.abs().partial_cmp(&a.1.abs()).unwrap_or(Ordering::Equal).then_with(|| a.0.colex_cmp(&b.0))
    });
    out
}

/// How the grid points of a regularization path are solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathMode {
    /// In order, each solve warm-started from the previous one.
    #[default]
    Sequential,
    /// Independent cold starts on scoped threads.
    Parallel,
}

/// One `P1delta` solve per grid point.
pub fn regularization_path(
    dict: &CliqueDictionary,
    b: &[f64],
    deltas: &[f64],
    mode: PathMode,
) -> Result<Vec<(f64, BpResult)>> {
    regularization_path_with(dict, b, deltas, mode, &Tolerances::default())
}

pub fn regularization_path_with(
    dict: &CliqueDictionary,
    b: &[f64],
    deltas: &[f64],
    mode: PathMode,
    tol: &Tolerances,
) -> Result<Vec<(f64, BpResult)>> {
    if deltas.is_empty() {
        return Err(Error::Precondition("delta grid is empty".into()));
    }
    if deltas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Precondition("delta grid must be strictly ascending".into()));
    }
    if deltas[0] < 0.0 {
        return Err(Error::Precondition("delta grid must be nonnegative".into()));
    }
    match mode {
        PathMode::Sequential => {
            let mut out = Vec::with_capacity(deltas.len());
            let mut warm: Option<BpWarmStart> = None;
            for &d in deltas {
                let (res, next) = solve_inner(dict, b, d, tol, warm.as_ref())?;
                warm = next;
                out.push((d, res));
            }
            Ok(out)
        }
        PathMode::Parallel => std::thread::scope(|scope| {
            let handles: Vec<_> = deltas
                .iter()
                .map(|&d| scope.spawn(move || solve_inner(dict, b, d, tol, None).map(|r| (d, r.0))))
                .collect();
            handles.into_iter().map(|h| h.join().expect("path worker panicked")).collect()
        }),
    }
}

/// Moves an optimal signal of the noisy program to a vertex of the optimal
/// face.
///
/// Interior-point solutions sit in the relative interior of the optimal set
/// and spread weight over every optimal column when the optimum is not
/// unique. This walks along directions that keep `A x` on the active rows,
/// the signs of `x` and hence `||x||_1` fixed, until a coefficient reaches
/// zero or a residual reaches `delta`, and repeats while such directions
/// exist. The objective does not change; the support can only shrink.
pub fn purify_vertex(signal: &SparseSignal, n: usize, j: usize, b: &[f64], delta: f64) -> Result<SparseSignal> {
    let rows = crate::combinat::binom(n as u64, j as u64)? as usize;
    if b.len() != rows {
        return Err(Error::Dimension { expected: rows, got: b.len() });
    }
    let cols: Vec<(KSet, f64)> = signal.iter().filter(|(_, w)| *w != 0.0).map(|(k, w)| (k.clone(), w)).collect();
    if cols.is_empty() {
        return Ok(SparseSignal::new());
    }
    let mut local = std::collections::HashMap::new();
    let mut touched = Vec::new();
    for (k, _) in &cols {
        if k.len() < j || k.max_element().is_some_and(|m| m >= n) {
            return Err(Error::InvalidKSet(format!("clique {k} does not fit n={n}, j={j}")));
        }
        k.for_each_subset_rank(j, |r| {
            local.entry(r).or_insert_with(|| {
                touched.push(r);
                touched.len() - 1
            });
        });
    }
    let m = touched.len();
    let mut a = DMatrix::zeros(m, cols.len());
    for (c, (k, _)) in cols.iter().enumerate() {
        let v = crate::radon::column_scale(k.len(), j);
        k.for_each_subset_rank(j, |r| a[(local[&r], c)] = v);
    }
    let bl = DVector::from_iterator(m, touched.iter().map(|&r| b[r]));
    let scale = 1.0 + inf_norm(b);
    let mut x = DVector::from_iterator(cols.len(), cols.iter().map(|(_, w)| *w));
    let mut alive: Vec<usize> = (0..cols.len()).collect();
    let mut active: Vec<bool> = vec![false; m];
    for _ in 0..(cols.len() + m + 1) {
        alive.retain(|&c| x[c].abs() > 1e-12 * scale);
        let r = &a * &x - &bl;
        for i in 0..m {
            active[i] = active[i] || r[i].abs() >= delta - 1e-9 * scale;
        }
        let act: Vec<usize> = (0..m).filter(|&i| active[i]).collect();
        let s = alive.len();
        if s == 0 {
            break;
        }
        let nrows = (act.len() + 1).max(s);
        let mut mat = DMatrix::zeros(nrows, s);
        for (ri, &i) in act.iter().enumerate() {
            for (ci, &c) in alive.iter().enumerate() {
                mat[(ri, ci)] = a[(i, c)];
            }
        }
        for (ci, &c) in alive.iter().enumerate() {
            mat[(act.len(), ci)] = x[c].signum();
        }
        let svd = mat.svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let (imin, smin) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        let smax = svd.singular_values.max();
        if smin > 1e-9 * smax.max(1e-300) {
            break;
        }
        let d_s = v_t.row(imin).transpose();
        let mut d = DVector::zeros(cols.len());
        for (ci, &c) in alive.iter().enumerate() {
            d[c] = d_s[ci];
        }
        let g = &a * &d;
        // longest step keeping signs and the free residuals in range
        let mut t = f64::INFINITY;
        let mut block = None;
        for &c in &alive {
            if d[c] * x[c].signum() < 0.0 {
                let tc = x[c].abs() / d[c].abs();
                if tc < t {
                    t = tc;
                    block = Some((true, c));
                }
            }
        }
        for i in (0..m).filter(|&i| !active[i]) {
            let ti = if g[i] > 1e-14 {
                (delta - r[i]) / g[i]
            } else if g[i] < -1e-14 {
                (-delta - r[i]) / g[i]
            } else {
                continue;
            };
            if ti.max(0.0) < t {
                t = ti.max(0.0);
                block = Some((false, i));
            }
        }
        let Some((is_col, idx)) = block else { break };
        x.axpy(t, &d, 1.0);
        if is_col {
            x[idx] = 0.0;
        } else {
            active[idx] = true;
        }
    }
    Ok(SparseSignal::from_entries(
        cols.iter().zip(x.iter()).filter(|(_, v)| v.abs() > 1e-12 * scale).map(|((k, _), v)| (k.clone(), *v)),
    ))
}
