//! Column generation for the noisy program over every clique of size
//! `j..=kmax`, without enumerating the dictionary.
//!
//! The working set starts with the `j`-set columns (the identity block) and
//! grows one priced clique at a time. Rows that no added clique touches only
//! see their own identity column, so their part of the relaxation is solved
//! in closed form (soft thresholding). The remaining coupled rows form a
//! small dense program that is advanced by the interior-point engine.

mod oracle;

use std::collections::HashSet;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bp::l1_fit_program;
use crate::combinat::{binom, KSet};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpSolution, LpStatus, Solver, Tolerances, WarmStart};
use crate::radon::{column_dot, column_scale, SparseSignal, DEFAULT_ENUMERATION_CAP};

pub use oracle::{
    exhaustive_max_correlation, find_violated_column, greedy_max_weight_clique, price, JsetWeights, Pricing,
    PricingOutcome, VIOL_TOL,
};

/// Discount applied to the dual iterate when only the greedy oracle vouches
/// for its feasibility.
pub const GREEDY_APPROX_FACTOR: f64 = 0.94;

/// Stopping limits and solver knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColgenLimits {
    /// Target gap of the relaxation.
    pub eta: f64,
    /// Outer iterations: each either adds a column or advances the iterate.
    pub max_iters: usize,
    pub max_oracle_calls: usize,
    pub viol_tol: f64,
    pub pricing: Pricing,
    /// Interior-point steps between oracle calls; `None` re-solves the
    /// relaxation to optimality before each call.
    pub steps_per_cut: Option<usize>,
    /// Cap on enumerated columns in exhaustive pricing.
    pub enumeration_cap: u64,
    /// Violated columns added per pricing call.
    pub columns_per_round: usize,
}

impl Default for ColgenLimits {
    fn default() -> Self {
        Self {
            eta: 1e-6,
            max_iters: 500,
            max_oracle_calls: 10_000,
            viol_tol: VIOL_TOL,
            pricing: Pricing::Greedy,
            steps_per_cut: Some(1),
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            columns_per_round: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColgenStatus {
    /// No violated column found and the relaxation gap is below `eta`.
    Converged,
    IterationLimit,
    OracleLimit,
    /// The relaxation solver stopped without reaching the gap target.
    Stalled,
}

/// One column added to the working set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Addition {
    pub iteration: usize,
    pub clique: KSet,
    pub violation: f64,
}

/// Columns of the relaxation beyond the identity block, in insertion order.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct WorkingSet {
    pub cliques: Vec<KSet>,
    pub history: Vec<Addition>,
    #[serde(skip)]
    members: HashSet<KSet>,
}

impl WorkingSet {
    pub fn contains(&self, clique: &KSet) -> bool {
        self.members.contains(clique) || (self.members.is_empty() && self.cliques.contains(clique))
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    fn push(&mut self, iteration: usize, clique: KSet, violation: f64) {
        self.members.insert(clique.clone());
        self.cliques.push(clique.clone());
        self.history.push(Addition { iteration, clique, violation });
    }
}

/// One line of the diagnostic trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub added: Option<KSet>,
    pub violation: Option<f64>,
    pub primal_objective: f64,
    pub dual_bound: f64,
    pub gap: f64,
}

/// Writes trace records as JSON lines.
pub fn write_trace_jsonl<W: Write>(records: &[TraceRecord], mut w: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColgenResult {
    pub signal: SparseSignal,
    /// Dual iterate over all `j`-sets, feasible for the relaxation.
    pub dual: Vec<f64>,
    /// `||x||_1` of the returned signal.
    pub objective: f64,
    /// Dual objective of `dual` (a lower bound for the relaxation).
    pub relaxation_bound: f64,
    /// `objective - relaxation_bound`; below `eta` on convergence.
    pub gap: f64,
    /// Lower bound for the full program: `relaxation_bound` times
    /// `approx_factor` under greedy pricing, exact under exhaustive pricing.
    pub lower_bound: f64,
    /// 1.0, or 0.94 when the bound relies on the greedy oracle.
    pub approx_factor: f64,
    pub iterations: usize,
    pub oracle_calls: usize,
    pub status: ColgenStatus,
    pub working_set: WorkingSet,
    pub trace: Vec<TraceRecord>,
    pub delta: f64,
}

/// Primal objective minus a dual lower bound.
pub fn duality_gap(primal_objective: f64, dual_value: f64) -> f64 {
    primal_objective - dual_value
}

fn soft_threshold(b: f64, delta: f64) -> f64 {
    b.signum() * (b.abs() - delta).max(0.0)
}

/// Dual value of an uncoupled row: `g = -sign(b)` when `|b| > delta`.
fn closed_dual(b: f64, delta: f64) -> f64 {
    if b.abs() > delta {
        -b.signum()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy)]
enum Column {
    Identity(usize),
    Clique(usize),
}

/// The relaxation restricted to the rows touched by added cliques.
struct Coupled<'a> {
    j: usize,
    b: &'a [f64],
    delta: f64,
    /// Global row -> local row.
    local: Vec<usize>,
    rows: Vec<usize>,
    cols: Vec<Column>,
}

impl Coupled<'_> {
    fn add_clique(&mut self, clique: &KSet, clique_id: usize) {
        let mut fresh = Vec::new();
        clique.for_each_subset_rank(self.j, |r| {
            if self.local[r] == usize::MAX {
                fresh.push(r);
            }
        });
        for r in fresh {
            self.local[r] = self.rows.len();
            self.cols.push(Column::Identity(self.rows.len()));
            self.rows.push(r);
        }
        self.cols.push(Column::Clique(clique_id));
    }

    fn matrix(&self, cliques: &[KSet]) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.rows.len(), self.cols.len());
        for (c, col) in self.cols.iter().enumerate() {
            match *col {
                Column::Identity(r) => a[(r, c)] = 1.0,
                Column::Clique(id) => {
                    let tau = &cliques[id];
                    let v = column_scale(tau.len(), self.j);
                    tau.for_each_subset_rank(self.j, |r| a[(self.local[r], c)] = v);
                }
            }
        }
        a
    }

    fn program(&self, a: &DMatrix<f64>) -> LinearProgram {
        let b: Vec<f64> = self.rows.iter().map(|&r| self.b[r]).collect();
        l1_fit_program(a, &b, self.delta)
    }

    /// Start for the grown program from the previous iterate: new columns
    /// get their closed-form values, new rows their closed-form duals.
    fn warm_start(&self, a: &DMatrix<f64>, prev: Option<&LpSolution>, old_n: usize, old_m: usize) -> WarmStart {
        let (n, m) = (self.cols.len(), self.rows.len());
        let slack = self.delta > 0.0;
        let nv = 2 * n + if slack { m } else { 0 };
        let mut x = DVector::zeros(nv);
        let mut y = DVector::zeros(m);
        let mut zi = DVector::zeros(if slack { 2 * m } else { 0 });
        let mut wb = DVector::zeros(nv);
        for i in 0..m {
            let bi = self.b[self.rows[i]];
            y[i] = match prev {
                Some(p) if i < old_m => p.dual_eq[i],
                _ => closed_dual(bi, self.delta),
            };
            if slack {
                let (r, zu, zl) = match prev {
                    Some(p) if i < old_m => (p.primal[2 * old_n + i], p.dual_ineq[i], p.dual_ineq[old_m + i]),
                    _ => (soft_threshold(bi, self.delta) - bi, y[i].max(0.0), (-y[i]).max(0.0)),
                };
                x[2 * n + i] = r;
                zi[i] = zu;
                zi[m + i] = zl;
            }
        }
        for c in 0..n {
            let (xp, xm, wp, wm) = match prev {
                Some(p) if c < old_n => (p.primal[c], p.primal[old_n + c], p.dual_bounds[c], p.dual_bounds[old_n + c]),
                _ => {
                    let v = match self.cols[c] {
                        Column::Identity(r) => soft_threshold(self.b[self.rows[r]], self.delta),
                        Column::Clique(_) => 0.0,
                    };
                    let aty = a.column(c).dot(&y);
                    (v.max(0.0), (-v).max(0.0), 1.0 + aty, 1.0 - aty)
                }
            };
            x[c] = xp;
            x[n + c] = xm;
            wb[c] = wp;
            wb[n + c] = wm;
        }
        WarmStart { x, dual_ineq: zi, dual_eq: y, dual_bounds: wb, shift: WarmStart::DEFAULT_SHIFT }
    }
}

/// State of the whole relaxation.
struct Relaxation<'a> {
    j: usize,
    b: &'a [f64],
    delta: f64,
    coupled: Coupled<'a>,
    set: WorkingSet,
    solver: Option<Solver>,
    matrix: DMatrix<f64>,
    tol: Tolerances,
    gamma: Vec<f64>,
    /// Closed-form primal objective over all rows, before coupling.
    free_objective: Vec<f64>,
}

struct Snapshot {
    objective: f64,
    bound: f64,
    optimal: bool,
}

impl<'a> Relaxation<'a> {
    fn new(j: usize, b: &'a [f64], delta: f64, tol: Tolerances) -> Self {
        let gamma: Vec<f64> = b.iter().map(|&v| closed_dual(v, delta)).collect();
        let free_objective = b.iter().map(|&v| soft_threshold(v, delta).abs()).collect();
        Self {
            j,
            b,
            delta,
            coupled: Coupled { j, b, delta, local: vec![usize::MAX; b.len()], rows: Vec::new(), cols: Vec::new() },
            set: WorkingSet::default(),
            solver: None,
            matrix: DMatrix::zeros(0, 0),
            tol,
            gamma,
            free_objective,
        }
    }

    fn add(&mut self, iteration: usize, columns: &[(KSet, f64)]) -> Result<()> {
        let prev = self.solver.as_ref().map(Solver::solution);
        let (old_n, old_m) = (self.coupled.cols.len(), self.coupled.rows.len());
        for (clique, violation) in columns {
            self.coupled.add_clique(clique, self.set.len());
            self.set.push(iteration, clique.clone(), *violation);
        }
        self.matrix = self.coupled.matrix(&self.set.cliques);
        let lp = self.coupled.program(&self.matrix);
        let warm = self.coupled.warm_start(&self.matrix, prev.as_ref(), old_n, old_m);
        self.solver = Some(Solver::new(&lp, &self.tol, Some(&warm))?);
        self.sync_gamma();
        Ok(())
    }

    /// Advances the coupled program; returns its terminal status if reached.
    fn advance(&mut self, steps: Option<usize>) -> Option<LpStatus> {
        let solver = self.solver.as_mut()?;
        let status = match steps {
            Some(k) => (0..k.max(1)).find_map(|_| solver.step()),
            None => loop {
                if let Some(s) = solver.step() {
                    break Some(s);
                }
            },
        }
        .or(solver.status());
        self.sync_gamma();
        status
    }

    fn sync_gamma(&mut self) {
        if let Some(s) = &self.solver {
            let sol = s.solution();
            for (i, &r) in self.coupled.rows.iter().enumerate() {
                self.gamma[r] = sol.dual_eq[i];
            }
        }
    }

    fn coupled_x(&self) -> Vec<f64> {
        match &self.solver {
            Some(s) => {
                let p = s.solution().primal;
                let n = self.coupled.cols.len();
                (0..n).map(|c| p[c] - p[n + c]).collect()
            }
            None => Vec::new(),
        }
    }

    /// Objective of the current primal iterate and certified relaxation bound.
    fn snapshot(&self) -> Snapshot {
        let x = self.coupled_x();
        let mut objective: f64 = self.free_objective.iter().sum();
        for &r in &self.coupled.rows {
            objective -= self.free_objective[r];
        }
        objective += x.iter().map(|v| v.abs()).sum::<f64>();
        // scale g into |<A_tau, g>| <= 1 for every working column
        let mut corr = self.gamma.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        for tau in &self.set.cliques {
            corr = corr.max(column_dot(tau, self.j, &self.gamma).abs());
        }
        let bound = self.dual_value(&self.gamma) / corr.max(1.0);
        // a stalled solve still counts when its iterate is primal feasible;
        // the certified gap decides the rest
        let bscale = 1.0 + self.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let optimal = match &self.solver {
            Some(s) => match s.status() {
                Some(LpStatus::Optimal) => true,
                Some(LpStatus::IterationLimit) => s.solution().primal_residual <= 1e-9 * bscale,
                _ => false,
            },
            None => true,
        };
        Snapshot { objective, bound, optimal }
    }

    fn dual_value(&self, gamma: &[f64]) -> f64 {
        let l1: f64 = gamma.iter().map(|g| g.abs()).sum();
        let bg: f64 = self.b.iter().zip(gamma).map(|(x, y)| x * y).sum();
        -self.delta * l1 - bg
    }

    fn signal(&self) -> SparseSignal {
        let bscale = 1.0 + self.b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut out = SparseSignal::new();
        for (r, &v) in self.b.iter().enumerate() {
            if self.coupled.local[r] == usize::MAX {
                let st = soft_threshold(v, self.delta);
                if st != 0.0 {
                    out.set(crate::combinat::unrank_kset(r as u64, self.j).expect("row in range"), st);
                }
            }
        }
        for (c, v) in self.coupled_x().into_iter().enumerate() {
            if v.abs() <= 1e-13 * bscale {
                continue;
            }
            let key = match self.coupled.cols[c] {
                Column::Identity(i) => crate::combinat::unrank_kset(self.coupled.rows[i] as u64, self.j)
                    .expect("row in range"),
                Column::Clique(id) => self.set.cliques[id].clone(),
            };
            out.set(key, v);
        }
        out
    }
}

/// Cutting-plane solve of `min ||x||_1  s.t.  ||A x - b||_inf <= delta` over
/// all cliques of `n` nodes with sizes `j..=kmax`.
///
/// Each outer iteration prices the current dual iterate. A violated column
/// is added and the relaxation re-centered from the previous iterate;
/// otherwise the iteration stops once the relaxation gap is below `eta`, or
/// advances the interior-point iterate.
pub fn cutting_plane_solve(
    n: usize,
    j: usize,
    kmax: usize,
    b: &[f64],
    delta: f64,
    limits: &ColgenLimits,
) -> Result<ColgenResult> {
    if j < 2 || kmax < j || kmax > n {
        return Err(Error::Precondition(format!("need 2 <= j <= kmax <= n, got j={j}, kmax={kmax}, n={n}")));
    }
    let rows = binom(n as u64, j as u64)? as usize;
    if b.len() != rows {
        return Err(Error::Dimension { expected: rows, got: b.len() });
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("observation vector contains non-finite values".into()));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::Precondition(format!("delta must be finite and nonnegative, got {delta}")));
    }
    if !(limits.eta > 0.0) {
        return Err(Error::Precondition(format!("eta must be positive, got {}", limits.eta)));
    }
    // the relaxation is solved well inside the gap target
    let tol = Tolerances { feas: 1e-10, gap: 1e-11, ..Tolerances::default() };
    let mut rel = Relaxation::new(j, b, delta, tol);
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut oracle_calls = 0;
    let mut last_max = 0.0;

    let status = loop {
        if iterations >= limits.max_iters {
            break ColgenStatus::IterationLimit;
        }
        if oracle_calls >= limits.max_oracle_calls {
            break ColgenStatus::OracleLimit;
        }
        oracle_calls += 1;
        let priced = price(
            n,
            j,
            kmax,
            &rel.gamma,
            limits.pricing,
            &rel.set.members,
            limits.viol_tol,
            limits.enumeration_cap,
            limits.columns_per_round.max(1),
        )?;
        last_max = priced.max_correlation;
        if let Some((clique, violation)) = priced.column().cloned() {
            iterations += 1;
            log::debug!("iteration {iterations}: adding {} columns, first {clique} with violation {violation:.6}", priced.columns.len());
            rel.add(iterations, &priced.columns)?;
            rel.advance(limits.steps_per_cut);
            let snap = rel.snapshot();
            trace.push(TraceRecord {
                iteration: iterations,
                added: Some(clique),
                violation: Some(violation),
                primal_objective: snap.objective,
                dual_bound: snap.bound,
                gap: duality_gap(snap.objective, snap.bound),
            });
            continue;
        }
        let snap = rel.snapshot();
        if snap.optimal {
            if duality_gap(snap.objective, snap.bound) <= limits.eta {
                break ColgenStatus::Converged;
            }
            break ColgenStatus::Stalled;
        }
        iterations += 1;
        let st = rel.advance(limits.steps_per_cut);
        let snap = rel.snapshot();
        trace.push(TraceRecord {
            iteration: iterations,
            added: None,
            violation: None,
            primal_objective: snap.objective,
            dual_bound: snap.bound,
            gap: duality_gap(snap.objective, snap.bound),
        });
        if matches!(st, Some(s) if s != LpStatus::Optimal) && !rel.snapshot().optimal {
            log::warn!("relaxation solver stopped with status {st:?} after {} steps", rel.solver.as_ref().map_or(0, Solver::iterations));
            break ColgenStatus::Stalled;
        }
    };

    let snap = rel.snapshot();
    let (lower_bound, approx_factor) = match (status, limits.pricing) {
        (ColgenStatus::Converged, Pricing::Exhaustive) => {
            // exact scaling over every column of the full dictionary
            let corr = last_max.max(rel.gamma.iter().fold(0.0f64, |a, g| a.max(g.abs())));
            let mut worst = corr;
            for tau in &rel.set.cliques {
                worst = worst.max(column_dot(tau, j, &rel.gamma).abs());
            }
            (rel.dual_value(&rel.gamma) / worst.max(1.0), 1.0)
        }
        (ColgenStatus::Converged, Pricing::Greedy) => {
            log::info!("dual bound discounted by {GREEDY_APPROX_FACTOR} on greedy pricing");
            ((GREEDY_APPROX_FACTOR * snap.bound).max(0.0), GREEDY_APPROX_FACTOR)
        }
        // without a clean pricing pass only the trivial bound is certain
        _ => (0.0, 1.0),
    };
    let scale = {
        let mut corr = rel.gamma.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        for tau in &rel.set.cliques {
            corr = corr.max(column_dot(tau, j, &rel.gamma).abs());
        }
        1.0 / corr.max(1.0)
    };
    let dual: Vec<f64> = rel.gamma.iter().map(|g| g * scale).collect();
    let signal = rel.signal();
    Ok(ColgenResult {
        objective: signal.l1_norm(),
        signal,
        dual,
        relaxation_bound: snap.bound,
        gap: duality_gap(snap.objective, snap.bound),
        lower_bound,
        approx_factor,
        iterations,
        oracle_calls,
        status,
        working_set: rel.set,
        trace,
        delta,
    })
}
