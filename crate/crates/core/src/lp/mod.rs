//! Dense linear programming by a primal-dual interior-point method.
//!
//! Problems are stated as
//!
//! ```text
//! minimize    c^T x
//! subject to  G x <= h,  E x = f,  x_i >= l_i  for bounded i
//! ```
//!
//! and solved through a homogeneous self-dual embedding, so that infeasible
//! and unbounded problems terminate with certificates instead of diverging.

mod hsd;
mod kkt;
mod problem;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use hsd::{Engine, Iterate, Verdict};
use problem::Problem;

/// Largest number of variables accepted by the dense solver.
pub const MAX_VARIABLES: usize = 5000;

/// A linear program in inequality/equality form.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: DVector<f64>,
    pub ineq_matrix: DMatrix<f64>,
    pub ineq_rhs: DVector<f64>,
    pub eq_matrix: DMatrix<f64>,
    pub eq_rhs: DVector<f64>,
    pub lower_bounds: Vec<Option<f64>>,
}

impl LinearProgram {
    /// Unconstrained program with the given cost; add rows with the builders.
    pub fn new(objective: DVector<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            ineq_matrix: DMatrix::zeros(0, n),
            ineq_rhs: DVector::zeros(0),
            eq_matrix: DMatrix::zeros(0, n),
            eq_rhs: DVector::zeros(0),
            lower_bounds: vec![None; n],
        }
    }

    pub fn with_inequalities(mut self, g: DMatrix<f64>, h: DVector<f64>) -> Self {
        self.ineq_matrix = g;
        self.ineq_rhs = h;
        self
    }

    pub fn with_equalities(mut self, e: DMatrix<f64>, f: DVector<f64>) -> Self {
        self.eq_matrix = e;
        self.eq_rhs = f;
        self
    }

    pub fn with_lower_bounds(mut self, bounds: Vec<Option<f64>>) -> Self {
        self.lower_bounds = bounds;
        self
    }

    /// Every variable bounded below by zero.
    pub fn nonnegative(mut self) -> Self {
        self.lower_bounds = vec![Some(0.0); self.objective.len()];
        self
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let check = |expected: usize, got: usize| {
            if expected == got {
                Ok(())
            } else {
                Err(Error::Dimension { expected, got })
            }
        };
        check(n, self.ineq_matrix.ncols())?;
        check(self.ineq_matrix.nrows(), self.ineq_rhs.len())?;
        check(n, self.eq_matrix.ncols())?;
        check(self.eq_matrix.nrows(), self.eq_rhs.len())?;
        check(n, self.lower_bounds.len())?;
        let bounded = self.lower_bounds.iter().filter(|b| b.is_some()).count();
        if self.ineq_rhs.len() + self.eq_rhs.len() + bounded == 0 {
            return Err(Error::Validation("linear program has no constraint rows".into()));
        }
        if n > MAX_VARIABLES {
            return Err(Error::LpTooLarge { vars: n, cap: MAX_VARIABLES });
        }
        let finite = self.objective.iter().chain(self.ineq_matrix.iter()).chain(self.ineq_rhs.iter())
            .chain(self.eq_matrix.iter()).chain(self.eq_rhs.iter())
            .chain(self.lower_bounds.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Validation("linear program data contains non-finite values".into()));
        }
        Ok(())
    }

    /// Largest violation of the constraints at `x` (unscaled).
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        if !self.ineq_rhs.is_empty() {
            let r = &self.ineq_matrix * x - &self.ineq_rhs;
            worst = worst.max(r.max().max(0.0));
        }
        if !self.eq_rhs.is_empty() {
            worst = worst.max((&self.eq_matrix * x - &self.eq_rhs).amax());
        }
        for (v, b) in x.iter().zip(&self.lower_bounds) {
            if let Some(l) = b {
                worst = worst.max(l - v);
            }
        }
        worst
    }
}

/// Stopping criteria.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Scaled primal and dual residual tolerance.
    pub feas: f64,
    /// Relative duality gap tolerance.
    pub gap: f64,
    pub max_iters: usize,
    /// Fraction of the distance to the boundary taken per step.
    pub step_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { feas: 1e-9, gap: 1e-8, max_iters: 200, step_fraction: 0.995 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Result of a solve. Multipliers follow the Lagrangian
/// `c^T x + y^T (E x - f) + z^T (G x - h) - w^T (x_B - l_B)` with `z, w >= 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LpSolution {
    pub primal: DVector<f64>,
    pub dual_ineq: DVector<f64>,
    pub dual_eq: DVector<f64>,
    /// One entry per variable; zero for unbounded variables.
    pub dual_bounds: DVector<f64>,
    pub objective_value: f64,
    pub dual_objective: f64,
    /// `|objective - dual objective| / max(1, min(|objective|, |dual objective|))`.
    pub duality_gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub status: LpStatus,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn warm_start(&self) -> WarmStart {
        WarmStart {
            x: self.primal.clone(),
            dual_ineq: self.dual_ineq.clone(),
            dual_eq: self.dual_eq.clone(),
            dual_bounds: self.dual_bounds.clone(),
            shift: WarmStart::DEFAULT_SHIFT,
        }
    }
}

/// Starting point taken from a related solve.
///
/// Slacks and multipliers are pushed to at least `shift` so the start is
/// interior. Multiplier vectors shorter than the new problem's rows are padded
/// with `shift`, which covers appending constraints.
#[derive(Clone, Debug)]
pub struct WarmStart {
    pub x: DVector<f64>,
    pub dual_ineq: DVector<f64>,
    pub dual_eq: DVector<f64>,
    pub dual_bounds: DVector<f64>,
    pub shift: f64,
}

impl WarmStart {
    pub const DEFAULT_SHIFT: f64 = 1e-2;

    fn iterate(&self, prob: &Problem) -> Result<Iterate> {
        let n = prob.num_vars();
        if self.x.len() != n {
            return Err(Error::Dimension { expected: n, got: self.x.len() });
        }
        let th = self.shift;
        let mg = prob.g.nrows();
        let slack = &prob.h_full - prob.gt_mul(&self.x);
        let s = slack.map(|v| v.max(th));
        let mut z = DVector::from_element(prob.num_cone(), th);
        for i in 0..mg.min(self.dual_ineq.len()) {
            z[i] = self.dual_ineq[i].max(th);
        }
        for (k, &v) in prob.bounded.iter().enumerate() {
            if v < self.dual_bounds.len() {
                z[mg + k] = self.dual_bounds[v].max(th);
            }
        }
        let y = DVector::from_iterator(
            prob.kept_eq.len(),
            prob.kept_eq.iter().map(|&r| self.dual_eq.get(r).copied().unwrap_or(0.0)),
        );
        let mu = (s.dot(&z) / (prob.num_cone().max(1) as f64)).max(th);
        Ok(Iterate { x: self.x.clone(), y, z, s, tau: 1.0, kappa: mu })
    }
}

/// Solves from the default cold start.
pub fn solve(lp: &LinearProgram, tol: &Tolerances) -> Result<LpSolution> {
    Ok(Solver::new(lp, tol, None)?.run())
}

/// Solves starting from a shifted previous solution.
pub fn solve_warm(lp: &LinearProgram, tol: &Tolerances, warm: &WarmStart) -> Result<LpSolution> {
    Ok(Solver::new(lp, tol, Some(warm))?.run())
}

/// Step-by-step access to the interior-point iteration.
pub struct Solver {
    lp: LinearProgram,
    engine: Engine,
    iterations: usize,
    stalls: usize,
    status: Option<LpStatus>,
}

impl Solver {
    pub fn new(lp: &LinearProgram, tol: &Tolerances, warm: Option<&WarmStart>) -> Result<Self> {
        lp.validate()?;
        let prob = Problem::from_lp(lp);
        let start = match warm {
            Some(w) => w.iterate(&prob)?,
            None => Engine::cold_start(&prob),
        };
        Ok(Self { lp: lp.clone(), engine: Engine::new(prob, start, *tol), iterations: 0, stalls: 0, status: None })
    }

    pub fn problem(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Terminal status once reached.
    pub fn status(&self) -> Option<LpStatus> {
        self.status
    }

    /// Takes one predictor-corrector step unless the iterate already meets a
    /// stopping rule. Returns the terminal status when one is reached.
    pub fn step(&mut self) -> Option<LpStatus> {
        if self.status.is_some() {
            return self.status;
        }
        let verdict = match self.engine.verdict() {
            Verdict::Optimal => Some(LpStatus::Optimal),
            Verdict::PrimalInfeasible => Some(LpStatus::Infeasible),
            Verdict::DualInfeasible => Some(LpStatus::Unbounded),
            Verdict::Continue if self.iterations >= self.engine.tol.max_iters || self.stalls >= 5 => {
                Some(LpStatus::IterationLimit)
            }
            Verdict::Continue => None,
        };
        if verdict.is_some() {
            self.status = verdict;
            return verdict;
        }
        let alpha = self.engine.step();
        self.iterations += 1;
        if !self.engine.it.tau.is_finite() || self.engine.it.x.iter().any(|v| !v.is_finite()) {
            self.status = Some(LpStatus::IterationLimit);
            return self.status;
        }
        self.stalls = if alpha < 1e-10 { self.stalls + 1 } else { 0 };
        if self.stalls >= 5 {
            log::debug!("interior point stalled after {} iterations", self.iterations);
        }
        None
    }

    /// Steps until a terminal status and returns the solution.
    pub fn run(mut self) -> LpSolution {
        while self.step().is_none() {}
        self.solution()
    }

    /// Current iterate as a solution; status is iteration-limit while running.
    pub fn solution(&self) -> LpSolution {
        extract(&self.lp, &self.engine, self.status.unwrap_or(LpStatus::IterationLimit), self.iterations)
    }
}

/// Rigorous lower bound from the current multipliers when they are dual
/// feasible: the residual on bounded variables is absorbed into their bound
/// multipliers, free variables must have a negligible residual.
fn dual_bound(engine: &Engine) -> Option<f64> {
    let p = &engine.prob;
    let it = &engine.it;
    let tau = it.tau;
    let mg = p.g.nrows();
    let y = &it.y / tau;
    let z = &it.z / tau;
    let mut r = p.e.tr_mul(&y) + p.gt_tmul(&z) + &p.c;
    let mut bound = -p.f.dot(&y) - p.h_full.rows(0, mg).dot(&z.rows(0, mg));
    let c_scale = 1.0 + p.c.amax();
    for (k, &v) in p.bounded.iter().enumerate() {
        let w = z[mg + k] + r[v];
        if w < 0.0 {
            return None;
        }
        bound += -p.h_full[mg + k] * w;
        r[v] = 0.0;
    }
    if r.amax() > engine.tol.feas * c_scale {
        return None;
    }
    Some(bound)
}

fn extract(lp: &LinearProgram, engine: &Engine, mut status: LpStatus, iterations: usize) -> LpSolution {
    let p = &engine.prob;
    let it = &engine.it;
    let n = p.num_vars();
    let mg = p.g.nrows();
    let m = engine.measures();

    let (primal, dual_ineq, y_kept, z_b) = match status {
        LpStatus::Infeasible | LpStatus::Unbounded => {
            // report the normalized certificate rays
            let scale = it.x.amax().max(it.z.amax()).max(if it.y.is_empty() { 0.0 } else { it.y.amax() }).max(1e-300);
            (&it.x / scale, it.z.rows(0, mg) / scale, &it.y / scale, it.z.rows(mg, p.bounded.len()) / scale)
        }
        _ => {
            let t = it.tau;
            (&it.x / t, it.z.rows(0, mg) / t, &it.y / t, it.z.rows(mg, p.bounded.len()) / t)
        }
    };
    let mut dual_eq = DVector::zeros(lp.eq_rhs.len());
    for (k, &r) in p.kept_eq.iter().enumerate() {
        dual_eq[r] = y_kept[k];
    }
    let mut dual_bounds = DVector::zeros(n);
    for (k, &v) in p.bounded.iter().enumerate() {
        dual_bounds[v] = z_b[k];
    }

    if status == LpStatus::Optimal && !p.dropped_eq.is_empty() {
        let scale = 1.0 + lp.eq_rhs.amax();
        for &r in &p.dropped_eq {
            let res = (lp.eq_matrix.row(r) * &primal)[0] - lp.eq_rhs[r];
            if res.abs() > engine.tol.feas * scale {
                log::warn!("dependent equality row {r} is inconsistent (residual {res:e})");
                status = LpStatus::Infeasible;
            }
        }
    }

    let objective_value = lp.objective.dot(&primal);
    let dual_objective = match status {
        LpStatus::Optimal | LpStatus::IterationLimit => dual_bound(engine).unwrap_or(m.dobj),
        _ => m.dobj,
    };
    let duality_gap = (objective_value - dual_objective).abs()
        / 1.0f64.max(objective_value.abs().min(dual_objective.abs()));
    LpSolution {
        primal,
        dual_ineq,
        dual_eq,
        dual_bounds,
        objective_value,
        dual_objective,
        duality_gap,
        primal_residual: m.pres,
        dual_residual: m.dres,
        status,
        iterations,
    }
}

/// A strictly feasible point produced by [`interior_point`].
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub iteration: usize,
    pub x: DVector<f64>,
    pub objective: f64,
    /// Average complementarity of the embedding; nonincreasing along the path.
    pub complementarity: f64,
    /// Lower bound on the optimum when the multipliers are dual feasible.
    pub dual_bound: Option<f64>,
}

/// Iterator over strictly feasible iterates converging to an optimum.
///
/// A phase-1 program `max t  s.t.  G x + t <= h, x_B - t >= l_B, E x = f,
/// t <= 1` finds a point with positive slack in every inequality; the main
/// iteration then starts there with zero primal residual, which the Newton
/// steps preserve.
pub struct InteriorPath {
    engine: Engine,
    lp: LinearProgram,
    iteration: usize,
    started: bool,
    finished: Option<LpSolution>,
    stalls: usize,
}

impl InteriorPath {
    /// Final solution once the iterator is exhausted (or the current state).
    pub fn solution(&self) -> LpSolution {
        match &self.finished {
            Some(s) => s.clone(),
            None => extract(&self.lp, &self.engine, LpStatus::IterationLimit, self.iteration),
        }
    }

    fn checkpoint(&self) -> Checkpoint {
        let it = &self.engine.it;
        let x = &it.x / it.tau;
        Checkpoint {
            iteration: self.iteration,
            objective: self.lp.objective.dot(&x),
            x,
            complementarity: (it.s.dot(&it.z) + it.tau * it.kappa)
                / (self.engine.prob.num_cone() as f64 + 1.0),
            dual_bound: dual_bound(&self.engine),
        }
    }
}

impl Iterator for InteriorPath {
    type Item = Checkpoint;

    fn next(&mut self) -> Option<Checkpoint> {
        if self.finished.is_some() {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.checkpoint());
        }
        let status = match self.engine.verdict() {
            Verdict::Optimal => Some(LpStatus::Optimal),
            Verdict::PrimalInfeasible => Some(LpStatus::Infeasible),
            Verdict::DualInfeasible => Some(LpStatus::Unbounded),
            Verdict::Continue if self.iteration >= self.engine.tol.max_iters || self.stalls >= 5 => {
                Some(LpStatus::IterationLimit)
            }
            Verdict::Continue => None,
        };
        if let Some(st) = status {
            self.finished = Some(extract(&self.lp, &self.engine, st, self.iteration));
            return None;
        }
        let alpha = self.engine.step();
        self.iteration += 1;
        self.stalls = if alpha < 1e-10 { self.stalls + 1 } else { 0 };
        Some(self.checkpoint())
    }
}

/// Strictly feasible point with maximal uniform slack (capped at 1).
fn phase_one(lp: &LinearProgram, tol: &Tolerances) -> Result<DVector<f64>> {
    let n = lp.num_vars();
    let mg = lp.ineq_rhs.len();
    let bounded: Vec<usize> = (0..n).filter(|&i| lp.lower_bounds[i].is_some()).collect();
    let rows = mg + bounded.len() + 1;
    let mut g = DMatrix::zeros(rows, n + 1);
    let mut h = DVector::zeros(rows);
    g.view_mut((0, 0), (mg, n)).copy_from(&lp.ineq_matrix);
    h.rows_mut(0, mg).copy_from(&lp.ineq_rhs);
    for (k, &v) in bounded.iter().enumerate() {
        g[(mg + k, v)] = -1.0;
        h[mg + k] = -lp.lower_bounds[v].unwrap();
    }
    for r in 0..rows {
        g[(r, n)] = 1.0;
    }
    h[rows - 1] = 1.0;
    let mut c = DVector::zeros(n + 1);
    c[n] = -1.0;
    let mut e = DMatrix::zeros(lp.eq_rhs.len(), n + 1);
    e.view_mut((0, 0), (lp.eq_rhs.len(), n)).copy_from(&lp.eq_matrix);
    let aux = LinearProgram::new(c).with_inequalities(g, h).with_equalities(e, lp.eq_rhs.clone());
    let sol = solve(&aux, tol)?;
    let scale = 1.0 + lp.ineq_rhs.iter().chain(lp.lower_bounds.iter().flatten()).fold(0.0f64, |a, v| a.max(v.abs()));
    if sol.status != LpStatus::Optimal || sol.primal[n] <= 1e-9 * scale {
        return Err(Error::EmptyInterior);
    }
    Ok(sol.primal.rows(0, n).into_owned())
}

/// Path of strictly feasible iterates. A warm start is used when its point is
/// strictly feasible; otherwise a phase-1 solve supplies the start.
pub fn interior_point(lp: &LinearProgram, tol: &Tolerances, warm: Option<&WarmStart>) -> Result<InteriorPath> {
    lp.validate()?;
    let strict = |x: &DVector<f64>| -> bool {
        let slack_ok = lp.ineq_rhs.is_empty() || (&lp.ineq_rhs - &lp.ineq_matrix * x).min() > 0.0;
        let bound_ok = x.iter().zip(&lp.lower_bounds).all(|(v, b)| b.is_none_or(|l| *v > l));
        let eq_ok = lp.eq_rhs.is_empty()
            || (&lp.eq_matrix * x - &lp.eq_rhs).amax() <= tol.feas * (1.0 + lp.eq_rhs.amax());
        slack_ok && bound_ok && eq_ok
    };
    let prob = Problem::from_lp(lp);
    let start = match warm {
        Some(w) if w.x.len() == lp.num_vars() && strict(&w.x) => {
            let mut it = w.iterate(&prob)?;
            it.s = &prob.h_full - prob.gt_mul(&it.x);
            it
        }
        _ => {
            let x = phase_one(lp, tol)?;
            let s = &prob.h_full - prob.gt_mul(&x);
            let m = prob.num_cone();
            Iterate {
                x,
                y: DVector::zeros(prob.kept_eq.len()),
                z: DVector::from_element(m, 1.0),
                s,
                tau: 1.0,
                kappa: 1.0,
            }
        }
    };
    Ok(InteriorPath {
        engine: Engine::new(prob, start, *tol),
        lp: lp.clone(),
        iteration: 0,
        started: false,
        finished: None,
        stalls: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn single_lower_bound_as_inequality() {
        let lp = LinearProgram::new(DVector::from_vec(vec![1.0]))
            .with_inequalities(DMatrix::from_row_slice(1, 1, &[-1.0]), DVector::from_vec(vec![-1.0]));
        let sol = solve(&lp, &tol()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_abs_diff_eq!(sol.primal[0], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(sol.dual_ineq[0], 1.0, epsilon = 1e-8);
    }

    #[test]
    fn infeasible_and_unbounded() {
        // x >= 1 and x <= 0
        let lp = LinearProgram::new(DVector::from_vec(vec![1.0])).with_inequalities(
            DMatrix::from_row_slice(2, 1, &[-1.0, 1.0]),
            DVector::from_vec(vec![-1.0, 0.0]),
        );
        assert_eq!(solve(&lp, &tol()).unwrap().status, LpStatus::Infeasible);
        // min -x, x >= 0
        let lp = LinearProgram::new(DVector::from_vec(vec![-1.0])).nonnegative();
        assert_eq!(solve(&lp, &tol()).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_with_dependent_row() {
        // min x0 + 2 x1, x0 + x1 = 1 (twice), x >= 0
        let lp = LinearProgram::new(DVector::from_vec(vec![1.0, 2.0]))
            .with_equalities(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]), DVector::from_vec(vec![1.0, 2.0]))
            .nonnegative();
        let sol = solve(&lp, &tol()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_abs_diff_eq!(sol.primal[0], 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(sol.objective_value, 1.0, epsilon = 1e-7);
        // inconsistent copy
        let lp = LinearProgram::new(DVector::from_vec(vec![1.0, 2.0]))
            .with_equalities(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]), DVector::from_vec(vec![1.0, 3.0]))
            .nonnegative();
        assert_eq!(solve(&lp, &tol()).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn box_path_stays_inside_and_converges() {
        let lp = LinearProgram::new(DVector::from_vec(vec![1.0]))
            .with_inequalities(DMatrix::from_row_slice(1, 1, &[1.0]), DVector::from_vec(vec![1.0]))
            .with_lower_bounds(vec![Some(-1.0)]);
        let mut path = interior_point(&lp, &tol(), None).unwrap();
        let first = path.next().unwrap();
        assert_abs_diff_eq!(first.x[0], 0.0, epsilon = 1e-6);
        let mut last = first.clone();
        let mut prev_mu = first.complementarity;
        for cp in path.by_ref() {
            assert!(cp.x[0] > -1.0 && cp.x[0] < 1.0);
            assert!(cp.complementarity <= prev_mu * (1.0 + 1e-12));
            prev_mu = cp.complementarity;
            last = cp;
        }
        assert_abs_diff_eq!(last.x[0], -1.0, epsilon = 1e-7);
        assert_eq!(path.solution().status, LpStatus::Optimal);
    }

    #[test]
    fn empty_interior_is_reported() {
        // 0 <= x <= 0
        let lp = LinearProgram::new(DVector::from_vec(vec![1.0]))
            .with_inequalities(DMatrix::from_row_slice(1, 1, &[1.0]), DVector::from_vec(vec![0.0]))
            .nonnegative();
        assert!(matches!(interior_point(&lp, &tol(), None), Err(Error::EmptyInterior)));
    }

    #[test]
    fn validation_errors() {
        let lp = LinearProgram::new(DVector::from_vec(vec![1.0, 1.0]));
        assert!(matches!(solve(&lp, &tol()), Err(Error::Validation(_))));
        let lp = LinearProgram::new(DVector::from_vec(vec![1.0, 1.0]))
            .with_inequalities(DMatrix::zeros(1, 3), DVector::zeros(1));
        assert!(matches!(solve(&lp, &tol()), Err(Error::Dimension { .. })));
        let lp = LinearProgram::new(DVector::zeros(MAX_VARIABLES + 1)).nonnegative();
        assert!(matches!(solve(&lp, &tol()), Err(Error::LpTooLarge { .. })));
    }

    #[test]
    fn dense_path_with_free_variables() {
        // min -x0 - x1, x0 + 2x1 <= 4, 3x0 + x1 <= 6, x free: optimum (1.6, 1.2)
        let lp = LinearProgram::new(DVector::from_vec(vec![-1.0, -1.0])).with_inequalities(
            DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 3.0, 1.0, -1.0, 0.0, 0.0, -1.0]),
            DVector::from_vec(vec![4.0, 6.0, 0.0, 0.0]),
        );
        let sol = solve(&lp, &tol()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_abs_diff_eq!(sol.primal[0], 1.6, epsilon = 1e-7);
        assert_abs_diff_eq!(sol.primal[1], 1.2, epsilon = 1e-7);
        assert!(sol.duality_gap <= 1e-8);
    }
}
