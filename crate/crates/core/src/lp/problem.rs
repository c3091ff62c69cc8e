//! Internal cone form of a [`LinearProgram`](super::LinearProgram).

use nalgebra::{DMatrix, DVector};

use super::LinearProgram;

/// `min c^T x  s.t.  G~ x + s = h~, s >= 0,  E x = f` with `G~ = [G; -P]`,
/// `h~ = [h; -l_B]`, where `P` selects the bounded variables. Equality rows
/// that are linearly dependent on earlier rows have been removed.
pub(crate) struct Problem {
    pub c: DVector<f64>,
    pub g: DMatrix<f64>,
    pub h_full: DVector<f64>,
    pub e: DMatrix<f64>,
    pub f: DVector<f64>,
    pub bounded: Vec<usize>,
    /// `(column, value)` of each inequality row when every row has at most
    /// one nonzero.
    pub g_singletons: Option<Vec<Option<(usize, f64)>>>,
    /// Indices of the original equality rows kept in `e`.
    pub kept_eq: Vec<usize>,
    pub dropped_eq: Vec<usize>,
    /// Nonzeros of each column of `e`, used when `e` is sparse.
    pub e_cols: Option<Vec<Vec<(usize, f64)>>>,
}

/// Nonzeros of each column of `e`.
fn column_entries(e: &DMatrix<f64>) -> Vec<Vec<(usize, f64)>> {
    (0..e.ncols())
        .map(|c| e.column(c).iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(r, v)| (r, *v)).collect())
        .collect()
}

/// Rows of `e` independent of the rows before them (modified Gram-Schmidt).
fn independent_rows(e: &DMatrix<f64>, tol: f64) -> Vec<usize> {
    // each row owning a column that is zero elsewhere means full row rank
    let mut owned = vec![false; e.nrows()];
    for col in column_entries(e) {
        if let [(r, _)] = col[..] {
            owned[r] = true;
        }
    }
    if owned.iter().all(|&o| o) {
        return (0..e.nrows()).collect();
    }
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut kept = Vec::new();
    for r in 0..e.nrows() {
        let row: DVector<f64> = e.row(r).transpose();
        let norm0 = row.norm();
        if norm0 == 0.0 {
            continue;
        }
        let mut v = row;
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&v);
                v.axpy(-proj, b, 1.0);
            }
        }
        let norm = v.norm();
        if norm > tol * norm0 {
            basis.push(v / norm);
            kept.push(r);
        }
    }
    kept
}

fn singleton_rows(g: &DMatrix<f64>) -> Option<Vec<Option<(usize, f64)>>> {
    let mut out = Vec::with_capacity(g.nrows());
    for r in 0..g.nrows() {
        let mut entry = None;
        for c in 0..g.ncols() {
            let v = g[(r, c)];
            if v != 0.0 {
                if entry.is_some() {
                    return None;
                }
                entry = Some((c, v));
            }
        }
        out.push(entry);
    }
    Some(out)
}

impl Problem {
    pub(crate) fn from_lp(lp: &LinearProgram) -> Self {
        let bounded: Vec<usize> = lp
            .lower_bounds
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.map(|_| i))
            .collect();
        let mut h_full = DVector::zeros(lp.ineq_rhs.len() + bounded.len());
        h_full.rows_mut(0, lp.ineq_rhs.len()).copy_from(&lp.ineq_rhs);
        for (k, &v) in bounded.iter().enumerate() {
            h_full[lp.ineq_rhs.len() + k] = -lp.lower_bounds[v].unwrap();
        }
        let kept_eq = independent_rows(&lp.eq_matrix, 1e-12);
        let dropped_eq: Vec<usize> =
            (0..lp.eq_matrix.nrows()).filter(|r| !kept_eq.contains(r)).collect();
        if !dropped_eq.is_empty() {
            log::warn!("removed {} linearly dependent equality rows", dropped_eq.len());
        }
        let e = lp.eq_matrix.select_rows(kept_eq.iter());
        let f = DVector::from_iterator(kept_eq.len(), kept_eq.iter().map(|&r| lp.eq_rhs[r]));
        let g_singletons = singleton_rows(&lp.ineq_matrix);
        let cols = column_entries(&e);
        let nnz: usize = cols.iter().map(Vec::len).sum();
        let e_cols = (nnz * 4 < e.nrows() * e.ncols()).then_some(cols);
        Self {
            e_cols,
            g_singletons,
            c: lp.objective.clone(),
            g: lp.ineq_matrix.clone(),
            h_full,
            e,
            f,
            bounded,
            kept_eq,
            dropped_eq,
        }
    }

    pub(crate) fn num_vars(&self) -> usize {
        self.c.len()
    }

    /// Number of cone rows `m_g + n_b`.
    pub(crate) fn num_cone(&self) -> usize {
        self.g.nrows() + self.bounded.len()
    }

    /// `G~ x`.
    pub(crate) fn gt_mul(&self, x: &DVector<f64>) -> DVector<f64> {
        let mg = self.g.nrows();
        let mut out = DVector::zeros(self.num_cone());
        if mg > 0 {
            out.rows_mut(0, mg).copy_from(&(&self.g * x));
        }
        for (k, &v) in self.bounded.iter().enumerate() {
            out[mg + k] = -x[v];
        }
        out
    }

    /// `G~^T z`.
    pub(crate) fn gt_tmul(&self, z: &DVector<f64>) -> DVector<f64> {
        let mg = self.g.nrows();
        let mut out = if mg > 0 {
            self.g.tr_mul(&z.rows(0, mg).into_owned())
        } else {
            DVector::zeros(self.num_vars())
        };
        for (k, &v) in self.bounded.iter().enumerate() {
            out[v] -= z[mg + k];
        }
        out
    }
}
