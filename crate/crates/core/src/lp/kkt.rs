//! Reduced KKT solves for the interior-point engine.
//!
//! The Newton system
//!
//! ```text
//! [ 0   E^T  G~^T ] [dx]   [p1]
//! [ E   0    0    ] [dy] = [p2]
//! [ G~  0   -W    ] [dz]   [p3]
//! ```
//!
//! with `G~ = [G; -P]` (inequality rows then lower-bound rows) and `W = S/Z`
//! is reduced to `H dx + E^T dy = p1 + G~^T D p3`, `E dx = p2`, where
//! `D = W^{-1}` and `H = G^T D_g G + P^T D_b P`. When every row of `G` is a
//! single-variable bound, `H` is diagonal and only the `E H^{-1} E^T` Schur
//! complement is factored; otherwise `H` is formed and factored densely.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::problem::Problem;

enum HInverse {
    /// `H` is diagonal: every inequality row has at most one nonzero.
    Diagonal(DVector<f64>),
    Dense(Cholesky<f64, Dyn>),
}

pub(crate) struct KktFactor<'a> {
    prob: &'a Problem,
    d: DVector<f64>,
    h_inv: HInverse,
    schur: Option<Cholesky<f64, Dyn>>,
}

fn cholesky_regularized(mut mat: DMatrix<f64>) -> Cholesky<f64, Dyn> {
    let scale = mat.diagonal().iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
    let mut reg = 0.0;
    loop {
        if let Some(c) = Cholesky::new(mat.clone()) {
            return c;
        }
        let next = if reg == 0.0 { 1e-14 * scale } else { reg * 100.0 };
        for i in 0..mat.nrows() {
            mat[(i, i)] += next - reg;
        }
        reg = next;
        assert!(reg.is_finite() && reg < 1e10 * scale, "normal matrix cannot be regularized");
    }
}

impl<'a> KktFactor<'a> {
    /// Factor for cone scaling `d = z / s` (length `m_g + n_b`).
    pub(crate) fn new(prob: &'a Problem, d: DVector<f64>) -> Self {
        let n = prob.num_vars();
        let mg = prob.g.nrows();
        let mut hd = DVector::zeros(n);
        for (k, &v) in prob.bounded.iter().enumerate() {
            hd[v] = d[mg + k];
        }

        let diagonal = match &prob.g_singletons {
            Some(rows) => {
                for (r, entry) in rows.iter().enumerate() {
                    if let Some((c, val)) = entry {
                        hd[*c] += d[r] * val * val;
                    }
                }
                hd.iter().all(|&v| v > 0.0)
            }
            None => false,
        };
        let h_inv = if diagonal {
            HInverse::Diagonal(hd)
        } else {
            let mut scaled = prob.g.clone();
            for i in 0..mg {
                scaled.row_mut(i).scale_mut(d[i].sqrt());
            }
            let mut h = scaled.transpose() * &scaled;
            for (k, &v) in prob.bounded.iter().enumerate() {
                h[(v, v)] += d[mg + k];
            }
            HInverse::Dense(cholesky_regularized(h))
        };

        let mut f = Self { prob, d, h_inv, schur: None };
        if let (HInverse::Diagonal(hd), Some(cols)) = (&f.h_inv, &prob.e_cols) {
            let m = prob.e.nrows();
            let mut s = DMatrix::zeros(m, m);
            for (c, col) in cols.iter().enumerate() {
                let w = 1.0 / hd[c];
                for &(r1, v1) in col {
                    for &(r2, v2) in col {
                        s[(r1, r2)] += w * v1 * v2;
                    }
                }
            }
            if m > 0 {
                f.schur = Some(cholesky_regularized(s));
            }
        } else if prob.e.nrows() > 0 {
            let et = prob.e.transpose();
            let hinv_et = f.apply_h_inv_mat(&et);
            f.schur = Some(cholesky_regularized(&prob.e * hinv_et));
        }
        f
    }

    fn apply_h_inv(&self, v: &DVector<f64>) -> DVector<f64> {
        match &self.h_inv {
            HInverse::Diagonal(hd) => v.component_div(hd),
            HInverse::Dense(ch) => ch.solve(v),
        }
    }

    fn apply_h_inv_mat(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.h_inv {
            HInverse::Diagonal(hd) => {
                let mut out = v.clone();
                for (r, mut row) in out.row_iter_mut().enumerate() {
                    row /= hd[r];
                }
                out
            }
            HInverse::Dense(ch) => ch.solve(v),
        }
    }

    fn solve_once(
        &self,
        p1: &DVector<f64>,
        p2: &DVector<f64>,
        p3: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let q = p1 + self.prob.gt_tmul(&self.d.component_mul(p3));
        let (dx, dy) = match &self.schur {
            Some(schur) => {
                let hq = self.apply_h_inv(&q);
                let dy = schur.solve(&(&self.prob.e * &hq - p2));
                let dx = self.apply_h_inv(&(q - self.prob.e.transpose() * &dy));
                (dx, dy)
            }
            None => (self.apply_h_inv(&q), DVector::zeros(0)),
        };
        let dz = (self.prob.gt_mul(&dx) - p3).component_mul(&self.d);
        (dx, dy, dz)
    }

    /// Solves the full system with two rounds of iterative refinement.
    pub(crate) fn solve(
        &self,
        p1: &DVector<f64>,
        p2: &DVector<f64>,
        p3: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let (mut dx, mut dy, mut dz) = self.solve_once(p1, p2, p3);
        for _ in 0..2 {
            let r1 = p1 - (self.prob.e.transpose() * &dy + self.prob.gt_tmul(&dz));
            let r2 = p2 - &self.prob.e * &dx;
            let r3 = p3 - (self.prob.gt_mul(&dx) - dz.component_div(&self.d));
            let (cx, cy, cz) = self.solve_once(&r1, &r2, &r3);
            dx += cx;
            dy += cy;
            dz += cz;
        }
        (dx, dy, dz)
    }
}
