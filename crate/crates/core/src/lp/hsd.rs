//! Homogeneous self-dual embedding with Mehrotra predictor-corrector steps.

use nalgebra::DVector;

use super::kkt::KktFactor;
use super::problem::Problem;
use super::Tolerances;

#[derive(Clone, Debug)]
pub(crate) struct Iterate {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub z: DVector<f64>,
    pub s: DVector<f64>,
    pub tau: f64,
    pub kappa: f64,
}

pub(crate) struct Residuals {
    pub r1: DVector<f64>,
    pub r2: DVector<f64>,
    pub r3: DVector<f64>,
    pub r4: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Verdict {
    Continue,
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
}

/// Scaled quality measures of the current iterate.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Measures {
    pub pobj: f64,
    pub dobj: f64,
    pub pres: f64,
    pub dres: f64,
    pub gap: f64,
}

fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, &d)| d < 0.0)
        .map(|(&a, &d)| -a / d)
        .fold(f64::INFINITY, f64::min)
}

fn scalar_step(v: f64, dv: f64) -> f64 {
    if dv < 0.0 {
        -v / dv
    } else {
        f64::INFINITY
    }
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

pub(crate) struct Engine {
    pub prob: Problem,
    pub it: Iterate,
    pub tol: Tolerances,
    c_norm: f64,
    rhs_norm: f64,
}

struct Direction {
    dx: DVector<f64>,
    dy: DVector<f64>,
    dz: DVector<f64>,
    ds: DVector<f64>,
    dtau: f64,
    dkappa: f64,
}

impl Engine {
    pub(crate) fn new(prob: Problem, it: Iterate, tol: Tolerances) -> Self {
        let c_norm = inf_norm(&prob.c);
        let rhs_norm = inf_norm(&prob.h_full).max(if prob.f.is_empty() { 0.0 } else { inf_norm(&prob.f) });
        Self { prob, it, tol, c_norm, rhs_norm }
    }

    /// Cold start: solve the regularized least-squares systems with unit scaling
    /// and shift the cone parts into the interior.
    pub(crate) fn cold_start(prob: &Problem) -> Iterate {
        let m = prob.num_cone();
        let ones = DVector::from_element(m, 1.0);
        let kkt = KktFactor::new(prob, ones);
        let n = prob.num_vars();
        // primal: min ||s||^2 s.t. G~x + s = h~, Ex = f
        let (x, _, zp) = kkt.solve(&DVector::zeros(n), &prob.f, &prob.h_full);
        let mut s = -zp;
        // dual: min ||z||^2 s.t. E^T y + G~^T z + c = 0
        let (_, y, mut z) = kkt.solve(&(-&prob.c), &DVector::zeros(prob.f.len()), &DVector::zeros(m));
        let shift = |v: &mut DVector<f64>| {
            if v.is_empty() {
                return;
            }
            let a = -v.min();
            if a >= 0.0 {
                v.add_scalar_mut(1.0 + a);
            }
        };
        shift(&mut s);
        shift(&mut z);
        Iterate { x, y, z, s, tau: 1.0, kappa: 1.0 }
    }

    pub(crate) fn residuals(&self) -> Residuals {
        let p = &self.prob;
        let it = &self.it;
        let r1 = p.e.tr_mul(&it.y) + p.gt_tmul(&it.z) + &p.c * it.tau;
        let r2 = &p.f * it.tau - &p.e * &it.x;
        let r3 = &p.h_full * it.tau - p.gt_mul(&it.x) - &it.s;
        let r4 = -p.c.dot(&it.x) - p.f.dot(&it.y) - p.h_full.dot(&it.z) - it.kappa;
        Residuals { r1, r2, r3, r4 }
    }

    fn mu(&self) -> f64 {
        (self.it.s.dot(&self.it.z) + self.it.tau * self.it.kappa) / (self.prob.num_cone() as f64 + 1.0)
    }

    pub(crate) fn measures(&self) -> Measures {
        let p = &self.prob;
        let it = &self.it;
        let tau = it.tau;
        let pobj = p.c.dot(&it.x) / tau;
        let dobj = -(p.f.dot(&it.y) + p.h_full.dot(&it.z)) / tau;
        let eq_res = if p.f.is_empty() { 0.0 } else { inf_norm(&(&p.e * &it.x - &p.f * tau)) };
        let cone_res = if p.num_cone() == 0 {
            0.0
        } else {
            inf_norm(&(p.gt_mul(&it.x) + &it.s - &p.h_full * tau))
        };
        let pres = eq_res.max(cone_res) / tau / (1.0 + self.rhs_norm);
        let dres = inf_norm(&(p.e.tr_mul(&it.y) + p.gt_tmul(&it.z) + &p.c * tau)) / tau / (1.0 + self.c_norm);
        let gap = it.s.dot(&it.z) / (tau * tau);
        Measures { pobj, dobj, pres, dres, gap }
    }

    pub(crate) fn verdict(&self) -> Verdict {
        let m = self.measures();
        let scale = 1.0f64.max(m.pobj.abs().min(m.dobj.abs()));
        if m.pres <= self.tol.feas
            && m.dres <= self.tol.feas
            && m.gap <= self.tol.gap * scale
            && (m.pobj - m.dobj).abs() <= self.tol.gap * scale
        {
            return Verdict::Optimal;
        }
        let p = &self.prob;
        let it = &self.it;
        if it.kappa > it.tau {
            let dual_ray = -(p.f.dot(&it.y) + p.h_full.dot(&it.z));
            if dual_ray > 0.0 {
                let res = inf_norm(&(p.e.tr_mul(&it.y) + p.gt_tmul(&it.z)));
                if res <= self.tol.feas * dual_ray {
                    return Verdict::PrimalInfeasible;
                }
            }
            let primal_ray = -p.c.dot(&it.x);
            if primal_ray > 0.0 {
                let eq = if p.f.is_empty() { 0.0 } else { inf_norm(&(&p.e * &it.x)) };
                let cone = if p.num_cone() == 0 { 0.0 } else { inf_norm(&(p.gt_mul(&it.x) + &it.s)) };
                if eq.max(cone) <= self.tol.feas * primal_ray {
                    return Verdict::DualInfeasible;
                }
            }
        }
        Verdict::Continue
    }

    fn direction(
        &self,
        kkt: &KktFactor,
        u1: &(DVector<f64>, DVector<f64>, DVector<f64>),
        res: &Residuals,
        eta: f64,
        rc: &DVector<f64>,
        rk: f64,
    ) -> Direction {
        let p = &self.prob;
        let it = &self.it;
        let rc_over_z = rc.component_div(&it.z);
        let (x0, y0, z0) = kkt.solve(&(-eta * &res.r1), &(eta * &res.r2), &(eta * &res.r3 + &rc_over_z));
        let g = |x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>| {
            p.c.dot(x) + p.f.dot(y) + p.h_full.dot(z)
        };
        let num = eta * res.r4 + rk / it.tau - g(&x0, &y0, &z0);
        let den = g(&u1.0, &u1.1, &u1.2) - it.kappa / it.tau;
        let dtau = num / den;
        let dx = x0 + &u1.0 * dtau;
        let dy = y0 + &u1.1 * dtau;
        let dz = z0 + &u1.2 * dtau;
        let w = it.s.component_div(&it.z);
        let ds = -rc_over_z - w.component_mul(&dz);
        let dkappa = -(rk + it.kappa * dtau) / it.tau;
        Direction { dx, dy, dz, ds, dtau, dkappa }
    }

    fn max_alpha(&self, d: &Direction) -> f64 {
        let it = &self.it;
        max_step(&it.s, &d.ds)
            .min(max_step(&it.z, &d.dz))
            .min(scalar_step(it.tau, d.dtau))
            .min(scalar_step(it.kappa, d.dkappa))
    }

    /// One predictor-corrector step. Returns the step length taken.
    pub(crate) fn step(&mut self) -> f64 {
        let p = &self.prob;
        let d = self.it.z.component_div(&self.it.s);
        let kkt = KktFactor::new(p, d);
        let u1 = kkt.solve(&(-&p.c), &p.f, &p.h_full);
        let res = self.residuals();
        let mu = self.mu();

        let rc = self.it.s.component_mul(&self.it.z);
        let rk = self.it.tau * self.it.kappa;
        let aff = self.direction(&kkt, &u1, &res, 1.0, &rc, rk);
        let alpha_aff = self.max_alpha(&aff).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);

        let rc = &rc + aff.ds.component_mul(&aff.dz) - DVector::from_element(rc.len(), sigma * mu);
        let rk = rk + aff.dtau * aff.dkappa - sigma * mu;
        let dir = self.direction(&kkt, &u1, &res, 1.0 - sigma, &rc, rk);

        let mut alpha = (self.tol.step_fraction * self.max_alpha(&dir)).min(1.0);
        // Guard against the corrector's second-order term pushing mu up.
        let mut trial = self.advance(&dir, alpha);
        let mut tries = 0;
        while !(mu_of(&trial) <= mu * (1.0 + 1e-12) || mu <= 0.0) {
            tries += 1;
            if tries > 30 {
                return 0.0;
            }
            alpha *= 0.5;
            trial = self.advance(&dir, alpha);
        }
        self.it = trial;
        alpha
    }

    fn advance(&self, d: &Direction, alpha: f64) -> Iterate {
        let it = &self.it;
        Iterate {
            x: &it.x + &d.dx * alpha,
            y: &it.y + &d.dy * alpha,
            z: &it.z + &d.dz * alpha,
            s: &it.s + &d.ds * alpha,
            tau: it.tau + alpha * d.dtau,
            kappa: it.kappa + alpha * d.dkappa,
        }
    }
}

fn mu_of(it: &Iterate) -> f64 {
    (it.s.dot(&it.z) + it.tau * it.kappa) / (it.s.len() as f64 + 1.0)
}
