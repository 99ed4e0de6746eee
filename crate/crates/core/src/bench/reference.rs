//! Explicit reference solver: piecewise constants, local Lax-Friedrichs flux
//! and the optimal third-order SSP Runge-Kutta method, in conserved
//! variables `(rho, rho u, rho v, rho E)` with `rho E = rho e + M^2 rho k`.

use rayon::prelude::*;

use crate::dg::quadrature::gauss_legendre;
use crate::error::{Error, Result};
use crate::mesh::{AdaptiveMesh, FaceKind};
use crate::model::Physics;
use crate::real::Real;

pub type Conserved<T> = [T; 4];

/// Primitive state recovered from a conserved one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive<T> {
    pub rho: T,
    pub u: [T; 2],
    pub p: T,
    pub t: T,
    /// Physical sound speed.
    pub c: T,
}

#[derive(Clone, Debug)]
pub struct ReferenceSolver<T> {
    pub mesh: AdaptiveMesh<T>,
    pub phys: Physics<T>,
    pub cons: Vec<Conserved<T>>,
    /// Last temperatures, used as root-finding seeds for non-closed-form models.
    temps: Vec<T>,
    pub time: T,
    pub cfl: T,
}

impl<T: Real> ReferenceSolver<T> {
    /// Cell averages of the conserved variables of `f(x) = (rho, u, p)`,
    /// computed with a 4x4 Gauss rule (1D strips use 4 points in x).
    pub fn new<F>(mesh: AdaptiveMesh<T>, phys: Physics<T>, f: F) -> Result<Self>
    where
        F: Fn([T; 2]) -> (T, [T; 2], T) + Sync,
    {
        phys.validate()?;
        let (x, w) = gauss_legendre(4);
        let m2 = phys.mach * phys.mach;
        let ny = if mesh.dim == 1 { 1 } else { 4 };
        let cons = (0..mesh.n_active())
            .into_par_iter()
            .map(|c| {
                let o = mesh.cell_origin(c);
                let h = mesh.cell_size(c);
                let mut acc = [T::zero(); 4];
                for i in 0..4 {
                    for j in 0..ny {
                        let (yj, wj) = if ny == 1 { (0.5, 1.0) } else { (x[j], w[j]) };
                        let pt = [o[0] + T::lit(x[i]) * h[0], o[1] + T::lit(yj) * h[1]];
                        let (rho, u, p) = f(pt);
                        let e = phys.eos.internal_energy(p, rho, None)?;
                        let k = T::half() * (u[0] * u[0] + u[1] * u[1]);
                        let wt = T::lit(w[i] * wj);
                        acc[0] += wt * rho;
                        acc[1] += wt * rho * u[0];
                        acc[2] += wt * rho * u[1];
                        acc[3] += wt * (rho * e + m2 * rho * k);
                    }
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        let temps = vec![T::zero(); cons.len()];
        let mut s = ReferenceSolver {
            mesh,
            phys,
            cons,
            temps,
            time: T::zero(),
            cfl: T::lit(0.4),
        };
        s.temps = s.primitives()?.iter().map(|p| p.t).collect();
        Ok(s)
    }

    fn primitive(&self, u: &Conserved<T>, seed: T) -> Result<Primitive<T>> {
        let rho = u[0];
        if !(rho > T::zero()) || !u[3].is_finite() {
            return Err(Error::NonPhysicalState(format!("reference state {u:?}")));
        }
        let vel = [u[1] / rho, u[2] / rho];
        let m2 = self.phys.mach * self.phys.mach;
        let e = (u[3] - m2 * T::half() * rho * (vel[0] * vel[0] + vel[1] * vel[1])) / rho;
        let hint = (seed > T::zero()).then_some(seed);
        let p = self.phys.eos.pressure_from_rho_e(rho, e, hint)?;
        let st = self.phys.eos.state(p, rho, hint)?;
        let c = self.phys.eos.sound_speed(p, rho, Some(st.t))?;
        Ok(Primitive { rho, u: vel, p, t: st.t, c })
    }

    pub fn primitives(&self) -> Result<Vec<Primitive<T>>> {
        self.cons
            .par_iter()
            .zip(self.temps.par_iter())
            .map(|(u, &t)| self.primitive(u, t))
            .collect()
    }

    /// Largest stable step `cfl * min_K h_K / max(|u| + c/M)` (sum over
    /// directions in 2D).
    pub fn stable_dt(&self) -> Result<T> {
        let prim = self.primitives()?;
        let dims = if self.mesh.dim == 1 { 1 } else { 2 };
        let mut rate = T::zero();
        for (c, s) in prim.iter().enumerate() {
            let h = self.mesh.cell_size(c);
            let a = s.c / self.phys.mach;
            let mut r = T::zero();
            for d in 0..dims {
                r += (s.u[d].abs() + a) / h[d];
            }
            rate = rate.max(r);
        }
        Ok(self.cfl / rate)
    }

    fn flux(&self, s: &Primitive<T>, u: &Conserved<T>, n: [T; 2]) -> Conserved<T> {
        let un = s.u[0] * n[0] + s.u[1] * n[1];
        let pm = s.p / (self.phys.mach * self.phys.mach);
        [
            u[0] * un,
            u[1] * un + pm * n[0],
            u[2] * un + pm * n[1],
            (u[3] + s.p) * un,
        ]
    }

    /// `dU/dt` per cell.
    fn rhs(&self, cons: &[Conserved<T>]) -> Result<Vec<Conserved<T>>> {
        let prim: Vec<Primitive<T>> = cons
            .par_iter()
            .zip(self.temps.par_iter())
            .map(|(u, &t)| self.primitive(u, t))
            .collect::<Result<_>>()?;
        let faces = self.mesh.faces();
        let fluxes: Vec<Option<Conserved<T>>> = faces
            .par_iter()
            .map(|f| {
                let l = f.inner();
                let n = f.normal;
                if let Some(r) = f.outer() {
                    if r.cell == l.cell {
                        return None;
                    }
                }
                let (ul, sl) = (cons[l.cell], prim[l.cell]);
                let (ur, sr) = match (f.kind, f.outer()) {
                    (FaceKind::Boundary(_), _) | (_, None) => {
                        let un = ul[1] * n[0] + ul[2] * n[1];
                        let g = [ul[0], ul[1] - T::two() * un * n[0], ul[2] - T::two() * un * n[1], ul[3]];
                        let mut s = sl;
                        let vn = sl.u[0] * n[0] + sl.u[1] * n[1];
                        s.u = [sl.u[0] - T::two() * vn * n[0], sl.u[1] - T::two() * vn * n[1]];
                        (g, s)
                    }
                    (_, Some(r)) => (cons[r.cell], prim[r.cell]),
                };
                let lam = |s: &Primitive<T>| (s.u[0] * n[0] + s.u[1] * n[1]).abs() + s.c / self.phys.mach;
                let lambda = lam(&sl).max(lam(&sr));
                let (fl, fr) = (self.flux(&sl, &ul, n), self.flux(&sr, &ur, n));
                let mut out = [T::zero(); 4];
                for k in 0..4 {
                    out[k] = f.measure * (T::half() * (fl[k] + fr[k]) + T::half() * lambda * (ul[k] - ur[k]));
                }
                Some(out)
            })
            .collect();
        let mut res = vec![[T::zero(); 4]; cons.len()];
        for (f, fl) in faces.iter().zip(&fluxes) {
            let Some(fl) = fl else { continue };
            let l = f.inner().cell;
            for k in 0..4 {
                res[l][k] -= fl[k];
            }
            if let Some(r) = f.outer() {
                for k in 0..4 {
                    res[r.cell][k] += fl[k];
                }
            }
        }
        let g = self.phys.inv_froude2();
        let m2 = self.phys.mach * self.phys.mach;
        res.par_iter_mut().enumerate().for_each(|(c, r)| {
            let vol = self.mesh.cell_measure(c);
            for v in r.iter_mut() {
                *v /= vol;
            }
            r[2] -= g * cons[c][0];
            r[3] -= m2 * g * cons[c][2];
        });
        Ok(res)
    }

    /// One SSP-RK3 step; fails with `CflViolation` if `dt` exceeds the
    /// stable step.
    pub fn step(&mut self, dt: T) -> Result<()> {
        let limit = self.stable_dt()?;
        if dt > limit * T::lit(1.0 + 1e-12) {
            return Err(Error::CflViolation {
                cfl: (dt / limit * self.cfl).to_f64_lossy(),
                limit: self.cfl.to_f64_lossy(),
            });
        }
        let comb = |a: T, x: &[Conserved<T>], b: T, y: &[Conserved<T>], r: &[Conserved<T>]| {
            x.iter()
                .zip(y)
                .zip(r)
                .map(|((x, y), r)| {
                    let mut o = [T::zero(); 4];
                    for k in 0..4 {
                        o[k] = a * x[k] + b * (y[k] + dt * r[k]);
                    }
                    o
                })
                .collect::<Vec<_>>()
        };
        let u0 = self.cons.clone();
        let r0 = self.rhs(&u0)?;
        let u1 = comb(T::zero(), &u0, T::one(), &u0, &r0);
        let r1 = self.rhs(&u1)?;
        let u2 = comb(T::lit(0.75), &u0, T::lit(0.25), &u1, &r1);
        let r2 = self.rhs(&u2)?;
        let third = T::one() / T::lit(3.0);
        self.cons = comb(third, &u0, T::one() - third, &u2, &r2);
        self.temps = self.primitives()?.iter().map(|p| p.t).collect();
        self.time += dt;
        Ok(())
    }

    /// Advances to `t_end` with the largest stable steps (optionally capped).
    pub fn run_to(&mut self, t_end: T, dt_max: Option<T>) -> Result<usize> {
        let mut steps = 0;
        while self.time < t_end {
            let mut dt = self.stable_dt()?;
            if let Some(m) = dt_max {
                dt = dt.min(m);
            }
            dt = dt.min(t_end - self.time);
            self.step(dt)?;
            steps += 1;
        }
        Ok(steps)
    }

    /// `sum_K |K| U_K`
    pub fn totals(&self) -> Conserved<T> {
        let mut t = [T::zero(); 4];
        for (c, u) in self.cons.iter().enumerate() {
            let v = self.mesh.cell_measure(c);
            for k in 0..4 {
                t[k] += v * u[k];
            }
        }
        t
    }

    pub fn density(&self) -> Vec<T> {
        self.cons.iter().map(|u| u[0]).collect()
    }

    /// Piecewise-constant value at `x`.
    pub fn sample(&self, x: [T; 2]) -> Option<Primitive<T>> {
        let c = self.mesh.locate(x)?;
        self.primitive(&self.cons[c], self.temps[c]).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::EosModel;
    use crate::model::BoundaryCondition;

    #[test]
    fn constant_state_is_preserved() {
        let mesh = AdaptiveMesh::<f64>::cartesian([0.0, 0.0], [1.0, 1.0], [6, 5], [true, false]);
        let bc = [
            BoundaryCondition::Periodic,
            BoundaryCondition::Periodic,
            BoundaryCondition::wall(),
            BoundaryCondition::wall(),
        ];
        let phys = Physics::inviscid(EosModel::van_der_waals(0.5, 0.5, 1.0, 2.5), 1.0, bc);
        let mut s = ReferenceSolver::new(mesh, phys, |_| (0.7, [0.3, 0.0], 1.1)).unwrap();
        let u0 = s.cons.clone();
        s.run_to(0.05, None).unwrap();
        for (a, b) in s.cons.iter().zip(&u0) {
            for k in 0..4 {
                assert!((a[k] - b[k]).abs() < 1e-12, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn conservation_with_walls() {
        let mesh = AdaptiveMesh::<f64>::interval(-0.5, 0.5, 50, false);
        let phys = Physics::inviscid(EosModel::ideal(1.4), 1.0, [BoundaryCondition::wall(); 4]);
        let mut s = ReferenceSolver::new(mesh, phys, |x| {
            if x[0] < 0.0 {
                (1.0, [0.0, 0.0], 1.0)
            } else {
                (0.125, [0.0, 0.0], 0.1)
            }
        })
        .unwrap();
        let t0 = s.totals();
        s.run_to(0.1, None).unwrap();
        let t1 = s.totals();
        assert!((t1[0] - t0[0]).abs() < 1e-12 * t0[0]);
        assert!((t1[3] - t0[3]).abs() < 1e-12 * t0[3]);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let mesh = AdaptiveMesh::interval(0.0, 1.0, 10, true);
        let phys = Physics::inviscid(EosModel::ideal(1.4), 1.0, [BoundaryCondition::Periodic; 4]);
        let mut s = ReferenceSolver::new(mesh, phys, |_| (1.0, [0.0, 0.0], 1.0)).unwrap();
        assert!(matches!(s.step(1.0), Err(Error::CflViolation { .. })));
    }
}
