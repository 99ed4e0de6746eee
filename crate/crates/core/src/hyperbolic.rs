//! One IMEX step of the hyperbolic and gravity subsystem: explicit density and
//! advective fluxes, implicit pressure/velocity/energy coupling solved by a
//! fixed point on the pressure Schur complement `D - C A^-1 B`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense;
use crate::dg::Discretization;
use crate::error::{Error, Result};
use crate::imex::ImexTableau;
use crate::linsolve::{gmres, FnOperator, SolverConfig};
use crate::mesh::{Face, FaceSide};
use crate::model::{FlowState, Physics};
use crate::real::{norm2, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxMode {
    /// Dissipation speed `max |u.n|`.
    Upwind,
    /// Dissipation speed `max (|u.n| + c/M)`.
    LocalLaxFriedrichs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperbolicSettings {
    pub flux: FluxMode,
    /// Density jump threshold of the cellwise constant limiter (LLF only).
    pub limiter_threshold: Option<f64>,
    pub fixed_point_max: usize,
    /// Early exit on the relative pressure increment.
    pub fixed_point_tol: f64,
    pub krylov: SolverConfig,
    /// Adds the first-stage energy dissipation a second time in the last stage.
    pub duplicate_a31_term: bool,
}

impl Default for HyperbolicSettings {
    fn default() -> Self {
        HyperbolicSettings {
            flux: FluxMode::Upwind,
            limiter_threshold: None,
            fixed_point_max: 3,
            fixed_point_tol: 1e-10,
            krylov: SolverConfig::with_tol(1e-10),
            duplicate_a31_term: false,
        }
    }
}

impl HyperbolicSettings {
    pub fn validate(&self) -> Result<()> {
        if self.limiter_threshold.is_some() && self.flux != FluxMode::LocalLaxFriedrichs {
            return Err(Error::Config(
                "the density limiter requires the local Lax-Friedrichs flux".into(),
            ));
        }
        if self.fixed_point_max == 0 {
            return Err(Error::Config("at least one fixed-point iteration is required".into()));
        }
        Ok(())
    }
}

/// Thermodynamic state at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointState<T> {
    pub rho: T,
    pub u: [T; 2],
    pub p: T,
    /// Specific internal energy and enthalpy.
    pub e: T,
    pub h: T,
    pub t: T,
}

impl<T: Real> PointState<T> {
    pub fn new(phys: &Physics<T>, rho: T, u: [T; 2], p: T) -> Result<Self> {
        if !(rho > T::zero()) || !p.is_finite() || !u[0].is_finite() || !u[1].is_finite() {
            return Err(Error::NonPhysicalState(format!(
                "density {rho}, pressure {p}, velocity ({}, {})",
                u[0], u[1]
            )));
        }
        let st = phys.eos.state(p, rho, None)?;
        Ok(PointState {
            rho,
            u,
            p,
            e: st.e,
            h: st.e + p / rho,
            t: st.t,
        })
    }

    pub fn kinetic(&self) -> T {
        T::half() * (self.u[0] * self.u[0] + self.u[1] * self.u[1])
    }

    /// `rho E = rho e + M^2 rho k`
    pub fn total_energy(&self, m2: T) -> T {
        self.rho * self.e + m2 * self.rho * self.kinetic()
    }

    pub fn normal_velocity(&self, n: [T; 2]) -> T {
        self.u[0] * n[0] + self.u[1] * n[1]
    }

    /// Wall ghost: normal velocity reversed, scalars copied.
    pub fn mirrored(&self, n: [T; 2]) -> Self {
        let un = self.normal_velocity(n);
        let mut g = *self;
        g.u = [self.u[0] - T::two() * un * n[0], self.u[1] - T::two() * un * n[1]];
        g
    }
}

/// Traces of the primitive fields at the face quadrature points of one side.
struct SideTraces<T> {
    rho: Vec<T>,
    ux: Vec<T>,
    uy: Vec<T>,
    p: Vec<T>,
}

fn side_traces<T: Real>(disc: &Discretization<T>, st: &FlowState<T>, side: FaceSide) -> SideTraces<T> {
    let nq1 = disc.elem.nq1;
    let mut t = SideTraces {
        rho: vec![T::zero(); nq1],
        ux: vec![T::zero(); nq1],
        uy: vec![T::zero(); nq1],
        p: vec![T::zero(); nq1],
    };
    disc.eval_trace(side, disc.block(&st.rho, side.cell), &mut t.rho);
    disc.eval_trace(side, disc.vblock(&st.u, side.cell, 0), &mut t.ux);
    disc.eval_trace(side, disc.vblock(&st.u, side.cell, 1), &mut t.uy);
    disc.eval_trace(side, disc.block(&st.p, side.cell), &mut t.p);
    t
}

/// Point states on both sides of a face (wall ghost on the boundary).
fn face_states<T: Real>(
    disc: &Discretization<T>,
    phys: &Physics<T>,
    st: &FlowState<T>,
    face: &Face<T>,
) -> Result<Vec<(PointState<T>, PointState<T>)>> {
    let nq1 = disc.elem.nq1;
    let l = side_traces(disc, st, face.inner());
    let r = face.outer().map(|o| side_traces(disc, st, o));
    (0..nq1)
        .map(|q| {
            let sl = PointState::new(phys, l.rho[q], [l.ux[q], l.uy[q]], l.p[q])?;
            let sr = match &r {
                Some(r) => PointState::new(phys, r.rho[q], [r.ux[q], r.uy[q]], r.p[q])?,
                None => sl.mirrored(face.normal),
            };
            Ok((sl, sr))
        })
        .collect()
}

/// Adds `sign * sum_q vals[j][q] psi_i(x_q)` of every face touching `cell` to
/// the slots of its local block; side 0 uses `sign0`, side 1 the opposite.
/// `face_vals` stores `slots.len() * nq1` values per face.
#[allow(clippy::too_many_arguments)]
fn scatter_cell_faces<T: Real>(
    disc: &Discretization<T>,
    cell: usize,
    face_vals: &[T],
    slots: &[usize],
    sign0: T,
    skip_boundary: bool,
    blk: &mut [T],
    tmp: &mut [T],
) {
    let nq1 = disc.elem.nq1;
    let n = disc.nloc();
    let stride = slots.len() * nq1;
    for &(f, k) in &disc.cell_faces[cell] {
        let face = &disc.faces()[f];
        if skip_boundary && face.outer().is_none() {
            continue;
        }
        let vals = &face_vals[f * stride..(f + 1) * stride];
        let side = face.sides[k].expect("listed side exists");
        let sign = if k == 0 { sign0 } else { -sign0 };
        for (j, &slot) in slots.iter().enumerate() {
            for q in 0..nq1 {
                tmp[q] = sign * vals[j * nq1 + q];
            }
            disc.face_test(side, &tmp[..nq1], &mut blk[slot * n..(slot + 1) * n]);
        }
    }
}

/// Per-task work arrays sized for volume quadrature.
struct Scratch<T> {
    a: Vec<T>,
    b: Vec<T>,
    c: Vec<T>,
    f: Vec<T>,
}

impl<T: Real> Scratch<T> {
    fn new(nq: usize) -> Self {
        Scratch {
            a: vec![T::zero(); nq],
            b: vec![T::zero(); nq],
            c: vec![T::zero(); nq],
            f: vec![T::zero(); nq],
        }
    }
}

/// Weak residuals of one stage state, all tested against the DG basis (not
/// mass-inverted). Scalar fields have `nloc` entries per cell, vector fields
/// `2 nloc`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tendencies<T> {
    /// `int rho u . grad w - int F_rho [[w]]` (upwind/LLF flux).
    pub dens: Vec<T>,
    /// `int rho u . v`
    pub mom: Vec<T>,
    /// Momentum advection with numerical dissipation, plus gravity.
    pub mom_a: Vec<T>,
    /// Pressure gradient `(1/M^2)(int p div v - int {{p}} [[v]])`.
    pub mom_i: Vec<T>,
    /// `int rho E w`
    pub en: Vec<T>,
    /// Kinetic energy advection plus gravity work.
    pub en_a: Vec<T>,
    /// `-int lambda/2 [[rho E]] . [[w]]`
    pub en_diss: Vec<T>,
    /// Enthalpy flux `int h rho u . grad w - int {{h rho u}} . [[w]]`.
    pub en_i: Vec<T>,
}

const NFACE: usize = 8;
const WIDTH: usize = 11;

/// Evaluates all explicit weak residuals of `st`.
pub fn tendencies<T: Real>(
    disc: &Discretization<T>,
    phys: &Physics<T>,
    st: &FlowState<T>,
    flux: FluxMode,
) -> Result<Tendencies<T>> {
    let m2 = phys.mach * phys.mach;
    let inv_m2 = T::one() / m2;
    let g = phys.inv_froude2();
    let nq1 = disc.elem.nq1;

    let mut face_vals = vec![T::zero(); disc.faces().len() * NFACE * nq1];
    face_vals
        .par_chunks_mut(NFACE * nq1)
        .zip(disc.faces().par_iter())
        .try_for_each(|(v, face)| -> Result<()> {
            let states = face_states(disc, phys, st, face)?;
            let n = face.normal;
            for (q, (l, r)) in states.iter().enumerate() {
                let w = disc.elem.qw[q] * face.measure;
                let (unl, unr) = (l.normal_velocity(n), r.normal_velocity(n));
                let lambda = match flux {
                    FluxMode::Upwind => unl.abs().max(unr.abs()),
                    FluxMode::LocalLaxFriedrichs => {
                        let cl = phys.eos.sound_speed(l.p, l.rho, Some(l.t))?;
                        let cr = phys.eos.sound_speed(r.p, r.rho, Some(r.t))?;
                        (unl.abs() + cl / phys.mach).max(unr.abs() + cr / phys.mach)
                    }
                };
                let hl = T::half() * lambda;
                v[q] = w * (T::half() * (l.rho * unl + r.rho * unr) + hl * (l.rho - r.rho));
                for c in 0..2 {
                    v[(1 + c) * nq1 + q] = w
                        * (T::half() * (l.rho * l.u[c] * unl + r.rho * r.u[c] * unr)
                            + hl * (l.rho * l.u[c] - r.rho * r.u[c]));
                    v[(3 + c) * nq1 + q] = w * inv_m2 * T::half() * (l.p + r.p) * n[c];
                }
                v[5 * nq1 + q] = w
                    * m2
                    * T::half()
                    * (l.kinetic() * l.rho * unl + r.kinetic() * r.rho * unr);
                v[6 * nq1 + q] = w * hl * (l.total_energy(m2) - r.total_energy(m2));
                v[7 * nq1 + q] = w * T::half() * (l.h * l.rho * unl + r.h * r.rho * unr);
            }
            Ok(())
        })?;

    let n = disc.nloc();
    let nq = disc.elem.nq;
    let mut buf = vec![T::zero(); disc.n_cells() * WIDTH * n];
    buf.par_chunks_mut(WIDTH * n)
        .enumerate()
        .try_for_each(|(c, blk)| -> Result<()> {
            let mut r = vec![T::zero(); nq];
            let mut ux = vec![T::zero(); nq];
            let mut uy = vec![T::zero(); nq];
            let mut p = vec![T::zero(); nq];
            disc.eval(disc.block(&st.rho, c), &mut r);
            disc.eval(disc.vblock(&st.u, c, 0), &mut ux);
            disc.eval(disc.vblock(&st.u, c, 1), &mut uy);
            disc.eval(disc.block(&st.p, c), &mut p);
            // grad-test weights per slot and plain test weights per slot
            let mut gx = vec![vec![T::zero(); nq]; WIDTH];
            let mut gy = vec![vec![T::zero(); nq]; WIDTH];
            let mut f = vec![vec![T::zero(); nq]; WIDTH];
            for q in 0..nq {
                let s = PointState::new(phys, r[q], [ux[q], uy[q]], p[q])?;
                let w = disc.qp_weight(c, q);
                let ru = [s.rho * s.u[0] * w, s.rho * s.u[1] * w];
                gx[0][q] = ru[0];
                gy[0][q] = ru[1];
                for k in 0..2 {
                    f[1 + k][q] = ru[k];
                    gx[3 + k][q] = ru[k] * s.u[0];
                    gy[3 + k][q] = ru[k] * s.u[1];
                }
                f[4][q] = -g * s.rho * w;
                gx[5][q] = inv_m2 * s.p * w;
                gy[6][q] = inv_m2 * s.p * w;
                f[7][q] = s.total_energy(m2) * w;
                let kin = m2 * s.kinetic();
                gx[8][q] = kin * ru[0];
                gy[8][q] = kin * ru[1];
                f[8][q] = -m2 * g * ru[1];
                gx[10][q] = s.h * ru[0];
                gy[10][q] = s.h * ru[1];
            }
            for k in 0..WIDTH {
                let out = &mut blk[k * n..(k + 1) * n];
                disc.vol_test(&f[k], out);
                if gx[k].iter().chain(&gy[k]).any(|v| *v != T::zero()) {
                    let (a, b) = (&mut gx[k], &mut gy[k]);
                    disc.vol_test_grad(c, a, b, out);
                }
            }
            let mut tmp = vec![T::zero(); nq1];
            let slots = [0, 3, 4, 5, 6, 8, 9, 10];
            scatter_cell_faces(disc, c, &face_vals, &slots, -T::one(), false, blk, &mut tmp);
            Ok(())
        })?;

    let pick = |slots: &[usize]| -> Vec<T> {
        let mut out = Vec::with_capacity(disc.n_cells() * slots.len() * n);
        for c in 0..disc.n_cells() {
            for &s in slots {
                let o = (c * WIDTH + s) * n;
                out.extend_from_slice(&buf[o..o + n]);
            }
        }
        out
    };
    Ok(Tendencies {
        dens: pick(&[0]),
        mom: pick(&[1, 2]),
        mom_a: pick(&[3, 4]),
        mom_i: pick(&[5, 6]),
        en: pick(&[7]),
        en_a: pick(&[8]),
        en_diss: pick(&[9]),
        en_i: pick(&[10]),
    })
}

fn axpy<T: Real>(y: &mut [T], a: T, x: &[T]) {
    y.iter_mut().zip(x).for_each(|(y, &x)| *y += a * x);
}

/// `rho_s = rho^n + dt M^-1 sum_m a_m dens_m`.
pub fn explicit_density<T: Real>(
    disc: &Discretization<T>,
    rho_n: &[T],
    tends: &[Tendencies<T>],
    a_row: &[f64],
    dt: T,
) -> Vec<T> {
    let mut d = vec![T::zero(); rho_n.len()];
    for (t, &a) in tends.iter().zip(a_row) {
        if a != 0.0 {
            axpy(&mut d, T::lit(a), &t.dens);
        }
    }
    disc.mass_solve(&mut d, 1);
    rho_n.iter().zip(&d).map(|(&r, &d)| r + dt * d).collect()
}

/// Replaces the density by its cell mean where `sum_faces ||rho+ - rho-||^2`
/// exceeds `threshold`; returns the limited field and the flags.
pub fn limit_density_q0<T: Real>(disc: &Discretization<T>, rho: &[T], threshold: T) -> (Vec<T>, Vec<bool>) {
    let indicator = density_jump_indicator(disc, rho);
    let means = disc.cell_means(rho);
    let n = disc.nloc();
    let mut out = rho.to_vec();
    let flags: Vec<bool> = indicator.iter().map(|&e| e > threshold).collect();
    for (c, &f) in flags.iter().enumerate() {
        if f {
            out[c * n..(c + 1) * n].iter_mut().for_each(|v| *v = means[c]);
        }
    }
    (out, flags)
}

/// `eta_K = sum over interior faces of K of ||rho+ - rho-||^2_{L2(face)}`.
pub fn density_jump_indicator<T: Real>(disc: &Discretization<T>, rho: &[T]) -> Vec<T> {
    let nq1 = disc.elem.nq1;
    let mut eta = vec![T::zero(); disc.n_cells()];
    let mut a = vec![T::zero(); nq1];
    let mut b = vec![T::zero(); nq1];
    for face in disc.faces() {
        let (Some(l), Some(r)) = (face.sides[0], face.sides[1]) else {
            continue;
        };
        disc.eval_trace(l, disc.block(rho, l.cell), &mut a);
        disc.eval_trace(r, disc.block(rho, r.cell), &mut b);
        let j: T = (0..nq1)
            .map(|q| disc.elem.qw[q] * face.measure * (a[q] - b[q]) * (a[q] - b[q]))
            .sum();
        eta[l.cell] += j;
        eta[r.cell] += j;
    }
    eta
}

/// Operators of one implicit stage with step `tau = a~_ss dt`:
/// `A = int rho_s phi.phi`, `B P = tau/M^2 (-int P div phi + int {{P}} [[phi]])`,
/// `C U = tau (-int h rho U . grad psi + int {{h rho U}} . [[psi]])`,
/// `D P = int alpha P psi` with `rho e = alpha p + beta` at the frozen
/// temperature of the pressure iterate.
pub struct StageOperators<'a, T> {
    pub disc: &'a Discretization<T>,
    pub phys: &'a Physics<T>,
    pub tau: T,
    rho_q: Vec<T>,
    a_chol: Vec<T>,
    hr_q: Vec<T>,
    /// `h rho` traces, `2 nq1` per face (zero on boundary faces).
    hr_face: Vec<T>,
    alpha_q: Vec<T>,
    beta_q: Vec<T>,
}

impl<'a, T: Real> StageOperators<'a, T> {
    /// Builds `A` from the stage density; call [`set_pressure_iterate`](Self::set_pressure_iterate)
    /// before using `C`, `D` or the Schur complement.
    pub fn new(disc: &'a Discretization<T>, phys: &'a Physics<T>, tau: T, rho: &[T]) -> Result<Self> {
        let n = disc.nloc();
        let nq = disc.elem.nq;
        let e = &disc.elem;
        let mut rho_q = vec![T::zero(); disc.n_cells() * nq];
        rho_q
            .par_chunks_mut(nq)
            .enumerate()
            .for_each(|(c, out)| disc.eval(disc.block(rho, c), out));
        if let Some(v) = rho_q.iter().find(|v| !(**v > T::zero())) {
            return Err(Error::NonPhysicalState(format!(
                "stage density {v} at a quadrature point"
            )));
        }
        let mut a_chol = vec![T::zero(); disc.n_cells() * n * n];
        a_chol
            .par_chunks_mut(n * n)
            .enumerate()
            .try_for_each(|(c, m)| -> Result<()> {
                for q in 0..nq {
                    let w = disc.qp_weight(c, q) * rho_q[c * nq + q];
                    let phi = &e.phi[q * n..(q + 1) * n];
                    for i in 0..n {
                        let wi = w * phi[i];
                        for j in 0..n {
                            m[i * n + j] += wi * phi[j];
                        }
                    }
                }
                dense::cholesky(m, n)
            })?;
        Ok(StageOperators {
            disc,
            phys,
            tau,
            rho_q,
            a_chol,
            hr_q: Vec::new(),
            hr_face: Vec::new(),
            alpha_q: Vec::new(),
            beta_q: Vec::new(),
        })
    }

    /// Evaluates enthalpy and the energy linearization at the pressure iterate.
    pub fn set_pressure_iterate(&mut self, rho: &[T], p: &[T]) -> Result<()> {
        let disc = self.disc;
        let phys = self.phys;
        let nq = disc.elem.nq;
        let nq1 = disc.elem.nq1;
        let mut hr = vec![T::zero(); disc.n_cells() * nq];
        let mut al = vec![T::zero(); disc.n_cells() * nq];
        let mut be = vec![T::zero(); disc.n_cells() * nq];
        hr.par_chunks_mut(nq)
            .zip(al.par_chunks_mut(nq))
            .zip(be.par_chunks_mut(nq))
            .enumerate()
            .try_for_each(|(c, ((hr, al), be))| -> Result<()> {
                let mut pq = vec![T::zero(); nq];
                disc.eval(disc.block(p, c), &mut pq);
                for q in 0..nq {
                    let r = self.rho_q[c * nq + q];
                    let s = PointState::new(phys, r, [T::zero(); 2], pq[q])?;
                    hr[q] = s.h * r;
                    let (a, b) = phys.eos.energy_linearization(r, s.t)?;
                    al[q] = a;
                    be[q] = b;
                }
                Ok(())
            })?;
        let mut hr_face = vec![T::zero(); disc.faces().len() * 2 * nq1];
        hr_face
            .par_chunks_mut(2 * nq1)
            .zip(disc.faces().par_iter())
            .try_for_each(|(v, face)| -> Result<()> {
                if face.outer().is_none() {
                    return Ok(());
                }
                let mut rr = vec![T::zero(); nq1];
                let mut pp = vec![T::zero(); nq1];
                for (k, side) in face.sides.iter().enumerate() {
                    let side = side.expect("interior face");
                    disc.eval_trace(side, disc.block(rho, side.cell), &mut rr);
                    disc.eval_trace(side, disc.block(p, side.cell), &mut pp);
                    for q in 0..nq1 {
                        let s = PointState::new(phys, rr[q], [T::zero(); 2], pp[q])?;
                        v[k * nq1 + q] = s.h * rr[q];
                    }
                }
                Ok(())
            })?;
        self.hr_q = hr;
        self.alpha_q = al;
        self.beta_q = be;
        self.hr_face = hr_face;
        Ok(())
    }

    fn scalar_size(&self) -> usize {
        self.disc.scalar_len()
    }

    pub fn apply_a(&self, u: &[T]) -> Vec<T> {
        let disc = self.disc;
        let n = disc.nloc();
        let nq = disc.elem.nq;
        let mut out = vec![T::zero(); u.len()];
        out.par_chunks_mut(2 * n).enumerate().for_each_init(|| Scratch::new(nq), |sc, (c, o)| {
            let v = &mut sc.a;
            for comp in 0..2 {
                disc.eval(disc.vblock(u, c, comp), v);
                for q in 0..nq {
                    v[q] *= disc.qp_weight(c, q) * self.rho_q[c * nq + q];
                }
                disc.vol_test(v, &mut o[comp * n..(comp + 1) * n]);
            }
        });
        out
    }

    pub fn apply_a_inv(&self, f: &[T]) -> Vec<T> {
        let n = self.disc.nloc();
        let mut out = f.to_vec();
        out.par_chunks_mut(2 * n).enumerate().for_each(|(c, o)| {
            let l = &self.a_chol[c * n * n..(c + 1) * n * n];
            for comp in o.chunks_mut(n) {
                dense::cholesky_solve(l, n, comp);
            }
        });
        out
    }

    pub fn apply_b(&self, p: &[T]) -> Vec<T> {
        let disc = self.disc;
        let n = disc.nloc();
        let nq = disc.elem.nq;
        let nq1 = disc.elem.nq1;
        let s = self.tau / (self.phys.mach * self.phys.mach);
        let mut face_vals = vec![T::zero(); disc.faces().len() * 2 * nq1];
        face_vals
            .par_chunks_mut(2 * nq1)
            .zip(disc.faces().par_iter())
            .for_each_init(
                || (vec![T::zero(); nq1], vec![T::zero(); nq1]),
                |(a, b), (v, face)| {
                    let l = face.inner();
                    disc.eval_trace(l, disc.block(p, l.cell), a);
                    if let Some(r) = face.outer() {
                        disc.eval_trace(r, disc.block(p, r.cell), b);
                        a.iter_mut().zip(b.iter()).for_each(|(a, &b)| *a = T::half() * (*a + b));
                    }
                    for q in 0..nq1 {
                        let w = s * disc.elem.qw[q] * face.measure * a[q];
                        v[q] = w * face.normal[0];
                        v[nq1 + q] = w * face.normal[1];
                    }
                },
            );
        let mut out = vec![T::zero(); disc.vector_len()];
        out.par_chunks_mut(2 * n).enumerate().for_each_init(
            || Scratch::new(nq),
            |sc, (c, o)| {
                disc.eval(disc.block(p, c), &mut sc.a);
                for comp in 0..2 {
                    for q in 0..nq {
                        let v = -s * disc.qp_weight(c, q) * sc.a[q];
                        sc.b[q] = if comp == 0 { v } else { T::zero() };
                        sc.c[q] = if comp == 0 { T::zero() } else { v };
                    }
                    disc.vol_test_grad(c, &mut sc.b, &mut sc.c, &mut o[comp * n..(comp + 1) * n]);
                }
                scatter_cell_faces(disc, c, &face_vals, &[0, 1], T::one(), false, o, &mut sc.f);
            },
        );
        out
    }

    pub fn apply_c(&self, u: &[T]) -> Vec<T> {
        let disc = self.disc;
        let n = disc.nloc();
        let nq = disc.elem.nq;
        let nq1 = disc.elem.nq1;
        let tau = self.tau;
        let mut face_vals = vec![T::zero(); disc.faces().len() * nq1];
        face_vals
            .par_chunks_mut(nq1)
            .zip(disc.faces().par_iter())
            .enumerate()
            .for_each_init(
                || (vec![T::zero(); nq1], vec![T::zero(); nq1]),
                |(ux, uy), (f, (v, face))| {
                    // wall contributions vanish for the mirrored ghost state
                    if face.outer().is_none() {
                        return;
                    }
                    let hr = &self.hr_face[f * 2 * nq1..(f + 1) * 2 * nq1];
                    for (k, side) in face.sides.iter().enumerate() {
                        let side = side.expect("interior face");
                        disc.eval_trace(side, disc.vblock(u, side.cell, 0), ux);
                        disc.eval_trace(side, disc.vblock(u, side.cell, 1), uy);
                        for q in 0..nq1 {
                            let un = ux[q] * face.normal[0] + uy[q] * face.normal[1];
                            v[q] += T::half() * hr[k * nq1 + q] * un;
                        }
                    }
                    for q in 0..nq1 {
                        v[q] *= tau * disc.elem.qw[q] * face.measure;
                    }
                },
            );
        let mut out = vec![T::zero(); disc.scalar_len()];
        out.par_chunks_mut(n).enumerate().for_each_init(
            || Scratch::new(nq),
            |sc, (c, o)| {
                disc.eval(disc.vblock(u, c, 0), &mut sc.a);
                disc.eval(disc.vblock(u, c, 1), &mut sc.b);
                for q in 0..nq {
                    let w = -tau * disc.qp_weight(c, q) * self.hr_q[c * nq + q];
                    sc.a[q] *= w;
                    sc.b[q] *= w;
                }
                disc.vol_test_grad(c, &mut sc.a, &mut sc.b, o);
                scatter_cell_faces(disc, c, &face_vals, &[0], T::one(), true, o, &mut sc.f);
            },
        );
        out
    }

    fn weighted_mass(&self, x: &[T], weight: &[T]) -> Vec<T> {
        let disc = self.disc;
        let n = disc.nloc();
        let nq = disc.elem.nq;
        let mut out = vec![T::zero(); disc.scalar_len()];
        out.par_chunks_mut(n).enumerate().for_each_init(
            || vec![T::zero(); nq],
            |v, (c, o)| {
                disc.eval(disc.block(x, c), v);
                for q in 0..nq {
                    v[q] *= disc.qp_weight(c, q) * weight[c * nq + q];
                }
                disc.vol_test(v, o);
            },
        );
        out
    }

    pub fn apply_d(&self, p: &[T]) -> Vec<T> {
        self.weighted_mass(p, &self.alpha_q)
    }

    pub fn d_diagonal(&self) -> Vec<T> {
        let disc = self.disc;
        let n = disc.nloc();
        let nq = disc.elem.nq;
        let e = &disc.elem;
        let mut out = vec![T::zero(); disc.scalar_len()];
        out.par_chunks_mut(n).enumerate().for_each(|(c, o)| {
            for q in 0..nq {
                let w = disc.qp_weight(c, q) * self.alpha_q[c * nq + q];
                for i in 0..n {
                    let phi = e.phi[q * n + i];
                    o[i] += w * phi * phi;
                }
            }
        });
        out
    }

    /// `(D - C A^-1 B) P`
    pub fn apply_schur(&self, p: &[T]) -> Vec<T> {
        let cab = self.apply_c(&self.apply_a_inv(&self.apply_b(p)));
        let mut out = self.apply_d(p);
        out.iter_mut().zip(&cab).for_each(|(o, &v)| *o -= v);
        out
    }

    /// `int (beta + M^2 rho_s k(u)) psi` at the current iterate.
    pub fn energy_offset(&self, u: &[T]) -> Vec<T> {
        let disc = self.disc;
        let n = disc.nloc();
        let nq = disc.elem.nq;
        let m2 = self.phys.mach * self.phys.mach;
        let mut out = vec![T::zero(); disc.scalar_len()];
        out.par_chunks_mut(n).enumerate().for_each(|(c, o)| {
            let mut ux = vec![T::zero(); nq];
            let mut uy = vec![T::zero(); nq];
            disc.eval(disc.vblock(u, c, 0), &mut ux);
            disc.eval(disc.vblock(u, c, 1), &mut uy);
            let mut v = vec![T::zero(); nq];
            for q in 0..nq {
                let k = T::half() * (ux[q] * ux[q] + uy[q] * uy[q]);
                v[q] = disc.qp_weight(c, q)
                    * (self.beta_q[c * nq + q] + m2 * self.rho_q[c * nq + q] * k);
            }
            disc.vol_test(&v, o);
        });
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageReport {
    pub fixed_point_iterations: usize,
    pub krylov_iterations: usize,
    /// Last relative pressure increment.
    pub increment: f64,
    pub limited_cells: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepReport {
    /// Implicit stages only.
    pub stages: Vec<StageReport>,
}

impl StepReport {
    pub fn mean_fixed_point_iterations(&self) -> f64 {
        if self.stages.is_empty() {
            return 0.0;
        }
        self.stages.iter().map(|s| s.fixed_point_iterations as f64).sum::<f64>()
            / self.stages.len() as f64
    }

    pub fn krylov_iterations(&self) -> usize {
        self.stages.iter().map(|s| s.krylov_iterations).sum()
    }
}

/// Fixed point on the pressure: solve `(D - C A^-1 B) P = G - offset - C A^-1 F`,
/// then `A U = F - B P`, relinearizing `C`, `D` and the kinetic energy.
#[allow(clippy::too_many_arguments)]
pub fn solve_implicit_stage<T: Real>(
    disc: &Discretization<T>,
    phys: &Physics<T>,
    settings: &HyperbolicSettings,
    tau: T,
    rho: &[T],
    f: &[T],
    g: &[T],
    p0: &[T],
    u0: &[T],
) -> Result<(Vec<T>, Vec<T>, StageReport)> {
    let mut ops = StageOperators::new(disc, phys, tau, rho)?;
    let ainv_f = ops.apply_a_inv(f);
    let mut p = p0.to_vec();
    let mut u = u0.to_vec();
    let mut rep = StageReport::default();
    for _ in 0..settings.fixed_point_max {
        ops.set_pressure_iterate(rho, &p)?;
        let off = ops.energy_offset(&u);
        let caf = ops.apply_c(&ainv_f);
        let rhs: Vec<T> = (0..g.len()).map(|i| g[i] - off[i] - caf[i]).collect();
        let diag = ops.d_diagonal();
        let op = FnOperator {
            n: ops.scalar_size(),
            f: |x: &[T], y: &mut [T]| y.copy_from_slice(&ops.apply_schur(x)),
        };
        let (p_new, kr) = gmres(&op, &rhs, Some(&p), &settings.krylov, Some(&diag))?;
        rep.krylov_iterations += kr.iterations;
        rep.fixed_point_iterations += 1;
        let bp = ops.apply_b(&p_new);
        let fb: Vec<T> = f.iter().zip(&bp).map(|(&a, &b)| a - b).collect();
        u = ops.apply_a_inv(&fb);
        let diff: Vec<T> = p_new.iter().zip(&p).map(|(&a, &b)| a - b).collect();
        let pn = norm2(&p_new);
        let inc = if pn > T::zero() { norm2(&diff) / pn } else { norm2(&diff) };
        rep.increment = inc.to_f64_lossy();
        p = p_new;
        if !p.iter().all(|v| v.is_finite()) {
            return Err(Error::NonPhysicalState("non-finite pressure".into()));
        }
        if rep.increment < settings.fixed_point_tol {
            break;
        }
    }
    Ok((p, u, rep))
}

/// One step of the hyperbolic subsystem with the additive tableau `tab`;
/// the end-of-step state is the last stage.
pub fn hyperbolic_step<T: Real>(
    disc: &Discretization<T>,
    phys: &Physics<T>,
    tab: &ImexTableau,
    settings: &HyperbolicSettings,
    state: &FlowState<T>,
    dt: T,
) -> Result<(FlowState<T>, StepReport)> {
    let ns = tab.stages();
    let mut report = StepReport::default();
    let mut prev = state.clone();
    let mut tends = vec![tendencies(disc, phys, state, settings.flux)?];
    for s in 1..ns {
        let mut rho = explicit_density(disc, &state.rho, &tends, &tab.a[s][..s], dt);
        let mut limited = 0;
        if let (FluxMode::LocalLaxFriedrichs, Some(th)) = (settings.flux, settings.limiter_threshold) {
            let (r, flags) = limit_density_q0(disc, &rho, T::lit(th));
            rho = r;
            limited = flags.iter().filter(|f| **f).count();
        }
        let mut f = tends[0].mom.clone();
        let mut g = tends[0].en.clone();
        for (m, t) in tends.iter().enumerate() {
            let (a, at) = (T::lit(tab.a[s][m]) * dt, T::lit(tab.a_tilde[s][m]) * dt);
            axpy(&mut f, a, &t.mom_a);
            axpy(&mut f, at, &t.mom_i);
            axpy(&mut g, a, &t.en_a);
            axpy(&mut g, a, &t.en_diss);
            axpy(&mut g, at, &t.en_i);
        }
        if settings.duplicate_a31_term && s == 2 {
            axpy(&mut g, T::lit(tab.a[2][0]) * dt, &tends[0].en_diss);
        }
        let tau = T::lit(tab.a_tilde[s][s]) * dt;
        let (p, u, mut rep) =
            solve_implicit_stage(disc, phys, settings, tau, &rho, &f, &g, &prev.p, &prev.u)?;
        rep.limited_cells = limited;
        report.stages.push(rep);
        let st = FlowState { rho, u, p };
        if s + 1 < ns {
            tends.push(tendencies(disc, phys, &st, settings.flux)?);
        }
        prev = st;
    }
    Ok((prev, report))
}
