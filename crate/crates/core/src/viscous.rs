//! Implicit viscous and heat-conduction substep: symmetric interior penalty
//! discretizations of the stress and Laplace operators, solved stage by stage
//! with the implicit tableau after the hyperbolic step.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dg::Discretization;
use crate::error::{Error, Result};
use crate::hyperbolic::{hyperbolic_step, HyperbolicSettings, StepReport};
use crate::imex::ImexTableau;
use crate::linsolve::{cg, FnOperator, SolverConfig};
use crate::mesh::{Face, FaceKind};
use crate::model::{BoundaryCondition, FlowState, Physics};
use crate::real::{norm2, Real};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ViscousSettings {
    /// Temperature fixed point for temperature-dependent cubic coefficients.
    pub fixed_point_max: usize,
    pub fixed_point_tol: f64,
    pub krylov: SolverConfig,
    /// Multiplies the interior penalty of both operators.
    pub penalty_factor: f64,
    /// Second-order symmetric splitting instead of the first-order sequence.
    pub strang: bool,
}

impl Default for ViscousSettings {
    fn default() -> Self {
        ViscousSettings {
            fixed_point_max: 10,
            fixed_point_tol: 1e-10,
            krylov: SolverConfig::with_tol(1e-12),
            penalty_factor: 1.0,
            strang: false,
        }
    }
}

/// `sigma(G) = G + G^T - 2/3 tr(G) I`, `G[c][d] = d u_c / d x_d`.
#[inline]
pub fn deviatoric<T: Real>(g: [[T; 2]; 2]) -> [[T; 2]; 2] {
    let tr = T::lit(2.0 / 3.0) * (g[0][0] + g[1][1]);
    [
        [g[0][0] + g[0][0] - tr, g[0][1] + g[1][0]],
        [g[1][0] + g[0][1], g[1][1] + g[1][1] - tr],
    ]
}

/// Face buffer layout: two sides, `ncomp` components, value/x-grad/y-grad
/// weights at `nq1` points.
#[inline]
fn fidx(ncomp: usize, nq1: usize, k: usize, c: usize, j: usize) -> usize {
    ((k * ncomp + c) * 3 + j) * nq1
}

/// Assembles `out_i = sum_cells vol(cell) + sum_faces face(face)` where the
/// face kernel writes quadrature-weighted test coefficients of each side and
/// the volume kernel adds directly into the cell block.
fn assemble<T, FK, VK>(disc: &Discretization<T>, ncomp: usize, face_kernel: FK, vol_kernel: VK) -> Vec<T>
where
    T: Real,
    FK: Fn(usize, &Face<T>, &mut [T]) + Sync,
    VK: Fn(usize, &mut [T], &mut VolScratch<T>) + Sync,
{
    let n = disc.nloc();
    let nq1 = disc.elem.nq1;
    let fsize = 2 * ncomp * 3 * nq1;
    let mut fbuf = vec![T::zero(); disc.faces().len() * fsize];
    fbuf.par_chunks_mut(fsize)
        .zip(disc.faces().par_iter())
        .enumerate()
        .for_each(|(f, (b, face))| face_kernel(f, face, b));
    let mut out = vec![T::zero(); disc.n_cells() * ncomp * n];
    out.par_chunks_mut(ncomp * n).enumerate().for_each_init(
        || VolScratch::new(disc.elem.nq),
        |sc, (c, o)| {
            vol_kernel(c, o, sc);
            for &(f, k) in &disc.cell_faces[c] {
                let side = disc.faces()[f].sides[k].expect("listed side exists");
                let b = &fbuf[f * fsize..(f + 1) * fsize];
                for comp in 0..ncomp {
                    let o = &mut o[comp * n..(comp + 1) * n];
                    let v = fidx(ncomp, nq1, k, comp, 0);
                    disc.face_test(side, &b[v..v + nq1], o);
                    sc.fx[..nq1].copy_from_slice(&b[v + nq1..v + 2 * nq1]);
                    sc.fy[..nq1].copy_from_slice(&b[v + 2 * nq1..v + 3 * nq1]);
                    disc.face_test_grad(side, &mut sc.fx[..nq1], &mut sc.fy[..nq1], o);
                }
            }
        },
    );
    out
}

struct VolScratch<T> {
    v: [Vec<T>; 2],
    gx: [Vec<T>; 2],
    gy: [Vec<T>; 2],
    fx: Vec<T>,
    fy: Vec<T>,
}

impl<T: Real> VolScratch<T> {
    fn new(nq: usize) -> Self {
        let z = || vec![T::zero(); nq];
        VolScratch {
            v: [z(), z()],
            gx: [z(), z()],
            gy: [z(), z()],
            fx: z(),
            fy: z(),
        }
    }
}

/// Values and gradients of a field with `ncomp` components on one face side.
struct Trace<T> {
    v: Vec<Vec<T>>,
    gx: Vec<Vec<T>>,
    gy: Vec<Vec<T>>,
}

fn trace<T: Real>(disc: &Discretization<T>, field: &[T], ncomp: usize, side: crate::mesh::FaceSide) -> Trace<T> {
    let nq1 = disc.elem.nq1;
    let n = disc.nloc();
    let mut t = Trace {
        v: vec![vec![T::zero(); nq1]; ncomp],
        gx: vec![vec![T::zero(); nq1]; ncomp],
        gy: vec![vec![T::zero(); nq1]; ncomp],
    };
    for c in 0..ncomp {
        let blk = &field[(ncomp * side.cell + c) * n..(ncomp * side.cell + c + 1) * n];
        disc.eval_trace(side, blk, &mut t.v[c]);
        disc.eval_trace_grad(side, blk, &mut t.gx[c], &mut t.gy[c]);
    }
    t
}

impl<T: Real> Trace<T> {
    fn grad(&self, q: usize) -> [[T; 2]; 2] {
        [[self.gx[0][q], self.gy[0][q]], [self.gx[1][q], self.gy[1][q]]]
    }
    fn vel(&self, q: usize) -> [T; 2] {
        [self.v[0][q], self.v[1][q]]
    }
}

fn matvec2<T: Real>(m: [[T; 2]; 2], n: [T; 2]) -> [T; 2] {
    [m[0][0] * n[0] + m[0][1] * n[1], m[1][0] * n[0] + m[1][1] * n[1]]
}

/// Greedy distance-one coloring of the cell adjacency graph.
fn color_cells<T: Real>(disc: &Discretization<T>) -> Vec<Vec<usize>> {
    let nc = disc.n_cells();
    let mut color = vec![usize::MAX; nc];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for c in 0..nc {
        let mut used = Vec::new();
        for &(f, k) in &disc.cell_faces[c] {
            if let Some(o) = disc.faces()[f].sides[1 - k] {
                if color[o.cell] != usize::MAX {
                    used.push(color[o.cell]);
                }
            }
        }
        let col = (0..).find(|k| !used.contains(k)).expect("a free color exists");
        color[c] = col;
        if col == classes.len() {
            classes.push(Vec::new());
        }
        classes[col].push(c);
    }
    classes
}

/// Diagonal of a cell-local-coupling operator by colored probing.
fn probe_diagonal<T: Real, F: Fn(&[T]) -> Vec<T>>(disc: &Discretization<T>, ncomp: usize, op: F) -> Vec<T> {
    let n = disc.nloc();
    let len = disc.n_cells() * ncomp * n;
    let mut diag = vec![T::zero(); len];
    let mut x = vec![T::zero(); len];
    for class in color_cells(disc) {
        for comp in 0..ncomp {
            for i in 0..n {
                for &c in &class {
                    x[(ncomp * c + comp) * n + i] = T::one();
                }
                let y = op(&x);
                for &c in &class {
                    let k = (ncomp * c + comp) * n + i;
                    diag[k] = y[k];
                    x[k] = T::zero();
                }
            }
        }
    }
    diag
}

/// SIP operators on one discretization. Velocity walls are Dirichlet
/// (Nitsche), temperature walls Dirichlet if isothermal and natural otherwise.
pub struct ViscousOperators<'a, T> {
    pub disc: &'a Discretization<T>,
    pub phys: &'a Physics<T>,
    penalty: Vec<T>,
    stress_diag: Vec<T>,
    laplace_diag: Vec<T>,
}

impl<'a, T: Real> ViscousOperators<'a, T> {
    pub fn new(disc: &'a Discretization<T>, phys: &'a Physics<T>, penalty_factor: f64) -> Self {
        let pf = T::lit(penalty_factor);
        let penalty = disc.faces().iter().map(|f| pf * disc.sip_penalty(f)).collect();
        let mut ops = ViscousOperators {
            disc,
            phys,
            penalty,
            stress_diag: Vec::new(),
            laplace_diag: Vec::new(),
        };
        ops.stress_diag = probe_diagonal(disc, 2, |x| ops.apply_stress(x));
        ops.laplace_diag = probe_diagonal(disc, 1, |x| ops.apply_laplace(x));
        ops
    }

    fn wall(&self, face: &Face<T>) -> Option<([T; 2], Option<T>)> {
        match face.kind {
            FaceKind::Boundary(side) => match self.phys.boundaries[side] {
                BoundaryCondition::Wall {
                    velocity,
                    temperature,
                } => Some((velocity, temperature)),
                BoundaryCondition::Periodic => None,
            },
            _ => None,
        }
    }

    /// Homogeneous SIP form of `-div sigma(u)` tested with the vector basis.
    pub fn apply_stress(&self, u: &[T]) -> Vec<T> {
        self.stress_form(Some(u), false)
    }

    /// Wall-velocity data `-int sigma(v) n . g + C int g . v`.
    pub fn stress_data(&self) -> Vec<T> {
        self.stress_form(None, true)
    }

    fn stress_form(&self, u: Option<&[T]>, data: bool) -> Vec<T> {
        let disc = self.disc;
        let nq1 = disc.elem.nq1;
        let nq = disc.elem.nq;
        let face_kernel = |fi: usize, face: &Face<T>, b: &mut [T]| {
            let pen = self.penalty[fi];
            let nrm = face.normal;
            let wq = |q: usize| disc.elem.qw[q] * face.measure;
            match face.outer() {
                Some(o) => {
                    let Some(u) = u else { return };
                    let t0 = trace(disc, u, 2, face.inner());
                    let t1 = trace(disc, u, 2, o);
                    for q in 0..nq1 {
                        let s0 = deviatoric(t0.grad(q));
                        let s1 = deviatoric(t1.grad(q));
                        let sn0 = matvec2(s0, nrm);
                        let sn1 = matvec2(s1, nrm);
                        let (a, c) = (t0.vel(q), t1.vel(q));
                        let jmp = [a[0] - c[0], a[1] - c[1]];
                        let w = deviatoric(outer(jmp, nrm));
                        for k in 0..2 {
                            let sgn = if k == 0 { T::one() } else { -T::one() };
                            for comp in 0..2 {
                                let avg = T::half() * (sn0[comp] + sn1[comp]);
                                let i = fidx(2, nq1, k, comp, 0);
                                b[i + q] = wq(q) * sgn * (pen * jmp[comp] - avg);
                                b[i + nq1 + q] = -wq(q) * T::half() * w[comp][0];
                                b[i + 2 * nq1 + q] = -wq(q) * T::half() * w[comp][1];
                            }
                        }
                    }
                }
                None => {
                    let Some((g, _)) = self.wall(face) else { return };
                    if data {
                        let w = deviatoric(outer(g, nrm));
                        for q in 0..nq1 {
                            for comp in 0..2 {
                                let i = fidx(2, nq1, 0, comp, 0);
                                b[i + q] = wq(q) * pen * g[comp];
                                b[i + nq1 + q] = -wq(q) * w[comp][0];
                                b[i + 2 * nq1 + q] = -wq(q) * w[comp][1];
                            }
                        }
                        return;
                    }
                    let Some(u) = u else { return };
                    let t0 = trace(disc, u, 2, face.inner());
                    for q in 0..nq1 {
                        let sn = matvec2(deviatoric(t0.grad(q)), nrm);
                        let jmp = t0.vel(q);
                        let w = deviatoric(outer(jmp, nrm));
                        for comp in 0..2 {
                            let i = fidx(2, nq1, 0, comp, 0);
                            b[i + q] = wq(q) * (pen * jmp[comp] - sn[comp]);
                            b[i + nq1 + q] = -wq(q) * w[comp][0];
                            b[i + 2 * nq1 + q] = -wq(q) * w[comp][1];
                        }
                    }
                }
            }
        };
        let n = disc.nloc();
        let vol_kernel = |c: usize, o: &mut [T], sc: &mut VolScratch<T>| {
            let Some(u) = u else { return };
            for comp in 0..2 {
                disc.eval_grad(c, disc.vblock(u, c, comp), &mut sc.gx[comp], &mut sc.gy[comp]);
            }
            for q in 0..nq {
                let s = deviatoric([[sc.gx[0][q], sc.gy[0][q]], [sc.gx[1][q], sc.gy[1][q]]]);
                let w = disc.qp_weight(c, q);
                sc.v[0][q] = w * s[0][0];
                sc.v[1][q] = w * s[0][1];
                sc.fx[q] = w * s[1][0];
                sc.fy[q] = w * s[1][1];
            }
            let VolScratch { v, fx, fy, .. } = sc;
            let [v0, v1] = v;
            disc.vol_test_grad(c, v0, v1, &mut o[..n]);
            disc.vol_test_grad(c, fx, fy, &mut o[n..2 * n]);
        };
        assemble(disc, 2, face_kernel, vol_kernel)
    }

    /// Homogeneous SIP form of `-Laplace T`.
    pub fn apply_laplace(&self, t: &[T]) -> Vec<T> {
        self.laplace_form(Some(t), false)
    }

    /// Isothermal wall data `-int grad w . n T_w + C int T_w w`.
    pub fn laplace_data(&self) -> Vec<T> {
        self.laplace_form(None, true)
    }

    fn laplace_form(&self, t: Option<&[T]>, data: bool) -> Vec<T> {
        let disc = self.disc;
        let nq1 = disc.elem.nq1;
        let nq = disc.elem.nq;
        let face_kernel = |fi: usize, face: &Face<T>, b: &mut [T]| {
            let pen = self.penalty[fi];
            let nrm = face.normal;
            let wq = |q: usize| disc.elem.qw[q] * face.measure;
            match face.outer() {
                Some(o) => {
                    let Some(t) = t else { return };
                    let t0 = trace(disc, t, 1, face.inner());
                    let t1 = trace(disc, t, 1, o);
                    for q in 0..nq1 {
                        let g0 = t0.gx[0][q] * nrm[0] + t0.gy[0][q] * nrm[1];
                        let g1 = t1.gx[0][q] * nrm[0] + t1.gy[0][q] * nrm[1];
                        let avg = T::half() * (g0 + g1);
                        let jmp = t0.v[0][q] - t1.v[0][q];
                        for k in 0..2 {
                            let sgn = if k == 0 { T::one() } else { -T::one() };
                            let i = fidx(1, nq1, k, 0, 0);
                            b[i + q] = wq(q) * sgn * (pen * jmp - avg);
                            b[i + nq1 + q] = -wq(q) * T::half() * jmp * nrm[0];
                            b[i + 2 * nq1 + q] = -wq(q) * T::half() * jmp * nrm[1];
                        }
                    }
                }
                None => {
                    let Some((_, Some(tw))) = self.wall(face) else { return };
                    if data {
                        for q in 0..nq1 {
                            let i = fidx(1, nq1, 0, 0, 0);
                            b[i + q] = wq(q) * pen * tw;
                            b[i + nq1 + q] = -wq(q) * tw * nrm[0];
                            b[i + 2 * nq1 + q] = -wq(q) * tw * nrm[1];
                        }
                        return;
                    }
                    let Some(t) = t else { return };
                    let t0 = trace(disc, t, 1, face.inner());
                    for q in 0..nq1 {
                        let g = t0.gx[0][q] * nrm[0] + t0.gy[0][q] * nrm[1];
                        let jmp = t0.v[0][q];
                        let i = fidx(1, nq1, 0, 0, 0);
                        b[i + q] = wq(q) * (pen * jmp - g);
                        b[i + nq1 + q] = -wq(q) * jmp * nrm[0];
                        b[i + 2 * nq1 + q] = -wq(q) * jmp * nrm[1];
                    }
                }
            }
        };
        let vol_kernel = |c: usize, o: &mut [T], sc: &mut VolScratch<T>| {
            let Some(t) = t else { return };
            let VolScratch { gx, gy, .. } = sc;
            disc.eval_grad(c, disc.block(t, c), &mut gx[0], &mut gy[0]);
            for q in 0..nq {
                let w = disc.qp_weight(c, q);
                gx[0][q] *= w;
                gy[0][q] *= w;
            }
            let [gx0, _] = gx;
            let [gy0, _] = gy;
            disc.vol_test_grad(c, gx0, gy0, o);
        };
        assemble(disc, 1, face_kernel, vol_kernel)
    }

    /// Weak form of `-div(sigma(u) u)`: `int sigma(u) u . grad w - int {{sigma(u) u}} . n [[w]]`,
    /// with the wall velocity in the boundary flux.
    pub fn apply_friction(&self, u: &[T]) -> Vec<T> {
        let disc = self.disc;
        let nq1 = disc.elem.nq1;
        let nq = disc.elem.nq;
        let face_kernel = |_: usize, face: &Face<T>, b: &mut [T]| {
            let nrm = face.normal;
            let wq = |q: usize| disc.elem.qw[q] * face.measure;
            let t0 = trace(disc, u, 2, face.inner());
            match face.outer() {
                Some(o) => {
                    let t1 = trace(disc, u, 2, o);
                    for q in 0..nq1 {
                        let q0 = matvec2(deviatoric(t0.grad(q)), t0.vel(q));
                        let q1 = matvec2(deviatoric(t1.grad(q)), t1.vel(q));
                        let flux = T::half()
                            * ((q0[0] + q1[0]) * nrm[0] + (q0[1] + q1[1]) * nrm[1]);
                        b[fidx(1, nq1, 0, 0, 0) + q] = -wq(q) * flux;
                        b[fidx(1, nq1, 1, 0, 0) + q] = wq(q) * flux;
                    }
                }
                None => {
                    let Some((g, _)) = self.wall(face) else { return };
                    for q in 0..nq1 {
                        let s = matvec2(deviatoric(t0.grad(q)), g);
                        b[fidx(1, nq1, 0, 0, 0) + q] = -wq(q) * (s[0] * nrm[0] + s[1] * nrm[1]);
                    }
                }
            }
        };
        let vol_kernel = |c: usize, o: &mut [T], sc: &mut VolScratch<T>| {
            for comp in 0..2 {
                disc.eval(disc.vblock(u, c, comp), &mut sc.v[comp]);
                disc.eval_grad(c, disc.vblock(u, c, comp), &mut sc.gx[comp], &mut sc.gy[comp]);
            }
            for q in 0..nq {
                let s = deviatoric([[sc.gx[0][q], sc.gy[0][q]], [sc.gx[1][q], sc.gy[1][q]]]);
                let f = matvec2(s, [sc.v[0][q], sc.v[1][q]]);
                let w = disc.qp_weight(c, q);
                sc.fx[q] = w * f[0];
                sc.fy[q] = w * f[1];
            }
            let VolScratch { fx, fy, .. } = sc;
            disc.vol_test_grad(c, fx, fy, o);
        };
        assemble(disc, 1, face_kernel, vol_kernel)
    }

    pub fn stress_diagonal(&self) -> &[T] {
        &self.stress_diag
    }

    pub fn laplace_diagonal(&self) -> &[T] {
        &self.laplace_diag
    }

    /// Solves `(M_w + s S) u = rhs` with the weight `w` at volume quadrature
    /// points (`n_cells * nq` values).
    pub fn solve_momentum(
        &self,
        weight_q: &[T],
        s: T,
        rhs: &[T],
        x0: Option<&[T]>,
        cfg: &SolverConfig,
    ) -> Result<(Vec<T>, usize)> {
        let disc = self.disc;
        let mut diag = weighted_mass_diagonal(disc, weight_q, 2);
        diag.iter_mut()
            .zip(&self.stress_diag)
            .for_each(|(d, &v)| *d += s * v);
        let op = FnOperator {
            n: disc.vector_len(),
            f: |x: &[T], y: &mut [T]| {
                let m = weighted_mass(disc, x, weight_q, 2);
                let a = self.apply_stress(x);
                for i in 0..y.len() {
                    y[i] = m[i] + s * a[i];
                }
            },
        };
        let (u, rep) = cg(&op, rhs, x0, cfg, Some(&diag))?;
        Ok((u, rep.iterations))
    }

    /// Solves `(M_w + s L) t = rhs`.
    pub fn solve_scalar(
        &self,
        weight_q: &[T],
        s: T,
        rhs: &[T],
        x0: Option<&[T]>,
        cfg: &SolverConfig,
    ) -> Result<(Vec<T>, usize)> {
        let disc = self.disc;
        let mut diag = weighted_mass_diagonal(disc, weight_q, 1);
        diag.iter_mut()
            .zip(&self.laplace_diag)
            .for_each(|(d, &v)| *d += s * v);
        let op = FnOperator {
            n: disc.scalar_len(),
            f: |x: &[T], y: &mut [T]| {
                let m = weighted_mass(disc, x, weight_q, 1);
                let a = self.apply_laplace(x);
                for i in 0..y.len() {
                    y[i] = m[i] + s * a[i];
                }
            },
        };
        let (t, rep) = cg(&op, rhs, x0, cfg, Some(&diag))?;
        Ok((t, rep.iterations))
    }
}

fn outer<T: Real>(a: [T; 2], n: [T; 2]) -> [[T; 2]; 2] {
    [[a[0] * n[0], a[0] * n[1]], [a[1] * n[0], a[1] * n[1]]]
}

/// `int w u . v` for a field with `ncomp` components.
pub fn weighted_mass<T: Real>(disc: &Discretization<T>, x: &[T], weight_q: &[T], ncomp: usize) -> Vec<T> {
    let n = disc.nloc();
    let nq = disc.elem.nq;
    let mut out = vec![T::zero(); x.len()];
    out.par_chunks_mut(ncomp * n).enumerate().for_each_init(
        || vec![T::zero(); nq],
        |v, (c, o)| {
            for comp in 0..ncomp {
                let blk = &x[(ncomp * c + comp) * n..(ncomp * c + comp + 1) * n];
                disc.eval(blk, v);
                for q in 0..nq {
                    v[q] *= disc.qp_weight(c, q) * weight_q[c * nq + q];
                }
                disc.vol_test(v, &mut o[comp * n..(comp + 1) * n]);
            }
        },
    );
    out
}

fn weighted_mass_diagonal<T: Real>(disc: &Discretization<T>, weight_q: &[T], ncomp: usize) -> Vec<T> {
    let n = disc.nloc();
    let nq = disc.elem.nq;
    let e = &disc.elem;
    let mut out = vec![T::zero(); disc.n_cells() * ncomp * n];
    out.par_chunks_mut(ncomp * n).enumerate().for_each(|(c, o)| {
        for q in 0..nq {
            let w = disc.qp_weight(c, q) * weight_q[c * nq + q];
            for i in 0..n {
                let phi = e.phi[q * n + i];
                for comp in 0..ncomp {
                    o[comp * n + i] += w * phi * phi;
                }
            }
        }
    });
    out
}

/// `int f w` for pointwise data at the volume quadrature points.
fn test_qp<T: Real>(disc: &Discretization<T>, values: &[T]) -> Vec<T> {
    let n = disc.nloc();
    let nq = disc.elem.nq;
    let mut out = vec![T::zero(); disc.scalar_len()];
    out.par_chunks_mut(n).enumerate().for_each_init(
        || vec![T::zero(); nq],
        |v, (c, o)| {
            for q in 0..nq {
                v[q] = disc.qp_weight(c, q) * values[c * nq + q];
            }
            disc.vol_test(v, o);
        },
    );
    out
}

fn eval_qp<T: Real>(disc: &Discretization<T>, field: &[T], ncomp: usize, comp: usize) -> Vec<T> {
    let n = disc.nloc();
    let nq = disc.elem.nq;
    let mut out = vec![T::zero(); disc.n_cells() * nq];
    out.par_chunks_mut(nq).enumerate().for_each(|(c, o)| {
        disc.eval(&field[(ncomp * c + comp) * n..(ncomp * c + comp + 1) * n], o);
    });
    out
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ViscousReport {
    /// Temperature fixed-point iterations per implicit stage.
    pub temperature_iterations: Vec<usize>,
    pub krylov_iterations: usize,
}

/// Viscous substep of length `dt` on the state produced by the hyperbolic
/// step. Density is frozen; velocity and temperature are advanced with the
/// implicit tableau and the pressure is recovered from `p(rho, T)`.
pub fn viscous_step<T: Real>(
    disc: &Discretization<T>,
    phys: &Physics<T>,
    tab: &ImexTableau,
    settings: &ViscousSettings,
    state: &FlowState<T>,
    dt: T,
) -> Result<(FlowState<T>, ViscousReport)> {
    let Some(re) = phys.reynolds else {
        return Ok((state.clone(), ViscousReport::default()));
    };
    let ops = ViscousOperators::new(disc, phys, settings.penalty_factor);
    viscous_step_with(&ops, tab, settings, state, dt, re)
}

/// As [`viscous_step`] with prebuilt operators.
pub fn viscous_step_with<T: Real>(
    ops: &ViscousOperators<'_, T>,
    tab: &ImexTableau,
    settings: &ViscousSettings,
    state: &FlowState<T>,
    dt: T,
    re: T,
) -> Result<(FlowState<T>, ViscousReport)> {
    let disc = ops.disc;
    let phys = ops.phys;
    let eos = &phys.eos;
    let m2 = phys.mach * phys.mach;
    let nu = T::one() / re;
    let kth = T::one() / (phys.prandtl * re);
    let mut report = ViscousReport::default();

    let rho_q = eval_qp(disc, &state.rho, 1, 0);
    if let Some(v) = rho_q.iter().find(|v| !(**v > T::zero())) {
        return Err(Error::NonPhysicalState(format!("density {v} in the viscous step")));
    }
    let p_q = eval_qp(disc, &state.p, 1, 0);
    let mut t1_q = vec![T::zero(); rho_q.len()];
    let mut re1_q = vec![T::zero(); rho_q.len()];
    for i in 0..rho_q.len() {
        let st = eos.state(p_q[i], rho_q[i], None)?;
        t1_q[i] = st.t;
        re1_q[i] = rho_q[i] * st.e;
    }
    let kin_q = |u: &[T]| -> Vec<T> {
        let ux = eval_qp(disc, u, 2, 0);
        let uy = eval_qp(disc, u, 2, 1);
        (0..ux.len())
            .map(|i| m2 * rho_q[i] * T::half() * (ux[i] * ux[i] + uy[i] * uy[i]))
            .collect()
    };
    let k1 = kin_q(&state.u);
    let e1: Vec<T> = test_qp(
        disc,
        &re1_q.iter().zip(&k1).map(|(&a, &b)| a + b).collect::<Vec<_>>(),
    );
    let m1 = weighted_mass(disc, &state.u, &rho_q, 2);
    let sdata = ops.stress_data();
    let ldata = ops.laplace_data();

    // explicit residual contributions of each computed stage
    let mut mom_res: Vec<Vec<T>> = Vec::new();
    let mut en_res: Vec<Vec<T>> = Vec::new();
    let stage_residuals = |u: &[T], t: &[T]| -> (Vec<T>, Vec<T>) {
        let su = ops.apply_stress(u);
        let mr: Vec<T> = su.iter().zip(&sdata).map(|(&a, &b)| nu * (a - b)).collect();
        let fr = ops.apply_friction(u);
        let lt = ops.apply_laplace(t);
        let er: Vec<T> = (0..fr.len())
            .map(|i| m2 * nu * fr[i] + kth * (lt[i] - ldata[i]))
            .collect();
        (mr, er)
    };
    let mut u = state.u.clone();
    let mut t = disc.project_qp(&t1_q);
    let mut t_q = t1_q.clone();
    let (mr, er) = stage_residuals(&u, &t);
    mom_res.push(mr);
    en_res.push(er);

    for s in 1..tab.stages() {
        let tau = T::lit(tab.a_tilde[s][s]) * dt;
        let mut mrhs = m1.clone();
        let mut erhs = e1.clone();
        for m in 0..s {
            let a = T::lit(tab.a_tilde[s][m]) * dt;
            mrhs.iter_mut().zip(&mom_res[m]).for_each(|(r, &v)| *r -= a * v);
            erhs.iter_mut().zip(&en_res[m]).for_each(|(r, &v)| *r -= a * v);
        }
        mrhs.iter_mut().zip(&sdata).for_each(|(r, &v)| *r += tau * nu * v);
        let (u_new, kr) = ops.solve_momentum(&rho_q, tau * nu, &mrhs, Some(&u), &settings.krylov)?;
        report.krylov_iterations += kr;
        u = u_new;

        // energy with temperature as unknown
        let fr = ops.apply_friction(&u);
        let ks = kin_q(&u);
        let base: Vec<T> = (0..erhs.len())
            .map(|i| erhs[i] - tau * m2 * nu * fr[i] + tau * kth * ldata[i])
            .collect();
        let mut iters = 0;
        loop {
            let mut kap = vec![T::zero(); t_q.len()];
            let mut off = vec![T::zero(); t_q.len()];
            for i in 0..t_q.len() {
                let (k, mu) = eos.temperature_linearization(rho_q[i], t_q[i])?;
                kap[i] = k;
                off[i] = mu + ks[i];
            }
            let offt = test_qp(disc, &off);
            let rhs: Vec<T> = base.iter().zip(&offt).map(|(&a, &b)| a - b).collect();
            let (t_new, kr) = ops.solve_scalar(&kap, tau * kth, &rhs, Some(&t), &settings.krylov)?;
            report.krylov_iterations += kr;
            iters += 1;
            let diff: Vec<T> = t_new.iter().zip(&t).map(|(&a, &b)| a - b).collect();
            let inc = (norm2(&diff) / norm2(&t_new).max(T::min_positive_value())).to_f64_lossy();
            t = t_new;
            t_q = eval_qp(disc, &t, 1, 0);
            if let Some(v) = t_q.iter().find(|v| !(**v > T::zero())) {
                return Err(Error::NonPhysicalState(format!("temperature {v} in the viscous step")));
            }
            if eos.is_closed_form() || inc < settings.fixed_point_tol {
                break;
            }
            if iters >= settings.fixed_point_max {
                return Err(Error::NoConvergence {
                    what: "temperature fixed point".into(),
                    iterations: iters,
                    residual: inc,
                });
            }
        }
        report.temperature_iterations.push(iters);
        if s + 1 < tab.stages() {
            let (mr, er) = stage_residuals(&u, &t);
            mom_res.push(mr);
            en_res.push(er);
        }
    }
    let mut p_q = vec![T::zero(); t_q.len()];
    for i in 0..t_q.len() {
        p_q[i] = eos.pressure_from_rho_t(rho_q[i], t_q[i])?;
    }
    Ok((
        FlowState {
            rho: state.rho.clone(),
            u,
            p: disc.project_qp(&p_q),
        },
        report,
    ))
}

/// Hyperbolic step followed by the viscous substep (first order), or the
/// symmetric half/full/half sequence when `strang` is set.
pub fn split_step<T: Real>(
    disc: &Discretization<T>,
    phys: &Physics<T>,
    tab: &ImexTableau,
    hyp: &HyperbolicSettings,
    visc: &ViscousSettings,
    state: &FlowState<T>,
    dt: T,
) -> Result<(FlowState<T>, StepReport, ViscousReport)> {
    let Some(re) = phys.reynolds else {
        let (s, r) = hyperbolic_step(disc, phys, tab, hyp, state, dt)?;
        return Ok((s, r, ViscousReport::default()));
    };
    let ops = ViscousOperators::new(disc, phys, visc.penalty_factor);
    if visc.strang {
        let half = T::half() * dt;
        let (s0, mut v0) = viscous_step_with(&ops, tab, visc, state, half, re)?;
        let (s1, r) = hyperbolic_step(disc, phys, tab, hyp, &s0, dt)?;
        let (s2, v1) = viscous_step_with(&ops, tab, visc, &s1, half, re)?;
        v0.temperature_iterations.extend(v1.temperature_iterations);
        v0.krylov_iterations += v1.krylov_iterations;
        return Ok((s2, r, v0));
    }
    let (s1, r) = hyperbolic_step(disc, phys, tab, hyp, state, dt)?;
    let (s2, v) = viscous_step_with(&ops, tab, visc, &s1, dt, re)?;
    Ok((s2, r, v))
}
