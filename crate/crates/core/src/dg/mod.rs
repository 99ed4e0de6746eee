//! Nodal tensor-product discontinuous Galerkin machinery on a quadtree mesh.
//!
//! Scalar fields store `nloc` coefficients per active cell. Vector fields store
//! `2 * nloc` coefficients per cell, x component first.

pub mod element;
pub mod quadrature;

use rayon::prelude::*;

use crate::dense;
use crate::error::{Error, Result};
use crate::mesh::{AdaptiveMesh, Face, FaceSide};
use crate::real::Real;

pub use element::{RefElement, SubFace};

#[derive(Clone, Debug)]
pub struct Discretization<T> {
    pub mesh: AdaptiveMesh<T>,
    pub elem: RefElement<T>,
    pub origin: Vec<[T; 2]>,
    pub h: Vec<[T; 2]>,
    /// Jacobian determinant `hx * hy` of the map from the reference square.
    pub jac: Vec<T>,
    /// `(face index, side index)` pairs touching each active cell.
    pub cell_faces: Vec<Vec<(usize, usize)>>,
}

/// `[[phi]] = phi+ n+ + phi- n-`; on the boundary `phi n`.
pub fn jump_scalar<T: Real>(plus: T, minus: Option<T>, n_plus: [T; 2]) -> [T; 2] {
    let d = plus - minus.unwrap_or(T::zero());
    [d * n_plus[0], d * n_plus[1]]
}

/// `{{phi}} = (phi+ + phi-)/2`; on the boundary `phi`.
pub fn average_scalar<T: Real>(plus: T, minus: Option<T>) -> T {
    match minus {
        Some(m) => T::half() * (plus + m),
        None => plus,
    }
}

/// `[[v]] = v+ . n+ + v- . n-`; on the boundary `v . n`.
pub fn jump_vector_normal<T: Real>(plus: [T; 2], minus: Option<[T; 2]>, n_plus: [T; 2]) -> T {
    let m = minus.unwrap_or([T::zero(); 2]);
    (plus[0] - m[0]) * n_plus[0] + (plus[1] - m[1]) * n_plus[1]
}

pub fn average_vector<T: Real>(plus: [T; 2], minus: Option<[T; 2]>) -> [T; 2] {
    match minus {
        Some(m) => [T::half() * (plus[0] + m[0]), T::half() * (plus[1] + m[1])],
        None => plus,
    }
}

/// `<<v>> = v+ (x) n+ + v- (x) n-`, row index is the vector component.
pub fn tensor_jump<T: Real>(plus: [T; 2], minus: Option<[T; 2]>, n_plus: [T; 2]) -> [[T; 2]; 2] {
    let m = minus.unwrap_or([T::zero(); 2]);
    let d = [plus[0] - m[0], plus[1] - m[1]];
    [
        [d[0] * n_plus[0], d[0] * n_plus[1]],
        [d[1] * n_plus[0], d[1] * n_plus[1]],
    ]
}

impl<T: Real> Discretization<T> {
    pub fn new(mesh: AdaptiveMesh<T>, degree: usize) -> Self {
        Self::with_element(mesh, RefElement::with_default_quadrature(degree))
    }

    pub fn with_element(mesh: AdaptiveMesh<T>, elem: RefElement<T>) -> Self {
        let n = mesh.n_active();
        let origin = (0..n).map(|c| mesh.cell_origin(c)).collect();
        let h: Vec<[T; 2]> = (0..n).map(|c| mesh.cell_size(c)).collect();
        let jac = h.iter().map(|h| h[0] * h[1]).collect();
        let mut cell_faces = vec![Vec::new(); n];
        for (f, face) in mesh.faces().iter().enumerate() {
            for (k, side) in face.sides.iter().enumerate() {
                if let Some(s) = side {
                    cell_faces[s.cell].push((f, k));
                }
            }
        }
        Discretization {
            mesh,
            elem,
            origin,
            h,
            jac,
            cell_faces,
        }
    }

    /// Same element on a new mesh.
    pub fn remeshed(&self, mesh: AdaptiveMesh<T>) -> Self {
        Self::with_element(mesh, self.elem.clone())
    }

    pub fn degree(&self) -> usize {
        self.elem.degree
    }

    pub fn n_cells(&self) -> usize {
        self.origin.len()
    }

    pub fn nloc(&self) -> usize {
        self.elem.nloc
    }

    pub fn scalar_len(&self) -> usize {
        self.n_cells() * self.nloc()
    }

    pub fn vector_len(&self) -> usize {
        2 * self.scalar_len()
    }

    pub fn faces(&self) -> &[Face<T>] {
        self.mesh.faces()
    }

    /// Physical coordinates of a reference point in `cell`.
    pub fn map_point(&self, cell: usize, r: [T; 2]) -> [T; 2] {
        let o = self.origin[cell];
        let h = self.h[cell];
        [o[0] + r[0] * h[0], o[1] + r[1] * h[1]]
    }

    pub fn qp_coords(&self, cell: usize, q: usize) -> [T; 2] {
        self.map_point(cell, self.elem.vol_pts[q])
    }

    pub fn node_coords(&self, cell: usize, i: usize) -> [T; 2] {
        self.map_point(cell, self.elem.node(i))
    }

    /// Quadrature weights including the Jacobian.
    pub fn qp_weight(&self, cell: usize, q: usize) -> T {
        self.elem.vol_w[q] * self.jac[cell]
    }

    pub fn face_qp_coords(&self, face: &Face<T>, q: usize) -> [T; 2] {
        face.point(self.elem.qpts[q])
    }

    /// Values at the volume quadrature points of one coefficient block.
    #[inline]
    pub fn eval(&self, block: &[T], out: &mut [T]) {
        dense::matvec(&self.elem.phi, self.elem.nq, self.elem.nloc, block, out);
    }

    /// Physical gradient at the volume quadrature points.
    #[inline]
    pub fn eval_grad(&self, cell: usize, block: &[T], gx: &mut [T], gy: &mut [T]) {
        let e = &self.elem;
        dense::matvec(&e.dphi[0], e.nq, e.nloc, block, gx);
        dense::matvec(&e.dphi[1], e.nq, e.nloc, block, gy);
        let h = self.h[cell];
        gx.iter_mut().for_each(|v| *v /= h[0]);
        gy.iter_mut().for_each(|v| *v /= h[1]);
    }

    /// Trace values at the face quadrature points seen from `side`.
    #[inline]
    pub fn eval_trace(&self, side: FaceSide, block: &[T], out: &mut [T]) {
        let t = self.elem.face_table(side.local_face, side.sub);
        dense::matvec(&t.phi, self.elem.nq1, self.elem.nloc, block, out);
    }

    /// Physical gradient trace at the face quadrature points.
    #[inline]
    pub fn eval_trace_grad(&self, side: FaceSide, block: &[T], gx: &mut [T], gy: &mut [T]) {
        let t = self.elem.face_table(side.local_face, side.sub);
        let e = &self.elem;
        dense::matvec(&t.dphi[0], e.nq1, e.nloc, block, gx);
        dense::matvec(&t.dphi[1], e.nq1, e.nloc, block, gy);
        let h = self.h[side.cell];
        gx.iter_mut().for_each(|v| *v /= h[0]);
        gy.iter_mut().for_each(|v| *v /= h[1]);
    }

    pub fn block<'a>(&self, field: &'a [T], cell: usize) -> &'a [T] {
        let n = self.nloc();
        &field[cell * n..(cell + 1) * n]
    }

    /// Component `comp` of a vector field block.
    pub fn vblock<'a>(&self, field: &'a [T], cell: usize, comp: usize) -> &'a [T] {
        let n = self.nloc();
        &field[(2 * cell + comp) * n..(2 * cell + comp + 1) * n]
    }

    /// Nodal interpolation.
    pub fn interpolate<F: Fn([T; 2]) -> T + Sync>(&self, f: F) -> Vec<T> {
        let n = self.nloc();
        let mut out = vec![T::zero(); self.scalar_len()];
        out.par_chunks_mut(n).enumerate().for_each(|(c, o)| {
            for (i, v) in o.iter_mut().enumerate() {
                *v = f(self.node_coords(c, i));
            }
        });
        out
    }

    /// Cellwise L2 projection.
    pub fn project<F: Fn([T; 2]) -> T + Sync>(&self, f: F) -> Vec<T> {
        let n = self.nloc();
        let e = &self.elem;
        let mut out = vec![T::zero(); self.scalar_len()];
        out.par_chunks_mut(n).enumerate().for_each(|(c, o)| {
            for q in 0..e.nq {
                let w = e.vol_w[q] * f(self.qp_coords(c, q));
                for i in 0..n {
                    o[i] += w * e.phi[q * n + i];
                }
            }
            dense::cholesky_solve(&e.mass_chol, n, o);
        });
        out
    }

    /// Projection of pointwise data given at the volume quadrature points
    /// (`values[c * nq + q]`).
    pub fn project_qp(&self, values: &[T]) -> Vec<T> {
        let n = self.nloc();
        let e = &self.elem;
        let mut out = vec![T::zero(); self.scalar_len()];
        out.par_chunks_mut(n).enumerate().for_each(|(c, o)| {
            for q in 0..e.nq {
                let w = e.vol_w[q] * values[c * e.nq + q];
                for i in 0..n {
                    o[i] += w * e.phi[q * n + i];
                }
            }
            dense::cholesky_solve(&e.mass_chol, n, o);
        });
        out
    }

    /// Applies the inverse mass matrix in place to a field with `ncomp` components.
    pub fn mass_solve(&self, field: &mut [T], ncomp: usize) {
        let n = self.nloc();
        let chol = &self.elem.mass_chol;
        field
            .par_chunks_mut(n * ncomp)
            .enumerate()
            .for_each(|(c, blk)| {
                let inv = T::one() / self.jac[c];
                for comp in blk.chunks_mut(n) {
                    dense::cholesky_solve(chol, n, comp);
                    comp.iter_mut().for_each(|v| *v *= inv);
                }
            });
    }

    /// Mass matrix action for a field with `ncomp` components.
    pub fn mass_apply(&self, field: &[T], ncomp: usize) -> Vec<T> {
        let n = self.nloc();
        let mut out = vec![T::zero(); field.len()];
        out.par_chunks_mut(n * ncomp)
            .zip(field.par_chunks(n * ncomp))
            .enumerate()
            .for_each(|(c, (o, x))| {
                for (oc, xc) in o.chunks_mut(n).zip(x.chunks(n)) {
                    dense::matvec(&self.elem.mass, n, n, xc, oc);
                    oc.iter_mut().for_each(|v| *v *= self.jac[c]);
                }
            });
        out
    }

    /// `int_Omega u`
    pub fn integrate(&self, field: &[T]) -> T {
        let e = &self.elem;
        let mut vals = vec![T::zero(); e.nq];
        let mut total = T::zero();
        for c in 0..self.n_cells() {
            self.eval(self.block(field, c), &mut vals);
            for q in 0..e.nq {
                total += self.qp_weight(c, q) * vals[q];
            }
        }
        total
    }

    pub fn cell_means(&self, field: &[T]) -> Vec<T> {
        let e = &self.elem;
        let mut vals = vec![T::zero(); e.nq];
        (0..self.n_cells())
            .map(|c| {
                self.eval(self.block(field, c), &mut vals);
                (0..e.nq).map(|q| e.vol_w[q] * vals[q]).sum()
            })
            .collect()
    }

    pub fn l2_norm(&self, field: &[T]) -> T {
        self.l2_error(field, |_| T::zero())
    }

    /// `|| u_h - u ||_{L2}` evaluated with the volume quadrature.
    pub fn l2_error<F: Fn([T; 2]) -> T>(&self, field: &[T], exact: F) -> T {
        let e = &self.elem;
        let mut vals = vec![T::zero(); e.nq];
        let mut s = T::zero();
        for c in 0..self.n_cells() {
            self.eval(self.block(field, c), &mut vals);
            for q in 0..e.nq {
                let d = vals[q] - exact(self.qp_coords(c, q));
                s += self.qp_weight(c, q) * d * d;
            }
        }
        s.sqrt()
    }

    /// `|| u_h - u || / || u ||`.
    pub fn l2_error_relative<F: Fn([T; 2]) -> T>(&self, field: &[T], exact: F) -> Result<T> {
        let zero = vec![T::zero(); field.len()];
        let norm = self.l2_error(&zero, &exact);
        if norm == T::zero() {
            return Err(Error::ZeroNorm);
        }
        Ok(self.l2_error(field, exact) / norm)
    }

    /// Relative L2 error of a vector field.
    pub fn l2_error_relative_vector<F: Fn([T; 2]) -> [T; 2]>(
        &self,
        field: &[T],
        exact: F,
    ) -> Result<T> {
        let e = &self.elem;
        let mut ux = vec![T::zero(); e.nq];
        let mut uy = vec![T::zero(); e.nq];
        let (mut err, mut norm) = (T::zero(), T::zero());
        for c in 0..self.n_cells() {
            self.eval(self.vblock(field, c, 0), &mut ux);
            self.eval(self.vblock(field, c, 1), &mut uy);
            for q in 0..e.nq {
                let w = self.qp_weight(c, q);
                let ex = exact(self.qp_coords(c, q));
                let (dx, dy) = (ux[q] - ex[0], uy[q] - ex[1]);
                err += w * (dx * dx + dy * dy);
                norm += w * (ex[0] * ex[0] + ex[1] * ex[1]);
            }
        }
        if norm == T::zero() {
            return Err(Error::ZeroNorm);
        }
        Ok((err / norm).sqrt())
    }

    /// L1 norm of the difference to a function, with the volume quadrature.
    pub fn l1_error<F: Fn([T; 2]) -> T>(&self, field: &[T], exact: F) -> T {
        let e = &self.elem;
        let mut vals = vec![T::zero(); e.nq];
        let mut s = T::zero();
        for c in 0..self.n_cells() {
            self.eval(self.block(field, c), &mut vals);
            for q in 0..e.nq {
                s += self.qp_weight(c, q) * (vals[q] - exact(self.qp_coords(c, q))).abs();
            }
        }
        s
    }

    /// Point evaluation of a scalar field.
    pub fn point_value(&self, field: &[T], x: [T; 2]) -> Option<T> {
        let c = self.mesh.locate(x)?;
        let o = self.origin[c];
        let h = self.h[c];
        let r = [(x[0] - o[0]) / h[0], (x[1] - o[1]) / h[1]];
        let basis = self.elem.eval_basis(r[0], r[1]);
        Some(crate::real::dot(&basis, self.block(field, c)))
    }

    /// Physical gradients of the local polynomial at the nodes of `cell`.
    pub fn node_gradients(&self, cell: usize, block: &[T]) -> Vec<[T; 2]> {
        let n = self.nloc();
        let mut gx = vec![T::zero(); n];
        let mut gy = vec![T::zero(); n];
        dense::matvec(&self.elem.node_grad[0], n, n, block, &mut gx);
        dense::matvec(&self.elem.node_grad[1], n, n, block, &mut gy);
        let h = self.h[cell];
        (0..n).map(|i| [gx[i] / h[0], gy[i] / h[1]]).collect()
    }

    /// `sigma_{Gamma,K} = (r+1)^2 |F_K| / |K|`, with `F_K` the side of `K` containing
    /// the face, i.e. `(r+1)^2` over the cell extent normal to the face.
    pub fn sip_sigma(&self, face: &Face<T>, side: FaceSide) -> T {
        let r1 = T::lit((self.degree() + 1) as f64);
        r1 * r1 / self.h[side.cell][face.axis]
    }

    /// Interior penalty `C = (sigma+ + sigma-)/2` (`sigma` on boundary faces).
    pub fn sip_penalty(&self, face: &Face<T>) -> T {
        let s0 = self.sip_sigma(face, face.inner());
        match face.outer() {
            Some(o) => T::half() * (s0 + self.sip_sigma(face, o)),
            None => s0,
        }
    }

    /// Scatter the test-function integral `sum_q w_q f_q phi_i` of a face side.
    #[inline]
    pub fn face_test(&self, side: FaceSide, wf: &[T], out: &mut [T]) {
        let t = self.elem.face_table(side.local_face, side.sub);
        dense::matvec_t_add(&t.phi, self.elem.nq1, self.elem.nloc, wf, out);
    }

    /// Scatter `sum_q w_q (gx_q dphi_i/dx + gy_q dphi_i/dy)` on a face side.
    /// The weight slices are rescaled in place.
    #[inline]
    pub fn face_test_grad(&self, side: FaceSide, wgx: &mut [T], wgy: &mut [T], out: &mut [T]) {
        let t = self.elem.face_table(side.local_face, side.sub);
        let e = &self.elem;
        let h = self.h[side.cell];
        wgx.iter_mut().for_each(|v| *v /= h[0]);
        wgy.iter_mut().for_each(|v| *v /= h[1]);
        dense::matvec_t_add(&t.dphi[0], e.nq1, e.nloc, wgx, out);
        dense::matvec_t_add(&t.dphi[1], e.nq1, e.nloc, wgy, out);
    }

    /// Scatter `sum_q w_q f_q phi_i` over the volume (weights must include the Jacobian).
    #[inline]
    pub fn vol_test(&self, wf: &[T], out: &mut [T]) {
        dense::matvec_t_add(&self.elem.phi, self.elem.nq, self.elem.nloc, wf, out);
    }

    /// Scatter `sum_q w_q (gx_q dphi_i/dx + gy_q dphi_i/dy)` over the volume.
    /// The weight slices are rescaled in place.
    #[inline]
    pub fn vol_test_grad(&self, cell: usize, wgx: &mut [T], wgy: &mut [T], out: &mut [T]) {
        let e = &self.elem;
        let h = self.h[cell];
        wgx.iter_mut().for_each(|v| *v /= h[0]);
        wgy.iter_mut().for_each(|v| *v /= h[1]);
        dense::matvec_t_add(&e.dphi[0], e.nq, e.nloc, wgx, out);
        dense::matvec_t_add(&e.dphi[1], e.nq, e.nloc, wgy, out);
    }

    /// Face quadrature weights (including the face measure).
    pub fn face_weights(&self, face: &Face<T>) -> Vec<T> {
        self.elem.qw.iter().map(|&w| w * face.measure).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(n: usize, r: usize) -> Discretization<f64> {
        let m = AdaptiveMesh::cartesian([0.0, 0.0], [1.0, 1.0], [n, n], [false; 2]);
        Discretization::new(m, r)
    }

    #[test]
    fn projection_reproduces_polynomials() {
        let d = disc(3, 2);
        let f = |x: [f64; 2]| 1.0 + x[0] - 2.0 * x[1] * x[1] + x[0] * x[1];
        let u = d.project(f);
        assert!(d.l2_error(&u, f) < 1e-13);
        let v = d.interpolate(f);
        for (a, b) in u.iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn jumps_and_averages() {
        assert_eq!(jump_scalar(3.0, Some(3.0), [1.0, 0.0]), [0.0, 0.0]);
        assert_eq!(average_scalar(3.0, Some(3.0)), 3.0);
        assert_eq!(jump_scalar(1.0, Some(0.0), [1.0, 0.0]), [1.0, 0.0]);
        assert_eq!(jump_scalar(2.0, None, [0.0, 1.0]), [0.0, 2.0]);
        assert_eq!(average_scalar(2.0, None), 2.0);
    }
}
