//! Tensor-product reference square `[0,1]^2` with a nodal Lagrange basis on
//! Gauss-Lobatto-Legendre points and Gauss-Legendre quadrature.

use crate::dense;
use crate::dg::quadrature::{gauss_legendre, gauss_lobatto, lagrange};
use crate::real::Real;

/// Portion of a cell side covered by a face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubFace {
    Full,
    Lower,
    Upper,
}

impl SubFace {
    pub fn index(self) -> usize {
        match self {
            SubFace::Full => 0,
            SubFace::Lower => 1,
            SubFace::Upper => 2,
        }
    }

    fn map(self, s: f64) -> f64 {
        match self {
            SubFace::Full => s,
            SubFace::Lower => 0.5 * s,
            SubFace::Upper => 0.5 + 0.5 * s,
        }
    }
}

/// Basis values and reference gradients at the quadrature points of one
/// (sub)face of the reference cell.
#[derive(Clone, Debug)]
pub struct FaceTable<T> {
    pub phi: Vec<T>,
    pub dphi: [Vec<T>; 2],
}

#[derive(Clone, Debug)]
pub struct RefElement<T> {
    pub degree: usize,
    pub n1: usize,
    pub nloc: usize,
    pub nodes: Vec<T>,
    pub nq1: usize,
    pub nq: usize,
    /// 1D quadrature points and weights on `[0, 1]` (also used on faces).
    pub qpts: Vec<T>,
    pub qw: Vec<T>,
    pub vol_w: Vec<T>,
    pub vol_pts: Vec<[T; 2]>,
    /// `phi[q * nloc + i]`
    pub phi: Vec<T>,
    pub dphi: [Vec<T>; 2],
    /// Indexed by `local_face * 3 + subface`; local faces are x=0, x=1, y=0, y=1.
    pub faces: Vec<FaceTable<T>>,
    /// Reference mass matrix and its Cholesky factor.
    pub mass: Vec<T>,
    pub mass_chol: Vec<T>,
    /// Reference derivatives of basis `j` at node `i`: `node_grad[d][i * nloc + j]`.
    pub node_grad: [Vec<T>; 2],
    /// Child `c` nodal values from parent coefficients (`nloc x nloc`).
    pub inject: [Vec<T>; 4],
    /// Parent coefficients from the coefficients of child `c` (L2 projection).
    pub restrict: [Vec<T>; 4],
}

/// Lower-left corner of child `c` in the parent reference square.
pub fn child_offset(c: usize) -> [f64; 2] {
    [0.5 * (c & 1) as f64, 0.5 * (c >> 1) as f64]
}

impl<T: Real> RefElement<T> {
    /// Degree `r` basis with `nq1` Gauss points per direction.
    pub fn new(degree: usize, nq1: usize) -> Self {
        let n1 = degree + 1;
        let nloc = n1 * n1;
        let nodes = gauss_lobatto(n1);
        let (qx, qw) = gauss_legendre(nq1);
        let nq = nq1 * nq1;
        let eval2 = |x: f64, y: f64| {
            let (vx, dx) = lagrange(&nodes, x);
            let (vy, dy) = lagrange(&nodes, y);
            let mut v = vec![0.0; nloc];
            let mut gx = vec![0.0; nloc];
            let mut gy = vec![0.0; nloc];
            for iy in 0..n1 {
                for ix in 0..n1 {
                    let i = ix + n1 * iy;
                    v[i] = vx[ix] * vy[iy];
                    gx[i] = dx[ix] * vy[iy];
                    gy[i] = vx[ix] * dy[iy];
                }
            }
            (v, gx, gy)
        };

        let mut phi = Vec::with_capacity(nq * nloc);
        let mut dphi = [Vec::with_capacity(nq * nloc), Vec::with_capacity(nq * nloc)];
        let mut vol_w = Vec::with_capacity(nq);
        let mut vol_pts = Vec::with_capacity(nq);
        for qy in 0..nq1 {
            for qx_ in 0..nq1 {
                let (v, gx, gy) = eval2(qx[qx_], qx[qy]);
                phi.extend(v.iter().map(|&a| T::lit(a)));
                dphi[0].extend(gx.iter().map(|&a| T::lit(a)));
                dphi[1].extend(gy.iter().map(|&a| T::lit(a)));
                vol_w.push(T::lit(qw[qx_] * qw[qy]));
                vol_pts.push([T::lit(qx[qx_]), T::lit(qx[qy])]);
            }
        }

        let mut faces = Vec::with_capacity(12);
        for lf in 0..4 {
            for sub in [SubFace::Full, SubFace::Lower, SubFace::Upper] {
                let mut t = FaceTable {
                    phi: Vec::with_capacity(nq1 * nloc),
                    dphi: [Vec::with_capacity(nq1 * nloc), Vec::with_capacity(nq1 * nloc)],
                };
                for &s in &qx {
                    let s = sub.map(s);
                    let fixed = if lf % 2 == 0 { 0.0 } else { 1.0 };
                    let (x, y) = if lf < 2 { (fixed, s) } else { (s, fixed) };
                    let (v, gx, gy) = eval2(x, y);
                    t.phi.extend(v.iter().map(|&a| T::lit(a)));
                    t.dphi[0].extend(gx.iter().map(|&a| T::lit(a)));
                    t.dphi[1].extend(gy.iter().map(|&a| T::lit(a)));
                }
                faces.push(t);
            }
        }

        // exact mass with a rule that integrates degree 2r in each direction
        let (mx, mw) = gauss_legendre(n1.max(1));
        let mut mass64 = vec![0.0; nloc * nloc];
        for (a, &xa) in mx.iter().enumerate() {
            for (b, &yb) in mx.iter().enumerate() {
                let (v, _, _) = eval2(xa, yb);
                let w = mw[a] * mw[b];
                for i in 0..nloc {
                    for j in 0..nloc {
                        mass64[i * nloc + j] += w * v[i] * v[j];
                    }
                }
            }
        }
        let mass: Vec<T> = mass64.iter().map(|&a| T::lit(a)).collect();
        let mut mass_chol = mass.clone();
        dense::cholesky(&mut mass_chol, nloc).expect("reference mass is SPD");

        let mut node_grad = [vec![T::zero(); nloc * nloc], vec![T::zero(); nloc * nloc]];
        for iy in 0..n1 {
            for ix in 0..n1 {
                let i = ix + n1 * iy;
                let (_, gx, gy) = eval2(nodes[ix], nodes[iy]);
                for j in 0..nloc {
                    node_grad[0][i * nloc + j] = T::lit(gx[j]);
                    node_grad[1][i * nloc + j] = T::lit(gy[j]);
                }
            }
        }

        let mass_inv = dense::inverse(&mass64, nloc).expect("reference mass invertible");
        let mut inject: [Vec<T>; 4] = Default::default();
        let mut restrict: [Vec<T>; 4] = Default::default();
        for c in 0..4 {
            let off = child_offset(c);
            let mut inj = vec![T::zero(); nloc * nloc];
            for iy in 0..n1 {
                for ix in 0..n1 {
                    let i = ix + n1 * iy;
                    let (v, _, _) = eval2(off[0] + 0.5 * nodes[ix], off[1] + 0.5 * nodes[iy]);
                    for j in 0..nloc {
                        inj[i * nloc + j] = T::lit(v[j]);
                    }
                }
            }
            inject[c] = inj;
            // coupling[i][j] = int_child phi_parent_i phi_child_j (parent reference measure)
            let mut coupling = vec![0.0; nloc * nloc];
            for (a, &xa) in mx.iter().enumerate() {
                for (b, &yb) in mx.iter().enumerate() {
                    let (vc, _, _) = eval2(xa, yb);
                    let (vp, _, _) = eval2(off[0] + 0.5 * xa, off[1] + 0.5 * yb);
                    let w = 0.25 * mw[a] * mw[b];
                    for i in 0..nloc {
                        for j in 0..nloc {
                            coupling[i * nloc + j] += w * vp[i] * vc[j];
                        }
                    }
                }
            }
            let mut r = vec![T::zero(); nloc * nloc];
            for i in 0..nloc {
                for j in 0..nloc {
                    let s: f64 = (0..nloc)
                        .map(|k| mass_inv[i * nloc + k] * coupling[k * nloc + j])
                        .sum();
                    r[i * nloc + j] = T::lit(s);
                }
            }
            restrict[c] = r;
        }

        RefElement {
            degree,
            n1,
            nloc,
            nodes: nodes.iter().map(|&a| T::lit(a)).collect(),
            nq1,
            nq,
            qpts: qx.iter().map(|&a| T::lit(a)).collect(),
            qw: qw.iter().map(|&a| T::lit(a)).collect(),
            vol_w,
            vol_pts,
            phi,
            dphi,
            faces,
            mass,
            mass_chol,
            node_grad,
            inject,
            restrict,
        }
    }

    /// Default rule: one Gauss point more than the polynomial degree.
    pub fn with_default_quadrature(degree: usize) -> Self {
        let nq1 = if degree == 0 { 1 } else { degree + 2 };
        Self::new(degree, nq1)
    }

    pub fn face_table(&self, local_face: usize, sub: SubFace) -> &FaceTable<T> {
        &self.faces[local_face * 3 + sub.index()]
    }

    /// Reference coordinates of local node `i`.
    pub fn node(&self, i: usize) -> [T; 2] {
        [self.nodes[i % self.n1], self.nodes[i / self.n1]]
    }

    /// Basis values at an arbitrary reference point.
    pub fn eval_basis(&self, x: T, y: T) -> Vec<T> {
        let nodes: Vec<f64> = self.nodes.iter().map(|v| v.to_f64_lossy()).collect();
        let (vx, _) = lagrange(&nodes, x.to_f64_lossy());
        let (vy, _) = lagrange(&nodes, y.to_f64_lossy());
        let mut v = vec![T::zero(); self.nloc];
        for iy in 0..self.n1 {
            for ix in 0..self.n1 {
                v[ix + self.n1 * iy] = T::lit(vx[ix] * vy[iy]);
            }
        }
        v
    }
}
