//! Manufactured-solution and symmetry checks of the interior penalty operators.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use imexdg::dg::Discretization;
use imexdg::eos::EosModel;
use imexdg::linsolve::SolverConfig;
use imexdg::mesh::{AdaptiveMesh, RefinementPlan};
use imexdg::model::{interleave, split_component, BoundaryCondition, Physics};
use imexdg::viscous::ViscousOperators;
use nalgebra::DMatrix;

pub fn physics(bc: [BoundaryCondition<f64>; 4]) -> Physics<f64> {
    let mut p = Physics::inviscid(EosModel::ideal(1.4), 0.1, bc);
    p.reynolds = Some(100.0);
    p.prandtl = 0.71;
    p
}

/// Isothermal no-slip walls in x, periodic in y.
pub fn walls_x() -> [BoundaryCondition<f64>; 4] {
    let iso = BoundaryCondition::Wall {
        velocity: [0.0, 0.0],
        temperature: Some(1.0),
    };
    [iso, iso, BoundaryCondition::Periodic, BoundaryCondition::Periodic]
}

pub fn dense_of<F: Fn(&[f64]) -> Vec<f64>>(n: usize, op: F) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut x = vec![0.0; n];
    for j in 0..n {
        x[j] = 1.0;
        let y = op(&x);
        for i in 0..n {
            m[(i, j)] = y[i];
        }
        x[j] = 0.0;
    }
    m
}

/// 3 x 3 mesh with the center cell refined (hanging nodes on four sides).
pub fn hanging_mesh(walls: bool) -> AdaptiveMesh<f64> {
    let m = AdaptiveMesh::cartesian([0.0, 0.0], [PI, 2.0 * PI], [3, 3], [!walls, true]);
    let plan = RefinementPlan {
        refine: BTreeSet::from([4]),
        coarsen: BTreeSet::new(),
        min_diam: 0.0,
        max_diam: 100.0,
    };
    m.apply_refinement(&plan).0
}

pub struct DenseSip {
    pub stress: DMatrix<f64>,
    pub laplace: DMatrix<f64>,
    /// Jacobi diagonals as probed by the operators.
    pub stress_diagonal: Vec<f64>,
    pub laplace_diagonal: Vec<f64>,
}

/// Dense stress and Laplace matrices with periodic or wall boundaries in x.
pub fn dense_operators(disc: &Discretization<f64>, walls: bool) -> DenseSip {
    let bc = if walls { walls_x() } else { [BoundaryCondition::Periodic; 4] };
    let phys = physics(bc);
    let ops = ViscousOperators::new(disc, &phys, 1.0);
    DenseSip {
        stress: dense_of(disc.vector_len(), |x| ops.apply_stress(x)),
        laplace: dense_of(disc.scalar_len(), |x| ops.apply_laplace(x)),
        stress_diagonal: ops.stress_diagonal().to_vec(),
        laplace_diagonal: ops.laplace_diagonal().to_vec(),
    }
}

/// `max |A - A^T| / max |A|`
pub fn relative_asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).abs().max() / m.abs().max()
}

pub fn rates(e: &[f64]) -> Vec<f64> {
    e.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Divergence-free field vanishing on `x = 0, pi`, periodic in `y`.
fn mms_velocity(x: [f64; 2]) -> [f64; 2] {
    let (sx, cx) = x[0].sin_cos();
    let (sy, cy) = x[1].sin_cos();
    [-sx * sx * sy, -2.0 * sx * cx * cy]
}

fn mms_minus_laplacian(x: [f64; 2]) -> [f64; 2] {
    let (sy, cy) = x[1].sin_cos();
    let c2 = (2.0 * x[0]).cos();
    let s2 = (2.0 * x[0]).sin();
    [-(0.5 * sy - 2.5 * c2 * sy), -5.0 * s2 * cy]
}

const MMS_CELLS: [usize; 3] = [4, 8, 16];

fn mms_disc(n: usize, r: usize) -> Discretization<f64> {
    let mesh = AdaptiveMesh::cartesian([0.0, 0.0], [PI, 2.0 * PI], [n, 2 * n], [false, true]);
    Discretization::new(mesh, r)
}

/// L2 errors of `(I - s div sigma) u = f` with a manufactured `u` on three meshes.
pub fn stress_mms_errors(r: usize) -> Vec<f64> {
    let s = 0.5;
    MMS_CELLS
        .iter()
        .map(|&n| {
            let disc = mms_disc(n, r);
            let phys = physics(walls_x());
            let ops = ViscousOperators::new(&disc, &phys, 1.0);
            let f = |x: [f64; 2]| {
                let u = mms_velocity(x);
                let l = mms_minus_laplacian(x);
                [u[0] + s * l[0], u[1] + s * l[1]]
            };
            let fx = disc.project(|x| f(x)[0]);
            let fy = disc.project(|x| f(x)[1]);
            let rhs = disc.mass_apply(&interleave(&disc, &fx, &fy), 2);
            let w = vec![1.0; disc.n_cells() * disc.elem.nq];
            let (u, _) = ops
                .solve_momentum(&w, s, &rhs, None, &SolverConfig::with_tol(1e-13))
                .unwrap();
            let ux = split_component(&disc, &u, 0);
            let uy = split_component(&disc, &u, 1);
            (disc.l2_error(&ux, |x| mms_velocity(x)[0]).powi(2) + disc.l2_error(&uy, |x| mms_velocity(x)[1]).powi(2)).sqrt()
        })
        .collect()
}

/// L2 errors of `(I - s Laplace) T = f` with Dirichlet walls on three meshes.
pub fn heat_mms_errors(r: usize) -> Vec<f64> {
    let s = 0.5;
    let exact = |x: [f64; 2]| 1.0 + x[0].sin() * x[1].sin();
    MMS_CELLS
        .iter()
        .map(|&n| {
            let disc = mms_disc(n, r);
            let phys = physics(walls_x());
            let ops = ViscousOperators::new(&disc, &phys, 1.0);
            let f = disc.project(|x| exact(x) + s * 2.0 * x[0].sin() * x[1].sin());
            let mut rhs = disc.mass_apply(&f, 1);
            let data = ops.laplace_data();
            rhs.iter_mut().zip(&data).for_each(|(r, d)| *r += s * d);
            let w = vec![1.0; disc.n_cells() * disc.elem.nq];
            let (t, _) = ops
                .solve_scalar(&w, s, &rhs, None, &SolverConfig::with_tol(1e-13))
                .unwrap();
            disc.l2_error(&t, exact)
        })
        .collect()
}
