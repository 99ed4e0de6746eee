mod common;

use std::f64::consts::PI;

use imexdg::dg::Discretization;
use imexdg::eos::EosModel;
use imexdg::imex::{original_alpha, ImexTableau};
use imexdg::mesh::AdaptiveMesh;
use imexdg::model::{interleave, BoundaryCondition, FlowState, Physics};
use imexdg::viscous::*;
use common::sip::*;

#[test]
fn sip_operators_symmetric_and_coercive() {
    for r in 1..=2 {
        for walls in [false, true] {
            let disc = Discretization::new(hanging_mesh(walls), r);
            let ops = dense_operators(&disc, walls);
            for (name, n, m, d) in [
                ("stress", disc.vector_len(), &ops.stress, &ops.stress_diagonal),
                ("laplace", disc.scalar_len(), &ops.laplace, &ops.laplace_diagonal),
            ] {
                let scale = m.abs().max();
                let asym = relative_asymmetry(m);
                assert!(asym <= 1e-11, "{name} r={r} walls={walls}: asymmetry {asym}");
                let ev = nalgebra::SymmetricEigen::new(0.5 * (m + m.transpose())).eigenvalues;
                let min = ev.min();
                assert!(min >= -1e-10 * scale, "{name} r={r} walls={walls}: min eigenvalue {min}");
                assert_eq!(m.nrows(), n);
                // the probed Jacobi diagonal is the true diagonal
                for i in 0..n {
                    assert!((d[i] - m[(i, i)]).abs() <= 1e-12 * scale);
                }
            }
        }
    }
}

#[test]
fn stress_manufactured_convergence() {
    for r in 1..=2 {
        let errs = stress_mms_errors(r);
        for k in rates(&errs) {
            assert!(k >= r as f64 + 0.5, "stress r={r}: errors {errs:?}");
        }
    }
}

#[test]
fn heat_manufactured_convergence() {
    for r in 1..=2 {
        let errs = heat_mms_errors(r);
        for k in rates(&errs) {
            assert!(k >= r as f64 + 0.5, "heat r={r}: errors {errs:?}");
        }
    }
}

#[test]
fn linear_shear_is_in_the_kernel() {
    let bc = [
        BoundaryCondition::Periodic,
        BoundaryCondition::Periodic,
        BoundaryCondition::wall(),
        BoundaryCondition::Wall {
            velocity: [1.0, 0.0],
            temperature: None,
        },
    ];
    let mesh = AdaptiveMesh::cartesian([0.0, 0.0], [1.0, 1.0], [4, 4], [true, false]);
    let disc = Discretization::new(mesh, 2);
    let phys = physics(bc);
    let ops = ViscousOperators::new(&disc, &phys, 1.0);
    let ux = disc.interpolate(|x| x[1]);
    let uy = vec![0.0; ux.len()];
    let u = interleave(&disc, &ux, &uy);
    let a = ops.apply_stress(&u);
    let d = ops.stress_data();
    let res = a.iter().zip(&d).map(|(a, d)| (a - d).abs()).fold(0.0, f64::max);
    assert!(res < 1e-12, "residual {res}");

    // a full viscous substep keeps the shear flow
    let st = FlowState {
        rho: disc.interpolate(|_| 1.0),
        u: u.clone(),
        p: disc.interpolate(|_| 0.01),
    };
    let tab = ImexTableau::ark2(original_alpha());
    let (out, _) = viscous_step(&disc, &phys, &tab, &ViscousSettings::default(), &st, 0.1).unwrap();
    let du = out.u.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(du < 1e-9, "velocity change {du}");
}

#[test]
fn free_stream_is_preserved() {
    let mesh = AdaptiveMesh::cartesian([0.0, 0.0], [1.0, 1.0], [4, 4], [true, true]);
    let disc = Discretization::new(mesh, 2);
    let phys = physics([BoundaryCondition::Periodic; 4]);
    let st = FlowState::interpolate(&disc, |_| (1.3, [0.2, -0.1], 0.02));
    let tab = ImexTableau::ark2(original_alpha());
    let (out, _) = viscous_step(&disc, &phys, &tab, &ViscousSettings::default(), &st, 0.05).unwrap();
    for (a, b) in out.u.iter().chain(&out.p).zip(st.u.iter().chain(&st.p)) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn inviscid_split_step_is_the_hyperbolic_step() {
    use imexdg::hyperbolic::{hyperbolic_step, HyperbolicSettings};
    let mesh = AdaptiveMesh::cartesian([0.0, 0.0], [1.0, 1.0], [3, 3], [true, true]);
    let disc = Discretization::new(mesh, 1);
    let phys = Physics::inviscid(EosModel::ideal(1.4), 0.5, [BoundaryCondition::Periodic; 4]);
    let st = FlowState::interpolate(&disc, |x| {
        (1.0 + 0.1 * (2.0 * PI * x[0]).sin(), [0.1, 0.0], 1.0)
    });
    let tab = ImexTableau::ark2(0.5);
    let hs = HyperbolicSettings::default();
    let (a, _) = hyperbolic_step(&disc, &phys, &tab, &hs, &st, 0.01).unwrap();
    let (b, _, _) = split_step(&disc, &phys, &tab, &hs, &ViscousSettings::default(), &st, 0.01).unwrap();
    assert_eq!(a, b);
}

#[test]
fn constant_a_cubic_needs_one_temperature_iteration() {
    let mesh = AdaptiveMesh::cartesian([0.0, 0.0], [1.0, 1.0], [3, 3], [true, true]);
    let disc = Discretization::new(mesh, 1);
    let mut phys = physics([BoundaryCondition::Periodic; 4]);
    phys.eos = EosModel::van_der_waals(0.5, 0.5, 1.0, 2.5);
    let st = FlowState::interpolate(&disc, |x| {
        (0.5 + 0.05 * (2.0 * PI * x[0]).sin(), [0.0, 0.0], 1.0 + 0.1 * (2.0 * PI * x[1]).cos())
    });
    let tab = ImexTableau::ark2(original_alpha());
    let (_, rep) = viscous_step(&disc, &phys, &tab, &ViscousSettings::default(), &st, 0.01).unwrap();
    assert_eq!(rep.temperature_iterations, vec![1, 1]);
}
