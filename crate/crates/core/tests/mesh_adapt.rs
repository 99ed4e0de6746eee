use std::collections::BTreeSet;

use imexdg::adapt::*;
use imexdg::bench::cases::{cold_bubble, initial_state};
use imexdg::eos::EosModel;
use imexdg::mesh::{CellSource, FaceKind, RefinementPlan};
use imexdg::model::FlowState;
use imexdg::{Disc, Eos, Error, Mesh, State};
use proptest::prelude::*;

fn plan(refine: &[usize], coarsen: &[usize], min: f64, max: f64) -> RefinementPlan<f64> {
    RefinementPlan {
        refine: refine.iter().copied().collect(),
        coarsen: coarsen.iter().copied().collect(),
        min_diam: min,
        max_diam: max,
    }
}

fn vortex_rho(x: [f64; 2], c: [f64; 2]) -> f64 {
    let r2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
    1.0 - 0.3 * (-r2 / 2.0).exp()
}

fn smooth_state(disc: &Disc) -> State {
    FlowState::interpolate(disc, |x| {
        (
            1.0 + 0.2 * (0.7 * x[0]).sin() * (0.3 * x[1]).cos(),
            [0.1 * x[1], -0.2 * x[0] + 0.05 * x[0] * x[1]],
            1.0 + 0.1 * (x[0] + x[1]).cos(),
        )
    })
}

#[test]
fn cartesian_sizes() {
    let m = Mesh::cartesian([-10.0, -10.0], [10.0, 10.0], [10, 10], [true, true]);
    assert_eq!(m.n_active(), 100);
    assert_eq!(m.min_diameter(), 2.0);
    let l = Mesh::interval(-0.5, 0.5, 500, false);
    assert_eq!(l.n_active(), 500);
    assert!((l.min_diameter() - 0.002).abs() < 1e-15);
    assert!((Mesh::interval(0.0, 1.0, 20, false).min_diameter() - 0.05).abs() < 1e-15);
    let one = Mesh::cartesian([0.0, 0.0], [1.0, 1.0], [1, 1], [false, false]);
    let bnd = one.faces().iter().filter(|f| matches!(f.kind, FaceKind::Boundary(_))).count();
    assert_eq!((one.faces().len(), bnd), (4, 4));
}

#[test]
fn refine_and_coarsen_small_grids() {
    let m = Mesh::cartesian([0.0, 0.0], [1.0, 1.0], [2, 2], [false, false]);
    let (one, _, _) = m.apply_refinement(&plan(&[0], &[], 0.0, 1.0));
    assert_eq!(one.n_active(), 7);
    assert_eq!(one.faces().iter().filter(|f| f.hanging).count(), 4);
    let all = m.refine_all();
    assert_eq!(all.n_active(), 16);
    let every: Vec<usize> = (0..16).collect();
    let (back, _, _) = all.apply_refinement(&plan(&[], &every, 0.0, 1.0));
    assert_eq!(back.n_active(), 4);
    // the maximum diameter forbids coarsening
    let (kept, _, stats) = all.apply_refinement(&plan(&[], &every, 0.0, 0.3));
    assert_eq!(kept.n_active(), 16);
    assert_eq!(stats.coarsened, 0);
}

#[test]
fn cold_bubble_mesh_with_two_levels() {
    let m = Mesh::cartesian([0.0, 0.0], [1000.0, 2000.0], [50, 100], [false, false]);
    let (m1, _, _) = m.apply_refinement(&plan(&[0], &[], 5.0, 20.0));
    let (m2, _, _) = m1.apply_refinement(&plan(&[0], &[], 5.0, 20.0));
    assert_eq!(m2.min_diameter(), 5.0);
    // a third level is clipped by the minimum diameter
    let (m3, _, stats) = m2.apply_refinement(&plan(&[0], &[], 5.0, 20.0));
    assert_eq!((m3.min_diameter(), stats.clipped), (5.0, 1));
}

fn check_mesh(m: &Mesh) {
    let area: f64 = (0..m.n_active()).map(|a| m.cell_measure(a)).sum();
    assert!((area - m.domain_measure()).abs() < 1e-12 * m.domain_measure());
    assert!(m.is_balanced());
    for f in m.faces() {
        let n = f.normal;
        assert!(((n[0] * n[0] + n[1] * n[1]).sqrt() - 1.0).abs() < 1e-15);
        let a = f.inner();
        if let Some(b) = f.outer() {
            let (ca, cb) = (m.cell_center(a.cell), m.cell_center(b.cell));
            let d = [cb[0] - ca[0], cb[1] - ca[1]];
            if f.kind == FaceKind::Interior {
                // the normal points from the inner to the outer cell, so the
                // outer cell sees the antiparallel normal
                assert!(d[0] * n[0] + d[1] * n[1] > 0.0);
            }
            // the face never exceeds either adjacent side
            let side = |c: usize| m.cell_size(c)[1 - f.axis];
            assert!(f.measure <= side(a.cell) + 1e-12 && f.measure <= side(b.cell) + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_refinement_keeps_mesh_consistent(
        seq in prop::collection::vec((prop::collection::vec(0usize..64, 0..8), prop::collection::vec(0usize..64, 0..32)), 1..5),
        periodic in any::<(bool, bool)>(),
    ) {
        let mut m = Mesh::cartesian([0.0, -1.0], [2.0, 3.0], [3, 4], [periodic.0, periodic.1]);
        for (r, c) in seq {
            let n = m.n_active();
            let r: Vec<usize> = r.into_iter().map(|i| i % n).collect();
            let c: Vec<usize> = c.into_iter().map(|i| i % n).filter(|i| !r.contains(i)).collect();
            m = m.apply_refinement(&plan(&r, &c, 0.05, 1.0)).0;
            check_mesh(&m);
            let d = (0..m.n_active()).map(|a| m.diameter(a));
            prop_assert!(d.clone().all(|d| d >= 0.05 - 1e-12 && d <= 1.0 + 1e-12));
        }
    }

    #[test]
    fn transfer_conserves_mass_momentum_and_energy(
        r in prop::collection::vec(0usize..36, 1..10),
        degree in 1usize..3,
    ) {
        let mesh = Mesh::cartesian([0.0, 0.0], [6.0, 6.0], [6, 6], [true, false]);
        let disc = Disc::new(mesh, degree);
        let st = smooth_state(&disc);
        let (m1, src, _) = disc.mesh.apply_refinement(&plan(&r, &[], 0.1, 10.0));
        let fine = disc.remeshed(m1);
        let st1 = transfer_state(&disc, &fine, &src, &st);
        let all: Vec<usize> = (0..fine.n_cells()).collect();
        let (m2, src2, _) = fine.mesh.apply_refinement(&plan(&[], &all, 0.1, 10.0));
        let coarse = fine.remeshed(m2);
        let st2 = transfer_state(&fine, &coarse, &src2, &st1);
        let ideal = Eos::ideal(1.4);
        for (d, s) in [(&fine, &st1), (&coarse, &st2)] {
            let (m, mu, e) = totals(d, s, &ideal);
            let (m0, mu0, e0) = totals(&disc, &st, &ideal);
            prop_assert!((m - m0).abs() < 1e-12 * m0.abs());
            prop_assert!((mu[0] - mu0[0]).abs() < 1e-12 * (mu0[0].abs() + m0));
            prop_assert!((mu[1] - mu0[1]).abs() < 1e-12 * (mu0[1].abs() + m0));
            prop_assert!((e - e0).abs() < 1e-12 * e0.abs());
        }
        // refinement followed by full coarsening recovers the data
        prop_assert_eq!(coarse.n_cells(), disc.n_cells());
        for (a, b) in st2.rho.iter().zip(&st.rho).chain(st2.u.iter().zip(&st.u)).chain(st2.p.iter().zip(&st.p)) {
            prop_assert!((a - b).abs() < 1e-13);
        }
    }
}

/// Integrals of rho, rho u and rho E (energy with unit Mach number) at quadrature points.
fn totals(disc: &Disc, st: &State, eos: &Eos) -> (f64, [f64; 2], f64) {
    let nq = disc.elem.nq;
    let (mut m, mut mu, mut e) = (0.0, [0.0; 2], 0.0);
    let z = || vec![0.0; nq];
    for c in 0..disc.n_cells() {
        let (mut r, mut ux, mut uy, mut p) = (z(), z(), z(), z());
        disc.eval(disc.block(&st.rho, c), &mut r);
        disc.eval(disc.vblock(&st.u, c, 0), &mut ux);
        disc.eval(disc.vblock(&st.u, c, 1), &mut uy);
        disc.eval(disc.block(&st.p, c), &mut p);
        for q in 0..nq {
            let w = disc.qp_weight(c, q);
            m += w * r[q];
            mu[0] += w * r[q] * ux[q];
            mu[1] += w * r[q] * uy[q];
            e += w * (r[q] * eos.internal_energy(p[q], r[q], None).unwrap() + 0.5 * r[q] * (ux[q] * ux[q] + uy[q] * uy[q]));
        }
    }
    (m, mu, e)
}

#[test]
fn linear_fields_transfer_exactly() {
    let disc = Disc::new(Mesh::cartesian([0.0, 0.0], [1.0, 1.0], [4, 4], [false, false]), 1);
    let f = disc.interpolate(|x| 2.0 + 3.0 * x[0] - x[1]);
    let (m, src, _) = disc.mesh.apply_refinement(&plan(&[5, 6], &[], 0.0, 1.0));
    let fine = disc.remeshed(m);
    let g = transfer_field(&disc, &fine, &src, &f, 1);
    assert!(fine.l2_error(&g, |x| 2.0 + 3.0 * x[0] - x[1]) < 1e-14);
    assert!(src.iter().any(|s| matches!(s, CellSource::Child { .. })));
}

#[test]
fn constant_fields_give_zero_indicators() {
    let disc = Disc::new(Mesh::cartesian([0.0, 0.0], [1.0, 1.0], [4, 4], [true, true]), 2);
    let st = FlowState::interpolate(&disc, |_| (0.8, [0.3, -0.1], 0.9));
    let vdw = EosModel::van_der_waals(0.5, 0.5, 1.0, 2.5);
    let ideal = EosModel::ideal(1.4);
    let kinds = [
        (IndicatorKind::DensityGradient, ideal),
        (IndicatorKind::Vorticity, ideal),
        (IndicatorKind::PotentialTemperatureGradient { reference_pressure: 1.0 }, ideal),
        (IndicatorKind::BetaGradient, vdw),
        (IndicatorKind::GammaPrhoInvariantGradient, vdw),
        (IndicatorKind::DensityFaceJump, vdw),
    ];
    for (k, eos) in kinds {
        let v = evaluate_indicator(k, &disc, &eos, &st).unwrap();
        assert!(v.iter().all(|&x| x.abs() < 1e-12), "{k:?}");
    }
}

#[test]
fn incompatible_equations_of_state_are_rejected() {
    let disc = Disc::new(Mesh::cartesian([0.0, 0.0], [1.0, 1.0], [2, 2], [true, true]), 1);
    let st = FlowState::interpolate(&disc, |_| (1.0, [0.0, 0.0], 1.0));
    let ideal = EosModel::ideal(1.4);
    let vdw = EosModel::van_der_waals(0.5, 0.5, 1.0, 2.5);
    let theta = IndicatorKind::PotentialTemperatureGradient { reference_pressure: 1.0 };
    assert!(matches!(evaluate_indicator(IndicatorKind::BetaGradient, &disc, &ideal, &st), Err(Error::UnsupportedIndicator(_))));
    assert!(matches!(evaluate_indicator(theta, &disc, &vdw, &st), Err(Error::UnsupportedIndicator(_))));
}

#[test]
fn marking_strategies() {
    let vals: Vec<f64> = (0..100).map(|i| ((i * 37) % 100) as f64).collect();
    let p = mark(&vals, MarkingStrategy::Fraction { refine_frac: 0.05, coarsen_frac: 0.30 }, 0.0, 1.0);
    assert_eq!((p.refine.len(), p.coarsen.len()), (5, 30));
    assert!(p.refine.iter().all(|&i| vals[i] >= 95.0));
    assert!(p.coarsen.iter().all(|&i| vals[i] < 30.0));
    let t = mark(&vals, MarkingStrategy::Threshold { refine: -1.0, coarsen: -2.0 }, 0.0, 1.0);
    assert_eq!((t.refine.len(), t.coarsen.len()), (100, 0));
}

#[test]
fn coarsening_needs_every_sibling() {
    let m = Mesh::cartesian([0.0, 0.0], [1.0, 1.0], [1, 1], [false, false]).refine_all();
    let (kept, _, stats) = m.apply_refinement(&plan(&[], &[0, 1, 2], 0.0, 1.0));
    assert_eq!((kept.n_active(), stats.coarsened), (4, 0));
}

#[test]
fn vortex_indicator_peaks_near_the_center() {
    let disc = Disc::new(Mesh::cartesian([-10.0, -10.0], [10.0, 10.0], [20, 20], [true, true]), 1);
    let st = FlowState::interpolate(&disc, |x| (vortex_rho(x, [0.0, 0.0]), [0.0, 0.0], 1.0));
    let eta = evaluate_indicator(IndicatorKind::DensityGradient, &disc, &EosModel::ideal(1.4), &st).unwrap();
    let top = mark(&eta, MarkingStrategy::Fraction { refine_frac: 0.05, coarsen_frac: 0.0 }, 0.0, 10.0);
    for &c in &top.refine {
        let x = disc.mesh.cell_center(c);
        assert!((x[0] * x[0] + x[1] * x[1]).sqrt() <= 3.0, "{x:?}");
    }
}

#[test]
fn indicators_are_translation_equivariant() {
    let disc = Disc::new(Mesh::cartesian([0.0, 0.0], [10.0, 10.0], [10, 10], [true, true]), 1);
    let eos = EosModel::ideal(1.4);
    let marked = |c: [f64; 2]| -> BTreeSet<(i64, i64)> {
        let st = FlowState::interpolate(&disc, |x| (vortex_rho(x, c), [0.0, 0.0], 1.0));
        let eta = evaluate_indicator(IndicatorKind::DensityGradient, &disc, &eos, &st).unwrap();
        let p = mark(&eta, MarkingStrategy::Threshold { refine: 0.05, coarsen: 0.01 }, 0.0, 10.0);
        p.refine
            .iter()
            .map(|&a| {
                let x = disc.mesh.cell_center(a);
                (x[0].floor() as i64, x[1].floor() as i64)
            })
            .collect()
    };
    let a = marked([5.0, 5.0]);
    let b = marked([7.0, 4.0]);
    assert!(!a.is_empty());
    let shifted: BTreeSet<(i64, i64)> = a.iter().map(|&(i, j)| ((i + 2) % 10, (j + 9) % 10)).collect();
    assert_eq!(shifted, b);
}

#[test]
fn cold_bubble_thresholds_mark_the_anomaly() {
    let cfg = cold_bubble(50, 1, 0.08);
    let disc: Disc = Disc::new(cfg.build_mesh(), 1);
    let st = initial_state(&cfg, &disc).unwrap();
    let kind = IndicatorKind::PotentialTemperatureGradient { reference_pressure: 1.0 };
    let eta = evaluate_indicator(kind, &disc, &cfg.eos, &st).unwrap();
    let p = mark(&eta, MarkingStrategy::Threshold { refine: 1e-1, coarsen: 6e-2 }, 5.0, 20.0);
    assert!(!p.refine.is_empty());
    for &c in &p.refine {
        let x = disc.mesh.cell_center(c);
        let r = ((x[0] - 500.0).powi(2) + (x[1] - 1250.0).powi(2)).sqrt();
        assert!(r < 400.0, "{x:?}");
    }
    // the neutral background far from the bubble is coarsened
    let far = disc.mesh.locate([100.0, 200.0]).unwrap();
    assert!(p.coarsen.contains(&far));
}

#[test]
fn remesh_log_counts() {
    let disc = Disc::new(Mesh::cartesian([-10.0, -10.0], [10.0, 10.0], [10, 10], [true, true]), 1);
    let st = FlowState::interpolate(&disc, |x| (vortex_rho(x, [0.0, 0.0]), [0.0, 0.0], 1.0));
    let strategy = MarkingStrategy::Fraction { refine_frac: 0.05, coarsen_frac: 0.0 };
    let (d, s, rec) = remesh(&disc, &EosModel::ideal(1.4), &st, IndicatorKind::DensityGradient, strategy, 0.5, 2.0, 7).unwrap();
    assert_eq!((rec.step, rec.marked_refine, rec.n_active), (7, 5, d.n_cells()));
    assert!(d.n_cells() >= 100 + 3 * 5);
    assert!(s.is_finite());
}
