//! Oracles shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

pub mod sip;

use imexdg::eos::{n2o_coeffs, EosModel};
use imexdg::Eos;
use nalgebra::Matrix3;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// A named equation of state with an admissible `(rho, T)` box.
pub struct EosCase {
    pub name: &'static str,
    pub eos: EosModel<f64>,
    pub rho: (f64, f64),
    pub t: (f64, f64),
}

pub fn eos_cases() -> Vec<EosCase> {
    vec![
        EosCase {
            name: "ideal",
            eos: EosModel::ideal(1.4),
            rho: (0.1, 2.0),
            t: (0.5, 3.0),
        },
        EosCase {
            name: "van der Waals",
            eos: EosModel::van_der_waals(0.5, 0.5, 1.0, 2.5),
            rho: (0.1, 1.2),
            t: (0.5, 3.0),
        },
        EosCase {
            name: "Peng-Robinson",
            eos: EosModel::peng_robinson(0.5, 0.5, 1.0, 2.5),
            rho: (0.1, 1.2),
            t: (0.5, 3.0),
        },
        EosCase {
            name: "stiffened gas",
            eos: EosModel::stiffened_gas(1.4, 0.1, 0.5, 2.5),
            rho: (0.5, 2.0),
            t: (0.5, 3.0),
        },
    ]
}

/// Peng-Robinson nitrous oxide in SI units around the warm-bubble states.
pub fn n2o_case() -> EosCase {
    EosCase {
        name: "Peng-Robinson N2O",
        eos: EosModel::Cubic(n2o_coeffs()),
        rho: (1.0, 80.0),
        t: (290.0, 400.0),
    }
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random `(rho, p, T)` with positive pressure and sound speed.
pub fn random_states(case: &EosCase, n: usize, rng: &mut StdRng) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let rho = rng.gen_range(case.rho.0..case.rho.1);
        let t = rng.gen_range(case.t.0..case.t.1);
        let Ok(p) = case.eos.pressure_from_rho_t(rho, t) else { continue };
        if p > 0.0 && case.eos.sound_speed(p, rho, Some(t)).is_ok() {
            out.push((rho, p, t));
        }
    }
    out
}

/// Flux of the scaled 1D Euler system in conserved variables
/// `(rho, rho u, rho e + M^2 rho u^2/2)`.
fn flux(eos: &EosModel<f64>, m2: f64, q: [f64; 3], t_hint: f64) -> [f64; 3] {
    let rho = q[0];
    let u = q[1] / rho;
    let e = (q[2] - 0.5 * m2 * rho * u * u) / rho;
    let p = eos.pressure_from_rho_e(rho, e, Some(t_hint)).expect("admissible state");
    [q[1], q[1] * u + p / m2, (q[2] + p) * u]
}

/// Largest relative mismatch between the eigenvalues of the finite-difference
/// flux Jacobian and `{u - c/M, u, u + c/M}`, relative to `|u| + c/M`.
pub fn eigen_mismatch(eos: &EosModel<f64>, mach: f64, rho: f64, u: f64, p: f64, t: f64) -> f64 {
    let m2 = mach * mach;
    let e = eos.internal_energy(p, rho, Some(t)).unwrap();
    let q = [rho, rho * u, rho * e + 0.5 * m2 * rho * u * u];
    let c = eos.sound_speed(p, rho, Some(t)).unwrap() / mach;
    let scale = [rho, rho * c, q[2].abs() + rho * e.abs()];
    let mut jac = Matrix3::zeros();
    for j in 0..3 {
        let h = 1e-6 * scale[j];
        let (mut qp, mut qm) = (q, q);
        qp[j] += h;
        qm[j] -= h;
        let (fp, fm) = (flux(eos, m2, qp, t), flux(eos, m2, qm, t));
        for i in 0..3 {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    let mut got: Vec<f64> = jac.complex_eigenvalues().iter().map(|z| z.re).collect();
    let imag = jac.complex_eigenvalues().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let want = [u - c, u, u + c];
    let s = u.abs() + c;
    got.iter()
        .zip(want)
        .map(|(g, w)| (g - w).abs() / s)
        .fold(imag / s, f64::max)
}

/// Specific internal energy along the isentrope `de/drho = p/rho^2` from
/// `(rho0, e0)` to `rho1` (RK4).
pub fn isentrope(eos: &EosModel<f64>, rho0: f64, e0: f64, rho1: f64, steps: usize) -> f64 {
    let h = (rho1 - rho0) / steps as f64;
    let f = |r: f64, e: f64| eos.pressure_from_rho_e(r, e, None).unwrap() / (r * r);
    let (mut r, mut e) = (rho0, e0);
    for _ in 0..steps {
        let k1 = f(r, e);
        let k2 = f(r + 0.5 * h, e + 0.5 * h * k1);
        let k3 = f(r + 0.5 * h, e + 0.5 * h * k2);
        let k4 = f(r + h, e + h * k3);
        e += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        r += h;
    }
    e
}

/// Largest relative deviation of `p/rho^gamma_prho` (exponent frozen at the
/// start) over short isentropic excursions `rho (1 +- delta)`.
pub fn gamma_prho_deviation(eos: &EosModel<f64>, rho: f64, t: f64, delta: f64) -> f64 {
    let p = eos.pressure_from_rho_t(rho, t).unwrap();
    let e = eos.internal_energy(p, rho, Some(t)).unwrap();
    let g = eos.gamma_prho(p, rho, Some(t)).unwrap();
    let inv = p / rho.powf(g);
    [-delta, delta]
        .iter()
        .map(|d| {
            let r1 = rho * (1.0 + d);
            let e1 = isentrope(eos, rho, e, r1, 50);
            let p1 = eos.pressure_from_rho_e(r1, e1, Some(t)).unwrap();
            (p1 / r1.powf(g) - inv).abs() / inv
        })
        .fold(0.0, f64::max)
}

/// Change of the invariant beta along an integrated isentrope from `rho0` to `rho1`.
pub fn beta_drift(eos: &EosModel<f64>, rho0: f64, t0: f64, rho1: f64) -> f64 {
    let p0 = eos.pressure_from_rho_t(rho0, t0).unwrap();
    let e0 = eos.internal_energy(p0, rho0, None).unwrap();
    let e1 = isentrope(eos, rho0, e0, rho1, 400);
    let p1 = eos.pressure_from_rho_e(rho1, e1, None).unwrap();
    let b0 = eos.isentropic_invariant_beta(p0, rho0).unwrap();
    let b1 = eos.isentropic_invariant_beta(p1, rho1).unwrap();
    (b1 - b0).abs()
}

/// Largest relative disagreement of `(p, e, T, c)` between a cubic model with
/// `a = b = 0` and the ideal gas with the same heat capacity, on a 10 x 10 grid.
pub fn ideal_reduction_error() -> f64 {
    let (gamma, rg) = (1.4, 1.0);
    let cv = rg / (gamma - 1.0);
    let ideal = Eos::Ideal(imexdg::eos::IdealGasParams { gamma, rg });
    let mut worst: f64 = 0.0;
    for cubic in [Eos::van_der_waals(0.0, 0.0, rg, cv), Eos::peng_robinson(0.0, 0.0, rg, cv)] {
        for i in 0..10 {
            for j in 0..10 {
                let rho = 0.1 + 0.2 * i as f64;
                let t = 0.2 + 0.3 * j as f64;
                let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
                let p = ideal.pressure_from_rho_t(rho, t).unwrap();
                let checks = [
                    rel(cubic.pressure_from_rho_t(rho, t).unwrap(), p),
                    rel(cubic.internal_energy(p, rho, None).unwrap(), ideal.internal_energy(p, rho, None).unwrap()),
                    rel(cubic.temperature_from_p_rho(p, rho, None).unwrap(), t),
                    rel(cubic.sound_speed(p, rho, None).unwrap(), ideal.sound_speed(p, rho, None).unwrap()),
                ];
                worst = checks.iter().fold(worst, |a, &b| a.max(b));
            }
        }
    }
    worst
}

/// Largest relative error of the `p(rho, T)` / `T(p, rho)` round trip.
pub fn round_trip_error(case: &EosCase, states: &[(f64, f64, f64)]) -> f64 {
    states
        .iter()
        .map(|&(rho, p, t)| {
            let t1 = case.eos.temperature_from_p_rho(p, rho, Some(t * 1.1)).unwrap();
            let p1 = case.eos.pressure_from_rho_t(rho, t1).unwrap();
            ((t1 - t).abs() / t).max((p1 - p).abs() / p.abs())
        })
        .fold(0.0, f64::max)
}
