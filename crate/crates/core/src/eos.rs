//! Thermodynamic closures in non-dimensional form.
//!
//! Every model exposes the thermal relation `p(rho, T)`, the caloric relation
//! `e(rho, T)` and the derived quantities used by the solver (sound speed,
//! enthalpy, compressibility, isentropic invariants). Cubic models cover van der
//! Waals and Peng-Robinson with optionally temperature dependent attraction and
//! heat capacity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

const MAX_INVERSION_ITERS: usize = 100;
const COVOLUME_MARGIN: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CubicKind {
    VanDerWaals,
    PengRobinson,
}

impl CubicKind {
    /// The constants `(r1, r2)` of the cubic family.
    pub fn roots<T: Real>(self) -> (T, T) {
        match self {
            CubicKind::VanDerWaals => (T::zero(), T::zero()),
            CubicKind::PengRobinson => {
                let s2 = T::SQRT_2();
                (-T::one() - s2, -T::one() + s2)
            }
        }
    }
}

/// Attraction coefficient `a(T)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attraction<T> {
    Constant(T),
    /// `a(T) = coeff * (1 + kappa (1 - sqrt(T/tc)))^2`
    Soave { coeff: T, tc: T, kappa: T },
}

impl<T: Real> Attraction<T> {
    pub fn is_constant(&self) -> bool {
        matches!(self, Attraction::Constant(_))
    }

    /// Returns `(a, da/dT, d2a/dT2)`.
    pub fn eval(&self, t: T) -> (T, T, T) {
        match *self {
            Attraction::Constant(a) => (a, T::zero(), T::zero()),
            Attraction::Soave { coeff, tc, kappa } => {
                let sq = (t / tc).sqrt();
                let alpha = T::one() + kappa * (T::one() - sq);
                let d_alpha = -kappa / (T::two() * (t * tc).sqrt());
                let dd_alpha = kappa / (T::lit(4.0) * tc.sqrt() * t * t.sqrt());
                (
                    coeff * alpha * alpha,
                    T::two() * coeff * alpha * d_alpha,
                    T::two() * coeff * (d_alpha * d_alpha + alpha * dd_alpha),
                )
            }
        }
    }
}

/// Heat capacity model, entering the caloric law as `e# = cv(T) T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatCapacity<T> {
    Constant(T),
    /// Shomate-type enthalpy polynomial in `t = T/1000` (kJ/mol) converted to
    /// specific internal energy through the molar mass `mw` (g/mol).
    Shomate { coeffs: [T; 5], mw: T, rg: T },
}

impl<T: Real> HeatCapacity<T> {
    pub fn is_constant(&self) -> bool {
        matches!(self, HeatCapacity::Constant(_))
    }

    /// Returns `(e#(T), de#/dT)`.
    pub fn energy(&self, t: T) -> (T, T) {
        match *self {
            HeatCapacity::Constant(cv) => (cv * t, cv),
            HeatCapacity::Shomate { coeffs, mw, rg } => {
                let [a, b, c, d, e] = coeffs;
                let k = T::lit(1000.0);
                let s = t / k;
                let h = a * s + b * s * s / T::two() + c * s.powi(3) / T::lit(3.0)
                    + d * s.powi(4) / T::lit(4.0)
                    - e * k / t;
                let dh = a + b * s + c * s * s + d * s.powi(3) + e / (s * s);
                let scale = T::lit(1e6) / mw;
                (h * scale - rg * t, dh * scale / k - rg)
            }
        }
    }

    /// The apparent heat capacity `e#(T)/T`.
    pub fn cv(&self, t: T) -> T {
        match *self {
            HeatCapacity::Constant(cv) => cv,
            _ => self.energy(t).0 / t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealGasParams<T> {
    pub gamma: T,
    /// Specific gas constant; only needed when temperatures are involved.
    pub rg: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicEosParams<T> {
    pub kind: CubicKind,
    pub a: Attraction<T>,
    pub b: T,
    pub rg: T,
    pub cv: HeatCapacity<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StiffenedGasParams<T> {
    pub gamma: T,
    pub q: T,
    pub pi: T,
    pub cv: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EosModel<T> {
    Ideal(IdealGasParams<T>),
    Cubic(CubicEosParams<T>),
    StiffenedGas(StiffenedGasParams<T>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermoState<T> {
    pub rho: T,
    pub p: T,
    pub t: T,
    pub e: T,
}

fn nonphysical<S: Into<String>>(msg: S) -> Error {
    Error::NonPhysicalState(msg.into())
}

impl<T: Real> CubicEosParams<T> {
    pub fn r1r2(&self) -> (T, T) {
        self.kind.roots()
    }

    /// `(1 - rho b r1)(1 - rho b r2)`
    pub fn denom(&self, rho: T) -> T {
        let (r1, r2) = self.r1r2();
        (T::one() - rho * self.b * r1) * (T::one() - rho * self.b * r2)
    }

    fn d_denom(&self, rho: T) -> T {
        let (r1, r2) = self.r1r2();
        let b = self.b;
        -b * r1 * (T::one() - rho * b * r2) - b * r2 * (T::one() - rho * b * r1)
    }

    /// `U(rho)/b`, continuous in the limit `b -> 0` where it tends to `-rho`.
    pub fn u_over_b(&self, rho: T) -> T {
        let (r1, r2) = self.r1r2();
        let b = self.b;
        if b == T::zero() {
            return -rho;
        }
        if (r1 - r2).abs() <= T::epsilon() {
            return -rho / (T::one() - rho * b * r1);
        }
        ((-rho * b * r1).ln_1p() - (-rho * b * r2).ln_1p()) / (b * (r1 - r2))
    }

    fn check(&self, rho: T) -> Result<()> {
        if !(rho > T::zero()) {
            return Err(nonphysical(format!("density {rho} is not positive")));
        }
        if rho * self.b >= T::one() - T::lit(COVOLUME_MARGIN) {
            return Err(nonphysical(format!(
                "covolume bound violated (rho b = {})",
                rho * self.b
            )));
        }
        Ok(())
    }

    fn pressure_unchecked(&self, rho: T, t: T) -> T {
        let (a, _, _) = self.a.eval(t);
        rho * self.rg * t / (T::one() - rho * self.b) - a * rho * rho / self.denom(rho)
    }

    /// Right-hand side of the temperature relation `T = [p + a rho^2/D](1 - rho b)/(rho R)`.
    fn temperature_rhs(&self, p: T, rho: T, t: T) -> T {
        let (a, _, _) = self.a.eval(t);
        (p + a * rho * rho / self.denom(rho)) * (T::one() - rho * self.b) / (rho * self.rg)
    }

    fn energy_unchecked(&self, rho: T, t: T) -> T {
        let (a, da, _) = self.a.eval(t);
        self.cv.energy(t).0 + (a - t * da) * self.u_over_b(rho)
    }

    fn de_dt(&self, rho: T, t: T) -> T {
        let (_, _, dda) = self.a.eval(t);
        self.cv.energy(t).1 - t * dda * self.u_over_b(rho)
    }

    fn dp_dt(&self, rho: T, t: T) -> T {
        let (_, da, _) = self.a.eval(t);
        rho * self.rg / (T::one() - rho * self.b) - da * rho * rho / self.denom(rho)
    }

    fn dp_drho(&self, rho: T, t: T) -> T {
        let (a, _, _) = self.a.eval(t);
        let d = self.denom(rho);
        let omb = T::one() - rho * self.b;
        self.rg * t / (omb * omb) - a * (T::two() * rho * d - rho * rho * self.d_denom(rho)) / (d * d)
    }

    fn de_drho(&self, rho: T, t: T) -> T {
        let (a, da, _) = self.a.eval(t);
        -(a - t * da) / self.denom(rho)
    }

    fn temperature(&self, p: T, rho: T, seed: Option<T>) -> Result<T> {
        self.check(rho)?;
        if self.a.is_constant() {
            let t = self.temperature_rhs(p, rho, T::one());
            if !(t > T::zero()) {
                return Err(nonphysical(format!("temperature {t} is not positive")));
            }
            return Ok(t);
        }
        let seed = match seed {
            Some(s) if s > T::zero() => s,
            _ => {
                let guess = p * (T::one() - rho * self.b) / (rho * self.rg);
                if guess > T::zero() {
                    guess
                } else {
                    T::one()
                }
            }
        };
        let tol = |t: T| T::lit(1e-12) * t.max(T::one());
        let mut t = seed;
        let mut converged = false;
        for _ in 0..MAX_INVERSION_ITERS {
            let next = self.temperature_rhs(p, rho, t);
            if !next.is_finite() || next <= T::zero() {
                break;
            }
            let done = (next - t).abs() <= tol(next);
            t = next;
            if done {
                converged = true;
                break;
            }
        }
        if converged {
            // two more sweeps push the contraction to round-off
            for _ in 0..2 {
                t = self.temperature_rhs(p, rho, t);
            }
            return Ok(t);
        }
        let g = |t: T| t - self.temperature_rhs(p, rho, t);
        let root = bisect(g, seed / T::lit(10.0), seed * T::lit(10.0), tol)
            .ok_or_else(|| Error::NoConvergence {
                what: "temperature inversion".into(),
                iterations: MAX_INVERSION_ITERS,
                residual: f64::NAN,
            })?;
        Ok(root)
    }

    fn temperature_from_energy(&self, rho: T, e: T, seed: Option<T>) -> Result<T> {
        self.check(rho)?;
        if self.a.is_constant() {
            if let HeatCapacity::Constant(cv) = self.cv {
                let (a, _, _) = self.a.eval(T::one());
                let t = (e - a * self.u_over_b(rho)) / cv;
                if !(t > T::zero()) {
                    return Err(nonphysical(format!("temperature {t} is not positive")));
                }
                return Ok(t);
            }
        }
        let mut t = match seed {
            Some(s) if s > T::zero() => s,
            _ => T::lit(300.0),
        };
        let tol = |t: T| T::lit(1e-13) * t.max(T::one());
        for _ in 0..MAX_INVERSION_ITERS {
            let f = self.energy_unchecked(rho, t) - e;
            let df = self.de_dt(rho, t);
            let mut next = t - f / df;
            if !(next > T::zero()) || !next.is_finite() {
                next = t * T::half();
            }
            let done = (next - t).abs() <= tol(next);
            t = next;
            if done {
                return Ok(t);
            }
        }
        Err(Error::NoConvergence {
            what: "temperature from internal energy".into(),
            iterations: MAX_INVERSION_ITERS,
            residual: (self.energy_unchecked(rho, t) - e).to_f64_lossy(),
        })
    }
}

fn bisect<T: Real, F: Fn(T) -> T, G: Fn(T) -> T>(f: F, mut lo: T, mut hi: T, tol: G) -> Option<T> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo.is_nan() || fhi.is_nan() || flo * fhi > T::zero() {
        return None;
    }
    for _ in 0..200 {
        let mid = T::half() * (lo + hi);
        let fm = f(mid);
        if (hi - lo).abs() <= tol(mid) || fm == T::zero() {
            return Some(mid);
        }
        if fm * flo < T::zero() {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    Some(T::half() * (lo + hi))
}

impl<T: Real> EosModel<T> {
    pub fn ideal(gamma: T) -> Self {
        EosModel::Ideal(IdealGasParams { gamma, rg: T::one() })
    }

    /// van der Waals gas with constant coefficients.
    pub fn van_der_waals(a: T, b: T, rg: T, cv: T) -> Self {
        EosModel::Cubic(CubicEosParams {
            kind: CubicKind::VanDerWaals,
            a: Attraction::Constant(a),
            b,
            rg,
            cv: HeatCapacity::Constant(cv),
        })
    }

    /// Peng-Robinson gas with constant coefficients.
    pub fn peng_robinson(a: T, b: T, rg: T, cv: T) -> Self {
        EosModel::Cubic(CubicEosParams {
            kind: CubicKind::PengRobinson,
            a: Attraction::Constant(a),
            b,
            rg,
            cv: HeatCapacity::Constant(cv),
        })
    }

    pub fn stiffened_gas(gamma: T, q: T, pi: T, cv: T) -> Self {
        EosModel::StiffenedGas(StiffenedGasParams { gamma, q, pi, cv })
    }

    /// Effective specific gas constant used in `z = p/(rho R T)`.
    pub fn gas_constant(&self) -> T {
        match self {
            EosModel::Ideal(g) => g.rg,
            EosModel::Cubic(c) => c.rg,
            EosModel::StiffenedGas(s) => (s.gamma - T::one()) * s.cv,
        }
    }

    /// `cv(T)` (apparent heat capacity for non-constant models).
    pub fn cv(&self, t: T) -> T {
        match self {
            EosModel::Ideal(g) => g.rg / (g.gamma - T::one()),
            EosModel::Cubic(c) => c.cv.cv(t),
            EosModel::StiffenedGas(s) => s.cv,
        }
    }

    /// True when every operation is closed form (no inner iterations).
    pub fn is_closed_form(&self) -> bool {
        match self {
            EosModel::Cubic(c) => c.a.is_constant() && c.cv.is_constant(),
            _ => true,
        }
    }

    pub fn check_density(&self, rho: T) -> Result<()> {
        match self {
            EosModel::Cubic(c) => c.check(rho),
            _ if rho > T::zero() => Ok(()),
            _ => Err(nonphysical(format!("density {rho} is not positive"))),
        }
    }

    pub fn pressure_from_rho_t(&self, rho: T, t: T) -> Result<T> {
        self.check_density(rho)?;
        Ok(match self {
            EosModel::Ideal(g) => rho * g.rg * t,
            EosModel::Cubic(c) => c.pressure_unchecked(rho, t),
            EosModel::StiffenedGas(s) => rho * (s.gamma - T::one()) * s.cv * t - s.pi,
        })
    }

    pub fn temperature_from_p_rho(&self, p: T, rho: T, seed: Option<T>) -> Result<T> {
        self.check_density(rho)?;
        let t = match self {
            EosModel::Ideal(g) => p / (rho * g.rg),
            EosModel::Cubic(c) => return c.temperature(p, rho, seed),
            EosModel::StiffenedGas(s) => (p + s.pi) / (rho * (s.gamma - T::one()) * s.cv),
        };
        if !(t > T::zero()) {
            return Err(nonphysical(format!("temperature {t} is not positive")));
        }
        Ok(t)
    }

    /// Density from `(p, T)`. For cubic models the smallest (vapour-like)
    /// root is returned.
    pub fn density_from_p_t(&self, p: T, t: T) -> Result<T> {
        if !(t > T::zero()) {
            return Err(nonphysical(format!("temperature {t} is not positive")));
        }
        let rho = match self {
            EosModel::Ideal(g) => p / (g.rg * t),
            EosModel::StiffenedGas(s) => (p + s.pi) / ((s.gamma - T::one()) * s.cv * t),
            EosModel::Cubic(c) => {
                let f = |r: T| c.pressure_unchecked(r, t) - p;
                let rmax = if c.b > T::zero() {
                    (T::one() - T::lit(2.0 * COVOLUME_MARGIN)) / c.b
                } else {
                    T::infinity()
                };
                let mut lo = (p / (c.rg * t)) * T::lit(1e-3);
                if !(lo < rmax) {
                    lo = rmax * T::lit(1e-6);
                }
                let grow = T::lit(1.05);
                let mut hi = lo;
                loop {
                    let next = (hi * grow).min(rmax);
                    if f(next) >= T::zero() {
                        lo = hi;
                        hi = next;
                        break;
                    }
                    if next >= rmax {
                        return Err(nonphysical(format!("no density for p = {p}, T = {t}")));
                    }
                    hi = next;
                }
                bisect(f, lo, hi, |r| T::lit(1e-14) * r)
                    .ok_or_else(|| nonphysical(format!("no density for p = {p}, T = {t}")))?
            }
        };
        self.check_density(rho)?;
        Ok(rho)
    }

    /// Specific internal energy from `(rho, T)`.
    pub fn internal_energy_rho_t(&self, rho: T, t: T) -> Result<T> {
        self.check_density(rho)?;
        Ok(match self {
            EosModel::Ideal(g) => g.rg * t / (g.gamma - T::one()),
            EosModel::Cubic(c) => c.energy_unchecked(rho, t),
            EosModel::StiffenedGas(s) => s.cv * t + s.pi / rho + s.q,
        })
    }

    /// Specific internal energy from `(p, rho)`; `t_hint` seeds the temperature
    /// inversion for temperature dependent models.
    pub fn internal_energy(&self, p: T, rho: T, t_hint: Option<T>) -> Result<T> {
        match self {
            EosModel::Ideal(g) => {
                self.check_density(rho)?;
                Ok(p / ((g.gamma - T::one()) * rho))
            }
            EosModel::StiffenedGas(s) => {
                self.check_density(rho)?;
                Ok((p + s.gamma * s.pi) / ((s.gamma - T::one()) * rho) + s.q)
            }
            EosModel::Cubic(c) => {
                let t = c.temperature(p, rho, t_hint)?;
                Ok(c.energy_unchecked(rho, t))
            }
        }
    }

    /// Inverse of [`internal_energy`](Self::internal_energy) at fixed density.
    pub fn pressure_from_rho_e(&self, rho: T, e: T, t_hint: Option<T>) -> Result<T> {
        self.check_density(rho)?;
        match self {
            EosModel::Ideal(g) => Ok((g.gamma - T::one()) * rho * e),
            EosModel::StiffenedGas(s) => {
                Ok((s.gamma - T::one()) * rho * (e - s.q) - s.gamma * s.pi)
            }
            EosModel::Cubic(c) => {
                let t = c.temperature_from_energy(rho, e, t_hint)?;
                Ok(c.pressure_unchecked(rho, t))
            }
        }
    }

    pub fn state(&self, p: T, rho: T, t_hint: Option<T>) -> Result<ThermoState<T>> {
        let t = self.temperature_from_p_rho(p, rho, t_hint)?;
        let e = match self {
            EosModel::Cubic(c) => c.energy_unchecked(rho, t),
            _ => self.internal_energy(p, rho, None)?,
        };
        Ok(ThermoState { rho, p, t, e })
    }

    /// Partial derivatives `(de/dp at fixed rho, de/drho at fixed p)`.
    pub fn energy_derivatives(&self, p: T, rho: T, t_hint: Option<T>) -> Result<(T, T)> {
        match self {
            EosModel::Ideal(g) => {
                self.check_density(rho)?;
                let gm1 = g.gamma - T::one();
                Ok((T::one() / (gm1 * rho), -p / (gm1 * rho * rho)))
            }
            EosModel::StiffenedGas(s) => {
                self.check_density(rho)?;
                let gm1 = s.gamma - T::one();
                Ok((T::one() / (gm1 * rho), -(p + s.gamma * s.pi) / (gm1 * rho * rho)))
            }
            EosModel::Cubic(c) => {
                let t = c.temperature(p, rho, t_hint)?;
                let e_t = c.de_dt(rho, t);
                let p_t = c.dp_dt(rho, t);
                let e_p = e_t / p_t;
                let e_rho = c.de_drho(rho, t) - e_t * c.dp_drho(rho, t) / p_t;
                Ok((e_p, e_rho))
            }
        }
    }

    /// Thermodynamic sound speed, `c^2 = (p/rho^2 - de/drho)/(de/dp)`.
    ///
    /// Acoustic waves of the scaled system travel at `c/M`.
    pub fn sound_speed(&self, p: T, rho: T, t_hint: Option<T>) -> Result<T> {
        let c2 = match self {
            EosModel::Ideal(g) => {
                self.check_density(rho)?;
                g.gamma * p / rho
            }
            EosModel::StiffenedGas(s) => {
                self.check_density(rho)?;
                s.gamma * (p + s.pi) / rho
            }
            EosModel::Cubic(_) => {
                let (e_p, e_rho) = self.energy_derivatives(p, rho, t_hint)?;
                if !(e_p > T::zero()) {
                    return Err(nonphysical("de/dp is not positive"));
                }
                (p / (rho * rho) - e_rho) / e_p
            }
        };
        if !(c2 > T::zero()) {
            return Err(nonphysical(format!("squared sound speed {c2} is not positive")));
        }
        Ok(c2.sqrt())
    }

    pub fn enthalpy(&self, p: T, rho: T, t_hint: Option<T>) -> Result<T> {
        Ok(self.internal_energy(p, rho, t_hint)? + p / rho)
    }

    pub fn compressibility_factor(&self, p: T, rho: T, t_hint: Option<T>) -> Result<T> {
        let t = self.temperature_from_p_rho(p, rho, t_hint)?;
        Ok(p / (rho * self.gas_constant() * t))
    }

    /// `log T - 2 (R/cv) atanh(2 rho b - 1)`, constant along isentropes of a
    /// cubic gas with constant `a` and `cv`.
    pub fn isentropic_invariant_beta(&self, p: T, rho: T) -> Result<T> {
        let c = match self {
            EosModel::Cubic(c) if c.a.is_constant() && c.cv.is_constant() => c,
            _ => {
                return Err(Error::DomainError(
                    "beta needs a cubic model with constant a and cv".into(),
                ))
            }
        };
        let x = rho * c.b;
        if !(x > T::zero() && x < T::one()) {
            return Err(Error::DomainError(format!("rho b = {x} outside (0, 1)")));
        }
        let t = c.temperature(p, rho, None)?;
        let cv = c.cv.cv(t);
        Ok(t.ln() - T::two() * (c.rg / cv) * (T::two() * x - T::one()).atanh())
    }

    /// Local isentropic exponent `rho c^2 / p`, so that `p/rho^gamma_prho` is
    /// locally conserved on isentropes (equals `gamma` for an ideal gas).
    pub fn gamma_prho(&self, p: T, rho: T, t_hint: Option<T>) -> Result<T> {
        if !(p > T::zero()) {
            return Err(nonphysical(format!("pressure {p} is not positive")));
        }
        let c = self.sound_speed(p, rho, t_hint)?;
        Ok(c * c * rho / p)
    }

    /// Affine form `rho e = alpha p + beta` at fixed density with the
    /// temperature dependence of the coefficients frozen at `t_frozen`.
    pub fn energy_linearization(&self, rho: T, t_frozen: T) -> Result<(T, T)> {
        self.check_density(rho)?;
        Ok(match self {
            EosModel::Ideal(g) => (T::one() / (g.gamma - T::one()), T::zero()),
            EosModel::StiffenedGas(s) => {
                let gm1 = s.gamma - T::one();
                (T::one() / gm1, s.gamma * s.pi / gm1 + rho * s.q)
            }
            EosModel::Cubic(c) => {
                let (a, da, _) = c.a.eval(t_frozen);
                let alpha = c.cv.cv(t_frozen) / c.rg * (T::one() - rho * c.b);
                let beta = alpha * a * rho * rho / c.denom(rho)
                    + rho * (a - t_frozen * da) * c.u_over_b(rho);
                (alpha, beta)
            }
        })
    }

    /// Affine form `rho e = kappa T + mu` at fixed density with the
    /// temperature dependence of the coefficients frozen at `t_frozen`.
    pub fn temperature_linearization(&self, rho: T, t_frozen: T) -> Result<(T, T)> {
        self.check_density(rho)?;
        Ok(match self {
            EosModel::Ideal(g) => (rho * g.rg / (g.gamma - T::one()), T::zero()),
            EosModel::StiffenedGas(s) => (rho * s.cv, s.pi + rho * s.q),
            EosModel::Cubic(c) => {
                let (a, da, _) = c.a.eval(t_frozen);
                let ub = c.u_over_b(rho);
                (rho * (c.cv.cv(t_frozen) - da * ub), rho * a * ub)
            }
        })
    }

    /// Specific heat ratio of the ideal or stiffened model.
    pub fn gamma(&self) -> Option<T> {
        match self {
            EosModel::Ideal(g) => Some(g.gamma),
            EosModel::StiffenedGas(s) => Some(s.gamma),
            EosModel::Cubic(_) => None,
        }
    }

    pub fn cast<U: Real>(&self) -> EosModel<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        match *self {
            EosModel::Ideal(g) => EosModel::Ideal(IdealGasParams {
                gamma: c(g.gamma),
                rg: c(g.rg),
            }),
            EosModel::StiffenedGas(s) => EosModel::StiffenedGas(StiffenedGasParams {
                gamma: c(s.gamma),
                q: c(s.q),
                pi: c(s.pi),
                cv: c(s.cv),
            }),
            EosModel::Cubic(p) => EosModel::Cubic(CubicEosParams {
                kind: p.kind,
                a: match p.a {
                    Attraction::Constant(a) => Attraction::Constant(c(a)),
                    Attraction::Soave { coeff, tc, kappa } => Attraction::Soave {
                        coeff: c(coeff),
                        tc: c(tc),
                        kappa: c(kappa),
                    },
                },
                b: c(p.b),
                rg: c(p.rg),
                cv: match p.cv {
                    HeatCapacity::Constant(v) => HeatCapacity::Constant(c(v)),
                    HeatCapacity::Shomate { coeffs, mw, rg } => HeatCapacity::Shomate {
                        coeffs: coeffs.map(c),
                        mw: c(mw),
                        rg: c(rg),
                    },
                },
            }),
        }
    }
}

/// Nitrous oxide data: Shomate coefficients `A..E` (kJ/mol with `t = T/1000`).
pub const N2O_SHOMATE: [f64; 5] = [27.67988, 51.14898, -30.64544, 6.847911, -0.157906];
pub const N2O_RG: f64 = 188.91;
pub const N2O_MW: f64 = 44.0128;
pub const N2O_TC: f64 = 309.52;
pub const N2O_PC: f64 = 7.2450e6;
pub const N2O_OMEGA: f64 = 0.1613;

/// `kappa(omega) = 0.37464 + 1.54226 omega - 0.26992 omega^2`
pub fn soave_kappa(omega: f64) -> f64 {
    0.37464 + 1.54226 * omega - 0.26992 * omega * omega
}

/// Peng-Robinson parameters of N2O with its temperature dependent heat
/// capacity, in SI units (unit reference scalings).
pub fn n2o_coeffs<T: Real>() -> CubicEosParams<T> {
    let rg = N2O_RG;
    CubicEosParams {
        kind: CubicKind::PengRobinson,
        a: Attraction::Soave {
            coeff: T::lit(0.45724 * rg * rg * N2O_TC * N2O_TC / N2O_PC),
            tc: T::lit(N2O_TC),
            kappa: T::lit(soave_kappa(N2O_OMEGA)),
        },
        b: T::lit(0.0778 * rg * N2O_TC / N2O_PC),
        rg: T::lit(rg),
        cv: HeatCapacity::Shomate {
            coeffs: N2O_SHOMATE.map(T::lit),
            mw: T::lit(N2O_MW),
            rg: T::lit(rg),
        },
    }
}
