//! Exact solution of the one-dimensional Riemann problem for an ideal gas
//! (Newton iteration on the pressure function).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveState {
    pub rho: f64,
    pub u: f64,
    pub p: f64,
}

/// Left and right states separated at `x_d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiemannState {
    pub left: PrimitiveState,
    pub right: PrimitiveState,
    pub x_d: f64,
}

impl RiemannState {
    pub fn sod() -> Self {
        RiemannState {
            left: PrimitiveState { rho: 1.0, u: 0.0, p: 1.0 },
            right: PrimitiveState { rho: 0.125, u: 0.0, p: 0.1 },
            x_d: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for s in [self.left, self.right] {
            if !(s.rho > 0.0 && s.p > 0.0) {
                return Err(Error::NonPhysicalState(format!(
                    "Riemann data needs positive density and pressure, got {s:?}"
                )));
            }
        }
        Ok(())
    }

    /// Initial data at position `x`.
    pub fn initial(&self, x: f64) -> PrimitiveState {
        if x < self.x_d {
            self.left
        } else {
            self.right
        }
    }
}

/// Star region and wave structure of the exact solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactRiemann {
    pub state: RiemannState,
    pub gamma: f64,
    pub p_star: f64,
    pub u_star: f64,
    pub rho_star_left: f64,
    pub rho_star_right: f64,
    /// Newton iterations used.
    pub iterations: usize,
}

/// `f_K(p)` and its derivative for one side.
fn pressure_function(p: f64, s: PrimitiveState, gamma: f64) -> (f64, f64) {
    let c = (gamma * s.p / s.rho).sqrt();
    if p > s.p {
        let a = 2.0 / ((gamma + 1.0) * s.rho);
        let b = (gamma - 1.0) / (gamma + 1.0) * s.p;
        let q = (a / (p + b)).sqrt();
        ((p - s.p) * q, q * (1.0 - 0.5 * (p - s.p) / (p + b)))
    } else {
        let e = (gamma - 1.0) / (2.0 * gamma);
        let r = (p / s.p).powf(e);
        (
            2.0 * c / (gamma - 1.0) * (r - 1.0),
            (p / s.p).powf(-(gamma + 1.0) / (2.0 * gamma)) / (s.rho * c),
        )
    }
}

/// Total pressure function `f_L(p) + f_R(p) + u_R - u_L`.
pub fn star_residual(st: &RiemannState, gamma: f64, p: f64) -> f64 {
    pressure_function(p, st.left, gamma).0 + pressure_function(p, st.right, gamma).0 + st.right.u
        - st.left.u
}

impl ExactRiemann {
    pub fn solve(state: RiemannState, gamma: f64) -> Result<Self> {
        state.validate()?;
        let (l, r) = (state.left, state.right);
        let cl = (gamma * l.p / l.rho).sqrt();
        let cr = (gamma * r.p / r.rho).sqrt();
        if 2.0 / (gamma - 1.0) * (cl + cr) <= r.u - l.u {
            return Err(Error::VacuumFormation);
        }
        // two-rarefaction initial guess
        let e = (gamma - 1.0) / (2.0 * gamma);
        let mut p = ((cl + cr - 0.5 * (gamma - 1.0) * (r.u - l.u))
            / (cl / l.p.powf(e) + cr / r.p.powf(e)))
        .powf(1.0 / e)
        .max(1e-12);
        let mut iterations = 0;
        loop {
            iterations += 1;
            let (fl, dl) = pressure_function(p, l, gamma);
            let (fr, dr) = pressure_function(p, r, gamma);
            let f = fl + fr + r.u - l.u;
            let mut p_new = p - f / (dl + dr);
            if p_new <= 0.0 {
                p_new = 0.5 * p;
            }
            let change = 2.0 * (p_new - p).abs() / (p_new + p);
            p = p_new;
            if change < 1e-15 || star_residual(&state, gamma, p).abs() < 1e-14 {
                break;
            }
            if iterations >= 100 {
                return Err(Error::NoConvergence {
                    what: "exact Riemann pressure".into(),
                    iterations,
                    residual: f.abs(),
                });
            }
        }
        let (fl, _) = pressure_function(p, l, gamma);
        let (fr, _) = pressure_function(p, r, gamma);
        let u = 0.5 * (l.u + r.u) + 0.5 * (fr - fl);
        let g1 = (gamma - 1.0) / (gamma + 1.0);
        let star_rho = |s: PrimitiveState| {
            if p > s.p {
                s.rho * (p / s.p + g1) / (g1 * p / s.p + 1.0)
            } else {
                s.rho * (p / s.p).powf(1.0 / gamma)
            }
        };
        Ok(ExactRiemann {
            state,
            gamma,
            p_star: p,
            u_star: u,
            rho_star_left: star_rho(l),
            rho_star_right: star_rho(r),
            iterations,
        })
    }

    /// Solution at similarity coordinate `xi = (x - x_d) / t`.
    pub fn sample(&self, xi: f64) -> PrimitiveState {
        let g = self.gamma;
        let (l, r) = (self.state.left, self.state.right);
        let (ps, us) = (self.p_star, self.u_star);
        if xi <= us {
            let c = (g * l.p / l.rho).sqrt();
            if ps > l.p {
                let s = l.u - c * ((g + 1.0) / (2.0 * g) * ps / l.p + (g - 1.0) / (2.0 * g)).sqrt();
                if xi <= s {
                    l
                } else {
                    PrimitiveState { rho: self.rho_star_left, u: us, p: ps }
                }
            } else {
                let head = l.u - c;
                let cs = c * (ps / l.p).powf((g - 1.0) / (2.0 * g));
                let tail = us - cs;
                if xi <= head {
                    l
                } else if xi >= tail {
                    PrimitiveState { rho: self.rho_star_left, u: us, p: ps }
                } else {
                    let f = 2.0 / (g + 1.0) + (g - 1.0) / ((g + 1.0) * c) * (l.u - xi);
                    PrimitiveState {
                        rho: l.rho * f.powf(2.0 / (g - 1.0)),
                        u: 2.0 / (g + 1.0) * (c + 0.5 * (g - 1.0) * l.u + xi),
                        p: l.p * f.powf(2.0 * g / (g - 1.0)),
                    }
                }
            }
        } else {
            let c = (g * r.p / r.rho).sqrt();
            if ps > r.p {
                let s = r.u + c * ((g + 1.0) / (2.0 * g) * ps / r.p + (g - 1.0) / (2.0 * g)).sqrt();
                if xi >= s {
                    r
                } else {
                    PrimitiveState { rho: self.rho_star_right, u: us, p: ps }
                }
            } else {
                let head = r.u + c;
                let cs = c * (ps / r.p).powf((g - 1.0) / (2.0 * g));
                let tail = us + cs;
                if xi >= head {
                    r
                } else if xi <= tail {
                    PrimitiveState { rho: self.rho_star_right, u: us, p: ps }
                } else {
                    let f = 2.0 / (g + 1.0) - (g - 1.0) / ((g + 1.0) * c) * (r.u - xi);
                    PrimitiveState {
                        rho: r.rho * f.powf(2.0 / (g - 1.0)),
                        u: 2.0 / (g + 1.0) * (-c + 0.5 * (g - 1.0) * r.u + xi),
                        p: r.p * f.powf(2.0 * g / (g - 1.0)),
                    }
                }
            }
        }
    }

    /// Solution at position `x` and time `t > 0` (initial data at `t = 0`).
    pub fn at(&self, x: f64, t: f64) -> PrimitiveState {
        if t <= 0.0 {
            return self.state.initial(x);
        }
        self.sample((x - self.state.x_d) / t)
    }

    /// Speed of the right-moving shock, if the right wave is a shock.
    pub fn right_shock_speed(&self) -> Option<f64> {
        let (g, r) = (self.gamma, self.state.right);
        (self.p_star > r.p).then(|| {
            let c = (g * r.p / r.rho).sqrt();
            r.u + c * ((g + 1.0) / (2.0 * g) * self.p_star / r.p + (g - 1.0) / (2.0 * g)).sqrt()
        })
    }

    /// Profiles on `n` uniformly spaced points of `[x0, x1]` at time `t`.
    pub fn profile(&self, x0: f64, x1: f64, n: usize, t: f64) -> Vec<(f64, PrimitiveState)> {
        (0..n)
            .map(|i| {
                let x = if n > 1 { x0 + (x1 - x0) * i as f64 / (n - 1) as f64 } else { x0 };
                (x, self.at(x, t))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sod_star_state() {
        let s = ExactRiemann::solve(RiemannState::sod(), 1.4).unwrap();
        assert!((s.p_star - 0.30313).abs() < 1e-5);
        assert!((s.u_star - 0.92745).abs() < 1e-5);
        assert!(star_residual(&s.state, 1.4, s.p_star).abs() < 1e-12);
    }

    #[test]
    fn vacuum_is_reported() {
        let st = RiemannState {
            left: PrimitiveState { rho: 1.0, u: -20.0, p: 1.0 },
            right: PrimitiveState { rho: 1.0, u: 20.0, p: 1.0 },
            x_d: 0.0,
        };
        assert!(matches!(ExactRiemann::solve(st, 1.4), Err(Error::VacuumFormation)));
    }
}
