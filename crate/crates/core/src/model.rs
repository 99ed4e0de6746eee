//! Shared problem description: primitive DG state, non-dimensional numbers
//! and boundary conditions.

use serde::{Deserialize, Serialize};

use crate::dg::Discretization;
use crate::eos::EosModel;
use crate::error::{Error, Result};
use crate::real::Real;

/// Primitive variables stored as DG coefficients on the current mesh:
/// density and pressure are scalar fields, velocity is a vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowState<T> {
    pub rho: Vec<T>,
    pub u: Vec<T>,
    pub p: Vec<T>,
}

impl<T: Real> FlowState<T> {
    /// Nodal interpolation of pointwise data `f(x) = (rho, u, p)`.
    pub fn interpolate<F: Fn([T; 2]) -> (T, [T; 2], T) + Sync>(disc: &Discretization<T>, f: F) -> Self {
        let rho = disc.interpolate(|x| f(x).0);
        let p = disc.interpolate(|x| f(x).2);
        let ux = disc.interpolate(|x| f(x).1[0]);
        let uy = disc.interpolate(|x| f(x).1[1]);
        FlowState {
            rho,
            u: interleave(disc, &ux, &uy),
            p,
        }
    }

    /// Cellwise L2 projection of pointwise data.
    pub fn project<F: Fn([T; 2]) -> (T, [T; 2], T) + Sync>(disc: &Discretization<T>, f: F) -> Self {
        let rho = disc.project(|x| f(x).0);
        let p = disc.project(|x| f(x).2);
        let ux = disc.project(|x| f(x).1[0]);
        let uy = disc.project(|x| f(x).1[1]);
        FlowState {
            rho,
            u: interleave(disc, &ux, &uy),
            p,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.rho
            .iter()
            .chain(&self.u)
            .chain(&self.p)
            .all(|v| v.is_finite())
    }

    /// Velocity component `comp` as a scalar field.
    pub fn velocity_component(&self, disc: &Discretization<T>, comp: usize) -> Vec<T> {
        split_component(disc, &self.u, comp)
    }
}

/// Builds a vector field from two scalar fields.
pub fn interleave<T: Real>(disc: &Discretization<T>, ux: &[T], uy: &[T]) -> Vec<T> {
    let n = disc.nloc();
    let mut u = Vec::with_capacity(2 * ux.len());
    for c in 0..disc.n_cells() {
        u.extend_from_slice(&ux[c * n..(c + 1) * n]);
        u.extend_from_slice(&uy[c * n..(c + 1) * n]);
    }
    u
}

pub fn split_component<T: Real>(disc: &Discretization<T>, u: &[T], comp: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(u.len() / 2);
    for c in 0..disc.n_cells() {
        out.extend_from_slice(disc.vblock(u, c, comp));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition<T> {
    Periodic,
    /// Impermeable wall; `velocity` is the tangential wall velocity imposed by
    /// the viscous terms, `temperature` an optional isothermal condition
    /// (adiabatic otherwise).
    Wall {
        velocity: [T; 2],
        temperature: Option<T>,
    },
}

impl<T: Real> BoundaryCondition<T> {
    pub fn wall() -> Self {
        BoundaryCondition::Wall {
            velocity: [T::zero(); 2],
            temperature: None,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, BoundaryCondition::Periodic)
    }
}

/// Non-dimensional numbers and closure of the problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Physics<T> {
    pub eos: EosModel<T>,
    pub mach: T,
    /// `None` disables gravity.
    pub froude: Option<T>,
    /// `None` means inviscid.
    pub reynolds: Option<T>,
    pub prandtl: T,
    /// Conditions on the sides x min, x max, y min, y max.
    pub boundaries: [BoundaryCondition<T>; 4],
}

impl<T: Real> Physics<T> {
    pub fn inviscid(eos: EosModel<T>, mach: T, boundaries: [BoundaryCondition<T>; 4]) -> Self {
        Physics {
            eos,
            mach,
            froude: None,
            reynolds: None,
            prandtl: T::one(),
            boundaries,
        }
    }

    pub fn periodic_flags(&self) -> [bool; 2] {
        [
            self.boundaries[0].is_periodic(),
            self.boundaries[2].is_periodic(),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for axis in 0..2 {
            if self.boundaries[2 * axis].is_periodic() != self.boundaries[2 * axis + 1].is_periodic() {
                return Err(Error::Config(format!(
                    "periodicity must match on both sides of axis {axis}"
                )));
            }
        }
        if !(self.mach > T::zero()) {
            return Err(Error::Config("Mach number must be positive".into()));
        }
        if let Some(fr) = self.froude {
            if !(fr > T::zero()) {
                return Err(Error::Config("Froude number must be positive".into()));
            }
        }
        if let Some(re) = self.reynolds {
            if !(re > T::zero()) || !(self.prandtl > T::zero()) {
                return Err(Error::Config("Reynolds and Prandtl numbers must be positive".into()));
            }
        }
        Ok(())
    }

    /// `1/Fr^2` (zero without gravity).
    pub fn inv_froude2(&self) -> T {
        self.froude.map(|f| T::one() / (f * f)).unwrap_or(T::zero())
    }
}
