//! IMEX discontinuous Galerkin solver for the compressible Navier-Stokes
//! equations with general (ideal, cubic, stiffened-gas) equations of state.

pub mod adapt;
pub mod bench;
pub mod config;
pub mod dense;
pub mod dg;
pub mod driver;
pub mod eos;
pub mod hyperbolic;
pub mod error;
pub mod imex;
pub mod model;
pub mod viscous;
pub mod linsolve;
pub mod mesh;
pub mod real;

pub use error::{Error, Result};
pub use real::Real;

pub type Mesh = mesh::AdaptiveMesh<f64>;
pub type Disc = dg::Discretization<f64>;
pub type State = model::FlowState<f64>;
pub type Eos = eos::EosModel<f64>;
pub type Phys = model::Physics<f64>;
