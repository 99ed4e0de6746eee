//! Benchmark problems and reference oracles.

pub mod cases;
pub mod reference;
pub mod riemann;
pub mod vortex;
