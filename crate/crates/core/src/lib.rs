#![allow(clippy::neg_cmp_op_on_partial_ord)] // !(x > 0.0) also rejects NaN
//! Transmission/reflection subprocess decomposition for 1D scattering on
//! symmetric barriers, with group, dwell and Larmor-clock times.

pub mod error;
pub mod experiment;
mod fd;
mod interp;
pub mod larmor;
pub mod ode;
pub mod parallel;
pub mod potential;
pub mod quadrature;
pub mod special;
pub mod stationary;
pub mod timing;
pub mod units;
pub mod wavepacket;

pub use error::{Error, Result};
pub use potential::{validate_symmetry, Barrier, Segment, Shape};
pub use units::UnitSystem;
