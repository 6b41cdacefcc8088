//! Numerical core for sensitivity-driven uncertainty mitigation.
//!
//! The crate covers the full chain used to decide which epistemic uncertainties
//! deserve a dedicated experiment, and how to run that experiment at reduced scale:
//!
//! * [`space`]: bounded parameter spaces, Latin hypercube / scrambled Sobol sampling,
//!   and Saltelli `A`/`B`/`AB_i`/`BA_i` designs.
//! * [`sobol`]: first-order, closed second-order and total Sobol indices.
//! * [`surrogate`]: quadratic response-surface fits used to re-rank sensitivities cheaply.
//! * [`atmosphere`], [`range`], [`aerostruct`], [`study`]: the deterministic vehicle
//!   stand-ins (ISA, lumped Breguet range, low-fidelity aeroelastic wing).
//! * [`similitude`]: similarity groups and scaling laws between full and sub-scale.
//! * [`sqp`], [`scaling`]: the bound-constrained SQP solver and the scaled-experiment
//!   design problem built on top of it.
//!
//! The crate is `no_std` and only needs `alloc`. Anything touching files, clocks or
//! threads lives in the `subscale` companion crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod aerostruct;
pub mod atmosphere;
mod error;
pub mod range;
pub mod scaling;
pub mod similitude;
pub mod sobol;
pub mod space;
pub mod sqp;
pub mod study;
pub mod surrogate;

pub use error::{Error, Result};

/// Standard gravitational acceleration, m/s².
pub const STANDARD_GRAVITY: f64 = 9.806_65;
