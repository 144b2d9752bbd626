//! Reactive settling in a sequencing batch reactor.
//!
//! Settling stages are simulated with a conservative, monotone finite-volume
//! scheme on a fixed grid under a moving mixture surface; fully mixed stages
//! with an ODE model. Outlet concentrations, sampled fields and a per-component
//! mass ledger are produced for every run.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod constitutive;
pub mod effluent;
pub mod error;
pub mod geometry;
pub mod io;
pub mod mixed;
pub mod orchestrator;
pub mod reactions;
pub mod settler;

pub use error::{Error, Result};
