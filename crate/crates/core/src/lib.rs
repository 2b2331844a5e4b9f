//! Spin precession of channeled particles in bent crystals.
//!
//! The transverse motion in a bent planar channel with a sech^2 well has a
//! closed-form orbit. Along that orbit the BMT equation reduces to a single
//! rotation phase in the (rho, phi) plane, which [`spin::psi`] evaluates
//! directly. [`oracle`] integrates the same equations numerically for
//! cross-checks and [`ensemble`] averages over entry points and beam
//! divergence.

// `!(x > 0.0)` style checks are deliberate so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod ensemble;
pub mod error;
pub mod model;
pub mod oracle;
pub mod spin;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::{ChargeSign, CrystalChannel, EntryConditions, OrbitParams, ParticleSpec};
pub use spin::{InitialSpin, PhaseParams, SpinState};
pub use trajectory::Trajectory;
