//! Classical and semiclassical models of hydrogenic Rydberg-atom ionisation by
//! microwave fields, static fields and half-cycle pulses.
//!
//! Everything is expressed in Hartree atomic units. The crate is organised
//! around the classical scale transformation: [`scaling`] maps physical
//! parameters onto the scaled field strength and relative frequency,
//! [`dynamics`] integrates regularised 1D trajectories, [`ensemble`] turns
//! trajectory ensembles into ionisation probabilities and thresholds, and
//! [`thresholds`] evaluates the closed-form threshold laws and the
//! photonic-basis Bessel model.

// `!(x > 0.0)` is used throughout on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod fields;
pub mod ode;
pub mod rng;
pub mod scaling;
pub mod thresholds;

pub use error::{Error, Result};
