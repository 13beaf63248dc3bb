//! Critical behaviour of a driven-dissipative Dicke model whose atoms couple
//! to a sub-ohmic bath.
//!
//! The crate evaluates the Keldysh Green's functions of the coupled
//! cavity-atom system, extracts observables and critical exponents from
//! them, and simulates the fractional Langevin equation of the critical mode.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod cli;
pub mod error;
pub mod exponents;
pub mod greens;
pub mod langevin;
pub mod observables;
pub mod quad;

pub use error::{Error, Result};
