//! Solver suite for the (1+1)-dimensional Dirac oscillator with
//! position-dependent mass and an electrostatic potential.
//!
//! The crate reduces the proportional-coupling model to a scalar
//! Schrödinger problem, evaluates the closed-form spectra of the
//! shape-invariant families that appear, constructs zero modes, and
//! cross-checks all of it with lattice eigensolvers.

pub mod analytic;
pub mod error;
pub mod model;
pub mod numerics;
pub mod susy;
pub mod zeromodes;

pub use error::{Error, Result};
pub use model::{CoupledModel, GeneralProfiles, Grid, ProfileSpec, ScalarField, SpinorField};
pub use susy::{Sign, SpinConvention};
