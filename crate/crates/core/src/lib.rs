//! Estimation of observable expectation values on symmetric states via
//! symmetrized (twirled) observables.
//!
//! The crate is organized around the pipeline: build a finite unitary
//! representation ([`groups`]), twirl an observable into its commutant
//! ([`twirl`]), decompose the commutant into blocks and parameterize
//! symmetric states ([`commutant`]), evaluate the quantum Fisher
//! information and the Cramer-Rao bound ([`metrology`]), simulate the
//! projective measurement ([`sampler`]), and drive the two worked
//! applications plus reporting ([`apps`]).

pub mod apps;
pub mod commutant;
pub mod consts;
pub mod error;
pub mod groups;
pub mod linalg;
pub mod metrology;
pub mod rng;
pub mod sampler;
pub mod twirl;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix, EigenDecomposition, HermitianOperator};
