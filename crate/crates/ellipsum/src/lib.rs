//! Numerical experiments on lattice points of ellipsoids with diophantine
//! centers: exact shell sums, deviation statistics, smooth averaging, and
//! Jacobi theta-sum identities, behind a reproducible CLI.

pub mod averaging;
pub mod cache;
pub mod config;
pub mod counting;
pub mod dd;
pub mod diophantine;
pub mod error;
pub mod expsums;
pub mod lattice;
pub mod numeric;
pub mod quadform;
pub mod run;
pub mod theta;

pub use error::{Error, Result};
