//! Combinatorial capability model of economic development.
//!
//! Products are sets of capabilities. An economy holding `n` capabilities can
//! produce `C(n, s)` combinations of length `s`, each viable with probability
//! `rho^s`, and keeps only lengths within a product range `r` of the longest.
//! The crate evaluates product variety and average product length in exact
//! rational and log-domain arithmetic, detects the hump where variety starts
//! to fall, classifies development stages, simulates recipe books, and
//! cross-checks everything against brute-force enumeration.

pub mod cli;
pub mod error;
pub mod io;
pub mod model;
pub mod oracle;
pub mod params;
pub mod scalar;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::{classify_stage, cross_validate, CrossValidation, Model, StageLabel};
pub use params::{Backend, ModelParams, Range, Rho};
pub use scalar::{LogReal, Scalar, SignedLog, SignedScalar};
