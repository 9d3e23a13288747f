//! Pointwise maximal leakage: exact computation of per-outcome leakage,
//! (ε, δ) guarantees, channel operations and comparisons with other privacy
//! measures, over rational or float arithmetic.

pub mod adversary;
pub mod channel_ops;
pub mod comparisons;
pub mod error;
pub mod fixtures;
pub mod guarantees;
pub mod io;
pub mod leakage;
pub mod model;
pub mod oracles;
pub mod scalar;

pub use error::{Error, Result};
pub use model::{Channel, Event, Joint, Prior};
pub use scalar::{Mode, Rational, Scalar};
