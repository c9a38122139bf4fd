//! Work extraction bounds for multipartite pure states.
//!
//! Builds statevectors, samples state ensembles, computes global and local
//! extractable work, estimates geometric entanglement, and executes adaptive
//! LOCC protocols to obtain lower bounds on the LOCC-extractable work.

pub mod ensembles;
pub mod error;
pub mod graphs;
pub mod lab;
pub mod locc;
pub mod qstate;
pub mod workbounds;

pub use error::{Error, Result};
