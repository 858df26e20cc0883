//! Online prediction with expert advice when the best expert switches,
//! often back to experts that were good earlier.
//!
//! The crate provides an exact worst-case linear-time relative-entropy
//! projection onto the simplex with non-uniform lower box constraints
//! ([`projection`]), the learners built on it and on weight sharing
//! ([`learners`]), mixing-scheme descriptors ([`schemes`]), closed-form
//! regret bounds ([`bounds`]) and a synthetic experiment harness
//! ([`harness`]). Batch work (seeds, sweeps) runs on rayon when the
//! `parallel` feature is enabled, and sequentially otherwise.

pub mod batch;
pub mod bounds;
pub mod error;
pub mod harness;
pub mod learners;
pub mod projection;
pub mod schemes;
pub mod select;
pub mod simplex;

pub use error::{Error, Result};
pub use projection::{project, project_oracle, verify_kkt_form, ProjectionResult};
pub use simplex::{
    binary_entropy, kl_divergence, normalize, InteriorSimplexVector, LowerBounds, SimplexVector,
};
