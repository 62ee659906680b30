//! Runtime-error-guided specification synthesis for MiniC.
//!
//! The pipeline: parse and resolve a program ([`frontend`]), run the interval
//! analyzer to place guard assertions ([`absint`]), schedule them over the
//! call graph ([`callgraph`]), and let a generator propose contracts that the
//! weakest-precondition verifier checks ([`synthesis`], [`verifier`]).

pub mod frontend;
pub mod specs;
pub mod absint;
pub mod callgraph;
pub mod verifier;
pub mod synthesis;
pub mod pipeline;
pub mod report;
#[cfg(feature = "cli")]
pub mod cli;
