//! Normalization of framed Morse functions on surfaces.
//!
//! Saddle values of a framed Morse function are projected onto a scaled
//! permutohedron and pulled back through a smooth reparametrization of the
//! value interval. The [`surface`] module produces the inputs (saddle values,
//! saddle distances, separatrices) for concrete scenes on the flat torus, and
//! [`cli`] wraps the pipeline for the command line.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod permutohedron;
pub mod projection;
pub mod reparam;
pub mod surface;

pub use error::{Error, Result};
pub use permutohedron::OrderedPartition;
pub use projection::{brute_force_project, kkt_verify, project, ProjectionResult};
pub use reparam::{build_diffeo, epsilon, normalize_saddle_values, IntervalDiffeo};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/permutohedron.md")]
    mod permutohedron {}
    #[doc = include_str!("../../../book/src/projection.md")]
    mod projection {}
    #[doc = include_str!("../../../book/src/reparametrization.md")]
    mod reparametrization {}
    #[doc = include_str!("../../../book/src/surfaces.md")]
    mod surfaces {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
