//! Primal-dual and primal-only first-order methods for
//!
//! ```text
//! minimize g(x) [+ h(x)]  subject to  x ∈ argmin ½‖Ax − b‖²
//! ```
//!
//! with `g` prox-friendly, plus oracles, bound audits and a decentralized
//! consensus solver built on a graph Laplacian.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod distributed;
pub mod error;
pub mod instances;
pub mod io;
pub mod operators;
pub mod oracle;
pub mod problem;
pub mod prox;
pub mod solvers;
pub mod vector;

pub use error::{Error, Result};
pub use operators::{Csr, Laplacian, LinearMap, NormEstimate};
pub use problem::{ConstrainedProblem, SmoothTerm};
pub use prox::ProxFunction;
pub use solvers::{run, RunOptions, StepSizes, Trace, TraceRecord, Variant};
