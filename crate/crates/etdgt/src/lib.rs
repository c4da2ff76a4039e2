//! Event-triggered dual gradient tracking (ET-DGT) for distributed
//! resource allocation over unbalanced directed graphs.
//!
//! Agents minimize the sum of local costs subject to a shared
//! supply-demand balance. The dual is solved by push-pull gradient
//! tracking over a row-stochastic / column-stochastic matrix pair, and
//! agents broadcast their dual estimate and gradient tracker only when
//! the deviation from the last broadcast crosses a geometric threshold.
//!
//! The crate ships:
//! - a synchronous-round simulator for ET-DGT and its periodic baseline
//!   ([`engine`]),
//! - mixing-matrix construction and spectral diagnostics ([`network`]),
//! - cost models and the conjugate argmin subproblem ([`objective`]),
//! - the triggering laws and broadcast caches ([`trigger`]),
//! - explicit step-size bounds with a linear-rate certificate
//!   ([`stepsize`]),
//! - a centralized bisection oracle for ground truth ([`oracle`]),
//! - scenario files, a seeded large-scenario generator, and the CLI
//!   driver ([`scenario`], [`cli`]).

// Validation uses `!(x > 0.0)` so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod engine;
pub mod error;
pub(crate) mod linalg;
pub mod network;
pub mod objective;
pub mod oracle;
pub mod scenario;
pub mod stepsize;
pub mod trigger;

pub use error::{Error, Result};
