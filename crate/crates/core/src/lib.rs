//! Numerical core for linear dilated temporal convolutional networks:
//! effective filters, tensorized spectra, complexity measures, and
//! constructive approximation-rate checks.
//!
//! The crate is organized around one chain of ideas:
//!
//! - [`seq`]: finitely supported sequences, causal dilated convolution, and
//!   functionals represented by kernels, with the worst-case and
//!   mean-square error norms.
//! - [`network`]: the linear dilated architecture, its forward pass, the
//!   equivalent single long filter, and the realization of rank-one tensor
//!   terms as network weights.
//! - [`tensor`] / [`hosvd`]: the bijection between length-l^K filters and
//!   K-way tensors, and the orthogonal decomposition whose sorted core
//!   entries form the spectrum.
//! - [`complexity`]: spectral and memory tail measures against decay
//!   envelopes.
//! - [`bounds`]: the constructive forward sweep (best M-term network plus
//!   rate bound) and the inverse estimation recovering complexity constants
//!   from achieved errors.
//! - [`targets`]: synthetic kernels with known structure for tests and
//!   verification runs.
//!
//! Everything is deterministic: explicit seeds, fixed accumulation orders,
//! and no global state. All types are immutable after construction and all
//! operations are pure, so concurrent use needs no synchronization.

pub mod bounds;
pub mod complexity;
pub mod error;
pub mod fmt;
pub mod hosvd;
pub mod network;
pub mod rng;
pub mod seq;
pub mod targets;
pub mod tensor;

pub use error::{Error, Result};
