//! Quasiprobability extents for circuit cutting.
//!
//! This crate is `no_std` (it needs `alloc`) and contains all of the numerics:
//!
//! - [`qmat`]: dense complex matrices on multipartite Hilbert spaces, with
//!   partial traces, partial transposes, Hermitian eigensolver and Schmidt
//!   decompositions.
//! - [`channel`]: superoperators in Choi form, instruments, quasiprobability
//!   decompositions (QPDs) and the constructive QPD transformations.
//! - [`sdp`]: a primal-dual interior-point solver for block semidefinite
//!   programs (LPs are the special case with only nonnegative blocks).
//! - [`extent`]: analytic extents, PPT lower bounds via SDP and explicit QPD
//!   synthesis via LP over a finite dictionary of local operations.
//! - [`qpsim`]: a small density-matrix simulator and the Monte Carlo
//!   quasiprobability estimator.
//!
//! Subsystems of a tensor product are indexed row-major with subsystem 0 the
//! most significant digit. Choi operators are trace-one normalized and ordered
//! `(A, A', B, B')` for bipartite maps `AB -> A'B'`.
//!
//! File formats and the command line live in the `qpdx` crate.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::needless_range_loop)] // index loops mirror the linear algebra

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod channel;
mod error;
pub mod extent;
pub mod gates;
pub mod qmat;
pub mod qpsim;
pub mod sdp;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
