//! Structured codes for computation and multicast over multiple-access networks.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure function of
//! its inputs and a caller-supplied RNG; IO, configuration files and the
//! command-line harness live in the `structcodes-cli` crate.
//!
//! Module map:
//!
//! - [`gf`]: prime-field arithmetic and exact linear algebra.
//! - [`infotheory`]: entropies and the doubly-symmetric binary source.
//! - [`linear_coding`]: random linear codes, exhaustive ML decoders, Körner–Marton
//!   syndrome coding and computation over a discrete linear MAC.
//! - [`lattice`]: generator-matrix lattices, nearest-point quantization, mod-Λ,
//!   dithers and second moments.
//! - [`gaussian_compute`]: the dithered lattice refinement scheme for sums of
//!   Gaussian sources, linear functions with common randomness, and the
//!   sum-difference relay.
//! - [`rates`]: closed-form rate and distortion calculators.
//! - [`network`]: multiple-access networks, the equivalent point-to-point
//!   network, max-flow and algebraic network codes.
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod gaussian_compute;
pub mod gf;
pub mod infotheory;
pub mod lattice;
pub mod linear_coding;
mod math;
pub mod network;
pub mod rates;
pub mod seed;
pub mod stats;

pub use gf::{FieldMatrix, GfError, PrimeField};
pub use infotheory::{InfoError, Pmf};
pub use seed::{trial_rng, TrialRng};
