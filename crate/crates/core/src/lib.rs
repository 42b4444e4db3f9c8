//! Certified upper bounds for cancellative pairs of set families.
//!
//! A pair `(A, B)` of subset families of an `n`-element ground set is
//! cancellative when unions with any fixed member of the other family
//! never collide. This crate certifies `|A| |B| <= 2.2682^n` by running an
//! inductive bound over uniform pairs and writing the whole computation
//! out as a re-checkable certificate.
//!
//! The pieces:
//!
//! - [`entropy`]: the scalar kernels (`h`, `f`, `g`, `kappa`, `L`).
//! - [`phi`]: certified upper bounds for the constrained optimization
//!   value `phi(gamma, x)`, with an independent grid oracle for testing.
//! - [`pipeline`]: the iteration producing per-interval growth bounds
//!   `rho_i` over a ratio grid, the certificate text format, and its
//!   independent verifier.
//! - [`families`]: concrete pairs over small ground sets — checkers,
//!   constructions, products, the entropy inequality, exhaustive search.
//! - [`curves`]: upper/lower bound curves for uniform pairs as `n/k`
//!   varies, plus the exact symmetric-case bound.
//!
//! All float-valued computation is generic over [`Real`] (`f32` or `f64`);
//! the `*64` aliases below pin the `f64` instantiation used by the CLI and
//! the certification run.

// negated float comparisons are used on purpose: `!(a >= b)` rejects NaN,
// which is the fail-closed behavior every check here wants
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curves;
pub mod entropy;
pub mod families;
pub mod phi;
pub mod pipeline;
mod real;

pub use real::Real;

/// Scalar used by the command-line tool and the shipped certificates.
pub type Scalar = f64;

pub type ProbPair64 = entropy::ProbPair<Scalar>;
pub type PhiQuery64 = phi::PhiQuery<Scalar>;
pub type PhiBound64 = phi::PhiBound<Scalar>;
pub type Schedule64 = pipeline::Schedule<Scalar>;
pub type RhoStep64 = pipeline::RhoStep<Scalar>;
pub type BoundCertificate64 = pipeline::BoundCertificate<Scalar>;
pub type CurvePoint64 = curves::CurvePoint<Scalar>;
