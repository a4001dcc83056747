//! Simulation and diagnostics for chains with complete connections on
//! one-sided shift spaces.
//!
//! The crate is organized around a single trait, [`gfunctions::GFunction`]:
//! a next-symbol kernel `g(sigma, x)` giving the probability of prepending
//! `sigma` to the context `x`. Everything else consumes that trait:
//!
//! - [`seqspace`] — symbols, alphabets with fixed enumeration order, and
//!   finitely described points of the shift space;
//! - [`numerics`] — certified values and the zeta-type sums the built-in
//!   kernels need;
//! - [`gfunctions`] — the kernel trait, a registry of built-in families, and
//!   variation estimators;
//! - [`chain`] — reproducible path simulation and conditional distributions;
//! - [`hellinger`] — likelihood-ratio and Hellinger-increment accounting
//!   along paths, with an absolute-continuity diagnostic;
//! - [`transfer`] — finite Markov truncations, stationary vectors, and
//!   uniqueness/escape probes;
//! - [`existence`] — dominating-envelope construction and checks;
//! - [`stats`] — small shared statistics helpers.

pub mod chain;
pub mod existence;
pub mod gfunctions;
pub mod hellinger;
pub mod numerics;
pub mod seqspace;
pub mod stats;
pub mod transfer;

pub use numerics::Certified;
pub use seqspace::{AgreeDepth, Alphabet, Context, CtxView, Symbol, Tail, Word};
