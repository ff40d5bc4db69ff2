//! Martingale optimal transport and Wasserstein computations for finitely
//! supported measures.
//!
//! The crate computes minimal and maximal martingale transport costs,
//! Wasserstein distances of every order (including the bottleneck distance),
//! convex-order checks and central moments, and assembles them into the
//! ratios of the martingale Wasserstein inequality. Explicit counterexample
//! families and the pointwise inequality constants used for the bounded
//! regime live in [`counterexamples`] and [`lemma`].

pub mod counterexamples;
pub mod enclosing;
pub mod error;
pub mod format;
pub mod inequality;
pub mod lemma;
pub mod lp;
pub mod martingale;
pub mod measures;
pub mod minimize;
pub mod sampling;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};
pub use measures::{central_moment, embed_1d, DiscreteMeasure, ExtendedIndex, Norm};
