//! Numerics for g-measures whose kernel is discontinuous on a small set of
//! pasts.
//!
//! Words store symbols most-recent-last throughout: the word `"0001"` is the
//! cylinder fixing coordinates `-3..=0`, with `1` at coordinate 0.

pub mod alphabet;
pub mod error;
pub mod interval;
pub mod kernels;
pub mod pressure;
pub mod simulate;
pub mod stationary;
pub mod trees;

pub use alphabet::{Alphabet, Symbol, Word};
pub use error::{Error, Result};
pub use interval::ProbabilityInterval;
pub use kernels::{Kernel, KernelSpec};

/// Crate version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
