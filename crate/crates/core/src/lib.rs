//! Speed limits for subspace dynamics in finite-dimensional quantum systems.
//!
//! Given a Hermitian `H` and a subspace of its domain, this crate evolves
//! the subspace under `exp(-i H t)`, measures how far it has rotated using
//! the maximal-angle metric, and evaluates the chain of lower bounds on the
//! time needed to reach a given angle: the off-diagonal speed bound, the
//! subspace energy-dispersion bound, and the spectral-halfwidth optimum. At
//! rank 1 these reduce to the classic orthogonalization bounds for pure
//! states.
//!
//! The modules mirror that pipeline:
//!
//! * [`operators`]: validated Hermitian operators, frames, projectors,
//!   states, spectral decompositions, propagators, seeded random instances;
//! * [`geometry`]: distances and angles between subspaces;
//! * [`dynamics`]: evolution, angle trajectories, first-crossing times;
//! * [`bounds`]: the speed-limit quantities and time bounds;
//! * [`rng`]: the pinned random number generator behind every seeded
//!   operation.
//!
//! The `book/` directory in the repository walks through the concepts with
//! runnable examples; every code block there compiles and runs as a doc
//! test of this crate.

pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod operators;
pub mod rng;

pub use error::{QslError, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
/// Dynamically sized complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dynamically sized complex column vector.
pub type CVector = nalgebra::DVector<C64>;

// Every fenced code block in the book must keep compiling and running; each
// chapter is attached here as a doc test of an empty module, one module per
// chapter so a failure names its chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
}
