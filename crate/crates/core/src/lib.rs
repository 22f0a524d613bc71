//! Direct and inverse spectral problems for the Dirac system
//!
//! ```text
//! B y' + Omega(x) y = lambda y,   0 < x < pi,
//! y1(0) = 0,   (lambda + h1) y1(pi) + h2 y2(pi) = 0,
//! ```
//!
//! with `B = [[0, 1], [-1, 0]]`, `Omega = [[p, q], [q, -p]]` and `h2 > 0`.
//!
//! The forward path computes eigenvalues and normalizing numbers by shooting.
//! The inverse path builds the Gelfand-Levitan-Marchenko kernel `F` from
//! truncated spectral data, solves the integral equation for `K(x, t)`, and
//! reads off `Omega` and `(h1, h2)`.

// `!(x > 0.0)` is used on purpose to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod direct;
pub mod error;
pub mod glm;
pub mod grid;
pub mod kernel;
pub mod linalg;
pub mod matrix2;
pub mod potential;
pub mod recovery;
pub mod spectral;
pub mod spectrum;
pub mod verify;

pub use direct::DiracProblem;
pub use error::{Error, Result};
pub use grid::{Grid, Quadrature};
pub use kernel::{KernelField, SquareKernel};
pub use matrix2::Matrix2;
pub use potential::{BoundaryParams, PotentialMatrix};
pub use spectral::{GridPair, SpectralData, SpectralDatum, VectorSolution};
