//! Spectral solvers for stiff PDEs on the unit sphere.
//!
//! Functions on the sphere are "doubled up" into bi-periodic functions on
//! `[-π, π]²` and represented by 2D Fourier coefficients. The Laplacian is
//! discretized in coefficient space with nonsingular multiplication matrices
//! for `sin²θ` and `cosθ sinθ`, which makes every block of the discrete
//! operator pentadiagonal (plus two corner entries) after premultiplication
//! by `T_sin²`, so shifted linear systems are solved in linear time.
//!
//! Four fourth-order time-steppers are provided on top of this: ETDRK4 with
//! Carathéodory–Fejér rational approximations (`etdrk4-cf`), ETDRK4 with
//! per-block eigendecompositions (`etdrk4-eig`), IMEX-BDF4 and LIRK4.

pub mod dfs;
pub mod error;
pub mod fourier;
pub mod laplacian;
pub mod linsolve;
pub mod mult;
pub mod phi;
pub mod problems;
pub mod sparse;
pub mod stepping;

mod dense;

pub use error::{Error, Result};
pub use fourier::{CoeffGrid, GridSpec, Transform, ValueGrid};
pub use laplacian::BlockPencil;
pub use linsolve::BlockLu;
pub use stepping::{Scheme, SchemeConfig};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Columns handed to one rayon task, so small grids are not dominated by
/// scheduling overhead.
pub(crate) fn columns_per_task(m: usize) -> usize {
    (8192 / m.max(1)).max(1)
}
