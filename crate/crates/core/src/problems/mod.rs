//! Built-in PDEs, the Poisson solver, and error metrics.

pub mod convergence;
pub mod harmonics;
pub mod poisson;

use std::fmt;
use std::sync::Arc;

pub use convergence::{convergence_study, fit_slope, ConvergenceRow, ConvergenceTable, Reference};
pub use harmonics::{harmonic_function, spherical_harmonic};
pub use poisson::{solve_poisson, PoissonSolver};

use crate::dfs::{sphere_l2_norm, SphereFunction};
use crate::error::{Error, Result};
use crate::fourier::{CoeffGrid, Transform};
use crate::stepping::Counters;
use crate::C64;

pub type PointwiseFn = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Diffusive,
    Dispersive,
}

/// `u_t = αΔu + g(u)` with an initial condition.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub alpha: C64,
    /// `None` when the equation is linear.
    pub nonlinearity: Option<PointwiseFn>,
    pub initial: SphereFunction,
    /// If set, the exact solution is `e^{rate·t} u_0`.
    pub exact_rate: Option<C64>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("linear", &self.nonlinearity.is_none())
            .field("exact_rate", &self.exact_rate)
            .finish()
    }
}

impl ProblemSpec {
    pub fn classification(&self) -> Classification {
        if self.alpha.im != 0.0 {
            Classification::Dispersive
        } else {
            Classification::Diffusive
        }
    }

    pub fn g(&self, u: C64) -> C64 {
        self.nonlinearity
            .as_ref()
            .map_or(C64::new(0.0, 0.0), |g| g(u))
    }
}

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 4] = ["allen-cahn", "nls", "ginzburg-landau", "heat"];

/// A built-in problem. `l` selects the harmonic for `heat` (default 4).
pub fn builtin(name: &str, l: Option<usize>) -> Result<ProblemSpec> {
    match name {
        "allen-cahn" => Ok(allen_cahn()),
        "nls" => Ok(nls()),
        "ginzburg-landau" => Ok(ginzburg_landau()),
        "heat" => Ok(heat(l.unwrap_or(4))),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `u_t = 10⁻²Δu + u - u³`.
pub fn allen_cahn() -> ProblemSpec {
    ProblemSpec {
        name: "allen-cahn".into(),
        alpha: re(1e-2),
        nonlinearity: Some(Arc::new(|u| u - u * u * u)),
        initial: SphereFunction::from_cartesian(|x, y, z| {
            re(((5.0 * x * z).cosh() - 10.0 * y).cos())
        }),
        exact_rate: None,
    }
}

/// `u_t = iΔu + i|u|²u`, breather plus `Y_3^3`.
pub fn nls() -> ProblemSpec {
    let (a, b) = (1.0f64, 1.0f64);
    ProblemSpec {
        name: "nls".into(),
        alpha: C64::new(0.0, 1.0),
        nonlinearity: Some(Arc::new(|u| C64::new(0.0, 1.0) * u.norm_sqr() * u)),
        initial: SphereFunction::from_fn(move |lambda, theta| {
            let breather = 2.0 * b * b
                / (2.0 - 2f64.sqrt() * (2.0 - b * b).sqrt() * (a * b * theta).cos())
                - 1.0;
            a * breather + harmonics::harmonic_value(3, 3, lambda, theta)
        }),
        exact_rate: None,
    }
}

/// `u_t = 10⁻⁴Δu + u - (1 + 1.5i)u|u|²` from a rotated lattice of cosines.
pub fn ginzburg_landau() -> ProblemSpec {
    let (s, c) = (std::f64::consts::PI / 8.0).sin_cos();
    ProblemSpec {
        name: "ginzburg-landau".into(),
        alpha: re(1e-4),
        nonlinearity: Some(Arc::new(|u| u - C64::new(1.0, 1.5) * u * u.norm_sqr())),
        initial: SphereFunction::from_cartesian(move |x, y, z| {
            let (xr, yr, zr) = (c * x - s * z, y, s * x + c * z);
            re(((40.0 * xr).cos() + (40.0 * yr).cos() + (40.0 * zr).cos()) / 3.0)
        }),
        exact_rate: None,
    }
}

/// `u_t = Δu/(l(l+1))` from `Y_l^l`; the exact solution is `e^{-t}Y_l^l`.
pub fn heat(l: usize) -> ProblemSpec {
    heat_with(l, l as i64, re(1.0))
}

/// `u_t = (c/(l(l+1)))Δu` from `Y_l^order`, exact solution `e^{-ct}Y_l^order`.
/// An imaginary `c` gives a dispersive analogue.
pub fn heat_with(l: usize, order: i64, c: C64) -> ProblemSpec {
    let ll = (l * (l + 1)).max(1) as f64;
    ProblemSpec {
        name: format!("heat-l{l}"),
        alpha: c / ll,
        nonlinearity: None,
        initial: harmonic_function(l, order),
        exact_rate: Some(if l == 0 { re(0.0) } else { -c }),
    }
}

/// `N(u)`: transform to values, apply `g` pointwise, transform back.
#[derive(Clone)]
pub struct GridNonlinearity {
    transform: Transform,
    g: Option<PointwiseFn>,
    counters: Arc<Counters>,
}

impl GridNonlinearity {
    pub fn new(problem: &ProblemSpec, transform: Transform, counters: Arc<Counters>) -> Self {
        Self {
            transform,
            g: problem.nonlinearity.clone(),
            counters,
        }
    }

    pub fn eval(&self, c: &CoeffGrid) -> CoeffGrid {
        let Some(g) = &self.g else {
            return CoeffGrid::zeros(c.spec());
        };
        self.counters.add_nonlinear();
        let mut v = self.transform.to_values(c);
        for z in v.matrix_mut().iter_mut() {
            *z = g(*z);
        }
        self.transform.to_coeffs(&v)
    }
}

/// `‖u - u_ref‖₂ / ‖u_ref‖₂` in the sphere norm.
pub fn relative_error(u: &CoeffGrid, reference: &CoeffGrid) -> Result<f64> {
    if u.shape() != reference.shape() {
        return Err(Error::ShapeMismatch {
            expected: reference.shape(),
            got: u.shape(),
        });
    }
    let denom = sphere_l2_norm(reference);
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(sphere_l2_norm(&(u - reference)) / denom)
}
