//! Fourth-order time-steppers for `u_t = Lu + N(u)` in coefficient space.
//!
//! The scheme formulas in [`schemes`] are generic over the state type and
//! the linear part, so the same code advances a coefficient grid under a
//! [`BlockPencil`] and a complex scalar under `u' = λu + N(u)`.

pub mod driver;
pub mod schemes;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

pub use driver::{integrate, integrate_from, Counted, IntegrationResult, Snapshot, Stepper};
pub use schemes::{etdrk4_step, imex_bdf4_step, lirk4_step, History};

use crate::error::{Error, Result};
use crate::fourier::CoeffGrid;
use crate::laplacian::BlockPencil;
use crate::linsolve::BlockLu;
use crate::C64;

/// Vector-space operations the schemes need.
pub trait State: Clone + Send + Sync {
    /// `self += a·x`
    fn axpy(&mut self, a: C64, x: &Self);
    fn scale(&mut self, a: C64);
    fn is_finite(&self) -> bool;
}

impl State for CoeffGrid {
    fn axpy(&mut self, a: C64, x: &Self) {
        CoeffGrid::axpy(self, a, x)
    }

    fn scale(&mut self, a: C64) {
        CoeffGrid::scale(self, a)
    }

    fn is_finite(&self) -> bool {
        CoeffGrid::is_finite(self)
    }
}

impl State for C64 {
    fn axpy(&mut self, a: C64, x: &Self) {
        *self += a * x;
    }

    fn scale(&mut self, a: C64) {
        *self *= a;
    }

    fn is_finite(&self) -> bool {
        C64::is_finite(*self)
    }
}

/// A linear operator given as a pencil `L = B⁻¹A`.
pub trait LinearPart<S>: Send + Sync {
    type Factor: Send + Sync;

    /// Factors `z·B + w·A`.
    fn factor(&self, z: C64, w: C64) -> Result<Self::Factor>;
    /// Solves `(z·B + w·A)x = rhs`.
    fn solve_pre(&self, f: &Self::Factor, rhs: &S) -> Result<S>;
    /// `B x`
    fn premultiply(&self, x: &S) -> S;
    /// `A x`
    fn apply_pre(&self, x: &S) -> S;
    /// `B⁻¹ r`
    fn unpremultiply(&self, r: &S) -> Result<S>;
    fn is_dispersive(&self) -> bool;
}

impl LinearPart<CoeffGrid> for BlockPencil {
    type Factor = BlockLu;

    fn factor(&self, z: C64, w: C64) -> Result<BlockLu> {
        BlockLu::factor(self, z, w)
    }

    fn solve_pre(&self, f: &BlockLu, rhs: &CoeffGrid) -> Result<CoeffGrid> {
        f.solve_premultiplied(self, rhs)
    }

    fn premultiply(&self, x: &CoeffGrid) -> CoeffGrid {
        BlockPencil::premultiply(self, x)
    }

    fn apply_pre(&self, x: &CoeffGrid) -> CoeffGrid {
        BlockPencil::apply_premultiplied(self, x)
    }

    fn unpremultiply(&self, r: &CoeffGrid) -> Result<CoeffGrid> {
        Ok(BlockPencil::unpremultiply(self, r))
    }

    fn is_dispersive(&self) -> bool {
        BlockPencil::is_dispersive(self)
    }
}

/// `L = λ` acting on complex scalars (`B = 1`, `A = λ`).
#[derive(Debug, Clone, Copy)]
pub struct ScalarLinear {
    pub lambda: C64,
}

impl LinearPart<C64> for ScalarLinear {
    type Factor = C64;

    fn factor(&self, z: C64, w: C64) -> Result<C64> {
        let d = z + w * self.lambda;
        if d.norm() == 0.0 {
            return Err(Error::FactorizationBreakdown {
                block: 0,
                row: 0,
                pivot: 0.0,
            });
        }
        Ok(d)
    }

    fn solve_pre(&self, f: &C64, rhs: &C64) -> Result<C64> {
        Ok(rhs / f)
    }

    fn premultiply(&self, x: &C64) -> C64 {
        *x
    }

    fn apply_pre(&self, x: &C64) -> C64 {
        self.lambda * x
    }

    fn unpremultiply(&self, r: &C64) -> Result<C64> {
        Ok(*r)
    }

    fn is_dispersive(&self) -> bool {
        self.lambda.im != 0.0
    }
}

/// Work counters. A nonlinear evaluation costs one inverse and one forward
/// 2D FFT; a linear solve is one blockwise `O(nm)` solve over the grid.
#[derive(Debug, Default)]
pub struct Counters {
    nonlinear: AtomicU64,
    solves: AtomicU64,
}

impl Counters {
    pub fn add_nonlinear(&self) {
        self.nonlinear.fetch_add(1, Ordering::Relaxed);
    }

    pub fn add_solves(&self, k: u64) {
        self.solves.fetch_add(k, Ordering::Relaxed);
    }

    pub fn nonlinear_evals(&self) -> u64 {
        self.nonlinear.load(Ordering::Relaxed)
    }

    pub fn ffts(&self) -> u64 {
        2 * self.nonlinear_evals()
    }

    pub fn solves(&self) -> u64 {
        self.solves.load(Ordering::Relaxed)
    }

    pub fn snapshot(&self) -> CounterSnapshot {
        CounterSnapshot {
            nonlinear_evals: self.nonlinear_evals(),
            ffts: self.ffts(),
            solves: self.solves(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CounterSnapshot {
    pub nonlinear_evals: u64,
    pub ffts: u64,
    pub solves: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Etdrk4Cf,
    Etdrk4Eig,
    ImexBdf4,
    Lirk4,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Self::Etdrk4Cf, Self::Etdrk4Eig, Self::ImexBdf4, Self::Lirk4];

    pub fn name(self) -> &'static str {
        match self {
            Self::Etdrk4Cf => "etdrk4-cf",
            Self::Etdrk4Eig => "etdrk4-eig",
            Self::ImexBdf4 => "imex-bdf4",
            Self::Lirk4 => "lirk4",
        }
    }

    /// Whether the scheme is stable for operators with imaginary spectrum.
    pub fn supports_dispersive(self) -> bool {
        matches!(self, Self::Etdrk4Eig | Self::Lirk4)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub h: f64,
    pub t_span: (f64, f64),
    /// Times at which to record the solution; each must be a whole number of
    /// steps from `t_span.0`.
    pub snapshots: Vec<f64>,
    pub cf_poles: usize,
    pub contour_points: usize,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, h: f64, t_span: (f64, f64)) -> Self {
        Self {
            scheme,
            h,
            t_span,
            snapshots: Vec::new(),
            cf_poles: crate::phi::cf::DEFAULT_POLES,
            contour_points: crate::phi::eig::DEFAULT_CONTOUR_POINTS,
        }
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshots = times;
        self
    }

    /// Number of steps covering `t_span`.
    pub fn step_count(&self) -> Result<usize> {
        whole_steps(self.t_span.1 - self.t_span.0, self.h)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidSchedule("step size must be positive"));
        }
        if !(self.t_span.1 >= self.t_span.0) {
            return Err(Error::InvalidSchedule("final time precedes initial time"));
        }
        self.step_count()?;
        for &t in &self.snapshots {
            if t < self.t_span.0 || t > self.t_span.1 {
                return Err(Error::InvalidSchedule(
                    "snapshot time outside the time span",
                ));
            }
            whole_steps(t - self.t_span.0, self.h)?;
        }
        Ok(())
    }
}

pub(crate) fn whole_steps(span: f64, h: f64) -> Result<usize> {
    let k = span / h;
    let r = k.round();
    if (k - r).abs() > 1e-9 * r.max(1.0) || r < 0.0 {
        return Err(Error::NonIntegralSteps { span, h });
    }
    Ok(r as usize)
}
