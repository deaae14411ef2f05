//! Doubling sphere functions to bi-periodic functions and back, plus the
//! diagnostics that check a coefficient grid really describes a function
//! on the sphere.
//!
//! `θ` is colatitude (`0` at the north pole) and `λ` longitude. The doubled
//! function is `ũ(λ, θ) = u(λ, θ)` for `θ ∈ [0, π]` and `u(λ ± π, -θ)` for
//! `θ ∈ [-π, 0)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::fourier::{
    make_grid, shifted_index, wavenumber, CoeffGrid, GridSpec, Transform, ValueGrid,
};
use crate::C64;

type Evaluator = Arc<dyn Fn(f64, f64) -> C64 + Send + Sync>;

/// A function on the sphere, given either pointwise on
/// `[-π, π] × [0, π]` or by doubled Fourier coefficients.
#[derive(Clone)]
pub enum SphereFunction {
    /// `u(λ, θ)` with `θ ∈ [0, π]`.
    Evaluator(Evaluator),
    Coefficients(CoeffGrid),
}

impl fmt::Debug for SphereFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Evaluator(_) => f.write_str("SphereFunction::Evaluator(..)"),
            Self::Coefficients(c) => write!(f, "SphereFunction::Coefficients({}x{})", c.m(), c.n()),
        }
    }
}

impl SphereFunction {
    pub fn from_fn(f: impl Fn(f64, f64) -> C64 + Send + Sync + 'static) -> Self {
        Self::Evaluator(Arc::new(f))
    }

    /// From a function of Cartesian coordinates on the unit sphere,
    /// `x = sinθ cosλ`, `y = sinθ sinλ`, `z = cosθ`.
    pub fn from_cartesian(f: impl Fn(f64, f64, f64) -> C64 + Send + Sync + 'static) -> Self {
        Self::from_fn(move |lambda, theta| {
            let (st, ct) = theta.sin_cos();
            f(st * lambda.cos(), st * lambda.sin(), ct)
        })
    }

    /// Evaluates at a sphere point (`θ ∈ [0, π]`); coefficient-backed
    /// functions are summed directly.
    pub fn eval(&self, lambda: f64, theta: f64) -> C64 {
        match self {
            Self::Evaluator(f) => f(lambda, theta),
            Self::Coefficients(c) => {
                let mut acc = C64::new(0.0, 0.0);
                for t in 0..c.n() {
                    let k = wavenumber(t, c.n()) as f64;
                    for s in 0..c.m() {
                        let j = wavenumber(s, c.m()) as f64;
                        acc += c[(s, t)] * C64::from_polar(1.0, j * theta + k * lambda);
                    }
                }
                acc
            }
        }
    }
}

fn wrap_longitude(lambda: f64) -> f64 {
    if lambda > PI {
        lambda - 2.0 * PI
    } else if lambda < -PI {
        lambda + 2.0 * PI
    } else {
        lambda
    }
}

/// Samples the doubled-up function on the `m × n` grid.
pub fn double_up(f: &SphereFunction, spec: GridSpec) -> ValueGrid {
    match f {
        SphereFunction::Coefficients(c) => Transform::new(c.spec()).to_values(c),
        SphereFunction::Evaluator(u) => {
            let (theta, lambda) = make_grid(spec);
            ValueGrid::from_fn(spec, |p, q| {
                let (th, la) = (theta[p], lambda[q]);
                if th >= 0.0 {
                    u(la, th)
                } else if la <= 0.0 {
                    u(la + PI, -th)
                } else {
                    u(wrap_longitude(la - PI), -th)
                }
            })
        }
    }
}

/// Doubles up and transforms to coefficients.
pub fn double_up_coeffs(f: &SphereFunction, spec: GridSpec) -> CoeffGrid {
    match f {
        SphereFunction::Coefficients(c) => c.clone(),
        _ => Transform::new(spec).to_coeffs(&double_up(f, spec)),
    }
}

/// Values on the sphere part of the grid, `θ ∈ [0, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereSamples {
    /// Colatitudes from `0` (north pole) to `π`.
    pub theta: Vec<f64>,
    pub lambda: Vec<f64>,
    /// `theta.len() × lambda.len()`.
    pub values: DMatrix<C64>,
}

/// Keeps rows `m/2 .. m-1` (`θ ∈ [0, π)`) followed by row `0` (`θ = -π`,
/// which is the south pole `θ = π`).
pub fn restrict(v: &ValueGrid) -> SphereSamples {
    let (m, n) = v.shape();
    let spec = GridSpec::new(m, n).expect("value grid has a valid shape");
    let (theta, lambda) = make_grid(spec);
    let rows: Vec<usize> = (m / 2..m).chain(std::iter::once(0)).collect();
    let values = DMatrix::from_fn(rows.len(), n, |r, c| v[(rows[r], c)]);
    let theta = rows
        .iter()
        .map(|&p| if p == 0 { PI } else { theta[p] })
        .collect();
    SphereSamples {
        theta,
        lambda,
        values,
    }
}

/// `max_{k≠0}` of `|Σ'_j û_jk|` and `|Σ'_j (-1)^j û_jk|`. Zero for a function
/// that is single-valued at both poles.
pub fn pole_residual(c: &CoeffGrid) -> f64 {
    let (m, n) = c.shape();
    let mut worst: f64 = 0.0;
    for t in 0..n {
        if wavenumber(t, n) == 0 {
            continue;
        }
        let col = c.column(t);
        let plain: C64 = col.iter().sum();
        let alternating: C64 = col
            .iter()
            .enumerate()
            .map(|(s, v)| if wavenumber(s, m) % 2 == 0 { *v } else { -*v })
            .sum();
        worst = worst.max(plain.norm()).max(alternating.norm());
    }
    worst
}

/// Largest `|ũ(λ, θ) - ũ(λ + π, -θ)|` over the grid.
pub fn symmetry_residual(c: &CoeffGrid) -> f64 {
    let v = Transform::new(c.spec()).to_values(c);
    values_symmetry_residual(&v)
}

pub fn values_symmetry_residual(v: &ValueGrid) -> f64 {
    let (m, n) = v.shape();
    let mut worst: f64 = 0.0;
    for q in 0..n {
        let q2 = (q + n / 2) % n;
        for p in 0..m {
            let p2 = (m - p) % m;
            worst = worst.max((v[(p, q)] - v[(p2, q2)]).norm());
        }
    }
    worst
}

/// `∫_0^π sinθ e^{ijθ} dθ` for each stored wavenumber `j`; the `-m/2` slot
/// uses the common weight of `±m/2`.
pub fn latitude_weights(m: usize) -> Vec<C64> {
    (0..m).map(|s| latitude_weight(wavenumber(s, m))).collect()
}

pub fn latitude_weight(j: i64) -> C64 {
    match j {
        1 => C64::new(0.0, PI / 2.0),
        -1 => C64::new(0.0, -PI / 2.0),
        j if j % 2 != 0 => C64::new(0.0, 0.0),
        j => C64::new(2.0 / (1.0 - (j * j) as f64), 0.0),
    }
}

/// `∫_{S²} u dΩ` of the doubled function with coefficients `c`.
pub fn sphere_integral(c: &CoeffGrid) -> C64 {
    let Some(t0) = shifted_index(0, c.n()) else {
        unreachable!()
    };
    let w = latitude_weights(c.m());
    2.0 * PI * c.column(t0).iter().zip(&w).map(|(a, b)| a * b).sum::<C64>()
}

/// `(∫_{S²} |u|² dΩ)^{1/2}`; `|u|²` is formed at twice the resolution so it
/// is exact for the band-limited `u`.
pub fn sphere_l2_norm(c: &CoeffGrid) -> f64 {
    let (m, n) = c.shape();
    let fine = c.pad_to(2 * m, 2 * n);
    let t = Transform::new(fine.spec());
    let mut v = t.to_values(&fine);
    for z in v.matrix_mut().iter_mut() {
        *z = C64::new(z.norm_sqr(), 0.0);
    }
    sphere_integral(&t.to_coeffs(&v)).re.max(0.0).sqrt()
}
