//! Unit-normalized complex spherical harmonics without the Condon–Shortley
//! phase.

use std::f64::consts::PI;

use crate::dfs::{double_up_coeffs, SphereFunction};
use crate::error::{Error, Result};
use crate::fourier::{CoeffGrid, GridSpec};
use crate::C64;

/// Normalized associated Legendre function `P̄_l^m(cos θ)` with
/// `∫_0^π |P̄|² sinθ dθ = 1/(2π)`, evaluated by the stable three-term
/// recurrence in `l`.
pub fn legendre_normalized(l: usize, m: usize, theta: f64) -> f64 {
    assert!(m <= l, "order exceeds degree");
    let (s, x) = theta.sin_cos();
    let mut pmm = (0.25 / PI).sqrt();
    for k in 1..=m {
        let k = k as f64;
        pmm *= ((2.0 * k + 1.0) / (2.0 * k)).sqrt() * s;
    }
    if l == m {
        return pmm;
    }
    let mut prev = pmm;
    let mut cur = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
    let mf = m as f64;
    for deg in m + 2..=l {
        let d = deg as f64;
        let a = ((4.0 * d * d - 1.0) / (d * d - mf * mf)).sqrt();
        let b = (((d - 1.0).powi(2) - mf * mf) / (4.0 * (d - 1.0).powi(2) - 1.0)).sqrt();
        let next = a * (x * cur - b * prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// `Y_l^order(λ, θ)` for `θ ∈ [0, π]`.
pub fn harmonic_value(l: usize, order: i64, lambda: f64, theta: f64) -> C64 {
    let m = order.unsigned_abs() as usize;
    legendre_normalized(l, m, theta) * C64::from_polar(1.0, order as f64 * lambda)
}

pub fn harmonic_function(l: usize, order: i64) -> SphereFunction {
    SphereFunction::from_fn(move |lambda, theta| harmonic_value(l, order, lambda, theta))
}

/// Doubled-up coefficients of `Y_l^order`.
pub fn spherical_harmonic(l: usize, order: i64, spec: GridSpec) -> Result<CoeffGrid> {
    let resolvable =
        spec.m() >= 4 && l + 2 <= spec.m() / 2 && (order.unsigned_abs() as usize) < spec.n() / 2;
    if order.unsigned_abs() as usize > l || !resolvable {
        return Err(Error::UnresolvableHarmonic {
            l,
            order,
            m: spec.m(),
        });
    }
    Ok(double_up_coeffs(&harmonic_function(l, order), spec))
}
