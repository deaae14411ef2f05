//! The φ-functions `φ_0 = e^z`, `φ_{l+1}(z) = (φ_l(z) - 1/l!)/z` and their
//! actions on coefficient grids.

pub mod cf;
pub mod eig;

pub use cf::{cf_build, CfApproximant, CfPhi};
pub use eig::{eig_precompute, EigPhiData};

use crate::error::Result;
use crate::C64;

const FACTORIALS: [f64; 4] = [1.0, 1.0, 2.0, 6.0];
const SERIES_TERMS: usize = 30;

/// Below this modulus the Taylor series is used instead of the recurrence.
pub const SERIES_RADIUS: f64 = 1.0;

/// `φ_l(z)` for `l ∈ 0..=3`.
pub fn phi_scalar(l: usize, z: C64) -> C64 {
    assert!(l <= 3, "phi_scalar supports l = 0..3");
    if z.norm() < SERIES_RADIUS {
        // Σ_k z^k / (k + l)!, summed from the tail
        let mut inv_fact = vec![0.0; SERIES_TERMS + l];
        inv_fact[0] = 1.0;
        for k in 1..inv_fact.len() {
            inv_fact[k] = inv_fact[k - 1] / k as f64;
        }
        let mut acc = C64::new(0.0, 0.0);
        for k in (0..SERIES_TERMS).rev() {
            acc = acc * z + inv_fact[k + l];
        }
        return acc;
    }
    let mut v = z.exp();
    for f in FACTORIALS.iter().take(l) {
        v = (v - 1.0 / f) / z;
    }
    v
}

/// The scalar functions needed by one ETDRK4 step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhiTerm {
    /// `φ_0(hL/2)`
    ExpHalf,
    /// `φ_1(hL/2)`
    Phi1Half,
    /// `φ_0(hL)`
    Exp,
    /// `f_1(hL) = φ_1 - 3φ_2 + 4φ_3`
    F1,
    /// `f_2(hL) = 2φ_2 - 4φ_3`
    F2,
    /// `f_3(hL) = -φ_2 + 4φ_3`
    F3,
}

impl PhiTerm {
    pub const ALL: [PhiTerm; 6] = [
        Self::ExpHalf,
        Self::Phi1Half,
        Self::Exp,
        Self::F1,
        Self::F2,
        Self::F3,
    ];

    /// Whether the argument is `hL/2` rather than `hL`.
    pub fn is_half_step(self) -> bool {
        matches!(self, Self::ExpHalf | Self::Phi1Half)
    }

    /// Coefficients `(w_0, .., w_3)` with `term = Σ w_l φ_l`.
    pub fn weights(self) -> [f64; 4] {
        match self {
            Self::ExpHalf | Self::Exp => [1.0, 0.0, 0.0, 0.0],
            Self::Phi1Half => [0.0, 1.0, 0.0, 0.0],
            Self::F1 => [0.0, 1.0, -3.0, 4.0],
            Self::F2 => [0.0, 0.0, 2.0, -4.0],
            Self::F3 => [0.0, 0.0, -1.0, 4.0],
        }
    }

    /// Evaluates the term at `z` (already scaled by `h` or `h/2`).
    pub fn eval(self, z: C64) -> C64 {
        combine(self.weights(), |l| phi_scalar(l, z))
    }
}

pub(crate) fn combine(w: [f64; 4], mut phi: impl FnMut(usize) -> C64) -> C64 {
    (0..4).filter(|&l| w[l] != 0.0).map(|l| w[l] * phi(l)).sum()
}

/// Something that applies the ETDRK4 φ-terms at a fixed step size.
pub trait PhiProvider<S> {
    fn step_size(&self) -> f64;
    fn apply(&self, term: PhiTerm, x: &S) -> Result<S>;
}

/// Exact φ-terms for the scalar problem `u' = λu + N(u)`.
#[derive(Debug, Clone, Copy)]
pub struct ScalarPhi {
    pub lambda: C64,
    pub h: f64,
}

impl PhiProvider<C64> for ScalarPhi {
    fn step_size(&self) -> f64 {
        self.h
    }

    fn apply(&self, term: PhiTerm, x: &C64) -> Result<C64> {
        let scale = if term.is_half_step() {
            0.5 * self.h
        } else {
            self.h
        };
        Ok(term.eval(self.lambda * scale) * x)
    }
}
