//! Coefficient-space multiplication by `sin²θ` and `cosθ sinθ`.
//!
//! The matrices are assembled entry by entry from the exact three-term
//! expansions. Acting on a stored coefficient vector they (1) split the
//! `-m/2` entry into halves at `±m/2`, (2) convolve with the expansion and
//! (3) drop modes beyond `±m/2`, folding `+m/2` back onto `-m/2`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fourier::{shifted_index, wavenumber};
use crate::sparse::Csr;
use crate::C64;

/// Sparse `m × m` matrix whose nonzeros lie on the main and `±2` diagonals
/// plus a handful of wrap-around entries near the corners.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedCornerMatrix {
    csr: Csr,
}

impl BandedCornerMatrix {
    pub fn m(&self) -> usize {
        self.csr.dim()
    }

    pub fn csr(&self) -> &Csr {
        &self.csr
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.csr.get(r, c)
    }

    /// Entries of diagonal `offset` (`c - r`), zero where unset.
    pub fn diagonal(&self, offset: i64) -> Vec<C64> {
        let m = self.m() as i64;
        (0..m)
            .filter_map(|r| {
                let c = r + offset;
                (0..m)
                    .contains(&c)
                    .then(|| self.get(r as usize, c as usize))
            })
            .collect()
    }

    /// Nonzeros off the `{-2, 0, 2}` band.
    pub fn corners(&self) -> Vec<(usize, usize, C64)> {
        self.csr
            .triplets()
            .filter(|&(r, c, _)| !matches!(c as i64 - r as i64, -2 | 0 | 2))
            .collect()
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        self.csr.mul_vec(x)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        self.csr.to_dense()
    }
}

fn check_size(m: usize) -> Result<()> {
    if m < 6 || m % 2 != 0 {
        return Err(Error::InvalidSize {
            m,
            reason: "multiplication matrices need an even m >= 6",
        });
    }
    Ok(())
}

/// Exact assembly of `Q M(:, 3:m+3) P` for the multiplier
/// `Σ_l a_l e^{ilθ}` (`taps` lists `(l, a_l)`).
fn assemble(m: usize, taps: &[(i64, C64)]) -> BandedCornerMatrix {
    let h = (m / 2) as i64;
    let mut triplets = Vec::new();
    for col in 0..m {
        let sources: &[(i64, f64)] = if col == 0 {
            &[(-h, 0.5), (h, 0.5)]
        } else {
            &[(0, 1.0)]
        };
        for &(j0, weight) in sources {
            let j = if col == 0 { j0 } else { wavenumber(col, m) };
            for &(l, a) in taps {
                let k = j + l;
                let row = if k == h { Some(0) } else { shifted_index(k, m) };
                if let Some(row) = row {
                    triplets.push((row, col, a * weight));
                }
            }
        }
    }
    BandedCornerMatrix {
        csr: Csr::from_triplets(m, triplets),
    }
}

pub(crate) fn sin2_taps() -> [(i64, C64); 3] {
    [
        (-2, C64::new(-0.25, 0.0)),
        (0, C64::new(0.5, 0.0)),
        (2, C64::new(-0.25, 0.0)),
    ]
}

pub(crate) fn cossin_taps() -> [(i64, C64); 2] {
    // cosθ sinθ = (i/4) e^{-2iθ} - (i/4) e^{2iθ}
    [(-2, C64::new(0.0, 0.25)), (2, C64::new(0.0, -0.25))]
}

pub fn build_tsin2(m: usize) -> Result<BandedCornerMatrix> {
    check_size(m)?;
    Ok(assemble(m, &sin2_taps()))
}

pub fn build_tcossin(m: usize) -> Result<BandedCornerMatrix> {
    check_size(m)?;
    Ok(assemble(m, &cossin_taps()))
}

/// Plain `m × m` Toeplitz truncation of the `sin²θ` multiplier, without the
/// boundary-mode corrections. Wrong on polynomials of degree `m/2 - 2`.
pub fn naive_msin2(m: usize) -> Result<BandedCornerMatrix> {
    check_size(m)?;
    let taps = sin2_taps();
    let triplets = (0..m).flat_map(|r| {
        taps.iter().filter_map(move |&(l, a)| {
            let c = r as i64 - l;
            (0..m as i64).contains(&c).then_some((r, c as usize, a))
        })
    });
    Ok(BandedCornerMatrix {
        csr: Csr::from_triplets(m, triplets),
    })
}
