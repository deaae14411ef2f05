//! Uniform grids, 2D FFT transforms between values and Fourier coefficients,
//! Fourier differentiation matrices and the `P`/`Q` representation maps.
//!
//! Coefficients are stored in ascending wavenumber order, `j = -m/2 .. m/2-1`
//! along rows and `k = -n/2 .. n/2-1` along columns. The `±m/2` mode is held
//! once, in the first slot, as the sum of the two halved boundary terms.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::C64;

/// Grid dimensions: `m` points in latitude (over the doubled `[-π, π)`),
/// `n` points in longitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    m: usize,
    n: usize,
}

impl GridSpec {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        Self::with_minimum(m, n, 2)
    }

    pub(crate) fn with_minimum(m: usize, n: usize, min: usize) -> Result<Self> {
        if m < min || n < min || m % 2 != 0 || n % 2 != 0 {
            return Err(Error::InvalidGrid { m, n, min });
        }
        Ok(Self { m, n })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }
}

/// `θ_p = -π + 2πp/m` and `λ_q = -π + 2πq/n` (zero-based).
pub fn make_grid(spec: GridSpec) -> (Vec<f64>, Vec<f64>) {
    (uniform_points(spec.m), uniform_points(spec.n))
}

pub(crate) fn uniform_points(count: usize) -> Vec<f64> {
    (0..count)
        .map(|p| -PI + p as f64 * 2.0 * PI / count as f64)
        .collect()
}

/// Wavenumber stored at shifted index `s` of a length-`len` coefficient vector.
#[inline]
pub fn wavenumber(s: usize, len: usize) -> i64 {
    s as i64 - (len / 2) as i64
}

/// Shifted storage index of wavenumber `j`, if representable.
#[inline]
pub fn shifted_index(j: i64, len: usize) -> Option<usize> {
    let s = j + (len / 2) as i64;
    (0..len as i64).contains(&s).then_some(s as usize)
}

#[inline]
fn fft_index(j: i64, len: usize) -> usize {
    j.rem_euclid(len as i64) as usize
}

#[inline]
fn parity_sign(j: i64) -> f64 {
    if j.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

macro_rules! grid_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(DMatrix<C64>);

        impl $name {
            pub fn zeros(spec: GridSpec) -> Self {
                Self(DMatrix::zeros(spec.m(), spec.n()))
            }

            pub fn from_matrix(data: DMatrix<C64>) -> Self {
                Self(data)
            }

            pub fn from_fn(spec: GridSpec, mut f: impl FnMut(usize, usize) -> C64) -> Self {
                Self(DMatrix::from_fn(spec.m(), spec.n(), |r, c| f(r, c)))
            }

            pub fn m(&self) -> usize {
                self.0.nrows()
            }

            pub fn n(&self) -> usize {
                self.0.ncols()
            }

            pub fn shape(&self) -> (usize, usize) {
                self.0.shape()
            }

            pub fn spec(&self) -> GridSpec {
                GridSpec { m: self.m(), n: self.n() }
            }

            pub fn matrix(&self) -> &DMatrix<C64> {
                &self.0
            }

            pub fn matrix_mut(&mut self) -> &mut DMatrix<C64> {
                &mut self.0
            }

            pub fn into_matrix(self) -> DMatrix<C64> {
                self.0
            }

            /// Column `c`, contiguous in memory.
            pub fn column(&self, c: usize) -> &[C64] {
                let m = self.m();
                &self.0.as_slice()[c * m..(c + 1) * m]
            }

            pub fn column_mut(&mut self, c: usize) -> &mut [C64] {
                let m = self.m();
                &mut self.0.as_mut_slice()[c * m..(c + 1) * m]
            }

            pub fn columns_mut(&mut self) -> std::slice::ChunksExactMut<'_, C64> {
                let m = self.m();
                self.0.as_mut_slice().chunks_exact_mut(m)
            }

            pub fn as_slice(&self) -> &[C64] {
                self.0.as_slice()
            }

            pub fn max_abs(&self) -> f64 {
                self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            }

            /// `self += a * other`
            pub fn axpy(&mut self, a: C64, other: &Self) {
                debug_assert_eq!(self.shape(), other.shape());
                for (x, y) in self.0.as_mut_slice().iter_mut().zip(other.0.as_slice()) {
                    *x += a * y;
                }
            }

            pub fn scale(&mut self, a: C64) {
                for x in self.0.as_mut_slice() {
                    *x *= a;
                }
            }

            pub fn check_shape(&self, spec: GridSpec) -> Result<()> {
                if self.shape() != spec.shape() {
                    return Err(Error::ShapeMismatch { expected: spec.shape(), got: self.shape() });
                }
                Ok(())
            }
        }

        impl std::ops::Index<(usize, usize)> for $name {
            type Output = C64;
            fn index(&self, idx: (usize, usize)) -> &C64 {
                &self.0[idx]
            }
        }

        impl std::ops::IndexMut<(usize, usize)> for $name {
            fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
                &mut self.0[idx]
            }
        }

        impl std::ops::Sub for &$name {
            type Output = $name;
            fn sub(self, rhs: &$name) -> $name {
                $name(&self.0 - &rhs.0)
            }
        }

        impl std::ops::Add for &$name {
            type Output = $name;
            fn add(self, rhs: &$name) -> $name {
                $name(&self.0 + &rhs.0)
            }
        }
    };
}

grid_type! {
    /// Fourier coefficients `û_{jk}` of a doubled-up function; rows are
    /// latitudinal wavenumbers, columns longitudinal wavenumbers (both shifted).
    CoeffGrid
}

grid_type! {
    /// Samples `ũ(λ_q, θ_p)` on the doubled uniform grid; rows are `θ_p`,
    /// columns `λ_q`.
    ValueGrid
}

impl CoeffGrid {
    /// Coefficient of wavenumber pair `(j, k)`; zero if outside the stored range.
    pub fn coeff(&self, j: i64, k: i64) -> C64 {
        match (shifted_index(j, self.m()), shifted_index(k, self.n())) {
            (Some(s), Some(t)) => self.0[(s, t)],
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn set_coeff(&mut self, j: i64, k: i64, value: C64) {
        let s = shifted_index(j, self.m()).expect("latitudinal wavenumber out of range");
        let t = shifted_index(k, self.n()).expect("longitudinal wavenumber out of range");
        self.0[(s, t)] = value;
    }

    /// Zero-pads to a finer `(m2, n2)` grid, splitting the stored `±m/2` and
    /// `±n/2` modes into their two halves so the trigonometric interpolant is
    /// unchanged.
    pub fn pad_to(&self, m2: usize, n2: usize) -> CoeffGrid {
        assert!(m2 >= self.m() && n2 >= self.n(), "pad_to only refines");
        let split = |len: usize, len2: usize, s: usize| -> Vec<(usize, f64)> {
            let j = wavenumber(s, len);
            if s == 0 && len2 > len {
                let h = (len / 2) as i64;
                vec![
                    (shifted_index(-h, len2).unwrap(), 0.5),
                    (shifted_index(h, len2).unwrap(), 0.5),
                ]
            } else {
                vec![(shifted_index(j, len2).unwrap(), 1.0)]
            }
        };
        let mut out = DMatrix::zeros(m2, n2);
        for t in 0..self.n() {
            let cols = split(self.n(), n2, t);
            for s in 0..self.m() {
                let v = self.0[(s, t)];
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                for &(r, wr) in &split(self.m(), m2, s) {
                    for &(c, wc) in &cols {
                        out[(r, c)] += v * (wr * wc);
                    }
                }
            }
        }
        CoeffGrid(out)
    }

    /// Truncates to a coarser `(m2, n2)` grid; modes that alias onto the
    /// new boundary wavenumbers `±m2/2`, `±n2/2` are folded together.
    pub fn truncate_to(&self, m2: usize, n2: usize) -> CoeffGrid {
        assert!(
            m2 <= self.m() && n2 <= self.n(),
            "truncate_to only coarsens"
        );
        let mut out = DMatrix::zeros(m2, n2);
        let (hm, hn) = ((m2 / 2) as i64, (n2 / 2) as i64);
        for t in 0..self.n() {
            let k = wavenumber(t, self.n());
            let k = if k == hn { -hn } else { k };
            let Some(c) = shifted_index(k, n2) else {
                continue;
            };
            for s in 0..self.m() {
                let j = wavenumber(s, self.m());
                let j = if j == hm { -hm } else { j };
                let Some(r) = shifted_index(j, m2) else {
                    continue;
                };
                out[(r, c)] += self.0[(s, t)];
            }
        }
        CoeffGrid(out)
    }
}

/// Planned FFTs for one grid size.
#[derive(Clone)]
pub struct Transform {
    spec: GridSpec,
    fwd_m: Arc<dyn Fft<f64>>,
    inv_m: Arc<dyn Fft<f64>>,
    fwd_n: Arc<dyn Fft<f64>>,
    inv_n: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform")
            .field("spec", &self.spec)
            .finish()
    }
}

impl Transform {
    pub fn new(spec: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            spec,
            fwd_m: planner.plan_fft_forward(spec.m()),
            inv_m: planner.plan_fft_inverse(spec.m()),
            fwd_n: planner.plan_fft_forward(spec.n()),
            inv_n: planner.plan_fft_inverse(spec.n()),
        }
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    /// `û_{jk} = (1/nm) Σ_p Σ_q ũ(λ_q, θ_p) e^{-ijθ_p} e^{-ikλ_q}`.
    pub fn to_coeffs(&self, v: &ValueGrid) -> CoeffGrid {
        let (m, n) = self.spec.shape();
        assert_eq!(v.shape(), (m, n), "value grid does not match transform");
        let mut buf = v.matrix().clone();
        self.fft2(&mut buf, &self.fwd_m, &self.fwd_n);
        let scale = 1.0 / (m * n) as f64;
        let out = DMatrix::from_fn(m, n, |s, t| {
            let (j, k) = (wavenumber(s, m), wavenumber(t, n));
            buf[(fft_index(j, m), fft_index(k, n))] * (parity_sign(j + k) * scale)
        });
        CoeffGrid(out)
    }

    /// Evaluates the Fourier series on the grid.
    pub fn to_values(&self, c: &CoeffGrid) -> ValueGrid {
        let (m, n) = self.spec.shape();
        assert_eq!(
            c.shape(),
            (m, n),
            "coefficient grid does not match transform"
        );
        let mut buf = DMatrix::zeros(m, n);
        for t in 0..n {
            let k = wavenumber(t, n);
            for s in 0..m {
                let j = wavenumber(s, m);
                buf[(fft_index(j, m), fft_index(k, n))] = c[(s, t)] * parity_sign(j + k);
            }
        }
        self.fft2(&mut buf, &self.inv_m, &self.inv_n);
        ValueGrid(buf)
    }

    fn fft2(
        &self,
        buf: &mut DMatrix<C64>,
        along_m: &Arc<dyn Fft<f64>>,
        along_n: &Arc<dyn Fft<f64>>,
    ) {
        let (m, n) = self.spec.shape();
        // columns are contiguous
        along_m.process(buf.as_mut_slice());
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); along_n.get_inplace_scratch_len()];
        for r in 0..m {
            for (c, x) in row.iter_mut().enumerate() {
                *x = buf[(r, c)];
            }
            along_n.process_with_scratch(&mut row, &mut scratch);
            for (c, x) in row.iter().enumerate() {
                buf[(r, c)] = *x;
            }
        }
    }
}

/// Convenience wrapper planning a fresh transform.
pub fn vals_to_coeffs(v: &ValueGrid) -> CoeffGrid {
    Transform::new(v.spec()).to_coeffs(v)
}

/// Convenience wrapper planning a fresh transform.
pub fn coeffs_to_vals(c: &CoeffGrid) -> ValueGrid {
    Transform::new(c.spec()).to_values(c)
}

/// Diagonal Fourier differentiation matrix acting on the length-`m`
/// coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagDiffMatrix {
    pub order: usize,
    pub diagonal: Vec<C64>,
}

impl DiagDiffMatrix {
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        v.iter().zip(&self.diagonal).map(|(a, d)| a * d).collect()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diagonal))
    }
}

/// First-order: `i·(0, -m/2+1, ..., m/2-1)`; the `-m/2` slot is zeroed so real
/// data has real derivatives. Second-order: `-(j²)` for `j = -m/2 .. m/2-1`.
pub fn diff_matrix(m: usize, order: usize) -> Result<DiagDiffMatrix> {
    if m < 2 || m % 2 != 0 {
        return Err(Error::InvalidSize {
            m,
            reason: "differentiation matrices need an even size",
        });
    }
    let diagonal = match order {
        1 => (0..m)
            .map(|s| {
                if s == 0 {
                    C64::new(0.0, 0.0)
                } else {
                    C64::new(0.0, wavenumber(s, m) as f64)
                }
            })
            .collect(),
        2 => (0..m)
            .map(|s| {
                let j = wavenumber(s, m) as f64;
                C64::new(-j * j, 0.0)
            })
            .collect(),
        other => return Err(Error::UnsupportedOrder(other)),
    };
    Ok(DiagDiffMatrix { order, diagonal })
}

/// `D_{m+1} = diag(i·(-m/2, ..., m/2))` on the symmetric length-`m+1` vector.
pub fn odd_diff_matrix(m: usize) -> DMatrix<C64> {
    let h = (m / 2) as i64;
    DMatrix::from_fn(m + 1, m + 1, |r, c| {
        if r == c {
            C64::new(0.0, (r as i64 - h) as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Maps between the stored length-`m` coefficient vector and the symmetric
/// length-`m+1` vector with halved boundary modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMaps {
    /// `(m+1) × m`: halves the `-m/2` entry and replicates it to the `+m/2` slot.
    pub p: DMatrix<f64>,
    /// `m × (m+1)`: folds the `+m/2` entry back onto `-m/2`.
    pub q_diff: DMatrix<f64>,
    /// `m × (m+5)`: truncates a product padded by two modes on each side and
    /// folds `±m/2`.
    pub q_mult: DMatrix<f64>,
}

pub fn projection_maps(m: usize) -> Result<ProjectionMaps> {
    if m < 2 || m % 2 != 0 {
        return Err(Error::InvalidSize {
            m,
            reason: "projection maps need an even size",
        });
    }
    let mut p = DMatrix::zeros(m + 1, m);
    p[(0, 0)] = 0.5;
    p[(m, 0)] = 0.5;
    for r in 1..m {
        p[(r, r)] = 1.0;
    }
    let mut q_diff = DMatrix::zeros(m, m + 1);
    for r in 0..m {
        q_diff[(r, r)] = 1.0;
    }
    q_diff[(0, m)] = 1.0;
    let mut q_mult = DMatrix::zeros(m, m + 5);
    for r in 0..m {
        q_mult[(r, r + 2)] = 1.0;
    }
    q_mult[(0, m + 2)] = 1.0;
    Ok(ProjectionMaps { p, q_diff, q_mult })
}
