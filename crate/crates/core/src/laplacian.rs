//! The coefficient-space Laplacian as a block pencil.
//!
//! For longitudinal wavenumber `k` the premultiplied block is
//! `A_k = α(T_sin² D⁽²⁾ + T_cossin D + (-k²) I)` with `B = T_sin²`, so the
//! operator itself is `L_k = B⁻¹ A_k`. `B⁻¹` is never formed.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dense::{eig, EigenDecomposition};
use crate::error::{Error, Result};
use crate::fourier::{diff_matrix, wavenumber, CoeffGrid, GridSpec};
use crate::linsolve::SparseLu;
use crate::mult::{build_tcossin, build_tsin2};
use crate::sparse::Csr;
use crate::C64;

/// Largest `m` accepted by [`spectral_diagnostics`].
pub const DIAGNOSTICS_MAX_M: usize = 128;

#[derive(Debug, Clone)]
pub struct BlockPencil {
    spec: GridSpec,
    alpha: C64,
    b: Csr,
    b_lu: SparseLu,
    a: Vec<Csr>,
}

/// Alias matching the operation name used elsewhere.
pub fn assemble(spec: GridSpec, alpha: C64) -> Result<BlockPencil> {
    BlockPencil::new(spec, alpha)
}

impl BlockPencil {
    pub fn new(spec: GridSpec, alpha: C64) -> Result<Self> {
        let spec = GridSpec::with_minimum(spec.m(), spec.n(), 8)?;
        let m = spec.m();
        let tsin2 = build_tsin2(m)?;
        let tcossin = build_tcossin(m)?;
        let d1 = diff_matrix(m, 1)?;
        let d2 = diff_matrix(m, 2)?;
        let base = tsin2.csr().scale_columns(&d2.diagonal).combine(
            C64::new(1.0, 0.0),
            &tcossin.csr().scale_columns(&d1.diagonal),
            C64::new(1.0, 0.0),
        );
        let identity = Csr::identity(m);
        let a = (0..spec.n())
            .map(|i| {
                let k = wavenumber(i, spec.n()) as f64;
                base.combine(alpha, &identity, -alpha * k * k)
            })
            .collect();
        let b = tsin2.csr().clone();
        let b_lu = SparseLu::factor(&b, usize::MAX)?;
        Ok(Self {
            spec,
            alpha,
            b,
            b_lu,
            a,
        })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn m(&self) -> usize {
        self.spec.m()
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    /// Spectrum on the imaginary axis rather than the negative real axis.
    pub fn is_dispersive(&self) -> bool {
        self.alpha.im != 0.0
    }

    /// Longitudinal wavenumber of block `i`.
    pub fn block_wavenumber(&self, i: usize) -> i64 {
        wavenumber(i, self.n())
    }

    pub fn a_block(&self, i: usize) -> &Csr {
        &self.a[i]
    }

    pub fn b_matrix(&self) -> &Csr {
        &self.b
    }

    pub fn b_factor(&self) -> &SparseLu {
        &self.b_lu
    }

    /// `z·B + w·A_i`.
    pub fn shifted_block(&self, i: usize, z: C64, w: C64) -> Csr {
        self.b.combine(z, &self.a[i], w)
    }

    /// `B c_i` for every block.
    pub fn premultiply(&self, c: &CoeffGrid) -> CoeffGrid {
        self.map_columns(c, |_, x, y| self.b.mul_vec_into(x, y))
    }

    /// `A_i c_i` for every block, i.e. `T_sin² L c`.
    pub fn apply_premultiplied(&self, c: &CoeffGrid) -> CoeffGrid {
        self.map_columns(c, |i, x, y| self.a[i].mul_vec_into(x, y))
    }

    /// `B⁻¹ r_i` for every block.
    pub fn unpremultiply(&self, r: &CoeffGrid) -> CoeffGrid {
        self.map_columns(r, |_, x, y| {
            y.copy_from_slice(x);
            self.b_lu.solve_in_place(y);
        })
    }

    /// `L c`, computed as `B⁻¹ (A_i c_i)` per block.
    pub fn apply(&self, c: &CoeffGrid) -> CoeffGrid {
        self.map_columns(c, |i, x, y| {
            self.a[i].mul_vec_into(x, y);
            self.b_lu.solve_in_place(y);
        })
    }

    fn map_columns(
        &self,
        c: &CoeffGrid,
        f: impl Fn(usize, &[C64], &mut [C64]) + Sync,
    ) -> CoeffGrid {
        assert_eq!(
            c.shape(),
            self.spec.shape(),
            "coefficient grid does not match pencil"
        );
        let m = self.m();
        let mut out = CoeffGrid::zeros(self.spec);
        out.matrix_mut()
            .as_mut_slice()
            .par_chunks_mut(m)
            .enumerate()
            .with_min_len(crate::columns_per_task(m))
            .for_each(|(i, y)| f(i, c.column(i), y));
        out
    }

    /// Dense `B⁻¹ A_i` restricted to one parity class of indices.
    pub(crate) fn dense_sub_operator(&self, i: usize, idx: &[usize]) -> DMatrix<C64> {
        let a = self.a[i].submatrix(idx).to_dense();
        let b = self.b.submatrix(idx).to_dense();
        b.lu().solve(&a).expect("T_sin² is nonsingular")
    }

    /// Eigendecompositions of `L_i` on its two decoupled parity classes.
    pub(crate) fn block_eigen(&self, i: usize) -> Result<[(Vec<usize>, EigenDecomposition); 2]> {
        let [even, odd] = parity_classes(self.m());
        let e0 = eig(self.dense_sub_operator(i, &even)).ok_or(Error::EigenFailure(i))?;
        let e1 = eig(self.dense_sub_operator(i, &odd)).ok_or(Error::EigenFailure(i))?;
        Ok([(even, e0), (odd, e1)])
    }
}

/// Storage indices of even and odd wavenumbers. Every block couples only
/// indices of equal parity.
pub(crate) fn parity_classes(m: usize) -> [Vec<usize>; 2] {
    let even = (0..m).filter(|&s| wavenumber(s, m) % 2 == 0).collect();
    let odd = (0..m).filter(|&s| wavenumber(s, m) % 2 != 0).collect();
    [even, odd]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDiagnostics {
    pub max_abs_eig: f64,
    /// Largest `|Im λ|` over all blocks.
    pub max_imag: f64,
    /// Largest positive `Re λ` (zero if none).
    pub max_positive_real: f64,
    pub all_real: bool,
    pub all_nonpositive: bool,
    /// Condition number of the block-diagonal eigenvector matrix with
    /// unit-norm columns.
    pub cond_v: f64,
    pub eigenvalues: Vec<C64>,
}

/// Relative tolerance for the realness and sign checks.
pub const SPECTRUM_RTOL: f64 = 1e-8;

pub fn spectral_diagnostics(pencil: &BlockPencil) -> Result<SpectralDiagnostics> {
    if pencil.m() > DIAGNOSTICS_MAX_M {
        return Err(Error::DiagnosticsTooLarge {
            m: pencil.m(),
            limit: DIAGNOSTICS_MAX_M,
        });
    }
    let per_block = (0..pencil.n())
        .into_par_iter()
        .map(|i| {
            let parts = pencil.block_eigen(i)?;
            let mut vals = Vec::new();
            let (mut smax, mut smin) = (0.0f64, f64::INFINITY);
            for (_, e) in &parts {
                vals.extend(e.values.iter().copied());
                let s = e.vectors.clone().svd(false, false).singular_values;
                smax = smax.max(s.max());
                smin = smin.min(s.min());
            }
            Ok((vals, smax, smin))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut eigenvalues = Vec::with_capacity(pencil.m() * pencil.n());
    let (mut smax, mut smin) = (0.0f64, f64::INFINITY);
    for (vals, hi, lo) in per_block {
        eigenvalues.extend(vals);
        smax = smax.max(hi);
        smin = smin.min(lo);
    }
    let max_abs_eig = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let max_imag = eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let max_positive_real = eigenvalues.iter().map(|z| z.re).fold(0.0, f64::max);
    Ok(SpectralDiagnostics {
        max_abs_eig,
        max_imag,
        max_positive_real,
        all_real: max_imag <= SPECTRUM_RTOL * max_abs_eig,
        all_nonpositive: max_positive_real <= SPECTRUM_RTOL * max_abs_eig,
        cond_v: smax / smin,
        eigenvalues,
    })
}

/// Eigenvalues of the central `(m+1) × (m+1)` block of the `sin²θ`
/// multiplication matrix, ascending.
pub fn msin2_cluster_eigs(m: usize) -> Result<Vec<f64>> {
    if m < 6 || m % 2 != 0 {
        return Err(Error::InvalidSize {
            m,
            reason: "cluster eigenvalues need an even m >= 6",
        });
    }
    let h = m / 2;
    let mut out: Vec<f64> = (1..=h)
        .map(|j| 0.5 * ((PI * j as f64 / (h + 1) as f64).cos() + 1.0))
        .chain((1..=h + 1).map(|j| 0.5 * ((PI * j as f64 / (h + 2) as f64).cos() + 1.0)))
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cluster_eigs_match_dense() {
        let vals = msin2_cluster_eigs(6).unwrap();
        assert!(vals
            .iter()
            .any(|v| (v - 0.5 * ((PI / 4.0).cos() + 1.0)).abs() < 1e-15));
        let m = 8;
        let dense = DMatrix::from_fn(m + 1, m + 1, |i, j| match i.abs_diff(j) {
            0 => 0.5,
            2 => -0.25,
            _ => 0.0,
        });
        let mut ev: Vec<f64> = dense.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let vals = msin2_cluster_eigs(m).unwrap();
        assert_eq!(ev.len(), vals.len());
        for (a, b) in ev.iter().zip(&vals) {
            assert!((a - b).abs() < 1e-12);
        }
        let m = 200;
        let smallest = msin2_cluster_eigs(m).unwrap()[0];
        // ½(1 - cos x) ≈ x²/4 with x = π/(m/2 + 2)
        let approx = PI * PI / (4.0 * ((m / 2 + 2) as f64).powi(2));
        assert!((smallest / approx - 1.0).abs() < 1e-3);
    }

    #[test]
    fn parity_classes_partition() {
        let [e, o] = parity_classes(10);
        assert_eq!(e.len() + o.len(), 10);
        assert!(e.iter().all(|&s| wavenumber(s, 10) % 2 == 0));
        let pencil = BlockPencil::new(GridSpec::square(10).unwrap(), C64::new(1.0, 0.0)).unwrap();
        for i in 0..10 {
            for (r, c, _) in pencil.a_block(i).triplets() {
                assert_eq!((wavenumber(r, 10) - wavenumber(c, 10)).rem_euclid(2), 0);
            }
        }
    }

    #[test]
    fn constant_is_in_kernel() {
        let spec = GridSpec::square(16).unwrap();
        let pencil = BlockPencil::new(spec, C64::new(1.0, 0.0)).unwrap();
        let mut c = CoeffGrid::zeros(spec);
        c.set_coeff(0, 0, C64::new(1.0, 0.0));
        assert!(pencil.apply(&c).max_abs() < 1e-14);
    }

    #[test]
    fn rejects_small_grids() {
        assert!(BlockPencil::new(GridSpec::square(6).unwrap(), C64::new(1.0, 0.0)).is_err());
        let big = BlockPencil::new(GridSpec::new(130, 8).unwrap(), C64::new(1.0, 0.0)).unwrap();
        assert!(matches!(
            spectral_diagnostics(&big),
            Err(Error::DiagnosticsTooLarge { .. })
        ));
    }
}
