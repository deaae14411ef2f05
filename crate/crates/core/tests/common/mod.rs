#![allow(dead_code)]

use dfsphere::dfs::{double_up_coeffs, SphereFunction};
use dfsphere::fourier::{diff_matrix, wavenumber};
use dfsphere::mult::{build_tcossin, build_tsin2};
use dfsphere::{CoeffGrid, GridSpec, C64};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_grid(spec: GridSpec, rng: &mut ChaCha8Rng) -> CoeffGrid {
    CoeffGrid::from_fn(spec, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn vec_of(g: &CoeffGrid) -> DVector<C64> {
    DVector::from_column_slice(g.as_slice())
}

pub fn grid_of(spec: GridSpec, v: &DVector<C64>) -> CoeffGrid {
    CoeffGrid::from_matrix(DMatrix::from_column_slice(spec.m(), spec.n(), v.as_slice()))
}

/// `α(I_n ⊗ (D2 + T⁻¹ Tcs D1) + D2_n ⊗ T⁻¹)` acting on column-major
/// stacked coefficients.
pub fn dense_laplacian(spec: GridSpec, alpha: C64) -> DMatrix<C64> {
    let (m, n) = spec.shape();
    let t = build_tsin2(m).unwrap().to_dense();
    let tcs = build_tcossin(m).unwrap().to_dense();
    let d1 = diff_matrix(m, 1).unwrap().to_dense();
    let d2 = diff_matrix(m, 2).unwrap().to_dense();
    let tinv = t.try_inverse().unwrap();
    let inner = &d2 + &tinv * &tcs * &d1;
    let mut l = DMatrix::zeros(m * n, m * n);
    for b in 0..n {
        let k = wavenumber(b, n) as f64;
        let block = &inner - &tinv * c(k * k, 0.0);
        l.view_mut((b * m, b * m), (m, m))
            .copy_from(&(block * alpha));
    }
    l
}

pub fn max_abs(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn rel_diff(a: &CoeffGrid, b: &CoeffGrid) -> f64 {
    (a - b).max_abs() / b.max_abs()
}

/// Right-hand side and solution of Δu = f for
/// u = -(1 + cos θ) sin^l θ cos(lλ).
pub fn sectoral_pair(l: usize, spec: GridSpec) -> (CoeffGrid, CoeffGrid) {
    let lf = l as f64;
    let f = SphereFunction::from_fn(move |lam, th| {
        let s = th.sin().powi(l as i32) * (lf * lam).cos();
        c(
            lf * (lf + 1.0) * s + (lf + 1.0) * (lf + 2.0) * th.cos() * s,
            0.0,
        )
    });
    let u = SphereFunction::from_fn(move |lam, th| {
        let s = th.sin().powi(l as i32) * (lf * lam).cos();
        c(-s - th.cos() * s, 0.0)
    });
    (double_up_coeffs(&f, spec), double_up_coeffs(&u, spec))
}
