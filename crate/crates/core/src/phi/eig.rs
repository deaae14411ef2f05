//! φ-functions of each Laplacian block through its eigendecomposition,
//! `φ(hL_i) = V φ(hΛ) V⁻¹`, with `φ(hλ)` evaluated as the average over `M`
//! points of a circle around `hλ`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::CoeffGrid;
use crate::laplacian::BlockPencil;
use crate::phi::{phi_scalar, PhiProvider, PhiTerm};
use crate::C64;

/// Default number of contour points.
pub const DEFAULT_CONTOUR_POINTS: usize = 32;
/// Default contour radius.
pub const DEFAULT_CONTOUR_RADIUS: f64 = 1.0;
/// Blocks whose eigenvector matrix is worse conditioned than this are rejected.
pub const COND_LIMIT: f64 = 1e8;

/// `(1/M) Σ_k φ_l(z + r e^{2πi(k-½)/M})`.
pub fn phi_contour(l: usize, z: C64, points: usize, radius: f64) -> C64 {
    let sum: C64 = (1..=points)
        .map(|k| {
            let t = 2.0 * PI * (k as f64 - 0.5) / points as f64;
            phi_scalar(l, z + C64::from_polar(radius, t))
        })
        .sum();
    sum / points as f64
}

#[derive(Debug, Clone)]
struct SubBlock {
    idx: Vec<usize>,
    /// Eigenvalues of `L_i` on this parity class (not scaled by `h`).
    values: DVector<C64>,
    vectors: DMatrix<C64>,
    inverse: DMatrix<C64>,
    /// One dense matrix per entry of [`PhiTerm::ALL`].
    terms: Vec<DMatrix<C64>>,
}

impl SubBlock {
    fn function_matrix(&self, d: impl Fn(C64) -> C64) -> DMatrix<C64> {
        let mut vd = self.vectors.clone();
        for (j, mut col) in vd.column_iter_mut().enumerate() {
            col *= d(self.values[j]);
        }
        vd * &self.inverse
    }
}

/// Per-block eigendecompositions and the six ETDRK4 stepping matrices.
#[derive(Debug, Clone)]
pub struct EigPhiData {
    h: f64,
    points: usize,
    radius: f64,
    m: usize,
    n: usize,
    blocks: Vec<[SubBlock; 2]>,
    cond_max: f64,
}

/// Precomputes everything ETDRK4-EIG needs at step `h` with `points`
/// contour points of radius [`DEFAULT_CONTOUR_RADIUS`].
pub fn eig_precompute(pencil: &BlockPencil, h: f64, points: usize) -> Result<EigPhiData> {
    EigPhiData::new(pencil, h, points, DEFAULT_CONTOUR_RADIUS)
}

impl EigPhiData {
    pub fn new(pencil: &BlockPencil, h: f64, points: usize, radius: f64) -> Result<Self> {
        let blocks = (0..pencil.n())
            .into_par_iter()
            .map(|i| -> Result<([SubBlock; 2], f64)> {
                let parts = pencil.block_eigen(i)?;
                let mut worst: f64 = 0.0;
                let subs = parts.map(|(idx, e)| {
                    let cond = e.cond();
                    worst = worst.max(cond);
                    let mut sub = SubBlock {
                        idx,
                        values: e.values,
                        vectors: e.vectors,
                        inverse: e.inverse,
                        terms: Vec::new(),
                    };
                    sub.terms = PhiTerm::ALL
                        .iter()
                        .map(|&term| {
                            let step = if term.is_half_step() { 0.5 * h } else { h };
                            let w = term.weights();
                            sub.function_matrix(|lam| {
                                crate::phi::combine(w, |l| {
                                    phi_contour(l, lam * step, points, radius)
                                })
                            })
                        })
                        .collect();
                    sub
                });
                if !(worst <= COND_LIMIT) {
                    return Err(Error::NearlyDefective {
                        block: i,
                        cond: worst,
                    });
                }
                Ok((subs, worst))
            })
            .collect::<Result<Vec<_>>>()?;
        let cond_max = blocks.iter().map(|b| b.1).fold(0.0, f64::max);
        Ok(Self {
            h,
            points,
            radius,
            m: pencil.m(),
            n: pencil.n(),
            blocks: blocks.into_iter().map(|b| b.0).collect(),
            cond_max,
        })
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn contour_points(&self) -> usize {
        self.points
    }

    /// Largest per-block `cond(V)`.
    pub fn cond_max(&self) -> f64 {
        self.cond_max
    }

    /// Eigenvalues of `L_i`, even-wavenumber class first.
    pub fn eigenvalues(&self, block: usize) -> Vec<C64> {
        self.blocks[block]
            .iter()
            .flat_map(|s| s.values.iter().copied())
            .collect()
    }

    /// Dense `V f(hΛ) V⁻¹` for block `i`, embedded in `m × m`.
    pub fn block_function(&self, block: usize, f: impl Fn(C64) -> C64) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.m, self.m);
        for sub in &self.blocks[block] {
            let mat = sub.function_matrix(|lam| f(lam * self.h));
            for (a, &r) in sub.idx.iter().enumerate() {
                for (b, &c) in sub.idx.iter().enumerate() {
                    out[(r, c)] = mat[(a, b)];
                }
            }
        }
        out
    }

    /// Dense `φ_l(hL_i)` for block `i`.
    pub fn block_phi(&self, block: usize, l: usize) -> DMatrix<C64> {
        self.block_function(block, |z| phi_contour(l, z, self.points, self.radius))
    }

    /// `φ_l(hL) x`.
    pub fn phi_action(&self, l: usize, x: &CoeffGrid) -> CoeffGrid {
        self.map_blocks(x, |_, sub, xs| {
            let d = DVector::from_fn(xs.len(), |j, _| {
                phi_contour(l, sub.values[j] * self.h, self.points, self.radius)
            });
            &sub.vectors * (d.component_mul(&(&sub.inverse * xs)))
        })
    }

    fn map_blocks(
        &self,
        x: &CoeffGrid,
        f: impl Fn(usize, &SubBlock, &DVector<C64>) -> DVector<C64> + Sync,
    ) -> CoeffGrid {
        assert_eq!(
            x.shape(),
            (self.m, self.n),
            "coefficient grid does not match the precomputed data"
        );
        let mut out = CoeffGrid::zeros(x.spec());
        out.matrix_mut()
            .as_mut_slice()
            .par_chunks_mut(self.m)
            .enumerate()
            .with_min_len(crate::columns_per_task(self.m))
            .for_each(|(i, y)| {
                let col = x.column(i);
                for sub in &self.blocks[i] {
                    let xs = DVector::from_iterator(sub.idx.len(), sub.idx.iter().map(|&r| col[r]));
                    let ys = f(i, sub, &xs);
                    for (a, &r) in sub.idx.iter().enumerate() {
                        y[r] = ys[a];
                    }
                }
            });
        out
    }
}

impl PhiProvider<CoeffGrid> for EigPhiData {
    fn step_size(&self) -> f64 {
        self.h
    }

    fn apply(&self, term: PhiTerm, x: &CoeffGrid) -> Result<CoeffGrid> {
        let pos = PhiTerm::ALL
            .iter()
            .position(|t| *t == term)
            .expect("term listed in ALL");
        Ok(self.map_blocks(x, |_, sub, xs| &sub.terms[pos] * xs))
    }
}
