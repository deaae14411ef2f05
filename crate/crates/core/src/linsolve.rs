//! LU factorization without pivoting for the shifted blocks `z·B_i + w·A_i`,
//! and blockwise solves in `O(nm)`.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::CoeffGrid;
use crate::laplacian::BlockPencil;
use crate::sparse::Csr;
use crate::C64;

/// Entries of `L` above this magnitude are treated as a failed factorization.
pub const GROWTH_LIMIT: f64 = 1e6;

/// Sparse no-pivot LU of one block. `L` is unit lower triangular and stored
/// without its diagonal; `U` rows start with the diagonal entry.
#[derive(Debug, Clone)]
pub struct SparseLu {
    dim: usize,
    lower: Vec<Vec<(usize, C64)>>,
    upper: Vec<Vec<(usize, C64)>>,
    growth: f64,
}

impl SparseLu {
    /// Row-by-row Doolittle elimination; fill-in is tracked structurally so
    /// entries that are never touched stay exactly zero.
    pub fn factor(a: &Csr, block: usize) -> Result<Self> {
        let dim = a.dim();
        let mut lower: Vec<Vec<(usize, C64)>> = Vec::with_capacity(dim);
        let mut upper: Vec<Vec<(usize, C64)>> = Vec::with_capacity(dim);
        let mut work = vec![C64::new(0.0, 0.0); dim];
        let mut pattern = BTreeSet::new();
        let mut growth: f64 = 0.0;
        let scale = a.max_abs();

        for i in 0..dim {
            for (c, v) in a.row(i) {
                work[c] = v;
                pattern.insert(c);
            }
            let mut lrow = Vec::new();
            while let Some(&k) = pattern.iter().next() {
                if k >= i {
                    break;
                }
                pattern.remove(&k);
                let lik = work[k] / upper[k][0].1;
                work[k] = C64::new(0.0, 0.0);
                growth = growth.max(lik.norm());
                for &(c, u) in &upper[k][1..] {
                    work[c] -= lik * u;
                    pattern.insert(c);
                }
                lrow.push((k, lik));
            }
            let mut urow = Vec::with_capacity(pattern.len());
            let pivot = if pattern.contains(&i) {
                work[i]
            } else {
                C64::new(0.0, 0.0)
            };
            if pivot.norm() <= f64::EPSILON * scale || !pivot.is_finite() {
                return Err(Error::FactorizationBreakdown {
                    block,
                    row: i,
                    pivot: pivot.norm(),
                });
            }
            for &c in &pattern {
                urow.push((c, work[c]));
                work[c] = C64::new(0.0, 0.0);
            }
            pattern.clear();
            lower.push(lrow);
            upper.push(urow);
        }
        if growth > GROWTH_LIMIT {
            return Err(Error::PivotGrowth { block, growth });
        }
        Ok(Self {
            dim,
            lower,
            upper,
            growth,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest `|L_ij|`.
    pub fn growth(&self) -> f64 {
        self.growth
    }

    /// Nonzeros of `L` (including the unit diagonal) and of `U`.
    pub fn nnz(&self) -> (usize, usize) {
        (
            self.dim + self.lower.iter().map(Vec::len).sum::<usize>(),
            self.upper.iter().map(Vec::len).sum(),
        )
    }

    pub fn lower_entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.lower
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v)))
    }

    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.upper
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v)))
    }

    pub fn solve_in_place(&self, x: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        for i in 0..self.dim {
            let mut acc = x[i];
            for &(c, l) in &self.lower[i] {
                acc -= l * x[c];
            }
            x[i] = acc;
        }
        for i in (0..self.dim).rev() {
            let row = &self.upper[i];
            let mut acc = x[i];
            for &(c, u) in &row[1..] {
                acc -= u * x[c];
            }
            x[i] = acc / row[0].1;
        }
    }
}

/// Row diagonal dominance `|a_ii| >= Σ_{j≠i} |a_ij|` for every row.
pub fn is_diagonally_dominant(a: &Csr) -> bool {
    (0..a.dim()).all(|r| {
        let (mut diag, mut off) = (0.0, 0.0);
        for (c, v) in a.row(r) {
            if c == r {
                diag = v.norm();
            } else {
                off += v.norm();
            }
        }
        diag >= off
    })
}

/// Factors of `z·B_i + w·A_i` for every block of a pencil.
#[derive(Debug, Clone)]
pub struct BlockLu {
    z: C64,
    w: C64,
    spec: (usize, usize),
    blocks: Vec<SparseLu>,
    non_dominant: Vec<usize>,
}

impl BlockLu {
    pub fn factor(pencil: &BlockPencil, z: C64, w: C64) -> Result<Self> {
        let mats = (0..pencil.n())
            .map(|i| pencil.shifted_block(i, z, w))
            .collect();
        Self::from_matrices(pencil, z, w, mats)
    }

    /// Factors caller-supplied block matrices (for example with a constraint
    /// row substituted) while recording the shift they stand for.
    pub fn from_matrices(pencil: &BlockPencil, z: C64, w: C64, mats: Vec<Csr>) -> Result<Self> {
        if mats.len() != pencil.n() || mats.iter().any(|a| a.dim() != pencil.m()) {
            return Err(Error::FactorMismatch(
                "block matrices do not match the pencil",
            ));
        }
        let non_dominant: Vec<usize> = mats
            .iter()
            .enumerate()
            .filter(|(_, a)| !is_diagonally_dominant(a))
            .map(|(i, _)| i)
            .collect();
        if !non_dominant.is_empty() {
            log::debug!("z = {z}, w = {w}: blocks without diagonal dominance: {non_dominant:?}");
        }
        let blocks = mats
            .par_iter()
            .enumerate()
            .map(|(i, a)| SparseLu::factor(a, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            z,
            w,
            spec: (pencil.m(), pencil.n()),
            blocks,
            non_dominant,
        })
    }

    pub fn shift(&self) -> (C64, C64) {
        (self.z, self.w)
    }

    pub fn block(&self, i: usize) -> &SparseLu {
        &self.blocks[i]
    }

    /// Blocks whose matrix is not row diagonally dominant.
    pub fn non_dominant_blocks(&self) -> &[usize] {
        &self.non_dominant
    }

    pub fn max_growth(&self) -> f64 {
        self.blocks.iter().map(SparseLu::growth).fold(0.0, f64::max)
    }

    /// Solves `(z + w·L)x = b`, i.e. `(z·B_i + w·A_i)x_i = B_i b_i` per block.
    pub fn solve(&self, pencil: &BlockPencil, b: &CoeffGrid) -> Result<CoeffGrid> {
        self.check(pencil, b)?;
        let mut x = pencil.premultiply(b);
        self.solve_in_place(&mut x);
        Ok(x)
    }

    /// Solves `(z·B_i + w·A_i)x_i = r_i` for an already premultiplied
    /// right-hand side `r`.
    pub fn solve_premultiplied(&self, pencil: &BlockPencil, rhs: &CoeffGrid) -> Result<CoeffGrid> {
        self.check(pencil, rhs)?;
        let mut x = rhs.clone();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    pub(crate) fn solve_in_place(&self, x: &mut CoeffGrid) {
        let m = self.spec.0;
        x.matrix_mut()
            .as_mut_slice()
            .par_chunks_mut(m)
            .zip(self.blocks.par_iter())
            .with_min_len(crate::columns_per_task(m))
            .for_each(|(col, lu)| lu.solve_in_place(col));
    }

    fn check(&self, pencil: &BlockPencil, b: &CoeffGrid) -> Result<()> {
        if self.spec != (pencil.m(), pencil.n()) {
            return Err(Error::FactorMismatch(
                "factors were built for a different pencil",
            ));
        }
        b.check_shape(pencil.spec())
    }
}
