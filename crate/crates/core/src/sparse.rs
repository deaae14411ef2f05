//! Compressed sparse row storage for the small banded-plus-corner matrices
//! that appear in every Laplacian block.

use nalgebra::DMatrix;

use crate::C64;

/// Square complex CSR matrix. Column indices within a row are ascending and
/// unique; exact zeros are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Csr {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside {dim}x{dim}");
            rows[r].push((c, v));
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut i = 0;
            while i < row.len() {
                let c = row[i].0;
                let mut acc = C64::new(0.0, 0.0);
                while i < row.len() && row[i].0 == c {
                    acc += row[i].1;
                    i += 1;
                }
                if acc != C64::new(0.0, 0.0) {
                    cols.push(c);
                    vals.push(acc);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r)
            .find(|e| e.0 == c)
            .map_or(C64::new(0.0, 0.0), |e| e.1)
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            *out = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: C64, other: &Csr, b: C64) -> Csr {
        assert_eq!(self.dim, other.dim);
        Csr::from_triplets(
            self.dim,
            self.triplets()
                .map(|(r, c, v)| (r, c, a * v))
                .chain(other.triplets().map(|(r, c, v)| (r, c, b * v))),
        )
    }

    /// Multiplies column `c` by `d[c]`.
    pub fn scale_columns(&self, d: &[C64]) -> Csr {
        Csr::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (r, c, v * d[c])))
    }

    /// Principal submatrix on the given (ascending) index set.
    pub fn submatrix(&self, idx: &[usize]) -> Csr {
        let mut pos = vec![usize::MAX; self.dim];
        for (new, &old) in idx.iter().enumerate() {
            pos[old] = new;
        }
        Csr::from_triplets(
            idx.len(),
            idx.iter().enumerate().flat_map(|(new_r, &old_r)| {
                let pos = &pos;
                self.row(old_r)
                    .filter(move |(c, _)| pos[*c] != usize::MAX)
                    .map(move |(c, v)| (new_r, pos[c], v))
            }),
        )
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut d = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            d[(r, c)] = v;
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}
