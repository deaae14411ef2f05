//! `Δu = f` on the sphere with the zero-mean normalization.

use std::f64::consts::PI;

use crate::dfs::latitude_weights;
use crate::error::Result;
use crate::fourier::{shifted_index, CoeffGrid, GridSpec};
use crate::laplacian::BlockPencil;
use crate::linsolve::BlockLu;
use crate::sparse::Csr;
use crate::C64;

/// Factored Poisson operator. In the `k = 0` block the `j = 0` row is
/// replaced by the discrete mean functional `2π Σ_j w_j û_{j0}`.
#[derive(Debug, Clone)]
pub struct PoissonSolver {
    pencil: BlockPencil,
    lu: BlockLu,
}

impl PoissonSolver {
    pub fn new(spec: GridSpec) -> Result<Self> {
        let pencil = BlockPencil::new(spec, C64::new(1.0, 0.0))?;
        let (m, n) = (pencil.m(), pencil.n());
        let (z, w) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        let k0 = shifted_index(0, n).expect("n >= 2");
        let j0 = shifted_index(0, m).expect("m >= 2");
        let mats = (0..n)
            .map(|i| {
                let a = pencil.shifted_block(i, z, w);
                if i == k0 {
                    with_mean_row(&a, j0)
                } else {
                    a
                }
            })
            .collect();
        let lu = BlockLu::from_matrices(&pencil, z, w, mats)?;
        Ok(Self { pencil, lu })
    }

    pub fn pencil(&self) -> &BlockPencil {
        &self.pencil
    }

    pub fn solve(&self, f: &CoeffGrid) -> Result<CoeffGrid> {
        let mut rhs = self.pencil.premultiply(f);
        let (m, n) = (self.pencil.m(), self.pencil.n());
        rhs[(shifted_index(0, m).unwrap(), shifted_index(0, n).unwrap())] = C64::new(0.0, 0.0);
        self.lu.solve_premultiplied(&self.pencil, &rhs)
    }
}

fn with_mean_row(a: &Csr, row: usize) -> Csr {
    let weights = latitude_weights(a.dim());
    Csr::from_triplets(
        a.dim(),
        a.triplets().filter(|&(r, _, _)| r != row).chain(
            weights
                .into_iter()
                .enumerate()
                .map(|(c, w)| (row, c, 2.0 * PI * w)),
        ),
    )
}

/// Solves `Δu = f` with `∫u = 0`.
pub fn solve_poisson(f: &CoeffGrid) -> Result<CoeffGrid> {
    PoissonSolver::new(f.spec())?.solve(f)
}
