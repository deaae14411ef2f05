//! Dense eigendecomposition of small complex blocks via the complex Schur form.

use nalgebra::{DMatrix, DVector};

use crate::C64;

#[derive(Debug, Clone)]
pub(crate) struct EigenDecomposition {
    pub values: DVector<C64>,
    /// Unit-norm eigenvectors as columns.
    pub vectors: DMatrix<C64>,
    pub inverse: DMatrix<C64>,
}

impl EigenDecomposition {
    pub fn cond(&self) -> f64 {
        let s = self.vectors.clone().svd(false, false).singular_values;
        s.max() / s.min()
    }
}

/// `None` if the QR iteration does not converge or `V` is numerically singular.
pub(crate) fn eig(mat: DMatrix<C64>) -> Option<EigenDecomposition> {
    let dim = mat.nrows();
    let scale = mat
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let schur = nalgebra::Schur::try_new(mat, f64::EPSILON, 100 * dim.max(10))?;
    let (q, t) = schur.unpack();
    let values = DVector::from_fn(dim, |i, _| t[(i, i)]);

    // eigenvectors of the triangular factor by back substitution
    let tiny = f64::EPSILON * scale;
    let mut y = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        y[(k, k)] = C64::new(1.0, 0.0);
        let lk = t[(k, k)];
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - lk;
            if d.norm() < tiny {
                d = C64::new(tiny, 0.0);
            }
            y[(i, k)] = -acc / d;
        }
    }
    let mut vectors = q * y;
    for mut col in vectors.column_iter_mut() {
        let nrm = col.norm();
        col /= C64::new(nrm, 0.0);
    }
    let inverse = vectors.clone().try_inverse()?;
    if !inverse.iter().all(|z| z.is_finite()) {
        return None;
    }
    Some(EigenDecomposition {
        values,
        vectors,
        inverse,
    })
}
