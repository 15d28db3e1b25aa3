//! Small dense helpers on flat row-major buffers.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let e = x - y;
            e * e
        })
        .sum()
}

/// Builds `scale * sigma + delta I` from a flat `d x d` buffer.
fn shifted(sigma: &[f64], d: usize, scale: f64, delta: f64) -> DMatrix<f64> {
    let mut m = DMatrix::from_row_slice(d, d, sigma);
    m *= scale;
    for i in 0..d {
        m[(i, i)] += delta;
    }
    m
}

/// Cholesky factor of `scale * sigma + delta I` with its log-determinant.
#[derive(Clone)]
pub(crate) struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
    pub logdet: f64,
}

impl SpdFactor {
    pub(crate) fn new(sigma: &[f64], d: usize, scale: f64, delta: f64) -> Option<Self> {
        let chol = Cholesky::new(shifted(sigma, d, scale, delta))?;
        let l = chol.l_dirty();
        let logdet = 2.0 * (0..d).map(|i| l[(i, i)].ln()).sum::<f64>();
        logdet.is_finite().then_some(Self { chol, logdet })
    }

    /// `v^T A^-1 v` for the factored matrix `A`.
    pub(crate) fn inv_quad(&self, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        match self.chol.l_dirty().solve_lower_triangular(&v) {
            Some(z) => z.norm_squared(),
            None => f64::INFINITY,
        }
    }
}

/// `ln |scale * sigma + delta I|`, falling back to clamped eigenvalues when the
/// matrix is not numerically positive definite.
pub(crate) fn logdet_shifted(sigma: &[f64], d: usize, scale: f64, delta: f64) -> f64 {
    if let Some(f) = SpdFactor::new(sigma, d, scale, delta) {
        return f.logdet;
    }
    SymmetricEigen::new(shifted(sigma, d, scale, delta))
        .eigenvalues
        .iter()
        .map(|l| l.max(1e-300).ln())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn logdet_of_diagonal() {
        let s = [2.0, 0.0, 0.0, 3.0];
        assert_relative_eq!(logdet_shifted(&s, 2, 1.0, 0.0), 6f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(logdet_shifted(&s, 2, 0.5, 1.0), (2.0f64 * 2.5).ln(), epsilon = 1e-14);
    }

    #[test]
    fn singular_falls_back_to_eigenvalues() {
        let s = [1.0, 1.0, 1.0, 1.0];
        let ld = logdet_shifted(&s, 2, 1.0, -1e-3);
        assert!(ld.is_finite());
    }

    #[test]
    fn rank_one_update_matches_refactor() {
        let s = [2.0, 0.5, 0.1, 0.5, 1.5, 0.2, 0.1, 0.2, 1.0];
        let v = [0.3, -1.2, 0.7];
        let f = SpdFactor::new(&s, 3, 1.0, 0.01).unwrap();
        let b = 0.25;
        let lemma = f.logdet + (b * f.inv_quad(&v)).ln_1p();
        let mut t = s;
        for i in 0..3 {
            for j in 0..3 {
                t[i * 3 + j] += b * v[i] * v[j];
            }
        }
        assert_relative_eq!(lemma, logdet_shifted(&t, 3, 1.0, 0.01), epsilon = 1e-12);
    }
}
