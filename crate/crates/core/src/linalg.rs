//! Small dense helpers over `nalgebra`.

use nalgebra::{DMatrix, DVector};

/// Builds a row-major matrix from equal-length rows.
pub fn matrix_from_rows<R: AsRef<[f64]>>(rows: &[R], cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols, |i, j| rows[i].as_ref()[j])
}

/// Column means of `x`.
pub fn column_means(x: &DMatrix<f64>) -> DVector<f64> {
    let n = x.nrows().max(1) as f64;
    DVector::from_iterator(x.ncols(), x.column_iter().map(|c| c.sum() / n))
}

/// Subtracts `means` from every row in place.
pub fn center_columns(x: &mut DMatrix<f64>, means: &DVector<f64>) {
    for (j, mut col) in x.column_iter_mut().enumerate() {
        col.add_scalar_mut(-means[j]);
    }
}

/// Solves `a z = b` for symmetric positive definite `a` via Cholesky.
/// Returns `None` when the factorization fails or the answer is not finite.
pub fn solve_spd(a: DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let chol = a.cholesky()?;
    let z = chol.solve(b);
    z.iter().all(|v| v.is_finite()).then_some(z)
}

/// Reciprocal condition estimate from the Cholesky diagonal; tiny values mean
/// the Gram matrix is numerically singular even if the factorization ran.
pub fn spd_is_well_conditioned(a: &DMatrix<f64>) -> bool {
    let Some(chol) = a.clone().cholesky() else {
        return false;
    };
    let l = chol.l();
    let diag: Vec<f64> = (0..l.nrows()).map(|i| l[(i, i)]).collect();
    let max = diag.iter().cloned().fold(0.0_f64, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    max > 0.0 && (min / max).powi(2) > 1e-13
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
