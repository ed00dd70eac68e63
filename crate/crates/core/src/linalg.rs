//! Dense matrix primitives used by the invariance criterion: eigenvector
//! alignment tests, structural predicates, similarity diagonalization and the
//! matrix exponential.
//!
//! All tolerance checks on matrix residuals are relative to `1 + ||M||_F` so
//! the same `tol` works across coefficient scales.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of testing whether a unit vector is an eigenvector of `M^T`.
///
/// `eigenvalue` is the Rayleigh quotient `(M^T v) . v` and `residual` is the
/// Euclidean norm of the component of `M^T v` orthogonal to `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub aligned: bool,
    pub eigenvalue: f64,
    pub residual: f64,
}

/// Structural report for a row subset of a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowsStructure {
    /// Every off-diagonal entry in the selected rows is (numerically) zero.
    pub offdiag_zero: bool,
    /// The diagonal entries of the selected rows agree with each other.
    pub equal_diagonal: bool,
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("matrix contains non-finite entries"));
    }
    Ok(())
}

fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::input(format!(
            "expected a nonempty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Tests whether `nu` is an eigenvector of `M^T`.
///
/// `nu` must be unit within 1e-12. The test is scale-aware: the vector is
/// declared aligned when the orthogonal residual of `M^T nu` against
/// `span{nu}` is at most `tol * (1 + ||M||_F)`.
pub fn eigen_align(m: &DMatrix<f64>, nu: &DVector<f64>, tol: f64) -> Result<AlignmentResult> {
    check_square(m)?;
    check_finite(m)?;
    if nu.len() != m.nrows() {
        return Err(Error::input(format!(
            "normal has length {} but matrix order is {}",
            nu.len(),
            m.nrows()
        )));
    }
    if nu.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("normal contains non-finite entries"));
    }
    if (nu.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::input(format!(
            "normal is not unit: ||nu|| = {}",
            nu.norm()
        )));
    }
    let w = m.transpose() * nu;
    let eigenvalue = w.dot(nu);
    let residual = (&w - nu * eigenvalue).norm();
    let aligned = residual <= tol * (1.0 + m.norm());
    Ok(AlignmentResult {
        aligned,
        eigenvalue,
        residual,
    })
}

/// Returns `Some(lambda)` when `M` equals `lambda * I` within tolerance,
/// taking `lambda = trace(M) / m`.
pub fn is_scalar(m: &DMatrix<f64>, tol: f64) -> Result<Option<f64>> {
    check_square(m)?;
    check_finite(m)?;
    let order = m.nrows();
    let lambda = m.trace() / order as f64;
    let deviation = (m - DMatrix::identity(order, order) * lambda).norm();
    if deviation <= tol * (1.0 + m.norm()) {
        Ok(Some(lambda))
    } else {
        Ok(None)
    }
}

/// Inspects the rows of `M` selected by the 0-based index set `rows`:
/// off-diagonal entries against `tol` (absolute) and the mutual spread of the
/// selected diagonal entries against `tol`.
pub fn rows_structure(m: &DMatrix<f64>, rows: &[usize], tol: f64) -> Result<RowsStructure> {
    check_square(m)?;
    check_finite(m)?;
    if rows.is_empty() {
        return Err(Error::input("row index set is empty"));
    }
    let order = m.nrows();
    if let Some(&bad) = rows.iter().find(|&&i| i >= order) {
        return Err(Error::input(format!(
            "row index {bad} out of range for order {order}"
        )));
    }
    let mut offdiag_zero = true;
    for &i in rows {
        for j in 0..order {
            if j != i && m[(i, j)].abs() > tol {
                offdiag_zero = false;
            }
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &i in rows {
        lo = lo.min(m[(i, i)]);
        hi = hi.max(m[(i, i)]);
    }
    Ok(RowsStructure {
        offdiag_zero,
        equal_diagonal: hi - lo <= tol,
    })
}

/// Computes `D~ = N^T M (N^T)^{-1}` where the columns of `normals` are the
/// cone normals, and returns its diagonal when the off-diagonal mass is below
/// `tol * (1 + ||M||_F)`. A `Some` return certifies the representation
/// `M = (N^T)^{-1} D N^T` to that tolerance.
pub fn similarity_diagonalize(
    m: &DMatrix<f64>,
    normals: &DMatrix<f64>,
    tol: f64,
) -> Result<Option<DVector<f64>>> {
    check_square(m)?;
    check_finite(m)?;
    check_square(normals)?;
    if normals.nrows() != m.nrows() {
        return Err(Error::input(format!(
            "normal matrix order {} does not match matrix order {}",
            normals.nrows(),
            m.nrows()
        )));
    }
    // D~^T = N^{-1} M^T N, so one LU solve against N covers the similarity.
    let lu = normals.clone().lu();
    let det = lu.determinant();
    if det.abs() <= 1e-10 {
        return Err(Error::geometry(format!(
            "cone normal matrix is numerically singular (|det| = {:.3e})",
            det.abs()
        )));
    }
    let rhs = m.transpose() * normals;
    let similar_t = lu
        .solve(&rhs)
        .ok_or_else(|| Error::geometry("cone normal matrix is numerically singular"))?;
    let similar = similar_t.transpose();
    let order = m.nrows();
    let mut offdiag_sq = 0.0;
    for i in 0..order {
        for j in 0..order {
            if i != j {
                offdiag_sq += similar[(i, j)] * similar[(i, j)];
            }
        }
    }
    if offdiag_sq.sqrt() <= tol * (1.0 + m.norm()) {
        Ok(Some(similar.diagonal()))
    } else {
        Ok(None)
    }
}

/// Matrix exponential of a complex square matrix (scaling-and-squaring Pade,
/// via nalgebra). Errors when the result overflows.
pub fn matrix_exponential(c: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    if c.nrows() != c.ncols() || c.nrows() == 0 {
        return Err(Error::input(format!(
            "expected a nonempty square matrix, got {}x{}",
            c.nrows(),
            c.ncols()
        )));
    }
    if c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::input("matrix contains non-finite entries"));
    }
    let e = c.exp();
    if e.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::numeric("matrix exponential overflowed"));
    }
    Ok(e)
}

/// Real matrix promoted to complex entries.
pub fn complexify(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}
