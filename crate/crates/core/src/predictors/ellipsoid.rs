//! Linear maximization over the intersection of an ellipsoid and the simplex.
//!
//! For `A` positive definite and `sqrt(radius) < sigma(A) min_i min(p_i, 1 - p_i)`,
//! with `sigma(A)^2` the smallest eigenvalue of `A`, the ellipsoid
//! `{q : (q - p)' A (q - p) <= radius}` meets the hyperplane `e'q = 1` only
//! inside the simplex, so
//!
//! ```text
//! max  l'q   = l'p + sqrt(radius * g)
//! argmax     = p + sqrt(radius / g) (A^-1 l - (e'A^-1 l / e'A^-1 e) A^-1 e)
//! g          = l'A^-1 l - (e'A^-1 l)^2 / e'A^-1 e
//! ```

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problem::dot;
use crate::simplex::{check_dim, Distribution};

/// Returns `(value, argmax)`.
///
/// A loss row proportional to the all-ones vector has constant cost on the
/// hyperplane; `(cost(p), p)` is returned for it.
pub fn ellipsoid_linear_max(
    loss_row: &[f64],
    p: &Distribution,
    a_matrix: &DMatrix<f64>,
    radius: f64,
) -> Result<(f64, Distribution)> {
    let d = p.dim();
    check_dim(loss_row.len(), d)?;
    if a_matrix.nrows() != d || a_matrix.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: a_matrix.nrows().max(a_matrix.ncols()),
        });
    }
    if radius.is_nan() || radius < 0.0 {
        return Err(Error::InvalidArgument(format!("radius must be >= 0, got {radius}")));
    }
    let base = dot(loss_row, p.weights());
    let chol = a_matrix.clone().cholesky().ok_or(Error::SingularMatrix)?;
    let lambda_min = a_matrix
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !(lambda_min > 0.0) {
        return Err(Error::SingularMatrix);
    }
    let lhs = radius.sqrt();
    let rhs = lambda_min.sqrt() * p.margin();
    if !(lhs < rhs) && radius > 0.0 {
        return Err(Error::ConditionViolated { lhs, rhs });
    }

    let first = loss_row[0];
    let scale = loss_row.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if radius == 0.0 || loss_row.iter().all(|v| (v - first).abs() <= 1e-15 * scale) {
        return Ok((base, p.clone()));
    }

    let l = DVector::from_column_slice(loss_row);
    let e = DVector::from_element(d, 1.0);
    let a_inv_l = chol.solve(&l);
    let a_inv_e = chol.solve(&e);
    let e_a_l = e.dot(&a_inv_l);
    let e_a_e = e.dot(&a_inv_e);
    let gamma = l.dot(&a_inv_l) - e_a_l * e_a_l / e_a_e;
    if !(gamma > 0.0) {
        return Ok((base, p.clone()));
    }
    let direction = &a_inv_l - &a_inv_e * (e_a_l / e_a_e);
    let step = (radius / gamma).sqrt();
    let q: Vec<f64> = p
        .weights()
        .iter()
        .zip(direction.iter())
        .map(|(pi, di)| pi + step * di)
        .collect();
    Ok((base + (radius * gamma).sqrt(), Distribution::new(q)?))
}

/// `diag(1 / (2 p_i))`, the matrix of the local ellipsoid norm at `p`.
pub fn ellipsoid_norm_matrix(p: &Distribution) -> Result<DMatrix<f64>> {
    p.require_interior()?;
    Ok(DMatrix::from_diagonal(&DVector::from_iterator(
        p.dim(),
        p.weights().iter().map(|w| 0.5 / w),
    )))
}
