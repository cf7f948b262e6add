use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value cutoff below which a design is treated as rank deficient.
const RANK_TOL: f64 = 1e-10;

/// Ordinary least squares `min ‖X·β − y‖₂` via SVD. `rows` holds the design
/// rows, each of length `cols`.
pub(crate) fn least_squares(rows: &[Vec<f64>], y: &[f64], cols: usize) -> Result<Vec<f64>> {
    if rows.len() < cols {
        return Err(Error::DegenerateFit(format!(
            "{} observations for {} unknowns",
            rows.len(),
            cols
        )));
    }
    let x = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = x.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin / smax < RANK_TOL {
        return Err(Error::DegenerateFit(format!(
            "rank-deficient design (singular values {smin:e} / {smax:e})"
        )));
    }
    let beta = svd
        .solve(&b, smax * f64::EPSILON)
        .map_err(|e| Error::DegenerateFit(e.to_string()))?;
    Ok(beta.iter().copied().collect())
}
