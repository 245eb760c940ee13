//! The rank-one-plus-correction representation of a candidate submatrix.
//!
//! A selection (U, V) is represented by the pair (X, Y): X is the 0/1 outer
//! product of the characteristic vectors of U and V, and Y = P_Omega(X) keeps
//! exactly the entries of X sitting on zero entries of the data matrix, i.e.
//! the disagreements the selection would have to explain away.

use num_rational::Rational64;

use crate::binary::BinaryMatrix;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::selection::Selection;

/// The pair (X, Y) with X a 0/1 block indicator and Y = P_Omega(X).
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixRep<T> {
    pub x: DenseMatrix<T>,
    pub y: DenseMatrix<T>,
}

/// P_Omega: keeps entries of `d` at zero entries of `a`, zeroes the rest.
pub fn project_onto_support<T: Scalar>(
    d: &DenseMatrix<T>,
    a: &BinaryMatrix,
) -> Result<DenseMatrix<T>> {
    if d.shape() != a.shape() {
        return Err(Error::DimensionMismatch {
            left_rows: d.rows(),
            left_cols: d.cols(),
            right_rows: a.rows(),
            right_cols: a.cols(),
        });
    }
    let mut out = d.clone();
    for &(i, j) in a.nonzeros() {
        out[(i, j)] = T::zero();
    }
    Ok(out)
}

/// Builds the matrix representation of `sel` against the data matrix `a`.
pub fn matrix_representation<T: Scalar>(
    a: &BinaryMatrix,
    sel: &Selection,
) -> Result<MatrixRep<T>> {
    sel.check_bounds(a.rows(), a.cols())?;
    let u = sel.row_indicator::<T>(a.rows());
    let v = sel.col_indicator::<T>(a.cols());
    let x = DenseMatrix::outer(&u, &v);
    let y = project_onto_support(&x, a)?;
    Ok(MatrixRep { x, y })
}

impl<T: Scalar> MatrixRep<T> {
    /// Recovers the selection from the block indicator X.
    pub fn selection(&self) -> Selection {
        let half = T::from_f64(0.5);
        let rows = (0..self.x.rows())
            .filter(|&i| self.x.row(i).iter().any(|&e| e > half))
            .collect();
        let cols = (0..self.x.cols())
            .filter(|&j| (0..self.x.rows()).any(|i| self.x[(i, j)] > half))
            .collect();
        Selection::new(rows, cols).expect("block indicator has nonempty support")
    }
}

/// Density of the subgraph induced by `sel` on a perturbed adjacency matrix:
/// (C(k,2) - missing_edges) / k, exactly.
///
/// Requires a square symmetric matrix with all-ones diagonal and a selection
/// with identical row and column sets.
pub fn subgraph_density(a: &BinaryMatrix, sel: &Selection) -> Result<Rational64> {
    if !a.is_symmetric() || !a.has_unit_diagonal() {
        return Err(Error::InvalidArgument(
            "density requires a symmetric matrix with unit diagonal".into(),
        ));
    }
    if sel.rows() != sel.cols() {
        return Err(Error::InvalidSelection(
            "density requires identical row and column sets".into(),
        ));
    }
    sel.check_bounds(a.rows(), a.cols())?;

    let k = sel.row_count() as i64;
    // Zero entries of A inside the block; with a unit diagonal these are
    // exactly the ordered non-adjacent pairs, so each missing edge counts twice.
    let mut zero_count: i64 = 0;
    for &i in sel.rows() {
        for &j in sel.cols() {
            if !a.contains(i, j) {
                zero_count += 1;
            }
        }
    }
    Ok(Rational64::new(k * (k - 1) - zero_count, 2 * k))
}
