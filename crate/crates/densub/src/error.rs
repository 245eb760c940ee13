//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("coordinate ({row}, {col}) out of range for a {rows}x{cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("invalid selection: {0}")]
    InvalidSelection(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("SVD did not converge for a {rows}x{cols} matrix within {max_sweeps} sweeps")]
    SvdFailure {
        rows: usize,
        cols: usize,
        max_sweeps: usize,
    },

    #[error("solver diverged (non-finite iterate) at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error(
        "enumeration budget exceeded: C(M,m)*C(N,n) = {product:.3e} > {budget:.3e}; \
         use a smaller instance"
    )]
    BudgetExceeded { product: f64, budget: f64 },

    #[error("degenerate certificate column {col}: every selected row is nonzero (m = nu_j)")]
    DegenerateColumn { col: usize },

    #[error("degenerate certificate row {row}: every selected column is nonzero (n = mu_i)")]
    DegenerateRow { row: usize },
}
