//! Binary input matrices with an implicit zero support.
//!
//! The zero support (the index set of zero entries) is never materialized;
//! only the nonzero coordinates are stored, sorted row-major.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A 0/1 matrix stored as its sorted, deduplicated nonzero coordinate list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    nonzeros: Vec<(usize, usize)>,
    row_ptr: Vec<usize>,
}

impl BinaryMatrix {
    /// Builds a matrix from nonzero coordinates. Duplicates collapse to one
    /// entry (set semantics); out-of-range coordinates are an error.
    pub fn new(
        rows: usize,
        cols: usize,
        coords: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(
                "matrix dimensions must be positive".into(),
            ));
        }
        let mut nonzeros: Vec<(usize, usize)> = coords.into_iter().collect();
        for &(i, j) in &nonzeros {
            if i >= rows || j >= cols {
                return Err(Error::IndexOutOfRange {
                    row: i,
                    col: j,
                    rows,
                    cols,
                });
            }
        }
        nonzeros.sort_unstable();
        nonzeros.dedup();

        let mut row_ptr = vec![0usize; rows + 1];
        for &(i, _) in &nonzeros {
            row_ptr[i + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }

        Ok(BinaryMatrix {
            rows,
            cols,
            nonzeros,
            row_ptr,
        })
    }

    pub fn all_ones(rows: usize, cols: usize) -> Self {
        let coords = (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j)));
        Self::new(rows, cols, coords).expect("all-ones coordinates are valid")
    }

    pub fn all_zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, std::iter::empty())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.nonzeros.len()
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        let slice = self.row_nonzeros(row);
        slice.binary_search(&(row, col)).is_ok()
    }

    /// Sorted nonzero coordinates, row-major.
    pub fn nonzeros(&self) -> &[(usize, usize)] {
        &self.nonzeros
    }

    /// Nonzero coordinates of one row.
    pub fn row_nonzeros(&self, row: usize) -> &[(usize, usize)] {
        &self.nonzeros[self.row_ptr[row]..self.row_ptr[row + 1]]
    }

    pub fn row_count(&self, row: usize) -> usize {
        self.row_ptr[row + 1] - self.row_ptr[row]
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && self
                .nonzeros
                .iter()
                .all(|&(i, j)| i == j || self.contains(j, i))
    }

    pub fn has_unit_diagonal(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| self.contains(i, i))
    }

    /// Dense 0/1 rendering.
    pub fn to_dense<T: Scalar>(&self) -> DenseMatrix<T> {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for &(i, j) in &self.nonzeros {
            out[(i, j)] = T::one();
        }
        out
    }

    /// Dense boolean mask of the nonzero set.
    pub fn to_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.rows * self.cols];
        for &(i, j) in &self.nonzeros {
            mask[i * self.cols + j] = true;
        }
        mask
    }
}

/// Builds the perturbed adjacency matrix of a graph: ones on the diagonal and
/// at both (i, j) and (j, i) for every edge. Self-loops are absorbed by the
/// diagonal.
pub fn perturbed_adjacency(node_count: usize, edges: &[(usize, usize)]) -> Result<BinaryMatrix> {
    if node_count == 0 {
        return Err(Error::InvalidArgument(
            "node count must be positive".into(),
        ));
    }
    for &(a, b) in edges {
        if a >= node_count || b >= node_count {
            return Err(Error::IndexOutOfRange {
                row: a,
                col: b,
                rows: node_count,
                cols: node_count,
            });
        }
    }
    let coords = (0..node_count)
        .map(|i| (i, i))
        .chain(edges.iter().flat_map(|&(a, b)| [(a, b), (b, a)]));
    BinaryMatrix::new(node_count, node_count, coords)
}
