//! Row/column index selections naming a candidate submatrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A sorted set of row indices and a sorted set of column indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl Selection {
    /// Builds a selection from index lists. Input order is irrelevant; indices
    /// are sorted and must be distinct and nonempty.
    pub fn new(mut rows: Vec<usize>, mut cols: Vec<usize>) -> Result<Self> {
        rows.sort_unstable();
        cols.sort_unstable();
        for (name, list) in [("row", &rows), ("column", &cols)] {
            if list.is_empty() {
                return Err(Error::InvalidSelection(format!("empty {name} set")));
            }
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidSelection(format!(
                    "duplicate {name} index"
                )));
            }
        }
        Ok(Selection { rows, cols })
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.cols.len()
    }

    pub fn contains_row(&self, i: usize) -> bool {
        self.rows.binary_search(&i).is_ok()
    }

    pub fn contains_col(&self, j: usize) -> bool {
        self.cols.binary_search(&j).is_ok()
    }

    /// Checks the selection against matrix dimensions.
    pub fn check_bounds(&self, rows: usize, cols: usize) -> Result<()> {
        if *self.rows.last().unwrap() >= rows || *self.cols.last().unwrap() >= cols {
            return Err(Error::InvalidSelection(format!(
                "selection exceeds {rows}x{cols} matrix bounds"
            )));
        }
        Ok(())
    }

    /// Characteristic 0/1 vector of the row set, of length `len`.
    pub fn row_indicator<T: Scalar>(&self, len: usize) -> Vec<T> {
        let mut v = vec![T::zero(); len];
        for &i in &self.rows {
            v[i] = T::one();
        }
        v
    }

    /// Characteristic 0/1 vector of the column set, of length `len`.
    pub fn col_indicator<T: Scalar>(&self, len: usize) -> Vec<T> {
        let mut v = vec![T::zero(); len];
        for &j in &self.cols {
            v[j] = T::one();
        }
        v
    }

    /// Dense boolean row mask.
    pub fn row_mask(&self, len: usize) -> Vec<bool> {
        let mut v = vec![false; len];
        for &i in &self.rows {
            v[i] = true;
        }
        v
    }

    /// Dense boolean column mask.
    pub fn col_mask(&self, len: usize) -> Vec<bool> {
        let mut v = vec![false; len];
        for &j in &self.cols {
            v[j] = true;
        }
        v
    }
}
