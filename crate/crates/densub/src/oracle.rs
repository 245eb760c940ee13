//! Exhaustive ground-truth solvers for the densest submatrix and densest
//! k-subgraph problems on small instances. These exist to check the convex
//! solver, so they enumerate every candidate and never approximate.

use crate::binary::BinaryMatrix;
use crate::error::{Error, Result};
use crate::selection::Selection;

/// Default cap on the number of enumerated (row subset, column subset) pairs.
pub const DEFAULT_ENUMERATION_BUDGET: f64 = 1e8;

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct OracleResult {
    /// Lexicographically smallest maximizer.
    pub best: Selection,
    /// Nonzero count (submatrix) or edge count (subgraph) it attains.
    pub best_count: usize,
    /// Number of selections attaining `best_count`.
    pub optima_count: u64,
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Exact densest m x n-submatrix by full enumeration under the default budget.
pub fn brute_force_densest(a: &BinaryMatrix, m: usize, n: usize) -> Result<OracleResult> {
    brute_force_densest_with_budget(a, m, n, DEFAULT_ENUMERATION_BUDGET)
}

/// Exact densest m x n-submatrix with an explicit enumeration budget on
/// C(M,m) * C(N,n).
pub fn brute_force_densest_with_budget(
    a: &BinaryMatrix,
    m: usize,
    n: usize,
    budget: f64,
) -> Result<OracleResult> {
    let (rows, cols) = a.shape();
    if m == 0 || m > rows || n == 0 || n > cols {
        return Err(Error::InvalidArgument(format!(
            "block {m}x{n} out of range for a {rows}x{cols} matrix"
        )));
    }
    let product = binomial(rows, m) * binomial(cols, n);
    if product > budget {
        return Err(Error::BudgetExceeded { product, budget });
    }

    let mut search = SubmatrixSearch {
        a,
        m,
        n,
        col_counts: vec![0usize; cols],
        chosen_rows: Vec::with_capacity(m),
        chosen_cols: Vec::with_capacity(n),
        best_count: 0,
        best: None,
        optima_count: 0,
    };
    search.recurse_rows(0);

    let best_cols_sel = search.best.expect("at least one candidate enumerated");
    Ok(OracleResult {
        best: best_cols_sel,
        best_count: search.best_count,
        optima_count: search.optima_count,
    })
}

struct SubmatrixSearch<'a> {
    a: &'a BinaryMatrix,
    m: usize,
    n: usize,
    col_counts: Vec<usize>,
    chosen_rows: Vec<usize>,
    chosen_cols: Vec<usize>,
    best_count: usize,
    best: Option<Selection>,
    optima_count: u64,
}

impl SubmatrixSearch<'_> {
    fn recurse_rows(&mut self, start: usize) {
        if self.chosen_rows.len() == self.m {
            self.scan_columns();
            return;
        }
        let needed = self.m - self.chosen_rows.len();
        // Lexicographic enumeration keeps the first maximizer lexicographically
        // smallest.
        for i in start..=(self.a.rows() - needed) {
            for &(_, j) in self.a.row_nonzeros(i) {
                self.col_counts[j] += 1;
            }
            self.chosen_rows.push(i);
            self.recurse_rows(i + 1);
            self.chosen_rows.pop();
            for &(_, j) in self.a.row_nonzeros(i) {
                self.col_counts[j] -= 1;
            }
        }
    }

    fn scan_columns(&mut self) {
        // Upper bound for this row set: the n largest column counts. Skipping
        // is only safe when strictly below the incumbent, so tie counting is
        // unaffected.
        let mut sorted = self.col_counts.clone();
        sorted.sort_unstable_by(|x, y| y.cmp(x));
        let bound: usize = sorted[..self.n].iter().sum();
        if self.best.is_some() && bound < self.best_count {
            return;
        }
        self.recurse_cols(0, 0);
    }

    fn recurse_cols(&mut self, start: usize, sum: usize) {
        if self.chosen_cols.len() == self.n {
            self.record(sum);
            return;
        }
        let needed = self.n - self.chosen_cols.len();
        for j in start..=(self.a.cols() - needed) {
            self.chosen_cols.push(j);
            self.recurse_cols(j + 1, sum + self.col_counts[j]);
            self.chosen_cols.pop();
        }
    }

    fn record(&mut self, count: usize) {
        if self.best.is_none() || count > self.best_count {
            self.best_count = count;
            self.best = Some(
                Selection::new(self.chosen_rows.clone(), self.chosen_cols.clone())
                    .expect("enumerated subsets are valid selections"),
            );
            self.optima_count = 1;
        } else if count == self.best_count {
            self.optima_count += 1;
        }
    }
}

/// Exact densest k-subgraph (maximum edges over k-subsets, rows = columns) by
/// full enumeration. The matrix must be symmetric; diagonal entries are
/// ignored, off-diagonal nonzero pairs count as one edge.
pub fn brute_force_densest_subgraph(a: &BinaryMatrix, k: usize) -> Result<OracleResult> {
    brute_force_densest_subgraph_with_budget(a, k, DEFAULT_ENUMERATION_BUDGET)
}

pub fn brute_force_densest_subgraph_with_budget(
    a: &BinaryMatrix,
    k: usize,
    budget: f64,
) -> Result<OracleResult> {
    if !a.is_symmetric() {
        return Err(Error::InvalidArgument(
            "subgraph oracle requires a symmetric matrix".into(),
        ));
    }
    let nodes = a.rows();
    if k == 0 || k > nodes {
        return Err(Error::InvalidArgument(format!(
            "k = {k} out of range for {nodes} nodes"
        )));
    }
    let product = binomial(nodes, k);
    if product > budget {
        return Err(Error::BudgetExceeded { product, budget });
    }

    let mut search = SubgraphSearch {
        a,
        k,
        chosen: Vec::with_capacity(k),
        best_count: 0,
        best: None,
        optima_count: 0,
    };
    search.recurse(0, 0);

    let best = search.best.expect("at least one candidate enumerated");
    Ok(OracleResult {
        best,
        best_count: search.best_count,
        optima_count: search.optima_count,
    })
}

struct SubgraphSearch<'a> {
    a: &'a BinaryMatrix,
    k: usize,
    chosen: Vec<usize>,
    best_count: usize,
    best: Option<Selection>,
    optima_count: u64,
}

impl SubgraphSearch<'_> {
    fn recurse(&mut self, start: usize, edges: usize) {
        if self.chosen.len() == self.k {
            if self.best.is_none() || edges > self.best_count {
                self.best_count = edges;
                self.best = Some(
                    Selection::new(self.chosen.clone(), self.chosen.clone())
                        .expect("enumerated subsets are valid selections"),
                );
                self.optima_count = 1;
            } else if edges == self.best_count {
                self.optima_count += 1;
            }
            return;
        }
        let needed = self.k - self.chosen.len();
        for v in start..=(self.a.rows() - needed) {
            let added = self
                .chosen
                .iter()
                .filter(|&&u| self.a.contains(u, v))
                .count();
            self.chosen.push(v);
            self.recurse(v + 1, edges + added);
            self.chosen.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binary::perturbed_adjacency;

    #[test]
    fn planted_perfect_block_is_unique_optimum() {
        let coords = [(1, 2), (1, 3), (1, 4), (4, 2), (4, 3), (4, 4)];
        let a = BinaryMatrix::new(6, 6, coords).unwrap();
        let result = brute_force_densest(&a, 2, 3).unwrap();
        assert_eq!(result.best_count, 6);
        assert_eq!(result.optima_count, 1);
        assert_eq!(result.best.rows(), &[1, 4]);
        assert_eq!(result.best.cols(), &[2, 3, 4]);
    }

    #[test]
    fn all_ones_counts_every_selection() {
        let a = BinaryMatrix::all_ones(5, 4);
        let result = brute_force_densest(&a, 2, 2).unwrap();
        assert_eq!(result.best_count, 4);
        assert_eq!(result.optima_count, 10 * 6);
        assert_eq!(result.best.rows(), &[0, 1]);
        assert_eq!(result.best.cols(), &[0, 1]);
    }

    #[test]
    fn budget_guard_reports_product() {
        let a = BinaryMatrix::all_zeros(30, 30).unwrap();
        match brute_force_densest_with_budget(&a, 15, 15, 1e6) {
            Err(Error::BudgetExceeded { product, .. }) => {
                assert!(product > 1e6);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn oracle_beats_any_specific_selection() {
        let a = BinaryMatrix::new(
            7,
            7,
            [
                (0, 0),
                (0, 3),
                (1, 1),
                (2, 5),
                (3, 3),
                (3, 4),
                (4, 3),
                (4, 4),
                (6, 2),
            ],
        )
        .unwrap();
        let result = brute_force_densest(&a, 2, 2).unwrap();
        // The 2x2 all-ones block at rows {3,4} x cols {3,4}.
        assert_eq!(result.best_count, 4);
        let specific = Selection::new(vec![0, 1], vec![0, 1]).unwrap();
        let count = specific
            .rows()
            .iter()
            .flat_map(|&i| specific.cols().iter().map(move |&j| (i, j)))
            .filter(|&(i, j)| a.contains(i, j))
            .count();
        assert!(result.best_count >= count);
    }

    #[test]
    fn clique_is_found() {
        let clique_edges = [(2, 4), (2, 5), (4, 5)];
        let a = perturbed_adjacency(8, &clique_edges).unwrap();
        let result = brute_force_densest_subgraph(&a, 3).unwrap();
        assert_eq!(result.best_count, 3);
        assert_eq!(result.best.rows(), &[2, 4, 5]);
        assert_eq!(result.optima_count, 1);
    }

    #[test]
    fn empty_graph_ties_everywhere() {
        let a = perturbed_adjacency(6, &[]).unwrap();
        let result = brute_force_densest_subgraph(&a, 3).unwrap();
        assert_eq!(result.best_count, 0);
        assert_eq!(result.optima_count, 20);
        assert_eq!(result.best.rows(), &[0, 1, 2]);
    }

    #[test]
    fn subgraph_oracle_rejects_asymmetric() {
        let a = BinaryMatrix::new(3, 3, [(0, 1)]).unwrap();
        assert!(brute_force_densest_subgraph(&a, 2).is_err());
    }

    #[test]
    fn subgraph_agrees_with_block_count_restricted_to_equal_sets() {
        // For U = V on a perturbed adjacency, block nonzeros = 2 * edges + k.
        let edges = [(0, 1), (1, 2), (0, 3), (2, 3), (1, 3)];
        let a = perturbed_adjacency(5, &edges).unwrap();
        let k = 3;
        let sub = brute_force_densest_subgraph(&a, k).unwrap();
        let mut best_block = 0usize;
        let mut best_nodes = None;
        for x in 0..5usize {
            for y in (x + 1)..5 {
                for z in (y + 1)..5 {
                    let nodes = [x, y, z];
                    let count = nodes
                        .iter()
                        .flat_map(|&i| nodes.iter().map(move |&j| (i, j)))
                        .filter(|&(i, j)| a.contains(i, j))
                        .count();
                    if count > best_block {
                        best_block = count;
                        best_nodes = Some(nodes.to_vec());
                    }
                }
            }
        }
        assert_eq!(best_block, 2 * sub.best_count + k);
        assert_eq!(best_nodes.unwrap(), sub.best.rows());
    }
}
