//! Recovery of planted dense submatrices and dense k-subgraphs via a
//! nuclear-norm convex relaxation.
//!
//! A binary data matrix A with zero support Omega is searched for the
//! m x n submatrix (or, on perturbed adjacency matrices with m = n = k, the
//! k-subgraph) holding the most nonzeros. The relaxation
//!
//! ```text
//! min ||X||_* + gamma * sum(Y)
//! s.t. sum(X) = m n,  P_Omega(X - Y) = 0,  0 <= X <= 1,  Y >= 0
//! ```
//!
//! is solved by a multi-block ADMM ([`solver`]); candidate optima can be
//! proven optimal by a dual certificate ([`certificate`]), cross-checked
//! against exhaustive enumeration ([`oracle`]), and studied at scale through
//! seeded Monte-Carlo sweeps over the planted model ([`experiments`]).
//!
//! All dense numerics are generic over the scalar type via [`scalar::Scalar`]
//! (`f32` or `f64`); subgraph densities are exact rationals.

pub mod binary;
pub mod certificate;
pub mod dense;
pub mod error;
pub mod experiments;
pub mod model;
pub mod oracle;
pub mod prox;
pub mod rep;
pub mod scalar;
pub mod selection;
pub mod solver;

pub use binary::{perturbed_adjacency, BinaryMatrix};
pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use rep::{matrix_representation, project_onto_support, subgraph_density, MatrixRep};
pub use scalar::Scalar;
pub use selection::Selection;
pub use solver::{admm_solve, default_gamma, AdmmConfig, SolveResult, ThresholdMode};

/// Concrete aliases for the default double-precision configuration.
pub type DenseMatrixF64 = DenseMatrix<f64>;
pub type MatrixRepF64 = MatrixRep<f64>;
pub type AdmmConfigF64 = AdmmConfig<f64>;
pub type SolveResultF64 = SolveResult<f64>;

/// Single-precision aliases.
pub type DenseMatrixF32 = DenseMatrix<f32>;
pub type MatrixRepF32 = MatrixRep<f32>;
pub type AdmmConfigF32 = AdmmConfig<f32>;
pub type SolveResultF32 = SolveResult<f32>;
