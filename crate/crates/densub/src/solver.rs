//! Multi-block ADMM for the nuclear-norm relaxation of the densest
//! m x n-submatrix problem:
//!
//! ```text
//! min ||X||_* + gamma * sum(Y)
//! s.t. sum(X) = m*n,  P_Omega(X - Y) = 0,  0 <= X <= 1,  Y >= 0,
//! ```
//!
//! where Omega is the zero support of the data matrix. The splitting
//! introduces Q (carries the support constraint), W (the entry-sum
//! constraint), and Z (the box constraint), each updated by an analytic
//! projection, with X updated by singular value soft-thresholding.

use crate::binary::BinaryMatrix;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::prox;
use crate::rep::MatrixRep;
use crate::scalar::Scalar;
use crate::selection::Selection;

/// Recovery rule: relative error below this declares the planted block found.
pub const RECOVERY_THRESHOLD: f64 = 1e-3;

/// Which soft-threshold level the X-update uses.
///
/// `DerivedProx` (phi = mu/3 = 1/(3 tau)) is the exact minimizer of the
/// augmented Lagrangian in X. `PaperLiteral` (phi = tau/3) is kept for
/// comparison runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    DerivedProx,
    PaperLiteral,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmmConfig<T> {
    pub gamma: T,
    pub tau: T,
    pub epsilon: T,
    pub max_iters: usize,
    pub threshold_mode: ThresholdMode,
}

impl<T: Scalar> AdmmConfig<T> {
    pub fn new(gamma: T, tau: T, epsilon: T) -> Self {
        AdmmConfig {
            gamma,
            tau,
            epsilon,
            max_iters: 2000,
            threshold_mode: ThresholdMode::DerivedProx,
        }
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_threshold_mode(mut self, mode: ThresholdMode) -> Self {
        self.threshold_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive_finite =
            |v: T| v.is_finite() && v > T::zero();
        if !(positive_finite(self.gamma) && positive_finite(self.tau) && positive_finite(self.epsilon))
        {
            return Err(Error::InvalidArgument(
                "gamma, tau, and epsilon must be positive and finite".into(),
            ));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be >= 1".into()));
        }
        Ok(())
    }
}

/// Full primal/dual iterate, exposed for warm starts and step-level tests.
#[derive(Clone, Debug)]
pub struct AdmmState<T> {
    pub x: DenseMatrix<T>,
    pub y: DenseMatrix<T>,
    pub q: DenseMatrix<T>,
    pub w: DenseMatrix<T>,
    pub z: DenseMatrix<T>,
    pub lambda_q: DenseMatrix<T>,
    pub lambda_w: DenseMatrix<T>,
    pub lambda_z: DenseMatrix<T>,
    pub iter: usize,
    pub primal_residual: T,
    pub dual_residual: T,
}

impl<T: Scalar> AdmmState<T> {
    /// Cold start: X = W = Y = (mn / MN) * ones, everything else zero.
    fn cold(rows: usize, cols: usize, block_rows: usize, block_cols: usize) -> Self {
        let fill = T::from_usize(block_rows * block_cols) / T::from_usize(rows * cols);
        let filled = DenseMatrix::filled(rows, cols, fill);
        AdmmState {
            x: filled.clone(),
            y: filled.clone(),
            q: DenseMatrix::zeros(rows, cols),
            w: filled,
            z: DenseMatrix::zeros(rows, cols),
            lambda_q: DenseMatrix::zeros(rows, cols),
            lambda_w: DenseMatrix::zeros(rows, cols),
            lambda_z: DenseMatrix::zeros(rows, cols),
            iter: 0,
            primal_residual: T::infinity(),
            dual_residual: T::infinity(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult<T> {
    pub x: DenseMatrix<T>,
    pub y: DenseMatrix<T>,
    pub selection: Selection,
    pub iterations: usize,
    pub converged: bool,
    pub residual_history: Vec<(T, T)>,
    pub objective: T,
}

/// Regularization weight rule from the planted-model analysis:
/// 6 / ((q - p) * n_min).
pub fn default_gamma<T: Scalar>(q: T, p: T, n_min: usize) -> Result<T> {
    if q <= p {
        return Err(Error::InvalidArgument(format!(
            "default gamma requires q > p, got q = {q}, p = {p}"
        )));
    }
    if n_min == 0 {
        return Err(Error::InvalidArgument("n_min must be >= 1".into()));
    }
    Ok(T::from_f64(6.0) / ((q - p) * T::from_usize(n_min)))
}

/// Runs the ADMM on the relaxation for an (m, n) block inside `a`.
pub fn admm_solve<T: Scalar>(
    a: &BinaryMatrix,
    block_rows: usize,
    block_cols: usize,
    config: &AdmmConfig<T>,
    initial: Option<AdmmState<T>>,
) -> Result<SolveResult<T>> {
    admm_solve_observed(a, block_rows, block_cols, config, initial, |_| {})
}

/// As `admm_solve`, invoking `observer` with the full state after every
/// iteration (used by step-level invariant tests and progress reporting).
pub fn admm_solve_observed<T: Scalar>(
    a: &BinaryMatrix,
    block_rows: usize,
    block_cols: usize,
    config: &AdmmConfig<T>,
    initial: Option<AdmmState<T>>,
    mut observer: impl FnMut(&AdmmState<T>),
) -> Result<SolveResult<T>> {
    config.validate()?;
    let (rows, cols) = a.shape();
    if block_rows == 0 || block_rows > rows || block_cols == 0 || block_cols > cols {
        return Err(Error::InvalidArgument(format!(
            "block {block_rows}x{block_cols} out of range for a {rows}x{cols} matrix"
        )));
    }

    let mu = T::one() / config.tau;
    let phi = match config.threshold_mode {
        ThresholdMode::DerivedProx => mu / T::from_f64(3.0),
        ThresholdMode::PaperLiteral => config.tau / T::from_f64(3.0),
    };
    let gamma_mu = config.gamma * mu;
    let target_sum = T::from_usize(block_rows * block_cols);
    let norm_floor = T::from_f64(1e-12);

    let mut state = initial.unwrap_or_else(|| AdmmState::cold(rows, cols, block_rows, block_cols));
    if state.x.shape() != (rows, cols) {
        return Err(Error::DimensionMismatch {
            left_rows: state.x.rows(),
            left_cols: state.x.cols(),
            right_rows: rows,
            right_cols: cols,
        });
    }
    let mut history: Vec<(T, T)> = Vec::new();
    let mut converged = false;
    let mut nuclear_norm = T::zero();

    for iter in 0..config.max_iters {
        let q_prev = state.q.clone();
        let w_prev = state.w.clone();
        let z_prev = state.z.clone();

        // Step 1: Q carries X - Y off the zero support; it vanishes on the
        // zero entries of A and is free at the nonzeros.
        state.q.fill(T::zero());
        for &(i, j) in a.nonzeros() {
            state.q[(i, j)] =
                state.x[(i, j)] - state.y[(i, j)] + mu * state.lambda_q[(i, j)];
        }

        // Step 2: X-update by singular value soft-thresholding of the average
        // of the other primal blocks, dual-corrected.
        let mut x_tilde = &(&state.y + &state.q) + &(&state.z + &state.w);
        x_tilde.add_scaled(-mu, &state.lambda_q);
        x_tilde.add_scaled(-mu, &state.lambda_z);
        x_tilde.add_scaled(-mu, &state.lambda_w);
        let x_tilde = x_tilde.scale(T::one() / T::from_f64(3.0));
        if !x_tilde.is_finite() {
            return Err(Error::Diverged { iteration: iter });
        }
        let (x_new, shrunk) = prox::prox_nuclear_with_values(&x_tilde, phi)?;
        state.x = x_new;
        nuclear_norm = shrunk.iter().copied().sum();

        // Step 3: Y-update, a nonnegative clamp of X - Q - gamma*mu + mu*Lambda_Q.
        let mut y_arg = &state.x - &state.q;
        y_arg.add_scaled(mu, &state.lambda_q);
        state.y = y_arg.map(|e| (e - gamma_mu).max(T::zero()));

        // Step 4: W-update, affine projection onto sum(W) = mn.
        let mut w_arg = state.x.clone();
        w_arg.add_scaled(mu, &state.lambda_w);
        state.w = prox::project_sum_constraint(&w_arg, target_sum);

        // Step 5: Z-update, clamp to [0, 1].
        let mut z_arg = state.x.clone();
        z_arg.add_scaled(mu, &state.lambda_z);
        state.z = prox::project_box01(&z_arg);

        // Step 6: dual ascent.
        let mut gap_q = &state.x - &state.y;
        gap_q.add_scaled(-T::one(), &state.q);
        state.lambda_q.add_scaled(config.tau, &gap_q);
        let gap_w = &state.x - &state.w;
        state.lambda_w.add_scaled(config.tau, &gap_w);
        let gap_z = &state.x - &state.z;
        state.lambda_z.add_scaled(config.tau, &gap_z);

        // Step 7: relative primal and dual residuals.
        let x_norm = state.x.frobenius_norm().max(norm_floor);
        let r_p = gap_z
            .frobenius_norm()
            .max(gap_w.frobenius_norm())
            .max(gap_q.frobenius_norm())
            / x_norm;
        let r_d = state
            .z
            .frobenius_distance(&z_prev)
            .max(state.w.frobenius_distance(&w_prev))
            .max(state.q.frobenius_distance(&q_prev))
            / x_norm;
        if !(r_p.is_finite() && r_d.is_finite()) {
            return Err(Error::Diverged { iteration: iter });
        }

        state.iter = iter + 1;
        state.primal_residual = r_p;
        state.dual_residual = r_d;
        history.push((r_p, r_d));
        observer(&state);

        if r_p.max(r_d) < config.epsilon {
            converged = true;
            break;
        }
    }

    let selection = round_to_selection(&state.x, block_rows, block_cols)?;
    let objective = nuclear_norm + config.gamma * state.y.entry_sum();
    Ok(SolveResult {
        x: state.x,
        y: state.y,
        selection,
        iterations: state.iter,
        converged,
        residual_history: history,
        objective,
    })
}

/// Rounds a solver iterate to a selection: take the leading singular vector
/// pair of X and keep the m rows and n columns of largest magnitude, breaking
/// ties toward lower indices.
///
/// The leading pair comes from alternating power iteration started at the
/// (deterministic) uniform vector, so exactly tied entries stay exactly tied.
pub fn round_to_selection<T: Scalar>(
    x: &DenseMatrix<T>,
    block_rows: usize,
    block_cols: usize,
) -> Result<Selection> {
    let (rows, cols) = x.shape();
    if block_rows == 0 || block_rows > rows || block_cols == 0 || block_cols > cols {
        return Err(Error::InvalidArgument(format!(
            "block {block_rows}x{block_cols} out of range for a {rows}x{cols} matrix"
        )));
    }
    x.check_finite()?;

    let tiny = T::from_f64(1e-300);
    let uniform = T::one() / T::from_usize(cols).sqrt();
    let mut v = vec![uniform; cols];
    let mut u = vec![T::one() / T::from_usize(rows).sqrt(); rows];
    let mut sigma_prev = T::neg_infinity();
    for _ in 0..1000 {
        let u_raw = x.matvec(&v);
        let u_norm = norm(&u_raw);
        if u_norm <= tiny {
            break;
        }
        u = scaled(&u_raw, T::one() / u_norm);
        let v_raw = x.matvec_transpose(&u);
        let sigma = norm(&v_raw);
        if sigma <= tiny {
            break;
        }
        v = scaled(&v_raw, T::one() / sigma);
        if (sigma - sigma_prev).abs() <= T::from_f64(1e-12) * sigma {
            break;
        }
        sigma_prev = sigma;
    }

    Selection::new(
        top_indices(&u, block_rows),
        top_indices(&v, block_cols),
    )
}

fn norm<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).fold(T::zero(), |a, b| a + b).sqrt()
}

fn scaled<T: Scalar>(v: &[T], s: T) -> Vec<T> {
    v.iter().map(|&x| x * s).collect()
}

/// Indices of the k largest magnitudes, ties broken by lowest index.
fn top_indices<T: Scalar>(v: &[T], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| {
        v[b].abs()
            .partial_cmp(&v[a].abs())
            .expect("finite entries compare")
            .then(a.cmp(&b))
    });
    order.truncate(k);
    order
}

/// Relative Frobenius error of an iterate against the representation of the
/// planted truth.
pub fn recovery_error<T: Scalar>(x: &DenseMatrix<T>, truth: &MatrixRep<T>) -> T {
    x.frobenius_distance(&truth.x) / truth.x.frobenius_norm()
}

/// The recovery rule at an explicit threshold.
pub fn is_recovered<T: Scalar>(x: &DenseMatrix<T>, truth: &MatrixRep<T>, threshold: T) -> bool {
    recovery_error(x, truth) < threshold
}
