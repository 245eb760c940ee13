//! Proximal and projection primitives used by the ADMM solver: singular value
//! soft-thresholding, box and nonnegativity clamps, and the affine projection
//! onto a fixed entry sum.

use nalgebra::DMatrix;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Singular values below this are reported as exact zeros when ranking.
pub const SINGULAR_VALUE_ZERO_TOL: f64 = 1e-12;

const SVD_MAX_SWEEPS: usize = 10_000;

/// Thin SVD factors: `left * diag(singular_values) * right^T` reconstructs the
/// input. Singular values are nonnegative and sorted nonincreasing; `left` is
/// rows x r and `right` is cols x r with r = min(rows, cols).
#[derive(Clone, Debug)]
pub struct SvdFactors<T> {
    pub left: DenseMatrix<T>,
    pub singular_values: Vec<T>,
    pub right: DenseMatrix<T>,
}

impl<T: Scalar> SvdFactors<T> {
    pub fn reconstruct(&self) -> DenseMatrix<T> {
        reconstruct_truncated(&self.left, &self.singular_values, &self.right)
    }

    /// Number of singular values above the reporting tolerance.
    pub fn rank(&self) -> usize {
        self.singular_values
            .iter()
            .filter(|s| s.as_f64() > SINGULAR_VALUE_ZERO_TOL)
            .count()
    }
}

/// Sum of `values[k] * left[:,k] * right[:,k]^T`, skipping zero values.
fn reconstruct_truncated<T: Scalar>(
    left: &DenseMatrix<T>,
    values: &[T],
    right: &DenseMatrix<T>,
) -> DenseMatrix<T> {
    let mut out = DenseMatrix::zeros(left.rows(), right.rows());
    for (k, &s) in values.iter().enumerate() {
        if s == T::zero() {
            continue;
        }
        for i in 0..left.rows() {
            let us = left[(i, k)] * s;
            let row = &mut out.data_mut()[i * right.rows()..(i + 1) * right.rows()];
            for (j, slot) in row.iter_mut().enumerate() {
                *slot += us * right[(j, k)];
            }
        }
    }
    out
}

/// Full thin SVD. Computation is done in f64 regardless of `T`.
///
/// The fast path is nalgebra's implicit-shift bidiagonalization, which can
/// silently mis-factorize exactly rank-deficient inputs (and ADMM iterates
/// are exactly low-rank in the first iterations). Every factorization is
/// therefore checked against the input on fixed probe vectors; on a bad
/// residual the decomposition is redone with one-sided Jacobi rotations.
pub fn svd_factors<T: Scalar>(d: &DenseMatrix<T>) -> Result<SvdFactors<T>> {
    d.check_finite()?;
    if let Some(fast) = nalgebra_svd(d) {
        if factorization_residual_ok(d, &fast) {
            return Ok(fast);
        }
    }
    let slow = jacobi_svd(d)?;
    if !factorization_residual_ok(d, &slow) {
        return Err(Error::SvdFailure {
            rows: d.rows(),
            cols: d.cols(),
            max_sweeps: JACOBI_MAX_SWEEPS,
        });
    }
    Ok(slow)
}

fn nalgebra_svd<T: Scalar>(d: &DenseMatrix<T>) -> Option<SvdFactors<T>> {
    let (rows, cols) = d.shape();
    let mat = DMatrix::<f64>::from_fn(rows, cols, |i, j| d[(i, j)].as_f64());
    let svd = mat.try_svd(true, true, f64::EPSILON, SVD_MAX_SWEEPS)?;
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let r = svd.singular_values.len();

    let left = DenseMatrix::from_fn(rows, r, |i, k| T::from_f64(u[(i, k)]));
    let right = DenseMatrix::from_fn(cols, r, |j, k| T::from_f64(v_t[(k, j)]));
    let singular_values: Vec<T> = svd
        .singular_values
        .iter()
        .map(|&s| T::from_f64(s))
        .collect();
    if singular_values.windows(2).any(|w| w[0] < w[1]) {
        return None;
    }
    Some(SvdFactors {
        left,
        singular_values,
        right,
    })
}

/// Checks `||A v - U diag(s) V^T v||` on a handful of fixed pseudo-random
/// probe vectors. A materially wrong factor shows up in generic directions,
/// so this catches mis-factorizations at O(probes * (M + N) * r) cost.
fn factorization_residual_ok<T: Scalar>(d: &DenseMatrix<T>, f: &SvdFactors<T>) -> bool {
    let (_, cols) = d.shape();
    let fro = d.frobenius_norm();
    if fro == T::zero() {
        return f.singular_values.iter().all(|&s| s == T::zero());
    }
    let tol = T::from_f64(1000.0) * T::epsilon() * fro;
    for probe in 0..4u64 {
        let v: Vec<T> = (0..cols)
            .map(|j| T::from_f64(pseudo_uniform(probe, j as u64)))
            .collect();
        let v_norm = v
            .iter()
            .map(|&x| x * x)
            .fold(T::zero(), |a, b| a + b)
            .sqrt();

        let direct = d.matvec(&v);
        let mut coeffs = f.right.matvec_transpose(&v);
        for (c, &s) in coeffs.iter_mut().zip(f.singular_values.iter()) {
            *c *= s;
        }
        let through_factors = f.left.matvec(&coeffs);

        let err = direct
            .iter()
            .zip(through_factors.iter())
            .map(|(&a, &b)| {
                let e = a - b;
                e * e
            })
            .fold(T::zero(), |a, b| a + b)
            .sqrt();
        if err > tol * v_norm || !err.is_finite() {
            return false;
        }
    }
    true
}

/// Deterministic value in [-1, 1] from a bit-mixed (probe, index) pair.
fn pseudo_uniform(probe: u64, index: u64) -> f64 {
    let mut z = probe
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9))
        .wrapping_add(0x94d0_49bb_1331_11eb);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

const JACOBI_MAX_SWEEPS: usize = 60;

/// One-sided Jacobi SVD in f64: rotate column pairs of G = A until mutually
/// orthogonal, then read off sigma_j = ||G_j||, U_j = G_j / sigma_j, with V
/// accumulating the rotations. Slower than bidiagonalization but robust on
/// rank-deficient inputs.
fn jacobi_svd<T: Scalar>(d: &DenseMatrix<T>) -> Result<SvdFactors<T>> {
    let (rows, cols) = d.shape();
    if rows < cols {
        let f = jacobi_svd(&d.transpose())?;
        return Ok(SvdFactors {
            left: f.right,
            singular_values: f.singular_values,
            right: f.left,
        });
    }

    // Column-major working copies.
    let mut g: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..rows).map(|i| d[(i, j)].as_f64()).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut col = vec![0.0; cols];
            col[j] = 1.0;
            col
        })
        .collect();

    let tol = f64::EPSILON * (rows as f64).sqrt();
    // Columns at rounding-noise scale count as zero; rotating them against
    // real columns churns forever without improving the factorization.
    let fro: f64 = g.iter().map(|col| col.iter().map(|&x| x * x).sum::<f64>()).sum::<f64>().sqrt();
    let negligible = 16.0 * f64::EPSILON * fro;
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let (gp, gq) = split_pair(&mut g, p, q);
                let (mut app, mut aqq, mut apq) = (0.0f64, 0.0f64, 0.0f64);
                for (&x, &y) in gp.iter().zip(gq.iter()) {
                    app += x * x;
                    aqq += y * y;
                    apq += x * y;
                }
                if app.sqrt() <= negligible || aqq.sqrt() <= negligible {
                    continue;
                }
                if apq.abs() <= tol * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(gp, gq, c, s);
                let (vp, vq) = split_pair(&mut v, p, q);
                rotate(vp, vq, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdFailure {
            rows,
            cols,
            max_sweeps: JACOBI_MAX_SWEEPS,
        });
    }

    let norms: Vec<f64> = g.iter().map(|col| norm_f64(col)).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).expect("finite norms"));

    let mut left_cols: Vec<Vec<f64>> = Vec::with_capacity(cols);
    let mut singular_values = Vec::with_capacity(cols);
    let mut right_cols: Vec<Vec<f64>> = Vec::with_capacity(cols);
    for &j in &order {
        let sigma = norms[j];
        singular_values.push(sigma);
        right_cols.push(v[j].clone());
        if sigma > 0.0 {
            left_cols.push(g[j].iter().map(|&x| x / sigma).collect());
        } else {
            left_cols.push(vec![0.0; rows]);
        }
    }
    // Zero left columns (rank-deficient input) get an orthonormal completion
    // so the factor keeps orthonormal columns.
    complete_orthonormal(&mut left_cols, rows);

    Ok(SvdFactors {
        left: DenseMatrix::from_fn(rows, cols, |i, k| T::from_f64(left_cols[k][i])),
        singular_values: singular_values.iter().map(|&s| T::from_f64(s)).collect(),
        right: DenseMatrix::from_fn(cols, cols, |j, k| T::from_f64(right_cols[k][j])),
    })
}

fn split_pair(cols: &mut [Vec<f64>], p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    let (lo, hi) = cols.split_at_mut(q);
    (&mut lo[p], &mut hi[0])
}

fn rotate(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let xa = *x;
        *x = c * xa - s * *y;
        *y = s * xa + c * *y;
    }
}

fn norm_f64(v: &[f64]) -> f64 {
    v.iter().map(|&x| x * x).sum::<f64>().sqrt()
}

/// Fills all-zero columns with unit vectors orthogonal to the nonzero ones
/// (modified Gram-Schmidt over the standard basis, lowest index first).
fn complete_orthonormal(cols: &mut [Vec<f64>], dim: usize) {
    for k in 0..cols.len() {
        if norm_f64(&cols[k]) > 0.5 {
            continue;
        }
        for e in 0..dim {
            let mut candidate = vec![0.0; dim];
            candidate[e] = 1.0;
            for other in cols.iter() {
                let dot: f64 = other
                    .iter()
                    .zip(candidate.iter())
                    .map(|(&a, &b)| a * b)
                    .sum();
                for (c, &o) in candidate.iter_mut().zip(other.iter()) {
                    *c -= dot * o;
                }
            }
            let n = norm_f64(&candidate);
            if n > 1e-3 {
                for c in candidate.iter_mut() {
                    *c /= n;
                }
                cols[k] = candidate;
                break;
            }
        }
    }
}

/// Elementwise shrinkage `sign(x) * max(|x| - phi, 0)`.
pub fn soft_threshold<T: Scalar>(values: &[T], phi: T) -> Result<Vec<T>> {
    if phi < T::zero() {
        return Err(Error::InvalidArgument(format!(
            "soft-threshold level {phi} must be nonnegative"
        )));
    }
    Ok(values
        .iter()
        .map(|&x| x.signum() * (x.abs() - phi).max(T::zero()))
        .collect())
}

/// Proximal operator of the nuclear norm: SVD, shrink the singular values by
/// `phi`, reconstruct. Also returns the thresholded singular values, whose sum
/// is the nuclear norm of the output.
pub fn prox_nuclear_with_values<T: Scalar>(
    d: &DenseMatrix<T>,
    phi: T,
) -> Result<(DenseMatrix<T>, Vec<T>)> {
    let factors = svd_factors(d)?;
    let shrunk = soft_threshold(&factors.singular_values, phi)?;
    let out = reconstruct_truncated(&factors.left, &shrunk, &factors.right);
    Ok((out, shrunk))
}

pub fn prox_nuclear<T: Scalar>(d: &DenseMatrix<T>, phi: T) -> Result<DenseMatrix<T>> {
    prox_nuclear_with_values(d, phi).map(|(m, _)| m)
}

/// Entrywise clamp to [0, 1].
pub fn project_box01<T: Scalar>(d: &DenseMatrix<T>) -> DenseMatrix<T> {
    d.map(|x| x.max(T::zero()).min(T::one()))
}

/// Entrywise clamp below at 0.
pub fn project_nonnegative<T: Scalar>(d: &DenseMatrix<T>) -> DenseMatrix<T> {
    d.map(|x| x.max(T::zero()))
}

/// Projection onto the affine set of matrices with a fixed entry sum: a
/// constant shift by (target - sum) / (rows * cols).
pub fn project_sum_constraint<T: Scalar>(d: &DenseMatrix<T>, target_sum: T) -> DenseMatrix<T> {
    let count = T::from_usize(d.rows() * d.cols());
    let shift = (target_sum - d.entry_sum()) / count;
    d.map(|x| x + shift)
}
