//! Random instance generation for the planted dense submatrix and planted
//! dense k-subgraph models.
//!
//! All sampling is driven by ChaCha8, seeded from a 64-bit token, with a fixed
//! draw order (row-major over cells), so instances are reproducible across
//! platforms and runs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::binary::BinaryMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::selection::Selection;

/// Name of the generator family recorded in run metadata.
pub const RNG_FAMILY: &str = "chacha8";

/// Parameters of the planted dense submatrix model: an `block_rows` x
/// `block_cols` block whose entries are nonzero with probability `q`, inside
/// an `rows` x `cols` matrix whose remaining entries are nonzero with
/// probability `p < q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedParams {
    pub rows: usize,
    pub cols: usize,
    pub block_rows: usize,
    pub block_cols: usize,
    pub p: f64,
    pub q: f64,
    pub seed: u64,
}

impl PlantedParams {
    pub fn validate(&self) -> Result<()> {
        if self.block_rows == 0 || self.block_rows > self.rows {
            return Err(Error::InvalidArgument(format!(
                "block rows {} out of range 1..={}",
                self.block_rows, self.rows
            )));
        }
        if self.block_cols == 0 || self.block_cols > self.cols {
            return Err(Error::InvalidArgument(format!(
                "block cols {} out of range 1..={}",
                self.block_cols, self.cols
            )));
        }
        if !(0.0..1.0).contains(&self.p) || !(self.q > self.p && self.q <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "probabilities must satisfy 0 <= p < q <= 1, got p = {}, q = {}",
                self.p, self.q
            )));
        }
        Ok(())
    }
}

/// A sampled matrix together with the planted ground-truth selection.
#[derive(Clone, Debug)]
pub struct PlantedInstance {
    pub matrix: BinaryMatrix,
    pub truth: Selection,
    pub params: PlantedParams,
}

/// Uniform k-subset of 0..pool by partial Fisher-Yates, returned sorted.
/// Draws are 64-bit so the stream is identical on all platforms.
fn sample_subset(rng: &mut ChaCha8Rng, pool: usize, k: usize) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..pool).collect();
    for i in 0..k {
        let j = i + rng.random_range(0..(pool - i) as u64) as usize;
        indices.swap(i, j);
    }
    let mut chosen = indices[..k].to_vec();
    chosen.sort_unstable();
    chosen
}

/// Samples from the planted dense submatrix model.
///
/// The planted row and column sets are themselves uniform random subsets;
/// every cell is then drawn independently in row-major order.
pub fn sample_planted_submatrix(params: &PlantedParams) -> Result<PlantedInstance> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let rows_star = sample_subset(&mut rng, params.rows, params.block_rows);
    let cols_star = sample_subset(&mut rng, params.cols, params.block_cols);
    let truth = Selection::new(rows_star, cols_star)?;
    let row_mask = truth.row_mask(params.rows);
    let col_mask = truth.col_mask(params.cols);

    let mut coords = Vec::new();
    for (i, &row_planted) in row_mask.iter().enumerate() {
        for (j, &col_planted) in col_mask.iter().enumerate() {
            let prob = if row_planted && col_planted {
                params.q
            } else {
                params.p
            };
            if rng.random::<f64>() < prob {
                coords.push((i, j));
            }
        }
    }
    let matrix = BinaryMatrix::new(params.rows, params.cols, coords)?;
    Ok(PlantedInstance {
        matrix,
        truth,
        params: *params,
    })
}

/// Samples from the planted dense k-subgraph model and returns the perturbed
/// adjacency matrix (unit diagonal; each unordered pair drawn once and
/// mirrored). The truth selection has identical row and column sets.
pub fn sample_planted_subgraph(
    nodes: usize,
    k: usize,
    p: f64,
    q: f64,
    seed: u64,
) -> Result<PlantedInstance> {
    let params = PlantedParams {
        rows: nodes,
        cols: nodes,
        block_rows: k,
        block_cols: k,
        p,
        q,
        seed,
    };
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let planted = sample_subset(&mut rng, nodes, k);
    let truth = Selection::new(planted.clone(), planted)?;
    let mask = truth.row_mask(nodes);

    let mut coords: Vec<(usize, usize)> = (0..nodes).map(|i| (i, i)).collect();
    for i in 0..nodes {
        for j in (i + 1)..nodes {
            let prob = if mask[i] && mask[j] { q } else { p };
            if rng.random::<f64>() < prob {
                coords.push((i, j));
                coords.push((j, i));
            }
        }
    }
    let matrix = BinaryMatrix::new(nodes, nodes, coords)?;
    Ok(PlantedInstance {
        matrix,
        truth,
        params,
    })
}

/// Bernstein deviation band for a Binomial(k, rho) count: with probability at
/// least 1 - 2 t^-6, the count deviates from rho*k by at most
/// 6 * max(sqrt(rho (1-rho) k ln t), ln t).
pub fn bernstein_band<T: Scalar>(trials: usize, rho: T, t: T) -> Result<T> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trial count must be >= 1".into()));
    }
    if rho < T::zero() || rho > T::one() {
        return Err(Error::InvalidArgument(format!(
            "success probability {rho} outside [0, 1]"
        )));
    }
    if t <= T::one() {
        return Err(Error::InvalidArgument(format!(
            "scale parameter {t} must exceed 1"
        )));
    }
    let log_t = t.ln();
    let variance_term = (rho * (T::one() - rho) * T::from_usize(trials) * log_t).sqrt();
    Ok(T::from_f64(6.0) * variance_term.max(log_t))
}

/// Stable per-trial seed derivation: a SplitMix64 chain over the master seed
/// and the trial coordinates. Used so parallel sweeps can draw independent,
/// reproducible seeds per (cell, trial).
pub fn derive_seed(master: u64, coordinates: &[u64]) -> u64 {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    let mut state = splitmix64(master);
    for &c in coordinates {
        state = splitmix64(state ^ c.wrapping_mul(0xff51_afd7_ed55_8ccd));
    }
    state
}
