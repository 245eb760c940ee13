//! Monte-Carlo recovery sweeps over a (q, n) grid, rate aggregation, and the
//! flat-file artifacts they emit (records CSV, rate heatmap PGM, threshold
//! overlay CSV).

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::certificate::{gap_threshold, ThresholdInputs};
use crate::error::{Error, Result};
use crate::model::{derive_seed, sample_planted_submatrix, PlantedParams};
use crate::rep::matrix_representation;
use crate::solver::{admm_solve, default_gamma, recovery_error, AdmmConfig, ThresholdMode};

/// Parallelism cap for sweeps; 0 or unset means automatic.
pub const THREADS_ENV_VAR: &str = "PLANTED_DENSE_THREADS";

/// How the planted row count m is derived from the swept column count n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MRule {
    /// m = round(factor * n). The customary grid uses factor 2.
    Scale { factor: f64 },
    Fixed { m: usize },
}

impl Default for MRule {
    fn default() -> Self {
        MRule::Scale { factor: 2.0 }
    }
}

impl MRule {
    pub fn apply(&self, n: usize) -> usize {
        match *self {
            MRule::Scale { factor } => (factor * n as f64).round() as usize,
            MRule::Fixed { m } => m,
        }
    }
}

/// Background probability rule: fixed, or 1/sqrt(N) for sparse grids.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PRule {
    Fixed { p: f64 },
    InverseSqrtN,
}

impl PRule {
    pub fn apply(&self, cols: usize) -> f64 {
        match *self {
            PRule::Fixed { p } => p,
            PRule::InverseSqrtN => 1.0 / (cols as f64).sqrt(),
        }
    }
}

/// Solver settings shared by every cell; gamma is derived per cell as
/// 6 / ((q - p) n).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub tau: f64,
    pub epsilon: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_threshold_mode")]
    pub threshold_mode: ThresholdMode,
}

fn default_max_iters() -> usize {
    2000
}

fn default_threshold_mode() -> ThresholdMode {
    ThresholdMode::DerivedProx
}

fn default_trials() -> usize {
    10
}

fn default_recovery_threshold() -> f64 {
    crate::solver::RECOVERY_THRESHOLD
}

fn default_overlay_c1() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub rows: usize,
    pub cols: usize,
    pub q_values: Vec<f64>,
    pub n_values: Vec<usize>,
    #[serde(default)]
    pub m_rule: MRule,
    pub p_rule: PRule,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub master_seed: u64,
    pub solver: SolverSettings,
    #[serde(default = "default_recovery_threshold")]
    pub recovery_threshold: f64,
    #[serde(default = "default_overlay_c1")]
    pub overlay_c1: f64,
}

impl SweepSpec {
    pub fn background_p(&self) -> f64 {
        self.p_rule.apply(self.cols)
    }

    /// Rejects structurally impossible grids before any solve runs.
    /// Degenerate q <= p cells are allowed; they are recorded, not solved.
    pub fn validate(&self) -> Result<()> {
        if self.q_values.is_empty() || self.n_values.is_empty() || self.trials == 0 {
            return Err(Error::InvalidArgument(
                "sweep needs nonempty q and n grids and trials >= 1".into(),
            ));
        }
        let p = self.background_p();
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "background probability {p} outside [0, 1)"
            )));
        }
        for &n in &self.n_values {
            let m = self.m_rule.apply(n);
            if n == 0 || n > self.cols || m == 0 || m > self.rows {
                return Err(Error::InvalidArgument(format!(
                    "infeasible cell: block {m}x{n} in a {}x{} matrix",
                    self.rows, self.cols
                )));
            }
        }
        for &q in &self.q_values {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::InvalidArgument(format!(
                    "q value {q} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// One solved (or degenerate) trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub q: f64,
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub trial: usize,
    pub seed: u64,
    pub recovered: bool,
    pub rel_error: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
    pub converged: bool,
    pub degenerate: bool,
}

fn thread_cap() -> usize {
    std::env::var(THREADS_ENV_VAR)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(0)
}

/// Runs every (q, n, trial) cell of the sweep. Trials execute in parallel
/// (capped by `PLANTED_DENSE_THREADS`); the record order is deterministic:
/// q index, then n index, then trial.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    use rayon::prelude::*;

    spec.validate()?;
    let jobs: Vec<(usize, usize, usize)> = (0..spec.q_values.len())
        .flat_map(|qi| {
            (0..spec.n_values.len())
                .flat_map(move |ni| (0..spec.trials).map(move |t| (qi, ni, t)))
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap())
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| {
        jobs.par_iter()
            .map(|&(qi, ni, trial)| run_trial(spec, qi, ni, trial))
            .collect()
    })
}

fn run_trial(spec: &SweepSpec, q_idx: usize, n_idx: usize, trial: usize) -> Result<SweepRecord> {
    let q = spec.q_values[q_idx];
    let n = spec.n_values[n_idx];
    let m = spec.m_rule.apply(n);
    let p = spec.background_p();
    let seed = derive_seed(spec.master_seed, &[q_idx as u64, n_idx as u64, trial as u64]);

    if q <= p {
        // gamma = 6/((q - p) n) is undefined; the cell is recorded as a
        // non-recovery and flagged.
        return Ok(SweepRecord {
            q,
            n,
            m,
            p,
            trial,
            seed,
            recovered: false,
            rel_error: 1.0,
            iterations: 0,
            wall_time_s: 0.0,
            converged: false,
            degenerate: true,
        });
    }

    let params = PlantedParams {
        rows: spec.rows,
        cols: spec.cols,
        block_rows: m,
        block_cols: n,
        p,
        q,
        seed,
    };
    let instance = sample_planted_submatrix(&params)?;
    let gamma = default_gamma(q, p, n)?;
    let config = AdmmConfig {
        gamma,
        tau: spec.solver.tau,
        epsilon: spec.solver.epsilon,
        max_iters: spec.solver.max_iters,
        threshold_mode: spec.solver.threshold_mode,
    };

    let start = Instant::now();
    let result = admm_solve(&instance.matrix, m, n, &config, None)?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let truth = matrix_representation::<f64>(&instance.matrix, &instance.truth)?;
    let rel_error = recovery_error(&result.x, &truth);
    Ok(SweepRecord {
        q,
        n,
        m,
        p,
        trial,
        seed,
        recovered: rel_error < spec.recovery_threshold,
        rel_error,
        iterations: result.iterations,
        wall_time_s,
        converged: result.converged,
        degenerate: false,
    })
}

/// Recovery rates on the (q, n) grid, in spec order.
#[derive(Clone, Debug, PartialEq)]
pub struct RateGrid {
    pub q_values: Vec<f64>,
    pub n_values: Vec<usize>,
    /// Indexed `n_idx * q_values.len() + q_idx`.
    pub rates: Vec<f64>,
}

impl RateGrid {
    pub fn rate(&self, q_idx: usize, n_idx: usize) -> f64 {
        self.rates[n_idx * self.q_values.len() + q_idx]
    }
}

/// Folds records into per-cell recovery rates. The records must be exactly
/// one sweep's worth in any order.
pub fn aggregate_rates(spec: &SweepSpec, records: &[SweepRecord]) -> Result<RateGrid> {
    let expected = spec.q_values.len() * spec.n_values.len() * spec.trials;
    if records.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "expected {expected} records for this sweep, got {}",
            records.len()
        )));
    }
    let p = spec.background_p();
    let mut counts = vec![0usize; spec.q_values.len() * spec.n_values.len()];
    let mut seen = vec![0usize; counts.len()];
    for r in records {
        let qi = spec
            .q_values
            .iter()
            .position(|&q| q == r.q)
            .ok_or_else(|| Error::InvalidArgument(format!("record q = {} not in spec", r.q)))?;
        let ni = spec
            .n_values
            .iter()
            .position(|&n| n == r.n)
            .ok_or_else(|| Error::InvalidArgument(format!("record n = {} not in spec", r.n)))?;
        if r.m != spec.m_rule.apply(r.n) || r.p != p || r.trial >= spec.trials {
            return Err(Error::InvalidArgument(
                "record does not belong to this sweep".into(),
            ));
        }
        let cell = ni * spec.q_values.len() + qi;
        seen[cell] += 1;
        if r.recovered {
            counts[cell] += 1;
        }
    }
    if seen.iter().any(|&s| s != spec.trials) {
        return Err(Error::InvalidArgument(
            "records do not cover every cell exactly trials times".into(),
        ));
    }
    Ok(RateGrid {
        q_values: spec.q_values.clone(),
        n_values: spec.n_values.clone(),
        rates: counts
            .iter()
            .map(|&c| c as f64 / spec.trials as f64)
            .collect(),
    })
}

/// Per-n smallest grid q whose gap clears the closed-form threshold at
/// constant `c1`; `None` when no grid q qualifies.
pub fn threshold_overlay(spec: &SweepSpec, c1: f64) -> Vec<(usize, Option<f64>)> {
    let p = spec.background_p();
    let mut qs: Vec<f64> = spec.q_values.clone();
    qs.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    spec.n_values
        .iter()
        .map(|&n| {
            let m = spec.m_rule.apply(n);
            let threshold_q = qs
                .iter()
                .copied()
                .find(|&q| {
                    if q < p {
                        return false;
                    }
                    // Direct evaluation; q = p is admitted here so a zero c1
                    // degenerates to the q >= p boundary.
                    let inputs = ThresholdInputs {
                        q,
                        p,
                        rows: spec.rows,
                        cols: spec.cols,
                        block_rows: m,
                        block_cols: n,
                    };
                    q - p >= gap_threshold(&inputs, c1)
                });
            (n, threshold_q)
        })
        .collect()
}

/// Exact CSV schema: one row per record,
/// `q,n,m,p,trial,seed,recovered,rel_error,iterations,wall_time_s,converged,degenerate`.
pub fn records_csv(records: &[SweepRecord]) -> String {
    let mut out =
        String::from("q,n,m,p,trial,seed,recovered,rel_error,iterations,wall_time_s,converged,degenerate\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.q,
            r.n,
            r.m,
            r.p,
            r.trial,
            r.seed,
            r.recovered,
            r.rel_error,
            r.iterations,
            r.wall_time_s,
            r.converged,
            r.degenerate
        ));
    }
    out
}

/// The same CSV with the wall-time column blanked, for byte-exact
/// reproducibility comparisons.
pub fn records_csv_without_walltime(records: &[SweepRecord]) -> String {
    let mut out =
        String::from("q,n,m,p,trial,seed,recovered,rel_error,iterations,converged,degenerate\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.q,
            r.n,
            r.m,
            r.p,
            r.trial,
            r.seed,
            r.recovered,
            r.rel_error,
            r.iterations,
            r.converged,
            r.degenerate
        ));
    }
    out
}

/// 8-bit grayscale PGM (binary P5): one pixel per (q, n) cell, rows ordered by
/// ascending n, columns by ascending q, pixel = round(255 * rate).
pub fn rate_grid_pgm(grid: &RateGrid) -> Vec<u8> {
    let mut q_order: Vec<usize> = (0..grid.q_values.len()).collect();
    q_order.sort_by(|&a, &b| {
        grid.q_values[a]
            .partial_cmp(&grid.q_values[b])
            .expect("finite grid")
    });
    let mut n_order: Vec<usize> = (0..grid.n_values.len()).collect();
    n_order.sort_by_key(|&i| grid.n_values[i]);

    let mut out = format!("P5\n{} {}\n255\n", q_order.len(), n_order.len()).into_bytes();
    for &ni in &n_order {
        for &qi in &q_order {
            out.push((255.0 * grid.rate(qi, ni)).round() as u8);
        }
    }
    out
}

/// Overlay CSV: `n,q_threshold`, ascending n; empty-threshold rows print nan.
pub fn overlay_csv(overlay: &[(usize, Option<f64>)]) -> String {
    let mut rows = overlay.to_vec();
    rows.sort_by_key(|&(n, _)| n);
    let mut out = String::from("n,q_threshold\n");
    for (n, q) in rows {
        match q {
            Some(q) => out.push_str(&format!("{n},{q}\n")),
            None => out.push_str(&format!("{n},nan\n")),
        }
    }
    out
}
