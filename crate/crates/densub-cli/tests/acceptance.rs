//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its elapsed time (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Criterion 8 needs the JAZZ/EMAIL network files, which are not vendored;
//! point DENSUB_JAZZ_EDGES / DENSUB_EMAIL_EDGES at 1-indexed edge lists to
//! enable it (otherwise it reports SKIP).

use std::sync::OnceLock;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use densub::certificate::{build_certificate, verify_kkt};
use densub::dense::DenseMatrix;
use densub::experiments::{
    aggregate_rates, records_csv, records_csv_without_walltime, run_sweep, MRule, PRule,
    SolverSettings, SweepRecord, SweepSpec,
};
use densub::model::{bernstein_band, sample_planted_submatrix, PlantedParams};
use densub::oracle::{brute_force_densest, brute_force_densest_with_budget};
use densub::prox::{
    project_box01, project_nonnegative, project_sum_constraint, prox_nuclear_with_values,
    svd_factors,
};
use densub::rep::{matrix_representation, project_onto_support};
use densub::solver::{
    admm_solve, admm_solve_observed, default_gamma, is_recovered, recovery_error, AdmmConfig,
    ThresholdMode, RECOVERY_THRESHOLD,
};
use densub::{BinaryMatrix, Selection};

fn report(criterion: &str, start: Instant, detail: &str) {
    println!(
        "criterion {criterion}: PASS ({:.1}s) {detail}",
        start.elapsed().as_secs_f64()
    );
}

fn random_matrix(rng: &mut ChaCha8Rng, max_dim: usize) -> DenseMatrix<f64> {
    let rows = rng.random_range(1..=max_dim as u64) as usize;
    let cols = rng.random_range(1..=max_dim as u64) as usize;
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>() * 8.0 - 4.0)
}

/// Brute-force scalar prox of phi*|x| at sigma: two-stage grid search.
fn scalar_prox_grid(sigma: f64, phi: f64) -> f64 {
    let h = |x: f64| 0.5 * (x - sigma) * (x - sigma) + phi * x.abs();
    let mut best_x = 0.0;
    let mut best = h(0.0);
    let coarse = 1e-3;
    let mut x = 0.0;
    while x <= sigma + coarse {
        let v = h(x);
        if v < best {
            best = v;
            best_x = x;
        }
        x += coarse;
    }
    let fine = 1e-7;
    let lo = (best_x - 2.0 * coarse).max(0.0);
    let hi = best_x + 2.0 * coarse;
    let mut x = lo;
    while x <= hi {
        let v = h(x);
        if v < best {
            best = v;
            best_x = x;
        }
        x += fine;
    }
    best_x
}

#[test]
fn criterion_01_prox_projection_properties() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);

    // Idempotence and nonexpansiveness, 100 random input pairs per projection.
    for _ in 0..100 {
        let a = random_matrix(&mut rng, 10);
        let b = DenseMatrix::from_fn(a.rows(), a.cols(), |_, _| rng.random::<f64>() * 8.0 - 4.0);
        let target = rng.random::<f64>() * 40.0 - 20.0;

        let pa = project_box01(&a);
        let pb = project_box01(&b);
        assert_eq!(project_box01(&pa), pa, "box projection not idempotent");
        assert!(pa.frobenius_distance(&pb) <= a.frobenius_distance(&b) + 1e-12);

        let na = project_nonnegative(&a);
        let nb = project_nonnegative(&b);
        assert_eq!(project_nonnegative(&na), na);
        assert!(na.frobenius_distance(&nb) <= a.frobenius_distance(&b) + 1e-12);

        let sa = project_sum_constraint(&a, target);
        let sb = project_sum_constraint(&b, target);
        assert!((sa.entry_sum() - target).abs() <= 1e-9 * target.abs().max(1.0));
        assert!(project_sum_constraint(&sa, target).frobenius_distance(&sa) <= 1e-10);
        assert!(sa.frobenius_distance(&sb) <= a.frobenius_distance(&b) + 1e-12);

        // Support projection (the fourth primitive) is idempotent exactly.
        let mask = BinaryMatrix::new(
            a.rows(),
            a.cols(),
            (0..a.rows() * a.cols())
                .filter(|_| rng.random::<f64>() < 0.4)
                .map(|k| (k / a.cols(), k % a.cols())),
        )
        .unwrap();
        let proj = project_onto_support(&a, &mask).unwrap();
        assert_eq!(project_onto_support(&proj, &mask).unwrap(), proj);
    }

    // Prox vs scalar grid search on 100 random inputs.
    for _ in 0..100 {
        let d = random_matrix(&mut rng, 6);
        let phi = rng.random::<f64>() * 2.0;
        let sigmas = svd_factors(&d).unwrap().singular_values;
        let (_, shrunk) = prox_nuclear_with_values(&d, phi).unwrap();
        for (k, &sigma) in sigmas.iter().enumerate() {
            let oracle = scalar_prox_grid(sigma, phi);
            assert!(
                (shrunk[k] - oracle).abs() <= 1e-6,
                "prox value {} vs grid {} at sigma {sigma}, phi {phi}",
                shrunk[k],
                oracle
            );
        }
    }

    assert!(start.elapsed().as_secs_f64() < 10.0, "criterion 1 over budget");
    report("1 (prox/projection properties)", start, "");
}

#[test]
fn criterion_02_constraint_satisfaction_at_convergence() {
    let start = Instant::now();
    let eps = 1e-4;
    let gamma = default_gamma(0.9f64, 0.1, 20).unwrap();
    for seed in 0..20u64 {
        let params = PlantedParams {
            rows: 80,
            cols: 80,
            block_rows: 20,
            block_cols: 20,
            p: 0.1,
            q: 0.9,
            seed,
        };
        let inst = sample_planted_submatrix(&params).unwrap();
        let config = AdmmConfig::new(gamma, 0.35, eps);
        let mut final_state = None;
        let result = admm_solve_observed(&inst.matrix, 20, 20, &config, None, |s| {
            final_state = Some(s.clone());
        })
        .unwrap();
        assert!(result.converged, "seed {seed} did not converge");
        let state = final_state.unwrap();

        let x_norm = result.x.frobenius_norm();
        let diff = result.x.zip_map(&result.y, |x, y| x - y);
        let support_violation = project_onto_support(&diff, &inst.matrix)
            .unwrap()
            .frobenius_norm()
            / x_norm;
        assert!(support_violation <= 10.0 * eps, "seed {seed}: support {support_violation}");

        let mn = 400.0;
        assert!((result.x.entry_sum() - mn).abs() / mn <= 10.0 * eps);
        assert!(state.z.min_entry() >= 0.0 && state.z.max_entry() <= 1.0);
        assert!(state.y.min_entry() >= 0.0);
        assert!((state.w.entry_sum() - mn).abs() <= 1e-9 * mn);
    }
    assert!(start.elapsed().as_secs_f64() < 120.0, "criterion 2 over budget");
    report("2 (constraints at convergence, 20 seeds)", start, "");
}

#[test]
fn criterion_03_oracle_equivalence_noiseless() {
    let start = Instant::now();
    // C(20,5)^2 exceeds the default enumeration guard; the budget override
    // exists for exactly this acceptance size.
    let cases: [(usize, usize, usize, usize, f64); 3] = [
        (10, 10, 3, 3, 1e8),
        (12, 8, 4, 2, 1e8),
        (20, 20, 5, 5, 3e8),
    ];
    for &(rows, cols, m, n, budget) in &cases {
        for seed in 0..10u64 {
            let params = PlantedParams {
                rows,
                cols,
                block_rows: m,
                block_cols: n,
                p: 0.0,
                q: 1.0,
                seed,
            };
            let inst = sample_planted_submatrix(&params).unwrap();
            let gamma = default_gamma(1.0f64, 0.0, m.min(n)).unwrap();
            let config = AdmmConfig::new(gamma, 0.35, 1e-4);
            let result = admm_solve(&inst.matrix, m, n, &config, None).unwrap();
            let oracle = brute_force_densest_with_budget(&inst.matrix, m, n, budget).unwrap();
            assert_eq!(
                result.selection, oracle.best,
                "({rows},{cols},{m},{n}) seed {seed}"
            );
        }
    }
    report("3 (noiseless oracle equivalence, 30 runs)", start, "");
}

#[test]
fn criterion_04_oracle_equivalence_noisy_desk_scale() {
    let start = Instant::now();
    let mut matches = 0;
    for seed in 0..10u64 {
        let params = PlantedParams {
            rows: 10,
            cols: 10,
            block_rows: 4,
            block_cols: 4,
            p: 0.05,
            q: 1.0,
            seed,
        };
        let inst = sample_planted_submatrix(&params).unwrap();
        let gamma = default_gamma(1.0f64, 0.05, 4).unwrap();
        let config = AdmmConfig::new(gamma, 0.35, 1e-4);
        let result = admm_solve(&inst.matrix, 4, 4, &config, None).unwrap();
        let oracle = brute_force_densest(&inst.matrix, 4, 4).unwrap();
        if result.selection == oracle.best {
            matches += 1;
        }
    }
    assert!(matches >= 8, "only {matches}/10 matched the oracle");
    report(
        "4 (noisy desk-scale oracle agreement)",
        start,
        &format!("[{matches}/10 matched]"),
    );
}

fn phase_transition_spec() -> SweepSpec {
    SweepSpec {
        rows: 150,
        cols: 150,
        q_values: vec![0.45, 0.65, 0.85],
        n_values: vec![15, 30, 45, 60],
        m_rule: MRule::Scale { factor: 2.0 },
        p_rule: PRule::Fixed { p: 0.25 },
        trials: 5,
        master_seed: 42,
        solver: SolverSettings {
            tau: 0.35,
            epsilon: 1e-4,
            max_iters: 2000,
            threshold_mode: ThresholdMode::DerivedProx,
        },
        recovery_threshold: RECOVERY_THRESHOLD,
        overlay_c1: 1.0,
    }
}

static SHARED_SWEEP: OnceLock<Vec<SweepRecord>> = OnceLock::new();

fn shared_sweep() -> &'static [SweepRecord] {
    SHARED_SWEEP.get_or_init(|| run_sweep(&phase_transition_spec()).unwrap())
}

#[test]
fn criterion_05_scaled_phase_transition() {
    let start = Instant::now();
    let spec = phase_transition_spec();
    let records = shared_sweep();
    let grid = aggregate_rates(&spec, records).unwrap();

    // Monotone along q for every n and along n for every q (no degenerate
    // cells in this grid: q > p everywhere).
    for ni in 0..spec.n_values.len() {
        for qi in 1..spec.q_values.len() {
            assert!(
                grid.rate(qi, ni) >= grid.rate(qi - 1, ni),
                "rate not monotone in q at n = {}",
                spec.n_values[ni]
            );
        }
    }
    for qi in 0..spec.q_values.len() {
        for ni in 1..spec.n_values.len() {
            assert!(
                grid.rate(qi, ni) >= grid.rate(qi, ni - 1),
                "rate not monotone in n at q = {}",
                spec.q_values[qi]
            );
        }
    }

    let strong = grid.rate(2, 3); // q = 0.85, n = 60
    let weak = grid.rate(0, 0); // q = 0.45, n = 15
    assert!(strong >= 0.8, "strong corner rate {strong}");
    assert!(weak <= 0.2, "weak corner rate {weak}");
    assert!(
        start.elapsed().as_secs_f64() < 1800.0,
        "criterion 5 over budget"
    );
    report(
        "5 (scaled phase transition)",
        start,
        &format!("[corners: strong {strong}, weak {weak}]"),
    );
}

#[test]
fn criterion_06_recovery_criterion_fidelity() {
    let start = Instant::now();
    let a = BinaryMatrix::all_zeros(10, 10).unwrap();
    let sel = Selection::new((0..10).collect(), (0..10).collect()).unwrap();
    let rep = matrix_representation::<f64>(&a, &sel).unwrap();
    let norm = rep.x.frobenius_norm();
    assert_eq!(norm, 10.0);

    // Exact error values.
    assert_eq!(recovery_error(&rep.x.clone(), &rep), 0.0);
    assert_eq!(recovery_error(&DenseMatrix::zeros(10, 10), &rep), 1.0);
    let mut one_flip = rep.x.clone();
    one_flip[(2, 3)] += 0.1;
    assert!((recovery_error(&one_flip, &rep) - 0.01).abs() < 1e-15);

    // Strict threshold at 1e-3.
    assert!(is_recovered(&rep.x.clone(), &rep, RECOVERY_THRESHOLD));
    assert!(!is_recovered(&one_flip, &rep, RECOVERY_THRESHOLD));
    let mut just_below = rep.x.clone();
    just_below[(0, 0)] += 0.99e-2;
    assert!(is_recovered(&just_below, &rep, RECOVERY_THRESHOLD));
    let mut just_above = rep.x.clone();
    just_above[(0, 0)] += 1.01e-2;
    assert!(!is_recovered(&just_above, &rep, RECOVERY_THRESHOLD));
    report("6 (recovery criterion fidelity)", start, "");
}

#[test]
fn criterion_07_certificate_soundness() {
    let start = Instant::now();
    let gamma = default_gamma(0.95f64, 0.05, 60).unwrap();
    let mut certified = 0;
    for seed in 0..10u64 {
        let params = PlantedParams {
            rows: 200,
            cols: 200,
            block_rows: 60,
            block_cols: 60,
            p: 0.05,
            q: 0.95,
            seed,
        };
        let inst = sample_planted_submatrix(&params).unwrap();
        let cert = build_certificate(&inst.matrix, &inst.truth, gamma, None).unwrap();
        let rep = matrix_representation::<f64>(&inst.matrix, &inst.truth).unwrap();
        let reportcard = verify_kkt(&inst.matrix, &rep, &cert, gamma, 1e-6);
        if !reportcard.certified {
            continue;
        }
        certified += 1;
        assert!(reportcard.min_lambda_entry >= -1e-6);
        assert!(reportcard.min_xi_entry >= -1e-6);
        assert!(reportcard.spectral_norm_w <= 1.0 + 1e-6);

        // Every certified instance must also be what the solver recovers.
        let config = AdmmConfig::new(gamma, 0.35, 1e-4);
        let result = admm_solve(&inst.matrix, 60, 60, &config, None).unwrap();
        assert_eq!(result.selection, inst.truth, "seed {seed}");
    }
    assert!(certified >= 9, "only {certified}/10 certified");
    assert!(start.elapsed().as_secs_f64() < 300.0, "criterion 7 over budget");
    report(
        "7 (certificate soundness)",
        start,
        &format!("[{certified}/10 certified]"),
    );
}

fn run_network(path: &str, m: usize, gamma: f64, tau: f64, max_paper_iters: usize) -> (usize, bool, Vec<usize>, Vec<usize>, f64) {
    let started = Instant::now();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_densub"))
        .args([
            "solve",
            "--matrix",
            path,
            "--format",
            "edges",
            "--m",
            &m.to_string(),
            "--n",
            &m.to_string(),
            "--gamma",
            &gamma.to_string(),
            "--tau",
            &tau.to_string(),
            "--eps",
            "1e-2",
        ])
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "network solve failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let wall = started.elapsed().as_secs_f64();
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let iters = value["iterations"].as_u64().unwrap() as usize;
    let converged = value["converged"].as_bool().unwrap();
    let rows: Vec<usize> = value["selection"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap() as usize)
        .collect();
    let cols: Vec<usize> = value["selection"]["cols"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap() as usize)
        .collect();
    assert!(converged, "network run did not converge");
    assert!(
        iters <= 2 * max_paper_iters,
        "took {iters} iterations, budget {}",
        2 * max_paper_iters
    );
    (iters, converged, rows, cols, wall)
}

#[test]
fn criterion_08_network_runs_optional() {
    let start = Instant::now();
    let mut ran = 0;
    if let Ok(jazz) = std::env::var("DENSUB_JAZZ_EDGES") {
        let gamma = std::env::var("DENSUB_JAZZ_GAMMA")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(0.15);
        let (iters, _, rows, cols, wall) = run_network(&jazz, 100, gamma, 0.85, 50);
        assert_eq!(rows.len(), 100, "JAZZ community size");
        assert_eq!(rows, cols, "JAZZ selection is a node community");
        println!("  JAZZ: {iters} iterations, {wall:.2} s wall (reported, not asserted)");
        ran += 1;
    }
    if let Ok(email) = std::env::var("DENSUB_EMAIL_EDGES") {
        let gamma = std::env::var("DENSUB_EMAIL_GAMMA")
            .ok()
            .and_then(|s| s.parse().ok())
            .unwrap_or(0.2);
        let (iters, _, rows, cols, wall) = run_network(&email, 289, gamma, 0.35, 15);
        assert_eq!(rows.len(), 289, "EMAIL community size");
        assert_eq!(rows, cols, "EMAIL selection is a node community");
        println!("  EMAIL: {iters} iterations, {wall:.2} s wall (reported, not asserted)");
        ran += 1;
    }
    if ran == 0 {
        println!(
            "criterion 8 (network runs): SKIP [optional, data-dependent; set \
             DENSUB_JAZZ_EDGES / DENSUB_EMAIL_EDGES]"
        );
    } else {
        report("8 (network runs)", start, &format!("[{ran} network(s)]"));
    }
}

#[test]
fn criterion_09_sampler_statistics() {
    let start = Instant::now();
    let band = bernstein_band(80 * 40, 0.85f64, 500.0).unwrap();
    let expected = 0.85 * (80 * 40) as f64;
    let mut violations = 0;
    for seed in 0..50u64 {
        let params = PlantedParams {
            rows: 500,
            cols: 500,
            block_rows: 80,
            block_cols: 40,
            p: 0.25,
            q: 0.85,
            seed,
        };
        let inst = sample_planted_submatrix(&params).unwrap();
        let in_block = inst
            .matrix
            .nonzeros()
            .iter()
            .filter(|&&(i, j)| inst.truth.contains_row(i) && inst.truth.contains_col(j))
            .count() as f64;
        if (in_block - expected).abs() > band {
            violations += 1;
        }
    }
    assert!(violations <= 2, "{violations}/50 outside the deviation band");
    report(
        "9 (sampler statistics)",
        start,
        &format!("[{violations}/50 violations, band {band:.1}]"),
    );
}

#[test]
fn criterion_10_sweep_determinism() {
    let start = Instant::now();
    let spec = phase_transition_spec();
    let first = shared_sweep();
    let second = run_sweep(&spec).unwrap();

    assert_eq!(
        records_csv_without_walltime(first),
        records_csv_without_walltime(&second),
        "sweep records differ between executions"
    );
    // The full CSV schema only differs in the wall-time column.
    let full_a = records_csv(first);
    let full_b = records_csv(&second);
    for (la, lb) in full_a.lines().zip(full_b.lines()) {
        let ca: Vec<&str> = la.split(',').collect();
        let cb: Vec<&str> = lb.split(',').collect();
        assert_eq!(ca.len(), cb.len());
        for k in 0..ca.len() {
            if k != 9 {
                assert_eq!(ca[k], cb[k], "column {k} differs: {la} vs {lb}");
            }
        }
    }
    report("10 (sweep determinism)", start, "");
}
