//! `densub`: sample planted instances, solve the relaxation, run recovery
//! sweeps, certify optima, and cross-check against brute force.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use densub::certificate::{build_certificate, verify_kkt};
use densub::experiments::{
    aggregate_rates, overlay_csv, rate_grid_pgm, records_csv, run_sweep, threshold_overlay,
    SweepSpec,
};
use densub::model::{sample_planted_submatrix, PlantedParams};
use densub::oracle::{brute_force_densest_subgraph_with_budget, brute_force_densest_with_budget};
use densub::{
    admm_solve, default_gamma, matrix_representation, AdmmConfig, BinaryMatrix, Selection,
    ThresholdMode,
};
use densub_cli::exit::{CliError, CliResult};
use densub_cli::formats::{
    load_coordinate_matrix, load_edge_list, save_coordinate_matrix, sniff_format, MatrixFormat,
    SelectionJson,
};
use densub_cli::manifest::RunManifest;

#[derive(Parser)]
#[command(name = "densub", version, about = "Planted dense submatrix recovery toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a planted dense submatrix instance to a directory.
    Sample(SampleArgs),
    /// Solve the relaxation for a given matrix and block shape.
    Solve(SolveArgs),
    /// Run a Monte-Carlo recovery sweep from a JSON spec.
    Sweep(SweepArgs),
    /// Build and verify the dual certificate for a selection.
    Certify(CertifyArgs),
    /// Exact brute-force optimum (small instances only).
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Auto,
    Coordinate,
    Edges,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ThresholdModeArg {
    DerivedProx,
    PaperLiteral,
}

impl From<ThresholdModeArg> for ThresholdMode {
    fn from(m: ThresholdModeArg) -> Self {
        match m {
            ThresholdModeArg::DerivedProx => ThresholdMode::DerivedProx,
            ThresholdModeArg::PaperLiteral => ThresholdMode::PaperLiteral,
        }
    }
}

#[derive(Args)]
struct MatrixInput {
    /// Matrix file (coordinate pattern or edge list).
    #[arg(long)]
    matrix: PathBuf,

    /// File format; `auto` sniffs the first data line.
    #[arg(long, value_enum, default_value = "auto")]
    format: FormatArg,

    /// Index base of edge-list files.
    #[arg(long, default_value_t = 1)]
    index_base: usize,

    /// Node count override for edge-list files (default: largest index + 1).
    #[arg(long)]
    nodes: Option<usize>,
}

impl MatrixInput {
    fn load(&self) -> CliResult<BinaryMatrix> {
        if self.index_base > 1 {
            return Err(CliError::Validation(format!(
                "--index-base must be 0 or 1, got {}",
                self.index_base
            )));
        }
        let format = match self.format {
            FormatArg::Auto => sniff_format(&self.matrix)?,
            FormatArg::Coordinate => MatrixFormat::Coordinate,
            FormatArg::Edges => MatrixFormat::EdgeList,
        };
        match format {
            MatrixFormat::Coordinate => {
                let loaded = load_coordinate_matrix(&self.matrix)?;
                if loaded.duplicates > 0 {
                    eprintln!(
                        "warning: {} duplicate coordinate entries collapsed",
                        loaded.duplicates
                    );
                }
                Ok(loaded.matrix)
            }
            MatrixFormat::EdgeList => {
                Ok(load_edge_list(&self.matrix, self.index_base, self.nodes)?)
            }
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long = "M")]
    rows: usize,
    #[arg(long = "N")]
    cols: usize,
    #[arg(long = "m")]
    block_rows: usize,
    #[arg(long = "n")]
    block_cols: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    seed: u64,
    /// Output directory for instance.coo, truth.json, manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: MatrixInput,

    #[arg(long = "m")]
    block_rows: usize,
    #[arg(long = "n")]
    block_cols: usize,

    /// Explicit regularization weight.
    #[arg(long, conflicts_with = "auto_gamma")]
    gamma: Option<f64>,

    /// Derive gamma as 6/((q-p)n) from these two probabilities.
    #[arg(long = "auto-gamma", num_args = 2, value_names = ["Q", "P"])]
    auto_gamma: Option<Vec<f64>>,

    #[arg(long)]
    tau: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    #[arg(long, value_enum, default_value = "derived-prox")]
    threshold_mode: ThresholdModeArg,

    /// Result JSON path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep spec JSON.
    #[arg(long)]
    spec: PathBuf,
    /// Output directory for records.csv, rates.pgm, overlay.csv, manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    input: MatrixInput,

    /// Selected rows, comma separated, 1-indexed.
    #[arg(long, value_delimiter = ',', required = true)]
    rows: Vec<usize>,
    /// Selected columns, comma separated, 1-indexed.
    #[arg(long, value_delimiter = ',', required = true)]
    cols: Vec<usize>,

    #[arg(long)]
    gamma: f64,
    /// Multiplier override; a small grid is searched when absent.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: MatrixInput,

    #[arg(long = "m", required_unless_present = "graph")]
    block_rows: Option<usize>,
    #[arg(long = "n", required_unless_present = "graph")]
    block_cols: Option<usize>,

    /// Densest k-subgraph mode (symmetric matrices, rows = cols = k).
    #[arg(long, requires = "k")]
    graph: bool,
    #[arg(long)]
    k: Option<usize>,

    /// Enumeration budget on the number of candidate selections.
    #[arg(long, default_value_t = densub::oracle::DEFAULT_ENUMERATION_BUDGET)]
    budget: f64,

    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sample(args) => run_sample(args),
        Command::Solve(args) => run_solve(args),
        Command::Sweep(args) => run_sweep_cmd(args),
        Command::Certify(args) => run_certify(args),
        Command::Oracle(args) => run_oracle(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn emit_json(out: Option<&Path>, value: &serde_json::Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("result serializes");
    match out {
        Some(path) => fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run_sample(args: SampleArgs) -> CliResult<()> {
    let params = PlantedParams {
        rows: args.rows,
        cols: args.cols,
        block_rows: args.block_rows,
        block_cols: args.block_cols,
        p: args.p,
        q: args.q,
        seed: args.seed,
    };
    let instance = sample_planted_submatrix(&params)?;
    fs::create_dir_all(&args.out)?;
    save_coordinate_matrix(&args.out.join("instance.coo"), &instance.matrix)?;
    let truth = SelectionJson::from_selection(&instance.truth);
    fs::write(
        args.out.join("truth.json"),
        serde_json::to_string_pretty(&truth).expect("truth serializes") + "\n",
    )?;
    let manifest = RunManifest::new(
        "sample",
        json!({
            "M": args.rows, "N": args.cols, "m": args.block_rows, "n": args.block_cols,
            "p": args.p, "q": args.q, "seed": args.seed,
            "out": args.out.display().to_string(),
        }),
    );
    manifest.write(&args.out.join("manifest.json"))?;
    eprintln!(
        "sampled {}x{} instance with planted {}x{} block ({} nonzeros) -> {}",
        params.rows,
        params.cols,
        params.block_rows,
        params.block_cols,
        instance.matrix.nnz(),
        args.out.display()
    );
    Ok(())
}

fn run_solve(args: SolveArgs) -> CliResult<()> {
    let matrix = args.input.load()?;
    let gamma = match (&args.gamma, &args.auto_gamma) {
        (Some(g), None) => *g,
        (None, Some(qp)) => default_gamma(qp[0], qp[1], args.block_cols.min(args.block_rows))?,
        (None, None) => {
            return Err(CliError::Validation(
                "one of --gamma or --auto-gamma is required".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    };
    let config = AdmmConfig::new(gamma, args.tau, args.eps)
        .with_max_iters(args.max_iters)
        .with_threshold_mode(args.threshold_mode.into());
    let result = admm_solve(&matrix, args.block_rows, args.block_cols, &config, None)?;

    let manifest = RunManifest::new(
        "solve",
        json!({
            "matrix": args.input.matrix.display().to_string(),
            "m": args.block_rows, "n": args.block_cols,
            "gamma": gamma, "tau": args.tau, "eps": args.eps,
            "max_iters": args.max_iters,
            "threshold_mode": format!("{:?}", ThresholdMode::from(args.threshold_mode)),
        }),
    );
    let history: Vec<[f64; 2]> = result
        .residual_history
        .iter()
        .map(|&(rp, rd)| [rp, rd])
        .collect();
    let value = json!({
        "selection": SelectionJson::from_selection(&result.selection),
        "iterations": result.iterations,
        "converged": result.converged,
        "objective": result.objective,
        "residual_history": history,
        "manifest": manifest.to_json(),
    });
    eprintln!(
        "{} after {} iterations (objective {:.6})",
        if result.converged { "converged" } else { "stopped" },
        result.iterations,
        result.objective
    );
    emit_json(args.out.as_deref(), &value)
}

fn run_sweep_cmd(args: SweepArgs) -> CliResult<()> {
    let text = fs::read_to_string(&args.spec)?;
    let spec: SweepSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("sweep spec: {e}")))?;
    let records = run_sweep(&spec)?;
    let grid = aggregate_rates(&spec, &records)?;
    let overlay = threshold_overlay(&spec, spec.overlay_c1);

    fs::create_dir_all(&args.out_dir)?;
    fs::write(args.out_dir.join("records.csv"), records_csv(&records))?;
    fs::write(args.out_dir.join("rates.pgm"), rate_grid_pgm(&grid))?;
    fs::write(args.out_dir.join("overlay.csv"), overlay_csv(&overlay))?;
    let manifest = RunManifest::new(
        "sweep",
        json!({
            "spec_path": args.spec.display().to_string(),
            "spec": spec,
            "out_dir": args.out_dir.display().to_string(),
        }),
    );
    manifest.write(&args.out_dir.join("manifest.json"))?;
    eprintln!(
        "swept {} cells x {} trials -> {}",
        spec.q_values.len() * spec.n_values.len(),
        spec.trials,
        args.out_dir.display()
    );
    Ok(())
}

fn run_certify(args: CertifyArgs) -> CliResult<()> {
    let matrix = args.input.load()?;
    let json_sel = SelectionJson {
        rows: args.rows.clone(),
        cols: args.cols.clone(),
        index_base: 1,
    };
    let sel: Selection = json_sel.to_selection()?;
    sel.check_bounds(matrix.rows(), matrix.cols())?;

    let cert = build_certificate(&matrix, &sel, args.gamma, args.lambda)?;
    let rep = matrix_representation::<f64>(&matrix, &sel)?;
    let report = verify_kkt(&matrix, &rep, &cert, args.gamma, args.tol);

    let manifest = RunManifest::new(
        "certify",
        json!({
            "matrix": args.input.matrix.display().to_string(),
            "rows": args.rows, "cols": args.cols,
            "gamma": args.gamma, "lambda": args.lambda, "tol": args.tol,
        }),
    );
    let value = json!({
        "lambda": cert.lambda,
        "report": report,
        "manifest": manifest.to_json(),
    });
    eprintln!(
        "{} (||W|| = {:.6}, min Lambda = {:.3e}, min Xi = {:.3e})",
        if report.certified { "certified" } else { "not certified" },
        report.spectral_norm_w,
        report.min_lambda_entry,
        report.min_xi_entry
    );
    emit_json(args.out.as_deref(), &value)
}

fn run_oracle(args: OracleArgs) -> CliResult<()> {
    let matrix = args.input.load()?;
    let result = if args.graph {
        let k = args.k.expect("clap enforces --k with --graph");
        brute_force_densest_subgraph_with_budget(&matrix, k, args.budget)?
    } else {
        let m = args.block_rows.expect("required unless --graph");
        let n = args.block_cols.expect("required unless --graph");
        brute_force_densest_with_budget(&matrix, m, n, args.budget)?
    };

    let manifest = RunManifest::new(
        "oracle",
        json!({
            "matrix": args.input.matrix.display().to_string(),
            "m": args.block_rows, "n": args.block_cols,
            "graph": args.graph, "k": args.k, "budget": args.budget,
        }),
    );
    let value = json!({
        "best": SelectionJson::from_selection(&result.best),
        "best_count": result.best_count,
        "optima_count": result.optima_count,
        "manifest": manifest.to_json(),
    });
    eprintln!(
        "optimum holds {} nonzeros ({} optimal selections)",
        result.best_count, result.optima_count
    );
    emit_json(args.out.as_deref(), &value)
}
