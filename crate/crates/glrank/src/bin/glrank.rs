//! Command-line frontend: graph rank bounds, per-instance existence
//! certification, estimator fitting, generic completion rank, and Monte
//! Carlo existence curves.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 computation budget
//! exceeded, 3 inconclusive verdict.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use glrank::certify::{
    check_gaussian, check_pseudo, estimate_weak_ranks, generic_completion_rank, CertifyError,
    RankFactor, GAUSSIAN_MAX_ITER, GAUSSIAN_TOL,
};
use glrank::estim::{fit, EstimError, FitOptions, FitStatus, Objective, ObjectiveKind};
use glrank::graph::{self, Graph, GraphError, GraphFamily};
use glrank::sim::{existence_curve, Method, SimConfig, SimError};
use glrank::symmat::{format_matrix_csv, parse_data_csv, parse_matrix_csv, SymMatrixError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

#[derive(Parser)]
#[command(name = "glrank", version, about = "Existence certificates, rank bounds, and estimator fits for graphical models")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print graph invariants and randomized rank bound estimates as JSON.
    Ranks {
        /// Edge-list file (line 1 `p <count>`, then `e <i> <j>`).
        graph: PathBuf,
        #[arg(long, default_value_t = 30)]
        trials: usize,
        /// Master seed (mandatory: no ambient entropy).
        #[arg(long)]
        seed: u64,
    },
    /// Certify existence/uniqueness for a stored symmetric PSD matrix,
    /// printing both the exact pseudo-likelihood verdict and the numeric
    /// Gaussian verdict as JSON.
    Certify {
        graph: PathBuf,
        /// Dense symmetric matrix CSV.
        matrix: PathBuf,
        #[arg(long, default_value_t = GAUSSIAN_TOL)]
        tol: f64,
        #[arg(long, default_value_t = GAUSSIAN_MAX_ITER)]
        max_iter: usize,
    },
    /// Fit an estimator by coordinate descent (pseudo) or damped Newton
    /// (gaussian); prints a JSON summary and writes the fitted matrix CSV.
    Fit(FitArgs),
    /// Print the generic completion rank.
    Gcr {
        graph: PathBuf,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Monte Carlo existence probability versus sample size; writes the
    /// curve CSV to --out (stdout if omitted).
    Simulate(SimArgs),
}

#[derive(Args)]
struct FitArgs {
    /// concord | conspace | gaussian
    #[arg(long)]
    method: String,
    #[arg(long)]
    graph: PathBuf,
    /// Dense symmetric matrix CSV (mutually exclusive with --data).
    #[arg(long, conflicts_with = "data")]
    matrix: Option<PathBuf>,
    /// n x p data CSV; the sample covariance X^T X / n is formed.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Output CSV path for the fitted matrix.
    #[arg(long, default_value = "omega.csv")]
    out: PathBuf,
    /// Emit machine JSON only (default already is JSON; kept for schema
    /// stability).
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SimArgs {
    /// Edge-list file (mutually exclusive with --family).
    #[arg(long, conflicts_with = "family")]
    graph: Option<PathBuf>,
    /// Family name: path, star, circular, complete, grid,
    /// complete_bipartite, erdos_renyi, chordal.
    #[arg(long, requires = "params")]
    family: Option<String>,
    /// Comma-separated family parameters (last one is the edge
    /// probability for the random families).
    #[arg(long, value_delimiter = ',')]
    params: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    n_min: usize,
    #[arg(long)]
    n_max: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    /// Comma-separated subset of {pseudo, gaussian}.
    #[arg(long, value_delimiter = ',', default_values_t = ["pseudo".to_string(), "gaussian".to_string()])]
    methods: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {err}")]
    Io {
        path: PathBuf,
        err: std::io::Error,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Matrix(#[from] SymMatrixError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Estim(#[from] EstimError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Graph(GraphError::BudgetExceeded { .. })
            | CliError::Graph(GraphError::RetryBudgetExhausted(_))
            | CliError::Certify(CertifyError::RecursionBudget { .. }) => 2,
            CliError::Sim(SimError::Certify(CertifyError::RecursionBudget { .. })) => 2,
            _ => 1,
        }
    }
}

fn read_to_string(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|err| CliError::Io {
        path: path.clone(),
        err,
    })
}

fn read_graph(path: &PathBuf) -> Result<Graph, CliError> {
    Ok(graph::parse_edge_list(&read_to_string(path)?)?)
}

fn run_ranks(path: &PathBuf, trials: usize, seed: u64) -> Result<u8, CliError> {
    let g = read_graph(path)?;
    let inv = graph::invariants(&g)?;
    let bounds = estimate_weak_ranks(&g, trials, seed)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({ "invariants": inv, "bounds": bounds })).unwrap()
    );
    Ok(0)
}

fn run_certify(graph: &PathBuf, matrix: &PathBuf, tol: f64, max_iter: usize) -> Result<u8, CliError> {
    let g = read_graph(graph)?;
    let s = parse_matrix_csv(&read_to_string(matrix)?)?;
    if s.p() != g.p() {
        return Err(CliError::Usage(format!(
            "matrix is {0}x{0} but the graph has {1} vertices",
            s.p(),
            g.p()
        )));
    }
    let a = RankFactor::from_sym(&s);
    let pseudo = check_pseudo(&g, &a);
    let gaussian = check_gaussian(&g, &a, tol, max_iter);
    let inconclusive = gaussian.outcome == glrank::certify::GaussianOutcome::Inconclusive;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({ "pseudo": pseudo, "gaussian": gaussian })).unwrap()
    );
    Ok(if inconclusive { 3 } else { 0 })
}

fn run_fit(args: &FitArgs) -> Result<u8, CliError> {
    let kind = ObjectiveKind::parse(&args.method)
        .ok_or_else(|| CliError::Usage(format!("unknown method {:?}", args.method)))?;
    let g = read_graph(&args.graph)?;
    let s = match (&args.matrix, &args.data) {
        (Some(m), None) => parse_matrix_csv(&read_to_string(m)?)?,
        (None, Some(d)) => parse_data_csv(&read_to_string(d)?)?.1,
        _ => {
            return Err(CliError::Usage(
                "exactly one of --matrix or --data is required".into(),
            ))
        }
    };
    if s.p() != g.p() {
        return Err(CliError::Usage(format!(
            "input is {0}x{0} but the graph has {1} vertices",
            s.p(),
            g.p()
        )));
    }
    let obj = Objective::new(kind, s)?;
    let opts = FitOptions {
        tol: args.tol,
        max_iter: args.max_iter,
        ..FitOptions::default()
    };
    let res = fit(&obj, &g, &opts)?;
    std::fs::write(&args.out, format_matrix_csv(&res.omega)).map_err(|err| CliError::Io {
        path: args.out.clone(),
        err,
    })?;
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "status": res.status,
            "objective": res.objective_value,
            "iterations": res.iterations,
            "omega": args.out.display().to_string(),
        }))
        .unwrap()
    );
    Ok(if res.status == FitStatus::Maxiter { 3 } else { 0 })
}

fn run_gcr(path: &PathBuf, trials: usize, seed: u64) -> Result<u8, CliError> {
    let g = read_graph(path)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    println!("{}", generic_completion_rank(&g, trials.max(1), &mut rng));
    Ok(0)
}

fn run_simulate(args: &SimArgs) -> Result<u8, CliError> {
    let (g, label, param) = match (&args.graph, &args.family) {
        (Some(path), None) => {
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "graph".into());
            (read_graph(path)?, label, String::new())
        }
        (None, Some(kind)) => {
            let fam = GraphFamily::parse(kind, &args.params)?;
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let g = fam.generate(Some(&mut rng))?;
            let param = args
                .params
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(";");
            (g, kind.clone(), param)
        }
        _ => {
            return Err(CliError::Usage(
                "exactly one of --graph or --family is required".into(),
            ))
        }
    };
    let methods = args
        .methods
        .iter()
        .map(|m| Method::parse(m))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = SimConfig {
        graph: g,
        label,
        param,
        n_range: (args.n_min, args.n_max),
        trials: args.trials,
        seed: args.seed,
        methods,
    };
    let csv = existence_curve(&cfg)?.to_csv();
    match &args.out {
        Some(path) => std::fs::write(path, csv).map_err(|err| CliError::Io {
            path: path.clone(),
            err,
        })?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.cmd {
        Cmd::Ranks {
            graph,
            trials,
            seed,
        } => run_ranks(graph, *trials, *seed),
        Cmd::Certify {
            graph,
            matrix,
            tol,
            max_iter,
        } => run_certify(graph, matrix, *tol, *max_iter),
        Cmd::Fit(args) => run_fit(args),
        Cmd::Gcr {
            graph,
            trials,
            seed,
        } => run_gcr(graph, *trials, *seed),
        Cmd::Simulate(args) => run_simulate(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are successes; everything else is a
            // usage error (exit 1 per the interface contract).
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
