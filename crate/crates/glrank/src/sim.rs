//! Monte Carlo existence-probability curves over sample size and rank
//! bound sweeps across graph catalogs.

use crate::certify::{
    check_gaussian, check_pseudo, child_rng, estimate_weak_ranks, CertifyError, GaussianOutcome,
    RankBounds, RankFactor, GAUSSIAN_MAX_ITER, GAUSSIAN_TOL,
};
use crate::graph::Graph;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("bound chain violated on graph {index} ({label})")]
    ChainViolation { index: usize, label: String },
    #[error(transparent)]
    Certify(#[from] CertifyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pseudo,
    Gaussian,
}

impl Method {
    pub fn parse(s: &str) -> Result<Method, SimError> {
        match s {
            "pseudo" => Ok(Method::Pseudo),
            "gaussian" => Ok(Method::Gaussian),
            other => Err(SimError::Config(format!("unknown method {other:?}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Pseudo => "pseudo",
            Method::Gaussian => "gaussian",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub graph: Graph,
    /// Graph identifier for the CSV `graph` column.
    pub label: String,
    /// Family parameter string for the CSV `param` column.
    pub param: String,
    /// Inclusive sample-size interval, within [1, p+2].
    pub n_range: (usize, usize),
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let p = self.graph.p();
        let (lo, hi) = self.n_range;
        if self.trials < 1 {
            return Err(SimError::Config("trials must be >= 1".into()));
        }
        if lo < 1 || hi > p + 2 || lo > hi {
            return Err(SimError::Config(format!(
                "n_range [{lo}, {hi}] must sit inside [1, {}]",
                p + 2
            )));
        }
        if self.methods.is_empty() {
            return Err(SimError::Config("at least one method required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimRow {
    pub graph: String,
    pub p: usize,
    pub param: String,
    pub n: usize,
    pub method: Method,
    pub trials: usize,
    pub prob: f64,
    pub stderr: f64,
    pub inconclusive: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimCurve {
    pub rows: Vec<SimRow>,
    pub seed: u64,
}

impl SimCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("graph,p,param,n,method,trials,prob,stderr,inconclusive,seed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.graph,
                r.p,
                r.param,
                r.n,
                r.method.as_str(),
                r.trials,
                r.prob,
                r.stderr,
                r.inconclusive,
                r.seed
            ));
        }
        out
    }

    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &SimRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }
}

/// Fractional bits of the dyadic grid the normal draws are rounded to.
/// Small exact entries keep the rational elimination fast; the 2^-16
/// resolution perturbs existence probabilities negligibly.
const SAMPLE_GRID_BITS: u32 = 16;

/// Exact factor of the sample covariance: X is an n x p standard normal
/// draw rounded to the dyadic grid. The 1/n covariance scaling is
/// omitted because every downstream verdict (kernel dimension,
/// existence) is invariant to positive scaling of X^T X.
pub fn sample_covariance<R: Rng + ?Sized>(p: usize, n: usize, rng: &mut R) -> RankFactor {
    assert!(p >= 1 && n >= 1);
    let grid = f64::from(2u32.pow(SAMPLE_GRID_BITS));
    let x = DMatrix::from_fn(n, p, |_, _| {
        let z: f64 = rng.sample(StandardNormal);
        (z * grid).round() / grid
    });
    RankFactor::from_f64(&x)
}

/// Per-trial outcome: Some(exists) when conclusive, None otherwise.
struct TrialOutcome {
    pseudo: Option<bool>,
    gaussian: Option<bool>,
}

/// One-level tally of trial outcomes for one (n, method) cell.
fn tally(
    cfg: &SimConfig,
    n: usize,
    method: Method,
    outcomes: &[TrialOutcome],
) -> SimRow {
    let picked = |o: &TrialOutcome| match method {
        Method::Pseudo => o.pseudo,
        Method::Gaussian => o.gaussian,
    };
    let conclusive = outcomes.iter().filter_map(picked).count();
    let exists = outcomes.iter().filter_map(picked).filter(|&e| e).count();
    let prob = if conclusive == 0 {
        0.0
    } else {
        exists as f64 / conclusive as f64
    };
    SimRow {
        graph: cfg.label.clone(),
        p: cfg.graph.p(),
        param: cfg.param.clone(),
        n,
        method,
        trials: cfg.trials,
        prob,
        stderr: (prob * (1.0 - prob) / cfg.trials as f64).sqrt(),
        inconclusive: outcomes.len() - conclusive,
        seed: cfg.seed,
    }
}

fn run_trial(cfg: &SimConfig, n: usize, trial: usize) -> TrialOutcome {
    // Common random numbers: one draw per trial serves both methods.
    let stream = (n as u64) << 32 | trial as u64;
    let mut rng = child_rng(cfg.seed, stream);
    let a = sample_covariance(cfg.graph.p(), n, &mut rng);
    let pseudo = cfg
        .methods
        .contains(&Method::Pseudo)
        .then(|| check_pseudo(&cfg.graph, &a).exists);
    let gaussian = cfg.methods.contains(&Method::Gaussian).then(|| {
        match check_gaussian(&cfg.graph, &a, GAUSSIAN_TOL, GAUSSIAN_MAX_ITER).outcome {
            GaussianOutcome::Exists => Some(true),
            GaussianOutcome::NotExists => Some(false),
            GaussianOutcome::Inconclusive => None,
        }
    });
    TrialOutcome {
        pseudo,
        gaussian: gaussian.flatten(),
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, SimError> {
    let threads = std::env::var("GLRANK_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0); // 0 lets rayon pick
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SimError::Config(e.to_string()))
}

/// Existence probability versus sample size. Trials are independent work
/// units with child seeds derived from (master seed, n, trial), so the
/// result is schedule independent and bitwise reproducible.
pub fn existence_curve(cfg: &SimConfig) -> Result<SimCurve, SimError> {
    cfg.validate()?;
    let pool = thread_pool()?;
    let (lo, hi) = cfg.n_range;
    let mut rows = Vec::new();
    for n in lo..=hi {
        let outcomes: Vec<TrialOutcome> = pool.install(|| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial(cfg, n, t))
                .collect()
        });
        for &m in &cfg.methods {
            rows.push(tally(cfg, n, m, &outcomes));
        }
    }
    Ok(SimCurve {
        rows,
        seed: cfg.seed,
    })
}

/// Rank bound estimates per graph; a violated chain is a named failure.
pub fn bound_sweep(
    graphs: &[(String, Graph)],
    trials: usize,
    seed: u64,
) -> Result<Vec<RankBounds>, SimError> {
    let mut out = Vec::with_capacity(graphs.len());
    for (index, (label, g)) in graphs.iter().enumerate() {
        let bounds = estimate_weak_ranks(g, trials, seed.wrapping_add(index as u64))?;
        if !bounds.chain_holds() {
            return Err(SimError::ChainViolation {
                index,
                label: label.clone(),
            });
        }
        out.push(bounds);
    }
    Ok(out)
}
