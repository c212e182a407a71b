//! Command-line surface and its translation into solver inputs.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use infgmres::{BasisVariant, Cx};

#[derive(Debug, Parser)]
#[command(
    name = "infgmres",
    about = "Matrix-free Krylov solver for parameter-dependent linear systems A(mu) x = b",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve A(mu) x = b for a grid of mu values with one shared basis.
    Sweep(SweepArgs),
    /// Emit per-iteration residual histories with predicted bound lines.
    Convergence(ConvergenceArgs),
    /// Emit predicted convergence factors |mu| |gamma_{j+1}| per mu and j.
    Bound(BoundArgs),
    /// Evaluate the annihilated power norms behind the outlier bound on a
    /// built-in matrix with prescribed spectrum.
    Gelfand(GelfandArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Full,
    Lowrank,
    Tensor,
}

impl From<VariantArg> for BasisVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Full => BasisVariant::Full,
            VariantArg::Lowrank => BasisVariant::LowRank,
            VariantArg::Tensor => BasisVariant::Tensor,
        }
    }
}

/// Problem selection shared by the solver subcommands.
#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Problem family: delay | helmholtz1d | generic:<manifest.json>
    #[arg(long)]
    pub problem: String,

    /// Problem size (defaults: delay 100, helmholtz1d 5000)
    #[arg(long)]
    pub n: Option<usize>,

    /// Seed for the reproducible random delay matrices
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Basis storage scheme
    #[arg(long, value_enum, default_value_t = VariantArg::Full)]
    pub variant: VariantArg,
}

/// Parameter grid shared by the solver subcommands.
#[derive(Debug, Args)]
pub struct MuArgs {
    /// Explicit comma-separated list of real parts, e.g. 0.01,0.05,0.1
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub mu: Option<Vec<f64>>,

    /// Uniform grid start:stop:count over the real axis, e.g. 0.01:0.2:20
    #[arg(long)]
    pub mu_range: Option<String>,

    /// Constant imaginary part added to every grid point
    #[arg(long, default_value_t = 0.0)]
    pub mu_imag: f64,
}

impl MuArgs {
    pub fn values(&self) -> Result<Vec<Cx>, String> {
        let reals: Vec<f64> = match (&self.mu, &self.mu_range) {
            (Some(list), None) => list.clone(),
            (None, Some(range)) => {
                let parts: Vec<&str> = range.split(':').collect();
                if parts.len() != 3 {
                    return Err(format!("--mu-range must be start:stop:count, got '{range}'"));
                }
                let start: f64 = parts[0]
                    .parse()
                    .map_err(|_| format!("bad range start '{}'", parts[0]))?;
                let stop: f64 = parts[1]
                    .parse()
                    .map_err(|_| format!("bad range stop '{}'", parts[1]))?;
                let count: usize = parts[2]
                    .parse()
                    .map_err(|_| format!("bad range count '{}'", parts[2]))?;
                if count == 0 {
                    return Err("--mu-range count must be positive".into());
                }
                if count == 1 {
                    vec![start]
                } else {
                    (0..count)
                        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                        .collect()
                }
            }
            (Some(_), Some(_)) => {
                return Err("--mu and --mu-range are mutually exclusive".into());
            }
            (None, None) => return Err("one of --mu or --mu-range is required".into()),
        };
        if reals.is_empty() {
            return Err("the mu list is empty".into());
        }
        if reals.iter().any(|r| !r.is_finite()) || !self.mu_imag.is_finite() {
            return Err("mu values must be finite".into());
        }
        Ok(reals
            .into_iter()
            .map(|re| Cx::new(re, self.mu_imag))
            .collect())
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub mu: MuArgs,

    /// True-residual convergence tolerance
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,

    /// Maximum Krylov iterations
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,

    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub mu: MuArgs,

    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,

    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,

    /// Outlier counts j for the bound columns, e.g. 0,4
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "0")]
    pub outliers: Vec<usize>,

    /// Krylov dimension used for the Ritz spectrum estimate
    #[arg(long, default_value_t = 60)]
    pub spectrum_dim: usize,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub mu: MuArgs,

    /// Outlier counts j to tabulate
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "0")]
    pub outliers: Vec<usize>,

    /// Krylov dimension used for the Ritz spectrum estimate
    #[arg(long, default_value_t = 60)]
    pub spectrum_dim: usize,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GelfandArgs {
    /// Outlier count j
    #[arg(long, default_value_t = 0)]
    pub outliers: usize,

    /// Largest power k to evaluate
    #[arg(long, default_value_t = 200)]
    pub k_max: usize,

    /// Seed for the unitary factors of the constructed similarity
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Condition number of the similarity transform
    #[arg(long, default_value_t = 100.0)]
    pub kappa: f64,

    #[arg(long)]
    pub out: Option<PathBuf>,
}
