use std::path::PathBuf;

use adainject::landscape::LandscapeId;
use adainject::OptimizerKind;
use clap::{Args, Parser, Subcommand};

/// Experiment harness for the injected adaptive optimizers.
#[derive(Debug, Parser)]
#[command(name = "adainject", version, arg_required_else_help = true)]
pub struct Cli {
    /// TOML file with run settings; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output root; each run writes into `<out>/<run id>/`.
    #[arg(long, global = true, env = "ADAINJECT_OUT", default_value = "runs")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trajectories on the 1-D landscapes.
    Toy(ToyArgs),
    /// Online regret of every optimizer on generated convex sequences.
    Regret(RegretArgs),
    /// Minibatch training of the small perceptron.
    Train(TrainArgs),
    /// Training grid over the injection divisor k.
    SweepK(SweepArgs),
    /// Analytic vs finite-difference gradients of every landscape and the MLP.
    Gradcheck(GradcheckArgs),
    /// Vectorised kernels vs the scalar reference transcription.
    OracleCheck(OracleArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Toy(_) => "toy",
            Command::Regret(_) => "regret",
            Command::Train(_) => "train",
            Command::SweepK(_) => "sweep-k",
            Command::Gradcheck(_) => "gradcheck",
            Command::OracleCheck(_) => "oracle-check",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct OptimizerFlags {
    /// Comma-separated optimizer kinds.
    #[arg(long = "optimizer", value_delimiter = ',')]
    pub optimizers: Option<Vec<OptimizerKind>>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long = "eps")]
    pub epsilon: Option<f64>,
    /// Injection divisor.
    #[arg(long)]
    pub k: Option<f64>,
    /// First-moment decay factor (1 disables the schedule).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Also write a gnuplot script next to the CSVs.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ToyArgs {
    #[command(flatten)]
    pub opt: OptimizerFlags,
    #[arg(long = "landscape", value_delimiter = ',')]
    pub landscapes: Option<Vec<LandscapeId>>,
    #[arg(long = "iters")]
    pub iterations: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    /// `direct` or `squared`.
    #[arg(long)]
    pub loss: Option<String>,
    /// Emit an overshoot/oscillation verdict per landscape.
    #[arg(long)]
    pub compare: bool,
    /// Sweep α and report where the overshoot contrast appears.
    #[arg(long)]
    pub calibrate: bool,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub window: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RegretArgs {
    #[command(flatten)]
    pub opt: OptimizerFlags,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub horizons: Option<Vec<usize>>,
    /// `quadratic` or `linear`.
    #[arg(long)]
    pub sequence: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DataFlags {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub data_seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub opt: OptimizerFlags,
    #[command(flatten)]
    pub data: DataFlags,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub opt: OptimizerFlags,
    #[command(flatten)]
    pub data: DataFlags,
    #[arg(long, value_delimiter = ',')]
    pub k_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct GradcheckArgs {
    #[command(flatten)]
    pub opt: OptimizerFlags,
    /// Random points per landscape.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Central-difference step for the landscapes.
    #[arg(long)]
    pub fd_step: Option<f64>,
    /// Central-difference step for the MLP parameters.
    #[arg(long)]
    pub mlp_fd_step: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub opt: OptimizerFlags,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
}
