use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "aseries", version, about = "Fold, cusp and swallowtail detection for discretised variational PDEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Continue a branch of an augmented system and record events.
    Continue(ContinueArgs),
    /// Locate the chain fold -> cusp -> swallowtail.
    Hunt(HuntArgs),
    /// Refine a located singularity across a sequence of grids.
    Converge(ConvergeArgs),
    /// Classify a critical point from dense tensors or a discretised state.
    Classify(ClassifyArgs),
    /// Turn report documents into plot-ready CSV files.
    ExportPlot(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemKind {
    Bratu,
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StageArg {
    Solution,
    Fold,
    Cusp,
    Swallowtail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Auto,
    Continuation,
    Direct,
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    /// Key=value configuration file; command-line flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "bratu")]
    pub problem: ProblemKind,
    /// Coefficients c4,c5,... of the polynomial family.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub coeffs: Vec<f64>,
    /// Starting parameters l1,l2,l3.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0,0,0")]
    pub lambda: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Newton residual tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 25)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ContinueArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Interior grid, e.g. 15x15.
    #[arg(long)]
    pub grid: String,
    /// Augmentation level 0..=3.
    #[arg(long, default_value_t = 0)]
    pub level: usize,
    /// Free parameters, e.g. l1,l2; the last one drives the continuation.
    #[arg(long, default_value = "l1")]
    pub active: String,
    /// Values for inactive parameters, e.g. l3=0,l2=0.5.
    #[arg(long)]
    pub fixed: Option<String>,
    /// Initial solution u as a grid-function file (level 0).
    #[arg(long, value_name = "FILE")]
    pub state: Option<PathBuf>,
    /// Take the starting point from a hunt report.
    #[arg(long, value_name = "FILE")]
    pub start_report: Option<PathBuf>,
    /// Slice l3 used for the fold line when a start has to be hunted.
    #[arg(long, allow_negative_numbers = true)]
    pub fold_line_l3: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub ds: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub ds_min: f64,
    #[arg(long, default_value_t = 0.5)]
    pub ds_max: f64,
    #[arg(long, default_value_t = 200)]
    pub max_steps: usize,
    /// Initial orientation of the driving parameter (+1 or -1).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub direction: f64,
    /// Stop when any driving or free parameter leaves [-b, b].
    #[arg(long, default_value_t = 50.0)]
    pub bound: f64,
    /// Stop at the first detected event.
    #[arg(long)]
    pub stop_on_event: bool,
    #[arg(long, default_value_t = 1e-8)]
    pub event_tol: f64,
    /// Branch CSV output; standard output when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Events JSON output; defaults to <out>.events.json.
    #[arg(long, value_name = "FILE")]
    pub events: Option<PathBuf>,
    /// Save u at the last branch point.
    #[arg(long, value_name = "FILE")]
    pub save_state: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct HuntArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long)]
    pub grid: String,
    #[arg(long, value_enum, default_value = "swallowtail")]
    pub target: StageArg,
    #[arg(long, value_enum, default_value = "auto")]
    pub strategy: StrategyArg,
    /// Step budget per continuation stage.
    #[arg(long, default_value_t = 400)]
    pub max_steps: usize,
    /// Slice l3 of the fold line.
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub fold_line_l3: f64,
    /// Continue the fold line at the starting l3 instead of moving to --fold-line-l3.
    #[arg(long)]
    pub keep_l3: bool,
    /// Half-width of the l3 range explored along each cusp line.
    #[arg(long, default_value_t = 0.5)]
    pub cusp_window: f64,
    /// Report JSON output; standard output when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Save u of the last located singularity.
    #[arg(long, value_name = "FILE")]
    pub save_state: Option<PathBuf>,
    /// Include wall-clock timings in the report.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Square grid sizes as start:end:step or a comma list.
    #[arg(long)]
    pub grids: String,
    /// Hunt report holding the starting singularity; hunted on the first grid when absent.
    #[arg(long, value_name = "FILE", conflicts_with = "independent")]
    pub seed_report: Option<PathBuf>,
    /// Hunt from scratch on every grid instead of refining one grid's result.
    #[arg(long)]
    pub independent: bool,
    /// Singularity to refine; defaults to the last one in the report.
    #[arg(long, value_enum)]
    pub kind: Option<StageArg>,
    /// Table JSON output; standard output when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// (dx, distance) CSV output.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Dense tensor description of a function on R^m.
    #[arg(long, value_name = "FILE")]
    pub tensors: Option<PathBuf>,
    /// Grid for the discretised functional when --tensors is absent.
    #[arg(long)]
    pub grid: Option<String>,
    /// State u as a grid-function file; zero when absent.
    #[arg(long, value_name = "FILE")]
    pub state: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    pub max_order: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub zero_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub gradient_tol: f64,
    /// Print the full report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Hunt report to export.
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Convergence table to export.
    #[arg(long, value_name = "FILE")]
    pub table: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}
