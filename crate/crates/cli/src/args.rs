use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "implicit", version, about = "Implicit and inverse function solver for differentiable maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve F(x, y) = 0 for y at grid points x.
    Solve(SolveArgs),
    /// Invert a map R^n -> R^n at target values.
    Invert(InvertArgs),
    /// Sample the minor and mixed-determinant hypotheses over a box.
    Audit(AuditArgs),
    /// Run every check on the built-in discontinuous-Jacobian example.
    Demo(DemoArgs),
    /// List built-in problems.
    List,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum AccelArg {
    Bisect,
    Illinois,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Args, Debug, Default, Clone)]
pub struct ProblemArgs {
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in problem name (see `implicit list`).
    #[arg(long)]
    pub problem: Option<String>,
    /// Component expression in x1..xn, y1..ym; repeat once per component.
    #[arg(long = "expr", allow_hyphen_values = true)]
    pub exprs: Vec<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of unknowns; 0 makes the expressions a map R^n -> R^n.
    #[arg(long)]
    pub m: Option<usize>,
    /// Seed a (x0 for inversion), comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub seed_a: Option<String>,
    /// Seed b (F(x0) for inversion), comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub seed_b: Option<String>,
    /// Box `lo:hi;lo:hi;...`: the domain for solve/invert, the sampling region for audit.
    #[arg(long = "box", allow_hyphen_values = true)]
    pub region: Option<String>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct SolverArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub tol_residual: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tol_width: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Initial bracket radii per unknown, comma separated.
    #[arg(long)]
    pub bracket_r0: Option<String>,
    #[arg(long, value_enum)]
    pub accel: Option<AccelArg>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct OutputArgs {
    /// Write data here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Grid `lo:hi:count;...`, one range per x coordinate.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Single point x, comma separated; repeatable.
    #[arg(long = "at", allow_hyphen_values = true)]
    pub points: Vec<String>,
    /// Seed each solve from the previous solution.
    #[arg(long)]
    pub continuation: bool,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct InvertArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Target y, comma separated; repeatable.
    #[arg(long = "target", allow_hyphen_values = true)]
    pub targets: Vec<String>,
    /// Grid of targets `lo:hi:count;...`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct AuditArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Halton samples for the minor audit and trials for the mixed audit.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub rng_seed: Option<u64>,
    /// Random segments for the mean-value audit; 0 skips it.
    #[arg(long)]
    pub pairs: Option<usize>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct DemoArgs {
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub rng_seed: Option<u64>,
    /// Solver residual tolerance used by the inversion checks.
    #[arg(long, allow_hyphen_values = true)]
    pub tol_residual: Option<f64>,
    /// Bound on the round-trip error |G(F(x)) - x|.
    #[arg(long, allow_hyphen_values = true)]
    pub tol_round_trip: Option<f64>,
}
