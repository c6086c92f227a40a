//! `otto`: exact work/heat statistics for collective and independent
//! many-spin quantum Otto engines.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use otto_core::HalfInt;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "otto", version, about = "Exact TPM statistics for many-spin quantum Otto engines")]
struct Cli {
    /// Worker threads for sweeps and distribution building; 1 runs sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Metrics of one cycle, collective next to independent, with near-Carnot predictions.
    Cycle(CycleArgs),
    /// Metrics over a one- or two-axis parameter grid.
    Sweep(SweepArgs),
    /// Population relaxation in one angular-momentum block under a single bath.
    Dynamics(DynamicsArgs),
    /// Run the oracle and invariant checks.
    Validate(ValidateArgs),
    /// Print the effective configuration as TOML.
    Config(ConfigArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct ConfigFlags {
    /// Sectioned TOML config; flags override its values.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Model kind: linear, power or lmg.
    #[arg(long)]
    model: Option<String>,
    /// Exponent for the power model.
    #[arg(long)]
    x: Option<u32>,
    /// Linear coefficient for the LMG model.
    #[arg(long, allow_hyphen_values = true)]
    gamma_lmg: Option<f64>,
    #[arg(long)]
    n: Option<u32>,
    /// Spin per particle, e.g. 1/2 or 3/2.
    #[arg(long)]
    s: Option<HalfInt>,
    #[arg(long)]
    omega_c: Option<f64>,
    #[arg(long)]
    omega_h: Option<f64>,
    #[arg(long)]
    beta_c: Option<f64>,
    #[arg(long)]
    beta_h: Option<f64>,
    /// Distance from Carnot, beta_c*omega_c - beta_h*omega_h; replaces beta_c.
    #[arg(long)]
    delta: Option<f64>,
    /// Coupling: symmetric, uniform_product, weights or independent.
    #[arg(long)]
    coupling: Option<String>,
    /// Block weight `j=p`; repeat for each block. Implies --coupling weights.
    #[arg(long = "weight", value_name = "J=P")]
    weights: Vec<String>,
    /// Output format: csv or jsonl.
    #[arg(long)]
    format: Option<otto_core::io::OutputFormat>,
    /// Output file; relative paths go under $OTTO_OUTPUT_DIR. Stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Significant digits in written tables.
    #[arg(long)]
    precision: Option<usize>,
}

impl ConfigFlags {
    fn build(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let mut o = RunConfig::default();
        o.model.kind.clone_from(&self.model);
        o.model.x = self.x;
        o.model.gamma_lmg = self.gamma_lmg;
        o.ensemble.n = self.n;
        o.ensemble.s = self.s;
        o.cycle.omega_c = self.omega_c;
        o.cycle.omega_h = self.omega_h;
        o.cycle.beta_c = self.beta_c;
        o.cycle.beta_h = self.beta_h;
        o.cycle.delta = self.delta;
        o.coupling.kind.clone_from(&self.coupling);
        if !self.weights.is_empty() {
            let mut w = std::collections::BTreeMap::new();
            for item in &self.weights {
                let (j, p) = item
                    .split_once('=')
                    .ok_or_else(|| CliError::config("--weight", format!("expected J=P, got {item:?}")))?;
                let j: HalfInt = j.parse().map_err(|e| CliError::config("--weight", format!("{e}")))?;
                let p: f64 = p.trim().parse().map_err(|_| CliError::config("--weight", format!("bad weight in {item:?}")))?;
                w.insert(j, p);
            }
            o.coupling.weights = Some(w);
            o.coupling.kind.get_or_insert_with(|| "weights".into());
        }
        o.output.format = self.format;
        o.output.path.clone_from(&self.output);
        o.output.precision = self.precision;
        cfg.merge(&o);
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct CycleArgs {
    #[command(flatten)]
    cfg: ConfigFlags,
    /// Also write the merged joint (W, Q_h) distribution as CSV.
    #[arg(long, value_name = "PATH")]
    atoms: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    cfg: ConfigFlags,
    /// Outer axis, e.g. `n=2:100`, `t_h=log:0.1:1000:25`, `x=1,2,3`.
    #[arg(long)]
    axis: String,
    /// Inner axis.
    #[arg(long)]
    axis2: Option<String>,
    /// Hold Delta fixed at every point by adjusting beta_c.
    #[arg(long, conflicts_with = "fix_betas")]
    fix_delta: Option<f64>,
    /// Keep both inverse temperatures of the base configuration.
    #[arg(long)]
    fix_betas: bool,
    /// Print a log-log scaling fit of these columns against n to stderr.
    #[arg(long, value_enum)]
    fit: Vec<FitColumn>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FitColumn {
    VarW,
    AbsMeanW,
    LambdaR,
    UncertaintyQ,
}

#[derive(Clone, Copy, Debug, ValueEnum, Default)]
enum Bath {
    #[default]
    Cold,
    Hot,
}

#[derive(Clone, Copy, Debug, ValueEnum, Default)]
enum Start {
    /// Equal populations.
    #[default]
    Uniform,
    /// All population in m = -j.
    Bottom,
    /// All population in m = +j.
    Top,
}

#[derive(Args, Debug)]
struct DynamicsArgs {
    #[command(flatten)]
    cfg: ConfigFlags,
    /// Block; defaults to j = ns.
    #[arg(long)]
    j: Option<HalfInt>,
    /// Which bath of the cycle drives the block.
    #[arg(long, value_enum, default_value_t)]
    bath: Bath,
    /// Base rate kappa.
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    #[arg(long, value_enum, default_value_t)]
    start: Start,
    /// End of the trace; defaults to the thermalization time.
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of trace times, evenly spaced from 0.
    #[arg(long, default_value_t = 51)]
    points: usize,
    /// Total-variation target for the thermalization time.
    #[arg(long, default_value_t = 1e-8)]
    epsilon: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum, Default)]
enum LevelArg {
    #[default]
    Fast,
    Full,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FaultArg {
    /// Reverse the dissipator's ladder direction.
    DissipatorSign,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, value_enum, default_value_t)]
    level: LevelArg,
    /// Inject a known bug; the matching check must fail.
    #[arg(long, value_enum)]
    fault: Option<FaultArg>,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    #[command(flatten)]
    cfg: ConfigFlags,
}

fn set_threads(threads: Option<usize>) -> Result<otto_core::Execution, CliError> {
    match threads {
        None => Ok(otto_core::Execution::Parallel),
        Some(0) => Err(CliError::config("--threads", "must be at least 1")),
        Some(1) => Ok(otto_core::Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(t) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| CliError::Io(e.to_string()))?;
            Ok(otto_core::Execution::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(otto_core::Execution::Sequential),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let exec = set_threads(cli.threads)?;
    match cli.command {
        Command::Cycle(a) => commands::cycle(&a.cfg.build()?, a.atoms.as_deref(), exec),
        Command::Sweep(a) => {
            let constraint = if a.fix_betas {
                Some(otto_core::sweep::Constraint::FixBetas)
            } else {
                a.fix_delta.map(otto_core::sweep::Constraint::FixDelta)
            };
            let fits = a
                .fit
                .iter()
                .map(|f| match f {
                    FitColumn::VarW => otto_core::sweep::Quantity::VarW,
                    FitColumn::AbsMeanW => otto_core::sweep::Quantity::AbsMeanW,
                    FitColumn::LambdaR => otto_core::sweep::Quantity::LambdaR,
                    FitColumn::UncertaintyQ => otto_core::sweep::Quantity::UncertaintyQ,
                })
                .collect::<Vec<_>>();
            commands::sweep(&a.cfg.build()?, &a.axis, a.axis2.as_deref(), constraint, &fits, exec)
        }
        Command::Dynamics(a) => commands::dynamics(
            &a.cfg.build()?,
            &commands::DynamicsOpts {
                j: a.j,
                hot: matches!(a.bath, Bath::Hot),
                rate: a.rate,
                start: match a.start {
                    Start::Uniform => commands::StartState::Uniform,
                    Start::Bottom => commands::StartState::Bottom,
                    Start::Top => commands::StartState::Top,
                },
                t_max: a.t_max,
                points: a.points,
                epsilon: a.epsilon,
            },
        ),
        Command::Validate(a) => commands::validate(
            match a.level {
                LevelArg::Fast => otto_core::validate::Level::Fast,
                LevelArg::Full => otto_core::validate::Level::Full,
            },
            a.fault.map(|FaultArg::DissipatorSign| otto_core::validate::Fault::DissipatorSign),
        ),
        Command::Config(a) => {
            let cfg = a.cfg.build()?;
            cfg.resolve()?;
            print!("{}", cfg.to_toml());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            let err = CliError::Usage(first);
            eprintln!("{}", err.line());
            return ExitCode::from(err.exit_code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code())
        }
    }
}
