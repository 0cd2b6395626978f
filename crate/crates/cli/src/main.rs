//! Command-line driver for the grid-convergence studies.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use umuscl::analysis::{critical_epsilon_ratio, critical_h, listed_critical_h, OrderGate};
use umuscl::experiments::{
    burgers_series, euler1d_series, euler2d_steady_series, vortex_series, SeriesOutcome, EULER1D_STUDY_DROP,
    GRIDS_1D, GRIDS_STEADY_2D, GRIDS_VORTEX, GRIDS_VORTEX_FULL,
};
use umuscl::mms::{Euler1dMms, LinearizationCase};
use umuscl::solvers::{SolveConfig, TimeIntegrationConfig};
use umuscl::{Kappa, Reconstruction, SchemeConfig};

use crate::output::{write_outputs, Header};

const EXIT_USAGE: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_GATE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "umuscl", version, about = "Order-of-accuracy studies for UMUSCL and flux-reconstruction schemes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Critical perturbation ratio and critical spacing of the Burgers analysis.
    Predict(PredictArgs),
    /// Steady Burgers manufactured solution.
    Burgers1d(Burgers1dArgs),
    /// Steady 1D Euler manufactured solution.
    Euler1d(Euler1dArgs),
    /// Steady 2D Euler manufactured solution on the unit square.
    #[command(name = "euler2d-steady")]
    Euler2dSteady(Euler2dSteadyArgs),
    /// Isentropic vortex convected to t = dt * steps.
    #[command(name = "euler2d-vortex")]
    Euler2dVortex(VortexArgs),
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    omega: f64,
    /// Grid spacing for the critical ratio 2 h omega / (1 - 2 h omega).
    #[arg(long)]
    h: Option<f64>,
    /// Perturbation ratio epsilon / u_inf for the critical spacing.
    #[arg(long = "c-eps")]
    c_eps: Option<f64>,
}

#[derive(Args, Debug)]
struct Common {
    /// Reconstruction parameter, as a decimal or a ratio such as 1/3.
    #[arg(long, default_value = "1/3")]
    kappa: Kappa,
    #[arg(long, default_value = "umuscl")]
    scheme: Reconstruction,
    /// Comma-separated node counts per direction.
    #[arg(long, value_delimiter = ',')]
    grids: Option<Vec<usize>>,
    /// Directory for errors.tsv, report.tsv and iterations.tsv.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Exit with status 3 unless the finest-pair order passes `--expect`.
    #[arg(long, requires = "expect")]
    enforce_gates: bool,
    #[arg(long, value_parser = ["third", "second"])]
    expect: Option<String>,
}

#[derive(Args, Debug)]
struct Burgers1dArgs {
    #[command(flatten)]
    common: Common,
    /// epsilon / u_inf of the manufactured solution.
    #[arg(long = "c-eps", default_value_t = 0.1)]
    c_eps: f64,
}

#[derive(Args, Debug)]
struct Euler1dArgs {
    #[command(flatten)]
    common: Common,
    /// Velocity perturbation epsilon / u_inf (density and pressure amplitudes 0.2).
    #[arg(long = "c-eps", conflicts_with = "case")]
    c_eps: Option<f64>,
    /// Linearization case: a (entropy wave), b (constant velocity), c (all varying).
    #[arg(long, value_parser = ["a", "b", "c"])]
    case: Option<String>,
    /// Residual reduction in orders of magnitude.
    #[arg(long, default_value_t = EULER1D_STUDY_DROP)]
    residual_drop: f64,
}

#[derive(Args, Debug)]
struct Euler2dSteadyArgs {
    #[command(flatten)]
    common: Common,
    /// Velocity perturbation amplitude.
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long, default_value_t = SolveConfig::euler2d().residual_drop)]
    residual_drop: f64,
}

#[derive(Args, Debug)]
struct VortexArgs {
    #[command(flatten)]
    common: Common,
    /// Vortex strength.
    #[arg(long = "K", default_value_t = 1.0)]
    strength: f64,
    #[arg(long, default_value_t = TimeIntegrationConfig::default().dt)]
    dt: f64,
    #[arg(long, default_value_t = TimeIntegrationConfig::default().steps)]
    steps: usize,
    /// Use the full 48..256 series instead of 48..128.
    #[arg(long, conflicts_with = "grids")]
    extended: bool,
}

/// Failure classes mapped onto exit statuses.
enum Failure {
    Usage(anyhow::Error),
    Solver(anyhow::Error),
    Gate(String),
}

impl From<umuscl::Error> for Failure {
    fn from(e: umuscl::Error) -> Self {
        match e {
            umuscl::Error::Config(_) | umuscl::Error::OutOfRegime(_) => Failure::Usage(e.into()),
            other => Failure::Solver(other.into()),
        }
    }
}

fn scheme_for(common: &Common) -> SchemeConfig {
    SchemeConfig::new(common.kappa, common.scheme)
}

fn grids_or(common: &Common, default: &[usize]) -> Vec<usize> {
    common.grids.clone().unwrap_or_else(|| default.to_vec())
}

fn predict(args: &PredictArgs) -> Result<(), Failure> {
    if args.h.is_none() && args.c_eps.is_none() {
        return Err(Failure::Usage(anyhow::anyhow!("predict needs --h and/or --c-eps")));
    }
    if let Some(h) = args.h {
        let ratio = critical_epsilon_ratio(args.omega, h)?;
        println!("critical eps/u_inf for h={h}, omega={}: {ratio:.10}", args.omega);
    }
    if let Some(r) = args.c_eps {
        println!("critical h for eps/u_inf={r}, omega={}: {:.10}", args.omega, critical_h(r, args.omega));
        if let Some(listed) = listed_critical_h(r) {
            println!("listed value for eps/u_inf={r}: {listed}");
        }
    }
    Ok(())
}

fn finish(header: Header, common: &Common, outcome: &SeriesOutcome) -> Result<(), Failure> {
    print!("{}", header.render());
    print!("{}", outcome.report.to_table());
    if let Some(dir) = &common.output {
        write_outputs(dir, &header, outcome)
            .with_context(|| format!("writing results to {}", dir.display()))
            .map_err(Failure::Solver)?;
    }
    if common.enforce_gates {
        let gate: OrderGate = common.expect.as_deref().unwrap_or("third").parse()?;
        let finest = outcome.report.finest_order();
        if !outcome.report.passes(gate) {
            let (lo, hi) = gate.band();
            return Err(Failure::Gate(format!(
                "finest-pair order {} outside the {} gate [{lo}, {hi}]",
                finest.map_or_else(|| "undefined".into(), |o| format!("{o:.4}")),
                gate.name()
            )));
        }
        println!("gate {} passed", gate.name());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Predict(args) => predict(&args),
        Command::Burgers1d(args) => {
            let c = &args.common;
            let scheme = scheme_for(c);
            let grids = grids_or(c, &GRIDS_1D);
            let mut header = Header::new("burgers1d", &scheme, &grids);
            header.push("c_eps", args.c_eps);
            let outcome = burgers_series(&scheme, args.c_eps, &grids)?;
            finish(header, c, &outcome)
        }
        Command::Euler1d(args) => {
            let c = &args.common;
            let scheme = scheme_for(c);
            let grids = grids_or(c, &GRIDS_1D);
            let mut header = Header::new("euler1d", &scheme, &grids);
            let mms = match (&args.case, args.c_eps) {
                (Some(case), _) => {
                    header.push("case", case);
                    Euler1dMms::from_case(LinearizationCase::from_label(case)?)
                }
                (None, c_eps) => {
                    let c_eps = c_eps.unwrap_or(0.1);
                    header.push("c_eps", c_eps);
                    Euler1dMms::from_c_eps(c_eps)
                }
            };
            header.push("residual_drop", args.residual_drop);
            let solve = SolveConfig { residual_drop: args.residual_drop, ..SolveConfig::euler1d() };
            let outcome = euler1d_series(&scheme, &mms, &grids, &solve)?;
            finish(header, c, &outcome)
        }
        Command::Euler2dSteady(args) => {
            let c = &args.common;
            let scheme = scheme_for(c);
            let grids = grids_or(c, &GRIDS_STEADY_2D);
            let mut header = Header::new("euler2d-steady", &scheme, &grids);
            header.push("eps", args.eps);
            header.push("residual_drop", args.residual_drop);
            let solve = SolveConfig { residual_drop: args.residual_drop, ..SolveConfig::euler2d() };
            let outcome = euler2d_steady_series(&scheme, args.eps, &grids, &solve)?;
            finish(header, c, &outcome)
        }
        Command::Euler2dVortex(args) => {
            let c = &args.common;
            let scheme = scheme_for(c);
            let default: &[usize] = if args.extended { &GRIDS_VORTEX_FULL } else { &GRIDS_VORTEX };
            let grids = grids_or(c, default);
            let mut header = Header::new("euler2d-vortex", &scheme, &grids);
            header.push("K", args.strength);
            header.push("dt", args.dt);
            header.push("steps", args.steps);
            let ti = TimeIntegrationConfig { dt: args.dt, steps: args.steps };
            let outcome = vortex_series(&scheme, args.strength, &grids, &ti)?;
            finish(header, c, &outcome)
        }
    }
}

fn configure_workers() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("UMUSCL_WORKERS") else {
        return Ok(());
    };
    let workers: usize = raw.trim().parse().with_context(|| format!("UMUSCL_WORKERS={raw:?} is not a count"))?;
    if workers == 0 {
        bail!("UMUSCL_WORKERS must be positive");
    }
    rayon::ThreadPoolBuilder::new().num_threads(workers).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_workers() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("solver failure: {e:#}");
            ExitCode::from(EXIT_SOLVER)
        }
        Err(Failure::Gate(msg)) => {
            eprintln!("gate failure: {msg}");
            ExitCode::from(EXIT_GATE)
        }
    }
}
