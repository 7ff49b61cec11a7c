use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use shuffle_rdp::{
    format_g12, format_lambda, run_suite, CliError, CurveRequest, Suite, DEFAULT_CURVE_METHODS,
    DEFAULT_SEED, SEED_ENV,
};
use shuffle_rdp_core::{
    compose_and_convert, default_order_grid, delta_given_eps, eps_given_delta, integer_order_grid,
    best_upper, BoundMethod, RdpCurve, RdpOrder, ShuffleParams,
};

/// RDP accountant for shuffled local differential privacy.
#[derive(Debug, Parser)]
#[command(name = "shuffle-rdp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Deployment {
    /// LDP parameter of each client's randomizer, in nats.
    #[arg(long)]
    eps0: f64,
    /// Number of clients behind the shuffler.
    #[arg(long)]
    n: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print one bound at one order.
    Bound {
        #[command(flatten)]
        deployment: Deployment,
        #[arg(long)]
        lambda: f64,
        /// ub1, ub1_simple, ub2, lb, lb_simple, erlingsson or best.
        #[arg(long)]
        method: BoundMethod,
    },
    /// Write bounds for every integer order up to --lambda-max as CSV.
    Curve {
        #[command(flatten)]
        deployment: Deployment,
        #[arg(long)]
        lambda_max: u32,
        /// Comma-separated bound names.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<BoundMethod>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert the best upper curve to (eps, delta)-DP.
    #[command(group(ArgGroup::new("target").required(true).args(["delta", "eps"])))]
    Convert {
        #[command(flatten)]
        deployment: Deployment,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        /// Use integer orders 2..=lambda_max instead of the default grid.
        #[arg(long)]
        lambda_max: Option<u32>,
    },
    /// Compose T identical shuffled rounds and convert at --delta.
    Compose {
        #[command(flatten)]
        deployment: Deployment,
        #[arg(long = "T", value_parser = clap::value_parser!(u64).range(1..))]
        rounds: u64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        lambda_max: Option<u32>,
    },
    /// Run a seeded invariant suite against the exact oracle.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Overrides SHUFFLE_RDP_SEED and the built-in seed.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn params(d: &Deployment) -> Result<ShuffleParams, CliError> {
    Ok(ShuffleParams::new(d.eps0, d.n)?)
}

fn grid(lambda_max: Option<u32>) -> Result<Vec<RdpOrder>, CliError> {
    match lambda_max {
        None => Ok(default_order_grid()),
        Some(m) if m >= 2 => Ok(integer_order_grid(m)),
        Some(m) => Err(CliError::Usage(format!("--lambda-max must be at least 2, got {m}"))),
    }
}

fn seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Bound { deployment, lambda, method } => {
            let p = params(&deployment)?;
            let value = method.evaluate(&p, RdpOrder::new(lambda)?)?;
            println!("{}", format_g12(value));
        }
        Command::Curve { deployment, lambda_max, methods, out } => {
            let methods = methods.unwrap_or_else(|| DEFAULT_CURVE_METHODS.to_vec());
            CurveRequest::new(params(&deployment)?, lambda_max, methods)?.write(&out)?;
        }
        Command::Convert { deployment, delta, eps, lambda_max } => {
            let p = params(&deployment)?;
            let curve = RdpCurve::from_fn(&grid(lambda_max)?, |o| Ok(best_upper(&p, o)))?;
            match (delta, eps) {
                (Some(delta), None) => {
                    let c = eps_given_delta(&curve, delta)?;
                    print_eps(c.eps, c.delta, c.order, c.clamped);
                }
                (None, Some(eps)) => {
                    let c = delta_given_eps(&curve, eps)?;
                    print_eps(eps, c.delta, c.order, c.clamped);
                }
                _ => unreachable!("clap enforces exactly one of --delta/--eps"),
            }
        }
        Command::Compose { deployment, rounds, delta, lambda_max } => {
            let c = compose_and_convert(&params(&deployment)?, rounds, delta, &grid(lambda_max)?)?;
            print_eps(c.eps, c.delta, c.order, c.clamped);
        }
        Command::Verify { suite, seed: flag } => {
            let seed = seed(flag)?;
            println!("seed {seed}");
            let results = run_suite(suite, seed);
            for r in &results {
                println!("{r}");
            }
            return Ok(results.iter().all(|r| r.passed));
        }
    }
    Ok(true)
}

fn print_eps(eps: f64, delta: f64, order: RdpOrder, clamped: bool) {
    println!(
        "eps={} delta={} lambda={}{}",
        format_g12(eps),
        format_g12(delta),
        format_lambda(order.value()),
        if clamped { " clamped" } else { "" }
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
