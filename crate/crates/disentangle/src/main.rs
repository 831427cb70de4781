use std::fmt::Write as _;
use std::io::{self, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use disentangle::commands::{self, VERSION};
use disentangle::config::{parse_grid, GridConfig, Overrides, RunConfig};
use disentangle::verify;
use disentangle::AppError;

#[derive(Parser)]
#[command(name = "disentangle", version = VERSION, about = "Nonlinear disentangling flow experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the generalized Gell-Mann matrices of dimension D.
    Gellmann {
        d: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate one trajectory and write its CSV and summary sidecar.
    Evolve(Shared),
    /// Run a two-parameter perturbation sweep and label every cell.
    Sweep {
        #[command(flatten)]
        shared: Shared,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Run the invariant suite and print a pass/fail table.
    Verify(Shared),
}

#[derive(Args)]
struct Shared {
    /// TOML config, or a JSON sidecar from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Local dimensions, e.g. 2,2,2.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Driven pair, e.g. 1,2.
    #[arg(long, value_parser = parse_pair)]
    pair: Option<[usize; 2]>,
    /// Pair coefficient η; 1/3 for qubits, 1 otherwise when omitted.
    #[arg(long)]
    eta: Option<f64>,
    /// RK4 step Δs.
    #[arg(long)]
    step: Option<f64>,
    /// Final dimensionless time s.
    #[arg(long)]
    smax: Option<f64>,
    /// Initial state expression, e.g. "ghz - 1e-5*i*bell1(pi)".
    #[arg(long, allow_hyphen_values = true)]
    state: Option<String>,
    /// Target state for a final fidelity; repeatable.
    #[arg(long = "target", allow_hyphen_values = true)]
    targets: Vec<String>,
    /// Seed for random ensembles.
    #[arg(long)]
    seed: Option<u64>,
    /// Sweep threads; all cores when omitted.
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV path; the JSON sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a trajectory row every N steps.
    #[arg(long)]
    stride: Option<usize>,
    /// Skip the per-step renormalization.
    #[arg(long)]
    no_renormalize: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Base state of the sweep.
    #[arg(long, allow_hyphen_values = true)]
    base: Option<String>,
    /// State added with coefficient iε1.
    #[arg(long, allow_hyphen_values = true)]
    direction1: Option<String>,
    /// State added with coefficient iε2.
    #[arg(long, allow_hyphen_values = true)]
    direction2: Option<String>,
    /// ε1 grid as min,max,count.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    eps1: Option<GridConfig>,
    /// ε2 grid as min,max,count.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    eps2: Option<GridConfig>,
    /// Tolerance on k and τ for basin labels.
    #[arg(long)]
    basin_tol: Option<f64>,
}

fn parse_pair(text: &str) -> Result<[usize; 2], String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([
            a.parse().map_err(|_| format!("bad subsystem {a:?}"))?,
            b.parse().map_err(|_| format!("bad subsystem {b:?}"))?,
        ]),
        _ => Err("expected two subsystems, e.g. 1,2".into()),
    }
}

fn resolve(shared: Shared, sweep: Option<SweepArgs>) -> Result<RunConfig, AppError> {
    let mut config = match &shared.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut overrides = Overrides {
        dims: shared.dims,
        pair: shared.pair,
        eta: shared.eta,
        step: shared.step,
        smax: shared.smax,
        state: shared.state,
        targets: (!shared.targets.is_empty()).then_some(shared.targets),
        seed: shared.seed,
        workers: shared.workers,
        out: shared.out,
        record_stride: shared.stride,
        no_renormalize: shared.no_renormalize,
        ..Overrides::default()
    };
    if let Some(s) = sweep {
        overrides.base = s.base;
        overrides.direction1 = s.direction1;
        overrides.direction2 = s.direction2;
        overrides.eps1 = s.eps1;
        overrides.eps2 = s.eps2;
        overrides.basin_tol = s.basin_tol;
    }
    config.apply(overrides);
    Ok(config)
}

/// Runs one command and returns the text for stdout.
fn run(cli: Cli) -> Result<String, AppError> {
    let mut out = String::new();
    match cli.command {
        Command::Gellmann { d, out: path } => {
            if let Some(text) = commands::gellmann(d, path.as_deref())? {
                out = text;
            }
        }
        Command::Evolve(shared) => {
            let config = resolve(shared, None)?;
            let run = commands::evolve_run(&config)?;
            let s = &run.summary;
            let _ = writeln!(out, "s = {}  basin {}  separability {}", s.s_final, s.basin, s.separability);
            let _ = writeln!(out, "k = {:?}", s.k);
            for (name, value) in &s.tau {
                let _ = writeln!(out, "{name} = {value:e}");
            }
            for f in &s.fidelities {
                let _ = writeln!(out, "fidelity to {} = {}", f.target, f.fidelity);
            }
            let _ = writeln!(out, "wrote {}", run.csv_path.display());
        }
        Command::Sweep { shared, sweep } => {
            let config = resolve(shared, Some(sweep))?;
            let run = commands::sweep_run(&config)?;
            let c = &run.summary.counts;
            let _ = writeln!(
                out,
                "{} cells: {:?}, unresolved {}, failed {} ({:.1} s)",
                run.summary.cells, c.basins, c.unresolved, c.failed, run.wall_time_s
            );
            let _ = writeln!(out, "wrote {}", run.csv_path.display());
        }
        Command::Verify(shared) => {
            let config = resolve(shared, None)?;
            let checks = commands::verify_run(&config)?;
            out = verify::table(&checks);
            if let Some(e) = commands::verification_error(&checks) {
                print_stdout(&out);
                return Err(e);
            }
        }
    }
    Ok(out)
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_stdout(text: &str) {
    let mut stdout = io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush());
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(text) => {
            print_stdout(&text);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
