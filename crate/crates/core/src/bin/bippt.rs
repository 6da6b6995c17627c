//! `bippt`: generate states, solve, and sweep.
//!
//! Exit codes: 0 success, 2 configuration or I/O error, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use bippt::experiments::{
    gen_state, parse_dims, parse_kind, parse_list, run_solve, sweep_noise, sweep_xi, write_noise_csv,
    write_report, write_trace, write_xi_csv, ModeChoice, RunConfig, StateSource,
};
use bippt::solver::TraceMode;
use bippt::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bippt", version, about = "Bi-PPT mixture approximation of multipartite states")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a noisy test state in the matrix text format.
    GenState {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Best-of-trials solve; prints the JSON report.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// JSON report path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trace CSV of the best trial.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Record every iteration in the trace instead of thinning.
        #[arg(long)]
        full_trace: bool,
    },
    /// Solve on a grid of penalty weights; CSV (xi, f, violation, constraint_flags).
    SweepXi {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 100.0)]
        xi_from: f64,
        #[arg(long, default_value_t = 1000.0)]
        xi_to: f64,
        #[arg(long, default_value_t = 50.0)]
        xi_step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve at several noise levels; CSV (l, f, violation).
    SweepNoise {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated noise levels.
        #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")]
        levels: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct StateArgs {
    /// w3, ghz3, ghz5, mghz5, ghz or custom.
    #[arg(long)]
    kind: Option<String>,
    /// Subsystem dims, e.g. 2,2,2 (defaults to the family's dims).
    #[arg(long)]
    dims: Option<String>,
    /// White-noise level l.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// m,n,s for mghz5, or the amplitudes of a custom state.
    #[arg(long)]
    coeffs: Option<String>,
    /// Read the state from a matrix file instead of generating it.
    #[arg(long, conflicts_with_all = ["kind", "dims", "coeffs"])]
    input: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Strict,
    Tightened,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, default_value_t = 100.0)]
    xi: f64,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    mu1: Option<f64>,
    #[arg(long)]
    mu2: Option<f64>,
    #[arg(long)]
    mu3: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, default_value_t = 30)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Strict)]
    mode: Mode,
}

impl StateArgs {
    fn source(&self) -> Result<StateSource, Error> {
        if let Some(path) = &self.input {
            return Ok(StateSource::File(path.clone()));
        }
        let name = self
            .kind
            .as_deref()
            .ok_or_else(|| Error::Domain("either --kind or --input is required".into()))?;
        let coeffs = self.coeffs.as_deref().map(parse_list).transpose()?;
        let kind = parse_kind(name, coeffs.as_deref())?;
        let dims = self.dims.as_deref().map(parse_dims).transpose()?;
        StateSource::generated(kind, dims, self.noise)
    }
}

impl RunArgs {
    fn config(&self, trace: TraceMode) -> Result<RunConfig, Error> {
        let mut cfg = RunConfig::new(self.state.source()?, self.xi);
        cfg.eta = self.eta;
        cfg.mu1 = self.mu1;
        cfg.mu2 = self.mu2;
        cfg.mu3 = self.mu3;
        cfg.tol = self.tol;
        cfg.max_iter = self.max_iter;
        cfg.trials = self.trials;
        cfg.seed = self.seed;
        cfg.mode = match self.mode {
            Mode::Strict => ModeChoice::Strict,
            Mode::Tightened => ModeChoice::Tightened,
        };
        cfg.trace = trace;
        Ok(cfg)
    }
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn std::io::Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::GenState { state, out } => {
            let rho = gen_state(&state.source()?, &out)?;
            eprintln!("wrote {}x{} state to {}", rho.side(), rho.side(), out.display());
        }
        Cmd::Solve {
            run,
            out,
            trace,
            full_trace,
        } => {
            let mode = match (&trace, full_trace) {
                (None, _) => TraceMode::Off,
                (Some(_), true) => TraceMode::Full,
                (Some(_), false) => TraceMode::Thinned,
            };
            let outcome = run_solve(&run.config(mode)?)?;
            write_report(output(out.as_ref())?, &outcome.report)?;
            if let Some(path) = trace {
                write_trace(&path, &outcome.best)?;
            }
        }
        Cmd::SweepXi {
            run,
            xi_from,
            xi_to,
            xi_step,
            out,
        } => {
            let rows = sweep_xi(&run.config(TraceMode::Off)?, xi_from, xi_to, xi_step)?;
            for r in &rows {
                eprintln!("xi={} f={:e} iterations={}", r.xi, r.f, r.iterations);
            }
            write_xi_csv(output(out.as_ref())?, &rows)?;
        }
        Cmd::SweepNoise { run, levels, out } => {
            let rows = sweep_noise(&run.config(TraceMode::Off)?, &parse_list(&levels)?)?;
            for r in &rows {
                eprintln!("l={} f={:e} iterations={}", r.l, r.f, r.iterations);
            }
            write_noise_csv(output(out.as_ref())?, &rows)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(v) = std::env::var("BIPPT_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: cannot configure {n} threads: {e}");
                    return ExitCode::from(2);
                }
            }
            _ => {
                eprintln!("error: BIPPT_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
