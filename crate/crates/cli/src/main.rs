use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use swe_core::app::{
    continuation_driver, load_config, run_driver, stability_driver, sweep_driver, verify_driver, RunConfig,
};
use swe_core::picard::print_trace;
use swe_core::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NONCONVERGENT: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "swe",
    version,
    about = "Degenerate-viscosity shallow water on the periodic box"
)]
struct Cli {
    /// Output directory (overrides `output` in the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized experiments (overrides `seed` in the config)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Only print errors
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one scenario and write trace, monitors and final fields
    Run { config: PathBuf },
    /// Compare a run with one whose phi_0 is perturbed
    Stability { config: PathBuf },
    /// Solve for each lifted datum phi_0 + delta
    Continuation { config: PathBuf },
    /// One run per value of a parameter, each in its own directory
    Sweep {
        config: PathBuf,
        /// Parameter key, bare (`gamma`) or dotted (`model.gamma`)
        #[arg(long)]
        param: String,
        /// Comma-separated values
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Sample the interpolation, commutator and Lamé inequalities
    VerifyInequalities { config: PathBuf },
    /// Print a preset as a complete config file
    Preset { name: String },
}

enum Outcome {
    Done,
    NotConverged(String),
}

fn config(path: &Path, cli: &Cli) -> swe_core::Result<RunConfig> {
    let mut cfg = load_config(path).map_err(|e| match e {
        Error::Io { path, source } => Error::ConfigParse {
            line: None,
            message: format!("cannot read {}: {source}", path.display()),
        },
        e => e,
    })?;
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> swe_core::Result<Outcome> {
    let mut stdout = std::io::stdout().lock();
    let mut say = |line: String| {
        if !cli.quiet {
            let _ = writeln!(stdout, "{line}");
        }
    };
    match &cli.command {
        Command::Run { config: path } => {
            let cfg = config(path, cli)?;
            let a = run_driver(&cfg, &cfg.output)?;
            if !cli.quiet {
                let _ = print_trace(&a.trace, std::io::stdout().lock());
            }
            let s = &a.summary;
            say(format!(
                "horizon {}  sweeps {}  mass drift rate {:.3e}  blow-up max {:.3e}",
                s.horizon, s.sweeps, s.mass_drift_rate, s.blowup_max
            ));
            say(format!("reports in {}", cfg.output.display()));
            if !s.converged {
                return Ok(Outcome::NotConverged(format!(
                    "no convergence within {} sweeps",
                    s.sweeps
                )));
            }
        }
        Command::Stability { config: path } => {
            let cfg = config(path, cli)?;
            let r = stability_driver(&cfg, &cfg.output)?;
            say(format!(
                "initial distance {:.6e}  final distance {:.6e}  C_meas {:.4}",
                r.initial_distance(),
                r.final_distance(),
                r.final_c_meas()
            ));
            if r.partial {
                return Ok(Outcome::NotConverged(format!(
                    "partial report; converged = {:?}",
                    r.converged
                )));
            }
        }
        Command::Continuation { config: path } => {
            let cfg = config(path, cli)?;
            let r = continuation_driver(&cfg, &cfg.output)?;
            for (m, d) in r.members.iter().skip(1).zip(&r.distances) {
                say(format!("delta {:<10} distance to previous {:.6e}", m.delta, d));
            }
            say(format!("strictly decreasing: {}", r.strictly_decreasing()));
            if !r.complete {
                return Ok(Outcome::NotConverged("a continuation member did not converge".into()));
            }
        }
        Command::Sweep {
            config: path,
            param,
            values,
        } => {
            let cfg = config(path, cli)?;
            let members = sweep_driver(&cfg, &cfg.output, param, values)?;
            let mut failed = Vec::new();
            for m in &members {
                match (&m.summary, &m.error) {
                    (Some(s), _) => {
                        say(format!(
                            "{param} = {:<8} converged {}  sweeps {}",
                            m.value, s.converged, s.sweeps
                        ));
                        if !s.converged {
                            failed.push(m.value.clone());
                        }
                    }
                    (None, e) => {
                        let e = e.clone().unwrap_or_default();
                        error!("{param} = {}: {e}", m.value);
                        failed.push(m.value.clone());
                    }
                }
            }
            if !failed.is_empty() {
                return Ok(Outcome::NotConverged(format!(
                    "members without a converged run: {}",
                    failed.join(", ")
                )));
            }
        }
        Command::VerifyInequalities { config: path } => {
            let cfg = config(path, cli)?;
            let r = verify_driver(&cfg, &cfg.output)?;
            for rep in [&r.gn, &r.commutator, &r.lame] {
                say(format!(
                    "{:<40} samples {:>4}  skipped {:>3}  max ratio {:.6e}",
                    rep.name,
                    rep.rows.len(),
                    rep.skipped,
                    rep.max_ratio()
                ));
            }
        }
        Command::Preset { name } => {
            let cfg = RunConfig::from_preset(name)?;
            print!("preset = \"{name}\"\n\n{}", cfg.to_toml());
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    }
    match execute(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NONCONVERGENT)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match &e {
                e if e.is_validation() => EXIT_VALIDATION,
                Error::Diverged { .. } | Error::TooShort { .. } => EXIT_NONCONVERGENT,
                _ => EXIT_FAILURE,
            };
            ExitCode::from(code)
        }
    }
}
