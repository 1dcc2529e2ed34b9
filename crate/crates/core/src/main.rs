use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lisce::cli::{self, RunManifest};
use lisce::harness::{self, ExperimentConfig};
use lisce::{Error, Result};

/// Channel estimation experiments for LIS-assisted links.
#[derive(Debug, Parser)]
#[command(name = "lisce", version)]
struct Cli {
    /// Experiment config file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for the Monte Carlo sweep (0 = all cores), overriding the config.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the MSE-versus-SNR sweep and write one CSV row per (SNR, estimator, component).
    Simulate,
    /// Cramér–Rao bounds for all-ones pilots.
    Crlb {
        #[arg(long, default_value_t = 1)]
        k1: usize,
        #[arg(long, default_value_t = 1)]
        k2: usize,
        /// Comma-separated SNR list in dB.
        #[arg(long, value_delimiter = ',', default_value = "0,2,4,6,8", allow_negative_numbers = true)]
        snr_db: Vec<f64>,
    },
    /// DES-over-LS gains from a `simulate` CSV.
    Gains {
        /// Output of `lisce simulate`.
        results: PathBuf,
    },
    /// Multiplier and iterate traces of one dual-ascent run.
    Trace {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        snr_db: f64,
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let parsed = cli::parse_config(&text).map_err(|e| match e {
                Error::Config { line, message } => Error::Config {
                    line,
                    message: format!("{}: {message}", path.display()),
                },
                other => other,
            })?;
            if parsed.trials_defaulted {
                eprintln!("notice: `trials` not set, using {}", cli::DEFAULT_TRIALS);
            }
            parsed.config
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(workers) = cli.workers {
        cfg.workers = workers;
    }
    Ok(cfg)
}

fn emit<F>(out: Option<&Path>, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match out {
        Some(path) => cli::write_atomically(path, fill),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            fill(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate => {
            let cfg = load_config(cli)?;
            let report = harness::run_experiment(&cfg)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            let manifest = RunManifest::new("simulate", &cfg);
            emit(cli.out.as_deref(), |w| cli::write_simulation(w, &manifest, &report))
        }
        Command::Crlb { k1, k2, snr_db } => {
            let rows = cli::crlb_table(*k1, *k2, snr_db)?;
            emit(cli.out.as_deref(), |w| cli::write_crlb_csv(w, &rows))
        }
        Command::Gains { results } => {
            let file = fs::File::open(results)?;
            let records = cli::read_records(io::BufReader::new(file))?;
            let rows = harness::gains_table(&records)?;
            match cli.out.as_deref() {
                Some(path) => {
                    cli::write_atomically(path, |w| cli::write_gains_csv(w, &rows))?;
                    print!("{}", cli::render_gains_text(&rows));
                    Ok(())
                }
                None => emit(None, |w| {
                    cli::write_gains_csv(w, &rows)?;
                    writeln!(w)?;
                    w.write_all(cli::render_gains_text(&rows).as_bytes())?;
                    Ok(())
                }),
            }
        }
        Command::Trace { snr_db, trial } => {
            let cfg = load_config(cli)?;
            let trace = harness::convergence_trace(&cfg, *snr_db, *trial)?;
            emit(cli.out.as_deref(), |w| cli::write_trace_csv(w, &trace))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
