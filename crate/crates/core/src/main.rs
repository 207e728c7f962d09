use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cbs_core::checks::run_checks;
use cbs_core::config::{parse_config, RunConfig};
use cbs_core::dressed::{dressed_energies, peak_positions};
use cbs_core::run::{alpha_sweep, spectrum, write_spectrum, write_sweep};
use cbs_core::Error;

/// Environment variable holding the number of worker threads.
const WORKERS_ENV: &str = "CBS_WORKERS";

#[derive(Parser)]
#[command(name = "cbs", version, about = "Coherent backscattering from two laser-driven atoms")]
struct Cli {
    /// Override the seed given in the configuration file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enhancement factor and its components over a saturation sweep.
    AlphaSweep { config: PathBuf },
    /// Background and interference spectra at one Rabi frequency.
    Spectrum { config: PathBuf },
    /// Predicted spectral line positions.
    Peaks {
        #[arg(long, allow_hyphen_values = true)]
        rabi: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        detuning: f64,
    },
    /// Run the invariant suite.
    Check,
}

fn load(path: &PathBuf, seed: Option<u64>) -> Result<RunConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut cfg = parse_config(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("ERROR: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn configure_workers() -> Result<(), Error> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("{WORKERS_ENV} must be a positive integer, found `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    configure_workers()?;
    match cli.command {
        Command::AlphaSweep { config } => {
            let cfg = load(&config, cli.seed)?;
            let out = alpha_sweep(&cfg)?;
            let path = write_sweep(&cfg, &out)?;
            println!("wrote {}", path.display());
            for p in &out.points {
                match &p.result {
                    Ok(c) => println!("s = {:.4e}  alpha = {:.6}", p.s, c.alpha),
                    Err(e) => eprintln!("ERROR: {e}"),
                }
            }
            Ok(if out.failures() > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Spectrum { config } => {
            let cfg = load(&config, cli.seed)?;
            let out = spectrum(&cfg)?;
            let (csv, report) = write_spectrum(&cfg, &out)?;
            println!("wrote {} and {}", csv.display(), report.display());
            println!("area_ratio = {:.6}", out.spectrum.area_ratio());
            println!("alpha = {:.6}", out.spectrum.components.alpha);
            Ok(ExitCode::SUCCESS)
        }
        Command::Peaks { rabi, detuning } => {
            if !rabi.is_finite() || !detuning.is_finite() || rabi < 0.0 {
                return Err(Error::Config("rabi must be finite and non-negative".into()));
            }
            let d = dressed_energies(rabi, detuning);
            println!("generalized_rabi = {}", d.splitting);
            for p in peak_positions(rabi, detuning) {
                println!("{:<20} {:.6}", p.label.name(), p.position);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check => {
            let results = run_checks();
            for r in &results {
                println!("{r}");
            }
            Ok(if results.iter().all(|r| r.passed) { ExitCode::SUCCESS } else { ExitCode::from(2) })
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
            eprintln!("ERROR: {}", e.to_string().lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}
