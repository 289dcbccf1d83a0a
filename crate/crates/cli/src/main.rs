//! `speclab`: batch driver for the spectral experiments.
//!
//! Exit status: 0 when every check passes, 1 on a failed check or a numerical
//! failure, 2 on a configuration or I/O error.

mod commands;
mod config;
mod potential;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use commands::{Context, Failure};
use config::ExperimentConfig;

#[derive(Parser, Debug)]
#[command(name = "speclab", version, about = "Eigenvalue-sum experiments for perturbed Dirac and Klein-Gordon operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` configuration file with [sections].
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides experiment.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for CSV tables and summary.txt.
    #[arg(long, global = true, default_value = "speclab-out")]
    out: PathBuf,

    /// Worker threads for sweeps (fallback: SPECLAB_THREADS, then 1).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Clifford relations of the alpha/beta matrices for d = 1, 2, 3.
    CliffordCheck,
    /// Discrete spectrum of the perturbed operator with weights.
    Spectrum,
    /// Disc map round trips and the Koebe distance bracket.
    ConformalCheck,
    /// Radial resolvent integrals, the lattice Schatten bound and b*.
    ResolventBound,
    /// Zeros of the perturbation determinant against the eigenvalues.
    DetZeros,
    /// Weighted eigenvalue sums.
    LtSum,
    /// Zero sums and growth envelopes of random Blaschke products.
    BgkCheck,
    /// Scaling experiment: slope of log sum against log s.
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::CliffordCheck => "clifford-check",
            Command::Spectrum => "spectrum",
            Command::ConformalCheck => "conformal-check",
            Command::ResolventBound => "resolvent-bound",
            Command::DetZeros => "det-zeros",
            Command::LtSum => "lt-sum",
            Command::BgkCheck => "bgk-check",
            Command::Sweep => "sweep",
        }
    }
}

fn threads(flag: Option<usize>) -> Result<usize, String> {
    let k = match flag {
        Some(k) => k,
        None => match std::env::var("SPECLAB_THREADS") {
            Ok(s) => s.trim().parse().map_err(|_| format!("SPECLAB_THREADS={s:?} is not a positive integer"))?,
            Err(_) => 1,
        },
    };
    if k == 0 {
        return Err("thread count must be positive".into());
    }
    Ok(k)
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let threads = threads(cli.threads).map_err(Failure::Config)?;
    let (text, base) = match &cli.config {
        Some(p) => (
            std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (String::new(), PathBuf::new()),
    };
    let cfg = ExperimentConfig::from_text(&text, cli.seed).map_err(|e| Failure::Config(e.to_string()))?;
    let ctx = Context { cfg: &cfg, base: &base, threads };
    let report = match cli.command {
        Command::CliffordCheck => commands::clifford_check(&ctx),
        Command::Spectrum => commands::spectrum(&ctx),
        Command::ConformalCheck => commands::conformal_check(&ctx),
        Command::ResolventBound => commands::resolvent_bound(&ctx),
        Command::DetZeros => commands::det_zeros(&ctx),
        Command::LtSum => commands::lt_sum_cmd(&ctx),
        Command::BgkCheck => commands::bgk_check(&ctx),
        Command::Sweep => commands::sweep(&ctx),
    }?;
    let hash: String = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    let head = vec![
        ("command".to_string(), cli.command.name().to_string()),
        ("experiment".to_string(), cfg.name.clone()),
        ("config_sha256".to_string(), hash),
        ("seed".to_string(), cfg.seed.to_string()),
    ];
    report
        .write(&cli.out, &head)
        .map_err(|e| Failure::Config(format!("writing {}: {e}", cli.out.display())))?;
    print!("{}", report.summary_text(&head));
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("speclab {}: {f}", cli.command.name());
            ExitCode::from(match f {
                Failure::Config(_) => 2,
                Failure::Numerical(_) => 1,
            })
        }
    }
}
