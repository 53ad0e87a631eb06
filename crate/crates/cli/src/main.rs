//! `blgv`: runs one experiment per invocation and writes its report
//! directory.
//!
//! Exit codes: 0 pass, 1 usage or configuration error, 2 failed check,
//! 3 aborted run (temperature floor or blow-up).

mod experiments;

use std::path::PathBuf;
use std::process::ExitCode;

use blgv_core::config::RunConfig;
use blgv_core::report::ReportDir;
use clap::{Parser, Subcommand};

use experiments::{error_exit_code, execute, Experiment};

#[derive(Parser)]
#[command(version, about = "Boundary-layer analyticity laboratory")]
struct Cli {
    /// TOML configuration; defaults are used when omitted
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Base output directory (overrides output.dir)
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[command(rename_all = "snake_case")]
enum Command {
    /// Monitored solver run
    Run,
    /// Manufactured-solution refinement studies
    Mms,
    /// Bounded-ratio check of the a priori estimate
    Apriori,
    /// Audit of the analyticity radius against the spectrum
    Radius,
    /// Two-trajectory uniqueness experiment
    Uniqueness,
    /// Vanishing tangential viscosity study
    NuLimit,
    /// Littlewood-Paley, Bony, weight and Hardy identity suites
    LpSelftest,
    /// Write plot scripts for an existing report directory
    Plots { dir: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let exp = match cli.command {
        Command::Run => Experiment::Run,
        Command::Mms => Experiment::Mms,
        Command::Apriori => Experiment::Apriori,
        Command::Radius => Experiment::Radius,
        Command::Uniqueness => Experiment::Uniqueness,
        Command::NuLimit => Experiment::NuLimit,
        Command::LpSelftest => Experiment::LpSelftest,
        Command::Plots { dir } => {
            return match experiments::plots(&dir) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    let base = cli.out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let stamp = chrono::Local::now().format("%Y%m%d-%H%M%S").to_string();
    let dir = match ReportDir::create(&base, exp.name(), &stamp) {
        Ok(d) => d,
        Err(e) => {
            eprintln!(
                "error: cannot create report directory under {}: {e}",
                base.display()
            );
            return ExitCode::from(1);
        }
    };
    log::info!("report directory {}", dir.path().display());
    match execute(exp, &cfg, &dir) {
        Ok(out) => {
            for c in &out.checks {
                println!(
                    "{:<4} {} = {} (limit {})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.limit
                );
            }
            println!("{} {}", out.status.as_str(), dir.path().display());
            ExitCode::from(out.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            println!("report {}", dir.path().display());
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
