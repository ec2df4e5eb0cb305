use std::path::PathBuf;
use std::process::ExitCode;

use c2flow_cli::config::parse_solvers;
use c2flow_cli::{run, verify, CliError, RunConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "c2flow", version, about = "Carleman (C2) fluid and logistic experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory, overriding `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated solver set, e.g. `c2,nshj,ns`.
        #[arg(long)]
        solvers: Option<String>,
        /// Permit the dense C2 state at grid_n >= 64.
        #[arg(long)]
        allow_large_memory: bool,
        /// Only report errors.
        #[arg(long)]
        quiet: bool,
    },
    /// Replay a run and compare its CSVs against the stored ones.
    Verify {
        config: PathBuf,
        #[arg(long)]
        quiet: bool,
    },
}

fn init_logging(quiet: bool) {
    let level = if quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config, out, solvers, allow_large_memory, quiet } => {
            init_logging(quiet);
            let mut cfg = RunConfig::load(&config)?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if let Some(list) = solvers {
                cfg.solvers = parse_solvers(&list)?;
            }
            cfg.allow_large_memory |= allow_large_memory;
            let summary = run(&cfg)?;
            if !quiet {
                print!("{}", summary.report);
                for f in &summary.files {
                    println!("wrote {}", f.display());
                }
            }
            Ok(())
        }
        Command::Verify { config, quiet } => {
            init_logging(quiet);
            let cfg = RunConfig::load(&config)?;
            let report = verify(&cfg)?;
            if !quiet {
                println!(
                    "verified {} files ({} cells), max abs difference {:e}",
                    report.files_compared, report.cells_compared, report.max_abs_diff
                );
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
