use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use diracpdm_cli::{run, RunOptions, EXIT_INPUT};

#[derive(Parser)]
#[command(name = "diracpdm", version, about = "Dirac oscillator solver suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the workflow described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Compare verdicts against an earlier report.
        #[arg(long)]
        recheck: Option<PathBuf>,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let Command::Run { config, recheck, out } = cli.command;
    match run(&RunOptions { config, recheck, out }) {
        Ok(outcome) => {
            for c in &outcome.report.checks {
                let status = if c.pass { "PASS" } else { "FAIL" };
                match &c.detail {
                    Some(d) => println!("{status} {} ({d})", c.name),
                    None => println!("{status} {}", c.name),
                }
            }
            if let Some(r) = &outcome.recheck {
                for m in r.inconsistencies.iter().chain(&r.differences) {
                    println!("RECHECK {m}");
                }
                if r.is_clean() {
                    println!("RECHECK verdicts reproduced");
                }
            }
            println!("report: {}", outcome.report_path.display());
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
