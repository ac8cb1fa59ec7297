use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use peierls_cli::{run, CliError, Command, RunConfig};

#[derive(Parser)]
#[command(name = "peierls", version, about = "Layer, cell and homogenization solvers for the fractional Peierls-Nabarro model")]
struct Args {
    command: Command,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match execute(&args) {
        Ok(failures) => {
            for f in &failures {
                eprintln!("check failed: {f}");
            }
            if failures.is_empty() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn execute(args: &Args) -> Result<Vec<String>, CliError> {
    let config = RunConfig::load(&args.config)?;
    if config.command != args.command {
        return Err(CliError::Field {
            field: "command".into(),
            reason: format!(
                "config is for `{}` but `{}` was requested",
                config.command.name(),
                args.command.name()
            ),
        });
    }
    let outcome = run(&config, args.out.as_deref(), args.workers)?;
    for f in &outcome.files {
        println!("{}", f.display());
    }
    Ok(outcome.failures)
}
