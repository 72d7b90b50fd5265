use clap::Parser;
use holelab::{run, Command, EXIT_INCONCLUSIVE};
use holelab_core::continuation::Verdict;
use std::path::PathBuf;
use std::process::ExitCode;

/// Small-hole Dirichlet solvers and the ε-continuation laboratory.
#[derive(Parser)]
#[command(name = "holelab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Exit with status 4 when the continuation verdict is INCONCLUSIVE.
    #[arg(long)]
    strict: bool,
    /// Directory for sweep.csv and report.json.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command, &cli.config, cli.out_dir.as_deref()) {
        Ok(summary) => {
            if let Some(v) = summary.outcome.verdict {
                println!("verdict: {}", v.as_str());
            }
            println!(
                "wrote {} and {}",
                summary.csv.display(),
                summary.report.display()
            );
            if cli.strict && summary.outcome.verdict == Some(Verdict::Inconclusive) {
                return ExitCode::from(EXIT_INCONCLUSIVE as u8);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("holelab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
