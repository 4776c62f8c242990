use clap::{Parser, Subcommand};
use polyrig_cli::config::Overrides;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "polyrig", version, about = "Run spinor rigidity check suites on polyhedral initial data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites named in a TOML config.
    Run {
        config: PathBuf,
        /// Suite to run instead of the configured list; repeatable.
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Grid resolution replacing the configured list; repeatable.
        #[arg(long = "resolution")]
        resolutions: Vec<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the formula a check evaluates.
    Explain { check: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, suites, resolutions, seed, out } => {
            let o = Overrides { suites, resolutions, seed, out };
            match polyrig_cli::run(&config, &o) {
                Ok(r) => {
                    println!("{}", r.summary);
                    println!("report: {}", r.report.display());
                    if r.pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Explain { check } => match polyrig_cli::explain::explain(&check) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
    }
}
