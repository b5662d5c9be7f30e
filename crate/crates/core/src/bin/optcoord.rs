use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use optcoord::cli::{self, exit_code, RunOptions};

#[derive(Parser)]
#[command(
    name = "optcoord",
    version,
    about = "Distributed optimal coordination of linear multi-agent systems"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check graph, step size and every agent's regulation prerequisites.
    Validate { file: PathBuf },
    /// Print the step-size bound and whether the scenario's beta satisfies it.
    Bounds { file: PathBuf },
    /// Simulate and write trajectory.csv, metrics.json and plots/.
    Run {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        stride: Option<u64>,
    },
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn fail(err: optcoord::Error) -> ExitCode {
    eprintln!("error: {err}");
    code(cli::exit_code_for(&err))
}

fn main() -> ExitCode {
    let args = Args::parse();
    match args.command {
        Command::Validate { file } => match cli::validate_command(&file) {
            Ok(report) => {
                println!("{report}");
                if report.passed() {
                    code(exit_code::SUCCESS)
                } else {
                    code(exit_code::VALIDATION)
                }
            }
            Err(e) => fail(e),
        },
        Command::Bounds { file } => match cli::bounds_command(&file) {
            Ok(report) => {
                println!("{report}");
                code(exit_code::SUCCESS)
            }
            Err(e) => fail(e),
        },
        Command::Run {
            file,
            out,
            seed,
            stride,
        } => {
            let options = RunOptions {
                seed,
                stride: stride.map(|s| s as usize),
            };
            match cli::run_command(&file, &out, &options) {
                Ok(outcome) => {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&outcome.report).expect("serializable")
                    );
                    println!("wrote {}", outcome.trajectory_csv.display());
                    println!("wrote {}", outcome.metrics_json.display());
                    for p in &outcome.plots {
                        println!("wrote {}", p.display());
                    }
                    code(exit_code::SUCCESS)
                }
                Err(e) => fail(e),
            }
        }
    }
}
