use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use consistent_kcenter::harness::{
    generate_stream, run_stream, GenMode, GenOptions, MetricKind, OracleChoice, RunError,
    RunOptions,
};
use consistent_kcenter::oracle::DEFAULT_ENUMERATION_CAP;

#[derive(Parser)]
#[command(
    name = "ckc",
    version,
    about = "Consistent k-center stream replay and generation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a stream and write one JSON report per event.
    Run {
        /// Stream file, or `-` for stdin.
        #[arg(long)]
        stream: PathBuf,
        /// Audit invariants and exit with status 4 on the first violation.
        #[arg(long)]
        verify: bool,
        #[arg(long, value_enum, default_value_t = OracleChoice::None)]
        oracle: OracleChoice,
        /// Report file (default: stdout).
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        audit_every: u64,
        /// Largest number of center sets the exact oracle may enumerate.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        enumeration_cap: u64,
    },
    /// Write a seeded synthetic stream.
    Gen {
        /// Maximum number of active points.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        delta: u64,
        #[arg(long, value_enum)]
        mode: GenMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Events after the initial fill.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, value_enum, default_value_t = MetricKind::Euclidean)]
        metric: MetricKind,
    },
}

fn output(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(stream: PathBuf, report: Option<PathBuf>, opts: RunOptions) -> Result<(), RunError> {
    let out = output(report.as_ref())?;
    let summary = if stream.as_os_str() == "-" {
        run_stream(io::stdin().lock(), out, &opts)?
    } else {
        run_stream(BufReader::new(File::open(&stream)?), out, &opts)?
    };
    eprintln!(
        "{}",
        serde_json::to_string(&summary).expect("summary serializes")
    );
    Ok(())
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            stream,
            verify,
            oracle,
            report,
            audit_every,
            enumeration_cap,
        } => {
            let opts = RunOptions {
                verify,
                oracle,
                audit_every,
                enumeration_cap,
            };
            match run(stream, report, opts) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("ckc: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::Gen {
            n,
            k,
            delta,
            mode,
            seed,
            out,
            steps,
            dim,
            metric,
        } => {
            let opts = GenOptions {
                n,
                k,
                delta,
                mode,
                seed,
                steps,
                dim,
                metric,
            };
            let stream = match generate_stream(&opts) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("ckc: {e}");
                    return ExitCode::from(2);
                }
            };
            let written = output(out.as_ref()).and_then(|mut w| {
                stream.write_to(&mut w)?;
                w.flush()
            });
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("ckc: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
