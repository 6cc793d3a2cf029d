use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use symwin_cli::commands::{self, RunOptions};
use symwin_cli::{CliError, Pipeline};

/// Declarative windows over data streams.
///
/// Exit codes: 0 success (bounded for `check`), 1 unbounded, 2 invalid
/// configuration, input or specifier, 3 missing theory capability,
/// 4 unknown boundedness.
#[derive(Parser)]
#[command(name = "symwin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile every window to an automaton document.
    Compile {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Extract windows from a stream and print them as JSON lines.
    Run {
        #[arg(short, long)]
        config: PathBuf,
        /// Input file; standard input when absent.
        #[arg(short, long)]
        input: Option<PathBuf>,
        /// Output file; standard output when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Check the processor invariants after every step.
        #[arg(long)]
        debug_invariants: bool,
        /// Print pane reports to standard error every N records.
        #[arg(long, value_name = "N", default_value_t = 0)]
        report_every: usize,
    },
    /// Decide whether the windows run in bounded memory.
    Check {
        #[arg(short, long)]
        config: PathBuf,
        /// Longest witness words tried for infinite theories.
        #[arg(long, default_value_t = 6)]
        budget: usize,
    },
    /// Run the processor on every conforming stream up to a length.
    Simulate {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        horizon: usize,
        /// Largest number of streams visited.
        #[arg(long, default_value_t = 1 << 20)]
        cap: usize,
    },
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Compile { config, out } => {
            let pipeline = Pipeline::load(&config)?;
            for path in commands::compile(&pipeline, &out)? {
                println!("{}", path.display());
            }
            Ok(0)
        }
        Command::Run { config, input, out, debug_invariants, report_every } => {
            let pipeline = Pipeline::load(&config)?;
            let opts = RunOptions { debug_invariants, report_every };
            let input: Box<dyn io::BufRead> = match &input {
                Some(p) => Box::new(BufReader::new(File::open(p).map_err(|e| CliError::io(p, e))?)),
                None => Box::new(io::stdin().lock()),
            };
            let mut out: Box<dyn Write> = match &out {
                Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
                None => Box::new(BufWriter::new(io::stdout().lock())),
            };
            let mut diag = io::stderr().lock();
            let summary = commands::run(&pipeline, input, &mut out, &mut diag, opts)?;
            if summary.rejected > 0 {
                eprintln!("{} of {} records rejected", summary.rejected, summary.rejected + summary.records);
            }
            Ok(0)
        }
        Command::Check { config, budget } => {
            let pipeline = Pipeline::load(&config)?;
            let (report, verdict) = commands::check(&pipeline, budget)?;
            print_json(&report);
            Ok(commands::verdict_exit_code(&verdict))
        }
        Command::Simulate { config, horizon, cap } => {
            let pipeline = Pipeline::load(&config)?;
            print_json(&commands::simulate(&pipeline, horizon, cap)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("symwin: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
