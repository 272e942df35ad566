use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use softheap_cli::{bench, replay, sort, CliError, Exit, Output};
use softheap_core::checker::{validate, ValidateConfig};
use softheap_core::{Epsilon, HeapKind};

#[derive(Parser)]
#[command(name = "softheap", version, about = "Soft heap laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a trace file and log every answer
    Replay {
        file: PathBuf,
        #[arg(long = "impl", default_value = "softseq")]
        kind: HeapKind,
        /// Check the structural bounds after every operation
        #[arg(long)]
        audit: bool,
    },
    /// Run a seeded random operation mix under the checker
    Validate {
        #[arg(long = "impl", default_value = "softseq")]
        kind: HeapKind,
        #[arg(long, default_value_t = 100_000)]
        ops: u64,
        #[arg(long, default_value = "1/4")]
        epsilon: Epsilon,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Size of the heap pool
        #[arg(long, default_value_t = 4)]
        heaps: usize,
        /// Structural audit period in operations, 0 for none
        #[arg(long, default_value_t = 1)]
        audit_every: u64,
    },
    /// Insert-and-drain benchmark table as CSV
    Bench {
        #[arg(long, default_value = "seq,softseq,ternary")]
        impls: String,
        /// `2^a..2^b` or a comma list
        #[arg(long = "n", default_value = "2^10..2^16")]
        sizes: String,
        #[arg(long, default_value = "1/2,1/4,1/8,1/16,1/32,1/64,1/128,1/256")]
        epsilons: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Timed runs per cell; the median is reported
        #[arg(long, default_value_t = 5)]
        runs: usize,
    },
    /// Sort through a soft heap and count inversions
    #[command(group(ArgGroup::new("source").required(true).args(["random", "input"])))]
    ApproxSort {
        #[arg(long)]
        random: Option<usize>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "1/16")]
        epsilon: Epsilon,
        #[arg(long = "impl", default_value = "softseq")]
        kind: HeapKind,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Print only the summary line
        #[arg(long)]
        summary_only: bool,
    },
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<Output, CliError> {
    match cli.command {
        Command::Replay { file, kind, audit } => {
            let (out, err) = replay::replay(&read(&file)?, kind, audit);
            print!("{out}");
            match err {
                Some(e) => Err(e),
                None => Ok(Output {
                    stdout: String::new(),
                    ..out
                }),
            }
        }
        Command::Validate {
            kind,
            ops,
            epsilon,
            seed,
            heaps,
            audit_every,
        } => {
            let mut cfg = ValidateConfig::new(kind, epsilon, ops, seed);
            cfg.heaps = heaps.max(1);
            cfg.audit_every = audit_every;
            let report = validate(&cfg);
            Ok(Output {
                stdout: report.to_string(),
                exit: if report.is_clean() {
                    Exit::Clean
                } else {
                    Exit::Violation
                },
            })
        }
        Command::Bench {
            impls,
            sizes,
            epsilons,
            seed,
            runs,
        } => {
            let kinds = bench::parse_impls(&impls)?;
            let sizes = bench::parse_sizes(&sizes)?;
            let epsilons = bench::parse_epsilons(&epsilons)?;
            println!("{}", bench::CSV_HEADER);
            for &kind in &kinds {
                for &n in &sizes {
                    for r in bench::bench(&[kind], &[n], &epsilons, seed, runs) {
                        println!("{r}");
                    }
                }
            }
            Ok(Output::clean(String::new()))
        }
        Command::ApproxSort {
            random,
            input,
            epsilon,
            kind,
            seed,
            summary_only,
        } => {
            let keys = match (random, input) {
                (Some(n), _) => sort::random_input(n, seed),
                (None, Some(path)) => sort::parse_keys(&read(&path)?)?,
                (None, None) => unreachable!("clap requires one source"),
            };
            Ok(sort::run(kind, epsilon, &keys, summary_only))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::from(out.exit.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Exit::Usage.code() as u8)
        }
    }
}
