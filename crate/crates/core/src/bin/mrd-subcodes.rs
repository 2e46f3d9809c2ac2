use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mrd_subcodes::experiment::{self, ExperimentConfig, ExperimentError, Overrides};
use mrd_subcodes::qlinalg::ErrorMode;

/// Gabidulin codes, subspace subcodes and their direct sums: experiments
/// with JSON Lines output.
#[derive(Parser)]
#[command(name = "mrd-subcodes", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the parameters of the configured code and direct sum.
    CodeInfo(ConfigArgs),
    /// Encode, corrupt with rank-t errors and decode on the base code.
    Roundtrip(RunArgs),
    /// Monte Carlo success rates of beyond-capability decoding.
    Simulate(SimulateArgs),
    /// Parity-check factorization of a subfield subcode.
    Subfield(SubfieldArgs),
    /// Number of t x m q-ary matrices of each rank.
    Count(CountArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Write records here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    ExactRank,
    UniformMatrix,
}

impl From<Mode> for ErrorMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::ExactRank => ErrorMode::ExactRank,
            Mode::UniformMatrix => ErrorMode::UniformMatrix,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    decode_trials: Option<u64>,
    /// Comma-separated error ranks.
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Also write a CSV projection of the records.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SubfieldArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Subfield degree s, overriding the config.
    #[arg(long)]
    s: Option<usize>,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long)]
    q: u32,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    t: usize,
    /// Only this rank.
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn resolve(
    args: &ConfigArgs,
    mut overrides: Overrides,
) -> Result<experiment::Resolved, ExperimentError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    overrides.output = args.output.clone();
    cfg.apply(&overrides);
    cfg.resolve()
}

fn run_overrides(r: &RunArgs) -> Overrides {
    Overrides {
        seed: r.seed,
        trials: r.trials,
        decode_trials: r.decode_trials,
        t: r.t.clone(),
        mode: r.mode.map(Into::into),
        ..Overrides::default()
    }
}

fn run(cli: Cli) -> Result<(), ExperimentError> {
    let (records, output) = match cli.command {
        Command::CodeInfo(a) => {
            let r = resolve(&a, Overrides::default())?;
            (r.code_info()?, r.config.output.clone())
        }
        Command::Roundtrip(a) => {
            let r = resolve(&a.config, run_overrides(&a))?;
            (r.roundtrip()?, r.config.output.clone())
        }
        Command::Simulate(a) => {
            let r = resolve(&a.run.config, run_overrides(&a.run))?;
            let records = r.simulate()?;
            if let Some(csv) = &a.csv {
                experiment::emit(&experiment::to_csv(&records), Some(csv))?;
            }
            (records, r.config.output.clone())
        }
        Command::Subfield(a) => {
            let overrides = Overrides {
                subfield: a.s,
                ..Overrides::default()
            };
            let r = resolve(&a.config, overrides)?;
            (r.subfield()?, r.config.output.clone())
        }
        Command::Count(a) => (experiment::count_records(a.q, a.m, a.t, a.rank)?, a.output),
    };
    experiment::emit(&experiment::to_json_lines(&records), output.as_deref())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mrd-subcodes: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
