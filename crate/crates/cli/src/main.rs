use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mroot_cli::{commands, CliError, Options, Outcome, VerifySource};

#[derive(Parser)]
#[command(name = "mroot", version, about = "Hyperdeterminants and volume densities of m-th root metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Emit the result document as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for the contraction kernels.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Lift the term budget and the odd-rank dimension restriction.
    #[arg(long, global = true)]
    allow_big: bool,
}

#[derive(Args)]
struct Input {
    /// Path to the input document.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Hyperdeterminant of the branch selected by the parity of (m, n).
    Hdet(Input),
    /// Volume density and non-degeneracy verdict.
    Density {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Check the density transformation laws on sampled coordinate changes.
    Verify {
        /// Metric document; omit when using --random.
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        input: Option<PathBuf>,
        /// Random metrics of rank M in dimension N.
        #[arg(long, num_args = 2, value_names = ["M", "N"])]
        random: Option<Vec<usize>>,
        /// Fixed Jacobian document used instead of random ones.
        #[arg(long, requires = "input")]
        jacobian: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest relative error that still passes.
        #[arg(long, default_value_t = 1e-8)]
        law_tol: f64,
    },
    /// Trapezoid integral of the volume density over a sampled box.
    Integrate {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Run the built-in consistency checks.
    Selftest,
}

fn read(path: &PathBuf) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::schema(format!("cannot read {}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let mut opts = Options {
        workers: cli.workers,
        allow_big: cli.allow_big,
        ..Options::default()
    };
    match &cli.command {
        Command::Hdet(input) => commands::hdet(&read(&input.input)?, &opts),
        Command::Density { input, tol } => {
            opts.tol = *tol;
            commands::density(&read(&input.input)?, &opts)
        }
        Command::Verify {
            input,
            random,
            jacobian,
            trials,
            seed,
            law_tol,
        } => {
            opts.trials = *trials;
            opts.seed = *seed;
            opts.law_tol = *law_tol;
            let source = match (random.as_deref(), input) {
                (Some(&[rank, dim]), _) => VerifySource::Random { rank, dim },
                (_, Some(path)) => VerifySource::Document {
                    tensor: read(path)?,
                    jacobian: jacobian.as_ref().map(read).transpose()?,
                },
                _ => return Err(CliError::schema("verify needs --input or --random M N")),
            };
            commands::verify(&source, &opts)
        }
        Command::Integrate { input, tol } => {
            opts.tol = *tol;
            commands::integrate(&read(&input.input)?, &opts)
        }
        Command::Selftest => commands::selftest(&opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let text = outcome.render(cli.json);
            if std::io::stdout().write_all(text.as_bytes()).is_err() {
                return ExitCode::FAILURE;
            }
            ExitCode::from(outcome.exit as u8)
        }
        Err(e) => {
            eprintln!("mroot: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
