use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gaudin_aba::config::{Backend, RunConfig, Workflow};
use gaudin_aba::runner::{self, Format, Outcome, UsageError};

#[derive(Parser)]
#[command(name = "gaudin", version, about = "Bethe ansatz toolkit for the XXZ Gaudin model with generic boundary")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity suite at random rational points.
    Verify(Common),
    /// Exact diagonalization of the transfer matrix at the test points.
    Spectrum(Common),
    /// Solve the Bethe equations and validate against exact diagonalization.
    Bethe(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Debug: add one to the left side of every identity.
    #[arg(long, hide = true)]
    perturb: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    Float,
}

fn run(workflow: Workflow, args: &Common) -> Result<Outcome, UsageError> {
    let mut cfg = RunConfig::load(&args.config).map_err(|e| UsageError(e.to_string()))?;
    if let Some(s) = args.seed {
        cfg = cfg.with_seed(s);
    }
    if let Some(w) = cfg.workflow {
        if w != workflow {
            return Err(UsageError(format!(
                "config declares workflow {:?} but {:?} was requested",
                w.name(),
                workflow.name()
            )));
        }
    }
    let backend = match args.backend {
        Some(BackendArg::Exact) => Backend::Exact,
        Some(BackendArg::Float) => Backend::Float,
        None => cfg.backend.unwrap_or(match workflow {
            Workflow::Verify => Backend::Exact,
            _ => Backend::Float,
        }),
    };
    if args.perturb && workflow != Workflow::Verify {
        return Err(UsageError("--perturb only applies to verify".into()));
    }
    match workflow {
        Workflow::Verify => runner::run_verify(&cfg, backend, args.perturb),
        Workflow::Spectrum => runner::run_spectrum(&cfg, backend),
        Workflow::Bethe => runner::run_bethe(&cfg, backend),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (workflow, args) = match &cli.command {
        Command::Verify(a) => (Workflow::Verify, a),
        Command::Spectrum(a) => (Workflow::Spectrum, a),
        Command::Bethe(a) => (Workflow::Bethe, a),
    };
    let outcome = match run(workflow, args) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = outcome.render(match args.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    });
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if outcome.exit_code != 0 {
        eprintln!("{} reported failures", workflow.name());
    }
    ExitCode::from(outcome.exit_code as u8)
}
