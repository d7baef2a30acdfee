mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{BuildArgs, FfpArgs, HitArgs, SuslinArgs, TemplateArgs};

#[derive(Parser)]
#[command(
    name = "cofin",
    version,
    about = "Finite-stage cofinitary group constructions and checks"
)]
struct Cli {
    /// JSON file whose keys mirror the command's flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Report path; defaults to a name derived from the flags inside
    /// `$COFIN_REPORT_DIR` (or `reports/`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the generic builder and verify the frozen-set laws.
    BuildGroup(BuildArgs),
    /// Build a Brendle template (or load one) and check its axioms.
    Template(TemplateArgs),
    /// Seeded n-Suslin trials for the Hechler or localization poset.
    Suslin(SuslinArgs),
    /// Finite function poset clauses on sampled conditions.
    FfpSuite(FfpArgs),
    /// Searches for ℤ-shift hits above every N on sampled conditions.
    HitDensity(HitArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::BuildGroup(a) => commands::run(a, cli.config.as_deref(), cli.out),
        Command::Template(a) => commands::run(a, cli.config.as_deref(), cli.out),
        Command::Suslin(a) => commands::run(a, cli.config.as_deref(), cli.out),
        Command::FfpSuite(a) => commands::run(a, cli.config.as_deref(), cli.out),
        Command::HitDensity(a) => commands::run(a, cli.config.as_deref(), cli.out),
    };
    match result {
        Ok(run) => {
            println!("{}", run.path.display());
            if run.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("contract violated; see {}", run.path.display());
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
