//! `pcaf-lab`: scenario runner binding the laboratory modules behind a
//! reproducible command line.
//!
//! Every scenario is fully determined by its JSON config (defaults are
//! materialized into the echoed copy), artifacts are byte-identical across
//! reruns and worker counts, and exit codes distinguish assertion failures
//! from config and runtime errors.

mod config;
mod emit;
mod run;

use clap::{Parser, Subcommand};

/// Exit codes: 0 all assertions pass, 1 an assertion failed, 2 invalid
/// config, 3 runtime error.
#[derive(Parser)]
#[command(name = "pcaf-lab", version, about = "PCAF laboratory scenario runner")]
struct Cli {
    #[command(subcommand)]
    kind: KindCommand,
}

#[derive(Subcommand)]
enum KindCommand {
    /// Discrete-oracle identity battery on seeded random forms.
    Oracle {
        #[command(subcommand)]
        verb: Verb,
    },
    /// Metric tables between measures under a continuum kernel.
    Metric {
        #[command(subcommand)]
        verb: Verb,
    },
    /// Energy-class classification of measures.
    Classify {
        #[command(subcommand)]
        verb: Verb,
    },
    /// Monte-Carlo convergence trends of additive functionals.
    Mc {
        #[command(subcommand)]
        verb: Verb,
    },
    /// Density-family condition checks.
    Conditions {
        #[command(subcommand)]
        verb: Verb,
    },
    /// Martingale decomposition residuals.
    Martingale {
        #[command(subcommand)]
        verb: Verb,
    },
}

#[derive(Subcommand)]
enum Verb {
    /// Run a scenario from a JSON config.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Path to the scenario config.
    config: std::path::PathBuf,
    /// Dotted-path overrides, e.g. --set paths=500 --set family.d=3
    #[arg(long = "set", value_name = "key=value")]
    set: Vec<String>,
    /// Output path prefix (overrides the config's `output`).
    #[arg(long)]
    out: Option<String>,
}

fn main() {
    let cli = Cli::parse();
    let (expected_kind, args) = match &cli.kind {
        KindCommand::Oracle { verb: Verb::Run(a) } => ("oracle-suite", a),
        KindCommand::Metric { verb: Verb::Run(a) } => ("metric", a),
        KindCommand::Classify { verb: Verb::Run(a) } => ("classify", a),
        KindCommand::Mc { verb: Verb::Run(a) } => ("mc-convergence", a),
        KindCommand::Conditions { verb: Verb::Run(a) } => ("conditions", a),
        KindCommand::Martingale { verb: Verb::Run(a) } => ("martingale", a),
    };
    let code = match run::run_scenario(expected_kind, &args.config, &args.set, args.out.as_deref())
    {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(run::ScenarioError::Config(msg)) => {
            eprintln!("config error: {msg}");
            2
        }
        Err(err) => {
            eprintln!("runtime error: {err}");
            3
        }
    };
    std::process::exit(code);
}
