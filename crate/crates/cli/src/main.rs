//! `crossgcn`: train and evaluate partially aligned GCNs, generate
//! synthetic graph pairs, sweep hyperparameters, and run the theory checks.

mod commands;
mod settings;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "crossgcn",
    version,
    about = "Cross-network learning with partially aligned graph convolutional networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic partially aligned graph pair as TSV/CSV files.
    Generate(commands::generate::GenerateArgs),
    /// Train one model configuration and write a checkpoint plus reports.
    Train(commands::train::TrainArgs),
    /// Evaluate a checkpoint on a dataset split.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Grid sweep over alpha/beta/d for one or more models.
    Sweep(commands::sweep::SweepArgs),
    /// Run the theory suite and emit its JSON report and CSV tables.
    TheoryCheck(commands::theory::TheoryArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => commands::generate::run(args),
        Command::Train(args) => commands::train::run(args),
        Command::Evaluate(args) => commands::evaluate::run(args),
        Command::Sweep(args) => commands::sweep::run(args),
        Command::TheoryCheck(args) => commands::theory::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
