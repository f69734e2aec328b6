//! `gale`: compile, check, solve and synthesize games given by automata
//! over the naturals.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "gale",
    version,
    about = "Games over the naturals: decide, synthesize, verify, play"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: Flags,
}

/// Caps and outputs shared by every command.
#[derive(clap::Args, Debug, Clone)]
pub struct Flags {
    /// Deepening rounds of the strategy search.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_deepening: u64,
    /// Cap on fixpoint iterations.
    #[arg(long, global = true, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_iterations: u64,
    /// Rounds played before a play verdict is reported unknown.
    #[arg(long, global = true, default_value_t = 2_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub horizon: u64,
    /// Seed for the generated adversaries.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Also write the command's result as JSON here.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Write a Graphviz rendering here.
    #[arg(long, global = true)]
    pub dot: Option<PathBuf>,
    /// Largest counter value drawn in game renderings.
    #[arg(long, global = true, default_value_t = 4)]
    pub max_counter: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the validation report of an automaton.
    Check { input: PathBuf },
    /// Decide non-emptiness and print a witness word or EMPTY.
    Empt { input: PathBuf },
    /// Print the winner of the game and a verified strategy.
    Solve {
        input: PathBuf,
        /// Continue an interrupted run from its partial-state file.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Write a transducer for the winner, its strategy and certificates.
    Synth {
        input: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Re-check an artifact written by `synth`.
    Verify { artifact: PathBuf },
    /// Play against the winner's transducer on standard input.
    Play {
        input: PathBuf,
        /// Use the transducer of this artifact instead of synthesizing one.
        #[arg(long)]
        artifact: Option<PathBuf>,
    },
    /// Write DOT and JSON renderings of an automaton and its game.
    Export { input: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let f = &cli.config;
    let result = match &cli.command {
        Command::Check { input } => commands::check(input, f),
        Command::Empt { input } => commands::empt(input, f),
        Command::Solve { input, resume } => commands::solve(input, resume.as_deref(), f),
        Command::Synth { input, out, resume } => commands::synth(input, out, resume.as_deref(), f),
        Command::Verify { artifact } => commands::verify(artifact, f),
        Command::Play { input, artifact } => commands::play(input, artifact.as_deref(), f),
        Command::Export { input } => commands::export(input, f),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
