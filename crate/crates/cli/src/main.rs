//! `avh`: evaluate approval ballots, find best responses, classify ballot
//! files and sweep expected utility over uncertainty.
//!
//! Exit codes: 0 success, 2 bad input, 3 unknown scenario, 4 I/O failure.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use approval_heuristics::{Error, Probability, TieRule};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "avh",
    version,
    about = "Multi-winner approval voting heuristics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the strategy panel and an optional ballot, or print the full table.
    Eval(EvalArgs),
    /// List every ballot maximizing expected utility.
    BestResponse(BestResponseArgs),
    /// Label ballots with the strategies they are consistent with.
    Classify(ClassifyArgs),
    /// Write expected-utility curves for the strategy panel as CSV.
    Sweep(SweepArgs),
    /// List the built-in scenarios, or print one as JSON.
    Scenarios(ScenariosArgs),
}

#[derive(Args, Debug, Clone)]
struct Election {
    /// Built-in scenario id or path to a scenario JSON file.
    #[arg(long)]
    scenario: String,
    /// Numbers of winners, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3])]
    k: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    election: Election,
    /// Ballot as comma-separated labels; "" abstains.
    #[arg(long)]
    ballot: Option<String>,
    /// Print the full table of every heuristic, one column per k, instead.
    #[arg(long)]
    table: bool,
    /// Tie-break for --table.
    #[arg(long, value_enum, default_value_t = Tiebreak::Lex)]
    tiebreak: Tiebreak,
    /// Voters still to come.
    #[arg(long, default_value_t = 0)]
    r: u32,
    /// Probability that a future voter approves each candidate.
    #[arg(long, default_value = "0.5", value_parser = parse_probability)]
    p: Probability,
}

#[derive(Args, Debug)]
struct BestResponseArgs {
    #[command(flatten)]
    election: Election,
    #[arg(long, value_enum, default_value_t = Tiebreak::Lex)]
    tiebreak: Tiebreak,
    #[arg(long, default_value_t = 0)]
    r: u32,
    #[arg(long, default_value = "0.5", value_parser = parse_probability)]
    p: Probability,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[command(flatten)]
    election: Election,
    /// CSV file with one ballot per row; an empty row abstains.
    #[arg(long, conflicts_with = "ballot", required_unless_present = "ballot")]
    ballots: Option<PathBuf>,
    /// A single ballot instead of a file.
    #[arg(long)]
    ballot: Option<String>,
    /// Skip the first row of the ballots file.
    #[arg(long)]
    header: bool,
    /// Report malformed rows and keep going.
    #[arg(long)]
    lenient: bool,
    #[arg(long, value_enum, default_value_t = Tiebreak::Lex)]
    tiebreak: Tiebreak,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    election: Election,
    /// Numbers of remaining voters, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0u32, 1, 2, 3])]
    r: Vec<u32>,
    #[arg(long, default_value = "0.5", value_parser = parse_probability)]
    p: Probability,
    #[arg(long, value_enum, default_value_t = Tiebreak::Random)]
    tiebreak: Tiebreak,
    /// Output CSV path; defaults to sweep-<scenario>.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScenariosArgs {
    /// Scenario to print as JSON.
    id: Option<String>,
    /// Write the JSON here instead of stdout.
    #[arg(long, requires = "id")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Tiebreak {
    Lex,
    Random,
}

impl From<Tiebreak> for TieRule {
    fn from(t: Tiebreak) -> Self {
        match t {
            Tiebreak::Lex => TieRule::Lexicographic,
            Tiebreak::Random => TieRule::Random,
        }
    }
}

fn parse_probability(text: &str) -> Result<Probability, String> {
    Probability::from_decimal(text).map_err(|e| e.to_string())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::ScenarioNotFound(_) => 3,
                Error::Io(_) => 4,
                _ => 2,
            };
        }
        if cause.is::<std::io::Error>() {
            return 4;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(args) => commands::eval(&args),
        Command::BestResponse(args) => commands::best_response(&args),
        Command::Classify(args) => commands::classify(&args),
        Command::Sweep(args) => commands::sweep(&args),
        Command::Scenarios(args) => commands::scenarios(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
