//! `treecoder`: batch event coding of constituency-parsed sentences.
//!
//! Reads JSON Lines records (`{"id", "date", "parse"}`) or bare S-expression
//! lines, codes each sentence against CAMEO-style dictionaries, and writes
//! one result record per input line as JSON Lines or flat CSV, preserving
//! input order regardless of worker count.

mod config;
mod io;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::RawOptions;

#[derive(Parser, Debug)]
#[command(
    name = "treecoder",
    about = "Deterministic CAMEO event coder over constituency parses",
    version
)]
struct Cli {
    /// Input file(s): JSON Lines records or one S-expression per line.
    #[arg(long, value_name = "FILE")]
    input: Vec<PathBuf>,

    /// Output file.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Actor dictionary.
    #[arg(long, value_name = "FILE")]
    actors: Option<PathBuf>,

    /// Agent dictionary.
    #[arg(long, value_name = "FILE")]
    agents: Option<PathBuf>,

    /// Verb dictionary (patterns, transformations, synsets).
    #[arg(long, value_name = "FILE")]
    verbs: Option<PathBuf>,

    /// Discard phrase list.
    #[arg(long, value_name = "FILE")]
    discard: Option<PathBuf>,

    /// CAMEO <-> internal code mapping file.
    #[arg(long = "code-map", value_name = "FILE")]
    code_map: Option<PathBuf>,

    /// Story date for plain-text inputs (YYYYMMDD). Defaults to 20000101.
    #[arg(long = "default-date", value_name = "YYYYMMDD")]
    default_date: Option<String>,

    /// Output format: jsonl or csv.
    #[arg(long, value_name = "FORMAT")]
    format: Option<String>,

    /// Keep only events with a bound source actor (default true).
    #[arg(long = "require-source", value_name = "BOOL")]
    require_source: Option<bool>,

    /// Keep only events with a bound target actor (default true).
    #[arg(long = "require-target", value_name = "BOOL")]
    require_target: Option<bool>,

    /// Worker thread count.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,

    /// Print a per-sentence derivation trace to stderr.
    #[arg(long)]
    trace: bool,

    /// Config file of `key = value` lines; command line wins.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let raw = RawOptions {
        inputs: cli.input,
        output: cli.output,
        actors: cli.actors,
        agents: cli.agents,
        verbs: cli.verbs,
        discard: cli.discard,
        code_map: cli.code_map,
        default_date: cli.default_date,
        format: cli.format,
        require_source: cli.require_source,
        require_target: cli.require_target,
        workers: cli.workers,
        trace: cli.trace.then_some(true),
    };

    let run_config = match config::resolve(raw, cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e:#}");
            return ExitCode::from(2);
        }
    };

    match runner::run(&run_config) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e:#}");
            ExitCode::from(2)
        }
    }
}
