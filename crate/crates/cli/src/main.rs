//! `fgcl`: the formula retrieval pipeline from the command line.
//!
//! Every subcommand reads the same experiment config (`--config`), and every
//! config key can be overridden with `--key=value` or `--key value`.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{RunConfig, KEYS};
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "fgcl",
    version,
    about = "Math formula retrieval with graph contrastive learning",
    after_help = "Any config key may be given as a flag, e.g. --layout=opt --epochs=5 --seed=3."
)]
struct Cli {
    /// Experiment config file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a formula and print its graph in the configured layout.
    Parse { formula: String },
    /// Generate the synthetic corpus, queries and qrels.
    Synth,
    /// Train the token embedding table on corpus walks.
    TrainTokens,
    /// Train the graph encoder contrastively; writes a checkpoint and loss history.
    TrainGcl,
    /// Embed the corpus and write the index.
    Index,
    /// Rank the index against a formula, or against every query with --all.
    Query {
        formula: Option<String>,
        #[arg(short, default_value_t = 10)]
        k: usize,
        /// Rank every formula of the queries file and print a TREC run.
        #[arg(long, conflicts_with = "formula")]
        all: bool,
        /// Write the output here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a TREC run file with bpref against the configured qrels.
    Eval {
        run: PathBuf,
        #[arg(long, default_value = "full")]
        setting: String,
    },
    /// Run the augmentation × batch-size grid; writes results and heatmaps.
    Bench,
}

/// Splits config-key flags from the arguments clap should see.
fn split_overrides(args: Vec<String>) -> Result<(Vec<String>, Vec<(String, String)>), CliError> {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            rest.push(arg);
            continue;
        };
        let (key, inline) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (flag.to_string(), None),
        };
        if !KEYS.contains(&key.as_str()) {
            rest.push(arg);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it.next().ok_or_else(|| CliError::invalid(format!("--{key} needs a value")))?,
        };
        overrides.push((key, value));
    }
    Ok((rest, overrides))
}

fn run(cli: Cli, overrides: &[(String, String)]) -> Result<String, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for (k, v) in overrides {
        cfg.set(k, v).map_err(|m| CliError::invalid(format!("--{k}: {m}")))?;
    }
    match cli.command {
        Command::Parse { formula } => commands::parse(&cfg, &formula),
        Command::Synth => commands::synth(&cfg),
        Command::TrainTokens => commands::train_tokens(&cfg),
        Command::TrainGcl => commands::train_gcl_cmd(&cfg),
        Command::Index => commands::index(&cfg),
        Command::Query { formula, k, all, out } => {
            let text = match (all, formula) {
                (true, _) => commands::query_all(&cfg, k)?,
                (false, Some(f)) => commands::query_one(&cfg, &f, k)?,
                (false, None) => return Err(CliError::invalid("query needs a formula or --all")),
            };
            match out {
                Some(path) => {
                    std::fs::write(&path, &text).map_err(|e| CliError::io(path.display(), e))?;
                    Ok(String::new())
                }
                None => Ok(text),
            }
        }
        Command::Eval { run, setting } => commands::eval(&cfg, &run, &setting),
        Command::Bench => commands::bench(&cfg),
    }
}

fn main() -> ExitCode {
    let (args, overrides) = match split_overrides(std::env::args().collect()) {
        Ok(split) => split,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.code);
        }
    };
    // clap exits with 2 on usage errors, matching the invalid-input code
    let cli = Cli::parse_from(args);
    match run(cli, &overrides) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            // a closed pipe is not a failure of the command
            let _ = stdout.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
