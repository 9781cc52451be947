// SPDX-License-Identifier: Apache-2.0
//! `latentgraph` command-line front end.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use latentgraph::experiment::Mode;
use latentgraph::sim::Regime;
use latentgraph::Route;
use serde::{Deserialize, Serialize};

use report::{CliError, CliResult, EXIT_INPUT, EXIT_INTERNAL};

#[derive(Parser, Debug)]
#[command(name = "latentgraph", version, about = "Latent causal graphs from unlabeled single-node interventions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random model and one CSV per distinct interventional distribution.
    Simulate {
        #[command(flatten)]
        flags: Flags,
        /// Run index within the seed; different runs give different models.
        #[arg(long, default_value_t = 0)]
        run: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover the measurement model from a directory of CSVs or dependency graphs.
    Recover {
        #[command(flatten)]
        flags: Flags,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean SHD over repeated runs for every cell of the benchmark table.
    Table1 {
        #[command(flatten)]
        flags: Flags,
        /// Print JSON instead of the plain-text table.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Equivalence-class checks on graphs given as JSON files.
    Equiv {
        #[command(subcommand)]
        command: EquivCommand,
    },
    /// Classify every maximal valid subset.
    Subsets {
        #[command(flatten)]
        flags: Flags,
        #[command(flatten)]
        input: InputArgs,
        /// Ground-truth model, used to flag imaginary subsets.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a built-in example graph as JSON.
    Fixture { name: String },
}

#[derive(Subcommand, Debug)]
enum EquivCommand {
    /// Markov and isolated equivalence of two DAGs.
    Iec {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Reverse isolated edges and check the remapped targets reproduce every family.
    RemapCheck {
        #[arg(long)]
        graph: PathBuf,
        /// Edge `a,b`; every isolated edge when omitted.
        #[arg(long, value_parser = parse_edge)]
        edge: Option<(usize, usize)>,
    },
    /// Single-node target of the first DAG whose family the second cannot produce.
    Distinguish {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Single-edge maximality check of a measurement model.
    Maximal {
        #[arg(long)]
        model: PathBuf,
    },
}

/// Experiment flags. Values in `--config` override these.
#[derive(Args, Debug, Clone, Default)]
struct Flags {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    regime: Option<Regime>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    route: Option<Route>,
    #[arg(long)]
    mode: Option<Mode>,
    /// JSON object with any of the flag names as keys.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// Directory of `*.csv` samples or `udg_*.json` dependency graphs.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Model file; its dependency graphs are computed exactly.
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regime: Option<Regime>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route: Option<Route>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
}

impl Params {
    fn resolve(flags: &Flags) -> CliResult<Params> {
        let from_flags = Params {
            m: flags.m,
            n: flags.n,
            regime: flags.regime,
            runs: flags.runs,
            samples: flags.samples,
            seed: flags.seed,
            threshold: flags.threshold,
            route: flags.route,
            mode: flags.mode,
        };
        let Some(path) = &flags.config else { return Ok(from_flags) };
        let file: Params = report::read_json(path)?;
        Ok(Params {
            m: file.m.or(from_flags.m),
            n: file.n.or(from_flags.n),
            regime: file.regime.or(from_flags.regime),
            runs: file.runs.or(from_flags.runs),
            samples: file.samples.or(from_flags.samples),
            seed: file.seed.or(from_flags.seed),
            threshold: file.threshold.or(from_flags.threshold),
            route: file.route.or(from_flags.route),
            mode: file.mode.or(from_flags.mode),
        })
    }
}

fn parse_edge(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected 'a,b', got '{s}'"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("'{t}': {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { flags, run, out } => commands::simulate(&Params::resolve(&flags)?, run, &out),
        Command::Recover { flags, input, out } => {
            commands::recover(&Params::resolve(&flags)?, &input.into(), out.as_deref())
        }
        Command::Table1 { flags, json, out } => commands::table1(&Params::resolve(&flags)?, json, out.as_deref()),
        Command::Equiv { command } => match command {
            EquivCommand::Iec { a, b } => commands::equiv_iec(&a, &b),
            EquivCommand::RemapCheck { graph, edge } => commands::equiv_remap(&graph, edge),
            EquivCommand::Distinguish { a, b } => commands::equiv_distinguish(&a, &b),
            EquivCommand::Maximal { model } => commands::equiv_maximal(&model),
        },
        Command::Subsets { flags, input, truth, out } => {
            commands::subsets(&Params::resolve(&flags)?, &input.into(), truth.as_deref(), out.as_deref())
        }
        Command::Fixture { name } => commands::fixture(&name),
    }
}

impl From<InputArgs> for commands::Input {
    fn from(a: InputArgs) -> Self {
        match (a.input, a.model) {
            (Some(dir), _) => commands::Input::Dir(dir),
            (None, Some(model)) => commands::Input::Model(model),
            (None, None) => unreachable!("clap requires one input"),
        }
    }
}

fn main() -> ExitCode {
    std::panic::set_hook(Box::new(|info| {
        let err = CliError { code: EXIT_INTERNAL, stage: "panic", message: info.to_string() };
        eprintln!("{}", err.to_json());
    }));
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError { code: EXIT_INPUT, stage: "arguments", message: e.to_string().trim().to_string() };
            eprintln!("{}", err.to_json());
            return ExitCode::from(EXIT_INPUT as u8);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.code as u8)
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL as u8),
    }
}
