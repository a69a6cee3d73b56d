//! `qlab`: run noncontextuality and Born-rule experiments and emit csv or
//! json reports.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use qlab_core::harness::{
    emit_report, parse_state_file, run_experiment, sweep, Command, ExperimentConfig, OutputFormat, ReportRecord,
    RuleSpec,
};
use qlab_core::proof::rational_from_f64;
use qlab_core::{Error, Rational, Tolerances};

#[derive(Parser)]
#[command(
    name = "qlab",
    version,
    about = "Noncontextuality laboratory for candidate probability rules"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search for contexts on which a rule assigns a shared outcome different probabilities.
    NpScan,
    /// Check normalization and orthogonal additivity.
    Postulates,
    /// Check independence from amplitude phases.
    Phase,
    /// Bracket TARGET between rationals realized by explicit contexts.
    Sandwich {
        /// A fraction `p/q` or a decimal in (0, 1).
        target: String,
    },
    /// Split weights m/N, (N-m)/N into N equal branches and compare the rule across resolutions.
    Finegrain { m: u64, n: u64 },
    /// Compare a local marginal under two remote context choices.
    Signalling,
    /// Fit a density matrix to the rule's outcome probabilities.
    Reconstruct,
    /// Summarize an experiment over Born and power laws for several exponents.
    Sweep {
        /// Experiment to sweep.
        #[arg(long, default_value = "np-scan")]
        experiment: String,
        /// Exponent of a context-normalized power law (repeatable).
        #[arg(long = "alpha", value_delimiter = ',')]
        alphas: Vec<f64>,
    },
}

#[derive(Args)]
struct Opts {
    /// Hilbert-space dimension (repeatable).
    #[arg(long = "dim", global = true, value_delimiter = ',')]
    dims: Vec<usize>,
    /// born | power:ALPHA[:raw] | dim2sector | stub (repeatable).
    #[arg(long = "rule", global = true, value_delimiter = ',')]
    rules: Vec<String>,
    #[arg(long, global = true, default_value_t = 100)]
    trials: usize,
    /// Master seed.
    #[arg(long, global = true, env = "QLAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Sandwich width.
    #[arg(long, global = true, default_value_t = 1e-9)]
    epsilon: f64,
    #[arg(long, global = true)]
    eps_norm: Option<f64>,
    #[arg(long, global = true)]
    eps_ortho: Option<f64>,
    #[arg(long, global = true)]
    eps_rank: Option<f64>,
    /// json | csv.
    #[arg(long, global = true, default_value = "csv")]
    format: String,
    /// Report exact rationals where available.
    #[arg(long, global = true)]
    exact: bool,
    /// State file replacing the random states.
    #[arg(long, global = true)]
    state: Option<PathBuf>,
    /// Normalize the state file instead of rejecting non-unit vectors.
    #[arg(long, global = true)]
    normalize: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Emit a header-only report instead of failing when there are no records.
    #[arg(long, global = true)]
    allow_empty: bool,
}

fn parse_target(text: &str) -> Result<Rational, Error> {
    let bad = || Error::Config(format!("invalid sandwich target `{text}`"));
    if let Some((p, q)) = text.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(qlab_core::proof::ratio(p, q));
    }
    let x: f64 = text.trim().parse().map_err(|_| bad())?;
    rational_from_f64(x).ok_or_else(bad)
}

fn parse_command(name: &str) -> Result<Command, Error> {
    match name {
        "np-scan" => Ok(Command::NpScan),
        "postulates" => Ok(Command::Postulates),
        "phase" => Ok(Command::Phase),
        "signalling" => Ok(Command::Signalling),
        "reconstruct" => Ok(Command::Reconstruct),
        other => Err(Error::Config(format!("`{other}` cannot be swept"))),
    }
}

fn build_config(command: Command, opts: &Opts) -> Result<ExperimentConfig, Error> {
    let defaults = Tolerances::default();
    let tolerances = Tolerances {
        norm: opts.eps_norm.unwrap_or(defaults.norm),
        ortho: opts.eps_ortho.unwrap_or(defaults.ortho),
        rank: opts.eps_rank.unwrap_or(defaults.rank),
    };
    let rules = if opts.rules.is_empty() {
        vec![RuleSpec::Born]
    } else {
        opts.rules.iter().map(|s| s.parse()).collect::<Result<_, _>>()?
    };
    let state = match &opts.state {
        Some(path) => Some(parse_state_file(path, opts.normalize, &tolerances)?),
        None => None,
    };
    Ok(ExperimentConfig {
        command,
        dims: if opts.dims.is_empty() {
            vec![3]
        } else {
            opts.dims.clone()
        },
        rules,
        trials: opts.trials,
        seed: opts.seed,
        tolerances,
        epsilon: opts.epsilon,
        format: opts.format.parse()?,
        exact: opts.exact,
        workers: opts.workers,
        state,
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    let opts = &cli.opts;
    let records: Vec<ReportRecord> = match cli.command {
        Cmd::Sweep { experiment, alphas } => {
            let config = build_config(parse_command(&experiment)?, opts)?;
            sweep(&config, &alphas, &config.dims)?
        }
        other => {
            let command = match other {
                Cmd::NpScan => Command::NpScan,
                Cmd::Postulates => Command::Postulates,
                Cmd::Phase => Command::Phase,
                Cmd::Sandwich { target } => Command::Sandwich {
                    target: parse_target(&target)?,
                },
                Cmd::Finegrain { m, n } => Command::FineGrain { m, n },
                Cmd::Signalling => Command::Signalling,
                Cmd::Reconstruct => Command::Reconstruct,
                Cmd::Sweep { .. } => unreachable!(),
            };
            run_experiment(&build_config(command, opts)?)?
        }
    };
    let format: OutputFormat = opts.format.parse()?;
    let bytes = emit_report(&records, format, opts.allow_empty)?;
    match &opts.out {
        Some(path) => fs::write(path, &bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    let errors = records.iter().filter(|r| r.metric == "error").count();
    if errors > 0 {
        eprintln!("qlab: {} records, {errors} trial errors", records.len());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qlab: {e}");
            ExitCode::from(match e {
                Error::Io(_) => 2,
                _ => 1,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets() {
        assert_eq!(parse_target("7/16").unwrap(), qlab_core::proof::ratio(7, 16));
        assert_eq!(parse_target("0.5").unwrap(), qlab_core::proof::ratio(1, 2));
        for bad in ["x", "1/0", "1/", ""] {
            assert!(parse_target(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
