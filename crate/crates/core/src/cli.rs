//! Command-line front end. Exit codes: 0 for yes or success, 1 for a no verdict, 2 for
//! parse, validation, resource and other errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::beliefobs::{is_belief_observation, BuildOptions, MemoryDomain};
use crate::chain;
use crate::error::{Error, Result};
use crate::io;
use crate::model::{objective_as_parity, Objective, Pomdp, WinningMode};
use crate::oracle::{oracle_decide, OracleVerdict};
use crate::reduce;
use crate::solve;
use crate::strategy::project_strategy;

#[derive(Parser, Debug)]
#[command(name = "pomdp-finmem", version, about = "Finite-memory qualitative analysis of POMDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Almost,
    Positive,
}

impl From<Mode> for WinningMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Almost => WinningMode::AlmostSure,
            Mode::Positive => WinningMode::Positive,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Domain {
    Local,
    Verbatim,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a finite-memory winning strategy exists and extract one.
    Solve {
        model: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Write the verified witness here on a yes.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Maximum number of states of the belief-observation game.
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
        /// Where memory elements of the game range.
        #[arg(long, value_enum, default_value_t = Domain::Local)]
        domain: Domain,
    },
    /// Evaluate a strategy on the product chain.
    Verify {
        model: PathBuf,
        strategy: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Emit the projected strategy, with its memory elements.
    Project {
        model: PathBuf,
        strategy: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Emit the reduced model for the given mode and its state-origin table.
    Reduce {
        model: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Origin table path. Defaults to `<output>.origin` when an output is given.
        #[arg(long)]
        origin: Option<PathBuf>,
    },
    /// Search strategies with bounded memory by enumeration.
    Oracle {
        model: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 2)]
        memory_bound: u32,
        /// Maximum number of candidates to evaluate.
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Validate a model and print statistics.
    Info { model: PathBuf },
}

/// Parses `args` (including the program name), runs the command, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, column, message } => {
            Error::Parse { line, column, message: format!("{}: {message}", path.display()) }
        }
        other => other,
    }
}

/// Reads and validates a model; warnings go to `err`.
fn load_model(path: &Path, err: &mut dyn Write) -> Result<(Pomdp, Objective)> {
    let (pomdp, obj, warnings) = io::parse_model(&read(path)?).map_err(|e| with_path(path, e))?;
    for w in warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok((pomdp, obj))
}

fn write_or_print(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Solve { model, mode, witness, budget, domain } => {
            let (pomdp, obj) = load_model(&model, err)?;
            let domain = match domain {
                Domain::Local => MemoryDomain::Local,
                Domain::Verbatim => MemoryDomain::Verbatim,
            };
            let d = solve::solve(&pomdp, &obj, mode.into(), BuildOptions { domain, budget })?;
            writeln!(out, "{}", d.summary())?;
            if let (Some(path), Some(w)) = (witness, &d.witness) {
                fs::write(path, io::serialize_strategy(w, &pomdp))?;
            }
            Ok(if d.verdict { 0 } else { 1 })
        }
        Command::Verify { model, strategy, mode } => {
            let (pomdp, obj) = load_model(&model, err)?;
            let sigma = io::parse_strategy(&read(&strategy)?, &pomdp).map_err(|e| with_path(&strategy, e))?;
            let ch = chain::build_product_chain(&pomdp, &sigma)?;
            let mode: WinningMode = mode.into();
            let wins = chain::evaluate_qualitative(&ch, &obj, mode)?;
            writeln!(
                out,
                "verdict={} mode={mode} chain-nodes={} recurrent-classes={}",
                if wins { "yes" } else { "no" },
                ch.nodes().len(),
                ch.bottom_sccs().len()
            )?;
            Ok(if wins { 0 } else { 1 })
        }
        Command::Project { model, strategy, output } => {
            let (pomdp, obj) = load_model(&model, err)?;
            let sigma = io::parse_strategy(&read(&strategy)?, &pomdp).map_err(|e| with_path(&strategy, e))?;
            let col = obj.colors(pomdp.num_states())?;
            let projected = project_strategy(&pomdp, &sigma, &col)?;
            write_or_print(output.as_deref(), &io::serialize_strategy(&projected, &pomdp), out)?;
            Ok(0)
        }
        Command::Reduce { model, mode, output, origin } => {
            let (pomdp, obj) = load_model(&model, err)?;
            let (base, pr) = objective_as_parity(&pomdp, &obj)?;
            let red = match WinningMode::from(mode) {
                WinningMode::Positive => reduce::positive_parity_to_buchi(&base, &pr)?,
                WinningMode::AlmostSure => reduce::almost_parity_to_cobuchi(&base, &pr)?,
            };
            write_or_print(output.as_deref(), &io::serialize_model(&red.pomdp, &red.objective), out)?;
            let origin = origin.or_else(|| output.map(|p| {
                let mut s = p.into_os_string();
                s.push(".origin");
                PathBuf::from(s)
            }));
            if let Some(path) = origin {
                fs::write(path, red.origin_table(&base))?;
            }
            Ok(0)
        }
        Command::Oracle { model, mode, memory_bound, budget, witness } => {
            let (pomdp, obj) = load_model(&model, err)?;
            if memory_bound == 0 {
                return Err(Error::Invalid("memory bound must be at least 1".into()));
            }
            let v = oracle_decide(&pomdp, &obj, mode.into(), memory_bound, budget)?;
            let mode: WinningMode = mode.into();
            match &v {
                OracleVerdict::Yes { witness: w, examined } => {
                    writeln!(out, "verdict=yes mode={mode} k={memory_bound} examined={examined}")?;
                    let text = io::serialize_strategy(w, &pomdp);
                    write_or_print(witness.as_deref(), &text, out)?;
                    Ok(0)
                }
                OracleVerdict::NoUpToK { k, definitive, examined } => {
                    writeln!(out, "verdict=no-up-to-k mode={mode} k={k} definitive={definitive} examined={examined}")?;
                    Ok(1)
                }
                OracleVerdict::Inconclusive { examined } => {
                    writeln!(out, "verdict=inconclusive mode={mode} k={memory_bound} examined={examined}")?;
                    Ok(2)
                }
            }
        }
        Command::Info { model } => {
            let (pomdp, obj) = load_model(&model, err)?;
            let transitions = (0..pomdp.num_states() as u32)
                .flat_map(|s| (0..pomdp.num_actions() as u32).map(move |a| (s, a)))
                .filter(|&(s, a)| pomdp.transition(s, a).is_some())
                .count();
            writeln!(out, "states={}", pomdp.num_states())?;
            writeln!(out, "actions={}", pomdp.num_actions())?;
            writeln!(out, "observations={}", pomdp.num_observations())?;
            writeln!(out, "transitions={transitions}")?;
            writeln!(out, "objective={}", obj.kind_name())?;
            writeln!(out, "perfect-observation={}", pomdp.is_perfect_observation())?;
            writeln!(out, "belief-observation={}", is_belief_observation(&pomdp, usize::MAX))?;
            Ok(0)
        }
    }
}
