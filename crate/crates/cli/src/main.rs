mod style;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use tca::analysis::{analyze, AnalysisOptions, AnalysisReport};
use tca::dot::to_dot;
use tca::flatten::{flatten, prune_unsat, FlattenError, FlattenedAutomaton};
use tca::format::{self, FormatError};
use tca::model::Automaton;
use tca::oracle::{run_suite, GenParams, Suite};
use tca::semantics::{run_trace, StepOutcome};

use style::Style;

const EXIT_OK: u8 = 0;
const EXIT_FINDING: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_INTERNAL: u8 = 3;
const EXIT_VIOLATION: u8 = 4;

/// Timed contract automata: validation, flattening, conflict analysis and
/// simulation.
#[derive(Parser)]
#[command(name = "tca", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an automaton and check that it is well-formed.
    Validate { path: PathBuf },
    /// Write the flattened automaton (persistent norms folded into states).
    Flatten {
        path: PathBuf,
        /// Keep transitions that can never fire.
        #[arg(long)]
        no_prune: bool,
        /// Output file; standard output if absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Look for potential norm conflicts. Exits 0 if there are none, 1 otherwise.
    Analyze {
        path: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
        /// Analyze the flattening before pruning.
        #[arg(long)]
        no_prune: bool,
    },
    /// Run a timed trace. Exits 1 if a conflict is reached, 4 on a violation.
    Simulate {
        automaton: PathBuf,
        trace: PathBuf,
        /// Also print the valuation and the active norms after each event.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Print the automaton, or its flattening, as a Graphviz digraph.
    ExportDot {
        path: PathBuf,
        #[arg(long)]
        flattened: bool,
        /// With --flattened, keep transitions that can never fire.
        #[arg(long)]
        no_prune: bool,
    },
    /// Run a seeded randomized check suite.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        /// Traces per automaton for theorem1 and soundness.
        #[arg(long)]
        traces: Option<usize>,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:\n{source}")]
    Format { path: PathBuf, source: FormatError },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Format { .. } => EXIT_INVALID,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<FlattenError> for CliError {
    fn from(e: FlattenError) -> Self {
        CliError::Internal(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn load(path: &Path) -> Result<Automaton, CliError> {
    format::parse_automaton(&read(path)?).map_err(|source| CliError::Format {
        path: path.to_owned(),
        source,
    })
}

fn flattened(
    m: &Automaton,
    prune: bool,
) -> Result<(FlattenedAutomaton, Option<FlattenedAutomaton>), CliError> {
    let full = flatten(m)?;
    let pruned = if prune {
        Some(prune_unsat(&full)?)
    } else {
        None
    };
    Ok((full, pruned))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn cmd_validate(path: &Path, style: Style) -> Result<u8, CliError> {
    let m = load(path)?;
    println!(
        "{} {}: {} states, {} transitions, {} norms",
        style.good("valid"),
        path.display(),
        m.states().len(),
        m.transitions().len(),
        m.norms().len()
    );
    Ok(EXIT_OK)
}

fn cmd_flatten(path: &Path, no_prune: bool, out: Option<&Path>) -> Result<u8, CliError> {
    let m = load(path)?;
    let (full, pruned) = flattened(&m, !no_prune)?;
    eprintln!(
        "flattened: {} states, {} transitions",
        full.state_count(),
        full.transition_count()
    );
    if let Some(p) = &pruned {
        eprintln!(
            "pruned: {} states, {} transitions",
            p.state_count(),
            p.transition_count()
        );
    }
    let result = pruned.as_ref().unwrap_or(&full);
    emit(out, &format::write_automaton(&result.automaton))?;
    Ok(EXIT_OK)
}

fn print_report(m: &Automaton, report: &AnalysisReport, style: Style) {
    let s = &report.stats;
    println!(
        "flattening: {} states, {} transitions; after pruning: {} states, {} transitions ({:.1} ms)",
        s.flat_states,
        s.flat_transitions,
        s.pruned_states,
        s.pruned_transitions,
        s.elapsed.as_secs_f64() * 1000.0
    );
    if report.is_conflict_free() {
        println!("{}", style.good("ConflictFree"));
        return;
    }
    let findings = report.findings();
    println!(
        "{} ({} finding{})",
        style.bad("PotentialConflicts"),
        findings.len(),
        if findings.len() == 1 { "" } else { "s" }
    );
    for f in findings {
        let (a, b) = f.pair;
        println!(
            "  state {}: {} [{}] vs {} [{}]",
            style.emphasis(&m.state(f.base).id),
            m.norm(a),
            m.norm(a).id,
            m.norm(b),
            m.norm(b).id
        );
        println!("    witness: {}", f.witness);
        println!("    sample:  {}", f.sample.display(m.clocks()));
        let variants: Vec<String> = f.flat_states.iter().map(|s| s.id(m)).collect();
        println!("    flat states: {}", variants.join(", "));
    }
}

fn cmd_analyze(path: &Path, json: bool, no_prune: bool, style: Style) -> Result<u8, CliError> {
    let m = load(path)?;
    let report = analyze(&m, AnalysisOptions { prune: !no_prune })?;
    if json {
        let doc = format::report_to_json(&m, &report);
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).map_err(|e| CliError::Internal(e.to_string()))?
        );
    } else {
        print_report(&m, &report, style);
    }
    Ok(if report.is_conflict_free() {
        EXIT_OK
    } else {
        EXIT_FINDING
    })
}

fn cmd_simulate(
    automaton: &Path,
    trace: &Path,
    verbose: bool,
    style: Style,
) -> Result<u8, CliError> {
    let m = load(automaton)?;
    let ts = format::parse_trace(&read(trace)?).map_err(|source| CliError::Format {
        path: trace.to_owned(),
        source,
    })?;
    let report = run_trace(&m, &ts).map_err(|e| CliError::Internal(e.to_string()))?;
    let conflict = |pair: Option<(usize, usize)>| {
        pair.map(|(a, b)| {
            format!(
                "  {} {} vs {}",
                style.bad("conflict:"),
                m.norm(a).id,
                m.norm(b).id
            )
        })
    };
    let describe = |c: &tca::semantics::Configuration| {
        if verbose {
            let norms: Vec<String> = c
                .active_norms()
                .iter()
                .map(|&n| format!("{} [{}]", m.norm(n), m.norm(n).id))
                .collect();
            format!(
                "{} {} active: {{{}}}",
                m.state(c.state).id,
                c.valuation.display(m.clocks()),
                norms.join(", ")
            )
        } else {
            c.describe(&m)
        }
    };
    println!("start: {}", describe(&report.initial));
    if let Some(line) = conflict(report.initial_conflict) {
        println!("{line}");
    }
    for (i, (outcome, event)) in report.steps.iter().zip(ts.events()).enumerate() {
        let head = format!(
            "{}. {} @ {}",
            i + 1,
            event.label,
            tca::rational::Display(&event.at)
        );
        match outcome {
            StepOutcome::Next {
                configuration,
                conflict: pair,
            } => {
                println!("{head} -> {}", describe(configuration));
                if let Some(line) = conflict(*pair) {
                    println!("{line}");
                }
            }
            StepOutcome::Violated { norms, .. } => {
                let ids: Vec<&str> = norms.iter().map(|&n| m.norm(n).id.as_str()).collect();
                println!("{head} -> {} {}", style.bad("violation of"), ids.join(", "));
            }
        }
    }
    Ok(if report.violation().is_some() {
        println!("{}", style.bad("result: violation"));
        EXIT_VIOLATION
    } else if report.has_conflict() {
        println!("{}", style.bad("result: conflict reached"));
        EXIT_FINDING
    } else {
        println!("{}", style.good("result: no violation, no conflict"));
        EXIT_OK
    })
}

fn cmd_export_dot(path: &Path, flattened_view: bool, no_prune: bool) -> Result<u8, CliError> {
    let m = load(path)?;
    let dot = if flattened_view {
        let (full, pruned) = flattened(&m, !no_prune)?;
        to_dot(&pruned.unwrap_or(full).automaton)
    } else {
        to_dot(&m)
    };
    emit(None, &dot)?;
    Ok(EXIT_OK)
}

fn cmd_fuzz(seed: u64, count: usize, suite: Suite, traces: Option<usize>, style: Style) -> u8 {
    let traces = traces.unwrap_or_else(|| suite.default_traces());
    let report = run_suite(suite, seed, count, traces, &GenParams::default());
    let line = report.to_string();
    if report.ok() && report.passed == count {
        println!("{}", style.good(&line));
        EXIT_OK
    } else {
        println!("{}", style.bad(&line));
        if report.passed + report.failed < count {
            println!(
                "only {} of {count} instances could be generated",
                report.passed + report.failed
            );
        }
        EXIT_FINDING
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let style = Style::from_env();
    let result = match cli.command {
        Command::Validate { path } => cmd_validate(&path, style),
        Command::Flatten {
            path,
            no_prune,
            out,
        } => cmd_flatten(&path, no_prune, out.as_deref()),
        Command::Analyze {
            path,
            json,
            no_prune,
        } => cmd_analyze(&path, json, no_prune, style),
        Command::Simulate {
            automaton,
            trace,
            verbose,
        } => cmd_simulate(&automaton, &trace, verbose, style),
        Command::ExportDot {
            path,
            flattened,
            no_prune,
        } => cmd_export_dot(&path, flattened, no_prune),
        Command::Fuzz {
            seed,
            count,
            suite,
            traces,
        } => Ok(cmd_fuzz(seed, count, suite, traces, style)),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
