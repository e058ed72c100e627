use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Parser, Subcommand, ValueEnum};
use contextuality::bootstrap::{bootstrap_noncontextuality, infer_sample_sizes, BootstrapConfig, SampleSizePlan};
use contextuality::bundle::{bundle_dot, BundleError};
use contextuality::cbd::{build_cbd_lp, cyclic2_analyze, dichotomize, reduce_effective_outcomes, CbdError};
use contextuality::report::{analyze, AnalysisOptions};
use contextuality::sheaf::{global_section_problem, SheafError};
use contextuality::{born_model, format_rational, model_to_json, parse_model, parse_scenario, EmpiricalModel};

#[derive(Parser)]
#[command(name = "contextuality", version, about = "Contextuality analyses of empirical models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a model and run every applicable analysis.
    Check {
        /// Model file, or `-` for standard input.
        path: PathBuf,
        #[arg(long)]
        json: bool,
        /// Largest number of LP atoms or enumerated global assignments.
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Print the bundle diagram as Graphviz DOT.
    Bundle {
        path: PathBuf,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Parametric bootstrap of a two-context, two-measurement model.
    Bootstrap {
        path: PathBuf,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        resamples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-context sample sizes, comma separated; inferred from the tables if absent.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<u64>>,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
    },
    /// Build a model from a quantum scenario by the Born rule.
    Quantum { path: PathBuf },
    /// Closed-form contextuality measure of a two-context, two-measurement model.
    Measure {
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print a feasibility LP in text form.
    LpDump {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = LpKind::Cbd)]
        kind: LpKind,
        #[arg(long)]
        cap: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LpKind {
    Cbd,
    Global,
}

/// A resource cap stopped the command.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct CapExceeded(String);

fn read_input(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).context("reading standard input")?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn load(path: &PathBuf) -> Result<EmpiricalModel> {
    let text = read_input(path)?;
    parse_model(&text).with_context(|| format!("loading {}", path.display()))
}

fn options(cap: Option<u64>) -> AnalysisOptions {
    cap.map_or_else(AnalysisOptions::default, AnalysisOptions::with_atom_cap)
}

/// Writes to standard output; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Check { path, json, cap } => {
            let report = analyze(&load(&path)?, &options(cap));
            if json {
                print_json(&report)?;
            } else {
                emit(&format!("{report}\n"))?;
            }
            if report.cap_exceeded() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Bundle { path, cap } => {
            let model = load(&path)?;
            let diagram = match bundle_dot(&model, options(cap).assignment_cap) {
                Err(e @ BundleError::Sheaf(SheafError::TooLarge { .. })) => {
                    return Err(CapExceeded(e.to_string()).into())
                }
                other => other?,
            };
            if let Some(notice) = &diagram.notice {
                eprintln!("note: {notice}");
            }
            emit(&diagram.dot)?;
        }
        Command::Bootstrap { path, resamples, seed, sizes, confidence } => {
            let model = load(&path)?;
            let plan = match sizes {
                Some(sizes) => SampleSizePlan::user_supplied(sizes)?,
                None => infer_sample_sizes(&model)?,
            };
            let config = BootstrapConfig { resamples, seed, confidence };
            print_json(&bootstrap_noncontextuality(&model, &plan, &config)?)?;
        }
        Command::Quantum { path } => {
            let scenario =
                parse_scenario(&read_input(&path)?).with_context(|| format!("loading {}", path.display()))?;
            emit(&(model_to_json(&born_model(&scenario)?) + "\n"))?;
        }
        Command::Measure { path, json } => {
            let r = cyclic2_analyze(&load(&path)?)?;
            if json {
                print_json(&r)?;
            } else {
                let [a, b] = &r.measurements;
                let mut text = String::new();
                for e in &r.expectations {
                    writeln!(
                        text,
                        "{}: <{a}> = {}, <{b}> = {}, <{a} {b}> = {}",
                        e.context,
                        format_rational(&e.a),
                        format_rational(&e.b),
                        format_rational(&e.ab)
                    )?;
                }
                writeln!(text, "delta: {}", format_rational(&r.delta))?;
                writeln!(text, "d: {}", format_rational(&r.d_value))?;
                writeln!(text, "contextual: {}", r.contextual)?;
                writeln!(text, "measure: {}", format_rational(&r.measure))?;
                emit(&text)?;
            }
        }
        Command::LpDump { path, kind, cap } => {
            let model = load(&path)?;
            let opts = options(cap);
            match kind {
                LpKind::Cbd => {
                    let sys = dichotomize(&reduce_effective_outcomes(&model));
                    let lp = match build_cbd_lp(&sys, opts.max_binary_variables) {
                        Err(e @ CbdError::TooManyVariables { .. }) => return Err(CapExceeded(e.to_string()).into()),
                        other => other?,
                    };
                    let mut text = String::new();
                    for (i, v) in sys.variables.iter().enumerate() {
                        writeln!(text, "# x{i}: {}", v.describe())?;
                    }
                    let c = &lp.counts;
                    writeln!(
                        text,
                        "# constraints: {} ({} context, {} normalization, {} coupling)",
                        c.total(),
                        c.context,
                        c.normalization,
                        c.coupling
                    )?;
                    emit(&(text + &lp.problem.dump()))?;
                }
                LpKind::Global => {
                    let (problem, atoms) = match global_section_problem(&model, opts.assignment_cap) {
                        Err(e @ SheafError::TooLarge { .. }) => return Err(CapExceeded(e.to_string()).into()),
                        other => other?,
                    };
                    let names: Vec<&str> = model.measurements.iter().map(|m| m.name.as_str()).collect();
                    let header = format!("# atoms over ({}): {}\n", names.join(", "), atoms.len());
                    emit(&(header + &problem.dump()))?;
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<CapExceeded>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
