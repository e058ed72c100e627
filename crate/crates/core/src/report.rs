//! The full analysis pipeline run by `check`, and its report.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cbd::{self, CbdError, CbdVerdict, Cyclic2Report};
use crate::model::{support_of, validate, EmpiricalModel, ValidationReport};
use crate::rational::format_rational;
use crate::sheaf::{self, GlobalSectionOutcome, LogicalContextualityReport, SheafError, SignallingReport};

/// Outcome of one pipeline stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Stage<T> {
    Ran {
        result: T,
    },
    Skipped {
        reason: String,
    },
    /// The stage would exceed a resource cap.
    CapExceeded {
        detail: String,
    },
    Failed {
        error: String,
    },
}

impl<T> Stage<T> {
    pub fn result(&self) -> Option<&T> {
        match self {
            Stage::Ran { result } => Some(result),
            _ => None,
        }
    }

    pub fn is_cap_exceeded(&self) -> bool {
        matches!(self, Stage::CapExceeded { .. })
    }

    fn skipped(reason: impl Into<String>) -> Self {
        Stage::Skipped { reason: reason.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub label: String,
    pub possibilistic: bool,
    pub validation: ValidationReport,
    pub signalling: SignallingReport,
    pub logical: Stage<LogicalContextualityReport>,
    pub global_section: Stage<GlobalSectionOutcome>,
    pub cyclic2: Stage<Cyclic2Report>,
    pub cbd: Stage<CbdVerdict>,
    pub timings: Vec<StageTiming>,
}

impl AnalysisReport {
    pub fn cap_exceeded(&self) -> bool {
        self.logical.is_cap_exceeded() || self.global_section.is_cap_exceeded() || self.cbd.is_cap_exceeded()
    }
}

/// Resource limits for [`analyze`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisOptions {
    /// Largest global assignment space enumerated by the sheaf stages.
    pub assignment_cap: u64,
    /// Largest number of CbD binary variables (`2^n` atoms).
    pub max_binary_variables: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            assignment_cap: sheaf::DEFAULT_ASSIGNMENT_CAP,
            max_binary_variables: cbd::DEFAULT_MAX_BINARY_VARIABLES,
        }
    }
}

impl AnalysisOptions {
    /// One cap on the number of LP atoms or enumerated tuples for every stage.
    pub fn with_atom_cap(cap: u64) -> Self {
        AnalysisOptions { assignment_cap: cap, max_binary_variables: if cap == 0 { 0 } else { cap.ilog2() as usize } }
    }
}

fn timed<T>(timings: &mut Vec<StageTiming>, stage: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    timings.push(StageTiming { stage: stage.to_string(), millis: start.elapsed().as_secs_f64() * 1e3 });
    out
}

fn sheaf_stage<T>(r: Result<T, SheafError>) -> Stage<T> {
    match r {
        Ok(result) => Stage::Ran { result },
        Err(e @ SheafError::TooLarge { .. }) => Stage::CapExceeded { detail: e.to_string() },
        Err(e) => Stage::Failed { error: e.to_string() },
    }
}

/// Validation, signalling, logical contextuality (when possibilistically
/// non-signalling), global section (probabilistic, non-signalling models),
/// the cyclic rank-2 form (when the shape fits) and the CbD LP (probabilistic
/// models under the cap).
pub fn analyze(model: &EmpiricalModel, options: &AnalysisOptions) -> AnalysisReport {
    let mut timings = Vec::new();
    let validation = timed(&mut timings, "validate", || validate(model));
    let invalid = !validation.is_empty();
    let signalling = timed(&mut timings, "signalling", || sheaf::check_signalling(model));

    let logical = if invalid {
        Stage::skipped("model is invalid")
    } else if signalling.is_possibilistically_signalling {
        Stage::skipped("model is possibilistically signalling")
    } else {
        timed(&mut timings, "logical", || {
            sheaf_stage(sheaf::check_logical_contextuality(&support_of(model), options.assignment_cap))
        })
    };

    let global_section = if invalid {
        Stage::skipped("model is invalid")
    } else if model.possibilistic {
        Stage::skipped("model is possibilistic only")
    } else if signalling.is_signalling {
        Stage::skipped("model is signalling")
    } else {
        timed(&mut timings, "global_section", || {
            sheaf_stage(sheaf::solve_global_section(model, options.assignment_cap))
        })
    };

    let cyclic2 = if invalid {
        Stage::skipped("model is invalid")
    } else if model.possibilistic {
        Stage::skipped("model is possibilistic only")
    } else {
        timed(&mut timings, "cyclic2", || match cbd::cyclic2_analyze(model) {
            Ok(result) => Stage::Ran { result },
            Err(e) => Stage::skipped(e.to_string()),
        })
    };

    let cbd = if invalid {
        Stage::skipped("model is invalid")
    } else if model.possibilistic {
        Stage::skipped("model is possibilistic only")
    } else {
        timed(&mut timings, "cbd", || match cbd::check_cbd_contextuality(model, options.max_binary_variables) {
            Ok(result) => Stage::Ran { result },
            Err(e @ CbdError::TooManyVariables { .. }) => Stage::CapExceeded { detail: e.to_string() },
            Err(e) => Stage::Failed { error: e.to_string() },
        })
    };

    AnalysisReport {
        label: model.label.clone(),
        possibilistic: model.possibilistic,
        validation,
        signalling,
        logical,
        global_section,
        cyclic2,
        cbd,
        timings,
    }
}

fn not_ran<T>(f: &mut fmt::Formatter<'_>, stage: &Stage<T>) -> fmt::Result {
    match stage {
        Stage::Ran { .. } => Ok(()),
        Stage::Skipped { reason } => writeln!(f, "  skipped: {reason}"),
        Stage::CapExceeded { detail } => writeln!(f, "  cap exceeded: {detail}"),
        Stage::Failed { error } => writeln!(f, "  failed: {error}"),
    }
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model: {}{}", self.label, if self.possibilistic { " (possibilistic)" } else { "" })?;
        if self.validation.is_empty() {
            writeln!(f, "validation: ok")?;
        } else {
            writeln!(f, "validation: {} violation(s)", self.validation.violations.len())?;
            for v in &self.validation.violations {
                writeln!(f, "  {v}")?;
            }
        }

        let s = &self.signalling;
        if !self.possibilistic {
            writeln!(f, "signalling: {}", if s.is_signalling { "yes" } else { "no" })?;
            for v in &s.violations {
                writeln!(
                    f,
                    "  P[{}={}] is {} in `{}` but {} in `{}`",
                    v.measurement,
                    v.outcome_label,
                    format_rational(&v.first),
                    v.first_context,
                    format_rational(&v.second),
                    v.second_context
                )?;
            }
        }
        writeln!(f, "possibilistic signalling: {}", if s.is_possibilistically_signalling { "yes" } else { "no" })?;
        for v in &s.possibilistic_violations {
            let (yes, no) = if v.possible_in_first {
                (&v.first_context, &v.second_context)
            } else {
                (&v.second_context, &v.first_context)
            };
            writeln!(f, "  {}={} is possible in `{yes}` but not in `{no}`", v.measurement, v.outcome_label)?;
        }

        writeln!(f, "logical contextuality:")?;
        not_ran(f, &self.logical)?;
        if let Some(r) = self.logical.result() {
            writeln!(
                f,
                "  contextual: {}, strongly: {}, consistent global assignments: {}",
                r.is_logically_contextual,
                r.is_strongly_contextual,
                r.consistent_global_assignments.len()
            )?;
            for s in &r.non_extendable_sections {
                let parts: Vec<String> =
                    s.assignment.iter().map(|e| format!("{}={}", e.measurement, e.outcome_label)).collect();
                writeln!(f, "  not extendable: {} in `{}`", parts.join(", "), s.context)?;
            }
        }

        writeln!(f, "global section:")?;
        not_ran(f, &self.global_section)?;
        match self.global_section.result() {
            Some(GlobalSectionOutcome::Exists { section }) => {
                writeln!(f, "  exists ({} global assignments in support)", section.distribution.len())?
            }
            Some(GlobalSectionOutcome::NoneExists { .. }) => writeln!(f, "  none exists (certificate verified)")?,
            None => {}
        }

        writeln!(f, "cyclic rank-2:")?;
        not_ran(f, &self.cyclic2)?;
        if let Some(r) = self.cyclic2.result() {
            writeln!(
                f,
                "  delta {}, d {}, contextual: {}, measure {}",
                format_rational(&r.delta),
                format_rational(&r.d_value),
                r.contextual,
                format_rational(&r.measure)
            )?;
        }

        writeln!(f, "contextuality-by-default:")?;
        not_ran(f, &self.cbd)?;
        if let Some(v) = self.cbd.result() {
            writeln!(
                f,
                "  contextual: {} ({} binary variables, {} connections, {} atoms, {} constraints)",
                v.contextual, v.variable_count, v.connection_count, v.atom_count, v.constraint_count
            )?;
        }

        let total: f64 = self.timings.iter().map(|t| t.millis).sum();
        write!(f, "time: {total:.1} ms")
    }
}
