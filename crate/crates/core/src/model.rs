//! Measurement scenarios, empirical models and their supports.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{format_rational, Rational};

/// An outcome-index tuple, one index per measurement of a context.
pub type Assignment = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub outcomes: Vec<String>,
}

impl Measurement {
    pub fn new(name: impl Into<String>, outcomes: &[&str]) -> Self {
        Measurement { name: name.into(), outcomes: outcomes.iter().map(|s| s.to_string()).collect() }
    }

    /// Outcomes named by their index.
    pub fn indexed(name: impl Into<String>, count: usize) -> Self {
        Measurement { name: name.into(), outcomes: (0..count).map(|i| i.to_string()).collect() }
    }
}

/// A jointly performed set of measurements and its distribution.
///
/// Tuples missing from `table` have probability zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    pub measurements: Vec<String>,
    pub orientation: String,
    pub table: BTreeMap<Assignment, Rational>,
}

impl Context {
    pub fn new(measurements: &[&str], table: impl IntoIterator<Item = (Assignment, Rational)>) -> Self {
        Context {
            measurements: measurements.iter().map(|s| s.to_string()).collect(),
            orientation: String::new(),
            table: table.into_iter().collect(),
        }
    }

    pub fn with_orientation(mut self, orientation: impl Into<String>) -> Self {
        self.orientation = orientation.into();
        self
    }

    pub fn label(&self) -> String {
        context_label(&self.measurements, &self.orientation)
    }

    pub fn probability(&self, tuple: &[usize]) -> Rational {
        self.table.get(tuple).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn position_of(&self, measurement: &str) -> Option<usize> {
        self.measurements.iter().position(|m| m == measurement)
    }

    /// Tuples with strictly positive probability.
    pub fn support(&self) -> BTreeSet<Assignment> {
        self.table.iter().filter(|(_, p)| p.is_positive()).map(|(t, _)| t.clone()).collect()
    }

    /// Marginal distribution of the measurement at `position`, indexed by outcome.
    pub fn marginal(&self, position: usize, outcome_count: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); outcome_count];
        for (tuple, p) in &self.table {
            if let Some(slot) = tuple.get(position).and_then(|&o| out.get_mut(o)) {
                *slot += p;
            }
        }
        out
    }
}

pub(crate) fn context_label(measurements: &[String], orientation: &str) -> String {
    let base = measurements.join(" ");
    if orientation.is_empty() {
        base
    } else {
        format!("{base} [{orientation}]")
    }
}

/// Measurements plus one joint distribution per context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalModel {
    pub label: String,
    pub measurements: Vec<Measurement>,
    pub contexts: Vec<Context>,
    /// Set when the model only records supports and the probabilities are a
    /// uniform lift over them.
    pub possibilistic: bool,
}

impl EmpiricalModel {
    pub fn new(label: impl Into<String>, measurements: Vec<Measurement>, contexts: Vec<Context>) -> Self {
        EmpiricalModel { label: label.into(), measurements, contexts, possibilistic: false }
    }

    /// Returns the model if it passes [`validate`], the report otherwise.
    pub fn validated(self) -> Result<Self, ValidationReport> {
        let report = validate(&self);
        if report.is_empty() {
            Ok(self)
        } else {
            Err(report)
        }
    }

    pub fn measurement(&self, name: &str) -> Option<&Measurement> {
        self.measurements.iter().find(|m| m.name == name)
    }

    pub fn measurement_index(&self, name: &str) -> Option<usize> {
        self.measurements.iter().position(|m| m.name == name)
    }

    pub fn outcome_count(&self, name: &str) -> usize {
        self.measurement(name).map_or(0, |m| m.outcomes.len())
    }

    pub fn outcome_label(&self, name: &str, outcome: usize) -> String {
        self.measurement(name).and_then(|m| m.outcomes.get(outcome)).cloned().unwrap_or_else(|| outcome.to_string())
    }

    pub fn context_by_label(&self, label: &str) -> Option<&Context> {
        self.contexts.iter().find(|c| c.label() == label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PossibilisticContext {
    pub measurements: Vec<String>,
    pub orientation: String,
    pub support: BTreeSet<Assignment>,
}

impl PossibilisticContext {
    pub fn label(&self) -> String {
        context_label(&self.measurements, &self.orientation)
    }

    pub fn position_of(&self, measurement: &str) -> Option<usize> {
        self.measurements.iter().position(|m| m == measurement)
    }

    /// Outcomes of the measurement at `position` that occur in the support.
    pub fn marginal_support(&self, position: usize) -> BTreeSet<usize> {
        self.support.iter().map(|t| t[position]).collect()
    }
}

/// Support-level view of an empirical model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PossibilisticModel {
    pub label: String,
    pub measurements: Vec<Measurement>,
    pub contexts: Vec<PossibilisticContext>,
}

impl PossibilisticModel {
    pub fn measurement(&self, name: &str) -> Option<&Measurement> {
        self.measurements.iter().find(|m| m.name == name)
    }

    pub fn measurement_index(&self, name: &str) -> Option<usize> {
        self.measurements.iter().position(|m| m.name == name)
    }

    pub fn outcome_label(&self, name: &str, outcome: usize) -> String {
        self.measurement(name).and_then(|m| m.outcomes.get(outcome)).cloned().unwrap_or_else(|| outcome.to_string())
    }

    /// Uniform distribution over each support.
    pub fn lift_uniform(&self) -> EmpiricalModel {
        let contexts = self
            .contexts
            .iter()
            .map(|c| {
                let weight = Rational::new(1.into(), c.support.len().into());
                Context {
                    measurements: c.measurements.clone(),
                    orientation: c.orientation.clone(),
                    table: c.support.iter().map(|t| (t.clone(), weight.clone())).collect(),
                }
            })
            .collect();
        EmpiricalModel {
            label: self.label.clone(),
            measurements: self.measurements.clone(),
            contexts,
            possibilistic: true,
        }
    }
}

/// Per-context supports: the tuples with probability > 0.
pub fn support_of(model: &EmpiricalModel) -> PossibilisticModel {
    PossibilisticModel {
        label: model.label.clone(),
        measurements: model.measurements.clone(),
        contexts: model
            .contexts
            .iter()
            .map(|c| PossibilisticContext {
                measurements: c.measurements.clone(),
                orientation: c.orientation.clone(),
                support: c.support(),
            })
            .collect(),
    }
}

/// One broken invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NoContexts,
    EmptyOutcomes { measurement: String },
    DuplicateOutcome { measurement: String, outcome: String },
    DuplicateMeasurement { measurement: String },
    EmptyContext { context: String },
    UnknownMeasurement { context: String, measurement: String },
    RepeatedMeasurement { context: String, measurement: String },
    DuplicateContext { context: String },
    ArityMismatch { context: String, tuple: Assignment },
    OutcomeOutOfRange { context: String, tuple: Assignment, position: usize },
    NegativeProbability { context: String, tuple: Assignment, probability: String },
    NotNormalized { context: String, sum: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoContexts => write!(f, "model has no contexts"),
            Violation::EmptyOutcomes { measurement } => {
                write!(f, "measurement `{measurement}` has no outcomes")
            }
            Violation::DuplicateOutcome { measurement, outcome } => {
                write!(f, "measurement `{measurement}` repeats outcome label `{outcome}`")
            }
            Violation::DuplicateMeasurement { measurement } => {
                write!(f, "measurement name `{measurement}` is used twice")
            }
            Violation::EmptyContext { context } => write!(f, "context `{context}` has no measurements"),
            Violation::UnknownMeasurement { context, measurement } => {
                write!(f, "context `{context}` references unknown measurement `{measurement}`")
            }
            Violation::RepeatedMeasurement { context, measurement } => {
                write!(f, "context `{context}` lists `{measurement}` more than once")
            }
            Violation::DuplicateContext { context } => write!(f, "context `{context}` is declared twice"),
            Violation::ArityMismatch { context, tuple } => {
                write!(f, "context `{context}`: tuple {tuple:?} has the wrong arity")
            }
            Violation::OutcomeOutOfRange { context, tuple, position } => {
                write!(f, "context `{context}`: tuple {tuple:?} has an out-of-range outcome at position {position}")
            }
            Violation::NegativeProbability { context, tuple, probability } => {
                write!(f, "context `{context}`: tuple {tuple:?} has negative probability {probability}")
            }
            Violation::NotNormalized { context, sum } => {
                write!(f, "context `{context}`: distribution does not sum to 1 (sum is {sum})")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Lists every violated invariant; an empty report means the model is valid.
pub fn validate(model: &EmpiricalModel) -> ValidationReport {
    let mut violations = Vec::new();

    let mut names = HashSet::new();
    for m in &model.measurements {
        if !names.insert(m.name.as_str()) {
            violations.push(Violation::DuplicateMeasurement { measurement: m.name.clone() });
        }
        if m.outcomes.is_empty() {
            violations.push(Violation::EmptyOutcomes { measurement: m.name.clone() });
        }
        let mut labels = HashSet::new();
        for o in &m.outcomes {
            if !labels.insert(o.as_str()) {
                violations.push(Violation::DuplicateOutcome { measurement: m.name.clone(), outcome: o.clone() });
            }
        }
    }

    if model.contexts.is_empty() {
        violations.push(Violation::NoContexts);
    }

    let mut seen_contexts = HashSet::new();
    for ctx in &model.contexts {
        let label = ctx.label();
        if ctx.measurements.is_empty() {
            violations.push(Violation::EmptyContext { context: label.clone() });
        }
        let mut in_ctx = HashSet::new();
        let mut ranges = Vec::with_capacity(ctx.measurements.len());
        for name in &ctx.measurements {
            if !in_ctx.insert(name.as_str()) {
                violations.push(Violation::RepeatedMeasurement { context: label.clone(), measurement: name.clone() });
            }
            match model.measurement(name) {
                Some(m) => ranges.push(Some(m.outcomes.len())),
                None => {
                    violations
                        .push(Violation::UnknownMeasurement { context: label.clone(), measurement: name.clone() });
                    ranges.push(None);
                }
            }
        }
        let mut key: Vec<&str> = ctx.measurements.iter().map(String::as_str).collect();
        key.sort_unstable();
        if !seen_contexts.insert((key, ctx.orientation.as_str())) {
            violations.push(Violation::DuplicateContext { context: label.clone() });
        }

        let mut sum = Rational::zero();
        for (tuple, p) in &ctx.table {
            if tuple.len() != ctx.measurements.len() {
                violations.push(Violation::ArityMismatch { context: label.clone(), tuple: tuple.clone() });
            } else if let Some(position) = tuple.iter().zip(&ranges).position(|(&o, r)| matches!(r, Some(n) if o >= *n))
            {
                violations.push(Violation::OutcomeOutOfRange {
                    context: label.clone(),
                    tuple: tuple.clone(),
                    position,
                });
            }
            if p.is_negative() {
                violations.push(Violation::NegativeProbability {
                    context: label.clone(),
                    tuple: tuple.clone(),
                    probability: format_rational(p),
                });
            }
            sum += p;
        }
        // A negative entry already explains a bad sum.
        let has_negative = ctx.table.values().any(|p| p.is_negative());
        if !sum.is_one() && !has_negative {
            violations.push(Violation::NotNormalized { context: label, sum: format_rational(&sum) });
        }
    }

    ValidationReport { violations }
}
