//! Contextuality-by-Default.
//!
//! Each measurement in each context becomes its own random variable. Variables
//! with more than two effective outcomes are replaced by their
//! singleton-versus-rest dichotomizations, and the system is non-contextual
//! iff some joint distribution of all binary variables reproduces every
//! context's table while every pair of same-content variables agrees on each
//! value with the maximal possible probability (the smaller of the two
//! marginals). That is a linear feasibility problem over `2^n` atoms.
//!
//! Systems made of two binary measurements observed in two contexts
//! (cyclic rank 2) also have a closed form, [`cyclic2_analyze`].

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::lp::{self, FeasibilityResult, LinearFeasibilityProblem, LpError};
use crate::model::{Context, EmpiricalModel, Measurement};
use crate::rational::{integer, ratio, Rational};

/// Default cap on the number of binary variables (`2^20` atoms).
pub const DEFAULT_MAX_BINARY_VARIABLES: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum CbdError {
    #[error("not a cyclic rank-2 system: {0}")]
    Shape(String),
    #[error("{count} binary variables exceed the cap of {cap}")]
    TooManyVariables { count: usize, cap: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Drops outcomes that have probability zero in every context containing
/// their measurement and re-indexes the rest in their original order.
pub fn reduce_effective_outcomes(model: &EmpiricalModel) -> EmpiricalModel {
    let keep: Vec<Vec<bool>> = model
        .measurements
        .iter()
        .map(|m| {
            let mut used = vec![false; m.outcomes.len()];
            let mut in_any = false;
            for ctx in &model.contexts {
                if let Some(pos) = ctx.position_of(&m.name) {
                    in_any = true;
                    for (o, p) in ctx.marginal(pos, m.outcomes.len()).iter().enumerate() {
                        used[o] |= p.is_positive();
                    }
                }
            }
            if in_any {
                used
            } else {
                vec![true; m.outcomes.len()]
            }
        })
        .collect();

    let remap: Vec<Vec<Option<usize>>> = keep
        .iter()
        .map(|k| {
            let mut next = 0;
            k.iter()
                .map(|&kept| {
                    kept.then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect()
        })
        .collect();

    let measurements = model
        .measurements
        .iter()
        .zip(&keep)
        .map(|(m, k)| Measurement {
            name: m.name.clone(),
            outcomes: m.outcomes.iter().zip(k).filter(|(_, &kept)| kept).map(|(o, _)| o.clone()).collect(),
        })
        .collect();

    let contexts = model
        .contexts
        .iter()
        .map(|ctx| {
            let maps: Vec<&Vec<Option<usize>>> = ctx
                .measurements
                .iter()
                .map(|name| &remap[model.measurement_index(name).expect("validated model")])
                .collect();
            let table = ctx
                .table
                .iter()
                .filter(|(_, p)| p.is_positive())
                .map(|(tuple, p)| {
                    let t = tuple
                        .iter()
                        .zip(&maps)
                        .map(|(&o, map)| map[o].expect("positive entry uses a kept outcome"))
                        .collect();
                    (t, p.clone())
                })
                .collect();
            Context { measurements: ctx.measurements.clone(), orientation: ctx.orientation.clone(), table }
        })
        .collect();

    EmpiricalModel { label: model.label.clone(), measurements, contexts, possibilistic: model.possibilistic }
}

/// Indicator of `measurement ∈ outcomes` as recorded in one context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryVariable {
    pub measurement: String,
    /// Outcome indices mapped to 1 (a single outcome).
    pub outcomes: Vec<usize>,
    pub outcome_labels: Vec<String>,
    pub context: usize,
    pub context_label: String,
    /// Position of the measurement within its context.
    pub position: usize,
}

impl BinaryVariable {
    pub fn describe(&self) -> String {
        format!("{}={} @ {}", self.measurement, self.outcome_labels.join("|"), self.context_label)
    }

    fn indicates(&self, tuple: &[usize]) -> bool {
        self.outcomes.contains(&tuple[self.position])
    }
}

/// Joint distribution of one context's binary variables. Bit `i` of a
/// pattern is the value of `variables[i]`.
#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextTable {
    pub context: usize,
    pub label: String,
    pub variables: Vec<usize>,
    #[serde_as(as = "BTreeMap<DisplayFromStr, DisplayFromStr>")]
    pub table: BTreeMap<u64, Rational>,
}

/// Two variables with the same content in different contexts, and the
/// maximal probabilities with which they can agree on each value.
#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connection {
    pub first: usize,
    pub second: usize,
    #[serde_as(as = "DisplayFromStr")]
    pub bound_one: Rational,
    #[serde_as(as = "DisplayFromStr")]
    pub bound_zero: Rational,
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DichotomizedSystem {
    pub variables: Vec<BinaryVariable>,
    pub context_tables: Vec<ContextTable>,
    pub connections: Vec<Connection>,
    /// `P(variable = 1)` in its own context.
    #[serde_as(as = "Vec<DisplayFromStr>")]
    pub marginals: Vec<Rational>,
}

/// Singleton-versus-rest dichotomizations: none for a one-outcome
/// measurement, the indicator of outcome 0 for a binary one, one indicator
/// per outcome otherwise. Expects an effective-outcome reduced model.
pub fn dichotomize(model: &EmpiricalModel) -> DichotomizedSystem {
    let mut variables = Vec::new();
    let mut context_tables = Vec::new();
    let mut marginals = Vec::new();

    for (ci, ctx) in model.contexts.iter().enumerate() {
        let label = ctx.label();
        let first = variables.len();
        for (pos, name) in ctx.measurements.iter().enumerate() {
            let measurement = model.measurement(name).expect("validated model");
            let subsets: Vec<usize> = match measurement.outcomes.len() {
                0 | 1 => vec![],
                2 => vec![0],
                k => (0..k).collect(),
            };
            for o in subsets {
                variables.push(BinaryVariable {
                    measurement: name.clone(),
                    outcomes: vec![o],
                    outcome_labels: vec![measurement.outcomes[o].clone()],
                    context: ci,
                    context_label: label.clone(),
                    position: pos,
                });
            }
        }
        let ids: Vec<usize> = (first..variables.len()).collect();
        let mut table: BTreeMap<u64, Rational> = BTreeMap::new();
        let mut ones = vec![Rational::zero(); ids.len()];
        for (tuple, p) in &ctx.table {
            if p.is_zero() {
                continue;
            }
            let mut pattern = 0u64;
            for (bit, &v) in ids.iter().enumerate() {
                if variables[v].indicates(tuple) {
                    pattern |= 1 << bit;
                    ones[bit] += p;
                }
            }
            *table.entry(pattern).or_insert_with(Rational::zero) += p;
        }
        marginals.extend(ones);
        context_tables.push(ContextTable { context: ci, label, variables: ids, table });
    }

    let mut connections = Vec::new();
    for a in 0..variables.len() {
        for b in a + 1..variables.len() {
            let (va, vb) = (&variables[a], &variables[b]);
            if va.context != vb.context && va.measurement == vb.measurement && va.outcomes == vb.outcomes {
                let (pa, pb) = (&marginals[a], &marginals[b]);
                connections.push(Connection {
                    first: a,
                    second: b,
                    bound_one: pa.min(pb).clone(),
                    bound_zero: (Rational::one() - pa).min(Rational::one() - pb),
                });
            }
        }
    }

    DichotomizedSystem { variables, context_tables, connections, marginals }
}

/// Row bookkeeping for a CbD feasibility problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintCounts {
    pub context: usize,
    pub normalization: usize,
    pub coupling: usize,
}

impl ConstraintCounts {
    pub fn total(&self) -> usize {
        self.context + self.normalization + self.coupling
    }
}

#[derive(Debug, Clone)]
pub struct CbdProblem {
    pub problem: LinearFeasibilityProblem,
    pub counts: ConstraintCounts,
}

/// One variable per atom of the global joint (bit `v` of the atom index is
/// binary variable `v`). Rows: every pattern of every context table,
/// normalisation, then `P(both 1)` and `P(both 0)` of each connection fixed
/// at their bounds.
pub fn build_cbd_lp(sys: &DichotomizedSystem, max_variables: usize) -> Result<CbdProblem, CbdError> {
    let n = sys.variables.len();
    if n > max_variables || n >= usize::BITS as usize {
        return Err(CbdError::TooManyVariables { count: n, cap: max_variables });
    }
    let atoms = 1usize << n;
    let one = Rational::one();
    let mut problem = LinearFeasibilityProblem::new(atoms);
    let mut counts = ConstraintCounts { context: 0, normalization: 0, coupling: 0 };

    for ct in &sys.context_tables {
        let k = ct.variables.len();
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); 1 << k];
        for atom in 0..atoms {
            let pattern =
                ct.variables.iter().enumerate().fold(0usize, |acc, (bit, &v)| acc | (((atom >> v) & 1) << bit));
            groups[pattern].push(atom);
        }
        for (pattern, members) in groups.into_iter().enumerate() {
            let rhs = ct.table.get(&(pattern as u64)).cloned().unwrap_or_else(Rational::zero);
            problem.add_row(members.into_iter().map(|a| (a, one.clone())), rhs)?;
            counts.context += 1;
        }
    }

    problem.add_row((0..atoms).map(|a| (a, one.clone())), one.clone())?;
    counts.normalization += 1;

    for c in &sys.connections {
        for (value, bound) in [(1usize, &c.bound_one), (0usize, &c.bound_zero)] {
            let members = (0..atoms).filter(|a| (a >> c.first) & 1 == value && (a >> c.second) & 1 == value);
            problem.add_row(members.map(|a| (a, one.clone())), bound.clone())?;
            counts.coupling += 1;
        }
    }

    Ok(CbdProblem { problem, counts })
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedAtom {
    /// Values of the binary variables in order, as `0`/`1` characters.
    pub atom: String,
    #[serde_as(as = "DisplayFromStr")]
    pub probability: Rational,
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CbdVerdict {
    pub contextual: bool,
    /// Nonzero atoms of a global joint meeting every constraint.
    pub witness: Option<Vec<WeightedAtom>>,
    #[serde_as(as = "Option<Vec<DisplayFromStr>>")]
    pub certificate: Option<Vec<Rational>>,
    pub constraint_count: usize,
    pub constraints: ConstraintCounts,
    pub variable_count: usize,
    pub atom_count: usize,
    pub connection_count: usize,
    pub variables: Vec<String>,
}

/// Reduces, dichotomizes and solves the CbD feasibility problem.
pub fn check_cbd_contextuality(model: &EmpiricalModel, max_variables: usize) -> Result<CbdVerdict, CbdError> {
    let sys = dichotomize(&reduce_effective_outcomes(model));
    let CbdProblem { problem, counts } = build_cbd_lp(&sys, max_variables)?;
    let n = sys.variables.len();
    let result = lp::solve_feasibility(&problem)?;
    let (witness, certificate) = match result {
        FeasibilityResult::Feasible { witness } => {
            let atoms = witness
                .into_iter()
                .enumerate()
                .filter(|(_, p)| !p.is_zero())
                .map(|(a, probability)| WeightedAtom {
                    atom: (0..n).map(|v| if (a >> v) & 1 == 1 { '1' } else { '0' }).collect(),
                    probability,
                })
                .collect();
            (Some(atoms), None)
        }
        FeasibilityResult::Infeasible { certificate } => (None, Some(certificate)),
    };
    Ok(CbdVerdict {
        contextual: certificate.is_some(),
        witness,
        certificate,
        constraint_count: counts.total(),
        constraints: counts,
        variable_count: n,
        atom_count: problem.variable_count(),
        connection_count: sys.connections.len(),
        variables: sys.variables.iter().map(BinaryVariable::describe).collect(),
    })
}

/// `⟨A⟩`, `⟨B⟩`, `⟨AB⟩` of one context, outcome 0 ↦ +1 and outcome 1 ↦ −1.
#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextExpectations {
    pub context: String,
    #[serde_as(as = "DisplayFromStr")]
    pub a: Rational,
    #[serde_as(as = "DisplayFromStr")]
    pub b: Rational,
    #[serde_as(as = "DisplayFromStr")]
    pub ab: Rational,
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cyclic2Report {
    /// `[A, B]`, in the order of the first context.
    pub measurements: [String; 2],
    pub expectations: [ContextExpectations; 2],
    /// `|⟨A⟩₁ − ⟨A⟩₂| + |⟨B⟩₁ − ⟨B⟩₂|`
    #[serde_as(as = "DisplayFromStr")]
    pub delta: Rational,
    /// `|⟨AB⟩₁ − ⟨AB⟩₂| − delta`
    #[serde_as(as = "DisplayFromStr")]
    pub d_value: Rational,
    pub contextual: bool,
    /// `max(0, d_value) / 4`
    #[serde_as(as = "DisplayFromStr")]
    pub measure: Rational,
}

fn spin(outcome: usize) -> Rational {
    if outcome == 0 {
        integer(1)
    } else {
        integer(-1)
    }
}

/// Closed-form CbD criterion for two binary measurements in two contexts.
pub fn cyclic2_analyze(model: &EmpiricalModel) -> Result<Cyclic2Report, CbdError> {
    let shape = |msg: &str| CbdError::Shape(msg.to_string());
    if model.contexts.len() != 2 {
        return Err(CbdError::Shape(format!("expected 2 contexts, found {}", model.contexts.len())));
    }
    let first = &model.contexts[0];
    if first.measurements.len() != 2 {
        return Err(shape("contexts must contain exactly two measurements"));
    }
    let names = [first.measurements[0].clone(), first.measurements[1].clone()];
    for name in &names {
        match model.measurement(name) {
            Some(m) if m.outcomes.len() == 2 => {}
            _ => return Err(CbdError::Shape(format!("measurement `{name}` is not binary"))),
        }
    }

    let mut expectations = Vec::with_capacity(2);
    for ctx in &model.contexts {
        if ctx.measurements.len() != 2 {
            return Err(shape("contexts must contain exactly two measurements"));
        }
        let (Some(pa), Some(pb)) = (ctx.position_of(&names[0]), ctx.position_of(&names[1])) else {
            return Err(shape("both contexts must contain the same two measurements"));
        };
        let (mut a, mut b, mut ab) = (Rational::zero(), Rational::zero(), Rational::zero());
        for (tuple, p) in &ctx.table {
            let (sa, sb) = (spin(tuple[pa]), spin(tuple[pb]));
            a += p * &sa;
            b += p * &sb;
            ab += p * sa * sb;
        }
        expectations.push(ContextExpectations { context: ctx.label(), a, b, ab });
    }
    let [e1, e2]: [ContextExpectations; 2] = expectations.try_into().expect("two contexts");

    let delta = (&e1.a - &e2.a).abs() + (&e1.b - &e2.b).abs();
    let d_value = (&e1.ab - &e2.ab).abs() - &delta;
    let contextual = d_value.is_positive();
    let measure = if contextual { &d_value * ratio(1, 4) } else { Rational::zero() };
    Ok(Cyclic2Report { measurements: names, expectations: [e1, e2], delta, d_value, contextual, measure })
}
