//! Sheaf-theoretic analyses: non-signalling, logical and strong
//! contextuality, and global sections of non-signalling models.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::lp::{self, FeasibilityResult, LinearFeasibilityProblem, LpError};
use crate::model::{support_of, Assignment, EmpiricalModel, PossibilisticModel};
use crate::rational::Rational;

/// Default cap on the size of the global assignment space.
pub const DEFAULT_ASSIGNMENT_CAP: u64 = 1 << 24;

#[derive(Debug, thiserror::Error)]
pub enum SheafError {
    #[error("model is signalling; sheaf-theoretic contextuality is undefined for it")]
    Signalling(Box<SignallingReport>),
    #[error("global assignment space has {size} tuples, above the cap of {cap}")]
    TooLarge { size: u128, cap: u64 },
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("global section does not reproduce context `{0}`")]
    Inconsistent(String),
}

/// A shared measurement whose marginal differs between two contexts.
#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginalMismatch {
    pub measurement: String,
    pub first_context: String,
    pub second_context: String,
    pub outcome: usize,
    pub outcome_label: String,
    #[serde_as(as = "DisplayFromStr")]
    pub first: Rational,
    #[serde_as(as = "DisplayFromStr")]
    pub second: Rational,
}

/// A shared measurement outcome possible in one context but not the other.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportMismatch {
    pub measurement: String,
    pub first_context: String,
    pub second_context: String,
    pub outcome: usize,
    pub outcome_label: String,
    pub possible_in_first: bool,
    pub possible_in_second: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignallingReport {
    pub violations: Vec<MarginalMismatch>,
    pub is_signalling: bool,
    pub possibilistic_violations: Vec<SupportMismatch>,
    pub is_possibilistically_signalling: bool,
}

/// Compares marginals of every shared measurement across every pair of
/// contexts, exactly, and the marginal supports likewise.
pub fn check_signalling(model: &EmpiricalModel) -> SignallingReport {
    let mut violations = Vec::new();
    for m in &model.measurements {
        let holders: Vec<(usize, usize)> = model
            .contexts
            .iter()
            .enumerate()
            .filter_map(|(ci, c)| c.position_of(&m.name).map(|pos| (ci, pos)))
            .collect();
        let marginals: Vec<Vec<Rational>> =
            holders.iter().map(|&(ci, pos)| model.contexts[ci].marginal(pos, m.outcomes.len())).collect();
        for a in 0..holders.len() {
            for b in a + 1..holders.len() {
                for (o, (pa, pb)) in marginals[a].iter().zip(&marginals[b]).enumerate() {
                    if pa != pb {
                        violations.push(MarginalMismatch {
                            measurement: m.name.clone(),
                            first_context: model.contexts[holders[a].0].label(),
                            second_context: model.contexts[holders[b].0].label(),
                            outcome: o,
                            outcome_label: m.outcomes[o].clone(),
                            first: pa.clone(),
                            second: pb.clone(),
                        });
                    }
                }
            }
        }
    }
    let possibilistic_violations = possibilistic_signalling(&support_of(model));
    SignallingReport {
        is_signalling: !violations.is_empty(),
        violations,
        is_possibilistically_signalling: !possibilistic_violations.is_empty(),
        possibilistic_violations,
    }
}

/// Support-level check only; the probabilistic fields stay empty.
pub fn check_possibilistic_signalling(poss: &PossibilisticModel) -> SignallingReport {
    let possibilistic_violations = possibilistic_signalling(poss);
    SignallingReport {
        violations: Vec::new(),
        is_signalling: false,
        is_possibilistically_signalling: !possibilistic_violations.is_empty(),
        possibilistic_violations,
    }
}

fn possibilistic_signalling(poss: &PossibilisticModel) -> Vec<SupportMismatch> {
    let mut out = Vec::new();
    for m in &poss.measurements {
        let holders: Vec<(usize, BTreeSet<usize>)> = poss
            .contexts
            .iter()
            .enumerate()
            .filter_map(|(ci, c)| c.position_of(&m.name).map(|pos| (ci, c.marginal_support(pos))))
            .collect();
        for a in 0..holders.len() {
            for b in a + 1..holders.len() {
                for o in 0..m.outcomes.len() {
                    let (in_a, in_b) = (holders[a].1.contains(&o), holders[b].1.contains(&o));
                    if in_a != in_b {
                        out.push(SupportMismatch {
                            measurement: m.name.clone(),
                            first_context: poss.contexts[holders[a].0].label(),
                            second_context: poss.contexts[holders[b].0].label(),
                            outcome: o,
                            outcome_label: m.outcomes[o].clone(),
                            possible_in_first: in_a,
                            possible_in_second: in_b,
                        });
                    }
                }
            }
        }
    }
    out
}

fn product_size(outcome_counts: impl IntoIterator<Item = usize>) -> u128 {
    outcome_counts.into_iter().fold(1u128, |acc, k| acc.saturating_mul(k as u128))
}

fn check_cap(size: u128, cap: u64) -> Result<(), SheafError> {
    if size > cap as u128 {
        Err(SheafError::TooLarge { size, cap })
    } else {
        Ok(())
    }
}

/// Positions of each context's measurements in scenario order.
fn context_positions<'a, I>(scenario: &[crate::model::Measurement], contexts: I) -> Vec<Vec<usize>>
where
    I: IntoIterator<Item = &'a Vec<String>>,
{
    let index: HashMap<&str, usize> = scenario.iter().enumerate().map(|(i, m)| (m.name.as_str(), i)).collect();
    contexts.into_iter().map(|names| names.iter().filter_map(|n| index.get(n.as_str()).copied()).collect()).collect()
}

fn restrict(global: &[usize], positions: &[usize]) -> Assignment {
    positions.iter().map(|&p| global[p]).collect()
}

/// Every full assignment (indexed in scenario order) whose restriction to
/// each context lies in that context's support.
pub fn global_assignments(poss: &PossibilisticModel, cap: u64) -> Result<BTreeSet<Assignment>, SheafError> {
    check_cap(product_size(poss.measurements.iter().map(|m| m.outcomes.len())), cap)?;

    let positions = context_positions(&poss.measurements, poss.contexts.iter().map(|c| &c.measurements));
    let n = poss.measurements.len();
    // Contexts become checkable once their last measurement is assigned.
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ci, pos) in positions.iter().enumerate() {
        if let Some(&last) = pos.iter().max() {
            ready[last].push(ci);
        }
    }

    struct Walk<'a> {
        poss: &'a PossibilisticModel,
        positions: &'a [Vec<usize>],
        ready: &'a [Vec<usize>],
        current: Vec<usize>,
        found: BTreeSet<Assignment>,
    }

    impl Walk<'_> {
        fn descend(&mut self, depth: usize) {
            if depth == self.current.len() {
                self.found.insert(self.current.clone());
                return;
            }
            for o in 0..self.poss.measurements[depth].outcomes.len() {
                self.current[depth] = o;
                let ok = self.ready[depth].iter().all(|&ci| {
                    let local = restrict(&self.current, &self.positions[ci]);
                    self.poss.contexts[ci].support.contains(&local)
                });
                if ok {
                    self.descend(depth + 1);
                }
            }
        }
    }

    let mut walk = Walk { poss, positions: &positions, ready: &ready, current: vec![0; n], found: BTreeSet::new() };
    walk.descend(0);
    Ok(walk.found)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionEntry {
    pub measurement: String,
    pub outcome: usize,
    pub outcome_label: String,
}

/// A possible joint outcome of one context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalSection {
    pub context: String,
    pub context_index: usize,
    pub assignment: Vec<SectionEntry>,
}

impl LocalSection {
    pub fn assigns(&self, measurement: &str, outcome: usize) -> bool {
        self.assignment.iter().any(|e| e.measurement == measurement && e.outcome == outcome)
    }

    pub fn tuple(&self) -> Assignment {
        self.assignment.iter().map(|e| e.outcome).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalContextualityReport {
    /// Scenario order used by the global assignment tuples.
    pub measurements: Vec<String>,
    pub consistent_global_assignments: Vec<Assignment>,
    /// Possible local sections that no consistent global assignment restricts to.
    pub non_extendable_sections: Vec<LocalSection>,
    pub is_logically_contextual: bool,
    pub is_strongly_contextual: bool,
}

/// Logical (possibilistic) and strong contextuality of a possibilistically
/// non-signalling model.
pub fn check_logical_contextuality(
    poss: &PossibilisticModel,
    cap: u64,
) -> Result<LogicalContextualityReport, SheafError> {
    let signalling = check_possibilistic_signalling(poss);
    if signalling.is_possibilistically_signalling {
        return Err(SheafError::Signalling(Box::new(signalling)));
    }
    let globals = global_assignments(poss, cap)?;
    let positions = context_positions(&poss.measurements, poss.contexts.iter().map(|c| &c.measurements));

    let mut non_extendable_sections = Vec::new();
    for (ci, ctx) in poss.contexts.iter().enumerate() {
        let reached: HashSet<Assignment> = globals.iter().map(|g| restrict(g, &positions[ci])).collect();
        for tuple in &ctx.support {
            if reached.contains(tuple) {
                continue;
            }
            non_extendable_sections.push(LocalSection {
                context: ctx.label(),
                context_index: ci,
                assignment: ctx
                    .measurements
                    .iter()
                    .zip(tuple)
                    .map(|(m, &o)| SectionEntry {
                        measurement: m.clone(),
                        outcome: o,
                        outcome_label: poss.outcome_label(m, o),
                    })
                    .collect(),
            });
        }
    }

    Ok(LogicalContextualityReport {
        measurements: poss.measurements.iter().map(|m| m.name.clone()).collect(),
        is_logically_contextual: !non_extendable_sections.is_empty(),
        is_strongly_contextual: globals.is_empty(),
        consistent_global_assignments: globals.into_iter().collect(),
        non_extendable_sections,
    })
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedAssignment {
    pub tuple: Assignment,
    #[serde_as(as = "DisplayFromStr")]
    pub probability: Rational,
}

/// A distribution on global assignments whose marginals match every context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalSection {
    pub measurements: Vec<String>,
    /// Nonzero entries only, sorted by tuple.
    pub distribution: Vec<WeightedAssignment>,
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GlobalSectionOutcome {
    Exists {
        section: GlobalSection,
    },
    NoneExists {
        /// Farkas multipliers for the rows of [`global_section_problem`].
        #[serde_as(as = "Vec<DisplayFromStr>")]
        certificate: Vec<Rational>,
    },
}

/// The feasibility problem behind [`solve_global_section`]: one variable per
/// global assignment (returned in variable order), one row per context tuple,
/// plus normalisation.
pub fn global_section_problem(
    model: &EmpiricalModel,
    cap: u64,
) -> Result<(LinearFeasibilityProblem, Vec<Assignment>), SheafError> {
    let radices: Vec<usize> = model.measurements.iter().map(|m| m.outcomes.len()).collect();
    check_cap(product_size(radices.iter().copied()), cap)?;

    let atoms = mixed_radix(&radices);
    let positions = context_positions(&model.measurements, model.contexts.iter().map(|c| &c.measurements));
    let mut problem = LinearFeasibilityProblem::new(atoms.len());
    for (ci, ctx) in model.contexts.iter().enumerate() {
        let local_radices: Vec<usize> = positions[ci].iter().map(|&p| radices[p]).collect();
        let mut groups: HashMap<Assignment, Vec<usize>> = HashMap::new();
        for (a, atom) in atoms.iter().enumerate() {
            groups.entry(restrict(atom, &positions[ci])).or_default().push(a);
        }
        for local in mixed_radix(&local_radices) {
            let members = groups.remove(&local).unwrap_or_default();
            problem
                .add_row(members.into_iter().map(|a| (a, Rational::from_integer(1.into()))), ctx.probability(&local))?;
        }
    }
    problem
        .add_row((0..atoms.len()).map(|a| (a, Rational::from_integer(1.into()))), Rational::from_integer(1.into()))?;
    Ok((problem, atoms))
}

/// Finds a global section of a non-signalling model, or a certificate that
/// none exists.
pub fn solve_global_section(model: &EmpiricalModel, cap: u64) -> Result<GlobalSectionOutcome, SheafError> {
    let signalling = check_signalling(model);
    if signalling.is_signalling {
        return Err(SheafError::Signalling(Box::new(signalling)));
    }
    let (problem, atoms) = global_section_problem(model, cap)?;
    match lp::solve_feasibility(&problem)? {
        FeasibilityResult::Infeasible { certificate } => Ok(GlobalSectionOutcome::NoneExists { certificate }),
        FeasibilityResult::Feasible { witness } => {
            let section = GlobalSection {
                measurements: model.measurements.iter().map(|m| m.name.clone()).collect(),
                distribution: atoms
                    .into_iter()
                    .zip(witness)
                    .filter(|(_, p)| !p.is_zero())
                    .map(|(tuple, probability)| WeightedAssignment { tuple, probability })
                    .collect(),
            };
            check_section(model, &section)?;
            Ok(GlobalSectionOutcome::Exists { section })
        }
    }
}

/// Re-marginalises the section onto every context and compares exactly.
pub fn check_section(model: &EmpiricalModel, section: &GlobalSection) -> Result<(), SheafError> {
    if section.distribution.iter().any(|w| w.probability.is_negative()) {
        return Err(SheafError::Inconsistent("<negative weight>".into()));
    }
    let positions = context_positions(&model.measurements, model.contexts.iter().map(|c| &c.measurements));
    for (ci, ctx) in model.contexts.iter().enumerate() {
        let mut marginal: HashMap<Assignment, Rational> = HashMap::new();
        for w in &section.distribution {
            *marginal.entry(restrict(&w.tuple, &positions[ci])).or_insert_with(Rational::zero) += &w.probability;
        }
        let tuples: BTreeSet<&Assignment> = marginal.keys().chain(ctx.table.keys()).collect();
        for t in tuples {
            let got = marginal.get(t).cloned().unwrap_or_else(Rational::zero);
            if got != ctx.probability(t) {
                return Err(SheafError::Inconsistent(ctx.label()));
            }
        }
    }
    Ok(())
}

/// All tuples of the mixed-radix product, last position varying fastest.
fn mixed_radix(radices: &[usize]) -> Vec<Assignment> {
    let mut out = vec![Vec::with_capacity(radices.len())];
    for &r in radices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..r).map(move |o| {
                    let mut t = prefix.clone();
                    t.push(o);
                    t
                })
            })
            .collect();
    }
    out
}
