//! Exact feasibility of `{A x = b, x >= 0}` over the rationals.
//!
//! Both solvers run phase one of the simplex method (one artificial variable
//! per row, minimise their sum) with Bland's rule. An artificial variable that
//! leaves the basis is never priced again. [`solve_feasibility`] uses a
//! revised simplex over sparse columns; [`solve_feasibility_dense`] keeps the
//! full tableau and exists as a reference for differential testing. Given the
//! same problem the two return identical results.
//!
//! Every result is checked before it is returned: a witness by substitution
//! into every row, a certificate `y` by checking `yᵀA <= 0` column-wise and
//! `yᵀb > 0`.

mod revised;
mod tableau;

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};

use crate::rational::{format_rational, lcm_of_denominators, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("coefficient refers to variable {index} but the problem has {variable_count} variables")]
    VariableOutOfRange { index: usize, variable_count: usize },
    #[error("problem has no constraint rows")]
    Empty,
    #[error("pivot limit of {0} exceeded")]
    PivotLimit(usize),
    #[error("solver produced a result that failed verification: {0}")]
    VerificationFailed(&'static str),
}

/// One equality row: `Σ coefficient · x_index = rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    coefficients: Vec<(usize, Rational)>,
    rhs: Rational,
}

impl Row {
    /// Nonzero coefficients sorted by variable index.
    pub fn coefficients(&self) -> &[(usize, Rational)] {
        &self.coefficients
    }

    pub fn rhs(&self) -> &Rational {
        &self.rhs
    }
}

/// Equality constraints over nonnegative variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearFeasibilityProblem {
    variable_count: usize,
    rows: Vec<Row>,
}

impl LinearFeasibilityProblem {
    pub fn new(variable_count: usize) -> Self {
        LinearFeasibilityProblem { variable_count, rows: Vec::new() }
    }

    /// Adds a row and returns its index. Repeated variables are summed and
    /// zero coefficients dropped.
    pub fn add_row<I>(&mut self, coefficients: I, rhs: Rational) -> Result<usize, LpError>
    where
        I: IntoIterator<Item = (usize, Rational)>,
    {
        let mut coeffs: Vec<(usize, Rational)> = coefficients.into_iter().collect();
        if let Some(&(index, _)) = coeffs.iter().find(|(i, _)| *i >= self.variable_count) {
            return Err(LpError::VariableOutOfRange { index, variable_count: self.variable_count });
        }
        coeffs.sort_by_key(|(i, _)| *i);
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(coeffs.len());
        for (i, c) in coeffs {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += c,
                _ => merged.push((i, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        self.rows.push(Row { coefficients: merged, rhs });
        Ok(self.rows.len() - 1)
    }

    pub fn variable_count(&self) -> usize {
        self.variable_count
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Plain-text listing, one `coeff*x_i + ... = rhs` line per row.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# variables: {} (all >= 0), rows: {}", self.variable_count, self.rows.len());
        for row in &self.rows {
            let lhs = if row.coefficients.is_empty() {
                "0".to_string()
            } else {
                row.coefficients
                    .iter()
                    .map(|(i, c)| format!("{}*x_{i}", format_rational(c)))
                    .collect::<Vec<_>>()
                    .join(" + ")
            };
            let _ = writeln!(out, "{lhs} = {}", format_rational(&row.rhs));
        }
        out
    }
}

/// Outcome of a feasibility solve.
#[serde_as]
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FeasibilityResult {
    /// A nonnegative solution, one entry per variable.
    Feasible {
        #[serde_as(as = "Vec<DisplayFromStr>")]
        witness: Vec<Rational>,
    },
    /// Row multipliers `y` with `yᵀA <= 0` and `yᵀb > 0`.
    Infeasible {
        #[serde_as(as = "Vec<DisplayFromStr>")]
        certificate: Vec<Rational>,
    },
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityResult::Feasible { .. })
    }

    pub fn witness(&self) -> Option<&[Rational]> {
        match self {
            FeasibilityResult::Feasible { witness } => Some(witness),
            FeasibilityResult::Infeasible { .. } => None,
        }
    }

    pub fn certificate(&self) -> Option<&[Rational]> {
        match self {
            FeasibilityResult::Infeasible { certificate } => Some(certificate),
            FeasibilityResult::Feasible { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    pub max_pivots: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_pivots: 200_000 }
    }
}

/// Revised simplex with default options.
pub fn solve_feasibility(problem: &LinearFeasibilityProblem) -> Result<FeasibilityResult, LpError> {
    solve_feasibility_with(problem, &SolverOptions::default())
}

pub fn solve_feasibility_with(
    problem: &LinearFeasibilityProblem,
    options: &SolverOptions,
) -> Result<FeasibilityResult, LpError> {
    if problem.rows.is_empty() {
        return Err(LpError::Empty);
    }
    let result = revised::solve(problem, options)?;
    checked(problem, result)
}

/// Dense-tableau reference solver. Same pivot rule, same results, much slower
/// on wide problems.
pub fn solve_feasibility_dense(
    problem: &LinearFeasibilityProblem,
    options: &SolverOptions,
) -> Result<FeasibilityResult, LpError> {
    if problem.rows.is_empty() {
        return Err(LpError::Empty);
    }
    let result = tableau::solve(problem, options)?;
    checked(problem, result)
}

fn checked(problem: &LinearFeasibilityProblem, result: FeasibilityResult) -> Result<FeasibilityResult, LpError> {
    match &result {
        FeasibilityResult::Feasible { witness } if !verify_witness(problem, witness) => {
            Err(LpError::VerificationFailed("witness does not satisfy every row"))
        }
        FeasibilityResult::Infeasible { certificate } if !verify_certificate(problem, certificate) => {
            Err(LpError::VerificationFailed("certificate does not satisfy the Farkas conditions"))
        }
        _ => Ok(result),
    }
}

/// True iff `witness` is nonnegative and satisfies every row exactly.
pub fn verify_witness(problem: &LinearFeasibilityProblem, witness: &[Rational]) -> bool {
    witness.len() == problem.variable_count
        && witness.iter().all(|x| !x.is_negative())
        && problem.rows.iter().all(|row| {
            let lhs: Rational = row.coefficients.iter().map(|(i, c)| c * &witness[*i]).sum();
            lhs == row.rhs
        })
}

/// True iff the multipliers combine the rows into `cᵀx = d` with every
/// `c_j <= 0` and `d > 0`, which no nonnegative `x` can satisfy.
pub fn verify_certificate(problem: &LinearFeasibilityProblem, certificate: &[Rational]) -> bool {
    if certificate.len() != problem.rows.len() {
        return false;
    }
    let mut combined = vec![Rational::zero(); problem.variable_count];
    let mut combined_rhs = Rational::zero();
    for (row, y) in problem.rows.iter().zip(certificate) {
        if y.is_zero() {
            continue;
        }
        for (i, c) in &row.coefficients {
            combined[*i] += c * y;
        }
        combined_rhs += &row.rhs * y;
    }
    combined_rhs.is_positive() && combined.iter().all(|c| !c.is_positive())
}

/// Rows rewritten with integer coefficients and nonnegative right-hand side.
/// `scale[i]` is the factor applied to row `i` (its sign flips negative rhs).
pub(crate) struct IntegerRows {
    pub rows: Vec<(Vec<(usize, BigInt)>, BigInt)>,
    pub scale: Vec<Rational>,
}

pub(crate) fn integerize(problem: &LinearFeasibilityProblem) -> IntegerRows {
    let mut rows = Vec::with_capacity(problem.rows.len());
    let mut scale = Vec::with_capacity(problem.rows.len());
    for row in &problem.rows {
        let mut factor = lcm_of_denominators(row.coefficients.iter().map(|(_, c)| c).chain([&row.rhs]));
        if row.rhs.is_negative() {
            factor = -factor;
        }
        let f = Rational::from_integer(factor);
        let coeffs = row.coefficients.iter().map(|(i, c)| (*i, (c * &f).to_integer())).collect();
        rows.push((coeffs, (&row.rhs * &f).to_integer()));
        scale.push(f);
    }
    IntegerRows { rows, scale }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{integer, ratio};

    fn problem(vars: usize, rows: &[(&[(usize, i64)], i64)]) -> LinearFeasibilityProblem {
        let mut p = LinearFeasibilityProblem::new(vars);
        for (coeffs, rhs) in rows {
            p.add_row(coeffs.iter().map(|&(i, c)| (i, integer(c))), integer(*rhs)).unwrap();
        }
        p
    }

    #[test]
    fn contradictory_equalities_give_the_textbook_certificate() {
        let p = problem(1, &[(&[(0, 1)], 1), (&[(0, 1)], 0)]);
        let r = solve_feasibility(&p).unwrap();
        assert_eq!(r, FeasibilityResult::Infeasible { certificate: vec![integer(1), integer(-1)] });
        assert_eq!(solve_feasibility_dense(&p, &SolverOptions::default()).unwrap(), r);
    }

    #[test]
    fn simple_feasible_system() {
        // x0 + x1 = 1, x0 - x1 = 1/2
        let mut p = LinearFeasibilityProblem::new(2);
        p.add_row([(0, integer(1)), (1, integer(1))], integer(1)).unwrap();
        p.add_row([(0, integer(1)), (1, integer(-1))], ratio(1, 2)).unwrap();
        let r = solve_feasibility(&p).unwrap();
        assert_eq!(r.witness().unwrap(), &[ratio(3, 4), ratio(1, 4)]);
    }

    #[test]
    fn negative_rhs_rows() {
        // -x0 = -2, x0 + x1 = 3
        let p = problem(2, &[(&[(0, -1)], -2), (&[(0, 1), (1, 1)], 3)]);
        let r = solve_feasibility(&p).unwrap();
        assert_eq!(r.witness().unwrap(), &[integer(2), integer(1)]);
        // -x0 = 2 has no nonnegative solution
        let q = problem(1, &[(&[(0, -1)], 2)]);
        let r = solve_feasibility(&q).unwrap();
        assert!(verify_certificate(&q, r.certificate().unwrap()));
    }

    #[test]
    fn zero_rows() {
        let p = problem(2, &[(&[], 0), (&[(0, 1)], 1)]);
        assert!(solve_feasibility(&p).unwrap().is_feasible());
        let q = problem(2, &[(&[], 1)]);
        assert!(!solve_feasibility(&q).unwrap().is_feasible());
    }

    #[test]
    fn rejects_out_of_range_variables_and_empty_problems() {
        let mut p = LinearFeasibilityProblem::new(2);
        assert_eq!(
            p.add_row([(2, integer(1))], integer(0)),
            Err(LpError::VariableOutOfRange { index: 2, variable_count: 2 })
        );
        assert_eq!(solve_feasibility(&p), Err(LpError::Empty));
    }

    #[test]
    fn pivot_limit_is_enforced() {
        let p = problem(2, &[(&[(0, 1), (1, 1)], 1), (&[(0, 1)], 1)]);
        let opts = SolverOptions { max_pivots: 0 };
        assert_eq!(solve_feasibility_with(&p, &opts), Err(LpError::PivotLimit(0)));
    }

    #[test]
    fn add_row_merges_and_drops_zeros() {
        let mut p = LinearFeasibilityProblem::new(3);
        p.add_row([(2, integer(1)), (0, integer(2)), (2, integer(-1))], integer(1)).unwrap();
        assert_eq!(p.rows()[0].coefficients(), &[(0, integer(2))]);
    }

    #[test]
    fn dump_format() {
        let mut p = LinearFeasibilityProblem::new(2);
        p.add_row([(0, integer(1)), (1, ratio(-1, 2))], ratio(1, 4)).unwrap();
        let text = p.dump();
        assert!(text.contains("1*x_0 + -1/2*x_1 = 1/4"), "{text}");
    }

    #[test]
    fn verification_rejects_bad_claims() {
        let p = problem(1, &[(&[(0, 1)], 1)]);
        assert!(!verify_witness(&p, &[integer(2)]));
        assert!(!verify_witness(&p, &[]));
        assert!(!verify_certificate(&p, &[integer(1)]));
        assert!(!verify_certificate(&p, &[integer(-1)]));
    }
}
