//! Dense-tableau phase one, kept as the reference implementation.

use num_traits::{One, Signed, Zero};

use super::{FeasibilityResult, LinearFeasibilityProblem, LpError, SolverOptions};
use crate::rational::Rational;

pub(super) fn solve(problem: &LinearFeasibilityProblem, options: &SolverOptions) -> Result<FeasibilityResult, LpError> {
    let m = problem.row_count();
    let n = problem.variable_count();
    let width = n + m + 1;

    // Rows with negative rhs are negated; artificial identity in columns n..n+m.
    let mut sign = Vec::with_capacity(m);
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(m);
    for (i, row) in problem.rows().iter().enumerate() {
        let s = if row.rhs().is_negative() { -Rational::one() } else { Rational::one() };
        let mut line = vec![Rational::zero(); width];
        for (j, c) in row.coefficients() {
            line[*j] = c * &s;
        }
        line[n + i] = Rational::one();
        line[width - 1] = row.rhs() * &s;
        t.push(line);
        sign.push(s);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let mut pivots = 0usize;
    loop {
        // Reduced cost of structural column j is -(sum over artificial-basic rows of t[i][j]).
        let entering = (0..n).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let s: Rational = (0..m).filter(|&i| basis[i] >= n).map(|i| t[i][j].clone()).sum();
            s.is_positive()
        });
        let Some(q) = entering else { break };
        if pivots >= options.max_pivots {
            return Err(LpError::PivotLimit(options.max_pivots));
        }

        let mut leave: Option<usize> = None;
        for i in 0..m {
            if !t[i][q].is_positive() {
                continue;
            }
            leave = Some(match leave {
                None => i,
                Some(l) => {
                    let ri = &t[i][width - 1] / &t[i][q];
                    let rl = &t[l][width - 1] / &t[l][q];
                    if ri < rl || (ri == rl && basis[i] < basis[l]) {
                        i
                    } else {
                        l
                    }
                }
            });
        }
        let r = leave.ok_or(LpError::VerificationFailed("phase one reported an unbounded ray"))?;

        let p = t[r][q].clone();
        for v in t[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = t[r].clone();
        for (i, line) in t.iter_mut().enumerate() {
            if i == r || line[q].is_zero() {
                continue;
            }
            let f = line[q].clone();
            for (v, pv) in line.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        basis[r] = q;
        pivots += 1;
    }

    let infeasibility: Rational = (0..m).filter(|&i| basis[i] >= n).map(|i| t[i][width - 1].clone()).sum();
    if infeasibility.is_zero() {
        let mut witness = vec![Rational::zero(); n];
        for i in 0..m {
            if basis[i] < n {
                witness[basis[i]] = t[i][width - 1].clone();
            }
        }
        Ok(FeasibilityResult::Feasible { witness })
    } else {
        // The artificial block of the tableau holds B⁻¹.
        let certificate = (0..m)
            .map(|k| {
                let y: Rational = (0..m).filter(|&i| basis[i] >= n).map(|i| t[i][n + k].clone()).sum();
                y * &sign[k]
            })
            .collect();
        Ok(FeasibilityResult::Infeasible { certificate })
    }
}
