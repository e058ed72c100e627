//! Revised simplex, phase one, with an explicit dense basis inverse.
//!
//! The basis inverse lives in the space of the original rows with negative
//! right-hand sides negated, the same space as the dense tableau. Columns are
//! stored sparse with integer coefficients (rows scaled by [`integerize`]);
//! pricing divides the multipliers by the row scales, brings them to a common
//! denominator and then scans the wide column set with integer arithmetic
//! only.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{integerize, FeasibilityResult, LinearFeasibilityProblem, LpError, SolverOptions};
use crate::rational::Rational;

struct State {
    m: usize,
    n: usize,
    /// Variable in each basis position; `n + i` is the artificial of row `i`.
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<Vec<Rational>>,
    xb: Vec<Rational>,
}

pub(super) fn solve(problem: &LinearFeasibilityProblem, options: &SolverOptions) -> Result<FeasibilityResult, LpError> {
    let scaled = integerize(problem);
    let m = scaled.rows.len();
    let n = problem.variable_count();

    let mut columns: Vec<Vec<(usize, BigInt)>> = vec![Vec::new(); n];
    for (r, (coeffs, _)) in scaled.rows.iter().enumerate() {
        for (j, a) in coeffs {
            columns[*j].push((r, a.clone()));
        }
    }

    let small = SmallColumns::new(&columns);

    // |scale|: factor between the sign-normalised row and its integer form.
    let magnitude: Vec<Rational> = scaled.scale.iter().map(|s| s.abs()).collect();

    let mut state = State {
        m,
        n,
        basis: (n..n + m).collect(),
        is_basic: {
            let mut v = vec![false; n + m];
            v[n..].iter_mut().for_each(|b| *b = true);
            v
        },
        binv: (0..m)
            .map(|i| (0..m).map(|k| if i == k { Rational::one() } else { Rational::zero() }).collect())
            .collect(),
        xb: scaled.rows.iter().zip(&magnitude).map(|((_, b), s)| Rational::from_integer(b.clone()) / s).collect(),
    };

    let mut pivots = 0usize;
    loop {
        let y = state.multipliers();
        let Some(entering) = state.price(&columns, small.as_ref(), &y, &magnitude) else {
            break;
        };
        if pivots >= options.max_pivots {
            return Err(LpError::PivotLimit(options.max_pivots));
        }
        let u = state.ftran(&columns[entering], &magnitude);
        let leaving = state.ratio_test(&u).ok_or(LpError::VerificationFailed("phase one reported an unbounded ray"))?;
        state.pivot(leaving, entering, &u);
        pivots += 1;
    }

    let infeasibility: Rational =
        state.basis.iter().zip(&state.xb).filter(|(v, _)| **v >= n).map(|(_, x)| x.clone()).sum();

    if infeasibility.is_zero() {
        let mut witness = vec![Rational::zero(); n];
        for (v, x) in state.basis.iter().zip(&state.xb) {
            if *v < n {
                witness[*v] = x.clone();
            }
        }
        Ok(FeasibilityResult::Feasible { witness })
    } else {
        let y = state.multipliers();
        let certificate =
            y.iter().zip(&scaled.scale).map(|(yi, s)| if s.is_negative() { -yi } else { yi.clone() }).collect();
        Ok(FeasibilityResult::Infeasible { certificate })
    }
}

/// Columns as machine integers in compressed sparse form, when every
/// coefficient is small enough that pricing can accumulate in `i128`.
struct SmallColumns {
    starts: Vec<usize>,
    rows: Vec<u32>,
    values: Vec<i64>,
    all_unit: bool,
}

const SMALL: i64 = 1 << 52;

impl SmallColumns {
    fn new(columns: &[Vec<(usize, BigInt)>]) -> Option<Self> {
        let mut out = SmallColumns { starts: vec![0], rows: Vec::new(), values: Vec::new(), all_unit: true };
        for col in columns {
            for (r, a) in col {
                let v = a.to_i64().filter(|v| v.abs() < SMALL)?;
                out.rows.push(u32::try_from(*r).ok()?);
                out.values.push(v);
                out.all_unit &= v == 1;
            }
            out.starts.push(out.rows.len());
        }
        Some(out)
    }

    /// Lowest non-basic column with positive `yᵀA_j`.
    fn first_positive(&self, y: &[i64], is_basic: &[bool]) -> Option<usize> {
        let n = self.starts.len() - 1;
        (0..n).find(|&j| {
            if is_basic[j] {
                return false;
            }
            let span = self.starts[j]..self.starts[j + 1];
            let rows = &self.rows[span.clone()];
            let total: i128 = if self.all_unit {
                rows.iter().map(|&r| y[r as usize] as i128).sum()
            } else {
                rows.iter().zip(&self.values[span]).map(|(&r, &a)| y[r as usize] as i128 * a as i128).sum()
            };
            total > 0
        })
    }
}

impl State {
    /// `c_Bᵀ B⁻¹`: the sum of the basis-inverse rows held by artificials.
    fn multipliers(&self) -> Vec<Rational> {
        let mut y = vec![Rational::zero(); self.m];
        for (pos, &v) in self.basis.iter().enumerate() {
            if v >= self.n {
                for (acc, b) in y.iter_mut().zip(&self.binv[pos]) {
                    if !b.is_zero() {
                        *acc += b;
                    }
                }
            }
        }
        y
    }

    /// Bland's rule: the lowest-index structural column with negative reduced
    /// cost. Reduced cost of column `j` is `-yᵀA_j`.
    fn price(
        &self,
        columns: &[Vec<(usize, BigInt)>],
        small: Option<&SmallColumns>,
        y: &[Rational],
        magnitude: &[Rational],
    ) -> Option<usize> {
        let z: Vec<Rational> = y.iter().zip(magnitude).map(|(v, s)| v / s).collect();
        let denom = Rational::from_integer(z.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom())));
        let scaled: Vec<BigInt> = z.iter().map(|v| (v * &denom).to_integer()).collect();
        // |y| < 2^52, |a| < 2^52 and at most 2^20 terms per column keep sums in i128.
        if let Some(cols) = small {
            let fast: Option<Vec<i64>> = scaled.iter().map(|v| v.to_i64().filter(|x| x.abs() < SMALL)).collect();
            if let (Some(y), true) = (fast, self.m < (1 << 20)) {
                return cols.first_positive(&y, &self.is_basic);
            }
        }
        let active: Vec<bool> = scaled.iter().map(|v| !v.is_zero()).collect();
        let mut acc = BigInt::zero();
        for (j, col) in columns.iter().enumerate() {
            if self.is_basic[j] {
                continue;
            }
            acc.set_zero();
            for (r, a) in col {
                if !active[*r] {
                    continue;
                }
                if a.is_one() {
                    acc += &scaled[*r];
                } else {
                    acc += &scaled[*r] * a;
                }
            }
            if acc.is_positive() {
                return Some(j);
            }
        }
        None
    }

    fn ftran(&self, column: &[(usize, BigInt)], magnitude: &[Rational]) -> Vec<Rational> {
        let coeffs: Vec<(usize, Rational)> =
            column.iter().map(|(r, a)| (*r, Rational::from_integer(a.clone()) / &magnitude[*r])).collect();
        self.binv
            .iter()
            .map(|row| {
                let mut s = Rational::zero();
                for (r, a) in &coeffs {
                    let b = &row[*r];
                    if !b.is_zero() {
                        s += b * a;
                    }
                }
                s
            })
            .collect()
    }

    /// Minimum ratio, ties broken by the lowest basic variable index.
    fn ratio_test(&self, u: &[Rational]) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for (pos, ui) in u.iter().enumerate() {
            if !ui.is_positive() {
                continue;
            }
            let ratio = &self.xb[pos] / ui;
            best = match best {
                None => Some((pos, ratio)),
                Some((bp, br)) => {
                    if ratio < br || (ratio == br && self.basis[pos] < self.basis[bp]) {
                        Some((pos, ratio))
                    } else {
                        Some((bp, br))
                    }
                }
            };
        }
        best.map(|(pos, _)| pos)
    }

    fn pivot(&mut self, leaving: usize, entering: usize, u: &[Rational]) {
        let pivot = u[leaving].clone();
        for b in self.binv[leaving].iter_mut() {
            if !b.is_zero() {
                *b /= &pivot;
            }
        }
        self.xb[leaving] /= &pivot;
        let pivot_row = self.binv[leaving].clone();
        let pivot_x = self.xb[leaving].clone();
        for (i, ui) in u.iter().enumerate() {
            if i == leaving || ui.is_zero() {
                continue;
            }
            for (b, p) in self.binv[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *b -= ui * p;
                }
            }
            self.xb[i] -= ui * &pivot_x;
        }
        self.is_basic[self.basis[leaving]] = false;
        self.is_basic[entering] = true;
        self.basis[leaving] = entering;
    }
}
