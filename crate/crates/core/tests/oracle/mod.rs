//! Brute-force reference implementations used by the tests.
#![allow(dead_code, clippy::needless_range_loop, clippy::type_complexity)]

use std::collections::BTreeSet;

use contextuality::lp::LinearFeasibilityProblem;
use contextuality::model::{EmpiricalModel, PossibilisticModel};
use contextuality::Rational;
use num_traits::{Signed, Zero};

pub fn dense(problem: &LinearFeasibilityProblem) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let n = problem.variable_count();
    let a = problem
        .rows()
        .iter()
        .map(|row| {
            let mut line = vec![Rational::zero(); n];
            for (j, c) in row.coefficients() {
                line[*j] = c.clone();
            }
            line
        })
        .collect();
    let b = problem.rows().iter().map(|r| r.rhs().clone()).collect();
    (a, b)
}

/// Unique solution of `A[:, cols] x = b` by exact elimination, if the
/// selected columns are independent and the system is consistent.
fn solve_on(a: &[Vec<Rational>], b: &[Rational], cols: &[usize]) -> Option<Vec<Rational>> {
    let k = cols.len();
    let mut m: Vec<Vec<Rational>> =
        a.iter().zip(b).map(|(row, rhs)| cols.iter().map(|&j| row[j].clone()).chain([rhs.clone()]).collect()).collect();
    let mut r = 0;
    for c in 0..k {
        let p = (r..m.len()).find(|&i| !m[i][c].is_zero())?;
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for v in m[r].iter_mut() {
            *v /= &pivot;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for col in 0..=k {
                    let d = &f * &m[r][col];
                    m[i][col] -= d;
                }
            }
        }
        r += 1;
    }
    if m[r..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    Some((0..k).map(|c| m[c][k].clone()).collect())
}

/// Every basic feasible solution of `{A x = b, x >= 0}`, by enumerating
/// column subsets.
pub fn basic_feasible_solutions(a: &[Vec<Rational>], b: &[Rational], n: usize) -> Vec<Vec<Rational>> {
    assert!(n < 32);
    let rank_cap = a.len().min(n);
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize > rank_cap {
            continue;
        }
        let cols: Vec<usize> = (0..n).filter(|j| mask >> j & 1 == 1).collect();
        if let Some(x) = solve_on(a, b, &cols) {
            if x.iter().all(|v| !v.is_negative()) {
                let mut full = vec![Rational::zero(); n];
                for (j, v) in cols.iter().zip(x) {
                    full[*j] = v;
                }
                out.push(full);
            }
        }
    }
    out
}

pub fn feasible(problem: &LinearFeasibilityProblem) -> bool {
    let (a, b) = dense(problem);
    !basic_feasible_solutions(&a, &b, problem.variable_count()).is_empty()
}

/// `min cᵀx` over `{A x = b, x >= 0}` for `c >= 0`, attained at a vertex.
pub fn minimize(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> Option<Rational> {
    basic_feasible_solutions(a, b, c.len())
        .into_iter()
        .map(|x| x.iter().zip(c).map(|(x, c)| x * c).sum::<Rational>())
        .min()
}

/// All outcome tuples over the mixed radix, last position fastest.
pub fn product(radices: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
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

/// Consistent global assignments and non-extendable `(context, tuple)`
/// sections by flat enumeration of the whole product space.
pub fn flat_logical(poss: &PossibilisticModel) -> (BTreeSet<Vec<usize>>, BTreeSet<(usize, Vec<usize>)>) {
    let radices: Vec<usize> = poss.measurements.iter().map(|m| m.outcomes.len()).collect();
    let pos: Vec<Vec<usize>> = poss
        .contexts
        .iter()
        .map(|c| c.measurements.iter().map(|n| poss.measurement_index(n).unwrap()).collect())
        .collect();
    let restrict = |g: &[usize], ci: usize| -> Vec<usize> { pos[ci].iter().map(|&p| g[p]).collect() };
    let globals: BTreeSet<Vec<usize>> = product(&radices)
        .into_iter()
        .filter(|g| poss.contexts.iter().enumerate().all(|(ci, c)| c.support.contains(&restrict(g, ci))))
        .collect();
    let mut bad = BTreeSet::new();
    for (ci, c) in poss.contexts.iter().enumerate() {
        for t in &c.support {
            if !globals.iter().any(|g| &restrict(g, ci) == t) {
                bad.insert((ci, t.clone()));
            }
        }
    }
    (globals, bad)
}

/// For a cyclic rank-2 model: the least total probability that the two
/// copies of each measurement disagree, over all couplings of the two
/// context tables, minus the sum of the marginal differences (the least it
/// could be for any system with these marginals).
///
/// The coupling is a 4×4 transportation problem with costs in {0, 1, 2}, so
/// by duality its minimum is `max Σ pᵢuᵢ + Σ q_j min_i (c_ij − u_i)` over
/// integer potentials; with `u₀ = 0` an optimal basis has `|uᵢ| ≤ 6`.
pub fn cyclic_excess(model: &EmpiricalModel) -> Rational {
    let names = &model.contexts[0].measurements;
    let cells = [(0usize, 0usize), (0, 1), (1, 0), (1, 1)];
    let tables: Vec<Vec<Rational>> = model
        .contexts
        .iter()
        .map(|ctx| {
            let pa = ctx.position_of(&names[0]).unwrap();
            let pb = ctx.position_of(&names[1]).unwrap();
            cells
                .iter()
                .map(|&(va, vb)| {
                    let mut t = vec![0; 2];
                    t[pa] = va;
                    t[pb] = vb;
                    ctx.probability(&t)
                })
                .collect()
        })
        .collect();
    let (p, q) = (&tables[0], &tables[1]);
    let cost = |i: usize, j: usize| -> i64 { (cells[i].0 != cells[j].0) as i64 + (cells[i].1 != cells[j].1) as i64 };

    let mut best: Option<Rational> = None;
    for code in 0..13i64.pow(3) {
        let u = [0, code % 13 - 6, code / 13 % 13 - 6, code / 169 - 6];
        let mut value: Rational = (0..4).map(|i| &p[i] * Rational::from_integer(u[i].into())).sum();
        for j in 0..4 {
            let v = (0..4).map(|i| cost(i, j) - u[i]).min().unwrap();
            value += &q[j] * Rational::from_integer(v.into());
        }
        if best.as_ref().is_none_or(|b| value > *b) {
            best = Some(value);
        }
    }
    let one = |t: &[Rational], bit: usize| -> Rational {
        cells.iter().zip(t).filter(|(c, _)| [c.0, c.1][bit] == 1).map(|(_, x)| x.clone()).sum()
    };
    best.unwrap() - (one(p, 0) - one(q, 0)).abs() - (one(p, 1) - one(q, 1)).abs()
}

/// Support-level signalling by direct comparison of marginal supports.
pub fn flat_possibilistic_signalling(poss: &PossibilisticModel) -> bool {
    let marginal = |ci: usize, name: &str| -> Option<BTreeSet<usize>> {
        let c = &poss.contexts[ci];
        let p = c.measurements.iter().position(|m| m == name)?;
        Some(c.support.iter().map(|t| t[p]).collect())
    };
    poss.measurements.iter().any(|m| {
        let all: Vec<BTreeSet<usize>> = (0..poss.contexts.len()).filter_map(|ci| marginal(ci, &m.name)).collect();
        all.windows(2).any(|w| w[0] != w[1])
    })
}

/// A random possibilistic model over at most four measurements with at most
/// three outcomes each. Half the time the supports are restrictions of a few
/// global assignments (then possibly thinned), otherwise arbitrary.
pub fn random_possibilistic<R: rand::Rng>(rng: &mut R) -> PossibilisticModel {
    use contextuality::model::{Measurement, PossibilisticContext};
    use rand::seq::SliceRandom;

    let k = rng.random_range(1..=4usize);
    let measurements: Vec<Measurement> =
        (0..k).map(|i| Measurement::indexed(format!("m{i}"), rng.random_range(1..=3))).collect();
    let radices: Vec<usize> = measurements.iter().map(|m| m.outcomes.len()).collect();

    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for _ in 0..rng.random_range(1..=4) {
        let mut s: Vec<usize> = (0..k).filter(|_| rng.random_bool(0.5)).collect();
        if s.is_empty() {
            s.push(rng.random_range(0..k));
        }
        s.truncate(3);
        s.shuffle(rng);
        let mut key = s.clone();
        key.sort();
        if !subsets.iter().any(|t| {
            let mut u = t.clone();
            u.sort();
            u == key
        }) {
            subsets.push(s);
        }
    }

    let from_globals = rng.random_bool(0.5);
    let globals: Vec<Vec<usize>> =
        (0..rng.random_range(1..=6)).map(|_| radices.iter().map(|&r| rng.random_range(0..r)).collect()).collect();
    let contexts = subsets
        .into_iter()
        .map(|s| {
            let mut support: BTreeSet<Vec<usize>> = if from_globals {
                globals.iter().map(|g| s.iter().map(|&p| g[p]).collect()).collect()
            } else {
                let local: Vec<usize> = s.iter().map(|&p| radices[p]).collect();
                let all = product(&local);
                let mut pick: BTreeSet<Vec<usize>> = all.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
                if pick.is_empty() {
                    pick.insert(all[rng.random_range(0..all.len())].clone());
                }
                pick
            };
            if from_globals && support.len() > 1 && rng.random_bool(0.3) {
                let drop = support.iter().nth(rng.random_range(0..support.len())).cloned().unwrap();
                support.remove(&drop);
            } else if from_globals && rng.random_bool(0.4) {
                // A tuple built from values already in each marginal keeps the
                // marginal supports, so the model stays non-signalling.
                let seen: Vec<Vec<usize>> = (0..s.len())
                    .map(|i| support.iter().map(|t| t[i]).collect::<BTreeSet<_>>().into_iter().collect())
                    .collect();
                support.insert(seen.iter().map(|v| v[rng.random_range(0..v.len())]).collect());
            }
            PossibilisticContext {
                measurements: s.iter().map(|&p| measurements[p].name.clone()).collect(),
                orientation: String::new(),
                support,
            }
        })
        .collect();
    PossibilisticModel { label: "random".into(), measurements, contexts }
}

/// Two contexts over the same two binary measurements with random rational
/// tables (cell weights `0..=max_weight`); the second context sometimes
/// lists the measurements in the other order.
pub fn random_cyclic2<R: rand::Rng>(rng: &mut R, max_weight: i64) -> EmpiricalModel {
    use contextuality::model::{Context, Measurement};
    let swap = rng.random_bool(0.3);
    let mut table = |swap: bool| {
        let mut w: Vec<i64> = (0..4).map(|_| rng.random_range(0..=max_weight)).collect();
        if w.iter().all(|&x| x == 0) {
            w[rng.random_range(0..4)] = 1;
        }
        let total: i64 = w.iter().sum();
        [[0, 0], [0, 1], [1, 0], [1, 1]]
            .into_iter()
            .zip(w)
            .filter(|(_, x)| *x > 0)
            .map(|(t, x)| {
                let t = if swap { vec![t[1], t[0]] } else { t.to_vec() };
                (t, Rational::new(x.into(), total.into()))
            })
            .collect::<Vec<_>>()
    };
    let first = table(false);
    let second = table(swap);
    let names: [&str; 2] = if swap { ["b", "a"] } else { ["a", "b"] };
    EmpiricalModel::new(
        "random",
        vec![Measurement::indexed("a", 2), Measurement::indexed("b", 2)],
        vec![
            Context::new(&["a", "b"], first).with_orientation("one"),
            Context::new(&names, second).with_orientation("two"),
        ],
    )
}
