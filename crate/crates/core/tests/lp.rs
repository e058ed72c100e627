mod oracle;

use contextuality::lp::{
    solve_feasibility, solve_feasibility_dense, solve_feasibility_with, verify_certificate, verify_witness,
    FeasibilityResult, LinearFeasibilityProblem, LpError, SolverOptions,
};
use contextuality::rational::{integer, ratio};
use contextuality::Rational;
use proptest::prelude::*;

type Shape = (usize, Vec<(Vec<(i64, i64)>, (i64, i64))>);

fn small_rational() -> impl Strategy<Value = (i64, i64)> {
    prop_oneof![
        3 => Just((0, 1)),
        4 => (-3i64..=3, Just(1i64)),
        2 => (-4i64..=4, 1i64..=4),
    ]
}

fn problem_shape() -> impl Strategy<Value = Shape> {
    (1usize..=6, 1usize..=6).prop_flat_map(|(n, m)| {
        (Just(n), prop::collection::vec((prop::collection::vec(small_rational(), n), small_rational()), m))
    })
}

fn build((n, rows): &Shape) -> LinearFeasibilityProblem {
    let mut p = LinearFeasibilityProblem::new(*n);
    for (coeffs, (bn, bd)) in rows {
        p.add_row(coeffs.iter().enumerate().map(|(j, (a, d))| (j, ratio(*a, *d))), ratio(*bn, *bd)).unwrap();
    }
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1500))]

    #[test]
    fn verdict_matches_vertex_enumeration(shape in problem_shape()) {
        let p = build(&shape);
        let r = solve_feasibility(&p).unwrap();
        prop_assert_eq!(r.is_feasible(), oracle::feasible(&p));
        match &r {
            FeasibilityResult::Feasible { witness } => prop_assert!(verify_witness(&p, witness)),
            FeasibilityResult::Infeasible { certificate } => prop_assert!(verify_certificate(&p, certificate)),
        }
    }

    #[test]
    fn revised_and_dense_agree_exactly(shape in problem_shape()) {
        let p = build(&shape);
        let options = SolverOptions::default();
        prop_assert_eq!(solve_feasibility_with(&p, &options).unwrap(), solve_feasibility_dense(&p, &options).unwrap());
    }

    #[test]
    fn row_scaling_preserves_the_verdict(shape in problem_shape(), scales in prop::collection::vec(
        prop_oneof![(1i64..=5, 1i64..=5), (-5i64..=-1, 1i64..=5)], 6)) {
        let p = build(&shape);
        let mut q = LinearFeasibilityProblem::new(p.variable_count());
        for (row, (sn, sd)) in p.rows().iter().zip(&scales) {
            let s = ratio(*sn, *sd);
            q.add_row(row.coefficients().iter().map(|(j, c)| (*j, c * &s)), row.rhs() * &s).unwrap();
        }
        let (a, b) = (solve_feasibility(&p).unwrap(), solve_feasibility(&q).unwrap());
        prop_assert_eq!(a.is_feasible(), b.is_feasible());
        if let Some(y) = b.certificate() {
            // Undo the scaling: the certificate of q is one of p too.
            let back: Vec<Rational> = y.iter().zip(&scales).map(|(y, (sn, sd))| y * ratio(*sn, *sd)).collect();
            prop_assert!(verify_certificate(&p, &back));
        }
    }
}

#[test]
fn tampered_results_fail_verification() {
    let mut p = LinearFeasibilityProblem::new(2);
    p.add_row([(0, integer(1)), (1, integer(1))], integer(1)).unwrap();
    assert!(verify_witness(&p, &[ratio(1, 2), ratio(1, 2)]));
    assert!(!verify_witness(&p, &[ratio(3, 2), ratio(-1, 2)]));
    assert!(!verify_witness(&p, &[ratio(1, 2)]));
    // y = -1 gives -x0 - x1 = -1: nonpositive columns but rhs not positive.
    assert!(!verify_certificate(&p, &[integer(-1)]));
    assert!(!verify_certificate(&p, &[integer(1)]));
}

#[test]
fn errors() {
    let mut p = LinearFeasibilityProblem::new(2);
    assert_eq!(
        p.add_row([(2, integer(1))], integer(0)),
        Err(LpError::VariableOutOfRange { index: 2, variable_count: 2 })
    );
    assert_eq!(solve_feasibility(&p), Err(LpError::Empty));
    p.add_row([(0, integer(1)), (1, integer(-1))], integer(0)).unwrap();
    p.add_row([(0, integer(1)), (1, integer(1))], integer(2)).unwrap();
    let tight = SolverOptions { max_pivots: 0 };
    assert_eq!(solve_feasibility_with(&p, &tight), Err(LpError::PivotLimit(0)));
}

#[test]
fn duplicate_entries_merge_and_zeros_drop() {
    let mut p = LinearFeasibilityProblem::new(3);
    p.add_row([(1, integer(2)), (0, integer(0)), (1, integer(-1)), (2, ratio(1, 2))], integer(1)).unwrap();
    assert_eq!(p.rows()[0].coefficients(), &[(1, integer(1)), (2, ratio(1, 2))]);
    let dump = p.dump();
    assert!(dump.contains("1*x_1 + 1/2*x_2 = 1"), "{dump}");
}

#[test]
fn zero_rhs_rows_are_trivially_feasible() {
    let mut p = LinearFeasibilityProblem::new(3);
    p.add_row([(0, integer(1)), (1, integer(-2))], integer(0)).unwrap();
    p.add_row([(2, integer(5))], Rational::from_integer(0.into())).unwrap();
    assert_eq!(solve_feasibility(&p).unwrap().witness().unwrap(), &[integer(0), integer(0), integer(0)]);
}
