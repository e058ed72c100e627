use contextuality::bootstrap::infer_sample_sizes;
use contextuality::cbd::DEFAULT_MAX_BINARY_VARIABLES as VARS;
use contextuality::cbd::{check_cbd_contextuality, cyclic2_analyze, dichotomize, reduce_effective_outcomes};
use contextuality::datasets::{self, load, MODEL_FILES};
use contextuality::lp::verify_certificate;
use contextuality::model::support_of;
use contextuality::quantum::born_model;
use contextuality::rational::ratio;
use contextuality::sheaf::{
    check_logical_contextuality, check_signalling, global_section_problem, solve_global_section, GlobalSectionOutcome,
    SheafError, DEFAULT_ASSIGNMENT_CAP as CAP,
};
use contextuality::validate;

#[test]
fn every_bundled_model_validates() {
    for (name, _) in MODEL_FILES {
        let m = load(name);
        assert!(validate(&m).is_empty(), "{name}");
    }
}

#[test]
fn press_box_shape() {
    let m = load("press_box_can_leaves");
    assert_eq!(m.contexts.len(), 4);
    let counts: Vec<usize> = m.measurements.iter().map(|x| x.outcomes.len()).collect();
    assert_eq!(counts, vec![3, 3, 3, 2]);
    // Effective outcomes: box never realizes "fight".
    let reduced = reduce_effective_outcomes(&m);
    let counts: Vec<usize> = reduced.measurements.iter().map(|x| x.outcomes.len()).collect();
    assert_eq!(counts, vec![3, 2, 3, 2]);
}

#[test]
fn adopt_boxer_rows() {
    let m = load("adopt_boxer");
    let rows: Vec<Vec<_>> = m
        .contexts
        .iter()
        .map(|c| [[0, 0], [0, 1], [1, 0], [1, 1]].iter().map(|t| c.probability(t)).collect())
        .collect();
    assert_eq!(rows[0], vec![ratio(0, 1), ratio(29, 30), ratio(1, 30), ratio(0, 1)]);
    assert_eq!(rows[1], vec![ratio(1, 4), ratio(0, 1), ratio(0, 1), ratio(3, 4)]);
}

#[test]
fn bell_model_is_non_signalling_and_has_no_global_section() {
    let m = load("bell");
    assert!(!check_signalling(&m).is_signalling);
    let (problem, _) = global_section_problem(&m, CAP).unwrap();
    match solve_global_section(&m, CAP).unwrap() {
        GlobalSectionOutcome::NoneExists { certificate } => assert!(verify_certificate(&problem, &certificate)),
        other => panic!("expected no global section, got {other:?}"),
    }
}

#[test]
fn quantum_scenario_reproduces_bell_table() {
    let generated = born_model(&datasets::bell_scenario().unwrap()).unwrap();
    let bundled = load("bell");
    for (g, b) in generated.contexts.iter().zip(&bundled.contexts) {
        assert_eq!(g.measurements, b.measurements);
        for t in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert_eq!(g.probability(&t), b.probability(&t), "{} {t:?}", g.label());
        }
    }
}

#[test]
fn press_box_signalling_witness() {
    let m = load("press_box_can_leaves");
    let r = check_signalling(&m);
    assert!(r.is_signalling);
    let w = r.violations.iter().find(|v| v.measurement == "box" && v.outcome == 0).expect("box marginal mismatch");
    let mut pair = [w.first.clone(), w.second.clone()];
    pair.sort();
    assert_eq!(pair, [ratio(7, 74), ratio(2, 3)]);
}

#[test]
fn coach_lap_possibilistic_signalling() {
    let m = load("coach_boxer_lap_file_poss");
    let poss = support_of(&m);
    let err = check_logical_contextuality(&poss, CAP).unwrap_err();
    let SheafError::Signalling(report) = err else { panic!("expected signalling") };
    assert!(report.possibilistic_violations.iter().any(|v| v.measurement == "coach"
        && v.outcome_label == "bus"
        && v.first_context.starts_with("coach lap")
        && v.possible_in_first
        && !v.possible_in_second));
}

#[test]
fn tap_box_logical_contextuality() {
    let poss = support_of(&load("tap_box_pitcher_cabinet_poss"));
    let r = check_logical_contextuality(&poss, CAP).unwrap();
    assert!(r.is_logically_contextual);
    assert!(!r.is_strongly_contextual);
    assert!(r.non_extendable_sections.iter().any(|s| s.assigns("tap", 0)));
}

#[test]
fn press_box_possibilistic_is_non_contextual() {
    let m = load("press_box_can_leaves_poss");
    let r = check_logical_contextuality(&support_of(&m), CAP).unwrap();
    assert!(!r.is_logically_contextual);
    assert!(!r.is_strongly_contextual);

    // The uniform lift over supports has unequal marginals, so it cannot have a global section.
    assert!(matches!(solve_global_section(&m, CAP), Err(SheafError::Signalling(_))));

    // The uniform mixture of consistent global assignments has the same supports and does.
    let weight = ratio(1, r.consistent_global_assignments.len() as i64);
    let mut mixed = m.clone();
    for (ctx, support) in mixed.contexts.iter_mut().zip(&support_of(&m).contexts) {
        let pos: Vec<usize> =
            ctx.measurements.iter().map(|n| r.measurements.iter().position(|x| x == n).unwrap()).collect();
        ctx.table.clear();
        for g in &r.consistent_global_assignments {
            let local: Vec<usize> = pos.iter().map(|&p| g[p]).collect();
            *ctx.table.entry(local).or_insert_with(|| ratio(0, 1)) += &weight;
        }
        assert_eq!(&ctx.support(), &support.support);
    }
    assert!(matches!(solve_global_section(&mixed, CAP).unwrap(), GlobalSectionOutcome::Exists { .. }));
}

#[test]
fn cyclic_measures() {
    let a = cyclic2_analyze(&load("adopt_boxer")).unwrap();
    assert!(a.contextual);
    assert_eq!(a.measure, ratio(1, 30));
    let t = cyclic2_analyze(&load("throw_pitcher")).unwrap();
    assert!(t.contextual);
    assert_eq!(t.measure, ratio(7, 30));
}

#[test]
fn cbd_verdicts_on_small_models() {
    for (name, contextual) in [
        ("adopt_boxer", true),
        ("throw_pitcher", true),
        ("coach_boxer_lap_file", false),
        ("tap_box_pitcher_cabinet", false),
    ] {
        let v = check_cbd_contextuality(&load(name), VARS).unwrap();
        assert_eq!(v.contextual, contextual, "{name}");
    }
}

#[test]
fn press_box_dichotomization() {
    let sys = dichotomize(&reduce_effective_outcomes(&load("press_box_can_leaves")));
    assert_eq!(sys.variables.len(), 16);
    assert_eq!(sys.connections.len(), 8);
    let put_in_boxes =
        sys.variables.iter().position(|v| v.measurement == "box" && v.context_label.starts_with("box can")).unwrap();
    assert_eq!(sys.marginals[put_in_boxes], ratio(7, 74));
}

#[test]
fn inferred_sample_sizes() {
    assert_eq!(infer_sample_sizes(&load("adopt_boxer")).unwrap().sizes, vec![30, 4]);
    assert_eq!(infer_sample_sizes(&load("throw_pitcher")).unwrap().sizes, vec![10, 3]);
}
