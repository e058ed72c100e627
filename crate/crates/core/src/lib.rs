//! Contextuality analyses of empirical models over exact rationals.
//!
//! A model assigns a joint distribution to each context (a set of
//! measurements observed together). The crate checks non-signalling, logical
//! and strong contextuality via global assignments, global sections via
//! linear programming, Contextuality-by-Default via a coupling LP over
//! dichotomized variables, and the closed-form cyclic rank-2 criterion with a
//! parametric bootstrap. Models can also be generated from quantum states.

pub mod bootstrap;
pub mod bundle;
pub mod cbd;
pub mod datasets;
pub mod io;
pub mod lp;
pub mod model;
pub mod quantum;
pub mod rational;
pub mod report;
pub mod sheaf;

pub use bootstrap::{
    bootstrap_noncontextuality, infer_sample_sizes, BootstrapConfig, BootstrapError, BootstrapResult, SampleSizePlan,
    SizeProvenance,
};
pub use bundle::{bundle_dot, BundleDiagram, BundleError};
pub use cbd::{check_cbd_contextuality, cyclic2_analyze, CbdError, CbdVerdict, Cyclic2Report};
pub use io::{load_model, model_to_json, parse_model, save_model, ModelError};
pub use lp::{solve_feasibility, FeasibilityResult, LinearFeasibilityProblem, LpError};
pub use model::{
    support_of, validate, Assignment, Context, EmpiricalModel, Measurement, PossibilisticModel, ValidationReport,
    Violation,
};
pub use quantum::{born_model, parse_scenario, QuantumError, QuantumScenario};
pub use rational::{format_rational, parse_rational, ratio, Rational};
pub use report::{analyze, AnalysisOptions, AnalysisReport, Stage};
pub use sheaf::{
    check_logical_contextuality, check_signalling, global_assignments, solve_global_section, GlobalSectionOutcome,
    LogicalContextualityReport, SheafError, SignallingReport,
};
