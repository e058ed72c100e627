//! The bundled datasets, compiled in.

use crate::io::{parse_model, ModelError};
use crate::model::EmpiricalModel;
use crate::quantum::{parse_scenario, QuantumError, QuantumScenario};

/// `(file name, contents)` of every bundled model file.
pub const MODEL_FILES: &[(&str, &str)] = &[
    ("bell.json", include_str!("../../../data/bell.json")),
    ("coach_boxer_lap_file.json", include_str!("../../../data/coach_boxer_lap_file.json")),
    ("coach_boxer_lap_file_poss.json", include_str!("../../../data/coach_boxer_lap_file_poss.json")),
    ("tap_box_pitcher_cabinet.json", include_str!("../../../data/tap_box_pitcher_cabinet.json")),
    ("tap_box_pitcher_cabinet_poss.json", include_str!("../../../data/tap_box_pitcher_cabinet_poss.json")),
    ("press_box_can_leaves.json", include_str!("../../../data/press_box_can_leaves.json")),
    ("press_box_can_leaves_poss.json", include_str!("../../../data/press_box_can_leaves_poss.json")),
    ("adopt_boxer.json", include_str!("../../../data/adopt_boxer.json")),
    ("adopt_boxer_poss.json", include_str!("../../../data/adopt_boxer_poss.json")),
    ("throw_pitcher.json", include_str!("../../../data/throw_pitcher.json")),
    ("throw_pitcher_poss.json", include_str!("../../../data/throw_pitcher_poss.json")),
];

pub const BELL_SCENARIO: &str = include_str!("../../../data/bell.qjson");

/// Parses a bundled model by file name (with or without `.json`).
pub fn bundled(name: &str) -> Option<Result<EmpiricalModel, ModelError>> {
    MODEL_FILES
        .iter()
        .find(|(file, _)| *file == name || file.strip_suffix(".json") == Some(name))
        .map(|(_, text)| parse_model(text))
}

/// Like [`bundled`], panicking on a missing or broken file.
pub fn load(name: &str) -> EmpiricalModel {
    bundled(name)
        .unwrap_or_else(|| panic!("no bundled dataset `{name}`"))
        .unwrap_or_else(|e| panic!("bundled dataset `{name}`: {e}"))
}

pub fn bell_scenario() -> Result<QuantumScenario, QuantumError> {
    parse_scenario(BELL_SCENARIO)
}
