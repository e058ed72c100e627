//! JSON model files.
//!
//! ```json
//! {
//!   "label": "adopt_boxer",
//!   "measurements": [{"name": "adopt", "outcomes": ["literal", "figurative"]}, ...],
//!   "contexts": [
//!     {"measurements": ["adopt", "boxer"], "orientation": "verb-object",
//!      "table": {"0,1": "29/30", "1,0": "1/30"}}
//!   ]
//! }
//! ```
//!
//! Table keys are comma-separated outcome indices; values are `"p/q"` or an
//! integer string. `orientation` and `possibilistic` are optional.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{validate, Assignment, Context, EmpiricalModel, Measurement, ValidationReport};
use crate::rational::{format_rational, parse_rational};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed model file: {0}")]
    Parse(String),
    #[error("invalid model:\n{0}")]
    Invalid(ValidationReport),
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    label: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    possibilistic: bool,
    measurements: Vec<Measurement>,
    contexts: Vec<ContextFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ContextFile {
    measurements: Vec<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    orientation: String,
    table: BTreeMap<String, String>,
}

fn parse_key(key: &str) -> Result<Assignment, ModelError> {
    key.split(',')
        .map(|part| {
            part.trim().parse::<usize>().map_err(|_| ModelError::Parse(format!("bad outcome tuple key `{key}`")))
        })
        .collect()
}

fn format_key(tuple: &[usize]) -> String {
    tuple.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Parses a model without validating it.
pub fn parse_model_unchecked(text: &str) -> Result<EmpiricalModel, ModelError> {
    let file: ModelFile = serde_json::from_str(text)?;
    let mut contexts = Vec::with_capacity(file.contexts.len());
    for c in file.contexts {
        let mut table = BTreeMap::new();
        for (key, value) in &c.table {
            let tuple = parse_key(key)?;
            let p = parse_rational(value).map_err(|e| ModelError::Parse(e.to_string()))?;
            if table.insert(tuple, p).is_some() {
                return Err(ModelError::Parse(format!("duplicate tuple key `{key}`")));
            }
        }
        contexts.push(Context { measurements: c.measurements, orientation: c.orientation, table });
    }
    Ok(EmpiricalModel {
        label: file.label,
        measurements: file.measurements,
        contexts,
        possibilistic: file.possibilistic,
    })
}

/// Parses and validates a model.
pub fn parse_model(text: &str) -> Result<EmpiricalModel, ModelError> {
    let model = parse_model_unchecked(text)?;
    let report = validate(&model);
    if report.is_empty() {
        Ok(model)
    } else {
        Err(ModelError::Invalid(report))
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EmpiricalModel, ModelError> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
    parse_model(&text)
}

pub fn model_to_json(model: &EmpiricalModel) -> String {
    let file = ModelFile {
        label: model.label.clone(),
        possibilistic: model.possibilistic,
        measurements: model.measurements.clone(),
        contexts: model
            .contexts
            .iter()
            .map(|c| ContextFile {
                measurements: c.measurements.clone(),
                orientation: c.orientation.clone(),
                table: c.table.iter().map(|(t, p)| (format_key(t), format_rational(p))).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("model serialization is infallible")
}

pub fn save_model(model: &EmpiricalModel, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let path = path.as_ref();
    std::fs::write(path, model_to_json(model) + "\n")
        .map_err(|source| ModelError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn parses_the_documented_example() {
        let text = r#"{
          "label": "adopt_boxer",
          "measurements": [
            {"name": "adopt", "outcomes": ["literal", "figurative"]},
            {"name": "boxer", "outcomes": ["boxing", "dog"]}
          ],
          "contexts": [
            {"measurements": ["adopt", "boxer"], "orientation": "verb-object",
             "table": {"0,1": "29/30", "1,0": "1/30"}},
            {"measurements": ["adopt", "boxer"], "orientation": "subject-verb",
             "table": {"0,0": "1/4", "1,1": "3/4"}}
          ]
        }"#;
        let m = parse_model(text).unwrap();
        assert_eq!(m.contexts.len(), 2);
        assert_eq!(m.contexts[0].probability(&[0, 1]), ratio(29, 30));
        assert_eq!(m.contexts[0].probability(&[0, 0]), ratio(0, 1));
        assert_eq!(m.contexts[1].orientation, "subject-verb");
        assert!(!m.possibilistic);
    }

    #[test]
    fn rejects_bad_keys_and_values() {
        let base = |key: &str, val: &str| {
            format!(
                r#"{{"label":"x","measurements":[{{"name":"a","outcomes":["0","1"]}}],
                "contexts":[{{"measurements":["a"],"table":{{"{key}":"{val}"}}}}]}}"#
            )
        };
        assert!(matches!(parse_model(&base("0", "0.5")), Err(ModelError::Parse(_))));
        assert!(matches!(parse_model(&base("x", "1")), Err(ModelError::Parse(_))));
        assert!(matches!(parse_model("{not json"), Err(ModelError::Json(_))));
        match parse_model(&base("0", "9/10")) {
            Err(ModelError::Invalid(r)) => {
                assert!(r.to_string().contains("distribution does not sum to 1"))
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }
}
