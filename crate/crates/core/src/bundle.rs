//! Bundle diagrams as Graphviz DOT.
//!
//! Base vertices are measurements, base edges are contexts, and each
//! measurement's outcomes form a cluster (its fiber). Support tuples become
//! edges between fibers. Possible sections that extend to no consistent
//! global assignment are drawn red.
//!
//! Oriented contexts are drawn as directed base edges from the first listed
//! measurement to the second. An orientation whose last role is `verb`
//! (for example `subject-verb`) points the other way: datasets list the verb
//! first, and in those phrases the verb comes second.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::model::{support_of, EmpiricalModel};
use crate::sheaf::{check_logical_contextuality, check_possibilistic_signalling, SheafError};

#[derive(Debug, thiserror::Error)]
pub enum BundleError {
    #[error("model has no contexts; nothing to draw")]
    Empty,
    #[error("context `{context}` has {arity} measurements; bundle diagrams need exactly 2")]
    Arity { context: String, arity: usize },
    #[error(transparent)]
    Sheaf(#[from] SheafError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleDiagram {
    pub dot: String,
    /// Set when the model is possibilistically signalling and no sections
    /// could be marked.
    pub notice: Option<String>,
    /// `(context index, support tuple)` pairs drawn red.
    pub marked: BTreeSet<(usize, Vec<usize>)>,
}

/// Quotes a DOT identifier.
pub fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for ch in text.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn reversed(orientation: &str) -> bool {
    orientation.rsplit('-').next() == Some("verb") && orientation.contains('-')
}

pub fn bundle_dot(model: &EmpiricalModel, cap: u64) -> Result<BundleDiagram, BundleError> {
    if model.contexts.is_empty() {
        return Err(BundleError::Empty);
    }
    if let Some(ctx) = model.contexts.iter().find(|c| c.measurements.len() != 2) {
        return Err(BundleError::Arity { context: ctx.label(), arity: ctx.measurements.len() });
    }

    let poss = support_of(model);
    let (marked, notice) = if check_possibilistic_signalling(&poss).is_possibilistically_signalling {
        (
            BTreeSet::new(),
            Some(
                "model is possibilistically signalling; contextuality cannot be judged, no sections marked".to_string(),
            ),
        )
    } else {
        let report = check_logical_contextuality(&poss, cap)?;
        let marked = report.non_extendable_sections.iter().map(|s| (s.context_index, s.tuple())).collect();
        (marked, None)
    };

    let mut dot = String::new();
    let _ = writeln!(dot, "digraph {} {{", quote(&model.label));
    let _ = writeln!(dot, "  compound=true;");
    let _ = writeln!(dot, "  node [fontname=\"Helvetica\"];");
    let _ = writeln!(dot, "  edge [fontname=\"Helvetica\"];");

    for (i, m) in model.measurements.iter().enumerate() {
        let _ = writeln!(dot, "  subgraph {} {{", quote(&format!("cluster_{i}")));
        let _ = writeln!(dot, "    label={};", quote(&m.name));
        for (o, label) in m.outcomes.iter().enumerate() {
            let _ = writeln!(dot, "    {} [label={}];", quote(&format!("{}/{o}", m.name)), quote(label));
        }
        let _ = writeln!(dot, "  }}");
    }

    for m in &model.measurements {
        let _ = writeln!(dot, "  {} [label={}, shape=box];", quote(&format!("base/{}", m.name)), quote(&m.name));
    }

    for ctx in &model.contexts {
        let (a, b) = (&ctx.measurements[0], &ctx.measurements[1]);
        let mut attrs = Vec::new();
        if ctx.orientation.is_empty() {
            attrs.push("dir=none".to_string());
        } else {
            attrs.push(format!("label={}", quote(&ctx.orientation)));
            if reversed(&ctx.orientation) {
                attrs.push("dir=back".to_string());
            }
        }
        let _ = writeln!(
            dot,
            "  {} -> {} [{}];",
            quote(&format!("base/{a}")),
            quote(&format!("base/{b}")),
            attrs.join(", ")
        );
    }

    for (ci, ctx) in model.contexts.iter().enumerate() {
        let (a, b) = (&ctx.measurements[0], &ctx.measurements[1]);
        for tuple in ctx.support() {
            let mut attrs = vec!["dir=none".to_string(), format!("tooltip={}", quote(&ctx.label()))];
            if marked.contains(&(ci, tuple.clone())) {
                attrs.push("color=red".into());
                attrs.push("penwidth=2".into());
            }
            let _ = writeln!(
                dot,
                "  {} -> {} [{}];",
                quote(&format!("{a}/{}", tuple[0])),
                quote(&format!("{b}/{}", tuple[1])),
                attrs.join(", ")
            );
        }
    }
    dot.push_str("}\n");

    Ok(BundleDiagram { dot, notice, marked })
}
