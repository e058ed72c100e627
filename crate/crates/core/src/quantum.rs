//! Empirical models from pure states and local projective measurements.
//!
//! `P(o₁…oₖ) = ⟨Ψ| P₁(o₁) ⊗ … ⊗ Pₖ(oₖ) |Ψ⟩`. Arithmetic is `f64`; each
//! table is converted to exact rationals at the end.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::model::{Context, EmpiricalModel, Measurement};
use crate::rational::Rational;

pub const TOLERANCE: f64 = 1e-9;
pub const MAX_TOTAL_DIMENSION: usize = 64;
pub const MAX_DENOMINATOR: u64 = 1_000_000;
const DECIMAL_DENOMINATOR: u64 = 1_000_000_000;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum QuantumError {
    #[error("party dimensions must be positive")]
    ZeroDimension,
    #[error("total dimension {0} exceeds the cap of {MAX_TOTAL_DIMENSION}")]
    TooLarge(usize),
    #[error("expected {expected} amplitudes, found {found}")]
    AmplitudeCount { expected: usize, found: usize },
    #[error("state has squared norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("measurement `{measurement}`: {detail}")]
    Measurement { measurement: String, detail: String },
    #[error("{parties} parties declared but dimensions given for {dims}")]
    PartyCount { parties: usize, dims: usize },
    #[error("duplicate measurement name `{0}`")]
    DuplicateName(String),
    #[error("context {index}: {detail}")]
    Context { index: usize, detail: String },
    #[error("no contexts")]
    NoContexts,
    #[error("context `{context}` sums to {total}, expected 1")]
    TableSum { context: String, total: f64 },
    #[error("invalid scenario JSON: {0}")]
    Json(String),
}

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl Matrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::zero(); dim * dim];
        (0..dim).for_each(|i| data[i * dim + i] = Complex64::one());
        Matrix { dim, data }
    }

    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let d = self.dim;
        let mut data = vec![Complex64::zero(); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.at(r, k);
                if a == Complex64::zero() {
                    continue;
                }
                for c in 0..d {
                    data[r * d + c] += a * other.at(k, c);
                }
            }
        }
        Matrix { dim: d, data }
    }

    pub fn adjoint(&self) -> Matrix {
        let d = self.dim;
        let data = (0..d * d).map(|i| self.at(i % d, i / d).conj()).collect();
        Matrix { dim: d, data }
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn distance(&self, other: &Matrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim).map(|r| (0..self.dim).map(|c| self.at(r, c) * v[c]).sum()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub party_dims: Vec<usize>,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(party_dims: Vec<usize>, amplitudes: Vec<Complex64>) -> Result<Self, QuantumError> {
        if party_dims.is_empty() || party_dims.contains(&0) {
            return Err(QuantumError::ZeroDimension);
        }
        let total = party_dims.iter().try_fold(1usize, |acc, d| acc.checked_mul(*d)).unwrap_or(usize::MAX);
        if total > MAX_TOTAL_DIMENSION {
            return Err(QuantumError::TooLarge(total));
        }
        if amplitudes.len() != total {
            return Err(QuantumError::AmplitudeCount { expected: total, found: amplitudes.len() });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(QuantumError::NotNormalized(norm));
        }
        Ok(StateVector { party_dims, amplitudes })
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    pub name: String,
    pub outcomes: Vec<String>,
    pub projectors: Vec<Matrix>,
}

impl ProjectiveMeasurement {
    /// Checks each projector is Hermitian and idempotent, distinct projectors
    /// are orthogonal and together they sum to the identity on `dim`.
    pub fn validate(&self, dim: usize) -> Result<(), QuantumError> {
        let fail = |detail: String| QuantumError::Measurement { measurement: self.name.clone(), detail };
        if self.projectors.is_empty() {
            return Err(fail("no projectors".into()));
        }
        if self.outcomes.len() != self.projectors.len() {
            return Err(fail(format!(
                "{} outcome labels for {} projectors",
                self.outcomes.len(),
                self.projectors.len()
            )));
        }
        for (o, p) in self.projectors.iter().enumerate() {
            if p.dim != dim || p.data.len() != dim * dim {
                return Err(fail(format!("projector {o} is not {dim}x{dim}")));
            }
            if p.distance(&p.adjoint()) > TOLERANCE {
                return Err(fail(format!("projector {o} is not Hermitian")));
            }
            if p.distance(&p.mul(p)) > TOLERANCE {
                return Err(fail(format!("projector {o} is not idempotent")));
            }
        }
        let zero = Matrix { dim, data: vec![Complex64::zero(); dim * dim] };
        for a in 0..self.projectors.len() {
            for b in a + 1..self.projectors.len() {
                if self.projectors[a].mul(&self.projectors[b]).distance(&zero) > TOLERANCE {
                    return Err(fail(format!("projectors {a} and {b} are not orthogonal")));
                }
            }
        }
        let mut sum = zero;
        for p in &self.projectors {
            sum.data.iter_mut().zip(&p.data).for_each(|(s, x)| *s += x);
        }
        if sum.distance(&Matrix::identity(dim)) > TOLERANCE {
            return Err(fail("projectors do not sum to the identity".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumScenario {
    pub label: String,
    pub state: StateVector,
    /// Measurements available to each party.
    pub parties: Vec<Vec<ProjectiveMeasurement>>,
    /// One measurement name per party.
    pub contexts: Vec<Vec<String>>,
}

#[derive(Deserialize, Serialize)]
struct MeasurementFile {
    name: String,
    outcomes: Vec<String>,
    projectors: Vec<Vec<[f64; 2]>>,
}

#[derive(Deserialize, Serialize)]
struct ScenarioFile {
    label: String,
    party_dims: Vec<usize>,
    state: Vec<[f64; 2]>,
    parties: Vec<Vec<MeasurementFile>>,
    contexts: Vec<Vec<String>>,
}

fn complex(pair: &[f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

impl QuantumScenario {
    pub fn validate(&self) -> Result<(), QuantumError> {
        let dims = &self.state.party_dims;
        if self.parties.len() != dims.len() {
            return Err(QuantumError::PartyCount { parties: self.parties.len(), dims: dims.len() });
        }
        let mut seen = std::collections::BTreeSet::new();
        for (party, &d) in self.parties.iter().zip(dims) {
            for m in party {
                if !seen.insert(m.name.as_str()) {
                    return Err(QuantumError::DuplicateName(m.name.clone()));
                }
                m.validate(d)?;
            }
        }
        if self.contexts.is_empty() {
            return Err(QuantumError::NoContexts);
        }
        for (index, ctx) in self.contexts.iter().enumerate() {
            if ctx.len() != self.parties.len() {
                return Err(QuantumError::Context {
                    index,
                    detail: format!("names {} measurements for {} parties", ctx.len(), self.parties.len()),
                });
            }
            for (party, name) in self.parties.iter().zip(ctx) {
                if !party.iter().any(|m| &m.name == name) {
                    return Err(QuantumError::Context {
                        index,
                        detail: format!("`{name}` is not a measurement of its party"),
                    });
                }
            }
        }
        Ok(())
    }

    fn find(&self, party: usize, name: &str) -> &ProjectiveMeasurement {
        self.parties[party].iter().find(|m| m.name == name).expect("validated scenario")
    }
}

pub fn parse_scenario(text: &str) -> Result<QuantumScenario, QuantumError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| QuantumError::Json(e.to_string()))?;
    let state = StateVector::new(file.party_dims.clone(), file.state.iter().map(complex).collect())?;
    let parties = file
        .parties
        .into_iter()
        .enumerate()
        .map(|(i, party)| {
            let dim = file.party_dims.get(i).copied().unwrap_or(0);
            party
                .into_iter()
                .map(|m| ProjectiveMeasurement {
                    name: m.name,
                    outcomes: m.outcomes,
                    projectors: m
                        .projectors
                        .iter()
                        .map(|p| Matrix { dim, data: p.iter().map(complex).collect() })
                        .collect(),
                })
                .collect()
        })
        .collect();
    let scenario = QuantumScenario { label: file.label, state, parties, contexts: file.contexts };
    scenario.validate()?;
    Ok(scenario)
}

pub fn scenario_to_json(scenario: &QuantumScenario) -> String {
    let pair = |c: &Complex64| [c.re, c.im];
    let file = ScenarioFile {
        label: scenario.label.clone(),
        party_dims: scenario.state.party_dims.clone(),
        state: scenario.state.amplitudes.iter().map(pair).collect(),
        parties: scenario
            .parties
            .iter()
            .map(|party| {
                party
                    .iter()
                    .map(|m| MeasurementFile {
                        name: m.name.clone(),
                        outcomes: m.outcomes.clone(),
                        projectors: m.projectors.iter().map(|p| p.data.iter().map(pair).collect()).collect(),
                    })
                    .collect()
            })
            .collect(),
        contexts: scenario.contexts.clone(),
    };
    serde_json::to_string_pretty(&file).expect("scenario serializes")
}

/// Born-rule probability of every outcome tuple of one context, with tuples
/// in lexicographic order (last party fastest).
pub fn born_probabilities(state: &StateVector, measurements: &[&ProjectiveMeasurement]) -> Vec<(Vec<usize>, f64)> {
    let dims = &state.party_dims;
    let counts: Vec<usize> = measurements.iter().map(|m| m.projectors.len()).collect();
    let mut out = Vec::new();
    let mut tuple = vec![0usize; measurements.len()];
    loop {
        // Apply each local projector in turn to the relevant tensor factor.
        let mut v = state.amplitudes.clone();
        let mut stride = state.dimension();
        for (party, &d) in dims.iter().enumerate() {
            stride /= d;
            let p = &measurements[party].projectors[tuple[party]];
            let mut next = vec![Complex64::zero(); v.len()];
            for (idx, slot) in next.iter_mut().enumerate() {
                let row = (idx / stride) % d;
                let base = idx - row * stride;
                *slot = (0..d).map(|col| p.at(row, col) * v[base + col * stride]).sum();
            }
            v = next;
        }
        let prob: f64 = state.amplitudes.iter().zip(&v).map(|(a, b)| (a.conj() * b).re).sum();
        out.push((tuple.clone(), prob));

        let mut k = tuple.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            tuple[k] += 1;
            if tuple[k] < counts[k] {
                break;
            }
            tuple[k] = 0;
        }
    }
}

/// Best rational approximation with denominator at most `max_den`, by
/// continued fractions; `None` when it is farther than `tol` from `x`.
pub fn rationalize(x: f64, max_den: u64, tol: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    let mut best: Option<(i128, i128)> = None;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > max_den as i128 {
            break;
        }
        best = Some((h2, k2));
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-15 || ((h2 as f64 / k2 as f64) - x).abs() < f64::EPSILON * x.abs().max(1.0) {
            break;
        }
        r = 1.0 / frac;
    }
    let (h, k) = best?;
    ((h as f64 / k as f64 - x).abs() <= tol).then(|| Rational::new(BigInt::from(h), BigInt::from(k)))
}

/// Converts a distribution to exact rationals summing to 1: continued
/// fractions first, decimal fractions with denominator 10⁹ when any entry has
/// no close small-denominator approximation. Any residual is absorbed by the
/// largest entry.
pub fn rationalize_distribution(values: &[f64]) -> Vec<Rational> {
    let small: Option<Vec<Rational>> =
        values.iter().map(|&v| rationalize(v.max(0.0), MAX_DENOMINATOR, TOLERANCE)).collect();
    let mut out = small.unwrap_or_else(|| {
        values
            .iter()
            .map(|&v| {
                let scaled = (v.max(0.0) * DECIMAL_DENOMINATOR as f64).round();
                Rational::new(BigInt::from(scaled as i64), BigInt::from(DECIMAL_DENOMINATOR))
            })
            .collect()
    });
    let total: Rational = out.iter().sum();
    let residual = Rational::one() - total;
    if !residual.is_zero() {
        if let Some(i) = (0..out.len()).max_by(|&a, &b| out[a].cmp(&out[b]).then(b.cmp(&a))) {
            out[i] += residual;
            if out[i].is_negative() {
                out[i] = Rational::zero();
            }
        }
    }
    out
}

/// Born-rule empirical model of a validated scenario. Measurements are named
/// as in the scenario; zero-probability tuples are omitted.
pub fn born_model(scenario: &QuantumScenario) -> Result<EmpiricalModel, QuantumError> {
    scenario.validate()?;
    let measurements: Vec<Measurement> = scenario
        .parties
        .iter()
        .flatten()
        .map(|m| Measurement { name: m.name.clone(), outcomes: m.outcomes.clone() })
        .collect();
    let mut contexts = Vec::with_capacity(scenario.contexts.len());
    for ctx in &scenario.contexts {
        let chosen: Vec<&ProjectiveMeasurement> =
            ctx.iter().enumerate().map(|(party, name)| scenario.find(party, name)).collect();
        let raw = born_probabilities(&scenario.state, &chosen);
        let total: f64 = raw.iter().map(|(_, p)| p).sum();
        let names: Vec<&str> = ctx.iter().map(String::as_str).collect();
        if (total - 1.0).abs() > TOLERANCE {
            return Err(QuantumError::TableSum { context: names.join(" "), total });
        }
        let values: Vec<f64> = raw.iter().map(|(_, p)| *p).collect();
        let exact = rationalize_distribution(&values);
        let table = raw.into_iter().zip(exact).filter(|(_, p)| !p.is_zero()).map(|((t, _), p)| (t, p));
        contexts.push(Context::new(&names, table));
    }
    Ok(EmpiricalModel::new(scenario.label.clone(), measurements, contexts))
}

/// Rounded value of a rational, for display.
pub fn approx(value: &Rational) -> f64 {
    value.numer().to_f64().unwrap_or(f64::NAN) / value.denom().to_f64().unwrap_or(f64::NAN)
}
