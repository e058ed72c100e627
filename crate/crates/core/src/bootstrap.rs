//! Parametric bootstrap of the cyclic rank-2 verdict.
//!
//! Each resample draws per-context counts from a multinomial with the
//! model's probabilities and the planned sample size, rebuilds the empirical
//! model from the relative frequencies and reruns [`cyclic2_analyze`].
//!
//! Multinomial draws use sequential binomial conditioning over the context's
//! positive cells in tuple order: cell `i` receives
//! `Binomial(n_remaining, p_i / p_remaining)` and the last cell takes the
//! remainder. Resample `i` uses `ChaCha8Rng::seed_from_u64(seed)` switched to
//! stream `i`, so the tally does not depend on how the work is split across
//! threads.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_with::{serde_as, DisplayFromStr};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::cbd::{cyclic2_analyze, CbdError};
use crate::model::{Context, EmpiricalModel};
use crate::rational::{lcm_of_denominators, to_f64, Rational};

#[derive(Debug, thiserror::Error)]
pub enum BootstrapError {
    #[error(transparent)]
    Shape(#[from] CbdError),
    #[error("resample count must be at least 1")]
    NoResamples,
    #[error("sample size plan has {plan} entries but the model has {contexts} contexts")]
    PlanMismatch { plan: usize, contexts: usize },
    #[error("sample sizes must be positive")]
    ZeroSampleSize,
    #[error("sample size {0} does not fit in 64 bits")]
    SampleSizeOverflow(BigInt),
    #[error("confidence level {0} is not in (0, 1)")]
    Confidence(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SizeProvenance {
    InferredLcd,
    UserSupplied,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSizePlan {
    /// One count per context, in model order.
    pub sizes: Vec<u64>,
    pub provenance: SizeProvenance,
}

impl SampleSizePlan {
    pub fn user_supplied(sizes: Vec<u64>) -> Result<Self, BootstrapError> {
        if sizes.contains(&0) {
            return Err(BootstrapError::ZeroSampleSize);
        }
        Ok(SampleSizePlan { sizes, provenance: SizeProvenance::UserSupplied })
    }
}

/// Smallest per-context counts consistent with the printed fractions: the
/// least common multiple of each table's denominators.
pub fn infer_sample_sizes(model: &EmpiricalModel) -> Result<SampleSizePlan, BootstrapError> {
    let sizes = model
        .contexts
        .iter()
        .map(|ctx| {
            let l = lcm_of_denominators(ctx.table.values());
            l.to_u64().ok_or(BootstrapError::SampleSizeOverflow(l))
        })
        .collect::<Result<_, _>>()?;
    Ok(SampleSizePlan { sizes, provenance: SizeProvenance::InferredLcd })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub resamples: u64,
    pub seed: u64,
    pub confidence: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig { resamples: 10_000, seed: 0, confidence: 0.95 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub low: f64,
    pub high: f64,
    pub level: f64,
}

#[serde_as]
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub resample_count: u64,
    pub noncontextual_count: u64,
    #[serde_as(as = "DisplayFromStr")]
    pub noncontextual_fraction: Rational,
    pub confidence_interval: ConfidenceInterval,
    pub seed: u64,
    pub plan: SampleSizePlan,
}

impl BootstrapResult {
    pub fn fraction(&self) -> f64 {
        to_f64(&self.noncontextual_fraction)
    }

    /// Binomial standard error of the fraction.
    pub fn standard_error(&self) -> f64 {
        let p = self.fraction();
        (p * (1.0 - p) / self.resample_count as f64).sqrt()
    }
}

/// Wilson score interval, widened if needed so it contains `successes / n`.
pub fn wilson_interval(successes: u64, n: u64, confidence: f64) -> Result<ConfidenceInterval, BootstrapError> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(BootstrapError::Confidence(confidence));
    }
    if n == 0 {
        return Err(BootstrapError::NoResamples);
    }
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * nf)) / (1.0 + z2 / nf);
    let half = z / (1.0 + z2 / nf) * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    let low = (centre - half).clamp(0.0, 1.0).min(p);
    let high = (centre + half).clamp(0.0, 1.0).max(p);
    Ok(ConfidenceInterval { low, high, level: confidence })
}

/// Multinomial counts for the positive cells of `table`, in key order.
pub fn draw_counts(table: &BTreeMap<Vec<usize>, Rational>, n: u64, rng: &mut ChaCha8Rng) -> Vec<(Vec<usize>, u64)> {
    let cells: Vec<(&Vec<usize>, f64)> =
        table.iter().filter(|(_, p)| !p.is_zero()).map(|(t, p)| (t, to_f64(p))).collect();
    let mut remaining_n = n;
    let mut remaining_p: f64 = cells.iter().map(|(_, p)| p).sum();
    let mut out = Vec::with_capacity(cells.len());
    for (i, (tuple, p)) in cells.iter().enumerate() {
        let k = if i + 1 == cells.len() {
            remaining_n
        } else if remaining_n == 0 || remaining_p <= 0.0 {
            0
        } else {
            let q = (p / remaining_p).clamp(0.0, 1.0);
            Binomial::new(remaining_n, q).expect("probability in [0, 1]").sample(rng)
        };
        remaining_n -= k;
        remaining_p -= p;
        out.push(((*tuple).clone(), k));
    }
    out
}

/// Relative-frequency model of one resample.
pub fn resample_model(model: &EmpiricalModel, plan: &SampleSizePlan, rng: &mut ChaCha8Rng) -> EmpiricalModel {
    let contexts = model
        .contexts
        .iter()
        .zip(&plan.sizes)
        .map(|(ctx, &n)| {
            let table = draw_counts(&ctx.table, n, rng)
                .into_iter()
                .filter(|(_, k)| *k > 0)
                .map(|(t, k)| (t, Rational::new(BigInt::from(k), BigInt::from(n))))
                .collect();
            Context { measurements: ctx.measurements.clone(), orientation: ctx.orientation.clone(), table }
        })
        .collect();
    EmpiricalModel { contexts, ..model.clone() }
}

pub fn resample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Fraction of resamples whose cyclic rank-2 verdict is non-contextual
/// (`d_value ≤ 0`).
pub fn bootstrap_noncontextuality(
    model: &EmpiricalModel,
    plan: &SampleSizePlan,
    config: &BootstrapConfig,
) -> Result<BootstrapResult, BootstrapError> {
    cyclic2_analyze(model)?;
    if config.resamples == 0 {
        return Err(BootstrapError::NoResamples);
    }
    if plan.sizes.len() != model.contexts.len() {
        return Err(BootstrapError::PlanMismatch { plan: plan.sizes.len(), contexts: model.contexts.len() });
    }
    if plan.sizes.contains(&0) {
        return Err(BootstrapError::ZeroSampleSize);
    }
    // Fail on a bad level before doing the work.
    wilson_interval(0, 1, config.confidence)?;

    let noncontextual = (0..config.resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = resample_rng(config.seed, i);
            let resampled = resample_model(model, plan, &mut rng);
            let report = cyclic2_analyze(&resampled).expect("resampling preserves the shape");
            u64::from(!report.contextual)
        })
        .sum::<u64>();

    Ok(BootstrapResult {
        resample_count: config.resamples,
        noncontextual_count: noncontextual,
        noncontextual_fraction: Rational::new(BigInt::from(noncontextual), BigInt::from(config.resamples)),
        confidence_interval: wilson_interval(noncontextual, config.resamples, config.confidence)?,
        seed: config.seed,
        plan: plan.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Measurement;
    use crate::rational::{integer, ratio};

    #[test]
    fn wilson_matches_textbook_value() {
        // 81 of 263 at 95%: (0.2553, 0.3662)
        let ci = wilson_interval(81, 263, 0.95).unwrap();
        assert!((ci.low - 0.2553).abs() < 5e-4, "{ci:?}");
        assert!((ci.high - 0.3662).abs() < 5e-4, "{ci:?}");
    }

    #[test]
    fn wilson_edges_contain_estimate() {
        let all = wilson_interval(10, 10, 0.95).unwrap();
        assert_eq!(all.high, 1.0);
        let none = wilson_interval(0, 10, 0.95).unwrap();
        assert_eq!(none.low, 0.0);
        assert!(wilson_interval(1, 2, 1.0).is_err());
    }

    #[test]
    fn draws_sum_to_n() {
        let table: BTreeMap<Vec<usize>, Rational> = [
            (vec![0, 0], ratio(2, 5)),
            (vec![0, 1], ratio(1, 10)),
            (vec![1, 0], integer(0)),
            (vec![1, 1], ratio(1, 2)),
        ]
        .into_iter()
        .collect();
        for i in 0..50 {
            let mut rng = resample_rng(3, i);
            let counts = draw_counts(&table, 10, &mut rng);
            assert_eq!(counts.len(), 3);
            assert_eq!(counts.iter().map(|(_, k)| k).sum::<u64>(), 10);
        }
    }

    #[test]
    fn inferred_plan_for_point_mass() {
        let m = EmpiricalModel::new(
            "pm",
            vec![Measurement::indexed("a", 2)],
            vec![Context::new(&["a"], [(vec![1], integer(1))])],
        );
        assert_eq!(infer_sample_sizes(&m).unwrap().sizes, vec![1]);
    }

    #[test]
    fn zero_sizes_rejected() {
        assert!(matches!(SampleSizePlan::user_supplied(vec![3, 0]), Err(BootstrapError::ZeroSampleSize)));
    }
}
