//! Classification-error upper bounds induced by staged relevance values,
//! and rate-sweep curves for the binary model.

use crate::analytic::{binary_max_relevance, BinaryModel};
use crate::error::{Error, Result};

/// Source entropy plus the per-stage optimal relevances the bound is
/// evaluated at.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierBoundInput {
    source_entropy: f64,
    relevances: Vec<f64>,
}

impl ClassifierBoundInput {
    pub fn new(source_entropy: f64, relevances: Vec<f64>) -> Result<Self> {
        if !(source_entropy >= 0.0) {
            return Err(Error::OutOfRange(format!(
                "source entropy must be nonnegative, got {source_entropy}"
            )));
        }
        if relevances.is_empty() {
            return Err(Error::DimensionMismatch(
                "need at least one stage relevance".into(),
            ));
        }
        if let Some(&bad) = relevances
            .iter()
            .find(|&&d| !(0.0..=source_entropy + 1e-12).contains(&d))
        {
            return Err(Error::OutOfRange(format!(
                "relevance {bad} outside [0, H(X) = {source_entropy}]"
            )));
        }
        if relevances.windows(2).any(|w| w[1] < w[0] - 1e-12) {
            return Err(Error::OutOfRange(
                "relevances must be nondecreasing in the stage index".into(),
            ));
        }
        Ok(Self {
            source_entropy,
            relevances,
        })
    }

    pub fn source_entropy(&self) -> f64 {
        self.source_entropy
    }

    pub fn relevances(&self) -> &[f64] {
        &self.relevances
    }
}

/// Per-stage upper bound on the classification error probability:
/// `P_t <= 1 - 2^(Delta_t - H(X))`.
///
/// Nonincreasing in the stage index and bounded by `1 - 2^(-H(X))`.
pub fn error_upper_bound(input: &ClassifierBoundInput) -> Vec<f64> {
    input
        .relevances
        .iter()
        .map(|&d| 1.0 - (d - input.source_entropy).exp2())
        .collect()
}

/// One stage's `(sum rate, error bound)` samples over a symmetric-rate sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct StageErrorCurve {
    /// Stage index, 1-based.
    pub stage: usize,
    /// Samples sorted by sum rate; the bound decreases along the curve.
    pub samples: Vec<(f64, f64)>,
}

/// Error-bound curves for the binary model under a symmetric per-stage rate:
/// each grid rate `R` is applied at every stage (sum rate `T * R`), the
/// optimal relevances come from the binary region, and the bound follows.
///
/// Suitable for log-scale plotting of the error axis.
pub fn binary_error_curve(
    p: f64,
    stages: usize,
    symmetric_rate_grid: &[f64],
) -> Result<Vec<StageErrorCurve>> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::OutOfRange(format!(
            "crossover must lie strictly inside (0, 1/2), got {p}"
        )));
    }
    let model = BinaryModel::new(p, stages)?;
    let mut grid: Vec<f64> = symmetric_rate_grid.to_vec();
    if grid.iter().any(|&r| !(r >= 0.0)) {
        return Err(Error::OutOfRange("rates must be nonnegative".into()));
    }
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite rates"));

    let mut curves: Vec<StageErrorCurve> = (1..=stages)
        .map(|stage| StageErrorCurve {
            stage,
            samples: Vec::with_capacity(grid.len()),
        })
        .collect();
    for &rate in &grid {
        let deltas = binary_max_relevance(&model, &vec![rate; stages])?;
        let input = ClassifierBoundInput::new(1.0, deltas)?;
        let bounds = error_upper_bound(&input);
        let sum_rate = rate * stages as f64;
        for (curve, bound) in curves.iter_mut().zip(bounds) {
            curve.samples.push((sum_rate, bound));
        }
    }
    Ok(curves)
}
