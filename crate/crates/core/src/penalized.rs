//! Weighted means and the penalized arithmetic mean.
//!
//! For a weighted sequence with mean `m`, population variance `v` and range
//! `r = max - min`, the penalized means are
//!
//! ```text
//! positive polarity: m - v / (2r)
//! negative polarity: m + v / (2r)
//! ```
//!
//! and both equal `m` for a constant sequence. The result never leaves
//! `[min, max]`, which is what makes it usable as a non-compensatory
//! aggregator on 0..=100 scores.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sums of weights must hit 1 within this tolerance.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Ranges below this are treated as constant sequences.
pub const CONSTANT_RANGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregationError {
    #[error("sequence is empty")]
    Empty,
    #[error("{values} values but {weights} weights")]
    LengthMismatch { values: usize, weights: usize },
    #[error("weight {index} is negative or not finite: {weight}")]
    BadWeight { index: usize, weight: f64 },
    #[error("weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("value {index} is not finite: {value}")]
    NonFinite { index: usize, value: f64 },
    #[error("geometric mean needs strictly positive values, value {index} is {value}")]
    NonPositive { index: usize, value: f64 },
    #[error("bounds [{a}, {b}] must satisfy 0 < a <= min(x) = {min} and max(x) = {max} <= b")]
    Bounds { a: f64, b: f64, min: f64, max: f64 },
}

/// Direction of the variance penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flipped(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

/// Finite values with non-negative weights summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSequence {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedSequence {
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self, AggregationError> {
        if values.is_empty() {
            return Err(AggregationError::Empty);
        }
        if values.len() != weights.len() {
            return Err(AggregationError::LengthMismatch {
                values: values.len(),
                weights: weights.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(AggregationError::NonFinite { index, value });
        }
        if let Some((index, &weight)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w >= 0.0))
        {
            return Err(AggregationError::BadWeight { index, weight });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(AggregationError::WeightSum(total));
        }
        Ok(Self { values, weights })
    }

    /// Equal weights `1/n`.
    pub fn uniform(values: Vec<f64>) -> Result<Self, AggregationError> {
        let n = values.len();
        if n == 0 {
            return Err(AggregationError::Empty);
        }
        Self::new(values, vec![1.0 / n as f64; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn range(&self) -> f64 {
        self.max() - self.min()
    }

    fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.weights.iter().copied())
    }
}

/// `sum p_k x_k`.
pub fn weighted_mean(seq: &WeightedSequence) -> f64 {
    seq.pairs().map(|(x, p)| p * x).sum()
}

/// Weighted population variance `sum p_k (x_k - mean)^2`.
pub fn weighted_variance(seq: &WeightedSequence) -> f64 {
    let mean = weighted_mean(seq);
    seq.pairs().map(|(x, p)| p * (x - mean).powi(2)).sum()
}

/// Penalized arithmetic mean for the given polarity.
pub fn penalized_mean(seq: &WeightedSequence, polarity: Polarity) -> f64 {
    let mean = weighted_mean(seq);
    let range = seq.range();
    if range < CONSTANT_RANGE_TOLERANCE {
        return mean;
    }
    let penalty = weighted_variance(seq) / (2.0 * range);
    match polarity {
        Polarity::Positive => mean - penalty,
        Polarity::Negative => mean + penalty,
    }
}

/// `prod x_k^p_k`, computed in log space.
pub fn geometric_mean(seq: &WeightedSequence) -> Result<f64, AggregationError> {
    if let Some((index, &value)) = seq.values.iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(AggregationError::NonPositive { index, value });
    }
    Ok(seq.pairs().map(|(x, p)| p * x.ln()).sum::<f64>().exp())
}

/// Lower and upper bounds on `mean - geometric mean` for values in `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanGapBounds {
    pub lower: f64,
    pub upper: f64,
}

impl MeanGapBounds {
    pub fn contains(&self, gap: f64) -> bool {
        self.lower <= gap && gap <= self.upper
    }
}

/// `(var / 2b, var / 2a)`, bracketing `mean - geometric_mean` when every value
/// lies in `[a, b]` with `a > 0`.
pub fn cartwright_field_bounds(
    seq: &WeightedSequence,
    a: f64,
    b: f64,
) -> Result<MeanGapBounds, AggregationError> {
    let (min, max) = (seq.min(), seq.max());
    if !(a > 0.0 && a <= min && max <= b) {
        return Err(AggregationError::Bounds { a, b, min, max });
    }
    let var = weighted_variance(seq);
    Ok(MeanGapBounds {
        lower: var / (2.0 * b),
        upper: var / (2.0 * a),
    })
}
