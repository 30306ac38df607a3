//! Scalar gap metrics and indicator scores.
//!
//! Every function here maps gender-disaggregated levels (or a single share,
//! ratio or coverage value) to a score. Scores keep full `f64` precision;
//! rounding is a presentation concern.
//!
//! Two families are provided:
//!
//! - the IGEI family (`gap_metric`, `correction_coefficient`,
//!   `score_standard` and the share/ratio/capped variants), scored on 0..=100;
//! - the classic GEI family (`gei_gap_metric`, `gei_correction_coefficient`,
//!   `score_gei`), scored on 1..=100 and kept for comparison.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GapError {
    #[error("gap undefined: both levels are zero")]
    Degenerate,
    #[error("{name} must be non-negative and finite, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("{name} must be strictly positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("level {level} exceeds reference maximum {reference}")]
    InconsistentReference { level: f64, reference: f64 },
    #[error("value {0} is not a rate in [0, 1]")]
    NotARate(f64),
    #[error("value {0} is not a share in [0, 1]")]
    NotAShare(f64),
    #[error("correction coefficient {0} is outside [0, 1]")]
    BadCorrection(f64),
    #[error("GEI gap {0} exceeds 1: women's level is more than twice the total level")]
    OutOfModel(f64),
}

/// Women / men / total levels for one territory and indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenderPair {
    pub x_w: f64,
    pub x_m: f64,
    pub x_a: Option<f64>,
}

impl GenderPair {
    pub fn new(x_w: f64, x_m: f64, x_a: Option<f64>) -> Result<Self, GapError> {
        non_negative("x_w", x_w)?;
        non_negative("x_m", x_m)?;
        if let Some(a) = x_a {
            non_negative("x_a", a)?;
        }
        Ok(Self { x_w, x_m, x_a })
    }

    /// Applies `invert_polarity` to every component.
    pub fn inverted(&self) -> Result<Self, GapError> {
        Ok(Self {
            x_w: invert_polarity(self.x_w)?,
            x_m: invert_polarity(self.x_m)?,
            x_a: self.x_a.map(invert_polarity).transpose()?,
        })
    }
}

/// How an indicator turns its raw observation into a score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    /// Full gender pair scored with the level-corrected gap.
    Standard,
    /// Women's share of a two-way split (seats, businesses).
    Share,
    /// Ratio of two women's rates; balanced at 1.
    Ratio,
    /// Coverage ratio capped at 1, no gap and no correction.
    Capped,
}

impl MetricKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::Standard => "standard",
            MetricKind::Share => "share",
            MetricKind::Ratio => "ratio",
            MetricKind::Capped => "capped",
        }
    }
}

impl std::str::FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "standard" => Ok(MetricKind::Standard),
            "share" => Ok(MetricKind::Share),
            "ratio" => Ok(MetricKind::Ratio),
            "capped" => Ok(MetricKind::Capped),
            other => Err(format!("unknown metric kind `{other}`")),
        }
    }
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<f64, GapError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(GapError::Negative { name, value })
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64, GapError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(GapError::NotPositive { name, value })
    }
}

fn unit_correction(alpha: f64) -> Result<f64, GapError> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(alpha)
    } else {
        Err(GapError::BadCorrection(alpha))
    }
}

/// Symmetric gender gap `|x_w - x_m| / (x_w + x_m)`, always in `[0, 1]`.
pub fn gap_metric(x_w: f64, x_m: f64) -> Result<f64, GapError> {
    non_negative("x_w", x_w)?;
    non_negative("x_m", x_m)?;
    let total = x_w + x_m;
    if total == 0.0 {
        return Err(GapError::Degenerate);
    }
    Ok((x_w - x_m).abs() / total)
}

/// Classic GEI gap `|1 - x_w / x_a|`.
///
/// The result is not clamped. Values above 1 fall outside the GEI model and
/// are rejected by [`score_gei`].
pub fn gei_gap_metric(x_w: f64, x_a: f64) -> Result<f64, GapError> {
    non_negative("x_w", x_w)?;
    positive("x_a", x_a)?;
    Ok((1.0 - x_w / x_a).abs())
}

fn check_reference(x_a: f64, x_ref: f64) -> Result<(), GapError> {
    non_negative("x_a", x_a)?;
    positive("x_ref", x_ref)?;
    if x_a > x_ref {
        return Err(GapError::InconsistentReference {
            level: x_a,
            reference: x_ref,
        });
    }
    Ok(())
}

/// Level correction `2 x_a / (x_ref + x_a)` where `x_ref` is the best total level.
pub fn correction_coefficient(x_a: f64, x_ref: f64) -> Result<f64, GapError> {
    check_reference(x_a, x_ref)?;
    Ok(2.0 * x_a / (x_ref + x_a))
}

/// GEI level correction `x_a / x_ref`.
pub fn gei_correction_coefficient(x_a: f64, x_ref: f64) -> Result<f64, GapError> {
    check_reference(x_a, x_ref)?;
    Ok(x_a / x_ref)
}

/// `alpha * (1 - gap) * 100` for a full gender pair.
pub fn score_standard(x_w: f64, x_m: f64, x_a: f64, x_ref: f64) -> Result<f64, GapError> {
    let gap = gap_metric(x_w, x_m)?;
    let alpha = correction_coefficient(x_a, x_ref)?;
    Ok(alpha * (1.0 - gap) * 100.0)
}

/// GEI score `1 + alpha_gei * (1 - gap_gei) * 99`.
pub fn score_gei(x_w: f64, x_a: f64, x_ref: f64) -> Result<f64, GapError> {
    let gap = gei_gap_metric(x_w, x_a)?;
    if gap > 1.0 {
        return Err(GapError::OutOfModel(gap));
    }
    let alpha = gei_correction_coefficient(x_a, x_ref)?;
    Ok(1.0 + alpha * (1.0 - gap) * 99.0)
}

/// `1 - x` for negative-polarity rates.
pub fn invert_polarity(x: f64) -> Result<f64, GapError> {
    if (0.0..=1.0).contains(&x) {
        Ok(1.0 - x)
    } else {
        Err(GapError::NotARate(x))
    }
}

/// Score for a women's share of a two-way split. Without a correction the
/// coefficient is 1.
pub fn score_share(share: f64, alpha: Option<f64>) -> Result<f64, GapError> {
    if !(0.0..=1.0).contains(&share) {
        return Err(GapError::NotAShare(share));
    }
    let alpha = alpha.map(unit_correction).transpose()?.unwrap_or(1.0);
    Ok(alpha * (1.0 - (1.0 - 2.0 * share).abs()) * 100.0)
}

/// Score for a ratio of two rates: `alpha * (1 - |r - 1| / (r + 1)) * 100`.
pub fn score_ratio(ratio: f64, alpha: f64) -> Result<f64, GapError> {
    positive("ratio", ratio)?;
    let alpha = unit_correction(alpha)?;
    Ok(alpha * (1.0 - (ratio - 1.0).abs() / (ratio + 1.0)) * 100.0)
}

/// `min(1, x) * 100`.
pub fn score_capped(x: f64) -> Result<f64, GapError> {
    non_negative("coverage", x)?;
    Ok(x.min(1.0) * 100.0)
}
