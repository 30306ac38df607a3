//! Reference resolution, per-indicator dispatch and hierarchical aggregation.
//!
//! Scoring runs in two phases. [`resolve_references`] needs the whole dataset
//! because every correcting coefficient compares a territory with the best
//! territory in scope. After that, each territory is scored independently by
//! [`score_territory`].
//!
//! In time mode the best level is taken over every territory in scope and
//! every period at once, so a territory whose own data does not change keeps
//! the same scores whatever happens elsewhere.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::data::{Dataset, Observation, Payload};
use crate::gap::{self, GapError, MetricKind};
use crate::index::{Basis, Correction, IndexSpec, IndexTree, IndicatorSpec};
use crate::penalized::{penalized_mean, AggregationError, Polarity, WeightedSequence};
use crate::validate::{validate_dataset, ValidationReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("reference scope is empty")]
    EmptyScope,
    #[error("no {basis:?} level for indicator `{indicator}` in territory `{territory}`")]
    Incomplete {
        territory: String,
        indicator: String,
        basis: Basis,
    },
    #[error("best level for indicator `{indicator}` is {value}, must be positive")]
    NonPositiveReference { indicator: String, value: f64 },
    #[error("no reference resolved for indicator `{0}`")]
    UnresolvedReference(String),
    #[error("territory `{territory}` has several periods for `{indicator}`; use time-series mode")]
    Ambiguous { territory: String, indicator: String },
    #[error("indicator `{indicator}` expects a {expected} observation, got {found}")]
    MetricMismatch {
        indicator: String,
        expected: MetricKind,
        found: MetricKind,
    },
    #[error("observation for `{found}` passed to indicator `{expected}`")]
    WrongIndicator { expected: String, found: String },
    #[error("territory `{territory}` is missing indicators: {}", missing.join(", "))]
    PartialReport {
        territory: String,
        missing: Vec<String>,
    },
    #[error("aggregation needs at least one value")]
    EmptyLevel,
    #[error("score {0} is outside [0, 100]")]
    ScoreOutOfRange(f64),
    #[error("periods disagree on the indicator set: {0}")]
    InconsistentPeriods(String),
    #[error("dataset has no observations")]
    NoPeriods,
    #[error("{territory}/{indicator}: {source}")]
    Gap {
        territory: String,
        indicator: String,
        source: GapError,
    },
    #[error("dataset failed validation with {} error(s)", .0.error_count())]
    Invalid(ValidationReport),
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
}

/// Identifies one best-level reference: an indicator and the component used.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ReferenceKey {
    pub indicator: String,
    pub basis: Basis,
}

/// Best levels per reference key plus each territory's own level for every
/// key, after any polarity inversion.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReferenceLevels {
    time_mode: bool,
    maxima: BTreeMap<ReferenceKey, f64>,
    bases: BTreeMap<(String, Option<i32>, ReferenceKey), f64>,
}

impl ReferenceLevels {
    pub fn time_mode(&self) -> bool {
        self.time_mode
    }

    pub fn maximum(&self, key: &ReferenceKey) -> Option<f64> {
        self.maxima.get(key).copied()
    }

    pub fn maxima(&self) -> &BTreeMap<ReferenceKey, f64> {
        &self.maxima
    }

    /// Level of `key` for the territory (and period, in time mode).
    pub fn base(&self, territory: &str, period: i32, key: &ReferenceKey) -> Option<f64> {
        let period = self.time_mode.then_some(period);
        self.bases
            .get(&(territory.to_owned(), period, key.clone()))
            .copied()
    }
}

fn reference_keys(spec: &IndexSpec) -> BTreeSet<ReferenceKey> {
    spec.indicators
        .iter()
        .filter_map(|ind| match &ind.correction {
            Correction::Own => Some(ReferenceKey {
                indicator: ind.id.clone(),
                basis: Basis::Total,
            }),
            Correction::External { indicator, basis } => Some(ReferenceKey {
                indicator: indicator.clone(),
                basis: *basis,
            }),
            Correction::None => None,
        })
        .collect()
}

/// Level of `basis` in a standard observation, after polarity inversion.
fn basis_level(
    ind: &IndicatorSpec,
    obs: &Observation,
    basis: Basis,
) -> Result<Option<f64>, PipelineError> {
    let Payload::Standard(pair) = obs.payload else {
        return Err(PipelineError::MetricMismatch {
            indicator: ind.id.clone(),
            expected: ind.metric,
            found: obs.payload.kind(),
        });
    };
    let raw = match basis {
        Basis::Total => pair.x_a,
        Basis::Women => Some(pair.x_w),
    };
    match (raw, ind.polarity) {
        (Some(v), Polarity::Negative) => gap::invert_polarity(v)
            .map(Some)
            .map_err(|source| PipelineError::Gap {
                territory: obs.territory.clone(),
                indicator: ind.id.clone(),
                source,
            }),
        (v, _) => Ok(v),
    }
}

/// Best achievement per reference over the territories in `scope` (and over
/// every period when `time_mode` is set). Negative-polarity levels are
/// inverted first.
pub fn resolve_references(
    dataset: &Dataset,
    spec: &IndexSpec,
    scope: &[String],
    time_mode: bool,
) -> Result<ReferenceLevels, PipelineError> {
    if scope.is_empty() {
        return Err(PipelineError::EmptyScope);
    }
    let in_scope: BTreeSet<&str> = scope.iter().map(String::as_str).collect();
    let mut refs = ReferenceLevels {
        time_mode,
        ..Default::default()
    };

    for key in reference_keys(spec) {
        let source = spec
            .indicator(&key.indicator)
            .ok_or_else(|| PipelineError::UnresolvedReference(key.indicator.clone()))?;
        let mut best = f64::NEG_INFINITY;
        for obs in dataset.records().iter().filter(|o| o.indicator == key.indicator) {
            let level = basis_level(source, obs, key.basis)?;
            let Some(level) = level else {
                if in_scope.contains(obs.territory.as_str()) {
                    return Err(PipelineError::Incomplete {
                        territory: obs.territory.clone(),
                        indicator: key.indicator.clone(),
                        basis: key.basis,
                    });
                }
                continue;
            };
            let period = time_mode.then_some(obs.period);
            let slot = (obs.territory.clone(), period, key.clone());
            if refs.bases.insert(slot, level).is_some() {
                return Err(PipelineError::Ambiguous {
                    territory: obs.territory.clone(),
                    indicator: key.indicator.clone(),
                });
            }
            if in_scope.contains(obs.territory.as_str()) {
                best = best.max(level);
            }
        }
        for territory in scope {
            if dataset.lookup(territory, &key.indicator).is_empty() {
                return Err(PipelineError::Incomplete {
                    territory: territory.clone(),
                    indicator: key.indicator.clone(),
                    basis: key.basis,
                });
            }
        }
        if best.is_nan() || best <= 0.0 {
            return Err(PipelineError::NonPositiveReference {
                indicator: key.indicator.clone(),
                value: best,
            });
        }
        refs.maxima.insert(key, best);
    }
    Ok(refs)
}

fn correction_for(
    spec: &IndicatorSpec,
    obs: &Observation,
    own_level: Option<f64>,
    refs: &ReferenceLevels,
) -> Result<Option<f64>, PipelineError> {
    let gap_err = |source| PipelineError::Gap {
        territory: obs.territory.clone(),
        indicator: spec.id.clone(),
        source,
    };
    let (key, level) = match &spec.correction {
        Correction::None => return Ok(None),
        Correction::Own => {
            let key = ReferenceKey {
                indicator: spec.id.clone(),
                basis: Basis::Total,
            };
            let level = own_level.ok_or_else(|| PipelineError::Incomplete {
                territory: obs.territory.clone(),
                indicator: spec.id.clone(),
                basis: Basis::Total,
            })?;
            (key, level)
        }
        Correction::External { indicator, basis } => {
            let key = ReferenceKey {
                indicator: indicator.clone(),
                basis: *basis,
            };
            let level = refs
                .base(&obs.territory, obs.period, &key)
                .ok_or_else(|| PipelineError::Incomplete {
                    territory: obs.territory.clone(),
                    indicator: indicator.clone(),
                    basis: *basis,
                })?;
            (key, level)
        }
    };
    let best = refs
        .maximum(&key)
        .ok_or_else(|| PipelineError::UnresolvedReference(key.indicator.clone()))?;
    gap::correction_coefficient(level, best)
        .map(Some)
        .map_err(gap_err)
}

/// Scores one observation on 0..=100 according to its indicator recipe.
pub fn compute_indicator(
    spec: &IndicatorSpec,
    obs: &Observation,
    refs: &ReferenceLevels,
) -> Result<f64, PipelineError> {
    if obs.indicator != spec.id {
        return Err(PipelineError::WrongIndicator {
            expected: spec.id.clone(),
            found: obs.indicator.clone(),
        });
    }
    if obs.payload.kind() != spec.metric {
        return Err(PipelineError::MetricMismatch {
            indicator: spec.id.clone(),
            expected: spec.metric,
            found: obs.payload.kind(),
        });
    }
    let gap_err = |source| PipelineError::Gap {
        territory: obs.territory.clone(),
        indicator: spec.id.clone(),
        source,
    };
    match obs.payload {
        Payload::Standard(pair) => {
            let pair = match spec.polarity {
                Polarity::Positive => pair,
                Polarity::Negative => pair.inverted().map_err(gap_err)?,
            };
            let alpha = correction_for(spec, obs, pair.x_a, refs)?.unwrap_or(1.0);
            let gap = gap::gap_metric(pair.x_w, pair.x_m).map_err(gap_err)?;
            Ok(alpha * (1.0 - gap) * 100.0)
        }
        Payload::Share { value } => {
            let alpha = correction_for(spec, obs, None, refs)?;
            gap::score_share(value, alpha).map_err(gap_err)
        }
        Payload::Ratio { value } => {
            let alpha = correction_for(spec, obs, None, refs)?.unwrap_or(1.0);
            gap::score_ratio(value, alpha).map_err(gap_err)
        }
        Payload::Capped { value } => gap::score_capped(value).map_err(gap_err),
    }
}

/// Equal-weight, positive-polarity penalized mean of child scores.
pub fn aggregate_level(values: &[f64]) -> Result<f64, PipelineError> {
    if values.is_empty() {
        return Err(PipelineError::EmptyLevel);
    }
    if let Some(&bad) = values.iter().find(|v| !(0.0..=100.0).contains(*v)) {
        return Err(PipelineError::ScoreOutOfRange(bad));
    }
    let seq = WeightedSequence::uniform(values.to_vec())?;
    Ok(penalized_mean(&seq, Polarity::Positive))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelValue {
    pub id: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubdomainValue {
    pub domain: String,
    pub id: String,
    pub value: f64,
}

/// Every level of the index for one territory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TerritoryReport {
    pub territory: String,
    pub indicators: Vec<LevelValue>,
    pub subdomains: Vec<SubdomainValue>,
    pub domains: Vec<LevelValue>,
    pub index: f64,
}

impl TerritoryReport {
    pub fn indicator(&self, id: &str) -> Option<f64> {
        self.indicators.iter().find(|v| v.id == id).map(|v| v.value)
    }

    pub fn domain(&self, id: &str) -> Option<f64> {
        self.domains.iter().find(|v| v.id == id).map(|v| v.value)
    }

    pub fn domain_values(&self) -> Vec<f64> {
        self.domains.iter().map(|v| v.value).collect()
    }
}

/// Folds indicator scores up the tree: sub-domains, then domains, then the
/// index, each with [`aggregate_level`].
pub fn aggregate_scores(
    tree: &IndexTree,
    territory: &str,
    scores: &BTreeMap<String, f64>,
) -> Result<TerritoryReport, PipelineError> {
    let missing: Vec<String> = tree
        .leaves()
        .filter(|id| !scores.contains_key(*id))
        .map(str::to_owned)
        .collect();
    if !missing.is_empty() {
        return Err(PipelineError::PartialReport {
            territory: territory.to_owned(),
            missing,
        });
    }

    let mut indicators = Vec::new();
    let mut subdomains = Vec::new();
    let mut domains = Vec::new();
    for domain in &tree.domains {
        let mut children = Vec::with_capacity(domain.subdomains.len());
        for sub in &domain.subdomains {
            let leaf_scores: Vec<f64> = sub.indicators.iter().map(|id| scores[id]).collect();
            for (id, &value) in sub.indicators.iter().zip(&leaf_scores) {
                indicators.push(LevelValue {
                    id: id.clone(),
                    value,
                });
            }
            let value = aggregate_level(&leaf_scores)?;
            subdomains.push(SubdomainValue {
                domain: domain.id.clone(),
                id: sub.id.clone(),
                value,
            });
            children.push(value);
        }
        domains.push(LevelValue {
            id: domain.id.clone(),
            value: aggregate_level(&children)?,
        });
    }
    let index = aggregate_level(&domains.iter().map(|d| d.value).collect::<Vec<_>>())?;
    Ok(TerritoryReport {
        territory: territory.to_owned(),
        indicators,
        subdomains,
        domains,
        index,
    })
}

/// Scores every indicator for `territory` and aggregates the tree.
///
/// `dataset` must hold at most one observation per indicator for the
/// territory.
pub fn score_territory(
    territory: &str,
    dataset: &Dataset,
    spec: &IndexSpec,
    refs: &ReferenceLevels,
) -> Result<TerritoryReport, PipelineError> {
    let mut scores = BTreeMap::new();
    let mut missing = Vec::new();
    for ind in &spec.indicators {
        match dataset.lookup(territory, &ind.id).as_slice() {
            [] => missing.push(ind.id.clone()),
            [obs] => {
                scores.insert(ind.id.clone(), compute_indicator(ind, obs, refs)?);
            }
            _ => {
                return Err(PipelineError::Ambiguous {
                    territory: territory.to_owned(),
                    indicator: ind.id.clone(),
                })
            }
        }
    }
    if !missing.is_empty() {
        return Err(PipelineError::PartialReport {
            territory: territory.to_owned(),
            missing,
        });
    }
    aggregate_scores(&spec.tree, territory, &scores)
}

fn ensure_valid(dataset: &Dataset, spec: &IndexSpec) -> Result<(), PipelineError> {
    let report = validate_dataset(dataset.records(), spec, &dataset.territories());
    if report.has_errors() {
        Err(PipelineError::Invalid(report))
    } else {
        Ok(())
    }
}

/// Validates, resolves references over `scope` and scores every territory in
/// the dataset (aggregate territories included) in input order.
pub fn score_cross_section(
    dataset: &Dataset,
    spec: &IndexSpec,
    scope: &[String],
) -> Result<Vec<TerritoryReport>, PipelineError> {
    ensure_valid(dataset, spec)?;
    let refs = resolve_references(dataset, spec, scope, false)?;
    dataset
        .territories()
        .iter()
        .map(|t| score_territory(t, dataset, spec, &refs))
        .collect()
}

/// Scores each period with references frozen at the best level over all
/// periods. Every period must cover the same indicators.
pub fn score_time_series(
    dataset: &Dataset,
    spec: &IndexSpec,
    scope: &[String],
) -> Result<BTreeMap<i32, Vec<TerritoryReport>>, PipelineError> {
    let periods = dataset.by_period();
    let mut sets = periods.keys().map(|p| (p, dataset.indicators_in(*p)));
    let Some((first_period, first)) = sets.next() else {
        return Err(PipelineError::NoPeriods);
    };
    for (period, set) in sets {
        if set != first {
            let diff: Vec<String> = set.symmetric_difference(&first).cloned().collect();
            return Err(PipelineError::InconsistentPeriods(format!(
                "{period} vs {first_period} differ on {}",
                diff.join(", ")
            )));
        }
    }
    ensure_valid(dataset, spec)?;
    let refs = resolve_references(dataset, spec, scope, true)?;
    periods
        .iter()
        .map(|(period, slice)| {
            let reports = slice
                .territories()
                .iter()
                .map(|t| score_territory(t, slice, spec, &refs))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((*period, reports))
        })
        .collect()
}
