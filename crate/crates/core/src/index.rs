//! Indicator recipes and the index hierarchy.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gap::MetricKind;
use crate::penalized::Polarity;

/// Which component of another indicator's observation feeds a correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// Total-population level `x_a`.
    Total,
    /// Women's level `x_w`.
    Women,
}

/// Source of an indicator's correcting coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Correction {
    /// The indicator's own total level against the best total level.
    Own,
    /// Another (standard) indicator's level, by territory.
    External { indicator: String, basis: Basis },
    /// No correction, coefficient 1.
    None,
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Correction::Own => f.write_str("own"),
            Correction::None => f.write_str("none"),
            Correction::External {
                indicator,
                basis: Basis::Total,
            } => write!(f, "external:{indicator}"),
            Correction::External {
                indicator,
                basis: Basis::Women,
            } => write!(f, "external:{indicator}:women"),
        }
    }
}

impl FromStr for Correction {
    type Err = String;

    /// Accepts `own`, `none`, `external:<id>` and `external:<id>:<total|women>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.trim().split(':');
        match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some("own"), None, ..) => Ok(Correction::Own),
            (Some("none"), None, ..) => Ok(Correction::None),
            (Some("external"), Some(id), basis, None) if !id.is_empty() => {
                let basis = match basis {
                    None | Some("total") => Basis::Total,
                    Some("women") => Basis::Women,
                    Some(other) => return Err(format!("unknown correction basis `{other}`")),
                };
                Ok(Correction::External {
                    indicator: id.to_owned(),
                    basis,
                })
            }
            _ => Err(format!("cannot parse correction `{s}`")),
        }
    }
}

impl Serialize for Correction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Correction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-indicator scoring recipe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorSpec {
    pub id: String,
    pub label: String,
    pub domain: String,
    pub subdomain: String,
    pub metric: MetricKind,
    pub polarity: Polarity,
    pub correction: Correction,
    pub period: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subdomain {
    pub id: String,
    pub label: String,
    pub indicators: Vec<String>,
    /// Set when a domain lists indicators directly, without sub-domains.
    pub implicit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domain {
    pub id: String,
    pub label: String,
    pub subdomains: Vec<Subdomain>,
}

/// index -> domains -> sub-domains -> indicator ids, equal weights throughout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexTree {
    pub domains: Vec<Domain>,
}

impl IndexTree {
    /// Leaf ids in tree order.
    pub fn leaves(&self) -> impl Iterator<Item = &str> {
        self.domains
            .iter()
            .flat_map(|d| d.subdomains.iter())
            .flat_map(|s| s.indicators.iter().map(String::as_str))
    }

    pub fn subdomain_count(&self) -> usize {
        self.domains.iter().map(|d| d.subdomains.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("indicator `{0}` appears more than once")]
    DuplicateLeaf(String),
    #[error("tree references indicator `{0}` with no definition")]
    UndefinedLeaf(String),
    #[error("indicator `{0}` is defined but not placed in the tree")]
    Unplaced(String),
    #[error("indicator `{indicator}` takes its correction from unknown indicator `{target}`")]
    DanglingCorrection { indicator: String, target: String },
    #[error("indicator `{indicator}` takes its correction from `{target}`, which is not a standard indicator")]
    CorrectionSourceNotStandard { indicator: String, target: String },
    #[error("indicator `{indicator}`: {metric} metric cannot use correction `{correction}`")]
    CorrectionNotAllowed {
        indicator: String,
        metric: MetricKind,
        correction: String,
    },
    #[error("indicator `{0}`: negative polarity is only defined for standard rate indicators")]
    PolarityNotAllowed(String),
    #[error("declared {declared} domains, found {found}")]
    DomainCount { declared: usize, found: usize },
    #[error("the index has no domains")]
    Empty,
    #[error("{0} has no children")]
    EmptyNode(String),
}

/// A validated index definition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexSpec {
    pub name: String,
    pub indicators: Vec<IndicatorSpec>,
    pub tree: IndexTree,
    /// Territories reported but excluded from reference maxima and statistics.
    pub aggregate_territories: Vec<String>,
}

impl IndexSpec {
    /// Checks the tree and indicator set against each other. Indicators are
    /// reordered to follow the tree.
    pub fn new(
        name: String,
        indicators: Vec<IndicatorSpec>,
        tree: IndexTree,
        aggregate_territories: Vec<String>,
    ) -> Result<Self, SpecError> {
        if tree.domains.is_empty() {
            return Err(SpecError::Empty);
        }
        for d in &tree.domains {
            if d.subdomains.is_empty() {
                return Err(SpecError::EmptyNode(format!("domain `{}`", d.id)));
            }
            for s in &d.subdomains {
                if s.indicators.is_empty() {
                    return Err(SpecError::EmptyNode(format!("sub-domain `{}`", s.id)));
                }
            }
        }

        let mut by_id: BTreeMap<&str, &IndicatorSpec> = BTreeMap::new();
        for ind in &indicators {
            if by_id.insert(ind.id.as_str(), ind).is_some() {
                return Err(SpecError::DuplicateLeaf(ind.id.clone()));
            }
        }
        let mut placed = BTreeSet::new();
        for leaf in tree.leaves() {
            if !placed.insert(leaf) {
                return Err(SpecError::DuplicateLeaf(leaf.to_owned()));
            }
            if !by_id.contains_key(leaf) {
                return Err(SpecError::UndefinedLeaf(leaf.to_owned()));
            }
        }
        if let Some(ind) = indicators.iter().find(|i| !placed.contains(i.id.as_str())) {
            return Err(SpecError::Unplaced(ind.id.clone()));
        }

        for ind in &indicators {
            if ind.polarity == Polarity::Negative && ind.metric != MetricKind::Standard {
                return Err(SpecError::PolarityNotAllowed(ind.id.clone()));
            }
            let allowed = match (&ind.correction, ind.metric) {
                (Correction::Own, MetricKind::Standard) => true,
                (Correction::Own, _) => false,
                (Correction::External { .. }, MetricKind::Capped) => false,
                (Correction::External { .. }, _) => true,
                (Correction::None, _) => true,
            };
            if !allowed {
                return Err(SpecError::CorrectionNotAllowed {
                    indicator: ind.id.clone(),
                    metric: ind.metric,
                    correction: ind.correction.to_string(),
                });
            }
            if let Correction::External { indicator, .. } = &ind.correction {
                match by_id.get(indicator.as_str()) {
                    None => {
                        return Err(SpecError::DanglingCorrection {
                            indicator: ind.id.clone(),
                            target: indicator.clone(),
                        })
                    }
                    Some(target) if target.metric != MetricKind::Standard => {
                        return Err(SpecError::CorrectionSourceNotStandard {
                            indicator: ind.id.clone(),
                            target: indicator.clone(),
                        })
                    }
                    Some(_) => {}
                }
            }
        }

        let order: Vec<String> = tree.leaves().map(str::to_owned).collect();
        let mut indicators = indicators;
        indicators.sort_by_key(|i| order.iter().position(|o| *o == i.id));
        Ok(Self {
            name,
            indicators,
            tree,
            aggregate_territories,
        })
    }

    pub fn indicator(&self, id: &str) -> Option<&IndicatorSpec> {
        self.indicators.iter().find(|i| i.id == id)
    }

    pub fn is_aggregate(&self, territory: &str) -> bool {
        self.aggregate_territories.iter().any(|t| t == territory)
    }

    /// Territories that form the scoring population, in input order.
    pub fn default_scope(&self, territories: &[String]) -> Vec<String> {
        territories
            .iter()
            .filter(|t| !self.is_aggregate(t))
            .cloned()
            .collect()
    }
}
