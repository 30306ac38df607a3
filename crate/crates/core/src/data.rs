//! Observation records and the in-memory dataset.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gap::{GenderPair, MetricKind};

/// Raw measurement carried by one observation. The variant must match the
/// indicator's [`MetricKind`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Payload {
    Standard(GenderPair),
    Share { value: f64 },
    Ratio { value: f64 },
    Capped { value: f64 },
}

impl Payload {
    pub fn kind(&self) -> MetricKind {
        match self {
            Payload::Standard(_) => MetricKind::Standard,
            Payload::Share { .. } => MetricKind::Share,
            Payload::Ratio { .. } => MetricKind::Ratio,
            Payload::Capped { .. } => MetricKind::Capped,
        }
    }
}

/// One measurement for a territory, indicator and period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub territory: String,
    pub indicator: String,
    pub period: i32,
    pub payload: Payload,
}

impl Observation {
    pub fn standard(
        territory: &str,
        indicator: &str,
        period: i32,
        x_w: f64,
        x_m: f64,
        x_a: Option<f64>,
    ) -> Self {
        Self {
            territory: territory.to_owned(),
            indicator: indicator.to_owned(),
            period,
            payload: Payload::Standard(GenderPair { x_w, x_m, x_a }),
        }
    }

    pub fn new(territory: &str, indicator: &str, period: i32, payload: Payload) -> Self {
        Self {
            territory: territory.to_owned(),
            indicator: indicator.to_owned(),
            period,
            payload,
        }
    }

    pub fn capped(territory: &str, indicator: &str, period: i32, value: f64) -> Self {
        Self::new(territory, indicator, period, Payload::Capped { value })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatasetError {
    #[error("duplicate observation for ({territory}, {indicator}, {period})")]
    Duplicate {
        territory: String,
        indicator: String,
        period: i32,
    },
}

/// Observations indexed by `(territory, indicator)`.
///
/// At most one record may exist per `(territory, indicator, period)`.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    records: Vec<Observation>,
    index: BTreeMap<(String, String), Vec<usize>>,
}

impl Dataset {
    pub fn new(records: Vec<Observation>) -> Result<Self, DatasetError> {
        let mut index: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
        for (i, rec) in records.iter().enumerate() {
            let slot = index
                .entry((rec.territory.clone(), rec.indicator.clone()))
                .or_default();
            if slot.iter().any(|&j| records[j].period == rec.period) {
                return Err(DatasetError::Duplicate {
                    territory: rec.territory.clone(),
                    indicator: rec.indicator.clone(),
                    period: rec.period,
                });
            }
            slot.push(i);
        }
        Ok(Self { records, index })
    }

    pub fn records(&self) -> &[Observation] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// All records for a territory and indicator, in input order.
    pub fn lookup(&self, territory: &str, indicator: &str) -> Vec<&Observation> {
        self.index
            .get(&(territory.to_owned(), indicator.to_owned()))
            .map(|ix| ix.iter().map(|&i| &self.records[i]).collect())
            .unwrap_or_default()
    }

    /// Territories in order of first appearance.
    pub fn territories(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        self.records
            .iter()
            .filter(|r| seen.insert(r.territory.as_str()))
            .map(|r| r.territory.clone())
            .collect()
    }

    pub fn periods(&self) -> BTreeSet<i32> {
        self.records.iter().map(|r| r.period).collect()
    }

    pub fn indicators_in(&self, period: i32) -> BTreeSet<String> {
        self.records
            .iter()
            .filter(|r| r.period == period)
            .map(|r| r.indicator.clone())
            .collect()
    }

    /// Splits the dataset into one dataset per period.
    pub fn by_period(&self) -> BTreeMap<i32, Dataset> {
        let mut groups: BTreeMap<i32, Vec<Observation>> = BTreeMap::new();
        for rec in &self.records {
            groups.entry(rec.period).or_default().push(rec.clone());
        }
        groups
            .into_iter()
            .map(|(p, recs)| (p, Dataset::new(recs).expect("subset of a valid dataset")))
            .collect()
    }
}
