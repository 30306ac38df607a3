//! Bundled reference data.
//!
//! Everything here is compiled into the binary so `verify`, `demo` and the
//! default `aggregate`/`report` inputs work without any files on disk.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::data::Observation;
use crate::io::{self, DataError, NumberFormat, WideTable};
use crate::index::IndexSpec;

pub const IGEI_SPEC: &str = include_str!("../fixtures/igei_spec.toml");
pub const FICTIONAL_SPEC: &str = include_str!("../fixtures/fictional_spec.toml");
pub const FICTIONAL_OBSERVATIONS: &str = include_str!("../fixtures/fictional_countries.csv");
pub const FICTIONAL_EXPECTED: &str = include_str!("../fixtures/fictional_countries_expected.csv");
pub const PENALIZED_EXAMPLES: &str = include_str!("../fixtures/penalized_mean_examples.csv");
pub const INDICATOR_SCORES: &str = include_str!("../fixtures/igei_2023_indicator_scores.csv");
pub const PUBLISHED_RESULTS: &str = include_str!("../fixtures/igei_2023_published.csv");
pub const INDEX_SUMMARY: &str = include_str!("../fixtures/igei_2023_index_summary.csv");
pub const INDICATOR_SUMMARY: &str = include_str!("../fixtures/igei_2023_indicator_summary.csv");
pub const CORRELATIONS: &str = include_str!("../fixtures/igei_2023_correlations.csv");

/// The 20-indicator IGEI definition.
pub fn igei_spec() -> IndexSpec {
    io::parse_index_spec(IGEI_SPEC).expect("bundled IGEI spec is valid")
}

pub fn fictional_spec() -> IndexSpec {
    io::parse_index_spec(FICTIONAL_SPEC).expect("bundled fictional spec is valid")
}

pub fn fictional_observations() -> Vec<Observation> {
    io::read_observations(FICTIONAL_OBSERVATIONS.as_bytes(), NumberFormat::default())
        .expect("bundled fictional observations are valid")
}

fn table(text: &str) -> WideTable {
    io::read_wide_table(text.as_bytes(), NumberFormat::default()).expect("bundled table is valid")
}

/// `territory -> (gei, igei)` for the five fictional countries.
pub fn fictional_expected() -> Vec<(String, f64, f64)> {
    table(FICTIONAL_EXPECTED)
        .rows
        .into_iter()
        .map(|(t, v)| (t, v[0].unwrap(), v[1].unwrap()))
        .collect()
}

pub fn indicator_scores() -> WideTable {
    table(INDICATOR_SCORES)
}

pub fn published_results() -> WideTable {
    table(PUBLISHED_RESULTS)
}

pub fn index_summary() -> WideTable {
    table(INDEX_SUMMARY)
}

pub fn indicator_summary() -> WideTable {
    table(INDICATOR_SUMMARY)
}

pub fn correlations() -> WideTable {
    table(CORRELATIONS)
}

/// A territory and its scores keyed by indicator id.
pub type ScoreRow = (String, BTreeMap<String, f64>);

/// Converts a wide score table into per-territory score maps, in row order.
pub fn score_rows(table: &WideTable) -> Result<Vec<ScoreRow>, DataError> {
    table
        .rows
        .iter()
        .map(|(territory, values)| {
            let mut scores = BTreeMap::new();
            for (col, v) in table.columns.iter().zip(values) {
                match v {
                    Some(v) => {
                        scores.insert(col.clone(), *v);
                    }
                    None => {
                        return Err(DataError::Definition(format!(
                            "{territory}: empty score for {col}"
                        )))
                    }
                }
            }
            Ok((territory.clone(), scores))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometricNote {
    Defined,
    /// A zero value: the geometric mean exists only as the limit 0.
    Limit,
    /// Non-positive values: no geometric mean.
    Undefined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenalizedExample {
    pub values: Vec<f64>,
    pub mean: f64,
    pub penalized: f64,
    pub geometric: Option<f64>,
    pub note: GeometricNote,
}

#[derive(Deserialize)]
struct RawExample {
    values: String,
    mean: f64,
    penalized: f64,
    geometric: Option<f64>,
    geometric_note: String,
}

pub fn penalized_examples() -> Vec<PenalizedExample> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(PENALIZED_EXAMPLES.as_bytes());
    rdr.deserialize::<RawExample>()
        .map(|row| {
            let row = row.expect("bundled example row");
            PenalizedExample {
                values: row
                    .values
                    .split_whitespace()
                    .map(|v| v.parse().expect("numeric sequence value"))
                    .collect(),
                mean: row.mean,
                penalized: row.penalized,
                geometric: row.geometric,
                note: match row.geometric_note.as_str() {
                    "" => GeometricNote::Defined,
                    "limit" => GeometricNote::Limit,
                    "undefined" => GeometricNote::Undefined,
                    other => panic!("unknown geometric note `{other}`"),
                },
            }
        })
        .collect()
}
