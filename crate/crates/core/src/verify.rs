//! Replays the bundled reference tables through the library.
//!
//! Every check compares one computed number with one released number at a
//! fixed tolerance. The released index column is not reproducible from the
//! released domain values with the penalized-mean formula; those rows are
//! reported as known deviations instead of failures.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::fixtures::{self, GeometricNote};
use crate::gap;
use crate::io::WideTable;
use crate::penalized::{geometric_mean, penalized_mean, weighted_mean, Polarity, WeightedSequence};
use crate::pipeline::{aggregate_level, aggregate_scores};
use crate::stats::{correlation_matrix, descriptive_summary, DescriptiveSummary};

pub const SCORE_TOLERANCE: f64 = 0.005;
pub const TABLE_TOLERANCE: f64 = 0.01;
pub const TRENTO_TOLERANCE: f64 = 0.002;
pub const TRENTO: &str = "Provincia Autonoma di Trento";
/// Final index for Trento from its released domain values.
pub const TRENTO_FORMULA_INDEX: f64 = 73.184;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    KnownDeviation,
}

impl CheckStatus {
    pub fn label(&self) -> &'static str {
        match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::KnownDeviation => "KNOWN-DEVIATION",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: Option<f64>,
    pub actual: Option<f64>,
    pub tolerance: f64,
    pub status: CheckStatus,
    pub note: Option<String>,
}

impl Check {
    fn numeric(name: String, expected: f64, actual: f64, tolerance: f64) -> Self {
        let ok = (actual - expected).abs() <= tolerance;
        Self {
            name,
            expected: Some(expected),
            actual: Some(actual),
            tolerance,
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            note: None,
        }
    }

    fn outcome(name: String, ok: bool, note: String) -> Self {
        Self {
            name,
            expected: None,
            actual: None,
            tolerance: 0.0,
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            note: Some(note),
        }
    }

    pub fn delta(&self) -> Option<f64> {
        Some(self.actual? - self.expected?)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn count(&self, status: CheckStatus) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    pub fn group(&self, prefix: &str) -> impl Iterator<Item = &Check> {
        let prefix = format!("{prefix}/");
        self.checks.iter().filter(move |c| c.name.starts_with(&prefix))
    }
}

pub fn run_verification() -> VerifyReport {
    let mut checks = Vec::new();
    fictional_checks(&mut checks);
    penalized_checks(&mut checks);
    let published = fixtures::published_results();
    domain_checks(&published, &mut checks);
    index_checks(&published, &mut checks);
    statistics_checks(&published, &mut checks);
    indicator_statistics_checks(&mut checks);
    correlation_checks(&mut checks);
    VerifyReport { checks }
}

fn fictional_checks(out: &mut Vec<Check>) {
    let obs = fixtures::fictional_observations();
    let best = obs
        .iter()
        .filter_map(|o| match o.payload {
            crate::data::Payload::Standard(p) => p.x_a,
            _ => None,
        })
        .fold(f64::NEG_INFINITY, f64::max);
    for ((territory, gei, igei), o) in fixtures::fictional_expected().into_iter().zip(&obs) {
        let crate::data::Payload::Standard(p) = o.payload else {
            continue;
        };
        let x_a = p.x_a.unwrap_or_default();
        match gap::score_gei(p.x_w, x_a, best) {
            Ok(v) => out.push(Check::numeric(format!("fictional/{territory}/gei"), gei, v, SCORE_TOLERANCE)),
            Err(e) => out.push(Check::outcome(format!("fictional/{territory}/gei"), false, e.to_string())),
        }
        match gap::score_standard(p.x_w, p.x_m, x_a, best) {
            Ok(v) => out.push(Check::numeric(format!("fictional/{territory}/igei"), igei, v, SCORE_TOLERANCE)),
            Err(e) => out.push(Check::outcome(format!("fictional/{territory}/igei"), false, e.to_string())),
        }
    }
}

fn penalized_checks(out: &mut Vec<Check>) {
    for ex in fixtures::penalized_examples() {
        let label = ex
            .values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let seq = WeightedSequence::uniform(ex.values.clone()).expect("non-empty example");
        out.push(Check::numeric(
            format!("penalized-means/[{label}]/mean"),
            ex.mean,
            weighted_mean(&seq),
            SCORE_TOLERANCE,
        ));
        out.push(Check::numeric(
            format!("penalized-means/[{label}]/penalized"),
            ex.penalized,
            penalized_mean(&seq, Polarity::Positive),
            SCORE_TOLERANCE,
        ));
        let name = format!("penalized-means/[{label}]/geometric");
        match (ex.note, geometric_mean(&seq)) {
            (GeometricNote::Defined, Ok(g)) => {
                out.push(Check::numeric(name, ex.geometric.unwrap_or(f64::NAN), g, SCORE_TOLERANCE))
            }
            (GeometricNote::Defined, Err(e)) => out.push(Check::outcome(name, false, e.to_string())),
            (note, Err(e)) => out.push(Check::outcome(
                name,
                true,
                format!("domain error as expected ({note:?}): {e}"),
            )),
            (_, Ok(g)) => out.push(Check::outcome(name, false, format!("expected a domain error, got {g}"))),
        }
    }
}

fn domain_checks(published: &WideTable, out: &mut Vec<Check>) {
    let spec = fixtures::igei_spec();
    let rows = fixtures::score_rows(&fixtures::indicator_scores()).expect("bundled scores are complete");
    for (territory, scores) in rows {
        let tol = if territory == TRENTO { TRENTO_TOLERANCE } else { TABLE_TOLERANCE };
        let report = match aggregate_scores(&spec.tree, &territory, &scores) {
            Ok(r) => r,
            Err(e) => {
                out.push(Check::outcome(format!("domains/{territory}"), false, e.to_string()));
                continue;
            }
        };
        for d in &report.domains {
            match published.get(&territory, &d.id) {
                Some(expected) => out.push(Check::numeric(
                    format!("domains/{territory}/{}", d.id),
                    expected,
                    d.value,
                    tol,
                )),
                None => out.push(Check::outcome(
                    format!("domains/{territory}/{}", d.id),
                    false,
                    "no released value".into(),
                )),
            }
        }
    }
}

fn domain_columns(published: &WideTable) -> Vec<String> {
    published
        .columns
        .iter()
        .filter(|c| c.as_str() != "index")
        .cloned()
        .collect()
}

fn index_checks(published: &WideTable, out: &mut Vec<Check>) {
    let cols = domain_columns(published);
    for (territory, _) in &published.rows {
        let domains: Option<Vec<f64>> = cols.iter().map(|c| published.get(territory, c)).collect();
        let (Some(domains), Some(released)) = (domains, published.get(territory, "index")) else {
            continue;
        };
        let Ok(formula) = aggregate_level(&domains) else {
            out.push(Check::outcome(format!("index/{territory}"), false, "domains out of range".into()));
            continue;
        };
        if territory == TRENTO {
            out.push(Check::numeric(
                format!("index-formula/{territory}"),
                TRENTO_FORMULA_INDEX,
                formula,
                SCORE_TOLERANCE,
            ));
        }
        let mut check = Check::numeric(format!("index-released/{territory}"), released, formula, TABLE_TOLERANCE);
        if check.status == CheckStatus::Fail {
            check.status = CheckStatus::KnownDeviation;
            check.note = Some("released index does not follow from released domains".into());
        }
        out.push(check);
    }
}

fn summary_checks(prefix: &str, expected: &[Option<f64>], columns: &[String], actual: &DescriptiveSummary, out: &mut Vec<Check>) {
    let values = [
        ("mean", actual.mean),
        ("sd", actual.sd),
        ("cv", actual.cv.unwrap_or(f64::NAN)),
        ("min", actual.min),
        ("p25", actual.p25),
        ("p50", actual.p50),
        ("p75", actual.p75),
        ("max", actual.max),
    ];
    let lookup: BTreeMap<&str, Option<f64>> = columns.iter().map(String::as_str).zip(expected.iter().copied()).collect();
    for (field, value) in values {
        let name = format!("{prefix}/{field}");
        match lookup.get(field).copied().flatten() {
            Some(e) => out.push(Check::numeric(name, e, value, TABLE_TOLERANCE)),
            None => out.push(Check::outcome(name, false, "no released value".into())),
        }
    }
}

fn regional_rows(table: &WideTable) -> impl Iterator<Item = &(String, Vec<Option<f64>>)> {
    let spec = fixtures::igei_spec();
    table.rows.iter().filter(move |(t, _)| !spec.is_aggregate(t))
}

fn statistics_checks(published: &WideTable, out: &mut Vec<Check>) {
    let summary = fixtures::index_summary();
    for (level, expected) in &summary.rows {
        let Some(j) = published.column_index(level) else {
            out.push(Check::outcome(format!("statistics/{level}"), false, "unknown level".into()));
            continue;
        };
        let column: Vec<f64> = regional_rows(published).filter_map(|(_, v)| v[j]).collect();
        match descriptive_summary(&column) {
            Ok(s) => summary_checks(&format!("statistics/{level}"), expected, &summary.columns, &s, out),
            Err(e) => out.push(Check::outcome(format!("statistics/{level}"), false, e.to_string())),
        }
    }
}

fn indicator_statistics_checks(out: &mut Vec<Check>) {
    let scores = fixtures::indicator_scores();
    let summary = fixtures::indicator_summary();
    for (id, expected) in &summary.rows {
        let Some(j) = scores.column_index(id) else {
            out.push(Check::outcome(format!("indicator-statistics/{id}"), false, "unknown indicator".into()));
            continue;
        };
        let column: Vec<f64> = regional_rows(&scores).filter_map(|(_, v)| v[j]).collect();
        match descriptive_summary(&column) {
            Ok(s) => summary_checks(&format!("indicator-statistics/{id}"), expected, &summary.columns, &s, out),
            Err(e) => out.push(Check::outcome(format!("indicator-statistics/{id}"), false, e.to_string())),
        }
    }
}

/// Largest absolute difference between computed correlations over the given
/// territories and the released lower triangle.
pub fn correlation_max_delta(include_aggregates: bool) -> Option<f64> {
    let scores = fixtures::indicator_scores();
    let released = fixtures::correlations();
    let spec = fixtures::igei_spec();
    let rows: Vec<&(String, Vec<Option<f64>>)> = scores
        .rows
        .iter()
        .filter(|(t, _)| include_aggregates || !spec.is_aggregate(t))
        .collect();
    let columns: Vec<(String, Vec<f64>)> = scores
        .columns
        .iter()
        .enumerate()
        .map(|(j, c)| (c.clone(), rows.iter().filter_map(|(_, v)| v[j]).collect()))
        .collect();
    let matrix = correlation_matrix(&columns).ok()?;
    let mut worst: f64 = 0.0;
    for (a, row) in &released.rows {
        for (b, cell) in released.columns.iter().zip(row) {
            if let Some(expected) = cell {
                worst = worst.max((matrix.get(a, b)? - expected).abs());
            }
        }
    }
    Some(worst)
}

fn correlation_checks(out: &mut Vec<Check>) {
    let regional = correlation_max_delta(false);
    let all = correlation_max_delta(true);
    let mut check = match regional {
        Some(d) => Check::numeric("correlations/21-territories/max-abs-delta".into(), 0.0, d, SCORE_TOLERANCE + 1e-9),
        None => Check::outcome("correlations/21-territories".into(), false, "matrix undefined".into()),
    };
    if let Some(d) = all {
        check.note = Some(format!("including the two aggregate rows gives max |delta| {d:.3}"));
    }
    out.push(check);
}
