//! Dataset validation against an index definition.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::data::{Observation, Payload};
use crate::index::{Correction, IndexSpec};
use crate::penalized::Polarity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingKind {
    Missing,
    ShapeMismatch,
    OutOfRange,
    Degenerate,
    UnknownIndicator,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub kind: FindingKind,
    pub territory: String,
    pub indicator: String,
    pub period: Option<i32>,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}/{}", self.territory, self.indicator)?;
        if let Some(p) = self.period {
            write!(f, "/{p}")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Sorted findings; the same inputs in any order give the same report.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn has_errors(&self) -> bool {
        self.error_count() > 0
    }

    pub fn error_count(&self) -> usize {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
            .count()
    }

    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

struct Collector<'a> {
    out: Vec<Finding>,
    rec: Option<&'a Observation>,
}

impl Collector<'_> {
    fn push(&mut self, severity: Severity, kind: FindingKind, message: String) {
        let rec = self.rec.expect("record context");
        self.out.push(Finding {
            severity,
            kind,
            territory: rec.territory.clone(),
            indicator: rec.indicator.clone(),
            period: Some(rec.period),
            message,
        });
    }

    fn error(&mut self, kind: FindingKind, message: String) {
        self.push(Severity::Error, kind, message);
    }
}

fn check_value(c: &mut Collector<'_>, name: &str, v: f64, upper: Option<f64>) {
    if !v.is_finite() || v < 0.0 {
        c.error(FindingKind::OutOfRange, format!("{name} = {v} is negative or not finite"));
    } else if let Some(hi) = upper {
        if v > hi {
            c.error(FindingKind::OutOfRange, format!("{name} = {v} exceeds {hi}"));
        }
    }
}

/// Reports missing `(territory, indicator)` pairs for territories in `scope`,
/// payloads that do not match the indicator's metric, out-of-range values and
/// degenerate gender pairs.
pub fn validate_dataset(records: &[Observation], spec: &IndexSpec, scope: &[String]) -> ValidationReport {
    let mut c = Collector {
        out: Vec::new(),
        rec: None,
    };
    for rec in records {
        c.rec = Some(rec);
        let Some(ind) = spec.indicator(&rec.indicator) else {
            c.push(
                Severity::Warning,
                FindingKind::UnknownIndicator,
                "indicator is not part of the index".into(),
            );
            continue;
        };
        if rec.payload.kind() != ind.metric {
            c.error(
                FindingKind::ShapeMismatch,
                format!("expected {} payload, found {}", ind.metric, rec.payload.kind()),
            );
            continue;
        }
        match rec.payload {
            Payload::Standard(pair) => {
                let rate_bound = (ind.polarity == Polarity::Negative).then_some(1.0);
                check_value(&mut c, "x_w", pair.x_w, rate_bound);
                check_value(&mut c, "x_m", pair.x_m, rate_bound);
                match pair.x_a {
                    Some(a) => check_value(&mut c, "x_a", a, rate_bound),
                    None if ind.correction == Correction::Own => c.error(
                        FindingKind::ShapeMismatch,
                        "x_a is required for an own-level correction".into(),
                    ),
                    None => {}
                }
                if pair.x_w == 0.0 && pair.x_m == 0.0 {
                    c.error(FindingKind::Degenerate, "x_w and x_m are both zero".into());
                }
            }
            Payload::Share { value } => check_value(&mut c, "share", value, Some(1.0)),
            Payload::Ratio { value } => {
                if !(value.is_finite() && value > 0.0) {
                    c.error(FindingKind::OutOfRange, format!("ratio = {value} must be positive"));
                }
            }
            Payload::Capped { value } => check_value(&mut c, "coverage", value, None),
        }
    }

    let present: BTreeSet<(&str, &str)> = records
        .iter()
        .map(|r| (r.territory.as_str(), r.indicator.as_str()))
        .collect();
    for territory in scope {
        for ind in &spec.indicators {
            if !present.contains(&(territory.as_str(), ind.id.as_str())) {
                c.out.push(Finding {
                    severity: Severity::Error,
                    kind: FindingKind::Missing,
                    territory: territory.clone(),
                    indicator: ind.id.clone(),
                    period: None,
                    message: "no observation".into(),
                });
            }
        }
    }
    let mut findings = c.out;
    findings.sort();
    findings.dedup();
    ValidationReport { findings }
}
