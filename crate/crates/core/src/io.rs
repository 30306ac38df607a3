//! File formats: observation CSV, index definition TOML and wide score tables.
//!
//! Observation files carry the header
//!
//! ```text
//! territory,indicator,period,kind,x_w,x_m,x_a,value
//! ```
//!
//! with unused cells left empty. Lines starting with `#` are comments. In
//! decimal-comma mode fields are separated by `;` and numbers use `,` as the
//! decimal mark (`73,949`); the mode is always chosen explicitly.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::data::{Dataset, DatasetError, Observation, Payload};
use crate::gap::{GenderPair, MetricKind};
use crate::index::{Correction, Domain, IndexSpec, IndexTree, IndicatorSpec, SpecError, Subdomain};
use crate::penalized::Polarity;

pub const OBSERVATION_HEADER: [&str; 8] = [
    "territory", "indicator", "period", "kind", "x_w", "x_m", "x_a", "value",
];

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Open {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("line {line}: duplicate observation for ({territory}, {indicator}, {period})")]
    Duplicate {
        line: u64,
        territory: String,
        indicator: String,
        period: i32,
    },
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("index definition: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("index definition: {0}")]
    Definition(String),
    #[error("index definition: {0}")]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Number format of a delimited file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NumberFormat {
    pub decimal_comma: bool,
}

impl NumberFormat {
    pub const DECIMAL_COMMA: Self = Self { decimal_comma: true };

    pub fn delimiter(&self) -> u8 {
        if self.decimal_comma {
            b';'
        } else {
            b','
        }
    }

    /// Parses a number, refusing the other locale's decimal mark.
    pub fn parse(&self, raw: &str) -> Result<f64, String> {
        let s = raw.trim();
        let (mark, foreign) = if self.decimal_comma { (',', '.') } else { ('.', ',') };
        if s.contains(foreign) {
            return Err(format!("`{s}` uses `{foreign}` but the decimal mark is `{mark}`"));
        }
        let normalized = s.replace(mark, ".");
        let v: f64 = normalized
            .parse()
            .map_err(|_| format!("`{s}` is not a number"))?;
        if !v.is_finite() {
            return Err(format!("`{s}` is not finite"));
        }
        Ok(v)
    }

    fn parse_opt(&self, raw: &str) -> Result<Option<f64>, String> {
        if raw.trim().is_empty() {
            Ok(None)
        } else {
            self.parse(raw).map(Some)
        }
    }

    pub fn format(&self, v: f64) -> String {
        let s = v.to_string();
        if self.decimal_comma {
            s.replace('.', ",")
        } else {
            s
        }
    }
}

fn reader<R: Read>(src: R, fmt: NumberFormat) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .delimiter(fmt.delimiter())
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(src)
}

fn open(path: &Path) -> Result<File, DataError> {
    File::open(path).map_err(|source| DataError::Open {
        path: path.display().to_string(),
        source,
    })
}

fn bound(name: &str, v: f64, lo: f64, hi: Option<f64>, strict_lo: bool) -> Result<f64, String> {
    let below = if strict_lo { v <= lo } else { v < lo };
    if below {
        let op = if strict_lo { ">" } else { ">=" };
        return Err(format!("{name} = {v} must be {op} {lo}"));
    }
    if let Some(hi) = hi {
        if v > hi {
            return Err(format!("{name} = {v} exceeds the upper bound {hi}"));
        }
    }
    Ok(v)
}

fn parse_observation(row: &csv::StringRecord, fmt: NumberFormat) -> Result<Observation, String> {
    let cell = |i: usize| row.get(i).unwrap_or("");
    let territory = cell(0);
    let indicator = cell(1);
    if territory.is_empty() || indicator.is_empty() {
        return Err("territory and indicator are required".into());
    }
    let period: i32 = cell(2)
        .parse()
        .map_err(|_| format!("period `{}` is not an integer year", cell(2)))?;
    let kind: MetricKind = cell(3).parse()?;
    let x_w = fmt.parse_opt(cell(4))?;
    let x_m = fmt.parse_opt(cell(5))?;
    let x_a = fmt.parse_opt(cell(6))?;
    let value = fmt.parse_opt(cell(7))?;

    let payload = match kind {
        MetricKind::Standard => {
            if value.is_some() {
                return Err("standard rows leave `value` empty".into());
            }
            let (Some(w), Some(m)) = (x_w, x_m) else {
                return Err("standard rows need x_w and x_m".into());
            };
            let w = bound("x_w", w, 0.0, None, false)?;
            let m = bound("x_m", m, 0.0, None, false)?;
            let a = x_a.map(|a| bound("x_a", a, 0.0, None, false)).transpose()?;
            Payload::Standard(GenderPair { x_w: w, x_m: m, x_a: a })
        }
        single => {
            if x_w.is_some() || x_m.is_some() || x_a.is_some() {
                return Err(format!("{single} rows leave x_w, x_m and x_a empty"));
            }
            let v = value.ok_or_else(|| format!("{single} rows need `value`"))?;
            match single {
                MetricKind::Share => Payload::Share {
                    value: bound("share", v, 0.0, Some(1.0), false)?,
                },
                MetricKind::Ratio => Payload::Ratio {
                    value: bound("ratio", v, 0.0, None, true)?,
                },
                _ => Payload::Capped {
                    value: bound("coverage", v, 0.0, None, false)?,
                },
            }
        }
    };
    Ok(Observation {
        territory: territory.to_owned(),
        indicator: indicator.to_owned(),
        period,
        payload,
    })
}

/// True when the first record of `text` is the observation header.
pub fn has_observation_header(text: &str, fmt: NumberFormat) -> bool {
    reader(text.as_bytes(), fmt)
        .headers()
        .is_ok_and(|h| h.iter().eq(OBSERVATION_HEADER))
}

/// Reads observations in file order. Rejects malformed rows (with their
/// line number) and duplicate `(territory, indicator, period)` keys.
pub fn read_observations<R: Read>(src: R, fmt: NumberFormat) -> Result<Vec<Observation>, DataError> {
    let mut rdr = reader(src, fmt);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != OBSERVATION_HEADER {
        return Err(DataError::Header {
            expected: OBSERVATION_HEADER.join(","),
            found: header.join(","),
        });
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let obs = parse_observation(&row, fmt).map_err(|message| DataError::Row { line, message })?;
        if !seen.insert((obs.territory.clone(), obs.indicator.clone(), obs.period)) {
            return Err(DataError::Duplicate {
                line,
                territory: obs.territory,
                indicator: obs.indicator,
                period: obs.period,
            });
        }
        out.push(obs);
    }
    Ok(out)
}

pub fn load_observations(path: &Path, fmt: NumberFormat) -> Result<Vec<Observation>, DataError> {
    read_observations(open(path)?, fmt)
}

pub fn load_dataset(path: &Path, fmt: NumberFormat) -> Result<Dataset, DataError> {
    Ok(Dataset::new(load_observations(path, fmt)?)?)
}

/// Writes observations in the loader's format.
pub fn write_observations<W: Write>(records: &[Observation], out: W, fmt: NumberFormat) -> Result<(), DataError> {
    let mut wtr = csv::WriterBuilder::new()
        .delimiter(fmt.delimiter())
        .from_writer(out);
    wtr.write_record(OBSERVATION_HEADER)?;
    let num = |v: Option<f64>| v.map(|v| fmt.format(v)).unwrap_or_default();
    for r in records {
        let (x_w, x_m, x_a, value) = match r.payload {
            Payload::Standard(p) => (Some(p.x_w), Some(p.x_m), p.x_a, None),
            Payload::Share { value } | Payload::Ratio { value } | Payload::Capped { value } => {
                (None, None, None, Some(value))
            }
        };
        wtr.write_record([
            r.territory.clone(),
            r.indicator.clone(),
            r.period.to_string(),
            r.payload.kind().to_string(),
            num(x_w),
            num(x_m),
            num(x_a),
            num(value),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// A table keyed by its first column with numeric (possibly empty) cells.
#[derive(Debug, Clone, PartialEq)]
pub struct WideTable {
    pub key_header: String,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<Option<f64>>)>,
}

impl WideTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn row(&self, key: &str) -> Option<&[Option<f64>]> {
        self.rows.iter().find(|r| r.0 == key).map(|r| r.1.as_slice())
    }

    pub fn get(&self, key: &str, column: &str) -> Option<f64> {
        let j = self.column_index(column)?;
        self.row(key)?[j]
    }

    pub fn keys(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.0.clone()).collect()
    }
}

pub fn read_wide_table<R: Read>(src: R, fmt: NumberFormat) -> Result<WideTable, DataError> {
    let mut rdr = reader(src, fmt);
    let header = rdr.headers()?.clone();
    let mut names = header.iter().map(str::to_owned);
    let key_header = names.next().unwrap_or_default();
    let columns: Vec<String> = names.collect();
    let mut rows = Vec::new();
    let mut keys = BTreeSet::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let key = row.get(0).unwrap_or("").to_owned();
        if key.is_empty() {
            return Err(DataError::Row {
                line,
                message: format!("`{key_header}` is empty"),
            });
        }
        if !keys.insert(key.clone()) {
            return Err(DataError::Row {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        let values = row
            .iter()
            .skip(1)
            .map(|c| fmt.parse_opt(c))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|message| DataError::Row { line, message })?;
        rows.push((key, values));
    }
    Ok(WideTable {
        key_header,
        columns,
        rows,
    })
}

pub fn load_wide_table(path: &Path, fmt: NumberFormat) -> Result<WideTable, DataError> {
    read_wide_table(open(path)?, fmt)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    name: String,
    domain_count: Option<usize>,
    #[serde(default)]
    aggregate_territories: Vec<String>,
    #[serde(rename = "domain")]
    domains: Vec<RawDomain>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    id: String,
    label: Option<String>,
    #[serde(default, rename = "subdomain")]
    subdomains: Vec<RawSubdomain>,
    #[serde(default, rename = "indicator")]
    indicators: Vec<RawIndicator>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubdomain {
    id: String,
    label: Option<String>,
    #[serde(rename = "indicator")]
    indicators: Vec<RawIndicator>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIndicator {
    id: String,
    label: Option<String>,
    metric: MetricKind,
    #[serde(default = "positive")]
    polarity: Polarity,
    correction: Correction,
    period: Option<i32>,
    #[allow(dead_code)]
    source: Option<String>,
    #[allow(dead_code)]
    definition: Option<String>,
}

fn positive() -> Polarity {
    Polarity::Positive
}

fn subdomain_of(domain: &str, sub_id: &str, sub_label: &str, raw: Vec<RawIndicator>, implicit: bool) -> (Subdomain, Vec<IndicatorSpec>) {
    let specs: Vec<IndicatorSpec> = raw
        .into_iter()
        .map(|r| IndicatorSpec {
            label: r.label.unwrap_or_else(|| r.id.clone()),
            id: r.id,
            domain: domain.to_owned(),
            subdomain: sub_id.to_owned(),
            metric: r.metric,
            polarity: r.polarity,
            correction: r.correction,
            period: r.period,
        })
        .collect();
    let sub = Subdomain {
        id: sub_id.to_owned(),
        label: sub_label.to_owned(),
        indicators: specs.iter().map(|s| s.id.clone()).collect(),
        implicit,
    };
    (sub, specs)
}

/// Parses an index definition.
///
/// A domain either lists `[[domain.subdomain]]` tables or its indicators
/// directly; the latter becomes a single implicit sub-domain named after the
/// domain.
pub fn parse_index_spec(text: &str) -> Result<IndexSpec, DataError> {
    let raw: RawSpec = toml::from_str(text)?;
    if let Some(declared) = raw.domain_count {
        if declared != raw.domains.len() {
            return Err(SpecError::DomainCount {
                declared,
                found: raw.domains.len(),
            }
            .into());
        }
    }
    let mut indicators = Vec::new();
    let mut domains = Vec::new();
    for d in raw.domains {
        let label = d.label.unwrap_or_else(|| d.id.clone());
        let mut subs = Vec::new();
        if !d.indicators.is_empty() && !d.subdomains.is_empty() {
            return Err(DataError::Definition(format!(
                "domain `{}` mixes direct indicators and sub-domains",
                d.id
            )));
        }
        if !d.indicators.is_empty() {
            let (sub, specs) = subdomain_of(&d.id, &d.id, &label, d.indicators, true);
            subs.push(sub);
            indicators.extend(specs);
        }
        for s in d.subdomains {
            let sub_label = s.label.unwrap_or_else(|| s.id.clone());
            let (sub, specs) = subdomain_of(&d.id, &s.id, &sub_label, s.indicators, false);
            subs.push(sub);
            indicators.extend(specs);
        }
        domains.push(Domain {
            id: d.id,
            label,
            subdomains: subs,
        });
    }
    Ok(IndexSpec::new(
        raw.name,
        indicators,
        IndexTree { domains },
        raw.aggregate_territories,
    )?)
}

pub fn load_index_spec(path: &Path) -> Result<IndexSpec, DataError> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text)?;
    parse_index_spec(&text)
}
