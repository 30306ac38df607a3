//! Rendering of scores, statistics and verification results.
//!
//! Every command builds a [`Document`] that can be printed as an aligned
//! text table, as CSV or as JSON. Text tables round index and domain values
//! to 2 decimals and indicator scores to 3; CSV and JSON keep full precision.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::io::NumberFormat;
use crate::pipeline::TerritoryReport;
use crate::stats::{correlation_matrix, descriptive_summary, rank_table, CorrelationMatrix, DescriptiveSummary};
use crate::verify::VerifyReport;

pub const LEVEL_DECIMALS: usize = 2;
pub const INDICATOR_DECIMALS: usize = 3;
const CHECK_DECIMALS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(i64),
    /// A number and the decimals used in text tables.
    Num(f64, usize),
    Empty,
}

impl Cell {
    fn is_text(&self) -> bool {
        matches!(self, Cell::Text(_))
    }

    fn render(&self, fmt: NumberFormat, rounded: bool) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(v, dp) if rounded => {
                let s = format!("{v:.dp$}");
                if fmt.decimal_comma {
                    s.replace('.', ",")
                } else {
                    s
                }
            }
            Cell::Num(v, _) => fmt.format(*v),
            Cell::Empty => String::new(),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// A titled table with optional trailing notes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Grid {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<String>,
}

impl Grid {
    pub fn new(title: impl Into<String>, headers: Vec<String>) -> Self {
        Self {
            title: title.into(),
            headers,
            ..Default::default()
        }
    }

    fn write_text<W: Write>(&self, out: &mut W, fmt: NumberFormat) -> std::io::Result<()> {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|c| c.render(fmt, true)).collect())
            .collect();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        // Text columns are left-aligned, judged by the first row.
        let left: Vec<bool> = (0..self.headers.len())
            .map(|j| self.rows.first().is_none_or(|r| r.get(j).is_some_and(Cell::is_text)))
            .collect();
        let line = |values: &[String]| -> String {
            let parts: Vec<String> = values
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let pad = widths[j].saturating_sub(v.chars().count());
                    if left[j] {
                        format!("{v}{}", " ".repeat(pad))
                    } else {
                        format!("{}{v}", " ".repeat(pad))
                    }
                })
                .collect();
            parts.join("  ").trim_end().to_owned()
        };
        if !self.title.is_empty() {
            writeln!(out, "{}", self.title)?;
        }
        writeln!(out, "{}", line(&self.headers))?;
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        writeln!(out, "{}", rule.join("  "))?;
        for row in &cells {
            writeln!(out, "{}", line(row))?;
        }
        for note in &self.notes {
            writeln!(out, "{note}")?;
        }
        Ok(())
    }

    fn write_csv<W: Write>(&self, out: W, fmt: NumberFormat) -> csv::Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .delimiter(fmt.delimiter())
            .from_writer(out);
        wtr.write_record(&self.headers)?;
        for row in &self.rows {
            wtr.write_record(row.iter().map(|c| c.render(fmt, false)))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// One command's output in all three shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub sections: Vec<Grid>,
    pub csv: Grid,
    pub json: Value,
}

impl Document {
    pub fn write<W: Write>(&self, mut out: W, format: OutputFormat, fmt: NumberFormat) -> std::io::Result<()> {
        match format {
            OutputFormat::Table => {
                for (i, grid) in self.sections.iter().enumerate() {
                    if i > 0 {
                        writeln!(out)?;
                    }
                    grid.write_text(&mut out, fmt)?;
                }
                Ok(())
            }
            OutputFormat::Csv => self.csv.write_csv(out, fmt).map_err(std::io::Error::other),
            OutputFormat::Json => {
                serde_json::to_writer_pretty(&mut out, &self.json)?;
                writeln!(out)
            }
        }
    }

    pub fn render(&self, format: OutputFormat, fmt: NumberFormat) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf, format, fmt).expect("writing to memory");
        String::from_utf8(buf).expect("rendered output is UTF-8")
    }
}

/// Flattens sections into `table,row,column,value` records.
fn long_format(sections: &[Grid]) -> Grid {
    let mut grid = Grid::new("", ["table", "row", "column", "value"].map(String::from).to_vec());
    for s in sections {
        for row in &s.rows {
            let key = match row.first() {
                Some(Cell::Text(t)) => t.clone(),
                Some(other) => other.render(NumberFormat::default(), false),
                None => continue,
            };
            for (h, c) in s.headers.iter().zip(row).skip(1) {
                grid.rows.push(vec![s.title.clone().into(), key.clone().into(), h.clone().into(), c.clone()]);
            }
        }
    }
    grid
}

fn level_columns(r: &TerritoryReport) -> Vec<String> {
    r.domains.iter().map(|d| d.id.clone()).chain(["index".to_owned()]).collect()
}

fn level_cells(r: &TerritoryReport, dp: usize) -> Vec<Cell> {
    r.domains
        .iter()
        .map(|d| Cell::Num(d.value, dp))
        .chain([Cell::Num(r.index, dp)])
        .collect()
}

fn period_suffix(period: Option<i32>) -> String {
    period.map(|p| format!(" ({p})")).unwrap_or_default()
}

/// Indicator and level tables for scored territories, one block per period.
pub fn scores_document(periods: &BTreeMap<Option<i32>, Vec<TerritoryReport>>) -> Document {
    let mut sections = Vec::new();
    let mut csv = Grid::default();
    let mut json_rows = Vec::new();
    let with_period = periods.keys().any(Option::is_some);

    for (period, reports) in periods {
        let Some(first) = reports.first() else {
            continue;
        };
        let indicator_ids: Vec<String> = first.indicators.iter().map(|v| v.id.clone()).collect();
        let subdomain_ids: Vec<String> = first.subdomains.iter().map(|v| v.id.clone()).collect();
        let levels = level_columns(first);

        let mut ind = Grid::new(
            format!("Indicator scores{}", period_suffix(*period)),
            std::iter::once("territory".to_owned()).chain(indicator_ids.iter().cloned()).collect(),
        );
        let mut lvl = Grid::new(
            format!("Domains and index{}", period_suffix(*period)),
            std::iter::once("territory".to_owned()).chain(levels.iter().cloned()).collect(),
        );
        if csv.headers.is_empty() {
            csv.headers = std::iter::once("territory".to_owned())
                .chain(with_period.then(|| "period".to_owned()))
                .chain(indicator_ids.iter().cloned())
                .chain(subdomain_ids.iter().cloned())
                .chain(levels.iter().cloned())
                .collect();
        }
        for r in reports {
            let name = Cell::from(r.territory.as_str());
            let scores: Vec<Cell> = r.indicators.iter().map(|v| Cell::Num(v.value, INDICATOR_DECIMALS)).collect();
            ind.rows.push(std::iter::once(name.clone()).chain(scores.iter().cloned()).collect());
            lvl.rows.push(std::iter::once(name.clone()).chain(level_cells(r, LEVEL_DECIMALS)).collect());

            let mut row = vec![name];
            if with_period {
                row.push(period.map_or(Cell::Empty, |p| Cell::Int(p.into())));
            }
            row.extend(scores);
            row.extend(r.subdomains.iter().map(|v| Cell::Num(v.value, LEVEL_DECIMALS)));
            row.extend(level_cells(r, LEVEL_DECIMALS));
            csv.rows.push(row);

            let mut value = serde_json::to_value(r).expect("report serializes");
            if let (Some(p), Value::Object(map)) = (period, &mut value) {
                map.insert("period".into(), json!(p));
            }
            json_rows.push(value);
        }
        sections.push(ind);
        sections.push(lvl);
    }
    Document {
        sections,
        csv,
        json: json!({ "territories": json_rows }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: String,
    #[serde(flatten)]
    pub summary: DescriptiveSummary,
}

/// Ranking, descriptive statistics and indicator correlations over the
/// territories in `scope`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatisticalReport {
    pub period: Option<i32>,
    pub ranking: Vec<(usize, String, f64)>,
    pub levels: Vec<LevelSummary>,
    pub indicators: Vec<LevelSummary>,
    pub correlations: Option<CorrelationMatrix>,
    pub correlation_error: Option<String>,
}

pub fn statistical_report(reports: &[TerritoryReport], scope: &[String], period: Option<i32>) -> StatisticalReport {
    let in_scope: Vec<TerritoryReport> = reports
        .iter()
        .filter(|r| scope.contains(&r.territory))
        .cloned()
        .collect();
    let ranking = rank_table(&in_scope)
        .into_iter()
        .enumerate()
        .map(|(i, r)| (i + 1, r.territory.clone(), r.index))
        .collect();

    let summarize = |level: &str, values: Vec<f64>| {
        descriptive_summary(&values).ok().map(|summary| LevelSummary {
            level: level.to_owned(),
            summary,
        })
    };
    let mut levels = Vec::new();
    let mut indicators = Vec::new();
    let mut columns = Vec::new();
    if let Some(first) = in_scope.first() {
        levels.extend(summarize("index", in_scope.iter().map(|r| r.index).collect()));
        for d in &first.domains {
            levels.extend(summarize(&d.id, in_scope.iter().filter_map(|r| r.domain(&d.id)).collect()));
        }
        for ind in &first.indicators {
            let values: Vec<f64> = in_scope.iter().filter_map(|r| r.indicator(&ind.id)).collect();
            indicators.extend(summarize(&ind.id, values.clone()));
            columns.push((ind.id.clone(), values));
        }
    }
    let (correlations, correlation_error) = match correlation_matrix(&columns) {
        Ok(m) => (Some(m), None),
        Err(e) => (None, Some(e.to_string())),
    };
    StatisticalReport {
        period,
        ranking,
        levels,
        indicators,
        correlations,
        correlation_error,
    }
}

fn summary_grid(title: String, rows: &[LevelSummary], dp: usize) -> Grid {
    let mut grid = Grid::new(
        title,
        ["level", "n", "mean", "sd", "cv", "min", "p25", "p50", "p75", "max"]
            .map(String::from)
            .to_vec(),
    );
    for r in rows {
        let s = &r.summary;
        grid.rows.push(vec![
            r.level.clone().into(),
            Cell::Int(s.n as i64),
            Cell::Num(s.mean, dp),
            Cell::Num(s.sd, dp),
            s.cv.map_or(Cell::Empty, |v| Cell::Num(v, dp)),
            Cell::Num(s.min, dp),
            Cell::Num(s.p25, dp),
            Cell::Num(s.p50, dp),
            Cell::Num(s.p75, dp),
            Cell::Num(s.max, dp),
        ]);
    }
    grid
}

pub fn statistical_document(reports: &[StatisticalReport]) -> Document {
    let mut sections = Vec::new();
    for rep in reports {
        let suffix = period_suffix(rep.period);
        let mut ranking = Grid::new(
            format!("Ranking{suffix}"),
            ["rank", "territory", "index"].map(String::from).to_vec(),
        );
        for (rank, territory, index) in &rep.ranking {
            ranking.rows.push(vec![
                Cell::Int(*rank as i64),
                territory.clone().into(),
                Cell::Num(*index, LEVEL_DECIMALS),
            ]);
        }
        sections.push(ranking);
        sections.push(summary_grid(format!("Index and domain statistics{suffix}"), &rep.levels, LEVEL_DECIMALS));
        sections.push(summary_grid(
            format!("Indicator statistics{suffix}"),
            &rep.indicators,
            INDICATOR_DECIMALS,
        ));
        let mut corr = Grid::new(format!("Indicator correlations{suffix}"), vec!["indicator".into()]);
        if let Some(m) = &rep.correlations {
            corr.headers.extend(m.labels.iter().cloned());
            for (label, row) in m.labels.iter().zip(&m.values) {
                corr.rows.push(
                    std::iter::once(Cell::from(label.as_str()))
                        .chain(row.iter().map(|v| Cell::Num(*v, INDICATOR_DECIMALS)))
                        .collect(),
                );
            }
        }
        if let Some(e) = &rep.correlation_error {
            corr.notes.push(format!("correlations unavailable: {e}"));
        }
        sections.push(corr);
    }
    let csv = long_format(&sections);
    Document {
        sections,
        csv,
        json: json!({ "reports": reports }),
    }
}

pub fn verify_document(report: &VerifyReport) -> Document {
    use crate::verify::CheckStatus;
    let mut grid = Grid::new(
        "Verification",
        ["status", "check", "expected", "actual", "delta", "tolerance", "note"]
            .map(String::from)
            .to_vec(),
    );
    let num = |v: Option<f64>| v.map_or(Cell::Empty, |v| Cell::Num(v, CHECK_DECIMALS));
    for c in &report.checks {
        grid.rows.push(vec![
            c.status.label().into(),
            c.name.clone().into(),
            num(c.expected),
            num(c.actual),
            num(c.delta()),
            num(Some(c.tolerance)),
            c.note.clone().unwrap_or_default().into(),
        ]);
    }
    let csv = grid.clone();
    grid.notes.push(format!(
        "{} checks: {} passed, {} known deviations, {} failed",
        report.checks.len(),
        report.count(CheckStatus::Pass),
        report.count(CheckStatus::KnownDeviation),
        report.count(CheckStatus::Fail),
    ));
    Document {
        sections: vec![grid],
        csv,
        json: json!({ "passed": report.passed(), "checks": report.checks }),
    }
}

/// One fictional-country row: raw rates and both scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoRow {
    pub territory: String,
    pub x_w: f64,
    pub x_m: f64,
    pub x_a: f64,
    pub gei: f64,
    pub igei: f64,
}

pub fn demo_document(rows: &[DemoRow], best: f64) -> Document {
    let mut grid = Grid::new(
        "Fictional countries: GEI and IGEI scores",
        ["country", "women", "men", "total", "gei", "igei"].map(String::from).to_vec(),
    );
    for r in rows {
        grid.rows.push(vec![
            r.territory.clone().into(),
            Cell::Num(r.x_w, LEVEL_DECIMALS),
            Cell::Num(r.x_m, LEVEL_DECIMALS),
            Cell::Num(r.x_a, LEVEL_DECIMALS),
            Cell::Num(r.gei, LEVEL_DECIMALS),
            Cell::Num(r.igei, LEVEL_DECIMALS),
        ]);
    }
    let csv = grid.clone();
    grid.notes.push(format!("best total level: {best}"));
    Document {
        sections: vec![grid],
        csv,
        json: json!({ "best_total": best, "rows": rows }),
    }
}
