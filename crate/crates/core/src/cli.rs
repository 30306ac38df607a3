//! Command-line interface.
//!
//! Exit status: 0 on success, 1 when validation or verification fails or the
//! data cannot be scored, 2 for unreadable inputs and usage errors.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self as stdio, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::data::{Dataset, Payload};
use crate::fixtures;
use crate::gap;
use crate::index::{Basis, IndexSpec};
use crate::io::{self, DataError, NumberFormat, WideTable};
use crate::pipeline::{self, PipelineError, ReferenceKey, TerritoryReport};
use crate::report::{self, DemoRow, Document, OutputFormat};
use crate::validate::validate_dataset;
use crate::verify::{self, CheckStatus};

#[derive(Debug, Parser)]
#[command(name = "igei", version, about = "Build and check composite gender equality indices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t, global = true)]
    pub format: OutputFormat,
    /// Read and write `;`-separated files with `,` as the decimal mark.
    #[arg(long, global = true)]
    pub decimal_comma: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score raw observations and aggregate them into domains and the index.
    Score(ScoreArgs),
    /// Aggregate a table of indicator scores (default: the bundled 2023 scores).
    Aggregate(AggregateArgs),
    /// Ranking, descriptive statistics and indicator correlations.
    Report(ReportArgs),
    /// Replay the bundled reference tables and report every check.
    Verify,
    /// Compare GEI and IGEI scores on five fictional countries.
    Demo,
}

#[derive(Debug, Args)]
pub struct SpecArg {
    /// Index definition (TOML). Defaults to the bundled IGEI definition.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScopeArgs {
    /// Comma-separated territories used for best levels and statistics.
    /// Defaults to every territory not declared as an aggregate.
    #[arg(long, value_delimiter = ',')]
    pub scope: Vec<String>,
    /// Score every period against best levels frozen over all periods.
    #[arg(long)]
    pub time_series: bool,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    /// Observation file.
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub scope: ScopeArgs,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    /// Indicator score table: a territory column then one column per indicator.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub spec: SpecArg,
    /// Observation file or indicator score table, told apart by the header.
    /// Defaults to the bundled 2023 indicator scores.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub scope: ScopeArgs,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write output: {0}")]
    Output(#[from] stdio::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Pipeline(_) => 1,
            CliError::Data(_) | CliError::Usage(_) | CliError::Output(_) => 2,
        }
    }
}

/// A command's document plus messages for stderr.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub document: Option<Document>,
    pub diagnostics: Vec<String>,
    pub success: bool,
}

impl Outcome {
    fn ok(document: Document) -> Self {
        Self {
            document: Some(document),
            diagnostics: Vec::new(),
            success: true,
        }
    }
}

fn number_format(cli: &Cli) -> NumberFormat {
    NumberFormat {
        decimal_comma: cli.decimal_comma,
    }
}

fn load_spec(arg: &SpecArg) -> Result<IndexSpec, CliError> {
    Ok(match &arg.spec {
        Some(path) => io::load_index_spec(path)?,
        None => fixtures::igei_spec(),
    })
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|source| {
            DataError::Open {
                path: path.display().to_string(),
                source,
            }
            .into()
        })
}

fn resolve_scope(spec: &IndexSpec, territories: &[String], requested: &[String]) -> Result<Vec<String>, CliError> {
    if requested.is_empty() {
        return Ok(spec.default_scope(territories));
    }
    let unknown: Vec<&str> = requested
        .iter()
        .filter(|t| !territories.contains(t))
        .map(String::as_str)
        .collect();
    if !unknown.is_empty() {
        return Err(CliError::Usage(format!("--scope names unknown territories: {}", unknown.join(", "))));
    }
    Ok(requested.to_vec())
}

type Periods = BTreeMap<Option<i32>, Vec<TerritoryReport>>;

/// Validates and scores observations, returning reports, scope and the
/// validation messages.
fn score_observations(
    dataset: &Dataset,
    spec: &IndexSpec,
    args: &ScopeArgs,
) -> Result<(Periods, Vec<String>, Vec<String>), CliError> {
    let territories = dataset.territories();
    let scope = resolve_scope(spec, &territories, &args.scope)?;
    let validation = validate_dataset(dataset.records(), spec, &territories);
    let messages: Vec<String> = validation.findings.iter().map(ToString::to_string).collect();
    if validation.has_errors() {
        return Err(CliError::Pipeline(PipelineError::Invalid(validation)));
    }
    let periods = if args.time_series {
        pipeline::score_time_series(dataset, spec, &scope)?
            .into_iter()
            .map(|(p, r)| (Some(p), r))
            .collect()
    } else {
        BTreeMap::from([(None, pipeline::score_cross_section(dataset, spec, &scope)?)])
    };
    Ok((periods, scope, messages))
}

fn aggregate_table(spec: &IndexSpec, table: &WideTable) -> Result<Vec<TerritoryReport>, CliError> {
    let unknown: Vec<&str> = table
        .columns
        .iter()
        .filter(|c| spec.indicator(c).is_none())
        .map(String::as_str)
        .collect();
    if !unknown.is_empty() {
        return Err(CliError::Usage(format!(
            "score table has columns that are not indicators of `{}`: {}",
            spec.name,
            unknown.join(", ")
        )));
    }
    let rows = fixtures::score_rows(table)?;
    rows.iter()
        .map(|(territory, scores)| {
            for (id, v) in scores {
                if !(0.0..=100.0).contains(v) {
                    return Err(CliError::Pipeline(PipelineError::Gap {
                        territory: territory.clone(),
                        indicator: id.clone(),
                        source: gap::GapError::OutOfModel(*v),
                    }));
                }
            }
            Ok(pipeline::aggregate_scores(&spec.tree, territory, scores)?)
        })
        .collect()
}

fn score_table(args: &AggregateArgs, fmt: NumberFormat) -> Result<(IndexSpec, WideTable), CliError> {
    let spec = load_spec(&args.spec)?;
    let table = match &args.data {
        Some(path) => io::read_wide_table(read_text(path)?.as_bytes(), fmt)?,
        None => fixtures::indicator_scores(),
    };
    Ok((spec, table))
}

fn run_score(args: &ScoreArgs, fmt: NumberFormat) -> Result<Outcome, CliError> {
    let spec = load_spec(&args.spec)?;
    let dataset = Dataset::new(io::read_observations(read_text(&args.data)?.as_bytes(), fmt)?).map_err(DataError::from)?;
    let (periods, _, messages) = score_observations(&dataset, &spec, &args.scope)?;
    let mut outcome = Outcome::ok(report::scores_document(&periods));
    outcome.diagnostics = messages;
    Ok(outcome)
}

fn run_aggregate(args: &AggregateArgs, fmt: NumberFormat) -> Result<Outcome, CliError> {
    let (spec, table) = score_table(args, fmt)?;
    let reports = aggregate_table(&spec, &table)?;
    Ok(Outcome::ok(report::scores_document(&BTreeMap::from([(None, reports)]))))
}

fn run_report(args: &ReportArgs, fmt: NumberFormat) -> Result<Outcome, CliError> {
    let spec = load_spec(&args.spec)?;
    let text = match &args.data {
        Some(path) => Some(read_text(path)?),
        None => None,
    };
    let (periods, scope, diagnostics) = match text {
        Some(text) if io::has_observation_header(&text, fmt) => {
            let dataset = Dataset::new(io::read_observations(text.as_bytes(), fmt)?).map_err(DataError::from)?;
            score_observations(&dataset, &spec, &args.scope)?
        }
        other => {
            if args.scope.time_series {
                return Err(CliError::Usage("--time-series needs an observation file".into()));
            }
            let table = match other {
                Some(text) => io::read_wide_table(text.as_bytes(), fmt)?,
                None => fixtures::indicator_scores(),
            };
            let reports = aggregate_table(&spec, &table)?;
            let scope = resolve_scope(&spec, &table.keys(), &args.scope.scope)?;
            (BTreeMap::from([(None, reports)]), scope, Vec::new())
        }
    };
    let stats: Vec<_> = periods
        .iter()
        .map(|(period, reports)| report::statistical_report(reports, &scope, *period))
        .collect();
    let mut outcome = Outcome::ok(report::statistical_document(&stats));
    outcome.diagnostics = diagnostics;
    Ok(outcome)
}

fn run_verify() -> Outcome {
    let result = verify::run_verification();
    let diagnostics = result
        .failures()
        .map(|c| {
            let num = |v: Option<f64>| v.map_or_else(|| "-".to_owned(), |v| v.to_string());
            format!(
                "FAIL {} expected={} actual={} tolerance={}{}",
                c.name,
                num(c.expected),
                num(c.actual),
                c.tolerance,
                c.note.as_deref().map(|n| format!(" note={n}")).unwrap_or_default()
            )
        })
        .collect();
    Outcome {
        document: Some(report::verify_document(&result)),
        diagnostics,
        success: result.count(CheckStatus::Fail) == 0,
    }
}

fn run_demo() -> Result<Outcome, CliError> {
    let spec = fixtures::fictional_spec();
    let dataset = Dataset::new(fixtures::fictional_observations()).map_err(DataError::from)?;
    let scope = dataset.territories();
    let refs = pipeline::resolve_references(&dataset, &spec, &scope, false)?;
    let indicator = &spec.indicators[0].id;
    let best = refs
        .maximum(&ReferenceKey {
            indicator: indicator.clone(),
            basis: Basis::Total,
        })
        .ok_or_else(|| PipelineError::UnresolvedReference(indicator.clone()))?;
    let reports = pipeline::score_cross_section(&dataset, &spec, &scope)?;
    let mut rows = Vec::new();
    for (obs, rep) in dataset.records().iter().zip(&reports) {
        let Payload::Standard(pair) = obs.payload else {
            continue;
        };
        let x_a = pair.x_a.unwrap_or_default();
        let gei = gap::score_gei(pair.x_w, x_a, best).map_err(|source| PipelineError::Gap {
            territory: obs.territory.clone(),
            indicator: obs.indicator.clone(),
            source,
        })?;
        rows.push(DemoRow {
            territory: rep.territory.clone(),
            x_w: pair.x_w,
            x_m: pair.x_m,
            x_a,
            gei,
            igei: rep.index,
        });
    }
    Ok(Outcome::ok(report::demo_document(&rows, best)))
}

/// Runs a parsed command without touching stdout or stderr.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let fmt = number_format(cli);
    match &cli.command {
        Command::Score(args) => run_score(args, fmt),
        Command::Aggregate(args) => run_aggregate(args, fmt),
        Command::Report(args) => run_report(args, fmt),
        Command::Verify => Ok(run_verify()),
        Command::Demo => run_demo(),
    }
}

fn emit(cli: &Cli, document: &Document) -> Result<(), CliError> {
    let fmt = number_format(cli);
    match &cli.out {
        Some(path) => {
            let file = File::create(path).map_err(|source| DataError::Open {
                path: path.display().to_string(),
                source,
            })?;
            let mut out = BufWriter::new(file);
            document.write(&mut out, cli.format, fmt)?;
            out.flush()?;
        }
        None => {
            let mut out = stdio::stdout().lock();
            document.write(&mut out, cli.format, fmt)?;
            out.flush()?;
        }
    }
    Ok(())
}

/// Runs the command, writes its output and maps the result to an exit code.
pub fn execute(cli: &Cli) -> ExitCode {
    let result = run(cli).and_then(|outcome| {
        if let Some(doc) = &outcome.document {
            emit(cli, doc)?;
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            for line in &outcome.diagnostics {
                eprintln!("{line}");
            }
            ExitCode::from(if outcome.success { 0 } else { 1 })
        }
        Err(CliError::Pipeline(PipelineError::Invalid(report))) => {
            for finding in &report.findings {
                eprintln!("{finding}");
            }
            eprintln!("error: dataset failed validation with {} error(s)", report.error_count());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("igei").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_parse() {
        let cli = parse(&["score", "--data", "x.csv", "--scope", "A,B", "--time-series", "--format", "csv"]);
        let Command::Score(args) = &cli.command else {
            panic!("expected score");
        };
        assert_eq!(args.scope.scope, ["A", "B"]);
        assert!(args.scope.time_series);
        assert_eq!(cli.format, OutputFormat::Csv);
        assert!(Cli::try_parse_from(["igei", "score"]).is_err());
        assert!(Cli::try_parse_from(["igei", "verify", "--format", "xml"]).is_err());
    }

    #[test]
    fn bundled_commands_succeed() {
        for args in [&["demo"][..], &["verify"], &["aggregate"], &["report"]] {
            let outcome = run(&parse(args)).unwrap();
            assert!(outcome.success, "{args:?}");
        }
    }

    #[test]
    fn unknown_scope_is_a_usage_error() {
        let err = run(&parse(&["report", "--scope", "Atlantis"])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
