//! CSV ingestion and result files, the flat `key = value` run configuration,
//! and the inline band syntax shared by both.
//!
//! Every number is written with 17 significant digits so that reading a file
//! back reproduces the doubles exactly.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::diagnostics::{SeasonalityReport, WCorrelationMatrix};
use crate::embed::TimeSeries;
use crate::error::{Error, Result};
use crate::moments::Variant;
use crate::simulate::QuantileTable;
use crate::ssa::{Band, Decomposition, GroupingSpec};

/// Fewest observations accepted from a file.
pub const MIN_ROWS: usize = 4;

/// Formats a double with 17 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// A column picked by header name or by 0-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Name(String),
    Index(usize),
}

impl FromStr for ColumnSelector {
    type Err = std::convert::Infallible;

    /// All-digit strings are positions, anything else is a header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.trim().parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(s.trim().to_string()),
        })
    }
}

impl fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnSelector::Name(n) => f.write_str(n),
            ColumnSelector::Index(i) => write!(f, "#{i}"),
        }
    }
}

impl Default for ColumnSelector {
    fn default() -> Self {
        ColumnSelector::Index(0)
    }
}

fn resolve(sel: &ColumnSelector, header: Option<&csv::StringRecord>, width: usize) -> Result<usize> {
    match sel {
        ColumnSelector::Index(i) if *i < width => Ok(*i),
        ColumnSelector::Index(_) => Err(Error::ColumnMissing(sel.to_string())),
        ColumnSelector::Name(name) => header
            .and_then(|h| h.iter().position(|c| c.trim() == name))
            .ok_or_else(|| Error::ColumnMissing(name.clone())),
    }
}

fn column_label(sel: &ColumnSelector, header: Option<&csv::StringRecord>, idx: usize) -> String {
    match (sel, header) {
        (ColumnSelector::Name(n), _) => n.clone(),
        (_, Some(h)) => h.get(idx).unwrap_or_default().trim().to_string(),
        _ => idx.to_string(),
    }
}

/// Dates as `YYYY-MM`, `YYYY-MM-DD`, or a plain number (e.g. a decimal year).
fn parse_date(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let parts: Vec<&str> = s.split('-').collect();
    if !(2..=3).contains(&parts.len()) || parts[0].len() != 4 {
        return None;
    }
    let year: u32 = parts[0].parse().ok()?;
    let month: u32 = parts[1].parse().ok()?;
    let day: u32 = match parts.get(2) {
        Some(d) => d.parse().ok()?,
        None => 1,
    };
    if !(1..=12).contains(&month) || !(1..=31).contains(&day) {
        return None;
    }
    Some(f64::from(year * 10_000 + month * 100 + day))
}

/// Reads one numeric column from a comma-separated file.
///
/// A header row is assumed when a column is selected by name, or when some
/// cell of the first row is not a number. Row numbers in errors are 1-based
/// file lines, header included. Empty cells are errors: missing values are
/// never imputed. When `date_column` is given its values must be strictly
/// increasing.
pub fn read_series(path: &Path, column: &ColumnSelector, date_column: Option<&ColumnSelector>) -> Result<TimeSeries> {
    if !path.is_file() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_path(path)?;
    let records: Vec<csv::StringRecord> = reader.records().collect::<std::result::Result<_, _>>()?;
    let Some(first) = records.first() else {
        return Err(Error::TooShort { needed: MIN_ROWS, got: 0 });
    };

    let names_used = matches!(column, ColumnSelector::Name(_)) || matches!(date_column, Some(ColumnSelector::Name(_)));
    let has_header = names_used || first.iter().any(|c| c.trim().parse::<f64>().is_err());
    let header = has_header.then_some(first);
    let width = first.len();

    let value_idx = resolve(column, header, width)?;
    let value_name = column_label(column, header, value_idx);
    let date = date_column
        .map(|sel| resolve(sel, header, width).map(|i| (i, column_label(sel, header, i))))
        .transpose()?;

    let skip = usize::from(has_header);
    let mut values = Vec::with_capacity(records.len());
    let mut last_date: Option<f64> = None;
    for (i, rec) in records.iter().enumerate().skip(skip) {
        let row = i + 1;
        let cell = rec.get(value_idx).unwrap_or("").trim();
        let v = cell
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::NonNumericCell { row, column: value_name.clone(), value: cell.to_string() })?;
        values.push(v);

        if let Some((di, dname)) = &date {
            let cell = rec.get(*di).unwrap_or("").trim();
            let d = parse_date(cell)
                .ok_or_else(|| Error::NonNumericCell { row, column: dname.clone(), value: cell.to_string() })?;
            if last_date.is_some_and(|prev| d <= prev) {
                return Err(Error::NonMonotoneDates { row });
            }
            last_date = Some(d);
        }
    }
    if values.len() < MIN_ROWS {
        return Err(Error::TooShort { needed: MIN_ROWS, got: values.len() });
    }
    Ok(TimeSeries::from_finite(values).with_label(value_name))
}

/// Writes `(t, value)` rows with `t` starting at 1.
pub fn write_series(path: &Path, name: &str, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", name])?;
    for (t, v) in values.iter().enumerate() {
        w.write_record([(t + 1).to_string(), format_value(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// `shares.csv`: one row per component, in decomposition order.
pub fn write_shares(path: &Path, d: &Decomposition) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["component", "contribution_pct"])?;
    for (name, share) in d.shares() {
        w.write_record([name.to_string(), format_value(share)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum(path: &Path, spectrum: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["frequency", "eigenvalue"])?;
    for &(f, l) in spectrum {
        w.write_record([format_value(f), format_value(l)])?;
    }
    w.flush()?;
    Ok(())
}

/// Square matrix with a leading label column; undefined entries are `NA`.
pub fn write_w_correlation(path: &Path, m: &WCorrelationMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["component".to_string()];
    header.extend(m.labels.iter().cloned());
    w.write_record(&header)?;
    for (label, row) in m.labels.iter().zip(&m.entries) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|e| e.map_or_else(|| "NA".to_string(), format_value)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_seasonality_report(path: &Path, r: &SeasonalityReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["frequency", "share", "threshold", "flagged"])?;
    for e in &r.entries {
        w.write_record([
            format_value(e.frequency),
            format_value(e.share),
            format_value(r.threshold),
            e.flagged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_quantile_table(path: &Path, t: &QuantileTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["component", "statistic", "q5", "q25", "q50", "q75", "q95"])?;
    for row in &t.rows {
        let mut rec = vec![row.component.clone(), row.statistic.clone()];
        rec.extend(row.quantiles.iter().map(|&q| format_value(q)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// File name used for a component's own CSV.
pub fn component_file_name(name: &str) -> String {
    let safe: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("component_{safe}.csv")
}

/// Writes the full result set for a decomposition into `dir`, creating it if
/// needed:
///
/// * `component_<name>.csv` for every component,
/// * `decomposition.csv` with columns `t, original, <components...>`,
/// * `shares.csv`,
/// * `spectrum.csv` when the decomposition carries an eigenvalue spectrum,
/// * `wcorrelation.csv` when `w_corr` is given.
///
/// Returns the paths written, in that order.
pub fn write_decomposition(d: &Decomposition, dir: &Path, w_corr: Option<&WCorrelationMatrix>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    for c in &d.components {
        let path = dir.join(component_file_name(&c.name));
        write_series(&path, &c.name, c.series.values())?;
        written.push(path);
    }

    let path = dir.join("decomposition.csv");
    let mut w = csv::Writer::from_path(&path)?;
    let mut header = vec!["t".to_string(), "original".to_string()];
    header.extend(d.components.iter().map(|c| c.name.clone()));
    w.write_record(&header)?;
    for t in 0..d.original.len() {
        let mut rec = vec![(t + 1).to_string(), format_value(d.original.values()[t])];
        rec.extend(d.components.iter().map(|c| format_value(c.series.values()[t])));
        w.write_record(&rec)?;
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("shares.csv");
    write_shares(&path, d)?;
    written.push(path);

    if let Some(spectrum) = &d.eigenvalue_spectrum {
        let path = dir.join("spectrum.csv");
        write_spectrum(&path, spectrum)?;
        written.push(path);
    }
    if let Some(m) = w_corr {
        let path = dir.join("wcorrelation.csv");
        write_w_correlation(&path, m)?;
        written.push(path);
    }
    Ok(written)
}

/// Reads a two-column numeric CSV with a header row, e.g. a component file.
pub fn read_named_column(path: &Path, name: &str) -> Result<Vec<f64>> {
    Ok(read_series(path, &ColumnSelector::Name(name.to_string()), None)?.into_values())
}

/// A frequency written as a decimal (`0.0833`) or a fraction (`1/12`).
pub fn parse_frequency(s: &str) -> Option<f64> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((n, d)) => {
            let d: f64 = d.trim().parse().ok()?;
            if d == 0.0 {
                return None;
            }
            n.trim().parse::<f64>().ok()? / d
        }
        None => s.parse().ok()?,
    };
    v.is_finite().then_some(v)
}

/// Residual name used when a band specification does not set one.
pub const DEFAULT_RESIDUAL: &str = "irregular";

/// Parses the inline band syntax
///
/// ```text
/// trend=0:1/128; cycle=1/96:1/18; seasonal=1/12,1/6,1/4,1/3,5/12,1/2; residual=irregular
/// ```
///
/// Each entry is `name=intervals`, where intervals are comma-separated and
/// each is `lo:hi` or a single frequency. Repeating a name adds intervals to
/// the same band. The reserved name `residual` sets the residual's name.
/// Newlines act like `;` and `#` starts a comment, so the same text can
/// live in a file.
pub fn parse_bands(text: &str) -> Result<GroupingSpec> {
    let mut bands: Vec<Band> = Vec::new();
    let mut residual: Option<String> = None;
    let cleaned: Vec<&str> = text.lines().map(|l| l.split('#').next().unwrap_or("")).collect();
    let joined = cleaned.join(";");
    for entry in joined.split(';').map(str::trim).filter(|e| !e.is_empty()) {
        let (name, spec) = entry
            .split_once('=')
            .ok_or_else(|| Error::InvalidGrouping(format!("expected name=intervals, got {entry:?}")))?;
        let name = name.trim();
        if name == "residual" {
            residual = Some(spec.trim().to_string());
            continue;
        }
        let mut intervals = Vec::new();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let bad = || Error::InvalidGrouping(format!("cannot parse interval {part:?} of band {name:?}"));
            let (lo, hi) = match part.split_once(':') {
                Some((lo, hi)) => (parse_frequency(lo).ok_or_else(bad)?, parse_frequency(hi).ok_or_else(bad)?),
                None => {
                    let f = parse_frequency(part).ok_or_else(bad)?;
                    (f, f)
                }
            };
            intervals.push((lo, hi));
        }
        if intervals.is_empty() {
            return Err(Error::InvalidGrouping(format!("band {name:?} has no intervals")));
        }
        match bands.iter_mut().find(|b| b.name == name) {
            Some(b) => b.intervals.extend(intervals),
            None => bands.push(Band { name: name.to_string(), intervals }),
        }
    }
    GroupingSpec::new(bands, residual.unwrap_or_else(|| DEFAULT_RESIDUAL.to_string()))
}

/// Band specification given either inline or as the path of a file holding
/// the same syntax.
pub fn load_bands(arg: &str) -> Result<GroupingSpec> {
    let path = Path::new(arg);
    if !arg.contains('=') && path.is_file() {
        return parse_bands(&fs::read_to_string(path)?);
    }
    if !arg.contains('=') {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    parse_bands(arg)
}

/// Settings for a run. Every field is optional so that a config file and
/// command-line flags can be layered; see [`RunConfig::KEYS`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub column: Option<ColumnSelector>,
    pub date_column: Option<ColumnSelector>,
    pub window_length: Option<usize>,
    pub variant: Option<Variant>,
    pub bands: Option<GroupingSpec>,
    pub demean: Option<bool>,
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Some(true),
        "false" | "no" | "off" | "0" => Some(false),
        _ => None,
    }
}

impl RunConfig {
    pub const KEYS: [&'static str; 10] =
        ["input", "column", "date_column", "window", "variant", "bands", "demean", "seed", "reps", "out"];

    /// Parses `key = value` lines. Blank lines and `#` comments are ignored;
    /// unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config { line: line_no, message };
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(err(format!("key {key:?} given twice")));
            }
            let invalid = || err(format!("invalid value {value:?} for {key}"));
            match key {
                "input" => cfg.input = Some(PathBuf::from(value)),
                "column" => cfg.column = Some(value.parse().expect("infallible")),
                "date_column" => cfg.date_column = Some(value.parse().expect("infallible")),
                "window" => cfg.window_length = Some(value.parse().map_err(|_| invalid())?),
                "variant" => cfg.variant = Some(value.parse().map_err(|_| invalid())?),
                // inline syntax only; `;` separates bands on one line
                "bands" => cfg.bands = Some(parse_bands(value).map_err(|e| err(e.to_string()))?),
                "demean" => cfg.demean = Some(parse_bool(value).ok_or_else(invalid)?),
                "seed" => cfg.seed = Some(value.parse().map_err(|_| invalid())?),
                "reps" => cfg.reps = Some(value.parse().map_err(|_| invalid())?),
                "out" => cfg.output_dir = Some(PathBuf::from(value)),
                _ => return Err(err(format!("unknown key {key:?}; known keys: {}", Self::KEYS.join(", ")))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::FileNotFound(path.to_path_buf()));
        }
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overridden_by(self, other: RunConfig) -> RunConfig {
        RunConfig {
            input: other.input.or(self.input),
            column: other.column.or(self.column),
            date_column: other.date_column.or(self.date_column),
            window_length: other.window_length.or(self.window_length),
            variant: other.variant.or(self.variant),
            bands: other.bands.or(self.bands),
            demean: other.demean.or(self.demean),
            seed: other.seed.or(self.seed),
            reps: other.reps.or(self.reps),
            output_dir: other.output_dir.or(self.output_dir),
        }
    }
}
