//! The `cissa` command line: decompose a series into named frequency bands,
//! read off its circulant spectrum, or run the Monte Carlo study on simulated
//! data.
//!
//! Every command computes everything first and only then writes its files,
//! through a staging directory, so a failed run leaves no partial output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use cissa_core::diagnostics::{decomposition_w_correlation, monthly_seasonal_frequencies, residual_seasonality};
use cissa_core::io::{self, load_bands, write_quantile_table, write_seasonality_report, write_spectrum};
use cissa_core::simulate::{
    model_grouping, monte_carlo, Extractor, LinearModelParams, ModelSpec, MonteCarloConfig, NonlinearModelParams,
    QuantileTable, SsaExtractor,
};
use cissa_core::ssa::cissa_elementary;
use cissa_core::{
    decompose, default_monthly_grouping, read_series, Decomposition, Error, ErrorClass,
    FrequencyAssigner, GroupingSpec, Result, RunConfig, TimeSeries, Variant,
};

/// Output directory when neither `--out` nor the config file names one.
pub const DEFAULT_OUT_DIR: &str = "cissa-out";
/// Replications for `simulate` unless `--reps` or `--full` says otherwise.
pub const DEFAULT_REPS: usize = 500;
pub const FULL_REPS: usize = 10_000;
/// Business-cycle periods in months used by the default monthly bands.
pub const DEFAULT_CYCLE_PERIODS: (f64, f64) = (18.0, 96.0);
/// Row order of the summary table.
pub const SUMMARY_ORDER: [&str; 4] = ["trend", "cycle", "seasonal", "irregular"];

#[derive(Debug, Parser)]
#[command(name = "cissa", version, about = "Circulant singular spectrum analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a series into trend, cycle, seasonal and irregular components.
    Decompose(DecomposeArgs),
    /// Write the circulant eigenvalues (the spectral density at k/L).
    Spectrum(SpectrumArgs),
    /// Monte Carlo study of extraction quality on simulated series.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file holding the series.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Column name, or 0-based position.
    #[arg(long)]
    pub column: Option<String>,
    /// Column with dates (YYYY-MM, YYYY-MM-DD or numeric); must increase.
    #[arg(long)]
    pub date_column: Option<String>,
    /// Window length L, 1 < L < T/2.
    #[arg(long)]
    pub window: Option<usize>,
    /// Subtract the mean before the analysis [default: on].
    #[arg(long, overrides_with = "no_demean")]
    pub demean: bool,
    /// Analyse the series as given.
    #[arg(long = "no-demean")]
    pub no_demean: bool,
    /// Output directory.
    #[arg(long, env = "CISSA_OUT_DIR")]
    pub out: Option<PathBuf>,
    /// Flat `key = value` file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// cissa, basic or toeplitz.
    #[arg(long)]
    pub variant: Option<String>,
    /// Inline bands (`trend=0:1/192;cycle=1/96:1/18;...`) or a file with them.
    #[arg(long)]
    pub bands: Option<String>,
    /// Cycle periods `short:long` in observations for the default bands.
    #[arg(long, default_value = "18:96")]
    pub cycle_periods: String,
    /// Read Basic/Toeplitz eigentriple frequencies from the principal
    /// components instead of the eigenvectors.
    #[arg(long)]
    pub pc_frequency: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// linear or nonlinear.
    #[arg(long, default_value = "linear")]
    pub model: String,
    /// Replications [default: 500].
    #[arg(long)]
    pub reps: Option<usize>,
    /// Run the full 10,000 replications.
    #[arg(long, conflicts_with = "reps")]
    pub full: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Variants to compare; repeat or comma-separate [default: all three].
    #[arg(long, value_delimiter = ',')]
    pub variant: Vec<String>,
    #[arg(long, default_value_t = 48)]
    pub window: usize,
    /// Series length.
    #[arg(long, default_value_t = 193)]
    pub length: usize,
    #[arg(long, env = "CISSA_OUT_DIR")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Exit status for an error: 2 usage, 3 input, 4 numeric failure.
pub fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Usage => 2,
        ErrorClass::Input => 3,
        ErrorClass::Numeric => 4,
    }
}

/// Single-line, machine-parsable error report.
pub fn error_line(e: &Error) -> String {
    let detail = e.to_string().replace('\n', " ");
    format!("error[{}]: {detail}", e.tag())
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Decompose(args) => cmd_decompose(&args, out),
        Command::Spectrum(args) => cmd_spectrum(&args, out),
        Command::Simulate(args) => cmd_simulate(&args, out),
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    path.map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
}

fn demean_flag(args: &InputArgs) -> Option<bool> {
    if args.no_demean {
        Some(false)
    } else if args.demean {
        Some(true)
    } else {
        None
    }
}

fn input_config(args: &InputArgs) -> Result<RunConfig> {
    let flags = RunConfig {
        input: args.input.clone(),
        column: args.column.as_deref().map(|c| c.parse().expect("infallible")),
        date_column: args.date_column.as_deref().map(|c| c.parse().expect("infallible")),
        window_length: args.window,
        demean: demean_flag(args),
        output_dir: args.out.clone(),
        ..RunConfig::default()
    };
    Ok(load_config(args.config.as_deref())?.overridden_by(flags))
}

struct Prepared {
    original: TimeSeries,
    analysed: TimeSeries,
    mean: f64,
    window: usize,
    out_dir: PathBuf,
}

fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let input = cfg.input.as_deref().ok_or_else(|| Error::InvalidParams("--input is required".into()))?;
    let window = cfg.window_length.ok_or_else(|| Error::InvalidParams("--window is required".into()))?;
    let column = cfg.column.clone().unwrap_or_default();
    let original = read_series(input, &column, cfg.date_column.as_ref())?;
    cissa_core::embed::check_window(original.len(), window)?;
    let demean = cfg.demean.unwrap_or(true);
    let mean = if demean { original.mean() } else { 0.0 };
    let analysed = if demean { original.demeaned() } else { original.clone() };
    let out_dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    Ok(Prepared { original, analysed, mean, window, out_dir })
}

fn parse_cycle_periods(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidParams(format!("cycle periods must look like short:long, got {s:?}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// Writes files into a fresh sibling directory of `out_dir`, then moves
/// them into `out_dir`. Nothing appears in `out_dir` unless every file was
/// written.
fn commit_outputs(out_dir: &Path, write: impl FnOnce(&Path) -> Result<Vec<PathBuf>>) -> Result<Vec<PathBuf>> {
    let parent = match out_dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent)?;
    let leaf = out_dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let staging = parent.join(format!(".{leaf}.staging-{}", std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    fs::create_dir_all(&staging)?;
    let result = write(&staging).and_then(|files| {
        fs::create_dir_all(out_dir)?;
        files
            .iter()
            .map(|f| {
                let dest = out_dir.join(f.file_name().expect("staged files have names"));
                fs::rename(f, &dest)?;
                Ok(dest)
            })
            .collect::<Result<Vec<_>>>()
    });
    // best effort: the staging directory is empty on success
    let _ = fs::remove_dir_all(&staging);
    result
}

/// Position of a component name in the summary ordering.
fn summary_rank(name: &str) -> usize {
    SUMMARY_ORDER.iter().position(|s| s.eq_ignore_ascii_case(name)).unwrap_or(SUMMARY_ORDER.len())
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map(|f| f.to_uppercase().chain(c).collect()).unwrap_or_default()
}

/// Variance-contribution table: trend, cycle, seasonal, irregular first,
/// then any other components, then the total.
pub fn summary_table(d: &Decomposition) -> String {
    let mut rows: Vec<(&str, f64)> = d.shares();
    rows.sort_by_key(|(n, _)| summary_rank(n));
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(9);
    let mut s = format!("{:<width$}  {:>15}\n", "Component", "Contribution %");
    for (name, share) in &rows {
        s.push_str(&format!("{:<width$}  {:>15.1}\n", capitalize(name), share));
    }
    let total: f64 = rows.iter().map(|(_, v)| v).sum();
    s.push_str(&format!("{:<width$}  {:>15.1}\n", "Total", total));
    s
}

pub fn cmd_decompose(args: &DecomposeArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = input_config(&args.input)?;
    if let Some(v) = &args.variant {
        cfg.variant = Some(v.parse()?);
    }
    if let Some(b) = &args.bands {
        cfg.bands = Some(load_bands(b)?);
    }
    let p = prepare(&cfg)?;
    let variant = cfg.variant.unwrap_or(Variant::Circulant);
    let grouping = match cfg.bands.clone() {
        Some(g) => g,
        None => default_monthly_grouping(p.window, parse_cycle_periods(&args.cycle_periods)?)?,
    };
    let assigner = if args.pc_frequency { FrequencyAssigner::PrincipalComponent } else { FrequencyAssigner::Eigenvector };

    let mut d = decompose(&p.analysed, p.window, &grouping, variant, assigner)?;
    if p.mean != 0.0 {
        // the mean is a zero-frequency signal: give it back to whichever
        // band owns frequency 0, so the components still sum to the input
        let owner = grouping
            .band_for(0.0)
            .map_or_else(|| grouping.residual_name().to_string(), |i| grouping.bands()[i].name.clone());
        d.shift_component(&owner, p.mean);
        d.set_original(p.original.clone());
    }
    let w_corr = decomposition_w_correlation(&d)?;
    let adjusted: Vec<f64> = match d.component("seasonal") {
        Some(s) => p.original.values().iter().zip(s.series.values()).map(|(x, s)| x - s).collect(),
        None => d.residual().series.values().to_vec(),
    };
    let seasonality = residual_seasonality(&TimeSeries::new(adjusted)?, &monthly_seasonal_frequencies())?;

    let files = commit_outputs(&p.out_dir, |dir| {
        let mut files = io::write_decomposition(&d, dir, Some(&w_corr))?;
        let path = dir.join("seasonality.csv");
        write_seasonality_report(&path, &seasonality)?;
        files.push(path);
        Ok(files)
    })?;

    writeln!(out, "{} decomposition, L = {}, T = {}", variant, p.window, p.original.len())?;
    write!(out, "{}", summary_table(&d))?;
    let flagged: Vec<String> =
        seasonality.entries.iter().filter(|e| e.flagged).map(|e| format!("{:.4}", e.frequency)).collect();
    if flagged.is_empty() {
        writeln!(out, "residual seasonality: none flagged ({})", seasonality.method)?;
    } else {
        writeln!(out, "residual seasonality: flagged at {} ({})", flagged.join(", "), seasonality.method)?;
    }
    writeln!(out, "wrote {} files to {}", files.len(), p.out_dir.display())?;
    Ok(())
}

pub fn cmd_spectrum(args: &SpectrumArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = input_config(&args.input)?;
    let p = prepare(&cfg)?;
    let analysis = cissa_elementary(&p.analysed, p.window)?;
    let spectrum: Vec<(f64, f64)> = analysis
        .eigentriples
        .iter()
        .map(|e| (e.frequency.expect("circulant eigentriples carry a frequency"), e.eigenvalue))
        .collect();
    let files = commit_outputs(&p.out_dir, |dir| {
        let path = dir.join("spectrum.csv");
        write_spectrum(&path, &spectrum)?;
        Ok(vec![path])
    })?;
    let half = p.window / 2 + 1;
    let (peak_f, peak) = spectrum[..half].iter().copied().fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    writeln!(out, "peak eigenvalue {peak:.6e} at frequency {peak_f:.6}")?;
    writeln!(out, "wrote {}", files[0].display())?;
    Ok(())
}

fn simulate_config(args: &SimulateArgs) -> Result<(ModelSpec, usize, u64, Vec<Variant>, PathBuf)> {
    let cfg = load_config(args.config.as_deref())?;
    let reps = if args.full { FULL_REPS } else { args.reps.or(cfg.reps).unwrap_or(DEFAULT_REPS) };
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let variants: Vec<Variant> = if args.variant.is_empty() {
        cfg.variant.map_or_else(|| Variant::ALL.to_vec(), |v| vec![v])
    } else {
        args.variant.iter().map(|v| v.parse()).collect::<Result<_>>()?
    };
    let linear = LinearModelParams { length: args.length, ..LinearModelParams::reference(seed) };
    let model = match args.model.as_str() {
        "linear" => ModelSpec::Linear(linear),
        "nonlinear" => ModelSpec::Nonlinear(NonlinearModelParams { linear, ..NonlinearModelParams::reference(seed) }),
        other => return Err(Error::InvalidParams(format!("unknown model {other:?}; use linear or nonlinear"))),
    };
    let out_dir = args.out.clone().or(cfg.output_dir).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    Ok((model, reps, seed, variants, out_dir))
}

/// Builds one extractor per variant with bands at the model's frequencies.
pub fn model_extractors(params: &LinearModelParams, window: usize, variants: &[Variant]) -> Result<Vec<SsaExtractor>> {
    let grouping: GroupingSpec = model_grouping(params)?;
    Ok(variants
        .iter()
        .map(|&variant| SsaExtractor {
            variant,
            window_length: window,
            grouping: grouping.clone(),
            assigner: FrequencyAssigner::Eigenvector,
        })
        .collect())
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let (model, reps, seed, variants, out_dir) = simulate_config(args)?;
    if reps == 0 {
        return Err(Error::InvalidParams("--reps must be at least 1".into()));
    }
    cissa_core::embed::check_window(args.length, args.window)?;
    let extractors = model_extractors(model.linear_params(), args.window, &variants)?;
    let refs: Vec<&dyn Extractor> = extractors.iter().map(|e| e as &dyn Extractor).collect();
    let tables: Vec<QuantileTable> =
        monte_carlo(&MonteCarloConfig { model, n_reps: reps, master_seed: seed }, &refs)?;

    let model_name = match model {
        ModelSpec::Linear(_) => "linear",
        ModelSpec::Nonlinear(_) => "nonlinear",
    };
    let files = commit_outputs(&out_dir, |dir| {
        tables
            .iter()
            .map(|t| {
                let path = dir.join(format!("quantiles_{model_name}_{}.csv", t.label));
                write_quantile_table(&path, t)?;
                Ok(path)
            })
            .collect()
    })?;

    writeln!(out, "{model_name} model, {reps} replications, seed {seed}, L = {}", args.window)?;
    for t in &tables {
        writeln!(out, "{}: {} failed replications", t.label, t.failures)?;
        if let Some(msg) = &t.first_failure {
            writeln!(out, "  first failure: {msg}")?;
        }
        for r in &t.rows {
            writeln!(out, "  {:<9} {:<6} median {:>9.4}", r.component, r.statistic, r.median())?;
        }
    }
    writeln!(out, "wrote {} files to {}", files.len(), out_dir.display())?;
    Ok(())
}

#[cfg(test)]
mod end_to_end;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(exit_code(&Error::WindowOutOfRange { window: 9, len: 10 }), 2);
        assert_eq!(exit_code(&Error::FileNotFound("x".into())), 3);
        assert_eq!(exit_code(&Error::ConvergenceFailure { dim: 3 }), 4);
        assert_eq!(error_line(&Error::InvalidParams("a\nb".into())), "error[InvalidParams]: invalid parameters: a b");
    }

    #[test]
    fn summary_rows_in_table_order() {
        let x = TimeSeries::new((0..150).map(|t| (t as f64 * 0.52).sin() + 0.02 * t as f64).collect()).unwrap();
        let g = default_monthly_grouping(48, DEFAULT_CYCLE_PERIODS).unwrap();
        let d = decompose(&x, 48, &g, Variant::Circulant, FrequencyAssigner::Eigenvector).unwrap();
        let table = summary_table(&d);
        let names: Vec<&str> = table.lines().skip(1).map(|l| l.split_whitespace().next().unwrap()).collect();
        assert_eq!(names, ["Trend", "Cycle", "Seasonal", "Irregular", "Total"]);
    }

    #[test]
    fn failed_writer_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("results");
        let r = commit_outputs(&out, |d| {
            fs::write(d.join("a.csv"), "x").unwrap();
            Err(Error::InvalidParams("boom".into()))
        });
        assert!(r.is_err());
        assert!(!out.exists());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn cycle_period_syntax() {
        assert_eq!(parse_cycle_periods("18:96").unwrap(), (18.0, 96.0));
        assert!(parse_cycle_periods("18-96").is_err());
    }
}
