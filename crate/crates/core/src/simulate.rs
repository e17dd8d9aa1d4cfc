//! Synthetic series with known components, and the Monte Carlo harness that
//! measures how well each SSA variant recovers them.
//!
//! The linear generator is a basic structural model: an integrated random
//! walk trend, a damped stochastic cycle, trigonometric seasonality with
//! random-walk coefficients, and white noise. The nonlinear generator scales
//! the seasonal part by `exp(a0 + a1 * trend)`.
//!
//! Randomness comes from ChaCha20 (`rand_chacha`). A realization seeded with
//! `seed` uses stream 0 of that key; Monte Carlo replication `r` uses stream
//! `r` of the master key, so replications are independent and can run in any
//! order without changing the output.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::diagnostics::{ar1_fit, regression_check, Ar1Fit, RegressionCheck};
use crate::embed::TimeSeries;
use crate::error::{Error, Result};
use crate::moments::Variant;
use crate::ssa::{decompose, Band, FrequencyAssigner, GroupingSpec};

/// Names of the true components, in table order.
pub const COMPONENTS: [&str; 3] = ["trend", "cycle", "seasonal"];
pub const IRREGULAR: &str = "irregular";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearModelParams {
    pub length: usize,
    pub seasonal_period: usize,
    /// Cycle period `1 / w_c`, in time steps.
    pub cycle_period: f64,
    pub rho_c: f64,
    pub sigma_eta: f64,
    /// Innovation sd of every seasonal coefficient random walk.
    pub sigma_seasonal: f64,
    pub sigma_cycle: f64,
    pub sigma_irregular: f64,
    pub seed: u64,
}

impl LinearModelParams {
    /// Monthly configuration used in the reference simulation study:
    /// `T = 193`, `s = 12`, 48-month cycle with unit root, and innovation
    /// standard deviations 0.0006 / 0.004 / 0.008 / 0.06.
    pub fn reference(seed: u64) -> Self {
        Self {
            length: 193,
            seasonal_period: 12,
            cycle_period: 48.0,
            rho_c: 1.0,
            sigma_eta: 0.0006,
            sigma_seasonal: 0.004,
            sigma_cycle: 0.008,
            sigma_irregular: 0.06,
            seed,
        }
    }

    /// All innovations switched off.
    pub fn silent(length: usize, seed: u64) -> Self {
        Self {
            sigma_eta: 0.0,
            sigma_seasonal: 0.0,
            sigma_cycle: 0.0,
            sigma_irregular: 0.0,
            length,
            ..Self::reference(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sigmas = [self.sigma_eta, self.sigma_seasonal, self.sigma_cycle, self.sigma_irregular];
        if sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::InvalidParams("standard deviations must be finite and >= 0".into()));
        }
        if self.seasonal_period < 2 {
            return Err(Error::InvalidParams("seasonal period must be at least 2".into()));
        }
        if !(self.cycle_period.is_finite() && self.cycle_period > 2.0) {
            return Err(Error::InvalidParams("cycle period must exceed 2".into()));
        }
        if !(self.rho_c > 0.0 && self.rho_c <= 1.0) {
            return Err(Error::InvalidParams("cycle damping must lie in (0, 1]".into()));
        }
        if self.length == 0 {
            return Err(Error::InvalidParams("length must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearModelParams {
    pub linear: LinearModelParams,
    pub a0: f64,
    pub a1: f64,
}

impl NonlinearModelParams {
    /// `a1` large enough that every realization is rescaled to use the full
    /// amplitude range `[0.5, 1.5]`.
    pub fn reference(seed: u64) -> Self {
        Self { linear: LinearModelParams::reference(seed), a0: 0.0, a1: 1.0e3 }
    }

    pub fn validate(&self) -> Result<()> {
        self.linear.validate()?;
        if !(self.a0.is_finite() && self.a1.is_finite() && self.a1 >= 0.0) {
            return Err(Error::InvalidParams("a0 must be finite and a1 finite and non-negative".into()));
        }
        Ok(())
    }
}

const AMPLITUDE_MIN: f64 = 0.5;
const AMPLITUDE_MAX: f64 = 1.5;

/// Adjusts `(a0, a1)` so that `exp(a0 + a1 * trend)` stays inside
/// `[0.5, 1.5]`. Coefficients already satisfying the bound are returned
/// unchanged. Otherwise `a1` is shrunk until the exponent spans at most
/// `ln 3`, then `a0` is moved by the smallest amount that brings the span
/// inside `[ln 0.5, ln 1.5]`.
pub fn rescale_amplitude(a0: f64, a1: f64, trend: &[f64]) -> (f64, f64) {
    let (lo_b, hi_b) = (AMPLITUDE_MIN.ln(), AMPLITUDE_MAX.ln());
    let tmin = trend.iter().copied().fold(f64::INFINITY, f64::min);
    let tmax = trend.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(tmin.is_finite() && tmax.is_finite()) {
        return (a0, a1);
    }
    let in_bounds = |a0: f64, a1: f64| a0 + a1 * tmin >= lo_b && a0 + a1 * tmax <= hi_b;
    if in_bounds(a0, a1) {
        return (a0, a1);
    }
    let mut a1 = a1;
    let span = a1 * (tmax - tmin);
    if span > hi_b - lo_b {
        a1 *= (hi_b - lo_b) / span;
    }
    let (emin, emax) = (a0 + a1 * tmin, a0 + a1 * tmax);
    let a0 = if emin < lo_b {
        a0 + (lo_b - emin)
    } else if emax > hi_b {
        a0 - (emax - hi_b)
    } else {
        a0
    };
    (a0, a1)
}

/// A simulated series and the components it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub observed: TimeSeries,
    /// `trend`, `cycle`, `seasonal`, `irregular`, in that order. For the
    /// nonlinear model `seasonal` is the amplitude-modulated series.
    pub components: Vec<(String, Vec<f64>)>,
    /// Amplitude `exp(a0 + a1 * trend)` and the coefficients actually used;
    /// nonlinear model only.
    pub modulation: Option<Modulation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Modulation {
    pub a0: f64,
    pub a1: f64,
    pub amplitude: Vec<f64>,
}

impl Realization {
    pub fn component(&self, name: &str) -> Option<&[f64]> {
        self.components.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

struct RawComponents {
    trend: Vec<f64>,
    cycle: Vec<f64>,
    seasonal: Vec<f64>,
    irregular: Vec<f64>,
}

fn normal<R: Rng>(rng: &mut R, sd: f64) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    sd * z
}

/// `(cos, sin)` of `2 pi (j t mod s) / s`, exact at multiples of `pi/2`.
fn harmonic(j: usize, t: usize, s: usize) -> (f64, f64) {
    let r = (j * t) % s;
    if r == 0 {
        return (1.0, 0.0);
    }
    if 2 * r == s {
        return (-1.0, 0.0);
    }
    let theta = 2.0 * PI * r as f64 / s as f64;
    (theta.cos(), theta.sin())
}

fn simulate_raw<R: Rng>(p: &LinearModelParams, rng: &mut R) -> RawComponents {
    let len = p.length;
    let harmonics = p.seasonal_period / 2;
    let angle = 2.0 * PI / p.cycle_period;
    let (ca, sa) = (angle.cos(), angle.sin());

    let mut out = RawComponents {
        trend: Vec::with_capacity(len),
        cycle: Vec::with_capacity(len),
        seasonal: Vec::with_capacity(len),
        irregular: Vec::with_capacity(len),
    };
    // all initial states are zero
    let (mut level, mut slope) = (0.0, 0.0);
    let (mut c, mut c_star) = (0.0, 0.0);
    let mut coef_a = vec![0.0; harmonics];
    let mut coef_b = vec![0.0; harmonics];

    for t in 1..=len {
        // draw order is fixed so that switching a source off leaves the
        // others' draws untouched
        let eta = normal(rng, p.sigma_eta);
        let eps = normal(rng, p.sigma_cycle);
        let eps_star = normal(rng, p.sigma_cycle);

        level += slope;
        slope += eta;

        let next_c = p.rho_c * (ca * c + sa * c_star) + eps;
        let next_c_star = p.rho_c * (-sa * c + ca * c_star) + eps_star;
        c = next_c;
        c_star = next_c_star;

        let mut s_t = 0.0;
        for j in 0..harmonics {
            coef_a[j] += normal(rng, p.sigma_seasonal);
            coef_b[j] += normal(rng, p.sigma_seasonal);
            let (cs, sn) = harmonic(j + 1, t, p.seasonal_period);
            s_t += coef_a[j] * cs + coef_b[j] * sn;
        }

        let e = normal(rng, p.sigma_irregular);

        out.trend.push(level);
        out.cycle.push(c);
        out.seasonal.push(s_t);
        out.irregular.push(e);
    }
    out
}

fn assemble(raw: RawComponents, modulation: Option<Modulation>) -> Realization {
    let observed: Vec<f64> = (0..raw.trend.len())
        .map(|t| raw.trend[t] + raw.cycle[t] + raw.seasonal[t] + raw.irregular[t])
        .collect();
    Realization {
        observed: TimeSeries::from_finite(observed),
        components: vec![
            ("trend".into(), raw.trend),
            ("cycle".into(), raw.cycle),
            ("seasonal".into(), raw.seasonal),
            (IRREGULAR.into(), raw.irregular),
        ],
        modulation,
    }
}

pub fn simulate_linear_with<R: Rng>(params: &LinearModelParams, rng: &mut R) -> Result<Realization> {
    params.validate()?;
    Ok(assemble(simulate_raw(params, rng), None))
}

pub fn simulate_linear(params: &LinearModelParams) -> Result<Realization> {
    simulate_linear_with(params, &mut ChaCha20Rng::seed_from_u64(params.seed))
}

pub fn simulate_nonlinear_with<R: Rng>(params: &NonlinearModelParams, rng: &mut R) -> Result<Realization> {
    params.validate()?;
    let mut raw = simulate_raw(&params.linear, rng);
    let (a0, a1) = rescale_amplitude(params.a0, params.a1, &raw.trend);
    let amplitude: Vec<f64> = raw.trend.iter().map(|tr| (a0 + a1 * tr).exp()).collect();
    for (s, a) in raw.seasonal.iter_mut().zip(&amplitude) {
        *s *= a;
    }
    Ok(assemble(raw, Some(Modulation { a0, a1, amplitude })))
}

pub fn simulate_nonlinear(params: &NonlinearModelParams) -> Result<Realization> {
    simulate_nonlinear_with(params, &mut ChaCha20Rng::seed_from_u64(params.linear.seed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    Linear(LinearModelParams),
    Nonlinear(NonlinearModelParams),
}

impl ModelSpec {
    pub fn linear_params(&self) -> &LinearModelParams {
        match self {
            ModelSpec::Linear(p) => p,
            ModelSpec::Nonlinear(p) => &p.linear,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Linear(p) => p.validate(),
            ModelSpec::Nonlinear(p) => p.validate(),
        }
    }

    pub fn simulate_with<R: Rng>(&self, rng: &mut R) -> Result<Realization> {
        match self {
            ModelSpec::Linear(p) => simulate_linear_with(p, rng),
            ModelSpec::Nonlinear(p) => simulate_nonlinear_with(p, rng),
        }
    }
}

/// Bands at exactly the model's frequencies: trend at 0, cycle at
/// `1/cycle_period`, seasonal at `j/s`.
pub fn model_grouping(params: &LinearModelParams) -> Result<GroupingSpec> {
    let s = params.seasonal_period;
    let seasonal: Vec<f64> = (1..=s / 2).map(|j| j as f64 / s as f64).collect();
    let cycle = 1.0 / params.cycle_period;
    GroupingSpec::new(
        vec![
            Band::at_frequencies("trend", &[0.0]),
            Band::at_frequencies("cycle", &[cycle]),
            Band::at_frequencies("seasonal", &seasonal),
        ],
        IRREGULAR,
    )
}

/// Estimated components plus the residual `x - sum(components)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub components: Vec<(String, Vec<f64>)>,
    pub residual: Vec<f64>,
}

/// Anything that can pull components out of a simulated series.
pub trait Extractor: Sync {
    fn label(&self) -> String;
    fn extract(&self, realization: &Realization) -> Result<Extraction>;
}

#[derive(Debug, Clone)]
pub struct SsaExtractor {
    pub variant: Variant,
    pub window_length: usize,
    pub grouping: GroupingSpec,
    pub assigner: FrequencyAssigner,
}

impl Extractor for SsaExtractor {
    fn label(&self) -> String {
        self.variant.name().to_string()
    }

    fn extract(&self, realization: &Realization) -> Result<Extraction> {
        let d = decompose(
            &realization.observed,
            self.window_length,
            &self.grouping,
            self.variant,
            self.assigner,
        )?;
        let residual = d.residual().series.values().to_vec();
        let components = d.components[..d.components.len() - 1]
            .iter()
            .map(|c| (c.name.clone(), c.series.values().to_vec()))
            .collect();
        Ok(Extraction { components, residual })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub model: ModelSpec,
    pub n_reps: usize,
    pub master_seed: u64,
}

pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.50, 0.75, 0.95];

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileRow {
    pub component: String,
    /// `a`, `b`, `mean`, `stddev` or `ar1`.
    pub statistic: String,
    pub quantiles: [f64; 5],
}

impl QuantileRow {
    pub fn median(&self) -> f64 {
        self.quantiles[2]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTable {
    pub label: String,
    pub rows: Vec<QuantileRow>,
    pub replications: usize,
    pub failures: usize,
    /// First error message seen, if any replication failed.
    pub first_failure: Option<String>,
}

impl QuantileTable {
    pub fn row(&self, component: &str, statistic: &str) -> Option<&QuantileRow> {
        self.rows.iter().find(|r| r.component == component && r.statistic == statistic)
    }
}

/// Linear-interpolation quantile of sorted data (the "type 7" rule).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = q * (n - 1) as f64;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

fn quantiles(mut v: Vec<f64>) -> [f64; 5] {
    v.sort_by(f64::total_cmp);
    QUANTILE_LEVELS.map(|q| quantile_sorted(&v, q))
}

struct RepStats {
    regressions: Vec<(String, RegressionCheck)>,
    residual: Ar1Fit,
}

fn rep_stats(extractor: &dyn Extractor, r: &Realization) -> Result<RepStats> {
    let ex = extractor.extract(r)?;
    let mut regressions = Vec::new();
    for name in COMPONENTS {
        let Some(truth) = r.component(name) else { continue };
        let Some((_, est)) = ex.components.iter().find(|(n, _)| n == name) else { continue };
        regressions.push((name.to_string(), regression_check(truth, est)?));
    }
    Ok(RepStats { regressions, residual: ar1_fit(&ex.residual)? })
}

/// Simulates `n_reps` realizations and, for every extractor, tabulates the
/// 5/25/50/75/95% quantiles of the regression intercepts and slopes of true
/// on extracted components, and of the residual's mean, standard deviation
/// and AR(1) coefficient.
///
/// Failed replications are counted in the table rather than dropped
/// silently; their statistics are left out of the quantiles.
pub fn monte_carlo(config: &MonteCarloConfig, extractors: &[&dyn Extractor]) -> Result<Vec<QuantileTable>> {
    if config.n_reps == 0 {
        return Err(Error::InvalidParams("number of replications must be at least 1".into()));
    }
    if extractors.is_empty() {
        return Err(Error::InvalidParams("no extraction methods requested".into()));
    }
    config.model.validate()?;

    let per_rep: Vec<Vec<std::result::Result<RepStats, String>>> = (0..config.n_reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha20Rng::seed_from_u64(config.master_seed);
            rng.set_stream(rep as u64);
            match config.model.simulate_with(&mut rng) {
                Ok(r) => extractors
                    .iter()
                    .map(|e| rep_stats(*e, &r).map_err(|err| format!("replication {rep}: {err}")))
                    .collect(),
                Err(err) => extractors.iter().map(|_| Err(format!("replication {rep}: {err}"))).collect(),
            }
        })
        .collect();

    let tables = extractors
        .iter()
        .enumerate()
        .map(|(ei, e)| {
            let mut failures = 0;
            let mut first_failure = None;
            let mut a: Vec<(String, Vec<f64>)> = COMPONENTS.iter().map(|c| (c.to_string(), Vec::new())).collect();
            let mut b = a.clone();
            let (mut means, mut sds, mut ars) = (Vec::new(), Vec::new(), Vec::new());
            // replication order, independent of which worker finished first
            for rep in &per_rep {
                match &rep[ei] {
                    Ok(stats) => {
                        for (name, reg) in &stats.regressions {
                            let slot = COMPONENTS.iter().position(|c| c == name).expect("known component");
                            a[slot].1.push(reg.intercept);
                            b[slot].1.push(reg.slope);
                        }
                        means.push(stats.residual.mean);
                        sds.push(stats.residual.stddev);
                        ars.push(stats.residual.ar_coefficient);
                    }
                    Err(msg) => {
                        failures += 1;
                        first_failure.get_or_insert_with(|| msg.clone());
                    }
                }
            }
            let mut rows = Vec::new();
            for (stat, data) in [("a", a), ("b", b)] {
                for (component, values) in data {
                    if !values.is_empty() {
                        rows.push(QuantileRow { component, statistic: stat.into(), quantiles: quantiles(values) });
                    }
                }
            }
            if !means.is_empty() {
                for (stat, values) in [("mean", means), ("stddev", sds), ("ar1", ars)] {
                    rows.push(QuantileRow {
                        component: "residual".into(),
                        statistic: stat.into(),
                        quantiles: quantiles(values),
                    });
                }
            }
            QuantileTable { label: e.label(), rows, replications: config.n_reps, failures, first_failure }
        })
        .collect();
    Ok(tables)
}
