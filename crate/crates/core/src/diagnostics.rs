//! Separability and validation statistics.

use crate::embed::{antidiagonal_count, check_window, TimeSeries};
use crate::error::{Error, Result};
use crate::spectral::periodogram;
use crate::ssa::Decomposition;

/// Multiplicity of each time point across the antidiagonals of an `L x N`
/// trajectory matrix: `1, 2, .., L, .., L, .., 2, 1`, summing to `L N`.
pub fn w_weights(len: usize, window_length: usize) -> Result<Vec<f64>> {
    check_window(len, window_length)?;
    let n = len - window_length + 1;
    Ok((0..len).map(|t| antidiagonal_count(t, window_length, n) as f64).collect())
}

fn w_inner(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), wt)| x * y * wt).sum()
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(())
}

/// Weighted correlation `<x1, x2>_w / (||x1||_w ||x2||_w)`.
pub fn w_correlation(x1: &[f64], x2: &[f64], window_length: usize) -> Result<f64> {
    check_lengths(x1, x2)?;
    let w = w_weights(x1.len(), window_length)?;
    w_correlation_weighted(x1, x2, &w)
}

fn w_correlation_weighted(x1: &[f64], x2: &[f64], w: &[f64]) -> Result<f64> {
    let n1 = w_inner(x1, x1, w).sqrt();
    let n2 = w_inner(x2, x2, w).sqrt();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((w_inner(x1, x2, w) / (n1 * n2)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WCorrelationMatrix {
    /// `None` where one of the two series has zero w-norm.
    pub entries: Vec<Vec<Option<f64>>>,
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
}

impl WCorrelationMatrix {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Absolute values, ready for a heat map.
    pub fn abs_entries(&self) -> Vec<Vec<Option<f64>>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|v| v.map(f64::abs)).collect())
            .collect()
    }

    /// Largest `|rho|` over distinct pairs, ignoring undefined entries.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut m = 0.0f64;
        for (i, row) in self.entries.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i != j {
                    if let Some(v) = v {
                        m = m.max(v.abs());
                    }
                }
            }
        }
        m
    }
}

/// Pairwise w-correlations of equally long series.
pub fn w_correlation_matrix(
    series: &[(String, Vec<f64>)],
    window_length: usize,
) -> Result<WCorrelationMatrix> {
    let Some((_, first)) = series.first() else {
        return Err(Error::TooShort { needed: 1, got: 0 });
    };
    for (_, s) in series {
        check_lengths(first, s)?;
    }
    let weights = w_weights(first.len(), window_length)?;
    let g = series.len();
    let mut entries = vec![vec![None; g]; g];
    for i in 0..g {
        for j in i..g {
            let v = if i == j {
                (w_inner(&series[i].1, &series[i].1, &weights) > 0.0).then_some(1.0)
            } else {
                w_correlation_weighted(&series[i].1, &series[j].1, &weights).ok()
            };
            entries[i][j] = v;
            entries[j][i] = v;
        }
    }
    Ok(WCorrelationMatrix {
        entries,
        labels: series.iter().map(|(l, _)| l.clone()).collect(),
        weights,
    })
}

/// w-correlations between the named components of a decomposition.
pub fn decomposition_w_correlation(d: &Decomposition) -> Result<WCorrelationMatrix> {
    let series: Vec<(String, Vec<f64>)> = d
        .components
        .iter()
        .map(|c| (c.name.clone(), c.series.values().to_vec()))
        .collect();
    w_correlation_matrix(&series, d.window_length)
}

/// Least-squares fit of `y = a + b yhat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionCheck {
    pub intercept: f64,
    pub slope: f64,
}

pub fn regression_check(truth: &[f64], extracted: &[f64]) -> Result<RegressionCheck> {
    check_lengths(truth, extracted)?;
    let n = truth.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    let nf = n as f64;
    let mx = extracted.iter().sum::<f64>() / nf;
    let my = truth.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut scale) = (0.0, 0.0, 0.0);
    for (&y, &x) in truth.iter().zip(extracted) {
        let dx = x - mx;
        sxx += dx * dx;
        sxy += dx * (y - my);
        scale += x * x;
    }
    if sxx == 0.0 || sxx <= f64::EPSILON * f64::EPSILON * scale {
        return Err(Error::DegenerateRegressor);
    }
    let slope = sxy / sxx;
    Ok(RegressionCheck { intercept: my - slope * mx, slope })
}

/// Mean, standard deviation and lag-1 autoregressive coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Fit {
    pub mean: f64,
    /// Divisor `T - 1`.
    pub stddev: f64,
    /// Least-squares slope of `d[t]` on `d[t-1]` for the demeaned series;
    /// zero when the series is constant.
    pub ar_coefficient: f64,
}

pub fn ar1_fit(residuals: &[f64]) -> Result<Ar1Fit> {
    let n = residuals.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    if let Some(index) = residuals.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { index });
    }
    let mean = residuals.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = residuals.iter().map(|v| v - mean).collect();
    let ss: f64 = d.iter().map(|v| v * v).sum();
    let stddev = (ss / (n - 1) as f64).sqrt();
    let num: f64 = d.windows(2).map(|w| w[0] * w[1]).sum();
    let den: f64 = d[..n - 1].iter().map(|v| v * v).sum();
    let ar_coefficient = if den > 0.0 { num / den } else { 0.0 };
    Ok(Ar1Fit { mean, stddev, ar_coefficient })
}

/// Default flag threshold for [`residual_seasonality_check`], as a fraction.
pub const DEFAULT_SEASONALITY_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct SeasonalityEntry {
    pub frequency: f64,
    /// Fraction of the reference power found within one bin of `frequency`.
    pub share: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeasonalityReport {
    pub method: &'static str,
    pub threshold: f64,
    pub entries: Vec<SeasonalityEntry>,
}

impl SeasonalityReport {
    pub fn any_flagged(&self) -> bool {
        self.entries.iter().any(|e| e.flagged)
    }
}

pub const SEASONALITY_METHOD: &str =
    "periodogram band screen (substitute; not the X-12 combined test for seasonality)";

/// Screens a (seasonally adjusted) series for leftover power at seasonal
/// frequencies.
///
/// The series is detrended by least squares, Hann-tapered and its periodogram
/// taken. For each seasonal frequency the power in the nearest bin and its
/// two neighbours is divided by the total power from one bin below the
/// lowest seasonal frequency up to 1/2, so trend and cycle power below the
/// seasonal range do not dilute the share. A frequency is flagged when its
/// share exceeds `threshold`. With the default 1% threshold the periodogram
/// needs roughly a thousand points before white noise stays unflagged.
pub fn residual_seasonality_check(
    adjusted: &[f64],
    seasonal_frequencies: &[f64],
    threshold: f64,
) -> Result<SeasonalityReport> {
    let n = adjusted.len();
    if n < 4 {
        return Err(Error::TooShort { needed: 4, got: n });
    }
    if let Some(index) = adjusted.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { index });
    }
    let nf = n as f64;

    // least-squares line through (t, x_t)
    let tm = (nf - 1.0) / 2.0;
    let xm = adjusted.iter().sum::<f64>() / nf;
    let (mut stt, mut stx) = (0.0, 0.0);
    for (t, &x) in adjusted.iter().enumerate() {
        let dt = t as f64 - tm;
        stt += dt * dt;
        stx += dt * (x - xm);
    }
    let slope = stx / stt;
    let tapered: Vec<f64> = adjusted
        .iter()
        .enumerate()
        .map(|(t, &x)| {
            let hann = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * t as f64 / nf).cos();
            (x - xm - slope * (t as f64 - tm)) * hann
        })
        .collect();
    let p = periodogram(&tapered)?;
    let last = p.len() - 1;

    let lowest = seasonal_frequencies.iter().copied().fold(f64::INFINITY, f64::min);
    let start = if lowest.is_finite() {
        ((lowest * nf).round() as usize).saturating_sub(1).min(last)
    } else {
        0
    };
    let reference: f64 = p.powers[start..].iter().sum();

    let entries = seasonal_frequencies
        .iter()
        .map(|&f| {
            let centre = ((f * nf).round() as usize).min(last);
            let lo = centre.saturating_sub(1);
            let hi = (centre + 1).min(last);
            let band: f64 = p.powers[lo..=hi].iter().sum();
            let share = if reference > 0.0 { band / reference } else { 0.0 };
            SeasonalityEntry { frequency: f, share, flagged: share > threshold }
        })
        .collect();

    Ok(SeasonalityReport { method: SEASONALITY_METHOD, threshold, entries })
}

/// The six monthly seasonal harmonics `j/12`.
pub fn monthly_seasonal_frequencies() -> Vec<f64> {
    (1..=6).map(|j| j as f64 / 12.0).collect()
}

/// Convenience wrapper over [`residual_seasonality_check`] for a series type.
pub fn residual_seasonality(series: &TimeSeries, seasonal_frequencies: &[f64]) -> Result<SeasonalityReport> {
    residual_seasonality_check(series.values(), seasonal_frequencies, DEFAULT_SEASONALITY_THRESHOLD)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use rand_distr::{Distribution, StandardNormal};
    use std::f64::consts::PI;

    fn noise(n: usize, sd: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..n).map(|_| sd * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect::<Vec<f64>>()
    }

    #[test]
    fn weights_by_enumeration() {
        assert_eq!(w_weights(5, 2).unwrap(), vec![1., 2., 2., 2., 1.]);
        assert_eq!(w_weights(7, 3).unwrap(), vec![1., 2., 3., 3., 3., 2., 1.]);
        for t in [5usize, 9, 40] {
            let s: f64 = w_weights(t, 2).unwrap().iter().sum();
            assert_eq!(s, 2.0 * (t as f64 - 1.0));
        }
        let s: f64 = w_weights(100, 17).unwrap().iter().sum();
        assert_eq!(s, 17.0 * 84.0);
        assert!(w_weights(6, 3).is_err());
    }

    #[test]
    fn w_correlation_identities() {
        let x = [1.0, -2.0, 0.5, 3.0, 1.5, -0.25, 2.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((w_correlation(&x, &x, 3).unwrap() - 1.0).abs() < 1e-15);
        assert!((w_correlation(&x, &neg, 3).unwrap() + 1.0).abs() < 1e-15);
        let a = [1.0, 0.0, 0.0, 0.0, 0.0];
        let b = [0.0, 0.0, 0.0, 0.0, 1.0];
        assert_eq!(w_correlation(&a, &b, 2).unwrap(), 0.0);
        assert!(matches!(w_correlation(&a, &[0.0; 5], 2), Err(Error::ZeroNorm)));
        assert!(matches!(w_correlation(&a, &[0.0; 4], 2), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn matrix_shapes() {
        let x = vec![1.0, 2.0, -1.0, 0.5, 0.0, 3.0];
        let m = w_correlation_matrix(&[("a".into(), x.clone()), ("b".into(), x.clone())], 2).unwrap();
        for row in &m.entries {
            for v in row {
                assert!((v.unwrap() - 1.0).abs() < 1e-15);
            }
        }
        let single = w_correlation_matrix(&[("a".into(), x.clone())], 2).unwrap();
        assert_eq!(single.entries, vec![vec![Some(1.0)]]);
        let with_zero = w_correlation_matrix(&[("a".into(), x), ("z".into(), vec![0.0; 6])], 2).unwrap();
        assert_eq!(with_zero.entries[0][1], None);
        assert_eq!(with_zero.entries[1][1], None);
        assert_eq!(with_zero.abs_entries()[0][0], Some(1.0));
    }

    #[test]
    fn regression_exact_cases() {
        let y: Vec<f64> = (0..20).map(|t| (t as f64 * 0.7).sin() * 3.0 + 0.1 * t as f64).collect();
        let r = regression_check(&y, &y).unwrap();
        assert_eq!((r.intercept, r.slope), (0.0, 1.0));
        let doubled: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        let r = regression_check(&y, &doubled).unwrap();
        assert_eq!((r.intercept, r.slope), (0.0, 0.5));
        let shifted: Vec<f64> = y.iter().map(|v| v - 3.0).collect();
        let r = regression_check(&y, &shifted).unwrap();
        assert!((r.intercept - 3.0).abs() < 1e-12 && (r.slope - 1.0).abs() < 1e-12);
        assert!(matches!(regression_check(&y, &[1.5; 20]), Err(Error::DegenerateRegressor)));
        assert!(matches!(regression_check(&y[..2], &y[..2]), Err(Error::TooShort { .. })));
    }

    #[test]
    fn ar1_on_white_noise() {
        let e = noise(10_000, 0.06, 7);
        let f = ar1_fit(&e).unwrap();
        assert!((0.055..=0.065).contains(&f.stddev), "{}", f.stddev);
        assert!(f.ar_coefficient.abs() < 0.05);
    }

    #[test]
    fn ar1_on_exact_recursion() {
        // x_t = 0.8 x_{t-1}; over 10,000 steps the demeaning bias is ~2e-8
        let mut x = vec![1.0f64];
        for _ in 1..10_000 {
            let last = *x.last().unwrap();
            x.push(0.8 * last);
        }
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let d: Vec<f64> = x.iter().map(|v| v - mean).collect();
        let f = ar1_fit(&d).unwrap();
        assert!(f.mean.abs() < 1e-15);
        assert!((f.ar_coefficient - 0.8).abs() < 1e-6, "{}", f.ar_coefficient);
    }

    #[test]
    fn ar1_on_zeros() {
        let f = ar1_fit(&[0.0; 10]).unwrap();
        assert_eq!((f.mean, f.stddev, f.ar_coefficient), (0.0, 0.0, 0.0));
    }

    #[test]
    fn seasonality_screen() {
        let freqs = monthly_seasonal_frequencies();
        let wn = noise(2400, 1.0, 11);
        let r = residual_seasonality_check(&wn, &freqs, DEFAULT_SEASONALITY_THRESHOLD).unwrap();
        assert!(!r.any_flagged(), "{:?}", r.entries);

        let injected: Vec<f64> = wn
            .iter()
            .enumerate()
            .map(|(t, v)| v + 0.5 * (2.0 * PI * t as f64 / 12.0).cos())
            .collect();
        let r = residual_seasonality_check(&injected, &freqs, DEFAULT_SEASONALITY_THRESHOLD).unwrap();
        assert!(r.entries[0].flagged);
        assert!(r.entries[1..].iter().all(|e| !e.flagged));

        let r = residual_seasonality_check(&[0.0; 100], &freqs, DEFAULT_SEASONALITY_THRESHOLD).unwrap();
        assert!(r.entries.iter().all(|e| e.share == 0.0 && !e.flagged));
        assert!(r.method.contains("substitute"));
    }
}
