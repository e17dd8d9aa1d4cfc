//! Sample second moments and the three `L x L` lag matrices.
//!
//! Nothing here subtracts the mean: the formulas assume a zero-mean series,
//! and callers that need demeaning do it beforehand.

use std::fmt;

use nalgebra::DMatrix;

use crate::embed::{check_window, TimeSeries, TrajectoryMatrix};
use crate::error::{Error, Result};

/// Raw lagged second moments `g[m] = (1/(T-m)) * sum_t x[t] x[t+m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutocovarianceSequence {
    values: Vec<f64>,
    sample_size: usize,
}

impl AutocovarianceSequence {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }
}

/// Which second-moment matrix a decomposition is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Basic,
    Toeplitz,
    Circulant,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Circulant, Variant::Basic, Variant::Toeplitz];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Basic => "basic",
            Variant::Toeplitz => "toeplitz",
            Variant::Circulant => "cissa",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cissa" | "circulant" => Ok(Variant::Circulant),
            "basic" => Ok(Variant::Basic),
            "toeplitz" | "vg" => Ok(Variant::Toeplitz),
            other => Err(Error::InvalidParams(format!("unknown variant {other:?}"))),
        }
    }
}

/// A symmetric `L x L` matrix tagged with the variant that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondMomentMatrix {
    entries: DMatrix<f64>,
    variant: Variant,
}

impl SecondMomentMatrix {
    /// Wraps an arbitrary matrix; only shape and symmetry are checked.
    pub fn from_entries(entries: DMatrix<f64>, variant: Variant) -> Result<Self> {
        let (r, c) = entries.shape();
        if r == 0 || r != c {
            return Err(Error::EmptyMatrix { rows: r, cols: c });
        }
        let scale = entries.amax().max(f64::MIN_POSITIVE);
        for i in 0..r {
            for j in 0..i {
                if (entries[(i, j)] - entries[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParams(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { entries, variant })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn window_length(&self) -> usize {
        self.entries.nrows()
    }

    /// First row; for the circulant variant this determines the matrix.
    pub fn first_row(&self) -> Vec<f64> {
        self.entries.row(0).iter().copied().collect()
    }
}

pub fn autocovariances(series: &TimeSeries, max_lag: usize) -> Result<AutocovarianceSequence> {
    let x = series.values();
    let t = x.len();
    if max_lag >= t {
        return Err(Error::LagOutOfRange { max_lag, len: t });
    }
    let values = (0..=max_lag)
        .map(|m| {
            let s: f64 = x[..t - m].iter().zip(&x[m..]).map(|(a, b)| a * b).sum();
            s / (t - m) as f64
        })
        .collect();
    Ok(AutocovarianceSequence { values, sample_size: t })
}

/// `S_B = X X' / N`.
pub fn basic_matrix(trajectory: &TrajectoryMatrix) -> SecondMomentMatrix {
    SecondMomentMatrix { entries: column_gram(trajectory.entries()), variant: Variant::Basic }
}

fn column_gram(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut s = x * x.transpose() / x.ncols() as f64;
    // gemm output is symmetric only up to rounding; mirror the lower triangle
    s.fill_upper_triangle_with_lower_triangle();
    s
}

/// Symmetric Toeplitz matrix with `entries[i][j] = g[|i - j|]`.
pub fn toeplitz_matrix(series: &TimeSeries, window_length: usize) -> Result<SecondMomentMatrix> {
    check_window(series.len(), window_length)?;
    let g = autocovariances(series, window_length - 1)?;
    let g = g.values();
    let entries = DMatrix::from_fn(window_length, window_length, |i, j| g[i.abs_diff(j)]);
    Ok(SecondMomentMatrix { entries, variant: Variant::Toeplitz })
}

/// Circulant coefficients `c[m] = ((L-m)/L) g[m] + (m/L) g[L-m]` from lags
/// `g[0..L]`. `c[0] = g[0]` exactly; `g[L]` is never read.
pub fn circulant_coefficients(g: &[f64]) -> Vec<f64> {
    let l = g.len();
    let lf = l as f64;
    (0..l)
        .map(|m| {
            if m == 0 {
                g[0]
            } else {
                ((l - m) as f64 / lf) * g[m] + (m as f64 / lf) * g[l - m]
            }
        })
        .collect()
}

/// Circulant matrix whose first row is `circulant_coefficients` of the
/// sample lags and whose rows are successive right cyclic shifts.
pub fn circulant_matrix(series: &TimeSeries, window_length: usize) -> Result<SecondMomentMatrix> {
    check_window(series.len(), window_length)?;
    let g = autocovariances(series, window_length - 1)?;
    let c = circulant_coefficients(g.values());
    Ok(circulant_from_first_row(&c))
}

pub(crate) fn circulant_from_first_row(c: &[f64]) -> SecondMomentMatrix {
    let l = c.len();
    let entries = DMatrix::from_fn(l, l, |i, j| c[(j + l - i) % l]);
    SecondMomentMatrix { entries, variant: Variant::Circulant }
}

/// Builds a circulant second-moment matrix straight from a first row.
/// The row must be symmetric (`c[m] == c[L-m]`) for the result to be.
pub fn circulant_from_row(c: &[f64]) -> Result<SecondMomentMatrix> {
    if c.is_empty() {
        return Err(Error::EmptyMatrix { rows: 0, cols: 0 });
    }
    let m = circulant_from_first_row(c);
    SecondMomentMatrix::from_entries(m.entries, Variant::Circulant)
}

/// `||A - B||_F / sqrt(L)`, the normalized distance used for asymptotic
/// equivalence of matrix sequences.
pub fn normalized_frobenius_distance(a: &SecondMomentMatrix, b: &SecondMomentMatrix) -> f64 {
    let d = a.entries() - b.entries();
    d.norm() / (a.window_length() as f64).sqrt()
}
