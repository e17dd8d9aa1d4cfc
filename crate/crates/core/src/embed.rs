//! Lag embedding and its inverse.
//!
//! Indices are 0-based throughout: the value the usual notation calls `x_t`
//! for `t = 1..=T` lives at `values[t - 1]`, and trajectory entry `(i, j)`
//! holds `values[i + j]`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A finite, real-valued series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    label: Option<String>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput { index });
        }
        Ok(Self { values, label: None })
    }

    pub(crate) fn from_finite(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { values, label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Copy with the sample mean subtracted.
    pub fn demeaned(&self) -> TimeSeries {
        let m = self.mean();
        TimeSeries {
            values: self.values.iter().map(|v| v - m).collect(),
            label: self.label.clone(),
        }
    }
}

/// Checks `1 < L < T/2`, written as `2L < T` to stay in integers.
pub fn check_window(len: usize, window: usize) -> Result<()> {
    if window <= 1 || 2 * window >= len {
        return Err(Error::WindowOutOfRange { window, len });
    }
    Ok(())
}

/// The `L x N` Hankel matrix of lagged windows, `N = T - L + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMatrix {
    entries: DMatrix<f64>,
}

impl TrajectoryMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn window_length(&self) -> usize {
        self.entries.nrows()
    }

    pub fn num_columns(&self) -> usize {
        self.entries.ncols()
    }

    /// Length of the series the matrix was built from.
    pub fn series_len(&self) -> usize {
        self.window_length() + self.num_columns() - 1
    }
}

pub fn embed(series: &TimeSeries, window_length: usize) -> Result<TrajectoryMatrix> {
    let x = series.values();
    check_window(x.len(), window_length)?;
    let n = x.len() - window_length + 1;
    let entries = DMatrix::from_fn(window_length, n, |i, j| x[i + j]);
    Ok(TrajectoryMatrix { entries })
}

/// Averages each antidiagonal `i + j = t` of `matrix` into entry `t` of a
/// series of length `L + N - 1`.
pub fn diagonal_average(matrix: &DMatrix<f64>) -> Result<TimeSeries> {
    let (rows, cols) = matrix.shape();
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyMatrix { rows, cols });
    }
    let len = rows + cols - 1;
    let mut sums = vec![0.0; len];
    let mut counts = vec![0usize; len];
    // column-major walk matches nalgebra storage
    for j in 0..cols {
        for i in 0..rows {
            sums[i + j] += matrix[(i, j)];
            counts[i + j] += 1;
        }
    }
    for (s, c) in sums.iter_mut().zip(&counts) {
        *s /= *c as f64;
    }
    TimeSeries::new(sums)
}

/// Number of cells on antidiagonal `t` of an `rows x cols` matrix.
#[inline]
pub(crate) fn antidiagonal_count(t: usize, rows: usize, cols: usize) -> usize {
    let len = rows + cols - 1;
    (t + 1).min(rows).min(cols).min(len - t)
}

/// Diagonal average of the rank-one matrix `u v'` without materializing it.
///
/// Equivalent to `diagonal_average(&(u * v.transpose()))`; costs `O(L N)`
/// time and `O(T)` memory.
pub fn diagonal_average_outer(u: &[f64], v: &[f64]) -> Vec<f64> {
    let (rows, cols) = (u.len(), v.len());
    assert!(rows > 0 && cols > 0, "rank-one factors must be non-empty");
    let len = rows + cols - 1;
    let mut out = vec![0.0; len];
    for (i, &ui) in u.iter().enumerate() {
        if ui == 0.0 {
            continue;
        }
        for (o, &vj) in out[i..i + cols].iter_mut().zip(v) {
            *o += ui * vj;
        }
    }
    for (t, o) in out.iter_mut().enumerate() {
        *o /= antidiagonal_count(t, rows, cols) as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn embed_small_series() {
        let h = embed(&ts(&[1., 2., 3., 4., 5.]), 2).unwrap();
        let expected = DMatrix::from_row_slice(2, 4, &[1., 2., 3., 4., 2., 3., 4., 5.]);
        assert_eq!(h.entries(), &expected);
        assert_eq!(h.num_columns(), 4);
        assert_eq!(h.series_len(), 5);
    }

    #[test]
    fn embed_constant_series() {
        let h = embed(&ts(&[2.5; 10]), 3).unwrap();
        assert_eq!(h.entries().shape(), (3, 8));
        assert!(h.entries().iter().all(|&v| v == 2.5));
    }

    #[test]
    fn embed_alternating_series() {
        let h = embed(&ts(&[1., -1., 1., -1., 1., -1., 1.]), 3).unwrap();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(3, 5, &[
             1., -1.,  1., -1.,  1.,
            -1.,  1., -1.,  1., -1.,
             1., -1.,  1., -1.,  1.,
        ]);
        assert_eq!(h.entries(), &expected);
    }

    #[test]
    fn embed_rejects_bad_windows() {
        let x = ts(&[1., 2., 3., 4., 5., 6.]);
        assert!(matches!(embed(&x, 1), Err(Error::WindowOutOfRange { .. })));
        assert!(matches!(embed(&x, 3), Err(Error::WindowOutOfRange { .. })));
        assert!(embed(&x, 2).is_ok());
        assert!(matches!(embed(&ts(&[1., 2., 3., 4.]), 2), Err(Error::WindowOutOfRange { .. })));
    }

    #[test]
    fn non_finite_values_rejected() {
        assert!(matches!(
            TimeSeries::new(vec![1.0, f64::NAN, 2.0]),
            Err(Error::NonFiniteInput { index: 1 })
        ));
        assert!(TimeSeries::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn diagonal_average_2x2() {
        let m = DMatrix::from_row_slice(2, 2, &[1., 2., 3., 4.]);
        assert_eq!(diagonal_average(&m).unwrap().values(), &[1.0, 2.5, 4.0]);
    }

    #[test]
    fn diagonal_average_zero_and_empty() {
        let z = diagonal_average(&DMatrix::zeros(3, 5)).unwrap();
        assert_eq!(z.values(), &[0.0; 7]);
        assert!(matches!(
            diagonal_average(&DMatrix::<f64>::zeros(0, 4)),
            Err(Error::EmptyMatrix { .. })
        ));
    }

    #[test]
    fn diagonal_average_matches_three_branch_formula() {
        // 1-based branches: t < L averages t cells, L <= t <= N averages L,
        // t > N averages T - t + 1.
        let (l, n) = (4usize, 7usize);
        let m = DMatrix::from_fn(l, n, |i, j| ((i * 31 + j * 17) % 11) as f64 - 5.0);
        let got = diagonal_average(&m).unwrap();
        let t_len = l + n - 1;
        for t in 1..=t_len {
            let (lo, hi, div) = if t < l {
                (1, t, t)
            } else if t <= n {
                (1, l, l)
            } else {
                (t - n + 1, l, t_len - t + 1)
            };
            let s: f64 = (lo..=hi).map(|i| m[(i - 1, t - i)]).sum();
            assert!((got.values()[t - 1] - s / div as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn outer_matches_materialized() {
        let u = [0.3, -1.2, 2.0];
        let v = [1.0, 0.5, -0.25, 4.0, 2.0];
        let m = DMatrix::from_column_slice(3, 1, &u) * DMatrix::from_row_slice(1, 5, &v);
        let dense = diagonal_average(&m).unwrap();
        let fast = diagonal_average_outer(&u, &v);
        for (a, b) in dense.values().iter().zip(&fast) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn antidiagonal_counts_sum_to_cells() {
        for (r, c) in [(1, 1), (3, 5), (5, 3), (4, 4), (2, 9)] {
            let total: usize = (0..r + c - 1).map(|t| antidiagonal_count(t, r, c)).sum();
            assert_eq!(total, r * c);
        }
    }
}
