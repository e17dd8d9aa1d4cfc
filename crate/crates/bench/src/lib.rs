//! Fixtures shared by the benchmarks.

use cissa_core::{simulate_linear, LinearModelParams, TimeSeries};

/// A seeded realization of the reference linear model with `length` points.
pub fn monthly_series(length: usize) -> TimeSeries {
    let params = LinearModelParams { length, ..LinearModelParams::reference(1) };
    simulate_linear(&params).expect("reference parameters are valid").observed
}

/// Symmetric first row of a circulant of order `l`, decaying like an AR(1).
pub fn decaying_row(l: usize) -> Vec<f64> {
    (0..l).map(|m| 0.5f64.powi(m.min(l - m) as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_requested_shape() {
        assert_eq!(monthly_series(300).len(), 300);
        let row = decaying_row(10);
        assert_eq!(row[1], row[9]);
    }
}
