//! Eigenstructure of the second-moment matrices, and periodograms.
//!
//! Circulant matrices are diagonalized in closed form by the Fourier basis,
//! so their eigentriples come out indexed by frequency `(k-1)/L`. Basic and
//! Toeplitz matrices go through a general symmetric eigensolver and are
//! ordered by decreasing eigenvalue instead.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::moments::{SecondMomentMatrix, Variant};

#[derive(Debug, Clone, PartialEq)]
pub enum Eigenvector {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Eigenvector {
    pub fn len(&self) -> usize {
        match self {
            Eigenvector::Real(v) => v.len(),
            Eigenvector::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn norm(&self) -> f64 {
        match self {
            Eigenvector::Real(v) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Eigenvector::Complex(v) => v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    /// Entries as complex numbers (zero imaginary part for real vectors).
    pub fn to_complex(&self) -> Vec<Complex64> {
        match self {
            Eigenvector::Real(v) => v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Eigenvector::Complex(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigentriple {
    pub eigenvalue: f64,
    pub eigenvector: Eigenvector,
    /// 1-based position: the frequency index `k` for circulant matrices,
    /// the rank by eigenvalue otherwise.
    pub component_index: usize,
    /// `(k-1)/L` in cycles per unit time; circulant only.
    pub frequency: Option<f64>,
}

/// `exp(-i 2 pi a / L)` for `a = 0..L`, with `w[L-a]` the exact conjugate
/// of `w[a]` so that paired eigenvectors conjugate bit for bit.
fn unit_roots(l: usize) -> Vec<Complex64> {
    let mut w = vec![Complex64::new(1.0, 0.0); l];
    for a in 1..=l / 2 {
        let theta = -2.0 * std::f64::consts::PI * a as f64 / l as f64;
        w[a] = Complex64::new(theta.cos(), theta.sin());
        w[l - a] = w[a].conj();
    }
    if l.is_multiple_of(2) {
        w[l / 2] = Complex64::new(-1.0, 0.0);
    }
    w
}

/// Fourier eigenvector for frequency index `k` (1-based):
/// `u[j] = L^{-1/2} exp(-i 2 pi j (k-1) / L)`, `j = 0..L`.
pub fn fourier_eigenvector(l: usize, k: usize) -> Vec<Complex64> {
    let w = unit_roots(l);
    fourier_vector_from_roots(&w, k)
}

fn fourier_vector_from_roots(w: &[Complex64], k: usize) -> Vec<Complex64> {
    let l = w.len();
    let scale = 1.0 / (l as f64).sqrt();
    (0..l).map(|j| w[(j * (k - 1)) % l] * scale).collect()
}

/// True when every prime factor of `n` is at most 7.
fn is_smooth(mut n: usize) -> bool {
    if n == 0 {
        return false;
    }
    for p in [2, 3, 5, 7] {
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    n == 1
}

/// `lambda_k = sum_m c[m] exp(i 2 pi m (k-1) / L)` by direct `O(L^2)`
/// summation. Returns the full complex values.
pub fn circulant_eigenvalues_direct(c: &[f64]) -> Vec<Complex64> {
    let l = c.len();
    let w = unit_roots(l);
    (0..l)
        .map(|k| {
            c.iter()
                .enumerate()
                // exp(+i..) is the conjugate of the stored root
                .map(|(m, &cm)| w[(m * k) % l].conj() * cm)
                .sum()
        })
        .collect()
}

/// Same quantity as [`circulant_eigenvalues_direct`] through an FFT.
pub fn circulant_eigenvalues_fft(c: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = c.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    if buf.is_empty() {
        return buf;
    }
    // rustfft's inverse transform is the unnormalized sum with exp(+i..)
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    buf
}

/// Real eigenvalues of the circulant matrix with first row `c`, indexed by
/// `k - 1`. Uses the FFT when `L` factors into primes up to 7.
///
/// For a symmetric row `lambda_k = lambda_{L+2-k}` exactly; the transform
/// only gets there to round-off, so each pair is replaced by its mean.
pub fn circulant_eigenvalues(c: &[f64]) -> Vec<f64> {
    let l = c.len();
    let raw = if is_smooth(l) {
        circulant_eigenvalues_fft(c)
    } else {
        circulant_eigenvalues_direct(c)
    };
    let mut out: Vec<f64> = raw.into_iter().map(|z| z.re).collect();
    for k in 1..l.div_ceil(2) {
        let mean = 0.5 * (out[k] + out[l - k]);
        out[k] = mean;
        out[l - k] = mean;
    }
    out
}

/// All `L` eigentriples of a circulant matrix in frequency order `k = 1..L`.
pub fn circulant_eigentriples(matrix: &SecondMomentMatrix) -> Result<Vec<Eigentriple>> {
    if matrix.variant() != Variant::Circulant {
        return Err(Error::VariantMismatch {
            expected: "circulant",
            found: matrix.variant().name(),
        });
    }
    let c = matrix.first_row();
    let l = c.len();
    let lambdas = circulant_eigenvalues(&c);
    let w = unit_roots(l);
    Ok(lambdas
        .into_iter()
        .enumerate()
        .map(|(idx, eigenvalue)| {
            let k = idx + 1;
            Eigentriple {
                eigenvalue,
                eigenvector: Eigenvector::Complex(fourier_vector_from_roots(&w, k)),
                component_index: k,
                frequency: Some(idx as f64 / l as f64),
            }
        })
        .collect())
}

/// Full eigendecomposition of a Basic or Toeplitz matrix, sorted by
/// decreasing eigenvalue. Each eigenvector's largest-magnitude entry is
/// made positive.
pub fn symmetric_eigentriples(matrix: &SecondMomentMatrix) -> Result<Vec<Eigentriple>> {
    if matrix.variant() == Variant::Circulant {
        return Err(Error::VariantMismatch {
            expected: "basic or toeplitz",
            found: matrix.variant().name(),
        });
    }
    let l = matrix.window_length();
    let (values, vectors) = symmetric_eigen(matrix.entries())?;
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(rank, idx)| {
            let mut v: Vec<f64> = vectors.column(idx).iter().copied().collect();
            let pivot = v
                .iter()
                .copied()
                .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
            if pivot < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            Eigentriple {
                eigenvalue: values[idx],
                eigenvector: Eigenvector::Real(v),
                component_index: rank + 1,
                frequency: None,
            }
        })
        .collect())
}

fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let dim = m.nrows();
    let max_iter = 1000 * dim.max(1);
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, max_iter)
        .ok_or(Error::ConvergenceFailure { dim })?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::ConvergenceFailure { dim });
    }
    Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

/// Raw periodogram on the Fourier grid `j/n`, `j = 0..=n/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Periodogram {
    pub frequencies: Vec<f64>,
    pub powers: Vec<f64>,
}

impl Periodogram {
    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// `powers[j] = |sum_t v[t] exp(-i 2 pi j t / n)|^2 / n`.
pub fn periodogram(v: &[f64]) -> Result<Periodogram> {
    let n = v.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    if let Some(index) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFiniteInput { index });
    }
    let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let nf = n as f64;
    Ok(Periodogram {
        frequencies: (0..=half).map(|j| j as f64 / nf).collect(),
        powers: buf[..=half].iter().map(|z| z.norm_sqr() / nf).collect(),
    })
}

/// Frequency of the largest power; ties go to the lowest frequency.
pub fn dominant_frequency(p: &Periodogram) -> f64 {
    let mut best = 0;
    for (j, &pw) in p.powers.iter().enumerate() {
        if pw > p.powers[best] {
            best = j;
        }
    }
    p.frequencies[best]
}
