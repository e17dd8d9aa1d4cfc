//! Circulant, Basic and Toeplitz SSA pipelines.
//!
//! All three embed the series, diagonalize a second-moment matrix, split the
//! trajectory matrix into elementary pieces, group them by frequency band and
//! diagonal-average each group back into a series. They differ in how an
//! elementary piece learns its frequency: circulant eigentriples carry it by
//! construction, while Basic/Toeplitz eigenvectors are assigned the peak of
//! their periodogram.

use std::collections::BTreeSet;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::embed::{diagonal_average_outer, embed, TimeSeries, TrajectoryMatrix};
use crate::error::{Error, Result};
use crate::moments::{basic_matrix, circulant_matrix, toeplitz_matrix, Variant};
use crate::spectral::{
    circulant_eigentriples, dominant_frequency, periodogram, symmetric_eigentriples, Eigentriple,
    Eigenvector,
};

/// Slack used when comparing a bin frequency against band endpoints, so
/// that bands written as decimals or `1/12`-style fractions still catch
/// exact bins.
pub const FREQUENCY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    /// `{1}`, frequency zero.
    Zero,
    /// `{k, L+2-k}`.
    Paired,
    /// `{L/2+1}`, frequency one half; only for even `L`.
    Nyquist,
}

/// One frequency bin of a circulant decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGroup {
    /// 1-based eigentriple indices.
    pub indices: Vec<usize>,
    pub center_frequency: f64,
    pub kind: GroupKind,
}

impl FrequencyGroup {
    /// The bin's own frequency index `k`.
    pub fn bin(&self) -> usize {
        self.indices[0]
    }
}

/// The bins `B_1, ..., B_M` (plus `B_{L/2+1}` for even `L`) partitioning
/// `1..=L`.
pub fn frequency_groups(window_length: usize) -> Vec<FrequencyGroup> {
    let l = window_length;
    let lf = l as f64;
    let mut groups = vec![FrequencyGroup { indices: vec![1], center_frequency: 0.0, kind: GroupKind::Zero }];
    for k in 2..=l.div_ceil(2) {
        groups.push(FrequencyGroup {
            indices: vec![k, l + 2 - k],
            center_frequency: (k - 1) as f64 / lf,
            kind: GroupKind::Paired,
        });
    }
    if l.is_multiple_of(2) && l >= 2 {
        groups.push(FrequencyGroup {
            indices: vec![l / 2 + 1],
            center_frequency: 0.5,
            kind: GroupKind::Nyquist,
        });
    }
    groups
}

/// A named set of closed frequency intervals inside `[0, 1/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub name: String,
    pub intervals: Vec<(f64, f64)>,
}

impl Band {
    pub fn new(name: impl Into<String>, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), intervals: vec![(lo, hi)] }
    }

    /// A band made of isolated frequencies, each a degenerate interval.
    pub fn at_frequencies(name: impl Into<String>, freqs: &[f64]) -> Self {
        Self { name: name.into(), intervals: freqs.iter().map(|&f| (f, f)).collect() }
    }

    pub fn with_interval(mut self, lo: f64, hi: f64) -> Self {
        self.intervals.push((lo, hi));
        self
    }

    /// Lower end of the interval containing `f`, if any.
    fn containing_lo(&self, f: f64) -> Option<f64> {
        self.intervals
            .iter()
            .filter(|(lo, hi)| f >= lo - FREQUENCY_TOLERANCE && f <= hi + FREQUENCY_TOLERANCE)
            .map(|&(lo, _)| lo)
            .reduce(f64::min)
    }

    pub fn contains(&self, f: f64) -> bool {
        self.containing_lo(f).is_some()
    }
}

/// Two closed intervals conflict unless they are disjoint or meet at a
/// single point that is an endpoint of both.
fn intervals_conflict((alo, ahi): (f64, f64), (blo, bhi): (f64, f64)) -> bool {
    let lo = alo.max(blo);
    let hi = ahi.min(bhi);
    if hi < lo - FREQUENCY_TOLERANCE {
        return false;
    }
    if hi - lo > FREQUENCY_TOLERANCE {
        return true;
    }
    let at_end = |a: f64, b: f64| (lo - a).abs() <= FREQUENCY_TOLERANCE || (lo - b).abs() <= FREQUENCY_TOLERANCE;
    !(at_end(alo, ahi) && at_end(blo, bhi))
}

/// Named frequency bands plus the name given to everything left over.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupingSpec {
    bands: Vec<Band>,
    residual_name: String,
}

impl GroupingSpec {
    pub fn new(bands: Vec<Band>, residual_name: impl Into<String>) -> Result<Self> {
        let residual_name = residual_name.into();
        if bands.is_empty() && residual_name.is_empty() {
            return Err(Error::EmptyGrouping);
        }
        if residual_name.is_empty() {
            return Err(Error::InvalidGrouping("residual name is empty".into()));
        }
        let mut names = BTreeSet::new();
        names.insert(residual_name.as_str());
        for b in &bands {
            if b.name.is_empty() || !names.insert(b.name.as_str()) {
                return Err(Error::InvalidGrouping(format!("duplicate or empty band name {:?}", b.name)));
            }
            if b.intervals.is_empty() {
                return Err(Error::InvalidGrouping(format!("band {:?} has no intervals", b.name)));
            }
            for &(lo, hi) in &b.intervals {
                if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi && hi <= 0.5) {
                    return Err(Error::InvalidGrouping(format!(
                        "band {:?} interval [{lo}, {hi}] is not inside [0, 1/2]",
                        b.name
                    )));
                }
            }
        }
        // bands may touch at an endpoint but must not share a stretch of
        // frequencies
        for (i, a) in bands.iter().enumerate() {
            for b in &bands[i + 1..] {
                for &ia in &a.intervals {
                    for &ib in &b.intervals {
                        if intervals_conflict(ia, ib) {
                            return Err(Error::InvalidGrouping(format!(
                                "bands {:?} and {:?} overlap",
                                a.name, b.name
                            )));
                        }
                    }
                }
            }
        }
        Ok(Self { bands, residual_name })
    }

    /// Everything goes to the residual.
    pub fn residual_only(residual_name: impl Into<String>) -> Result<Self> {
        Self::new(Vec::new(), residual_name)
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn residual_name(&self) -> &str {
        &self.residual_name
    }

    /// Index of the band that owns frequency `f`. Endpoints are inclusive;
    /// when two bands touch at `f` the one whose interval starts lower wins.
    pub fn band_for(&self, f: f64) -> Option<usize> {
        self.bands
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.containing_lo(f).map(|lo| (i, lo)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(i, _)| i)
    }

    /// Component names in output order: bands first, residual last.
    pub fn component_names(&self) -> Vec<&str> {
        self.bands
            .iter()
            .map(|b| b.name.as_str())
            .chain(std::iter::once(self.residual_name.as_str()))
            .collect()
    }
}

/// Trend, cycle and seasonal bands for monthly data.
///
/// The cycle covers periods in `cycle_period_range` (months). Every bin
/// slower than the cycle joins the trend, and the seasonal band is the six
/// exact harmonics `j/12`. Requires `L` to be a multiple of 12 so that those
/// harmonics fall on bins.
pub fn default_monthly_grouping(window_length: usize, cycle_period_range: (f64, f64)) -> Result<GroupingSpec> {
    if window_length == 0 || !window_length.is_multiple_of(12) {
        return Err(Error::NotMonthlyCompatible { window: window_length });
    }
    let (short, long) = cycle_period_range;
    if !(short.is_finite() && long.is_finite() && 2.0 <= short && short < long) {
        return Err(Error::InvalidParams(format!(
            "cycle period range ({short}, {long}) must satisfy 2 <= short < long"
        )));
    }
    let cycle_lo = 1.0 / long;
    let cycle_hi = 1.0 / short;
    let trend_hi = (cycle_lo - 0.5 / window_length as f64).max(0.0);
    let seasonal: Vec<f64> = (1..=6).map(|j| j as f64 / 12.0).collect();
    GroupingSpec::new(
        vec![
            Band::new("trend", 0.0, trend_hi),
            Band::new("cycle", cycle_lo, cycle_hi),
            Band::at_frequencies("seasonal", &seasonal),
        ],
        "irregular",
    )
}

/// What a Basic/Toeplitz eigentriple's frequency is read from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum FrequencyAssigner {
    /// Periodogram peak of the length-`L` eigenvector.
    #[default]
    Eigenvector,
    /// Periodogram peak of the length-`N` principal-component row `u'X`.
    PrincipalComponent,
}

/// A reconstructed component and the bookkeeping behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub name: String,
    pub series: TimeSeries,
    /// Contribution to total variance, in percent.
    pub share: f64,
    /// 1-based eigentriple indices assigned to this component.
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub variant: Variant,
    pub window_length: usize,
    pub original: TimeSeries,
    /// Bands in grouping order, residual last.
    pub components: Vec<Component>,
    /// `(frequency, eigenvalue)` for every circulant bin `k = 1..=L`.
    pub eigenvalue_spectrum: Option<Vec<(f64, f64)>>,
}

impl Decomposition {
    pub fn component(&self, name: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn residual(&self) -> &Component {
        self.components.last().expect("decomposition always has a residual")
    }

    pub fn shares(&self) -> Vec<(&str, f64)> {
        self.components.iter().map(|c| (c.name.as_str(), c.share)).collect()
    }

    /// Pointwise sum of all components.
    pub fn reconstruction(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.original.len()];
        for c in &self.components {
            for (o, v) in out.iter_mut().zip(c.series.values()) {
                *o += v;
            }
        }
        out
    }

    /// Adds `offset` to the named component (used to put a removed mean back).
    pub fn shift_component(&mut self, name: &str, offset: f64) {
        if let Some(c) = self.components.iter_mut().find(|c| c.name == name) {
            let shifted: Vec<f64> = c.series.values().iter().map(|v| v + offset).collect();
            c.series = TimeSeries::from_finite(shifted).with_label(name);
        }
    }

    /// Replaces the stored original series (used to put a removed mean back).
    pub fn set_original(&mut self, original: TimeSeries) {
        self.original = original;
    }
}

/// The reconstruction of one circulant frequency bin.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementarySeries {
    pub group: FrequencyGroup,
    /// Diagonal average of `X_{B_k}`.
    pub values: Vec<f64>,
    /// Diagonal average of `2 R R' X` (of `u u' X` for singleton bins), `R`
    /// the real part of the bin's eigenvector.
    pub cosine_part: Vec<f64>,
    /// Diagonal average of `2 I I' X`, `I` the imaginary part. Paired bins
    /// only.
    pub sine_part: Option<Vec<f64>>,
    /// `lambda_k + lambda_{L+2-k}` for pairs, `lambda_k` for singletons.
    pub eigenvalue_sum: f64,
}

/// Eigentriples and per-bin reconstructions of a circulant analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantAnalysis {
    pub eigentriples: Vec<Eigentriple>,
    pub elementary: Vec<ElementarySeries>,
}

/// `X' v` for a real vector `v`.
fn project(x: &TrajectoryMatrix, v: &[f64]) -> Vec<f64> {
    let v = DVector::from_column_slice(v);
    x.entries().tr_mul(&v).iter().copied().collect()
}

fn add_into(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

/// Embeds the series, diagonalizes its circulant matrix and reconstructs
/// one elementary series per frequency bin.
pub fn cissa_elementary(series: &TimeSeries, window_length: usize) -> Result<CirculantAnalysis> {
    let traj = embed(series, window_length)?;
    let sc = circulant_matrix(series, window_length)?;
    let eigentriples = circulant_eigentriples(&sc)?;
    let groups = frequency_groups(window_length);

    let elementary = groups
        .into_par_iter()
        .map(|group| {
            let k = group.bin();
            let Eigenvector::Complex(u) = &eigentriples[k - 1].eigenvector else {
                unreachable!("circulant eigenvectors are complex")
            };
            let re: Vec<f64> = u.iter().map(|z| z.re).collect();
            let (cosine_part, sine_part, eigenvalue_sum) = match group.kind {
                GroupKind::Zero | GroupKind::Nyquist => {
                    // real eigenvector, projector u u'
                    let part = diagonal_average_outer(&re, &project(&traj, &re));
                    (part, None, eigentriples[k - 1].eigenvalue)
                }
                GroupKind::Paired => {
                    // X_{B_k} = 2 (R R' + I I') X
                    let im: Vec<f64> = u.iter().map(|z| z.im).collect();
                    let two_re: Vec<f64> = re.iter().map(|v| 2.0 * v).collect();
                    let two_im: Vec<f64> = im.iter().map(|v| 2.0 * v).collect();
                    let cos = diagonal_average_outer(&two_re, &project(&traj, &re));
                    let sin = diagonal_average_outer(&two_im, &project(&traj, &im));
                    let partner = group.indices[1];
                    let sum = eigentriples[k - 1].eigenvalue + eigentriples[partner - 1].eigenvalue;
                    (cos, Some(sin), sum)
                }
            };
            let mut values = cosine_part.clone();
            if let Some(s) = &sine_part {
                add_into(&mut values, s);
            }
            ElementarySeries { group, values, cosine_part, sine_part, eigenvalue_sum }
        })
        .collect();

    Ok(CirculantAnalysis { eigentriples, elementary })
}

fn percent_shares(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        weights.iter().map(|w| 100.0 * w / total).collect()
    } else {
        vec![0.0; weights.len()]
    }
}

/// Circulant SSA: reconstructs every frequency bin and sums the bins whose
/// center frequency falls inside each band.
pub fn cissa(series: &TimeSeries, window_length: usize, grouping: &GroupingSpec) -> Result<Decomposition> {
    let analysis = cissa_elementary(series, window_length)?;
    let names = grouping.component_names();
    let residual = names.len() - 1;
    let t = series.len();

    let mut sums = vec![vec![0.0; t]; names.len()];
    let mut weights = vec![0.0; names.len()];
    let mut indices: Vec<Vec<usize>> = vec![Vec::new(); names.len()];
    // fixed bin order keeps the floating-point sums reproducible
    for e in &analysis.elementary {
        let slot = grouping.band_for(e.group.center_frequency).unwrap_or(residual);
        add_into(&mut sums[slot], &e.values);
        weights[slot] += e
            .group
            .indices
            .iter()
            .map(|&k| analysis.eigentriples[k - 1].eigenvalue.max(0.0))
            .sum::<f64>();
        indices[slot].extend(&e.group.indices);
    }
    let shares = percent_shares(&weights);

    let components = names
        .iter()
        .zip(sums)
        .zip(shares)
        .zip(indices)
        .map(|(((name, values), share), mut idx)| {
            idx.sort_unstable();
            Component {
                name: name.to_string(),
                series: TimeSeries::from_finite(values).with_label(*name),
                share,
                indices: idx,
            }
        })
        .collect();

    let eigenvalue_spectrum = analysis
        .eigentriples
        .iter()
        .map(|e| (e.frequency.unwrap_or_default(), e.eigenvalue))
        .collect();

    Ok(Decomposition {
        variant: Variant::Circulant,
        window_length,
        original: series.clone(),
        components,
        eigenvalue_spectrum: Some(eigenvalue_spectrum),
    })
}

pub fn basic_ssa(
    series: &TimeSeries,
    window_length: usize,
    grouping: &GroupingSpec,
    assigner: FrequencyAssigner,
) -> Result<Decomposition> {
    symmetric_ssa(series, window_length, grouping, assigner, Variant::Basic)
}

pub fn toeplitz_ssa(
    series: &TimeSeries,
    window_length: usize,
    grouping: &GroupingSpec,
    assigner: FrequencyAssigner,
) -> Result<Decomposition> {
    symmetric_ssa(series, window_length, grouping, assigner, Variant::Toeplitz)
}

/// Runs whichever variant is asked for; Basic and Toeplitz use `assigner`.
pub fn decompose(
    series: &TimeSeries,
    window_length: usize,
    grouping: &GroupingSpec,
    variant: Variant,
    assigner: FrequencyAssigner,
) -> Result<Decomposition> {
    match variant {
        Variant::Circulant => cissa(series, window_length, grouping),
        Variant::Basic | Variant::Toeplitz => symmetric_ssa(series, window_length, grouping, assigner, variant),
    }
}

/// Elementary series of a Basic/Toeplitz analysis, one per eigentriple in
/// decreasing eigenvalue order.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedElementary {
    pub eigentriple: Eigentriple,
    pub assigned_frequency: f64,
    pub values: Vec<f64>,
}

/// Eigentriples of `S_B` or `S_T` with their elementary series and the
/// periodogram-peak frequency of each.
pub fn symmetric_elementary(
    series: &TimeSeries,
    window_length: usize,
    variant: Variant,
    assigner: FrequencyAssigner,
) -> Result<Vec<RankedElementary>> {
    let traj = embed(series, window_length)?;
    let s = match variant {
        Variant::Basic => basic_matrix(&traj),
        Variant::Toeplitz => toeplitz_matrix(series, window_length)?,
        Variant::Circulant => {
            return Err(Error::VariantMismatch { expected: "basic or toeplitz", found: "cissa" })
        }
    };
    let triples = symmetric_eigentriples(&s)?;
    triples
        .into_par_iter()
        .map(|eigentriple| {
            let Eigenvector::Real(u) = &eigentriple.eigenvector else {
                unreachable!("symmetric eigenvectors are real")
            };
            let pc = project(&traj, u);
            let probe = match assigner {
                FrequencyAssigner::Eigenvector => u.as_slice(),
                FrequencyAssigner::PrincipalComponent => pc.as_slice(),
            };
            let assigned_frequency = dominant_frequency(&periodogram(probe)?);
            let values = diagonal_average_outer(u, &pc);
            Ok(RankedElementary { eigentriple, assigned_frequency, values })
        })
        .collect()
}

fn symmetric_ssa(
    series: &TimeSeries,
    window_length: usize,
    grouping: &GroupingSpec,
    assigner: FrequencyAssigner,
    variant: Variant,
) -> Result<Decomposition> {
    let elementary = symmetric_elementary(series, window_length, variant, assigner)?;
    let names = grouping.component_names();
    let residual = names.len() - 1;
    let t = series.len();

    let mut sums = vec![vec![0.0; t]; names.len()];
    let mut weights = vec![0.0; names.len()];
    let mut indices: Vec<Vec<usize>> = vec![Vec::new(); names.len()];
    for e in &elementary {
        let slot = grouping.band_for(e.assigned_frequency).unwrap_or(residual);
        add_into(&mut sums[slot], &e.values);
        weights[slot] += e.eigentriple.eigenvalue.max(0.0);
        indices[slot].push(e.eigentriple.component_index);
    }
    let shares = percent_shares(&weights);

    let components = names
        .iter()
        .zip(sums)
        .zip(shares)
        .zip(indices)
        .map(|(((name, values), share), idx)| Component {
            name: name.to_string(),
            series: TimeSeries::from_finite(values).with_label(*name),
            share,
            indices: idx,
        })
        .collect();

    Ok(Decomposition {
        variant,
        window_length,
        original: series.clone(),
        components,
        eigenvalue_spectrum: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cosine(len: usize, period: f64) -> TimeSeries {
        TimeSeries::new((1..=len).map(|t| (2.0 * PI * t as f64 / period).cos()).collect()).unwrap()
    }

    fn variance(v: &[f64]) -> f64 {
        v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64
    }

    #[test]
    fn groups_partition_indices() {
        for l in [2usize, 3, 7, 12, 24, 48, 49] {
            let groups = frequency_groups(l);
            let mut all: Vec<usize> = groups.iter().flat_map(|g| g.indices.clone()).collect();
            all.sort_unstable();
            assert_eq!(all, (1..=l).collect::<Vec<_>>(), "L={l}");
            assert_eq!(groups[0].kind, GroupKind::Zero);
            assert_eq!(groups.iter().any(|g| g.kind == GroupKind::Nyquist), l % 2 == 0);
            for g in groups.iter().filter(|g| g.kind == GroupKind::Paired) {
                assert_eq!(g.indices[0] + g.indices[1], l + 2);
            }
        }
    }

    #[test]
    fn worked_bin_arithmetic() {
        // w = 1/12 at L = 48 lands on k = 5 and its partner 45
        let g = frequency_groups(48);
        let b = g.iter().find(|g| (g.center_frequency - 1.0 / 12.0).abs() < 1e-12).unwrap();
        assert_eq!(b.indices, vec![5, 45]);
    }

    fn bins_in(spec: &GroupingSpec, l: usize, band: &str) -> Vec<usize> {
        let idx = spec.bands().iter().position(|b| b.name == band).unwrap();
        frequency_groups(l)
            .into_iter()
            .filter(|g| spec.band_for(g.center_frequency) == Some(idx))
            .map(|g| g.bin())
            .collect()
    }

    #[test]
    fn monthly_grouping_l192() {
        let spec = default_monthly_grouping(192, (18.0, 96.0)).unwrap();
        assert_eq!(bins_in(&spec, 192, "trend"), vec![1, 2]);
        assert_eq!(bins_in(&spec, 192, "cycle"), (3..=11).collect::<Vec<_>>());
        assert_eq!(bins_in(&spec, 192, "seasonal"), vec![17, 33, 49, 65, 81, 97]);
        assert_eq!(spec.residual_name(), "irregular");
    }

    #[test]
    fn monthly_grouping_l48_and_l24() {
        let spec = default_monthly_grouping(48, (18.0, 96.0)).unwrap();
        assert_eq!(bins_in(&spec, 48, "seasonal"), vec![5, 9, 13, 17, 21, 25]);
        let spec = default_monthly_grouping(24, (18.0, 96.0)).unwrap();
        assert_eq!(bins_in(&spec, 24, "seasonal"), vec![3, 5, 7, 9, 11, 13]);
    }

    #[test]
    fn monthly_grouping_rejects_non_multiple() {
        assert!(matches!(
            default_monthly_grouping(50, (18.0, 96.0)),
            Err(Error::NotMonthlyCompatible { window: 50 })
        ));
    }

    #[test]
    fn grouping_validation() {
        assert!(matches!(GroupingSpec::new(vec![], ""), Err(Error::EmptyGrouping)));
        assert!(GroupingSpec::new(vec![Band::new("a", 0.0, 0.2), Band::new("b", 0.1, 0.3)], "r").is_err());
        assert!(GroupingSpec::new(vec![Band::new("a", 0.0, 0.6)], "r").is_err());
        assert!(GroupingSpec::new(vec![Band::new("a", 0.0, 0.1), Band::new("a", 0.2, 0.3)], "r").is_err());
        assert!(GroupingSpec::new(vec![Band::new("a", 0.1, 0.2), Band::at_frequencies("b", &[0.15])], "r").is_err());
        // touching endpoints are allowed; the lower band wins the shared point
        let g = GroupingSpec::new(vec![Band::new("hi", 0.2, 0.3), Band::new("lo", 0.1, 0.2)], "r").unwrap();
        assert_eq!(g.band_for(0.2), Some(1));
        assert_eq!(g.band_for(0.25), Some(0));
        assert_eq!(g.band_for(0.05), None);
    }

    #[test]
    fn cissa_isolates_exact_bin_cosine() {
        let x = cosine(145, 12.0);
        let spec = GroupingSpec::new(vec![Band::new("seasonal", 1.0 / 12.0, 1.0 / 12.0)], "rest").unwrap();
        let d = cissa(&x, 24, &spec).unwrap();
        let seasonal = d.component("seasonal").unwrap().series.values();
        let err: Vec<f64> = seasonal.iter().zip(x.values()).map(|(a, b)| a - b).collect();
        assert!((variance(&err) / variance(x.values())).sqrt() < 1e-6);
        let rest = d.residual().series.values();
        assert!(rest.iter().all(|v| v.abs() < 1e-6));
        assert_eq!(d.component("seasonal").unwrap().indices, vec![3, 23]);
    }

    #[test]
    fn zero_series_gives_zero_components() {
        let z = TimeSeries::new(vec![0.0; 40]).unwrap();
        let spec = default_monthly_grouping(12, (18.0, 96.0)).unwrap();
        for v in Variant::ALL {
            let d = decompose(&z, 12, &spec, v, FrequencyAssigner::Eigenvector).unwrap();
            for c in &d.components {
                assert!(c.series.values().iter().all(|&x| x == 0.0), "{v} {}", c.name);
            }
        }
    }

    #[test]
    fn singleton_bins_use_unit_projector() {
        // a constant lives entirely in bin 1; a (-1)^t series in bin L/2+1
        let c = TimeSeries::new(vec![3.0; 30]).unwrap();
        let a = cissa_elementary(&c, 6).unwrap();
        assert!(a.elementary[0].values.iter().all(|v| (v - 3.0).abs() < 1e-12));
        let alt = TimeSeries::new((0..30).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect()).unwrap();
        let a = cissa_elementary(&alt, 6).unwrap();
        let nyq = a.elementary.last().unwrap();
        assert_eq!(nyq.group.kind, GroupKind::Nyquist);
        for (v, x) in nyq.values.iter().zip(alt.values()) {
            assert!((v - x).abs() < 1e-12);
        }
    }

    #[test]
    fn basic_and_toeplitz_capture_cosine() {
        let x = cosine(145, 12.0);
        let l = 24;
        let spec = GroupingSpec::new(
            vec![Band::new("seasonal", 1.0 / 12.0 - 1.0 / l as f64, 1.0 / 12.0 + 1.0 / l as f64)],
            "rest",
        )
        .unwrap();
        for f in [basic_ssa, toeplitz_ssa] {
            let d = f(&x, l, &spec, FrequencyAssigner::Eigenvector).unwrap();
            let s = d.component("seasonal").unwrap().series.values();
            let err: Vec<f64> = s.iter().zip(x.values()).map(|(a, b)| a - b).collect();
            let captured = 1.0 - variance(&err) / variance(x.values());
            assert!(captured > 0.999, "{:?}: {captured}", d.variant);
        }
    }

    #[test]
    fn pc_row_assigner_agrees_on_clean_cosine() {
        let x = cosine(145, 12.0);
        let spec = GroupingSpec::new(vec![Band::new("s", 0.05, 0.12)], "rest").unwrap();
        let d = basic_ssa(&x, 24, &spec, FrequencyAssigner::PrincipalComponent).unwrap();
        let s = d.component("s").unwrap();
        // triples beyond rank 2 are round-off whose peaks land anywhere
        assert_eq!(s.indices[..2], [1, 2]);
        for (a, b) in s.series.values().iter().zip(x.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn shares_sum_to_hundred() {
        let x = TimeSeries::new((0..120).map(|t| (t as f64 * 0.3).sin() + 0.01 * t as f64).collect()).unwrap();
        let spec = default_monthly_grouping(24, (18.0, 96.0)).unwrap();
        for v in Variant::ALL {
            let d = decompose(&x, 24, &spec, v, FrequencyAssigner::Eigenvector).unwrap();
            let total: f64 = d.components.iter().map(|c| c.share).sum();
            assert!((total - 100.0).abs() < 0.1, "{v}: {total}");
        }
    }
}
