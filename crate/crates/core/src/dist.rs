//! Step-function probability distributions.
//!
//! A [`StepDistribution`] is an ordered list of `(value, cum_prob)` points —
//! the universal carrier for every input and output distribution in this
//! crate (byte volumes, flow sizes, partner counts, inter-arrival times).
//! Between the given points the CDF is read either as piecewise linear
//! (default, suited to curves digitized from plots) or as a pure step
//! function ([`Interp::Step`], exact for empirical and count-valued data).

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

/// What the value axis of a distribution measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SupportKind {
    Bytes,
    Seconds,
    Count,
}

/// How the CDF behaves between two consecutive points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Interp {
    /// Piecewise-linear between points; the first point keeps its jump.
    Linear,
    /// Right-continuous step function: all mass sits on the point values.
    Step,
}

#[derive(Debug, Error)]
pub enum DistError {
    #[error("distribution needs at least one point")]
    Empty,
    #[error("values must be strictly increasing (violated at index {0})")]
    ValuesNotIncreasing(usize),
    #[error("cumulative probabilities must be non-decreasing (violated at index {0})")]
    CumNotMonotone(usize),
    #[error("last cumulative probability must be 1 (got {0})")]
    BadTotal(f64),
    #[error("values must be non-negative (got {0})")]
    NegativeValue(f64),
    #[error("empirical CDF needs a non-empty sample set")]
    NoSamples,
    #[error("grids must share a bin width (got {0} vs {1})")]
    BinWidthMismatch(f64, f64),
    #[error("bin width must be positive")]
    BadBinWidth,
    #[error("matrix weights must be non-negative with a positive total")]
    BadWeights,
}

/// A step-function CDF over non-negative values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepDistribution {
    points: Vec<(f64, f64)>,
    kind: SupportKind,
    interp: Interp,
}

impl StepDistribution {
    /// Builds a distribution from `(value, cum_prob)` points.
    ///
    /// Values must be strictly increasing and non-negative, cumulative
    /// probabilities non-decreasing with the last equal to 1 within 1e-9.
    /// A single point is accepted as a degenerate point mass.
    pub fn new(
        points: Vec<(f64, f64)>,
        kind: SupportKind,
        interp: Interp,
    ) -> Result<Self, DistError> {
        if points.is_empty() {
            return Err(DistError::Empty);
        }
        for (i, &(v, c)) in points.iter().enumerate() {
            if v < 0.0 || !v.is_finite() {
                return Err(DistError::NegativeValue(v));
            }
            if i > 0 {
                if v <= points[i - 1].0 {
                    return Err(DistError::ValuesNotIncreasing(i));
                }
                if c < points[i - 1].1 {
                    return Err(DistError::CumNotMonotone(i));
                }
            }
            if c < 0.0 || !c.is_finite() {
                return Err(DistError::CumNotMonotone(i));
            }
        }
        let last = points.last().unwrap().1;
        if (last - 1.0).abs() > 1e-9 {
            return Err(DistError::BadTotal(last));
        }
        let mut points = points;
        points.last_mut().unwrap().1 = 1.0;
        Ok(Self {
            points,
            kind,
            interp,
        })
    }

    /// Degenerate distribution: all mass at `value`.
    pub fn point_mass(value: f64, kind: SupportKind) -> Self {
        Self {
            points: vec![(value, 1.0)],
            kind,
            interp: Interp::Step,
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn kind(&self) -> SupportKind {
        self.kind
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    /// Same distribution with the other between-point reading.
    pub fn with_interp(mut self, interp: Interp) -> Self {
        self.interp = interp;
        self
    }

    pub fn min_value(&self) -> f64 {
        self.points[0].0
    }

    pub fn max_value(&self) -> f64 {
        self.points.last().unwrap().0
    }

    /// Right-continuous CDF evaluated at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x < pts[0].0 {
            return 0.0;
        }
        if x >= pts.last().unwrap().0 {
            return 1.0;
        }
        // Index of the last point with value <= x.
        let idx = match pts.binary_search_by(|p| p.0.partial_cmp(&x).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        match self.interp {
            Interp::Step => pts[idx].1,
            Interp::Linear => {
                let (v0, c0) = pts[idx];
                let (v1, c1) = pts[idx + 1];
                c0 + (c1 - c0) * (x - v0) / (v1 - v0)
            }
        }
    }

    /// Left limit of the CDF at `x` (differs from `cdf(x)` only at atoms).
    pub fn cdf_left(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x <= pts[0].0 {
            return 0.0;
        }
        match self.interp {
            Interp::Linear => {
                if x > pts.last().unwrap().0 {
                    1.0
                } else {
                    self.cdf(x)
                }
            }
            Interp::Step => {
                let idx = match pts.binary_search_by(|p| p.0.partial_cmp(&x).unwrap()) {
                    Ok(i) => i,         // exactly on a point: take the previous level
                    Err(i) => return if i == 0 { 0.0 } else { pts[i - 1].1 },
                };
                if idx == 0 {
                    0.0
                } else {
                    pts[idx - 1].1
                }
            }
        }
    }

    /// Generalized inverse CDF: smallest `x` with `cdf(x) >= u`.
    pub fn quantile(&self, u: f64) -> f64 {
        let pts = &self.points;
        let u = u.clamp(0.0, 1.0);
        // First point with cum >= u.
        let idx = pts.partition_point(|p| p.1 < u);
        if idx == 0 {
            return pts[0].0;
        }
        if idx >= pts.len() {
            return pts.last().unwrap().0;
        }
        match self.interp {
            Interp::Step => pts[idx].0,
            Interp::Linear => {
                let (v0, c0) = pts[idx - 1];
                let (v1, c1) = pts[idx];
                if c1 <= c0 {
                    v1
                } else {
                    v0 + (v1 - v0) * (u - c0) / (c1 - c0)
                }
            }
        }
    }

    /// Inverse-transform sample.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    /// Mean of the distribution under its interpolation reading.
    pub fn mean(&self) -> f64 {
        let pts = &self.points;
        let mut acc = pts[0].0 * pts[0].1; // initial atom
        for w in pts.windows(2) {
            let (v0, c0) = w[0];
            let (v1, c1) = w[1];
            let mass = c1 - c0;
            match self.interp {
                Interp::Step => acc += v1 * mass,
                Interp::Linear => acc += 0.5 * (v0 + v1) * mass,
            }
        }
        acc
    }

    /// Shifts every support value by `delta` (used for the fixed
    /// flow-size/TM-entry adjustments applied to digitized inputs).
    pub fn shift_values(&self, delta: f64) -> Self {
        let points = self
            .points
            .iter()
            .map(|&(v, c)| ((v + delta).max(0.0), c))
            .collect::<Vec<_>>();
        // A negative shift can collapse leading points onto 0; keep the last.
        let mut dedup: Vec<(f64, f64)> = Vec::with_capacity(points.len());
        for (v, c) in points {
            if let Some(last) = dedup.last_mut() {
                if v <= last.0 {
                    last.1 = c;
                    continue;
                }
            }
            dedup.push((v, c));
        }
        Self {
            points: dedup,
            kind: self.kind,
            interp: self.interp,
        }
    }

    /// Scales every support value by `factor > 0`.
    pub fn scale_values(&self, factor: f64) -> Self {
        Self {
            points: self.points.iter().map(|&(v, c)| (v * factor, c)).collect(),
            kind: self.kind,
            interp: self.interp,
        }
    }

    /// Probability mass sitting exactly on `value` (step reading).
    pub fn mass_at(&self, value: f64) -> f64 {
        self.cdf(value) - self.cdf_left(value)
    }
}

/// Right-continuous empirical CDF of the samples; at each sample value the
/// CDF equals rank/n.
pub fn empirical_cdf(samples: &[f64], kind: SupportKind) -> Result<StepDistribution, DistError> {
    if samples.is_empty() {
        return Err(DistError::NoSamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        let cum = (i + 1) as f64 / n;
        match points.last_mut() {
            Some(last) if last.0 == v => last.1 = cum,
            _ => points.push((v, cum)),
        }
    }
    StepDistribution::new(points, kind, Interp::Step)
}

/// Empirical CDF thinned to at most `max_points` knots. Thinning keeps every
/// k-th knot plus the last one, so the kept curve deviates from the full one
/// by at most k/n in cumulative probability.
pub fn empirical_cdf_thinned(
    samples: &[f64],
    kind: SupportKind,
    max_points: usize,
) -> Result<StepDistribution, DistError> {
    let full = empirical_cdf(samples, kind)?;
    let pts = full.points();
    if pts.len() <= max_points.max(2) {
        return Ok(full);
    }
    let stride = pts.len().div_ceil(max_points.max(2));
    let mut kept: Vec<(f64, f64)> = pts.iter().copied().step_by(stride).collect();
    if kept.last().map(|p| p.0) != pts.last().map(|p| p.0) {
        kept.push(*pts.last().unwrap());
    }
    StepDistribution::new(kept, kind, Interp::Step)
}

/// Supremum distance between two CDFs, including one-sided limits at atoms.
pub fn ks_distance(a: &StepDistribution, b: &StepDistribution) -> f64 {
    ks_distance_above(a, b, f64::NEG_INFINITY)
}

/// KS distance restricted to support values strictly greater than `threshold`.
pub fn ks_distance_above(a: &StepDistribution, b: &StepDistribution, threshold: f64) -> f64 {
    let mut sup: f64 = 0.0;
    for dist in [a, b] {
        for &(v, _) in dist.points() {
            if v <= threshold {
                continue;
            }
            sup = sup.max((a.cdf(v) - b.cdf(v)).abs());
            sup = sup.max((a.cdf_left(v) - b.cdf_left(v)).abs());
        }
    }
    // The difference of two piecewise-linear CDFs is piecewise linear, so
    // checking knots (with left limits) of both supports is exhaustive.
    sup
}

/// Symmetrized Kullback-Leibler distance between two non-negative weight
/// vectors, each normalized to total mass 1 first.
///
/// Conventions: `0 * ln(0/x) = 0` and a term where both sides are zero
/// contributes 0, so sparse inputs are fine.
pub fn topsoe(p: &[f64], q: &[f64]) -> Result<f64, DistError> {
    assert_eq!(p.len(), q.len(), "weight vectors must align");
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    if sp <= 0.0 || sq <= 0.0 || p.iter().chain(q.iter()).any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(DistError::BadWeights);
    }
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q.iter()) {
        let m = pi / sp;
        let n = qi / sq;
        if m == 0.0 && n == 0.0 {
            continue;
        }
        let mid = m + n;
        if m > 0.0 {
            acc += m * (2.0 * m / mid).ln();
        }
        if n > 0.0 {
            acc += n * (2.0 * n / mid).ln();
        }
    }
    Ok(acc.max(0.0))
}

/// Side-by-side diagnostics for two distributions.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    /// Symmetrized KL distance of the two CDF increment vectors on the
    /// merged support.
    pub topsoe: f64,
    /// sup |F_a - F_b|.
    pub ks_sup_distance: f64,
    /// Matched quantiles of both distributions at evenly spaced probabilities.
    pub qq_points: Vec<(f64, f64)>,
    /// Cumulative probabilities of both distributions at the merged support.
    pub pp_points: Vec<(f64, f64)>,
}

/// Builds QQ/PP point lists, the KS statistic, and a Topsøe score for two
/// distributions. `n_points` controls the quantile grid of the QQ list.
pub fn compare(a: &StepDistribution, b: &StepDistribution, n_points: usize) -> ComparisonReport {
    let n = n_points.max(1);
    let qq_points = (0..n)
        .map(|i| {
            let u = (i + 1) as f64 / (n + 1) as f64;
            (a.quantile(u), b.quantile(u))
        })
        .collect();

    let mut merged: Vec<f64> = a
        .points()
        .iter()
        .chain(b.points().iter())
        .map(|p| p.0)
        .collect();
    merged.sort_by(|x, y| x.partial_cmp(y).unwrap());
    merged.dedup();
    let pp_points: Vec<(f64, f64)> = merged.iter().map(|&v| (a.cdf(v), b.cdf(v))).collect();

    let pa: Vec<f64> = cell_masses(a, &merged);
    let pb: Vec<f64> = cell_masses(b, &merged);
    let topsoe = topsoe(&pa, &pb).unwrap_or(0.0);

    ComparisonReport {
        topsoe,
        ks_sup_distance: ks_distance(a, b),
        qq_points,
        pp_points,
    }
}

/// CDF increments of `d` over the cells induced by sorted `knots`.
fn cell_masses(d: &StepDistribution, knots: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    knots
        .iter()
        .map(|&v| {
            let c = d.cdf(v);
            let m = (c - prev).max(0.0);
            prev = c;
            m
        })
        .collect()
}

/// A probability density on a uniform grid, used by the deconvolver and the
/// convolution checks.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub origin: f64,
    pub bin_width: f64,
    pub masses: Vec<f64>,
}

impl DensityGrid {
    pub fn new(origin: f64, bin_width: f64, masses: Vec<f64>) -> Result<Self, DistError> {
        if bin_width <= 0.0 || !bin_width.is_finite() {
            return Err(DistError::BadBinWidth);
        }
        Ok(Self {
            origin,
            bin_width,
            masses,
        })
    }

    /// Rasterizes a distribution onto `n_bins` uniform cells starting at
    /// `origin`. Bin 0 also absorbs any mass at or below the origin.
    pub fn rasterize(
        dist: &StepDistribution,
        origin: f64,
        bin_width: f64,
        n_bins: usize,
    ) -> Result<Self, DistError> {
        if bin_width <= 0.0 {
            return Err(DistError::BadBinWidth);
        }
        let mut masses = vec![0.0; n_bins];
        let mut prev = 0.0;
        for (i, m) in masses.iter_mut().enumerate() {
            let right = origin + (i as f64 + 1.0) * bin_width;
            let c = if i + 1 == n_bins { 1.0 } else { dist.cdf(right) };
            *m = (c - prev).max(0.0);
            prev = c;
        }
        Ok(Self {
            origin,
            bin_width,
            masses,
        })
    }

    /// Grid spanning `[0, 1.05 * max_support]` with `n_bins` cells.
    pub fn spanning(dist: &StepDistribution, n_bins: usize) -> Result<Self, DistError> {
        let hi = 1.05 * dist.max_value().max(f64::MIN_POSITIVE);
        Self::rasterize(dist, 0.0, hi / n_bins as f64, n_bins)
    }

    pub fn mass_sum(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn normalize(&mut self) {
        let s = self.mass_sum();
        if s > 0.0 {
            for m in &mut self.masses {
                *m /= s;
            }
        }
    }

    /// Distribution of the sum of independent draws from `self` and `other`.
    pub fn convolve(&self, other: &DensityGrid) -> Result<DensityGrid, DistError> {
        let rel = (self.bin_width - other.bin_width).abs() / self.bin_width.max(other.bin_width);
        if rel > 1e-9 {
            return Err(DistError::BinWidthMismatch(self.bin_width, other.bin_width));
        }
        let n = self.masses.len() + other.masses.len() - 1;
        let mut out = vec![0.0; n];
        for (i, &a) in self.masses.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.masses.iter().enumerate() {
                if b != 0.0 {
                    out[i + j] += a * b;
                }
            }
        }
        Ok(DensityGrid {
            origin: self.origin + other.origin,
            bin_width: self.bin_width,
            masses: out,
        })
    }

    /// Integrates the grid into a CDF with knots at the right bin edges.
    /// Leading and trailing zero-mass bins are trimmed.
    pub fn to_step_distribution(&self, kind: SupportKind) -> Result<StepDistribution, DistError> {
        let total = self.mass_sum();
        if total <= 0.0 {
            return Err(DistError::Empty);
        }
        let first = self.masses.iter().position(|&m| m > 0.0).unwrap();
        let last = self.masses.iter().rposition(|&m| m > 0.0).unwrap();
        let mut points = Vec::with_capacity(last - first + 2);
        let left_edge = (self.origin + first as f64 * self.bin_width).max(0.0);
        points.push((left_edge, 0.0));
        let mut cum = 0.0;
        for i in first..=last {
            cum += self.masses[i] / total;
            let right = self.origin + (i as f64 + 1.0) * self.bin_width;
            points.push((right, cum.min(1.0)));
        }
        points.last_mut().unwrap().1 = 1.0;
        StepDistribution::new(points, kind, Interp::Linear)
    }
}
