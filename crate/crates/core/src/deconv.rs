//! Recovering payload byte-volume distributions from observed Layer-2 ones.
//!
//! A non-zero Layer-2 traffic-matrix entry is modelled as `Z = X + beta*Y`
//! with `X`, `Y` iid payload volumes and `beta` the ACK bytes per payload
//! byte. Writing `g` for the characteristic function of `Z` and `f` for the
//! one of `X`, independence gives `g(t) = f(t) * f(gamma*t)` with the
//! sub-unit scale factor `gamma`, and the telescoping product
//!
//! ```text
//!     f(t) = prod_{k>=0} g(gamma^{2k} t) / g(gamma^{2k+1} t)
//! ```
//!
//! converges because `gamma < 1` drives late arguments to 0 where `g(0)=1`.
//!
//! `g` is evaluated in closed form from the step/piecewise-linear CDF of
//! `z` (atoms contribute complex exponentials, uniform segments a sinc
//! factor), because the product needs `g` at arguments `gamma^k * t` that
//! almost never land on a DFT bin and the DFT of a gridded density
//! oscillates too fast between bins to interpolate. The truncated product
//! is walked on the output frequency grid, transformed back with an
//! inverse DFT, and the codified post-filter applied: clip negative
//! densities, smooth with a short centered moving average, renormalize,
//! integrate to a CDF.

use crate::ack::AckModel;
use crate::dist::{DensityGrid, DistError, Interp, StepDistribution};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DeconvolveError {
    #[error("grid_size must be a power of two (got {0})")]
    GridSizeNotPowerOfTwo(usize),
    #[error("invalid deconvolution config: {0}")]
    BadConfig(&'static str),
    #[error("characteristic function vanishes near frequency bin {bin}; product does not converge")]
    VanishingCharFn { bin: usize },
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// Tuning knobs for [`deconvolve`]. The defaults reproduce the codified
/// post-processing: 2^14 grid bins, 64 product terms, clip-then-smooth with
/// a 5-bin window.
#[derive(Debug, Clone, Copy)]
pub struct DeconvolutionConfig {
    pub grid_size: usize,
    pub product_terms: usize,
    /// Centered moving-average window in bins; must be odd.
    pub smoothing_window: usize,
    pub negativity_clip: bool,
    /// Hann taper on the recovered spectrum before the inverse transform.
    /// Sharp truncation at the Nyquist frequency rings harmonically around
    /// any atom of the solution, and the negativity clip then turns the
    /// ring into spurious background mass; the taper trades that for a
    /// few-bin smear.
    pub spectral_taper: bool,
}

impl Default for DeconvolutionConfig {
    fn default() -> Self {
        Self {
            grid_size: 1 << 14,
            product_terms: 64,
            smoothing_window: 5,
            negativity_clip: true,
            spectral_taper: true,
        }
    }
}

impl DeconvolutionConfig {
    fn validate(&self) -> Result<(), DeconvolveError> {
        if !self.grid_size.is_power_of_two() {
            return Err(DeconvolveError::GridSizeNotPowerOfTwo(self.grid_size));
        }
        if self.product_terms == 0 {
            return Err(DeconvolveError::BadConfig("product_terms must be >= 1"));
        }
        if self.smoothing_window % 2 == 0 {
            return Err(DeconvolveError::BadConfig("smoothing_window must be odd"));
        }
        Ok(())
    }
}

/// sin(x)/x with the removable singularity filled in.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Characteristic function of a step distribution at `omega`, evaluated
/// exactly from its knots with the DFT sign convention `E[exp(-i w V)]`.
/// Atoms contribute plain phases; linear segments a phase at the segment
/// midpoint damped by a sinc of the segment half-width.
fn char_fn(points: &[(f64, f64)], interp: Interp, omega: f64) -> Complex<f64> {
    if omega == 0.0 {
        return Complex::new(1.0, 0.0);
    }
    let (v0, p0) = points[0];
    let mut acc = Complex::from_polar(p0, -omega * v0);
    for w in points.windows(2) {
        let (a, ca) = w[0];
        let (b, cb) = w[1];
        let mass = cb - ca;
        if mass <= 0.0 {
            continue;
        }
        match interp {
            Interp::Step => acc += Complex::from_polar(mass, -omega * b),
            Interp::Linear => {
                let mid = 0.5 * (a + b);
                let half = 0.5 * (b - a);
                acc += Complex::from_polar(mass * sinc(omega * half), -omega * mid);
            }
        }
    }
    acc
}


/// Recovers `X` from `z ~ X + beta*X'` (`X'` an iid copy).
///
/// Returns a valid distribution (non-negative, normalized) regardless of
/// input noise. A zero-width input is returned directly as the point mass at
/// `value / (1 + beta)`. Frequency bins where the characteristic function
/// falls below 1e-12 in magnitude abort with [`DeconvolveError::VanishingCharFn`]
/// rather than amplify noise.
pub fn deconvolve(
    z: &StepDistribution,
    model: &AckModel,
    cfg: &DeconvolutionConfig,
) -> Result<StepDistribution, DeconvolveError> {
    cfg.validate()?;
    let beta = model.beta();
    if z.max_value() == z.min_value() {
        return Ok(StepDistribution::point_mass(
            z.max_value() / (1.0 + beta),
            z.kind(),
        ));
    }

    let n = cfg.grid_size;
    let half = n / 2;
    let max_value = z.max_value();
    let span = 1.05 * max_value;
    let bin_width = span / n as f64;

    // Thin gigantic knot lists; the closed-form evaluation is linear in
    // the knot count per frequency. Thinned segments must stay under two
    // grid bins wide, or their sinc factors flip sign inside the analysis
    // band and the recovered spectrum rings.
    let knot_cap = half.max(16);
    let mut knots: Vec<(f64, f64)> = z.points().to_vec();
    if knots.len() > knot_cap {
        let stride = knots.len().div_ceil(knot_cap);
        let last = *knots.last().unwrap();
        knots = knots.into_iter().step_by(stride).collect();
        if knots.last() != Some(&last) {
            knots.push(last);
        }
    }

    // gamma is the sub-unit scale factor of the product formula.
    let gamma = beta.min(1.0 / beta);
    let omega_step = 2.0 * std::f64::consts::PI / (n as f64 * bin_width);
    let mut spectrum = vec![Complex::new(0.0, 0.0); n];
    for j in 0..=half {
        let omega = j as f64 * omega_step;
        let mut f = Complex::new(1.0, 0.0);
        let mut arg = omega;
        for _ in 0..cfg.product_terms {
            // Once the argument cannot rotate any phase, every remaining
            // factor is g(0)/g(0) = 1.
            if arg * max_value < 1e-9 {
                break;
            }
            let num = char_fn(&knots, z.interp(), arg);
            arg *= gamma;
            let den = char_fn(&knots, z.interp(), arg);
            arg *= gamma;
            if den.norm() < 1e-12 {
                return Err(DeconvolveError::VanishingCharFn { bin: j });
            }
            f = f * num / den;
        }
        if cfg.spectral_taper {
            let w = 0.5 * (1.0 + (std::f64::consts::PI * j as f64 / half as f64).cos());
            f *= w;
        }
        spectrum[j] = f;
        if j > 0 && j < half {
            spectrum[n - j] = f.conj();
        }
    }
    spectrum[half] = Complex::new(spectrum[half].re, 0.0);

    let mut planner = FftPlanner::new();
    let ifft = planner.plan_fft_inverse(n);
    ifft.process(&mut spectrum);
    let mut density: Vec<f64> = spectrum.iter().map(|c| c.re / n as f64).collect();

    if cfg.negativity_clip {
        for d in &mut density {
            if *d < 0.0 {
                *d = 0.0;
            }
        }
    }
    let smoothed = moving_average(&density, cfg.smoothing_window);
    let mut out = DensityGrid::new(0.0, bin_width, smoothed)?;
    out.normalize();
    Ok(out.to_step_distribution(z.kind())?)
}

/// Distribution of `X + beta*Y` with `X`, `Y` iid draws from `x` — the
/// synthesized Layer-2 entry-size distribution used for round-trip checks.
pub fn reconvolve_check(x: &StepDistribution, model: &AckModel) -> StepDistribution {
    reconvolve_with(x, model, &DeconvolutionConfig::default())
}

/// [`reconvolve_check`] on an explicit grid size.
pub fn reconvolve_with(
    x: &StepDistribution,
    model: &AckModel,
    cfg: &DeconvolutionConfig,
) -> StepDistribution {
    let beta = model.beta();
    if x.max_value() == x.min_value() {
        return StepDistribution::point_mass(x.max_value() * (1.0 + beta), x.kind());
    }
    let n = cfg.grid_size;
    let span = 1.05 * x.max_value();
    let width = span / n as f64;
    let a = DensityGrid::rasterize(x, 0.0, width, n).expect("positive bin width");
    let scaled = x.scale_values(beta);
    let nb = ((scaled.max_value() / width).ceil() as usize + 1).max(1);
    let b = DensityGrid::rasterize(&scaled, 0.0, width, nb).expect("positive bin width");
    let sum = a.convolve(&b).expect("same bin width by construction");
    sum.to_step_distribution(x.kind())
        .expect("convolution of unit masses has positive total")
}

/// Centered moving average with the window shrinking at the edges.
fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    if window <= 1 {
        return xs.to_vec();
    }
    let h = window / 2;
    let n = xs.len();
    let mut out = Vec::with_capacity(n);
    // Prefix sums keep this O(n) for the 2^14-bin grids.
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &x in xs {
        prefix.push(prefix.last().unwrap() + x);
    }
    for i in 0..n {
        let lo = i.saturating_sub(h);
        let hi = (i + h).min(n - 1);
        out.push((prefix[hi + 1] - prefix[lo]) / (hi - lo + 1) as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{Interp, StepDistribution, SupportKind};

    fn total_variation(a: &StepDistribution, b: &StepDistribution, bins: usize) -> f64 {
        let hi = a.max_value().max(b.max_value()) * 1.01;
        let ga = DensityGrid::rasterize(a, 0.0, hi / bins as f64, bins).unwrap();
        let gb = DensityGrid::rasterize(b, 0.0, hi / bins as f64, bins).unwrap();
        0.5 * ga
            .masses
            .iter()
            .zip(gb.masses.iter())
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>()
    }

    #[test]
    fn point_mass_deconvolves_exactly() {
        let model = AckModel::default();
        let beta = model.beta();
        let a = 50_000.0;
        let z = StepDistribution::point_mass(a * (1.0 + beta), SupportKind::Bytes);
        let x = deconvolve(&z, &model, &DeconvolutionConfig::default()).unwrap();
        assert!((x.max_value() - a).abs() < 1e-6);
    }

    #[test]
    fn reconvolve_point_mass_lands_within_a_bin() {
        let model = AckModel::default();
        let x = StepDistribution::point_mass(1000.0, SupportKind::Bytes);
        let z = reconvolve_check(&x, &model);
        assert!((z.max_value() - 1018.232).abs() < 1e-3);
    }

    #[test]
    fn reconvolve_two_point_matches_enumeration() {
        let model = AckModel::default();
        let beta = model.beta();
        // Atoms at 0 and 3620 with equal mass; beta * 3620 = 66 exactly.
        let x = StepDistribution::new(
            vec![(0.0, 0.5), (3620.0, 1.0)],
            SupportKind::Bytes,
            Interp::Step,
        )
        .unwrap();
        let z = reconvolve_check(&x, &model);
        // Enumerated sum support: 0, 66, 3620, 3686, each with mass 1/4.
        let expect = [
            (0.0, 0.25),
            (3620.0 * beta, 0.25),
            (3620.0, 0.25),
            (3620.0 + 3620.0 * beta, 0.25),
        ];
        // Each atom quantizes down by up to one bin and the convolution
        // sums two quantizations, so probe a +-2.5 bin window.
        let width = 2.5 * 1.05 * 3620.0 / (1 << 14) as f64;
        for (v, m) in expect {
            let lo = z.cdf(v - width);
            let hi = z.cdf(v + width);
            assert!(
                (hi - lo - m).abs() < 1e-9,
                "mass near {v} is {} not {m}",
                hi - lo
            );
        }
    }

    #[test]
    fn forward_convolved_two_point_recovers_within_tv() {
        let model = AckModel::default();
        let beta = model.beta();
        let (a, b) = (200_000.0, 1_000_000.0);
        // Independent enumeration of X + beta*Y for the two-point X.
        let mut atoms = vec![
            (a + beta * a, 0.25),
            (a + beta * b, 0.25),
            (b + beta * a, 0.25),
            (b + beta * b, 0.25),
        ];
        atoms.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut cum = 0.0;
        let pts: Vec<(f64, f64)> = atoms
            .iter()
            .map(|&(v, m)| {
                cum += m;
                (v, cum)
            })
            .collect();
        let z = StepDistribution::new(pts, SupportKind::Bytes, Interp::Step).unwrap();
        let x_true = StepDistribution::new(
            vec![(a, 0.5), (b, 1.0)],
            SupportKind::Bytes,
            Interp::Step,
        )
        .unwrap();
        let x_hat = deconvolve(&z, &model, &DeconvolutionConfig::default()).unwrap();
        assert!(total_variation(&x_hat, &x_true, 512) < 0.05);
    }

    #[test]
    fn mean_consistency_on_smooth_input() {
        let model = AckModel::default();
        let x = StepDistribution::new(
            vec![(1_000.0, 0.0), (50_000.0, 0.6), (400_000.0, 1.0)],
            SupportKind::Bytes,
            Interp::Linear,
        )
        .unwrap();
        let z = reconvolve_check(&x, &model);
        let x_hat = deconvolve(&z, &model, &DeconvolutionConfig::default()).unwrap();
        let lhs = x_hat.mean() * (1.0 + model.beta());
        let rhs = z.mean();
        assert!((lhs / rhs - 1.0).abs() < 0.02, "means {lhs} vs {rhs}");
    }

    #[test]
    fn round_trip_ks_on_smooth_input() {
        let model = AckModel::default();
        let x = StepDistribution::new(
            vec![(1_000.0, 0.0), (20_000.0, 0.3), (900_000.0, 1.0)],
            SupportKind::Bytes,
            Interp::Linear,
        )
        .unwrap();
        let z = reconvolve_check(&x, &model);
        let x_hat = deconvolve(&z, &model, &DeconvolutionConfig::default()).unwrap();
        let z_again = reconvolve_check(&x_hat, &model);
        assert!(crate::dist::ks_distance(&z_again, &z) < 0.05);
    }

    #[test]
    fn truncation_is_stable_beyond_64_terms() {
        let model = AckModel::default();
        let x = StepDistribution::new(
            vec![(5_000.0, 0.0), (100_000.0, 0.5), (2_000_000.0, 1.0)],
            SupportKind::Bytes,
            Interp::Linear,
        )
        .unwrap();
        let z = reconvolve_check(&x, &model);
        let short = deconvolve(&z, &model, &DeconvolutionConfig::default()).unwrap();
        let long = deconvolve(
            &z,
            &model,
            &DeconvolutionConfig {
                product_terms: 128,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(total_variation(&short, &long, 2048) < 1e-3);
    }

    #[test]
    fn output_is_always_a_valid_distribution() {
        let model = AckModel::default();
        // A jagged, noisy input CDF.
        let z = StepDistribution::new(
            vec![
                (100.0, 0.05),
                (101.0, 0.30),
                (5_000.0, 0.31),
                (5_001.0, 0.60),
                (80_000.0, 0.61),
                (80_001.0, 1.0),
            ],
            SupportKind::Bytes,
            Interp::Linear,
        )
        .unwrap();
        let x = deconvolve(&z, &model, &DeconvolutionConfig::default()).unwrap();
        let pts = x.points();
        assert!((pts.last().unwrap().1 - 1.0).abs() < 1e-9);
        assert!(pts.windows(2).all(|w| w[1].1 >= w[0].1 && w[1].0 > w[0].0));
        assert!(pts.iter().all(|p| p.0 >= 0.0));
    }

    #[test]
    fn rejects_bad_grid_size() {
        let model = AckModel::default();
        let z = StepDistribution::new(
            vec![(0.0, 0.0), (10.0, 1.0)],
            SupportKind::Bytes,
            Interp::Linear,
        )
        .unwrap();
        let cfg = DeconvolutionConfig {
            grid_size: 1000,
            ..Default::default()
        };
        assert!(matches!(
            deconvolve(&z, &model, &cfg),
            Err(DeconvolveError::GridSizeNotPowerOfTwo(1000))
        ));
    }
}
