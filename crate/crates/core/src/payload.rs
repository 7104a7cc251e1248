//! Inferring payload flow sizes from the observed Layer-2 flow sizes.
//!
//! Observed Layer-2 flows are the union of payload flows and their ACK
//! flows. Given the fixed ACK model, each payload flow of size `x` implies
//! an ACK flow of size `ACK(x) <= x`, so walking the observed flow-size PMF
//! in descending order and removing the implied ACK mass at `ACK(x)` leaves
//! exactly the payload part. The reverse direction — mixing a payload PMF
//! with its pushed-forward ACK sizes — reconstructs the Layer-2 picture for
//! validation.

use crate::ack::AckModel;
use crate::dist::{DistError, Interp, StepDistribution, SupportKind};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PayloadError {
    #[error("flow-size PMF needs at least one entry")]
    Empty,
    #[error("PMF sizes must be strictly increasing (violated at index {0})")]
    SizesNotIncreasing(usize),
    #[error("PMF masses must be non-negative and sum to 1 (sum = {0})")]
    BadMass(f64),
    #[error("payload/ACK split must lie in (0, 1), got {0}")]
    BadSplit(f64),
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// A discrete flow-size distribution over byte sizes, tied to the ACK model
/// that relates payload sizes to ACK-flow sizes.
#[derive(Debug, Clone)]
pub struct FlowSizePmf {
    entries: Vec<(u64, f64)>,
    model: AckModel,
}

/// What happened during [`FlowSizePmf::infer_payload_sizes`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ExtractionStats {
    /// Bins whose mass went negative and were clamped to zero.
    pub clamped_bins: usize,
    /// Sizes with `ACK(x) == x` that subtracted from themselves.
    pub self_subtractions: usize,
    /// True when extraction removed all mass and the input was returned
    /// unchanged (degenerate fixed point, e.g. a pure 66-byte atom).
    pub degenerate: bool,
}

impl FlowSizePmf {
    /// Builds a PMF from `(size, mass)` entries; masses are normalized and
    /// must be non-negative, sizes strictly increasing.
    pub fn new(entries: Vec<(u64, f64)>, model: AckModel) -> Result<Self, PayloadError> {
        if entries.is_empty() {
            return Err(PayloadError::Empty);
        }
        for (i, &(s, m)) in entries.iter().enumerate() {
            if i > 0 && s <= entries[i - 1].0 {
                return Err(PayloadError::SizesNotIncreasing(i));
            }
            if m < 0.0 || !m.is_finite() {
                return Err(PayloadError::BadMass(m));
            }
            let _ = s;
        }
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if total <= 0.0 {
            return Err(PayloadError::BadMass(total));
        }
        let entries = entries
            .into_iter()
            .map(|(s, m)| (s, m / total))
            .collect();
        Ok(Self { entries, model })
    }

    /// Discretizes a flow-size CDF onto the ACK-size lattice.
    ///
    /// Support points below `ACK(max)` are all multiples of the ACK packet
    /// size, so every `ACK(x)` of a supported `x` is itself a supported bin
    /// and the descending subtraction has real mass to remove. Above that,
    /// support points sit at multiples of `mss * r`: one cell per ACK
    /// count, so a cell's whole mass shares a single ACK target. Cells are
    /// bounded by midpoints between neighboring support points.
    pub fn from_distribution(dist: &StepDistribution, model: AckModel) -> Result<Self, PayloadError> {
        let max = dist.max_value();
        let ack_unit = model.ack_packet_size;
        let lattice_top = model.ack_flow_size(max.ceil() as u64).max(ack_unit);
        let mut support: Vec<u64> = (1..=lattice_top / ack_unit).map(|k| k * ack_unit).collect();
        let band = model.bytes_per_ack();
        let mut k = (lattice_top as f64 / band).floor() as u64 + 1;
        loop {
            let v = (k as f64 * band).round() as u64;
            support.push(v);
            if v as f64 >= max {
                break;
            }
            k += 1;
        }
        support.dedup();
        let masses = cell_masses(dist, &support);
        let entries: Vec<(u64, f64)> = support.into_iter().zip(masses).collect();
        Self::new(entries, model)
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn model(&self) -> &AckModel {
        &self.model
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Mean flow size in bytes.
    pub fn mean(&self) -> f64 {
        self.entries.iter().map(|&(s, m)| s as f64 * m).sum()
    }

    /// The PMF as a sampleable step CDF.
    pub fn to_step_distribution(&self) -> Result<StepDistribution, PayloadError> {
        let mut cum = 0.0;
        let total = self.total_mass();
        let mut points = Vec::with_capacity(self.entries.len());
        for &(s, m) in &self.entries {
            if m <= 0.0 {
                continue;
            }
            cum += m / total;
            points.push((s as f64, cum.min(1.0)));
        }
        if points.is_empty() {
            return Err(PayloadError::Empty);
        }
        points.last_mut().unwrap().1 = 1.0;
        Ok(StepDistribution::new(points, SupportKind::Bytes, Interp::Step)?)
    }

    /// Transforms the observed Layer-2 flow-size PMF into the payload
    /// flow-size PMF by walking sizes in descending order and removing the
    /// implied ACK mass at `ACK(x)`, creating that bin if absent.
    ///
    /// Negative intermediate masses are clamped to zero before the final
    /// renormalization. If everything cancels (a pure self-acknowledging
    /// atom), the input is returned unchanged with `degenerate` set.
    pub fn infer_payload_sizes(&self) -> (FlowSizePmf, ExtractionStats) {
        let mut stats = ExtractionStats::default();
        let mut sizes: Vec<u64> = self.entries.iter().map(|e| e.0).collect();
        let mut masses: Vec<f64> = self.entries.iter().map(|e| e.1).collect();

        let mut i = sizes.len();
        while i > 0 {
            i -= 1;
            let x = sizes[i];
            let mass = masses[i];
            if mass <= 0.0 {
                continue;
            }
            let target = self.model.ack_flow_size(x);
            if target == x {
                stats.self_subtractions += 1;
                masses[i] = 0.0;
                continue;
            }
            match sizes.binary_search(&target) {
                Ok(j) => {
                    debug_assert!(j <= i, "ACK bin written after being read");
                    let next = masses[j] - mass;
                    if next < 0.0 {
                        stats.clamped_bins += 1;
                    }
                    masses[j] = next.max(0.0);
                }
                Err(j) => {
                    // New bin below x: starts at zero mass, so the
                    // subtraction clamps immediately.
                    debug_assert!(j <= i, "ACK bin created above its flow size");
                    sizes.insert(j, target);
                    masses.insert(j, 0.0);
                    stats.clamped_bins += 1;
                    i += 1; // current element shifted right
                }
            }
        }

        let total: f64 = masses.iter().sum();
        if total <= 1e-12 {
            stats.degenerate = true;
            return (self.clone(), stats);
        }
        let entries: Vec<(u64, f64)> = sizes
            .into_iter()
            .zip(masses)
            .filter(|&(_, m)| m > 0.0)
            .map(|(s, m)| (s, m / total))
            .collect();
        (
            FlowSizePmf {
                entries,
                model: self.model,
            },
            stats,
        )
    }

    /// Mixture of the payload sizes and their pushed-forward ACK sizes,
    /// weighted `(split, 1 - split)` — the Layer-2 flow-size distribution
    /// this payload PMF implies.
    pub fn implied_l2_flow_sizes(&self, pl_ack_split: f64) -> Result<StepDistribution, PayloadError> {
        if !(pl_ack_split > 0.0 && pl_ack_split < 1.0) {
            return Err(PayloadError::BadSplit(pl_ack_split));
        }
        let total = self.total_mass();
        let mut atoms: Vec<(u64, f64)> = Vec::with_capacity(self.entries.len() * 2);
        for &(s, m) in &self.entries {
            if m <= 0.0 {
                continue;
            }
            atoms.push((s, pl_ack_split * m / total));
            atoms.push((self.model.ack_flow_size(s), (1.0 - pl_ack_split) * m / total));
        }
        atoms.sort_by_key(|a| a.0);
        let mut points: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        let mut cum = 0.0;
        for (s, m) in atoms {
            cum += m;
            match points.last_mut() {
                Some(last) if last.0 == s as f64 => last.1 = cum.min(1.0),
                _ => points.push((s as f64, cum.min(1.0))),
            }
        }
        points.last_mut().unwrap().1 = 1.0;
        Ok(StepDistribution::new(points, SupportKind::Bytes, Interp::Step)?)
    }
}

/// CDF increments over midpoint-bounded cells around the support points.
fn cell_masses(dist: &StepDistribution, support: &[u64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(support.len());
    let mut prev_cum = 0.0;
    for (i, &s) in support.iter().enumerate() {
        let cum = if i + 1 == support.len() {
            1.0
        } else {
            let right = 0.5 * (s as f64 + support[i + 1] as f64);
            dist.cdf(right)
        };
        out.push((cum - prev_cum).max(0.0));
        prev_cum = cum;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ks_distance_above;

    fn model() -> AckModel {
        AckModel::default()
    }

    #[test]
    fn single_huge_atom_survives_extraction() {
        let pmf = FlowSizePmf::new(vec![(1_000_000, 1.0)], model()).unwrap();
        let (pl, stats) = pmf.infer_payload_sizes();
        // ACK(1e6) = 66 * ceil(276.24) = 18282; created, clamped, dropped.
        assert_eq!(model().ack_flow_size(1_000_000), 18_282);
        assert_eq!(pl.entries(), &[(1_000_000, 1.0)]);
        assert_eq!(stats.clamped_bins, 1);
        assert!(!stats.degenerate);
    }

    #[test]
    fn ack_mass_is_removed_exactly() {
        let pmf =
            FlowSizePmf::new(vec![(18_282, 0.5), (1_000_000, 0.5)], model()).unwrap();
        let (pl, stats) = pmf.infer_payload_sizes();
        assert_eq!(pl.entries(), &[(1_000_000, 1.0)]);
        assert_eq!(stats.clamped_bins, 0);
    }

    #[test]
    fn pure_ack_atom_is_a_degenerate_fixed_point() {
        let pmf = FlowSizePmf::new(vec![(66, 1.0)], model()).unwrap();
        let (pl, stats) = pmf.infer_payload_sizes();
        assert!(stats.degenerate);
        assert_eq!(stats.self_subtractions, 1);
        assert_eq!(pl.entries(), &[(66, 1.0)]);
    }

    #[test]
    fn implied_mixture_of_a_point_mass() {
        let pmf = FlowSizePmf::new(vec![(3_620, 1.0)], model()).unwrap();
        let l2 = pmf.implied_l2_flow_sizes(0.5).unwrap();
        // ACK(3620) = 66: two-point mixture.
        assert_eq!(l2.points().len(), 2);
        assert_eq!(l2.points()[0], (66.0, 0.5));
        assert_eq!(l2.points()[1], (3620.0, 1.0));
    }

    #[test]
    fn implied_mixture_with_coincident_atoms() {
        let pmf = FlowSizePmf::new(vec![(66, 1.0)], model()).unwrap();
        let l2 = pmf.implied_l2_flow_sizes(0.5).unwrap();
        assert_eq!(l2.points(), &[(66.0, 1.0)]);
    }

    #[test]
    fn exact_mixture_extraction_recovers_the_payload_pmf() {
        // Hand-built observed PMF: an exact 50/50 mixture of three payload
        // atoms and their ACK-flow sizes. Extraction must peel the ACK half
        // off exactly and the implied mixture must reproduce the input.
        let m = model();
        let pl_atoms: [(u64, f64); 3] = [(5_000, 0.4), (108_600, 0.35), (2_500_000, 0.25)];
        let mut obs_atoms: Vec<(u64, f64)> = Vec::new();
        for &(s, p) in &pl_atoms {
            obs_atoms.push((s, 0.5 * p));
            obs_atoms.push((m.ack_flow_size(s), 0.5 * p));
        }
        obs_atoms.sort_unstable_by_key(|a| a.0);
        let obs = FlowSizePmf::new(obs_atoms, m).unwrap();
        let (pl, stats) = obs.infer_payload_sizes();
        assert_eq!(stats.clamped_bins, 0);
        assert_eq!(pl.entries().len(), 3);
        for (&(got_s, got_p), &(want_s, want_p)) in pl.entries().iter().zip(pl_atoms.iter()) {
            assert_eq!(got_s, want_s);
            assert!((got_p - want_p).abs() < 1e-12);
        }
        let l2 = pl.implied_l2_flow_sizes(0.5).unwrap();
        assert!(ks_distance_above(&l2, &obs.to_step_distribution().unwrap(), 0.0) < 1e-9);
    }

    /// A "digitized" observed flow-size CDF: the 50/50 payload/ACK mixture
    /// of a piecewise-linear payload distribution, sampled on a log grid
    /// the way a plot would be read off.
    fn digitized_mixture_obs(pl: &StepDistribution, ack: &AckModel) -> StepDistribution {
        let bytes_per_ack = ack.bytes_per_ack();
        let ack_unit = ack.ack_packet_size as f64;
        let cdf_mix = |v: f64| {
            0.5 * pl.cdf(v) + 0.5 * pl.cdf(bytes_per_ack * (v / ack_unit).floor())
        };
        let lo: f64 = 66.0;
        let hi = pl.max_value();
        let n = 240;
        let mut points: Vec<(f64, f64)> = Vec::new();
        for i in 0..=n {
            let v = lo * (hi / lo).powf(i as f64 / n as f64);
            let c = cdf_mix(v);
            if points.last().map_or(true, |&(pv, pc)| v > pv && c > pc) {
                points.push((v, c));
            }
        }
        points.last_mut().unwrap().1 = 1.0;
        StepDistribution::new(points, SupportKind::Bytes, Interp::Linear).unwrap()
    }

    #[test]
    fn extraction_round_trips_above_1000_bytes() {
        let pl_true = StepDistribution::new(
            vec![
                (300.0, 0.0),
                (2_000.0, 0.35),
                (20_000.0, 0.70),
                (400_000.0, 0.92),
                (10_000_000.0, 1.0),
            ],
            SupportKind::Bytes,
            Interp::Linear,
        )
        .unwrap();
        let obs = digitized_mixture_obs(&pl_true, &model());
        let pmf = FlowSizePmf::from_distribution(&obs, model()).unwrap();
        let (pl, _) = pmf.infer_payload_sizes();
        let l2 = pl.implied_l2_flow_sizes(0.5).unwrap();
        let ks_hi = ks_distance_above(&l2, &pmf.to_step_distribution().unwrap(), 1000.0);
        assert!(ks_hi < 0.05, "KS above 1000 bytes = {ks_hi}");
    }

    #[test]
    fn extraction_output_is_a_pmf() {
        let obs = StepDistribution::new(
            vec![(66.0, 0.3), (5_000.0, 0.7), (500_000.0, 1.0)],
            SupportKind::Bytes,
            Interp::Linear,
        )
        .unwrap();
        let pmf = FlowSizePmf::from_distribution(&obs, model()).unwrap();
        let (pl, _) = pmf.infer_payload_sizes();
        assert!((pl.total_mass() - 1.0).abs() < 1e-9);
        assert!(pl.entries().iter().all(|&(_, m)| m >= 0.0));
        assert!(pl.entries().windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn lattice_discretization_covers_all_ack_targets() {
        let obs = StepDistribution::new(
            vec![(66.0, 0.0), (2_000_000.0, 1.0)],
            SupportKind::Bytes,
            Interp::Linear,
        )
        .unwrap();
        let pmf = FlowSizePmf::from_distribution(&obs, model()).unwrap();
        let sizes: Vec<u64> = pmf.entries().iter().map(|e| e.0).collect();
        for &(s, m) in pmf.entries() {
            if m > 0.0 && s > 66 {
                let a = model().ack_flow_size(s);
                assert!(sizes.binary_search(&a).is_ok(), "ACK({s}) = {a} missing");
            }
        }
    }
}
