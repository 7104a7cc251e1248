//! Generating the unmapped payload flows of one epoch.
//!
//! Flow sizes come from the payload flow-size distribution, arrival times
//! from cumulative inter-arrival draws. The set is accepted only when its
//! total size matches the traffic matrix total within 1%; otherwise the
//! inter-arrival scale is updated multiplicatively (the fixed-point
//! iteration on expected totals) and the whole set is regenerated with
//! fresh draws.

use crate::dist::StepDistribution;
use crate::tm::TrafficMatrix;
use rand::Rng;
use thiserror::Error;

/// A payload flow before source/destination assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnmappedFlow {
    /// Seconds within the epoch, in `[0, epoch_length)`.
    pub start_time: f64,
    pub size: u64,
}

/// Accepted flow set with its volume-balance bookkeeping.
#[derive(Debug, Clone)]
pub struct FlowsetResult {
    /// Flows sorted by start time.
    pub flows: Vec<UnmappedFlow>,
    /// Sum of generated flow sizes.
    pub s_f: f64,
    /// Traffic-matrix total the set has to match.
    pub s_m: f64,
    /// Imbalance `s_m / s_f`; within 1% of 1 on success.
    pub epsilon: f64,
    /// Linear factor applied to the inter-arrival draws.
    pub iat_scale: f64,
    pub attempts: u32,
}

#[derive(Debug, Error)]
pub enum FlowsetError {
    #[error("traffic matrix has no volume to cover")]
    EmptyMatrix,
    #[error("no volume balance within {attempts} attempts (best |eps-1| = {:.4})", best.epsilon - 1.0)]
    NoConvergence {
        attempts: u32,
        /// The attempt that came closest to balance.
        best: Box<FlowsetResult>,
    },
}

/// Default cap on regeneration attempts.
pub const MAX_ATTEMPTS: u32 = 50;

/// Creates the epoch's unmapped flows, regenerating with a rescaled
/// inter-arrival time until `|s_m / s_f - 1| <= 0.01`.
pub fn create_flowset<R: Rng + ?Sized>(
    tm: &TrafficMatrix,
    flow_sizes: &StepDistribution,
    iat: &StepDistribution,
    rng: &mut R,
    max_attempts: u32,
) -> Result<FlowsetResult, FlowsetError> {
    let s_m = tm.total();
    if s_m <= 0.0 {
        return Err(FlowsetError::EmptyMatrix);
    }
    let epoch = tm.epoch_length;
    let mut iat_scale = 1.0f64;
    let mut best: Option<FlowsetResult> = None;

    for attempt in 1..=max_attempts.max(1) {
        let mut flows: Vec<UnmappedFlow> = Vec::new();
        let mut t = 0.0f64;
        let mut s_f = 0.0f64;
        loop {
            t += iat.sample(rng) * iat_scale;
            if t >= epoch {
                break;
            }
            let size = flow_sizes.sample(rng).round().max(1.0) as u64;
            s_f += size as f64;
            flows.push(UnmappedFlow {
                start_time: t,
                size,
            });
        }
        let epsilon = if s_f > 0.0 { s_m / s_f } else { f64::INFINITY };
        let result = FlowsetResult {
            flows,
            s_f,
            s_m,
            epsilon,
            iat_scale,
            attempts: attempt,
        };
        if (epsilon - 1.0).abs() <= 0.01 {
            return Ok(result);
        }
        let better = match &best {
            None => true,
            Some(b) => (epsilon - 1.0).abs() < (b.epsilon - 1.0).abs(),
        };
        if better {
            best = Some(result);
        }
        // More volume needed -> shrink the gaps, and vice versa.
        iat_scale *= if s_f > 0.0 { s_f / s_m } else { 0.5 };
    }
    Err(FlowsetError::NoConvergence {
        attempts: max_attempts,
        best: Box::new(best.expect("at least one attempt ran")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degseq::RackLayout;
    use crate::dist::{empirical_cdf, ks_distance, Interp, StepDistribution, SupportKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tm_with_total(total: f64) -> TrafficMatrix {
        let layout = RackLayout::new(2, 1).unwrap();
        let mut tm = TrafficMatrix::new(layout, 10.0);
        tm.add(0, 1, total);
        tm
    }

    #[test]
    fn deterministic_balance_in_one_attempt() {
        let tm = tm_with_total(1e7);
        let sizes = StepDistribution::point_mass(1000.0, SupportKind::Bytes);
        let iat = StepDistribution::point_mass(0.001, SupportKind::Seconds);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let res = create_flowset(&tm, &sizes, &iat, &mut rng, MAX_ATTEMPTS).unwrap();
        assert_eq!(res.attempts, 1);
        assert_eq!(res.flows.len(), 10_000);
        assert!((res.epsilon - 1.0).abs() <= 0.01);
        assert_eq!(res.iat_scale, 1.0);
    }

    #[test]
    fn double_volume_halves_the_gap_scale() {
        let tm = tm_with_total(2e7);
        let sizes = StepDistribution::point_mass(1000.0, SupportKind::Bytes);
        let iat = StepDistribution::point_mass(0.001, SupportKind::Seconds);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let res = create_flowset(&tm, &sizes, &iat, &mut rng, MAX_ATTEMPTS).unwrap();
        assert!((res.epsilon - 1.0).abs() <= 0.01);
        assert!((res.iat_scale - 0.5).abs() < 0.01);
        assert_eq!(res.attempts, 2);
    }

    #[test]
    fn start_times_stay_inside_the_epoch_and_sorted() {
        let tm = tm_with_total(5e7);
        let sizes = StepDistribution::new(
            vec![(500.0, 0.0), (2_000.0, 0.7), (50_000.0, 1.0)],
            SupportKind::Bytes,
            Interp::Linear,
        )
        .unwrap();
        let iat = StepDistribution::new(
            vec![(1e-5, 0.0), (5e-4, 1.0)],
            SupportKind::Seconds,
            Interp::Linear,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let res = create_flowset(&tm, &sizes, &iat, &mut rng, MAX_ATTEMPTS).unwrap();
        assert!(res
            .flows
            .iter()
            .all(|f| f.start_time >= 0.0 && f.start_time < 10.0));
        assert!(res.flows.windows(2).all(|w| w[0].start_time <= w[1].start_time));
        assert_eq!(res.s_f, res.flows.iter().map(|f| f.size as f64).sum::<f64>());
    }

    #[test]
    fn flow_sizes_reproduce_the_source_distribution() {
        let tm = tm_with_total(4e8);
        let sizes = StepDistribution::new(
            vec![(100.0, 0.2), (1_000.0, 0.7), (10_000.0, 1.0)],
            SupportKind::Bytes,
            Interp::Step,
        )
        .unwrap();
        let iat = StepDistribution::point_mass(5e-5, SupportKind::Seconds);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let res = create_flowset(&tm, &sizes, &iat, &mut rng, MAX_ATTEMPTS).unwrap();
        assert!(res.flows.len() >= 100_000, "only {} flows", res.flows.len());
        let pooled: Vec<f64> = res.flows.iter().map(|f| f.size as f64).collect();
        let emp = empirical_cdf(&pooled, SupportKind::Bytes).unwrap();
        assert!(ks_distance(&emp, &sizes) < 0.02);
    }

    #[test]
    fn unscaled_gaps_reproduce_the_iat_distribution() {
        let tm = tm_with_total(1e7);
        let sizes = StepDistribution::point_mass(1_000.0, SupportKind::Bytes);
        let iat = StepDistribution::new(
            vec![(1e-4, 0.0), (1e-3, 0.5), (3e-3, 1.0)],
            SupportKind::Seconds,
            Interp::Linear,
        )
        .unwrap();
        // Pool gaps across epochs at iat_scale 1 (the volume matches in
        // expectation: epoch/E[iat] * E[size] ~ 0.73e7..).
        let mut gaps = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let mut t = 0.0;
            let mut prev = 0.0;
            loop {
                t += iat.sample(&mut rng);
                if t >= 10.0 {
                    break;
                }
                gaps.push(t - prev);
                prev = t;
            }
        }
        let _ = (&tm, &sizes);
        let emp = empirical_cdf(&gaps, SupportKind::Seconds).unwrap();
        assert!(ks_distance(&emp, &iat) < 0.02);
    }

    #[test]
    fn impossible_balance_reports_the_best_attempt() {
        // One 5000-byte entry, 3000-byte flows: totals land on multiples of
        // 3000, never within 1% of 5000.
        let tm = tm_with_total(5_000.0);
        let sizes = StepDistribution::point_mass(3_000.0, SupportKind::Bytes);
        let iat = StepDistribution::point_mass(1.0, SupportKind::Seconds);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        match create_flowset(&tm, &sizes, &iat, &mut rng, 10) {
            Err(FlowsetError::NoConvergence { attempts, best }) => {
                assert_eq!(attempts, 10);
                assert!(best.s_f > 0.0);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn empty_matrix_is_rejected() {
        let layout = RackLayout::new(2, 1).unwrap();
        let tm = TrafficMatrix::new(layout, 10.0);
        let sizes = StepDistribution::point_mass(1000.0, SupportKind::Bytes);
        let iat = StepDistribution::point_mass(0.001, SupportKind::Seconds);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert!(matches!(
            create_flowset(&tm, &sizes, &iat, &mut rng, 5),
            Err(FlowsetError::EmptyMatrix)
        ));
    }
}
