//! Property tests for the distribution algebra.

use proptest::prelude::*;
use rackload::ack::AckModel;
use rackload::dist::{topsoe, DensityGrid, Interp, StepDistribution, SupportKind};
use rackload::payload::FlowSizePmf;

fn grid_strategy(len: usize) -> impl Strategy<Value = DensityGrid> {
    proptest::collection::vec(0.0f64..1.0, len).prop_map(move |mut m| {
        let s: f64 = m.iter().sum();
        if s == 0.0 {
            m[0] = 1.0;
        } else {
            m.iter_mut().for_each(|x| *x /= s);
        }
        DensityGrid::new(0.0, 1.0, m).unwrap()
    })
}

fn cdf_strategy() -> impl Strategy<Value = StepDistribution> {
    proptest::collection::vec((1.0f64..1e6, 0.01f64..1.0), 2..12).prop_map(|raw| {
        let mut values: Vec<f64> = raw.iter().map(|r| r.0).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        let total: f64 = raw.iter().take(values.len()).map(|r| r.1).sum();
        let mut cum = 0.0;
        let points: Vec<(f64, f64)> = values
            .iter()
            .zip(raw.iter())
            .map(|(&v, r)| {
                cum += r.1 / total;
                (v, cum.min(1.0))
            })
            .collect();
        let mut points = points;
        points.last_mut().unwrap().1 = 1.0;
        StepDistribution::new(points, SupportKind::Bytes, Interp::Linear).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_is_commutative(a in grid_strategy(16), b in grid_strategy(16)) {
        let ab = a.convolve(&b).unwrap();
        let ba = b.convolve(&a).unwrap();
        for (x, y) in ab.masses.iter().zip(ba.masses.iter()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn convolution_is_associative(
        a in grid_strategy(8),
        b in grid_strategy(8),
        c in grid_strategy(8),
    ) {
        let left = a.convolve(&b).unwrap().convolve(&c).unwrap();
        let right = a.convolve(&b.convolve(&c).unwrap()).unwrap();
        for (x, y) in left.masses.iter().zip(right.masses.iter()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn topsoe_is_a_symmetric_premetric(
        p in proptest::collection::vec(0.0f64..10.0, 8),
        q in proptest::collection::vec(0.0f64..10.0, 8),
    ) {
        prop_assume!(p.iter().sum::<f64>() > 0.0 && q.iter().sum::<f64>() > 0.0);
        let pq = topsoe(&p, &q).unwrap();
        let qp = topsoe(&q, &p).unwrap();
        prop_assert!(pq >= 0.0);
        prop_assert!((pq - qp).abs() < 1e-12);
        prop_assert!(topsoe(&p, &p).unwrap() < 1e-12);
    }

    #[test]
    fn quantile_inverts_the_cdf(d in cdf_strategy(), u in 0.0f64..1.0) {
        let x = d.quantile(u);
        prop_assert!(x >= d.min_value() && x <= d.max_value());
        prop_assert!(d.cdf(x) + 1e-9 >= u);
    }

    #[test]
    fn cdf_is_monotone(d in cdf_strategy(), a in 0.0f64..1.2e6, b in 0.0f64..1.2e6) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(d.cdf(lo) <= d.cdf(hi) + 1e-12);
        prop_assert!(d.cdf_left(lo) <= d.cdf(lo) + 1e-12);
    }

    #[test]
    fn payload_extraction_yields_a_pmf(
        sizes in proptest::collection::btree_set(66u64..2_000_000, 2..40),
        seedmass in proptest::collection::vec(0.01f64..1.0, 40),
    ) {
        let entries: Vec<(u64, f64)> = sizes
            .iter()
            .zip(seedmass.iter())
            .map(|(&s, &m)| (s, m))
            .collect();
        let pmf = FlowSizePmf::new(entries, AckModel::default()).unwrap();
        let (pl, _) = pmf.infer_payload_sizes();
        prop_assert!((pl.total_mass() - 1.0).abs() < 1e-9);
        prop_assert!(pl.entries().iter().all(|&(_, m)| m >= 0.0));
        prop_assert!(pl.entries().windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn ack_flow_size_is_monotone_and_dominated(a in 66u64..10_000_000, b in 66u64..10_000_000) {
        let m = AckModel::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(m.ack_flow_size(lo) <= m.ack_flow_size(hi));
        prop_assert!(m.ack_flow_size(hi) <= hi);
    }
}
