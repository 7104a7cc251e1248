//! Per-epoch payload traffic matrices.
//!
//! A matrix assigns byte volumes to directed node pairs within one epoch.
//! Generation samples every node's intra- and inter-rack partner counts,
//! realizes the demanded degrees as a simple graph through the degseq
//! solvers, and then draws a volume for each edge from the payload
//! volume distributions.

use crate::ack::AckModel;
use crate::degseq::{
    solve_inter_rack, solve_intra_rack, DegreeKind, DegreePrior, DegreeSequence, RackLayout,
};
use crate::dist::{topsoe, DistError, StepDistribution};
use rand::Rng;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Sparse directed byte-volume matrix for one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficMatrix {
    pub layout: RackLayout,
    pub epoch_length: f64,
    entries: BTreeMap<(u32, u32), f64>,
}

impl TrafficMatrix {
    pub fn new(layout: RackLayout, epoch_length: f64) -> Self {
        Self {
            layout,
            epoch_length,
            entries: BTreeMap::new(),
        }
    }

    /// Adds bytes to a directed entry; self-pairs and out-of-range nodes
    /// are rejected by panic since they indicate a construction bug.
    pub fn add(&mut self, src: u32, dst: u32, bytes: f64) {
        assert!(src != dst, "traffic matrix has no diagonal");
        assert!((src as usize) < self.layout.n && (dst as usize) < self.layout.n);
        assert!(bytes >= 0.0);
        if bytes > 0.0 {
            *self.entries.entry((src, dst)).or_insert(0.0) += bytes;
        }
    }

    pub fn get(&self, src: u32, dst: u32) -> f64 {
        self.entries.get(&(src, dst)).copied().unwrap_or(0.0)
    }

    /// Directed non-zero entries in key order.
    pub fn entries(&self) -> impl Iterator<Item = (&(u32, u32), &f64)> {
        self.entries.iter()
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    pub fn is_intra(&self, src: u32, dst: u32) -> bool {
        self.layout.same_rack(src as usize, dst as usize)
    }

    /// Multiplies every entry by `factor` (load levels).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for v in out.entries.values_mut() {
            *v *= factor;
        }
        out
    }

    /// Unordered communicating pairs and how they split across the rack
    /// boundary, with the totals of possible pairs for fractions.
    pub fn pair_stats(&self) -> PairStats {
        let mut seen: BTreeMap<(u32, u32), ()> = BTreeMap::new();
        for &(s, d) in self.entries.keys() {
            let key = if s < d { (s, d) } else { (d, s) };
            seen.entry(key).or_insert(());
        }
        let mut intra_nonzero = 0usize;
        let mut inter_nonzero = 0usize;
        for &(a, b) in seen.keys() {
            if self.is_intra(a, b) {
                intra_nonzero += 1;
            } else {
                inter_nonzero += 1;
            }
        }
        let intra_possible: usize = (0..self.layout.rack_count())
            .map(|r| {
                let s = self.layout.rack_size(r);
                s * (s - 1) / 2
            })
            .sum();
        let n = self.layout.n;
        let inter_possible = n * (n - 1) / 2 - intra_possible;
        PairStats {
            intra_nonzero,
            inter_nonzero,
            intra_possible,
            inter_possible,
        }
    }

    /// Serializes the matrix as `src,dst,bytes` lines.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.entries.len() * 24 + 16);
        out.push_str("src,dst,bytes\n");
        for (&(s, d), &v) in &self.entries {
            let _ = writeln!(out, "{s},{d},{v}");
        }
        out
    }
}

/// Unordered-pair occupancy of a matrix.
#[derive(Debug, Clone, Copy)]
pub struct PairStats {
    pub intra_nonzero: usize,
    pub inter_nonzero: usize,
    pub intra_possible: usize,
    pub inter_possible: usize,
}

impl PairStats {
    pub fn intra_fraction(&self) -> f64 {
        self.intra_nonzero as f64 / self.intra_possible.max(1) as f64
    }

    pub fn inter_fraction(&self) -> f64 {
        self.inter_nonzero as f64 / self.inter_possible.max(1) as f64
    }
}

/// The six input distributions generation consumes, bundled with the ACK
/// model. Volume distributions are the deconvolved payload ones; flow
/// sizes are the extracted payload flow sizes.
#[derive(Debug, Clone)]
pub struct TrafficProfile {
    pub partners_intra: StepDistribution,
    pub partners_inter: StepDistribution,
    pub volume_intra: StepDistribution,
    pub volume_inter: StepDistribution,
    pub flow_sizes: StepDistribution,
    pub iat: StepDistribution,
    pub model: AckModel,
}

/// How an undirected communication edge turns into directed matrix entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirectionRule {
    /// One direction per edge, chosen uniformly at random (default).
    #[default]
    OneUniform,
    /// Both directions populated with independent volume draws.
    Both,
}

/// Draws a supported count from a count-valued CDF, snapping down to the
/// nearest supported value when the inverse lands between points.
fn sample_count<R: Rng + ?Sized>(dist: &StepDistribution, rng: &mut R) -> u32 {
    let v = dist.sample(rng);
    let pts = dist.points();
    let idx = pts.partition_point(|p| p.0 <= v);
    let snapped = if idx == 0 { pts[0].0 } else { pts[idx - 1].0 };
    snapped.max(0.0).round() as u32
}

/// Samples every node's intra- and inter-rack partner demands. Intra
/// degrees are clipped to the rack size minus one, inter degrees to the
/// node count outside the rack.
pub fn sample_degrees<R: Rng + ?Sized>(
    profile: &TrafficProfile,
    layout: &RackLayout,
    rng: &mut R,
) -> (DegreeSequence, DegreeSequence) {
    let n = layout.n;
    let mut intra = Vec::with_capacity(n);
    let mut inter = Vec::with_capacity(n);
    for i in 0..n {
        let rack_size = layout.rack_size(layout.rack_of(i)) as u32;
        let d_int = sample_count(&profile.partners_intra, rng).min(rack_size.saturating_sub(1));
        let d_ext = sample_count(&profile.partners_inter, rng).min((n as u32) - rack_size);
        intra.push(d_int);
        inter.push(d_ext);
    }
    (
        DegreeSequence::new(intra, DegreeKind::Intra),
        DegreeSequence::new(inter, DegreeKind::Inter),
    )
}

/// Generates one epoch's payload traffic matrix: sample degrees, realize
/// the intra graphs rack by rack and the inter graph globally, then draw a
/// byte volume for every edge.
pub fn build_tm<R: Rng + ?Sized>(
    profile: &TrafficProfile,
    layout: &RackLayout,
    epoch_length: f64,
    rng: &mut R,
    rule: DirectionRule,
) -> TrafficMatrix {
    let (d_int, d_ext) = sample_degrees(profile, layout, rng);
    let prior = DegreePrior::from_distribution(&profile.partners_intra);

    let mut edges: Vec<(u32, u32, bool)> = Vec::new(); // (lo, hi, is_intra)
    for rack in 0..layout.rack_count() {
        let nodes = layout.rack_nodes(rack);
        let demands = &d_int.degrees[nodes.clone()];
        let report = solve_intra_rack(demands, &prior);
        let base = nodes.start as u32;
        for (a, b) in report.graph.edges() {
            edges.push((base + a, base + b, true));
        }
    }
    let inter_graph = solve_inter_rack(&d_ext, layout);
    for (a, b) in inter_graph.edges() {
        edges.push((a, b, false));
    }

    let mut tm = TrafficMatrix::new(*layout, epoch_length);
    for (a, b, is_intra) in edges {
        let dist = if is_intra {
            &profile.volume_intra
        } else {
            &profile.volume_inter
        };
        match rule {
            DirectionRule::OneUniform => {
                let vol = dist.sample(rng).max(0.0);
                if rng.random_bool(0.5) {
                    tm.add(a, b, vol);
                } else {
                    tm.add(b, a, vol);
                }
            }
            DirectionRule::Both => {
                let fwd = dist.sample(rng).max(0.0);
                let rev = dist.sample(rng).max(0.0);
                tm.add(a, b, fwd);
                tm.add(b, a, rev);
            }
        }
    }
    tm
}

/// Topsøe distance between two matrices read as probability distributions
/// over directed pairs. Both are normalized to total mass 1; positions
/// where both are zero contribute nothing.
pub fn topsoe_distance(m: &TrafficMatrix, m_prime: &TrafficMatrix) -> Result<f64, DistError> {
    let keys: std::collections::BTreeSet<(u32, u32)> = m
        .entries
        .keys()
        .chain(m_prime.entries.keys())
        .copied()
        .collect();
    let p: Vec<f64> = keys.iter().map(|k| m.get(k.0, k.1)).collect();
    let q: Vec<f64> = keys.iter().map(|k| m_prime.get(k.0, k.1)).collect();
    topsoe(&p, &q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{Interp, SupportKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn count_dist(points: Vec<(f64, f64)>) -> StepDistribution {
        StepDistribution::new(points, SupportKind::Count, Interp::Step).unwrap()
    }

    fn profile(
        partners_intra: StepDistribution,
        partners_inter: StepDistribution,
    ) -> TrafficProfile {
        TrafficProfile {
            partners_intra,
            partners_inter,
            volume_intra: StepDistribution::point_mass(1_000_000.0, SupportKind::Bytes),
            volume_inter: StepDistribution::point_mass(2_000_000.0, SupportKind::Bytes),
            flow_sizes: StepDistribution::point_mass(1_000.0, SupportKind::Bytes),
            iat: StepDistribution::point_mass(0.001, SupportKind::Seconds),
            model: AckModel::default(),
        }
    }

    #[test]
    fn topsoe_matrix_identity_and_swap() {
        let layout = RackLayout::new(4, 2).unwrap();
        let mut m = TrafficMatrix::new(layout, 10.0);
        m.add(0, 1, 1.0);
        m.add(2, 3, 1.0);
        let mut mp = TrafficMatrix::new(layout, 10.0);
        mp.add(1, 0, 1.0);
        mp.add(3, 2, 1.0);
        assert_eq!(topsoe_distance(&m, &m).unwrap(), 0.0);
        let t = topsoe_distance(&m, &mp).unwrap();
        assert!((t - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
        // Symmetry.
        let t2 = topsoe_distance(&mp, &m).unwrap();
        assert!((t - t2).abs() < 1e-15);
    }

    #[test]
    fn topsoe_rejects_empty_matrix() {
        let layout = RackLayout::new(2, 1).unwrap();
        let m = TrafficMatrix::new(layout, 10.0);
        let mut mp = TrafficMatrix::new(layout, 10.0);
        mp.add(0, 1, 5.0);
        assert!(topsoe_distance(&m, &mp).is_err());
    }

    #[test]
    fn topsoe_symmetric_on_random_matrices() {
        let layout = RackLayout::new(5, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mut a = TrafficMatrix::new(layout, 10.0);
            let mut b = TrafficMatrix::new(layout, 10.0);
            for s in 0..5u32 {
                for d in 0..5u32 {
                    if s != d {
                        if rng.random_bool(0.6) {
                            a.add(s, d, rng.random::<f64>() * 10.0);
                        }
                        if rng.random_bool(0.6) {
                            b.add(s, d, rng.random::<f64>() * 10.0);
                        }
                    }
                }
            }
            if a.entry_count() == 0 || b.entry_count() == 0 {
                continue;
            }
            let ab = topsoe_distance(&a, &b).unwrap();
            let ba = topsoe_distance(&b, &a).unwrap();
            assert!((ab - ba).abs() < 1e-12);
            assert!(ab >= 0.0);
        }
    }

    #[test]
    fn degenerate_partner_counts_give_empty_sequences() {
        let layout = RackLayout::new(40, 20).unwrap();
        let p = profile(
            StepDistribution::point_mass(0.0, SupportKind::Count),
            StepDistribution::point_mass(0.0, SupportKind::Count),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (intra, inter) = sample_degrees(&p, &layout, &mut rng);
        assert!(intra.degrees.iter().all(|&d| d == 0));
        assert!(inter.degrees.iter().all(|&d| d == 0));
        let tm = build_tm(&p, &layout, 10.0, &mut rng, DirectionRule::OneUniform);
        assert_eq!(tm.entry_count(), 0);
    }

    #[test]
    fn sampled_intra_degrees_respect_rack_clipping() {
        let layout = RackLayout::new(100, 20).unwrap();
        // Demands far above rack capacity.
        let p = profile(
            count_dist(vec![(25.0, 0.5), (40.0, 1.0)]),
            StepDistribution::point_mass(0.0, SupportKind::Count),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (intra, _) = sample_degrees(&p, &layout, &mut rng);
        assert!(intra.degrees.iter().all(|&d| d <= 19));
    }

    #[test]
    fn sampled_inter_degrees_follow_the_input_distribution() {
        let layout = RackLayout::new(100_000, 20).unwrap();
        let dist = count_dist(vec![(0.0, 0.3), (2.0, 0.6), (5.0, 0.9), (9.0, 1.0)]);
        let p = profile(StepDistribution::point_mass(0.0, SupportKind::Count), dist.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (_, inter) = sample_degrees(&p, &layout, &mut rng);
        let samples: Vec<f64> = inter.degrees.iter().map(|&d| d as f64).collect();
        let emp = crate::dist::empirical_cdf(&samples, SupportKind::Count).unwrap();
        assert!(crate::dist::ks_distance(&emp, &dist) < 0.02);
    }

    #[test]
    fn forced_single_edge_gets_one_directed_entry() {
        // 2 racks x 2 nodes; exactly one node pair demands an inter edge.
        let layout = RackLayout::new(4, 2).unwrap();
        let p = TrafficProfile {
            partners_intra: StepDistribution::point_mass(0.0, SupportKind::Count),
            partners_inter: count_dist(vec![(0.0, 0.5), (1.0, 1.0)]),
            volume_intra: StepDistribution::point_mass(1.0, SupportKind::Bytes),
            volume_inter: StepDistribution::point_mass(1_000_000.0, SupportKind::Bytes),
            flow_sizes: StepDistribution::point_mass(1_000.0, SupportKind::Bytes),
            iat: StepDistribution::point_mass(0.001, SupportKind::Seconds),
            model: AckModel::default(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let tm = build_tm(&p, &layout, 10.0, &mut rng, DirectionRule::OneUniform);
            let stats = tm.pair_stats();
            // Every realized edge is a single directed entry of 1e6.
            assert_eq!(tm.entry_count(), stats.inter_nonzero + stats.intra_nonzero);
            for (_, &v) in tm.entries() {
                assert_eq!(v, 1_000_000.0);
            }
        }
    }

    #[test]
    fn both_directions_rule_populates_pairs_twice() {
        let layout = RackLayout::new(4, 2).unwrap();
        let p = profile(
            StepDistribution::point_mass(1.0, SupportKind::Count),
            StepDistribution::point_mass(0.0, SupportKind::Count),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let tm = build_tm(&p, &layout, 10.0, &mut rng, DirectionRule::Both);
        let stats = tm.pair_stats();
        assert_eq!(tm.entry_count(), 2 * (stats.intra_nonzero + stats.inter_nonzero));
    }

    #[test]
    fn build_is_deterministic_under_a_fixed_seed() {
        let layout = RackLayout::new(60, 20).unwrap();
        let p = profile(
            count_dist(vec![(0.0, 0.4), (1.0, 0.7), (3.0, 1.0)]),
            count_dist(vec![(0.0, 0.5), (2.0, 0.8), (6.0, 1.0)]),
        );
        let mk = || {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            build_tm(&p, &layout, 10.0, &mut rng, DirectionRule::OneUniform)
        };
        assert_eq!(mk(), mk());
    }

    #[test]
    fn entries_split_intra_xor_inter() {
        let layout = RackLayout::new(60, 20).unwrap();
        let p = profile(
            count_dist(vec![(0.0, 0.4), (2.0, 1.0)]),
            count_dist(vec![(0.0, 0.4), (4.0, 1.0)]),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tm = build_tm(&p, &layout, 10.0, &mut rng, DirectionRule::OneUniform);
        let mut intra = 0;
        let mut inter = 0;
        for (&(s, d), &v) in tm.entries() {
            assert!(v > 0.0);
            if tm.is_intra(s, d) {
                intra += 1;
                assert_eq!(v, 1_000_000.0); // intra volume point mass
            } else {
                inter += 1;
                assert_eq!(v, 2_000_000.0);
            }
        }
        assert!(intra > 0 && inter > 0);
    }

    #[test]
    fn pooled_volumes_reproduce_the_volume_distributions() {
        let layout = RackLayout::new(80, 20).unwrap();
        let vol = StepDistribution::new(
            vec![(1_000.0, 0.0), (10_000.0, 0.5), (100_000.0, 1.0)],
            SupportKind::Bytes,
            Interp::Linear,
        )
        .unwrap();
        let p = TrafficProfile {
            partners_intra: count_dist(vec![(0.0, 0.3), (2.0, 0.8), (4.0, 1.0)]),
            partners_inter: count_dist(vec![(0.0, 0.3), (3.0, 0.9), (6.0, 1.0)]),
            volume_intra: vol.clone(),
            volume_inter: vol.clone(),
            flow_sizes: StepDistribution::point_mass(1_000.0, SupportKind::Bytes),
            iat: StepDistribution::point_mass(0.001, SupportKind::Seconds),
            model: AckModel::default(),
        };
        let mut pooled = Vec::new();
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tm = build_tm(&p, &layout, 10.0, &mut rng, DirectionRule::OneUniform);
            pooled.extend(tm.entries().map(|(_, &v)| v));
        }
        assert!(pooled.len() >= 10_000);
        let emp = crate::dist::empirical_cdf(&pooled, SupportKind::Bytes).unwrap();
        assert!(crate::dist::ks_distance(&emp, &vol) < 0.05);
    }
}
