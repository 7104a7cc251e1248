//! Assigning unmapped flows to traffic-matrix entries.
//!
//! Two strategies. The randomized baseline draws a pair per flow from the
//! matrix read as a probability distribution, depleting weights as it
//! assigns. The deficit-round-robin variant walks a fixed ring of pairs,
//! growing each visited pair's credit in proportion to its residual
//! matrix entry, and places the head-of-queue flow on the first pair whose
//! credit covers it — large residuals absorb flows quickly while small
//! entries still accumulate enough credit to receive small flows.

use crate::dist::topsoe;
use crate::flowset::UnmappedFlow;
use crate::tm::TrafficMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeMap;

/// A payload flow with its source/destination assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappedFlow {
    pub start_time: f64,
    pub src: u32,
    pub dst: u32,
    pub size: u64,
}

/// Credit growth controls for the DRR strategy: a visited pair gains
/// `max(alpha * residual, omega)` credit.
#[derive(Debug, Clone, Copy)]
pub struct DrrParams {
    pub alpha: f64,
    pub omega: f64,
}

impl Default for DrrParams {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            omega: 100.0,
        }
    }
}

/// How the DRR ring consumes the flow queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DrrQueueDiscipline {
    /// Each visited pair repeatedly takes the largest queued flow its
    /// credit covers; flows that fit nobody yet stay queued. Heavy flows
    /// can only land on pairs whose residual entry earns matching credit,
    /// and the small-flow supply is left for small entries instead of
    /// being swallowed by credit-rich pairs.
    #[default]
    SkipAndRetry,
    /// The queue head blocks until some pair's credit covers it. Small
    /// matrix entries sit in the ring shadow of large ones under this
    /// discipline — any flow passing a large neighbor already exceeds a
    /// small pair's credit — so small entries can starve; kept as the
    /// recorded variant.
    HeadOfLine,
}

/// Fenwick tree over pair weights for O(log n) weighted draws and updates.
struct WeightTree {
    tree: Vec<f64>,
}

impl WeightTree {
    fn new(weights: &[f64]) -> Self {
        let n = weights.len();
        let mut tree = vec![0.0; n + 1];
        for (i, &w) in weights.iter().enumerate() {
            let mut idx = i + 1;
            while idx <= n {
                tree[idx] += w;
                idx += idx & idx.wrapping_neg();
            }
        }
        Self { tree }
    }

    fn add(&mut self, i: usize, delta: f64) {
        let mut idx = i + 1;
        while idx < self.tree.len() {
            self.tree[idx] += delta;
            idx += idx & idx.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        let mut acc = 0.0;
        let mut idx = self.tree.len() - 1;
        while idx > 0 {
            acc += self.tree[idx];
            idx &= idx - 1;
        }
        acc
    }

    /// Index of the first prefix sum exceeding `target`.
    fn search(&self, mut target: f64) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos.min(n - 1)
    }
}

/// Randomized assignment: each flow draws its pair with probability
/// proportional to the pair's residual entry; the drawn pair's weight is
/// then reduced by the flow size (floored at zero). Once every weight is
/// depleted, remaining flows draw from the original entry distribution.
pub fn map_random<R: Rng + ?Sized>(
    flows: &[UnmappedFlow],
    tm: &TrafficMatrix,
    rng: &mut R,
) -> Vec<MappedFlow> {
    let pairs: Vec<(u32, u32)> = tm.entries().map(|(&k, _)| k).collect();
    assert!(!pairs.is_empty(), "matrix must have non-zero entries");
    let original: Vec<f64> = tm.entries().map(|(_, &v)| v).collect();
    let mut weights = original.clone();
    let mut tree = WeightTree::new(&weights);
    let mut depleted = false;

    let mut out = Vec::with_capacity(flows.len());
    for f in flows {
        let total = if depleted { 0.0 } else { tree.total() };
        let idx = if total > f64::MIN_POSITIVE {
            tree.search(rng.random::<f64>() * total)
        } else {
            if !depleted {
                // Residuals exhausted: fall back to the static original
                // distribution for whatever flows remain.
                depleted = true;
                tree = WeightTree::new(&original);
            }
            tree.search(rng.random::<f64>() * tree.total())
        };
        let (src, dst) = pairs[idx];
        out.push(MappedFlow {
            start_time: f.start_time,
            src,
            dst,
            size: f.size,
        });
        if !depleted {
            let cut = (f.size as f64).min(weights[idx]);
            if cut > 0.0 {
                tree.add(idx, -cut);
                weights[idx] -= cut;
            }
        }
    }
    out
}

/// Deficit-round-robin assignment with the default queue discipline.
pub fn map_drr<R: Rng + ?Sized>(
    flows: &[UnmappedFlow],
    tm: &TrafficMatrix,
    rng: &mut R,
    params: DrrParams,
) -> Vec<MappedFlow> {
    map_drr_with(flows, tm, rng, params, DrrQueueDiscipline::default())
}

/// Deficit-round-robin assignment.
///
/// The queue is a uniform random permutation of the flows. The ring
/// cursor walks the non-zero matrix pairs in a fixed circular order; each
/// visited pair earns `max(alpha * residual, omega)` credit and then
/// consumes queued flows per the discipline. Assignment lowers the pair's
/// credit and its residual matrix entry (floored at zero) by the flow
/// size, so one ring cycle hands every pair roughly `alpha` times its
/// residual in flow bytes and per-pair totals track the matrix. `omega >
/// 0` keeps the ring moving once residuals drain and bounds the whole run
/// by `sum(ceil(size/omega))` ring steps.
pub fn map_drr_with<R: Rng + ?Sized>(
    flows: &[UnmappedFlow],
    tm: &TrafficMatrix,
    rng: &mut R,
    params: DrrParams,
    discipline: DrrQueueDiscipline,
) -> Vec<MappedFlow> {
    assert!(params.alpha > 0.0 && params.omega > 0.0);
    let pairs: Vec<(u32, u32)> = tm.entries().map(|(&k, _)| k).collect();
    assert!(!pairs.is_empty(), "matrix must have non-zero entries");
    let n = pairs.len();
    let mut residual: Vec<f64> = tm.entries().map(|(_, &v)| v).collect();
    let mut credit = vec![0.0f64; n];

    let mut queue: Vec<u32> = (0..flows.len() as u32).collect();
    queue.shuffle(rng);

    let mut out = Vec::with_capacity(flows.len());
    let mut cursor = 0usize;
    match discipline {
        DrrQueueDiscipline::SkipAndRetry => {
            let mut pending: std::collections::BTreeSet<(u64, u32)> = queue
                .iter()
                .enumerate()
                .map(|(pos, &fi)| (flows[fi as usize].size, pos as u32))
                .collect();
            while !pending.is_empty() {
                credit[cursor] += (params.alpha * residual[cursor]).max(params.omega);
                loop {
                    let cap = credit[cursor] as u64;
                    let Some(&(size, pos)) = pending.range(..=(cap, u32::MAX)).next_back() else {
                        break;
                    };
                    pending.remove(&(size, pos));
                    let f = flows[queue[pos as usize] as usize];
                    credit[cursor] -= size as f64;
                    residual[cursor] = (residual[cursor] - size as f64).max(0.0);
                    let (src, dst) = pairs[cursor];
                    out.push(MappedFlow {
                        start_time: f.start_time,
                        src,
                        dst,
                        size: f.size,
                    });
                }
                cursor = if cursor + 1 == n { 0 } else { cursor + 1 };
            }
        }
        DrrQueueDiscipline::HeadOfLine => {
            for &fi in &queue {
                let f = flows[fi as usize];
                let size = f.size as f64;
                loop {
                    if credit[cursor] >= size {
                        credit[cursor] -= size;
                        residual[cursor] = (residual[cursor] - size).max(0.0);
                        let (src, dst) = pairs[cursor];
                        out.push(MappedFlow {
                            start_time: f.start_time,
                            src,
                            dst,
                            size: f.size,
                        });
                        break;
                    }
                    credit[cursor] += (params.alpha * residual[cursor]).max(params.omega);
                    cursor = if cursor + 1 == n { 0 } else { cursor + 1 };
                }
            }
        }
    }
    out
}

/// Realized matrix of an assignment: per-pair sums of mapped flow sizes.
pub fn realized_matrix(tm: &TrafficMatrix, mapped: &[MappedFlow]) -> TrafficMatrix {
    let mut sums: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for f in mapped {
        *sums.entry((f.src, f.dst)).or_insert(0.0) += f.size as f64;
    }
    let mut out = TrafficMatrix::new(tm.layout, tm.epoch_length);
    for ((s, d), v) in sums {
        out.add(s, d, v);
    }
    out
}

/// Topsøe distance between the demanded matrix and the matrix realized by
/// an assignment — the paper-facing quality score of a mapping.
pub fn mapping_quality(
    tm: &TrafficMatrix,
    mapped: &[MappedFlow],
) -> Result<f64, crate::dist::DistError> {
    let realized = realized_matrix(tm, mapped);
    let keys: std::collections::BTreeSet<(u32, u32)> = tm
        .entries()
        .map(|(&k, _)| k)
        .chain(realized.entries().map(|(&k, _)| k))
        .collect();
    let p: Vec<f64> = keys.iter().map(|k| tm.get(k.0, k.1)).collect();
    let q: Vec<f64> = keys.iter().map(|k| realized.get(k.0, k.1)).collect();
    topsoe(&p, &q)
}
