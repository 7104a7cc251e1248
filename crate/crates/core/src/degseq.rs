//! Degree-sequence machinery for communication-graph realization.
//!
//! Nodes live in racks of size `m`; intra-rack and inter-rack partner
//! counts are demanded separately. This module answers, for either side:
//! is a demanded degree sequence realizable as a simple graph, and which
//! graph do we actually build when it is not?
//!
//! * [`erdos_gallai_check`] / [`havel_hakimi`] — the classic realizability
//!   test and constructive realization.
//! * [`solve_inter_rack`] — maximizes edge count subject to per-node degree
//!   caps with same-rack edges forbidden (greedy k-partite construction
//!   plus 2-swap augmentation; the exact branch-and-bound oracle
//!   [`exact_inter_rack`] covers small instances).
//! * [`solve_intra_rack`] — one rack at a time, minimizes the sum of
//!   per-node degree deviations weighted by the inverse prior probability
//!   of the demanded degree (exhaustive for small racks, greedy plus local
//!   search otherwise).
//! * [`brute_force_realize`] — ground-truth enumeration for tests.

use crate::dist::StepDistribution;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DegSeqError {
    #[error("layout needs positive node and rack sizes")]
    BadLayout,
    #[error("brute force is capped at {max} nodes (got {got})")]
    TooLarge { max: usize, got: usize },
    #[error("degree sequence length {got} does not match node count {want}")]
    LengthMismatch { got: usize, want: usize },
}

/// Placement of `n` nodes into contiguous racks of size `m`:
/// node `i` belongs to rack `i / m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RackLayout {
    pub n: usize,
    pub m: usize,
}

impl RackLayout {
    pub fn new(n: usize, m: usize) -> Result<Self, DegSeqError> {
        if n == 0 || m == 0 {
            return Err(DegSeqError::BadLayout);
        }
        Ok(Self { n, m })
    }

    /// Number of racks.
    pub fn rack_count(&self) -> usize {
        self.n.div_ceil(self.m)
    }

    pub fn rack_of(&self, node: usize) -> usize {
        node / self.m
    }

    /// Size of a specific rack (the last one may be partial).
    pub fn rack_size(&self, rack: usize) -> usize {
        let start = rack * self.m;
        self.m.min(self.n.saturating_sub(start))
    }

    pub fn same_rack(&self, a: usize, b: usize) -> bool {
        self.rack_of(a) == self.rack_of(b)
    }

    /// Node id range of one rack.
    pub fn rack_nodes(&self, rack: usize) -> std::ops::Range<usize> {
        let start = rack * self.m;
        start..(start + self.rack_size(rack))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeKind {
    Intra,
    Inter,
}

/// Demanded per-node degrees, tagged with which side of the rack boundary
/// they count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    pub degrees: Vec<u32>,
    pub kind: DegreeKind,
}

impl DegreeSequence {
    pub fn new(degrees: Vec<u32>, kind: DegreeKind) -> Self {
        Self { degrees, kind }
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }
}

/// A simple undirected graph stored as normalized `(lo, hi)` edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyGraph {
    n: usize,
    edges: BTreeSet<(u32, u32)>,
    degrees: Vec<u32>,
}

impl AdjacencyGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: BTreeSet::new(),
            degrees: vec![0; n],
        }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn degree(&self, v: usize) -> u32 {
        self.degrees[v]
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.edges.iter().copied()
    }

    fn key(a: usize, b: usize) -> (u32, u32) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        (lo as u32, hi as u32)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.edges.contains(&Self::key(a, b))
    }

    /// Adds an edge; returns false on self-loops and duplicates.
    pub fn add_edge(&mut self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        if self.edges.insert(Self::key(a, b)) {
            self.degrees[a] += 1;
            self.degrees[b] += 1;
            true
        } else {
            false
        }
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) -> bool {
        if self.edges.remove(&Self::key(a, b)) {
            self.degrees[a] -= 1;
            self.degrees[b] -= 1;
            true
        } else {
            false
        }
    }
}

/// Result of a constructive realization attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Realization {
    Graph(AdjacencyGraph),
    Unrealizable,
}

impl Realization {
    pub fn is_realizable(&self) -> bool {
        matches!(self, Realization::Graph(_))
    }

    pub fn graph(self) -> Option<AdjacencyGraph> {
        match self {
            Realization::Graph(g) => Some(g),
            Realization::Unrealizable => None,
        }
    }
}

/// Erdős–Gallai test: a degree sequence is realizable as a simple graph iff
/// the degree sum is even and for every k the k largest degrees fit within
/// `k(k-1)` internal slots plus what the remaining nodes can absorb.
pub fn erdos_gallai_check(degrees: &[u32]) -> bool {
    if degrees.is_empty() {
        return true;
    }
    let mut d: Vec<u64> = degrees.iter().map(|&x| x as u64).collect();
    d.sort_unstable_by(|a, b| b.cmp(a));
    let total: u64 = d.iter().sum();
    if total % 2 != 0 {
        return false;
    }
    let n = d.len();
    let mut prefix = 0u64;
    for k in 1..=n {
        prefix += d[k - 1];
        let k64 = k as u64;
        let absorb: u64 = d[k..].iter().map(|&x| x.min(k64)).sum();
        if prefix > k64 * (k64 - 1) + absorb {
            return false;
        }
    }
    true
}

/// Constructive realization: repeatedly connect the node of largest
/// residual degree to the next-largest residual nodes. Produces a graph
/// with `deg(v_i) = d_i` exactly, or reports the sequence unrealizable.
pub fn havel_hakimi(degrees: &[u32]) -> Realization {
    let n = degrees.len();
    let mut graph = AdjacencyGraph::new(n);
    let mut residual: Vec<(u32, usize)> = degrees
        .iter()
        .enumerate()
        .map(|(i, &d)| (d, i))
        .collect();
    loop {
        // Largest residual first, node index breaking ties.
        residual.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let (need, u) = residual[0];
        if need == 0 {
            return Realization::Graph(graph);
        }
        let need = need as usize;
        if need > residual.len() - 1 || residual[need].0 == 0 {
            return Realization::Unrealizable;
        }
        for item in residual.iter_mut().take(need + 1).skip(1) {
            graph.add_edge(u, item.1);
            item.0 -= 1;
        }
        residual[0].0 = 0;
    }
}

/// Exhaustive search over all `2^(n choose 2)` simple graphs; the ground
/// truth the fast paths are tested against.
pub fn brute_force_realize(degrees: &[u32], max_n: usize) -> Result<Realization, DegSeqError> {
    let n = degrees.len();
    if n > max_n {
        return Err(DegSeqError::TooLarge { max: max_n, got: n });
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let p = pairs.len();
    for mask in 0u64..(1u64 << p) {
        let mut deg = vec![0u32; n];
        for (b, &(i, j)) in pairs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                deg[i] += 1;
                deg[j] += 1;
            }
        }
        if deg == degrees {
            let mut g = AdjacencyGraph::new(n);
            for (b, &(i, j)) in pairs.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    g.add_edge(i, j);
                }
            }
            return Ok(Realization::Graph(g));
        }
    }
    Ok(Realization::Unrealizable)
}

/// Greedy k-partite realization of the inter-rack degree demands, followed
/// by 2-swap augmentation until no edge can be added.
///
/// The returned graph contains only cross-rack edges and never exceeds any
/// node's demanded degree; realizable sequences are met exactly, otherwise
/// the edge count is maximal or near-maximal and the shortfall
/// `sum(d_i - deg(i))` is reported alongside.
pub fn solve_inter_rack(d: &DegreeSequence, layout: &RackLayout) -> AdjacencyGraph {
    assert_eq!(d.len(), layout.n, "degree sequence must cover all nodes");
    let n = layout.n;
    // Cap demands at what the layout can possibly serve.
    let cap: Vec<u32> = (0..n)
        .map(|i| {
            let outside = n - layout.rack_size(layout.rack_of(i));
            d.degrees[i].min(outside as u32)
        })
        .collect();
    let mut graph = AdjacencyGraph::new(n);
    let mut residual = cap.clone();

    // Bucket nodes by residual degree for cheap max extraction.
    let max_r = residual.iter().copied().max().unwrap_or(0) as usize;
    let mut buckets: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); max_r + 1];
    for (i, &r) in residual.iter().enumerate() {
        buckets[r as usize].insert(i as u32);
    }
    let mut top = max_r;
    loop {
        while top > 0 && buckets[top].is_empty() {
            top -= 1;
        }
        if top == 0 {
            break;
        }
        let u = *buckets[top].iter().next().unwrap() as usize;
        let need = residual[u] as usize;
        // Collect the highest-residual partners outside u's rack.
        let mut partners: Vec<usize> = Vec::with_capacity(need);
        'collect: for r in (1..=top).rev() {
            for &v in buckets[r].iter() {
                let v = v as usize;
                if v == u || layout.same_rack(u, v) || graph.has_edge(u, v) {
                    continue;
                }
                partners.push(v);
                if partners.len() == need {
                    break 'collect;
                }
            }
        }
        buckets[residual[u] as usize].remove(&(u as u32));
        residual[u] = 0;
        buckets[0].insert(u as u32);
        for v in partners {
            graph.add_edge(u, v);
            let r = residual[v] as usize;
            buckets[r].remove(&(v as u32));
            residual[v] -= 1;
            buckets[r - 1].insert(v as u32);
        }
    }

    augment_inter(&mut graph, &cap, layout);
    graph
}

/// Adds edges between deficit nodes directly, then rewires existing edges
/// to free up attachment points, until neither applies.
fn augment_inter(graph: &mut AdjacencyGraph, cap: &[u32], layout: &RackLayout) {
    let n = layout.n;
    loop {
        let mut progress = false;
        let mut deficit: Vec<usize> = (0..n)
            .filter(|&i| graph.degree(i) < cap[i])
            .collect();

        // Direct additions between deficit nodes.
        'outer: loop {
            for a in 0..deficit.len() {
                for b in a + 1..deficit.len() {
                    let (u, v) = (deficit[a], deficit[b]);
                    if !layout.same_rack(u, v) && !graph.has_edge(u, v) {
                        graph.add_edge(u, v);
                        progress = true;
                        deficit.retain(|&x| graph.degree(x) < cap[x]);
                        continue 'outer;
                    }
                }
            }
            break;
        }

        // Rewire: drop (a, b) and attach a->u, b->v for deficit u, v.
        let deficit: Vec<usize> = (0..n)
            .filter(|&i| graph.degree(i) < cap[i])
            .collect();
        'swap: for ia in 0..deficit.len() {
            for ib in ia..deficit.len() {
                let (u, v) = (deficit[ia], deficit[ib]);
                if u == v && cap[u] - graph.degree(u) < 2 {
                    continue;
                }
                let edges: Vec<(u32, u32)> = graph.edges().collect();
                for (a, b) in edges {
                    let (a, b) = (a as usize, b as usize);
                    if a == u || a == v || b == u || b == v {
                        continue;
                    }
                    for (x, y) in [(a, b), (b, a)] {
                        let ok_u = !layout.same_rack(u, x) && !graph.has_edge(u, x);
                        let ok_v = !layout.same_rack(v, y) && !graph.has_edge(v, y);
                        if ok_u && ok_v {
                            graph.remove_edge(a, b);
                            graph.add_edge(u, x);
                            graph.add_edge(v, y);
                            progress = true;
                            break 'swap;
                        }
                    }
                }
            }
        }

        if !progress {
            return;
        }
    }
}

/// Total unmet inter-rack degree demand of a solution — the per-run
/// diagnostic for how far the sampled sequence was from realizable.
pub fn degree_shortfall(graph: &AdjacencyGraph, demands: &[u32]) -> u64 {
    demands
        .iter()
        .enumerate()
        .map(|(i, &d)| d.saturating_sub(graph.degree(i)) as u64)
        .sum()
}

/// Exact maximum-edge solution of the inter-rack problem by branch and
/// bound; test oracle for small node counts (~12).
pub fn exact_inter_rack(d: &DegreeSequence, layout: &RackLayout) -> AdjacencyGraph {
    assert_eq!(d.len(), layout.n);
    let n = layout.n;
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !layout.same_rack(i, j))
        .collect();
    let mut residual: Vec<u32> = d.degrees.clone();
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    let mut best: Vec<(usize, usize)> = Vec::new();

    fn dfs(
        idx: usize,
        pairs: &[(usize, usize)],
        residual: &mut Vec<u32>,
        chosen: &mut Vec<(usize, usize)>,
        best: &mut Vec<(usize, usize)>,
    ) {
        let bound = chosen.len()
            + (residual.iter().map(|&r| r as usize).sum::<usize>() / 2).min(pairs.len() - idx);
        if bound <= best.len() {
            return;
        }
        if idx == pairs.len() {
            if chosen.len() > best.len() {
                *best = chosen.clone();
            }
            return;
        }
        let (i, j) = pairs[idx];
        if residual[i] > 0 && residual[j] > 0 {
            residual[i] -= 1;
            residual[j] -= 1;
            chosen.push((i, j));
            dfs(idx + 1, pairs, residual, chosen, best);
            chosen.pop();
            residual[i] += 1;
            residual[j] += 1;
        }
        dfs(idx + 1, pairs, residual, chosen, best);
        if chosen.len() > best.len() {
            *best = chosen.clone();
        }
    }
    dfs(0, &pairs, &mut residual, &mut chosen, &mut best);

    let mut g = AdjacencyGraph::new(n);
    for (i, j) in best {
        g.add_edge(i, j);
    }
    g
}

/// Prior probability of each demanded degree, taken from the observed
/// partner-count distribution. Degrees with zero prior mass fall back to
/// the smallest positive mass so the penalty weight stays finite.
#[derive(Debug, Clone)]
pub struct DegreePrior {
    masses: Vec<(u32, f64)>,
    floor: f64,
}

impl DegreePrior {
    pub fn from_distribution(dist: &StepDistribution) -> Self {
        let mut masses: Vec<(u32, f64)> = Vec::with_capacity(dist.points().len());
        let mut prev = 0.0;
        for &(v, c) in dist.points() {
            let mass = c - prev;
            prev = c;
            if mass > 0.0 {
                masses.push((v.round() as u32, mass));
            }
        }
        let floor = masses
            .iter()
            .map(|&(_, m)| m)
            .fold(f64::INFINITY, f64::min)
            .min(1.0);
        Self { masses, floor }
    }

    pub fn uniform() -> Self {
        Self {
            masses: Vec::new(),
            floor: 1.0,
        }
    }

    /// `Pr(d)` with the zero-mass floor applied.
    pub fn prob(&self, degree: u32) -> f64 {
        self.masses
            .iter()
            .find(|&&(d, _)| d == degree)
            .map(|&(_, m)| m)
            .filter(|&m| m > 0.0)
            .unwrap_or(self.floor)
    }

    /// Penalty weight `1 / Pr(d)`.
    pub fn weight(&self, degree: u32) -> f64 {
        1.0 / self.prob(degree)
    }
}

/// One rack's intra solution: the realized graph, per-node degree
/// deviations, and the weighted objective `sum(p_i / Pr(d_i))`.
#[derive(Debug, Clone)]
pub struct IntraSolveReport {
    pub graph: AdjacencyGraph,
    pub penalties: Vec<u32>,
    pub objective: f64,
}

/// Racks small enough for the exhaustive intra-rack search.
pub const INTRA_EXHAUSTIVE_LIMIT: usize = 8;

/// Builds an intra-rack graph for one rack minimizing the weighted degree
/// penalty: exactly (Gray-code sweep over all graphs) for racks of up to
/// [`INTRA_EXHAUSTIVE_LIMIT`] nodes, by greedy construction plus local
/// search above that.
pub fn solve_intra_rack(demands: &[u32], prior: &DegreePrior) -> IntraSolveReport {
    solve_intra_rack_opts(demands, prior, INTRA_EXHAUSTIVE_LIMIT)
}

/// [`solve_intra_rack`] with an explicit exhaustive-search cutoff; lets
/// tests force the heuristic path on small racks.
pub fn solve_intra_rack_opts(
    demands: &[u32],
    prior: &DegreePrior,
    exhaustive_limit: usize,
) -> IntraSolveReport {
    let m = demands.len();
    let weights: Vec<f64> = demands.iter().map(|&d| prior.weight(d)).collect();
    let graph = if m <= exhaustive_limit {
        exhaustive_intra(demands, &weights)
    } else {
        heuristic_intra(demands, &weights)
    };
    report_for(graph, demands, &weights)
}

fn report_for(graph: AdjacencyGraph, demands: &[u32], weights: &[f64]) -> IntraSolveReport {
    let penalties: Vec<u32> = demands
        .iter()
        .enumerate()
        .map(|(i, &d)| graph.degree(i).abs_diff(d))
        .collect();
    let objective = penalties
        .iter()
        .zip(weights)
        .map(|(&p, &w)| p as f64 * w)
        .sum();
    IntraSolveReport {
        graph,
        penalties,
        objective,
    }
}

fn objective_of(deg: &[u32], demands: &[u32], weights: &[f64]) -> f64 {
    deg.iter()
        .zip(demands)
        .zip(weights)
        .map(|((&g, &d), &w)| g.abs_diff(d) as f64 * w)
        .sum()
}

/// Gray-code sweep over every graph on `m` nodes with incremental
/// objective updates; first best in sweep order wins, so the result is
/// deterministic.
fn exhaustive_intra(demands: &[u32], weights: &[f64]) -> AdjacencyGraph {
    let m = demands.len();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .collect();
    let p = pairs.len();
    let mut deg = vec![0u32; m];
    let mut obj = objective_of(&deg, demands, weights);
    let mut best_obj = obj;
    let mut best_mask = 0u64;
    let mut mask = 0u64;
    let term = |node: usize, g: u32| g.abs_diff(demands[node]) as f64 * weights[node];
    for step in 1u64..(1u64 << p) {
        let bit = step.trailing_zeros() as usize;
        let (i, j) = pairs[bit];
        let delta_old = term(i, deg[i]) + term(j, deg[j]);
        if mask >> bit & 1 == 1 {
            deg[i] -= 1;
            deg[j] -= 1;
        } else {
            deg[i] += 1;
            deg[j] += 1;
        }
        mask ^= 1 << bit;
        obj += term(i, deg[i]) + term(j, deg[j]) - delta_old;
        if obj < best_obj - 1e-12 {
            best_obj = obj;
            best_mask = mask;
        }
    }
    let mut g = AdjacencyGraph::new(m);
    for (b, &(i, j)) in pairs.iter().enumerate() {
        if best_mask >> b & 1 == 1 {
            g.add_edge(i, j);
        }
    }
    g
}

/// Greedy construction toward the demanded degrees, then first-improvement
/// local search over single-edge toggles and edge rewires.
fn heuristic_intra(demands: &[u32], weights: &[f64]) -> AdjacencyGraph {
    let m = demands.len();
    let cap: Vec<u32> = demands.iter().map(|&d| d.min(m as u32 - 1)).collect();
    let mut graph = AdjacencyGraph::new(m);
    let mut residual = cap.clone();
    loop {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_unstable_by(|&a, &b| residual[b].cmp(&residual[a]).then(a.cmp(&b)));
        let u = order[0];
        if residual[u] == 0 {
            break;
        }
        let mut connected = false;
        for &v in order[1..].iter() {
            if residual[u] == 0 {
                break;
            }
            if residual[v] == 0 || graph.has_edge(u, v) {
                continue;
            }
            graph.add_edge(u, v);
            residual[v] -= 1;
            residual[u] -= 1;
            connected = true;
        }
        if residual[u] > 0 && !connected {
            residual[u] = 0; // stuck: every partner is saturated or adjacent
        } else if residual[u] > 0 {
            residual[u] = 0;
        }
    }

    // Local search: toggles, then rewires, until a clean pass.
    let term = |node: usize, g: u32| g.abs_diff(demands[node]) as f64 * weights[node];
    loop {
        let mut improved = false;
        for i in 0..m {
            for j in i + 1..m {
                let (di, dj) = (graph.degree(i), graph.degree(j));
                let (ni, nj) = if graph.has_edge(i, j) {
                    (di - 1, dj - 1)
                } else {
                    (di + 1, dj + 1)
                };
                let delta = term(i, ni) + term(j, nj) - term(i, di) - term(j, dj);
                if delta < -1e-12 {
                    if graph.has_edge(i, j) {
                        graph.remove_edge(i, j);
                    } else {
                        graph.add_edge(i, j);
                    }
                    improved = true;
                }
            }
        }
        let edges: Vec<(u32, u32)> = graph.edges().collect();
        for (a, b) in edges {
            let (a, b) = (a as usize, b as usize);
            if !graph.has_edge(a, b) {
                continue; // removed by an earlier rewire this pass
            }
            for keep in [a, b] {
                let drop = a + b - keep;
                for c in 0..m {
                    if c == keep || c == drop || graph.has_edge(keep, c) {
                        continue;
                    }
                    let delta = term(drop, graph.degree(drop) - 1)
                        + term(c, graph.degree(c) + 1)
                        - term(drop, graph.degree(drop))
                        - term(c, graph.degree(c));
                    if delta < -1e-12 {
                        graph.remove_edge(a, b);
                        graph.add_edge(keep, c);
                        improved = true;
                        break;
                    }
                }
                if !graph.has_edge(a, b) {
                    break;
                }
            }
        }
        if !improved {
            return graph;
        }
    }
}

/// Plain-enumeration intra-rack optimum: recomputes the objective from
/// scratch for every graph. Independent oracle for [`solve_intra_rack`].
pub fn enumerate_intra_optimum(demands: &[u32], prior: &DegreePrior) -> IntraSolveReport {
    let m = demands.len();
    assert!(m <= 8, "enumeration oracle is for small racks");
    let weights: Vec<f64> = demands.iter().map(|&d| prior.weight(d)).collect();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
        .collect();
    let mut best_mask = 0u64;
    let mut best_obj = f64::INFINITY;
    for mask in 0u64..(1u64 << pairs.len()) {
        let mut deg = vec![0u32; m];
        for (b, &(i, j)) in pairs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                deg[i] += 1;
                deg[j] += 1;
            }
        }
        let obj = objective_of(&deg, demands, &weights);
        if obj < best_obj - 1e-12 {
            best_obj = obj;
            best_mask = mask;
        }
    }
    let mut g = AdjacencyGraph::new(m);
    for (b, &(i, j)) in pairs.iter().enumerate() {
        if best_mask >> b & 1 == 1 {
            g.add_edge(i, j);
        }
    }
    report_for(g, demands, &weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn erdos_gallai_basics() {
        assert!(erdos_gallai_check(&[2, 2, 2])); // triangle
        assert!(erdos_gallai_check(&[3, 3, 3, 3])); // K4
        assert!(!erdos_gallai_check(&[3, 3, 1, 1]));
        assert!(!erdos_gallai_check(&[1])); // odd sum
        assert!(erdos_gallai_check(&[0, 0, 0, 0]));
    }

    #[test]
    fn havel_hakimi_constructs_exact_degrees() {
        let g = havel_hakimi(&[2, 2, 2]).graph().unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.degrees(), &[2, 2, 2]);

        let g = havel_hakimi(&[0, 0, 0, 0]).graph().unwrap();
        assert_eq!(g.edge_count(), 0);

        assert!(!havel_hakimi(&[3, 3, 1, 1]).is_realizable());

        let g = havel_hakimi(&[3, 2, 2, 2, 1]).graph().unwrap();
        assert_eq!(g.degrees(), &[3, 2, 2, 2, 1]);
    }

    #[test]
    fn brute_force_small_cases() {
        let g = brute_force_realize(&[1, 1], 7).unwrap().graph().unwrap();
        assert_eq!(g.edge_count(), 1);
        assert!(!brute_force_realize(&[3, 3, 1, 1], 7).unwrap().is_realizable());
        assert!(brute_force_realize(&[0; 8], 7).is_err());
    }

    /// All degree multisets on up to `n` nodes.
    fn all_monotone_sequences(n: usize) -> Vec<Vec<u32>> {
        fn rec(n: usize, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if cur.len() == n {
                out.push(cur.clone());
                return;
            }
            for d in (0..=max).rev() {
                cur.push(d);
                rec(n, d, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, n as u32 - 1, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn oracle_equivalence_up_to_n6() {
        for n in 1..=6 {
            for seq in all_monotone_sequences(n) {
                let truth = brute_force_realize(&seq, 7).unwrap().is_realizable();
                assert_eq!(erdos_gallai_check(&seq), truth, "EG disagrees on {seq:?}");
                assert_eq!(
                    havel_hakimi(&seq).is_realizable(),
                    truth,
                    "HH disagrees on {seq:?}"
                );
            }
        }
    }

    #[test]
    fn hh_matches_eg_on_random_sequences() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10_000 {
            let n = rng.random_range(2..=50);
            let d: Vec<u32> = (0..n).map(|_| rng.random_range(0..n as u32)).collect();
            assert_eq!(havel_hakimi(&d).is_realizable(), erdos_gallai_check(&d));
        }
    }

    #[test]
    fn inter_rack_two_singleton_racks() {
        let layout = RackLayout::new(2, 1).unwrap();
        let d = DegreeSequence::new(vec![1, 1], DegreeKind::Inter);
        let g = solve_inter_rack(&d, &layout);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degrees(), &[1, 1]);
    }

    #[test]
    fn inter_rack_single_rack_yields_empty_graph() {
        let layout = RackLayout::new(4, 4).unwrap();
        let d = DegreeSequence::new(vec![3, 3, 2, 1], DegreeKind::Inter);
        let g = solve_inter_rack(&d, &layout);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn inter_rack_respects_caps_and_partitions() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let layout = RackLayout::new(30, 6).unwrap();
        for _ in 0..50 {
            let demands: Vec<u32> = (0..30).map(|_| rng.random_range(0..10)).collect();
            let d = DegreeSequence::new(demands.clone(), DegreeKind::Inter);
            let g = solve_inter_rack(&d, &layout);
            for (a, b) in g.edges() {
                assert!(!layout.same_rack(a as usize, b as usize));
            }
            for i in 0..30 {
                assert!(g.degree(i) <= demands[i]);
            }
        }
    }

    #[test]
    fn inter_rack_greedy_tracks_exact_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        let layout = RackLayout::new(9, 3).unwrap();
        let mut exact_hits = 0;
        for _ in 0..100 {
            let demands: Vec<u32> = (0..9).map(|_| rng.random_range(0..=4)).collect();
            let d = DegreeSequence::new(demands, DegreeKind::Inter);
            let greedy = solve_inter_rack(&d, &layout).edge_count();
            let exact = exact_inter_rack(&d, &layout).edge_count();
            assert!(greedy <= exact);
            assert!(greedy + 1 >= exact, "greedy {greedy} vs exact {exact}");
            if greedy == exact {
                exact_hits += 1;
            }
        }
        assert!(exact_hits >= 95, "only {exact_hits}/100 instances optimal");
    }

    #[test]
    fn inter_rack_meets_realizable_sequences_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let layout = RackLayout::new(9, 3).unwrap();
        let mut tested = 0;
        while tested < 30 {
            let demands: Vec<u32> = (0..9).map(|_| rng.random_range(0..=3)).collect();
            let d = DegreeSequence::new(demands.clone(), DegreeKind::Inter);
            let exact = exact_inter_rack(&d, &layout);
            let realizable =
                (0..9).all(|i| exact.degree(i) == demands[i]);
            if !realizable {
                continue;
            }
            tested += 1;
            let g = solve_inter_rack(&d, &layout);
            assert_eq!(g.degrees(), demands.as_slice(), "shortfall on {demands:?}");
        }
    }

    #[test]
    fn intra_rack_realizable_demand_gets_zero_objective() {
        let rep = solve_intra_rack(&[2, 2, 2], &DegreePrior::uniform());
        assert_eq!(rep.objective, 0.0);
        assert_eq!(rep.graph.degrees(), &[2, 2, 2]);
        assert_eq!(rep.penalties, &[0, 0, 0]);
    }

    #[test]
    fn intra_rack_odd_sum_pays_the_cheapest_penalty() {
        // Pr(1) = 0.5, Pr(2) = 0.25: deviating on the degree-1 node is
        // cheapest, so the triangle (penalty on node 2) wins with 1/0.5.
        let prior = DegreePrior::from_distribution(
            &StepDistribution::new(
                vec![(1.0, 0.5), (2.0, 0.75), (3.0, 1.0)],
                crate::dist::SupportKind::Count,
                crate::dist::Interp::Step,
            )
            .unwrap(),
        );
        let rep = solve_intra_rack(&[2, 2, 1], &prior);
        assert_eq!(rep.penalties.iter().sum::<u32>(), 1);
        assert!((rep.objective - 2.0).abs() < 1e-12);
        let oracle = enumerate_intra_optimum(&[2, 2, 1], &prior);
        assert!((rep.objective - oracle.objective).abs() < 1e-12);
    }

    #[test]
    fn intra_rack_exhaustive_matches_enumeration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let prior = DegreePrior::from_distribution(
            &StepDistribution::new(
                vec![(0.0, 0.4), (1.0, 0.7), (2.0, 0.85), (3.0, 0.95), (5.0, 1.0)],
                crate::dist::SupportKind::Count,
                crate::dist::Interp::Step,
            )
            .unwrap(),
        );
        for _ in 0..100 {
            let m = rng.random_range(2..=6);
            let demands: Vec<u32> = (0..m).map(|_| rng.random_range(0..m as u32)).collect();
            let got = solve_intra_rack(&demands, &prior);
            let want = enumerate_intra_optimum(&demands, &prior);
            assert!(
                (got.objective - want.objective).abs() < 1e-9,
                "objective {} vs oracle {} on {demands:?}",
                got.objective,
                want.objective
            );
        }
    }

    #[test]
    fn intra_rack_heuristic_stays_close_to_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let prior = DegreePrior::uniform();
        let mut exact = 0;
        for _ in 0..60 {
            let demands: Vec<u32> = (0..6).map(|_| rng.random_range(0..6)).collect();
            let heur = solve_intra_rack_opts(&demands, &prior, 0);
            let oracle = enumerate_intra_optimum(&demands, &prior);
            assert!(heur.objective >= oracle.objective - 1e-9);
            if (heur.objective - oracle.objective).abs() < 1e-9 {
                exact += 1;
            }
        }
        assert!(exact >= 48, "heuristic matched optimum on only {exact}/60");
    }

    #[test]
    fn intra_penalties_are_degree_deviations() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let m = rng.random_range(3..=12);
            let demands: Vec<u32> = (0..m).map(|_| rng.random_range(0..m as u32)).collect();
            let rep = solve_intra_rack(&demands, &DegreePrior::uniform());
            for i in 0..m {
                assert_eq!(rep.penalties[i], rep.graph.degree(i).abs_diff(demands[i]));
            }
        }
    }

    #[test]
    fn zero_prior_uses_smallest_positive_mass() {
        let prior = DegreePrior::from_distribution(
            &StepDistribution::new(
                vec![(0.0, 0.9), (4.0, 1.0)],
                crate::dist::SupportKind::Count,
                crate::dist::Interp::Step,
            )
            .unwrap(),
        );
        assert!((prior.prob(4) - 0.1).abs() < 1e-12);
        assert!((prior.prob(2) - 0.1).abs() < 1e-12); // unseen degree -> floor
    }
}
