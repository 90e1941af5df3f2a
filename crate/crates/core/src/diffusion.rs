//! Independent Cascade semantics: live-edge graphs, reachability, and
//! Monte Carlo / exhaustive spread evaluation.

use fixedbitset::FixedBitSet;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{Augmented, CommunityStructure, EdgeAddition, Graph, NodeId, Pair, Topology};
use crate::par::{self, Exec};
use crate::rng::{self, Rng};

/// Default cap on the number of probabilistic arcs for exhaustive enumeration.
pub const ENUMERATION_CAP: usize = 20;

/// Epoch-tagged visited set with a reusable queue.
#[derive(Debug, Clone)]
pub struct Traversal {
    mark: Vec<u32>,
    epoch: u32,
    queue: Vec<NodeId>,
}

impl Traversal {
    pub fn new(n: usize) -> Self {
        Traversal {
            mark: vec![0; n],
            epoch: 0,
            queue: Vec::with_capacity(n),
        }
    }

    fn start(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
        self.queue.clear();
    }

    #[inline]
    fn visit(&mut self, v: NodeId) -> bool {
        let m = &mut self.mark[v as usize];
        if *m == self.epoch {
            false
        } else {
            *m = self.epoch;
            self.queue.push(v);
            true
        }
    }

    /// Nodes visited by the last traversal, in visiting order.
    pub fn visited(&self) -> &[NodeId] {
        &self.queue
    }

    #[inline]
    pub fn contains(&self, v: NodeId) -> bool {
        self.mark[v as usize] == self.epoch
    }

    /// Forward BFS from `seeds` where arc `(u, v, w)` is crossed when
    /// `live(u, v, w)` says so. Each arc is asked at most once.
    pub fn run<T, F>(&mut self, g: &T, seeds: &[NodeId], mut live: F) -> &[NodeId]
    where
        T: Topology,
        F: FnMut(NodeId, NodeId, f64) -> bool,
    {
        self.start();
        for &s in seeds {
            self.visit(s);
        }
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            g.for_each_out(u, |v, w| {
                if self.mark[v as usize] != self.epoch && live(u, v, w) {
                    self.mark[v as usize] = self.epoch;
                    self.queue.push(v);
                }
            });
        }
        &self.queue
    }

    /// Reverse BFS: nodes that reach `roots` through live arcs.
    pub fn run_reverse<T, F>(&mut self, g: &T, roots: &[NodeId], mut live: F) -> &[NodeId]
    where
        T: Topology,
        F: FnMut(NodeId, NodeId, f64) -> bool,
    {
        self.start();
        for &s in roots {
            self.visit(s);
        }
        let mut head = 0;
        while head < self.queue.len() {
            let v = self.queue[head];
            head += 1;
            g.for_each_in(v, |u, w| {
                if self.mark[u as usize] != self.epoch && live(u, v, w) {
                    self.mark[u as usize] = self.epoch;
                    self.queue.push(u);
                }
            });
        }
        &self.queue
    }
}

#[inline]
pub(crate) fn coin(rng: &mut Rng, w: f64) -> bool {
    if w <= 0.0 {
        false
    } else if w >= 1.0 {
        true
    } else {
        rng.gen::<f64>() < w
    }
}

/// A realized live-edge graph.
#[derive(Debug, Clone)]
pub struct LiveEdgeGraph {
    n: usize,
    live: Vec<Pair>,
    out_offsets: Vec<u32>,
    out: Vec<NodeId>,
    in_offsets: Vec<u32>,
    inc: Vec<NodeId>,
}

impl LiveEdgeGraph {
    pub fn from_live_arcs(n: usize, live: Vec<Pair>) -> LiveEdgeGraph {
        let mut out_offsets = vec![0u32; n + 1];
        let mut in_offsets = vec![0u32; n + 1];
        for &(u, v) in &live {
            out_offsets[u as usize + 1] += 1;
            in_offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        let mut out = vec![0; live.len()];
        let mut inc = vec![0; live.len()];
        let mut of = out_offsets.clone();
        let mut inf = in_offsets.clone();
        for &(u, v) in &live {
            out[of[u as usize] as usize] = v;
            of[u as usize] += 1;
            inc[inf[v as usize] as usize] = u;
            inf[v as usize] += 1;
        }
        LiveEdgeGraph {
            n,
            live,
            out_offsets,
            out,
            in_offsets,
            inc,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn live_arcs(&self) -> &[Pair] {
        &self.live
    }

    #[inline]
    pub fn out(&self, u: NodeId) -> &[NodeId] {
        &self.out[self.out_offsets[u as usize] as usize..self.out_offsets[u as usize + 1] as usize]
    }

    #[inline]
    pub fn inc(&self, v: NodeId) -> &[NodeId] {
        &self.inc[self.in_offsets[v as usize] as usize..self.in_offsets[v as usize + 1] as usize]
    }

    /// Forward reach of `seeds` as a bitset.
    pub fn reach_bits(&self, seeds: &[NodeId], t: &mut Traversal) -> FixedBitSet {
        let visited = t.run(self, seeds, |_, _, _| true);
        let mut bits = FixedBitSet::with_capacity(self.n);
        for &v in visited {
            bits.insert(v as usize);
        }
        bits
    }
}

impl Topology for LiveEdgeGraph {
    fn node_count(&self) -> usize {
        self.n
    }

    fn arc_count(&self) -> usize {
        self.live.len()
    }

    #[inline]
    fn for_each_out<F: FnMut(NodeId, f64)>(&self, u: NodeId, mut f: F) {
        for &v in self.out(u) {
            f(v, 1.0);
        }
    }

    #[inline]
    fn for_each_in<F: FnMut(NodeId, f64)>(&self, v: NodeId, mut f: F) {
        for &u in self.inc(v) {
            f(u, 1.0);
        }
    }

    fn for_each_arc<F: FnMut(NodeId, NodeId, f64)>(&self, mut f: F) {
        for &(u, v) in &self.live {
            f(u, v, 1.0);
        }
    }
}

/// Draws a live-edge graph: each arc is kept independently with its weight.
pub fn sample_live_edge_graph<T: Topology>(g: &T, rng: &mut Rng) -> LiveEdgeGraph {
    let mut live = Vec::new();
    g.for_each_arc(|u, v, w| {
        if coin(rng, w) {
            live.push((u, v));
        }
    });
    LiveEdgeGraph::from_live_arcs(g.node_count(), live)
}

/// Draws `count` live-edge graphs; graph `i` uses its own stream of `seed`.
pub fn sample_live_edge_graphs<T: Topology>(
    g: &T,
    count: usize,
    seed: u64,
    exec: Exec,
) -> Vec<LiveEdgeGraph> {
    par::map_indexed(exec, count, |i| {
        let mut rng = rng::stream(seed, i as u64);
        sample_live_edge_graph(g, &mut rng)
    })
}

/// Nodes reachable from `seeds` in `l`, sorted.
pub fn reachable(l: &LiveEdgeGraph, seeds: &[NodeId]) -> Vec<NodeId> {
    let mut t = Traversal::new(l.n);
    let mut out = t.run(l, seeds, |_, _, _| true).to_vec();
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpreadEstimate {
    pub value: f64,
    pub samples: usize,
    pub per_node: Option<Vec<f64>>,
    pub per_community: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
pub struct SpreadOptions<'a> {
    pub samples: usize,
    pub per_node: bool,
    pub communities: Option<&'a CommunityStructure>,
    pub exec: Exec,
}

impl<'a> SpreadOptions<'a> {
    pub fn new(samples: usize) -> Self {
        SpreadOptions {
            samples,
            per_node: false,
            communities: None,
            exec: Exec::default(),
        }
    }

    pub fn per_node(mut self) -> Self {
        self.per_node = true;
        self
    }

    pub fn communities(mut self, c: &'a CommunityStructure) -> Self {
        self.communities = Some(c);
        self
    }

    pub fn exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }
}

fn check_seeds(n: usize, seeds: &[NodeId]) -> Result<()> {
    match seeds.iter().find(|&&s| s as usize >= n) {
        Some(&s) => Err(Error::NodeOutOfRange { id: s as u64, n }),
        None => Ok(()),
    }
}

/// Monte Carlo estimate of the spread of `seeds` on `g` with `f` added.
/// Coins are flipped lazily along the traversal.
pub fn estimate_spread(
    g: &Graph,
    seeds: &[NodeId],
    f: &EdgeAddition,
    opts: SpreadOptions<'_>,
    seed: u64,
) -> Result<SpreadEstimate> {
    if opts.samples == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    check_seeds(g.n(), seeds)?;
    f.validate(g)?;
    let view = Augmented::new(g, f.edges());
    let n = g.n();
    let want_nodes = opts.per_node || opts.communities.is_some();
    let lanes = par::lane_ranges(opts.samples);
    let partial = par::map_indexed(opts.exec, lanes.len(), |lane| {
        let mut rng = rng::stream(seed, lane as u64);
        let mut t = Traversal::new(n);
        let mut total = 0u64;
        let mut counts = if want_nodes { vec![0u64; n] } else { Vec::new() };
        for _ in lanes[lane].clone() {
            let reached = t.run(&view, seeds, |_, _, w| coin(&mut rng, w));
            total += reached.len() as u64;
            if want_nodes {
                for &v in reached {
                    counts[v as usize] += 1;
                }
            }
        }
        (total, counts)
    });
    let mut total = 0u64;
    let mut counts = vec![0u64; if want_nodes { n } else { 0 }];
    for (t, c) in partial {
        total += t;
        for (a, b) in counts.iter_mut().zip(c) {
            *a += b;
        }
    }
    let denom = opts.samples as f64;
    let per_node: Option<Vec<f64>> =
        want_nodes.then(|| counts.iter().map(|&c| c as f64 / denom).collect());
    let per_community = opts
        .communities
        .map(|c| c.coverages(per_node.as_ref().expect("per-node counts present")));
    Ok(SpreadEstimate {
        value: total as f64 / denom,
        samples: opts.samples,
        per_node: if opts.per_node { per_node } else { None },
        per_community,
    })
}

/// Exact spread by summing over every realization of the probabilistic arcs.
pub fn exact_spread_enumerate(
    g: &Graph,
    seeds: &[NodeId],
    f: &EdgeAddition,
    communities: Option<&CommunityStructure>,
    cap: usize,
) -> Result<SpreadEstimate> {
    check_seeds(g.n(), seeds)?;
    f.validate(g)?;
    let view = Augmented::new(g, f.edges());
    let per_node = exact_node_probabilities(&view, seeds, cap)?;
    Ok(SpreadEstimate {
        value: per_node.iter().sum(),
        samples: 0,
        per_community: communities.map(|c| c.coverages(&per_node)),
        per_node: Some(per_node),
    })
}

/// Exact reach probability of every node from `seeds`.
pub fn exact_node_probabilities<T: Topology>(
    g: &T,
    seeds: &[NodeId],
    cap: usize,
) -> Result<Vec<f64>> {
    let n = g.node_count();
    let mut fixed = Vec::new();
    let mut random = Vec::new();
    g.for_each_arc(|u, v, w| {
        if w >= 1.0 {
            fixed.push((u, v));
        } else if w > 0.0 {
            random.push((u, v, w));
        }
    });
    if random.len() > cap {
        return Err(Error::CapExceeded {
            what: "probabilistic arcs",
            size: random.len() as u128,
            cap: cap as u128,
        });
    }
    let mut probs = vec![0.0; n];
    let mut t = Traversal::new(n);
    let mut live = Vec::with_capacity(fixed.len() + random.len());
    for mask in 0u64..(1u64 << random.len()) {
        live.clear();
        live.extend_from_slice(&fixed);
        let mut p = 1.0;
        for (i, &(u, v, w)) in random.iter().enumerate() {
            if mask >> i & 1 == 1 {
                p *= w;
                live.push((u, v));
            } else {
                p *= 1.0 - w;
            }
        }
        if p == 0.0 {
            continue;
        }
        let l = LiveEdgeGraph::from_live_arcs(n, live.clone());
        for &v in t.run(&l, seeds, |_, _, _| true) {
            probs[v as usize] += p;
        }
    }
    Ok(probs)
}

/// Shared-sample evaluator for mixtures of seed sets: one batch of live-edge
/// graphs serves every seed set, node and community.
#[derive(Debug, Clone, Copy)]
pub struct Evaluator {
    pub samples: usize,
    pub exec: Exec,
}

/// Integer reach counts of a weighted seed-set mixture.
/// `counts[v] / denom` is the mixture reach probability of `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixtureCounts {
    pub counts: Vec<u64>,
    pub denom: u64,
}

impl MixtureCounts {
    pub fn node_probability(&self, v: NodeId) -> f64 {
        self.counts[v as usize] as f64 / self.denom as f64
    }

    pub fn per_node(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.denom as f64)
            .collect()
    }

    pub fn community_numerator(&self, c: &[NodeId]) -> u64 {
        c.iter().map(|&v| self.counts[v as usize]).sum()
    }

    pub fn per_community(&self, comms: &CommunityStructure) -> Vec<f64> {
        comms
            .communities()
            .iter()
            .map(|c| self.community_numerator(c) as f64 / (self.denom as f64 * c.len() as f64))
            .collect()
    }

    pub fn spread(&self) -> f64 {
        self.counts.iter().sum::<u64>() as f64 / self.denom as f64
    }
}

impl Evaluator {
    pub fn new(samples: usize) -> Self {
        Evaluator {
            samples,
            exec: Exec::default(),
        }
    }

    /// Reach counts of the mixture `support` (seed set, multiplicity).
    pub fn mixture<T: Topology>(
        &self,
        g: &T,
        support: &[(Vec<NodeId>, u32)],
        seed: u64,
    ) -> MixtureCounts {
        let n = g.node_count();
        let lanes = par::lane_ranges(self.samples);
        let partial = par::map_indexed(self.exec, lanes.len(), |lane| {
            let mut t = Traversal::new(n);
            let mut counts = vec![0u64; n];
            for i in lanes[lane].clone() {
                let mut rng = rng::stream(seed, i as u64);
                let l = sample_live_edge_graph(g, &mut rng);
                for (set, mult) in support {
                    for &v in t.run(&l, set, |_, _, _| true) {
                        counts[v as usize] += *mult as u64;
                    }
                }
            }
            counts
        });
        let mut counts = vec![0u64; n];
        for c in partial {
            for (a, b) in counts.iter_mut().zip(c) {
                *a += b;
            }
        }
        let total: u64 = support.iter().map(|(_, m)| *m as u64).sum();
        MixtureCounts {
            counts,
            denom: self.samples as u64 * total.max(1),
        }
    }
}
