//! Edge-addition heuristics and baselines.
//!
//! Every heuristic re-estimates the greedy seeder's output distribution at
//! the start of each iteration and scores candidates on one shared batch of
//! live-edge graphs of the current graph. Reach counts are kept as integers
//! over the common denominator `runs * samples`, so comparisons between
//! candidates are exact and the outcome does not depend on evaluation order.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use fixedbitset::FixedBitSet;
use rand::seq::index;
use rand::Rng as _;

use crate::config::Params;
use crate::diffusion::{sample_live_edge_graphs, Evaluator, LiveEdgeGraph, Traversal};
use crate::error::{Error, Result};
use crate::graph::{add_edges, non_edges, CommunityStructure, EdgeAddition, Graph, NodeId, Pair};
use crate::greedy::{GreedyPool, SeedDistribution};
use crate::par::{self, Exec};
use crate::rng::{self, label};

/// A problem instance: graph, communities, edge budget `b`, seed budget `k`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: Graph,
    pub communities: CommunityStructure,
    pub b: usize,
    pub k: usize,
    pub params: Params,
    pub seed: u64,
}

impl Instance {
    pub fn new(
        graph: Graph,
        communities: CommunityStructure,
        b: usize,
        k: usize,
        params: Params,
        seed: u64,
    ) -> Result<Instance> {
        if k == 0 || k > graph.n() {
            return Err(Error::InvalidParameter(format!(
                "k = {k} must lie in 1..={}",
                graph.n()
            )));
        }
        if communities.n() != graph.n() {
            return Err(Error::InvalidParameter(format!(
                "community structure is over {} nodes, graph has {}",
                communities.n(),
                graph.n()
            )));
        }
        if communities.m() == 0 {
            return Err(Error::InvalidParameter("no communities".into()));
        }
        Ok(Instance {
            graph,
            communities,
            b,
            k,
            params,
            seed,
        })
    }

    /// Greedy runs per seed-distribution estimate.
    pub fn runs(&self) -> usize {
        self.params.runs_for(self.graph.n(), self.communities.m())
    }
}

/// Diagnostics of one heuristic iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationInfo {
    /// Community of minimum estimated coverage.
    pub min_community: Option<usize>,
    /// Node the edge was aimed at, for the targeted heuristics.
    pub target: Option<NodeId>,
    pub candidates: usize,
    pub pruned: usize,
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct HeuristicTrace {
    pub edges: Vec<Pair>,
    pub iterations: Vec<IterationInfo>,
    pub stopped_early: bool,
}

impl HeuristicTrace {
    /// Compact one-line summary.
    pub fn summary(&self) -> String {
        let cand: usize = self.iterations.iter().map(|i| i.candidates).sum();
        let pruned: usize = self.iterations.iter().map(|i| i.pruned).sum();
        format!(
            "iters={} candidates={} pruned={}{}",
            self.iterations.len(),
            cand,
            pruned,
            if self.stopped_early { " early" } else { "" }
        )
    }
}

/// `num / den`, compared exactly.
#[derive(Debug, Clone, Copy)]
struct Ratio {
    num: u64,
    den: u64,
}

impl Ratio {
    fn cmp(&self, o: &Ratio) -> Ordering {
        (self.num as u128 * o.den as u128).cmp(&(o.num as u128 * self.den as u128))
    }

    fn min(self, o: Ratio) -> Ratio {
        if o.cmp(&self) == Ordering::Less {
            o
        } else {
            self
        }
    }
}

/// The distribution, live-edge graphs and reach sets of one iteration.
struct Snapshot {
    dist: SeedDistribution,
    samples: usize,
    lives: Vec<LiveEdgeGraph>,
    /// `reach[l][s]`: nodes reached from support set `s` in graph `l`.
    reach: Vec<Vec<FixedBitSet>>,
    node_num: Vec<u64>,
    comm_num: Vec<u64>,
    sizes: Vec<u64>,
    /// Communities by increasing coverage, ties by id.
    order: Vec<usize>,
    seed_counts: Vec<u32>,
}

impl Snapshot {
    fn new(
        current: &Graph,
        comms: &CommunityStructure,
        dist: SeedDistribution,
        samples: usize,
        seed: u64,
        exec: Exec,
    ) -> Snapshot {
        let n = current.n();
        let lives = sample_live_edge_graphs(current, samples, seed, exec);
        let reach = par::map_slice(exec, &lives, |l| {
            let mut t = Traversal::new(n);
            dist.support()
                .iter()
                .map(|(s, _)| l.reach_bits(s, &mut t))
                .collect::<Vec<_>>()
        });
        let mut node_num = vec![0u64; n];
        for per_l in &reach {
            for (bits, (_, mult)) in per_l.iter().zip(dist.support()) {
                for x in bits.ones() {
                    node_num[x] += *mult as u64;
                }
            }
        }
        Snapshot::assemble(comms, dist, samples, lives, reach, node_num)
    }

    /// Reach counts only; the live-edge graphs are streamed, not kept. Same
    /// streams as [`Snapshot::new`], so the counts agree.
    fn counts_only(
        current: &Graph,
        comms: &CommunityStructure,
        dist: SeedDistribution,
        samples: usize,
        seed: u64,
        exec: Exec,
    ) -> Snapshot {
        let counts = Evaluator { samples, exec }.mixture(current, dist.support(), seed);
        Snapshot::assemble(comms, dist, samples, Vec::new(), Vec::new(), counts.counts)
    }

    fn assemble(
        comms: &CommunityStructure,
        dist: SeedDistribution,
        samples: usize,
        lives: Vec<LiveEdgeGraph>,
        reach: Vec<Vec<FixedBitSet>>,
        node_num: Vec<u64>,
    ) -> Snapshot {
        let comm_num: Vec<u64> = comms
            .communities()
            .iter()
            .map(|c| c.iter().map(|&v| node_num[v as usize]).sum())
            .collect();
        let sizes: Vec<u64> = comms.communities().iter().map(|c| c.len() as u64).collect();
        let mut order: Vec<usize> = (0..comms.m()).collect();
        order.sort_by(|&a, &b| {
            Ratio { num: comm_num[a], den: sizes[a] }
                .cmp(&Ratio { num: comm_num[b], den: sizes[b] })
                .then(a.cmp(&b))
        });
        let seed_counts = dist.node_counts(node_num.len());
        Snapshot {
            dist,
            samples,
            lives,
            reach,
            node_num,
            comm_num,
            sizes,
            order,
            seed_counts,
        }
    }

    fn denom(&self) -> f64 {
        self.dist.runs() as f64 * self.samples as f64
    }

    fn coverage(&self, c: usize) -> Ratio {
        Ratio {
            num: self.comm_num[c],
            den: self.sizes[c],
        }
    }

    fn as_f64(&self, r: Ratio) -> f64 {
        r.num as f64 / (r.den as f64 * self.denom())
    }

    fn min_community(&self) -> usize {
        self.order[0]
    }

    /// `min_C (comm_num[C] + add[C]) / |C|` where `add` is zero outside
    /// `touched`.
    fn min_with(&self, add: &[u64], touched: &[usize]) -> Ratio {
        let mut best: Option<Ratio> = None;
        for &c in touched {
            let r = Ratio {
                num: self.comm_num[c] + add[c],
                den: self.sizes[c],
            };
            best = Some(best.map_or(r, |b| b.min(r)));
        }
        if let Some(&c) = self.order.iter().find(|&&c| add[c] == 0) {
            let r = self.coverage(c);
            best = Some(best.map_or(r, |b| b.min(r)));
        }
        best.expect("at least one community")
    }
}

/// Sparse per-community accumulator.
struct Scratch {
    add: Vec<u64>,
    touched: Vec<usize>,
}

impl Scratch {
    fn new(m: usize) -> Self {
        Scratch {
            add: vec![0; m],
            touched: Vec::new(),
        }
    }

    #[inline]
    fn bump(&mut self, comms: &CommunityStructure, x: NodeId, by: u64) {
        for &c in comms.of_node(x) {
            let c = c as usize;
            if self.add[c] == 0 {
                self.touched.push(c);
            }
            self.add[c] += by;
        }
    }

    fn clear(&mut self) {
        for &c in &self.touched {
            self.add[c] = 0;
        }
        self.touched.clear();
    }
}

/// Shared loop state for the iterative heuristics.
struct Driver<'a> {
    inst: &'a Instance,
    current: Graph,
    pool: GreedyPool,
    f: EdgeAddition,
    trace: HeuristicTrace,
}

impl<'a> Driver<'a> {
    fn new(inst: &'a Instance) -> Self {
        let algo = rng::derive(inst.seed, label::ALGORITHM);
        Driver {
            inst,
            current: inst.graph.clone(),
            pool: GreedyPool::new(&inst.params, inst.k, inst.runs(), rng::derive(algo, 0)),
            f: EdgeAddition::new(inst.b),
            trace: HeuristicTrace::default(),
        }
    }

    fn iteration_seed(&self) -> u64 {
        let algo = rng::derive(self.inst.seed, label::ALGORITHM);
        rng::derive2(algo, 1, self.f.len() as u64)
    }

    fn snapshot(&mut self) -> Result<Snapshot> {
        let dist = self.pool.distribution(&self.current)?;
        Ok(Snapshot::new(
            &self.current,
            &self.inst.communities,
            dist,
            self.inst.params.mc_samples.max(1),
            self.iteration_seed(),
            self.inst.params.exec,
        ))
    }

    fn counts(&mut self) -> Result<Snapshot> {
        let dist = self.pool.distribution(&self.current)?;
        Ok(Snapshot::counts_only(
            &self.current,
            &self.inst.communities,
            dist,
            self.inst.params.mc_samples.max(1),
            self.iteration_seed(),
            self.inst.params.exec,
        ))
    }

    fn add(&mut self, e: Pair, info: IterationInfo) -> Result<()> {
        self.pool.edge_added(&self.current, e)?;
        self.current = add_edges(&self.current, &EdgeAddition::of(vec![e])?)?;
        self.f.push(e)?;
        self.trace.edges.push(e);
        self.trace.iterations.push(info);
        Ok(())
    }

    fn stop(&mut self, why: &str) {
        log::info!("stopping after {} of {} edges: {why}", self.f.len(), self.inst.b);
        self.trace.stopped_early = true;
    }

    fn finish(self) -> (EdgeAddition, HeuristicTrace) {
        (self.f, self.trace)
    }
}

#[inline]
fn edge_coin(seed: u64, l: usize, (u, v): Pair, w: f64) -> bool {
    if w <= 0.0 {
        return false;
    }
    if w >= 1.0 {
        return true;
    }
    let key = ((u as u64) << 32) | v as u64;
    rng::unit_from_hash(rng::derive2(seed, l as u64, key)) < w
}

/// Greedy edge addition: each iteration adds the candidate with the largest
/// estimated minimum community coverage. Candidates join a node of some
/// support set to a node in none of them, across communities. A candidate
/// `(u, v)` is only evaluated when seeding `v` on top of the current
/// coverage could beat the best value seen so far.
pub fn grdy_al(inst: &Instance) -> Result<(EdgeAddition, HeuristicTrace)> {
    let mut d = Driver::new(inst);
    let comms = &inst.communities;
    let n = inst.graph.n();
    let exec = inst.params.exec;
    while d.f.len() < inst.b {
        let snap = d.snapshot()?;
        let coin_seed = rng::derive(d.iteration_seed(), 0xC011);
        let support_nodes = snap.dist.union();
        let mut in_support = FixedBitSet::with_capacity(n);
        support_nodes.iter().for_each(|&u| in_support.insert(u as usize));
        let mut candidates: Vec<Pair> = Vec::new();
        for &u in &support_nodes {
            for v in 0..n as NodeId {
                if !in_support.contains(v as usize)
                    && d.current.is_non_edge(u, v)
                    && !comms.share_community(u, v)
                {
                    candidates.push((u, v));
                }
            }
        }
        if candidates.is_empty() {
            d.stop("no candidate edges");
            break;
        }

        let mut targets: Vec<NodeId> = candidates.iter().map(|&(_, v)| v).collect();
        targets.sort_unstable();
        targets.dedup();
        let mut slot = vec![usize::MAX; n];
        for (i, &v) in targets.iter().enumerate() {
            slot[v as usize] = i;
        }
        // Forward reach of each target in every live-edge graph, and the
        // pruning bound obtained by seeding it outright.
        let runs = snap.dist.runs() as u64;
        let per_target = par::map_slice(exec, &targets, |&v| {
            let mut t = Traversal::new(n);
            let lists: Vec<Vec<NodeId>> = snap
                .lives
                .iter()
                .map(|l| t.run(l, &[v], |_, _, _| true).to_vec())
                .collect();
            let mut s = Scratch::new(comms.m());
            for list in &lists {
                for &x in list {
                    s.bump(comms, x, runs);
                }
            }
            let bound = snap.min_with(&s.add, &s.touched);
            (lists, bound)
        });

        let pruning = inst.params.pruning;
        let lanes = par::lane_ranges(candidates.len());
        let results = par::map_indexed(exec, lanes.len(), |lane| {
            let mut best: Option<(Ratio, usize)> = None;
            let mut pruned = 0usize;
            let mut s = Scratch::new(comms.m());
            for i in lanes[lane].clone() {
                let e @ (u, v) = candidates[i];
                let (lists, bound) = &per_target[slot[v as usize]];
                if pruning {
                    if let Some((delta, _)) = best {
                        if bound.cmp(&delta) != Ordering::Greater {
                            pruned += 1;
                            continue;
                        }
                    }
                }
                let w = d.current.weight(u, v);
                for (l, list) in lists.iter().enumerate() {
                    if !edge_coin(coin_seed, l, e, w) {
                        continue;
                    }
                    for (bits, (_, mult)) in snap.reach[l].iter().zip(snap.dist.support()) {
                        if !bits.contains(u as usize) || bits.contains(v as usize) {
                            continue;
                        }
                        for &x in list {
                            if !bits.contains(x as usize) {
                                s.bump(comms, x, *mult as u64);
                            }
                        }
                    }
                }
                let lambda = snap.min_with(&s.add, &s.touched);
                s.clear();
                if best.is_none_or(|(delta, _)| lambda.cmp(&delta) == Ordering::Greater) {
                    best = Some((lambda, i));
                }
            }
            (best, pruned)
        });
        let mut best: Option<(Ratio, usize)> = None;
        let mut pruned = 0;
        for (b, p) in results {
            pruned += p;
            if let Some((r, i)) = b {
                let better = best.is_none_or(|(br, bi)| match r.cmp(&br) {
                    Ordering::Greater => true,
                    Ordering::Equal => i < bi,
                    Ordering::Less => false,
                });
                if better {
                    best = Some((r, i));
                }
            }
        }
        let (lambda, i) = best.expect("non-empty candidate list");
        let info = IterationInfo {
            min_community: Some(snap.min_community()),
            target: Some(candidates[i].1),
            candidates: candidates.len(),
            pruned,
            score: snap.as_f64(lambda),
        };
        log::debug!("grdy_al picks {:?} at {:.4}", candidates[i], info.score);
        d.add(candidates[i], info)?;
    }
    Ok(d.finish())
}

/// Adds the non-edge `(u, v)` maximizing
/// `Pr[u in S] * w(u, v) * E[sigma_Cmin(S + v)]`, where `Cmin` is the
/// community of currently minimum coverage.
pub fn to_min_c_infl(inst: &Instance) -> Result<(EdgeAddition, HeuristicTrace)> {
    let mut d = Driver::new(inst);
    let comms = &inst.communities;
    let n = inst.graph.n();
    let exec = inst.params.exec;
    while d.f.len() < inst.b {
        let snap = d.snapshot()?;
        let cmin = snap.min_community();
        let members = comms.get(cmin);
        // acc[v]: reach count of Cmin when v joins every support set.
        let lanes = par::lane_ranges(snap.lives.len());
        let partial = par::map_indexed(exec, lanes.len(), |lane| {
            let mut t = Traversal::new(n);
            let mut acc = vec![0u64; n];
            let mut constant = 0u64;
            for l in lanes[lane].clone() {
                let live = &snap.lives[l];
                let reverse: Vec<Vec<NodeId>> = members
                    .iter()
                    .map(|&x| t.run_reverse(live, &[x], |_, _, _| true).to_vec())
                    .collect();
                for (bits, (_, mult)) in snap.reach[l].iter().zip(snap.dist.support()) {
                    let mult = *mult as u64;
                    for (&x, sources) in members.iter().zip(&reverse) {
                        if bits.contains(x as usize) {
                            constant += mult;
                        } else {
                            for &v in sources {
                                acc[v as usize] += mult;
                            }
                        }
                    }
                }
            }
            (acc, constant)
        });
        let mut acc = vec![0u64; n];
        for (a, c) in partial {
            for (x, y) in acc.iter_mut().zip(a) {
                *x += y + c;
            }
        }

        let mut best: Option<(f64, Pair)> = None;
        let mut candidates = 0usize;
        for u in 0..n as NodeId {
            let pu = snap.seed_counts[u as usize];
            if pu == 0 {
                continue;
            }
            for v in 0..n as NodeId {
                if !d.current.is_non_edge(u, v) {
                    continue;
                }
                candidates += 1;
                let score = pu as f64 * d.current.weight(u, v) * acc[v as usize] as f64;
                if best.is_none_or(|(b, _)| score > b) {
                    best = Some((score, (u, v)));
                }
            }
        }
        let chosen = match best {
            Some((score, e)) if score > 0.0 => Some((score, e)),
            _ => non_edges(&d.current).next().map(|e| (0.0, e)),
        };
        let Some((score, e)) = chosen else {
            d.stop("no non-edges left");
            break;
        };
        let info = IterationInfo {
            min_community: Some(cmin),
            target: Some(e.1),
            candidates,
            pruned: 0,
            score: score / (snap.dist.runs() as f64 * snap.denom() * members.len() as f64),
        };
        d.add(e, info)?;
    }
    Ok(d.finish())
}

/// Adds an edge into the least-reached node of the least-covered
/// community, from the source maximizing `Pr[u in S] * w(u, v)`.
pub fn to_min_c_min(inst: &Instance) -> Result<(EdgeAddition, HeuristicTrace)> {
    let mut d = Driver::new(inst);
    let comms = &inst.communities;
    let n = inst.graph.n();
    while d.f.len() < inst.b {
        let snap = d.counts()?;
        let mut chosen: Option<(usize, NodeId, f64, Pair)> = None;
        'outer: for &c in &snap.order {
            let mut nodes = comms.get(c).to_vec();
            nodes.sort_by_key(|&v| (snap.node_num[v as usize], v));
            for (rank, &target) in nodes.iter().enumerate() {
                let mut best: Option<(f64, NodeId)> = None;
                for u in 0..n as NodeId {
                    if !d.current.is_non_edge(u, target) {
                        continue;
                    }
                    let score = snap.seed_counts[u as usize] as f64 * d.current.weight(u, target);
                    if best.is_none_or(|(b, _)| score > b) {
                        best = Some((score, u));
                    }
                }
                if let Some((score, u)) = best {
                    if rank > 0 || c != snap.order[0] {
                        log::info!("to_minC_min falls back to node {target} of community {c}");
                    }
                    chosen = Some((c, target, score, (u, target)));
                    break 'outer;
                }
            }
        }
        let Some((c, target, score, e)) = chosen else {
            d.stop("no non-edges left");
            break;
        };
        let info = IterationInfo {
            min_community: Some(c),
            target: Some(target),
            candidates: n,
            pruned: 0,
            score: score / snap.dist.runs() as f64,
        };
        d.add(e, info)?;
    }
    Ok(d.finish())
}

fn trace_of(f: &EdgeAddition, wanted: usize) -> HeuristicTrace {
    HeuristicTrace {
        edges: f.edges().to_vec(),
        iterations: Vec::new(),
        stopped_early: f.len() < wanted,
    }
}

/// `b` non-edges drawn uniformly without replacement.
pub fn baseline_random(inst: &Instance) -> Result<(EdgeAddition, HeuristicTrace)> {
    let g = &inst.graph;
    let mut rng = rng::stream(rng::derive(inst.seed, label::ALGORITHM), 2);
    let total = g.non_edge_count();
    let mut f = EdgeAddition::new(inst.b);
    let n = g.n();
    let dense = total.saturating_mul(4) >= n * n.saturating_sub(1);
    if inst.b >= total || !dense || total <= inst.b.saturating_mul(4) {
        let all: Vec<Pair> = non_edges(g).collect();
        let take = inst.b.min(all.len());
        for i in index::sample(&mut rng, all.len(), take) {
            f.push(all[i])?;
        }
    } else {
        while f.len() < inst.b {
            let u = rng.gen_range(0..n) as NodeId;
            let v = rng.gen_range(0..n) as NodeId;
            if g.is_non_edge(u, v) && !f.contains((u, v)) {
                f.push((u, v))?;
            }
        }
    }
    let trace = trace_of(&f, inst.b);
    Ok((f, trace))
}

#[derive(PartialEq)]
struct Heavy(f64, Reverse<Pair>);

impl Eq for Heavy {}

impl PartialOrd for Heavy {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Heavy {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
    }
}

/// The `b` heaviest non-edges, ties by pair order.
pub fn baseline_max_weight(inst: &Instance) -> Result<(EdgeAddition, HeuristicTrace)> {
    let g = &inst.graph;
    let mut heap: BinaryHeap<Reverse<Heavy>> = BinaryHeap::with_capacity(inst.b + 1);
    if inst.b > 0 {
        for (u, v) in non_edges(g) {
            heap.push(Reverse(Heavy(g.weight(u, v), Reverse((u, v)))));
            if heap.len() > inst.b {
                heap.pop();
            }
        }
    }
    let mut top: Vec<Heavy> = heap.into_iter().map(|Reverse(h)| h).collect();
    top.sort_by(|a, b| b.cmp(a));
    let mut f = EdgeAddition::new(inst.b);
    for Heavy(_, Reverse(e)) in top {
        f.push(e)?;
    }
    let trace = trace_of(&f, inst.b);
    Ok((f, trace))
}
