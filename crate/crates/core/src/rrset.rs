//! Reverse-reachable set sampling, max-coverage greedy seeding and in-place
//! index updates after an edge is inserted.

use rand::{Rng as _, RngCore};

use crate::config::ThetaPolicy;
use crate::diffusion::{coin, Traversal};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, Pair, Topology};
use crate::par::{self, Exec};
use crate::rng::{self, Rng};

/// Nodes that reach `root` in one reverse live-edge sample. `members[0]` is
/// the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RRSet {
    pub root: NodeId,
    pub members: Vec<NodeId>,
}

impl RRSet {
    pub fn contains(&self, v: NodeId) -> bool {
        self.members.contains(&v)
    }
}

/// Samples one RR set with a uniformly random root.
pub fn sample_rr_set<T: Topology>(g: &T, rng: &mut Rng, t: &mut Traversal) -> RRSet {
    let root = rng.gen_range(0..g.node_count() as NodeId);
    sample_rr_set_rooted(g, root, rng, t)
}

/// Reverse BFS from `root`; every in-arc of a reached node is crossed with
/// its weight.
pub fn sample_rr_set_rooted<T: Topology>(
    g: &T,
    root: NodeId,
    rng: &mut Rng,
    t: &mut Traversal,
) -> RRSet {
    let members = t.run_reverse(g, &[root], |_, _, w| coin(rng, w)).to_vec();
    RRSet { root, members }
}

#[derive(Debug, Clone)]
pub struct RRIndex {
    n: usize,
    sets: Vec<RRSet>,
    inverted: Vec<Vec<u32>>,
    fingerprint: u64,
    applied: Vec<Pair>,
}

impl RRIndex {
    pub fn from_sets(g: &Graph, sets: Vec<RRSet>) -> RRIndex {
        let mut inverted = vec![Vec::new(); g.n()];
        for (i, s) in sets.iter().enumerate() {
            for &v in &s.members {
                inverted[v as usize].push(i as u32);
            }
        }
        RRIndex {
            n: g.n(),
            sets,
            inverted,
            fingerprint: g.fingerprint(),
            applied: Vec::new(),
        }
    }

    pub fn theta(&self) -> usize {
        self.sets.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sets(&self) -> &[RRSet] {
        &self.sets
    }

    /// Ids of the sets containing `v`.
    pub fn sets_containing(&self, v: NodeId) -> &[u32] {
        &self.inverted[v as usize]
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn applied(&self) -> &[Pair] {
        &self.applied
    }

    /// Spread estimate of `seeds`: n times the fraction of covered sets.
    pub fn spread_of(&self, seeds: &[NodeId]) -> f64 {
        if self.sets.is_empty() {
            return 0.0;
        }
        let mut covered = vec![false; self.sets.len()];
        for &s in seeds {
            for &i in &self.inverted[s as usize] {
                covered[i as usize] = true;
            }
        }
        let c = covered.iter().filter(|&&x| x).count();
        self.n as f64 * c as f64 / self.sets.len() as f64
    }

    /// Inserts arc `e = (u, v)` into the sampled world. `g` must be the graph
    /// the index currently represents. Every set containing `v` flips the new
    /// arc's coin; on success the reverse search resumes from `u`, skipping
    /// current members (their in-arcs were already decided).
    pub fn apply_edge(&mut self, g: &Graph, e: Pair, rng: &mut Rng) -> Result<()> {
        let (u, v) = e;
        if self.applied.contains(&e) {
            return Err(Error::EdgeAlreadyApplied(u, v));
        }
        if self.fingerprint != g.fingerprint() {
            return Err(Error::FingerprintMismatch {
                index: self.fingerprint,
                graph: g.fingerprint(),
            });
        }
        if !g.is_non_edge(u, v) {
            return Err(Error::NotNonEdge(u, v));
        }
        let w = g.weight(u, v);
        let mut mark = vec![u32::MAX; self.n];
        let mut queue = Vec::new();
        let affected = self.inverted[v as usize].clone();
        for id in affected {
            if !coin(rng, w) {
                continue;
            }
            let set = &mut self.sets[id as usize];
            for &x in &set.members {
                mark[x as usize] = id;
            }
            if mark[u as usize] == id {
                continue;
            }
            mark[u as usize] = id;
            queue.clear();
            queue.push(u);
            let mut head = 0;
            while head < queue.len() {
                let x = queue[head];
                head += 1;
                for &(y, wy) in g.in_neighbors(x) {
                    if mark[y as usize] != id && coin(rng, wy) {
                        mark[y as usize] = id;
                        queue.push(y);
                    }
                }
            }
            for &x in &queue {
                set.members.push(x);
                self.inverted[x as usize].push(id);
            }
        }
        self.fingerprint = g.fingerprint_with(u, v);
        self.applied.push(e);
        Ok(())
    }
}

/// Functional form of [`RRIndex::apply_edge`].
pub fn update_rr_index(idx: &RRIndex, g: &Graph, e: Pair, rng: &mut Rng) -> Result<RRIndex> {
    let mut out = idx.clone();
    out.apply_edge(g, e, rng)?;
    Ok(out)
}

/// Samples `theta` RR sets on `g` in fixed lanes.
pub fn sample_sets(g: &Graph, theta: usize, seed: u64, exec: Exec) -> Vec<RRSet> {
    let lanes = par::lane_ranges(theta);
    par::map_indexed(exec, lanes.len(), |lane| {
        let mut rng = rng::stream(seed, lane as u64);
        let mut t = Traversal::new(g.n());
        lanes[lane]
            .clone()
            .map(|_| sample_rr_set(g, &mut rng, &mut t))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// TIM's KPT lower bound: expected spread of a size-`k` node sample drawn
/// with probability proportional to in-degree.
pub fn estimate_kpt(g: &Graph, k: usize, ell: f64, rng: &mut Rng) -> f64 {
    let n = g.n();
    let m = g.arc_count();
    if n < 2 || m == 0 {
        return 1.0;
    }
    let ln_n = (n as f64).ln();
    let log2n = (n as f64).log2();
    let mut t = Traversal::new(n);
    let rounds = log2n.floor() as i32 - 1;
    for i in 1..=rounds {
        let two_i = 2f64.powi(i);
        let c = ((6.0 * ell * ln_n + 6.0 * log2n.ln()) * two_i).ceil() as usize;
        let mut sum = 0.0;
        for _ in 0..c {
            let r = sample_rr_set(g, rng, &mut t);
            let width: usize = r.members.iter().map(|&x| g.in_degree(x)).sum();
            sum += 1.0 - (1.0 - width as f64 / m as f64).powi(k as i32);
        }
        if sum / c as f64 > 1.0 / two_i {
            return n as f64 * sum / (2.0 * c as f64);
        }
    }
    1.0
}

pub fn theta_for(g: &Graph, k: usize, policy: &ThetaPolicy, seed: u64) -> usize {
    match *policy {
        ThetaPolicy::Fixed(t) => t,
        ThetaPolicy::Tim { eps, delta, max } => {
            let n = g.n().max(2) as f64;
            let ell = ((2.0 / delta).ln() / n.ln()).max(1.0);
            let mut rng = rng::stream(seed, u64::MAX);
            let kpt = estimate_kpt(g, k, ell, &mut rng).max(k as f64);
            let theta = 8.0 * n * (k as f64 * n.ln() + (2.0 / delta).ln()) / (eps * eps * kpt);
            (theta.ceil() as usize).clamp(1, max)
        }
    }
}

/// Builds an index of RR sets sized by `policy`.
pub fn build_rr_index(
    g: &Graph,
    k: usize,
    policy: &ThetaPolicy,
    seed: u64,
    exec: Exec,
) -> Result<RRIndex> {
    if k == 0 || k > g.n() {
        return Err(Error::InvalidParameter(format!(
            "seed budget {k} outside 1..={}",
            g.n()
        )));
    }
    if let ThetaPolicy::Tim { eps, delta, .. } = *policy {
        if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter("eps and delta must lie in (0, 1)".into()));
        }
    }
    let theta = theta_for(g, k, policy, seed);
    let sets = sample_sets(g, theta, rng::derive(seed, 1), exec);
    Ok(RRIndex::from_sets(g, sets))
}

/// Greedy maximum coverage over the index. Picks `min(k, n)` nodes; each step
/// takes the node covering most uncovered sets, smallest id on ties. Returns
/// the seeds in pick order and the covered fraction.
pub fn greedy_max_coverage(idx: &RRIndex, k: usize) -> (Vec<NodeId>, f64) {
    let n = idx.n;
    let mut gain: Vec<usize> = idx.inverted.iter().map(Vec::len).collect();
    let mut selected = vec![false; n];
    let mut covered = vec![false; idx.sets.len()];
    let mut covered_count = 0usize;
    let mut seeds = Vec::with_capacity(k.min(n));
    for _ in 0..k.min(n) {
        let mut best: Option<NodeId> = None;
        for v in 0..n {
            if !selected[v] && best.is_none_or(|b| gain[v] > gain[b as usize]) {
                best = Some(v as NodeId);
            }
        }
        let Some(b) = best else { break };
        selected[b as usize] = true;
        seeds.push(b);
        for &s in &idx.inverted[b as usize] {
            if !covered[s as usize] {
                covered[s as usize] = true;
                covered_count += 1;
                for &x in &idx.sets[s as usize].members {
                    gain[x as usize] -= 1;
                }
            }
        }
    }
    let frac = if idx.sets.is_empty() {
        0.0
    } else {
        covered_count as f64 / idx.sets.len() as f64
    };
    (seeds, frac)
}

/// A fresh sub-seed drawn from `rng`, used to fan an update out over lanes.
pub fn next_seed(rng: &mut Rng) -> u64 {
    rng.next_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{add_edges, EdgeAddition, NonEdgeWeights};
    use crate::rng::stream;

    fn star(leaves: u32, offset: u32) -> Vec<(NodeId, NodeId, f64)> {
        (1..=leaves).map(|l| (offset, offset + l, 1.0)).collect()
    }

    #[test]
    fn zero_weights_give_singletons() {
        let g = Graph::from_arcs(3, [(0, 1, 0.0), (1, 2, 0.0)]).unwrap();
        let mut t = Traversal::new(3);
        let mut rng = stream(1, 1);
        for _ in 0..50 {
            let r = sample_rr_set(&g, &mut rng, &mut t);
            assert_eq!(r.members, vec![r.root]);
        }
    }

    #[test]
    fn strongly_connected_full_sets() {
        let g = Graph::from_arcs(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        let idx = build_rr_index(&g, 1, &ThetaPolicy::Fixed(40), 3, Exec::default()).unwrap();
        assert!(idx.sets().iter().all(|s| s.members.len() == 4 && s.members[0] == s.root));
    }

    #[test]
    fn half_arc_membership_frequency() {
        let g = Graph::from_arcs(2, [(0, 1, 0.5)]).unwrap();
        let mut t = Traversal::new(2);
        let mut rng = stream(8, 0);
        let hits = (0..10_000)
            .filter(|_| sample_rr_set_rooted(&g, 1, &mut rng, &mut t).contains(0))
            .count();
        let f = hits as f64 / 1e4;
        assert!((0.47..=0.53).contains(&f), "{f}");
    }

    #[test]
    fn fixed_policy_and_single_node() {
        let g = Graph::from_arcs(5, star(4, 0)).unwrap();
        let idx = build_rr_index(&g, 2, &ThetaPolicy::Fixed(5000), 1, Exec::default()).unwrap();
        assert_eq!(idx.theta(), 5000);
        let one = Graph::empty(1);
        let idx = build_rr_index(&one, 1, &ThetaPolicy::Fixed(10), 1, Exec::default()).unwrap();
        assert!(idx.sets().iter().all(|s| s.members == vec![0]));
        let tim = ThetaPolicy::Tim {
            eps: 0.5,
            delta: 0.1,
            max: 100_000,
        };
        let idx = build_rr_index(&one, 1, &tim, 1, Exec::default()).unwrap();
        assert!(idx.theta() >= 1);
    }

    #[test]
    fn tim_theta_is_reasonable() {
        let g = Graph::from_arcs(9, star(8, 0)).unwrap();
        let tim = ThetaPolicy::Tim {
            eps: 0.3,
            delta: 0.1,
            max: 10_000_000,
        };
        let theta = theta_for(&g, 1, &tim, 5);
        // KPT is at least k = 1 and at most n = 9.
        let n = 9f64;
        let upper = 8.0 * n * (n.ln() + 20f64.ln()) / 0.09;
        assert!(theta as f64 <= upper.ceil() && theta as f64 >= (upper / n).floor());
    }

    #[test]
    fn star_center_wins() {
        let g = Graph::from_arcs(6, star(5, 0)).unwrap();
        let idx = build_rr_index(&g, 1, &ThetaPolicy::Fixed(2000), 4, Exec::default()).unwrap();
        assert_eq!(greedy_max_coverage(&idx, 1).0, vec![0]);
    }

    #[test]
    fn greedy_node_in_every_set_first() {
        let g = Graph::empty(10);
        let sets = (0..20)
            .map(|i| RRSet {
                root: i % 10,
                members: if i % 10 == 7 { vec![7] } else { vec![i % 10, 7] },
            })
            .collect();
        let idx = RRIndex::from_sets(&g, sets);
        assert_eq!(greedy_max_coverage(&idx, 1).0[0], 7);
        let (seeds, frac) = greedy_max_coverage(&idx, 20);
        assert_eq!(seeds.len(), 10);
        assert_eq!(frac, 1.0);
    }

    #[test]
    fn two_stars_both_centers() {
        let mut arcs = star(5, 0);
        arcs.extend(star(2, 6));
        let g = Graph::from_arcs(9, arcs).unwrap();
        // Brute force over all pairs for the best 2-coverage of the index.
        let idx = build_rr_index(&g, 2, &ThetaPolicy::Fixed(3000), 9, Exec::default()).unwrap();
        let mut best = (0.0, vec![]);
        for a in 0..9u32 {
            for b in a + 1..9 {
                let s = idx.spread_of(&[a, b]);
                if s > best.0 {
                    best = (s, vec![a, b]);
                }
            }
        }
        let (mut seeds, _) = greedy_max_coverage(&idx, 2);
        seeds.sort();
        assert_eq!(seeds, best.1);
        assert_eq!(seeds, vec![0, 6]);
    }

    #[test]
    fn update_zero_weight_is_noop() {
        let g = Graph::from_arcs(3, [(0, 1, 0.7)])
            .unwrap()
            .with_non_edge_weights(NonEdgeWeights::constant(0.0))
            .unwrap();
        let mut idx = build_rr_index(&g, 1, &ThetaPolicy::Fixed(500), 2, Exec::default()).unwrap();
        let before = idx.sets().to_vec();
        idx.apply_edge(&g, (2, 1), &mut stream(0, 0)).unwrap();
        assert_eq!(idx.sets(), &before[..]);
        let h = add_edges(&g, &EdgeAddition::of(vec![(2, 1)]).unwrap()).unwrap();
        assert_eq!(idx.fingerprint(), h.fingerprint());
    }

    #[test]
    fn update_weight_one_isolated_source() {
        let g = Graph::from_arcs(3, [(0, 1, 0.5)])
            .unwrap()
            .with_non_edge_weights(NonEdgeWeights::constant(1.0))
            .unwrap();
        let mut idx = build_rr_index(&g, 1, &ThetaPolicy::Fixed(500), 2, Exec::default()).unwrap();
        idx.apply_edge(&g, (2, 1), &mut stream(0, 0)).unwrap();
        for s in idx.sets() {
            if s.contains(1) {
                assert!(s.contains(2));
            }
        }
        for (i, s) in idx.sets().iter().enumerate() {
            for &x in &s.members {
                assert!(idx.sets_containing(x).contains(&(i as u32)));
            }
        }
    }

    #[test]
    fn update_errors() {
        let g = Graph::from_arcs(3, [(0, 1, 0.5)])
            .unwrap()
            .with_non_edge_weights(NonEdgeWeights::constant(0.5))
            .unwrap();
        let mut idx = build_rr_index(&g, 1, &ThetaPolicy::Fixed(50), 2, Exec::default()).unwrap();
        let mut rng = stream(0, 0);
        assert!(matches!(
            idx.apply_edge(&g, (0, 1), &mut rng),
            Err(Error::NotNonEdge(0, 1))
        ));
        idx.apply_edge(&g, (1, 0), &mut rng).unwrap();
        assert!(matches!(
            idx.apply_edge(&g, (1, 0), &mut rng),
            Err(Error::EdgeAlreadyApplied(1, 0))
        ));
        assert!(matches!(
            idx.apply_edge(&g, (2, 0), &mut rng),
            Err(Error::FingerprintMismatch { .. })
        ));
        let h = add_edges(&g, &EdgeAddition::of(vec![(1, 0)]).unwrap()).unwrap();
        idx.apply_edge(&h, (2, 0), &mut rng).unwrap();
    }

    #[test]
    fn update_matches_fresh_resampling() {
        // Arc (0,1) w=0.5, then add (1,0) w=0.5. Fraction of sets holding both
        // endpoints: compare the updated index with a freshly sampled one.
        let g = Graph::from_arcs(2, [(0, 1, 0.5)])
            .unwrap()
            .with_non_edge_weights(NonEdgeWeights::constant(0.5))
            .unwrap();
        let h = add_edges(&g, &EdgeAddition::of(vec![(1, 0)]).unwrap()).unwrap();
        let both = |idx: &RRIndex| {
            idx.sets().iter().filter(|s| s.members.len() == 2).count() as f64 / idx.theta() as f64
        };
        let mut upd = build_rr_index(&g, 1, &ThetaPolicy::Fixed(10_000), 5, Exec::default()).unwrap();
        upd.apply_edge(&g, (1, 0), &mut stream(6, 0)).unwrap();
        let fresh = build_rr_index(&h, 1, &ThetaPolicy::Fixed(10_000), 7, Exec::default()).unwrap();
        assert!((both(&upd) - both(&fresh)).abs() <= 0.03);
        assert!((both(&fresh) - 0.5).abs() <= 0.03);
    }

    #[test]
    fn rr_spread_matches_monte_carlo() {
        let g = Graph::from_arcs(5, [(0, 1, 0.6), (1, 2, 0.5), (0, 3, 0.3), (3, 4, 0.9), (2, 4, 0.2)])
            .unwrap();
        let idx = build_rr_index(&g, 1, &ThetaPolicy::Fixed(50_000), 1, Exec::default()).unwrap();
        let exact = crate::diffusion::exact_spread_enumerate(&g, &[0], &EdgeAddition::empty(), None, 20)
            .unwrap()
            .value;
        assert!((idx.spread_of(&[0]) - exact).abs() <= 0.05 * 5.0);
    }

    #[test]
    fn greedy_is_deterministic_given_index() {
        let g = Graph::from_arcs(5, [(0, 1, 0.6), (1, 2, 0.5), (0, 3, 0.3), (3, 4, 0.9)]).unwrap();
        let idx = build_rr_index(&g, 2, &ThetaPolicy::Fixed(1000), 1, Exec::default()).unwrap();
        assert_eq!(greedy_max_coverage(&idx, 2), greedy_max_coverage(&idx, 2));
    }
}
