//! Random graphs, weights, community structures and set-cover gadgets.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::config::Params;
use crate::error::{Error, Result};
use crate::graph::{CommunityStructure, Graph, NodeId, NonEdgeDomain, NonEdgeWeights};
use crate::heuristics::Instance;
use crate::rng::{self, label};

/// Preferential attachment. Nodes `0..attach` form an arc-less core; node
/// `attach` links to all of them, and each later node links to `attach`
/// distinct earlier nodes chosen with probability proportional to degree
/// plus one. Every link becomes two arcs of weight 1.
pub fn gen_barabasi_albert(n: usize, attach: usize, seed: u64) -> Result<Graph> {
    if attach == 0 || n < attach + 1 {
        return Err(Error::InvalidParameter(format!(
            "need attach >= 1 and n >= attach + 1, got n = {n}, attach = {attach}"
        )));
    }
    let mut rng = rng::stream(seed, label::GENERATOR);
    // Each node appears once plus once per incident link.
    let mut urn: Vec<NodeId> = (0..attach as NodeId).collect();
    let mut arcs = Vec::with_capacity(2 * attach * (n - attach));
    for t in attach..n {
        let t = t as NodeId;
        let mut targets: Vec<NodeId> = Vec::with_capacity(attach);
        if t as usize == attach {
            targets.extend(0..attach as NodeId);
        } else {
            while targets.len() < attach {
                let c = urn[rng.gen_range(0..urn.len())];
                if !targets.contains(&c) {
                    targets.push(c);
                }
            }
        }
        urn.push(t);
        for &c in &targets {
            arcs.push((t, c, 1.0));
            arcs.push((c, t, 1.0));
            urn.push(t);
            urn.push(c);
        }
    }
    Graph::from_arcs(n, arcs)
}

/// Weight ranges for arcs and for addable pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightScheme {
    pub edge: (f64, f64),
    pub non_edge: (f64, f64),
    pub seed: u64,
}

impl WeightScheme {
    pub fn new(edge: (f64, f64), non_edge: (f64, f64), seed: u64) -> Result<Self> {
        for (lo, hi) in [edge, non_edge] {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(Error::InvalidParameter(format!("weight range [{lo}, {hi}]")));
            }
        }
        Ok(WeightScheme {
            edge,
            non_edge,
            seed,
        })
    }
}

/// Redraws every arc weight uniformly from the edge range and installs a
/// seeded uniform provider for non-edges.
pub fn assign_weights(g: &Graph, scheme: &WeightScheme) -> Result<Graph> {
    let mut rng = rng::stream(scheme.seed, label::WEIGHTS);
    let (lo, hi) = scheme.edge;
    let arcs: Vec<_> = g
        .arcs()
        .iter()
        .map(|&(u, v)| (u, v, if lo == hi { lo } else { rng.gen_range(lo..=hi) }))
        .collect();
    let (nlo, nhi) = scheme.non_edge;
    Graph::from_arcs(g.n(), arcs)?
        .with_non_edge_weights(NonEdgeWeights::uniform(
            rng::derive(scheme.seed, label::NONEDGE_WEIGHTS),
            nlo,
            nhi,
        ))?
        .with_domain(g.domain().clone())
}

/// `m` disjoint communities of `n / m` nodes each, grown by breadth-first
/// search over arcs in either direction from random unclaimed sources. When
/// a search runs dry it restarts from a fresh unclaimed source.
pub fn gen_bfs_communities(g: &Graph, m: usize, seed: u64) -> Result<CommunityStructure> {
    let n = g.n();
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "community count {m} must lie in 1..={n}"
        )));
    }
    let size = n / m;
    let mut rng = rng::stream(seed, label::COMMUNITIES);
    let mut claimed = vec![false; n];
    let mut unclaimed: Vec<NodeId> = (0..n as NodeId).collect();
    let mut communities = Vec::with_capacity(m);
    for _ in 0..m {
        let mut community = Vec::with_capacity(size);
        let mut queue = VecDeque::new();
        while community.len() < size {
            let v = match queue.pop_front() {
                Some(v) => v,
                None => {
                    unclaimed.retain(|&x| !claimed[x as usize]);
                    let s = *unclaimed.choose(&mut rng).expect("n >= m * size");
                    claimed[s as usize] = true;
                    community.push(s);
                    s
                }
            };
            let mut next: Vec<NodeId> = g
                .out_neighbors(v)
                .iter()
                .chain(g.in_neighbors(v))
                .map(|&(x, _)| x)
                .collect();
            next.sort_unstable();
            next.dedup();
            for x in next {
                if community.len() == size {
                    break;
                }
                if !claimed[x as usize] {
                    claimed[x as usize] = true;
                    community.push(x);
                    queue.push_back(x);
                }
            }
        }
        communities.push(community);
    }
    CommunityStructure::new(n, communities)
}

pub fn singleton_communities(n: usize) -> CommunityStructure {
    CommunityStructure::new(n, (0..n as NodeId).map(|v| vec![v]).collect())
        .expect("singletons are valid")
}

/// Directed planted-partition graph: `blocks` equal blocks, arc `(u, v)`
/// present with probability `p_in` inside a block and `p_out` across.
/// Arc weights are 1; use [`assign_weights`] afterwards.
pub fn gen_planted_blocks(
    n: usize,
    blocks: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<(Graph, CommunityStructure)> {
    if blocks == 0 || blocks > n {
        return Err(Error::InvalidParameter(format!("block count {blocks} for {n} nodes")));
    }
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) {
        return Err(Error::InvalidParameter("arc probabilities must lie in [0, 1]".into()));
    }
    let mut rng = rng::stream(seed, label::GENERATOR);
    let block = |v: usize| v * blocks / n;
    let mut arcs = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let p = if block(u) == block(v) { p_in } else { p_out };
            if rng.gen::<f64>() < p {
                arcs.push((u as NodeId, v as NodeId, 1.0));
            }
        }
    }
    let mut members = vec![Vec::new(); blocks];
    for v in 0..n {
        members[block(v)].push(v as NodeId);
    }
    Ok((Graph::from_arcs(n, arcs)?, CommunityStructure::new(n, members)?))
}

/// Sets `D_1..D_mu` over elements `0..nu` and a cover budget `kappa`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetCoverInstance {
    sets: Vec<Vec<usize>>,
    universe: usize,
    kappa: usize,
}

impl SetCoverInstance {
    pub fn new(sets: Vec<Vec<usize>>, universe: usize, kappa: usize) -> Result<Self> {
        if universe == 0 {
            return Err(Error::InvalidParameter("ground set must be non-empty".into()));
        }
        if kappa > sets.len() {
            return Err(Error::InvalidParameter(format!(
                "cover budget {kappa} exceeds the {} sets",
                sets.len()
            )));
        }
        let mut clean = Vec::with_capacity(sets.len());
        for mut s in sets {
            s.sort_unstable();
            s.dedup();
            if let Some(&e) = s.iter().find(|&&e| e >= universe) {
                return Err(Error::InvalidParameter(format!("element {e} outside ground set")));
            }
            clean.push(s);
        }
        Ok(SetCoverInstance {
            sets: clean,
            universe,
            kappa,
        })
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn mu(&self) -> usize {
        self.sets.len()
    }

    /// Node of set `j`.
    pub fn set_node(&self, j: usize) -> NodeId {
        j as NodeId
    }

    /// Node of element `i`.
    pub fn element_node(&self, i: usize) -> NodeId {
        (self.mu() + i) as NodeId
    }

    /// The extra node `q`.
    pub fn q(&self) -> NodeId {
        (self.mu() + self.universe) as NodeId
    }

    fn node_count(&self) -> usize {
        self.mu() + self.universe + 1
    }

    fn gadget(&self, addable: BTreeSet<(NodeId, NodeId)>) -> Result<(Graph, CommunityStructure)> {
        let mut arcs = Vec::new();
        for (j, s) in self.sets.iter().enumerate() {
            for &i in s {
                arcs.push((self.set_node(j), self.element_node(i), 1.0));
            }
        }
        let n = self.node_count();
        let mut weights = NonEdgeWeights::constant(0.0);
        weights.explicit.extend(addable.iter().map(|&p| (p, 1.0)));
        let g = Graph::from_arcs(n, arcs)?
            .with_non_edge_weights(weights)?
            .with_domain(NonEdgeDomain::Only(addable))?;
        let mut comms = vec![vec![self.q()]];
        comms.extend((0..self.universe).map(|i| vec![self.element_node(i)]));
        Ok((g, CommunityStructure::new(n, comms)?))
    }
}

/// Gadget with `k = 1` and `b = kappa`: set nodes point at their elements,
/// the only addable pairs are `q -> set node`, and the communities are `{q}`
/// and every element singleton. Every other pair behaves as a zero-weight
/// arc.
pub fn gen_setcover_fimal_k1(sc: &SetCoverInstance, params: Params, seed: u64) -> Result<Instance> {
    let addable = (0..sc.mu()).map(|j| (sc.q(), sc.set_node(j))).collect();
    let (g, c) = sc.gadget(addable)?;
    Instance::new(g, c, sc.kappa(), 1, params, seed)
}

/// Gadget with `b = 1` and `k = kappa`: as above, but the only addable
/// pairs are `element node -> q`. Every element must lie in some set.
pub fn gen_setcover_fimal_b1(sc: &SetCoverInstance, params: Params, seed: u64) -> Result<Instance> {
    let mut covered = vec![false; sc.universe()];
    sc.sets().iter().flatten().for_each(|&i| covered[i] = true);
    if let Some(i) = covered.iter().position(|&c| !c) {
        return Err(Error::InvalidParameter(format!("element {i} lies in no set")));
    }
    let addable = (0..sc.universe()).map(|i| (sc.element_node(i), sc.q())).collect();
    let (g, c) = sc.gadget(addable)?;
    Instance::new(g, c, 1, sc.kappa(), params, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{non_edges, Topology};

    #[test]
    fn ba_arc_counts() {
        assert_eq!(gen_barabasi_albert(200, 2, 1).unwrap().arc_count(), 792);
        let g = gen_barabasi_albert(3, 2, 1).unwrap();
        assert_eq!(g.arc_set(), [(2, 0), (0, 2), (2, 1), (1, 2)].into_iter().collect());
        assert!(gen_barabasi_albert(2, 2, 1).is_err());
    }

    #[test]
    fn ba_is_heavy_tailed() {
        for seed in 0..20 {
            let g = gen_barabasi_albert(200, 2, seed).unwrap();
            let deg: Vec<usize> = (0..200).map(|v| g.out_degree(v) + g.in_degree(v)).collect();
            let mean = deg.iter().sum::<usize>() as f64 / 200.0;
            assert!(*deg.iter().max().unwrap() as f64 > 4.0 * mean);
        }
    }

    #[test]
    fn weights_in_range_and_pure() {
        let g = gen_barabasi_albert(200, 2, 3).unwrap();
        let flat = assign_weights(&g, &WeightScheme::new((0.3, 0.3), (0.0, 1.0), 5).unwrap()).unwrap();
        assert!(flat.arc_weights().iter().all(|&w| w == 0.3));
        let h = assign_weights(&g, &WeightScheme::new((0.0, 0.4), (0.0, 1.0), 5).unwrap()).unwrap();
        let mean = h.arc_weights().iter().sum::<f64>() / h.arc_count() as f64;
        assert!((0.18..=0.22).contains(&mean), "{mean}");
        assert_eq!(h.weight(5, 150), h.weight(5, 150));
        assert!(WeightScheme::new((0.5, 0.2), (0.0, 1.0), 0).is_err());
    }

    #[test]
    fn bfs_communities_partition() {
        let g = gen_barabasi_albert(200, 2, 3).unwrap();
        let c = gen_bfs_communities(&g, 10, 4).unwrap();
        assert_eq!(c.m(), 10);
        let mut seen = BTreeSet::new();
        for comm in c.communities() {
            assert_eq!(comm.len(), 20);
            for &v in comm {
                assert!(seen.insert(v));
            }
        }
        assert_eq!(gen_bfs_communities(&g, 1, 0).unwrap().get(0).len(), 200);
        let s = gen_bfs_communities(&g, 200, 0).unwrap();
        assert!(s.communities().iter().all(|c| c.len() == 1));
        // Disconnected graph forces restarts.
        let e = gen_bfs_communities(&Graph::empty(9), 3, 0).unwrap();
        assert!(e.communities().iter().all(|c| c.len() == 3));
    }

    #[test]
    fn singletons() {
        let c = singleton_communities(3);
        assert_eq!(c.communities(), &[vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn planted_blocks_shape() {
        let (g, c) = gen_planted_blocks(100, 4, 0.2, 0.01, 9).unwrap();
        assert_eq!(c.m(), 4);
        let inside = g.arcs().iter().filter(|&&(u, v)| c.share_community(u, v)).count();
        assert!(inside * 2 > g.arc_count());
    }

    #[test]
    fn k1_gadget_shape() {
        let sc = SetCoverInstance::new(vec![vec![0, 1], vec![1]], 2, 1).unwrap();
        let inst = gen_setcover_fimal_k1(&sc, Params::default(), 0).unwrap();
        let q = sc.q();
        let ne: Vec<_> = non_edges(&inst.graph).collect();
        assert_eq!(ne, vec![(q, 0), (q, 1)]);
        assert_eq!((inst.b, inst.k), (1, 1));
        assert_eq!(inst.communities.m(), 3);
        assert_eq!(inst.graph.weight(q, 0), 1.0);
        assert_eq!(inst.graph.weight(2, 0), 0.0);
    }

    #[test]
    fn b1_gadget_shape() {
        let sc = SetCoverInstance::new(vec![vec![0, 1], vec![1]], 2, 2).unwrap();
        let inst = gen_setcover_fimal_b1(&sc, Params::default(), 0).unwrap();
        let q = sc.q();
        let ne: Vec<_> = non_edges(&inst.graph).collect();
        assert_eq!(ne, vec![(2, q), (3, q)]);
        assert_eq!((inst.b, inst.k), (1, 2));
        let bad = SetCoverInstance::new(vec![vec![0]], 2, 1).unwrap();
        assert!(gen_setcover_fimal_b1(&bad, Params::default(), 0).is_err());
    }
}
