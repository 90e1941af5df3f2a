//! Directed weighted graphs with a total weight function over ordered pairs,
//! community structures and edge insertion.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::rng::{derive2, splitmix64, unit_from_hash};

pub type NodeId = u32;
pub type Pair = (NodeId, NodeId);

/// Source of weights for pairs that are not arcs.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightProvider {
    Constant(f64),
    /// i.i.d. uniform in `[lo, hi]`, derived purely from `(seed, u, v)`.
    Uniform { seed: u64, lo: f64, hi: f64 },
}

impl WeightProvider {
    fn get(&self, u: NodeId, v: NodeId) -> f64 {
        match *self {
            WeightProvider::Constant(w) => w,
            WeightProvider::Uniform { seed, lo, hi } => {
                let h = derive2(seed, u as u64, v as u64);
                lo + (hi - lo) * unit_from_hash(h)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonEdgeWeights {
    pub default: WeightProvider,
    pub explicit: HashMap<Pair, f64>,
}

impl NonEdgeWeights {
    pub fn constant(w: f64) -> Self {
        NonEdgeWeights {
            default: WeightProvider::Constant(w),
            explicit: HashMap::new(),
        }
    }

    pub fn uniform(seed: u64, lo: f64, hi: f64) -> Self {
        NonEdgeWeights {
            default: WeightProvider::Uniform { seed, lo, hi },
            explicit: HashMap::new(),
        }
    }

    pub fn get(&self, u: NodeId, v: NodeId) -> f64 {
        match self.explicit.get(&(u, v)) {
            Some(&w) => w,
            None => self.default.get(u, v),
        }
    }
}

impl Default for NonEdgeWeights {
    fn default() -> Self {
        NonEdgeWeights::constant(0.0)
    }
}

/// Which non-arc pairs may be added.
#[derive(Debug, Clone, PartialEq)]
pub enum NonEdgeDomain {
    /// Every pair that is not an arc, except the masked ones. Masked pairs
    /// behave like zero-weight arcs: never live, never addable.
    Complement { frozen: BTreeSet<Pair> },
    /// Only the listed pairs. Everything else behaves as a zero-weight arc.
    Only(BTreeSet<Pair>),
}

impl Default for NonEdgeDomain {
    fn default() -> Self {
        NonEdgeDomain::Complement {
            frozen: BTreeSet::new(),
        }
    }
}

/// Read access to arcs, shared by [`Graph`] and lightweight overlays.
pub trait Topology: Sync {
    fn node_count(&self) -> usize;
    fn arc_count(&self) -> usize;
    fn for_each_out<F: FnMut(NodeId, f64)>(&self, u: NodeId, f: F);
    fn for_each_in<F: FnMut(NodeId, f64)>(&self, v: NodeId, f: F);
    fn for_each_arc<F: FnMut(NodeId, NodeId, f64)>(&self, f: F);
}

#[derive(Debug, Clone)]
pub struct Graph {
    n: usize,
    arcs: Vec<Pair>,
    weights: Vec<f64>,
    lookup: HashMap<Pair, u32>,
    out_offsets: Vec<usize>,
    out_arcs: Vec<(NodeId, f64)>,
    in_offsets: Vec<usize>,
    in_arcs: Vec<(NodeId, f64)>,
    non_edge_weights: NonEdgeWeights,
    domain: NonEdgeDomain,
    fingerprint: u64,
}

fn arc_hash(u: NodeId, v: NodeId, w: f64) -> u64 {
    splitmix64(derive2(w.to_bits(), u as u64, v as u64))
}

fn check_weight(w: f64) -> Result<()> {
    if (0.0..=1.0).contains(&w) {
        Ok(())
    } else {
        Err(Error::WeightOutOfRange(w))
    }
}

fn check_pair(n: usize, u: NodeId, v: NodeId) -> Result<()> {
    for id in [u, v] {
        if id as usize >= n {
            return Err(Error::NodeOutOfRange { id: id as u64, n });
        }
    }
    if u == v {
        return Err(Error::SelfLoop(u));
    }
    Ok(())
}

impl Graph {
    /// Builds a graph from `(source, target, weight)` triples.
    pub fn from_arcs<I>(n: usize, arcs: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let mut pairs = Vec::new();
        let mut weights = Vec::new();
        let mut lookup = HashMap::new();
        for (u, v, w) in arcs {
            check_pair(n, u, v)?;
            check_weight(w)?;
            if lookup.insert((u, v), pairs.len() as u32).is_some() {
                return Err(Error::DuplicatePair(u, v));
            }
            pairs.push((u, v));
            weights.push(w);
        }
        Ok(Self::assemble(
            n,
            pairs,
            weights,
            lookup,
            NonEdgeWeights::default(),
            NonEdgeDomain::default(),
        ))
    }

    /// An arc-less graph on `n` nodes.
    pub fn empty(n: usize) -> Graph {
        Graph::from_arcs(n, std::iter::empty()).expect("empty graph is valid")
    }

    fn assemble(
        n: usize,
        arcs: Vec<Pair>,
        weights: Vec<f64>,
        lookup: HashMap<Pair, u32>,
        non_edge_weights: NonEdgeWeights,
        domain: NonEdgeDomain,
    ) -> Graph {
        let mut out_deg = vec![0usize; n + 1];
        let mut in_deg = vec![0usize; n + 1];
        for &(u, v) in &arcs {
            out_deg[u as usize + 1] += 1;
            in_deg[v as usize + 1] += 1;
        }
        for i in 0..n {
            out_deg[i + 1] += out_deg[i];
            in_deg[i + 1] += in_deg[i];
        }
        let mut out_arcs = vec![(0, 0.0); arcs.len()];
        let mut in_arcs = vec![(0, 0.0); arcs.len()];
        let mut out_fill = out_deg.clone();
        let mut in_fill = in_deg.clone();
        let mut fingerprint = splitmix64(n as u64);
        for (&(u, v), &w) in arcs.iter().zip(&weights) {
            out_arcs[out_fill[u as usize]] = (v, w);
            out_fill[u as usize] += 1;
            in_arcs[in_fill[v as usize]] = (u, w);
            in_fill[v as usize] += 1;
            fingerprint = fingerprint.wrapping_add(arc_hash(u, v, w));
        }
        Graph {
            n,
            arcs,
            weights,
            lookup,
            out_offsets: out_deg,
            out_arcs,
            in_offsets: in_deg,
            in_arcs,
            non_edge_weights,
            domain,
            fingerprint,
        }
    }

    pub fn with_non_edge_weights(mut self, weights: NonEdgeWeights) -> Result<Graph> {
        for (&(u, v), &w) in &weights.explicit {
            check_pair(self.n, u, v)?;
            check_weight(w)?;
        }
        if let WeightProvider::Constant(w) = weights.default {
            check_weight(w)?;
        }
        if let WeightProvider::Uniform { lo, hi, .. } = weights.default {
            check_weight(lo)?;
            check_weight(hi)?;
            if lo > hi {
                return Err(Error::InvalidParameter(format!("weight range [{lo}, {hi}]")));
            }
        }
        self.non_edge_weights = weights;
        Ok(self)
    }

    pub fn with_domain(mut self, domain: NonEdgeDomain) -> Result<Graph> {
        let pairs = match &domain {
            NonEdgeDomain::Complement { frozen } => frozen,
            NonEdgeDomain::Only(allowed) => allowed,
        };
        for &(u, v) in pairs {
            check_pair(self.n, u, v)?;
            if self.has_arc(u, v) {
                return Err(Error::AlreadyArc(u, v));
            }
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[Pair] {
        &self.arcs
    }

    pub fn arc_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn arc_set(&self) -> BTreeSet<Pair> {
        self.arcs.iter().copied().collect()
    }

    pub fn has_arc(&self, u: NodeId, v: NodeId) -> bool {
        self.lookup.contains_key(&(u, v))
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        self.out_offsets[u as usize + 1] - self.out_offsets[u as usize]
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_offsets[v as usize + 1] - self.in_offsets[v as usize]
    }

    pub fn out_neighbors(&self, u: NodeId) -> &[(NodeId, f64)] {
        &self.out_arcs[self.out_offsets[u as usize]..self.out_offsets[u as usize + 1]]
    }

    pub fn in_neighbors(&self, v: NodeId) -> &[(NodeId, f64)] {
        &self.in_arcs[self.in_offsets[v as usize]..self.in_offsets[v as usize + 1]]
    }

    pub fn non_edge_weights(&self) -> &NonEdgeWeights {
        &self.non_edge_weights
    }

    pub fn domain(&self) -> &NonEdgeDomain {
        &self.domain
    }

    /// Order-independent hash of node count, arcs and arc weights.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Fingerprint the graph would have after adding `(u, v)`.
    pub fn fingerprint_with(&self, u: NodeId, v: NodeId) -> u64 {
        self.fingerprint
            .wrapping_add(arc_hash(u, v, self.weight(u, v)))
    }

    fn is_masked(&self, u: NodeId, v: NodeId) -> bool {
        match &self.domain {
            NonEdgeDomain::Complement { frozen } => frozen.contains(&(u, v)),
            NonEdgeDomain::Only(allowed) => !allowed.contains(&(u, v)),
        }
    }

    /// Total weight function. Masked pairs and self-loops weigh 0.
    pub fn weight(&self, u: NodeId, v: NodeId) -> f64 {
        if let Some(&i) = self.lookup.get(&(u, v)) {
            return self.weights[i as usize];
        }
        if u == v || self.is_masked(u, v) {
            return 0.0;
        }
        self.non_edge_weights.get(u, v)
    }

    pub fn is_non_edge(&self, u: NodeId, v: NodeId) -> bool {
        (u as usize) < self.n
            && (v as usize) < self.n
            && u != v
            && !self.has_arc(u, v)
            && !self.is_masked(u, v)
    }

    pub fn non_edge_count(&self) -> usize {
        match &self.domain {
            NonEdgeDomain::Complement { frozen } => {
                self.n * self.n.saturating_sub(1) - self.arcs.len() - frozen.len()
            }
            NonEdgeDomain::Only(allowed) => {
                allowed.iter().filter(|&&(u, v)| !self.has_arc(u, v)).count()
            }
        }
    }

    /// True when every arc weight is 0 or 1.
    pub fn is_deterministic(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0 || w == 1.0)
    }
}

impl Topology for Graph {
    fn node_count(&self) -> usize {
        self.n
    }

    fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    #[inline]
    fn for_each_out<F: FnMut(NodeId, f64)>(&self, u: NodeId, mut f: F) {
        for &(v, w) in self.out_neighbors(u) {
            f(v, w);
        }
    }

    #[inline]
    fn for_each_in<F: FnMut(NodeId, f64)>(&self, v: NodeId, mut f: F) {
        for &(u, w) in self.in_neighbors(v) {
            f(u, w);
        }
    }

    fn for_each_arc<F: FnMut(NodeId, NodeId, f64)>(&self, mut f: F) {
        for (&(u, v), &w) in self.arcs.iter().zip(&self.weights) {
            f(u, v, w);
        }
    }
}

/// A graph plus a short list of extra arcs, without copying the base.
#[derive(Debug, Clone)]
pub struct Augmented<'a> {
    base: &'a Graph,
    extra: Vec<(NodeId, NodeId, f64)>,
}

impl<'a> Augmented<'a> {
    /// Overlays `f` on `g`. `f` must already be validated against `g`.
    pub fn new(base: &'a Graph, edges: &[Pair]) -> Augmented<'a> {
        let extra = edges
            .iter()
            .map(|&(u, v)| (u, v, base.weight(u, v)))
            .collect();
        Augmented { base, extra }
    }

    pub fn base(&self) -> &Graph {
        self.base
    }
}

impl Topology for Augmented<'_> {
    fn node_count(&self) -> usize {
        self.base.n
    }

    fn arc_count(&self) -> usize {
        self.base.arcs.len() + self.extra.len()
    }

    #[inline]
    fn for_each_out<F: FnMut(NodeId, f64)>(&self, u: NodeId, mut f: F) {
        self.base.for_each_out(u, &mut f);
        for &(a, b, w) in &self.extra {
            if a == u {
                f(b, w);
            }
        }
    }

    #[inline]
    fn for_each_in<F: FnMut(NodeId, f64)>(&self, v: NodeId, mut f: F) {
        self.base.for_each_in(v, &mut f);
        for &(a, b, w) in &self.extra {
            if b == v {
                f(a, w);
            }
        }
    }

    fn for_each_arc<F: FnMut(NodeId, NodeId, f64)>(&self, mut f: F) {
        self.base.for_each_arc(&mut f);
        for &(a, b, w) in &self.extra {
            f(a, b, w);
        }
    }
}

/// An ordered set of non-edges with a budget.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeAddition {
    edges: Vec<Pair>,
    budget: usize,
}

impl EdgeAddition {
    pub fn new(budget: usize) -> Self {
        EdgeAddition {
            edges: Vec::new(),
            budget,
        }
    }

    pub fn empty() -> Self {
        Self::new(0)
    }

    pub fn from_edges(edges: Vec<Pair>, budget: usize) -> Result<Self> {
        if edges.len() > budget {
            return Err(Error::BudgetExceeded {
                len: edges.len(),
                budget,
            });
        }
        let mut seen = HashSet::new();
        for &(u, v) in &edges {
            if !seen.insert((u, v)) {
                return Err(Error::DuplicatePair(u, v));
            }
        }
        Ok(EdgeAddition { edges, budget })
    }

    /// Unbounded addition: budget equals the edge count.
    pub fn of(edges: Vec<Pair>) -> Result<Self> {
        let b = edges.len();
        Self::from_edges(edges, b)
    }

    pub fn edges(&self) -> &[Pair] {
        &self.edges
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.edges.len() >= self.budget
    }

    pub fn contains(&self, e: Pair) -> bool {
        self.edges.contains(&e)
    }

    pub fn push(&mut self, e: Pair) -> Result<()> {
        if self.is_full() {
            return Err(Error::BudgetExceeded {
                len: self.edges.len() + 1,
                budget: self.budget,
            });
        }
        if self.contains(e) {
            return Err(Error::DuplicatePair(e.0, e.1));
        }
        self.edges.push(e);
        Ok(())
    }

    /// Checks that every pair is an admissible non-edge of `g`.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let mut seen = HashSet::new();
        for &(u, v) in &self.edges {
            check_pair(g.n, u, v)?;
            if g.has_arc(u, v) {
                return Err(Error::AlreadyArc(u, v));
            }
            if g.is_masked(u, v) {
                return Err(Error::NotNonEdge(u, v));
            }
            if !seen.insert((u, v)) {
                return Err(Error::DuplicatePair(u, v));
            }
        }
        if self.edges.len() > self.budget {
            return Err(Error::BudgetExceeded {
                len: self.edges.len(),
                budget: self.budget,
            });
        }
        Ok(())
    }
}

/// Returns `g` with the pairs of `f` inserted as arcs, weighted by `g`'s
/// total weight function. `g` is left untouched.
pub fn add_edges(g: &Graph, f: &EdgeAddition) -> Result<Graph> {
    f.validate(g)?;
    let mut arcs = g.arcs.clone();
    let mut weights = g.weights.clone();
    let mut lookup = g.lookup.clone();
    for &(u, v) in f.edges() {
        weights.push(g.weight(u, v));
        lookup.insert((u, v), arcs.len() as u32);
        arcs.push((u, v));
    }
    Ok(Graph::assemble(
        g.n,
        arcs,
        weights,
        lookup,
        g.non_edge_weights.clone(),
        g.domain.clone(),
    ))
}

/// Non-edges of `g` in lexicographic order.
pub fn non_edges(g: &Graph) -> Box<dyn Iterator<Item = Pair> + '_> {
    match &g.domain {
        NonEdgeDomain::Complement { .. } => {
            let n = g.n as NodeId;
            Box::new(
                (0..n)
                    .flat_map(move |u| (0..n).map(move |v| (u, v)))
                    .filter(move |&(u, v)| g.is_non_edge(u, v)),
            )
        }
        NonEdgeDomain::Only(allowed) => {
            Box::new(allowed.iter().copied().filter(move |&(u, v)| !g.has_arc(u, v)))
        }
    }
}

/// A list of non-empty, possibly overlapping node sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityStructure {
    communities: Vec<Vec<NodeId>>,
    membership: Vec<Vec<u32>>,
}

impl CommunityStructure {
    pub fn new(n: usize, communities: Vec<Vec<NodeId>>) -> Result<Self> {
        let mut membership = vec![Vec::new(); n];
        let mut cleaned = Vec::with_capacity(communities.len());
        for (i, mut c) in communities.into_iter().enumerate() {
            c.sort_unstable();
            c.dedup();
            if c.is_empty() {
                return Err(Error::EmptyCommunity(i));
            }
            for &v in &c {
                if v as usize >= n {
                    return Err(Error::NodeOutOfRange { id: v as u64, n });
                }
                membership[v as usize].push(i as u32);
            }
            cleaned.push(c);
        }
        Ok(CommunityStructure {
            communities: cleaned,
            membership,
        })
    }

    pub fn m(&self) -> usize {
        self.communities.len()
    }

    pub fn n(&self) -> usize {
        self.membership.len()
    }

    pub fn communities(&self) -> &[Vec<NodeId>] {
        &self.communities
    }

    pub fn get(&self, i: usize) -> &[NodeId] {
        &self.communities[i]
    }

    /// Communities containing `v`.
    pub fn of_node(&self, v: NodeId) -> &[u32] {
        &self.membership[v as usize]
    }

    /// True when some single community holds both nodes.
    pub fn share_community(&self, u: NodeId, v: NodeId) -> bool {
        let (a, b) = (self.of_node(u), self.of_node(v));
        a.iter().any(|c| b.contains(c))
    }

    /// Mean of `per_node` over each community.
    pub fn coverages(&self, per_node: &[f64]) -> Vec<f64> {
        self.communities
            .iter()
            .map(|c| c.iter().map(|&v| per_node[v as usize]).sum::<f64>() / c.len() as f64)
            .collect()
    }
}
