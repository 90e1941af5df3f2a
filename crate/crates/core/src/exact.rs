//! Brute-force solvers for small instances: maximizer enumeration, the
//! worst-case-over-maximizers objective on deterministic graphs, and the
//! constant-budget solvers against the greedy seeder.

use fixedbitset::FixedBitSet;

use crate::diffusion::{exact_node_probabilities, Traversal};
use crate::error::{Error, Result};
use crate::graph::{add_edges, non_edges, Augmented, CommunityStructure, EdgeAddition, Graph, NodeId, Pair};
use crate::greedy::{estimate_fc, FcOptions};
use crate::heuristics::Instance;
use crate::par;
use crate::rng::{self, label};

/// Calls `f` on every `size`-subset of `0..len` in lexicographic order.
/// Stops early when `f` returns false.
pub fn for_each_combination<F: FnMut(&[usize]) -> bool>(len: usize, size: usize, mut f: F) {
    if size > len {
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let mut i = size;
        while i > 0 && idx[i - 1] == len - size + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// Number of subsets of an `n`-set with size in `lo..=hi`, saturating.
pub fn subset_count(n: usize, lo: usize, hi: usize) -> u128 {
    (lo..=hi.min(n))
        .map(|i| binomial(n as u128, i as u128))
        .fold(0u128, |a, b| a.saturating_add(b))
}

fn check_cap(what: &'static str, size: u128, cap: u128) -> Result<()> {
    if size > cap {
        Err(Error::CapExceeded { what, size, cap })
    } else {
        Ok(())
    }
}

/// Forward reach of every node through weight-1 arcs.
pub fn deterministic_reach(g: &Graph) -> Vec<FixedBitSet> {
    let n = g.n();
    let mut t = Traversal::new(n);
    (0..n as NodeId)
        .map(|v| {
            let mut bits = FixedBitSet::with_capacity(n);
            for &x in t.run(g, &[v], |_, _, w| w >= 1.0) {
                bits.insert(x as usize);
            }
            bits
        })
        .collect()
}

fn union_of(reach: &[FixedBitSet], seeds: &[NodeId], n: usize) -> FixedBitSet {
    let mut bits = FixedBitSet::with_capacity(n);
    for &s in seeds {
        bits.union_with(&reach[s as usize]);
    }
    bits
}

fn det_coverages(reached: &FixedBitSet, comms: &CommunityStructure) -> Vec<f64> {
    comms
        .communities()
        .iter()
        .map(|c| c.iter().filter(|&&v| reached.contains(v as usize)).count() as f64 / c.len() as f64)
        .collect()
}

fn min_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

/// True when every arc and every addable pair has weight 0 or 1.
pub fn is_deterministic_instance(g: &Graph) -> bool {
    g.is_deterministic() && non_edges(g).all(|(u, v)| matches!(g.weight(u, v), w if w == 0.0 || w == 1.0))
}

/// All seed sets of size `1..=k` with maximum exact spread on `g` plus `f`,
/// in (size, lexicographic) order.
pub fn enumerate_maximizers(
    g: &Graph,
    f: &EdgeAddition,
    k: usize,
    enumeration_cap: usize,
    subset_cap: u128,
) -> Result<Vec<Vec<NodeId>>> {
    let h = add_edges(g, f)?;
    let n = h.n();
    check_cap("seed sets", subset_count(n, 1, k), subset_cap)?;
    let mut best: Vec<Vec<NodeId>> = Vec::new();
    if h.is_deterministic() {
        let reach = deterministic_reach(&h);
        let mut top = 0usize;
        for size in 1..=k.min(n) {
            for_each_combination(n, size, |idx| {
                let s: Vec<NodeId> = idx.iter().map(|&i| i as NodeId).collect();
                let spread = union_of(&reach, &s, n).count_ones(..);
                if spread > top {
                    top = spread;
                    best.clear();
                }
                if spread == top {
                    best.push(s);
                }
                true
            });
        }
    } else {
        let view = Augmented::new(g, f.edges());
        let mut top = f64::NEG_INFINITY;
        let mut failure = None;
        for size in 1..=k.min(n) {
            for_each_combination(n, size, |idx| {
                let s: Vec<NodeId> = idx.iter().map(|&i| i as NodeId).collect();
                match exact_node_probabilities(&view, &s, enumeration_cap) {
                    Ok(p) => {
                        let spread: f64 = p.iter().sum();
                        if spread > top + 1e-9 {
                            top = spread;
                            best.clear();
                        }
                        if (spread - top).abs() <= 1e-9 {
                            best.push(s);
                        }
                        true
                    }
                    Err(e) => {
                        failure = Some(e);
                        false
                    }
                }
            });
            if let Some(e) = failure.take() {
                return Err(e);
            }
        }
    }
    Ok(best)
}

/// Greedy on exact deterministic spread: `min(k, n)` picks, each of maximum
/// marginal gain, ties to the smallest id.
pub fn deterministic_greedy(g: &Graph, k: usize) -> Vec<NodeId> {
    let n = g.n();
    let reach = deterministic_reach(g);
    let mut covered = FixedBitSet::with_capacity(n);
    let mut chosen = FixedBitSet::with_capacity(n);
    let mut seeds = Vec::new();
    for _ in 0..k.min(n) {
        let mut best: Option<(usize, usize)> = None;
        for v in 0..n {
            if chosen.contains(v) {
                continue;
            }
            let gain = reach[v].difference(&covered).count();
            if best.is_none_or(|(b, _)| gain > b) {
                best = Some((gain, v));
            }
        }
        let (_, v) = best.expect("fewer than n picks so far");
        chosen.insert(v);
        covered.union_with(&reach[v]);
        seeds.push(v as NodeId);
    }
    seeds.sort_unstable();
    seeds
}

/// `min_C sigma_C(S_F, F)` for the deterministic greedy seed set `S_F`.
pub fn fimalg_det_value(
    g: &Graph,
    comms: &CommunityStructure,
    f: &EdgeAddition,
    k: usize,
) -> Result<(f64, Vec<NodeId>)> {
    let h = add_edges(g, f)?;
    if !h.is_deterministic() {
        return Err(Error::NotDeterministic);
    }
    let seeds = deterministic_greedy(&h, k);
    let reached = union_of(&deterministic_reach(&h), &seeds, h.n());
    Ok((min_of(&det_coverages(&reached, comms)), seeds))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    Deterministic,
    EpsApprox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveRecord {
    pub f: Vec<Pair>,
    pub tau: f64,
    /// Seed sets behind `tau`: maximizers, the greedy output, or the leading
    /// support sets of the estimated distribution.
    pub witnesses: Vec<Vec<NodeId>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub best: EdgeAddition,
    pub tau: f64,
    pub evaluated: usize,
    pub records: Vec<SolveRecord>,
    pub mode: SolveMode,
}

/// Every edge set of size at most `b`, by size then lexicographically.
fn edge_families(inst: &Instance) -> Result<Vec<Vec<Pair>>> {
    let candidates: Vec<Pair> = non_edges(&inst.graph).collect();
    let b = inst.b.min(candidates.len());
    check_cap(
        "edge sets",
        subset_count(candidates.len(), 0, b),
        inst.params.subset_cap,
    )?;
    let mut out = Vec::new();
    for size in 0..=b {
        for_each_combination(candidates.len(), size, |idx| {
            out.push(idx.iter().map(|&i| candidates[i]).collect());
            true
        });
    }
    Ok(out)
}

fn assemble(inst: &Instance, records: Vec<SolveRecord>, mode: SolveMode) -> Result<SolveReport> {
    let mut best = 0;
    for (i, r) in records.iter().enumerate() {
        if r.tau > records[best].tau {
            best = i;
        }
    }
    Ok(SolveReport {
        best: EdgeAddition::from_edges(records[best].f.clone(), inst.b)?,
        tau: records[best].tau,
        evaluated: records.len(),
        records,
        mode,
    })
}

/// Exhaustive solver for the worst case over all maximizers. Deterministic
/// instances only.
pub fn solve_fimal_bruteforce(inst: &Instance) -> Result<SolveReport> {
    if !is_deterministic_instance(&inst.graph) {
        return Err(Error::NotDeterministic);
    }
    let n = inst.graph.n();
    check_cap("seed sets", subset_count(n, 1, inst.k), inst.params.subset_cap)?;
    let families = edge_families(inst)?;
    let records = par::map_slice(inst.params.exec, &families, |f| -> Result<SolveRecord> {
        let fa = EdgeAddition::of(f.clone())?;
        let h = add_edges(&inst.graph, &fa)?;
        let reach = deterministic_reach(&h);
        let maximizers = enumerate_maximizers(
            &inst.graph,
            &fa,
            inst.k,
            inst.params.enumeration_cap,
            inst.params.subset_cap,
        )?;
        let tau = maximizers
            .iter()
            .map(|s| min_of(&det_coverages(&union_of(&reach, s, n), &inst.communities)))
            .fold(f64::INFINITY, f64::min);
        Ok(SolveRecord {
            f: f.clone(),
            tau,
            witnesses: maximizers,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    assemble(inst, records, SolveMode::Deterministic)
}

/// Exhaustive solver against the deterministic greedy seeder.
pub fn solve_fimalg_det(inst: &Instance) -> Result<SolveReport> {
    if !is_deterministic_instance(&inst.graph) {
        return Err(Error::NotDeterministic);
    }
    let families = edge_families(inst)?;
    let records = par::map_slice(inst.params.exec, &families, |f| -> Result<SolveRecord> {
        let (tau, seeds) =
            fimalg_det_value(&inst.graph, &inst.communities, &EdgeAddition::of(f.clone())?, inst.k)?;
        Ok(SolveRecord {
            f: f.clone(),
            tau,
            witnesses: vec![seeds],
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    assemble(inst, records, SolveMode::Deterministic)
}

/// Exhaustive solver against the randomized greedy seeder. Each edge set's
/// coverages are estimated to within `eps / 2`, with the failure
/// probability `delta` split evenly over the edge sets.
pub fn solve_fimalg_eps(inst: &Instance, eps: f64, delta: f64) -> Result<SolveReport> {
    let families = edge_families(inst)?;
    let per_f_delta = delta / families.len() as f64;
    let opts = FcOptions::from_params(&inst.params);
    let seed = rng::derive(inst.seed, label::ALGORITHM);
    let records = par::map_slice(inst.params.exec, &families, |f| -> Result<SolveRecord> {
        let fa = EdgeAddition::of(f.clone())?;
        let report = estimate_fc(
            &inst.graph,
            &inst.communities,
            &fa,
            inst.k,
            eps / 2.0,
            per_f_delta,
            &opts,
            seed,
        )?;
        Ok(SolveRecord {
            f: f.clone(),
            tau: report.tau,
            witnesses: Vec::new(),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    assemble(inst, records, SolveMode::EpsApprox)
}
