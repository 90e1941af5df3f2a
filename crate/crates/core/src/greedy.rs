//! The randomized greedy influence-maximization oracle, the empirical
//! distribution of its outputs, and coverage estimation under it.

use std::collections::BTreeMap;

use crate::config::{hoeffding_count, IndexMode, Params, ThetaPolicy};
use crate::diffusion::Evaluator;
use crate::error::{Error, Result};
use crate::graph::{add_edges, Augmented, CommunityStructure, EdgeAddition, Graph, NodeId, Pair};
use crate::par::{self, Exec};
use crate::rng;
use crate::rrset::{build_rr_index, greedy_max_coverage, RRIndex};

/// Something that proposes a seed set of size at most `k` for a graph.
pub trait SeedingOracle: Sync {
    fn seeds(&self, g: &Graph, k: usize, seed: u64) -> Result<Vec<NodeId>>;
}

/// Greedy max coverage over a freshly sampled RR index.
#[derive(Debug, Clone)]
pub struct RrGreedy {
    pub theta: ThetaPolicy,
    pub exec: Exec,
}

impl SeedingOracle for RrGreedy {
    fn seeds(&self, g: &Graph, k: usize, seed: u64) -> Result<Vec<NodeId>> {
        let idx = build_rr_index(g, k, &self.theta, seed, self.exec)?;
        Ok(greedy_max_coverage(&idx, k).0)
    }
}

/// Chooses one of several oracles by prior likelihood, then asks it.
pub struct Mixture {
    oracles: Vec<(f64, Box<dyn SeedingOracle>)>,
}

impl Mixture {
    pub fn new(oracles: Vec<(f64, Box<dyn SeedingOracle>)>) -> Result<Self> {
        let total: f64 = oracles.iter().map(|(p, _)| *p).sum();
        if oracles.is_empty() || oracles.iter().any(|(p, _)| *p < 0.0) || (total - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidParameter(
                "mixture priors must be non-negative and sum to 1".into(),
            ));
        }
        Ok(Mixture { oracles })
    }
}

impl SeedingOracle for Mixture {
    fn seeds(&self, g: &Graph, k: usize, seed: u64) -> Result<Vec<NodeId>> {
        let x = rng::unit_from_hash(rng::derive(seed, 0xA11CE));
        let mut acc = 0.0;
        for (p, oracle) in &self.oracles {
            acc += p;
            if x < acc {
                return oracle.seeds(g, k, rng::derive(seed, 1));
            }
        }
        let (_, last) = self.oracles.last().expect("non-empty");
        last.seeds(g, k, rng::derive(seed, 1))
    }
}

/// Empirical distribution over seed sets from repeated greedy runs. Sets are
/// stored sorted; support order is lexicographic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedDistribution {
    support: Vec<(Vec<NodeId>, u32)>,
    runs: usize,
    k: usize,
    fingerprint: u64,
}

impl SeedDistribution {
    pub fn from_runs(outcomes: Vec<Vec<NodeId>>, k: usize, fingerprint: u64) -> Self {
        let runs = outcomes.len();
        let mut counts: BTreeMap<Vec<NodeId>, u32> = BTreeMap::new();
        for mut s in outcomes {
            s.sort_unstable();
            *counts.entry(s).or_default() += 1;
        }
        SeedDistribution {
            support: counts.into_iter().collect(),
            runs,
            k,
            fingerprint,
        }
    }

    /// Seed sets with their multiplicities.
    pub fn support(&self) -> &[(Vec<NodeId>, u32)] {
        &self.support
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn probability(&self, set: &[NodeId]) -> f64 {
        let mut s = set.to_vec();
        s.sort_unstable();
        self.support
            .iter()
            .find(|(x, _)| *x == s)
            .map_or(0.0, |(_, c)| *c as f64 / self.runs as f64)
    }

    /// Multiplicity with which each node appears in a seed set.
    pub fn node_counts(&self, n: usize) -> Vec<u32> {
        let mut c = vec![0u32; n];
        for (s, m) in &self.support {
            for &v in s {
                c[v as usize] += m;
            }
        }
        c
    }

    /// `Pr[v in S]` for every node.
    pub fn node_probabilities(&self, n: usize) -> Vec<f64> {
        self.node_counts(n)
            .into_iter()
            .map(|c| c as f64 / self.runs as f64)
            .collect()
    }

    /// Union of all support sets, sorted.
    pub fn union(&self) -> Vec<NodeId> {
        let mut u: Vec<NodeId> = self.support.iter().flat_map(|(s, _)| s.iter().copied()).collect();
        u.sort_unstable();
        u.dedup();
        u
    }
}

/// One greedy run on `g` with `f` added.
pub fn run_greedy(
    g: &Graph,
    f: &EdgeAddition,
    k: usize,
    theta: &ThetaPolicy,
    seed: u64,
    exec: Exec,
) -> Result<Vec<NodeId>> {
    let h = add_edges(g, f)?;
    RrGreedy {
        theta: *theta,
        exec,
    }
    .seeds(&h, k, seed)
}

/// `runs` independent oracle calls on `g` with `f` added.
pub fn sample_seed_distribution_with<O: SeedingOracle + ?Sized>(
    oracle: &O,
    g: &Graph,
    f: &EdgeAddition,
    k: usize,
    runs: usize,
    seed: u64,
    exec: Exec,
) -> Result<SeedDistribution> {
    if runs == 0 {
        return Err(Error::InvalidParameter("run count must be >= 1".into()));
    }
    let h = add_edges(g, f)?;
    let outcomes = par::map_indexed(exec, runs, |i| oracle.seeds(&h, k, rng::derive(seed, i as u64)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(SeedDistribution::from_runs(outcomes, k, h.fingerprint()))
}

pub fn sample_seed_distribution(
    g: &Graph,
    f: &EdgeAddition,
    k: usize,
    runs: usize,
    theta: &ThetaPolicy,
    seed: u64,
    exec: Exec,
) -> Result<SeedDistribution> {
    // Runs fan out; each index is then built sequentially.
    let oracle = RrGreedy {
        theta: *theta,
        exec: Exec::Sequential,
    };
    sample_seed_distribution_with(&oracle, g, f, k, runs, seed, exec)
}

/// Estimated expected community coverages under the greedy seeder.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub f: Vec<f64>,
    pub tau: f64,
    pub eps: f64,
    pub delta: f64,
    pub runs: usize,
    pub samples: usize,
}

impl CoverageReport {
    pub fn from_coverages(f: Vec<f64>, eps: f64, delta: f64, runs: usize, samples: usize) -> Self {
        let tau = f.iter().copied().fold(f64::INFINITY, f64::min);
        CoverageReport {
            tau: if f.is_empty() { 0.0 } else { tau },
            f,
            eps,
            delta,
            runs,
            samples,
        }
    }

    pub fn argmin(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &x) in self.f.iter().enumerate() {
            if best.is_none_or(|b| x < self.f[b]) {
                best = Some(i);
            }
        }
        best
    }
}

/// Knobs for [`estimate_fc`].
#[derive(Debug, Clone)]
pub struct FcOptions {
    pub c: f64,
    pub theta: ThetaPolicy,
    pub exec: Exec,
    /// Overrides for the Hoeffding-derived run and sample counts.
    pub runs: Option<usize>,
    pub samples: Option<usize>,
}

impl FcOptions {
    pub fn from_params(p: &Params) -> Self {
        FcOptions {
            c: p.hoeffding_c,
            theta: p.theta,
            exec: p.exec,
            runs: None,
            samples: None,
        }
    }
}

/// Estimates `E_{S ~ p(F,k)}[sigma_C(S, F)]` for every community. The greedy
/// run count and the live-edge sample count both follow
/// `ceil(c eps^-2 ln(2 n m / delta))`, which bounds each half of the error by
/// `eps / 2` with probability `1 - delta / 2` for `c >= 2`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_fc(
    g: &Graph,
    comms: &CommunityStructure,
    f: &EdgeAddition,
    k: usize,
    eps: f64,
    delta: f64,
    opts: &FcOptions,
    seed: u64,
) -> Result<CoverageReport> {
    if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter("eps and delta must lie in (0, 1)".into()));
    }
    let count = hoeffding_count(opts.c, eps, delta, g.n(), comms.m());
    let runs = opts.runs.unwrap_or(count);
    let samples = opts.samples.unwrap_or(count);
    let dist = sample_seed_distribution(
        g,
        f,
        k,
        runs,
        &opts.theta,
        rng::derive(seed, 1),
        opts.exec,
    )?;
    let view = Augmented::new(g, f.edges());
    let counts = Evaluator {
        samples,
        exec: opts.exec,
    }
    .mixture(&view, dist.support(), rng::derive(seed, 2));
    Ok(CoverageReport::from_coverages(
        counts.per_community(comms),
        eps,
        delta,
        runs,
        samples,
    ))
}

/// Keeps the greedy seeder's RR indices across heuristic iterations.
/// In incremental mode there is one index per greedy run, each updated in
/// place when an edge is added; in fresh mode indices are resampled per call.
pub struct GreedyPool {
    mode: IndexMode,
    theta: ThetaPolicy,
    k: usize,
    runs: usize,
    seed: u64,
    exec: Exec,
    indices: Vec<RRIndex>,
    added: usize,
}

impl GreedyPool {
    pub fn new(params: &Params, k: usize, runs: usize, seed: u64) -> Self {
        GreedyPool {
            mode: params.index_mode,
            theta: params.theta,
            k,
            runs,
            seed,
            exec: params.exec,
            indices: Vec::new(),
            added: 0,
        }
    }

    /// Seed distribution on `current`, the base graph with all edges added
    /// so far.
    pub fn distribution(&mut self, current: &Graph) -> Result<SeedDistribution> {
        match self.mode {
            IndexMode::Fresh => {
                let stream = rng::derive(self.seed, self.added as u64);
                sample_seed_distribution(
                    current,
                    &EdgeAddition::empty(),
                    self.k,
                    self.runs,
                    &self.theta,
                    stream,
                    self.exec,
                )
            }
            IndexMode::Incremental => {
                if self.indices.is_empty() {
                    let (theta, k, seed) = (self.theta, self.k, self.seed);
                    self.indices = par::map_indexed(self.exec, self.runs, |i| {
                        build_rr_index(current, k, &theta, rng::derive(seed, i as u64), Exec::Sequential)
                    })
                    .into_iter()
                    .collect::<Result<_>>()?;
                }
                let k = self.k;
                let outcomes = par::map_slice(self.exec, &self.indices, |idx| {
                    greedy_max_coverage(idx, k).0
                });
                Ok(SeedDistribution::from_runs(outcomes, k, current.fingerprint()))
            }
        }
    }

    /// Records that `e` is about to be added to `current`.
    pub fn edge_added(&mut self, current: &Graph, e: Pair) -> Result<()> {
        self.added += 1;
        if self.mode == IndexMode::Incremental && !self.indices.is_empty() {
            let stream = rng::derive2(self.seed, u64::MAX, self.added as u64);
            let mut results: Vec<Result<()>> = (0..self.indices.len()).map(|_| Ok(())).collect();
            let mut work: Vec<_> = self.indices.iter_mut().zip(results.iter_mut()).collect();
            par::for_each_mut(self.exec, &mut work, |i, (idx, res)| {
                let mut r = rng::stream(stream, i as u64);
                **res = idx.apply_edge(current, e, &mut r);
            });
            if let Some(err) = results.into_iter().find_map(|r| r.err()) {
                // A half-updated pool is unusable; rebuild on the next call.
                self.indices.clear();
                return Err(err);
            }
        }
        Ok(())
    }
}
