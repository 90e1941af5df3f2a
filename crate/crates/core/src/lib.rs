//! Fair influence maximization by adding links.
//!
//! A network owner adds at most `b` non-edges to a directed graph so that an
//! efficiency-oriented spreader, who seeds `k` nodes with the greedy
//! influence-maximization algorithm, ends up reaching every community fairly.
//! The crate provides Independent Cascade spread estimation, reverse-reachable
//! set based greedy seeding with incremental updates after edge insertion,
//! edge-addition heuristics and baselines, brute-force solvers for small
//! instances, instance generators and an experiment harness.

pub mod config;
pub mod diffusion;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod generators;
pub mod graph;
pub mod greedy;
pub mod heuristics;
pub mod io;
pub mod par;
pub mod rng;
pub mod rrset;

pub use crate::config::{Config, IndexMode, ThetaPolicy};
pub use crate::diffusion::{
    estimate_spread, exact_spread_enumerate, reachable, sample_live_edge_graph, Evaluator,
    LiveEdgeGraph, SpreadEstimate,
};
pub use crate::error::{Error, Result};
pub use crate::graph::{
    add_edges, non_edges, CommunityStructure, EdgeAddition, Graph, NodeId, NonEdgeWeights,
    Topology,
};
pub use crate::greedy::{CoverageReport, SeedDistribution};
pub use crate::rrset::{RRIndex, RRSet};
pub use crate::heuristics::{HeuristicTrace, Instance};
