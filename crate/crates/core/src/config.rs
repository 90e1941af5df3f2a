//! Run parameters and the `key=value` configuration format.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::par::Exec;

/// How many RR sets an index holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaPolicy {
    Fixed(usize),
    /// TIM-style bound `8 n (k ln n + ln(2/delta)) / (eps^2 KPT)` with a
    /// sampled KPT lower bound, clamped to `max`.
    Tim { eps: f64, delta: f64, max: usize },
}

impl fmt::Display for ThetaPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaPolicy::Fixed(t) => write!(f, "{t}"),
            ThetaPolicy::Tim { eps, delta, max } => write!(f, "tim:{eps}:{delta}:{max}"),
        }
    }
}

impl FromStr for ThetaPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("theta policy `{s}`"));
        if let Some(rest) = s.strip_prefix("tim") {
            let parts: Vec<&str> = rest.split(':').filter(|p| !p.is_empty()).collect();
            let num = |i: usize, d: f64| -> Result<f64> {
                parts.get(i).map_or(Ok(d), |p| p.parse().map_err(|_| bad()))
            };
            let max = match parts.get(2) {
                Some(p) => p.parse().map_err(|_| bad())?,
                None => 1_000_000,
            };
            return Ok(ThetaPolicy::Tim {
                eps: num(0, 0.1)?,
                delta: num(1, 0.1)?,
                max,
            });
        }
        s.parse().map(ThetaPolicy::Fixed).map_err(|_| bad())
    }
}

/// Whether the RR indices behind the greedy seeder are rebuilt at every
/// heuristic iteration or updated in place after each added edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexMode {
    Fresh,
    Incremental,
}

impl FromStr for IndexMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fresh" => Ok(IndexMode::Fresh),
            "incremental" => Ok(IndexMode::Incremental),
            _ => Err(Error::InvalidParameter(format!("index mode `{s}`"))),
        }
    }
}

impl fmt::Display for IndexMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexMode::Fresh => "fresh",
            IndexMode::Incremental => "incremental",
        })
    }
}

/// Estimation parameters shared by the seeder, the heuristics and the solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub eps: f64,
    pub delta: f64,
    /// Greedy runs per estimate of the seed distribution. `None` uses the
    /// Hoeffding count.
    pub runs: Option<usize>,
    pub hoeffding_c: f64,
    pub theta: ThetaPolicy,
    /// Live-edge graphs per coverage estimate inside the heuristics.
    pub mc_samples: usize,
    pub index_mode: IndexMode,
    pub pruning: bool,
    pub enumeration_cap: usize,
    pub subset_cap: u128,
    pub exec: Exec,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            eps: 0.1,
            delta: 0.1,
            runs: Some(10),
            hoeffding_c: 2.0,
            theta: ThetaPolicy::Fixed(10_000),
            mc_samples: 100,
            index_mode: IndexMode::Incremental,
            pruning: true,
            enumeration_cap: crate::diffusion::ENUMERATION_CAP,
            subset_cap: 1_000_000,
            exec: Exec::default(),
        }
    }
}

/// `ceil(c * eps^-2 * ln(2 n m / delta))`.
pub fn hoeffding_count(c: f64, eps: f64, delta: f64, n: usize, m: usize) -> usize {
    let arg = 2.0 * n.max(1) as f64 * m.max(1) as f64 / delta;
    (c * arg.ln() / (eps * eps)).ceil().max(1.0) as usize
}

impl Params {
    pub fn runs_for(&self, n: usize, m: usize) -> usize {
        self.runs
            .unwrap_or_else(|| hoeffding_count(self.hoeffding_c, self.eps, self.delta, n, m))
    }
}

/// Everything a CLI run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub seed: u64,
    pub k: usize,
    pub b: usize,
    pub params: Params,
    /// Live-edge graphs for the final evaluation.
    pub eval_samples: usize,
    /// Greedy runs for the final evaluation's seed distribution.
    pub eval_runs: usize,
    pub edge_weights: (f64, f64),
    pub nonedge_weights: (f64, f64),
    pub repetitions: usize,
    pub graphs: usize,
    pub b_grid: Vec<usize>,
    /// Selection runs per timing; the minimum wall-clock time is reported.
    pub timing_trials: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 1,
            k: 25,
            b: 10,
            params: Params::default(),
            eval_samples: 100,
            eval_runs: 10,
            edge_weights: (0.0, 0.4),
            nonedge_weights: (0.0, 1.0),
            repetitions: 5,
            graphs: 5,
            b_grid: vec![0, 10, 20, 50],
            timing_trials: 1,
        }
    }
}

fn parse_range(v: &str) -> Option<(f64, f64)> {
    let (a, b) = v.split_once(',').or_else(|| v.split_once(':'))?;
    let (lo, hi) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
    (0.0 <= lo && lo <= hi && hi <= 1.0).then_some((lo, hi))
}

impl Config {
    /// The evaluation-scale settings: eps = delta = 0.1, TIM-sized indices,
    /// Hoeffding-many greedy runs and freshly sampled indices.
    pub fn full_scale(mut self) -> Self {
        self.params.eps = 0.1;
        self.params.delta = 0.1;
        self.params.theta = ThetaPolicy::Tim {
            eps: 0.1,
            delta: 0.1,
            max: 1_000_000,
        };
        self.params.runs = None;
        self.params.index_mode = IndexMode::Fresh;
        self.eval_samples = 100;
        self
    }

    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
            cfg.set(key.trim(), value.trim()).map_err(|e| err(e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse `{v}`")))
        }
        let unit = |key: &str, v: &str| -> Result<f64> {
            let x: f64 = num(key, v)?;
            if x > 0.0 && x < 1.0 {
                Ok(x)
            } else {
                Err(Error::InvalidParameter(format!("{key} must lie in (0, 1)")))
            }
        };
        let p = &mut self.params;
        match key {
            "seed" => self.seed = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "b" => self.b = num(key, value)?,
            "eps" => p.eps = unit(key, value)?,
            "delta" => p.delta = unit(key, value)?,
            "N" | "runs" => {
                p.runs = match value {
                    "hoeffding" | "auto" => None,
                    v => Some(num(key, v)?),
                }
            }
            "hoeffding_c" => p.hoeffding_c = num(key, value)?,
            "theta" => p.theta = value.parse()?,
            "mc_samples" => p.mc_samples = num(key, value)?,
            "index_mode" => p.index_mode = value.parse()?,
            "pruning" => p.pruning = num(key, value)?,
            "enumeration_cap" => p.enumeration_cap = num(key, value)?,
            "subset_cap" => p.subset_cap = num(key, value)?,
            "eval_samples" => self.eval_samples = num(key, value)?,
            "eval_runs" => self.eval_runs = num(key, value)?,
            "repetitions" => self.repetitions = num(key, value)?,
            "graphs" => self.graphs = num(key, value)?,
            "timing_trials" => self.timing_trials = num::<usize>(key, value)?.max(1),
            "edge_weights" => {
                self.edge_weights = parse_range(value)
                    .ok_or_else(|| Error::InvalidParameter(format!("edge_weights `{value}`")))?
            }
            "nonedge_weights" => {
                self.nonedge_weights = parse_range(value)
                    .ok_or_else(|| Error::InvalidParameter(format!("nonedge_weights `{value}`")))?
            }
            "b_grid" => {
                self.b_grid = value
                    .split(',')
                    .map(|x| num(key, x.trim()))
                    .collect::<Result<_>>()?
            }
            _ => return Err(Error::InvalidParameter(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let runs = p.runs.map_or("hoeffding".to_string(), |r| r.to_string());
        let grid: Vec<String> = self.b_grid.iter().map(|b| b.to_string()).collect();
        format!(
            "seed={}\nk={}\nb={}\neps={}\ndelta={}\nN={}\nhoeffding_c={}\ntheta={}\n\
             mc_samples={}\nindex_mode={}\npruning={}\nenumeration_cap={}\nsubset_cap={}\n\
             eval_samples={}\neval_runs={}\nrepetitions={}\ngraphs={}\n\
             edge_weights={},{}\nnonedge_weights={},{}\nb_grid={}\ntiming_trials={}\n",
            self.seed,
            self.k,
            self.b,
            p.eps,
            p.delta,
            runs,
            p.hoeffding_c,
            p.theta,
            p.mc_samples,
            p.index_mode,
            p.pruning,
            p.enumeration_cap,
            p.subset_cap,
            self.eval_samples,
            self.eval_runs,
            self.repetitions,
            self.graphs,
            self.edge_weights.0,
            self.edge_weights.1,
            self.nonedge_weights.0,
            self.nonedge_weights.1,
            grid.join(","),
            self.timing_trials,
        )
    }
}
