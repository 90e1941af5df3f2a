//! Line-oriented text formats for graphs, community structures and configs.
//!
//! Graph file:
//!
//! ```text
//! n 4 directed
//! 0 1 0.25
//! 1 2 0.5
//! nonedge 2 0 0.9
//! nonedge-default uniform 17 0 1
//! frozen 3 0
//! ```
//!
//! Arc lines are `u v w`. `nonedge u v w` fixes the weight of one addable
//! pair, `nonedge-default` sets the weight of all other addable pairs
//! (`constant w` or `uniform seed lo hi`), and `frozen u v` removes a pair
//! from the addable set. `#` starts a comment.
//!
//! Community file: one community per line, node ids separated by whitespace.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::graph::{CommunityStructure, Graph, NodeId, NonEdgeDomain, NonEdgeWeights, WeightProvider};

fn strip(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn field<T: FromStr>(tok: Option<&str>, what: &str, line: usize) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {what} `{tok}`"),
    })
}

fn node(tok: Option<&str>, n: usize, line: usize) -> Result<NodeId> {
    let id: u64 = field(tok, "node id", line)?;
    if id >= n as u64 {
        return Err(Error::NodeOutOfRange { id, n }.at_line(line));
    }
    Ok(id as NodeId)
}

fn weight(tok: Option<&str>, line: usize) -> Result<f64> {
    let w: f64 = field(tok, "weight", line)?;
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::WeightOutOfRange(w).at_line(line));
    }
    Ok(w)
}

fn pair(toks: &mut std::str::SplitWhitespace<'_>, n: usize, line: usize) -> Result<(NodeId, NodeId)> {
    let u = node(toks.next(), n, line)?;
    let v = node(toks.next(), n, line)?;
    if u == v {
        return Err(Error::SelfLoop(u).at_line(line));
    }
    Ok((u, v))
}

fn no_trailing(toks: &mut std::str::SplitWhitespace<'_>, line: usize) -> Result<()> {
    match toks.next() {
        Some(t) => Err(Error::Parse {
            line,
            msg: format!("unexpected `{t}`"),
        }),
        None => Ok(()),
    }
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip(l)))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header `n <count> directed`".into(),
    })?;
    let mut h = header.split_whitespace();
    if h.next() != Some("n") {
        return Err(Error::Parse {
            line: hline,
            msg: format!("expected header `n <count> directed`, got `{header}`"),
        });
    }
    let n: usize = field(h.next(), "node count", hline)?;
    if h.next() != Some("directed") {
        return Err(Error::Parse {
            line: hline,
            msg: "header must end with `directed`".into(),
        });
    }
    no_trailing(&mut h, hline)?;

    let mut arcs = Vec::new();
    let mut arc_lines: HashMap<(NodeId, NodeId), usize> = HashMap::new();
    let mut weights = NonEdgeWeights::constant(0.0);
    let mut frozen = BTreeSet::new();
    for (line, text) in lines {
        let mut toks = text.split_whitespace();
        let first = toks.clone().next().unwrap_or("");
        match first {
            "nonedge" => {
                toks.next();
                let p = pair(&mut toks, n, line)?;
                let w = weight(toks.next(), line)?;
                if weights.explicit.insert(p, w).is_some() {
                    return Err(Error::DuplicatePair(p.0, p.1).at_line(line));
                }
            }
            "nonedge-default" => {
                toks.next();
                weights.default = match toks.next() {
                    Some("constant") => WeightProvider::Constant(weight(toks.next(), line)?),
                    Some("uniform") => {
                        let seed = field(toks.next(), "seed", line)?;
                        let lo = weight(toks.next(), line)?;
                        let hi = weight(toks.next(), line)?;
                        if lo > hi {
                            return Err(Error::Parse {
                                line,
                                msg: format!("empty weight range [{lo}, {hi}]"),
                            });
                        }
                        WeightProvider::Uniform { seed, lo, hi }
                    }
                    other => {
                        return Err(Error::Parse {
                            line,
                            msg: format!("unknown non-edge default `{}`", other.unwrap_or("")),
                        })
                    }
                };
            }
            "frozen" => {
                toks.next();
                let p = pair(&mut toks, n, line)?;
                if !frozen.insert(p) {
                    return Err(Error::DuplicatePair(p.0, p.1).at_line(line));
                }
            }
            _ => {
                let p = pair(&mut toks, n, line)?;
                let w = weight(toks.next(), line)?;
                if arc_lines.insert(p, line).is_some() {
                    return Err(Error::DuplicatePair(p.0, p.1).at_line(line));
                }
                arcs.push((p.0, p.1, w));
            }
        }
        no_trailing(&mut toks, line)?;
    }
    for p in frozen.iter().chain(weights.explicit.keys()) {
        if let Some(&line) = arc_lines.get(p) {
            return Err(Error::AlreadyArc(p.0, p.1).at_line(line));
        }
    }
    Graph::from_arcs(n, arcs)?
        .with_non_edge_weights(weights)?
        .with_domain(NonEdgeDomain::Complement { frozen })
}

/// Writes `g`. A restricted addable set is written as the equivalent list
/// of frozen pairs.
pub fn format_graph(g: &Graph) -> String {
    let mut out = format!("n {} directed\n", g.n());
    for (&(u, v), w) in g.arcs().iter().zip(g.arc_weights()) {
        out.push_str(&format!("{u} {v} {w}\n"));
    }
    let ne = g.non_edge_weights();
    match ne.default {
        WeightProvider::Constant(w) => out.push_str(&format!("nonedge-default constant {w}\n")),
        WeightProvider::Uniform { seed, lo, hi } => {
            out.push_str(&format!("nonedge-default uniform {seed} {lo} {hi}\n"))
        }
    }
    let mut explicit: Vec<_> = ne.explicit.iter().collect();
    explicit.sort_by_key(|(p, _)| **p);
    for (&(u, v), w) in explicit {
        out.push_str(&format!("nonedge {u} {v} {w}\n"));
    }
    let frozen: Vec<(NodeId, NodeId)> = match g.domain() {
        NonEdgeDomain::Complement { frozen } => frozen.iter().copied().collect(),
        NonEdgeDomain::Only(allowed) => {
            let n = g.n() as NodeId;
            (0..n)
                .flat_map(|u| (0..n).map(move |v| (u, v)))
                .filter(|&(u, v)| u != v && !g.has_arc(u, v) && !allowed.contains(&(u, v)))
                .collect()
        }
    };
    for (u, v) in frozen {
        out.push_str(&format!("frozen {u} {v}\n"));
    }
    out
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    parse_graph(&fs::read_to_string(path)?)
}

pub fn save_graph(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(format_graph(g).as_bytes())?;
    Ok(())
}

pub fn parse_communities(text: &str, n: usize) -> Result<CommunityStructure> {
    let mut comms = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip(raw);
        if line.is_empty() {
            continue;
        }
        let mut c = Vec::new();
        let mut seen = BTreeSet::new();
        for tok in line.split_whitespace() {
            let v = node(Some(tok), n, i + 1)?;
            if !seen.insert(v) {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("node {v} listed twice"),
                });
            }
            c.push(v);
        }
        comms.push(c);
    }
    CommunityStructure::new(n, comms)
}

pub fn format_communities(c: &CommunityStructure) -> String {
    let mut out = String::new();
    for comm in c.communities() {
        let ids: Vec<String> = comm.iter().map(|v| v.to_string()).collect();
        out.push_str(&ids.join(" "));
        out.push('\n');
    }
    out
}

pub fn load_communities(path: impl AsRef<Path>, n: usize) -> Result<CommunityStructure> {
    parse_communities(&fs::read_to_string(path)?, n)
}

pub fn save_communities(c: &CommunityStructure, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_communities(c))?;
    Ok(())
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Config> {
    Config::parse(&fs::read_to_string(path)?)
}
