use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use fairlink::experiments::{self, Algorithm, ExperimentRecord, Family};
use fairlink::heuristics::Instance;
use fairlink::{io as fio, Config};

#[derive(Parser)]
#[command(name = "fairlink", version, about = "Fair influence maximization by adding links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated graph and its communities to disk.
    Generate {
        #[arg(long, default_value = "ba200")]
        family: String,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        communities: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run one algorithm on a graph file and evaluate the result.
    Run {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        communities: PathBuf,
        #[arg(long)]
        algo: String,
        #[command(flatten)]
        common: Common,
    },
    /// Compare all edge-addition algorithms on generated instances.
    Experiment1 {
        #[arg(long = "family", default_values_t = ["ba200".to_string(), "blocks500".to_string()])]
        families: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Coverage of the greedy seeder against the edge budget.
    Experiment2 {
        #[arg(long = "family", default_values_t = ["ba200".to_string()])]
        families: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluation-scale parameters instead of the quick desk-scale defaults.
    #[arg(long = "paper-scale")]
    full_scale: bool,
    #[arg(long)]
    eval_samples: Option<usize>,
    /// Extra `key=value` settings, applied last.
    #[arg(long = "set")]
    set: Vec<String>,
}

impl Common {
    fn config(&self) -> anyhow::Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => fio::load_config(p).with_context(|| format!("reading {}", p.display()))?,
            None => Config::default(),
        };
        if self.full_scale {
            cfg = cfg.full_scale();
        }
        if let Some(b) = self.b {
            cfg.b = b;
        }
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(e) = self.eval_samples {
            cfg.eval_samples = e;
        }
        for kv in &self.set {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| fairlink::Error::InvalidParameter(format!("expected key=value, got `{kv}`")))?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    fn emit(&self, rows: &[ExperimentRecord]) -> anyhow::Result<()> {
        match &self.out {
            Some(p) => {
                let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
                experiments::write_csv(rows, f)?;
            }
            None => experiments::write_csv(rows, io::stdout().lock())?,
        }
        Ok(())
    }
}

fn families(names: &[String]) -> anyhow::Result<Vec<Family>> {
    Ok(names.iter().map(|n| n.parse()).collect::<Result<_, _>>()?)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate {
            family,
            index,
            graph,
            communities,
            common,
        } => {
            let cfg = common.config()?;
            let (g, c) = family.parse::<Family>()?.generate(&cfg, index)?;
            fio::save_graph(&g, &graph)?;
            fio::save_communities(&c, &communities)?;
            writeln!(io::stderr(), "wrote {} nodes, {} arcs, {} communities", g.n(), g.arcs().len(), c.m())?;
        }
        Command::Run {
            graph,
            communities,
            algo,
            common,
        } => {
            let cfg = common.config()?;
            let alg: Algorithm = algo.parse()?;
            let g = fio::load_graph(&graph).with_context(|| format!("reading {}", graph.display()))?;
            let c = fio::load_communities(&communities, g.n())
                .with_context(|| format!("reading {}", communities.display()))?;
            let id = graph
                .file_stem()
                .map_or_else(|| "input".to_string(), |s| s.to_string_lossy().into_owned());
            let b = if alg == Algorithm::GrdyIm { 0 } else { cfg.b };
            let mut rows = Vec::new();
            for rep in 0..cfg.repetitions.max(1) {
                let seed = experiments::repetition_seed(cfg.seed, 0, rep);
                let inst = Instance::new(g.clone(), c.clone(), b, cfg.k, cfg.params.clone(), seed)?;
                rows.push(experiments::run_once(alg, &inst, &cfg, &id)?);
            }
            common.emit(&rows)?;
        }
        Command::Experiment1 { families: f, common } => {
            let cfg = common.config()?;
            let rows = experiments::experiment1(&cfg, &families(&f)?)?;
            common.emit(&rows)?;
        }
        Command::Experiment2 { families: f, common } => {
            let cfg = common.config()?;
            let rows = experiments::experiment2(&cfg, &families(&f)?)?;
            common.emit(&rows)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<fairlink::Error>().map(fairlink::Error::root) {
                Some(fairlink::Error::CapExceeded { .. }) => ExitCode::from(3),
                Some(fairlink::Error::Io(_) | fairlink::Error::Csv(_)) | None => ExitCode::from(1),
                Some(_) => ExitCode::from(2),
            }
        }
    }
}
