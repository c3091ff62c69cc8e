//! Loading observations and enumerating candidate cliques.

use std::fs;
use std::io::BufReader;

use anyhow::Context;
use radon_core::combinat::{rank_kset, KSet};
use radon_core::netio::{self, Graph, Observations, PlantedSpec};
use radon_core::radon::DEFAULT_ENUMERATION_CAP;

use crate::config::{usage, Format, Preset, RunConfig};

/// Observations with the graph they came from when there is one.
pub struct Loaded {
    pub observations: Observations,
    pub graph: Option<Graph>,
}

impl Loaded {
    pub fn n(&self) -> usize {
        self.observations.n
    }

    pub fn label(&self, node: usize) -> String {
        self.graph.as_ref().map_or_else(|| node.to_string(), |g| g.label(node))
    }
}

pub fn load(cfg: &RunConfig) -> anyhow::Result<Loaded> {
    let mut loaded = match (&cfg.input, cfg.preset) {
        (Some(path), _) => match cfg.format {
            Format::Edgelist => {
                let file = fs::File::open(path).with_context(|| format!("opening {path}"))?;
                graph_observations(netio::load_edge_list(BufReader::new(file))?, cfg.j)?
            }
            Format::Gml => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
                graph_observations(netio::load_gml(&text)?, cfg.j)?
            }
            Format::Ballots => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
                let ballots = parse_ballots(&text)?;
                let n = ballots.iter().filter_map(KSet::max_element).max().map_or(0, |m| m + 1);
                let counts = netio::count_jsets(&ballots, cfg.j, n)?;
                if counts.skipped > 0 {
                    log::warn!("{} ballots shorter than j were skipped", counts.skipped);
                }
                let graph = if cfg.j == 2 { Some(netio::devectorize(&counts.observations)?) } else { None };
                Loaded { observations: counts.observations, graph }
            }
        },
        (None, Some(Preset::Basketball)) => {
            if cfg.j != 2 {
                return Err(usage("the basketball preset has j = 2"));
            }
            let (obs, _) = netio::basketball_preset().generate(0.0, cfg.seed)?;
            let graph = netio::devectorize(&obs)?;
            Loaded { observations: obs, graph: Some(graph) }
        }
        (None, None) => return Err(usage("need --input or --preset")),
    };
    if let Some(top) = cfg.top_nodes {
        let graph = loaded.graph.as_ref().ok_or_else(|| usage("--top-nodes needs graph input"))?;
        if top == 0 || top > graph.n() {
            return Err(usage(format!("--top-nodes must be in 1..={}", graph.n())));
        }
        let keep = graph.top_by_weighted_degree(top);
        loaded = graph_observations(graph.induced_subgraph(&keep)?, cfg.j)?;
    }
    Ok(loaded)
}

fn graph_observations(graph: Graph, j: usize) -> anyhow::Result<Loaded> {
    if j != 2 {
        return Err(usage("graph input observes pairs; use --j 2 or ballot input"));
    }
    Ok(Loaded { observations: netio::vectorize(&graph), graph: Some(graph) })
}

/// One ballot per line, node ids separated by commas or whitespace.
fn parse_ballots(text: &str) -> anyhow::Result<Vec<KSet>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let ids = content
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().with_context(|| format!("line {}: bad node id {t:?}", i + 1)))
            .collect::<anyhow::Result<Vec<usize>>>()?;
        out.push(KSet::new(ids).with_context(|| format!("line {}", i + 1))?);
    }
    Ok(out)
}

pub fn load_planted(cfg: &RunConfig) -> anyhow::Result<PlantedSpec> {
    match (&cfg.input, cfg.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            Ok(serde_json::from_str(&text).with_context(|| format!("parsing planted spec {path}"))?)
        }
        (None, Some(Preset::Basketball)) => Ok(netio::basketball_preset()),
        (None, None) => Err(usage("need --input (planted spec JSON) or --preset")),
    }
}

/// `0,1,2;3,4,5` into cliques.
pub fn parse_support(text: &str) -> anyhow::Result<Vec<KSet>> {
    text.split(';')
        .filter(|c| !c.trim().is_empty())
        .map(|c| {
            let ids = c
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| usage(format!("bad node id {t:?} in --support"))))
                .collect::<anyhow::Result<Vec<usize>>>()?;
            Ok(KSet::new(ids)?)
        })
        .collect()
}

/// Node sets of size `j..=kmax` whose every `j`-subset carries a nonzero
/// observation, in ascending size then colex order.
pub fn candidate_cliques(obs: &Observations, kmax: usize) -> anyhow::Result<Vec<KSet>> {
    let (n, j) = (obs.n, obs.j);
    let observed = |s: &[usize]| -> bool {
        let set = KSet::from_sorted(s.to_vec()).expect("sorted");
        obs.values[rank_kset(&set).expect("in range") as usize] != 0.0
    };
    let mut by_size: Vec<Vec<KSet>> = vec![Vec::new(); kmax + 1];
    let mut stack: Vec<usize> = Vec::new();
    let mut count: u64 = 0;
    // extends `stack` with larger ids while every new j-set is observed
    fn grow(
        n: usize,
        j: usize,
        kmax: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<KSet>>,
        count: &mut u64,
        observed: &dyn Fn(&[usize]) -> bool,
    ) -> anyhow::Result<()> {
        let from = stack.last().map_or(0, |&v| v + 1);
        for v in from..n {
            let ok = stack.len() + 1 < j || {
                let mut good = true;
                for base in KSet::range(0, stack.len()).subsets(j - 1) {
                    let mut s: Vec<usize> = base.as_slice().iter().map(|&i| stack[i]).collect();
                    s.push(v);
                    if !observed(&s) {
                        good = false;
                        break;
                    }
                }
                good
            };
            if !ok {
                continue;
            }
            stack.push(v);
            if stack.len() >= j {
                *count += 1;
                if *count > DEFAULT_ENUMERATION_CAP {
                    anyhow::bail!(radon_core::Error::EnumerationCap { count: u128::from(*count), cap: DEFAULT_ENUMERATION_CAP });
                }
                out[stack.len()].push(KSet::from_sorted(stack.clone())?);
            }
            if stack.len() < kmax {
                grow(n, j, kmax, stack, out, count, observed)?;
            }
            stack.pop();
        }
        Ok(())
    }
    grow(n, j, kmax, &mut stack, &mut by_size, &mut count, &observed)?;
    let mut out = Vec::new();
    for mut group in by_size {
        group.sort_by(|a, b| a.colex_cmp(b));
        out.extend(group);
    }
    Ok(out)
}
