use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::combinat::KSet;
use crate::error::{Error, Result};

/// Undirected graph with nonnegative weights, stored over colex-ordered pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    n: usize,
    labels: Option<Vec<String>>,
    /// Weight of `{u, v}`, `u < v`, at index `v(v-1)/2 + u`.
    weights: Vec<f64>,
}

#[inline]
fn pair_index(u: usize, v: usize) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    b * (b - 1) / 2 + a
}

impl Graph {
    /// Edgeless graph on `n` nodes.
    pub fn new(n: usize) -> Self {
        Self { n, labels: None, weights: vec![0.0; n * n.saturating_sub(1) / 2] }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Graph from its upper-triangle weights in colex pair order.
    pub fn from_pair_weights(n: usize, weights: Vec<f64>) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if weights.len() != expected {
            return Err(Error::Dimension { expected, got: weights.len() });
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::Validation(format!("edge weight {w} is not a finite nonnegative number")));
        }
        Ok(Self { n, labels: None, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, node: usize) -> String {
        match &self.labels {
            Some(l) => l[node].clone(),
            None => node.to_string(),
        }
    }

    /// Node id of a label (or of a decimal id when unlabeled).
    pub fn node_of(&self, label: &str) -> Option<usize> {
        match &self.labels {
            Some(l) => l.iter().position(|x| x == label),
            None => label.parse().ok().filter(|&v| v < self.n),
        }
    }

    pub fn pair_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        if u == v {
            0.0
        } else {
            self.weights[pair_index(u, v)]
        }
    }

    /// Adds `w` to edge `{u, v}`.
    pub fn add_edge(&mut self, u: usize, v: usize, w: f64) -> Result<()> {
        if u == v {
            return Err(Error::Validation(format!("self-loop on node {u}")));
        }
        if u >= self.n || v >= self.n {
            return Err(Error::Validation(format!("edge ({u}, {v}) leaves the {} nodes", self.n)));
        }
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::Validation(format!("edge weight {w} is not a finite nonnegative number")));
        }
        self.weights[pair_index(u, v)] += w;
        Ok(())
    }

    pub fn edge_count(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn weighted_degree(&self, u: usize) -> f64 {
        (0..self.n).filter(|&v| v != u).map(|v| self.weight(u, v)).sum()
    }

    /// Subgraph on `nodes` (relabelled `0..len` in the given order).
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Graph> {
        let mut g = Graph::new(nodes.len());
        for (a, &u) in nodes.iter().enumerate() {
            if u >= self.n {
                return Err(Error::Validation(format!("node {u} outside the graph")));
            }
            for (b, &v) in nodes.iter().enumerate().take(a) {
                if u == v {
                    return Err(Error::Validation(format!("node {u} listed twice")));
                }
                g.weights[pair_index(a, b)] = self.weight(u, v);
            }
        }
        g.labels = Some(nodes.iter().map(|&u| self.label(u)).collect());
        Ok(g)
    }

    /// The `count` nodes of largest weighted degree (ties by id), in id order.
    pub fn top_by_weighted_degree(&self, count: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n).collect();
        let deg: Vec<f64> = order.iter().map(|&u| self.weighted_degree(u)).collect();
        order.sort_by(|&a, &b| deg[b].total_cmp(&deg[a]).then(a.cmp(&b)));
        order.truncate(count);
        order.sort_unstable();
        order
    }
}

fn check_set(graph: &Graph, set: &KSet) -> Result<()> {
    match set.max_element() {
        Some(m) if m >= graph.n => Err(Error::Domain(format!("node {m} outside the graph"))),
        _ => Ok(()),
    }
}

/// Total weight of the unordered pairs inside `set`, each counted once.
pub fn volume(graph: &Graph, set: &KSet) -> Result<f64> {
    check_set(graph, set)?;
    let s = set.as_slice();
    let mut total = 0.0;
    for (i, &u) in s.iter().enumerate() {
        for &v in &s[..i] {
            total += graph.weight(u, v);
        }
    }
    Ok(total)
}

/// Crossing weight over `min(Vol(S), Vol(V \ S))`.
pub fn conductance(graph: &Graph, set: &KSet) -> Result<f64> {
    check_set(graph, set)?;
    if set.is_empty() || set.len() == graph.n {
        return Err(Error::Domain("conductance needs a proper nonempty subset".into()));
    }
    let mut inside = vec![false; graph.n];
    for &u in set.as_slice() {
        inside[u] = true;
    }
    let rest = KSet::from_sorted((0..graph.n).filter(|&u| !inside[u]).collect())?;
    let mut cut = 0.0;
    for &u in set.as_slice() {
        for &v in rest.as_slice() {
            cut += graph.weight(u, v);
        }
    }
    let denom = volume(graph, set)?.min(volume(graph, &rest)?);
    if denom <= 0.0 {
        return Err(Error::Domain("conductance denominator is zero".into()));
    }
    Ok(cut / denom)
}

/// Reads whitespace-separated `u v [w]` lines; `#` starts a comment.
///
/// When every endpoint is a nonnegative integer the ids are used directly,
/// otherwise every token is a label assigned a dense id in first-seen order.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Graph> {
    let mut rows: Vec<(usize, String, String, f64)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let w = match toks.len() {
            2 => 1.0,
            3 => toks[2].parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("weight {:?} is not a number", toks[2]),
            })?,
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected `u v [w]`, found {} fields", toks.len()),
                })
            }
        };
        if !w.is_finite() {
            return Err(Error::Parse { line: line_no, msg: format!("weight {w} is not finite") });
        }
        if w < 0.0 {
            return Err(Error::Validation(format!("line {line_no}: negative weight {w}")));
        }
        if toks[0] == toks[1] {
            return Err(Error::Validation(format!("line {line_no}: self-loop on {}", toks[0])));
        }
        rows.push((line_no, toks[0].to_string(), toks[1].to_string(), w));
    }

    let numeric = rows.iter().all(|(_, a, b, _)| a.parse::<usize>().is_ok() && b.parse::<usize>().is_ok());
    if numeric {
        let ids: Vec<(usize, usize, usize, f64)> = rows
            .iter()
            .map(|(l, a, b, w)| (*l, a.parse().unwrap(), b.parse().unwrap(), *w))
            .collect();
        let n = ids.iter().map(|&(_, a, b, _)| a.max(b) + 1).max().unwrap_or(0);
        let mut g = Graph::new(n);
        for (l, a, b, w) in ids {
            if a == b {
                return Err(Error::Validation(format!("line {l}: self-loop on {a}")));
            }
            g.add_edge(a, b, w)?;
        }
        return Ok(g);
    }

    let mut index: HashMap<String, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut edges = Vec::with_capacity(rows.len());
    for (_, a, b, w) in rows {
        let mut id = |s: String| {
            *index.entry(s.clone()).or_insert_with(|| {
                labels.push(s);
                labels.len() - 1
            })
        };
        let (u, v) = (id(a), id(b));
        edges.push((u, v, w));
    }
    let mut g = Graph::new(labels.len());
    for (u, v, w) in edges {
        g.add_edge(u, v, w)?;
    }
    g.with_labels(labels)
}
