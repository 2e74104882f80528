//! Anchored simple-path matching.
//!
//! An occurrence of a labelled path is a sequence of distinct nodes, starting
//! at an anchor, whose consecutive members are adjacent and whose labels spell
//! the path. All searches are depth-first from each anchor in ascending order,
//! visiting neighbours in ascending order, so occurrences come out sorted
//! lexicographically by node indices.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dataset, Graph, LabelAlphabet, LabelId};

/// Nonempty sequence of node labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<LabelId>", into = "Vec<LabelId>")]
pub struct LabelledPath(Vec<LabelId>);

impl LabelledPath {
    pub fn new(labels: Vec<LabelId>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Usage("labelled path must be nonempty".into()));
        }
        Ok(LabelledPath(labels))
    }

    pub fn single(label: LabelId) -> Self {
        LabelledPath(vec![label])
    }

    pub fn labels(&self) -> &[LabelId] {
        &self.0
    }

    /// Number of labels (nodes), one more than the path length in edges.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn extended(&self, label: LabelId) -> LabelledPath {
        let mut labels = self.0.clone();
        labels.push(label);
        LabelledPath(labels)
    }

    /// Label names joined by `-`.
    pub fn display_with(&self, alphabet: &LabelAlphabet) -> String {
        self.0
            .iter()
            .map(|&l| alphabet.name(l))
            .collect::<Vec<_>>()
            .join("-")
    }
}

impl TryFrom<Vec<LabelId>> for LabelledPath {
    type Error = Error;

    fn try_from(labels: Vec<LabelId>) -> Result<Self> {
        LabelledPath::new(labels)
    }
}

impl From<LabelledPath> for Vec<LabelId> {
    fn from(path: LabelledPath) -> Self {
        path.0
    }
}

impl fmt::Display for LabelledPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("-"))
    }
}

/// Concrete node sequence realising a labelled path in one graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathOccurrence {
    pub nodes: Vec<usize>,
}

/// Sorted set of anchor nodes of one graph.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnchorSet(Vec<usize>);

impl AnchorSet {
    pub fn all(node_count: usize) -> Self {
        AnchorSet((0..node_count).collect())
    }

    pub fn from_nodes(nodes: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = nodes.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        AnchorSet(v)
    }

    pub fn nodes(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }
}

/// Every occurrence of `path` in `g` starting at an anchor, in lexicographic order.
pub fn enumerate_occurrences(g: &Graph, anchors: &AnchorSet, path: &LabelledPath) -> Vec<PathOccurrence> {
    let labels = path.labels();
    let mut out = Vec::new();
    let mut visited = vec![false; g.node_count()];
    let mut stack = Vec::with_capacity(labels.len());
    for &a in anchors.nodes() {
        if a < g.node_count() && g.label(a) == labels[0] {
            visited[a] = true;
            stack.push(a);
            collect(g, labels, &mut visited, &mut stack, &mut out);
            stack.pop();
            visited[a] = false;
        }
    }
    out
}

fn collect(
    g: &Graph,
    labels: &[LabelId],
    visited: &mut [bool],
    stack: &mut Vec<usize>,
    out: &mut Vec<PathOccurrence>,
) {
    if stack.len() == labels.len() {
        out.push(PathOccurrence {
            nodes: stack.clone(),
        });
        return;
    }
    let want = labels[stack.len()];
    let v = *stack.last().unwrap();
    for &w in g.adj(v) {
        if !visited[w] && g.label(w) == want {
            visited[w] = true;
            stack.push(w);
            collect(g, labels, visited, stack, out);
            stack.pop();
            visited[w] = false;
        }
    }
}

/// Number of anchored occurrences of `path` in `g`, without materialising them.
pub fn count_occurrences(g: &Graph, anchors: &AnchorSet, path: &LabelledPath) -> u64 {
    let labels = path.labels();
    let mut visited = vec![false; g.node_count()];
    let mut total = 0;
    for &a in anchors.nodes() {
        if a < g.node_count() && g.label(a) == labels[0] {
            visited[a] = true;
            total += count_from(g, labels, a, 1, &mut visited);
            visited[a] = false;
        }
    }
    total
}

fn count_from(g: &Graph, labels: &[LabelId], v: usize, depth: usize, visited: &mut [bool]) -> u64 {
    if depth == labels.len() {
        return 1;
    }
    let want = labels[depth];
    let mut total = 0;
    for &w in g.adj(v) {
        if !visited[w] && g.label(w) == want {
            visited[w] = true;
            total += count_from(g, labels, w, depth + 1, visited);
            visited[w] = false;
        }
    }
    total
}

/// Count of `path` in every graph of `ds`, in dataset order.
pub fn count_column(ds: &Dataset, anchors: &[AnchorSet], path: &LabelledPath) -> Vec<u64> {
    (0..ds.len())
        .into_par_iter()
        .map(|i| count_occurrences(ds.graph(i), &anchors[i], path))
        .collect()
}

/// Per-prefix occurrence statistics gathered in one anchored search.
///
/// Entry `s - 1` describes prefix `s`: its occurrence count, the sum of the
/// terminal nodes' attribute vectors and (for `s >= 2`) the sum of the last
/// edges' attribute vectors. Sums accumulate in occurrence order.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixStats {
    pub count: u64,
    pub node_sum: Vec<f64>,
    pub edge_sum: Vec<f64>,
}

pub fn prefix_statistics(
    g: &Graph,
    anchors: &AnchorSet,
    path: &LabelledPath,
    q_v: usize,
    q_e: usize,
) -> Vec<PrefixStats> {
    let labels = path.labels();
    let mut stats: Vec<PrefixStats> = (0..labels.len())
        .map(|s| PrefixStats {
            count: 0,
            node_sum: vec![0.0; q_v],
            edge_sum: vec![0.0; if s == 0 { 0 } else { q_e }],
        })
        .collect();
    let mut visited = vec![false; g.node_count()];
    for &a in anchors.nodes() {
        if a < g.node_count() && g.label(a) == labels[0] {
            let first = &mut stats[0];
            first.count += 1;
            add(&mut first.node_sum, g.node_attributes(a));
            visited[a] = true;
            prefix_walk(g, labels, a, 1, &mut visited, &mut stats);
            visited[a] = false;
        }
    }
    stats
}

fn prefix_walk(
    g: &Graph,
    labels: &[LabelId],
    v: usize,
    depth: usize,
    visited: &mut [bool],
    stats: &mut [PrefixStats],
) {
    if depth == labels.len() {
        return;
    }
    let want = labels[depth];
    for (slot, &w) in g.adj(v).iter().enumerate() {
        if !visited[w] && g.label(w) == want {
            let entry = &mut stats[depth];
            entry.count += 1;
            add(&mut entry.node_sum, g.node_attributes(w));
            if !entry.edge_sum.is_empty() {
                add(&mut entry.edge_sum, g.adj_edge_attrs(v, slot));
            }
            visited[w] = true;
            prefix_walk(g, labels, w, depth + 1, visited, stats);
            visited[w] = false;
        }
    }
}

fn add(acc: &mut [f64], x: &[f64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b;
    }
}

/// Labels that extend some occurrence of `path` in `g` to a longer simple path.
fn graph_extensions(g: &Graph, anchors: &AnchorSet, path: &LabelledPath) -> BTreeSet<LabelId> {
    let mut found = BTreeSet::new();
    let mut visited = vec![false; g.node_count()];
    for occ in enumerate_occurrences(g, anchors, path) {
        for &v in &occ.nodes {
            visited[v] = true;
        }
        let last = *occ.nodes.last().unwrap();
        for &w in g.adj(last) {
            if !visited[w] {
                found.insert(g.label(w));
            }
        }
        for &v in &occ.nodes {
            visited[v] = false;
        }
    }
    found
}

/// All one-node extensions of `path` that occur somewhere in `ds`.
pub fn one_node_extensions(
    ds: &Dataset,
    anchors: &[AnchorSet],
    path: &LabelledPath,
) -> BTreeSet<LabelledPath> {
    let per_graph: Vec<BTreeSet<LabelId>> = (0..ds.len())
        .into_par_iter()
        .map(|i| graph_extensions(ds.graph(i), &anchors[i], path))
        .collect();
    per_graph
        .into_iter()
        .flatten()
        .map(|l| path.extended(l))
        .collect()
}
