//! Immutable graph and dataset types.
//!
//! Nodes are dense `0..n` indices inside each graph. Node labels are dense
//! identifiers into a dataset-wide [`LabelAlphabet`]. Attribute vectors have a
//! uniform width across the dataset (`q_v` per node, `q_e` per edge, either may
//! be zero).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of a node label inside a [`LabelAlphabet`].
pub type LabelId = u32;

/// Learning task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classification,
    Regression,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::Classification => f.write_str("classification"),
            Task::Regression => f.write_str("regression"),
        }
    }
}

/// Undirected node-labelled graph with node and edge attribute vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    /// Edge id for each adjacency entry, `usize::MAX` when no attributes exist.
    adjacency_edges: Vec<Vec<usize>>,
    labels: Vec<LabelId>,
    node_attrs: Vec<Vec<f64>>,
    edges: Vec<(usize, usize)>,
    edge_attrs: Vec<Vec<f64>>,
}

const NO_EDGE: usize = usize::MAX;

impl Graph {
    /// Builds a graph from an undirected edge list.
    ///
    /// Each edge may be listed once or in both directions. Repeated entries are
    /// collapsed when their attribute vectors agree and rejected otherwise.
    pub fn from_edges(
        labels: Vec<LabelId>,
        node_attrs: Vec<Vec<f64>>,
        edges: impl IntoIterator<Item = (usize, usize, Vec<f64>)>,
    ) -> Result<Graph> {
        let n = labels.len();
        if node_attrs.len() != n {
            return Err(Error::InvalidGraph(format!(
                "{} labels but {} node attribute vectors",
                n,
                node_attrs.len()
            )));
        }
        let mut edge_map: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
        for (u, v, attrs) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u},{v}) references a node outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at node {u}")));
            }
            let key = (u.min(v), u.max(v));
            match edge_map.get(&key) {
                Some(existing) if existing != &attrs => {
                    return Err(Error::InvalidGraph(format!(
                        "duplicate edge ({},{}) with differing attributes",
                        key.0, key.1
                    )));
                }
                Some(_) => {}
                None => {
                    edge_map.insert(key, attrs);
                }
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edge_map.keys() {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph::from_parts(adjacency, labels, node_attrs, edge_map))
    }

    /// Assembles a graph from raw parts without checking invariants.
    ///
    /// Use [`Graph::validate`] to inspect the result. Edge attribute keys are
    /// unordered pairs stored as `(min, max)`.
    pub fn from_parts(
        adjacency: Vec<Vec<usize>>,
        labels: Vec<LabelId>,
        node_attrs: Vec<Vec<f64>>,
        edge_attrs: BTreeMap<(usize, usize), Vec<f64>>,
    ) -> Graph {
        let edges: Vec<(usize, usize)> = edge_attrs.keys().copied().collect();
        let index: HashMap<(usize, usize), usize> =
            edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let adjacency_edges = adjacency
            .iter()
            .enumerate()
            .map(|(u, list)| {
                list.iter()
                    .map(|&v| *index.get(&(u.min(v), u.max(v))).unwrap_or(&NO_EDGE))
                    .collect()
            })
            .collect();
        Graph {
            adjacency,
            adjacency_edges,
            labels,
            node_attrs,
            edges,
            edge_attrs: edge_attrs.into_values().collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sorted neighbours of `v`.
    pub fn neighbors(&self, v: usize) -> Result<&[usize]> {
        self.adjacency
            .get(v)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Usage(format!("node {v} out of range 0..{}", self.node_count())))
    }

    /// Attribute vector of the undirected edge `{u, v}`.
    pub fn edge_attributes(&self, u: usize, v: usize) -> Result<&[f64]> {
        let pos = self
            .adjacency
            .get(u)
            .and_then(|list| list.binary_search(&v).ok())
            .ok_or_else(|| Error::Usage(format!("({u},{v}) is not an edge")))?;
        match self.adjacency_edges[u][pos] {
            NO_EDGE => Err(Error::Usage(format!("({u},{v}) has no stored attributes"))),
            id => Ok(&self.edge_attrs[id]),
        }
    }

    pub fn label(&self, v: usize) -> LabelId {
        self.labels[v]
    }

    pub fn labels(&self) -> &[LabelId] {
        &self.labels
    }

    pub fn node_attributes(&self, v: usize) -> &[f64] {
        &self.node_attrs[v]
    }

    /// Undirected edges as `(min, max)` pairs in ascending order, with attributes.
    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), &[f64])> + '_ {
        self.edges
            .iter()
            .copied()
            .zip(self.edge_attrs.iter().map(Vec::as_slice))
    }

    #[inline]
    pub(crate) fn adj(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Attributes of the edge stored at adjacency slot `slot` of node `u`.
    #[inline]
    pub(crate) fn adj_edge_attrs(&self, u: usize, slot: usize) -> &[f64] {
        &self.edge_attrs[self.adjacency_edges[u][slot]]
    }

    /// Same structure and attributes with a new labelling.
    pub fn with_labels(&self, labels: Vec<LabelId>) -> Result<Graph> {
        if labels.len() != self.node_count() {
            return Err(Error::Usage(format!(
                "relabelling needs {} labels, got {}",
                self.node_count(),
                labels.len()
            )));
        }
        Ok(Graph {
            labels,
            ..self.clone()
        })
    }

    /// Checks every structural invariant against the dataset dimensions.
    pub fn validate(&self, q_v: usize, q_e: usize) -> ValidationReport {
        let n = self.node_count();
        let mut violations = Vec::new();
        if self.adjacency.len() != n {
            violations.push(Violation::NodeCountMismatch {
                labels: n,
                adjacency: self.adjacency.len(),
            });
        }
        if self.node_attrs.len() != n {
            violations.push(Violation::NodeCountMismatch {
                labels: n,
                adjacency: self.node_attrs.len(),
            });
        }
        for (u, list) in self.adjacency.iter().enumerate() {
            for (slot, &v) in list.iter().enumerate() {
                if v >= self.adjacency.len() {
                    violations.push(Violation::NeighborOutOfRange { node: u, neighbor: v });
                    continue;
                }
                if v == u {
                    violations.push(Violation::SelfLoop { node: u });
                }
                if slot > 0 && list[slot - 1] >= v {
                    violations.push(if list[slot - 1] == v {
                        Violation::DuplicateNeighbor { node: u, neighbor: v }
                    } else {
                        Violation::UnsortedAdjacency { node: u }
                    });
                }
                if self.adjacency[v].binary_search(&u).is_err() && !self.adjacency[v].contains(&u) {
                    violations.push(Violation::AsymmetricAdjacency { from: u, to: v });
                }
                match self.adjacency_edges[u][slot] {
                    NO_EDGE => violations.push(Violation::MissingEdgeAttributes { from: u, to: v }),
                    id if self.edge_attrs[id].len() != q_e => {
                        if u < v {
                            violations.push(Violation::EdgeAttributeLength {
                                edge: (u, v),
                                expected: q_e,
                                found: self.edge_attrs[id].len(),
                            });
                        }
                    }
                    _ => {}
                }
            }
        }
        for (v, attrs) in self.node_attrs.iter().enumerate() {
            if attrs.len() != q_v {
                violations.push(Violation::NodeAttributeLength {
                    node: v,
                    expected: q_v,
                    found: attrs.len(),
                });
            }
        }
        ValidationReport { violations }
    }
}

/// One broken graph invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NodeCountMismatch { labels: usize, adjacency: usize },
    NeighborOutOfRange { node: usize, neighbor: usize },
    SelfLoop { node: usize },
    DuplicateNeighbor { node: usize, neighbor: usize },
    UnsortedAdjacency { node: usize },
    AsymmetricAdjacency { from: usize, to: usize },
    MissingEdgeAttributes { from: usize, to: usize },
    NodeAttributeLength { node: usize, expected: usize, found: usize },
    EdgeAttributeLength { edge: (usize, usize), expected: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NodeCountMismatch { labels, adjacency } => {
                write!(f, "node count mismatch: {labels} labels vs {adjacency} entries")
            }
            Violation::NeighborOutOfRange { node, neighbor } => {
                write!(f, "neighbor {neighbor} of node {node} out of range")
            }
            Violation::SelfLoop { node } => write!(f, "self-loop at node {node}"),
            Violation::DuplicateNeighbor { node, neighbor } => {
                write!(f, "duplicate neighbor {neighbor} at node {node}")
            }
            Violation::UnsortedAdjacency { node } => write!(f, "unsorted adjacency at node {node}"),
            Violation::AsymmetricAdjacency { from, to } => {
                write!(f, "asymmetric adjacency at ({from},{to})")
            }
            Violation::MissingEdgeAttributes { from, to } => {
                write!(f, "missing edge attributes at ({from},{to})")
            }
            Violation::NodeAttributeLength { node, expected, found } => write!(
                f,
                "attribute length mismatch at node {node}: expected {expected}, found {found}"
            ),
            Violation::EdgeAttributeLength { edge, expected, found } => write!(
                f,
                "attribute length mismatch at edge ({},{}): expected {expected}, found {found}",
                edge.0, edge.1
            ),
        }
    }
}

/// Result of [`Graph::validate`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(ToString::to_string).collect()
    }
}

/// Dense table of node label names.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct LabelAlphabet {
    names: Vec<String>,
    index: HashMap<String, LabelId>,
}

impl LabelAlphabet {
    pub fn new(names: Vec<String>) -> Self {
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as LabelId))
            .collect();
        LabelAlphabet { names, index }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: LabelId) -> &str {
        self.names.get(id as usize).map(String::as_str).unwrap_or("?")
    }

    pub fn id(&self, name: &str) -> Option<LabelId> {
        self.index.get(name).copied()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

impl From<Vec<String>> for LabelAlphabet {
    fn from(names: Vec<String>) -> Self {
        LabelAlphabet::new(names)
    }
}

impl From<LabelAlphabet> for Vec<String> {
    fn from(alphabet: LabelAlphabet) -> Self {
        alphabet.names
    }
}

/// Renders a categorical attribute value as a label name.
pub fn format_value(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{}", value as i64)
    } else {
        format!("{value}")
    }
}

/// A set of graphs with per-graph targets.
///
/// Node-attribute columns are addressed by a *column index*: column 0 is the
/// node-label column and column `k >= 1` is node attribute `k - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    task: Task,
    graphs: Vec<Arc<Graph>>,
    targets: Vec<f64>,
    alphabet: LabelAlphabet,
    node_attr_dim: usize,
    edge_attr_dim: usize,
    has_node_labels: bool,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        task: Task,
        graphs: Vec<Graph>,
        targets: Vec<f64>,
        alphabet: LabelAlphabet,
        node_attr_dim: usize,
        edge_attr_dim: usize,
    ) -> Result<Dataset> {
        Dataset::from_shared(
            name,
            task,
            graphs.into_iter().map(Arc::new).collect(),
            targets,
            alphabet,
            node_attr_dim,
            edge_attr_dim,
        )
    }

    fn from_shared(
        name: impl Into<String>,
        task: Task,
        graphs: Vec<Arc<Graph>>,
        targets: Vec<f64>,
        alphabet: LabelAlphabet,
        node_attr_dim: usize,
        edge_attr_dim: usize,
    ) -> Result<Dataset> {
        if graphs.len() != targets.len() {
            return Err(Error::Load(format!(
                "{} graphs but {} targets",
                graphs.len(),
                targets.len()
            )));
        }
        for (i, g) in graphs.iter().enumerate() {
            let report = g.validate(node_attr_dim, edge_attr_dim);
            if !report.is_ok() {
                return Err(Error::InvalidGraph(format!(
                    "graph {i}: {}",
                    report.messages().join("; ")
                )));
            }
            if let Some(&bad) = g.labels().iter().find(|&&l| l as usize >= alphabet.len()) {
                return Err(Error::InvalidGraph(format!(
                    "graph {i}: label id {bad} outside alphabet of size {}",
                    alphabet.len()
                )));
            }
        }
        if task == Task::Classification {
            if let Some(t) = targets.iter().find(|&&t| t != 0.0 && t != 1.0) {
                return Err(Error::Load(format!(
                    "classification target {t} is not in {{0, 1}}"
                )));
            }
        }
        Ok(Dataset {
            name: name.into(),
            task,
            graphs,
            targets,
            alphabet,
            node_attr_dim,
            edge_attr_dim,
            has_node_labels: true,
        })
    }

    /// Marks whether column 0 holds real node labels (false when every node
    /// carries a placeholder label because no label file exists).
    pub fn with_node_labels_flag(mut self, has_node_labels: bool) -> Self {
        self.has_node_labels = has_node_labels;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Same graphs with the label names replaced by `alphabet`.
    pub fn with_alphabet(mut self, alphabet: LabelAlphabet) -> Result<Dataset> {
        if alphabet.len() < self.alphabet.len() {
            return Err(Error::Usage(format!(
                "alphabet of size {} cannot rename {} labels",
                alphabet.len(),
                self.alphabet.len()
            )));
        }
        self.alphabet = alphabet;
        Ok(self)
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn graph(&self, i: usize) -> &Graph {
        &self.graphs[i]
    }

    pub fn graphs(&self) -> impl ExactSizeIterator<Item = &Graph> + '_ {
        self.graphs.iter().map(|g| g.as_ref())
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn alphabet(&self) -> &LabelAlphabet {
        &self.alphabet
    }

    pub fn node_attr_dim(&self) -> usize {
        self.node_attr_dim
    }

    pub fn edge_attr_dim(&self) -> usize {
        self.edge_attr_dim
    }

    pub fn has_node_labels(&self) -> bool {
        self.has_node_labels
    }

    /// Number of categorical-candidate columns (label column plus attributes).
    pub fn column_count(&self) -> usize {
        1 + self.node_attr_dim
    }

    /// Value of column `column` at node `v` of graph `g`.
    pub fn column_value(&self, g: usize, v: usize, column: usize) -> f64 {
        let graph = &self.graphs[g];
        if column == 0 {
            self.alphabet
                .name(graph.label(v))
                .parse()
                .unwrap_or(graph.label(v) as f64)
        } else {
            graph.node_attributes(v)[column - 1]
        }
    }

    /// Dataset restricted to `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            task: self.task,
            graphs: indices.iter().map(|&i| Arc::clone(&self.graphs[i])).collect(),
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
            alphabet: self.alphabet.clone(),
            node_attr_dim: self.node_attr_dim,
            edge_attr_dim: self.edge_attr_dim,
            has_node_labels: self.has_node_labels,
        }
    }

    /// Replaces the node labelling with the values of column `column`.
    ///
    /// Column 0 leaves the dataset unchanged. For an attribute column the new
    /// alphabet lists the distinct values in ascending numeric order.
    pub fn relabel_by_column(&self, column: usize) -> Result<Dataset> {
        if column == 0 {
            return Ok(self.clone());
        }
        if column > self.node_attr_dim {
            return Err(Error::Usage(format!(
                "column {column} out of range 0..={}",
                self.node_attr_dim
            )));
        }
        let attr = column - 1;
        let mut values: Vec<f64> = self
            .graphs
            .iter()
            .flat_map(|g| (0..g.node_count()).map(move |v| g.node_attributes(v)[attr]))
            .collect();
        values.sort_by(f64::total_cmp);
        values.dedup_by(|a, b| a.total_cmp(b).is_eq());
        let names: Vec<String> = values.iter().map(|&v| format_value(v)).collect();
        let alphabet = LabelAlphabet::new(names);
        let graphs = self
            .graphs
            .iter()
            .map(|g| {
                let labels = (0..g.node_count())
                    .map(|v| {
                        let x = g.node_attributes(v)[attr];
                        values.binary_search_by(|p| p.total_cmp(&x)).unwrap() as LabelId
                    })
                    .collect();
                g.with_labels(labels).map(Arc::new)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            graphs,
            alphabet,
            has_node_labels: true,
            ..self.clone()
        })
    }

    /// Re-expresses node labels in `target`'s identifiers by name.
    ///
    /// Names absent from `target` receive fresh identifiers after the last
    /// entry of `target`, so they never match a path built on `target`.
    pub fn remap_labels(&self, target: &LabelAlphabet) -> Result<Dataset> {
        let mut names = target.names().to_vec();
        let mut extra: HashMap<&str, LabelId> = HashMap::new();
        let mapping: Vec<LabelId> = self
            .alphabet
            .names()
            .iter()
            .map(|name| match target.id(name) {
                Some(id) => id,
                None => *extra.entry(name.as_str()).or_insert_with(|| {
                    names.push(name.clone());
                    (names.len() - 1) as LabelId
                }),
            })
            .collect();
        let graphs = self
            .graphs
            .iter()
            .map(|g| {
                g.with_labels(g.labels().iter().map(|&l| mapping[l as usize]).collect())
                    .map(Arc::new)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            graphs,
            alphabet: LabelAlphabet::new(names),
            ..self.clone()
        })
    }
}
