//! Choice of the matching alphabet and of the anchor nodes paths start from.
//!
//! Column indices follow [`Dataset`]: 0 is the node-label column, `k >= 1` is
//! node attribute `k - 1`.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dataset, Graph, LabelId};
use crate::paths::AnchorSet;

/// Default class-count bound below which a column counts as categorical.
pub const DEFAULT_CATEGORICAL_THRESHOLD: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AnchorMode {
    /// Every node is an anchor.
    Auto,
    /// Only nodes whose label is listed in `user_labels`.
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnchorConfig {
    pub mode: AnchorMode,
    /// Label names, resolved against the matching alphabet.
    pub user_labels: Vec<String>,
    pub categorical_threshold: usize,
    /// Restrict anchors to the `k` rarest labels.
    pub rare_top_k: Option<usize>,
}

impl Default for AnchorConfig {
    fn default() -> Self {
        AnchorConfig {
            mode: AnchorMode::Auto,
            user_labels: Vec::new(),
            categorical_threshold: DEFAULT_CATEGORICAL_THRESHOLD,
            rare_top_k: None,
        }
    }
}

impl AnchorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.categorical_threshold < 2 {
            return Err(Error::Config("categorical threshold must be at least 2".into()));
        }
        if self.mode == AnchorMode::User && self.user_labels.is_empty() {
            return Err(Error::Config("user anchor mode needs at least one anchor label".into()));
        }
        if self.rare_top_k == Some(0) {
            return Err(Error::Config("rare-top-k must be positive".into()));
        }
        Ok(())
    }
}

/// Columns with fewer than `threshold` distinct values over all nodes, with
/// their exact distinct counts, in column order.
pub fn detect_categorical_attributes(ds: &Dataset, threshold: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if ds.has_node_labels() {
        let mut seen = vec![false; ds.alphabet().len()];
        for g in ds.graphs() {
            for &l in g.labels() {
                seen[l as usize] = true;
            }
        }
        let count = seen.iter().filter(|&&b| b).count();
        if count < threshold {
            out.push((0, count));
        }
    }
    for attr in 0..ds.node_attr_dim() {
        let mut seen: HashSet<u64> = HashSet::new();
        'scan: for g in ds.graphs() {
            for v in 0..g.node_count() {
                let x = g.node_attributes(v)[attr];
                // -0.0 and 0.0 are one class
                seen.insert(if x == 0.0 { 0 } else { x.to_bits() });
                if seen.len() >= threshold {
                    break 'scan;
                }
            }
        }
        if seen.len() < threshold {
            out.push((attr + 1, seen.len()));
        }
    }
    out
}

/// Categorical column with the most distinct classes; ties go to the lower index.
pub fn select_anchor_attribute(ds: &Dataset, cfg: &AnchorConfig) -> Result<usize> {
    let candidates = detect_categorical_attributes(ds, cfg.categorical_threshold);
    let mut best: Option<(usize, usize)> = None;
    for &(column, count) in &candidates {
        match best {
            Some((_, c)) if count < c => {}
            Some((b, c)) if count == c => {
                log::info!("anchor attribute tie at {count} classes: keeping column {b} over {column}");
            }
            _ => best = Some((column, count)),
        }
    }
    best.map(|(column, _)| column).ok_or_else(|| {
        Error::Config(format!(
            "no node column has fewer than {} distinct values; use --anchor-mode user with --anchor-labels",
            cfg.categorical_threshold
        ))
    })
}

/// Column that supplies path labels for a run.
///
/// User mode names labels of the node-label column when the dataset has one;
/// otherwise the column is chosen automatically.
pub fn resolve_anchor_column(ds: &Dataset, cfg: &AnchorConfig) -> Result<usize> {
    if cfg.mode == AnchorMode::User && ds.has_node_labels() {
        return Ok(0);
    }
    select_anchor_attribute(ds, cfg)
}

/// The `k` labels with the smallest node frequency over `ds`; ties go to the
/// smaller identifier. Labels absent from `ds` have frequency zero.
pub fn rare_label_filter(ds: &Dataset, k: usize) -> BTreeSet<LabelId> {
    let mut freq = vec![0usize; ds.alphabet().len()];
    for g in ds.graphs() {
        for &l in g.labels() {
            freq[l as usize] += 1;
        }
    }
    if k > freq.len() {
        log::warn!("rare-top-k {k} exceeds alphabet size {}; clamping", freq.len());
    }
    let mut order: Vec<LabelId> = (0..freq.len() as LabelId).collect();
    order.sort_by_key(|&l| (freq[l as usize], l));
    order.into_iter().take(k).collect()
}

/// Anchor label identifiers allowed by `cfg`, or `None` when every label is.
pub fn allowed_anchor_labels(ds: &Dataset, cfg: &AnchorConfig) -> Result<Option<BTreeSet<LabelId>>> {
    let mut allowed: Option<BTreeSet<LabelId>> = None;
    if cfg.mode == AnchorMode::User {
        let mut ids = BTreeSet::new();
        for name in &cfg.user_labels {
            match ds.alphabet().id(name) {
                Some(id) => {
                    ids.insert(id);
                }
                None => log::warn!("anchor label {name:?} does not occur in the dataset"),
            }
        }
        allowed = Some(ids);
    }
    if let Some(k) = cfg.rare_top_k {
        let rare = rare_label_filter(ds, k);
        allowed = Some(match allowed {
            Some(ids) => ids.intersection(&rare).copied().collect(),
            None => rare,
        });
    }
    Ok(allowed)
}

/// Anchor nodes of `g`: all nodes, or those whose label is allowed.
pub fn anchor_nodes(g: &Graph, allowed: Option<&BTreeSet<LabelId>>) -> AnchorSet {
    match allowed {
        None => AnchorSet::all(g.node_count()),
        Some(ids) => AnchorSet::from_nodes((0..g.node_count()).filter(|&v| ids.contains(&g.label(v)))),
    }
}

/// Anchor sets of every graph in `ds`.
pub fn anchor_sets(ds: &Dataset, allowed: Option<&BTreeSet<LabelId>>) -> Vec<AnchorSet> {
    ds.graphs().map(|g| anchor_nodes(g, allowed)).collect()
}
