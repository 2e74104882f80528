//! The boosting loop: path selection on the count matrix, tree fitting on the
//! selected path's feature rows, and lazy growth of the candidate pool.
//!
//! The fitted model is
//!
//! ```text
//! F(G) = f0 + eta * sum_m h_m(Phi[G, path_m])
//! ```
//!
//! evaluated per distinct path: the stages sharing a path are summed first
//! (in stage order) and the per-path terms are then added to `f0` in order of
//! first selection.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::anchors::{allowed_anchor_labels, anchor_sets, resolve_anchor_column, AnchorConfig};
use crate::error::{Error, Result};
use crate::features::{build_count_matrix, feature_dimension, feature_matrix, feature_row, AttributeMode};
use crate::graph::{Dataset, Graph, LabelAlphabet, LabelId, Task};
use crate::learners::{fit_tree, scan_stumps, RegressionTree};
use crate::paths::{one_node_extensions, AnchorSet, LabelledPath};

pub const MODEL_VERSION: &str = "pathboost-model/1";

/// Logits are clipped to this magnitude before the sigmoid and the loss.
pub const LOGIT_CLIP: f64 = 36.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub m_stop: usize,
    pub eta: f64,
    pub task: Task,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub attribute_mode: AttributeMode,
    /// Longest candidate path, in edges. Selected paths at this length are not extended.
    pub max_path_length: usize,
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            m_stop: 300,
            eta: 0.1,
            task: Task::Classification,
            max_depth: 3,
            min_leaf: 5,
            attribute_mode: AttributeMode::Complete,
            max_path_length: 10,
            seed: 0,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Config(format!("eta must lie in (0, 1], got {}", self.eta)));
        }
        if self.m_stop == 0 {
            return Err(Error::Config("m_stop must be at least 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::Config("min_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

fn clip(f: f64) -> f64 {
    f.clamp(-LOGIT_CLIP, LOGIT_CLIP)
}

pub fn sigmoid(f: f64) -> f64 {
    let f = clip(f);
    if f >= 0.0 {
        1.0 / (1.0 + (-f).exp())
    } else {
        let e = f.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of label `y` under logit `f`.
pub fn logistic_loss(y: f64, f: f64) -> f64 {
    let f = clip(f);
    // log(1 + e^f) - y f
    let softplus = f.max(0.0) + (-f.abs()).exp().ln_1p();
    softplus - y * f
}

/// Loss used for reporting: logistic for classification, half squared error otherwise.
pub fn loss(task: Task, y: f64, f: f64) -> f64 {
    match task {
        Task::Classification => logistic_loss(y, f),
        Task::Regression => 0.5 * (y - f) * (y - f),
    }
}

pub fn mean_loss(task: Task, targets: &[f64], scores: &[f64]) -> f64 {
    let total: f64 = targets.iter().zip(scores).map(|(&y, &f)| loss(task, y, f)).sum();
    total / targets.len().max(1) as f64
}

/// Initial constant: log-odds of the positive rate, or the target mean.
pub fn init_intercept(targets: &[f64], task: Task) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::Training("no training targets".into()));
    }
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    match task {
        Task::Regression => Ok(mean),
        Task::Classification => {
            if mean <= 0.0 || mean >= 1.0 {
                return Err(Error::Training(
                    "training targets contain a single class; log-odds undefined".into(),
                ));
            }
            Ok((mean / (1.0 - mean)).ln())
        }
    }
}

/// Negative loss gradient at the current scores.
pub fn pseudo_residuals(targets: &[f64], scores: &[f64], task: Task) -> Result<Vec<f64>> {
    if targets.len() != scores.len() {
        return Err(Error::Usage(format!(
            "{} targets but {} predictions",
            targets.len(),
            scores.len()
        )));
    }
    Ok(targets
        .iter()
        .zip(scores)
        .map(|(&y, &f)| match task {
            Task::Classification => y - sigmoid(f),
            Task::Regression => y - f,
        })
        .collect())
}

/// One boosting iteration of a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub path: LabelledPath,
    pub path_labels: Vec<String>,
    pub tree: RegressionTree,
    /// SSE reduction of the selector stump on the pseudo-residuals.
    pub loss_reduction: f64,
    /// Margin of the selected path over the runner-up candidate.
    pub relative_reduction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub path: String,
    pub training_loss: f64,
    pub loss_reduction: f64,
    pub relative_reduction: f64,
    /// Candidate pool size after this iteration's expansion.
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostModel {
    pub version: String,
    pub task: Task,
    pub config: BoostConfig,
    pub anchor: AnchorConfig,
    /// Column that supplied the matching labels (0 = node labels).
    pub anchor_column: usize,
    pub alphabet: LabelAlphabet,
    /// Label names nodes must carry to anchor a path; `None` means every node.
    pub anchor_labels: Option<Vec<String>>,
    pub q_v: usize,
    pub q_e: usize,
    pub f0: f64,
    pub eta: f64,
    pub initial_loss: f64,
    pub stages: Vec<Stage>,
    pub history: Vec<IterationRecord>,
}

/// Output for one graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prediction {
    Class { logit: f64, probability: f64, class: u8 },
    Value { value: f64 },
}

impl Prediction {
    pub fn from_score(task: Task, score: f64) -> Prediction {
        match task {
            Task::Classification => {
                let probability = sigmoid(score);
                Prediction::Class {
                    logit: score,
                    probability,
                    class: u8::from(probability > 0.5),
                }
            }
            Task::Regression => Prediction::Value { value: score },
        }
    }

    /// Raw model output (logit or regression value).
    pub fn score(&self) -> f64 {
        match *self {
            Prediction::Class { logit, .. } => logit,
            Prediction::Value { value } => value,
        }
    }

    /// Predicted class, or the regression value.
    pub fn label(&self) -> f64 {
        match *self {
            Prediction::Class { class, .. } => class as f64,
            Prediction::Value { value } => value,
        }
    }
}

/// A dataset expressed in a model's labels, with its anchor sets.
pub struct PreparedData {
    pub dataset: Dataset,
    pub anchors: Vec<AnchorSet>,
}

/// Trains a model on `ds`.
pub fn train(ds: &Dataset, cfg: &BoostConfig, anchor: &AnchorConfig) -> Result<BoostModel> {
    cfg.validate()?;
    anchor.validate()?;
    if ds.task() != cfg.task {
        return Err(Error::Config(format!(
            "dataset was loaded for {} but the run is configured for {}",
            ds.task(),
            cfg.task
        )));
    }
    if ds.is_empty() {
        return Err(Error::Training("empty training set".into()));
    }
    let anchor_column = resolve_anchor_column(ds, anchor)?;
    let data = ds.relabel_by_column(anchor_column)?;
    let allowed = allowed_anchor_labels(&data, anchor)?;
    let anchors = anchor_sets(&data, allowed.as_ref());

    let initial: BTreeSet<LabelId> = data
        .graphs()
        .zip(&anchors)
        .flat_map(|(g, a)| a.nodes().iter().map(|&v| g.label(v)))
        .collect();
    if initial.is_empty() {
        return Err(Error::Config("no anchor node in the training graphs".into()));
    }
    let initial: Vec<LabelledPath> = initial.into_iter().map(LabelledPath::single).collect();
    let mut counts = build_count_matrix(&data, &anchors, &initial)?;

    let targets = data.targets();
    let task = cfg.task;
    let f0 = init_intercept(targets, task)?;
    let mut scores = vec![f0; data.len()];
    let initial_loss = mean_loss(task, targets, &scores);
    let mut selected: HashSet<LabelledPath> = HashSet::new();
    let mut stages = Vec::new();
    let mut history = Vec::new();

    for iteration in 1..=cfg.m_stop {
        let residuals = pseudo_residuals(targets, &scores, task)?;
        let scan = scan_stumps(&counts, &residuals)?;
        let best = scan.best();
        if best.is_degenerate() {
            log::warn!("iteration {iteration}: no candidate path reduces the loss; stopping early");
            break;
        }
        let runner_up = scan.second_best(best.feature_index);
        let path = counts.columns()[best.feature_index].clone();

        let rows = feature_matrix(&data, &anchors, &path, cfg.attribute_mode);
        let tree = fit_tree(&rows, &residuals, cfg.max_depth, cfg.min_leaf)?;
        for (score, row) in scores.iter_mut().zip(&rows) {
            *score += cfg.eta * tree.predict_unchecked(row);
        }

        if selected.insert(path.clone()) && path.len() <= cfg.max_path_length {
            let extensions = one_node_extensions(&data, &anchors, &path);
            counts.append_paths(&data, &anchors, extensions)?;
        }

        let name = path.display_with(data.alphabet());
        let training_loss = mean_loss(task, targets, &scores);
        log::debug!("iteration {iteration}: {name} loss {training_loss:.6}");
        history.push(IterationRecord {
            iteration,
            path: name,
            training_loss,
            loss_reduction: best.sse_reduction,
            relative_reduction: best.sse_reduction - runner_up,
            candidates: counts.cols(),
        });
        stages.push(Stage {
            path_labels: path
                .labels()
                .iter()
                .map(|&l| data.alphabet().name(l).to_string())
                .collect(),
            path,
            tree,
            loss_reduction: best.sse_reduction,
            relative_reduction: (best.sse_reduction - runner_up).max(0.0),
        });
    }

    let anchor_labels = allowed.map(|ids| {
        ids.iter()
            .map(|&l| data.alphabet().name(l).to_string())
            .collect()
    });
    Ok(BoostModel {
        version: MODEL_VERSION.to_string(),
        task,
        config: cfg.clone(),
        anchor: anchor.clone(),
        anchor_column,
        alphabet: data.alphabet().clone(),
        anchor_labels,
        q_v: data.node_attr_dim(),
        q_e: data.edge_attr_dim(),
        f0,
        eta: cfg.eta,
        initial_loss,
        stages,
        history,
    })
}

impl BoostModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialises")
    }

    pub fn from_json(text: &str) -> Result<BoostModel> {
        let model: BoostModel =
            serde_json::from_str(text).map_err(|e| Error::Model(format!("cannot parse model: {e}")))?;
        if model.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "unsupported model version {:?}",
                model.version
            )));
        }
        for (i, stage) in model.stages.iter().enumerate() {
            let width = feature_dimension(stage.path.len(), model.q_v, model.q_e, model.config.attribute_mode);
            if stage.tree.n_features != width {
                return Err(Error::Model(format!(
                    "stage {i}: tree expects {} features, path implies {width}",
                    stage.tree.n_features
                )));
            }
        }
        Ok(model)
    }

    /// Copy keeping only the first `m` stages.
    pub fn truncated(&self, m: usize) -> BoostModel {
        let mut model = self.clone();
        model.stages.truncate(m);
        model.history.truncate(m);
        model
    }

    fn check_dimensions(&self, ds: &Dataset) -> Result<()> {
        if ds.node_attr_dim() != self.q_v || ds.edge_attr_dim() != self.q_e {
            return Err(Error::Usage(format!(
                "dataset has q_v={}, q_e={}; model was trained with q_v={}, q_e={}",
                ds.node_attr_dim(),
                ds.edge_attr_dim(),
                self.q_v,
                self.q_e
            )));
        }
        Ok(())
    }

    /// Relabels `ds` with the model's anchor column and alphabet.
    pub fn prepare(&self, ds: &Dataset) -> Result<PreparedData> {
        self.check_dimensions(ds)?;
        let dataset = ds
            .relabel_by_column(self.anchor_column)?
            .remap_labels(&self.alphabet)?;
        let allowed: Option<BTreeSet<LabelId>> = self
            .anchor_labels
            .as_ref()
            .map(|names| names.iter().filter_map(|n| self.alphabet.id(n)).collect());
        let anchors = anchor_sets(&dataset, allowed.as_ref());
        Ok(PreparedData { dataset, anchors })
    }

    fn anchor_set(&self, g: &Graph) -> AnchorSet {
        match &self.anchor_labels {
            None => AnchorSet::all(g.node_count()),
            Some(names) => {
                let ids: HashSet<LabelId> = names.iter().filter_map(|n| self.alphabet.id(n)).collect();
                AnchorSet::from_nodes((0..g.node_count()).filter(|&v| ids.contains(&g.label(v))))
            }
        }
    }

    /// Stage indices grouped by path, groups in order of first selection.
    pub fn path_groups(&self) -> Vec<(LabelledPath, Vec<usize>)> {
        let mut order: Vec<(LabelledPath, Vec<usize>)> = Vec::new();
        let mut position: HashMap<&LabelledPath, usize> = HashMap::new();
        for (m, stage) in self.stages.iter().enumerate() {
            match position.get(&stage.path) {
                Some(&p) => order[p].1.push(m),
                None => {
                    position.insert(&stage.path, order.len());
                    order.push((stage.path.clone(), vec![m]));
                }
            }
        }
        order
    }

    /// `h_m(Phi[G, path_m])` for every stage (outer) and graph (inner).
    pub fn stage_outputs(&self, prepared: &PreparedData) -> Vec<Vec<f64>> {
        let mut outputs = vec![Vec::new(); self.stages.len()];
        for (path, members) in self.path_groups() {
            let rows = feature_matrix(&prepared.dataset, &prepared.anchors, &path, self.config.attribute_mode);
            for &m in &members {
                outputs[m] = rows
                    .iter()
                    .map(|row| self.stages[m].tree.predict_unchecked(row))
                    .collect();
            }
        }
        outputs
    }

    /// Per-path terms `f_u = eta * sum_{m in M_u} h_m`, restricted to stages `< upto`.
    fn path_terms(&self, outputs: &[Vec<f64>], graph: usize, upto: usize) -> Vec<(LabelledPath, f64)> {
        self.path_groups()
            .into_iter()
            .filter_map(|(path, members)| {
                let used: Vec<usize> = members.into_iter().filter(|&m| m < upto).collect();
                if used.is_empty() {
                    return None;
                }
                let sum: f64 = used.iter().map(|&m| outputs[m][graph]).sum();
                Some((path, self.eta * sum))
            })
            .collect()
    }

    fn score_from_terms(&self, terms: &[(LabelledPath, f64)]) -> f64 {
        terms.iter().fold(self.f0, |acc, (_, t)| acc + t)
    }

    /// Per-path additive terms for every graph of `ds`.
    pub fn path_contributions(&self, ds: &Dataset) -> Result<Vec<Vec<(LabelledPath, f64)>>> {
        let prepared = self.prepare(ds)?;
        let outputs = self.stage_outputs(&prepared);
        Ok((0..ds.len())
            .map(|i| self.path_terms(&outputs, i, self.stages.len()))
            .collect())
    }

    /// Raw scores for every graph of `ds` using only the first `m` stages, for
    /// each `m` in `checkpoints`.
    pub fn scores_at(&self, ds: &Dataset, checkpoints: &[usize]) -> Result<Vec<Vec<f64>>> {
        let prepared = self.prepare(ds)?;
        let outputs = self.stage_outputs(&prepared);
        Ok(checkpoints
            .iter()
            .map(|&upto| {
                (0..ds.len())
                    .map(|i| self.score_from_terms(&self.path_terms(&outputs, i, upto)))
                    .collect()
            })
            .collect())
    }

    pub fn predict_scores(&self, ds: &Dataset) -> Result<Vec<f64>> {
        Ok(self.scores_at(ds, &[self.stages.len()])?.remove(0))
    }

    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<Prediction>> {
        Ok(self
            .predict_scores(ds)?
            .into_iter()
            .map(|s| Prediction::from_score(self.task, s))
            .collect())
    }

    /// Prediction for a graph already labelled in the model's alphabet.
    pub fn predict_graph(&self, g: &Graph) -> Result<Prediction> {
        if g.node_count() > 0 && g.node_attributes(0).len() != self.q_v {
            return Err(Error::Usage(format!(
                "graph has {} node attributes, model expects {}",
                g.node_attributes(0).len(),
                self.q_v
            )));
        }
        if let Some((_, attrs)) = g.edges().next() {
            if attrs.len() != self.q_e {
                return Err(Error::Usage(format!(
                    "graph has {} edge attributes, model expects {}",
                    attrs.len(),
                    self.q_e
                )));
            }
        }
        let anchors = self.anchor_set(g);
        let mut terms = Vec::new();
        for (path, members) in self.path_groups() {
            let row = feature_row(g, &anchors, &path, self.q_v, self.q_e, self.config.attribute_mode);
            let sum: f64 = members
                .iter()
                .map(|&m| self.stages[m].tree.predict_unchecked(&row))
                .sum();
            terms.push((path, self.eta * sum));
        }
        Ok(Prediction::from_score(self.task, self.score_from_terms(&terms)))
    }
}

/// Convenience wrapper over [`BoostModel::predict_graph`].
pub fn predict(model: &BoostModel, g: &Graph) -> Result<Prediction> {
    model.predict_graph(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ImportanceVariant {
    Absolute,
    Relative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathImportance {
    pub path: LabelledPath,
    pub name: String,
    /// Summed stage reductions, rescaled so the top path scores 100.
    pub absolute: f64,
    /// Summed margins over the runner-up, rescaled so the top path scores 100.
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub entries: Vec<PathImportance>,
}

impl ImportanceReport {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["path", "absolute", "relative"])
            .map_err(crate::features::csv_error)?;
        for e in &self.entries {
            w.write_record([e.name.clone(), format!("{:.6}", e.absolute), format!("{:.6}", e.relative)])
                .map_err(crate::features::csv_error)?;
        }
        w.flush().map_err(|e| Error::Usage(format!("csv write failed: {e}")))?;
        Ok(())
    }
}

fn rescale(values: &mut [f64]) {
    let max = values.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        for v in values {
            *v = 100.0 * (*v / max);
        }
    } else {
        log::info!("all stage reductions are zero; importance scores are 0");
        values.iter_mut().for_each(|v| *v = 0.0);
    }
}

/// Per-path importance, sorted descending by `variant` (ties by first selection).
pub fn importance(model: &BoostModel, variant: ImportanceVariant) -> Result<ImportanceReport> {
    if model.stages.is_empty() {
        return Err(Error::Model("importance needs at least one stage".into()));
    }
    let groups = model.path_groups();
    let mut absolute: Vec<f64> = groups
        .iter()
        .map(|(_, ms)| ms.iter().map(|&m| model.stages[m].loss_reduction).sum())
        .collect();
    let mut relative: Vec<f64> = groups
        .iter()
        .map(|(_, ms)| ms.iter().map(|&m| model.stages[m].relative_reduction).sum())
        .collect();
    rescale(&mut absolute);
    rescale(&mut relative);
    let mut entries: Vec<PathImportance> = groups
        .into_iter()
        .enumerate()
        .map(|(i, (path, _))| PathImportance {
            name: path.display_with(&model.alphabet),
            path,
            absolute: absolute[i],
            relative: relative[i],
        })
        .collect();
    let key = |e: &PathImportance| match variant {
        ImportanceVariant::Absolute => e.absolute,
        ImportanceVariant::Relative => e.relative,
    };
    entries.sort_by(|a, b| key(b).total_cmp(&key(a)));
    Ok(ImportanceReport { entries })
}
