//! Repeated (stratified) k-fold cross-validation, metrics, learning curves and
//! the small hyperparameter grid.
//!
//! Randomness comes from one seed. Every random draw uses
//! `ChaCha8Rng::seed_from_u64(seed)` on its own stream:
//!
//! | draw                                   | stream                              |
//! |----------------------------------------|-------------------------------------|
//! | fold layout of repetition `r`          | `r`                                 |
//! | inner validation split, fold `(r, f)`  | `1 << 32 \| r << 16 \| f`           |
//! | learning-curve subsample `i`, `(r, f)` | `2 << 32 \| i << 24 \| r << 12 \| f` |

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anchors::AnchorConfig;
use crate::boosting::{train, BoostConfig, BoostModel, Prediction};
use crate::error::{Error, Result};
use crate::graph::{Dataset, Task};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub m_stop: Vec<usize>,
    pub eta: Vec<f64>,
    pub max_depth: Vec<usize>,
    /// Share of the training portion held out for the inner validation split.
    pub validation_fraction: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            m_stop: vec![100, 300, 600],
            eta: vec![0.05, 0.1, 0.3],
            max_depth: vec![2, 3],
            validation_fraction: 0.2,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m_stop.is_empty() || self.eta.is_empty() || self.max_depth.is_empty() {
            return Err(Error::Config("every grid axis needs at least one value".into()));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::Config("validation fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVPlan {
    pub folds: usize,
    pub repetitions: usize,
    pub seed: u64,
    /// Stratify folds by class (classification only).
    pub stratified: bool,
    /// Tune `m_stop`, `eta` and `max_depth` inside every training portion.
    pub grid: Option<GridSpec>,
}

impl Default for CVPlan {
    fn default() -> Self {
        CVPlan {
            folds: 10,
            repetitions: 10,
            seed: 0,
            stratified: true,
            grid: None,
        }
    }
}

impl CVPlan {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config("at least 2 folds are needed".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("at least 1 repetition is needed".into()));
        }
        if let Some(grid) = &self.grid {
            grid.validate()?;
        }
        Ok(())
    }
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn inner_stream(r: usize, f: usize) -> u64 {
    (1 << 32) | (r as u64) << 16 | f as u64
}

fn subsample_stream(i: usize, r: usize, f: usize) -> u64 {
    (2 << 32) | (i as u64) << 24 | (r as u64) << 12 | f as u64
}

/// Shuffled positions of each class (class 0 first), or `None` when some
/// class has fewer than `min_size` members.
fn class_shuffles(labels: &[f64], rng: &mut ChaCha8Rng, min_size: usize) -> Option<Vec<Vec<usize>>> {
    let mut classes: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, &y) in labels.iter().enumerate() {
        classes.entry(y.to_bits()).or_default().push(i);
    }
    let mut ordered: Vec<(f64, Vec<usize>)> = classes
        .into_values()
        .map(|members| (labels[members[0]], members))
        .collect();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0));
    if ordered.iter().any(|(_, m)| m.len() < min_size) {
        return None;
    }
    Some(
        ordered
            .into_iter()
            .map(|(_, mut members)| {
                members.shuffle(rng);
                members
            })
            .collect(),
    )
}

/// Fold index of every instance, one assignment per repetition.
///
/// Stratified layouts concatenate the shuffled members of each class and deal
/// position `i` to fold `i mod k`.
pub fn make_folds(n: usize, plan: &CVPlan, labels: Option<&[f64]>) -> Result<Vec<Vec<usize>>> {
    let k = plan.folds;
    if k < 2 {
        return Err(Error::Usage("at least 2 folds are needed".into()));
    }
    if n < k {
        return Err(Error::Usage(format!("{n} instances cannot fill {k} folds")));
    }
    if let Some(labels) = labels {
        if labels.len() != n {
            return Err(Error::Usage(format!("{} labels for {n} instances", labels.len())));
        }
    }
    let mut warned = false;
    let mut layouts = Vec::with_capacity(plan.repetitions);
    for r in 0..plan.repetitions {
        let mut rng = stream_rng(plan.seed, r as u64);
        let order: Vec<usize> = match labels.filter(|_| plan.stratified) {
            Some(labels) => match class_shuffles(labels, &mut rng, k) {
                Some(classes) => classes.concat(),
                None => {
                    if !warned {
                        log::warn!("a class has fewer than {k} members; folds are not stratified");
                        warned = true;
                    }
                    let mut rng = stream_rng(plan.seed, r as u64);
                    let mut order: Vec<usize> = (0..n).collect();
                    order.shuffle(&mut rng);
                    order
                }
            },
            None => {
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut rng);
                order
            }
        };
        let mut fold = vec![0; n];
        for (position, &i) in order.iter().enumerate() {
            fold[i] = position % k;
        }
        layouts.push(fold);
    }
    Ok(layouts)
}

fn check_lengths(preds: &[f64], targets: &[f64]) -> Result<()> {
    if preds.is_empty() {
        return Err(Error::Usage("empty prediction vector".into()));
    }
    if preds.len() != targets.len() {
        return Err(Error::Usage(format!(
            "{} predictions but {} targets",
            preds.len(),
            targets.len()
        )));
    }
    Ok(())
}

/// Percentage of exact matches.
pub fn accuracy(preds: &[f64], targets: &[f64]) -> Result<f64> {
    check_lengths(preds, targets)?;
    let correct = preds.iter().zip(targets).filter(|(p, t)| p == t).count();
    Ok(100.0 * correct as f64 / preds.len() as f64)
}

/// Unweighted mean of the two per-class F1 scores, as a percentage.
pub fn f1_macro(preds: &[f64], targets: &[f64]) -> Result<f64> {
    check_lengths(preds, targets)?;
    let mut total = 0.0;
    for class in [0.0, 1.0] {
        let tp = preds.iter().zip(targets).filter(|&(&p, &t)| p == class && t == class).count() as f64;
        let fp = preds.iter().zip(targets).filter(|&(&p, &t)| p == class && t != class).count() as f64;
        let fn_ = preds.iter().zip(targets).filter(|&(&p, &t)| p != class && t == class).count() as f64;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        if precision + recall == 0.0 {
            log::debug!("class {class}: precision and recall are both 0; F1 counted as 0");
        } else {
            total += 2.0 * precision * recall / (precision + recall);
        }
    }
    Ok(100.0 * total / 2.0)
}

/// Mean absolute error and coefficient of determination. R² is NaN when the
/// targets have no variance.
pub fn regression_metrics(preds: &[f64], targets: &[f64]) -> Result<(f64, f64)> {
    check_lengths(preds, targets)?;
    let n = preds.len() as f64;
    let mae = preds.iter().zip(targets).map(|(p, t)| (p - t).abs()).sum::<f64>() / n;
    let mean = targets.iter().sum::<f64>() / n;
    let ss_tot: f64 = targets.iter().map(|t| (t - mean) * (t - mean)).sum();
    let ss_res: f64 = preds.iter().zip(targets).map(|(p, t)| (t - p) * (t - p)).sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        log::warn!("targets have zero variance; R^2 is undefined");
        f64::NAN
    };
    Ok((mae, r2))
}

/// Metric values for one prediction set, keyed by metric name.
pub fn score_predictions(task: Task, preds: &[Prediction], targets: &[f64]) -> Result<BTreeMap<String, f64>> {
    let labels: Vec<f64> = preds.iter().map(Prediction::label).collect();
    let mut out = BTreeMap::new();
    match task {
        Task::Classification => {
            out.insert("accuracy".to_string(), accuracy(&labels, targets)?);
            out.insert("f1_macro".to_string(), f1_macro(&labels, targets)?);
        }
        Task::Regression => {
            let (mae, r2) = regression_metrics(&labels, targets)?;
            out.insert("mae".to_string(), mae);
            out.insert("r2".to_string(), r2);
        }
    }
    Ok(out)
}

/// Higher is better for every metric except MAE.
fn selection_score(task: Task, preds: &[Prediction], targets: &[f64]) -> Result<f64> {
    let metrics = score_predictions(task, preds, targets)?;
    Ok(match task {
        Task::Classification => metrics["accuracy"],
        Task::Regression => -metrics["mae"],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Mean and sample standard deviation (0 for a single value).
    pub fn of(values: &[f64]) -> MeanStd {
        let n = values.len();
        if n == 0 {
            return MeanStd { mean: f64::NAN, std: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChosenParams {
    pub m_stop: usize,
    pub eta: f64,
    pub max_depth: usize,
}

/// Held-out prediction from one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub repetition: usize,
    pub fold: usize,
    pub graph: usize,
    pub target: f64,
    pub score: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub repetition: usize,
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub anchor_column: usize,
    pub stages: usize,
    pub params: ChosenParams,
    pub metrics: BTreeMap<String, f64>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub task: Task,
    pub folds: usize,
    pub repetitions: usize,
    pub seed: u64,
    /// How `std` is computed.
    pub aggregation: String,
    pub metrics: BTreeMap<String, MeanStd>,
    pub per_repetition: Vec<BTreeMap<String, f64>>,
    pub fold_seconds: MeanStd,
    pub fold_details: Vec<FoldSummary>,
    #[serde(skip)]
    pub predictions: Vec<PredictionRecord>,
}

fn fmt_metric(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.10}")
    }
}

impl MetricReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// `metric,mean,std` rows. Timings are left out so reruns compare equal.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["metric", "mean", "std"]).map_err(crate::features::csv_error)?;
        for (name, m) in &self.metrics {
            w.write_record([name.as_str(), &fmt_metric(m.mean), &fmt_metric(m.std)])
                .map_err(crate::features::csv_error)?;
        }
        w.flush().map_err(|e| Error::Usage(format!("csv write failed: {e}")))?;
        Ok(())
    }

    pub fn write_predictions_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["repetition", "fold", "graph", "target", "score", "predicted"])
            .map_err(crate::features::csv_error)?;
        for p in &self.predictions {
            w.write_record([
                p.repetition.to_string(),
                p.fold.to_string(),
                p.graph.to_string(),
                crate::graph::format_value(p.target),
                format!("{:.10}", p.score),
                crate::graph::format_value(p.predicted),
            ])
            .map_err(crate::features::csv_error)?;
        }
        w.flush().map_err(|e| Error::Usage(format!("csv write failed: {e}")))?;
        Ok(())
    }
}

/// Seeded split of `indices` into (train, validation); stratified for classification.
fn validation_split(ds: &Dataset, indices: &[usize], fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut groups: Vec<Vec<usize>> = match ds.task() {
        Task::Classification => {
            let labels: Vec<f64> = indices.iter().map(|&i| ds.targets()[i]).collect();
            class_shuffles(&labels, rng, 0)
                .unwrap_or_default()
                .into_iter()
                .map(|g| g.into_iter().map(|p| indices[p]).collect())
                .collect()
        }
        Task::Regression => {
            let mut all = indices.to_vec();
            all.shuffle(rng);
            vec![all]
        }
    };
    let mut train = Vec::new();
    let mut valid = Vec::new();
    for group in &mut groups {
        let held = ((group.len() as f64 * fraction).round() as usize).min(group.len().saturating_sub(1));
        valid.extend_from_slice(&group[..held]);
        train.extend_from_slice(&group[held..]);
    }
    train.sort_unstable();
    valid.sort_unstable();
    (train, valid)
}

/// Picks grid values on an inner split of `train_idx`. Ties keep the earlier
/// grid point (order: eta, max_depth, m_stop).
fn tune(
    ds: &Dataset,
    train_idx: &[usize],
    cfg: &BoostConfig,
    anchor: &AnchorConfig,
    grid: &GridSpec,
    rng: &mut ChaCha8Rng,
) -> Result<ChosenParams> {
    let (inner_train, inner_valid) = validation_split(ds, train_idx, grid.validation_fraction, rng);
    if inner_valid.is_empty() {
        return Err(Error::Training("inner validation split is empty".into()));
    }
    let train_set = ds.subset(&inner_train);
    let valid_set = ds.subset(&inner_valid);
    let mut checkpoints = grid.m_stop.clone();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let longest = *checkpoints.last().expect("non-empty grid");

    let mut best: Option<(f64, ChosenParams)> = None;
    for &eta in &grid.eta {
        for &max_depth in &grid.max_depth {
            let run = BoostConfig {
                m_stop: longest,
                eta,
                max_depth,
                ..cfg.clone()
            };
            let model = train(&train_set, &run, anchor)?;
            let scores = model.scores_at(&valid_set, &checkpoints)?;
            for (&m_stop, scores) in checkpoints.iter().zip(scores) {
                let preds = to_predictions(&model, &scores);
                let s = selection_score(ds.task(), &preds, valid_set.targets())?;
                if best.as_ref().is_none_or(|(b, _)| s > *b) {
                    best = Some((s, ChosenParams { m_stop, eta, max_depth }));
                }
            }
        }
    }
    Ok(best.expect("non-empty grid").1)
}

fn to_predictions(model: &BoostModel, scores: &[f64]) -> Vec<Prediction> {
    scores.iter().map(|&s| Prediction::from_score(model.task, s)).collect()
}

struct FoldOutcome {
    summary: FoldSummary,
    predictions: Vec<PredictionRecord>,
}

fn run_fold(
    ds: &Dataset,
    cfg: &BoostConfig,
    anchor: &AnchorConfig,
    plan: &CVPlan,
    train_idx: &[usize],
    test_idx: &[usize],
    r: usize,
    f: usize,
) -> Result<FoldOutcome> {
    let start = Instant::now();
    let context = |e: Error| e.with_context(&format!("repetition {r}, fold {f}"));
    let params = match &plan.grid {
        Some(grid) => {
            let mut rng = stream_rng(plan.seed, inner_stream(r, f));
            tune(ds, train_idx, cfg, anchor, grid, &mut rng).map_err(context)?
        }
        None => ChosenParams {
            m_stop: cfg.m_stop,
            eta: cfg.eta,
            max_depth: cfg.max_depth,
        },
    };
    let run = BoostConfig {
        m_stop: params.m_stop,
        eta: params.eta,
        max_depth: params.max_depth,
        ..cfg.clone()
    };
    let train_set = ds.subset(train_idx);
    let test_set = ds.subset(test_idx);
    let model = train(&train_set, &run, anchor).map_err(context)?;
    let preds = model.predict_dataset(&test_set).map_err(context)?;
    let metrics = score_predictions(ds.task(), &preds, test_set.targets())?;
    let predictions = test_idx
        .iter()
        .zip(&preds)
        .map(|(&graph, p)| PredictionRecord {
            repetition: r,
            fold: f,
            graph,
            target: ds.targets()[graph],
            score: p.score(),
            predicted: p.label(),
        })
        .collect();
    Ok(FoldOutcome {
        summary: FoldSummary {
            repetition: r,
            fold: f,
            train_size: train_idx.len(),
            test_size: test_idx.len(),
            anchor_column: model.anchor_column,
            stages: model.stages.len(),
            params,
            metrics,
            seconds: start.elapsed().as_secs_f64(),
        },
        predictions,
    })
}

/// Training-portion filter applied before each fold is trained.
type Subsampler<'a> = dyn Fn(usize, usize, &[usize]) -> Option<Vec<usize>> + Sync + 'a;

fn cross_validate(
    ds: &Dataset,
    cfg: &BoostConfig,
    anchor: &AnchorConfig,
    plan: &CVPlan,
    subsample: &Subsampler<'_>,
) -> Result<Option<MetricReport>> {
    plan.validate()?;
    cfg.validate()?;
    let labels = (ds.task() == Task::Classification).then(|| ds.targets());
    let layouts = make_folds(ds.len(), plan, labels)?;
    let k = plan.folds;

    let mut jobs = Vec::new();
    for (r, layout) in layouts.iter().enumerate() {
        for f in 0..k {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..ds.len()).partition(|&i| layout[i] == f);
            match subsample(r, f, &train) {
                Some(train) => jobs.push((r, f, train, test)),
                None => return Ok(None),
            }
        }
    }
    let outcomes: Vec<Result<FoldOutcome>> = jobs
        .par_iter()
        .map(|(r, f, train, test)| run_fold(ds, cfg, anchor, plan, train, test, *r, *f))
        .collect();
    let outcomes: Vec<FoldOutcome> = outcomes.into_iter().collect::<Result<_>>()?;

    let names: Vec<String> = outcomes[0].summary.metrics.keys().cloned().collect();
    let per_repetition: Vec<BTreeMap<String, f64>> = (0..plan.repetitions)
        .map(|r| {
            let folds: Vec<&FoldOutcome> = outcomes.iter().filter(|o| o.summary.repetition == r).collect();
            names
                .iter()
                .map(|name| {
                    let total: f64 = folds.iter().map(|o| o.summary.metrics[name]).sum();
                    (name.clone(), total / folds.len() as f64)
                })
                .collect()
        })
        .collect();
    let metrics = names
        .iter()
        .map(|name| {
            let values: Vec<f64> = per_repetition.iter().map(|m| m[name]).collect();
            (name.clone(), MeanStd::of(&values))
        })
        .collect();
    let seconds: Vec<f64> = outcomes.iter().map(|o| o.summary.seconds).collect();
    let mut predictions = Vec::new();
    let mut fold_details = Vec::new();
    for o in outcomes {
        predictions.extend(o.predictions);
        fold_details.push(o.summary);
    }
    Ok(Some(MetricReport {
        task: ds.task(),
        folds: k,
        repetitions: plan.repetitions,
        seed: plan.seed,
        aggregation: "each repetition is the mean over its folds; std is the sample std of repetition means"
            .to_string(),
        metrics,
        per_repetition,
        fold_seconds: MeanStd::of(&seconds),
        fold_details,
        predictions,
    }))
}

/// Repeated k-fold cross-validation. Anchor selection and tuning see only the
/// training portion of each fold.
pub fn run_cv(ds: &Dataset, cfg: &BoostConfig, anchor: &AnchorConfig, plan: &CVPlan) -> Result<MetricReport> {
    let report = cross_validate(ds, cfg, anchor, plan, &|_, _, train| Some(train.to_vec()))?;
    Ok(report.expect("no subsampling"))
}

/// Seeded (stratified for classification) subsample of `indices`, ascending.
/// `None` when a class present in `indices` would vanish.
fn subsample(ds: &Dataset, indices: &[usize], fraction: f64, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    let groups: Vec<Vec<usize>> = match ds.task() {
        Task::Classification => {
            let labels: Vec<f64> = indices.iter().map(|&i| ds.targets()[i]).collect();
            class_shuffles(&labels, rng, 0)?
                .into_iter()
                .map(|g| g.into_iter().map(|p| indices[p]).collect())
                .collect()
        }
        Task::Regression => {
            let mut all = indices.to_vec();
            all.shuffle(rng);
            vec![all]
        }
    };
    let mut out = Vec::new();
    for group in groups {
        let keep = ((group.len() as f64 * fraction).round() as usize).min(group.len());
        if keep == 0 {
            return None;
        }
        out.extend_from_slice(&group[..keep]);
    }
    out.sort_unstable();
    Some(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub fraction: f64,
    pub report: MetricReport,
}

/// Cross-validation with the training portion of every fold subsampled to each
/// fraction. Test folds are the same for every fraction.
pub fn learning_curve(
    ds: &Dataset,
    fractions: &[f64],
    cfg: &BoostConfig,
    anchor: &AnchorConfig,
    plan: &CVPlan,
) -> Result<Vec<CurvePoint>> {
    if fractions.is_empty() {
        return Err(Error::Usage("no fractions given".into()));
    }
    for &f in fractions {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::Usage(format!("fraction {f} is outside (0, 1]")));
        }
    }
    if fractions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage("fractions must be strictly ascending".into()));
    }
    let mut points = Vec::new();
    for (i, &fraction) in fractions.iter().enumerate() {
        let report = if fraction == 1.0 {
            Some(run_cv(ds, cfg, anchor, plan)?)
        } else {
            cross_validate(ds, cfg, anchor, plan, &|r, f, train| {
                let mut rng = stream_rng(plan.seed, subsample_stream(i, r, f));
                subsample(ds, train, fraction, &mut rng)
            })?
        };
        match report {
            Some(report) => points.push(CurvePoint { fraction, report }),
            None => log::warn!("fraction {fraction}: a class vanishes from some training portion; skipped"),
        }
    }
    Ok(points)
}

/// One CSV row per fraction: `fraction,<metric>_mean,<metric>_std,...`.
pub fn write_curve_csv<W: std::io::Write>(points: &[CurvePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let names: Vec<String> = points
        .first()
        .map(|p| p.report.metrics.keys().cloned().collect())
        .unwrap_or_default();
    let mut header = vec!["fraction".to_string()];
    for n in &names {
        header.push(format!("{n}_mean"));
        header.push(format!("{n}_std"));
    }
    w.write_record(&header).map_err(crate::features::csv_error)?;
    for p in points {
        let mut row = vec![format!("{}", p.fraction)];
        for n in &names {
            let m = p.report.metrics[n];
            row.push(fmt_metric(m.mean));
            row.push(fmt_metric(m.std));
        }
        w.write_record(&row).map_err(crate::features::csv_error)?;
    }
    w.flush().map_err(|e| Error::Usage(format!("csv write failed: {e}")))?;
    Ok(())
}
