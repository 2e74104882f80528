//! Command-line front end.
//!
//! Settings resolve as defaults < `--config` file < flags. Every command writes
//! the resolved settings to `<out>/resolved_config` in the same `key = value`
//! format the config file uses, so a run can be replayed with
//! `--config <out>/resolved_config`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::anchors::{AnchorConfig, AnchorMode, DEFAULT_CATEGORICAL_THRESHOLD};
use crate::boosting::{importance, train, BoostConfig, BoostModel, ImportanceVariant};
use crate::error::{Error, Result};
use crate::eval::{learning_curve, run_cv, write_curve_csv, CVPlan, GridSpec};
use crate::features::{build_count_matrix, AttributeMode};
use crate::graph::Task;
use crate::paths::LabelledPath;
use crate::tudata::{load_dataset, LoadOptions};

#[derive(Debug, Parser)]
#[command(name = "pathboost", version, about = "Gradient boosting over labelled graph paths")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model on a whole dataset.
    Train(TrainArgs),
    /// Repeated k-fold cross-validation.
    Cv(CvArgs),
    /// Per-path importance of a trained model.
    Importance(ImportanceArgs),
    /// Cross-validation with growing training portions.
    LearningCurve(CurveArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Key-value settings file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct DataArgs {
    /// Directory holding the `<name>_*.txt` files.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Dataset name (default: directory name).
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, value_enum)]
    pub task: Option<Task>,
    /// Column of the graph attribute file used as regression target.
    #[arg(long)]
    pub target_index: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct AnchorArgs {
    #[arg(long, value_enum)]
    pub anchor_mode: Option<AnchorMode>,
    /// Comma-separated label names for `--anchor-mode user`.
    #[arg(long)]
    pub anchor_labels: Option<String>,
    #[arg(long)]
    pub categorical_threshold: Option<usize>,
    /// Anchor only at the k rarest labels.
    #[arg(long)]
    pub rare_top_k: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct BoostArgs {
    #[arg(long)]
    pub m_stop: Option<usize>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_leaf: Option<usize>,
    #[arg(long, value_enum)]
    pub attribute_mode: Option<AttributeMode>,
    /// Longest candidate path in edges.
    #[arg(long)]
    pub max_path_length: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct PlanArgs {
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Plain shuffled folds even for classification.
    #[arg(long)]
    pub no_stratify: bool,
    /// Tune m_stop, eta and max_depth on an inner split of every training portion.
    #[arg(long)]
    pub grid: bool,
    /// Comma-separated m_stop grid values.
    #[arg(long)]
    pub grid_m_stop: Option<String>,
    #[arg(long)]
    pub grid_eta: Option<String>,
    #[arg(long)]
    pub grid_max_depth: Option<String>,
    #[arg(long)]
    pub validation_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub anchor: AnchorArgs,
    #[command(flatten)]
    pub boost: BoostArgs,
    /// Write the count matrix of the selected paths to this CSV file.
    #[arg(long)]
    pub dump_features: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub anchor: AnchorArgs,
    #[command(flatten)]
    pub boost: BoostArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Also write every held-out prediction to predictions.csv.
    #[arg(long)]
    pub dump_predictions: bool,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Model file written by `train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Ordering of the rows.
    #[arg(long, value_enum)]
    pub variant: Option<ImportanceVariant>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub anchor: AnchorArgs,
    #[command(flatten)]
    pub boost: BoostArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// `start:stop:step` or a comma-separated list, each in (0, 1].
    #[arg(long)]
    pub fractions: Option<String>,
}

/// Merged string settings, keyed by flag name without the leading dashes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings(BTreeMap<String, String>);

fn normalize_key(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl Settings {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, origin: &str) -> Result<Settings> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                file: origin.to_string(),
                line: i + 1,
                message: format!("expected key = value, got {line:?}"),
            })?;
            map.insert(normalize_key(key), value.trim().to_string());
        }
        Ok(Settings(map))
    }

    pub fn read(path: &Path) -> Result<Settings> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Settings::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: Option<impl ToString>) {
        if let Some(v) = value {
            self.0.insert(key.to_string(), v.to_string());
        }
    }

    fn set_enum<T: ValueEnum>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            let name = v.to_possible_value().expect("no skipped variants").get_name().to_string();
            self.0.insert(key.to_string(), name);
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| Error::Config(format!("{key} = {v:?}: {e}"))))
            .transpose()
    }

    fn parsed_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    fn enum_or<T: ValueEnum>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => T::from_str(v, true).map_err(|e| Error::Config(format!("{key} = {v:?}: {e}"))),
        }
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<T>()
                            .map_err(|e| Error::Config(format!("{key} = {v:?}: {e}")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

impl CommonArgs {
    fn apply(&self, s: &mut Settings) {
        s.set("out", self.out.as_ref().map(|p| p.display()));
        s.set("threads", self.threads);
    }
}

impl DataArgs {
    fn apply(&self, s: &mut Settings) {
        s.set("data", self.data.as_ref().map(|p| p.display()));
        s.set("name", self.name.as_ref());
        s.set_enum("task", self.task);
        s.set("target-index", self.target_index);
    }
}

impl AnchorArgs {
    fn apply(&self, s: &mut Settings) {
        s.set_enum("anchor-mode", self.anchor_mode);
        s.set("anchor-labels", self.anchor_labels.as_ref());
        s.set("categorical-threshold", self.categorical_threshold);
        s.set("rare-top-k", self.rare_top_k);
    }
}

impl BoostArgs {
    fn apply(&self, s: &mut Settings) {
        s.set("m-stop", self.m_stop);
        s.set("eta", self.eta);
        s.set("max-depth", self.max_depth);
        s.set("min-leaf", self.min_leaf);
        s.set_enum("attribute-mode", self.attribute_mode);
        s.set("max-path-length", self.max_path_length);
        s.set("seed", self.seed);
    }
}

impl PlanArgs {
    fn apply(&self, s: &mut Settings) {
        s.set("folds", self.folds);
        s.set("reps", self.reps);
        if self.no_stratify {
            s.set("stratified", Some(false));
        }
        if self.grid {
            s.set("grid", Some(true));
        }
        s.set("grid-m-stop", self.grid_m_stop.as_ref());
        s.set("grid-eta", self.grid_eta.as_ref());
        s.set("grid-max-depth", self.grid_max_depth.as_ref());
        s.set("validation-fraction", self.validation_fraction);
    }
}

fn base_settings(common: &CommonArgs) -> Result<Settings> {
    match &common.config {
        Some(path) => Settings::read(path),
        None => Ok(Settings::default()),
    }
}

/// Fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub name: Option<String>,
    pub task: Task,
    pub target_index: usize,
    pub anchor: AnchorConfig,
    pub boost: BoostConfig,
    pub plan: CVPlan,
    pub out: PathBuf,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn from_settings(s: &Settings) -> Result<RunConfig> {
        let task = s.enum_or("task", Task::Classification)?;
        let anchor = AnchorConfig {
            mode: s.enum_or("anchor-mode", AnchorMode::Auto)?,
            user_labels: s
                .get("anchor-labels")
                .map(|v| v.split(',').map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect())
                .unwrap_or_default(),
            categorical_threshold: s.parsed_or("categorical-threshold", DEFAULT_CATEGORICAL_THRESHOLD)?,
            rare_top_k: s.parsed("rare-top-k")?,
        };
        let defaults = BoostConfig::default();
        let boost = BoostConfig {
            m_stop: s.parsed_or("m-stop", defaults.m_stop)?,
            eta: s.parsed_or("eta", defaults.eta)?,
            task,
            max_depth: s.parsed_or("max-depth", defaults.max_depth)?,
            min_leaf: s.parsed_or("min-leaf", defaults.min_leaf)?,
            attribute_mode: s.enum_or("attribute-mode", defaults.attribute_mode)?,
            max_path_length: s.parsed_or("max-path-length", defaults.max_path_length)?,
            seed: s.parsed_or("seed", defaults.seed)?,
        };
        let plan_defaults = CVPlan::default();
        let grid = if s.parsed_or("grid", false)? {
            let g = GridSpec::default();
            Some(GridSpec {
                m_stop: s.list("grid-m-stop")?.unwrap_or(g.m_stop),
                eta: s.list("grid-eta")?.unwrap_or(g.eta),
                max_depth: s.list("grid-max-depth")?.unwrap_or(g.max_depth),
                validation_fraction: s.parsed_or("validation-fraction", g.validation_fraction)?,
            })
        } else {
            None
        };
        let plan = CVPlan {
            folds: s.parsed_or("folds", plan_defaults.folds)?,
            repetitions: s.parsed_or("reps", plan_defaults.repetitions)?,
            seed: boost.seed,
            stratified: s.parsed_or("stratified", plan_defaults.stratified)?,
            grid,
        };
        let threads = s.parsed("threads")?;
        if threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        boost.validate()?;
        anchor.validate()?;
        plan.validate()?;
        Ok(RunConfig {
            data: s.get("data").map(PathBuf::from),
            name: s.get("name").map(str::to_string),
            task,
            target_index: s.parsed_or("target-index", 0)?,
            anchor,
            boost,
            plan,
            out: s.get("out").map_or_else(|| PathBuf::from("."), PathBuf::from),
            threads,
        })
    }

    /// Every setting with its resolved value, in config-file format.
    pub fn to_settings(&self) -> Settings {
        let mut s = Settings::default();
        s.set("data", self.data.as_ref().map(|p| p.display()));
        s.set("name", self.name.as_ref());
        s.set_enum("task", Some(self.task));
        s.set("target-index", Some(self.target_index));
        s.set_enum("anchor-mode", Some(self.anchor.mode));
        if !self.anchor.user_labels.is_empty() {
            s.set("anchor-labels", Some(self.anchor.user_labels.join(",")));
        }
        s.set("categorical-threshold", Some(self.anchor.categorical_threshold));
        s.set("rare-top-k", self.anchor.rare_top_k);
        s.set("m-stop", Some(self.boost.m_stop));
        s.set("eta", Some(self.boost.eta));
        s.set("max-depth", Some(self.boost.max_depth));
        s.set("min-leaf", Some(self.boost.min_leaf));
        s.set_enum("attribute-mode", Some(self.boost.attribute_mode));
        s.set("max-path-length", Some(self.boost.max_path_length));
        s.set("seed", Some(self.boost.seed));
        s.set("folds", Some(self.plan.folds));
        s.set("reps", Some(self.plan.repetitions));
        s.set("stratified", Some(self.plan.stratified));
        s.set("grid", Some(self.plan.grid.is_some()));
        if let Some(g) = &self.plan.grid {
            let join = |v: Vec<String>| v.join(",");
            s.set("grid-m-stop", Some(join(g.m_stop.iter().map(|x| x.to_string()).collect())));
            s.set("grid-eta", Some(join(g.eta.iter().map(|x| x.to_string()).collect())));
            s.set("grid-max-depth", Some(join(g.max_depth.iter().map(|x| x.to_string()).collect())));
            s.set("validation-fraction", Some(g.validation_fraction));
        }
        s.set("out", Some(self.out.display()));
        s.set("threads", self.threads);
        s
    }

    fn load(&self) -> Result<(crate::graph::Dataset, crate::tudata::LoadReport)> {
        let dir = self
            .data
            .as_ref()
            .ok_or_else(|| Error::Config("no dataset directory given (--data)".into()))?;
        let name = match &self.name {
            Some(n) => n.clone(),
            None => dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .ok_or_else(|| Error::Config("cannot infer the dataset name; pass --name".into()))?,
        };
        load_dataset(
            dir,
            &name,
            LoadOptions {
                task: self.task,
                target_index: self.target_index,
            },
        )
    }
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_fractions(text: &str) -> Result<Vec<f64>> {
    let bad = |m: String| Error::Usage(format!("invalid fractions {text:?}: {m}"));
    let values: Vec<f64> = if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| bad(e.to_string())))
            .collect::<Result<_>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(bad("expected start:stop:step".into()));
        };
        if step.is_nan() || step <= 0.0 {
            return Err(bad("step must be positive".into()));
        }
        let mut out = Vec::new();
        let mut i = 0;
        loop {
            let v = ((start + i as f64 * step) * 1e9).round() / 1e9;
            if v > stop + 1e-9 {
                break;
            }
            out.push(v);
            i += 1;
        }
        out
    } else {
        text.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| bad(e.to_string())))
            .collect::<Result<_>>()?
    };
    if values.is_empty() {
        return Err(bad("no values".into()));
    }
    for &v in &values {
        if !(v > 0.0 && v <= 1.0) {
            return Err(bad(format!("{v} is outside (0, 1]")));
        }
    }
    Ok(values)
}

fn write(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}")))?
            .install(f),
    }
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let mut s = base_settings(&args.common)?;
    args.common.apply(&mut s);
    args.data.apply(&mut s);
    args.anchor.apply(&mut s);
    args.boost.apply(&mut s);
    let run = RunConfig::from_settings(&s)?;
    prepare_out(&run.out)?;
    let (ds, report) = run.load()?;
    log::info!("loaded {} graphs", ds.len());
    let model = with_threads(run.threads, || train(&ds, &run.boost, &run.anchor))?;

    let mut log_csv = String::from("iteration,path,training_loss,loss_reduction,relative_reduction,candidates\n");
    for r in &model.history {
        log_csv.push_str(&format!(
            "{},{},{:.10},{:.10},{:.10},{}\n",
            r.iteration, r.path, r.training_loss, r.loss_reduction, r.relative_reduction, r.candidates
        ));
    }
    write(&run.out.join("model.json"), model.to_json().as_bytes())?;
    write(&run.out.join("training_log.csv"), log_csv.as_bytes())?;
    write(&run.out.join("load_report.json"), report.to_json().as_bytes())?;
    write(&run.out.join("resolved_config"), run.to_settings().render().as_bytes())?;

    if let Some(path) = &args.dump_features {
        let prepared = model.prepare(&ds)?;
        let mut paths: Vec<LabelledPath> = model.path_groups().into_iter().map(|(p, _)| p).collect();
        paths.dedup();
        let matrix = build_count_matrix(&prepared.dataset, &prepared.anchors, &paths)?;
        let bytes = csv_bytes(|buf| matrix.write_csv(buf, &model.alphabet))?;
        write(path, &bytes)?;
    }
    println!(
        "trained {} stages; training loss {:.6} -> {:.6}",
        model.stages.len(),
        model.initial_loss,
        model.history.last().map_or(model.initial_loss, |r| r.training_loss)
    );
    Ok(())
}

fn cmd_cv(args: &CvArgs) -> Result<()> {
    let mut s = base_settings(&args.common)?;
    args.common.apply(&mut s);
    args.data.apply(&mut s);
    args.anchor.apply(&mut s);
    args.boost.apply(&mut s);
    args.plan.apply(&mut s);
    let run = RunConfig::from_settings(&s)?;
    prepare_out(&run.out)?;
    let (ds, _) = run.load()?;
    let report = with_threads(run.threads, || run_cv(&ds, &run.boost, &run.anchor, &run.plan))?;
    write(&run.out.join("cv_report.json"), report.to_json().as_bytes())?;
    write(&run.out.join("cv_report.csv"), &csv_bytes(|b| report.write_csv(b))?)?;
    write(&run.out.join("resolved_config"), run.to_settings().render().as_bytes())?;
    if args.dump_predictions {
        write(&run.out.join("predictions.csv"), &csv_bytes(|b| report.write_predictions_csv(b))?)?;
    }
    for (name, m) in &report.metrics {
        println!("{name}: {:.4} +- {:.4}", m.mean, m.std);
    }
    Ok(())
}

fn cmd_importance(args: &ImportanceArgs) -> Result<()> {
    let mut s = base_settings(&args.common)?;
    args.common.apply(&mut s);
    s.set("model", args.model.as_ref().map(|p| p.display()));
    s.set_enum("variant", args.variant);
    let out = s.get("out").map_or_else(|| PathBuf::from("."), PathBuf::from);
    let model_path = s
        .get("model")
        .map(PathBuf::from)
        .unwrap_or_else(|| out.join("model.json"));
    let variant = s.enum_or("variant", ImportanceVariant::Absolute)?;
    if !model_path.exists() {
        return Err(Error::MissingFile(model_path));
    }
    let text = fs::read_to_string(&model_path).map_err(|e| Error::io(&model_path, e))?;
    let model = BoostModel::from_json(&text)?;
    let report = importance(&model, variant)?;
    prepare_out(&out)?;
    write(&out.join("importance.csv"), &csv_bytes(|b| report.write_csv(b))?)?;
    let mut resolved = Settings::default();
    resolved.set("model", Some(model_path.display()));
    resolved.set_enum("variant", Some(variant));
    resolved.set("out", Some(out.display()));
    write(&out.join("resolved_config"), resolved.render().as_bytes())?;
    for e in report.entries.iter().take(10) {
        println!("{:>8.3} {:>8.3}  {}", e.absolute, e.relative, e.name);
    }
    Ok(())
}

fn cmd_learning_curve(args: &CurveArgs) -> Result<()> {
    let mut s = base_settings(&args.common)?;
    args.common.apply(&mut s);
    args.data.apply(&mut s);
    args.anchor.apply(&mut s);
    args.boost.apply(&mut s);
    args.plan.apply(&mut s);
    s.set("fractions", args.fractions.as_ref());
    let fractions = parse_fractions(s.get("fractions").unwrap_or("0.1:1.0:0.1"))?;
    let run = RunConfig::from_settings(&s)?;
    prepare_out(&run.out)?;
    let (ds, _) = run.load()?;
    let points = with_threads(run.threads, || {
        learning_curve(&ds, &fractions, &run.boost, &run.anchor, &run.plan)
    })?;
    write(&run.out.join("learning_curve.csv"), &csv_bytes(|b| write_curve_csv(&points, b))?)?;
    let json = serde_json::to_string_pretty(&points).expect("curve serialises");
    write(&run.out.join("learning_curve.json"), json.as_bytes())?;
    let mut resolved = run.to_settings();
    resolved.set("fractions", Some(fractions.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(",")));
    write(&run.out.join("resolved_config"), resolved.render().as_bytes())?;
    println!("{} fractions evaluated", points.len());
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Cv(a) => cmd_cv(a),
        Command::Importance(a) => cmd_importance(a),
        Command::LearningCurve(a) => cmd_learning_curve(a),
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
