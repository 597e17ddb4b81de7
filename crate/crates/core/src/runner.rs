//! Config-driven pipeline stages: dataset generation, training,
//! optimization, analysis and one-shot evaluation. Every stage validates
//! and computes everything before it writes its first file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dataset::{self, Dataset, SplitRatios, TARGET_NAMES};
use crate::design_space::{DesignPoint, DesignSpace};
use crate::error::{Error, Result};
use crate::mlp::{self, Activation, MlpConfig, MlpModel, SearchSpace};
use crate::nsga2::{self, NsgaConfig};
use crate::oracle::{self, OracleConfig};
use crate::pareto::{self, DesignSolution};
use crate::rng::PRNG_ALGORITHM;

/// Offsets added to the global seed when a block has no seed of its own.
pub const ORACLE_SEED_OFFSET: u64 = 0;
pub const SPLIT_SEED_OFFSET: u64 = 1;
pub const TRAINING_SEED_OFFSET: u64 = 2;
pub const NSGA_SEED_OFFSET: u64 = 3;
pub const ANALYSIS_SEED_OFFSET: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleBlock {
    pub noise_sigma: f64,
    pub seed: Option<u64>,
}

impl Default for OracleBlock {
    fn default() -> Self {
        Self {
            noise_sigma: 0.0,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingBlock {
    pub hidden_sizes: [usize; 3],
    pub hidden_activation: Activation,
    pub dropout_rate: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub split: SplitRatios,
    pub k_folds: usize,
    /// Candidates scored when training with grid search.
    pub grid_search: SearchSpace,
    pub seed: Option<u64>,
    /// Seed of the train/validation/test shuffle.
    pub split_seed: Option<u64>,
}

impl Default for TrainingBlock {
    fn default() -> Self {
        let m = MlpConfig::default();
        Self {
            hidden_sizes: m.hidden_sizes,
            hidden_activation: m.hidden_activation,
            dropout_rate: m.dropout_rate,
            learning_rate: m.learning_rate,
            batch_size: m.batch_size,
            epochs: m.epochs,
            split: SplitRatios::default(),
            k_folds: 5,
            grid_search: SearchSpace::default(),
            seed: None,
            split_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NsgaBlock {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub sbx_eta: f64,
    pub pm_eta: f64,
    pub seed: Option<u64>,
}

impl Default for NsgaBlock {
    fn default() -> Self {
        let n = NsgaConfig::default();
        Self {
            population_size: n.population_size,
            generations: n.generations,
            crossover_rate: n.crossover_rate,
            mutation_rate: n.mutation_rate,
            sbx_eta: n.sbx_eta,
            pm_eta: n.pm_eta,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisBlock {
    /// Random surrogate samples checked against the front.
    pub n_random: usize,
    pub seed: Option<u64>,
}

impl Default for AnalysisBlock {
    fn default() -> Self {
        Self {
            n_random: 10_000,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsBlock {
    pub dataset: PathBuf,
    pub model: PathBuf,
    pub front: PathBuf,
    pub report_dir: PathBuf,
}

impl Default for PathsBlock {
    fn default() -> Self {
        Self {
            dataset: "out/dataset.csv".into(),
            model: "out/model.json".into(),
            front: "out/front.csv".into(),
            report_dir: "out/report".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub design_space: DesignSpace<f64>,
    pub oracle: OracleBlock,
    pub training: TrainingBlock,
    pub nsga: NsgaBlock,
    pub analysis: AnalysisBlock,
    pub paths: PathsBlock,
}

fn rename_field(e: Error, from: &str, to: &str) -> Error {
    match e {
        Error::Config { field, reason } => Error::Config {
            field: field.replacen(from, to, 1),
            reason,
        },
        e => e,
    }
}

impl RunConfig {
    /// Parses JSON; missing fields take their defaults, unknown fields are
    /// rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.design_space
            .validate()
            .map_err(|e| match e {
                Error::InvalidSpace { variable, reason } => {
                    Error::config(format!("design_space.{variable}"), reason)
                }
                e => e,
            })?;
        self.oracle_config().validate()?;
        self.mlp_config()
            .validate()
            .map_err(|e| rename_field(e, "mlp.", "training."))?;
        self.training
            .split
            .validate()
            .map_err(|e| rename_field(e, "split.ratios", "training.split"))?;
        if self.training.k_folds < 2 {
            return Err(Error::config("training.k_folds", "need at least 2 folds"));
        }
        let g = &self.training.grid_search;
        for (name, widths) in [("h1", &g.h1), ("h2", &g.h2), ("h3", &g.h3)] {
            if widths.is_empty() || widths.contains(&0) {
                return Err(Error::config(
                    format!("training.grid_search.{name}"),
                    "needs at least one width, all positive",
                ));
            }
        }
        if g.activations.is_empty() {
            return Err(Error::config("training.grid_search.activations", "must not be empty"));
        }
        self.nsga_config().validate()?;
        if self.analysis.n_random == 0 {
            return Err(Error::config("analysis.n_random", "must be at least 1"));
        }
        let p = &self.paths;
        for (name, path) in [
            ("paths.dataset", &p.dataset),
            ("paths.model", &p.model),
            ("paths.front", &p.front),
            ("paths.report_dir", &p.report_dir),
        ] {
            if path.as_os_str().is_empty() {
                return Err(Error::config(name, "must not be empty"));
            }
        }
        Ok(())
    }

    fn stage_seed(&self, own: Option<u64>, offset: u64) -> u64 {
        own.unwrap_or(self.seed.wrapping_add(offset))
    }

    pub fn oracle_config(&self) -> OracleConfig {
        OracleConfig {
            noise_sigma: self.oracle.noise_sigma,
            seed: self.stage_seed(self.oracle.seed, ORACLE_SEED_OFFSET),
        }
    }

    pub fn split_seed(&self) -> u64 {
        self.stage_seed(self.training.split_seed, SPLIT_SEED_OFFSET)
    }

    pub fn mlp_config(&self) -> MlpConfig {
        let t = &self.training;
        MlpConfig {
            hidden_sizes: t.hidden_sizes,
            hidden_activation: t.hidden_activation,
            dropout_rate: t.dropout_rate,
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
            epochs: t.epochs,
            seed: self.stage_seed(t.seed, TRAINING_SEED_OFFSET),
        }
    }

    pub fn nsga_config(&self) -> NsgaConfig {
        let n = &self.nsga;
        NsgaConfig {
            population_size: n.population_size,
            generations: n.generations,
            crossover_rate: n.crossover_rate,
            mutation_rate: n.mutation_rate,
            sbx_eta: n.sbx_eta,
            pm_eta: n.pm_eta,
            seed: self.stage_seed(n.seed, NSGA_SEED_OFFSET),
        }
    }

    pub fn analysis_seed(&self) -> u64 {
        self.stage_seed(self.analysis.seed, ANALYSIS_SEED_OFFSET)
    }
}

/// `dir/stem.suffix` next to `path`, e.g. `model.json` → `model.loss.csv`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn json_text(value: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct GenSummary {
    pub records: usize,
    pub seed: u64,
    pub noise_sigma: f64,
}

/// Writes the oracle dataset CSV and a `.meta.json` sidecar.
pub fn gen_dataset(cfg: &RunConfig, out: &Path) -> Result<GenSummary> {
    cfg.validate()?;
    let oracle_cfg = cfg.oracle_config();
    let data = oracle::generate_dataset(&cfg.design_space, &oracle_cfg)?;
    let mut csv = Vec::new();
    data.write_csv(&mut csv)?;
    let meta = json!({
        "command": "gen-dataset",
        "prng": PRNG_ALGORITHM,
        "seed": oracle_cfg.seed,
        "noise_sigma": oracle_cfg.noise_sigma,
        "records": data.len(),
        "design_space": cfg.design_space,
    });
    let meta = json_text(&meta)?;
    write_text(out, std::str::from_utf8(&csv).expect("csv output is UTF-8"))?;
    write_text(&sibling(out, "meta.json"), &meta)?;
    Ok(GenSummary {
        records: data.len(),
        seed: oracle_cfg.seed,
        noise_sigma: oracle_cfg.noise_sigma,
    })
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub config: MlpConfig,
    pub test_r2: Vec<f64>,
    pub final_val_mse: f64,
    pub written: Vec<PathBuf>,
}

/// Trains the surrogate (optionally after grid search) and writes the
/// model JSON plus `.loss.csv`, `.metrics.json` and, with grid search,
/// `.grid.csv` and `.cv_loss.csv` beside it.
pub fn train(cfg: &RunConfig, data: &Path, out_model: &Path, grid_search: bool) -> Result<TrainSummary> {
    cfg.validate()?;
    let dataset = Dataset::<f64>::read_csv_file(data, &cfg.design_space)?;
    let split = dataset::split(dataset.len(), cfg.split_seed(), cfg.training.split, cfg.training.k_folds)?;
    let base = cfg.mlp_config();
    let mut extra = Vec::new();
    let chosen = if grid_search {
        let search = mlp::grid_search(&dataset, &split, &cfg.training.grid_search, &base)?;
        extra.push((sibling(out_model, "grid.csv"), search.table_csv()));
        extra.push((sibling(out_model, "cv_loss.csv"), mlp::curve_csv(&search.mean_curve())));
        search.best
    } else {
        base
    };
    let outcome = mlp::train(&dataset, &split, &chosen)?;
    let model = outcome.model;
    let metrics_of = |idx: &[usize]| mlp::evaluate_metrics(&model, &dataset.subset(idx));
    let train_m = metrics_of(&split.train)?;
    let val_m = metrics_of(&split.validation)?;
    let test_m = metrics_of(&split.test)?;
    let metrics = json!({
        "prng": PRNG_ALGORITHM,
        "seed": chosen.seed,
        "split_seed": cfg.split_seed(),
        "config": chosen,
        "targets": TARGET_NAMES,
        "space": "normalized targets",
        "train": train_m,
        "validation": val_m,
        "test": test_m,
    });
    let mut model_text = model.to_json()?;
    model_text.push('\n');
    let metrics_text = json_text(&metrics)?;
    let loss_text = mlp::curve_csv(&outcome.curve);

    let mut files = vec![
        (out_model.to_path_buf(), model_text),
        (sibling(out_model, "loss.csv"), loss_text),
        (sibling(out_model, "metrics.json"), metrics_text),
    ];
    files.extend(extra);
    for (path, text) in &files {
        write_text(path, text)?;
    }
    Ok(TrainSummary {
        config: chosen,
        test_r2: test_m.r2,
        final_val_mse: outcome.curve.last().map_or(f64::NAN, |p| p.val_mse),
        written: files.into_iter().map(|(p, _)| p).collect(),
    })
}

#[derive(Debug, Clone)]
pub struct OptimizeSummary {
    pub front_size: usize,
    pub seed: u64,
}

/// Runs the optimizer on the surrogate; writes the front CSV, a
/// `.generations.csv` of per-generation statistics and a `.meta.json`.
pub fn optimize(cfg: &RunConfig, model_path: &Path, out_front: &Path) -> Result<OptimizeSummary> {
    cfg.validate()?;
    let model: MlpModel<f64> = mlp::load_model(model_path)?;
    let nsga_cfg = cfg.nsga_config();
    let out = pareto::optimize(&model, &cfg.design_space, &nsga_cfg)?;
    let front_text = pareto::front_csv(&out.front);
    let stats_text = nsga2::stats_csv(&out.stats);
    let meta = json_text(&json!({
        "command": "optimize",
        "prng": PRNG_ALGORITHM,
        "nsga": nsga_cfg,
        "front_size": out.front.len(),
        "objectives": ["-f_n", "-d_mm"],
    }))?;
    write_text(out_front, &front_text)?;
    write_text(&sibling(out_front, "generations.csv"), &stats_text)?;
    write_text(&sibling(out_front, "meta.json"), &meta)?;
    Ok(OptimizeSummary {
        front_size: out.front.len(),
        seed: nsga_cfg.seed,
    })
}

#[derive(Debug, Clone)]
pub struct AnalyzeSummary {
    pub front: Vec<DesignSolution<f64>>,
    pub selection: pareto::Selection,
    pub comparison: Vec<pareto::ComparisonRow<f64>>,
    pub n_samples: usize,
    pub n_dominating: usize,
}

pub const REPORT_FILES: [&str; 5] = [
    "front_labeled.csv",
    "comparison.csv",
    "validation.json",
    "samples.csv",
    "meta.json",
];

/// Labels A/B/C on a front, validates it against random surrogate samples
/// and compares labeled designs with the noise-free oracle. If the
/// configured dataset exists, its (f, d) values are also written as
/// `dataset_objectives.csv`.
pub fn analyze(cfg: &RunConfig, front_path: &Path, model_path: &Path, out_report: &Path) -> Result<AnalyzeSummary> {
    cfg.validate()?;
    let model: MlpModel<f64> = mlp::load_model(model_path)?;
    let file = std::fs::File::open(front_path).map_err(|e| Error::io(front_path, e))?;
    let mut front = pareto::read_front_csv(std::io::BufReader::new(file), &cfg.design_space)?;
    let selection = pareto::label_front(&mut front)?;
    let objs: Vec<_> = front.iter().map(|s| s.objectives).collect();
    let seed = cfg.analysis_seed();
    let (report, samples) = pareto::validate_front(&objs, &model, cfg.analysis.n_random, seed)?;
    let truth_cfg = OracleConfig {
        noise_sigma: 0.0,
        seed: cfg.oracle_config().seed,
    };
    let comparison = pareto::compare_to_truth(&front, &truth_cfg)?;
    let dataset_text = if cfg.paths.dataset.is_file() {
        let data = Dataset::<f64>::read_csv_file(&cfg.paths.dataset, &cfg.design_space)?;
        let mut s = String::from("t_beam_mm,t_cross_mm,spacing_mm,f_n,d_mm\n");
        for r in data.records() {
            let o = pareto::compose_objectives(r.targets());
            let p = r.design;
            s.push_str(&format!("{},{},{},{},{}\n", p.t_beam, p.t_cross, p.spacing, o.f, o.d));
        }
        Some(s)
    } else {
        None
    };
    let files = [
        pareto::front_csv(&front),
        pareto::comparison_csv(&comparison),
        json_text(&report)?,
        pareto::samples_csv(&model, &samples),
        json_text(&json!({
            "command": "analyze",
            "prng": PRNG_ALGORITHM,
            "seed": seed,
            "n_random": cfg.analysis.n_random,
            "labels": { "A": selection.a, "B": selection.b, "C": selection.c },
        }))?,
    ];
    for (name, text) in REPORT_FILES.iter().zip(&files) {
        write_text(&out_report.join(name), text)?;
    }
    if let Some(text) = dataset_text {
        write_text(&out_report.join("dataset_objectives.csv"), &text)?;
    }
    Ok(AnalyzeSummary {
        front,
        selection,
        comparison,
        n_samples: report.n_samples,
        n_dominating: report.n_dominating,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct EvalOutput {
    /// fx, fy (N), dx, dy (mm).
    pub responses: [f64; 4],
    pub objectives: pareto::ObjectivePair<f64>,
}

/// One-shot surrogate prediction for a physical design.
pub fn eval(cfg: &RunConfig, model_path: &Path, design: [f64; 3]) -> Result<EvalOutput> {
    cfg.validate()?;
    let p = DesignPoint::from_array(design);
    cfg.design_space.check(&p)?;
    let model: MlpModel<f64> = mlp::load_model(model_path)?;
    let pred = model.predict(&design)?;
    Ok(EvalOutput {
        responses: pred.responses,
        objectives: pareto::compose_objectives(pred.responses),
    })
}
