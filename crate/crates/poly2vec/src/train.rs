//! Training, evaluation, and ablation over the labeled pair datasets.
//!
//! The encoder (fusion network) and the task head are trained jointly with
//! AdamW. Everything is seeded: weight init, shuffling, and the dataset
//! itself, so a (config, seed) pair determines every output byte.

use std::io::{Read, Write};

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cft::encode_spectrum;
use crate::config::{ConfigError, RunConfig};
use crate::geometry::Geometry;
use crate::grid::FrequencyGrid;
use crate::nn::{
    distance_mse, extract_features, load_model, pair_distances, restore_into, save_model,
    softmax_cross_entropy, AdamW, Checkpoint, FusionNet, FusionVariant, Mlp, NnError, Params,
};
use crate::tasks::{
    class_count, classification_metrics, mean_absolute_error, ClassificationMetrics, Dataset,
    PairType, Split, Task, TaskError,
};
use crate::triangulate::TriangulateError;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("dataset does not match config: {0}")]
    DataMismatch(String),
    #[error("training diverged at epoch {epoch}: loss {loss}")]
    DivergedTraining { epoch: usize, loss: f64 },
    #[error("checkpoint does not match: {0}")]
    CheckpointMismatch(String),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Triangulate(#[from] TriangulateError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Magnitude/phase feature rows for one side of every pair: (n, W) each.
pub struct SideFeatures {
    pub z: Array2<f64>,
    pub phi: Array2<f64>,
}

/// Encode each geometry on the grid and stack the polar features row-wise.
pub fn side_features<'a>(
    geoms: impl ExactSizeIterator<Item = &'a Geometry>,
    grid: &FrequencyGrid,
) -> Result<SideFeatures, TrainError> {
    let n = geoms.len();
    let w = grid.len();
    let mut z = Array2::zeros((n, w));
    let mut phi = Array2::zeros((n, w));
    for (i, g) in geoms.enumerate() {
        let spec = encode_spectrum(g, grid)?;
        let f = extract_features(&spec);
        for j in 0..w {
            z[(i, j)] = f.z[j];
            phi[(i, j)] = f.phi[j];
        }
    }
    Ok(SideFeatures { z, phi })
}

/// Fusion encoder plus (for classification tasks) the pair head, over one
/// flat parameter vector.
pub struct Model {
    pub params: Params,
    pub fusion: FusionNet,
    pub head: Option<Mlp>,
    pub n_classes: usize,
    pub d: usize,
}

/// Register all trainable tensors. Registration order is part of the
/// checkpoint format: a checkpoint restores only into a model built by this
/// same function with the same config.
pub fn build_model(cfg: &RunConfig, w_total: usize, variant: FusionVariant) -> Model {
    let mut params = Params::new();
    let fusion = FusionNet::register(
        &mut params,
        w_total,
        cfg.path_hidden_for(w_total),
        cfg.final_hidden,
        cfg.d,
        variant,
    );
    let n_classes = class_count(cfg.task, cfg.pair_type);
    let head = (n_classes > 0)
        .then(|| Mlp::register(&mut params, "head", 2 * cfg.d, cfg.head_hidden, n_classes));
    Model {
        params,
        fusion,
        head,
        n_classes,
        d: cfg.d,
    }
}

fn sub_seed(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Embed a batch of geometries already reduced to features.
pub fn embed(model: &Model, feats: &SideFeatures, rows: &[usize]) -> Array2<f64> {
    let w = feats.z.ncols();
    let take = |m: &Array2<f64>| {
        Array2::from_shape_fn((rows.len(), w), |(r, c)| m[(rows[r], c)])
    };
    let (v, _) = model
        .fusion
        .forward(&model.params, &take(&feats.z), &take(&feats.phi));
    v
}

/// Evaluation result for one split.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitEval {
    Classification {
        loss: f64,
        #[serde(flatten)]
        metrics: ClassificationMetrics,
    },
    Regression {
        loss: f64,
        mae: f64,
    },
}

impl SplitEval {
    /// The headline number: accuracy for classification, MAE for regression.
    pub fn headline(&self) -> f64 {
        match self {
            SplitEval::Classification { metrics, .. } => metrics.accuracy,
            SplitEval::Regression { mae, .. } => *mae,
        }
    }

    pub fn loss(&self) -> f64 {
        match self {
            SplitEval::Classification { loss, .. } => *loss,
            SplitEval::Regression { loss, .. } => *loss,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val: SplitEval,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainReport {
    pub config_hash: String,
    pub task: Task,
    pub pair_type: PairType,
    pub variant: FusionVariant,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub history: Vec<EpochStats>,
    pub test: SplitEval,
}

pub struct Trained {
    pub model: Model,
    pub report: TrainReport,
}

/// Labels plus precomputed features for a dataset, indexed per split.
struct Prepared {
    a: SideFeatures,
    b: SideFeatures,
    class_labels: Vec<usize>,
    dist_labels: Vec<f64>,
    train_idx: Vec<usize>,
    val_idx: Vec<usize>,
    test_idx: Vec<usize>,
}

fn prepare(cfg: &RunConfig, ds: &Dataset) -> Result<Prepared, TrainError> {
    if ds.task != cfg.task || ds.pair_type != cfg.pair_type {
        return Err(TrainError::DataMismatch(format!(
            "dataset is {} / {}, config wants {} / {}",
            ds.task, ds.pair_type, cfg.task, cfg.pair_type
        )));
    }
    let grid = cfg.grid()?;
    let a = side_features(ds.pairs.iter().map(|p| &p.a), &grid)?;
    let b = side_features(ds.pairs.iter().map(|p| &p.b), &grid)?;
    let mut class_labels = Vec::new();
    let mut dist_labels = Vec::new();
    match cfg.task {
        Task::Topology | Task::Direction => {
            for (i, p) in ds.pairs.iter().enumerate() {
                let l = p.class().ok_or_else(|| {
                    TrainError::DataMismatch(format!("pair {i} lacks a class label"))
                })?;
                class_labels.push(l as usize);
            }
        }
        Task::Distance => {
            for (i, p) in ds.pairs.iter().enumerate() {
                let d = p.dist.ok_or_else(|| {
                    TrainError::DataMismatch(format!("pair {i} lacks a distance label"))
                })?;
                dist_labels.push(d);
            }
        }
    }
    let idx_of = |s: Split| -> Vec<usize> {
        ds.pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.split == s)
            .map(|(i, _)| i)
            .collect()
    };
    Ok(Prepared {
        a,
        b,
        class_labels,
        dist_labels,
        train_idx: idx_of(Split::Train),
        val_idx: idx_of(Split::Val),
        test_idx: idx_of(Split::Test),
    })
}

/// Forward + loss + gradient for one batch of pair rows. Returns the batch
/// loss; gradients accumulate into `grads`.
fn batch_step(
    model: &Model,
    prep: &Prepared,
    task: Task,
    rows: &[usize],
    grads: &mut [f64],
) -> f64 {
    let w = prep.a.z.ncols();
    let take = |m: &Array2<f64>| {
        Array2::from_shape_fn((rows.len(), w), |(r, c)| m[(rows[r], c)])
    };
    let (va, tape_a) = model
        .fusion
        .forward(&model.params, &take(&prep.a.z), &take(&prep.a.phi));
    let (vb, tape_b) = model
        .fusion
        .forward(&model.params, &take(&prep.b.z), &take(&prep.b.phi));
    match task {
        Task::Topology | Task::Direction => {
            let head = model.head.as_ref().expect("classification head");
            let d = model.d;
            let mut cat = Array2::zeros((rows.len(), 2 * d));
            for r in 0..rows.len() {
                for c in 0..d {
                    cat[(r, c)] = va[(r, c)];
                    cat[(r, d + c)] = vb[(r, c)];
                }
            }
            let labels: Vec<usize> = rows.iter().map(|&i| prep.class_labels[i]).collect();
            let (logits, head_tape) = head.forward(&model.params, &cat);
            let (loss, dlogits) = softmax_cross_entropy(&logits, &labels);
            let dcat = head.backward(&model.params, &head_tape, &dlogits, grads);
            let mut dva = Array2::zeros((rows.len(), d));
            let mut dvb = Array2::zeros((rows.len(), d));
            for r in 0..rows.len() {
                for c in 0..d {
                    dva[(r, c)] = dcat[(r, c)];
                    dvb[(r, c)] = dcat[(r, d + c)];
                }
            }
            model.fusion.backward(&model.params, &tape_a, &dva, grads);
            model.fusion.backward(&model.params, &tape_b, &dvb, grads);
            loss
        }
        Task::Distance => {
            let target: Vec<f64> = rows.iter().map(|&i| prep.dist_labels[i]).collect();
            let (loss, dva, dvb) = distance_mse(&va, &vb, &target);
            model.fusion.backward(&model.params, &tape_a, &dva, grads);
            model.fusion.backward(&model.params, &tape_b, &dvb, grads);
            loss
        }
    }
}

/// Loss and metrics on a split, in inference mode (chunked, no gradients).
fn eval_rows(model: &Model, prep: &Prepared, task: Task, rows: &[usize]) -> SplitEval {
    let mut preds_cls: Vec<u8> = Vec::new();
    let mut labels_cls: Vec<u8> = Vec::new();
    let mut preds_dist: Vec<f64> = Vec::new();
    let mut targets_dist: Vec<f64> = Vec::new();
    let mut loss_sum = 0.0;
    for chunk in rows.chunks(512) {
        let va = embed(model, &prep.a, chunk);
        let vb = embed(model, &prep.b, chunk);
        match task {
            Task::Topology | Task::Direction => {
                let head = model.head.as_ref().expect("classification head");
                let d = model.d;
                let mut cat = Array2::zeros((chunk.len(), 2 * d));
                for r in 0..chunk.len() {
                    for c in 0..d {
                        cat[(r, c)] = va[(r, c)];
                        cat[(r, d + c)] = vb[(r, c)];
                    }
                }
                let labels: Vec<usize> = chunk.iter().map(|&i| prep.class_labels[i]).collect();
                let (logits, _) = head.forward(&model.params, &cat);
                let (loss, _) = softmax_cross_entropy(&logits, &labels);
                loss_sum += loss * chunk.len() as f64;
                for r in 0..chunk.len() {
                    let row = logits.row(r);
                    let mut best = 0usize;
                    for j in 1..row.len() {
                        if row[j] > row[best] {
                            best = j;
                        }
                    }
                    preds_cls.push(best as u8);
                    labels_cls.push(labels[r] as u8);
                }
            }
            Task::Distance => {
                let target: Vec<f64> = chunk.iter().map(|&i| prep.dist_labels[i]).collect();
                let pred = pair_distances(&va, &vb);
                for (p, t) in pred.iter().zip(&target) {
                    loss_sum += (p - t) * (p - t);
                }
                preds_dist.extend(pred);
                targets_dist.extend(target);
            }
        }
    }
    let n = rows.len().max(1) as f64;
    match task {
        Task::Topology | Task::Direction => {
            let metrics = classification_metrics(&preds_cls, &labels_cls, model.n_classes)
                .expect("nonempty split");
            SplitEval::Classification {
                loss: loss_sum / n,
                metrics,
            }
        }
        Task::Distance => SplitEval::Regression {
            loss: loss_sum / n,
            mae: mean_absolute_error(&preds_dist, &targets_dist).expect("nonempty split"),
        },
    }
}

/// Train the encoder and head jointly; returns the model plus a report with
/// per-epoch validation metrics and final test metrics.
pub fn train(cfg: &RunConfig, ds: &Dataset) -> Result<Trained, TrainError> {
    train_variant(cfg, ds, cfg.variant, cfg.seed)
}

/// As `train`, with the variant and seed overridden (used by the ablation).
pub fn train_variant(
    cfg: &RunConfig,
    ds: &Dataset,
    variant: FusionVariant,
    seed: u64,
) -> Result<Trained, TrainError> {
    let prep = prepare(cfg, ds)?;
    if prep.train_idx.is_empty() && cfg.epochs > 0 {
        return Err(TrainError::DataMismatch("dataset has no train split".into()));
    }
    if prep.val_idx.is_empty() || prep.test_idx.is_empty() {
        return Err(TrainError::DataMismatch(
            "dataset has no val/test split".into(),
        ));
    }
    let w_total = prep.a.z.ncols();
    let mut model = build_model(cfg, w_total, variant);
    let mut init_rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, 0));
    model.params.init_fan_in_uniform(&mut init_rng, cfg.init_gain);
    let mut opt = AdamW::new(model.params.len(), cfg.lr, cfg.weight_decay);

    let mut history = Vec::with_capacity(cfg.epochs);
    let mut order = prep.train_idx.clone();
    let mut grads = vec![0.0; model.params.len()];
    for epoch in 1..=cfg.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, epoch as u64));
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.iter_mut().for_each(|g| *g = 0.0);
            let loss = batch_step(&model, &prep, cfg.task, batch, &mut grads);
            if !loss.is_finite() {
                return Err(TrainError::DivergedTraining { epoch, loss });
            }
            loss_sum += loss * batch.len() as f64;
            opt.step(&mut model.params.data, &grads);
        }
        let train_loss = loss_sum / prep.train_idx.len() as f64;
        let val = eval_rows(&model, &prep, cfg.task, &prep.val_idx);
        history.push(EpochStats {
            epoch,
            train_loss,
            val,
        });
    }
    let test = eval_rows(&model, &prep, cfg.task, &prep.test_idx);
    let report = TrainReport {
        config_hash: cfg.hash_hex(),
        task: cfg.task,
        pair_type: cfg.pair_type,
        variant,
        n_train: prep.train_idx.len(),
        n_val: prep.val_idx.len(),
        n_test: prep.test_idx.len(),
        history,
        test,
    };
    Ok(Trained { model, report })
}

/// An untrained model with exactly the parameter init a training run would
/// start from, for embedding without a checkpoint.
pub fn fresh_model(cfg: &RunConfig, w_total: usize) -> Model {
    let mut model = build_model(cfg, w_total, cfg.variant);
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, 0));
    model.params.init_fan_in_uniform(&mut rng, cfg.init_gain);
    model
}

/// Evaluation of a restored checkpoint on all three splits.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub config_hash: String,
    pub task: Task,
    pub pair_type: PairType,
    pub variant: FusionVariant,
    pub train: SplitEval,
    pub val: SplitEval,
    pub test: SplitEval,
}

pub fn save_checkpoint(w: &mut impl Write, model: &Model, cfg: &RunConfig) -> Result<(), TrainError> {
    save_model(w, &model.params, &cfg.canonical_toml(), &cfg.hash_bytes())?;
    Ok(())
}

/// Read a checkpoint and rebuild its model; the embedded config is the
/// authority on shapes.
pub fn load_checkpoint(r: &mut impl Read) -> Result<(RunConfig, Model), TrainError> {
    let ckpt: Checkpoint = load_model(r)?;
    let cfg: RunConfig = toml::from_str(&ckpt.config_toml)
        .map_err(|e| TrainError::CheckpointMismatch(format!("embedded config: {e}")))?;
    cfg.validate()?;
    let w_total = cfg.grid()?.len();
    let mut model = build_model(&cfg, w_total, cfg.variant);
    restore_into(&mut model.params, &ckpt).map_err(|e| match e {
        NnError::ShapeMismatch { .. } => {
            TrainError::CheckpointMismatch("tensor shapes differ from the embedded config".into())
        }
        other => TrainError::Nn(other),
    })?;
    Ok((cfg, model))
}

/// Evaluate a restored model against a dataset (no parameter updates).
pub fn evaluate(cfg: &RunConfig, model: &Model, ds: &Dataset) -> Result<EvalReport, TrainError> {
    let prep = prepare(cfg, ds)?;
    if prep.train_idx.is_empty() || prep.val_idx.is_empty() || prep.test_idx.is_empty() {
        return Err(TrainError::DataMismatch("dataset has an empty split".into()));
    }
    Ok(EvalReport {
        config_hash: cfg.hash_hex(),
        task: cfg.task,
        pair_type: cfg.pair_type,
        variant: cfg.variant,
        train: eval_rows(model, &prep, cfg.task, &prep.train_idx),
        val: eval_rows(model, &prep, cfg.task, &prep.val_idx),
        test: eval_rows(model, &prep, cfg.task, &prep.test_idx),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationEntry {
    pub variant: FusionVariant,
    pub per_seed: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationReport {
    pub config_hash: String,
    pub task: Task,
    pub pair_type: PairType,
    /// What `per_seed` holds: test accuracy (higher better) or test MAE
    /// (lower better).
    pub metric: String,
    pub seeds: Vec<u64>,
    pub entries: Vec<AblationEntry>,
    /// Learned fusion at least as good as concatenation, and
    /// magnitude-only the worst of the four, on the mean metric.
    pub ordering_ok: bool,
}

/// Train every fusion variant over the given seeds and compare means.
pub fn ablate(cfg: &RunConfig, ds: &Dataset, seeds: &[u64]) -> Result<AblationReport, TrainError> {
    let higher_better = cfg.task != Task::Distance;
    let mut entries = Vec::new();
    for variant in FusionVariant::ALL {
        let mut per_seed = Vec::with_capacity(seeds.len());
        for &s in seeds {
            let t = train_variant(cfg, ds, variant, s)?;
            per_seed.push(t.report.test.headline());
        }
        let mean = per_seed.iter().sum::<f64>() / per_seed.len() as f64;
        let std = if per_seed.len() > 1 {
            (per_seed.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
                / (per_seed.len() - 1) as f64)
                .sqrt()
        } else {
            0.0
        };
        entries.push(AblationEntry {
            variant,
            per_seed,
            mean,
            std,
        });
    }
    let mean_of = |v: FusionVariant| {
        entries
            .iter()
            .find(|e| e.variant == v)
            .map(|e| e.mean)
            .unwrap()
    };
    let score = |v: FusionVariant| {
        if higher_better {
            mean_of(v)
        } else {
            -mean_of(v)
        }
    };
    let ordering_ok = score(FusionVariant::Learned) >= score(FusionVariant::Concat)
        && FusionVariant::ALL
            .iter()
            .all(|&v| score(FusionVariant::MagOnly) <= score(v));
    Ok(AblationReport {
        config_hash: cfg.hash_hex(),
        task: cfg.task,
        pair_type: cfg.pair_type,
        metric: if higher_better {
            "test_accuracy".into()
        } else {
            "test_mae".into()
        },
        seeds: seeds.to_vec(),
        entries,
        ordering_ok,
    })
}

// ---------------------------------------------------------------------------
// Report rendering (JSON via serde; text tables here). No timestamps: the
// same run must produce byte-identical reports.

fn fmt_eval(e: &SplitEval) -> String {
    match e {
        SplitEval::Classification { loss, metrics } => format!(
            "loss {:.6}  acc {:.4}  macroP {:.4}  macroR {:.4}  macroF1 {:.4}",
            loss, metrics.accuracy, metrics.macro_precision, metrics.macro_recall,
            metrics.macro_f1
        ),
        SplitEval::Regression { loss, mae } => {
            format!("mse {loss:.6}  mae {mae:.6}")
        }
    }
}

impl TrainReport {
    pub fn render_text(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let _ = writeln!(s, "task {}  pairs {}  variant {}", self.task, self.pair_type, self.variant.name());
        let _ = writeln!(s, "config {}", self.config_hash);
        let _ = writeln!(
            s,
            "splits train/val/test = {}/{}/{}",
            self.n_train, self.n_val, self.n_test
        );
        for h in &self.history {
            let _ = writeln!(
                s,
                "epoch {:>3}  train_loss {:.6}  val: {}",
                h.epoch,
                h.train_loss,
                fmt_eval(&h.val)
            );
        }
        let _ = writeln!(s, "test: {}", fmt_eval(&self.test));
        s
    }
}

impl EvalReport {
    pub fn render_text(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let _ = writeln!(s, "task {}  pairs {}  variant {}", self.task, self.pair_type, self.variant.name());
        let _ = writeln!(s, "config {}", self.config_hash);
        let _ = writeln!(s, "train: {}", fmt_eval(&self.train));
        let _ = writeln!(s, "val:   {}", fmt_eval(&self.val));
        let _ = writeln!(s, "test:  {}", fmt_eval(&self.test));
        s
    }
}

impl AblationReport {
    pub fn render_text(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "ablation on {} / {}  metric {}  seeds {:?}",
            self.task, self.pair_type, self.metric, self.seeds
        );
        let _ = writeln!(s, "config {}", self.config_hash);
        for e in &self.entries {
            let _ = writeln!(
                s,
                "{:<10} mean {:.4} +/- {:.4}  runs {:?}",
                e.variant.name(),
                e.mean,
                e.std,
                e.per_seed
            );
        }
        let _ = writeln!(
            s,
            "ordering (learned >= concat, mag worst): {}",
            if self.ordering_ok { "ok" } else { "VIOLATED" }
        );
        s
    }
}
