//! Normalisation, loss, optimiser, the training loop with validation-based
//! model selection, and evaluation.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gnn::{Activation, Aggregator, Architecture, GnModel, GnnError};
use crate::graph::{AttributedGraph, BatchedGraph, GraphDims, GraphError};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::synth::{generate_labeled_dataset, LabeledSample, SynthConfig, SynthError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("{predictions} predictions for {targets} targets")]
    LengthMismatch { predictions: usize, targets: usize },
    #[error("at least two samples are needed, found {0}")]
    TooFewSamples(usize),
    #[error("targets have zero variance")]
    DegenerateTargets,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed history: {0}")]
    History(String),
    #[error(transparent)]
    Gnn(#[from] GnnError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

/// Normalised mean-square error in percent:
/// `100 / (N σ²) Σ (ŷᵢ − yᵢ)²` with σ² the population variance of `targets`.
pub fn nmse<T: Scalar>(predictions: &[T], targets: &[T]) -> Result<f64, TrainError> {
    if predictions.len() != targets.len() {
        return Err(TrainError::LengthMismatch {
            predictions: predictions.len(),
            targets: targets.len(),
        });
    }
    let n = targets.len();
    if n < 2 {
        return Err(TrainError::TooFewSamples(n));
    }
    let mean = targets.iter().map(|t| t.as_f64()).sum::<f64>() / n as f64;
    // N σ² written as the centred sum of squares
    let spread: f64 = targets.iter().map(|t| (mean - t.as_f64()).powi(2)).sum();
    if spread <= 0.0 {
        return Err(TrainError::DegenerateTargets);
    }
    let sse: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p.as_f64() - t.as_f64()).powi(2))
        .sum();
    Ok(100.0 * (sse / spread))
}

/// Graphs with one regression target each.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T: Scalar> {
    pub graphs: Vec<AttributedGraph<T>>,
    pub targets: Vec<T>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(graphs: Vec<AttributedGraph<T>>, targets: Vec<T>) -> Result<Self, TrainError> {
        if graphs.len() != targets.len() {
            return Err(TrainError::LengthMismatch {
                predictions: graphs.len(),
                targets: targets.len(),
            });
        }
        Ok(Self { graphs, targets })
    }

    pub fn from_samples(samples: &[LabeledSample]) -> Self {
        Self {
            graphs: samples.iter().map(|s| s.graph.cast()).collect(),
            targets: samples.iter().map(|s| T::lit(s.omega1)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn dims(&self) -> Option<GraphDims> {
        self.graphs.first().map(|g| g.dims())
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            graphs: indices.iter().map(|&i| self.graphs[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
        }
    }
}

/// Per-column affine map `x ↦ (x − mean) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Affine<T: Scalar> {
    pub mean: Vec<T>,
    pub scale: Vec<T>,
}

impl<T: Scalar> Affine<T> {
    pub fn identity(width: usize) -> Self {
        Self {
            mean: vec![T::zero(); width],
            scale: vec![T::one(); width],
        }
    }

    /// Column means and population standard deviations of `rows`; columns
    /// without spread keep unit scale.
    pub fn fit<'a>(width: usize, rows: impl Iterator<Item = &'a [T]>) -> Self {
        let mut sum = vec![0.0f64; width];
        let mut sq = vec![0.0f64; width];
        let mut n = 0usize;
        let rows: Vec<&[T]> = rows.collect();
        for r in &rows {
            for (s, v) in sum.iter_mut().zip(r.iter()) {
                *s += v.as_f64();
            }
            n += 1;
        }
        if n == 0 {
            return Self::identity(width);
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
        for r in &rows {
            for ((q, v), m) in sq.iter_mut().zip(r.iter()).zip(&mean) {
                *q += (v.as_f64() - m).powi(2);
            }
        }
        let scale = sq
            .iter()
            .map(|q| {
                let sd = (q / n as f64).sqrt();
                if sd > 1e-12 {
                    T::lit(sd)
                } else {
                    T::one()
                }
            })
            .collect();
        Self {
            mean: mean.into_iter().map(T::lit).collect(),
            scale,
        }
    }

    pub fn apply(&self, x: &mut [T]) {
        for ((v, m), s) in x.iter_mut().zip(&self.mean).zip(&self.scale) {
            *v = (*v - *m) / *s;
        }
    }

    pub fn invert(&self, x: &mut [T]) {
        for ((v, m), s) in x.iter_mut().zip(&self.mean).zip(&self.scale) {
            *v = *v * *s + *m;
        }
    }

    fn apply_matrix(&self, m: &Matrix<T>) -> Matrix<T> {
        let mut out = m.clone();
        for r in 0..out.rows() {
            self.apply(out.row_mut(r));
        }
        out
    }

    fn invert_matrix(&self, m: &Matrix<T>) -> Matrix<T> {
        let mut out = m.clone();
        for r in 0..out.rows() {
            self.invert(out.row_mut(r));
        }
        out
    }
}

/// Feature and target standardisation fitted on a training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Normalizer<T: Scalar> {
    pub nodes: Affine<T>,
    pub edges: Affine<T>,
    pub globals: Affine<T>,
    pub target: Affine<T>,
}

impl<T: Scalar> Normalizer<T> {
    pub fn identity(dims: GraphDims) -> Self {
        Self {
            nodes: Affine::identity(dims.node),
            edges: Affine::identity(dims.edge),
            globals: Affine::identity(dims.global),
            target: Affine::identity(1),
        }
    }

    pub fn fit(train: &Dataset<T>) -> Result<Self, TrainError> {
        let dims = train.dims().ok_or(TrainError::EmptyDataset)?;
        Ok(Self {
            nodes: Affine::fit(
                dims.node,
                train.graphs.iter().flat_map(|g| (0..g.node_count()).map(|r| g.nodes().row(r))),
            ),
            edges: Affine::fit(
                dims.edge,
                train.graphs.iter().flat_map(|g| (0..g.edge_count()).map(|r| g.edge_attrs().row(r))),
            ),
            globals: Affine::fit(dims.global, train.graphs.iter().map(|g| g.globals())),
            target: Affine::fit(1, train.targets.iter().map(std::slice::from_ref)),
        })
    }

    pub fn apply_graph(&self, g: &AttributedGraph<T>) -> Result<AttributedGraph<T>, TrainError> {
        let mut globals = g.globals().to_vec();
        self.globals.apply(&mut globals);
        Ok(g.with_attrs(
            self.nodes.apply_matrix(g.nodes()),
            self.edges.apply_matrix(g.edge_attrs()),
            globals,
        )?)
    }

    pub fn invert_graph(&self, g: &AttributedGraph<T>) -> Result<AttributedGraph<T>, TrainError> {
        let mut globals = g.globals().to_vec();
        self.globals.invert(&mut globals);
        Ok(g.with_attrs(
            self.nodes.invert_matrix(g.nodes()),
            self.edges.invert_matrix(g.edge_attrs()),
            globals,
        )?)
    }

    pub fn apply_target(&self, y: T) -> T {
        (y - self.target.mean[0]) / self.target.scale[0]
    }

    pub fn invert_target(&self, y: T) -> T {
        y * self.target.scale[0] + self.target.mean[0]
    }

    pub fn dims(&self) -> GraphDims {
        GraphDims {
            node: self.nodes.mean.len(),
            edge: self.edges.mean.len(),
            global: self.globals.mean.len(),
        }
    }
}

/// Adaptive moment estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    m: Vec<T>,
    v: Vec<T>,
    step: i32,
}

impl<T: Scalar> Adam<T> {
    pub fn new(n_params: usize, learning_rate: T, beta1: T, beta2: T, epsilon: T) -> Self {
        Self {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            m: vec![T::zero(); n_params],
            v: vec![T::zero(); n_params],
            step: 0,
        }
    }

    pub fn with_defaults(n_params: usize) -> Self {
        Self::new(n_params, T::lit(1e-3), T::lit(0.9), T::lit(0.999), T::lit(1e-8))
    }

    pub fn step(&mut self, model: &mut GnModel<T>, grad: &[T]) {
        self.step += 1;
        let c1 = T::one() - self.beta1.powi(self.step);
        let c2 = T::one() - self.beta2.powi(self.step);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.learning_rate, self.epsilon);
        let (m, v) = (&mut self.m, &mut self.v);
        model.for_each_parameter_mut(|i, p| {
            let g = grad[i];
            m[i] = b1 * m[i] + (T::one() - b1) * g;
            v[i] = b2 * v[i] + (T::one() - b2) * g * g;
            let mh = m[i] / c1;
            let vh = v[i] / c2;
            *p -= lr * mh / (vh.sqrt() + eps);
        });
    }
}

/// Mean-square error of `model` on one batch against (normalised)
/// `targets`, with its parameter gradient.
pub fn loss_and_gradient<T: Scalar>(
    model: &GnModel<T>,
    batch: &BatchedGraph<T>,
    targets: &[T],
) -> Result<(T, Vec<T>), TrainError> {
    let (pred, tape) = model.forward(batch)?;
    if pred.len() != targets.len() {
        return Err(TrainError::LengthMismatch {
            predictions: pred.len(),
            targets: targets.len(),
        });
    }
    let n = T::from_count(targets.len());
    let mut loss = T::zero();
    let mut upstream = Vec::with_capacity(targets.len());
    for (&p, &t) in pred.iter().zip(targets) {
        let r = p - t;
        loss += r * r;
        upstream.push(T::lit(2.0) * r / n);
    }
    let grad = model.backward(&tape, &upstream)?;
    Ok((loss / n, grad))
}

/// One optimiser update on one batch; returns the loss before the update.
pub fn train_step<T: Scalar>(
    model: &mut GnModel<T>,
    optimizer: &mut Adam<T>,
    batch: &BatchedGraph<T>,
    targets: &[T],
) -> Result<T, TrainError> {
    let (loss, grad) = loss_and_gradient(model, batch, targets)?;
    optimizer.step(model, &grad);
    Ok(loss)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Multiplies the learning rate after every epoch.
    pub lr_decay: f64,
    pub seed: u64,
    pub architecture: Architecture,
    pub aggregator: Aggregator,
    pub activation: Activation,
    pub normalize: bool,
    /// Stop after this many epochs without a validation improvement.
    pub patience: Option<usize>,
    /// Wall-clock budget in seconds, checked between epochs.
    pub time_budget: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 32,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            lr_decay: 1.0,
            seed: 0,
            architecture: Architecture::mean_reference().desk(),
            aggregator: Aggregator::Mean,
            activation: Activation::Relu,
            normalize: true,
            patience: None,
            time_budget: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.into()));
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return bad("learning_rate must be finite and non-negative");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("moment decays must lie in [0, 1)");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad("lr_decay must lie in (0, 1]");
        }
        if self.architecture.blocks.is_empty() {
            return bad("architecture needs at least one block");
        }
        Ok(())
    }

    pub fn build_model<T: Scalar>(&self, dims: GraphDims) -> Result<GnModel<T>, TrainError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok(GnModel::init(
            dims,
            &self.architecture,
            self.aggregator,
            self.activation,
            &mut rng,
        )?)
    }
}

/// NMSE on the three splits after one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_nmse: f64,
    pub val_nmse: f64,
    pub test_nmse: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
}

const CSV_HEADER: &str = "epoch,train_nmse,val_nmse,test_nmse,seconds";

impl History {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn best(&self) -> Option<&EpochRecord> {
        self.epochs
            .iter()
            .min_by(|a, b| a.val_nmse.total_cmp(&b.val_nmse))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.epochs {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.epoch, r.train_nmse, r.val_nmse, r.test_nmse, r.seconds
            ));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, TrainError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == CSV_HEADER => {}
            other => {
                return Err(TrainError::History(format!(
                    "expected header {CSV_HEADER:?}, found {other:?}"
                )))
            }
        }
        let mut epochs = Vec::new();
        for (i, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let err = || TrainError::History(format!("line {}: {line:?}", i + 2));
            if f.len() != 5 {
                return Err(err());
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| err());
            epochs.push(EpochRecord {
                epoch: f[0].parse().map_err(|_| err())?,
                train_nmse: num(f[1])?,
                val_nmse: num(f[2])?,
                test_nmse: num(f[3])?,
                seconds: num(f[4])?,
            });
        }
        Ok(Self { epochs })
    }
}

/// A trained model together with the normalisation it expects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Checkpoint<T: Scalar> {
    pub model: GnModel<T>,
    pub normalizer: Normalizer<T>,
    pub epoch: usize,
    pub val_nmse: f64,
}

const EVAL_CHUNK: usize = 64;

impl<T: Scalar> Checkpoint<T> {
    pub fn input_dims(&self) -> GraphDims {
        self.model.input_dims()
    }

    /// Predictions in target units.
    pub fn predict(&self, graphs: &[AttributedGraph<T>]) -> Result<Vec<T>, TrainError> {
        let dims = self.input_dims();
        for g in graphs {
            let d = g.dims();
            for (what, expected, found) in [
                ("node attributes", dims.node, d.node),
                ("edge attributes", dims.edge, d.edge),
                ("global attributes", dims.global, d.global),
            ] {
                if expected != found {
                    return Err(GnnError::DimensionMismatch {
                        what,
                        expected,
                        found,
                    }
                    .into());
                }
            }
        }
        let chunks: Vec<Result<Vec<T>, TrainError>> = graphs
            .par_chunks(EVAL_CHUNK)
            .map(|chunk| {
                let normed = chunk
                    .iter()
                    .map(|g| self.normalizer.apply_graph(g))
                    .collect::<Result<Vec<_>, _>>()?;
                let batch = BatchedGraph::union(&normed)?;
                Ok(self
                    .model
                    .predict(&batch)?
                    .into_iter()
                    .map(|y| self.normalizer.invert_target(y))
                    .collect())
            })
            .collect();
        let mut out = Vec::with_capacity(graphs.len());
        for c in chunks {
            out.extend(c?);
        }
        Ok(out)
    }
}

/// NMSE of a checkpoint on a dataset, with per-sample residuals
/// `prediction − target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub nmse: f64,
    pub residuals: Vec<f64>,
    pub predictions: Vec<f64>,
}

pub fn evaluate<T: Scalar>(ckpt: &Checkpoint<T>, data: &Dataset<T>) -> Result<Evaluation, TrainError> {
    let pred = ckpt.predict(&data.graphs)?;
    let nmse = nmse(&pred, &data.targets)?;
    Ok(Evaluation {
        nmse,
        residuals: pred
            .iter()
            .zip(&data.targets)
            .map(|(p, t)| p.as_f64() - t.as_f64())
            .collect(),
        predictions: pred.iter().map(|p| p.as_f64()).collect(),
    })
}

/// Generates a fresh population from `cfg`, labels it and evaluates the
/// checkpoint on it.
pub fn extrapolate(
    ckpt: &Checkpoint<f64>,
    cfg: &SynthConfig,
    count: usize,
) -> Result<Evaluation, TrainError> {
    let samples = generate_labeled_dataset(cfg, count)?;
    evaluate(ckpt, &Dataset::from_samples(&samples))
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T: Scalar> {
    pub best: Checkpoint<T>,
    /// Parameters after the final epoch.
    pub last: Checkpoint<T>,
    pub history: History,
}

/// Mini-batch training with per-epoch evaluation on all three splits,
/// keeping the checkpoint with the lowest validation NMSE.
pub fn train<T: Scalar>(
    model: GnModel<T>,
    train_set: &Dataset<T>,
    val_set: &Dataset<T>,
    test_set: &Dataset<T>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome<T>, TrainError> {
    train_with(model, train_set, val_set, test_set, cfg, |_| {})
}

/// [`train`] with a callback after each epoch.
pub fn train_with<T: Scalar>(
    mut model: GnModel<T>,
    train_set: &Dataset<T>,
    val_set: &Dataset<T>,
    test_set: &Dataset<T>,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome<T>, TrainError> {
    cfg.validate()?;
    if train_set.is_empty() || val_set.is_empty() || test_set.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let dims = model.input_dims();
    let normalizer = if cfg.normalize {
        Normalizer::fit(train_set)?
    } else {
        Normalizer::identity(dims)
    };
    let graphs = train_set
        .graphs
        .iter()
        .map(|g| normalizer.apply_graph(g))
        .collect::<Result<Vec<_>, _>>()?;
    let targets: Vec<T> = train_set
        .targets
        .iter()
        .map(|&y| normalizer.apply_target(y))
        .collect();

    let mut optimizer = Adam::new(
        model.param_count(),
        T::lit(cfg.learning_rate),
        T::lit(cfg.beta1),
        T::lit(cfg.beta2),
        T::lit(cfg.epsilon),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..graphs.len()).collect();
    let start = Instant::now();
    let mut history = History::default();
    let mut best: Option<Checkpoint<T>> = None;
    let mut since_best = 0;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for (b, idx) in order.chunks(cfg.batch_size).enumerate() {
            let batch = BatchedGraph::union(idx.iter().map(|&i| &graphs[i]))?;
            let y: Vec<T> = idx.iter().map(|&i| targets[i]).collect();
            let loss = train_step(&mut model, &mut optimizer, &batch, &y)?;
            if !loss.is_finite() {
                return Err(TrainError::NonFiniteLoss { epoch, batch: b });
            }
        }
        optimizer.learning_rate *= T::lit(cfg.lr_decay);

        let current = Checkpoint {
            model: model.clone(),
            normalizer: normalizer.clone(),
            epoch,
            val_nmse: f64::NAN,
        };
        let record = EpochRecord {
            epoch,
            train_nmse: evaluate(&current, train_set)?.nmse,
            val_nmse: evaluate(&current, val_set)?.nmse,
            test_nmse: evaluate(&current, test_set)?.nmse,
            seconds: start.elapsed().as_secs_f64(),
        };
        if !record.train_nmse.is_finite() {
            return Err(TrainError::NonFiniteLoss { epoch, batch: 0 });
        }
        history.epochs.push(record);
        on_epoch(&record);
        if best.as_ref().map_or(true, |b| record.val_nmse < b.val_nmse) {
            best = Some(Checkpoint {
                val_nmse: record.val_nmse,
                ..current
            });
            since_best = 0;
        } else {
            since_best += 1;
        }
        if cfg.patience.is_some_and(|p| since_best >= p) {
            break;
        }
        if cfg.time_budget.is_some_and(|t| record.seconds >= t) {
            break;
        }
    }

    let last_epoch = history.epochs.last().map_or(0, |r| r.epoch);
    let last_val = history.epochs.last().map_or(f64::NAN, |r| r.val_nmse);
    let last = Checkpoint {
        model,
        normalizer,
        epoch: last_epoch,
        val_nmse: last_val,
    };
    Ok(TrainOutcome {
        best: best.unwrap_or_else(|| last.clone()),
        last,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nmse_anchors() {
        let t = [1.0, 2.0, 4.0, 7.0];
        assert_eq!(nmse(&t, &t).unwrap(), 0.0);
        let m = 3.5;
        assert_eq!(nmse(&[m; 4], &t).unwrap(), 100.0);
        assert_eq!(nmse(&[1.0, 1.0], &[0.0, 2.0]).unwrap(), 100.0);
        assert_eq!(nmse(&[1.0, 1.0], &[2.0, 2.0]), Err(TrainError::DegenerateTargets));
        assert_eq!(nmse(&[1.0], &[2.0]), Err(TrainError::TooFewSamples(1)));
        assert!(matches!(nmse(&[1.0], &[2.0, 3.0]), Err(TrainError::LengthMismatch { .. })));
    }

    #[test]
    fn affine_degenerate_column_and_roundtrip() {
        let rows: [Vec<f64>; 3] = [vec![1.0, 5.0], vec![3.0, 5.0], vec![8.0, 5.0]];
        let a = Affine::fit(2, rows.iter().map(|r| r.as_slice()));
        assert_eq!(a.scale[1], 1.0);
        assert_eq!(a.mean[1], 5.0);
        let mut x = vec![2.5, -1.0];
        a.apply(&mut x);
        a.invert(&mut x);
        assert!((x[0] - 2.5).abs() < 1e-12 && (x[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn history_csv_roundtrip() {
        let h = History {
            epochs: vec![
                EpochRecord {
                    epoch: 1,
                    train_nmse: 80.5,
                    val_nmse: 90.25,
                    test_nmse: 91.0,
                    seconds: 0.5,
                },
                EpochRecord {
                    epoch: 2,
                    train_nmse: 40.0,
                    val_nmse: 45.125,
                    test_nmse: 47.0,
                    seconds: 1.0,
                },
            ],
        };
        let csv = h.to_csv();
        assert!(csv.starts_with("epoch,train_nmse,val_nmse,test_nmse,seconds\n"));
        assert_eq!(History::from_csv(&csv).unwrap(), h);
        assert_eq!(h.best().unwrap().epoch, 2);
        assert!(History::from_csv("a,b\n").is_err());
    }

    #[test]
    fn config_validation_and_json() {
        let cfg = TrainConfig::default();
        cfg.validate().unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<TrainConfig>(&json).unwrap(), cfg);
        let partial: TrainConfig = serde_json::from_str(r#"{"epochs": 3, "aggregator": "mean_var"}"#).unwrap();
        assert_eq!(partial.epochs, 3);
        assert_eq!(partial.aggregator, Aggregator::MeanVar);
        assert!(TrainConfig {
            batch_size: 0,
            ..TrainConfig::default()
        }
        .validate()
        .is_err());
        assert!(TrainConfig {
            learning_rate: -1.0,
            ..TrainConfig::default()
        }
        .validate()
        .is_err());
    }
}
