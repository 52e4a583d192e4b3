//! Feedforward reference network.
//!
//! Inputs are the raw 42-component dilemma key (counts cast to reals, no
//! standardisation), optionally followed by per-side principle indicators.
//! Hidden layers use ReLU; the head is a single logistic unit trained on mean
//! binary cross-entropy. Training is minibatch Adam with He initialisation,
//! a held-out slice of the training rows for early stopping, and fully seeded
//! shuffling.

use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::choicemodel::logistic;
use crate::error::{Error, Result};
use crate::features::{side_indicators, PrincipleSpec, ScenarioView};
use crate::ingest::Dataset;
use crate::metrics::{self, EvalReport};
use crate::rng;
use crate::scenario::{Scenario, Side, Taxonomy, KEY_LEN};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MlpArch {
    pub hidden: Vec<usize>,
}

impl Default for MlpArch {
    /// Three hidden layers of 32 units.
    fn default() -> Self {
        Self { hidden: vec![32, 32, 32] }
    }
}

impl MlpArch {
    pub fn new(hidden: Vec<usize>) -> Result<Self> {
        if hidden.contains(&0) {
            return Err(Error::validation("hidden layer widths must be at least 1"));
        }
        Ok(Self { hidden })
    }

    /// Parses "32,32,32"; an empty string means no hidden layer.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Self::new(vec![]);
        }
        let hidden = s
            .split(',')
            .map(|w| {
                w.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::validation(format!("bad layer width `{w}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(hidden)
    }

    fn shapes(&self, input_dim: usize) -> Vec<(usize, usize)> {
        let mut dims = vec![input_dim];
        dims.extend(&self.hidden);
        dims.push(1);
        dims.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Σ (fan_in · fan_out + fan_out).
    pub fn param_count(&self, input_dim: usize) -> usize {
        self.shapes(input_dim).iter().map(|(i, o)| i * o + o).sum()
    }

    pub fn label(&self) -> String {
        self.hidden.iter().map(|w| w.to_string()).collect::<Vec<_>>().join("x")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major `n_out × n_in`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    fn zeros(n_in: usize, n_out: usize) -> Self {
        Self {
            n_in,
            n_out,
            weights: vec![0.0; n_in * n_out],
            biases: vec![0.0; n_out],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub arch: MlpArch,
    pub input_dim: usize,
    pub layers: Vec<Dense>,
}

/// Gradients with the same shapes as [`MlpParams::layers`].
pub type Gradients = Vec<Dense>;

impl MlpParams {
    pub fn zeros(arch: &MlpArch, input_dim: usize) -> Self {
        let layers = arch.shapes(input_dim).into_iter().map(|(i, o)| Dense::zeros(i, o)).collect();
        Self {
            arch: arch.clone(),
            input_dim,
            layers,
        }
    }

    /// He-scaled normal weights, zero biases.
    pub fn init(arch: &MlpArch, input_dim: usize, seed: u64) -> Self {
        let mut p = Self::zeros(arch, input_dim);
        let mut r = rng::stream(seed, 0x1417);
        for layer in &mut p.layers {
            let normal = Normal::new(0.0, (2.0 / layer.n_in as f64).sqrt()).expect("positive std");
            for w in &mut layer.weights {
                *w = normal.sample(&mut r);
            }
        }
        p
    }

    pub fn k(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn set_flat(&mut self, v: &[f64]) {
        let mut it = v.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                *w = it.next().expect("flat vector has k entries");
            }
        }
    }

    /// Output probability for one input vector.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(Error::validation(format!(
                "input has {} components, network expects {}",
                x.len(),
                self.input_dim
            )));
        }
        Ok(self.forward_batch(x, 1)[0])
    }

    /// Probabilities for `rows` inputs stored row-major in `x`.
    pub fn forward_batch(&self, x: &[f64], rows: usize) -> Vec<f64> {
        let mut ws = Workspace::new(self, rows);
        self.forward_into(x, rows, &mut ws);
        ws.logits().iter().map(|&z| logistic(z)).collect()
    }

    fn forward_into(&self, x: &[f64], rows: usize, ws: &mut Workspace) {
        assert_eq!(x.len(), rows * self.input_dim);
        ws.resize(self, rows);
        let n_layers = self.layers.len();
        for (li, layer) in self.layers.iter().enumerate() {
            let (before, after) = ws.acts.split_at_mut(li);
            let input: &[f64] = if li == 0 { x } else { &before[li - 1] };
            let out = &mut after[0];
            for row in out.chunks_exact_mut(layer.n_out) {
                row.copy_from_slice(&layer.biases);
            }
            // out (rows × n_out) += input (rows × n_in) · Wᵀ
            gemm(
                rows,
                layer.n_in,
                layer.n_out,
                input,
                (layer.n_in, 1),
                &layer.weights,
                (1, layer.n_in),
                out,
                (layer.n_out, 1),
                1.0,
            );
            if li + 1 < n_layers {
                for v in out.iter_mut() {
                    *v = v.max(0.0);
                }
            }
        }
    }

    /// Mean binary cross-entropy over the batch and its exact gradient.
    pub fn loss_and_gradient(&self, x: &[f64], left_labels: &[bool]) -> Result<(f64, Gradients)> {
        let rows = left_labels.len();
        if rows == 0 {
            return Err(Error::validation("empty batch"));
        }
        if x.len() != rows * self.input_dim {
            return Err(Error::validation("batch shape does not match the network input"));
        }
        let mut ws = Workspace::new(self, rows);
        let mut grads: Gradients = self.layers.iter().map(|l| Dense::zeros(l.n_in, l.n_out)).collect();
        let loss = self.backprop(x, left_labels, &mut ws, &mut grads);
        Ok((loss, grads))
    }

    fn backprop(&self, x: &[f64], y: &[bool], ws: &mut Workspace, grads: &mut Gradients) -> f64 {
        let rows = y.len();
        self.forward_into(x, rows, ws);
        let inv = 1.0 / rows as f64;
        let mut loss = 0.0;
        {
            let logits = ws.acts.last().expect("at least one layer");
            ws.delta.clear();
            for (&z, &label) in logits.iter().zip(y) {
                let t = if label { 1.0 } else { 0.0 };
                // softplus(z) - t·z, computed stably.
                loss += z.max(0.0) + (-z.abs()).exp().ln_1p() - t * z;
                ws.delta.push((logistic(z) - t) * inv);
            }
        }
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let input: &[f64] = if li == 0 { x } else { &ws.acts[li - 1] };
            let g = &mut grads[li];
            // dW (n_out × n_in) = δᵀ · input
            gemm(
                layer.n_out,
                rows,
                layer.n_in,
                &ws.delta,
                (1, layer.n_out),
                input,
                (layer.n_in, 1),
                &mut g.weights,
                (layer.n_in, 1),
                0.0,
            );
            g.biases.iter_mut().for_each(|b| *b = 0.0);
            for row in ws.delta.chunks_exact(layer.n_out) {
                for (b, d) in g.biases.iter_mut().zip(row) {
                    *b += d;
                }
            }
            if li > 0 {
                // δ_prev (rows × n_in) = δ · W, masked by ReLU.
                ws.delta_prev.resize(rows * layer.n_in, 0.0);
                gemm(
                    rows,
                    layer.n_out,
                    layer.n_in,
                    &ws.delta,
                    (layer.n_out, 1),
                    &layer.weights,
                    (layer.n_in, 1),
                    &mut ws.delta_prev,
                    (layer.n_in, 1),
                    0.0,
                );
                for (d, a) in ws.delta_prev.iter_mut().zip(&ws.acts[li - 1]) {
                    if *a <= 0.0 {
                        *d = 0.0;
                    }
                }
                std::mem::swap(&mut ws.delta, &mut ws.delta_prev);
            }
        }
        loss * inv
    }
}

/// Activation and delta buffers reused across minibatches.
struct Workspace {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl Workspace {
    fn new(m: &MlpParams, rows: usize) -> Self {
        let mut ws = Self {
            acts: Vec::new(),
            delta: Vec::new(),
            delta_prev: Vec::new(),
        };
        ws.resize(m, rows);
        ws
    }

    fn resize(&mut self, m: &MlpParams, rows: usize) {
        self.acts.resize(m.layers.len(), Vec::new());
        for (a, l) in self.acts.iter_mut().zip(&m.layers) {
            a.resize(rows * l.n_out, 0.0);
        }
    }

    fn logits(&self) -> &[f64] {
        self.acts.last().expect("at least one layer")
    }
}

/// `c = a · b + beta · c` with explicit (row, column) strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (usize, usize),
    b: &[f64],
    (rsb, csb): (usize, usize),
    c: &mut [f64],
    (rsc, csc): (usize, usize),
    beta: f64,
) {
    let extent = |rows: usize, cols: usize, rs: usize, cs: usize| {
        if rows == 0 || cols == 0 {
            0
        } else {
            (rows - 1) * rs + (cols - 1) * cs + 1
        }
    };
    assert!(a.len() >= extent(m, k, rsa, csa));
    assert!(b.len() >= extent(k, n, rsb, csb));
    assert!(c.len() >= extent(m, n, rsc, csc));
    // SAFETY: the asserts above keep every strided access inside the slices,
    // and `c` is exclusively borrowed.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            rsc as isize,
            csc as isize,
        );
    }
}

/// Maps scenarios to network inputs: the raw key plus optional per-side
/// principle indicators (42 + 2·|extra|).
#[derive(Debug, Clone)]
pub struct InputEncoder {
    pub extra: Vec<PrincipleSpec>,
    pub taxonomy: &'static Taxonomy,
}

impl InputEncoder {
    pub fn raw() -> Self {
        Self::with_extra(vec![])
    }

    pub fn with_extra(extra: Vec<PrincipleSpec>) -> Self {
        Self {
            extra,
            taxonomy: Taxonomy::standard(),
        }
    }

    pub fn dim(&self) -> usize {
        KEY_LEN + 2 * self.extra.len()
    }

    pub fn encode_into(&self, s: &Scenario, out: &mut Vec<f64>) {
        out.extend(s.encode().to_f64());
        if !self.extra.is_empty() {
            out.extend(side_indicators(&ScenarioView::new(self.taxonomy, s), &self.extra));
        }
    }

    pub fn encode_all(&self, scenarios: &[Scenario]) -> Vec<f64> {
        let mut out = Vec::with_capacity(scenarios.len() * self.dim());
        for s in scenarios {
            self.encode_into(s, &mut out);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrainMetadata {
    pub seed: u64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub final_train_loss: f64,
    pub best_validation_loss: f64,
    pub n_train: usize,
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Minimum validation-loss decrease that counts as an improvement.
    pub tolerance: f64,
    /// Epochs without improvement before stopping.
    pub patience: usize,
    /// Share of training rows held out for early stopping.
    pub validation_fraction: f64,
    /// Learning-rate factor applied after each epoch without improvement.
    pub lr_decay: f64,
    /// Weight of the running parameter average; 0 disables averaging.
    pub ema_decay: f64,
}

/// Datasets above this size train with the large batch.
pub const LARGE_BATCH_THRESHOLD: usize = 100_000;

impl TrainConfig {
    /// Batch 8192 above 10⁵ rows, 512 otherwise.
    pub fn for_dataset_size(n: usize, seed: u64) -> Self {
        Self {
            batch_size: if n > LARGE_BATCH_THRESHOLD { 8192 } else { 512 },
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::validation("batch size must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::validation("learning rate must be positive"));
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return Err(Error::validation("learning-rate decay must be in (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::validation("validation fraction must be in [0, 1)"));
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 512,
            epochs: 30,
            learning_rate: 1e-2,
            seed: 0,
            tolerance: 1e-5,
            patience: 3,
            validation_fraction: 0.1,
            lr_decay: 0.5,
            ema_decay: 0.0,
        }
    }
}

/// A trained network plus the input encoding it expects.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    pub params: MlpParams,
    pub encoder: InputEncoder,
    pub train_meta: Option<TrainMetadata>,
    pub name: String,
}

impl NetworkModel {
    pub fn k(&self) -> usize {
        self.params.k()
    }

    pub fn predict_left_prob(&self, s: &Scenario) -> f64 {
        let mut x = Vec::with_capacity(self.encoder.dim());
        self.encoder.encode_into(s, &mut x);
        self.params.forward_batch(&x, 1)[0]
    }

    pub fn predict_many(&self, scenarios: &[Scenario]) -> Vec<f64> {
        scenarios
            .chunks(4096)
            .flat_map(|chunk| {
                let x = self.encoder.encode_all(chunk);
                self.params.forward_batch(&x, chunk.len())
            })
            .collect()
    }

    pub fn evaluate(&self, test: &Dataset) -> Result<EvalReport> {
        let preds = self.predict_many(&test.scenarios());
        EvalReport::evaluate(self.name.clone(), &preds, &test.left_labels(), self.k())
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(k: usize) -> Self {
        Self {
            m: vec![0.0; k],
            v: vec![0.0; k],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut MlpParams, grads: &Gradients, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        let mut idx = 0;
        for (layer, g) in params.layers.iter_mut().zip(grads) {
            for (w, gw) in layer
                .weights
                .iter_mut()
                .chain(layer.biases.iter_mut())
                .zip(g.weights.iter().chain(&g.biases))
            {
                let m = &mut self.m[idx];
                let v = &mut self.v[idx];
                *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * gw;
                *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * gw * gw;
                *w -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
                idx += 1;
            }
        }
    }
}

fn mean_loss(params: &MlpParams, x: &[f64], y: &[bool], dim: usize) -> f64 {
    let mut total = 0.0;
    for (xc, yc) in x.chunks(4096 * dim).zip(y.chunks(4096)) {
        let rows = yc.len();
        let mut ws = Workspace::new(params, rows);
        params.forward_into(xc, rows, &mut ws);
        total += ws
            .logits()
            .iter()
            .zip(yc)
            .map(|(&z, &t)| z.max(0.0) + (-z.abs()).exp().ln_1p() - if t { z } else { 0.0 })
            .sum::<f64>();
    }
    total / y.len() as f64
}

/// Train a network on `train` with minibatch Adam.
pub fn train(arch: &MlpArch, train: &Dataset, encoder: InputEncoder, cfg: &TrainConfig) -> Result<NetworkModel> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dim = encoder.dim();
    let x_all = encoder.encode_all(&train.scenarios());
    let y_all = train.left_labels();

    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(&mut rng::stream(cfg.seed, 0x7A11));
    let n_val = if train.len() >= 10 {
        (cfg.validation_fraction * train.len() as f64).round() as usize
    } else {
        0
    };
    let (val_idx, fit_idx) = order.split_at(n_val);
    let gather = |idx: &[usize]| -> (Vec<f64>, Vec<bool>) {
        let mut x = Vec::with_capacity(idx.len() * dim);
        for &i in idx {
            x.extend_from_slice(&x_all[i * dim..(i + 1) * dim]);
        }
        (x, idx.iter().map(|&i| y_all[i]).collect())
    };
    let (x_val, y_val) = gather(val_idx);
    let (x_fit, y_fit) = gather(fit_idx);
    drop(x_all);

    let mut params = MlpParams::init(arch, dim, cfg.seed);
    let mut adam = Adam::new(params.k());
    let batch = cfg.batch_size.min(y_fit.len());
    let mut ws = Workspace::new(&params, batch);
    let mut grads: Gradients = params.layers.iter().map(|l| Dense::zeros(l.n_in, l.n_out)).collect();
    let mut shuffle_rng = rng::stream(cfg.seed, 0x5407);
    let mut perm: Vec<usize> = (0..y_fit.len()).collect();
    let mut xb = Vec::with_capacity(batch * dim);
    let mut yb = Vec::with_capacity(batch);

    let mut lr = cfg.learning_rate;
    let mut ema = params.clone();
    let mut best = (f64::INFINITY, params.clone(), 0usize);
    let mut since_best = 0;
    let mut epochs_run = 0;
    let mut last_train_loss = f64::NAN;
    for epoch in 1..=cfg.epochs {
        epochs_run = epoch;
        perm.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for chunk in perm.chunks(batch) {
            xb.clear();
            yb.clear();
            for &i in chunk {
                xb.extend_from_slice(&x_fit[i * dim..(i + 1) * dim]);
                yb.push(y_fit[i]);
            }
            let loss = params.backprop(&xb, &yb, &mut ws, &mut grads);
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch, loss });
            }
            epoch_loss += loss * chunk.len() as f64;
            adam.step(&mut params, &grads, lr);
            if cfg.ema_decay > 0.0 {
                for (e, l) in ema.layers.iter_mut().zip(&params.layers) {
                    for (a, b) in e.weights.iter_mut().zip(&l.weights).chain(e.biases.iter_mut().zip(&l.biases)) {
                        *a = cfg.ema_decay * *a + (1.0 - cfg.ema_decay) * b;
                    }
                }
            }
        }
        let eval_params = if cfg.ema_decay > 0.0 { &ema } else { &params };
        last_train_loss = epoch_loss / y_fit.len() as f64;
        let monitor = if y_val.is_empty() {
            last_train_loss
        } else {
            mean_loss(eval_params, &x_val, &y_val, dim)
        };
        if !monitor.is_finite() {
            return Err(Error::Diverged { epoch, loss: monitor });
        }
        if monitor < best.0 - cfg.tolerance {
            best = (monitor, eval_params.clone(), epoch);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
            lr *= cfg.lr_decay;
        }
    }
    let (best_val, best_params, best_epoch) = best;
    let final_train_loss = mean_loss(&best_params, &x_fit, &y_fit, dim);
    let _ = last_train_loss;
    Ok(NetworkModel {
        params: best_params,
        name: if encoder.extra.is_empty() {
            "neural_network".into()
        } else {
            "neural_network_plus".into()
        },
        encoder,
        train_meta: Some(TrainMetadata {
            seed: cfg.seed,
            batch_size: cfg.batch_size,
            learning_rate: cfg.learning_rate,
            epochs_run,
            best_epoch,
            final_train_loss,
            best_validation_loss: best_val,
            n_train: train.len(),
        }),
    })
}

/// One grid cell: hidden-layer count, width and batch size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCell {
    pub layers: usize,
    pub width: usize,
    pub batch_size: usize,
}

impl GridCell {
    pub fn arch(&self) -> MlpArch {
        MlpArch {
            hidden: vec![self.width; self.layers],
        }
    }
}

/// Layers {1,2,3} × widths {16,32,64} × batch {512, 8192}.
pub fn default_grid() -> Vec<GridCell> {
    let mut g = Vec::new();
    for layers in [1, 2, 3] {
        for width in [16, 32, 64] {
            for batch_size in [512, 8192] {
                g.push(GridCell {
                    layers,
                    width,
                    batch_size,
                });
            }
        }
    }
    g
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridRow {
    pub cell: GridCell,
    pub accuracy: f64,
    pub auc: f64,
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct GridReport {
    pub best: GridCell,
    pub rows: Vec<GridRow>,
}

impl GridReport {
    pub fn best_arch(&self) -> MlpArch {
        self.best.arch()
    }
}

/// Train every grid cell on `train` and score it on `validation`; the best
/// validation accuracy wins, ties going to the earlier cell.
pub fn grid_search(grid: &[GridCell], train_set: &Dataset, validation: &Dataset, seed: u64) -> Result<GridReport> {
    if grid.is_empty() {
        return Err(Error::validation("grid is empty"));
    }
    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(i, cell)| {
            let cfg = TrainConfig {
                batch_size: cell.batch_size,
                seed: rng::derive_seed(seed, i as u64),
                ..TrainConfig::default()
            };
            let model = train(&cell.arch(), train_set, InputEncoder::raw(), &cfg)?;
            let preds = model.predict_many(&validation.scenarios());
            let labels = validation.left_labels();
            Ok(GridRow {
                cell: cell.clone(),
                accuracy: metrics::accuracy(&preds, &labels)?,
                auc: metrics::auc(&preds, &labels)?,
                loss: metrics::cross_entropy(&preds, &labels)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.accuracy > rows[best].accuracy {
            best = i;
        }
    }
    Ok(GridReport {
        best: rows[best].cell.clone(),
        rows,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct LayerFile {
    /// `n_out` rows of `n_in` weights.
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

/// JSON network file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NetworkFile {
    kind: String,
    name: String,
    arch: MlpArch,
    activation: String,
    input_dim: usize,
    extra_inputs: Vec<String>,
    layers: Vec<LayerFile>,
    k: usize,
    train_metadata: Option<TrainMetadata>,
}

pub const NETWORK_KIND: &str = "network";

impl NetworkModel {
    pub fn to_file(&self) -> NetworkFile {
        NetworkFile {
            kind: NETWORK_KIND.into(),
            name: self.name.clone(),
            arch: self.params.arch.clone(),
            activation: "relu".into(),
            input_dim: self.params.input_dim,
            extra_inputs: self.encoder.extra.iter().map(|p| p.source()).collect(),
            layers: self
                .params
                .layers
                .iter()
                .map(|l| LayerFile {
                    weights: l.weights.chunks(l.n_in).map(<[f64]>::to_vec).collect(),
                    biases: l.biases.clone(),
                })
                .collect(),
            k: self.k(),
            train_metadata: self.train_meta.clone(),
        }
    }

    pub fn from_file(f: &NetworkFile) -> Result<Self> {
        if f.kind != NETWORK_KIND {
            return Err(Error::Schema(format!("expected kind `{NETWORK_KIND}`, found `{}`", f.kind)));
        }
        let extra = f
            .extra_inputs
            .iter()
            .map(|s| PrincipleSpec::parse(s))
            .collect::<Result<Vec<_>>>()?;
        let encoder = InputEncoder::with_extra(extra);
        if encoder.dim() != f.input_dim {
            return Err(Error::Schema(format!("inputDim {} does not match the input encoding", f.input_dim)));
        }
        let arch = MlpArch::new(f.arch.hidden.clone())?;
        let mut params = MlpParams::zeros(&arch, f.input_dim);
        if f.layers.len() != params.layers.len() {
            return Err(Error::Schema("layer count does not match arch".into()));
        }
        for (dst, src) in params.layers.iter_mut().zip(&f.layers) {
            if src.biases.len() != dst.n_out
                || src.weights.len() != dst.n_out
                || src.weights.iter().any(|r| r.len() != dst.n_in)
            {
                return Err(Error::Schema("layer shape does not match arch".into()));
            }
            dst.weights = src.weights.concat();
            dst.biases = src.biases.clone();
        }
        if params.k() != f.k {
            return Err(Error::Schema(format!("k = {} does not match {} parameters", f.k, params.k())));
        }
        Ok(Self {
            params,
            encoder,
            train_meta: f.train_metadata.clone(),
            name: f.name.clone(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(&self.to_file())?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_file(&serde_json::from_str(&text)?)
    }
}

/// Labels of a side as network targets (1 = left saved).
pub fn label(side: Side) -> bool {
    side == Side::Left
}
