//! Node classifiers: the two-layer GCN baseline, the two-branch LA-GCN that
//! consumes an augmented feature matrix alongside the original one, an MLP
//! counterpart, and the ablation variants, plus the training loop and
//! MC-dropout prediction.

use crate::graph::{drop_edge, GraphDataset, NormalizedAdjacency, SplitMasks};
use crate::numerics::{
    adam_step, dropout, dropout_no_mask, glorot_uniform, read_tensors, relu, relu_backward,
    row_log_softmax, write_tensors, AdamHyper, AdamState, DenseMatrix, RngState,
};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::borrow::Cow;
use std::path::Path;

/// Architecture selector. `width`, `concat_self`, and `plain_neighbor` are
/// the ablation variants: a plain GCN with doubled first-layer width, the
/// two-branch model fed its own features twice, and the two-branch model fed
/// one uniformly sampled real neighbor row per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelArch {
    Gcn,
    LaGcn,
    LaMlp,
    Width,
    ConcatSelf,
    PlainNeighbor,
}

impl ModelArch {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelArch::Gcn => "gcn",
            ModelArch::LaGcn => "la_gcn",
            ModelArch::LaMlp => "la_mlp",
            ModelArch::Width => "width",
            ModelArch::ConcatSelf => "concat_self",
            ModelArch::PlainNeighbor => "plain_neighbor",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "gcn" => ModelArch::Gcn,
            "la_gcn" => ModelArch::LaGcn,
            "la_mlp" => ModelArch::LaMlp,
            "width" => ModelArch::Width,
            "concat_self" => ModelArch::ConcatSelf,
            "plain_neighbor" => ModelArch::PlainNeighbor,
            other => return Err(Error::Config(format!("unknown architecture {other:?}"))),
        })
    }

    /// Whether the forward pass consumes a second feature matrix.
    pub fn takes_aux(self) -> bool {
        !matches!(self, ModelArch::Gcn | ModelArch::Width)
    }

    /// Whether layers aggregate over the graph (false for the MLP).
    fn uses_adjacency(self) -> bool {
        !matches!(self, ModelArch::LaMlp)
    }
}

impl std::fmt::Display for ModelArch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Training hyperparameters for the classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Hidden width per branch.
    pub hidden: usize,
    pub dropout: f64,
    pub lr: f64,
    pub weight_decay: f64,
    /// Apply the weight-decay term decoupled from the gradient moments
    /// instead of folding it into the gradient.
    pub decoupled_decay: bool,
    pub epochs: usize,
    /// Fraction of edges removed (and the adjacency renormalized) each
    /// training epoch; 0 disables.
    pub drop_edge: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden: 16,
            dropout: 0.5,
            lr: 0.01,
            weight_decay: 5e-4,
            decoupled_decay: false,
            epochs: 200,
            drop_edge: 0.0,
        }
    }
}

/// Bias-free classifier weights.
///
/// Shapes: `gcn` holds w1 F×h and w2 h×C (`width` uses 2h); the two-branch
/// architectures hold w1, w2 both F×h plus a head w_out 2h×C.
#[derive(Debug, Clone)]
pub struct GnnModel {
    pub arch: ModelArch,
    pub hidden: usize,
    pub dropout: f64,
    pub feature_dim: usize,
    pub classes: usize,
    w1: DenseMatrix,
    w2: DenseMatrix,
    w_out: Option<DenseMatrix>,
}

impl GnnModel {
    pub fn new(
        arch: ModelArch,
        feature_dim: usize,
        classes: usize,
        config: &TrainConfig,
        rng: &mut RngState,
    ) -> Self {
        let h = config.hidden;
        let (w1, w2, w_out) = match arch {
            ModelArch::Gcn => (
                glorot_uniform(feature_dim, h, rng),
                glorot_uniform(h, classes, rng),
                None,
            ),
            ModelArch::Width => (
                glorot_uniform(feature_dim, 2 * h, rng),
                glorot_uniform(2 * h, classes, rng),
                None,
            ),
            ModelArch::LaGcn | ModelArch::LaMlp | ModelArch::ConcatSelf
            | ModelArch::PlainNeighbor => (
                glorot_uniform(feature_dim, h, rng),
                glorot_uniform(feature_dim, h, rng),
                Some(glorot_uniform(2 * h, classes, rng)),
            ),
        };
        GnnModel {
            arch,
            hidden: h,
            dropout: config.dropout,
            feature_dim,
            classes,
            w1,
            w2,
            w_out,
        }
    }

    pub fn tensors(&self) -> Vec<(&'static str, &DenseMatrix)> {
        let mut t = vec![("w1", &self.w1), ("w2", &self.w2)];
        if let Some(w) = &self.w_out {
            t.push(("w_out", w));
        }
        t
    }

    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut DenseMatrix> {
        match name {
            "w1" => Some(&mut self.w1),
            "w2" => Some(&mut self.w2),
            "w_out" => self.w_out.as_mut(),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.is_finite())
    }
}

enum Cache<'a> {
    TwoLayer {
        d0: Cow<'a, DenseMatrix>,
        a1: DenseMatrix,
        d1: Cow<'a, DenseMatrix>,
        m1: DenseMatrix,
    },
    TwoBranch {
        dx: Cow<'a, DenseMatrix>,
        db: Cow<'a, DenseMatrix>,
        a1: DenseMatrix,
        a2: DenseMatrix,
        dh: Cow<'a, DenseMatrix>,
        mh: DenseMatrix,
    },
}

/// Input dropout for the forward cache. Mirrors `dropout`'s validation and
/// draw pattern but borrows the input on the pass-through paths, where no
/// mask is needed, instead of cloning it.
fn dropped_input<'a>(
    x: &'a DenseMatrix,
    rate: f64,
    rng: &mut RngState,
    training: bool,
) -> Result<Cow<'a, DenseMatrix>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Parameter(format!(
            "dropout rate must be in [0, 1), got {rate}"
        )));
    }
    if !training || rate == 0.0 {
        return Ok(Cow::Borrowed(x));
    }
    Ok(Cow::Owned(dropout_no_mask(x, rate, rng, true)?))
}

/// Hidden-layer dropout: the mask is kept for the backward pass when
/// training; evaluation passes the activations through untouched.
fn dropped_hidden<'a>(
    h: DenseMatrix,
    rate: f64,
    rng: &mut RngState,
    training: bool,
) -> Result<(Cow<'a, DenseMatrix>, DenseMatrix)> {
    if training {
        let (d, m) = dropout(&h, rate, rng, true)?;
        Ok((Cow::Owned(d), m))
    } else {
        Ok((Cow::Owned(h), DenseMatrix::zeros(0, 0)))
    }
}

fn aggregate(
    adj: &NormalizedAdjacency,
    t: &DenseMatrix,
    use_adj: bool,
) -> Result<DenseMatrix> {
    if use_adj {
        crate::graph::spmm(adj, t)
    } else {
        Ok(t.clone())
    }
}

/// Runs a forward pass, keeping the intermediates needed for the backward
/// pass. Dropout draws happen in a fixed documented order: input x, then
/// xbar (two-branch only), then the hidden activations.
fn forward_cached<'a>(
    model: &GnnModel,
    adj: &NormalizedAdjacency,
    x: &'a DenseMatrix,
    xbar: Option<&'a DenseMatrix>,
    rng: &mut RngState,
    training: bool,
) -> Result<(DenseMatrix, Cache<'a>)> {
    if x.cols() != model.feature_dim {
        return Err(Error::shape(
            "model forward",
            format!("x has {} columns, model expects {}", x.cols(), model.feature_dim),
        ));
    }
    if adj.dim() != x.rows() {
        return Err(Error::shape(
            "model forward",
            format!("adjacency dim {} vs {} feature rows", adj.dim(), x.rows()),
        ));
    }
    let rate = model.dropout;
    match model.arch {
        ModelArch::Gcn | ModelArch::Width => {
            let d0 = dropped_input(x, rate, rng, training)?;
            let a1 = aggregate(adj, &d0.matmul(&model.w1)?, true)?;
            let h = relu(&a1);
            let (d1, m1) = dropped_hidden(h, rate, rng, training)?;
            let logits = aggregate(adj, &d1.matmul(&model.w2)?, true)?;
            Ok((logits, Cache::TwoLayer { d0, a1, d1, m1 }))
        }
        ModelArch::LaGcn | ModelArch::LaMlp | ModelArch::ConcatSelf
        | ModelArch::PlainNeighbor => {
            let aux = match model.arch {
                ModelArch::ConcatSelf => x,
                _ => xbar.ok_or_else(|| {
                    Error::Parameter(format!(
                        "architecture {} needs an augmented feature matrix",
                        model.arch
                    ))
                })?,
            };
            if aux.shape() != x.shape() {
                return Err(Error::shape(
                    "model forward",
                    format!("x {:?} vs augmented {:?}", x.shape(), aux.shape()),
                ));
            }
            let use_adj = model.arch.uses_adjacency();
            let dx = dropped_input(x, rate, rng, training)?;
            let db = dropped_input(aux, rate, rng, training)?;
            let a1 = aggregate(adj, &dx.matmul(&model.w1)?, use_adj)?;
            let a2 = aggregate(adj, &db.matmul(&model.w2)?, use_adj)?;
            let h = relu(&a1).concat_cols(&relu(&a2))?;
            let (dh, mh) = dropped_hidden(h, rate, rng, training)?;
            let w_out = model.w_out.as_ref().expect("two-branch model has a head");
            let logits = aggregate(adj, &dh.matmul(w_out)?, use_adj)?;
            Ok((logits, Cache::TwoBranch { dx, db, a1, a2, dh, mh }))
        }
    }
}

/// Gradients wrt every tensor, ordered as `GnnModel::tensors`. The adjacency
/// is symmetric, so its transpose reuses the same spmm.
fn backward(
    model: &GnnModel,
    adj: &NormalizedAdjacency,
    cache: &Cache<'_>,
    g_logits: &DenseMatrix,
) -> Result<Vec<DenseMatrix>> {
    let use_adj = model.arch.uses_adjacency();
    match cache {
        Cache::TwoLayer { d0, a1, d1, m1 } => {
            let g_t2 = aggregate(adj, g_logits, true)?;
            let g_w2 = d1.matmul_at_b(&g_t2)?;
            let g_h = g_t2.matmul(&model.w2.transpose())?.hadamard(m1)?;
            let g_a1 = relu_backward(&g_h, a1)?;
            let g_t1 = aggregate(adj, &g_a1, true)?;
            let g_w1 = d0.matmul_at_b(&g_t1)?;
            Ok(vec![g_w1, g_w2])
        }
        Cache::TwoBranch { dx, db, a1, a2, dh, mh } => {
            let w_out = model.w_out.as_ref().expect("two-branch model has a head");
            let g_t3 = aggregate(adj, g_logits, use_adj)?;
            let g_w_out = dh.matmul_at_b(&g_t3)?;
            let g_h = g_t3.matmul(&w_out.transpose())?.hadamard(mh)?;
            let h = model.hidden;
            let g_b1 = relu_backward(&g_h.slice_cols(0, h)?, a1)?;
            let g_b2 = relu_backward(&g_h.slice_cols(h, 2 * h)?, a2)?;
            let g_w1 = dx.matmul_at_b(&aggregate(adj, &g_b1, use_adj)?)?;
            let g_w2 = db.matmul_at_b(&aggregate(adj, &g_b2, use_adj)?)?;
            Ok(vec![g_w1, g_w2, g_w_out])
        }
    }
}

/// Two-layer GCN forward: dropout(x), aggregate-transform, ReLU, dropout,
/// aggregate-transform. Returns raw logits.
pub fn gcn_forward(
    adj: &NormalizedAdjacency,
    x: &DenseMatrix,
    model: &GnnModel,
    rng: &mut RngState,
    training: bool,
) -> Result<DenseMatrix> {
    if model.arch.takes_aux() {
        return Err(Error::Parameter(format!(
            "gcn_forward expects a single-input architecture, got {}",
            model.arch
        )));
    }
    Ok(forward_cached(model, adj, x, None, rng, training)?.0)
}

/// Two-branch forward: H = relu(A x w1) || relu(A xbar w2), logits =
/// A H w_out, with dropout on x, xbar, and H while training.
pub fn la_gcn_forward(
    adj: &NormalizedAdjacency,
    x: &DenseMatrix,
    xbar: &DenseMatrix,
    model: &GnnModel,
    rng: &mut RngState,
    training: bool,
) -> Result<DenseMatrix> {
    if !model.arch.takes_aux() {
        return Err(Error::Parameter(format!(
            "la_gcn_forward expects a two-branch architecture, got {}",
            model.arch
        )));
    }
    Ok(forward_cached(model, adj, x, Some(xbar), rng, training)?.0)
}

/// The MLP input block: relu(x w1) || relu(xbar w2), no graph aggregation
/// and no dropout.
pub fn la_mlp_input(
    x: &DenseMatrix,
    xbar: &DenseMatrix,
    model: &GnnModel,
) -> Result<DenseMatrix> {
    if model.arch != ModelArch::LaMlp {
        return Err(Error::Parameter(format!(
            "la_mlp_input expects la_mlp, got {}",
            model.arch
        )));
    }
    if x.shape() != xbar.shape() || x.cols() != model.feature_dim {
        return Err(Error::shape(
            "la_mlp_input",
            format!("x {:?} vs xbar {:?}", x.shape(), xbar.shape()),
        ));
    }
    relu(&x.matmul(&model.w1)?).concat_cols(&relu(&xbar.matmul(&model.w2)?))
}

/// Ablation dispatch: `width` ignores `aux`, `concat_self` substitutes x,
/// `plain_neighbor` consumes the sampled neighbor rows in `aux`.
pub fn variant_forward(
    adj: &NormalizedAdjacency,
    x: &DenseMatrix,
    aux: Option<&DenseMatrix>,
    model: &GnnModel,
    rng: &mut RngState,
    training: bool,
) -> Result<DenseMatrix> {
    Ok(forward_cached(model, adj, x, aux, rng, training)?.0)
}

/// One uniformly sampled neighbor feature row per node; isolated nodes keep
/// their own row. Sampled once per run by the callers that need it.
pub fn sample_neighbor_rows(
    ds: &GraphDataset,
    x: &DenseMatrix,
    rng: &mut RngState,
) -> DenseMatrix {
    let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); ds.num_nodes];
    for &(u, v) in &ds.edges {
        neighbors[u as usize].push(v);
        neighbors[v as usize].push(u);
    }
    let mut out = DenseMatrix::zeros(x.rows(), x.cols());
    for i in 0..ds.num_nodes {
        let src = if neighbors[i].is_empty() {
            i
        } else {
            neighbors[i][rng.below(neighbors[i].len() as u64) as usize] as usize
        };
        out.row_mut(i).copy_from_slice(x.row(src));
    }
    out
}

/// Mean negative log-likelihood of the true class over the masked nodes.
pub fn masked_cross_entropy(
    logits: &DenseMatrix,
    labels: &[u32],
    mask: &[u32],
) -> Result<f64> {
    validate_mask(logits, labels, mask)?;
    let log_probs = row_log_softmax(logits);
    let mut total = 0.0;
    for &i in mask {
        total -= log_probs.get(i as usize, labels[i as usize] as usize);
    }
    Ok(total / mask.len() as f64)
}

/// d masked_cross_entropy / d logits: (softmax - onehot) / |mask| on masked
/// rows, zero elsewhere.
pub fn masked_cross_entropy_grad(
    logits: &DenseMatrix,
    labels: &[u32],
    mask: &[u32],
) -> Result<DenseMatrix> {
    validate_mask(logits, labels, mask)?;
    let log_probs = row_log_softmax(logits);
    let scale = 1.0 / mask.len() as f64;
    let mut grad = DenseMatrix::zeros(logits.rows(), logits.cols());
    for &i in mask {
        let r = i as usize;
        for (c, (g, &lp)) in grad.row_mut(r).iter_mut().zip(log_probs.row(r)).enumerate() {
            *g = (lp.exp() - if c == labels[r] as usize { 1.0 } else { 0.0 }) * scale;
        }
    }
    Ok(grad)
}

fn validate_mask(logits: &DenseMatrix, labels: &[u32], mask: &[u32]) -> Result<()> {
    if mask.is_empty() {
        return Err(Error::Parameter("empty node mask".into()));
    }
    if labels.len() != logits.rows() {
        return Err(Error::shape(
            "masked loss",
            format!("{} labels vs {} logit rows", labels.len(), logits.rows()),
        ));
    }
    for &i in mask {
        if i as usize >= logits.rows() {
            return Err(Error::Parameter(format!("mask index {i} out of range")));
        }
        if labels[i as usize] as usize >= logits.cols() {
            return Err(Error::Parameter(format!(
                "label {} at node {i} out of range",
                labels[i as usize]
            )));
        }
    }
    Ok(())
}

/// Fraction of masked nodes whose argmax logit matches the label. Ties take
/// the lowest class index.
pub fn accuracy(logits: &DenseMatrix, labels: &[u32], mask: &[u32]) -> Result<f64> {
    validate_mask(logits, labels, mask)?;
    let mut hits = 0usize;
    for &i in mask {
        let row = logits.row(i as usize);
        let mut best = 0usize;
        for (c, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = c;
            }
        }
        if best == labels[i as usize] as usize {
            hits += 1;
        }
    }
    Ok(hits as f64 / mask.len() as f64)
}

/// Loss and per-tensor gradients of the masked cross-entropy for any
/// architecture, with dropout active when `training`. Deterministic given
/// the rng state, which freezes the dropout masks for gradient checks.
#[allow(clippy::too_many_arguments)]
pub fn model_loss_and_gradients(
    model: &GnnModel,
    adj: &NormalizedAdjacency,
    x: &DenseMatrix,
    xbar: Option<&DenseMatrix>,
    labels: &[u32],
    mask: &[u32],
    rng: &mut RngState,
    training: bool,
) -> Result<(f64, Vec<DenseMatrix>)> {
    let (logits, cache) = forward_cached(model, adj, x, xbar, rng, training)?;
    let loss = masked_cross_entropy(&logits, labels, mask)?;
    if !loss.is_finite() {
        return Err(Error::Numeric(format!("non-finite training loss {loss}")));
    }
    let g_logits = masked_cross_entropy_grad(&logits, labels, mask)?;
    let grads = backward(model, adj, &cache, &g_logits)?;
    Ok((loss, grads))
}

/// Training outcome: the best-validation checkpoint and its metrics.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: GnnModel,
    pub val_accuracy: f64,
    pub test_accuracy: f64,
    pub best_epoch: usize,
    pub loss_trace: Vec<f64>,
}

/// Full-batch Adam training on the train mask with best-validation
/// checkpointing; reports the checkpoint's test accuracy.
///
/// Per epoch the rng is consumed in a fixed order: the optional edge-drop
/// draw, then the forward dropout masks. Evaluation passes draw nothing.
#[allow(clippy::too_many_arguments)]
pub fn train_model(
    mut model: GnnModel,
    adj: &NormalizedAdjacency,
    x: &DenseMatrix,
    xbar: Option<&DenseMatrix>,
    ds: &GraphDataset,
    split: &SplitMasks,
    config: &TrainConfig,
    rng: &mut RngState,
) -> Result<TrainOutcome> {
    if split.train.is_empty() || split.val.is_empty() || split.test.is_empty() {
        return Err(Error::Data("empty split mask".into()));
    }
    let hyper = AdamHyper {
        lr: config.lr,
        weight_decay: config.weight_decay,
        decoupled_decay: config.decoupled_decay,
        ..AdamHyper::default()
    };
    let mut opt: Vec<AdamState> = model
        .tensors()
        .iter()
        .map(|(_, t)| AdamState::new(t.data().len(), hyper))
        .collect();

    let mut best = model.clone();
    let mut best_val = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    let mut trace = Vec::with_capacity(config.epochs);
    let mut eval_rng = RngState::new(0);

    for epoch in 1..=config.epochs {
        let dropped;
        let train_adj = if config.drop_edge > 0.0 {
            dropped = drop_edge(ds, config.drop_edge, rng)?;
            &dropped
        } else {
            adj
        };
        let (loss, grads) =
            model_loss_and_gradients(&model, train_adj, x, xbar, &ds.labels, &split.train, rng, true)
                .map_err(|e| match e {
                    Error::Numeric(msg) => Error::Numeric(format!("epoch {epoch}: {msg}")),
                    other => other,
                })?;
        trace.push(loss);
        let names: Vec<&'static str> = model.tensors().iter().map(|(n, _)| *n).collect();
        for ((name, grad), st) in names.iter().zip(&grads).zip(opt.iter_mut()) {
            let t = model.tensor_mut(name).unwrap();
            adam_step(t.data_mut(), grad.data(), st)?;
        }

        let (logits, _) = forward_cached(&model, adj, x, xbar, &mut eval_rng, false)?;
        let val_acc = accuracy(&logits, &ds.labels, &split.val)?;
        if val_acc > best_val {
            best_val = val_acc;
            best_epoch = epoch;
            best = model.clone();
        }
    }

    if config.epochs == 0 {
        let (logits, _) = forward_cached(&model, adj, x, xbar, &mut eval_rng, false)?;
        best_val = accuracy(&logits, &ds.labels, &split.val)?;
        best = model;
    }
    let (logits, _) = forward_cached(&best, adj, x, xbar, &mut eval_rng, false)?;
    let test_accuracy = accuracy(&logits, &ds.labels, &split.test)?;
    Ok(TrainOutcome {
        model: best,
        val_accuracy: best_val,
        test_accuracy,
        best_epoch,
        loss_trace: trace,
    })
}

/// MC-dropout class probabilities: one N×C simplex-row matrix per stochastic
/// forward pass.
#[derive(Debug, Clone)]
pub struct McDropoutSamples {
    pub probs: Vec<DenseMatrix>,
}

impl McDropoutSamples {
    pub fn n_mc(&self) -> usize {
        self.probs.len()
    }
}

/// Runs `n_mc` forward passes with dropout active and softmaxes the logits.
/// Pass s draws its masks from the child stream `rng.split(s)`, so samples
/// are independent of evaluation order.
pub fn mc_dropout_predict(
    model: &GnnModel,
    adj: &NormalizedAdjacency,
    x: &DenseMatrix,
    xbar: Option<&DenseMatrix>,
    n_mc: usize,
    rng: &RngState,
) -> Result<McDropoutSamples> {
    if n_mc == 0 {
        return Err(Error::Parameter("n_mc must be at least 1".into()));
    }
    let mut probs = Vec::with_capacity(n_mc);
    for s in 0..n_mc {
        let mut pass_rng = rng.split(s as u64);
        let (logits, _) = forward_cached(model, adj, x, xbar, &mut pass_rng, true)?;
        probs.push(row_log_softmax(&logits).map(f64::exp));
    }
    Ok(McDropoutSamples { probs })
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    arch: String,
    hidden: usize,
    dropout: f64,
    feature_dim: usize,
    classes: usize,
}

/// Writes the weights beside a JSON description: `<path>` holds the tensors,
/// `<path>.json` the architecture and dimensions.
pub fn save_checkpoint(model: &GnnModel, path: &Path) -> Result<()> {
    write_tensors(path, &model.tensors())?;
    let sidecar = Sidecar {
        arch: model.arch.as_str().to_string(),
        hidden: model.hidden,
        dropout: model.dropout,
        feature_dim: model.feature_dim,
        classes: model.classes,
    };
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::Data(format!("sidecar encode: {e}")))?;
    std::fs::write(sidecar_path(path), json)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<GnnModel> {
    let sc_path = sidecar_path(path);
    let sidecar: Sidecar = serde_json::from_str(
        &std::fs::read_to_string(&sc_path)
            .map_err(|e| Error::Data(format!("{}: {e}", sc_path.display())))?,
    )
    .map_err(|e| Error::Data(format!("{}: {e}", sc_path.display())))?;
    let config = TrainConfig {
        hidden: sidecar.hidden,
        dropout: sidecar.dropout,
        ..TrainConfig::default()
    };
    let mut rng = RngState::new(0);
    let mut model = GnnModel::new(
        ModelArch::parse(&sidecar.arch)?,
        sidecar.feature_dim,
        sidecar.classes,
        &config,
        &mut rng,
    );
    for (name, tensor) in read_tensors(path)? {
        let slot = model
            .tensor_mut(&name)
            .ok_or_else(|| Error::Data(format!("unknown tensor {name:?} in {}", path.display())))?;
        if slot.shape() != tensor.shape() {
            return Err(Error::Data(format!(
                "tensor {name} has shape {:?}, expected {:?}",
                tensor.shape(),
                slot.shape()
            )));
        }
        *slot = tensor;
    }
    Ok(model)
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    std::path::PathBuf::from(os)
}
