//! Conditional VAE over neighbor feature pairs.
//!
//! The encoder maps a concatenated pair (x_j, x_i) through one ReLU hidden
//! layer to a diagonal Gaussian (mu, log_var); the decoder maps (x_i, z)
//! through one ReLU hidden layer back to feature space. Training minimizes
//! the negative ELBO: reconstruction plus KL(q(z|x_j,x_i) || N(0,I)) with a
//! single-sample Monte Carlo estimate of the reconstruction term.

use crate::graph::{neighbor_pairs, GraphDataset};
use crate::numerics::{
    adam_step, gaussian_kl, glorot_uniform, read_tensors, relu, relu_backward, sigmoid,
    write_tensors, AdamHyper, AdamState, DenseMatrix, RngState,
};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Reconstruction likelihood of the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Likelihood {
    /// Sigmoid output, binary cross-entropy summed over features.
    Bernoulli,
    /// Identity output, squared error / (2c) summed over features.
    Gaussian,
}

/// Generator hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorConfig {
    pub latent_dim: usize,
    pub hidden: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub gen_epochs: usize,
    pub likelihood: Likelihood,
    pub gaussian_c: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            latent_dim: 16,
            hidden: 256,
            lr: 1e-3,
            batch_size: 64,
            gen_epochs: 30,
            likelihood: Likelihood::Bernoulli,
            gaussian_c: 1.0,
        }
    }
}

/// A batch of neighbor features x_j with their conditioning features x_i.
#[derive(Debug, Clone)]
pub struct PairBatch {
    pub x_j: DenseMatrix,
    pub x_i: DenseMatrix,
}

impl PairBatch {
    pub fn new(x_j: DenseMatrix, x_i: DenseMatrix) -> Result<Self> {
        if x_j.shape() != x_i.shape() || x_j.rows() == 0 {
            return Err(Error::shape(
                "PairBatch",
                format!("x_j {:?} vs x_i {:?}", x_j.shape(), x_i.shape()),
            ));
        }
        Ok(PairBatch { x_j, x_i })
    }

    /// Copies the (j, i) feature rows out of a node-feature matrix.
    pub fn gather(features: &DenseMatrix, pairs: &[(u32, u32)]) -> Self {
        let f = features.cols();
        let mut x_j = DenseMatrix::zeros(pairs.len(), f);
        let mut x_i = DenseMatrix::zeros(pairs.len(), f);
        for (r, &(j, i)) in pairs.iter().enumerate() {
            x_j.row_mut(r).copy_from_slice(features.row(j as usize));
            x_i.row_mut(r).copy_from_slice(features.row(i as usize));
        }
        PairBatch { x_j, x_i }
    }

    pub fn len(&self) -> usize {
        self.x_j.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

const LOG_VAR_CLAMP: f64 = 10.0;

/// Encoder/decoder weights. Hidden layers carry biases; biases start at zero
/// and weights Glorot-uniform.
#[derive(Debug, Clone)]
pub struct CvaeModel {
    pub feature_dim: usize,
    pub latent_dim: usize,
    pub hidden: usize,
    pub likelihood: Likelihood,
    pub c: f64,
    e_w1: DenseMatrix,
    e_b1: DenseMatrix,
    e_wm: DenseMatrix,
    e_bm: DenseMatrix,
    e_wv: DenseMatrix,
    e_bv: DenseMatrix,
    d_w1: DenseMatrix,
    d_b1: DenseMatrix,
    d_w2: DenseMatrix,
    d_b2: DenseMatrix,
}

impl CvaeModel {
    pub fn new(feature_dim: usize, config: &GeneratorConfig, rng: &mut RngState) -> Self {
        let (f, d, h) = (feature_dim, config.latent_dim, config.hidden);
        CvaeModel {
            feature_dim: f,
            latent_dim: d,
            hidden: h,
            likelihood: config.likelihood,
            c: config.gaussian_c,
            e_w1: glorot_uniform(2 * f, h, rng),
            e_b1: DenseMatrix::zeros(1, h),
            e_wm: glorot_uniform(h, d, rng),
            e_bm: DenseMatrix::zeros(1, d),
            e_wv: glorot_uniform(h, d, rng),
            e_bv: DenseMatrix::zeros(1, d),
            d_w1: glorot_uniform(f + d, h, rng),
            d_b1: DenseMatrix::zeros(1, h),
            d_w2: glorot_uniform(h, f, rng),
            d_b2: DenseMatrix::zeros(1, f),
        }
    }

    /// Named weight tensors in a fixed order (shared by serialization,
    /// optimization, and gradient checks).
    pub fn tensors(&self) -> Vec<(&'static str, &DenseMatrix)> {
        vec![
            ("e_w1", &self.e_w1),
            ("e_b1", &self.e_b1),
            ("e_wm", &self.e_wm),
            ("e_bm", &self.e_bm),
            ("e_wv", &self.e_wv),
            ("e_bv", &self.e_bv),
            ("d_w1", &self.d_w1),
            ("d_b1", &self.d_b1),
            ("d_w2", &self.d_w2),
            ("d_b2", &self.d_b2),
        ]
    }

    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut DenseMatrix> {
        match name {
            "e_w1" => Some(&mut self.e_w1),
            "e_b1" => Some(&mut self.e_b1),
            "e_wm" => Some(&mut self.e_wm),
            "e_bm" => Some(&mut self.e_bm),
            "e_wv" => Some(&mut self.e_wv),
            "e_bv" => Some(&mut self.e_bv),
            "d_w1" => Some(&mut self.d_w1),
            "d_b1" => Some(&mut self.d_b1),
            "d_w2" => Some(&mut self.d_w2),
            "d_b2" => Some(&mut self.d_b2),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.is_finite())
    }
}

fn add_row_bias(x: &mut DenseMatrix, b: &DenseMatrix) {
    for i in 0..x.rows() {
        for (v, &bv) in x.row_mut(i).iter_mut().zip(b.row(0)) {
            *v += bv;
        }
    }
}

fn column_sums(x: &DenseMatrix) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(1, x.cols());
    for i in 0..x.rows() {
        for (o, &v) in out.row_mut(0).iter_mut().zip(x.row(i)) {
            *o += v;
        }
    }
    out
}

/// Encoder forward pass: (mu, log_var) with log_var clamped to +-10.
pub fn encode(batch: &PairBatch, model: &CvaeModel) -> Result<(DenseMatrix, DenseMatrix)> {
    if batch.x_j.cols() != model.feature_dim {
        return Err(Error::shape(
            "encode",
            format!("batch F {} vs model F {}", batch.x_j.cols(), model.feature_dim),
        ));
    }
    let ein = batch.x_j.concat_cols(&batch.x_i)?;
    let mut ez1 = ein.matmul(&model.e_w1)?;
    add_row_bias(&mut ez1, &model.e_b1);
    let eh = relu(&ez1);
    let mut mu = eh.matmul(&model.e_wm)?;
    add_row_bias(&mut mu, &model.e_bm);
    let mut lv = eh.matmul(&model.e_wv)?;
    add_row_bias(&mut lv, &model.e_bv);
    Ok((mu, lv.map(|v| v.clamp(-LOG_VAR_CLAMP, LOG_VAR_CLAMP))))
}

/// z = mu + exp(log_var / 2) * eps with eps ~ N(0, I) from `rng`.
pub fn reparameterize(
    mu: &DenseMatrix,
    log_var: &DenseMatrix,
    rng: &mut RngState,
) -> Result<DenseMatrix> {
    if mu.shape() != log_var.shape() {
        return Err(Error::shape(
            "reparameterize",
            format!("mu {:?} vs log_var {:?}", mu.shape(), log_var.shape()),
        ));
    }
    let mut eps = DenseMatrix::zeros(mu.rows(), mu.cols());
    for v in eps.data_mut() {
        *v = rng.normal();
    }
    let mut z = eps;
    for ((zv, &m), &lv) in z.data_mut().iter_mut().zip(mu.data()).zip(log_var.data()) {
        *zv = m + (lv / 2.0).exp() * *zv;
    }
    Ok(z)
}

/// Decoder forward pass; returns the mean of the output distribution.
pub fn decode(x_i: &DenseMatrix, z: &DenseMatrix, model: &CvaeModel) -> Result<DenseMatrix> {
    if x_i.cols() != model.feature_dim || z.cols() != model.latent_dim || x_i.rows() != z.rows() {
        return Err(Error::shape(
            "decode",
            format!(
                "x_i {:?}, z {:?} vs model (F={}, d={})",
                x_i.shape(),
                z.shape(),
                model.feature_dim,
                model.latent_dim
            ),
        ));
    }
    let din = x_i.concat_cols(z)?;
    let mut dz1 = din.matmul(&model.d_w1)?;
    add_row_bias(&mut dz1, &model.d_b1);
    let dh = relu(&dz1);
    let mut out = dh.matmul(&model.d_w2)?;
    add_row_bias(&mut out, &model.d_b2);
    Ok(match model.likelihood {
        Likelihood::Bernoulli => sigmoid(&out),
        Likelihood::Gaussian => out,
    })
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

struct ForwardPass {
    ein: DenseMatrix,
    ez1: DenseMatrix,
    eh: DenseMatrix,
    mu: DenseMatrix,
    lv_raw: DenseMatrix,
    lv: DenseMatrix,
    din: DenseMatrix,
    dz1: DenseMatrix,
    dh: DenseMatrix,
    logit: DenseMatrix,
    loss: f64,
}

fn forward(batch: &PairBatch, model: &CvaeModel, eps: &DenseMatrix) -> Result<ForwardPass> {
    let b = batch.len();
    let ein = batch.x_j.concat_cols(&batch.x_i)?;
    let mut ez1 = ein.matmul(&model.e_w1)?;
    add_row_bias(&mut ez1, &model.e_b1);
    let eh = relu(&ez1);
    let mut mu = eh.matmul(&model.e_wm)?;
    add_row_bias(&mut mu, &model.e_bm);
    let mut lv_raw = eh.matmul(&model.e_wv)?;
    add_row_bias(&mut lv_raw, &model.e_bv);
    let lv = lv_raw.map(|v| v.clamp(-LOG_VAR_CLAMP, LOG_VAR_CLAMP));
    if eps.shape() != mu.shape() {
        return Err(Error::shape(
            "elbo noise",
            format!("eps {:?} vs mu {:?}", eps.shape(), mu.shape()),
        ));
    }
    let mut z = DenseMatrix::zeros(b, model.latent_dim);
    for (((zv, &m), &l), &e) in z
        .data_mut()
        .iter_mut()
        .zip(mu.data())
        .zip(lv.data())
        .zip(eps.data())
    {
        *zv = m + (l / 2.0).exp() * e;
    }
    let din = batch.x_i.concat_cols(&z)?;
    let mut dz1 = din.matmul(&model.d_w1)?;
    add_row_bias(&mut dz1, &model.d_b1);
    let dh = relu(&dz1);
    let mut logit = dh.matmul(&model.d_w2)?;
    add_row_bias(&mut logit, &model.d_b2);

    let mut total = 0.0;
    for r in 0..b {
        let recon: f64 = match model.likelihood {
            Likelihood::Bernoulli => logit
                .row(r)
                .iter()
                .zip(batch.x_j.row(r))
                .map(|(&l, &x)| x * softplus(-l) + (1.0 - x) * softplus(l))
                .sum(),
            Likelihood::Gaussian => {
                logit
                    .row(r)
                    .iter()
                    .zip(batch.x_j.row(r))
                    .map(|(&o, &x)| (x - o) * (x - o))
                    .sum::<f64>()
                    / (2.0 * model.c)
            }
        };
        total += recon + gaussian_kl(mu.row(r), lv.row(r))?;
    }
    let loss = total / b as f64;
    if !loss.is_finite() {
        return Err(Error::Numeric(format!("non-finite ELBO loss {loss}")));
    }
    Ok(ForwardPass {
        ein,
        ez1,
        eh,
        mu,
        lv_raw,
        lv,
        din,
        dz1,
        dh,
        logit,
        loss,
    })
}

/// Negative ELBO of a batch with the reparameterization noise drawn from
/// `rng` (one sample per row).
pub fn elbo_loss(batch: &PairBatch, model: &CvaeModel, rng: &mut RngState) -> Result<f64> {
    let mut eps = DenseMatrix::zeros(batch.len(), model.latent_dim);
    for v in eps.data_mut() {
        *v = rng.normal();
    }
    elbo_loss_with_noise(batch, model, &eps)
}

/// Negative ELBO with caller-supplied noise; deterministic in its inputs.
pub fn elbo_loss_with_noise(
    batch: &PairBatch,
    model: &CvaeModel,
    eps: &DenseMatrix,
) -> Result<f64> {
    Ok(forward(batch, model, eps)?.loss)
}

/// Loss and analytic gradients for every tensor, ordered as
/// `CvaeModel::tensors`. The noise is frozen so the pair (loss, grads) is a
/// deterministic function of (batch, model, eps).
pub fn elbo_gradients(
    batch: &PairBatch,
    model: &CvaeModel,
    eps: &DenseMatrix,
) -> Result<(f64, Vec<DenseMatrix>)> {
    let b = batch.len() as f64;
    let f = model.feature_dim;
    let fp = forward(batch, model, eps)?;

    // d loss / d logit
    let mut g_logit = match model.likelihood {
        Likelihood::Bernoulli => sigmoid(&fp.logit),
        Likelihood::Gaussian => fp.logit.clone(),
    };
    for (gv, &x) in g_logit.data_mut().iter_mut().zip(batch.x_j.data()) {
        *gv = match model.likelihood {
            Likelihood::Bernoulli => (*gv - x) / b,
            Likelihood::Gaussian => (*gv - x) / (model.c * b),
        };
    }

    let g_d_w2 = fp.dh.matmul_at_b(&g_logit)?;
    let g_d_b2 = column_sums(&g_logit);
    let g_dh = relu_backward(&g_logit.matmul_a_bt(&model.d_w2)?, &fp.dz1)?;
    let g_d_w1 = fp.din.matmul_at_b(&g_dh)?;
    let g_d_b1 = column_sums(&g_dh);
    let g_din = g_dh.matmul_a_bt(&model.d_w1)?;
    let g_z = g_din.slice_cols(f, f + model.latent_dim)?;

    // z = mu + exp(lv/2) eps; KL adds mu/B and (e^lv - 1)/(2B), gated where
    // the raw log-variance was inside the clamp range.
    let mut g_mu = g_z.clone();
    for (gv, &m) in g_mu.data_mut().iter_mut().zip(fp.mu.data()) {
        *gv += m / b;
    }
    let mut g_lv = DenseMatrix::zeros(g_z.rows(), g_z.cols());
    for ((((gv, &gz), &lv), &e), &raw) in g_lv
        .data_mut()
        .iter_mut()
        .zip(g_z.data())
        .zip(fp.lv.data())
        .zip(eps.data())
        .zip(fp.lv_raw.data())
    {
        if raw.abs() < LOG_VAR_CLAMP {
            *gv = gz * (lv / 2.0).exp() * e / 2.0 + (lv.exp() - 1.0) / (2.0 * b);
        }
    }

    let g_e_wm = fp.eh.matmul_at_b(&g_mu)?;
    let g_e_bm = column_sums(&g_mu);
    let g_e_wv = fp.eh.matmul_at_b(&g_lv)?;
    let g_e_bv = column_sums(&g_lv);
    let g_eh_lin = g_mu
        .matmul_a_bt(&model.e_wm)?
        .data()
        .iter()
        .zip(g_lv.matmul_a_bt(&model.e_wv)?.data())
        .map(|(&a, &c)| a + c)
        .collect::<Vec<f64>>();
    let g_eh = relu_backward(
        &DenseMatrix::from_vec(fp.eh.rows(), fp.eh.cols(), g_eh_lin)?,
        &fp.ez1,
    )?;
    let g_e_w1 = fp.ein.matmul_at_b(&g_eh)?;
    let g_e_b1 = column_sums(&g_eh);

    Ok((
        fp.loss,
        vec![
            g_e_w1, g_e_b1, g_e_wm, g_e_bm, g_e_wv, g_e_bv, g_d_w1, g_d_b1, g_d_w2, g_d_b2,
        ],
    ))
}

/// Incremental mini-batch Adam trainer so callers can interleave training
/// with generation.
pub struct GeneratorTrainer<'a> {
    pub model: CvaeModel,
    features: &'a DenseMatrix,
    pairs: Vec<(u32, u32)>,
    batch_size: usize,
    opt: Vec<AdamState>,
    /// Mean batch loss per completed epoch.
    pub loss_trace: Vec<f64>,
}

impl<'a> GeneratorTrainer<'a> {
    /// `features` is used exactly as given; pass the stored (unnormalized)
    /// attributes when the likelihood is Bernoulli.
    pub fn new(
        features: &'a DenseMatrix,
        pairs: Vec<(u32, u32)>,
        config: &GeneratorConfig,
        rng: &mut RngState,
    ) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Data("no neighbor pairs to train on".into()));
        }
        if config.batch_size == 0 {
            return Err(Error::Config("generator batch_size must be positive".into()));
        }
        let model = CvaeModel::new(features.cols(), config, rng);
        let opt = model
            .tensors()
            .iter()
            .map(|(_, t)| {
                AdamState::new(t.data().len(), AdamHyper::with_lr(config.lr, 0.0))
            })
            .collect();
        Ok(GeneratorTrainer {
            model,
            features,
            pairs,
            batch_size: config.batch_size,
            opt,
            loss_trace: Vec::new(),
        })
    }

    /// Runs `epochs` shuffled passes; partial trailing batches are skipped so
    /// every step sees a full batch. Returns the per-epoch mean losses just
    /// appended to the trace.
    pub fn train_epochs(&mut self, epochs: usize, rng: &mut RngState) -> Result<&[f64]> {
        let start = self.loss_trace.len();
        let n = self.pairs.len();
        let nb = (n / self.batch_size).max(1);
        let bsz = self.batch_size.min(n);
        for _ in 0..epochs {
            let perm = rng.permutation(n);
            let mut epoch_loss = 0.0;
            for bi in 0..nb {
                let idx = &perm[bi * bsz..(bi + 1) * bsz];
                let chosen: Vec<(u32, u32)> =
                    idx.iter().map(|&k| self.pairs[k as usize]).collect();
                let batch = PairBatch::gather(self.features, &chosen);
                let mut eps = DenseMatrix::zeros(bsz, self.model.latent_dim);
                for v in eps.data_mut() {
                    *v = rng.normal();
                }
                let (loss, grads) = elbo_gradients(&batch, &self.model, &eps).map_err(|e| {
                    match e {
                        Error::Numeric(msg) => Error::Numeric(format!(
                            "epoch {} batch {bi}: {msg}",
                            self.loss_trace.len() + 1
                        )),
                        other => other,
                    }
                })?;
                epoch_loss += loss;
                let names: Vec<&'static str> =
                    self.model.tensors().iter().map(|(n, _)| *n).collect();
                for ((name, grad), st) in names.iter().zip(&grads).zip(self.opt.iter_mut()) {
                    let t = self.model.tensor_mut(name).unwrap();
                    adam_step(t.data_mut(), grad.data(), st)?;
                }
            }
            self.loss_trace.push(epoch_loss / nb as f64);
        }
        Ok(&self.loss_trace[start..])
    }
}

/// Trains a fresh generator on the dataset's stored features for
/// `config.gen_epochs` epochs over all neighbor pairs.
pub fn train_generator(
    ds: &GraphDataset,
    config: &GeneratorConfig,
    rng: &mut RngState,
) -> Result<(CvaeModel, Vec<f64>)> {
    let pairs = neighbor_pairs(ds);
    let mut trainer = GeneratorTrainer::new(&ds.features, pairs, config, rng)?;
    trainer.train_epochs(config.gen_epochs, rng)?;
    Ok((trainer.model, trainer.loss_trace))
}

/// Generates one pseudo-neighbor row per node: row i is
/// decode(x_i, z_i) with z_i ~ N(0, I) drawn from the child stream
/// `rng.split(i)`, so rows are independent of evaluation order.
pub fn generate_features(
    model: &CvaeModel,
    x: &DenseMatrix,
    rng: &RngState,
) -> Result<DenseMatrix> {
    if x.cols() != model.feature_dim {
        return Err(Error::shape(
            "generate_features",
            format!("x {:?} vs model F {}", x.shape(), model.feature_dim),
        ));
    }
    let n = x.rows();
    let mut z = DenseMatrix::zeros(n, model.latent_dim);
    for i in 0..n {
        let mut node_rng = rng.split(i as u64);
        for v in z.row_mut(i) {
            *v = node_rng.normal();
        }
    }
    decode(x, &z, model)
}

/// Entry-value histograms of two equally shaped matrices over their shared
/// range, plus the KL divergence between them.
#[derive(Debug, Clone)]
pub struct HistogramPair {
    pub lo: f64,
    pub hi: f64,
    pub counts_x: Vec<u64>,
    pub counts_xbar: Vec<u64>,
    /// KL(hist(x) || hist(xbar)) in nats, additive smoothing 1e-6 per bin.
    pub kl: f64,
}

/// Bins the entries of both matrices into `bins` equal-width bins over the
/// union range. A degenerate range (all entries equal) puts everything in
/// the first bin and reports KL 0.
pub fn attribute_histograms(
    x: &DenseMatrix,
    xbar: &DenseMatrix,
    bins: usize,
) -> Result<HistogramPair> {
    if x.shape() != xbar.shape() {
        return Err(Error::shape(
            "attribute_kl",
            format!("{:?} vs {:?}", x.shape(), xbar.shape()),
        ));
    }
    if bins < 2 {
        return Err(Error::Parameter(format!("bins must be >= 2, got {bins}")));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in x.data().iter().chain(xbar.data()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == hi {
        let mut counts = vec![0u64; bins];
        counts[0] = x.data().len() as u64;
        return Ok(HistogramPair {
            lo,
            hi,
            counts_x: counts.clone(),
            counts_xbar: counts,
            kl: 0.0,
        });
    }
    let width = (hi - lo) / bins as f64;
    let histogram = |m: &DenseMatrix| {
        let mut h = vec![0u64; bins];
        for &v in m.data() {
            let k = (((v - lo) / width) as usize).min(bins - 1);
            h[k] += 1;
        }
        h
    };
    let counts_x = histogram(x);
    let counts_xbar = histogram(xbar);
    let alpha = 1e-6;
    let total = x.data().len() as f64 + bins as f64 * alpha;
    let mut kl = 0.0;
    for (&a, &b) in counts_x.iter().zip(&counts_xbar) {
        let p = (a as f64 + alpha) / total;
        let q = (b as f64 + alpha) / total;
        kl += p * (p / q).ln();
    }
    Ok(HistogramPair { lo, hi, counts_x, counts_xbar, kl })
}

/// KL divergence between the entry-value histograms of two equally shaped
/// matrices: `bins` equal-width bins over the union range, additive
/// smoothing 1e-6 per bin, KL(hist(x) || hist(xbar)) in nats.
pub fn attribute_kl(x: &DenseMatrix, xbar: &DenseMatrix, bins: usize) -> Result<f64> {
    attribute_histograms(x, xbar, bins).map(|h| h.kl)
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    latent_dim: usize,
    hidden: usize,
    likelihood: Likelihood,
    c: f64,
    feature_dim: usize,
}

/// Writes the weights beside a JSON description: `<path>` holds the tensors,
/// `<path>.json` the dimensions and likelihood.
pub fn save_generator(model: &CvaeModel, path: &Path) -> Result<()> {
    write_tensors(path, &model.tensors())?;
    let sidecar = Sidecar {
        latent_dim: model.latent_dim,
        hidden: model.hidden,
        likelihood: model.likelihood,
        c: model.c,
        feature_dim: model.feature_dim,
    };
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::Data(format!("sidecar encode: {e}")))?;
    std::fs::write(sidecar_path(path), json)?;
    Ok(())
}

pub fn load_generator(path: &Path) -> Result<CvaeModel> {
    let sc_path = sidecar_path(path);
    let sidecar: Sidecar = serde_json::from_str(
        &std::fs::read_to_string(&sc_path)
            .map_err(|e| Error::Data(format!("{}: {e}", sc_path.display())))?,
    )
    .map_err(|e| Error::Data(format!("{}: {e}", sc_path.display())))?;
    let config = GeneratorConfig {
        latent_dim: sidecar.latent_dim,
        hidden: sidecar.hidden,
        likelihood: sidecar.likelihood,
        gaussian_c: sidecar.c,
        ..GeneratorConfig::default()
    };
    let mut rng = RngState::new(0);
    let mut model = CvaeModel::new(sidecar.feature_dim, &config, &mut rng);
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
