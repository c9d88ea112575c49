//! Experiment orchestration: the greedy augmentation loop (train a scoring
//! GCN, iterate generator training / candidate generation / BALD scoring,
//! keep the candidate with the highest disagreement), the benchmark /
//! ablation / masking suites built on top of it, and report persistence.

use crate::acquisition::{bald_score, NodeSetTag};
use crate::generator::{
    attribute_histograms, attribute_kl, GeneratorConfig, GeneratorTrainer,
};
use crate::graph::{
    build_splits, load_dataset, mask_features, neighbor_pairs, normalize_adjacency,
    GraphDataset, NormalizedAdjacency, SplitMasks, SplitMode,
};
use crate::models::{
    mc_dropout_predict, model_loss_and_gradients, sample_neighbor_rows, train_model,
    GnnModel, ModelArch, TrainConfig,
};
use crate::numerics::{adam_step, AdamHyper, AdamState, DenseMatrix, RngState};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Everything a run needs: data location, seeds, model and generator
/// hyperparameters, and the augmentation-loop knobs. Unknown keys in a
/// config file are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub data_dir: PathBuf,
    pub split: SplitMode,
    pub seeds: Vec<u64>,
    pub generator: GeneratorConfig,
    pub gnn: TrainConfig,
    /// Candidate feature matrices generated per seed; the generator's
    /// `gen_epochs` budget is spread evenly across them.
    pub n_generator_iterations: usize,
    /// Iterations whose candidates are scored but never adopted.
    pub n_warmup: usize,
    /// Stochastic forward passes per BALD score.
    pub n_mc: usize,
    /// Scoring-GCN epochs before the first candidate is scored.
    pub initial_epochs: usize,
    /// Scoring-GCN epochs after each adopted candidate.
    pub continued_epochs: usize,
    pub bald_nodes: NodeSetTag,
    /// Edge-drop rate of the dropedge_gcn benchmark baseline.
    pub dropedge_rate: f64,
    /// Benchmark baselines trained beside la_gcn.
    pub baselines: Vec<String>,
    pub out_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            data_dir: PathBuf::from("data/cora"),
            split: SplitMode::Fixed,
            seeds: (0..10).collect(),
            generator: GeneratorConfig::default(),
            gnn: TrainConfig::default(),
            n_generator_iterations: 10,
            n_warmup: 2,
            n_mc: 10,
            initial_epochs: 200,
            continued_epochs: 50,
            bald_nodes: NodeSetTag::All,
            dropedge_rate: 0.2,
            baselines: vec![
                "gcn".into(),
                "dropedge_gcn".into(),
                "la_mlp".into(),
            ],
            out_dir: PathBuf::from("out"),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: PipelineConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must be nonempty".into()));
        }
        if self.n_generator_iterations == 0 {
            return Err(Error::Config(
                "n_generator_iterations must be at least 1".into(),
            ));
        }
        if self.n_mc == 0 {
            return Err(Error::Config("n_mc must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropedge_rate) {
            return Err(Error::Config(format!(
                "dropedge_rate must be in [0, 1), got {}",
                self.dropedge_rate
            )));
        }
        for name in &self.baselines {
            variant_by_name(name)?;
        }
        Ok(())
    }
}

/// One BALD evaluation in the augmentation loop. `accepted` records whether
/// the score beat the running best (the `U > U_best` test); adoption
/// additionally requires the iteration to be past the warmup.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaldTraceRow {
    pub iteration: usize,
    pub u: f64,
    pub accepted: bool,
}

/// Per-seed record of the augmentation loop: the full score trace and where
/// the returned matrix came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AugmentationRecord {
    pub seed: u64,
    pub trace: Vec<BaldTraceRow>,
    /// Iteration whose candidate was adopted; None when the loop fell back
    /// to the last candidate.
    pub selected_iteration: Option<usize>,
    pub u_best: f64,
    pub fallback: bool,
    /// Histogram KL between the classifier-ready X and the returned matrix.
    pub attribute_kl: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedMetrics {
    pub seed: u64,
    pub variant: String,
    /// Set by the masking study; empty elsewhere.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mask_ratio: Option<f64>,
    pub val_accuracy: f64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mask_ratio: Option<f64>,
    pub mean_val_accuracy: f64,
    pub mean_test_accuracy: f64,
    pub std_test_accuracy: f64,
}

/// la_gcn minus gcn test-accuracy gap at one mask ratio, seed-averaged.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaskGapRow {
    pub ratio: f64,
    pub gcn_mean: f64,
    pub la_gcn_mean: f64,
    pub gap: f64,
}

/// Versioned artifact all suites emit. Identical config and seeds reproduce
/// it byte for byte except `wall_clock_secs`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub format_version: u32,
    pub command: String,
    pub config: PipelineConfig,
    pub per_seed: Vec<SeedMetrics>,
    pub summary: Vec<VariantSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub augmentation: Vec<AugmentationRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub mask_gaps: Vec<MaskGapRow>,
    pub wall_clock_secs: f64,
}

impl RunReport {
    fn new(command: &str, config: &PipelineConfig) -> Self {
        RunReport {
            format_version: REPORT_FORMAT_VERSION,
            command: command.into(),
            config: config.clone(),
            per_seed: Vec::new(),
            summary: Vec::new(),
            augmentation: Vec::new(),
            mask_gaps: Vec::new(),
            wall_clock_secs: 0.0,
        }
    }

    /// Mean and population std of the per-seed rows, grouped by variant and
    /// mask ratio in first-appearance order.
    fn summarize(&mut self) {
        let mut groups: Vec<(String, Option<f64>)> = Vec::new();
        for row in &self.per_seed {
            let key = (row.variant.clone(), row.mask_ratio);
            if !groups.contains(&key) {
                groups.push(key);
            }
        }
        self.summary = groups
            .into_iter()
            .map(|(variant, mask_ratio)| {
                let tests: Vec<f64> = self
                    .per_seed
                    .iter()
                    .filter(|r| r.variant == variant && r.mask_ratio == mask_ratio)
                    .map(|r| r.test_accuracy)
                    .collect();
                let vals: Vec<f64> = self
                    .per_seed
                    .iter()
                    .filter(|r| r.variant == variant && r.mask_ratio == mask_ratio)
                    .map(|r| r.val_accuracy)
                    .collect();
                VariantSummary {
                    variant,
                    mask_ratio,
                    mean_val_accuracy: mean(&vals),
                    mean_test_accuracy: mean(&tests),
                    std_test_accuracy: std_dev(&tests),
                }
            })
            .collect();
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Loaded dataset in both forms the pipeline needs: stored attributes for
/// the generator, row-normalized attributes for the classifiers.
struct DataBundle {
    ds: GraphDataset,
    adj: NormalizedAdjacency,
    x_norm: DenseMatrix,
}

impl DataBundle {
    fn load(config: &PipelineConfig) -> Result<Self> {
        let ds = load_dataset(&config.data_dir, false)?;
        Ok(Self::from_dataset(ds))
    }

    fn from_dataset(ds: GraphDataset) -> Self {
        let adj = normalize_adjacency(&ds);
        let x_norm = ds.features.row_normalize();
        DataBundle { ds, adj, x_norm }
    }
}

// Child-stream tags carved out of each seed's root rng. Streams stay
// disjoint no matter how many epochs or iterations a stage consumes.
const STREAM_SCORER: u64 = 0;
const STREAM_GENERATOR: u64 = 1;
const STREAM_GENERATE: u64 = 2;
const STREAM_MC: u64 = 3;
const STREAM_SPLIT: u64 = 4;
const STREAM_VARIANT: u64 = 5;
const STREAM_NEIGHBOR: u64 = 6;
const STREAM_MASK: u64 = 7;

fn splits_for_seed(
    bundle: &DataBundle,
    config: &PipelineConfig,
    seed: u64,
) -> Result<SplitMasks> {
    let mut rng = RngState::new(seed).split(STREAM_SPLIT);
    build_splits(&bundle.ds, config.split, &mut rng)
}

fn node_set_for(tag: NodeSetTag, n: usize, split: &SplitMasks) -> Vec<u32> {
    match tag {
        NodeSetTag::All => (0..n as u32).collect(),
        NodeSetTag::Train => split.train.clone(),
        NodeSetTag::Unlabeled => {
            let labeled: std::collections::HashSet<u32> =
                split.train.iter().copied().collect();
            (0..n as u32).filter(|i| !labeled.contains(i)).collect()
        }
    }
}

/// Spreads `total` epochs over `parts` iterations so every iteration gets
/// the floor or ceiling of the average and the sum is exact. `i` is
/// 1-based.
pub fn epochs_for_iteration(total: usize, parts: usize, i: usize) -> usize {
    (i * total) / parts - ((i - 1) * total) / parts
}

/// Plain-GCN trainer that keeps its optimizer state across calls, for the
/// warm-started continued training of the scoring network.
struct ScoringTrainer {
    model: GnnModel,
    opt: Vec<AdamState>,
}

impl ScoringTrainer {
    fn new(feature_dim: usize, classes: usize, config: &TrainConfig, rng: &mut RngState) -> Self {
        let model = GnnModel::new(ModelArch::Gcn, feature_dim, classes, config, rng);
        let hyper = AdamHyper {
            lr: config.lr,
            weight_decay: config.weight_decay,
            decoupled_decay: config.decoupled_decay,
            ..AdamHyper::default()
        };
        let opt = model
            .tensors()
            .iter()
            .map(|(_, t)| AdamState::new(t.data().len(), hyper))
            .collect();
        ScoringTrainer { model, opt }
    }

    #[allow(clippy::too_many_arguments)]
    fn train_epochs(
        &mut self,
        adj: &NormalizedAdjacency,
        x: &DenseMatrix,
        labels: &[u32],
        train_mask: &[u32],
        epochs: usize,
        stage: &str,
        rng: &mut RngState,
    ) -> Result<()> {
        for epoch in 1..=epochs {
            let (_, grads) = model_loss_and_gradients(
                &self.model, adj, x, None, labels, train_mask, rng, true,
            )
            .map_err(|e| match e {
                Error::Numeric(msg) => {
                    Error::Numeric(format!("{stage} epoch {epoch}: {msg}"))
                }
                other => other,
            })?;
            let names: Vec<&'static str> =
                self.model.tensors().iter().map(|(n, _)| *n).collect();
            for ((name, grad), st) in names.iter().zip(&grads).zip(self.opt.iter_mut()) {
                let t = self.model.tensor_mut(name).unwrap();
                adam_step(t.data_mut(), grad.data(), st)?;
            }
        }
        Ok(())
    }
}

/// Augmentation-loop product for one seed: the classifier-ready augmented
/// feature matrix and the record of how it was chosen.
pub struct AugmentationOutcome {
    pub xbar: DenseMatrix,
    pub record: AugmentationRecord,
}

fn augmentation_loop(
    bundle: &DataBundle,
    split: &SplitMasks,
    config: &PipelineConfig,
    seed: u64,
) -> Result<AugmentationOutcome> {
    let ds = &bundle.ds;
    let root = RngState::new(seed);

    let mut scorer_rng = root.split(STREAM_SCORER);
    let mut scorer = ScoringTrainer::new(
        ds.num_features,
        ds.num_classes,
        &config.gnn,
        &mut scorer_rng,
    );
    scorer.train_epochs(
        &bundle.adj,
        &bundle.x_norm,
        &ds.labels,
        &split.train,
        config.initial_epochs,
        "scoring GCN",
        &mut scorer_rng,
    )?;

    let mut gen_rng = root.split(STREAM_GENERATOR);
    let pairs = neighbor_pairs(ds);
    let mut generator =
        GeneratorTrainer::new(&ds.features, pairs, &config.generator, &mut gen_rng)?;

    let node_set = node_set_for(config.bald_nodes, ds.num_nodes, split);
    let generate_rng = root.split(STREAM_GENERATE);
    let mc_rng = root.split(STREAM_MC);

    let mut trace = Vec::with_capacity(config.n_generator_iterations);
    let mut u_best = f64::NEG_INFINITY;
    let mut best: Option<(DenseMatrix, usize)> = None;
    let mut last: Option<DenseMatrix> = None;

    for i in 1..=config.n_generator_iterations {
        let epochs = epochs_for_iteration(
            config.generator.gen_epochs,
            config.n_generator_iterations,
            i,
        );
        generator.train_epochs(epochs, &mut gen_rng).map_err(|e| match e {
            Error::Numeric(msg) => {
                Error::Numeric(format!("generator iteration {i}: {msg}"))
            }
            other => other,
        })?;
        let candidate = crate::generator::generate_features(
            &generator.model,
            &ds.features,
            &generate_rng.split(i as u64),
        )?
        .row_normalize();

        let samples = mc_dropout_predict(
            &scorer.model,
            &bundle.adj,
            &candidate,
            None,
            config.n_mc,
            &mc_rng.split(i as u64),
        )?;
        let estimate = bald_score(&samples, &node_set, config.bald_nodes)?;
        let u = estimate.score;

        let accepted = u > u_best;
        trace.push(BaldTraceRow { iteration: i, u, accepted });
        if accepted {
            u_best = u;
            if i > config.n_warmup {
                scorer.train_epochs(
                    &bundle.adj,
                    &candidate,
                    &ds.labels,
                    &split.train,
                    config.continued_epochs,
                    "continued scoring GCN",
                    &mut scorer_rng,
                )?;
                best = Some((candidate.clone(), i));
            }
        }
        last = Some(candidate);
    }

    let fallback = best.is_none();
    let (xbar, selected_iteration) = match best {
        Some((m, i)) => (m, Some(i)),
        None => (
            last.expect("n_generator_iterations >= 1 guarantees a candidate"),
            None,
        ),
    };
    let record = AugmentationRecord {
        seed,
        trace,
        selected_iteration,
        u_best,
        fallback,
        attribute_kl: attribute_kl(&bundle.x_norm, &xbar, 20)?,
    };
    Ok(AugmentationOutcome { xbar, record })
}

/// Runs the greedy augmentation loop for one seed: trains the scoring GCN,
/// then alternates generator training, candidate generation and BALD
/// scoring, adopting each candidate that raises the best score once past
/// the warmup. Falls back to the last candidate when none was adopted.
pub fn run_algorithm1(config: &PipelineConfig, seed: u64) -> Result<(DenseMatrix, RunReport)> {
    config.validate()?;
    let clock = Instant::now();
    let bundle = DataBundle::load(config)?;
    let split = splits_for_seed(&bundle, config, seed)?;
    let outcome = augmentation_loop(&bundle, &split, config, seed)?;
    let mut report = RunReport::new("pipeline", config);
    report.augmentation.push(outcome.record);
    report.wall_clock_secs = clock.elapsed().as_secs_f64();
    Ok((outcome.xbar, report))
}

/// Augmentation loop over every configured seed. Each augmented matrix is
/// handed to `sink` as soon as its seed finishes, so callers can persist
/// them without holding all seeds in memory.
pub fn run_pipeline_with(
    config: &PipelineConfig,
    mut sink: impl FnMut(u64, &DenseMatrix) -> Result<()>,
) -> Result<RunReport> {
    config.validate()?;
    let clock = Instant::now();
    let bundle = DataBundle::load(config)?;
    let mut report = RunReport::new("pipeline", config);
    for &seed in &config.seeds {
        let split = splits_for_seed(&bundle, config, seed)?;
        let outcome = augmentation_loop(&bundle, &split, config, seed)?;
        sink(seed, &outcome.xbar)?;
        report.augmentation.push(outcome.record);
    }
    report.wall_clock_secs = clock.elapsed().as_secs_f64();
    Ok(report)
}

/// Trains one named variant over every configured seed with fresh
/// initializations. Variants with an augmented branch take the matrix as
/// given (already classifier-ready).
pub fn run_train(
    config: &PipelineConfig,
    variant: &str,
    xbar: Option<&DenseMatrix>,
) -> Result<RunReport> {
    config.validate()?;
    let spec = variant_by_name(variant)?;
    let clock = Instant::now();
    let bundle = DataBundle::load(config)?;
    let mut report = RunReport::new("train", config);
    for &seed in &config.seeds {
        let split = splits_for_seed(&bundle, config, seed)?;
        let row = train_variant(&bundle, &split, &bundle.x_norm, xbar, spec, config, seed)?;
        report.per_seed.push(row);
    }
    report.summarize();
    report.wall_clock_secs = clock.elapsed().as_secs_f64();
    Ok(report)
}

/// A named training configuration of the benchmark and ablation suites.
struct VariantSpec {
    name: &'static str,
    arch: ModelArch,
    /// Feeds the augmented matrix to the second branch.
    uses_xbar: bool,
    /// Swaps the second branch's input for a uniformly sampled real
    /// neighbor row.
    sampled_neighbor: bool,
    drop_edge: bool,
}

// rng_tag doubles as the variant's child-stream index, keyed by name so
// adding or removing baselines leaves other variants' streams unchanged.
const VARIANTS: &[VariantSpec] = &[
    VariantSpec { name: "gcn", arch: ModelArch::Gcn, uses_xbar: false, sampled_neighbor: false, drop_edge: false },
    VariantSpec { name: "dropedge_gcn", arch: ModelArch::Gcn, uses_xbar: false, sampled_neighbor: false, drop_edge: true },
    VariantSpec { name: "la_mlp", arch: ModelArch::LaMlp, uses_xbar: true, sampled_neighbor: false, drop_edge: false },
    VariantSpec { name: "la_gcn", arch: ModelArch::LaGcn, uses_xbar: true, sampled_neighbor: false, drop_edge: false },
    VariantSpec { name: "width", arch: ModelArch::Width, uses_xbar: false, sampled_neighbor: false, drop_edge: false },
    VariantSpec { name: "concat_self", arch: ModelArch::ConcatSelf, uses_xbar: false, sampled_neighbor: false, drop_edge: false },
    VariantSpec { name: "plain_neighbor", arch: ModelArch::PlainNeighbor, uses_xbar: false, sampled_neighbor: true, drop_edge: false },
];

fn variant_by_name(name: &str) -> Result<&'static VariantSpec> {
    VARIANTS.iter().find(|v| v.name == name).ok_or_else(|| {
        Error::Config(format!(
            "unknown variant {name:?}; expected one of {}",
            VARIANTS
                .iter()
                .map(|v| v.name)
                .collect::<Vec<_>>()
                .join(", ")
        ))
    })
}

fn rng_tag(spec: &VariantSpec) -> u64 {
    VARIANTS.iter().position(|v| v.name == spec.name).unwrap() as u64
}

/// Trains one variant from a fresh initialization and reports the
/// best-validation checkpoint's accuracies.
fn train_variant(
    bundle: &DataBundle,
    split: &SplitMasks,
    x: &DenseMatrix,
    xbar: Option<&DenseMatrix>,
    spec: &VariantSpec,
    config: &PipelineConfig,
    seed: u64,
) -> Result<SeedMetrics> {
    let root = RngState::new(seed);
    let mut rng = root.split(STREAM_VARIANT).split(rng_tag(spec));
    let mut train_config = config.gnn.clone();
    train_config.drop_edge = if spec.drop_edge { config.dropedge_rate } else { 0.0 };

    let sampled;
    let aux = if spec.uses_xbar {
        Some(xbar.ok_or_else(|| {
            Error::Parameter(format!("variant {} needs an augmented matrix", spec.name))
        })?)
    } else if spec.sampled_neighbor {
        let mut nbr_rng = root.split(STREAM_NEIGHBOR);
        sampled = sample_neighbor_rows(&bundle.ds, x, &mut nbr_rng);
        Some(&sampled)
    } else {
        None
    };

    let model = GnnModel::new(
        spec.arch,
        bundle.ds.num_features,
        bundle.ds.num_classes,
        &train_config,
        &mut rng,
    );
    let outcome = train_model(
        model,
        &bundle.adj,
        x,
        aux,
        &bundle.ds,
        split,
        &train_config,
        &mut rng,
    )?;
    Ok(SeedMetrics {
        seed,
        variant: spec.name.into(),
        mask_ratio: None,
        val_accuracy: outcome.val_accuracy,
        test_accuracy: outcome.test_accuracy,
    })
}

fn run_suite(
    config: &PipelineConfig,
    bundle: &DataBundle,
    variant_names: &[&str],
    mask_ratio: Option<f64>,
    report: &mut RunReport,
) -> Result<()> {
    let variants: Vec<&VariantSpec> = variant_names
        .iter()
        .map(|n| variant_by_name(n))
        .collect::<Result<_>>()?;
    let needs_xbar = variants.iter().any(|v| v.uses_xbar);

    for &seed in &config.seeds {
        let split = splits_for_seed(bundle, config, seed)?;
        let (xbar, record) = if needs_xbar {
            let outcome = augmentation_loop(bundle, &split, config, seed)?;
            (Some(outcome.xbar), Some(outcome.record))
        } else {
            (None, None)
        };
        if let Some(record) = record {
            report.augmentation.push(record);
        }
        for spec in &variants {
            let mut row = train_variant(
                bundle,
                &split,
                &bundle.x_norm,
                xbar.as_ref(),
                spec,
                config,
                seed,
            )?;
            row.mask_ratio = mask_ratio;
            report.per_seed.push(row);
        }
    }
    Ok(())
}

/// Per seed: run the augmentation loop, then train la_gcn and the
/// configured baselines on the same split and augmented matrix. Emits
/// per-seed rows plus mean and std per variant.
pub fn run_benchmark(config: &PipelineConfig) -> Result<RunReport> {
    config.validate()?;
    let clock = Instant::now();
    let bundle = DataBundle::load(config)?;
    let mut report = RunReport::new("benchmark", config);
    let mut names: Vec<&str> = config.baselines.iter().map(String::as_str).collect();
    if !names.contains(&"la_gcn") {
        names.push("la_gcn");
    }
    run_suite(config, &bundle, &names, None, &mut report)?;
    report.summarize();
    report.wall_clock_secs = clock.elapsed().as_secs_f64();
    Ok(report)
}

/// Paired comparison of la_gcn against its ablated variants: same seeds,
/// same splits, same augmented matrix per seed.
pub fn run_ablation_suite(config: &PipelineConfig) -> Result<RunReport> {
    config.validate()?;
    let clock = Instant::now();
    let bundle = DataBundle::load(config)?;
    let mut report = RunReport::new("ablation", config);
    let names = ["gcn", "width", "concat_self", "plain_neighbor", "la_gcn"];
    run_suite(config, &bundle, &names, None, &mut report)?;
    report.summarize();
    report.wall_clock_secs = clock.elapsed().as_secs_f64();
    Ok(report)
}

/// For each mask ratio: zero attributes of the stored features per seed,
/// retrain the generator on the masked attributes, and compare gcn against
/// la_gcn on the masked graph. Emits the seed-averaged gap per ratio.
pub fn run_mask_study(config: &PipelineConfig, ratios: &[f64]) -> Result<RunReport> {
    config.validate()?;
    if ratios.is_empty() {
        return Err(Error::Parameter("mask study needs at least one ratio".into()));
    }
    for &r in ratios {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::Parameter(format!(
                "mask ratio must be in [0, 1), got {r}"
            )));
        }
    }
    let clock = Instant::now();
    let base = DataBundle::load(config)?;
    let mut report = RunReport::new("mask-study", config);

    for &ratio in ratios {
        for &seed in &config.seeds {
            let mut mask_rng = RngState::new(seed).split(STREAM_MASK);
            let masked = mask_features(&base.ds.features, ratio, &mut mask_rng)?;
            let mut ds = base.ds.clone();
            ds.features = masked;
            let bundle = DataBundle::from_dataset(ds);

            let single_seed = PipelineConfig {
                seeds: vec![seed],
                ..config.clone()
            };
            run_suite(
                &single_seed,
                &bundle,
                &["gcn", "la_gcn"],
                Some(ratio),
                &mut report,
            )?;
        }
    }

    report.mask_gaps = ratios
        .iter()
        .map(|&ratio| {
            let of = |variant: &str| -> f64 {
                let xs: Vec<f64> = report
                    .per_seed
                    .iter()
                    .filter(|r| r.mask_ratio == Some(ratio) && r.variant == variant)
                    .map(|r| r.test_accuracy)
                    .collect();
                mean(&xs)
            };
            let gcn_mean = of("gcn");
            let la_gcn_mean = of("la_gcn");
            MaskGapRow { ratio, gcn_mean, la_gcn_mean, gap: la_gcn_mean - gcn_mean }
        })
        .collect();
    report.summarize();
    report.wall_clock_secs = clock.elapsed().as_secs_f64();
    Ok(report)
}

/// Writes per-bin entry-value counts of both matrices as plot-ready CSV
/// (shared equal-width bins over the union range, KL in a leading comment)
/// and returns the KL value.
pub fn emit_histogram(
    x: &DenseMatrix,
    xbar: &DenseMatrix,
    bins: usize,
    out_path: &Path,
) -> Result<f64> {
    let hist = attribute_histograms(x, xbar, bins)?;
    let file = std::fs::File::create(out_path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "# attribute_kl {}", hist.kl)?;
    writeln!(w, "bin,lo,hi,count_x,count_xbar")?;
    let width = if hist.hi > hist.lo {
        (hist.hi - hist.lo) / bins as f64
    } else {
        0.0
    };
    for k in 0..bins {
        writeln!(
            w,
            "{},{},{},{},{}",
            k,
            hist.lo + width * k as f64,
            hist.lo + width * (k + 1) as f64,
            hist.counts_x[k],
            hist.counts_xbar[k],
        )?;
    }
    w.flush()?;
    Ok(hist.kl)
}

pub fn write_report(report: &RunReport, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// One CSV row per seed and variant; the mask_ratio column is empty outside
/// the masking study.
pub fn write_metrics_csv(report: &RunReport, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "seed,variant,mask_ratio,val_accuracy,test_accuracy")?;
    for row in &report.per_seed {
        let ratio = row.mask_ratio.map_or(String::new(), |r| format!("{r}"));
        writeln!(
            w,
            "{},{},{},{:.6},{:.6}",
            row.seed, row.variant, ratio, row.val_accuracy, row.test_accuracy
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Writes an augmented feature matrix as `xbar <rows> <cols> seed=<seed>`
/// followed by one space-separated row per line. Values round-trip exactly.
pub fn write_xbar_tsv(xbar: &DenseMatrix, seed: u64, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "xbar {} {} seed={}", xbar.rows(), xbar.cols(), seed)?;
    for i in 0..xbar.rows() {
        let mut line = String::new();
        for (j, v) in xbar.row(i).iter().enumerate() {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&format!("{v}"));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_xbar_tsv(path: &Path) -> Result<(DenseMatrix, u64)> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Data(format!("{}: empty file", path.display())))?
        .map_err(Error::Io)?;
    let parts: Vec<&str> = header.split(' ').collect();
    let bad_header =
        || Error::Data(format!("{}: expected header `xbar <rows> <cols> seed=<seed>`", path.display()));
    if parts.len() != 4 || parts[0] != "xbar" {
        return Err(bad_header());
    }
    let rows: usize = parts[1].parse().map_err(|_| bad_header())?;
    let cols: usize = parts[2].parse().map_err(|_| bad_header())?;
    let seed: u64 = parts[3]
        .strip_prefix("seed=")
        .ok_or_else(bad_header)?
        .parse()
        .map_err(|_| bad_header())?;
    let mut out = DenseMatrix::zeros(rows, cols);
    for i in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| {
                Error::Data(format!("{}: expected {rows} rows, found {i}", path.display()))
            })?
            .map_err(Error::Io)?;
        let mut count = 0;
        for (j, tok) in line.split(' ').enumerate() {
            if j >= cols {
                return Err(Error::Data(format!(
                    "{}: row {i} has more than {cols} values",
                    path.display()
                )));
            }
            out.row_mut(i)[j] = tok.parse().map_err(|_| {
                Error::Data(format!("{}: row {i}: bad value {tok:?}", path.display()))
            })?;
            count += 1;
        }
        if count != cols {
            return Err(Error::Data(format!(
                "{}: row {i} has {count} values, expected {cols}",
                path.display()
            )));
        }
    }
    if lines.next().is_some() {
        return Err(Error::Data(format!(
            "{}: trailing content after {rows} rows",
            path.display()
        )));
    }
    Ok((out, seed))
}
