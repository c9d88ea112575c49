//! Command-line front end: generator training, feature generation,
//! classifier training, the augmentation pipeline, and the experiment
//! suites, all driven by one JSON config plus a few overrides.

use clap::{Args, Parser, Subcommand};
use lagnn::generator::{save_generator, train_generator};
use lagnn::graph::load_dataset;
use lagnn::numerics::RngState;
use lagnn::pipeline::{
    emit_histogram, read_xbar_tsv, run_ablation_suite, run_benchmark, run_mask_study,
    run_pipeline_with, run_train, write_metrics_csv, write_report, write_xbar_tsv,
    PipelineConfig, RunReport,
};
use lagnn::{Error, Result};
use std::io::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "lagnn",
    version,
    about = "Local feature augmentation for graph neural networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Dataset directory (overrides the config)
    #[arg(long)]
    data: Option<PathBuf>,
    /// JSON configuration file; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Single seed (overrides the config)
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Comma-separated seeds (overrides the config)
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Output directory (overrides the config)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the neighbor-feature generator and save its checkpoint
    TrainGen(TrainGenArgs),
    /// Generate an augmented feature matrix from a saved generator
    Generate(GenerateArgs),
    /// Train one classifier variant over the configured seeds
    Train(TrainArgs),
    /// Run the augmentation loop per seed and save the selected matrices
    Pipeline(PipelineArgs),
    /// Augmentation loop plus la_gcn and the configured baselines per seed
    Benchmark(SuiteArgs),
    /// Paired comparison of la_gcn against its ablated variants
    Ablation(SuiteArgs),
    /// Feature-masking robustness study
    MaskStudy(MaskStudyArgs),
    /// Attribute histogram of the dataset features vs an augmented matrix
    Hist(HistArgs),
}

#[derive(Args)]
struct TrainGenArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    common: Common,
    /// Generator checkpoint written by train-gen
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    /// gcn, dropedge_gcn, la_mlp, la_gcn, width, concat_self or plain_neighbor
    #[arg(long, default_value = "gcn")]
    arch: String,
    /// Augmented feature matrix (required by la_gcn and la_mlp)
    #[arg(long)]
    xbar: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SuiteArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct MaskStudyArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated mask ratios
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.8")]
    ratios: Vec<f64>,
}

#[derive(Args)]
struct HistArgs {
    #[command(flatten)]
    common: Common,
    /// Augmented feature matrix to compare against the dataset features
    #[arg(long)]
    xbar: PathBuf,
    #[arg(long, default_value_t = 20)]
    bins: usize,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parameter(_) => 2,
        Error::Data(_) | Error::Io(_) => 3,
        Error::Numeric(_) | Error::Shape { .. } => 4,
    }
}

fn load_config(common: &Common) -> Result<PipelineConfig> {
    let mut config = match &common.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(data) = &common.data {
        config.data_dir = data.clone();
    }
    if let Some(seed) = common.seed {
        config.seeds = vec![seed];
    }
    if let Some(seeds) = &common.seeds {
        config.seeds = seeds.clone();
    }
    if let Some(out) = &common.out {
        config.out_dir = out.clone();
    }
    config.validate()?;
    std::fs::create_dir_all(&config.out_dir)?;
    Ok(config)
}

fn print_summary(report: &RunReport) {
    for s in &report.summary {
        let ratio = s
            .mask_ratio
            .map_or(String::new(), |r| format!(" (mask {r})"));
        println!(
            "{:<16}{} test {:.4} +/- {:.4}  val {:.4}",
            s.variant, ratio, s.mean_test_accuracy, s.std_test_accuracy, s.mean_val_accuracy
        );
    }
    for rec in &report.augmentation {
        let selected = match rec.selected_iteration {
            Some(i) => format!("iteration {i}"),
            None => "fallback (none adopted)".into(),
        };
        println!(
            "seed {}: selected {}, U_best {:.4}, attribute_kl {:.4}",
            rec.seed, selected, rec.u_best, rec.attribute_kl
        );
    }
}

fn write_suite_outputs(report: &RunReport, out_dir: &Path) -> Result<()> {
    write_report(report, &out_dir.join("report.json"))?;
    write_metrics_csv(report, &out_dir.join("metrics.csv"))?;
    println!(
        "wrote {} and {}",
        out_dir.join("report.json").display(),
        out_dir.join("metrics.csv").display()
    );
    Ok(())
}

fn cmd_train_gen(args: &TrainGenArgs) -> Result<()> {
    let config = load_config(&args.common)?;
    let seed = config.seeds[0];
    let ds = load_dataset(&config.data_dir, false)?;
    let mut rng = RngState::new(seed).split(1);
    let (model, trace) = train_generator(&ds, &config.generator, &mut rng)?;
    let path = config.out_dir.join("generator.bin");
    save_generator(&model, &path)?;
    let mut csv = std::fs::File::create(config.out_dir.join("gen_loss.csv"))?;
    writeln!(csv, "epoch,loss")?;
    for (i, loss) in trace.iter().enumerate() {
        writeln!(csv, "{},{:.6}", i + 1, loss)?;
    }
    println!(
        "trained generator on {} (seed {seed}, final loss {:.4}); wrote {}",
        ds.name,
        trace.last().copied().unwrap_or(f64::NAN),
        path.display()
    );
    Ok(())
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let config = load_config(&args.common)?;
    let seed = config.seeds[0];
    let ds = load_dataset(&config.data_dir, false)?;
    let model = lagnn::generator::load_generator(&args.model)?;
    let rng = RngState::new(seed);
    let xbar =
        lagnn::generator::generate_features(&model, &ds.features, &rng)?.row_normalize();
    let path = config.out_dir.join("xbar.tsv");
    write_xbar_tsv(&xbar, seed, &path)?;
    println!("wrote {} ({} x {})", path.display(), xbar.rows(), xbar.cols());
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let config = load_config(&args.common)?;
    let xbar = args.xbar.as_deref().map(read_xbar_tsv).transpose()?;
    let report = run_train(&config, &args.arch, xbar.as_ref().map(|(m, _)| m))?;
    print_summary(&report);
    write_suite_outputs(&report, &config.out_dir)
}

fn cmd_pipeline(args: &PipelineArgs) -> Result<()> {
    let config = load_config(&args.common)?;
    let single = config.seeds.len() == 1;
    let out_dir = config.out_dir.clone();
    let report = run_pipeline_with(&config, |seed, xbar| {
        let name = if single {
            "xbar.tsv".to_string()
        } else {
            format!("xbar_{seed}.tsv")
        };
        let path = out_dir.join(name);
        write_xbar_tsv(xbar, seed, &path)?;
        println!("wrote {}", path.display());
        Ok(())
    })?;
    print_summary(&report);
    write_report(&report, &out_dir.join("report.json"))?;
    println!("wrote {}", out_dir.join("report.json").display());
    Ok(())
}

fn cmd_benchmark(args: &SuiteArgs) -> Result<()> {
    let config = load_config(&args.common)?;
    let report = run_benchmark(&config)?;
    print_summary(&report);
    write_suite_outputs(&report, &config.out_dir)
}

fn cmd_ablation(args: &SuiteArgs) -> Result<()> {
    let config = load_config(&args.common)?;
    let report = run_ablation_suite(&config)?;
    print_summary(&report);
    write_suite_outputs(&report, &config.out_dir)
}

fn cmd_mask_study(args: &MaskStudyArgs) -> Result<()> {
    let config = load_config(&args.common)?;
    let report = run_mask_study(&config, &args.ratios)?;
    print_summary(&report);
    for gap in &report.mask_gaps {
        println!(
            "ratio {:.2}: gcn {:.4}, la_gcn {:.4}, gap {:+.4}",
            gap.ratio, gap.gcn_mean, gap.la_gcn_mean, gap.gap
        );
    }
    write_suite_outputs(&report, &config.out_dir)
}

fn cmd_hist(args: &HistArgs) -> Result<()> {
    let config = load_config(&args.common)?;
    let ds = load_dataset(&config.data_dir, false)?;
    let x_norm = ds.features.row_normalize();
    let (xbar, _) = read_xbar_tsv(&args.xbar)?;
    let path = config.out_dir.join("hist.csv");
    let kl = emit_histogram(&x_norm, &xbar, args.bins, &path)?;
    println!("attribute_kl {kl:.6}; wrote {}", path.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::TrainGen(args) => cmd_train_gen(args),
        Command::Generate(args) => cmd_generate(args),
        Command::Train(args) => cmd_train(args),
        Command::Pipeline(args) => cmd_pipeline(args),
        Command::Benchmark(args) => cmd_benchmark(args),
        Command::Ablation(args) => cmd_ablation(args),
        Command::MaskStudy(args) => cmd_mask_study(args),
        Command::Hist(args) => cmd_hist(args),
    }
}

fn main() {
    lagnn::tune_allocator();
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
