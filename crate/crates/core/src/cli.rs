//! Command implementations behind the `gsaal` binary.
//!
//! Seeds resolve as `--seed` flag, then the config file's `seed`, then the
//! `GSAAL_SEED` environment variable, then 42. Training parameters resolve as
//! flag, then the config file's `[train]` table, then the library default.
//!
//! Exit codes: 0 success, 2 usage or configuration, 3 data or parse,
//! 4 numeric failure during training.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::datagen::{
    generate_ia_dataset, generate_shape, mmd_linear, myopicity_test, plant_points, IaSpec, InlierFamily,
    LabeledDataset, NoiseFill, OutlierType, ReferenceModel, Shape, ShapeSpec, BANANA_OFF_CURVE,
};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate_baseline, evaluate_gsaal, export_grid_csv, occ_split, scalability_run, Baseline, EvalReport,
    GridBounds, ScalabilityConfig, TimingRow,
};
use crate::gsaal::{fit, load_model, save_model, GeneratorInit, TrainConfig};
use crate::io::{fmt_f64, read_csv, render_table, write_dataset_csv, write_rows, write_scores_csv, write_trace_csv};
use crate::subspace::{default_k, draw_masks};

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "GSAAL_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "gsaal", version, about = "Subspace-ensemble adversarial outlier detection")]
pub struct Cli {
    /// Seed for every random draw; overrides the config file and GSAAL_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// TOML file with `seed` and a `[train]` table.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic shape dataset with Gaussian noise features.
    Generate(GenerateArgs),
    /// Generate an inlier-assumption dataset: one training file and labeled test batches.
    GenerateIa(GenerateIaArgs),
    /// Train a model; writes the model JSON and a per-epoch loss trace.
    Fit(FitArgs),
    /// Score a CSV with a saved model.
    Score(ScoreArgs),
    /// Split a labeled CSV, fit GSAAL and optional baselines, report AUC.
    Eval(EvalArgs),
    /// Time inference over sweeps of training size and dimension.
    Bench(BenchArgs),
    /// Score a grid over the (x1, x2) plane with the other features at zero.
    Grid(GridArgs),
    /// Linear-kernel MMD² between two CSVs, or the built-in myopicity check.
    Mmd(MmdArgs),
}

fn parse_shape(s: &str) -> std::result::Result<Shape, String> {
    Shape::from_name(s).ok_or_else(|| format!("unknown shape {s:?} (banana, spiral, star, circle, l)"))
}

fn parse_generator_init(s: &str) -> std::result::Result<GeneratorInit, String> {
    GeneratorInit::from_name(s).ok_or_else(|| format!("unknown generator init {s:?} (identity, glorot)"))
}

fn parse_family(s: &str) -> std::result::Result<InlierFamily, String> {
    InlierFamily::from_name(s).ok_or_else(|| format!("unknown family {s:?} (gaussian, mixture, uniform, ring)"))
}

fn parse_outlier_type(s: &str) -> std::result::Result<OutlierType, String> {
    OutlierType::from_name(s).ok_or_else(|| format!("unknown outlier type {s:?} (local, cluster)"))
}

fn parse_baseline(s: &str) -> std::result::Result<Baseline, String> {
    Baseline::from_name(s).ok_or_else(|| format!("unknown baseline {s:?} (knn, lof)"))
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_parser = parse_shape)]
    pub shape: Shape,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = ShapeSpec::DEFAULT_NOISE_FEATURES)]
    pub noise_features: usize,
    #[arg(long, default_value_t = ShapeSpec::DEFAULT_JITTER)]
    pub jitter: f64,
    /// Append the off-curve banana points as labeled outliers (label column is written).
    #[arg(long)]
    pub plant_outliers: bool,
    /// Write a trailing `label` column.
    #[arg(long)]
    pub labels: bool,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateIaArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: InlierFamily,
    #[arg(long = "outlier-type", value_parser = parse_outlier_type)]
    pub outlier_type: OutlierType,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub n_inliers: Option<usize>,
    #[arg(long)]
    pub n_outliers: Option<usize>,
    #[arg(long)]
    pub batches: Option<usize>,
    #[arg(long)]
    pub lof_threshold: Option<f64>,
    #[arg(long)]
    pub cluster_shift: Option<f64>,
    /// Directory receiving `train.csv` and `test_<i>.csv`.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Default, Clone)]
pub struct TrainArgs {
    #[arg(long)]
    pub epochs: Option<usize>,
    /// First active-learning epoch (0-based); defaults to 80% of the epochs.
    #[arg(long)]
    pub stop_epoch: Option<usize>,
    #[arg(long)]
    pub detector_lr: Option<f64>,
    #[arg(long)]
    pub generator_lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Generator starting weights: identity or glorot.
    #[arg(long, value_parser = parse_generator_init)]
    pub generator_init: Option<GeneratorInit>,
}

#[derive(Debug, Args)]
#[group(id = "k_choice", required = true, multiple = false)]
pub struct KArgs {
    /// Number of subspace detectors.
    #[arg(long, group = "k_choice")]
    pub k: Option<usize>,
    /// Use ceil(2 sqrt(d)) detectors.
    #[arg(long, group = "k_choice")]
    pub k_default: bool,
}

impl KArgs {
    fn resolve(&self, d: usize) -> usize {
        self.k.unwrap_or_else(|| default_k(d))
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub k: KArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Labeled CSV (trailing `label` column).
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub k: KArgs,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long, value_delimiter = ',', value_parser = parse_baseline)]
    pub baselines: Vec<Baseline>,
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Report CSV with columns dataset, method, auc, seed.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',')]
    pub n_sweep: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub d_sweep: Vec<usize>,
    #[arg(long, default_value_t = 30)]
    pub k: usize,
    #[arg(long, default_value_t = 10_000)]
    pub n_test: usize,
    #[arg(long, default_value_t = 3)]
    pub repetitions: usize,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub resolution: usize,
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    pub x1_min: f64,
    #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
    pub x1_max: f64,
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    pub x2_min: f64,
    #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
    pub x2_max: f64,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MmdArgs {
    #[arg(long, requires = "b")]
    pub a: Option<PathBuf>,
    #[arg(long, requires = "a")]
    pub b: Option<PathBuf>,
    /// Sample size for the built-in myopicity check.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub train: TrainSection,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: Option<usize>,
    pub stop_epoch: Option<usize>,
    pub detector_lr: Option<f64>,
    pub generator_lr: Option<f64>,
    pub batch_size: Option<usize>,
    pub early_stop_tol: Option<f64>,
    pub early_stop_patience: Option<usize>,
    pub generator_init: Option<GeneratorInit>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// `flag`, else the config file, else `GSAAL_SEED`, else 42.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>, env: Option<&str>) -> Result<u64> {
    if let Some(s) = flag.or(file) {
        return Ok(s);
    }
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        None => Ok(DEFAULT_SEED),
    }
}

pub fn resolve_train(args: &TrainArgs, file: &TrainSection, seed: u64) -> TrainConfig {
    let epochs = args.epochs.or(file.epochs).unwrap_or(TrainConfig::DEFAULT_EPOCHS);
    let mut cfg = TrainConfig::with_epochs(epochs, seed);
    if let Some(v) = args.stop_epoch.or(file.stop_epoch) {
        cfg.stop_epoch = v;
    }
    if let Some(v) = args.detector_lr.or(file.detector_lr) {
        cfg.detector_lr = v;
    }
    if let Some(v) = args.generator_lr.or(file.generator_lr) {
        cfg.generator_lr = v;
    }
    if let Some(v) = args.batch_size.or(file.batch_size) {
        cfg.batch_size = v;
    }
    if let Some(v) = args.generator_init.or(file.generator_init) {
        cfg.generator_init = v;
    }
    if let Some(v) = file.early_stop_tol {
        cfg.early_stop_tol = v;
    }
    if let Some(v) = file.early_stop_patience {
        cfg.early_stop_patience = v;
    }
    cfg
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_numeric() {
        EXIT_NUMERIC
    } else if matches!(err, Error::Config(_) | Error::Capacity { .. }) {
        EXIT_USAGE
    } else {
        EXIT_DATA
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Messages go to `out`, errors to `err`.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    let env = std::env::var(SEED_ENV).ok();
    match run(cli, env.as_deref(), out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli, seed_env: Option<&str>, out: &mut dyn Write) -> Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let seed = resolve_seed(cli.seed, file.seed, seed_env)?;
    match cli.command {
        Command::Generate(a) => cmd_generate(&a, seed, out),
        Command::GenerateIa(a) => cmd_generate_ia(&a, seed, out),
        Command::Fit(a) => cmd_fit(&a, &resolve_train(&a.train, &file.train, seed), out),
        Command::Score(a) => cmd_score(&a, out),
        Command::Eval(a) => cmd_eval(&a, &resolve_train(&a.train, &file.train, seed), out),
        Command::Bench(a) => cmd_bench(&a, seed, out),
        Command::Grid(a) => cmd_grid(&a, out),
        Command::Mmd(a) => cmd_mmd(&a, seed, out),
    }
}

fn say(out: &mut dyn Write, msg: std::fmt::Arguments<'_>) {
    let _ = out.write_fmt(msg);
    let _ = out.write_all(b"\n");
}

pub fn cmd_generate(a: &GenerateArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    let spec = ShapeSpec {
        shape: a.shape,
        n_points: a.n,
        noise_features: a.noise_features,
        jitter: a.jitter,
        seed,
    };
    let mut data = generate_shape(&spec);
    if a.plant_outliers {
        let planted = plant_points(&BANANA_OFF_CURVE, a.noise_features, NoiseFill::Gaussian, seed ^ 1);
        let n = planted.rows();
        data = data.concat(&LabeledDataset::new(planted, vec![1; n])?)?;
    }
    write_dataset_csv(&a.out, &data, a.labels || a.plant_outliers)?;
    say(
        out,
        format_args!(
            "wrote {} rows x {} features ({} outliers) to {}",
            data.len(),
            data.dim(),
            data.outlier_count(),
            a.out.display()
        ),
    );
    Ok(())
}

pub fn cmd_generate_ia(a: &GenerateIaArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    let mut spec = IaSpec::new(a.family, a.outlier_type, seed);
    if let Some(v) = a.d {
        spec.d = v;
    }
    if let Some(v) = a.n_inliers {
        spec.n_inliers = v;
    }
    if let Some(v) = a.n_outliers {
        spec.n_outliers = v;
    }
    if let Some(v) = a.batches {
        spec.n_batches = v;
    }
    if let Some(v) = a.lof_threshold {
        spec.lof_threshold = v;
    }
    if let Some(v) = a.cluster_shift {
        spec.cluster_shift = v;
    }
    let reference = match a.outlier_type {
        OutlierType::Local => ReferenceModel::Lof,
        OutlierType::Cluster => ReferenceModel::ClusterShift,
    };
    let ia = generate_ia_dataset(&spec, reference)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    write_dataset_csv(a.out_dir.join("train.csv"), &LabeledDataset::inliers(ia.train.clone()), false)?;
    for (i, t) in ia.tests.iter().enumerate() {
        write_dataset_csv(a.out_dir.join(format!("test_{i}.csv")), t, true)?;
    }
    for w in &ia.warnings {
        say(out, format_args!("warning: {w}"));
    }
    say(
        out,
        format_args!(
            "wrote train.csv ({} rows) and {} test batches to {}",
            ia.train.rows(),
            ia.tests.len(),
            a.out_dir.display()
        ),
    );
    Ok(())
}

pub fn cmd_fit(a: &FitArgs, cfg: &TrainConfig, out: &mut dyn Write) -> Result<()> {
    let table = read_csv(&a.data)?;
    let d = table.points.cols();
    let k = a.k.resolve(d);
    let masks = draw_masks(d, k, cfg.seed)?;
    let (model, trace) = fit(&table.points, &masks, cfg)?;
    save_model(&model, &a.model)?;
    if let Some(p) = &a.trace {
        write_trace_csv(p, &trace)?;
    }
    let last = trace.last().expect("at least one epoch");
    say(
        out,
        format_args!(
            "trained k={k} detectors on {} x {d} for {} epochs; final generator loss {}; model written to {}",
            table.points.rows(),
            trace.epochs.len(),
            fmt_f64(last.generator_loss),
            a.model.display()
        ),
    );
    Ok(())
}

pub fn cmd_score(a: &ScoreArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&a.model)?;
    let table = read_csv(&a.data)?;
    let scores = model.score(&table.points)?;
    write_scores_csv(&a.out, &scores)?;
    say(out, format_args!("wrote {} scores to {}", scores.len(), a.out.display()));
    Ok(())
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

pub fn cmd_eval(a: &EvalArgs, cfg: &TrainConfig, out: &mut dyn Write) -> Result<()> {
    let table = read_csv(&a.data)?;
    if table.labels.is_none() {
        return Err(Error::Domain(format!("{} has no label column", a.data.display())));
    }
    let data = table.into_dataset()?;
    let split = occ_split(&data, a.train_fraction, cfg.seed)?;
    let k = a.k.resolve(data.dim());
    let mut reports: Vec<EvalReport> = vec![evaluate_gsaal(&split, k, cfg)?.0];
    for &b in &a.baselines {
        reports.push(evaluate_baseline(&split, b)?);
    }
    let name = dataset_name(&a.data);
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| vec![name.clone(), r.method_name.clone(), fmt_f64(r.auc), cfg.seed.to_string()])
        .collect();
    let header = ["dataset", "method", "auc", "seed"];
    let _ = write!(out, "{}", render_table(&header, &rows));
    if let Some(p) = &a.report {
        write_rows(p, &header, &rows)?;
    }
    Ok(())
}

pub fn cmd_bench(a: &BenchArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    let mut cfg = ScalabilityConfig::new(a.n_sweep.clone(), a.d_sweep.clone(), seed);
    cfg.k = a.k;
    cfg.n_test = a.n_test;
    cfg.repetitions = a.repetitions;
    let rows: Vec<Vec<String>> = scalability_run(&cfg)?.iter().map(TimingRow::fields).collect();
    let _ = write!(out, "{}", render_table(&TimingRow::HEADER, &rows));
    if let Some(p) = &a.out {
        write_rows(p, &TimingRow::HEADER, &rows)?;
    }
    Ok(())
}

pub fn cmd_grid(a: &GridArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&a.model)?;
    let bounds = GridBounds {
        x1: (a.x1_min, a.x1_max),
        x2: (a.x2_min, a.x2_max),
    };
    let grid = export_grid_csv(&model, bounds, a.resolution, &a.out)?;
    let (x1, x2, s) = grid.argmin();
    say(
        out,
        format_args!(
            "wrote {} grid rows to {}; lowest score {} at ({}, {})",
            a.resolution * a.resolution,
            a.out.display(),
            fmt_f64(s),
            fmt_f64(x1),
            fmt_f64(x2)
        ),
    );
    Ok(())
}

pub fn cmd_mmd(a: &MmdArgs, seed: u64, out: &mut dyn Write) -> Result<()> {
    match (&a.a, &a.b) {
        (Some(pa), Some(pb)) => {
            let xa = read_csv(pa)?.points;
            let xb = read_csv(pb)?.points;
            say(out, format_args!("mmd2 {}", fmt_f64(mmd_linear(&xa, &xb)?)));
        }
        _ => {
            let r = myopicity_test(a.n, seed)?;
            say(out, format_args!("myopic  {}", fmt_f64(r.myopic)));
            say(out, format_args!("control {}", fmt_f64(r.control)));
        }
    }
    Ok(())
}
