//! The `fakepoi` command line: generate, train, evaluate, ablate, sweep.
//!
//! Exit codes: 0 success, 1 validation or usage failure, 2 input-data
//! failure, 3 training divergence. Failures print one JSON object to stderr.

pub mod config;
pub mod error;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fakepoi_core::ablation::{run_ablation, sweep_regularization, table6, RegAxis};
use fakepoi_core::data::{bundled_dataset, load_csv, save_csv, CsvSchema};
use fakepoi_core::pipeline::{prepare, train_prepared};
use fakepoi_core::synth::{generate_fake, merge_labeled, FakeProfile};
use fakepoi_core::train::TrainerKind;
use fakepoi_core::{AblationVariant, Attribute, AttributeSet, Dataset, Label, MetricsReport, ModelBundle};
use serde::Serialize;

pub use config::RunConfigFile;
pub use error::{CliError, ExitKind};

/// Environment override for the hogwild core count, same as `--threads`.
pub const THREADS_ENV: &str = "FAKEPOI_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fakepoi", version, about = "Fake point-of-interest detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a CSV of generated fake records, all labelled 0.
    Generate(GenerateArgs),
    /// Train a model on real plus fake records.
    Train(TrainArgs),
    /// Score a saved model on a labelled CSV.
    Evaluate(EvaluateArgs),
    /// Retrain with attributes removed and compare test RMSE.
    Ablate(AblateArgs),
    /// Retrain over a range of L1 or L2 coefficients.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of records (default: fake.count from the config, 500).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON generator profile; replaces fake.profile from the config.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrainerArg {
    Sequential,
    Hogwild,
}

/// Flags shared by every training command. Each one overrides the config
/// file.
#[derive(Debug, Args, Default)]
pub struct RunOverrides {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Real records; the bundled sample when absent.
    #[arg(long)]
    pub real: Option<PathBuf>,
    /// Fake records; generated when absent.
    #[arg(long)]
    pub fake: Option<PathBuf>,
    #[arg(long)]
    pub fake_count: Option<usize>,
    #[arg(long)]
    pub fake_seed: Option<u64>,
    /// Run seed; -1 draws one.
    #[arg(long, allow_hyphen_values = true)]
    pub seed: Option<i64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// 0 trains the logistic comparator.
    #[arg(long)]
    pub hidden_size: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub l1: Option<f64>,
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long, value_enum)]
    pub trainer: Option<TrainerArg>,
    /// Hogwild nodes; implies the hogwild trainer.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Hogwild cores per node; implies the hogwild trainer.
    #[arg(long)]
    pub cores: Option<usize>,
    /// One node with this many cores. Ignored when --nodes or --cores is given.
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub samples_per_iteration: Option<usize>,
    /// Comma-separated seeds for multi-run commands.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Parallel runs for multi-run commands; 0 uses every core.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub run: RunOverrides,
    #[arg(long)]
    pub model_out: PathBuf,
    /// Learning curve CSV; defaults to `<model_out>.runlog.csv`.
    #[arg(long)]
    pub log_out: Option<PathBuf>,
    /// Validation and test metrics; defaults to `<model_out>.metrics.json`.
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
    /// Also write the cleaned train/validation/test records here.
    #[arg(long)]
    pub splits_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Labelled CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Write the metrics JSON here instead of stdout.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
    #[arg(long, default_value = "MLP")]
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Table6,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub run: RunOverrides,
    /// Built-in variant list. `table6` also activates LM_ID.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Variant such as "FDM (PC -, PHONE -)"; repeatable.
    #[arg(long = "variant")]
    pub variants: Vec<String>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    L1,
    L2,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunOverrides,
    #[arg(long, value_enum)]
    pub axis: AxisArg,
    /// Comma-separated coefficients.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub values: Vec<f64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return 0;
            }
            let _ = write!(err, "{}", e.render());
            let _ = writeln!(err, "{}", CliError::usage(e.kind().to_string()).to_json());
            return ExitKind::Validation as i32;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_json());
            e.exit_code
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Generate(a) => cmd_generate(&a, out),
        Command::Train(a) => cmd_train(&a, out),
        Command::Evaluate(a) => cmd_evaluate(&a, out),
        Command::Ablate(a) => cmd_ablate(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfigFile, CliError> {
    match path {
        Some(p) => RunConfigFile::load(p).map_err(CliError::config),
        None => Ok(RunConfigFile::default()),
    }
}

/// Config file with command-line overrides applied, validated.
pub fn resolve_config(o: &RunOverrides) -> Result<RunConfigFile, CliError> {
    let mut cfg = load_config(o.config.as_deref())?;
    if o.real.is_some() {
        cfg.paths.real_csv = o.real.clone();
    }
    if o.fake.is_some() {
        cfg.paths.fake_csv = o.fake.clone();
    }
    let t = &mut cfg.train;
    set(&mut cfg.fake.count, o.fake_count);
    set(&mut cfg.fake.seed, o.fake_seed);
    set(&mut t.seed, o.seed);
    set(&mut t.epochs, o.epochs);
    set(&mut t.hidden_size, o.hidden_size);
    set(&mut t.dropout_ratio, o.dropout);
    set(&mut t.l1, o.l1);
    set(&mut t.l2, o.l2);
    set(&mut t.samples_per_iteration, o.samples_per_iteration);
    if let Some(k) = o.trainer {
        t.trainer = match k {
            TrainerArg::Sequential => TrainerKind::Sequential,
            TrainerArg::Hogwild => TrainerKind::Hogwild,
        };
    }
    if o.nodes.is_some() || o.cores.is_some() {
        t.trainer = TrainerKind::Hogwild;
        set(&mut t.nodes, o.nodes);
        set(&mut t.cores_per_node, o.cores);
    } else if let Some(threads) = o.threads {
        t.trainer = TrainerKind::Hogwild;
        t.nodes = 1;
        t.cores_per_node = threads;
    }
    if let Some(s) = &o.seeds {
        cfg.seeds = s.clone();
    }
    set(&mut cfg.workers, o.workers);
    cfg.validate()?;
    Ok(cfg)
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Real records (bundled unless a path is configured) merged with fake
/// records (generated unless a path is configured).
pub fn load_training_data(cfg: &RunConfigFile) -> Result<Dataset, CliError> {
    let schema = |label| CsvSchema { default_label: Some(label), ..CsvSchema::default() };
    let real = match &cfg.paths.real_csv {
        Some(p) => load_csv(p, &schema(Label::Real))?,
        None => bundled_dataset(),
    };
    let fake = match &cfg.paths.fake_csv {
        Some(p) => load_csv(p, &schema(Label::Fake))?,
        None => generate_fake(cfg.fake.count, &cfg.fake.profile, cfg.fake.seed)?,
    };
    Ok(merge_labeled(&real, &fake)?)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(fakepoi_core::Error::from)?;
    }
    Ok(BufWriter::new(File::create(path).map_err(fakepoi_core::Error::from)?))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(fakepoi_core::Error::from)?;
    Ok(())
}

fn say(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<(), CliError> {
    out.write_fmt(text).map_err(|e| fakepoi_core::Error::from(e).into())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(a.config.as_deref())?;
    let profile = match &a.profile {
        Some(p) => FakeProfile::load(p).map_err(CliError::config)?,
        None => cfg.fake.profile,
    };
    let n = a.n.unwrap_or(cfg.fake.count);
    let ds = generate_fake(n, &profile, a.seed.unwrap_or(cfg.fake.seed))?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(fakepoi_core::Error::from)?;
    }
    save_csv(&ds, &a.out)?;
    say(out, format_args!("wrote {n} fake records to {}\n", a.out.display()))
}

/// Metrics file written next to a trained model.
#[derive(Debug, Serialize)]
struct TrainMetrics<'a> {
    seed: u64,
    validation: &'a MetricsReport,
    test: &'a MetricsReport,
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve_config(&a.run)?;
    let data = load_training_data(&cfg)?;
    let pipeline = cfg.pipeline();
    let seed = pipeline.train.resolve_seed();
    let prep = prepare(&data, &pipeline, AttributeSet::empty(), seed)?;
    let outcome = train_prepared(&prep, &pipeline, seed)?;

    write_text(&a.model_out, &outcome.bundle(&pipeline).to_json()?)?;
    let log_path = a.log_out.clone().unwrap_or_else(|| sibling(&a.model_out, ".runlog.csv"));
    let mut w = create(&log_path)?;
    outcome.log.write_csv(&mut w)?;
    w.flush().map_err(fakepoi_core::Error::from)?;
    let metrics = TrainMetrics { seed, validation: &outcome.validation, test: &outcome.test };
    let metrics_path = a.metrics_out.clone().unwrap_or_else(|| sibling(&a.model_out, ".metrics.json"));
    write_text(&metrics_path, &serde_json::to_string_pretty(&metrics).map_err(fakepoi_core::Error::from)?)?;

    if let Some(dir) = &a.splits_dir {
        fs::create_dir_all(dir).map_err(fakepoi_core::Error::from)?;
        for (name, idx) in [("train", &prep.split.train), ("validation", &prep.split.validation), ("test", &prep.split.test)] {
            save_csv(&prep.cleaned.subset(idx), dir.join(format!("{name}.csv")))?;
        }
    }

    let name = if pipeline.train.hidden_size == 0 { "Logistic" } else { "MLP" };
    say(out, format_args!("seed {seed}\n\ntest set\n{}", outcome.test.render(name)))?;
    say(out, format_args!("\nmodel   {}\nrunlog  {}\nmetrics {}\n", a.model_out.display(), log_path.display(), metrics_path.display()))
}

pub fn cmd_evaluate(a: &EvaluateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let bundle = ModelBundle::load(&a.model)?;
    let data = load_csv(&a.data, &CsvSchema::default())?;
    let report = bundle.evaluate(&data)?;
    let json = report.to_json()?;
    say(out, format_args!("{}", report.render(&a.name)))?;
    match &a.json_out {
        Some(p) => write_text(p, &json),
        None => say(out, format_args!("\n{json}\n")),
    }
}

pub fn cmd_ablate(a: &AblateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = resolve_config(&a.run)?;
    let mut variants = Vec::new();
    if a.preset == Some(Preset::Table6) {
        cfg.active_attributes.insert(Attribute::LmId);
        variants.extend(table6());
    }
    for v in &a.variants {
        variants.push(v.parse::<AblationVariant>()?);
    }
    if variants.is_empty() {
        return Err(CliError::usage("no ablation variants: pass --preset or --variant"));
    }
    let data = load_training_data(&cfg)?;
    let report = run_ablation(&data, &variants, &cfg.pipeline(), &cfg.seeds, cfg.workers)?;

    fs::create_dir_all(&a.out_dir).map_err(fakepoi_core::Error::from)?;
    let mut w = create(&a.out_dir.join("ablation.csv"))?;
    report.write_csv(&mut w)?;
    w.flush().map_err(fakepoi_core::Error::from)?;
    write_text(&a.out_dir.join("ablation.json"), &report.to_json()?)?;

    let width = report.rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    say(out, format_args!("{:<width$}  {:>9}  {:>9}\n", "variant", "RMSE", "sd"))?;
    for r in &report.rows {
        say(out, format_args!("{:<width$}  {:>9.4}  {:>9.4}\n", r.name, r.mean_rmse, r.sd_rmse))?;
    }
    Ok(())
}

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = resolve_config(&a.run)?;
    let axis = match a.axis {
        AxisArg::L1 => RegAxis::L1,
        AxisArg::L2 => RegAxis::L2,
    };
    let data = load_training_data(&cfg)?;
    let report = sweep_regularization(&data, &cfg.pipeline(), axis, &a.values, &cfg.seeds, cfg.workers)?;

    fs::create_dir_all(&a.out_dir).map_err(fakepoi_core::Error::from)?;
    let mut w = create(&a.out_dir.join("sweep.csv"))?;
    report.write_csv(&mut w)?;
    w.flush().map_err(fakepoi_core::Error::from)?;
    write_text(&a.out_dir.join("sweep.json"), &report.to_json()?)?;

    say(out, format_args!("{:>10}  {:>9}  {:>9}\n", format!("{axis:?}"), "RMSE", "sd"))?;
    for r in &report.rows {
        say(out, format_args!("{:>10.0e}  {:>9.4}  {:>9.4}\n", r.value, r.mean_rmse, r.sd_rmse))?;
    }
    Ok(())
}
