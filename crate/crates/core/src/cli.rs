//! Command-line front end. `run` parses arguments, resolves settings
//! (flag, then `--config` JSON, then default), executes one subcommand and
//! returns the process exit code.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::audit::{audit, AuditConfig, DecisionRule, Verdict};
use crate::density::{bpd, fit_gmm, CovarianceKind, GmmConfig, GmmModel};
use crate::embed::{embed_reference, EmbedderConfig, FeatureMatrix};
use crate::ingest::{self, Dataset, Dtype};
use crate::metrics::{inception_score, inception_score_folds};
use crate::reference;
use crate::remix::{apply_plan, class_counts, remix};
use crate::report::{self, BpdPair, DensitySummary, EmbedSummary, Payload, RemixSummary, ReportEnvelope, SynthSummary};
use crate::stats::FrechetOptions;
use crate::synth::{self, GeneratorSpec, MismatchMode, PixelSpec};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;
pub const THREADS_ENV: &str = "SPLITGAUGE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "splitgauge", version, about = "Audit train/test split integrity of image datasets")]
pub struct Cli {
    /// Worker thread cap (falls back to SPLITGAUGE_THREADS). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON file with default settings; explicit flags win over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed a dataset with the reference embedder and write a feature matrix.
    Embed(EmbedArgs),
    /// Compare within-train and train-to-test Fréchet distances.
    Audit(AuditArgs),
    /// Inception Score of a class-probability matrix.
    Is(IsArgs),
    /// Build a class-stratified remix plan of two splits.
    Remix(RemixArgs),
    /// Fit a Gaussian mixture density model to features.
    FitDensity(FitArgs),
    /// Bits per dimension of features under a fitted model.
    Bpd(BpdArgs),
    /// Generate synthetic splits with an injected mismatch.
    Synth(SynthArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct EmbedderFlags {
    #[arg(long)]
    pub grid_h: Option<usize>,
    #[arg(long)]
    pub grid_w: Option<usize>,
    /// Output feature dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub embed_seed: Option<u64>,
    /// Map label 10 to 0 when reading `.mat` files.
    #[arg(long)]
    pub remap_ten: bool,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub dtype: Option<DtypeArg>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub embedder: EmbedderFlags,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DtypeArg {
    F32,
    F64,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long, conflicts_with = "train_features", required_unless_present = "train_features")]
    pub train_dataset: Option<PathBuf>,
    #[arg(long)]
    pub train_features: Option<PathBuf>,
    #[arg(long, conflicts_with = "test_features", required_unless_present = "test_features")]
    pub test_dataset: Option<PathBuf>,
    #[arg(long)]
    pub test_features: Option<PathBuf>,
    /// Subset size.
    #[arg(long)]
    pub m: Option<usize>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Diagonal jitter added to both covariances.
    #[arg(long)]
    pub jitter: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub fail_on_mismatch: bool,
    /// Compare aggregates against a published reference row.
    #[arg(long)]
    pub reference: Option<String>,
    #[command(flatten)]
    pub embedder: EmbedderFlags,
}

#[derive(Debug, Args)]
pub struct IsArgs {
    /// Class probabilities: `PROBMTX1` file or CSV, one row per sample
    #[arg(long)]
    pub probs: PathBuf,
    /// Split rows into this many folds and report mean and spread
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RemixArgs {
    #[arg(long, conflicts_with = "train_labels", required_unless_present = "train_labels")]
    pub train: Option<PathBuf>,
    #[arg(long, conflicts_with = "test_labels", required_unless_present = "test_labels")]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub train_labels: Option<PathBuf>,
    #[arg(long)]
    pub test_labels: Option<PathBuf>,
    /// Class count when only label files are given (default: max label + 1).
    #[arg(long)]
    pub classes: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Plan JSON output.
    #[arg(long)]
    pub out: PathBuf,
    /// Materialized remixed train split (raw format).
    #[arg(long, requires = "train")]
    pub train_out: Option<PathBuf>,
    #[arg(long, requires = "test")]
    pub test_out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub remap_ten: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub components: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub reg: Option<f64>,
    #[arg(long, value_enum)]
    pub covariance: Option<CovArg>,
    /// Model JSON output.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CovArg {
    Full,
    Diagonal,
}

#[derive(Debug, Args)]
pub struct BpdArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub train_features: PathBuf,
    #[arg(long)]
    pub test_features: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Generator spec JSON; the built-in three-component preset otherwise.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Dimension of the preset.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub mode: Option<MismatchMode>,
    #[arg(long)]
    pub strength: Option<f64>,
    #[arg(long)]
    pub n_train: Option<usize>,
    #[arg(long)]
    pub n_test: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Emit constant-intensity images (raw format) instead of features.
    #[arg(long)]
    pub pixels: bool,
    #[arg(long)]
    pub train_out: PathBuf,
    #[arg(long)]
    pub test_out: PathBuf,
    #[arg(long)]
    pub train_labels_out: Option<PathBuf>,
    #[arg(long)]
    pub test_labels_out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Settings a `--config` file may provide. Unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    threads: Option<usize>,
    embedder: Option<EmbedderConfig>,
    dtype: Option<Dtype>,
    m: Option<usize>,
    seeds: Option<Vec<u64>>,
    jitter: Option<f64>,
    rule: Option<DecisionRule>,
    folds: Option<usize>,
    seed: Option<u64>,
    gmm: Option<GmmFile>,
    synth: Option<SynthFile>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GmmFile {
    components: Option<usize>,
    seed: Option<u64>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    reg: Option<f64>,
    covariance: Option<CovarianceKind>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SynthFile {
    dim: Option<usize>,
    mode: Option<MismatchMode>,
    strength: Option<f64>,
    n_train: Option<usize>,
    n_test: Option<usize>,
    seed: Option<u64>,
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn thread_count(flag: Option<usize>, file: Option<usize>) -> Result<Option<usize>> {
    let env = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidArgument(format!("{THREADS_ENV}={v} is not a count")))?,
        ),
        _ => None,
    };
    let n = flag.or(file).or(env);
    if n == Some(0) {
        return Err(Error::InvalidArgument("thread count must be positive".into()));
    }
    Ok(n)
}

fn execute(cli: Cli) -> Result<i32> {
    let file: FileConfig = match &cli.config {
        Some(p) => load_json(p)?,
        None => FileConfig::default(),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(cli.threads, file.threads)? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Embed(a) => cmd_embed(a, &file),
        Command::Audit(a) => cmd_audit(a, &file),
        Command::Is(a) => cmd_is(a, &file),
        Command::Remix(a) => cmd_remix(a, &file),
        Command::FitDensity(a) => cmd_fit(a, &file),
        Command::Bpd(a) => cmd_bpd(a),
        Command::Synth(a) => cmd_synth(a, &file),
    })
}

fn emit(env: &ReportEnvelope, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(env)? + "\n";
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn is_mat(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("mat"))
}

pub fn load_dataset(path: &Path, remap_ten: bool) -> Result<Dataset> {
    if is_mat(path) {
        ingest::read_svhn_mat(path, remap_ten)
    } else {
        ingest::read_raw(path)
    }
}

fn embedder_config(flags: &EmbedderFlags, file: &FileConfig) -> EmbedderConfig {
    let base = file.embedder.unwrap_or_default();
    EmbedderConfig {
        grid_h: flags.grid_h.unwrap_or(base.grid_h),
        grid_w: flags.grid_w.unwrap_or(base.grid_w),
        projection_dim: flags.dim.unwrap_or(base.projection_dim),
        seed: flags.embed_seed.unwrap_or(base.seed),
    }
}

fn cmd_embed(a: EmbedArgs, file: &FileConfig) -> Result<i32> {
    let started = report::now();
    let cfg = embedder_config(&a.embedder, file);
    let dtype = match a.dtype {
        Some(DtypeArg::F32) => Dtype::F32,
        Some(DtypeArg::F64) => Dtype::F64,
        None => file.dtype.unwrap_or(Dtype::F32),
    };
    let ds = load_dataset(&a.dataset, a.embedder.remap_ten)?;
    let f = embed_reference(&ds, &cfg)?;
    ingest::write_features(&a.out, &f, dtype)?;
    let config = json!({
        "dataset": path_str(&a.dataset),
        "embedder": cfg,
        "dtype": dtype,
        "remap_ten": a.embedder.remap_ten,
    });
    let payload = Payload::Embed(EmbedSummary {
        rows: f.rows(),
        dim: f.dim(),
        embedder_id: f.embedder_id().to_string(),
        output: path_str(&a.out),
    });
    emit(&ReportEnvelope::new("embed", config, started, payload), a.report.as_deref())?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct Side<'a> {
    dataset: Option<String>,
    features: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    embedder: Option<&'a EmbedderConfig>,
}

fn load_side(dataset: &Option<PathBuf>, features: &Option<PathBuf>, cfg: &EmbedderConfig, remap: bool) -> Result<FeatureMatrix> {
    match (dataset, features) {
        (Some(d), None) => embed_reference(&load_dataset(d, remap)?, cfg),
        (None, Some(f)) => ingest::read_features(f),
        _ => Err(Error::InvalidArgument("give exactly one of --*-dataset or --*-features".into())),
    }
}

fn cmd_audit(a: AuditArgs, file: &FileConfig) -> Result<i32> {
    let started = report::now();
    let emb = embedder_config(&a.embedder, file);
    let cfg = AuditConfig {
        m: a.m.or(file.m).unwrap_or(crate::audit::DEFAULT_SUBSET_SIZE),
        seeds: a
            .seeds
            .clone()
            .or_else(|| file.seeds.clone())
            .unwrap_or_else(|| crate::audit::DEFAULT_SEEDS.to_vec()),
        rule: file.rule.unwrap_or_default(),
        frechet: FrechetOptions {
            jitter: a.jitter.or(file.jitter),
        },
    };
    let uses_pixels = a.train_dataset.is_some() || a.test_dataset.is_some();
    let train = load_side(&a.train_dataset, &a.train_features, &emb, a.embedder.remap_ten)?;
    let test = load_side(&a.test_dataset, &a.test_features, &emb, a.embedder.remap_ten)?;
    let rep = audit(&train, &test, &cfg)?;

    if let Some(p) = &a.csv {
        write_text(p, &rep.per_seed_csv())?;
    }
    if let Some(p) = &a.svg {
        write_text(p, &report::audit_svg(&rep))?;
    }
    if let Some(name) = &a.reference {
        let row = reference::lookup(name)
            .ok_or_else(|| Error::InvalidArgument(format!("no reference row named `{name}`")))?;
        let check = reference::check(&rep, &row, 3.0);
        eprintln!(
            "reference {}: within {:.3} ({}), cross {:.3} ({})",
            row.dataset,
            rep.within_mean,
            if check.within_in_band { "in band" } else { "out of band" },
            rep.cross_mean,
            if check.cross_in_band { "in band" } else { "out of band" },
        );
    }
    let side = |d: &Option<PathBuf>, f: &Option<PathBuf>| Side {
        dataset: d.as_deref().map(path_str),
        features: f.as_deref().map(path_str),
        embedder: d.as_ref().map(|_| &emb),
    };
    let config = json!({
        "train": side(&a.train_dataset, &a.train_features),
        "test": side(&a.test_dataset, &a.test_features),
        "audit": cfg,
        "remap_ten": uses_pixels && a.embedder.remap_ten,
        "reference": a.reference,
    });
    let verdict = rep.verdict;
    emit(&ReportEnvelope::new("audit", config, started, Payload::Audit(rep)), a.out.as_deref())?;
    Ok(if a.fail_on_mismatch && verdict == Verdict::Mismatch {
        EXIT_MISMATCH
    } else {
        EXIT_OK
    })
}

fn cmd_is(a: IsArgs, file: &FileConfig) -> Result<i32> {
    let started = report::now();
    let p = ingest::read_probs(&a.probs)?;
    let folds = a.folds.or(file.folds);
    let payload = match folds {
        Some(k) => Payload::InceptionScoreFolds(inception_score_folds(&p, k)?),
        None => Payload::InceptionScore(inception_score(&p)?),
    };
    let config = json!({ "probs": path_str(&a.probs), "folds": folds });
    emit(&ReportEnvelope::new("is", config, started, payload), a.out.as_deref())?;
    Ok(EXIT_OK)
}

fn cmd_remix(a: RemixArgs, file: &FileConfig) -> Result<i32> {
    let started = report::now();
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let (datasets, train_labels, test_labels, classes) = match (&a.train, &a.test) {
        (Some(tr), Some(te)) => {
            let tr = load_dataset(tr, a.remap_ten)?;
            let te = load_dataset(te, a.remap_ten)?;
            let k = a.classes.unwrap_or(tr.class_count.max(te.class_count));
            let (l1, l2) = (tr.labels.clone(), te.labels.clone());
            (Some((tr, te)), l1, l2, k)
        }
        (None, None) => {
            let (Some(p1), Some(p2)) = (&a.train_labels, &a.test_labels) else {
                return Err(Error::InvalidArgument("give --train/--test or --train-labels/--test-labels".into()));
            };
            let l1 = ingest::read_labels(p1)?;
            let l2 = ingest::read_labels(p2)?;
            let max = l1.iter().chain(&l2).copied().max().map_or(1, |m| m + 1);
            (None, l1, l2, a.classes.unwrap_or(max))
        }
        _ => return Err(Error::InvalidArgument("--train and --test go together".into())),
    };
    let plan = remix(&train_labels, &test_labels, classes, seed)?;
    plan.save(&a.out)?;
    if let Some((tr, te)) = &datasets {
        if a.train_out.is_some() || a.test_out.is_some() {
            let (new_tr, new_te) = apply_plan(&plan, tr, te)?;
            if let Some(p) = &a.train_out {
                ingest::write_raw(p, &new_tr)?;
            }
            if let Some(p) = &a.test_out {
                ingest::write_raw(p, &new_te)?;
            }
        }
    }
    let (moved_to_train, moved_to_test) = plan.moved_counts();
    let payload = Payload::Remix(RemixSummary {
        seed,
        new_train: plan.new_train.len(),
        new_test: plan.new_test.len(),
        moved_to_train,
        moved_to_test,
        train_class_counts: class_counts(plan.new_train_labels.iter().copied(), classes),
        test_class_counts: class_counts(plan.new_test_labels.iter().copied(), classes),
        plan_path: Some(path_str(&a.out)),
    });
    let config = json!({
        "train": a.train.as_deref().or(a.train_labels.as_deref()).map(path_str),
        "test": a.test.as_deref().or(a.test_labels.as_deref()).map(path_str),
        "classes": classes,
        "seed": seed,
        "remap_ten": a.remap_ten,
    });
    emit(&ReportEnvelope::new("remix", config, started, payload), a.report.as_deref())?;
    Ok(EXIT_OK)
}

fn cmd_fit(a: FitArgs, file: &FileConfig) -> Result<i32> {
    let started = report::now();
    let g = file.gmm.as_ref();
    let base = GmmConfig::default();
    let cfg = GmmConfig {
        components: a.components.or(g.and_then(|g| g.components)).unwrap_or(base.components),
        seed: a.seed.or(g.and_then(|g| g.seed)).or(file.seed).unwrap_or(base.seed),
        tol: a.tol.or(g.and_then(|g| g.tol)).unwrap_or(base.tol),
        max_iter: a.max_iter.or(g.and_then(|g| g.max_iter)).unwrap_or(base.max_iter),
        reg: a.reg.or(g.and_then(|g| g.reg)),
        covariance: match a.covariance {
            Some(CovArg::Full) => CovarianceKind::Full,
            Some(CovArg::Diagonal) => CovarianceKind::Diagonal,
            None => g.and_then(|g| g.covariance).unwrap_or(base.covariance),
        },
    };
    let f = ingest::read_features(&a.features)?;
    let model = fit_gmm(&f, &cfg)?;
    model.save(&a.out)?;
    let payload = Payload::FitDensity(DensitySummary {
        components: model.weights.len(),
        dim: model.dim,
        iterations: model.iterations,
        converged: model.converged,
        final_mean_log_likelihood: *model.fit_trace.last().unwrap_or(&f64::NAN),
        model_path: path_str(&a.out),
    });
    let config = json!({ "features": path_str(&a.features), "gmm": cfg });
    emit(&ReportEnvelope::new("fit-density", config, started, payload), a.report.as_deref())?;
    Ok(EXIT_OK)
}

fn cmd_bpd(a: BpdArgs) -> Result<i32> {
    let started = report::now();
    let model = GmmModel::load(&a.model)?;
    let train = bpd(&model, &ingest::read_features(&a.train_features)?)?;
    let test = match &a.test_features {
        Some(p) => Some(bpd(&model, &ingest::read_features(p)?)?),
        None => None,
    };
    let config = json!({
        "model": path_str(&a.model),
        "train_features": path_str(&a.train_features),
        "test_features": a.test_features.as_deref().map(path_str),
    });
    emit(
        &ReportEnvelope::new("bpd", config, started, Payload::Bpd(BpdPair { train, test })),
        a.out.as_deref(),
    )?;
    Ok(EXIT_OK)
}

fn cmd_synth(a: SynthArgs, file: &FileConfig) -> Result<i32> {
    let started = report::now();
    let s = file.synth.as_ref();
    let mode = a.mode.or(s.and_then(|s| s.mode)).unwrap_or(MismatchMode::DensitySkew);
    let strength = a.strength.or(s.and_then(|s| s.strength)).unwrap_or(0.8);
    let n_train = a.n_train.or(s.and_then(|s| s.n_train)).unwrap_or(20_000);
    let n_test = a.n_test.or(s.and_then(|s| s.n_test)).unwrap_or(10_000);
    let seed = a.seed.or(s.and_then(|s| s.seed)).or(file.seed).unwrap_or(0);
    let dim = a.dim.or(s.and_then(|s| s.dim)).unwrap_or(16);
    if dim == 0 {
        return Err(Error::InvalidArgument("--dim must be positive".into()));
    }

    let (train_labels, test_labels, k, generator) = if a.pixels {
        let spec: PixelSpec = match &a.spec {
            Some(p) => load_json(p)?,
            None => PixelSpec::preset(),
        };
        let (tr, te) = synth::inject_mismatch_pixels(&spec, mode, strength, (n_train, n_test), seed)?;
        ingest::write_raw(&a.train_out, &tr)?;
        ingest::write_raw(&a.test_out, &te)?;
        (tr.labels, te.labels, spec.weights.len(), serde_json::to_value(&spec)?)
    } else {
        let spec = match &a.spec {
            Some(p) => GeneratorSpec::load(p)?,
            None => synth::preset_three_component(dim, n_train, seed),
        };
        let pair = synth::inject_mismatch(&spec, mode, strength, (n_train, n_test), seed)?;
        ingest::write_features(&a.train_out, &pair.train, Dtype::F64)?;
        ingest::write_features(&a.test_out, &pair.test, Dtype::F64)?;
        let k = spec.components.len();
        (pair.train_labels, pair.test_labels, k, serde_json::to_value(&spec)?)
    };
    let mut outputs = vec![path_str(&a.train_out), path_str(&a.test_out)];
    if let Some(p) = &a.train_labels_out {
        ingest::write_labels(p, &train_labels)?;
        outputs.push(path_str(p));
    }
    if let Some(p) = &a.test_labels_out {
        ingest::write_labels(p, &test_labels)?;
        outputs.push(path_str(p));
    }
    let payload = Payload::Synth(SynthSummary {
        mode: mode.as_str().to_string(),
        strength,
        train_rows: train_labels.len(),
        test_rows: test_labels.len(),
        train_component_counts: synth::component_counts(&train_labels, k),
        test_component_counts: synth::component_counts(&test_labels, k),
        outputs,
    });
    let config: Value = json!({
        "generator": generator,
        "pixels": a.pixels,
        "mode": mode,
        "strength": strength,
        "n_train": n_train,
        "n_test": n_test,
        "seed": seed,
    });
    emit(&ReportEnvelope::new("synth", config, started, payload), a.report.as_deref())?;
    Ok(EXIT_OK)
}
