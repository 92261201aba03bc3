//! The `nesy` command line.
//!
//! One verb per invocation. Exit codes: 0 success, 1 usage error, 2 data
//! error (missing or malformed files, verification mismatches), 3 numeric
//! failure (non-finite loss, gradient check over tolerance).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::datagen::{
    generate_dataset, read_records, verify_examples, write_records, Category, DatagenError,
    DatasetSplit, GenerationSpec, Scenario, SplitName,
};
use crate::embeddings::{load_embeddings, EmbeddingError, EmbeddingTable};
use crate::model::{check_variant, ModelError, ModelParams, Variant};
use crate::nn::{Checkpoint, NnError};
use crate::train::{
    emit_report, evaluate, ood_eval, read_report, train_with_progress, Condition, Metrics,
    OraclePredictor, Predictor, Report, ReportError, TrainConfig, TrainError, TrainedModel,
};

/// Directory holding `train.jsonl`, `dev.jsonl` and `test.jsonl`, used when
/// no explicit path is given.
pub const DATA_DIR_ENV: &str = "NESY_DATA_DIR";

/// Largest relative error `grad-check` accepts.
pub const GRAD_TOLERANCE: f64 = 1e-4;

const ORACLE_MODEL: &str = "oracle";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

fn data(context: impl std::fmt::Display, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{context}: {e}"))
}

impl From<DatagenError> for CliError {
    fn from(e: DatagenError) -> Self {
        match e {
            DatagenError::InvalidSpec(m) => CliError::Usage(m),
            e => CliError::Data(e.to_string()),
        }
    }
}

impl From<NnError> for CliError {
    fn from(e: NnError) -> Self {
        match e {
            NnError::NonFiniteLoss(_) => CliError::Numeric(e.to_string()),
            e => CliError::Data(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Nn(e) => e.into(),
            e => CliError::Data(e.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::NonFiniteLoss { .. } => CliError::Numeric(e.to_string()),
            TrainError::InvalidConfig(m) => CliError::Usage(m),
            TrainError::Model(e) => e.into(),
            e => CliError::Data(e.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EmbeddingError> for CliError {
    fn from(e: EmbeddingError) -> Self {
        CliError::Data(format!("embeddings: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "nesy",
    version,
    about = "Deductive reasoning datasets and memory attention networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a depth-balanced dataset as JSON lines.
    Generate(GenerateArgs),
    /// Re-derive every label and depth of a dataset with the logic oracle.
    Verify(VerifyArgs),
    /// Train a model.
    Train(TrainArgs),
    /// Accuracy of a model on a dataset, overall and per depth.
    Eval(EvalArgs),
    /// Accuracy on a dataset as given and with every context shuffled.
    OodEval(OodArgs),
    /// Merge report files and print them as a table.
    Report(ReportArgs),
    /// Check analytic gradients against finite differences at tiny sizes.
    GradCheck(GradArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CategoryArg {
    Animal,
    People,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NegationArg {
    True,
    False,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    /// Published full-size split sizes for depths 2 to 5.
    Table2,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Dev,
    Test,
}

impl From<SplitArg> for SplitName {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => SplitName::Train,
            SplitArg::Dev => SplitName::Dev,
            SplitArg::Test => SplitName::Test,
        }
    }
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "all")]
    category: CategoryArg,
    /// Use rules with negated conditions and conclusions.
    #[arg(long, value_enum, default_value = "both")]
    negation: NegationArg,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5")]
    depths: Vec<u32>,
    /// Question pairs per depth; each pair adds one true and one false example.
    #[arg(long, default_value_t = 1000)]
    counts: usize,
    /// Split named in the example ids.
    #[arg(long, value_enum, default_value = "train")]
    split: SplitArg,
    /// Write train/dev/test files of a preset size into the `--out` directory.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Any configuration key, as `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    dev: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Checkpoint to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report to write (JSON, with a `.tsv` table beside it).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Print the resolved configuration and stop.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Checkpoint file, or `oracle` for the logic oracle.
    #[arg(long)]
    model: String,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OodArgs {
    /// Checkpoint file, or `oracle` for the logic oracle.
    #[arg(long)]
    model: String,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Report JSON files. Repeatable.
    #[arg(long = "in", required = true)]
    inputs: Vec<PathBuf>,
    /// Merged report to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GradArgs {
    /// One variant, or every variant when omitted.
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long, default_value_t = 200)]
    probes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Runs one invocation, printing to the process's stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

/// [`run`] with explicit output streams. `argv[0]` is the program name.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let text = e.render().to_string();
            if shown {
                let _ = write!(out, "{text}");
                return 0;
            }
            let _ = write!(err, "{text}");
            return 1;
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Train(a) => train_cmd(a, out, err),
        Command::Eval(a) => eval_cmd(a, out),
        Command::OodEval(a) => ood_cmd(a, out),
        Command::Report(a) => report_cmd(a, out),
        Command::GradCheck(a) => grad_cmd(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn io(e: std::io::Error) -> CliError {
    CliError::Data(format!("output: {e}"))
}

fn scenarios(category: CategoryArg, negation: NegationArg) -> Vec<Scenario> {
    Scenario::all()
        .into_iter()
        .filter(|s| match category {
            CategoryArg::Animal => s.category == Category::Animal,
            CategoryArg::People => s.category == Category::People,
            CategoryArg::All => true,
        })
        .filter(|s| match negation {
            NegationArg::True => s.negation_rules,
            NegationArg::False => !s.negation_rules,
            NegationArg::Both => true,
        })
        .collect()
}

fn generate(a: GenerateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let scen = scenarios(a.category, a.negation);
    if let Some(Preset::Table2) = a.preset {
        let mut spec = GenerationSpec::full_size(a.seed);
        spec.scenarios = scen;
        let splits = generate_dataset(&spec)?;
        std::fs::create_dir_all(&a.out).map_err(|e| data(a.out.display(), e))?;
        let mut paths = Vec::new();
        for (name, split) in &splits {
            let path = a.out.join(format!("{}.jsonl", name.as_str()));
            write_records(split, &path).map_err(|e| data(path.display(), e))?;
            paths.push(format!(
                "{} {} {}",
                name.as_str(),
                split.len(),
                path.display()
            ));
        }
        writeln!(
            out,
            "generated table2 preset with seed {}: {}",
            a.seed,
            paths.join(", ")
        )
        .map_err(io)?;
        return Ok(());
    }
    let split: SplitName = a.split.into();
    let spec = GenerationSpec::single_split(scen, &a.depths, split, 2 * a.counts, a.seed);
    let mut splits = generate_dataset(&spec)?;
    let examples = splits
        .remove(&split)
        .unwrap_or_else(|| DatasetSplit::new(split, vec![]));
    write_records(&examples, &a.out).map_err(|e| data(a.out.display(), e))?;
    let depths: Vec<String> = a.depths.iter().map(u32::to_string).collect();
    writeln!(
        out,
        "generated {} examples (depths {}, {} pairs per depth, seed {}) -> {}",
        examples.len(),
        depths.join(","),
        a.counts,
        a.seed,
        a.out.display()
    )
    .map_err(io)
}

fn read_split(path: &Path, name: SplitName) -> Result<DatasetSplit, CliError> {
    read_records(path, name).map_err(|e| data(path.display(), e))
}

fn verify(a: VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let split = read_split(&a.input, SplitName::Test)?;
    let r = verify_examples(&split.examples);
    writeln!(
        out,
        "verified {} examples: {} label mismatches, {} depth mismatches ({} depths checked), {} unparseable",
        r.total, r.label_mismatches, r.depth_mismatches, r.depth_checked, r.errors
    )
    .map_err(io)?;
    if r.mismatches() > 0 {
        return Err(CliError::Data(format!(
            "{} examples disagree with the oracle",
            r.mismatches()
        )));
    }
    Ok(())
}

fn env_data_path(split: SplitName) -> Option<PathBuf> {
    std::env::var_os(DATA_DIR_ENV)
        .map(|d| PathBuf::from(d).join(format!("{}.jsonl", split.as_str())))
}

fn load_table(path: Option<&Path>) -> Result<EmbeddingTable, CliError> {
    match path {
        Some(p) => load_embeddings(p).map_err(|e| data(p.display(), e)),
        None => Ok(EmbeddingTable::from_env_or_bundled()?),
    }
}

fn resolve_config(a: &TrainArgs) -> Result<TrainConfig, CliError> {
    let mut c = TrainConfig::default();
    if let Some(p) = &a.config {
        let text = std::fs::read_to_string(p).map_err(|e| data(p.display(), e))?;
        c.apply_text(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
    }
    for s in &a.sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got {s:?}")))?;
        c.set(k, v).map_err(CliError::Usage)?;
    }
    if let Some(v) = a.variant {
        c.variant = v;
    }
    if let Some(v) = a.epochs {
        c.epochs = v;
    }
    if let Some(v) = a.lr {
        c.learning_rate = v;
    }
    if let Some(v) = a.seed {
        c.seed = v;
    }
    for (flag, slot) in [
        (&a.train, &mut c.train_path),
        (&a.dev, &mut c.dev_path),
        (&a.test, &mut c.test_path),
        (&a.embeddings, &mut c.embeddings_path),
    ] {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    }
    c.validate().map_err(CliError::Usage)?;
    Ok(c)
}

fn train_cmd(a: TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let config = resolve_config(&a)?;
    writeln!(out, "{config}").map_err(io)?;
    if a.dry_run {
        return Ok(());
    }
    let train_path = config
        .train_path
        .clone()
        .or_else(|| env_data_path(SplitName::Train))
        .ok_or_else(|| {
            CliError::Data(format!(
                "no training data: set `train` in the config, pass --train, or set {DATA_DIR_ENV}"
            ))
        })?;
    let train_split = read_split(&train_path, SplitName::Train)?;
    let dev_path = config
        .dev_path
        .clone()
        .or_else(|| env_data_path(SplitName::Dev).filter(|p| p.exists()));
    let dev_split = match &dev_path {
        Some(p) => read_split(p, SplitName::Dev)?,
        None => {
            writeln!(
                err,
                "no dev split given; tracking accuracy on the training split"
            )
            .map_err(io)?;
            DatasetSplit::new(SplitName::Dev, train_split.examples.clone())
        }
    };
    let test_path = config
        .test_path
        .clone()
        .or_else(|| env_data_path(SplitName::Test).filter(|p| p.exists()));
    let test_split = test_path
        .as_deref()
        .map(|p| read_split(p, SplitName::Test))
        .transpose()?;
    let table = load_table(config.embeddings_path.as_deref())?;

    let outcome = train_with_progress(&config, &table, &train_split, &dev_split, |s| {
        let _ = writeln!(
            err,
            "epoch {} loss {:.6} dev {:.4}",
            s.epoch, s.loss, s.dev_accuracy
        );
    })?;
    let final_loss = outcome
        .history
        .epoch_losses
        .last()
        .copied()
        .unwrap_or(f64::NAN);
    let mut summary = format!(
        "trained {} for {} epochs: final loss {final_loss:.6}, dev accuracy {:.4}",
        config.variant,
        config.epochs,
        outcome
            .history
            .dev_accuracy
            .last()
            .copied()
            .unwrap_or(f64::NAN)
    );
    let mut report = Report::with_history(&outcome.history);
    report.note("config", &config);
    let dev_metrics = evaluate(&outcome.model, &dev_split, 0.5)?;
    report.add("dev", &dev_metrics);
    if let Some(test) = &test_split {
        let m = evaluate(&outcome.model, test, 0.5)?;
        summary.push_str(&format!(", test accuracy {:.4}", m.accuracy()));
        report.add("test", &m);
    }
    writeln!(out, "{summary}").map_err(io)?;

    if let Some(path) = &a.out {
        let mut ck = outcome.model.params.to_checkpoint();
        if config.train_embeddings {
            let vectors = path.with_extension("vectors.txt");
            outcome
                .model
                .table
                .save(&vectors)
                .map_err(|e| data(vectors.display(), e))?;
            ck.header
                .push(("embeddings".into(), vectors.display().to_string()));
            writeln!(out, "embeddings {}", vectors.display()).map_err(io)?;
        }
        ck.write(path).map_err(|e| data(path.display(), e))?;
        writeln!(out, "checkpoint {}", path.display()).map_err(io)?;
    }
    if let Some(path) = &a.report {
        write_report(&report, path, out)?;
    }
    Ok(())
}

fn write_report(report: &Report, path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let (json, tsv) = emit_report(report, path)?;
    writeln!(out, "report {}", json.display()).map_err(io)?;
    writeln!(out, "table {}", tsv.display()).map_err(io)
}

enum Loaded {
    Oracle,
    Model(TrainedModel),
}

impl Predictor for Loaded {
    fn predict(&self, e: &crate::datagen::Example) -> Result<f64, ModelError> {
        match self {
            Loaded::Oracle => OraclePredictor.predict(e),
            Loaded::Model(m) => m.predict(e),
        }
    }
}

fn load_model(spec: &str, embeddings: Option<&Path>) -> Result<Loaded, CliError> {
    if spec == ORACLE_MODEL {
        return Ok(Loaded::Oracle);
    }
    let ck = Checkpoint::read(spec).map_err(|e| data(spec, e))?;
    let params = ModelParams::from_checkpoint(&ck).map_err(|e| data(spec, e))?;
    let saved = ck.header_value("embeddings").map(PathBuf::from);
    let table = load_table(embeddings.or(saved.as_deref()))?;
    if table.dimension() != params.config.embed {
        return Err(CliError::Data(format!(
            "embedding dimension {} does not match the model's {}",
            table.dimension(),
            params.config.embed
        )));
    }
    Ok(Loaded::Model(TrainedModel { params, table }))
}

fn depth_summary(m: &Metrics) -> String {
    let mut s = format!(
        "accuracy {:.4} ({}/{})",
        m.accuracy(),
        m.overall.n_correct,
        m.overall.n_total
    );
    for (d, c) in &m.by_depth {
        s.push_str(&format!("; depth {d} {:.4}", c.accuracy()));
    }
    s
}

fn eval_cmd(a: EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&a.threshold) {
        return Err(CliError::Usage(format!(
            "threshold must be in [0, 1], got {}",
            a.threshold
        )));
    }
    let model = load_model(&a.model, a.embeddings.as_deref())?;
    let split = read_split(&a.input, SplitName::Test)?;
    let m = evaluate(&model, &split, a.threshold)?;
    writeln!(out, "{}", depth_summary(&m)).map_err(io)?;
    if let Some(path) = &a.report {
        let mut r = Report::default();
        r.add("eval", &m)
            .note("model", &a.model)
            .note("data", a.input.display());
        write_report(&r, path, out)?;
    }
    Ok(())
}

fn ood_cmd(a: OodArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(&a.model, a.embeddings.as_deref())?;
    let split = read_split(&a.input, SplitName::Test)?;
    let r = ood_eval(&model, &split, a.seed)?;
    writeln!(
        out,
        "original {:.4}, shuffled {:.4}, delta {:+.4}",
        r.original.accuracy(),
        r.shuffled.accuracy(),
        r.shuffled.accuracy() - r.original.accuracy()
    )
    .map_err(io)?;
    if let Some(path) = &a.report {
        let mut rep = Report::default();
        rep.add("original", &r.original)
            .add("shuffled", &r.shuffled)
            .note("model", &a.model)
            .note("seed", a.seed);
        write_report(&rep, path, out)?;
    }
    Ok(())
}

fn report_cmd(a: ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut reports = Vec::new();
    for p in &a.inputs {
        reports.push(read_report(p).map_err(|e| data(p.display(), e))?);
    }
    let merged = if reports.len() == 1 {
        reports.pop().unwrap_or_default()
    } else {
        merge(&a.inputs, reports)
    };
    write!(out, "{}", merged.to_tsv()).map_err(io)?;
    if let Some(path) = &a.out {
        write_report(&merged, path, out)?;
    }
    Ok(())
}

/// Conditions of several reports side by side, each prefixed with its
/// file stem.
fn merge(paths: &[PathBuf], reports: Vec<Report>) -> Report {
    let mut merged = Report::default();
    let mut notes = BTreeMap::new();
    for (path, r) in paths.iter().zip(reports) {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        for c in r.conditions {
            merged.conditions.push(Condition {
                condition: format!("{stem}/{}", c.condition),
                ..c
            });
        }
        for (k, v) in r.notes {
            notes.insert(format!("{stem}/{k}"), v);
        }
    }
    merged.notes = notes;
    merged
}

fn grad_cmd(a: GradArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.probes == 0 {
        return Err(CliError::Usage("--probes must be positive".into()));
    }
    let variants = match a.variant {
        Some(v) => vec![v],
        None => Variant::ALL.to_vec(),
    };
    let mut worst: f64 = 0.0;
    for v in variants {
        let r = check_variant(v, a.probes, a.seed)?;
        worst = worst.max(r.max_relative_error);
        writeln!(
            out,
            "{v}: max relative error {:.3e} over {} probes",
            r.max_relative_error,
            r.probes.len()
        )
        .map_err(io)?;
    }
    if worst.is_nan() || worst >= GRAD_TOLERANCE {
        return Err(CliError::Numeric(format!(
            "max relative error {worst:.3e} is not below {GRAD_TOLERANCE:e}"
        )));
    }
    Ok(())
}
