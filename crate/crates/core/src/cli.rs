//! The `mwd` batch commands: `generate`, `features`, `evaluate`,
//! `importance`.
//!
//! Exit codes: 0 success, 2 configuration error (bad flags, unreadable or
//! unwritable paths), 3 data error (malformed input, missing targets),
//! 4 numeric failure (degenerate or ill-conditioned fits).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::datamodel::{
    parse_labels_csv, parse_mwd_csv, write_labels_csv, write_mwd_csv, Assay, DataError, MaterialRegistry,
};
use crate::features::{extract_features, read_feature_csv, FeatureConfig, FeatureError};
use crate::models::{GpGrid, ModelError, RfParams, SvmParams};
use crate::report::{evaluation_artifacts, importance_csv, importance_text, Provenance};
use crate::synth::{generate_site, SiteSpec, SynthError};
use crate::validation::{make_folds, run_cv_multi, ExperimentData, FoldMode, ModelSpec, Target, ValidationError};

#[derive(Debug, Parser)]
#[command(name = "mwd", version, about = "Assay and material prediction from MWD drilling signals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic site: mwd.csv, labels.csv, truth.csv, spec.json.
    Generate(GenerateArgs),
    /// Extract the per-hole feature matrix from an MWD CSV.
    Features(FeaturesArgs),
    /// Cross-validate a model and write the report, pairs and plots.
    Evaluate(EvaluateArgs),
    /// Rank features by random-forest importance.
    Importance(ImportanceArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    /// JSON site spec; omitted fields take defaults.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Overrides the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub mwd: PathBuf,
    /// Output CSV; provenance and dropped columns go to `<out>.meta.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = crate::features::DEFAULT_EMBED_DIM)]
    pub embed_dim: usize,
    /// Also extract the per-signal features of the pressure ratio.
    #[arg(long)]
    pub pr_channel: bool,
    /// Add the raw SPR2 sum next to its logarithm.
    #[arg(long)]
    pub raw_spr2: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Rf,
    Mvrf,
    Gp,
    Svm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CvArg {
    Random,
    Spatial,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// MWD CSV supplying blast membership; required for `--cv spatial`.
    #[arg(long)]
    pub mwd: Option<PathBuf>,
    /// Assay (`Fe`), comma-separated assays (`Fe,SiO2,Al2O3`) or a material
    /// code (`SHL`).
    #[arg(long)]
    pub target: String,
    #[arg(long, value_enum, default_value_t = ModelArg::Rf)]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value_t = CvArg::Random)]
    pub cv: CvArg,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Lab assay appended to the features.
    #[arg(long)]
    pub augment: Option<String>,
    /// Material presence threshold, percent; presence is strictly above it.
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    /// Trees per forest.
    #[arg(long, default_value_t = 300)]
    pub trees: usize,
    /// SVM box constraint.
    #[arg(long, default_value_t = 1.0)]
    pub svm_c: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ImportanceArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub threshold: f64,
    #[arg(long, default_value_t = 300)]
    pub trees: usize,
    /// Rows in the text listing.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidParams(_) | ModelError::WrongModelKind(_) => CliError::Config(e.to_string()),
            ModelError::TooFewRows { .. }
            | ModelError::InvalidLabel(_)
            | ModelError::SingleClass
            | ModelError::RegistryMismatch { .. }
            | ModelError::Dimension(_)
            | ModelError::Serialization(_) => CliError::Data(e.to_string()),
            ModelError::NonFinite | ModelError::DegenerateTarget | ModelError::IllConditionedKernel => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

impl From<ValidationError> for CliError {
    fn from(e: ValidationError) -> Self {
        match e {
            ValidationError::Model(m) => m.into(),
            ValidationError::AugmentEqualsTarget(_) | ValidationError::UnsupportedTarget(_) => {
                CliError::Config(e.to_string())
            }
            ValidationError::ConstantInput => CliError::Numeric(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::InvalidSpec(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))
}

/// Parses `--target`: one assay, several comma-separated assays, or a
/// material code.
pub fn parse_target(s: &str, threshold: f64) -> Result<Target, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() > 1 {
        let assays = parts
            .iter()
            .map(|p| p.parse::<Assay>().map_err(|_| CliError::Config(format!("unknown assay `{p}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Target::Assays(assays));
    }
    if let Ok(a) = s.parse::<Assay>() {
        return Ok(Target::Assay(a));
    }
    if MaterialRegistry::default().contains(s) {
        return Ok(Target::Material {
            code: s.to_string(),
            threshold,
        });
    }
    Err(CliError::Config(format!("unknown target `{s}`")))
}

fn load_experiment(features: &Path, labels: &Path, mwd: Option<&Path>) -> Result<ExperimentData, CliError> {
    let table = read_feature_csv(&read(features)?)?;
    let labels: BTreeMap<String, _> = parse_labels_csv(&read(labels)?)?
        .into_iter()
        .map(|l| (l.hole_id.clone(), l))
        .collect();
    let blasts: BTreeMap<String, String> = match mwd {
        Some(p) => parse_mwd_csv(&read(p)?)?
            .into_iter()
            .map(|h| (h.hole_id, h.blast_id))
            .collect(),
        None => BTreeMap::new(),
    };
    let blast_ids = table
        .hole_ids
        .iter()
        .map(|h| match (mwd, blasts.get(h)) {
            (None, _) => Ok(String::new()),
            (Some(_), Some(b)) => Ok(b.clone()),
            (Some(_), None) => Err(CliError::Data(format!("hole `{h}` is not in the MWD file"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let row_labels = table.hole_ids.iter().map(|h| labels.get(h).cloned()).collect();
    Ok(ExperimentData::new(table, blast_ids, row_labels))
}

fn cmd_generate(args: &GenerateArgs) -> Result<(), CliError> {
    let mut spec: SiteSpec = match &args.spec {
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| CliError::Config(format!("bad spec: {e}")))?,
        None => SiteSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let (dataset, truth) = generate_site(&spec)?;
    create_dir(&args.out)?;
    let holes: Vec<_> = dataset.signal_sets().cloned().collect();
    let labels: Vec<_> = dataset.labels().flatten().cloned().collect();
    let codes: Vec<&str> = spec.materials.iter().map(|m| m.code.as_str()).collect();
    write(&args.out.join("mwd.csv"), &write_mwd_csv(&holes))?;
    write(&args.out.join("labels.csv"), &write_labels_csv(&labels, &Assay::ALL, &codes))?;
    write(&args.out.join("truth.csv"), &truth.to_csv())?;
    let json = serde_json::to_string_pretty(&spec).expect("spec serializes");
    write(&args.out.join("spec.json"), &(json + "\n"))?;
    log::info!("wrote {} holes, {} labelled", holes.len(), labels.len());
    Ok(())
}

#[derive(Serialize)]
struct FeaturesMeta<'a> {
    provenance: &'a Provenance,
    feature_config: &'a FeatureConfig,
    dropped: &'a [crate::features::DroppedColumn],
}

fn cmd_features(args: &FeaturesArgs) -> Result<(), CliError> {
    let holes = parse_mwd_csv(&read(&args.mwd)?)?;
    let cfg = FeatureConfig {
        embed_dim: args.embed_dim,
        pressure_ratio_channel: args.pr_channel,
        raw_spr2: args.raw_spr2,
        ..FeatureConfig::default()
    };
    let table = extract_features(&holes, &cfg)?;
    for d in &table.dropped {
        log::warn!("dropped column {} (hole {}: {})", d.name, d.hole_id, d.reason);
    }
    write(&args.out, &table.to_csv())?;
    let prov = Provenance::new(0, args);
    let meta = FeaturesMeta {
        provenance: &prov,
        feature_config: &cfg,
        dropped: &table.dropped,
    };
    let mut meta_path = args.out.clone().into_os_string();
    meta_path.push(".meta.json");
    write(
        Path::new(&meta_path),
        &(serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n"),
    )
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let target = parse_target(&args.target, args.threshold)?;
    let augment = args
        .augment
        .as_deref()
        .map(|a| a.parse::<Assay>().map_err(|_| CliError::Config(format!("unknown augment assay `{a}`"))))
        .transpose()?;
    if args.cv == CvArg::Spatial && args.mwd.is_none() {
        return Err(CliError::Config("--cv spatial needs --mwd for blast membership".into()));
    }
    let rf = RfParams {
        n_trees: args.trees,
        seed: args.seed,
        ..RfParams::default()
    };
    let spec = match args.model {
        ModelArg::Rf => ModelSpec::Rf(rf),
        ModelArg::Mvrf => ModelSpec::Mvrf(rf),
        ModelArg::Gp => ModelSpec::Gp(GpGrid::default()),
        ModelArg::Svm => ModelSpec::Svm(SvmParams {
            c: args.svm_c,
            seed: args.seed,
            ..SvmParams::default()
        }),
    };
    let data = load_experiment(&args.features, &args.labels, args.mwd.as_deref())?.restrict(&target, augment);
    let mode = match args.cv {
        CvArg::Random => FoldMode::RandomKFold,
        CvArg::Spatial => FoldMode::LeaveOneBlastOut,
    };
    let plan = make_folds(&data.fold_keys(), mode, args.k, args.seed)?;
    let reports = run_cv_multi(&data, &target, &spec, &plan, augment)?;
    let prov = Provenance::new(args.seed, args);
    create_dir(&args.out)?;
    let several = reports.len() > 1;
    for report in &reports {
        let dir = if several { args.out.join(&report.target) } else { args.out.clone() };
        create_dir(&dir)?;
        for (name, contents) in evaluation_artifacts(report, &prov) {
            write(&dir.join(name), &contents)?;
        }
    }
    Ok(())
}

fn cmd_importance(args: &ImportanceArgs) -> Result<(), CliError> {
    let target = parse_target(&args.target, args.threshold)?;
    let data = load_experiment(&args.features, &args.labels, None)?.restrict(&target, None);
    let ys: Vec<Vec<f64>> = {
        let rows: Vec<Vec<f64>> = data
            .labels
            .iter()
            .map(|l| target.values(l.as_ref().expect("restricted rows are labelled")).expect("restricted"))
            .collect();
        let q = target.names().len();
        (0..q).map(|k| rows.iter().map(|r| r[k]).collect()).collect()
    };
    let rf = RfParams {
        n_trees: args.trees,
        seed: args.seed,
        ..RfParams::default()
    };
    let spec = if ys.len() > 1 { ModelSpec::Mvrf(rf) } else { ModelSpec::Rf(rf) };
    let handle = spec.fit(&data.table, &ys, target.task())?.remove(0);
    let ranked = handle.feature_importance()?;
    let prov = Provenance::new(args.seed, args);
    create_dir(&args.out)?;
    write(&args.out.join("importance.csv"), &importance_csv(&ranked, &prov))?;
    write(&args.out.join("importance.txt"), &importance_text(&ranked, args.top, &prov))
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Features(a) => cmd_features(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Importance(a) => cmd_importance(a),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("mwd: {e}");
            e.exit_code()
        }
    }
}
