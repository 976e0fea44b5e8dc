//! Command surface: `simulate`, `train`, `eval`, `classify`.
//!
//! Every artifact-producing command writes one manifest beside its primary
//! output (`data.csv` -> `data.manifest.json`) holding the resolved config,
//! seeds, input hashes, output paths, and wall-clock timing, so a run can be
//! reproduced from the manifest alone. Exit codes: 0 ok, 2 config/usage,
//! 3 training failure, 4 data/model mismatch, 5 I/O.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use jamdet::dataset::{self, DatasetError, FeatureRecord, Label, LoadOptions};
use jamdet::metrics::RocCurve;
use jamdet::mlp::TrainConfig;
use jamdet::pipeline::{
    self, KernelKind, PipelineError, PipelineModel, PipelineOptions, SvmSettings,
};
use jamdet::simulator::{self, JammerConfig, LeachConfig};

const EXIT_USAGE: u8 = 2;
const EXIT_TRAINING: u8 = 3;
const EXIT_DATA: u8 = 4;
const EXIT_IO: u8 = 5;

#[derive(Parser)]
#[command(
    name = "jamdet",
    version,
    about = "Multi-stage jamming-attack detector and LEACH traffic simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled jamming dataset from the LEACH simulator.
    Simulate(SimulateArgs),
    /// Train the two-stage pipeline on a labeled CSV.
    Train(TrainArgs),
    /// Evaluate a trained model: stage-1-only vs full pipeline, ROC, FNR.
    Eval(EvalArgs),
    /// Classify records (CSV or a single feature vector) with a trained model.
    Classify(ClassifyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Full config JSON: {"leach": {...}, "jammers": [...]}.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Jammer list JSON (overrides the default four-jammer scenario).
    #[arg(long)]
    jammers: Option<PathBuf>,
    /// Simulate clean traffic only.
    #[arg(long, default_value_t = false)]
    no_jammers: bool,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    /// Cluster-head probability.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ActivationArg {
    Relu,
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelArg {
    Rbf,
    Linear,
}

#[derive(Args)]
struct TrainArgs {
    /// Labeled training CSV.
    #[arg(long)]
    data: PathBuf,
    /// Output model JSON path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of PCA-selected feature columns.
    #[arg(long, default_value_t = 10)]
    fs_k: usize,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "64")]
    hidden: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ActivationArg::Relu)]
    activation: ActivationArg,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-4)]
    l2: f64,
    #[arg(long, default_value_t = 1.0)]
    svm_c: f64,
    #[arg(long, value_enum, default_value_t = KernelArg::Rbf)]
    svm_kernel: KernelArg,
    /// RBF gamma; defaults to the 1/(k * variance) heuristic.
    #[arg(long)]
    svm_gamma: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    svm_tol: f64,
    #[arg(long, default_value_t = 30)]
    svm_max_passes: usize,
    /// Stratified subsample cap for SVM training rows.
    #[arg(long, default_value_t = 20_000)]
    svm_cap: usize,
    /// Fraction of the input held out for the training report.
    #[arg(long, default_value_t = 0.15)]
    val_ratio: f64,
    /// Header of the label column (overrides the alias list).
    #[arg(long)]
    label_column: Option<String>,
    /// JSON file mapping dataset label strings to canonical class names.
    #[arg(long)]
    label_map: Option<PathBuf>,
    /// Also dump the PCA feature ranking as CSV (column_name,score).
    #[arg(long)]
    ranking_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Trained model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Labeled test CSV.
    #[arg(long)]
    data: PathBuf,
    /// Output metrics JSON path.
    #[arg(long)]
    out: PathBuf,
    /// Optional ROC plot (SVG) path.
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long)]
    label_map: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Trained model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Input CSV (label column optional and ignored).
    #[arg(long)]
    data: Option<PathBuf>,
    /// One record as 23 comma-separated feature values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    features: Option<Vec<f64>>,
    /// Output verdict CSV path.
    #[arg(long)]
    out: PathBuf,
}

struct CliError {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> CliError {
    CliError {
        code,
        message: message.into(),
    }
}

fn load_error(err: DatasetError) -> CliError {
    let code = match &err {
        DatasetError::Io(_) => EXIT_IO,
        _ => EXIT_DATA,
    };
    fail(code, format!("failed to load dataset: {err}"))
}

fn require_file(path: &Path, flag: &str) -> Result<(), CliError> {
    if !path.is_file() {
        return Err(fail(
            EXIT_USAGE,
            format!("--{flag}: file '{}' does not exist", path.display()),
        ));
    }
    Ok(())
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        let _ = write!(out, "{byte:02x}");
    }
    out
}

fn hash_file(path: &Path) -> Result<String, CliError> {
    let bytes =
        fs::read(path).map_err(|e| fail(EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Serialize)]
struct FileStamp {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    tool_version: String,
    config: serde_json::Value,
    seeds: serde_json::Value,
    inputs: Vec<FileStamp>,
    outputs: Vec<String>,
    wall_seconds: f64,
}

fn manifest_path(primary_out: &Path) -> PathBuf {
    primary_out.with_extension("manifest.json")
}

fn write_manifest(primary_out: &Path, manifest: &RunManifest) -> Result<PathBuf, CliError> {
    let path = manifest_path(primary_out);
    let bytes = serde_json::to_vec_pretty(manifest)
        .map_err(|e| fail(EXIT_IO, format!("manifest serialization failed: {e}")))?;
    fs::write(&path, bytes)
        .map_err(|e| fail(EXIT_IO, format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes)
        .map_err(|e| fail(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn load_options(
    label_column: &Option<String>,
    label_map: &Option<PathBuf>,
    allow_unlabeled: bool,
) -> Result<LoadOptions, CliError> {
    let map: Option<HashMap<String, String>> = match label_map {
        None => None,
        Some(path) => {
            require_file(path, "label-map")?;
            let bytes = fs::read(path)
                .map_err(|e| fail(EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
            Some(serde_json::from_slice(&bytes).map_err(|e| {
                fail(EXIT_USAGE, format!("--label-map: invalid JSON object: {e}"))
            })?)
        }
    };
    Ok(LoadOptions {
        label_column: label_column.clone(),
        label_map: map,
        allow_unlabeled,
    })
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(serde::Deserialize, Serialize, Default)]
struct SimScenario {
    #[serde(default)]
    leach: Option<LeachConfig>,
    #[serde(default)]
    jammers: Option<Vec<JammerConfig>>,
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let mut inputs = Vec::new();
    let mut scenario = SimScenario::default();
    if let Some(path) = &args.config {
        require_file(path, "config")?;
        let bytes = fs::read(path)
            .map_err(|e| fail(EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
        scenario = serde_json::from_slice(&bytes)
            .map_err(|e| fail(EXIT_USAGE, format!("--config: invalid JSON: {e}")))?;
        inputs.push(FileStamp {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
    }
    let mut cfg = scenario.leach.unwrap_or_default();
    if let Some(n) = args.nodes {
        cfg.num_nodes = n;
    }
    if let Some(r) = args.rounds {
        cfg.rounds = r;
    }
    if let Some(p) = args.p {
        cfg.p = p;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    let jammers: Vec<JammerConfig> = if args.no_jammers {
        Vec::new()
    } else if let Some(path) = &args.jammers {
        require_file(path, "jammers")?;
        let bytes = fs::read(path)
            .map_err(|e| fail(EXIT_IO, format!("cannot read {}: {e}", path.display())))?;
        inputs.push(FileStamp {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        serde_json::from_slice(&bytes)
            .map_err(|e| fail(EXIT_USAGE, format!("--jammers: invalid JSON: {e}")))?
    } else {
        scenario
            .jammers
            .unwrap_or_else(|| simulator::default_jammers(cfg.rounds))
    };

    let ds = simulator::generate_dataset(&cfg, &jammers).map_err(|e| match e {
        simulator::SimError::Config(_) => fail(EXIT_USAGE, e.to_string()),
        simulator::SimError::DeadNetwork { .. } => fail(EXIT_TRAINING, e.to_string()),
    })?;
    let mut csv = Vec::new();
    ds.write_csv_to(&mut csv)
        .map_err(|e| fail(EXIT_IO, e.to_string()))?;
    write_bytes(&args.out, &csv)?;

    let manifest = RunManifest {
        command: "simulate".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config: json!({ "leach": cfg, "jammers": jammers }),
        seeds: json!({ "seed": cfg.seed }),
        inputs,
        outputs: vec![args.out.display().to_string()],
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    write_manifest(&args.out, &manifest)?;

    let counts = ds.class_counts();
    let total = ds.len() as f64;
    println!(
        "wrote {} records to {} (normal {:.1}%, constant {:.1}%, random {:.1}%, deceptive {:.1}%, reactive {:.1}%)",
        ds.len(),
        args.out.display(),
        100.0 * counts[0] as f64 / total,
        100.0 * counts[1] as f64 / total,
        100.0 * counts[2] as f64 / total,
        100.0 * counts[3] as f64 / total,
        100.0 * counts[4] as f64 / total,
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

fn training_error(err: PipelineError) -> CliError {
    fail(EXIT_TRAINING, format!("training failed: {err}"))
}

fn cmd_train(args: &TrainArgs) -> Result<(), CliError> {
    let start = Instant::now();
    require_file(&args.data, "data")?;
    if !(args.val_ratio > 0.0 && args.val_ratio < 1.0) {
        return Err(fail(EXIT_USAGE, "--val-ratio must be in (0, 1)"));
    }
    let opts_load = load_options(&args.label_column, &args.label_map, false)?;
    let full = dataset::load_csv_with(&args.data, &opts_load).map_err(load_error)?;
    let input_hash = full.content_hash();

    let (train, val) = full
        .stratified_split(1.0 - args.val_ratio, jamdet::derive_seed(args.seed, "val-split"))
        .map_err(load_error)?;

    let options = PipelineOptions {
        hidden_layers: args.hidden.clone(),
        activation: match args.activation {
            ActivationArg::Relu => jamdet::mlp::Activation::Relu,
            ActivationArg::Tanh => jamdet::mlp::Activation::Tanh,
        },
        mlp: TrainConfig {
            learning_rate: args.lr,
            batch_size: args.batch_size,
            epochs: args.epochs,
            seed: 0, // replaced by the derived seed inside train_pipeline
            l2: args.l2,
        },
        svm: SvmSettings {
            c: args.svm_c,
            kernel: match args.svm_kernel {
                KernelArg::Rbf => KernelKind::Rbf,
                KernelArg::Linear => KernelKind::Linear,
            },
            gamma: args.svm_gamma,
            tol: args.svm_tol,
            max_passes: args.svm_max_passes,
            cap: args.svm_cap,
        },
        fs_k: args.fs_k,
        seed: args.seed,
        dataset_hash: Some(input_hash.clone()),
    };
    let (model, diagnostics) = pipeline::train_pipeline(&train, &options).map_err(training_error)?;
    let report = pipeline::evaluate(&model, &val).map_err(training_error)?;

    model
        .save(&args.out)
        .map_err(|e| fail(EXIT_IO, format!("cannot write model: {e}")))?;

    let report_path = args.out.with_extension("report.json");
    let report_doc = json!({
        "loss_history": diagnostics.loss_history,
        "validation": report,
        "svm": {
            "sweeps": diagnostics.smo_sweeps,
            "updates": diagnostics.smo_updates,
            "converged": diagnostics.smo_converged,
            "rows": diagnostics.svm_rows,
        },
        "train_class_counts": train.class_counts(),
        "validation_class_counts": val.class_counts(),
    });
    write_bytes(
        &report_path,
        &serde_json::to_vec_pretty(&report_doc).expect("report serialization"),
    )?;

    let mut outputs = vec![
        args.out.display().to_string(),
        report_path.display().to_string(),
    ];
    if let Some(path) = &args.ranking_out {
        let mut csv = String::from("column_name,score\n");
        for (name, score) in &diagnostics.ranking {
            let _ = writeln!(csv, "{name},{score}");
        }
        write_bytes(path, csv.as_bytes())?;
        outputs.push(path.display().to_string());
    }

    let manifest = RunManifest {
        command: "train".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config: serde_json::to_value(&options).expect("options serialization"),
        seeds: json!({ "seed": args.seed }),
        inputs: vec![FileStamp {
            path: args.data.display().to_string(),
            sha256: hash_file(&args.data)?,
        }],
        outputs,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    write_manifest(&args.out, &manifest)?;

    println!(
        "model written to {} (validation: mlp {:.2}%, pipeline {:.2}%)",
        args.out.display(),
        100.0 * report.mlp_only.rates.accuracy,
        100.0 * report.mlp_ksvm.rates.accuracy,
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

fn load_model(path: &Path) -> Result<PipelineModel, CliError> {
    require_file(path, "model")?;
    PipelineModel::load(path).map_err(|e| match e {
        PipelineError::Io(_) => fail(EXIT_IO, format!("cannot read model: {e}")),
        _ => fail(EXIT_DATA, format!("invalid model file: {e}")),
    })
}

fn roc_csv(curve: &RocCurve) -> String {
    let mut out = String::from("threshold,fpr,tpr\n");
    for p in &curve.points {
        let _ = writeln!(out, "{},{},{}", p.threshold, p.fpr, p.tpr);
    }
    out
}

fn roc_svg(mlp: Option<&RocCurve>, pipeline: Option<&RocCurve>) -> String {
    let (w, h, margin) = (440.0, 440.0, 40.0);
    let scale_x = |fpr: f64| margin + fpr * (w - 2.0 * margin);
    let scale_y = |tpr: f64| h - margin - tpr * (h - 2.0 * margin);
    let polyline = |curve: &RocCurve, color: &str| {
        let points: Vec<String> = curve
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", scale_x(p.fpr), scale_y(p.tpr)))
            .collect();
        format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        )
    };
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    let _ = write!(
        svg,
        "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n\
         <line x1=\"{m}\" y1=\"{ym}\" x2=\"{xw}\" y2=\"{ym}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{ym}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{ym}\" x2=\"{xw}\" y2=\"{m}\" stroke=\"#cccccc\" stroke-dasharray=\"4\"/>\n\
         <text x=\"{cx}\" y=\"{by}\" font-size=\"12\" text-anchor=\"middle\">false positive rate</text>\n\
         <text x=\"12\" y=\"{cy}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 12 {cy})\">true positive rate</text>\n",
        m = margin,
        ym = h - margin,
        xw = w - margin,
        cx = w / 2.0,
        by = h - 8.0,
        cy = h / 2.0,
    );
    if let Some(curve) = mlp {
        svg.push_str(&polyline(curve, "#888888"));
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#888888\">MLP only (AUC {:.4})</text>\n",
            margin + 10.0,
            margin + 16.0,
            curve.auc
        );
    }
    if let Some(curve) = pipeline {
        svg.push_str(&polyline(curve, "#1f3b99"));
        let _ = write!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#1f3b99\">MLP + KSVM (AUC {:.4})</text>\n",
            margin + 10.0,
            margin + 32.0,
            curve.auc
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let start = Instant::now();
    require_file(&args.data, "data")?;
    let model = load_model(&args.model)?;
    let opts_load = load_options(&args.label_column, &args.label_map, false)?;
    let ds = dataset::load_csv_with(&args.data, &opts_load).map_err(load_error)?;
    let report = pipeline::evaluate(&model, &ds)
        .map_err(|e| fail(EXIT_DATA, format!("evaluation failed: {e}")))?;

    write_bytes(
        &args.out,
        &serde_json::to_vec_pretty(&report).expect("metrics serialization"),
    )?;
    let mut outputs = vec![args.out.display().to_string()];

    let mlp_roc_path = args.out.with_extension("roc_mlp.csv");
    let pipeline_roc_path = args.out.with_extension("roc_pipeline.csv");
    if let Some(curve) = &report.mlp_only.roc {
        write_bytes(&mlp_roc_path, roc_csv(curve).as_bytes())?;
        outputs.push(mlp_roc_path.display().to_string());
    }
    if let Some(curve) = &report.mlp_ksvm.roc {
        write_bytes(&pipeline_roc_path, roc_csv(curve).as_bytes())?;
        outputs.push(pipeline_roc_path.display().to_string());
    }
    if let Some(plot) = &args.plot {
        let svg = roc_svg(report.mlp_only.roc.as_ref(), report.mlp_ksvm.roc.as_ref());
        write_bytes(plot, svg.as_bytes())?;
        outputs.push(plot.display().to_string());
    }

    let manifest = RunManifest {
        command: "eval".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config: json!({
            "model": args.model.display().to_string(),
            "data": args.data.display().to_string(),
        }),
        seeds: json!({}),
        inputs: vec![
            FileStamp {
                path: args.model.display().to_string(),
                sha256: hash_file(&args.model)?,
            },
            FileStamp {
                path: args.data.display().to_string(),
                sha256: hash_file(&args.data)?,
            },
        ],
        outputs,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    write_manifest(&args.out, &manifest)?;

    println!(
        "evaluated {} records: mlp-only accuracy {:.2}% (FN {}), pipeline accuracy {:.2}% (FN {})",
        report.records,
        100.0 * report.mlp_only.rates.accuracy,
        report.mlp_only.rates.false_negatives,
        100.0 * report.mlp_ksvm.rates.accuracy,
        report.mlp_ksvm.rates.false_negatives,
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

fn cmd_classify(args: &ClassifyArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let model = load_model(&args.model)?;
    let mut inputs = vec![FileStamp {
        path: args.model.display().to_string(),
        sha256: hash_file(&args.model)?,
    }];

    let records: Vec<FeatureRecord> = match (&args.data, &args.features) {
        (Some(_), Some(_)) | (None, None) => {
            return Err(fail(
                EXIT_USAGE,
                "provide exactly one of --data or --features",
            ));
        }
        (Some(path), None) => {
            require_file(path, "data")?;
            inputs.push(FileStamp {
                path: path.display().to_string(),
                sha256: hash_file(path)?,
            });
            let opts = LoadOptions {
                allow_unlabeled: true,
                ..LoadOptions::default()
            };
            dataset::load_csv_with(path, &opts)
                .map_err(load_error)?
                .records
        }
        (None, Some(values)) => {
            let rec = FeatureRecord::from_features(values, Label::Normal)
                .map_err(|e| fail(EXIT_DATA, format!("--features: {e}")))?;
            vec![rec]
        }
    };

    let mut out = String::from("index,stage1,stage2_invoked,decision,final\n");
    for (i, rec) in records.iter().enumerate() {
        let verdict = model.classify(rec).map_err(|e| match e {
            PipelineError::Shape(_) => fail(EXIT_DATA, format!("record {i}: {e}")),
            other => fail(EXIT_DATA, format!("record {i}: {other}")),
        })?;
        let decision = verdict
            .stage2_decision
            .map(|d| d.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{i},{},{},{decision},{}",
            verdict.stage1_label, verdict.stage2_invoked, verdict.final_label
        );
    }
    write_bytes(&args.out, out.as_bytes())?;

    let manifest = RunManifest {
        command: "classify".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config: json!({
            "model": args.model.display().to_string(),
            "records": records.len(),
        }),
        seeds: json!({}),
        inputs,
        outputs: vec![args.out.display().to_string()],
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    write_manifest(&args.out, &manifest)?;

    eprintln!("classified {} records", records.len());
    Ok(())
}

pub fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => err.exit(), // clap uses exit code 2 for usage errors
    };
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Classify(args) => cmd_classify(args),
    };
    if let Err(err) = result {
        eprintln!("error: {}", err.message);
        std::process::exit(err.code as i32);
    }
}
