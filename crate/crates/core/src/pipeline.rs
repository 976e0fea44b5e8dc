//! The multi-stage detector: scale, select features, run the five-class MLP,
//! and re-check every normal verdict with the binary kernelized SVM.
//!
//! Stage 2 can only turn a normal verdict into an attack, never the reverse,
//! so the pipeline's false negatives are always a subset of stage 1's.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError, FeatureRecord, Label, Scaler};
use crate::features::{self, FeaturesError};
use crate::ksvm::{self, BinaryVerdict, Kernel, KsvmError, KsvmModel, SmoParams};
use crate::metrics::{self, ConfusionMatrix, MetricsError, Rates, RocCurve};
use crate::mlp::{self, Activation, MlpError, MlpModel, TrainConfig};

pub const MODEL_VERSION: u32 = 1;

/// Broken-stick component count: keep the leading components whose
/// eigenvalue exceeds the expected share of variance under a random
/// partition, sum_{k=i..d} 1/k on standardized data. Components below that
/// bar carry no shared structure worth ranking by.
fn broken_stick_depth(explained_variance: &[f64]) -> usize {
    let d = explained_variance.len();
    let mut depth = 0;
    for (i, &ev) in explained_variance.iter().enumerate() {
        let bar: f64 = (i..d).map(|k| 1.0 / (k + 1) as f64).sum();
        if ev > bar {
            depth += 1;
        } else {
            break;
        }
    }
    depth.max(1)
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("class '{0}' has no training records")]
    EmptyClass(Label),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("model error: {0}")]
    Model(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Features(#[from] FeaturesError),
    #[error(transparent)]
    Mlp(#[from] MlpError),
    #[error(transparent)]
    Ksvm(#[from] KsvmError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

/// Stage-2 training settings; `gamma = None` uses the scale heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmSettings {
    pub c: f64,
    pub kernel: KernelKind,
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_passes: usize,
    /// Stratified subsample cap on the SVM training rows.
    pub cap: usize,
}

impl Default for SvmSettings {
    fn default() -> Self {
        SvmSettings {
            c: 1.0,
            kernel: KernelKind::Rbf,
            gamma: None,
            tol: 1e-3,
            max_passes: 30,
            cap: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    /// Hidden layer widths of the stage-1 MLP.
    pub hidden_layers: Vec<usize>,
    pub activation: Activation,
    pub mlp: TrainConfig,
    pub svm: SvmSettings,
    /// Number of columns kept by PCA feature selection.
    pub fs_k: usize,
    /// Master seed; all sub-seeds are derived from it.
    pub seed: u64,
    /// Provenance hash recorded in the model; defaults to the canonical hash
    /// of the training dataset.
    pub dataset_hash: Option<String>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            hidden_layers: vec![64],
            activation: Activation::Relu,
            mlp: TrainConfig::default(),
            svm: SvmSettings::default(),
            fs_k: 10,
            seed: 0,
            dataset_hash: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineMetadata {
    pub seed: u64,
    pub fs_k: usize,
    pub hidden_layers: Vec<usize>,
    pub activation: Activation,
    pub mlp_config: TrainConfig,
    pub svm_settings: SvmSettings,
    pub dataset_hash: String,
    pub train_records: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineModel {
    pub version: u32,
    pub scaler: Scaler,
    /// Indices into the canonical 23-feature vector, in ranking order.
    pub selected_columns: Vec<usize>,
    pub selected_names: Vec<String>,
    pub mlp: MlpModel,
    pub ksvm: KsvmModel,
    pub metadata: PipelineMetadata,
}

/// Training byproducts that don't belong in the model file.
#[derive(Debug, Clone, Serialize)]
pub struct TrainDiagnostics {
    pub loss_history: Vec<f64>,
    pub ranking: Vec<(String, f64)>,
    pub smo_sweeps: usize,
    pub smo_updates: u64,
    pub smo_converged: bool,
    pub svm_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub final_label: Label,
    pub stage1_label: Label,
    pub stage1_probs: [f64; 5],
    pub stage2_invoked: bool,
    pub stage2_decision: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BatchTiming {
    pub records: usize,
    pub seconds: f64,
    pub records_per_second: f64,
}

/// Trains the full pipeline on `train`: scaler, PCA ranking + top-k
/// selection, the five-class MLP, and the binary KSVM on the (capped)
/// attack-vs-normal collapse of the same split.
pub fn train_pipeline(
    train: &Dataset,
    opts: &PipelineOptions,
) -> Result<(PipelineModel, TrainDiagnostics), PipelineError> {
    for label in Label::ALL {
        if train.count(label) == 0 {
            return Err(PipelineError::EmptyClass(label));
        }
    }
    if opts.fs_k == 0 || opts.fs_k > train.column_names.len() {
        return Err(PipelineError::Shape(format!(
            "fs_k must be in 1..={}, got {}",
            train.column_names.len(),
            opts.fs_k
        )));
    }

    let scaler = Scaler::fit(train)?;
    let standardized = scaler.transform_matrix(&train.feature_matrix());

    // Rank columns by their participation in the structural components
    // picked by the broken-stick rule. Ranking over all components would
    // collapse to a constant per column on standardized data, and a fixed
    // component count lets unit-eigenvalue noise axes into the score.
    let width = train.column_names.len();
    let pca = features::pca_fit(&standardized, width)?;
    let depth = broken_stick_depth(&pca.explained_variance);
    let truncated = features::PcaModel {
        components: pca.components[..depth].to_vec(),
        explained_variance: pca.explained_variance[..depth].to_vec(),
        column_means: pca.column_means.clone(),
    };
    let ranking = features::rank_features(&truncated);
    let selected_columns = ranking.top_k(opts.fs_k);
    let selected_names: Vec<String> = selected_columns
        .iter()
        .map(|&c| train.column_names[c].clone())
        .collect();
    let projected: Vec<Vec<f64>> = standardized
        .iter()
        .map(|row| features::project(row, &selected_columns))
        .collect();
    let labels = train.labels();

    let mut layer_sizes = vec![opts.fs_k];
    layer_sizes.extend_from_slice(&opts.hidden_layers);
    layer_sizes.push(mlp::NUM_CLASSES);
    let mut mlp_model = mlp::init(
        &layer_sizes,
        opts.activation,
        crate::derive_seed(opts.seed, "mlp-init"),
    )?;
    let mlp_cfg = TrainConfig {
        seed: crate::derive_seed(opts.seed, "mlp-train"),
        ..opts.mlp
    };
    let loss_history = mlp_model.train(&projected, &labels, &mlp_cfg)?;

    let binary: Vec<i8> = labels
        .iter()
        .map(|l| if l.is_attack() { 1 } else { -1 })
        .collect();
    let (svm_x, svm_y, subsample) = ksvm::stratified_subsample(
        &projected,
        &binary,
        opts.svm.cap,
        crate::derive_seed(opts.seed, "svm-subsample"),
    );
    let kernel = match opts.svm.kernel {
        KernelKind::Linear => Kernel::Linear,
        KernelKind::Rbf => Kernel::Rbf {
            gamma: opts.svm.gamma.unwrap_or_else(|| ksvm::rbf_gamma_scale(&svm_x)),
        },
    };
    let smo = SmoParams {
        c: opts.svm.c,
        tol: opts.svm.tol,
        max_passes: opts.svm.max_passes,
        seed: crate::derive_seed(opts.seed, "smo"),
        ..SmoParams::default()
    };
    let (mut ksvm_model, report) = ksvm::train_smo(&svm_x, &svm_y, kernel, &smo)?;
    ksvm_model.subsample = Some(subsample);

    let metadata = PipelineMetadata {
        seed: opts.seed,
        fs_k: opts.fs_k,
        hidden_layers: opts.hidden_layers.clone(),
        activation: opts.activation,
        mlp_config: opts.mlp,
        svm_settings: opts.svm,
        dataset_hash: opts
            .dataset_hash
            .clone()
            .unwrap_or_else(|| train.content_hash()),
        train_records: train.len(),
    };
    let model = PipelineModel {
        version: MODEL_VERSION,
        scaler,
        selected_columns,
        selected_names,
        mlp: mlp_model,
        ksvm: ksvm_model,
        metadata,
    };
    let diagnostics = TrainDiagnostics {
        loss_history,
        ranking: ranking
            .0
            .iter()
            .map(|&(idx, score)| (train.column_names[idx].clone(), score))
            .collect(),
        smo_sweeps: report.sweeps,
        smo_updates: report.updates,
        smo_converged: report.converged,
        svm_rows: svm_x.len(),
    };
    Ok((model, diagnostics))
}

impl PipelineModel {
    fn project_record(&self, rec: &FeatureRecord) -> Result<Vec<f64>, PipelineError> {
        let features = rec.features();
        if features.len() != self.scaler.means.len() {
            return Err(PipelineError::Shape(format!(
                "record has {} features, model expects {}",
                features.len(),
                self.scaler.means.len()
            )));
        }
        let scaled = self.scaler.transform_vec(&features);
        Ok(features::project(&scaled, &self.selected_columns))
    }

    /// Stage 1 labels the record; a normal verdict is re-checked by the SVM.
    /// When the SVM overrides, the final class is the most likely attack
    /// class under the MLP's probabilities.
    pub fn classify(&self, rec: &FeatureRecord) -> Result<Verdict, PipelineError> {
        let x = self.project_record(rec)?;
        let (stage1_label, probs) = self.mlp.predict(&x)?;
        let mut stage1_probs = [0.0; 5];
        stage1_probs.copy_from_slice(&probs);
        if stage1_label != Label::Normal {
            return Ok(Verdict {
                final_label: stage1_label,
                stage1_label,
                stage1_probs,
                stage2_invoked: false,
                stage2_decision: None,
            });
        }
        let decision = self.ksvm.decision(&x)?;
        let final_label = match self.ksvm.predict_binary(&x)? {
            BinaryVerdict::Normal => Label::Normal,
            BinaryVerdict::Attack => {
                let mut best = 1;
                for i in 2..5 {
                    if stage1_probs[i] > stage1_probs[best] {
                        best = i;
                    }
                }
                Label::from_index(best).unwrap()
            }
        };
        Ok(Verdict {
            final_label,
            stage1_label,
            stage1_probs,
            stage2_invoked: true,
            stage2_decision: Some(decision),
        })
    }

    /// Order-preserving batch classification with a throughput summary.
    pub fn classify_batch(
        &self,
        ds: &Dataset,
    ) -> Result<(Vec<Verdict>, BatchTiming), PipelineError> {
        let start = Instant::now();
        let verdicts: Result<Vec<Verdict>, PipelineError> =
            ds.records.iter().map(|rec| self.classify(rec)).collect();
        let verdicts = verdicts?;
        let seconds = start.elapsed().as_secs_f64();
        let timing = BatchTiming {
            records: verdicts.len(),
            seconds,
            records_per_second: if seconds > 0.0 {
                verdicts.len() as f64 / seconds
            } else {
                f64::INFINITY
            },
        };
        Ok((verdicts, timing))
    }

    /// Attack score for ROC curves: 1 - P(Normal) when stage 2 never ran,
    /// otherwise blended with the calibrated SVM decision.
    pub fn attack_score(verdict: &Verdict) -> f64 {
        let mlp_score = 1.0 - verdict.stage1_probs[0];
        match verdict.stage2_decision {
            None => mlp_score,
            Some(d) => mlp_score.max(1.0 / (1.0 + (-d).exp())),
        }
    }

    pub fn to_json(&self) -> Result<Vec<u8>, PipelineError> {
        Ok(serde_json::to_vec_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), PipelineError> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<PipelineModel, PipelineError> {
        let bytes = fs::read(path)?;
        let model: PipelineModel = serde_json::from_slice(&bytes)?;
        if model.version != MODEL_VERSION {
            return Err(PipelineError::Model(format!(
                "unsupported model version {} (expected {MODEL_VERSION})",
                model.version
            )));
        }
        Ok(model)
    }
}

/// Metrics for one configuration (stage 1 alone, or the full pipeline).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageEval {
    pub confusion: ConfusionMatrix,
    pub rates: Rates,
    pub auc: Option<f64>,
    #[serde(skip)]
    pub roc: Option<RocCurve>,
}

/// Side-by-side evaluation of the MLP alone and the full two-stage pipeline
/// on a labeled dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub records: usize,
    pub mlp_only: StageEval,
    pub mlp_ksvm: StageEval,
}

pub fn evaluate(model: &PipelineModel, ds: &Dataset) -> Result<EvalReport, PipelineError> {
    let (verdicts, _) = model.classify_batch(ds)?;
    evaluate_verdicts(&ds.labels(), &verdicts)
}

pub fn evaluate_verdicts(
    truth: &[Label],
    verdicts: &[Verdict],
) -> Result<EvalReport, PipelineError> {
    let stage1: Vec<Label> = verdicts.iter().map(|v| v.stage1_label).collect();
    let finals: Vec<Label> = verdicts.iter().map(|v| v.final_label).collect();
    let is_attack: Vec<bool> = truth.iter().map(|l| l.is_attack()).collect();
    let both_classes = is_attack.iter().any(|&a| a) && is_attack.iter().any(|&a| !a);

    let stage_eval = |pred: &[Label], scores: Vec<f64>| -> Result<StageEval, PipelineError> {
        let confusion = metrics::confusion(truth, pred)?;
        let rates = metrics::rates(&confusion);
        let roc = if both_classes {
            Some(metrics::roc(&scores, &is_attack)?)
        } else {
            None
        };
        Ok(StageEval {
            confusion,
            rates,
            auc: roc.as_ref().map(|r| r.auc),
            roc,
        })
    };

    let mlp_scores: Vec<f64> = verdicts.iter().map(|v| 1.0 - v.stage1_probs[0]).collect();
    let pipeline_scores: Vec<f64> = verdicts.iter().map(PipelineModel::attack_score).collect();
    Ok(EvalReport {
        records: truth.len(),
        mlp_only: stage_eval(&stage1, mlp_scores)?,
        mlp_ksvm: stage_eval(&finals, pipeline_scores)?,
    })
}
