//! Multi-stage jamming-attack intrusion detection for clustered wireless
//! sensor networks.
//!
//! The detector runs in two stages: a five-class multilayer perceptron first
//! labels each traffic record, and every record the MLP calls normal is
//! re-checked by a binary kernelized SVM so that attacks slipping through as
//! false negatives get a second chance to be caught. The crate also ships a
//! LEACH cluster-protocol simulator with four jammer adversaries (constant,
//! random, deceptive, reactive) that emits labeled datasets in the same
//! 23-feature CSV schema the detector consumes, so the whole pipeline runs
//! end to end without external data.
//!
//! Modules map onto the processing stages:
//!
//! - [`dataset`]: CSV loading, label handling, stratified splits, z-score
//!   scaling.
//! - [`features`]: PCA fitting, eigenvalue-weighted feature ranking, top-k
//!   selection.
//! - [`mlp`]: the stage-1 softmax MLP trained by mini-batch SGD.
//! - [`ksvm`]: the stage-2 binary SVM trained by SMO on the dual objective.
//! - [`pipeline`]: scaler + selection + MLP + KSVM composed into one model.
//! - [`metrics`]: confusion matrices, TPR/FPR/FNR, ROC curves and AUC.
//! - [`simulator`]: the LEACH round simulator and jammer models.

pub mod dataset;
pub mod features;
pub mod ksvm;
pub mod metrics;
pub mod mlp;
pub mod pipeline;
pub mod simulator;

/// Derives a sub-seed from a base seed and a stream tag.
///
/// All randomness in a run flows from one user-facing seed. Independent
/// random streams (CH election, node placement, jammer duty cycles, MLP
/// init, batch shuffling, subsampling, ...) each get their own seed via
/// FNV-1a over the base seed bytes followed by the tag bytes. The scheme is
/// fixed: changing a tag name changes the stream, nothing else does.
pub fn derive_seed(base: u64, stream: &str) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = FNV_OFFSET;
    for byte in base.to_le_bytes().iter().chain(stream.as_bytes()) {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}
