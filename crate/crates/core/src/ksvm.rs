//! Stage-2 classifier: a binary kernelized SVM trained with sequential
//! minimal optimization on the dual problem
//!
//! ```text
//! minimize  W(a) = -sum_i a_i + 1/2 sum_ij y_i y_j a_i a_j K(x_i, x_j)
//! subject to    sum_i y_i a_i = 0,    0 <= a_i <= C
//! ```
//!
//! The solver is the simplified SMO scheme: sweep all points, pick a second
//! index by the max |E_i - E_j| heuristic with a randomized fallback, and
//! stop when a full sweep changes nothing (KKT satisfied within `tol`) or
//! the sweep budget runs out. Pairwise updates preserve the equality
//! constraint exactly; kernel rows go through a small LRU cache.

use std::collections::HashMap;
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KsvmError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("invalid parameter: {0}")]
    Param(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64, KsvmError> {
        if x.len() != y.len() {
            return Err(KsvmError::Shape(format!(
                "kernel arguments have lengths {} and {}",
                x.len(),
                y.len()
            )));
        }
        Ok(self.eval_unchecked(x, y))
    }

    #[inline]
    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Kernel::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
            Kernel::Rbf { gamma } => {
                let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * sq).exp()
            }
        }
    }
}

/// scikit-style "scale" heuristic: gamma = 1 / (n_features * variance of all
/// matrix entries).
pub fn rbf_gamma_scale(x: &[Vec<f64>]) -> f64 {
    let dim = x.first().map_or(1, |r| r.len()).max(1);
    let count = (x.len() * dim) as f64;
    if count == 0.0 {
        return 1.0 / dim as f64;
    }
    let mean: f64 = x.iter().flatten().sum::<f64>() / count;
    let var: f64 = x.iter().flatten().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
    if var > 0.0 {
        1.0 / (dim as f64 * var)
    } else {
        1.0 / dim as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoParams {
    /// Box constraint.
    pub c: f64,
    /// KKT violation tolerance.
    pub tol: f64,
    /// Hard cap on full sweeps over the training set.
    pub max_passes: usize,
    /// Kernel row LRU capacity (rows, not bytes).
    pub cache_rows: usize,
    /// Seed for the randomized second-choice fallback.
    pub seed: u64,
    /// Record the dual objective after every pair update (costly; meant for
    /// diagnostics and tests).
    pub record_objective: bool,
}

impl Default for SmoParams {
    fn default() -> Self {
        SmoParams {
            c: 1.0,
            tol: 1e-3,
            max_passes: 30,
            cache_rows: 768,
            seed: 0,
            record_objective: false,
        }
    }
}

/// Subsampling provenance carried in the serialized model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsampleInfo {
    pub cap: usize,
    pub seed: u64,
    pub selected: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// +/-1 labels of the support vectors.
    pub sv_labels: Vec<f64>,
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub kernel: Kernel,
    pub c: f64,
    pub converged: bool,
    pub subsample: Option<SubsampleInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BinaryVerdict {
    Normal,
    Attack,
}

#[derive(Debug, Clone, Default)]
pub struct SmoReport {
    pub sweeps: usize,
    pub updates: u64,
    pub converged: bool,
    /// W(a) after each successful pair update (only when requested).
    pub objective_trace: Vec<f64>,
}

impl KsvmModel {
    /// f(x) = sum_i a_i y_i K(x_i, x) + b
    pub fn decision(&self, x: &[f64]) -> Result<f64, KsvmError> {
        let mut f = self.bias;
        for ((sv, &y), &a) in self
            .support_vectors
            .iter()
            .zip(&self.sv_labels)
            .zip(&self.alphas)
        {
            f += a * y * self.kernel.eval(sv, x)?;
        }
        Ok(f)
    }

    /// Attack iff the decision value is >= 0; the tie goes to Attack so a
    /// borderline record is never waved through as normal.
    pub fn predict_binary(&self, x: &[f64]) -> Result<BinaryVerdict, KsvmError> {
        Ok(if self.decision(x)? >= 0.0 {
            BinaryVerdict::Attack
        } else {
            BinaryVerdict::Normal
        })
    }

    /// sum_i a_i y_i over the stored support vectors (zero-alpha terms of the
    /// training set vanish, so this equals the constraint over all alphas).
    pub fn equality_residual(&self) -> f64 {
        self.alphas
            .iter()
            .zip(&self.sv_labels)
            .map(|(a, y)| a * y)
            .sum()
    }
}

struct RowCache<'a> {
    x: &'a [Vec<f64>],
    kernel: Kernel,
    rows: HashMap<usize, (u64, Rc<Vec<f64>>)>,
    clock: u64,
    capacity: usize,
}

impl<'a> RowCache<'a> {
    fn new(x: &'a [Vec<f64>], kernel: Kernel, capacity: usize) -> RowCache<'a> {
        RowCache {
            x,
            kernel,
            rows: HashMap::new(),
            clock: 0,
            capacity: capacity.max(2),
        }
    }

    fn row(&mut self, i: usize) -> Rc<Vec<f64>> {
        self.clock += 1;
        let clock = self.clock;
        if let Some((stamp, row)) = self.rows.get_mut(&i) {
            *stamp = clock;
            return Rc::clone(row);
        }
        let computed: Vec<f64> = self
            .x
            .iter()
            .map(|other| self.kernel.eval_unchecked(&self.x[i], other))
            .collect();
        let rc = Rc::new(computed);
        if self.rows.len() >= self.capacity {
            if let Some((&oldest, _)) = self.rows.iter().min_by_key(|(_, (stamp, _))| *stamp) {
                self.rows.remove(&oldest);
            }
        }
        self.rows.insert(i, (clock, Rc::clone(&rc)));
        rc
    }
}

/// Dual objective W(a); O(n_sv^2), used for the optional trace.
fn dual_objective(x: &[Vec<f64>], y: &[f64], alphas: &[f64], kernel: Kernel) -> f64 {
    let active: Vec<usize> = (0..alphas.len()).filter(|&i| alphas[i] != 0.0).collect();
    let mut quad = 0.0;
    for &i in &active {
        for &j in &active {
            quad += y[i] * y[j] * alphas[i] * alphas[j] * kernel.eval_unchecked(&x[i], &x[j]);
        }
    }
    let linear: f64 = active.iter().map(|&i| alphas[i]).sum();
    0.5 * quad - linear
}

/// Trains the SVM by SMO. Returns the model (support vectors only) and a
/// solver report; a model that hit the sweep budget before reaching a clean
/// pass is returned with `converged = false`.
pub fn train_smo(
    x: &[Vec<f64>],
    y: &[i8],
    kernel: Kernel,
    params: &SmoParams,
) -> Result<(KsvmModel, SmoReport), KsvmError> {
    let n = x.len();
    if n != y.len() {
        return Err(KsvmError::Shape(format!(
            "{} rows vs {} labels",
            n,
            y.len()
        )));
    }
    if n < 2 {
        return Err(KsvmError::Param(format!("need at least 2 rows, got {n}")));
    }
    if y.iter().any(|&v| v != 1 && v != -1) {
        return Err(KsvmError::Param("labels must be +1 or -1".into()));
    }
    if !y.iter().any(|&v| v == 1) || !y.iter().any(|&v| v == -1) {
        return Err(KsvmError::SingleClass);
    }
    if params.c <= 0.0 {
        return Err(KsvmError::Param(format!("C must be > 0, got {}", params.c)));
    }
    let dim = x[0].len();
    if x.iter().any(|r| r.len() != dim) {
        return Err(KsvmError::Shape("rows have inconsistent widths".into()));
    }

    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
    let c = params.c;
    let mut alphas = vec![0.0f64; n];
    let mut b = 0.0f64;
    // E_k = f(x_k) - y_k, maintained incrementally.
    let mut errors: Vec<f64> = yf.iter().map(|&v| -v).collect();
    let mut cache = RowCache::new(x, kernel, params.cache_rows);
    let mut rng = ChaCha8Rng::seed_from_u64(crate::derive_seed(params.seed, "smo-second-choice"));
    let mut report = SmoReport::default();

    let take_step = |i: usize,
                         j: usize,
                         alphas: &mut Vec<f64>,
                         b: &mut f64,
                         errors: &mut Vec<f64>,
                         cache: &mut RowCache,
                         report: &mut SmoReport|
     -> bool {
        if i == j {
            return false;
        }
        let (ai_old, aj_old) = (alphas[i], alphas[j]);
        let (yi, yj) = (yf[i], yf[j]);
        let s = yi * yj;
        let (low, high) = if s < 0.0 {
            ((aj_old - ai_old).max(0.0), (c + aj_old - ai_old).min(c))
        } else {
            ((ai_old + aj_old - c).max(0.0), (ai_old + aj_old).min(c))
        };
        if low >= high {
            return false;
        }
        let row_i = cache.row(i);
        let row_j = cache.row(j);
        let (kii, kjj, kij) = (row_i[i], row_j[j], row_i[j]);
        let eta = kii + kjj - 2.0 * kij;
        let (ei, ej) = (errors[i], errors[j]);
        let mut aj_new = if eta > 1e-12 {
            (aj_old + yj * (ei - ej) / eta).clamp(low, high)
        } else {
            // degenerate curvature: evaluate the objective at both clip ends
            let f1 = yi * (ei + *b) - ai_old * kii - s * aj_old * kij;
            let f2 = yj * (ej + *b) - s * ai_old * kij - aj_old * kjj;
            let l1 = ai_old + s * (aj_old - low);
            let h1 = ai_old + s * (aj_old - high);
            let obj_low =
                l1 * f1 + low * f2 + 0.5 * l1 * l1 * kii + 0.5 * low * low * kjj + s * low * l1 * kij;
            let obj_high = h1 * f1
                + high * f2
                + 0.5 * h1 * h1 * kii
                + 0.5 * high * high * kjj
                + s * high * h1 * kij;
            if obj_low < obj_high - 1e-12 {
                low
            } else if obj_low > obj_high + 1e-12 {
                high
            } else {
                return false;
            }
        };
        if (aj_new - aj_old).abs() < 1e-10 * (aj_new + aj_old + 1e-10) {
            return false;
        }
        if aj_new < 1e-12 {
            aj_new = 0.0;
        } else if aj_new > c - 1e-12 {
            aj_new = c;
        }
        let mut ai_new = ai_old + s * (aj_old - aj_new);
        if ai_new < 1e-12 {
            ai_new = 0.0;
        } else if ai_new > c - 1e-12 {
            ai_new = c;
        }
        let (di, dj) = (ai_new - ai_old, aj_new - aj_old);

        let b1 = *b - ei - yi * di * kii - yj * dj * kij;
        let b2 = *b - ej - yi * di * kij - yj * dj * kjj;
        let b_new = if ai_new > 0.0 && ai_new < c {
            b1
        } else if aj_new > 0.0 && aj_new < c {
            b2
        } else {
            0.5 * (b1 + b2)
        };
        let db = b_new - *b;
        for k in 0..errors.len() {
            errors[k] += yi * di * row_i[k] + yj * dj * row_j[k] + db;
        }
        alphas[i] = ai_new;
        alphas[j] = aj_new;
        *b = b_new;
        report.updates += 1;
        if params.record_objective {
            report
                .objective_trace
                .push(dual_objective(x, &yf, alphas, kernel));
        }
        true
    };

    let mut converged = false;
    while report.sweeps < params.max_passes {
        let mut changed = 0usize;
        for i in 0..n {
            let r = yf[i] * errors[i];
            let violates = (r < -params.tol && alphas[i] < c) || (r > params.tol && alphas[i] > 0.0);
            if !violates {
                continue;
            }
            // second choice: max |E_i - E_j| over free alphas first
            let mut best: Option<(usize, f64)> = None;
            for j in 0..n {
                if j == i || alphas[j] <= 0.0 || alphas[j] >= c {
                    continue;
                }
                let gap = (errors[i] - errors[j]).abs();
                if best.map_or(true, |(_, g)| gap > g) {
                    best = Some((j, gap));
                }
            }
            let mut stepped = false;
            if let Some((j, _)) = best {
                stepped = take_step(i, j, &mut alphas, &mut b, &mut errors, &mut cache, &mut report);
            }
            if !stepped {
                // randomized fallback over the whole set
                let start = rng.random_range(0..n);
                for off in 0..n {
                    let j = (start + off) % n;
                    if j == i {
                        continue;
                    }
                    if take_step(i, j, &mut alphas, &mut b, &mut errors, &mut cache, &mut report) {
                        stepped = true;
                        break;
                    }
                }
            }
            if stepped {
                changed += 1;
            }
        }
        report.sweeps += 1;
        if changed == 0 {
            converged = true;
            break;
        }
    }
    report.converged = converged;

    // Final bias from the free support vectors (average), or the margin
    // midpoint when every alpha sits on the box boundary.
    let margins: Vec<f64> = (0..n)
        .map(|k| {
            let mut g = 0.0;
            for idx in 0..n {
                if alphas[idx] > 0.0 {
                    g += alphas[idx] * yf[idx] * kernel.eval_unchecked(&x[idx], &x[k]);
                }
            }
            g
        })
        .collect();
    let free: Vec<usize> = (0..n).filter(|&k| alphas[k] > 0.0 && alphas[k] < c).collect();
    let bias = if !free.is_empty() {
        free.iter().map(|&k| yf[k] - margins[k]).sum::<f64>() / free.len() as f64
    } else {
        let pos_min = (0..n)
            .filter(|&k| y[k] == 1)
            .map(|k| margins[k])
            .fold(f64::INFINITY, f64::min);
        let neg_max = (0..n)
            .filter(|&k| y[k] == -1)
            .map(|k| margins[k])
            .fold(f64::NEG_INFINITY, f64::max);
        -(pos_min + neg_max) / 2.0
    };

    let mut support_vectors = Vec::new();
    let mut sv_labels = Vec::new();
    let mut sv_alphas = Vec::new();
    for k in 0..n {
        if alphas[k] > 0.0 {
            support_vectors.push(x[k].clone());
            sv_labels.push(yf[k]);
            sv_alphas.push(alphas[k]);
        }
    }
    let model = KsvmModel {
        support_vectors,
        sv_labels,
        alphas: sv_alphas,
        bias,
        kernel,
        c,
        converged,
        subsample: None,
    };
    Ok((model, report))
}

/// Deterministic stratified subsample (by binary label) of at most `cap`
/// rows, preserving class proportions and input order.
pub fn stratified_subsample(
    x: &[Vec<f64>],
    y: &[i8],
    cap: usize,
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<i8>, SubsampleInfo) {
    let n = x.len();
    if n <= cap {
        return (
            x.to_vec(),
            y.to_vec(),
            SubsampleInfo {
                cap,
                seed,
                selected: n,
                total: n,
            },
        );
    }
    let mut keep: Vec<usize> = Vec::with_capacity(cap);
    for class in [1i8, -1] {
        let indices: Vec<usize> = (0..n).filter(|&i| y[i] == class).collect();
        if indices.is_empty() {
            continue;
        }
        let share = ((cap as f64) * indices.len() as f64 / n as f64 + 0.5).floor() as usize;
        let share = share.clamp(1, indices.len());
        let mut shuffled = indices;
        use rand::seq::SliceRandom;
        let mut rng =
            ChaCha8Rng::seed_from_u64(crate::derive_seed(seed, &format!("svm-subsample-{class}")));
        shuffled.shuffle(&mut rng);
        keep.extend(shuffled.into_iter().take(share));
    }
    keep.sort_unstable();
    keep.truncate(cap);
    let info = SubsampleInfo {
        cap,
        seed,
        selected: keep.len(),
        total: n,
    };
    (
        keep.iter().map(|&i| x[i].clone()).collect(),
        keep.iter().map(|&i| y[i]).collect(),
        info,
    )
}
