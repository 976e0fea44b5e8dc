//! PCA-based feature importance and top-k selection.
//!
//! The covariance matrix here is at most 23x23, so the eigendecomposition is
//! done directly with cyclic Jacobi rotations rather than an iterative SVD of
//! the data matrix. Importance of a column is the eigenvalue-weighted sum of
//! its squared loadings over the model's components.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, Label};

#[derive(Debug, Error)]
pub enum FeaturesError {
    #[error("rank error: {0}")]
    Rank(String),
    #[error("need at least 2 rows to fit PCA, got {0}")]
    TooFewRows(usize),
}

/// Fitted PCA model: `components` rows are orthonormal eigenvectors of the
/// sample covariance, `explained_variance` the matching eigenvalues in
/// nonincreasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    pub column_means: Vec<f64>,
}

/// Columns ordered by nonincreasing importance score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking(pub Vec<(usize, f64)>);

impl FeatureRanking {
    /// Indices of the `k` highest-ranked columns, in ranking order.
    pub fn top_k(&self, k: usize) -> Vec<usize> {
        self.0.iter().take(k).map(|&(idx, _)| idx).collect()
    }
}

/// Fits a `k`-component PCA on the rows of `x`.
///
/// Centering is internal; the sign of each component is fixed so its
/// largest-magnitude entry is positive.
pub fn pca_fit(x: &[Vec<f64>], k: usize) -> Result<PcaModel, FeaturesError> {
    if x.len() < 2 {
        return Err(FeaturesError::TooFewRows(x.len()));
    }
    let dim = x[0].len();
    if k == 0 || k > dim {
        return Err(FeaturesError::Rank(format!(
            "k must be in 1..={dim}, got {k}"
        )));
    }
    let n = x.len() as f64;
    let mut means = vec![0.0; dim];
    for row in x {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    // Sample covariance (divide by n - 1).
    let mut cov = vec![vec![0.0; dim]; dim];
    for row in x {
        for i in 0..dim {
            let di = row[i] - means[i];
            for j in i..dim {
                cov[i][j] += di * (row[j] - means[j]);
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            let v = cov[i][j] / (n - 1.0);
            cov[i][j] = v;
            cov[j][i] = v;
        }
    }
    let (eigenvalues, eigenvectors) = symmetric_eigen(&cov);
    let mut components = Vec::with_capacity(k);
    let mut explained = Vec::with_capacity(k);
    for i in 0..k {
        let mut v = eigenvectors[i].clone();
        // Largest-magnitude entry positive; first such entry wins ties.
        let lead = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(idx, _)| idx)
            .unwrap_or(0);
        if v[lead] < 0.0 {
            for entry in &mut v {
                *entry = -*entry;
            }
        }
        components.push(v);
        // Jacobi can leave tiny negative values on rank-deficient input.
        explained.push(eigenvalues[i].max(0.0));
    }
    Ok(PcaModel {
        components,
        explained_variance: explained,
        column_means: means,
    })
}

/// importance(j) = sum_i explained_variance_i * components[i][j]^2, sorted
/// descending; ties broken by lower column index.
pub fn rank_features(model: &PcaModel) -> FeatureRanking {
    let dim = model.column_means.len();
    let mut scores = vec![0.0; dim];
    for (component, lambda) in model.components.iter().zip(&model.explained_variance) {
        for (score, loading) in scores.iter_mut().zip(component) {
            *score += lambda * loading * loading;
        }
    }
    let mut ranked: Vec<(usize, f64)> = scores.into_iter().enumerate().collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    FeatureRanking(ranked)
}

/// A column-projected view of a dataset: `k` selected columns, record order
/// and labels preserved.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetView {
    pub columns: Vec<usize>,
    pub column_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

pub fn select_top_k(
    ds: &Dataset,
    ranking: &FeatureRanking,
    k: usize,
) -> Result<DatasetView, FeaturesError> {
    if k == 0 || k > ds.column_names.len() {
        return Err(FeaturesError::Rank(format!(
            "k must be in 1..={}, got {k}",
            ds.column_names.len()
        )));
    }
    let columns = ranking.top_k(k);
    let column_names = columns.iter().map(|&c| ds.column_names[c].clone()).collect();
    let rows = ds
        .records
        .iter()
        .map(|rec| {
            let features = rec.features();
            columns.iter().map(|&c| features[c]).collect()
        })
        .collect();
    Ok(DatasetView {
        columns,
        column_names,
        rows,
        labels: ds.labels(),
    })
}

/// Projects a single feature vector onto the selected columns.
pub fn project(features: &[f64], columns: &[usize]) -> Vec<f64> {
    columns.iter().map(|&c| features[c]).collect()
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvectors-as-rows) sorted by nonincreasing
/// eigenvalue.
fn symmetric_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut vectors = vec![vec![0.0; n]; n];
    for (i, row) in vectors.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let norm: f64 = a
        .iter()
        .flat_map(|row| row.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    let stop = (norm * 1e-15).max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p][q] * m[p][q];
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() <= stop / (n as f64) {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m[i][p];
                    let miq = m[i][q];
                    m[i][p] = c * mip - s * miq;
                    m[i][q] = s * mip + c * miq;
                }
                for j in 0..n {
                    let mpj = m[p][j];
                    let mqj = m[q][j];
                    m[p][j] = c * mpj - s * mqj;
                    m[q][j] = s * mpj + c * mqj;
                }
                for i in 0..n {
                    let vip = vectors[p][i];
                    let viq = vectors[q][i];
                    vectors[p][i] = c * vip - s * viq;
                    vectors[q][i] = s * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].partial_cmp(&m[i][i]).unwrap());
    let eigenvalues = order.iter().map(|&i| m[i][i]).collect();
    let eigenvectors = order.iter().map(|&i| vectors[i].clone()).collect();
    (eigenvalues, eigenvectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{default_column_names, FeatureRecord, FEATURE_COUNT};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: dense eigendecomposition via nalgebra.
    fn nalgebra_eigen(x: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = x.len() as f64;
        let dim = x[0].len();
        let mut means = vec![0.0; dim];
        for row in x {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut cov = nalgebra::DMatrix::<f64>::zeros(dim, dim);
        for row in x {
            for i in 0..dim {
                for j in 0..dim {
                    cov[(i, j)] += (row[i] - means[i]) * (row[j] - means[j]) / (n - 1.0);
                }
            }
        }
        let eig = nalgebra::SymmetricEigen::new(cov);
        let mut pairs: Vec<(f64, Vec<f64>)> = (0..dim)
            .map(|i| {
                (
                    eig.eigenvalues[i],
                    eig.eigenvectors.column(i).iter().copied().collect(),
                )
            })
            .collect();
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        (
            pairs.iter().map(|p| p.0).collect(),
            pairs.into_iter().map(|p| p.1).collect(),
        )
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..rows)
            .map(|_| (0..cols).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect())
            .collect()
    }

    #[test]
    fn line_data_first_component_is_diagonal() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, i as f64]).collect();
        let model = pca_fit(&x, 2).unwrap();
        let inv_sqrt2 = 1.0 / 2f64.sqrt();
        assert!((model.components[0][0] - inv_sqrt2).abs() < 1e-10);
        assert!((model.components[0][1] - inv_sqrt2).abs() < 1e-10);
        let total: f64 = model.explained_variance.iter().sum();
        assert!((model.explained_variance[0] / total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn isotropic_data_has_flat_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<Vec<f64>> = (0..4000)
            .map(|_| {
                (0..3)
                    .map(|_| {
                        // sum of 12 uniforms, approximately normal, unit variance
                        (0..12).map(|_| rng.random::<f64>()).sum::<f64>() - 6.0
                    })
                    .collect()
            })
            .collect();
        let model = pca_fit(&x, 3).unwrap();
        let max = model.explained_variance[0];
        let min = model.explained_variance[2];
        assert!(max / min < 1.15, "spectrum not flat: {max} vs {min}");
    }

    #[test]
    fn matches_dense_eigensolver_oracle() {
        let x = random_matrix(5, 3, 77);
        let model = pca_fit(&x, 3).unwrap();
        let (oracle_vals, oracle_vecs) = nalgebra_eigen(&x);
        for i in 0..3 {
            assert!(
                (model.explained_variance[i] - oracle_vals[i].max(0.0)).abs() < 1e-8,
                "eigenvalue {i}"
            );
            // up to sign
            let dot: f64 = model.components[i]
                .iter()
                .zip(&oracle_vecs[i])
                .map(|(a, b)| a * b)
                .sum();
            assert!(
                (dot.abs() - 1.0).abs() < 1e-8,
                "component {i} mismatch, |dot| = {}",
                dot.abs()
            );
        }
    }

    #[test]
    fn components_are_orthonormal() {
        let x = random_matrix(40, 6, 5);
        let model = pca_fit(&x, 6).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let dot: f64 = model.components[i]
                    .iter()
                    .zip(&model.components[j])
                    .map(|(a, b)| a * b)
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-8, "({i},{j}) dot {dot}");
            }
        }
    }

    #[test]
    fn explained_variance_sums_to_covariance_trace() {
        let x = random_matrix(30, 7, 13);
        let model = pca_fit(&x, 7).unwrap();
        let n = x.len() as f64;
        let mut trace = 0.0;
        for j in 0..7 {
            let mean: f64 = x.iter().map(|r| r[j]).sum::<f64>() / n;
            trace += x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        }
        let total: f64 = model.explained_variance.iter().sum();
        assert!((total - trace).abs() < 1e-8, "{total} vs {trace}");
    }

    #[test]
    fn reconstruction_with_all_components_is_identity() {
        let x = random_matrix(25, 5, 3);
        let model = pca_fit(&x, 5).unwrap();
        for row in &x {
            let centered: Vec<f64> = row.iter().zip(&model.column_means).map(|(v, m)| v - m).collect();
            // project then reconstruct
            let mut rebuilt = vec![0.0; 5];
            for component in &model.components {
                let score: f64 = centered.iter().zip(component).map(|(a, b)| a * b).sum();
                for (r, c) in rebuilt.iter_mut().zip(component) {
                    *r += score * c;
                }
            }
            for (a, b) in rebuilt.iter().zip(&centered) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn dominant_variance_column_ranks_first() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x: Vec<Vec<f64>> = (0..200)
            .map(|_| {
                vec![
                    rng.random::<f64>(),
                    rng.random::<f64>() * 100.0,
                    rng.random::<f64>(),
                ]
            })
            .collect();
        let model = pca_fit(&x, 3).unwrap();
        let ranking = rank_features(&model);
        assert_eq!(ranking.0[0].0, 1);
    }

    #[test]
    fn single_axis_component_importance() {
        let model = PcaModel {
            components: vec![vec![1.0, 0.0, 0.0]],
            explained_variance: vec![2.5],
            column_means: vec![0.0; 3],
        };
        let ranking = rank_features(&model);
        assert_eq!(ranking.0[0], (0, 2.5));
        assert_eq!(ranking.0[1], (1, 0.0));
        assert_eq!(ranking.0[2], (2, 0.0));
    }

    #[test]
    fn ranking_matches_brute_force_formula_from_oracle() {
        let x = random_matrix(50, 6, 99);
        let model = pca_fit(&x, 6).unwrap();
        let ranking = rank_features(&model);
        let (oracle_vals, oracle_vecs) = nalgebra_eigen(&x);
        let mut scores = vec![0.0; 6];
        for i in 0..6 {
            for j in 0..6 {
                scores[j] += oracle_vals[i].max(0.0) * oracle_vecs[i][j] * oracle_vecs[i][j];
            }
        }
        let mut expected: Vec<(usize, f64)> = scores.into_iter().enumerate().collect();
        expected.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        for (got, want) in ranking.0.iter().zip(&expected) {
            assert_eq!(got.0, want.0);
            assert!((got.1 - want.1).abs() < 1e-8);
        }
    }

    fn dataset_from_matrix(x: &[Vec<f64>]) -> Dataset {
        let records: Vec<FeatureRecord> = x
            .iter()
            .map(|row| {
                let mut values = vec![0.0; FEATURE_COUNT];
                values[..row.len()].copy_from_slice(row);
                values[1] = 0.0; // keep is_ch valid
                let mut rec = FeatureRecord::from_features(&values, Label::Normal).unwrap();
                // stash the row tail into extras so all columns vary
                for (i, v) in row.iter().enumerate().skip(10) {
                    rec.extra_features[i - 10] = *v;
                }
                rec
            })
            .collect();
        Dataset::new(records, default_column_names(), "Attack_Type".into())
    }

    #[test]
    fn select_all_columns_is_identity() {
        let x = random_matrix(6, FEATURE_COUNT, 31);
        let ds = dataset_from_matrix(&x);
        let matrix = ds.feature_matrix();
        let model = pca_fit(&matrix, 10).unwrap();
        let ranking = rank_features(&model);
        let view = select_top_k(&ds, &ranking, FEATURE_COUNT).unwrap();
        assert_eq!(view.columns.len(), FEATURE_COUNT);
        let mut seen = view.columns.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..FEATURE_COUNT).collect::<Vec<_>>());
        for (row, rec) in view.rows.iter().zip(&matrix) {
            for (&col, v) in view.columns.iter().zip(row) {
                assert_eq!(rec[col], *v);
            }
        }
    }

    #[test]
    fn select_k1_keeps_dominant_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let x: Vec<Vec<f64>> = (0..100)
            .map(|_| {
                let mut row: Vec<f64> = (0..FEATURE_COUNT).map(|_| rng.random::<f64>()).collect();
                row[4] = rng.random::<f64>() * 100.0;
                row
            })
            .collect();
        let ds = dataset_from_matrix(&x);
        let model = pca_fit(&ds.feature_matrix(), 5).unwrap();
        let ranking = rank_features(&model);
        let view = select_top_k(&ds, &ranking, 1).unwrap();
        assert_eq!(view.columns, vec![4]);
    }

    #[test]
    fn select_k_too_large_errors() {
        let x = random_matrix(4, FEATURE_COUNT, 1);
        let ds = dataset_from_matrix(&x);
        let model = pca_fit(&ds.feature_matrix(), 3).unwrap();
        let ranking = rank_features(&model);
        assert!(matches!(
            select_top_k(&ds, &ranking, FEATURE_COUNT + 1),
            Err(FeaturesError::Rank(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn ranking_invariant_under_row_permutation(seed in 0u64..500) {
            let x = random_matrix(30, 5, seed);
            let mut shuffled = x.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            use rand::seq::SliceRandom;
            shuffled.shuffle(&mut rng);
            let a = rank_features(&pca_fit(&x, 5).unwrap());
            let b = rank_features(&pca_fit(&shuffled, 5).unwrap());
            let order_a: Vec<usize> = a.0.iter().map(|p| p.0).collect();
            let order_b: Vec<usize> = b.0.iter().map(|p| p.0).collect();
            prop_assert_eq!(order_a, order_b);
            for (pa, pb) in a.0.iter().zip(&b.0) {
                prop_assert!((pa.1 - pb.1).abs() < 1e-9);
            }
        }
    }
}
