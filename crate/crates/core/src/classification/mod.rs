//! One-vs-one C-SVC with an RBF kernel over the 39-entry feature vectors,
//! plus feature scaling, evaluation metrics, and the versioned model file.

mod io;
mod smo;

pub use io::{load_model, save_model};
pub use smo::{rbf_kernel, BinarySmo};

use crate::features::{CellClass, FEATURE_COUNT};
use crate::parallel;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ClassifierError {
    #[error("training needs at least two classes")]
    SingleClass,
    #[error("class {0} has fewer than two rows")]
    TooFewRows(&'static str),
    #[error("row {0} contains a non-finite feature")]
    NonFinite(usize),
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("unsupported model version `{0}`")]
    VersionMismatch(String),
}

/// Classifier hyperparameters. `degree`, `coef0`, `nu` and `p` are inert
/// under the RBF C-SVC but are carried in the model manifest.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    pub degree: f64,
    pub coef0: f64,
    pub nu: f64,
    pub p: f64,
    pub max_iter: usize,
    pub tolerance: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 10.0,
            gamma: 0.09,
            degree: 10.0,
            coef0: 1.0,
            nu: 0.5,
            p: 1.0,
            max_iter: 1000,
            tolerance: 1e-3,
        }
    }
}

/// Per-feature affine map onto [-1, 1] fitted on the training set.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScalingRecord {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalingRecord {
    /// Fit train-set minima/maxima.
    pub fn fit(rows: &[[f64; FEATURE_COUNT]]) -> ScalingRecord {
        let mut min = vec![f64::INFINITY; FEATURE_COUNT];
        let mut max = vec![f64::NEG_INFINITY; FEATURE_COUNT];
        for row in rows {
            for (k, &v) in row.iter().enumerate() {
                min[k] = min[k].min(v);
                max[k] = max[k].max(v);
            }
        }
        ScalingRecord { min, max }
    }

    /// Map one vector; constant features go to 0 and values are clamped to
    /// [-1.5, 1.5] so unseen test values cannot run away.
    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(k, &v)| {
                let span = self.max[k] - self.min[k];
                if span <= 0.0 {
                    0.0
                } else {
                    ((v - self.min[k]) / span * 2.0 - 1.0).clamp(-1.5, 1.5)
                }
            })
            .collect()
    }
}

/// A support vector with its signed dual coefficient in every pairwise
/// machine it participates in (0 elsewhere). Features are stored scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportVector {
    pub class_index: usize,
    pub pair_coefs: Vec<f64>,
    pub features: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainManifest {
    pub params: SvmParams,
    pub seed: u64,
    pub dataset_digest: String,
}

/// Trained one-vs-one model over the five classes.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub classes: Vec<CellClass>,
    pub scaling: ScalingRecord,
    pub support_vectors: Vec<SupportVector>,
    pub pair_bias: Vec<f64>,
    pub manifest: TrainManifest,
}

impl SvmModel {
    /// Ordered class pairs (a, b) with a < b, one per pairwise machine.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let k = self.classes.len();
        let mut out = Vec::with_capacity(k * (k - 1) / 2);
        for a in 0..k {
            for b in a + 1..k {
                out.push((a, b));
            }
        }
        out
    }
}

/// Outcome of one prediction: winning class, per-class votes and summed
/// signed margins.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class: CellClass,
    pub votes: Vec<usize>,
    pub margins: Vec<f64>,
}

/// Train the one-vs-one model. Every pairwise subproblem is independent and
/// they are solved in parallel. Rows are brought into a canonical order
/// (class, then lexicographic features) before solving, so any permutation
/// of the input produces the identical model.
pub fn svm_train(
    rows: &[([f64; FEATURE_COUNT], CellClass)],
    params: &SvmParams,
    dataset_digest: &str,
) -> Result<SvmModel, ClassifierError> {
    for (i, (row, _)) in rows.iter().enumerate() {
        if row.iter().any(|v| !v.is_finite()) {
            return Err(ClassifierError::NonFinite(i));
        }
    }
    let mut classes: Vec<CellClass> = Vec::new();
    for c in CellClass::ALL {
        if rows.iter().any(|(_, l)| *l == c) {
            classes.push(c);
        }
    }
    if classes.len() < 2 {
        return Err(ClassifierError::SingleClass);
    }
    for &c in &classes {
        if rows.iter().filter(|(_, l)| *l == c).count() < 2 {
            return Err(ClassifierError::TooFewRows(c.mnemonic()));
        }
    }

    let mut rows: Vec<([f64; FEATURE_COUNT], CellClass)> = rows.to_vec();
    rows.sort_by(|(fa, la), (fb, lb)| {
        la.index().cmp(&lb.index()).then_with(|| {
            for (x, y) in fa.iter().zip(fb.iter()) {
                let ord = x.total_cmp(y);
                if ord != std::cmp::Ordering::Equal {
                    return ord;
                }
            }
            std::cmp::Ordering::Equal
        })
    });

    let features: Vec<[f64; FEATURE_COUNT]> = rows.iter().map(|(f, _)| *f).collect();
    let scaling = ScalingRecord::fit(&features);
    let scaled: Vec<Vec<f64>> = features.iter().map(|f| scaling.apply(f)).collect();

    let k = classes.len();
    let mut pair_list = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            pair_list.push((a, b));
        }
    }

    // (bias, per-row signed dual coefficients indexed by training row).
    let solved: Vec<(f64, Vec<(usize, f64)>)> = parallel::map_indexed(pair_list.len(), |p| {
        let (a, b) = pair_list[p];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut idx = Vec::new();
        for (i, (_, label)) in rows.iter().enumerate() {
            if *label == classes[a] {
                xs.push(scaled[i].clone());
                ys.push(1.0);
                idx.push(i);
            } else if *label == classes[b] {
                xs.push(scaled[i].clone());
                ys.push(-1.0);
                idx.push(i);
            }
        }
        let mut solver = BinarySmo::new(&xs, &ys, params.c, params.gamma, params.tolerance);
        let result = solver.solve(params.max_iter);
        let coefs = result
            .alpha
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 1e-12)
            .map(|(j, &a)| (idx[j], a * ys[j]))
            .collect();
        (result.bias, coefs)
    });

    let mut pair_bias = Vec::with_capacity(pair_list.len());
    let mut coef_by_row: std::collections::BTreeMap<usize, Vec<f64>> =
        std::collections::BTreeMap::new();
    for (p, (bias, coefs)) in solved.iter().enumerate() {
        pair_bias.push(*bias);
        for &(row, coef) in coefs {
            coef_by_row
                .entry(row)
                .or_insert_with(|| vec![0.0; pair_list.len()])[p] = coef;
        }
    }
    let support_vectors = coef_by_row
        .into_iter()
        .map(|(row, pair_coefs)| SupportVector {
            class_index: classes.iter().position(|c| *c == rows[row].1).unwrap(),
            pair_coefs,
            features: scaled[row].clone(),
        })
        .collect();

    Ok(SvmModel {
        classes,
        scaling,
        support_vectors,
        pair_bias,
        manifest: TrainManifest {
            params: params.clone(),
            seed: 0,
            dataset_digest: dataset_digest.to_string(),
        },
    })
}

/// Decision value of one pairwise machine on a scaled vector.
fn pair_decision(model: &SvmModel, pair: usize, scaled: &[f64]) -> f64 {
    let gamma = model.manifest.params.gamma;
    let mut f = model.pair_bias[pair];
    for sv in &model.support_vectors {
        let coef = sv.pair_coefs[pair];
        if coef != 0.0 {
            f += coef * rbf_kernel(&sv.features, scaled, gamma);
        }
    }
    f
}

/// Majority vote over all pairwise machines; ties break by the larger summed
/// margin, then by class order.
pub fn svm_predict(model: &SvmModel, features: &[f64]) -> Prediction {
    let scaled = model.scaling.apply(features);
    let k = model.classes.len();
    let mut votes = vec![0usize; k];
    let mut margins = vec![0.0f64; k];
    for (p, (a, b)) in model.pairs().into_iter().enumerate() {
        let f = pair_decision(model, p, &scaled);
        if f >= 0.0 {
            votes[a] += 1;
        } else {
            votes[b] += 1;
        }
        margins[a] += f;
        margins[b] -= f;
    }
    let mut winner = 0usize;
    for i in 1..k {
        if votes[i] > votes[winner] || (votes[i] == votes[winner] && margins[i] > margins[winner]) {
            winner = i;
        }
    }
    Prediction {
        class: model.classes[winner],
        votes,
        margins,
    }
}

/// Per-class recall, average recognition rate and the full confusion matrix.
/// Recall is null for classes absent from `rows`, which are excluded from
/// the average.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvalReport {
    pub classes: Vec<String>,
    pub per_class_recall: Vec<Option<f64>>,
    pub arr: f64,
    pub confusion: Vec<Vec<u64>>,
    pub manifest: TrainManifest,
}

pub fn evaluate(model: &SvmModel, rows: &[([f64; FEATURE_COUNT], CellClass)]) -> EvalReport {
    let k = CellClass::ALL.len();
    let mut confusion = vec![vec![0u64; k]; k];
    let predictions: Vec<CellClass> =
        parallel::map_indexed(rows.len(), |i| svm_predict(model, &rows[i].0).class);
    for ((_, truth), predicted) in rows.iter().zip(&predictions) {
        confusion[truth.index()][predicted.index()] += 1;
    }
    let mut per_class_recall = Vec::with_capacity(k);
    let mut sum = 0.0;
    let mut present = 0usize;
    for c in 0..k {
        let total: u64 = confusion[c].iter().sum();
        if total == 0 {
            per_class_recall.push(None);
        } else {
            let recall = confusion[c][c] as f64 / total as f64;
            per_class_recall.push(Some(recall));
            sum += recall;
            present += 1;
        }
    }
    EvalReport {
        classes: CellClass::ALL
            .iter()
            .map(|c| c.mnemonic().to_string())
            .collect(),
        per_class_recall,
        arr: if present == 0 {
            0.0
        } else {
            sum / present as f64
        },
        confusion,
        manifest: model.manifest.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(values: &[f64]) -> [f64; FEATURE_COUNT] {
        let mut out = [0.0; FEATURE_COUNT];
        out[..values.len()].copy_from_slice(values);
        out
    }

    fn two_cluster_rows() -> Vec<([f64; FEATURE_COUNT], CellClass)> {
        let mut rows = Vec::new();
        for i in 0..6 {
            let t = i as f64 * 0.05;
            rows.push((fv(&[t, 1.0 + t]), CellClass::Mbe));
            rows.push((fv(&[10.0 + t, -4.0 - t]), CellClass::Mls));
        }
        rows
    }

    #[test]
    fn scaling_maps_and_clamps() {
        let rows = vec![fv(&[0.0, 5.0]), fv(&[100.0, 5.0])];
        let s = ScalingRecord::fit(&rows);
        let mapped = s.apply(&fv(&[50.0, 5.0]));
        assert_eq!(mapped[0], 0.0);
        // Constant feature maps to 0.
        assert_eq!(mapped[1], 0.0);
        // Out-of-range test value clamps within [-1.5, 1.5].
        let mapped = s.apply(&fv(&[120.0, 5.0]));
        assert!((mapped[0] - 1.4).abs() < 1e-12);
        let mapped = s.apply(&fv(&[500.0, 5.0]));
        assert_eq!(mapped[0], 1.5);
    }

    #[test]
    fn separable_clusters_reach_full_training_accuracy() {
        let rows = two_cluster_rows();
        let model = svm_train(&rows, &SvmParams::default(), "test").unwrap();
        for (f, label) in &rows {
            assert_eq!(svm_predict(&model, f).class, *label);
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let rows: Vec<_> = (0..4).map(|i| (fv(&[i as f64]), CellClass::Ocs)).collect();
        assert_eq!(
            svm_train(&rows, &SvmParams::default(), "t").unwrap_err(),
            ClassifierError::SingleClass
        );
    }

    #[test]
    fn non_finite_row_reports_index() {
        let mut rows = two_cluster_rows();
        rows[3].0[7] = f64::NAN;
        assert_eq!(
            svm_train(&rows, &SvmParams::default(), "t").unwrap_err(),
            ClassifierError::NonFinite(3)
        );
    }

    #[test]
    fn five_class_vote_tally_sums_to_ten() {
        let mut rows = Vec::new();
        for (ci, class) in CellClass::ALL.iter().enumerate() {
            for j in 0..4 {
                let base = ci as f64 * 8.0;
                rows.push((fv(&[base + j as f64 * 0.1, base * 0.5]), *class));
            }
        }
        let model = svm_train(&rows, &SvmParams::default(), "t").unwrap();
        let p = svm_predict(&model, &rows[0].0);
        assert_eq!(p.votes.iter().sum::<usize>(), 10);
    }

    #[test]
    fn symmetric_tie_is_deterministic() {
        // Two classes mirrored around the origin; the probe at the center is
        // equidistant, so the tie path must fire and stay deterministic.
        let mut rows = Vec::new();
        for i in 0..4 {
            let t = 1.0 + i as f64 * 0.1;
            rows.push((fv(&[t]), CellClass::Mbe));
            rows.push((fv(&[-t]), CellClass::Mls));
        }
        let model = svm_train(&rows, &SvmParams::default(), "t").unwrap();
        let a = svm_predict(&model, &fv(&[0.0]));
        let b = svm_predict(&model, &fv(&[0.0]));
        assert_eq!(a, b);
    }

    #[test]
    fn evaluation_counts_and_averages() {
        let rows = two_cluster_rows();
        let model = svm_train(&rows, &SvmParams::default(), "t").unwrap();
        let report = evaluate(&model, &rows);
        assert_eq!(report.per_class_recall[CellClass::Mbe.index()], Some(1.0));
        assert_eq!(report.per_class_recall[CellClass::Mls.index()], Some(1.0));
        assert_eq!(report.per_class_recall[CellClass::Nstg.index()], None);
        assert_eq!(report.arr, 1.0);
        let row_sum: u64 = report.confusion[CellClass::Mbe.index()].iter().sum();
        assert_eq!(row_sum, 6);
    }

    #[test]
    fn training_rows_may_be_permuted() {
        let rows = two_cluster_rows();
        let mut reversed = rows.clone();
        reversed.reverse();
        let a = svm_train(&rows, &SvmParams::default(), "t").unwrap();
        let b = svm_train(&reversed, &SvmParams::default(), "t").unwrap();
        assert_eq!(a, b);
        assert_eq!(super::save_model(&a), super::save_model(&b));
    }

    #[test]
    fn arr_is_mean_of_recalls() {
        let rows = two_cluster_rows();
        let model = svm_train(&rows, &SvmParams::default(), "t").unwrap();
        // Mislabel the evaluation rows so recalls differ.
        let mut eval_rows = rows.clone();
        for r in eval_rows.iter_mut().take(3) {
            r.1 = CellClass::Mls;
        }
        let report = evaluate(&model, &eval_rows);
        let mean = report.per_class_recall.iter().flatten().sum::<f64>()
            / report.per_class_recall.iter().flatten().count() as f64;
        assert!((report.arr - mean).abs() < 1e-12);
    }
}
