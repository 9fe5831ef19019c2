//! Benchmark measurements: misclassification counts, support sizes, and
//! feature-selection quality against a known differential set.

use std::collections::BTreeSet;

use crate::classifier::TrainedModel;
use crate::dataset::{map_label_indices, LabeledDataset};
use crate::error::CrdaError;

/// Scores for one fitted model on one test set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub te_count: usize,
    pub te_rate: f64,
    pub nfs: usize,
    pub dr_percent: Option<f64>,
    pub fp_percent: Option<f64>,
    pub n_test: usize,
}

/// Misclassification count and rate.
pub fn test_error(pred: &[usize], truth: &[usize]) -> Result<(usize, f64), CrdaError> {
    if pred.len() != truth.len() {
        return Err(CrdaError::DimensionMismatch {
            context: "prediction count",
            expected: truth.len(),
            found: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(CrdaError::EmptyDataset);
    }
    let count = pred.iter().zip(truth).filter(|&(p, t)| p != t).count();
    Ok((count, count as f64 / pred.len() as f64))
}

/// Number of features the model's coefficient matrix retains.
pub fn nfs(model: &TrainedModel) -> usize {
    model.selected_features().len()
}

/// Detection rate and false-positive rate, both in percent.
///
/// DR is the share of the true differential set that was selected; FP is the
/// share of the selection that is not truly differential (zero for an empty
/// selection).
pub fn dr_fp(selected: &[usize], truth: &[usize]) -> Result<(f64, f64), CrdaError> {
    if truth.is_empty() {
        return Err(CrdaError::EmptyTruth);
    }
    let truth_set: BTreeSet<usize> = truth.iter().copied().collect();
    let selected_set: BTreeSet<usize> = selected.iter().copied().collect();
    let hits = selected_set.intersection(&truth_set).count();
    let dr = 100.0 * hits as f64 / truth_set.len() as f64;
    let fp = if selected_set.is_empty() {
        0.0
    } else {
        100.0 * (selected_set.len() - hits) as f64 / selected_set.len() as f64
    };
    Ok((dr, fp))
}

/// Predicts the test set and assembles all scores. Test labels are matched
/// to the model's groups by name; `truth` enables the DR/FP columns.
pub fn evaluate(
    model: &TrainedModel,
    test: &LabeledDataset,
    truth: Option<&[usize]>,
) -> Result<EvalResult, CrdaError> {
    let mapped = map_label_indices(model.label_names(), test)?;
    let preds = model.predict(test.x())?;
    let (te_count, te_rate) = test_error(&preds, &mapped)?;
    let support = model.selected_features();
    let (dr_percent, fp_percent) = match truth {
        Some(t) => {
            let (dr, fp) = dr_fp(support, t)?;
            (Some(dr), Some(fp))
        }
        None => (None, None),
    };
    Ok(EvalResult {
        te_count,
        te_rate,
        nfs: support.len(),
        dr_percent,
        fp_percent,
        n_test: test.n(),
    })
}

/// Mean and sample standard deviation; `None` for an empty slice.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some((mean, std))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{train, RowNorm};
    use ndarray::array;

    #[test]
    fn test_error_counts_mismatches() {
        assert_eq!(test_error(&[1, 2, 3], &[1, 2, 3]).unwrap(), (0, 0.0));
        let all_wrong: Vec<usize> = vec![9; 10];
        let truth: Vec<usize> = (0..10).collect();
        assert_eq!(test_error(&all_wrong[..9], &truth[..9]).unwrap().1, 1.0);
        assert_eq!(test_error(&all_wrong, &truth).unwrap(), (9, 0.9));

        let mut pred: Vec<usize> = vec![0; 1000];
        for slot in pred.iter_mut().take(84) {
            *slot = 1;
        }
        let zeros = vec![0usize; 1000];
        assert_eq!(test_error(&pred, &zeros).unwrap(), (84, 0.084));
    }

    #[test]
    fn test_error_is_order_invariant() {
        let pred = [0, 1, 1, 0, 2];
        let truth = [0, 1, 2, 0, 1];
        let (count, _) = test_error(&pred, &truth).unwrap();
        let rev_pred: Vec<usize> = pred.iter().rev().copied().collect();
        let rev_truth: Vec<usize> = truth.iter().rev().copied().collect();
        assert_eq!(test_error(&rev_pred, &rev_truth).unwrap().0, count);
    }

    #[test]
    fn test_error_rejects_bad_lengths() {
        assert!(matches!(
            test_error(&[0, 1], &[0]),
            Err(CrdaError::DimensionMismatch { .. })
        ));
        assert!(matches!(test_error(&[], &[]), Err(CrdaError::EmptyDataset)));
    }

    #[test]
    fn dr_fp_boundary_cases() {
        let truth: Vec<usize> = (0..10).collect();
        assert_eq!(dr_fp(&truth, &truth).unwrap(), (100.0, 0.0));

        let disjoint: Vec<usize> = (100..110).collect();
        assert_eq!(dr_fp(&disjoint, &truth).unwrap(), (0.0, 100.0));

        assert_eq!(dr_fp(&[], &truth).unwrap(), (0.0, 0.0));

        assert!(matches!(dr_fp(&[1], &[]), Err(CrdaError::EmptyTruth)));
    }

    #[test]
    fn dr_fp_reproduces_published_score_triples() {
        let truth: Vec<usize> = (0..200).collect();

        let mut selected: Vec<usize> = (0..180).collect();
        selected.extend(1000..1025);
        assert_eq!(selected.len(), 205);
        let (dr, fp) = dr_fp(&selected, &truth).unwrap();
        assert_eq!(dr, 90.0);
        assert!((fp - 12.0).abs() <= 1.0, "fp {fp}");

        let mut selected: Vec<usize> = (0..184).collect();
        selected.extend(1000..1056);
        assert_eq!(selected.len(), 240);
        let (dr, fp) = dr_fp(&selected, &truth).unwrap();
        assert_eq!(dr, 92.0);
        assert!((fp - 23.0).abs() <= 1.0, "fp {fp}");
    }

    #[test]
    fn dr_fp_counts_decompose_the_selection() {
        let truth: Vec<usize> = (0..50).collect();
        let selected: Vec<usize> = (30..80).collect();
        let (dr, fp) = dr_fp(&selected, &truth).unwrap();
        let hits = dr * truth.len() as f64 / 100.0;
        let misses = fp * selected.len() as f64 / 100.0;
        assert_eq!(hits, 20.0);
        assert_eq!(misses, 30.0);
        assert_eq!(hits + misses, selected.len() as f64);
    }

    #[test]
    fn evaluate_combines_all_scores() {
        let x = array![
            [2.0, 0.1, 0.0],
            [2.2, -0.1, 0.1],
            [-2.0, 0.0, 0.0],
            [-2.1, 0.1, -0.1],
        ];
        let labels = vec!["a".to_string(), "a".into(), "b".into(), "b".into()];
        let ds = crate::dataset::LabeledDataset::from_raw_labels(x, &labels, None).unwrap();
        let model = train(&ds, 0.0, 1, RowNorm::LInf, None).unwrap();
        assert_eq!(nfs(&model), 1);

        let result = evaluate(&model, &ds, Some(&[0])).unwrap();
        assert_eq!(result.te_count, 0);
        assert_eq!(result.te_rate, 0.0);
        assert_eq!(result.nfs, 1);
        assert_eq!(result.dr_percent, Some(100.0));
        assert_eq!(result.fp_percent, Some(0.0));
        assert_eq!(result.n_test, 4);

        let without_truth = evaluate(&model, &ds, None).unwrap();
        assert_eq!(without_truth.dr_percent, None);
    }

    #[test]
    fn evaluate_matches_labels_by_name() {
        let x = array![[2.0, 0.0], [2.1, 0.1], [-2.0, 0.0], [-2.2, 0.0]];
        let labels = vec!["a".to_string(), "a".into(), "b".into(), "b".into()];
        let ds = crate::dataset::LabeledDataset::from_raw_labels(x, &labels, None).unwrap();
        let model = train(&ds, 0.0, 2, RowNorm::L2, None).unwrap();

        let flipped = array![[-2.0, 0.0], [2.0, 0.1]];
        let flipped_labels = vec!["b".to_string(), "a".into()];
        let test =
            crate::dataset::LabeledDataset::from_raw_labels(flipped, &flipped_labels, None)
                .unwrap();
        let result = evaluate(&model, &test, None).unwrap();
        assert_eq!(result.te_count, 0);

        let odd = array![[0.0, 0.0]];
        let odd_labels = vec!["z".to_string()];
        let bad = crate::dataset::LabeledDataset::from_raw_labels(odd, &odd_labels, None).unwrap();
        assert!(matches!(
            evaluate(&model, &bad, None),
            Err(CrdaError::UnknownLabel { .. })
        ));
    }

    #[test]
    fn mean_std_handles_small_slices() {
        assert_eq!(mean_std(&[]), None);
        assert_eq!(mean_std(&[3.0]), Some((3.0, 0.0)));
        let (mean, std) = mean_std(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(mean, 2.5);
        assert!((std - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }
}
