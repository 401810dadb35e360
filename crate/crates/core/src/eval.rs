//! Anomaly scoring and evaluation: reconstruction error, PSNR, min-max
//! normalization, rank-based ROC-AUC, the top-fraction thresholding
//! protocol, generator-in-the-loop test variants, and multi-run
//! aggregation.

use crate::error::{Error, Result};
use crate::models::DataRange;
use crate::nn::{forward_output, MlpParams, MlpSpec};
use crate::pseudo::clip_and_recompute;
use crate::tensor::Tensor2D;

/// MSE values below this are treated as exact reconstructions for PSNR.
pub const PSNR_MSE_FLOOR: f64 = 1e-12;

/// Per-sample scores paired with binary labels; `true` marks the anomalous
/// (positive) class.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScores {
    pub scores: Vec<f64>,
    pub labels: Vec<bool>,
}

impl LabeledScores {
    pub fn new(scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} scores vs {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
            return Err(Error::NonFinite(format!("score {bad}")));
        }
        Ok(LabeledScores { scores, labels })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// How the trained generator participates at test time, if at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorTestMode {
    /// Default deployment: only F runs.
    WithoutG,
    /// Noise the input with G, score F's output against the clean input.
    WithGCleanTarget,
    /// Noise the input with G, score F's output against the noisy input.
    WithGNoisyTarget,
}

/// Reconstruction-error anomaly score: per-sample squared Frobenius norm of
/// F(x) - x, unscaled.
pub fn recon_score(f_params: &MlpParams, f_spec: &MlpSpec, x: &Tensor2D) -> Result<Vec<f64>> {
    let out = forward_output(f_params, f_spec, x)?;
    Ok(out.sub(x)?.row_sq_norms())
}

/// Per-sample PSNR between a reconstruction and its reference:
/// 10 log10(m_max^2 / mse) with mse the per-sample mean squared error.
/// Samples whose MSE falls below [`PSNR_MSE_FLOOR`] are capped and flagged.
pub fn psnr_score(x_hat: &Tensor2D, x: &Tensor2D, m_max: f64) -> Result<(Vec<f64>, Vec<bool>)> {
    if !m_max.is_finite() || m_max <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "m_max must be positive and finite, got {m_max}"
        )));
    }
    let d = x.cols() as f64;
    let sq = x_hat.sub(x)?.row_sq_norms();
    let mut values = Vec::with_capacity(sq.len());
    let mut capped = Vec::with_capacity(sq.len());
    for s in sq {
        let mse = s / d;
        let is_capped = mse < PSNR_MSE_FLOOR;
        let mse = mse.max(PSNR_MSE_FLOOR);
        values.push(10.0 * (m_max * m_max / mse).log10());
        capped.push(is_capped);
    }
    Ok((values, capped))
}

/// (v - min) / (max - min). A degenerate input (max == min) maps to all
/// zeros and raises the returned flag; via the anomaly complement this
/// makes every score maximally anomalous, which is the alarm-raising choice.
pub fn minmax_normalize(values: &[f64]) -> Result<(Vec<f64>, bool)> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot normalize an empty slice".into(),
        ));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("value {bad}")));
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return Ok((vec![0.0; values.len()], true));
    }
    let range = max - min;
    Ok((values.iter().map(|v| (v - min) / range).collect(), false))
}

/// Anomaly score from normalcy score: a = 1 - q.
pub fn anomaly_from_normalcy(q: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = q.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidArgument(format!(
            "normalcy score {bad} outside [0, 1]"
        )));
    }
    Ok(q.iter().map(|v| 1.0 - v).collect())
}

/// Rank-based ROC-AUC with tie correction: the probability that a random
/// anomalous sample outscores a random normal one, counting ties as half.
pub fn roc_auc(ls: &LabeledScores) -> Result<f64> {
    let n_pos = ls.labels.iter().filter(|&&l| l).count();
    let n_neg = ls.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidArgument(
            "ROC-AUC needs both classes present".into(),
        ));
    }
    let mut order: Vec<usize> = (0..ls.len()).collect();
    order.sort_by(|&a, &b| ls.scores[a].total_cmp(&ls.scores[b]));

    // average ranks over tie groups, 1-based
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && ls.scores[order[j + 1]] == ls.scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if ls.labels[idx] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }
    let n_pos_f = n_pos as f64;
    Ok((rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0) / (n_pos_f * n_neg as f64))
}

/// Flag the floor(fraction * N) highest-scoring samples as predicted
/// anomalies (ties broken by ascending index) and report precision, recall,
/// and F1 with the anomaly class as positive.
pub fn topk_threshold_metrics(ls: &LabeledScores, fraction: f64) -> Result<(f64, f64, f64)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold fraction must be in (0, 1), got {fraction}"
        )));
    }
    let n_pos = ls.labels.iter().filter(|&&l| l).count();
    if n_pos == 0 {
        return Err(Error::InvalidArgument(
            "recall is undefined without positive labels".into(),
        ));
    }
    let k = (fraction * ls.len() as f64).floor() as usize;
    let mut order: Vec<usize> = (0..ls.len()).collect();
    order.sort_by(|&a, &b| ls.scores[b].total_cmp(&ls.scores[a]).then(a.cmp(&b)));
    let tp = order[..k].iter().filter(|&&i| ls.labels[i]).count() as f64;
    let precision = if k == 0 { 0.0 } else { tp / k as f64 };
    let recall = tp / n_pos as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok((f1, precision, recall))
}

/// Score test data with the trained generator in the loop: the input is
/// noised as x' = clip(x + G(x)) before reconstruction. The loss target is
/// the clean input or the noisy one depending on the mode.
pub fn score_with_generator(
    f_params: &MlpParams,
    f_spec: &MlpSpec,
    g_params: &MlpParams,
    g_spec: &MlpSpec,
    x: &Tensor2D,
    mode: GeneratorTestMode,
    range: DataRange,
) -> Result<Vec<f64>> {
    if mode == GeneratorTestMode::WithoutG {
        return Err(Error::InvalidArgument(
            "WithoutG scoring is recon_score; no generator involved".into(),
        ));
    }
    let raw = forward_output(g_params, g_spec, x)?;
    let (batch, _) = clip_and_recompute(x, &raw, range)?;
    let out = forward_output(f_params, f_spec, &batch.x_pseudo)?;
    let target = match mode {
        GeneratorTestMode::WithGCleanTarget => x,
        GeneratorTestMode::WithGNoisyTarget => &batch.x_pseudo,
        GeneratorTestMode::WithoutG => unreachable!(),
    };
    Ok(out.sub(target)?.row_sq_norms())
}

/// Metric values of a single evaluation run. Absent metrics were not
/// computed (e.g. AUC on single-class data).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunMetrics {
    pub auc: Option<f64>,
    pub f1: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

impl RunMetrics {
    fn fields(&self) -> [Option<f64>; 4] {
        [self.auc, self.f1, self.precision, self.recall]
    }
}

/// Metrics of one or more runs with their mean and max.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub mean: RunMetrics,
    pub max: RunMetrics,
    pub threshold_fraction: f64,
    pub n_runs: usize,
    pub per_run: Vec<RunMetrics>,
}

impl MetricsReport {
    pub fn single(run: RunMetrics, threshold_fraction: f64) -> Self {
        MetricsReport {
            mean: run,
            max: run,
            threshold_fraction,
            n_runs: 1,
            per_run: vec![run],
        }
    }
}

/// Combine several reports: arithmetic mean per metric, with the max
/// retained alongside. All runs must report the same set of metrics.
pub fn aggregate_runs(reports: &[MetricsReport]) -> Result<MetricsReport> {
    if reports.is_empty() {
        return Err(Error::InvalidArgument("no reports to aggregate".into()));
    }
    let threshold_fraction = reports[0].threshold_fraction;
    if reports
        .iter()
        .any(|r| r.threshold_fraction != threshold_fraction)
    {
        return Err(Error::InvalidArgument(
            "reports disagree on threshold fraction".into(),
        ));
    }
    let per_run: Vec<RunMetrics> = reports.iter().flat_map(|r| r.per_run.clone()).collect();
    let presence = per_run[0].fields().map(|f| f.is_some());
    for run in &per_run {
        if run.fields().map(|f| f.is_some()) != presence {
            return Err(Error::InvalidArgument(
                "runs report inconsistent metric sets".into(),
            ));
        }
    }
    let n = per_run.len() as f64;
    let reduce = |pick: fn(&RunMetrics) -> Option<f64>, maxing: bool| -> Option<f64> {
        pick(&per_run[0])?;
        let vals = per_run.iter().map(|r| pick(r).unwrap());
        Some(if maxing {
            vals.fold(f64::NEG_INFINITY, f64::max)
        } else {
            vals.sum::<f64>() / n
        })
    };
    let mean = RunMetrics {
        auc: reduce(|r| r.auc, false),
        f1: reduce(|r| r.f1, false),
        precision: reduce(|r| r.precision, false),
        recall: reduce(|r| r.recall, false),
    };
    let max = RunMetrics {
        auc: reduce(|r| r.auc, true),
        f1: reduce(|r| r.f1, true),
        precision: reduce(|r| r.precision, true),
        recall: reduce(|r| r.recall, true),
    };
    Ok(MetricsReport {
        mean,
        max,
        threshold_fraction,
        n_runs: per_run.len(),
        per_run,
    })
}

/// One histogram bin with per-class counts.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count_normal: usize,
    pub count_anomalous: usize,
}

/// Equal-width histogram over [min, max] of the scores, counted per class.
/// The last bin is right-inclusive so counts sum to the class sizes.
pub fn score_histogram(ls: &LabeledScores, n_bins: usize) -> Result<Vec<HistogramBin>> {
    if n_bins == 0 {
        return Err(Error::InvalidArgument("need at least one bin".into()));
    }
    if ls.is_empty() {
        return Err(Error::InvalidArgument("no scores to bin".into()));
    }
    let min = ls.scores.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = ls.scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = if max > min {
        (max - min) / n_bins as f64
    } else {
        1.0
    };
    let mut bins: Vec<HistogramBin> = (0..n_bins)
        .map(|i| HistogramBin {
            left: min + i as f64 * width,
            right: min + (i + 1) as f64 * width,
            count_normal: 0,
            count_anomalous: 0,
        })
        .collect();
    for (score, &label) in ls.scores.iter().zip(&ls.labels) {
        let mut idx = ((score - min) / width) as usize;
        if idx >= n_bins {
            idx = n_bins - 1;
        }
        if label {
            bins[idx].count_anomalous += 1;
        } else {
            bins[idx].count_normal += 1;
        }
    }
    Ok(bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{ActivationKind, MlpParams, MlpSpec};
    use crate::rng::RngState;

    fn identity_f(dim: usize) -> (MlpParams, MlpSpec) {
        let spec = MlpSpec::new(vec![dim, dim], vec![ActivationKind::Identity]).unwrap();
        let mut params = MlpParams::zeros(&spec);
        for i in 0..dim {
            params.weights[0].set(i, i, 1.0);
        }
        (params, spec)
    }

    #[test]
    fn recon_score_zero_for_identity() {
        let (params, spec) = identity_f(3);
        let x = Tensor2D::from_vec(2, 3, vec![0.1, 0.2, 0.3, -0.5, 0.4, 0.9]).unwrap();
        let scores = recon_score(&params, &spec, &x).unwrap();
        assert!(scores.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn recon_score_hand_value() {
        let spec = MlpSpec::new(vec![2, 2], vec![ActivationKind::Identity]).unwrap();
        let params = MlpParams::zeros(&spec);
        let x = Tensor2D::from_vec(1, 2, vec![1.0, 1.0]).unwrap();
        let scores = recon_score(&params, &spec, &x).unwrap();
        assert_eq!(scores, vec![2.0]);
    }

    #[test]
    fn recon_score_matches_recomputation() {
        let spec = MlpSpec::new(
            vec![3, 2, 3],
            vec![ActivationKind::Tanh, ActivationKind::Identity],
        )
        .unwrap();
        let params = crate::nn::init_params(&spec, &mut RngState::new(4)).unwrap();
        let x = Tensor2D::from_vec(3, 3, vec![0.2; 9]).unwrap();
        let scores = recon_score(&params, &spec, &x).unwrap();
        let out = forward_output(&params, &spec, &x).unwrap();
        for (i, &s) in scores.iter().enumerate() {
            let manual: f64 = out
                .row(i)
                .iter()
                .zip(x.row(i))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            assert!((s - manual).abs() < 1e-15);
        }
    }

    #[test]
    fn psnr_known_values() {
        // mse 0.01 over 2 features -> row sq norm 0.02
        let x_hat = Tensor2D::from_vec(1, 2, vec![0.1, 0.1]).unwrap();
        let x = Tensor2D::zeros(1, 2);
        let (p, capped) = psnr_score(&x_hat, &x, 1.0).unwrap();
        assert!((p[0] - 20.0).abs() < 1e-12);
        assert!(!capped[0]);

        // mse 1 -> psnr 0
        let x_hat = Tensor2D::from_vec(1, 2, vec![1.0, 1.0]).unwrap();
        let (p, _) = psnr_score(&x_hat, &x, 1.0).unwrap();
        assert!((p[0] - 0.0).abs() < 1e-12);
    }

    #[test]
    fn psnr_caps_exact_reconstruction() {
        let x = Tensor2D::from_vec(1, 4, vec![0.3; 4]).unwrap();
        let (p, capped) = psnr_score(&x, &x, 1.0).unwrap();
        assert!((p[0] - 120.0).abs() < 1e-12);
        assert!(capped[0]);
    }

    #[test]
    fn psnr_decreasing_in_mse() {
        let x = Tensor2D::zeros(3, 1);
        let x_hat = Tensor2D::from_vec(3, 1, vec![0.1, 0.2, 0.4]).unwrap();
        let (p, _) = psnr_score(&x_hat, &x, 1.0).unwrap();
        assert!(p[0] > p[1] && p[1] > p[2]);
    }

    #[test]
    fn minmax_basic_and_degenerate() {
        let (v, flag) = minmax_normalize(&[1.0, 3.0, 5.0]).unwrap();
        assert_eq!(v, vec![0.0, 0.5, 1.0]);
        assert!(!flag);

        let (v, flag) = minmax_normalize(&[7.0, 7.0, 7.0]).unwrap();
        assert_eq!(v, vec![0.0, 0.0, 0.0]);
        assert!(flag);

        assert!(minmax_normalize(&[]).is_err());
    }

    #[test]
    fn minmax_preserves_order_and_range() {
        let mut rng = RngState::new(15);
        let vals: Vec<f64> = (0..50).map(|_| rng.next_range(-10.0, 10.0)).collect();
        let (norm, _) = minmax_normalize(&vals).unwrap();
        assert!(norm.iter().all(|&v| (0.0..=1.0).contains(&v)));
        for i in 0..vals.len() {
            for j in 0..vals.len() {
                if vals[i] < vals[j] {
                    assert!(norm[i] <= norm[j]);
                }
            }
        }
    }

    #[test]
    fn anomaly_complement() {
        assert!((anomaly_from_normalcy(&[0.3]).unwrap()[0] - 0.7).abs() < 1e-15);
        assert_eq!(anomaly_from_normalcy(&[1.0]).unwrap(), vec![0.0]);
        // exactly representable values make the involution exact
        let q = vec![0.125, 0.5, 0.875];
        let twice = anomaly_from_normalcy(&anomaly_from_normalcy(&q).unwrap()).unwrap();
        assert_eq!(twice, q);
        assert!(anomaly_from_normalcy(&[1.5]).is_err());
    }

    #[test]
    fn auc_simple_cases() {
        let ls = LabeledScores::new(vec![0.1, 0.9], vec![false, true]).unwrap();
        assert_eq!(roc_auc(&ls).unwrap(), 1.0);

        let ls =
            LabeledScores::new(vec![0.5; 6], vec![true, false, true, false, true, false]).unwrap();
        assert_eq!(roc_auc(&ls).unwrap(), 0.5);

        let single = LabeledScores::new(vec![0.1, 0.2], vec![true, true]).unwrap();
        assert!(roc_auc(&single).is_err());
    }

    /// O(n^2) pairwise oracle: P(anom > norm) + 0.5 P(equal).
    fn auc_oracle(ls: &LabeledScores) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (sa, &la) in ls.scores.iter().zip(&ls.labels) {
            if !la {
                continue;
            }
            for (sn, &ln) in ls.scores.iter().zip(&ls.labels) {
                if ln {
                    continue;
                }
                pairs += 1.0;
                if sa > sn {
                    wins += 1.0;
                } else if sa == sn {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn auc_matches_pairwise_oracle() {
        let mut rng = RngState::new(99);
        for _ in 0..50 {
            let n = 2 + rng.next_below(198);
            let mut scores = Vec::with_capacity(n);
            let mut labels = Vec::with_capacity(n);
            for i in 0..n {
                // quantized scores force plenty of ties
                scores.push((rng.next_f64() * 10.0).floor() / 10.0);
                labels.push(if i < 2 { i == 0 } else { rng.bernoulli(0.4) });
            }
            let ls = LabeledScores::new(scores, labels).unwrap();
            let fast = roc_auc(&ls).unwrap();
            let slow = auc_oracle(&ls);
            assert!((fast - slow).abs() < 1e-12, "fast {fast} slow {slow}");
        }
    }

    #[test]
    fn auc_invariant_under_monotone_transform() {
        let mut rng = RngState::new(101);
        let scores: Vec<f64> = (0..60).map(|_| rng.next_f64()).collect();
        let labels: Vec<bool> = (0..60).map(|i| i % 3 == 0).collect();
        let ls = LabeledScores::new(scores.to_vec(), labels.clone()).unwrap();
        let transformed = LabeledScores::new(
            scores.iter().map(|s| (3.0 * s + 1.0).exp()).collect(),
            labels,
        )
        .unwrap();
        assert!((roc_auc(&ls).unwrap() - roc_auc(&transformed).unwrap()).abs() < 1e-12);
    }

    /// Brute-force reference for the top-fraction protocol.
    fn topk_oracle(ls: &LabeledScores, fraction: f64) -> (f64, f64, f64) {
        let n = ls.len();
        let k = (fraction * n as f64).floor() as usize;
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| ls.scores[b].total_cmp(&ls.scores[a]).then(a.cmp(&b)));
        let predicted: Vec<usize> = idx[..k].to_vec();
        let tp = predicted.iter().filter(|&&i| ls.labels[i]).count() as f64;
        let n_pos = ls.labels.iter().filter(|&&l| l).count() as f64;
        let precision = if k == 0 { 0.0 } else { tp / k as f64 };
        let recall = tp / n_pos;
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        (f1, precision, recall)
    }

    #[test]
    fn topk_hand_example() {
        // 10 samples; the two flagged are true anomalies out of 3 total
        let scores = vec![0.9, 0.8, 0.1, 0.2, 0.3, 0.15, 0.25, 0.05, 0.12, 0.22];
        let labels = vec![
            true, true, true, false, false, false, false, false, false, false,
        ];
        let ls = LabeledScores::new(scores, labels).unwrap();
        let (f1, precision, recall) = topk_threshold_metrics(&ls, 0.2).unwrap();
        assert!((precision - 1.0).abs() < 1e-15);
        assert!((recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((f1 - 0.8).abs() < 1e-15);
    }

    #[test]
    fn topk_all_positive() {
        let scores: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let labels = vec![true; 10];
        let ls = LabeledScores::new(scores, labels).unwrap();
        let (_, precision, recall) = topk_threshold_metrics(&ls, 0.2).unwrap();
        assert_eq!(precision, 1.0);
        assert_eq!(recall, 0.2);
    }

    #[test]
    fn topk_matches_oracle_on_random_instances() {
        let mut rng = RngState::new(103);
        for _ in 0..100 {
            let n = 5 + rng.next_below(45);
            let scores: Vec<f64> = (0..n).map(|_| (rng.next_f64() * 8.0).floor()).collect();
            let mut labels: Vec<bool> = (0..n).map(|_| rng.bernoulli(0.3)).collect();
            labels[0] = true;
            let ls = LabeledScores::new(scores, labels).unwrap();
            let got = topk_threshold_metrics(&ls, 0.2).unwrap();
            let want = topk_oracle(&ls, 0.2);
            assert_eq!(got, want);
        }
    }

    #[test]
    fn topk_requires_positive_labels() {
        let ls = LabeledScores::new(vec![0.1, 0.2], vec![false, false]).unwrap();
        assert!(topk_threshold_metrics(&ls, 0.2).is_err());
    }

    #[test]
    fn generator_scoring_with_zero_noise_equals_recon_score() {
        let (f_params, f_spec) = identity_f(2);
        let g_spec = MlpSpec::new(vec![2, 2], vec![ActivationKind::Identity]).unwrap();
        let g_params = MlpParams::zeros(&g_spec);
        let x = Tensor2D::from_vec(2, 2, vec![0.4, -0.2, 0.9, 0.1]).unwrap();
        let base = recon_score(&f_params, &f_spec, &x).unwrap();
        for mode in [
            GeneratorTestMode::WithGCleanTarget,
            GeneratorTestMode::WithGNoisyTarget,
        ] {
            let scored = score_with_generator(
                &f_params,
                &f_spec,
                &g_params,
                &g_spec,
                &x,
                mode,
                DataRange::Unbounded,
            )
            .unwrap();
            assert_eq!(scored, base);
        }
    }

    #[test]
    fn generator_scoring_modes_differ_with_nonzero_noise() {
        let (f_params, f_spec) = identity_f(2);
        let g_spec = MlpSpec::new(vec![2, 2], vec![ActivationKind::Identity]).unwrap();
        let mut g_params = MlpParams::zeros(&g_spec);
        g_params.biases[0] = vec![0.5, -0.25];
        let x = Tensor2D::from_vec(1, 2, vec![0.1, 0.3]).unwrap();
        let clean = score_with_generator(
            &f_params,
            &f_spec,
            &g_params,
            &g_spec,
            &x,
            GeneratorTestMode::WithGCleanTarget,
            DataRange::Unbounded,
        )
        .unwrap();
        let noisy = score_with_generator(
            &f_params,
            &f_spec,
            &g_params,
            &g_spec,
            &x,
            GeneratorTestMode::WithGNoisyTarget,
            DataRange::Unbounded,
        )
        .unwrap();
        // identity F: clean target sees exactly the injected noise, noisy sees zero
        assert!((clean[0] - (0.25 + 0.0625)).abs() < 1e-15);
        assert_eq!(noisy[0], 0.0);
        assert_ne!(clean, noisy);
    }

    #[test]
    fn without_g_mode_is_rejected() {
        let (f_params, f_spec) = identity_f(2);
        let x = Tensor2D::zeros(1, 2);
        assert!(score_with_generator(
            &f_params,
            &f_spec,
            &f_params,
            &f_spec,
            &x,
            GeneratorTestMode::WithoutG,
            DataRange::Unbounded,
        )
        .is_err());
    }

    #[test]
    fn aggregate_single_and_pair() {
        let a = MetricsReport::single(
            RunMetrics {
                auc: None,
                f1: Some(0.9),
                precision: Some(0.85),
                recall: Some(0.95),
            },
            0.2,
        );
        let same = aggregate_runs(std::slice::from_ref(&a)).unwrap();
        assert_eq!(same.mean, a.mean);
        assert_eq!(same.n_runs, 1);

        let b = MetricsReport::single(
            RunMetrics {
                auc: None,
                f1: Some(0.8),
                precision: Some(0.75),
                recall: Some(0.85),
            },
            0.2,
        );
        let agg = aggregate_runs(&[a, b]).unwrap();
        assert_eq!(agg.n_runs, 2);
        assert!((agg.mean.f1.unwrap() - 0.85).abs() < 1e-15);
        assert!((agg.max.f1.unwrap() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn aggregate_twenty_identical() {
        let r = MetricsReport::single(
            RunMetrics {
                auc: Some(0.7),
                f1: Some(0.6),
                precision: Some(0.5),
                recall: Some(0.75),
            },
            0.2,
        );
        let agg = aggregate_runs(&vec![r.clone(); 20]).unwrap();
        assert_eq!(agg.n_runs, 20);
        assert!((agg.mean.auc.unwrap() - 0.7).abs() < 1e-15);
        assert!((agg.max.auc.unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn aggregate_rejects_inconsistent_presence() {
        let a = MetricsReport::single(
            RunMetrics {
                auc: Some(0.7),
                ..Default::default()
            },
            0.2,
        );
        let b = MetricsReport::single(
            RunMetrics {
                f1: Some(0.7),
                ..Default::default()
            },
            0.2,
        );
        assert!(aggregate_runs(&[a, b]).is_err());
        assert!(aggregate_runs(&[]).is_err());
    }

    #[test]
    fn histogram_counts_sum_per_class() {
        let mut rng = RngState::new(104);
        let scores: Vec<f64> = (0..200).map(|_| rng.next_f64()).collect();
        let labels: Vec<bool> = (0..200).map(|i| i % 4 == 0).collect();
        let ls = LabeledScores::new(scores, labels).unwrap();
        let bins = score_histogram(&ls, 16).unwrap();
        assert_eq!(bins.len(), 16);
        let normal: usize = bins.iter().map(|b| b.count_normal).sum();
        let anomalous: usize = bins.iter().map(|b| b.count_anomalous).sum();
        assert_eq!(normal, 150);
        assert_eq!(anomalous, 50);
    }
}
