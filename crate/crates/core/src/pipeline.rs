//! High-level entry points shared by the CLI and the C bindings: train from
//! an encoded CSV, evaluate a checkpoint, and run seed sweeps with
//! aggregation.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::checkpoint::Checkpoint;
use crate::config::TrainSettings;
use crate::data::{load_encoded_csv, EncodedDataset};
use crate::error::{Error, Result};
use crate::eval::{
    aggregate_runs, anomaly_from_normalcy, minmax_normalize, psnr_score, recon_score, roc_auc,
    score_histogram, score_with_generator, topk_threshold_metrics, GeneratorTestMode, HistogramBin,
    LabeledScores, MetricsReport, RunMetrics,
};
use crate::models::DataRange;
use crate::nn::forward_output;
use crate::pseudo::clip_and_recompute;
use crate::tensor::Tensor2D;
use crate::trainer::{train, BatchKind, PseudoMode, TelemetryRow, TelemetrySink, TrainedModel};

/// Streams telemetry rows to a CSV file, flushing after every row so an
/// aborted run keeps what it produced.
pub struct CsvTelemetrySink {
    writer: BufWriter<File>,
    path: PathBuf,
}

impl CsvTelemetrySink {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = BufWriter::new(file);
        writeln!(writer, "iteration,batch_kind,loss_f,loss_g,noise_norm")
            .map_err(|e| Error::io(path, e))?;
        Ok(CsvTelemetrySink {
            writer,
            path: path.to_owned(),
        })
    }
}

impl TelemetrySink for CsvTelemetrySink {
    fn record(&mut self, row: &TelemetryRow) -> Result<()> {
        let kind = match row.batch_kind {
            BatchKind::Normal => "normal",
            BatchKind::Pseudo => "pseudo",
        };
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        writeln!(
            self.writer,
            "{},{},{},{},{}",
            row.iteration,
            kind,
            row.loss_f,
            opt(row.loss_g),
            opt(row.noise_norm)
        )
        .and_then(|_| self.writer.flush())
        .map_err(|e| Error::io(&self.path, e))
    }
}

/// Train on an encoded CSV (labels, if any, are ignored; the protocol
/// guarantees training data is normal-only). Returns the trained model.
pub fn train_from_csv(
    data_path: &Path,
    config_path: Option<&Path>,
    seed: u64,
    mode: PseudoMode,
    telemetry_path: Option<&Path>,
) -> Result<TrainedModel> {
    let dataset = load_encoded_csv(data_path)?;
    let settings = match config_path {
        Some(p) => TrainSettings::load(p)?,
        None => TrainSettings::default(),
    };
    let (ae_config, train_config) = settings.resolve(dataset.n_features(), seed, mode)?;
    match telemetry_path {
        Some(p) => {
            let mut sink = CsvTelemetrySink::create(p)?;
            train(&dataset.features, &ae_config, &train_config, &mut sink)
        }
        None => train(
            &dataset.features,
            &ae_config,
            &train_config,
            &mut crate::trainer::NullSink,
        ),
    }
}

/// Which per-sample quantity drives the anomaly score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    /// Reconstruction error, min-max normalized across the test set.
    Mse,
    /// PSNR, min-max normalized into a normalcy score, then complemented.
    Psnr,
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub generator_mode: GeneratorTestMode,
    pub score: ScoreKind,
    pub threshold_fraction: f64,
    pub histogram_bins: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            generator_mode: GeneratorTestMode::WithoutG,
            score: ScoreKind::Mse,
            threshold_fraction: 0.2,
            histogram_bins: 50,
        }
    }
}

/// Everything a single evaluation produced beyond the headline metrics.
#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub report: MetricsReport,
    pub scores: LabeledScores,
    pub histogram: Vec<HistogramBin>,
    /// Degenerate normalization, PSNR caps, and similar notices.
    pub flags: Vec<String>,
}

/// Score a dataset with a checkpoint and compute the evaluation metrics.
pub fn evaluate_checkpoint(
    ckpt: &Checkpoint,
    data: &EncodedDataset,
    options: &EvalOptions,
) -> Result<EvalOutcome> {
    let labels = data.labels_or_err()?;
    let x = &data.features;
    let mut flags = Vec::new();

    let anomaly_raw: Vec<f64> = match options.score {
        ScoreKind::Mse => match options.generator_mode {
            GeneratorTestMode::WithoutG => recon_score(&ckpt.f_params, &ckpt.ae_config.f_spec, x)?,
            mode => {
                let (g_params, g_spec) = generator_of(ckpt)?;
                score_with_generator(
                    &ckpt.f_params,
                    &ckpt.ae_config.f_spec,
                    g_params,
                    g_spec,
                    x,
                    mode,
                    ckpt.ae_config.data_range,
                )?
            }
        },
        ScoreKind::Psnr => {
            let (x_hat, reference) = reconstruction_pair(ckpt, x, options.generator_mode)?;
            let m_max = match ckpt.ae_config.data_range {
                DataRange::Bounded { hi, .. } => hi,
                DataRange::Unbounded => {
                    let observed = x.data().iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
                    flags.push(format!(
                        "psnr peak value taken from data (max |x| = {observed}); range is unbounded"
                    ));
                    if observed > 0.0 {
                        observed
                    } else {
                        1.0
                    }
                }
            };
            let (psnr, capped) = psnr_score(&x_hat, &reference, m_max)?;
            let n_capped = capped.iter().filter(|&&c| c).count();
            if n_capped > 0 {
                flags.push(format!(
                    "{n_capped} samples hit the PSNR cap (exact reconstruction)"
                ));
            }
            let (q, degenerate) = minmax_normalize(&psnr)?;
            if degenerate {
                flags.push("degenerate PSNR normalization: all values equal".into());
            }
            anomaly_from_normalcy(&q)?
        }
    };

    let anomaly = match options.score {
        ScoreKind::Psnr => anomaly_raw,
        ScoreKind::Mse => {
            let (normalized, degenerate) = minmax_normalize(&anomaly_raw)?;
            if degenerate {
                flags.push("degenerate score normalization: all values equal".into());
            }
            normalized
        }
    };

    let scores = LabeledScores::new(anomaly, labels.to_vec())?;
    let has_pos = scores.labels.iter().any(|&l| l);
    let has_neg = scores.labels.iter().any(|&l| !l);
    let auc = if has_pos && has_neg {
        Some(roc_auc(&scores)?)
    } else {
        flags.push("single-class labels: AUC not computed".into());
        None
    };
    let (f1, precision, recall) = if has_pos {
        let (f1, p, r) = topk_threshold_metrics(&scores, options.threshold_fraction)?;
        (Some(f1), Some(p), Some(r))
    } else {
        flags.push("no positive labels: thresholded metrics not computed".into());
        (None, None, None)
    };
    let run = RunMetrics {
        auc,
        f1,
        precision,
        recall,
    };
    let histogram = score_histogram(&scores, options.histogram_bins)?;
    Ok(EvalOutcome {
        report: MetricsReport::single(run, options.threshold_fraction),
        scores,
        histogram,
        flags,
    })
}

fn generator_of(ckpt: &Checkpoint) -> Result<(&crate::nn::MlpParams, &crate::nn::MlpSpec)> {
    match &ckpt.g_params {
        Some(g) => Ok((g, &ckpt.ae_config.g_spec)),
        None => Err(Error::InvalidArgument(
            "checkpoint has no generator; it was not trained with learned noise".into(),
        )),
    }
}

/// Reconstruction and reference for PSNR under each generator mode.
fn reconstruction_pair(
    ckpt: &Checkpoint,
    x: &Tensor2D,
    mode: GeneratorTestMode,
) -> Result<(Tensor2D, Tensor2D)> {
    match mode {
        GeneratorTestMode::WithoutG => {
            let x_hat = forward_output(&ckpt.f_params, &ckpt.ae_config.f_spec, x)?;
            Ok((x_hat, x.clone()))
        }
        _ => {
            let (g_params, g_spec) = generator_of(ckpt)?;
            let raw = forward_output(g_params, g_spec, x)?;
            let (batch, _) = clip_and_recompute(x, &raw, ckpt.ae_config.data_range)?;
            let x_hat = forward_output(&ckpt.f_params, &ckpt.ae_config.f_spec, &batch.x_pseudo)?;
            let reference = match mode {
                GeneratorTestMode::WithGCleanTarget => x.clone(),
                GeneratorTestMode::WithGNoisyTarget => batch.x_pseudo,
                GeneratorTestMode::WithoutG => unreachable!(),
            };
            Ok((x_hat, reference))
        }
    }
}

/// One multirun entry: the seed and either its metrics or the failure text.
#[derive(Debug, Clone)]
pub struct RunEntry {
    pub seed: u64,
    pub outcome: std::result::Result<RunMetrics, String>,
}

/// Results of a seed sweep, aggregated in seed order.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub entries: Vec<RunEntry>,
    pub aggregate: Option<MetricsReport>,
    pub threshold_fraction: f64,
}

impl RunManifest {
    pub fn all_succeeded(&self) -> bool {
        self.entries.iter().all(|e| e.outcome.is_ok())
    }
}

pub struct MultirunRequest<'a> {
    pub train_data: &'a Path,
    pub eval_data: &'a Path,
    pub config_path: Option<&'a Path>,
    pub base_seed: u64,
    pub runs: usize,
    pub mode: PseudoMode,
    pub eval_options: EvalOptions,
    /// Directory for per-run checkpoints, if wanted.
    pub checkpoint_dir: Option<&'a Path>,
}

/// Train and evaluate with seeds base..base+runs-1. Runs execute
/// concurrently (capped by `PSEUDO_OCC_THREADS`); aggregation is in seed
/// order, so the manifest does not depend on scheduling.
pub fn multirun(req: &MultirunRequest) -> Result<RunManifest> {
    if req.runs == 0 {
        return Err(Error::InvalidArgument("need at least one run".into()));
    }
    let train_ds = load_encoded_csv(req.train_data)?;
    let eval_ds = load_encoded_csv(req.eval_data)?;
    let settings = match req.config_path {
        Some(p) => TrainSettings::load(p)?,
        None => TrainSettings::default(),
    };

    let max_threads = thread_cap(req.runs);
    let results: Mutex<Vec<Option<RunEntry>>> = Mutex::new(vec![None; req.runs]);
    let next: Mutex<usize> = Mutex::new(0);

    std::thread::scope(|scope| {
        for _ in 0..max_threads {
            scope.spawn(|| loop {
                let idx = {
                    let mut guard = next.lock().unwrap();
                    if *guard >= req.runs {
                        return;
                    }
                    let idx = *guard;
                    *guard += 1;
                    idx
                };
                let seed = req.base_seed + idx as u64;
                let outcome = single_run(&settings, &train_ds, &eval_ds, seed, req)
                    .map_err(|e| e.to_string());
                results.lock().unwrap()[idx] = Some(RunEntry { seed, outcome });
            });
        }
    });

    let entries: Vec<RunEntry> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|e| e.expect("all runs visited"))
        .collect();

    let ok_reports: Vec<MetricsReport> = entries
        .iter()
        .filter_map(|e| e.outcome.as_ref().ok())
        .map(|m| MetricsReport::single(*m, req.eval_options.threshold_fraction))
        .collect();
    let aggregate = if ok_reports.is_empty() {
        None
    } else {
        Some(aggregate_runs(&ok_reports)?)
    };
    Ok(RunManifest {
        entries,
        aggregate,
        threshold_fraction: req.eval_options.threshold_fraction,
    })
}

fn single_run(
    settings: &TrainSettings,
    train_ds: &EncodedDataset,
    eval_ds: &EncodedDataset,
    seed: u64,
    req: &MultirunRequest,
) -> Result<RunMetrics> {
    let (ae_config, train_config) = settings.resolve(train_ds.n_features(), seed, req.mode)?;
    let model = train(
        &train_ds.features,
        &ae_config,
        &train_config,
        &mut crate::trainer::NullSink,
    )?;
    let ckpt = Checkpoint::from_model(&model);
    if let Some(dir) = req.checkpoint_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        ckpt.save(&dir.join(format!("seed{seed}.ckpt")))?;
    }
    let outcome = evaluate_checkpoint(&ckpt, eval_ds, &req.eval_options)?;
    Ok(outcome.report.mean)
}

fn thread_cap(runs: usize) -> usize {
    let available = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let cap = std::env::var("PSEUDO_OCC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(available);
    cap.min(runs).max(1)
}

/// Write a manifest CSV: one row per run plus mean and max rows.
pub fn write_manifest_csv(manifest: &RunManifest, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    writeln!(w, "seed,status,auc,f1,precision,recall").map_err(|e| Error::io(path, e))?;
    for entry in &manifest.entries {
        match &entry.outcome {
            Ok(m) => writeln!(
                w,
                "{},ok,{},{},{},{}",
                entry.seed,
                opt(m.auc),
                opt(m.f1),
                opt(m.precision),
                opt(m.recall)
            ),
            Err(msg) => writeln!(w, "{},failed: {},,,,", entry.seed, msg.replace(',', ";")),
        }
        .map_err(|e| Error::io(path, e))?;
    }
    if let Some(agg) = &manifest.aggregate {
        for (label, m) in [("mean", &agg.mean), ("max", &agg.max)] {
            writeln!(
                w,
                "{},aggregate,{},{},{},{}",
                label,
                opt(m.auc),
                opt(m.f1),
                opt(m.precision),
                opt(m.recall)
            )
            .map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write a single-run metrics report as CSV.
pub fn write_report_csv(report: &MetricsReport, flags: &[String], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    writeln!(w, "metric,value").map_err(|e| Error::io(path, e))?;
    let rows = [
        ("auc", report.mean.auc),
        ("f1", report.mean.f1),
        ("precision", report.mean.precision),
        ("recall", report.mean.recall),
        ("threshold_fraction", Some(report.threshold_fraction)),
    ];
    for (name, value) in rows {
        writeln!(w, "{name},{}", opt(value)).map_err(|e| Error::io(path, e))?;
    }
    for flag in flags {
        writeln!(w, "flag,{}", flag.replace(',', ";")).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write a score histogram as CSV.
pub fn write_histogram_csv(bins: &[HistogramBin], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "bin_left,bin_right,count_normal,count_anomalous")
        .map_err(|e| Error::io(path, e))?;
    for bin in bins {
        writeln!(
            w,
            "{},{},{},{}",
            bin.left, bin.right, bin.count_normal, bin.count_anomalous
        )
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
