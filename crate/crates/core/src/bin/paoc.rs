//! Command-line surface: dataset prep, training, evaluation, gradient
//! checking, synthetic data generation, and multi-run sweeps.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use paoc::checkpoint::Checkpoint;
use paoc::config::parse_mode;
use paoc::data::{
    apply_minmax, fit_minmax, kddcup_split, load_csv, load_encoded_csv, synth_generate,
    write_encoded_csv, SchemaSpec, SplitSpec, SynthKind,
};
use paoc::error::{Error, Result};
use paoc::eval::GeneratorTestMode;
use paoc::models::{build_generic_ae, AeRole, DataRange};
use paoc::nn::{backward, forward, grad_check, init_params, mse_loss};
use paoc::pipeline::{
    evaluate_checkpoint, multirun, train_from_csv, write_histogram_csv, write_manifest_csv,
    write_report_csv, EvalOptions, MultirunRequest, ScoreKind,
};
use paoc::pseudo::clip_and_recompute;
use paoc::rng::RngState;
use paoc::tensor::Tensor2D;
use paoc::trainer::g_loss_and_grads;

#[derive(Parser)]
#[command(
    name = "paoc",
    version,
    about = "One-class anomaly detection with pseudo anomalies from learned noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a raw labeled CSV, split it train/test, and min-max normalize
    /// with training statistics.
    Prep {
        /// Raw input CSV.
        #[arg(long = "in")]
        input: PathBuf,
        /// Column schema file.
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        out_train: PathBuf,
        #[arg(long)]
        out_test: PathBuf,
        /// Normalization statistics sidecar (default: <out-train>.stats.csv).
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fraction of normal samples used for training.
        #[arg(long, default_value_t = 0.5)]
        train_fraction: f64,
        /// Fraction of anomalous samples placed in the test set.
        #[arg(long, default_value_t = 0.5)]
        test_anomaly_fraction: f64,
        /// Skip a header row in the raw CSV.
        #[arg(long)]
        has_header: bool,
        /// Keep raw feature values; the stats sidecar is still written.
        #[arg(long)]
        no_normalize: bool,
    },
    /// Train a model on an encoded CSV and write a checkpoint.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// key=value configuration file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output checkpoint path.
        #[arg(long)]
        out: PathBuf,
        /// Per-iteration telemetry CSV.
        #[arg(long)]
        telemetry: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// learned | gaussian:SIGMA | baseline
        #[arg(long, default_value = "learned")]
        mode: String,
    },
    /// Score a labeled encoded CSV with a checkpoint and report metrics.
    Eval {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Metrics report CSV.
        #[arg(long)]
        report: PathBuf,
        /// off | clean | noisy
        #[arg(long, default_value = "off")]
        with_generator: String,
        /// mse | psnr
        #[arg(long, default_value = "mse")]
        score: String,
        #[arg(long, default_value_t = 0.2)]
        threshold_fraction: f64,
        /// Score histogram CSV.
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Train and evaluate across consecutive seeds, aggregating metrics.
    Multirun {
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long)]
        train_data: PathBuf,
        #[arg(long)]
        eval_data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Manifest CSV with per-run and aggregate rows.
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// learned | gaussian:SIGMA | baseline
        #[arg(long, default_value = "learned")]
        mode: String,
        /// off | clean | noisy
        #[arg(long, default_value = "off")]
        with_generator: String,
        /// mse | psnr
        #[arg(long, default_value = "mse")]
        score: String,
        #[arg(long, default_value_t = 0.2)]
        threshold_fraction: f64,
        /// Keep per-run checkpoints in this directory.
        #[arg(long)]
        checkpoint_dir: Option<PathBuf>,
    },
    /// Verify analytic gradients of all three training losses against
    /// central finite differences.
    Gradcheck {
        /// "tiny-fg" or comma dims input,h1,h2,...
        #[arg(long, default_value = "tiny-fg")]
        spec: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Finite-difference step.
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
    },
    /// Generate a labeled synthetic dataset.
    Synth {
        /// blob | ring | two-blobs
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n_normal: usize,
        #[arg(long)]
        n_anomalous: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Prep {
            input,
            schema,
            out_train,
            out_test,
            stats,
            seed,
            train_fraction,
            test_anomaly_fraction,
            has_header,
            no_normalize,
        } => {
            let schema = SchemaSpec::load(&schema)?;
            let dataset = load_csv(&input, &schema, has_header)?;
            let split_spec = SplitSpec::new(train_fraction, test_anomaly_fraction, seed)?;
            let (train_raw, test_raw) = kddcup_split(&dataset, &split_spec)?;
            let norm = fit_minmax(&train_raw)?;
            let (train, test) = if no_normalize {
                (train_raw, test_raw)
            } else {
                (
                    apply_minmax(&train_raw, &norm)?,
                    apply_minmax(&test_raw, &norm)?,
                )
            };
            write_encoded_csv(&train, &out_train)?;
            write_encoded_csv(&test, &out_test)?;
            let stats_path = stats.unwrap_or_else(|| sidecar_path(&out_train));
            norm.save(&stats_path, &train.feature_names)?;
            println!(
                "prep: {} features; train {} rows, test {} rows ({} anomalous); stats {}",
                train.n_features(),
                train.n_samples(),
                test.n_samples(),
                test.labels
                    .as_ref()
                    .map_or(0, |l| l.iter().filter(|&&x| x).count()),
                stats_path.display()
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Train {
            data,
            config,
            out,
            telemetry,
            seed,
            mode,
        } => {
            let mode = parse_mode(&mode)?;
            let model = train_from_csv(&data, config.as_deref(), seed, mode, telemetry.as_deref())?;
            let ckpt = Checkpoint::from_model(&model);
            ckpt.save(&out)?;
            let last = model.telemetry.last();
            println!(
                "train: {} iterations; final loss_f {}; final loss_g {}",
                model.telemetry.len(),
                last.map_or("-".into(), |r| r.loss_f.to_string()),
                model
                    .telemetry
                    .iter()
                    .rev()
                    .find_map(|r| r.loss_g)
                    .map_or("-".into(), |v| v.to_string()),
            );
            println!("checkpoint written to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::Eval {
            ckpt,
            data,
            report,
            with_generator,
            score,
            threshold_fraction,
            histogram,
        } => {
            let ckpt = Checkpoint::load(&ckpt)?;
            let dataset = load_encoded_csv(&data)?;
            let options = EvalOptions {
                generator_mode: parse_generator_mode(&with_generator)?,
                score: parse_score_kind(&score)?,
                threshold_fraction,
                histogram_bins: 50,
            };
            let outcome = evaluate_checkpoint(&ckpt, &dataset, &options)?;
            print_metrics("eval", &outcome.report.mean, threshold_fraction);
            for flag in &outcome.flags {
                println!("  note: {flag}");
            }
            write_report_csv(&outcome.report, &outcome.flags, &report)?;
            if let Some(path) = histogram {
                write_histogram_csv(&outcome.histogram, &path)?;
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Multirun {
            runs,
            train_data,
            eval_data,
            config,
            manifest,
            seed,
            mode,
            with_generator,
            score,
            threshold_fraction,
            checkpoint_dir,
        } => {
            let request = MultirunRequest {
                train_data: &train_data,
                eval_data: &eval_data,
                config_path: config.as_deref(),
                base_seed: seed,
                runs,
                mode: parse_mode(&mode)?,
                eval_options: EvalOptions {
                    generator_mode: parse_generator_mode(&with_generator)?,
                    score: parse_score_kind(&score)?,
                    threshold_fraction,
                    histogram_bins: 50,
                },
                checkpoint_dir: checkpoint_dir.as_deref(),
            };
            let result = multirun(&request)?;
            for entry in &result.entries {
                match &entry.outcome {
                    Ok(m) => print_metrics(&format!("seed {}", entry.seed), m, threshold_fraction),
                    Err(msg) => println!("seed {}: failed: {msg}", entry.seed),
                }
            }
            if let Some(agg) = &result.aggregate {
                print_metrics("mean", &agg.mean, threshold_fraction);
                print_metrics("max", &agg.max, threshold_fraction);
            }
            write_manifest_csv(&result, &manifest)?;
            if result.all_succeeded() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("error: at least one run failed; see {}", manifest.display());
                Ok(ExitCode::FAILURE)
            }
        }

        Command::Gradcheck { spec, seed, step } => gradcheck_command(&spec, seed, step),

        Command::Synth {
            kind,
            n_normal,
            n_anomalous,
            dim,
            seed,
            out,
        } => {
            let kind = SynthKind::parse(&kind)?;
            let ds = synth_generate(kind, n_normal, n_anomalous, dim, seed)?;
            write_encoded_csv(&ds, &out)?;
            println!(
                "synth: {} rows ({} anomalous), {} features -> {}",
                ds.n_samples(),
                n_anomalous,
                ds.n_features(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn sidecar_path(out_train: &std::path::Path) -> PathBuf {
    let mut name = out_train.file_name().unwrap_or_default().to_os_string();
    name.push(".stats.csv");
    out_train.with_file_name(name)
}

fn parse_generator_mode(value: &str) -> Result<GeneratorTestMode> {
    match value {
        "off" => Ok(GeneratorTestMode::WithoutG),
        "clean" => Ok(GeneratorTestMode::WithGCleanTarget),
        "noisy" => Ok(GeneratorTestMode::WithGNoisyTarget),
        other => Err(Error::InvalidArgument(format!(
            "--with-generator must be off, clean, or noisy; got {other:?}"
        ))),
    }
}

fn parse_score_kind(value: &str) -> Result<ScoreKind> {
    match value {
        "mse" => Ok(ScoreKind::Mse),
        "psnr" => Ok(ScoreKind::Psnr),
        other => Err(Error::InvalidArgument(format!(
            "--score must be mse or psnr; got {other:?}"
        ))),
    }
}

fn print_metrics(label: &str, m: &paoc::eval::RunMetrics, threshold_fraction: f64) {
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
    println!(
        "{label}: auc {} | f1 {} precision {} recall {} (top {:.0}%)",
        fmt(m.auc),
        fmt(m.f1),
        fmt(m.precision),
        fmt(m.recall),
        threshold_fraction * 100.0
    );
}

const GRADCHECK_THRESHOLD: f64 = 1e-6;

/// Check all three training losses on a small F/G pair: plain reconstruction,
/// reconstruction of a fixed pseudo batch against its normal source, and the
/// generator loss through a frozen F at several lambda values.
fn gradcheck_command(spec: &str, seed: u64, step: f64) -> Result<ExitCode> {
    let (input_dim, f_hidden) = parse_gradcheck_spec(spec)?;
    let g_hidden = if f_hidden.len() > 1 {
        f_hidden[..f_hidden.len() - 1].to_vec()
    } else {
        f_hidden.clone()
    };
    let range = DataRange::Unbounded;
    let f_spec = build_generic_ae(input_dim, &f_hidden, range, AeRole::MainF)?;
    let g_spec = build_generic_ae(input_dim, &g_hidden, range, AeRole::NoiseG)?;

    let root = RngState::new(seed);
    let f_params = init_params(&f_spec, &mut root.fork(1))?;
    let g_params = init_params(&g_spec, &mut root.fork(2))?;
    let mut data_rng = root.fork(3);
    let x = Tensor2D::from_vec(
        4,
        input_dim,
        (0..4 * input_dim)
            .map(|_| data_rng.next_range(-1.0, 1.0))
            .collect(),
    )?;

    let mut worst = 0.0_f64;
    let mut report = |name: &str, err: f64| {
        println!(
            "gradcheck {name}: max relative error {err:.3e} ({})",
            if err < GRADCHECK_THRESHOLD {
                "pass"
            } else {
                "FAIL"
            }
        );
        worst = worst.max(err);
    };

    // test hook: corrupt one analytic entry so the negative control fails
    let corrupt = std::env::var_os("PAOC_GRADCHECK_CORRUPT").is_some();

    // reconstruction loss on normal input
    let err = grad_check(&f_params, step, |p| {
        let (out, cache) = forward(p, &f_spec, &x)?;
        let (loss, grad) = mse_loss(&out, &x)?;
        let (mut grads, _) = backward(p, &f_spec, &cache, &grad)?;
        if corrupt {
            let w = grads.weights[0].get(0, 0);
            grads.weights[0].set(0, 0, w + 0.5);
        }
        Ok((loss, grads))
    })?;
    report("reconstruction", err);

    // pseudo input against its normal source, fixed noise
    let raw_noise = {
        let mut rng = root.fork(4);
        Tensor2D::from_vec(
            4,
            input_dim,
            (0..4 * input_dim)
                .map(|_| 0.3 * rng.next_gaussian())
                .collect(),
        )?
    };
    let (pseudo, _) = clip_and_recompute(&x, &raw_noise, range)?;
    let err = grad_check(&f_params, step, |p| {
        let (out, cache) = forward(p, &f_spec, &pseudo.x_pseudo)?;
        let (loss, grad) = mse_loss(&out, &pseudo.x_normal)?;
        let (grads, _) = backward(p, &f_spec, &cache, &grad)?;
        Ok((loss, grads))
    })?;
    report("pseudo-reconstruction", err);

    // generator loss through the frozen F
    for lambda in [0.0, 0.1, 1.0] {
        let err = grad_check(&g_params, step, |gp| {
            let (loss, _, grads) =
                g_loss_and_grads(gp, &g_spec, &f_params, &f_spec, &x, lambda, range)?;
            Ok((loss, grads))
        })?;
        report(&format!("generator lambda={lambda}"), err);
    }

    if worst < GRADCHECK_THRESHOLD {
        println!("gradcheck: all checks passed (worst {worst:.3e})");
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: gradient check failed (worst {worst:.3e})");
        Ok(ExitCode::FAILURE)
    }
}

fn parse_gradcheck_spec(spec: &str) -> Result<(usize, Vec<usize>)> {
    if spec == "tiny-fg" {
        return Ok((4, vec![3]));
    }
    let dims: Vec<usize> = spec
        .split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad dimension {part:?} in --spec")))
        })
        .collect::<Result<_>>()?;
    if dims.len() < 2 {
        return Err(Error::InvalidArgument(
            "--spec dims need at least input,hidden".into(),
        ));
    }
    Ok((dims[0], dims[1..].to_vec()))
}
