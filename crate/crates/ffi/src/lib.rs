//! C ABI for the paoc anomaly-detection toolkit.
//!
//! Handles are opaque pointers created and destroyed by this library; every
//! fallible call returns a [`PaocStatus`] and stores a thread-local message
//! retrievable with [`paoc_last_error_message`]. Score buffers are caller
//! allocated. The generated header lives in `include/paoc.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use paoc::checkpoint::Checkpoint;
use paoc::config::parse_mode;
use paoc::error::Error;
use paoc::eval::{
    recon_score, roc_auc, score_with_generator, topk_threshold_metrics, GeneratorTestMode,
    LabeledScores,
};
use paoc::pipeline::train_from_csv;
use paoc::tensor::Tensor2D;

/// Result codes for every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaocStatus {
    Ok = 0,
    /// Bad arguments: null pointers, shape mismatches, invalid flags.
    InvalidArgument = 1,
    /// Filesystem failures.
    Io = 2,
    /// Unreadable CSV, schema, config, or checkpoint content.
    Parse = 3,
    /// Non-finite values encountered during computation.
    Numeric = 4,
    /// A panic was caught at the boundary.
    Internal = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> PaocStatus {
    match err {
        Error::InvalidArgument(_) | Error::ShapeMismatch(_) => PaocStatus::InvalidArgument,
        Error::Io { .. } => PaocStatus::Io,
        Error::Config(_) | Error::Schema(_) | Error::CsvData { .. } | Error::Checkpoint(_) => {
            PaocStatus::Parse
        }
        Error::NonFinite(_) => PaocStatus::Numeric,
    }
}

fn fail(err: Error) -> PaocStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn invalid(message: &str) -> PaocStatus {
    set_error(message.to_string());
    PaocStatus::InvalidArgument
}

/// Runs a closure, converting panics into `Internal`.
fn guarded(f: impl FnOnce() -> PaocStatus) -> PaocStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".to_string());
            PaocStatus::Internal
        }
    }
}

unsafe fn cstr_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, PaocStatus> {
    if ptr.is_null() {
        return Err(invalid(&format!("{name} must not be null")));
    }
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| invalid(&format!("{name} is not valid UTF-8")))
}

/// A loaded model checkpoint. Opaque; create with `paoc_model_load`, destroy
/// with `paoc_model_free`.
pub struct PaocModel {
    checkpoint: Checkpoint,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn paoc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing the most recent failure on this thread, or null if
/// none. The pointer stays valid until the next failing call on the same
/// thread; do not free it.
#[no_mangle]
pub extern "C" fn paoc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |msg| msg.as_ptr())
    })
}

/// Load a checkpoint from disk.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_model` must be a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn paoc_model_load(
    path: *const c_char,
    out_model: *mut *mut PaocModel,
) -> PaocStatus {
    guarded(|| {
        if out_model.is_null() {
            return invalid("out_model must not be null");
        }
        let path = match unsafe { cstr_arg(path, "path") } {
            Ok(p) => p,
            Err(status) => return status,
        };
        match Checkpoint::load(Path::new(path)) {
            Ok(checkpoint) => {
                let model = Box::new(PaocModel { checkpoint });
                unsafe { *out_model = Box::into_raw(model) };
                PaocStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Release a model handle. Null is a no-op.
///
/// # Safety
/// `model` must have come from `paoc_model_load` and not been freed.
#[no_mangle]
pub unsafe extern "C" fn paoc_model_free(model: *mut PaocModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Number of input features the model expects.
///
/// # Safety
/// `model` and `out_dim` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn paoc_model_input_dim(
    model: *const PaocModel,
    out_dim: *mut usize,
) -> PaocStatus {
    guarded(|| {
        if model.is_null() || out_dim.is_null() {
            return invalid("model and out_dim must not be null");
        }
        let model = unsafe { &*model };
        unsafe { *out_dim = model.checkpoint.ae_config.input_dim() };
        PaocStatus::Ok
    })
}

/// Whether the checkpoint carries a trained noise generator.
///
/// # Safety
/// `model` must be a valid handle; null returns false.
#[no_mangle]
pub unsafe extern "C" fn paoc_model_has_generator(model: *const PaocModel) -> bool {
    if model.is_null() {
        return false;
    }
    unsafe { &*model }.checkpoint.g_params.is_some()
}

unsafe fn batch_from_raw(
    data: *const f64,
    n_samples: usize,
    n_features: usize,
    expected_dim: usize,
) -> Result<Tensor2D, PaocStatus> {
    if data.is_null() {
        return Err(invalid("data must not be null"));
    }
    if n_features != expected_dim {
        return Err(invalid(&format!(
            "model expects {expected_dim} features, got {n_features}"
        )));
    }
    let slice = unsafe { std::slice::from_raw_parts(data, n_samples * n_features) };
    Tensor2D::from_vec(n_samples, n_features, slice.to_vec()).map_err(fail)
}

/// Reconstruction-error anomaly scores (per-sample squared error of the
/// main autoencoder). `data` is row-major `n_samples x n_features`;
/// `out_scores` must hold `n_samples` doubles.
///
/// # Safety
/// `model`, `data`, and `out_scores` must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn paoc_model_score(
    model: *const PaocModel,
    data: *const f64,
    n_samples: usize,
    n_features: usize,
    out_scores: *mut f64,
) -> PaocStatus {
    guarded(|| {
        if model.is_null() || out_scores.is_null() {
            return invalid("model and out_scores must not be null");
        }
        let ckpt = &unsafe { &*model }.checkpoint;
        let x = match unsafe {
            batch_from_raw(data, n_samples, n_features, ckpt.ae_config.input_dim())
        } {
            Ok(x) => x,
            Err(status) => return status,
        };
        match recon_score(&ckpt.f_params, &ckpt.ae_config.f_spec, &x) {
            Ok(scores) => {
                unsafe {
                    std::slice::from_raw_parts_mut(out_scores, n_samples).copy_from_slice(&scores)
                };
                PaocStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Generator-in-the-loop test scoring. `mode` is 1 for the clean-target
/// variant and 2 for the noisy-target variant.
///
/// # Safety
/// Same as `paoc_model_score`.
#[no_mangle]
pub unsafe extern "C" fn paoc_model_score_with_generator(
    model: *const PaocModel,
    mode: i32,
    data: *const f64,
    n_samples: usize,
    n_features: usize,
    out_scores: *mut f64,
) -> PaocStatus {
    guarded(|| {
        if model.is_null() || out_scores.is_null() {
            return invalid("model and out_scores must not be null");
        }
        let mode = match mode {
            1 => GeneratorTestMode::WithGCleanTarget,
            2 => GeneratorTestMode::WithGNoisyTarget,
            other => return invalid(&format!("mode must be 1 (clean) or 2 (noisy), got {other}")),
        };
        let ckpt = &unsafe { &*model }.checkpoint;
        let Some(g_params) = &ckpt.g_params else {
            return invalid("checkpoint has no generator");
        };
        let x = match unsafe {
            batch_from_raw(data, n_samples, n_features, ckpt.ae_config.input_dim())
        } {
            Ok(x) => x,
            Err(status) => return status,
        };
        match score_with_generator(
            &ckpt.f_params,
            &ckpt.ae_config.f_spec,
            g_params,
            &ckpt.ae_config.g_spec,
            &x,
            mode,
            ckpt.ae_config.data_range,
        ) {
            Ok(scores) => {
                unsafe {
                    std::slice::from_raw_parts_mut(out_scores, n_samples).copy_from_slice(&scores)
                };
                PaocStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Train on an encoded CSV and write a checkpoint, mirroring the `train`
/// CLI subcommand. `config_path` and `telemetry_path` may be null; `mode`
/// is `learned`, `gaussian:SIGMA`, or `baseline`.
///
/// # Safety
/// All non-null pointers must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn paoc_train_csv(
    data_path: *const c_char,
    config_path: *const c_char,
    seed: u64,
    mode: *const c_char,
    out_checkpoint: *const c_char,
    telemetry_path: *const c_char,
) -> PaocStatus {
    guarded(|| {
        let data_path = match unsafe { cstr_arg(data_path, "data_path") } {
            Ok(p) => p,
            Err(status) => return status,
        };
        let mode = match unsafe { cstr_arg(mode, "mode") } {
            Ok(m) => m,
            Err(status) => return status,
        };
        let out_checkpoint = match unsafe { cstr_arg(out_checkpoint, "out_checkpoint") } {
            Ok(p) => p,
            Err(status) => return status,
        };
        let config = if config_path.is_null() {
            None
        } else {
            match unsafe { cstr_arg(config_path, "config_path") } {
                Ok(p) => Some(p),
                Err(status) => return status,
            }
        };
        let telemetry = if telemetry_path.is_null() {
            None
        } else {
            match unsafe { cstr_arg(telemetry_path, "telemetry_path") } {
                Ok(p) => Some(p),
                Err(status) => return status,
            }
        };
        let mode = match parse_mode(mode) {
            Ok(m) => m,
            Err(e) => return fail(e),
        };
        let result = train_from_csv(
            Path::new(data_path),
            config.map(Path::new),
            seed,
            mode,
            telemetry.map(Path::new),
        )
        .and_then(|model| Checkpoint::from_model(&model).save(Path::new(out_checkpoint)));
        match result {
            Ok(()) => PaocStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

unsafe fn labeled_from_raw(
    scores: *const f64,
    labels: *const u8,
    n: usize,
) -> Result<LabeledScores, PaocStatus> {
    if scores.is_null() || labels.is_null() {
        return Err(invalid("scores and labels must not be null"));
    }
    let scores = unsafe { std::slice::from_raw_parts(scores, n) }.to_vec();
    let labels = unsafe { std::slice::from_raw_parts(labels, n) };
    if let Some(bad) = labels.iter().find(|&&l| l > 1) {
        return Err(invalid(&format!("labels must be 0 or 1, got {bad}")));
    }
    LabeledScores::new(scores, labels.iter().map(|&l| l == 1).collect()).map_err(fail)
}

/// Tie-corrected ROC-AUC of anomaly scores against binary labels
/// (1 = anomalous).
///
/// # Safety
/// `scores` and `labels` must hold `n` elements; `out_auc` must be valid.
#[no_mangle]
pub unsafe extern "C" fn paoc_roc_auc(
    scores: *const f64,
    labels: *const u8,
    n: usize,
    out_auc: *mut f64,
) -> PaocStatus {
    guarded(|| {
        if out_auc.is_null() {
            return invalid("out_auc must not be null");
        }
        let ls = match unsafe { labeled_from_raw(scores, labels, n) } {
            Ok(ls) => ls,
            Err(status) => return status,
        };
        match roc_auc(&ls) {
            Ok(auc) => {
                unsafe { *out_auc = auc };
                PaocStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// F1, precision, and recall after flagging the top fraction of scores as
/// anomalous.
///
/// # Safety
/// Same layout requirements as `paoc_roc_auc`; the three out pointers must
/// be valid.
#[no_mangle]
pub unsafe extern "C" fn paoc_topk_metrics(
    scores: *const f64,
    labels: *const u8,
    n: usize,
    fraction: f64,
    out_f1: *mut f64,
    out_precision: *mut f64,
    out_recall: *mut f64,
) -> PaocStatus {
    guarded(|| {
        if out_f1.is_null() || out_precision.is_null() || out_recall.is_null() {
            return invalid("output pointers must not be null");
        }
        let ls = match unsafe { labeled_from_raw(scores, labels, n) } {
            Ok(ls) => ls,
            Err(status) => return status,
        };
        match topk_threshold_metrics(&ls, fraction) {
            Ok((f1, precision, recall)) => {
                unsafe {
                    *out_f1 = f1;
                    *out_precision = precision;
                    *out_recall = recall;
                }
                PaocStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
