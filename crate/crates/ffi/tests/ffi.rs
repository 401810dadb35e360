//! Exercises the C entry points from Rust, including the error paths.

use std::ffi::{CStr, CString};
use std::ptr;

use paoc::data::{synth_generate, write_encoded_csv, SynthKind};
use paoc_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let ptr = paoc_last_error_message();
    assert!(!ptr.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(ptr) }
        .to_string_lossy()
        .into_owned()
}

fn train_checkpoint(dir: &std::path::Path, mode: &str) -> CString {
    let data = synth_generate(SynthKind::Ring, 128, 1, 4, 3).unwrap();
    let data_path = dir.join(format!("data-{mode}.csv"));
    write_encoded_csv(&data, &data_path).unwrap();
    let config_path = dir.join(format!("cfg-{mode}"));
    std::fs::write(
        &config_path,
        "hidden = 4,2\nepochs = 3\nbatch_size = 32\nlr_f = 1e-3\nlr_g = 1e-3\np = 0.5\nlambda = 0.1\n",
    )
    .unwrap();
    let ckpt_path = c(dir.join(format!("{mode}.ckpt")).to_str().unwrap());
    let mode_c = c(mode);
    let status = unsafe {
        paoc_train_csv(
            c(data_path.to_str().unwrap()).as_ptr(),
            c(config_path.to_str().unwrap()).as_ptr(),
            9,
            mode_c.as_ptr(),
            ckpt_path.as_ptr(),
            ptr::null(),
        )
    };
    assert_eq!(status, PaocStatus::Ok, "train failed: {}", last_error());
    ckpt_path
}

#[test]
fn version_is_a_static_string() {
    let v = unsafe { CStr::from_ptr(paoc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn train_load_and_score_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt_path = train_checkpoint(dir.path(), "learned");

    let mut model: *mut PaocModel = ptr::null_mut();
    let status = unsafe { paoc_model_load(ckpt_path.as_ptr(), &mut model) };
    assert_eq!(status, PaocStatus::Ok);
    assert!(!model.is_null());

    let mut dim = 0usize;
    assert_eq!(
        unsafe { paoc_model_input_dim(model, &mut dim) },
        PaocStatus::Ok
    );
    assert_eq!(dim, 4);
    assert!(unsafe { paoc_model_has_generator(model) });

    // scores through the FFI match the library path
    let test = synth_generate(SynthKind::Ring, 16, 16, 4, 8).unwrap();
    let n = test.n_samples();
    let mut scores = vec![0.0; n];
    let status = unsafe {
        paoc_model_score(
            model,
            test.features.data().as_ptr(),
            n,
            4,
            scores.as_mut_ptr(),
        )
    };
    assert_eq!(status, PaocStatus::Ok);
    let ckpt =
        paoc::checkpoint::Checkpoint::load(std::path::Path::new(ckpt_path.to_str().unwrap()))
            .unwrap();
    let expected =
        paoc::eval::recon_score(&ckpt.f_params, &ckpt.ae_config.f_spec, &test.features).unwrap();
    assert_eq!(scores, expected);

    // generator-in-the-loop scoring works for both modes and differs from
    // garbage mode codes
    let mut with_g = vec![0.0; n];
    for mode in [1, 2] {
        let status = unsafe {
            paoc_model_score_with_generator(
                model,
                mode,
                test.features.data().as_ptr(),
                n,
                4,
                with_g.as_mut_ptr(),
            )
        };
        assert_eq!(status, PaocStatus::Ok);
    }
    let status = unsafe {
        paoc_model_score_with_generator(
            model,
            7,
            test.features.data().as_ptr(),
            n,
            4,
            with_g.as_mut_ptr(),
        )
    };
    assert_eq!(status, PaocStatus::InvalidArgument);

    unsafe { paoc_model_free(model) };
}

#[test]
fn wrong_feature_count_is_invalid_argument() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt_path = train_checkpoint(dir.path(), "baseline");
    let mut model: *mut PaocModel = ptr::null_mut();
    assert_eq!(
        unsafe { paoc_model_load(ckpt_path.as_ptr(), &mut model) },
        PaocStatus::Ok
    );
    assert!(!unsafe { paoc_model_has_generator(model) });

    let data = [0.0; 6];
    let mut scores = vec![0.0; 2];
    let status = unsafe { paoc_model_score(model, data.as_ptr(), 2, 3, scores.as_mut_ptr()) };
    assert_eq!(status, PaocStatus::InvalidArgument);
    assert!(last_error().contains("features"));

    // no generator on a baseline checkpoint
    let data = [0.0; 8];
    let status = unsafe {
        paoc_model_score_with_generator(model, 1, data.as_ptr(), 2, 4, scores.as_mut_ptr())
    };
    assert_eq!(status, PaocStatus::InvalidArgument);
    unsafe { paoc_model_free(model) };
}

#[test]
fn load_errors_report_status_and_message() {
    let mut model: *mut PaocModel = ptr::null_mut();
    let status = unsafe { paoc_model_load(c("/nonexistent/x.ckpt").as_ptr(), &mut model) };
    assert_eq!(status, PaocStatus::Io);
    assert!(model.is_null());
    assert!(!last_error().is_empty());

    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.ckpt");
    std::fs::write(&junk, b"not a checkpoint").unwrap();
    let status = unsafe { paoc_model_load(c(junk.to_str().unwrap()).as_ptr(), &mut model) };
    assert_eq!(status, PaocStatus::Parse);

    let status = unsafe { paoc_model_load(ptr::null(), &mut model) };
    assert_eq!(status, PaocStatus::InvalidArgument);
}

#[test]
fn metric_entry_points_match_library() {
    let scores = [0.1, 0.9, 0.4, 0.8, 0.2];
    let labels = [0u8, 1, 0, 1, 0];
    let mut auc = 0.0;
    let status = unsafe { paoc_roc_auc(scores.as_ptr(), labels.as_ptr(), 5, &mut auc) };
    assert_eq!(status, PaocStatus::Ok);
    assert_eq!(auc, 1.0);

    let (mut f1, mut precision, mut recall) = (0.0, 0.0, 0.0);
    let status = unsafe {
        paoc_topk_metrics(
            scores.as_ptr(),
            labels.as_ptr(),
            5,
            0.4,
            &mut f1,
            &mut precision,
            &mut recall,
        )
    };
    assert_eq!(status, PaocStatus::Ok);
    assert_eq!(precision, 1.0);
    assert_eq!(recall, 1.0);
    assert_eq!(f1, 1.0);

    // degenerate labels
    let one_class = [0u8; 5];
    let status = unsafe { paoc_roc_auc(scores.as_ptr(), one_class.as_ptr(), 5, &mut auc) };
    assert_eq!(status, PaocStatus::InvalidArgument);
    let bad = [0u8, 2, 0, 0, 0];
    let status = unsafe { paoc_roc_auc(scores.as_ptr(), bad.as_ptr(), 5, &mut auc) };
    assert_eq!(status, PaocStatus::InvalidArgument);
}

#[test]
fn generated_header_declares_the_surface() {
    let header = include_str!("../include/paoc.h");
    for symbol in [
        "paoc_version",
        "paoc_last_error_message",
        "paoc_model_load",
        "paoc_model_free",
        "paoc_model_input_dim",
        "paoc_model_has_generator",
        "paoc_model_score",
        "paoc_model_score_with_generator",
        "paoc_train_csv",
        "paoc_roc_auc",
        "paoc_topk_metrics",
        "PaocStatus",
        "PaocModel",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
}
