//! One-class anomaly detection with pseudo anomalies from learned noise.
//!
//! A main autoencoder F is trained to reconstruct normal data while an
//! auxiliary autoencoder G learns to generate additive noise whose pseudo
//! anomalies stay reconstructable by F. At test time only F runs: the
//! anomaly score of a sample is its reconstruction error.
//!
//! The crate is organized as:
//!
//! - [`nn`]: dense MLP engine (forward/backward, Adam, gradient checking)
//! - [`models`]: the F/G architectures and activation pairing rules
//! - [`pseudo`]: learned and Gaussian pseudo-anomaly construction
//! - [`trainer`]: the alternating training loop with telemetry
//! - [`eval`]: anomaly scoring, ROC-AUC, thresholded F1, run aggregation
//! - [`data`]: CSV ingestion, one-hot encoding, normalization, splits,
//!   synthetic datasets
//! - [`checkpoint`]: bit-exact model serialization
//! - [`pipeline`]: high-level train/eval entry points shared by the CLI and
//!   the C bindings

pub mod checkpoint;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod models;
pub mod nn;
pub mod pipeline;
pub mod pseudo;
pub mod rng;
pub mod tensor;
pub mod trainer;

pub use error::{Error, Result};
pub use tensor::Tensor2D;
