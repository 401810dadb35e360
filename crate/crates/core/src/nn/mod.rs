//! Minimal dense neural-network engine: MLP forward/backward with analytic
//! gradients, Adam, seeded initialization, and a finite-difference gradient
//! checker.

pub mod activation;
pub mod adam;
pub mod gradcheck;
pub mod loss;
pub mod mlp;

pub use activation::ActivationKind;
pub use adam::AdamState;
pub use gradcheck::grad_check;
pub use loss::mse_loss;
pub use mlp::{
    backward, forward, forward_output, init_params, ForwardCache, MlpParams, MlpSpec, ParamGrads,
};
