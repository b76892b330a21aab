//! Diagonal Fisher estimation, the EWC penalty, and the same penalty
//! expressed over low-rank adapter products, checked on a toy perceptron.

pub mod demo;
pub mod gradcheck;
pub mod matrix;
pub mod mlp;
pub mod penalty;

pub use demo::{toy_continual_demo, DemoConfig, DemoReport, Regime, RegimeResult};
pub use matrix::DenseMatrix;
pub use mlp::{regularized_loss_and_grad, RegularizedOutput, Sample, ToyMlp};
pub use penalty::{
    ewc_lora_penalty, ewc_lora_penalty_grad, ewc_penalty, ewc_penalty_grad, fisher_diag, fisher_from_gradients,
    FisherDiag, LoraAdapter, Objective, DEFAULT_COEFFICIENT, DEFAULT_RANK,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EwcError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("Fisher estimate needs at least one sample")]
    NoSamples,
    #[error("lambda must be finite and non-negative, got {0}")]
    Lambda(f64),
    #[error("invalid demo config: {0}")]
    Config(String),
}

/// Penalty strengths shipped as presets for the smaller and larger model.
pub const LAMBDA_PRESETS: [f64; 2] = [0.5, 2.0];
