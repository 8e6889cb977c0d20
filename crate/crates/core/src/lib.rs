//! Synthetic legal-domain datasets, small sigmoid MLPs trained with Adam,
//! and tools for checking whether a trained network follows the rules that
//! generated its data.
//!
//! The network code is generic over [`nn::Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar for everyday use.

pub mod dataset;
pub mod domain;
pub mod harness;
pub mod nn;
pub mod oracle;
pub mod rationale;
pub mod seed;

pub type Model = nn::TrainedModel<f64>;
pub type Model32 = nn::TrainedModel<f32>;
pub type Params = nn::ModelParams<f64>;
pub type Params32 = nn::ModelParams<f32>;
