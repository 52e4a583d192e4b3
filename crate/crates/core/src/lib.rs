//! Interpretable choice models versus black-box networks on moral-dilemma
//! choice data.
//!
//! The crate covers the whole refinement loop: simulate or load responses,
//! fit conditional-logit choice models and a feedforward network, compare
//! them, aggregate per-dilemma residuals to find where the network wins, and
//! fold new side-level principles back into the choice model.

pub mod choicemodel;
pub mod datagen;
pub mod error;
pub mod features;
pub mod harness;
pub mod ingest;
pub mod metrics;
pub mod neuralnet;
pub mod residuals;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};
