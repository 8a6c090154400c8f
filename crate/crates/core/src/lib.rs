//! Protein sequence classification with a leaky integrate-and-fire spiking
//! network, plus recurrence-plot / Gramian-angular-field / Markov-transition-
//! field sequence imaging and a repeated stratified evaluation harness.

pub mod cli;
pub mod encode;
pub mod error;
pub mod metrics;
pub mod rng;
pub mod seqio;
pub mod snn;
pub mod train;
pub mod transforms;

pub use error::{Error, Result};
