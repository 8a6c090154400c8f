//! Spiking neural network: LIF dynamics, the two-layer model and its
//! checkpoint format.

mod checkpoint;
mod lif;
mod model;

pub use checkpoint::Checkpoint;
pub use lif::{lif_step, LifConfig, LifState, ResetMode, SpikeMode};
pub use model::{
    argmax, ExampleGradient, ForwardOutput, GradientFlow, Input, Parameters, Readout, SnnModel,
    SpikeRecord,
};
