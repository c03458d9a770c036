//! Discrete-event simulation of a closed-loop window flow-control connection.

mod analysis;
mod engine;
mod output;
mod spec;

use thiserror::Error;

pub use analysis::{
    cwnd_autocorrelation, decompose_delays, resample_step, stack_buffering_probability,
    DelayComponents,
};
pub use engine::{Admission, Observer, PacketRecord, RunStatus, Simulator};
pub use output::{run_scenario, SimOutput};
pub use spec::{
    CongestionSignalSpec, DeliveryMode, IncreaseRule, NetworkPathSpec, ScenarioSpec,
    SignalProcess, SourceSpec, WindowControllerSpec,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidInput(String),
    #[error("simulator invariant violated: {0}")]
    Invariant(String),
}
