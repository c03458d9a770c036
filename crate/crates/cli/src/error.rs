use flowbench_core::calculus::CalculusError;
use flowbench_core::estimator::EstimatorError;
use flowbench_core::sim::SimError;
use flowbench_core::stats::StatsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("method failure: {0}")]
    Method(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Method(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidInput(m) => CliError::Config(m),
            SimError::Invariant(m) => CliError::Invariant(m),
        }
    }
}

impl From<CalculusError> for CliError {
    fn from(e: CalculusError) -> Self {
        match e {
            CalculusError::InvalidInput(m) => CliError::Config(m),
            CalculusError::Unbounded(m) => CliError::Method(format!("delay is unbounded: {m}")),
        }
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::Simulation(e) => e.into(),
            EstimatorError::Calculus(e) => e.into(),
            EstimatorError::InvalidConfig(m) => CliError::Config(m),
            EstimatorError::EmptyUsableSet(m) => {
                CliError::Method(format!("no usable probing rate: {m}"))
            }
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::Method(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
