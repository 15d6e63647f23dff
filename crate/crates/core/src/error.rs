use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "{axis} grid [{grid_min}, {grid_max}] does not cover the required range \
         [{required_min}, {required_max}]"
    )]
    DomainCoverage {
        axis: Axis,
        required_min: f64,
        required_max: f64,
        grid_min: f64,
        grid_max: f64,
    },

    #[error("register of {n_qubits} qubits exceeds the cap of {cap}")]
    CapExceeded { n_qubits: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Momentum,
    Position,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Axis::Momentum => "momentum",
            Axis::Position => "position",
        })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
