//! Simulation engines and the classical dot-plot oracle.

pub mod dotplot;
pub mod gates;
pub mod statevector;
pub mod toffoli;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("circuit needs {needed} qubits, simulator cap is {cap}")]
    QubitCap { needed: usize, cap: usize },
    #[error("gate `{0}` creates superposition; the Toffoli engine only runs X/MCX/SWAP circuits")]
    NonClassicalGate(String),
    #[error("gate `{0}` is not supported by this engine")]
    Unsupported(String),
    #[error("initial state has {got} bits, circuit has {want} qubits")]
    StateSize { got: usize, want: usize },
}
