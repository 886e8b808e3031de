//! Quantum dot-plot construction, minimization, transpilation and simulation
//! for pairwise sequence comparison.

pub mod backend;
pub mod circuit;
pub mod decompose;
pub mod encoder;
pub mod fasta;
pub mod logic;
pub mod parallel;
pub mod pipeline;
pub mod qasm;
pub mod sequence;
pub mod sim;
pub mod transpile;
pub mod validate;

pub use circuit::{Circuit, CircuitError, Control, Gate, GateKind, Polarity, QubitRef, RegisterId, RegisterRole};
pub use encoder::{build_qdp, build_qpr, McxMode, QdpCircuit, QdpLayout, QdpOptions};
pub use sequence::{Alphabet, SymbolSequence};
