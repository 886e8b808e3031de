//! Classical bit-propagation engine for X/MCX circuits.

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::circuit::{Circuit, Gate, GateKind, QubitRef, Register};

/// One bit per circuit wire plus the classical register.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToffoliState {
    pub bits: Vec<bool>,
    pub classical_bits: Vec<bool>,
}

impl ToffoliState {
    /// All-zero state sized for `circuit`.
    pub fn zero(circuit: &Circuit) -> Self {
        Self {
            bits: vec![false; circuit.num_qubits()],
            classical_bits: vec![false; circuit.classical_bits()],
        }
    }

    pub fn get(&self, circuit: &Circuit, q: QubitRef) -> bool {
        self.bits[circuit.wire(q)]
    }

    pub fn set(&mut self, circuit: &Circuit, q: QubitRef, value: bool) {
        self.bits[circuit.wire(q)] = value;
    }

    /// Register value, offset 0 least significant.
    pub fn read(&self, circuit: &Circuit, reg: &Register) -> u64 {
        reg.qubits()
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &q)| acc | (u64::from(self.get(circuit, q)) << i))
    }

    pub fn write(&mut self, circuit: &Circuit, reg: &Register, value: u64) {
        for (i, q) in reg.qubits().into_iter().enumerate() {
            self.set(circuit, q, value >> i & 1 == 1);
        }
    }
}

/// Applies one gate in place.
pub fn toffoli_apply(circuit: &Circuit, state: &mut ToffoliState, gate: &Gate) -> Result<(), SimError> {
    let fires = |s: &ToffoliState| {
        gate.controls
            .iter()
            .all(|c| s.bits[circuit.wire(c.qubit)] == c.is_positive())
    };
    match gate.kind {
        GateKind::X | GateKind::Cnot | GateKind::Ccnot | GateKind::Mcx => {
            if fires(state) {
                for &t in &gate.targets {
                    let w = circuit.wire(t);
                    state.bits[w] = !state.bits[w];
                }
            }
        }
        GateKind::Swap => {
            if fires(state) {
                let (a, b) = (circuit.wire(gate.targets[0]), circuit.wire(gate.targets[1]));
                state.bits.swap(a, b);
            }
        }
        GateKind::Measure { clbit } => {
            state.classical_bits[clbit] = state.bits[circuit.wire(gate.targets[0])];
        }
        _ => return Err(SimError::NonClassicalGate(gate.kind.name().to_string())),
    }
    Ok(())
}

/// Runs every gate of `circuit` from `initial`.
pub fn toffoli_run(circuit: &Circuit, initial: ToffoliState) -> Result<ToffoliState, SimError> {
    toffoli_run_gates(circuit, circuit.gates(), initial)
}

/// Runs a sub-list of gates belonging to `circuit`.
pub fn toffoli_run_gates(circuit: &Circuit, gates: &[Gate], initial: ToffoliState) -> Result<ToffoliState, SimError> {
    if initial.bits.len() != circuit.num_qubits() {
        return Err(SimError::StateSize {
            got: initial.bits.len(),
            want: circuit.num_qubits(),
        });
    }
    let mut state = initial;
    state.classical_bits.resize(circuit.classical_bits(), false);
    for g in gates {
        toffoli_apply(circuit, &mut state, g)?;
    }
    Ok(state)
}
