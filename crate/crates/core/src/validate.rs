//! The two validation procedures for a dot-plot circuit.
//!
//! Method 1 pins `x` and `y` to every index pair in turn and runs the
//! circuit on a basis state, comparing `v` with the classical dot plot.
//! Method 2 prepares the full superposition, samples `(x, y, v)` and checks
//! both value agreement and uniformity of the index marginal.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::circuit::{stage, Circuit, Gate, GateKind};
use crate::decompose::{self, DecomposeError};
use crate::encoder::{self, EncoderError, McxMode, QdpCircuit, QdpOptions};
use crate::parallel;
use crate::sequence::SymbolSequence;
use crate::sim::dotplot::{classical_dotplot, DotPlot};
use crate::sim::statevector::{self, SparseState};
use crate::sim::toffoli::{toffoli_apply, ToffoliState};
use crate::sim::SimError;

/// Significance level of the uniformity test.
pub const CHI_SQUARE_ALPHA: f64 = 0.001;
/// Counterexamples kept in a report.
pub const MAX_COUNTEREXAMPLES: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidateError {
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("padded length {0} exceeds the method-1 limit of 4096")]
    TooLong(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub x: usize,
    pub y: usize,
    pub expected: bool,
    /// Measured or propagated `v`; `None` when the output was not a basis
    /// state.
    pub got: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub critical_value: f64,
    pub p_value: f64,
    pub significance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub method: String,
    pub passed: bool,
    pub checks: u64,
    pub failures: u64,
    pub counterexamples: Vec<Counterexample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_square: Option<ChiSquareResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn is_classical(g: &Gate) -> bool {
    matches!(
        g.kind,
        GateKind::X | GateKind::Cnot | GateKind::Ccnot | GateKind::Mcx | GateKind::Swap | GateKind::Measure { .. }
    )
}

/// Gates after the init stage.
fn body(circuit: &Circuit) -> &[Gate] {
    let start = circuit
        .stage_ranges()
        .into_iter()
        .find(|(l, _)| l == stage::INIT)
        .map_or(0, |(_, r)| r.end);
    &circuit.gates()[start..]
}

/// Method 1 on the circuit built from `r`, `q` and `options`, decomposed
/// per the MCX mode.
pub fn validate_method1(
    r: &SymbolSequence,
    q: &SymbolSequence,
    options: QdpOptions,
) -> Result<ValidationReport, ValidateError> {
    let qdp = encoder::build_qdp(r, q, options)?;
    validate_method1_circuit(&qdp, r, q, options.mcx_mode)
}

/// Method 1 against an existing (possibly tampered) dot-plot circuit.
///
/// Classical-only decompositions run on the Toffoli engine; circuits with
/// controlled roots run on the sparse statevector engine. Besides `v`, each
/// run checks that the ancilla pool comes back to |0⟩.
pub fn validate_method1_circuit(
    qdp: &QdpCircuit,
    r: &SymbolSequence,
    q: &SymbolSequence,
    mode: McxMode,
) -> Result<ValidationReport, ValidateError> {
    for len in [r.padded_length(), q.padded_length()] {
        if len > 4096 {
            return Err(ValidateError::TooLong(len));
        }
    }
    let circuit = decompose::decompose_circuit(&qdp.circuit, mode)?;
    let plot = classical_dotplot(r, q);
    let gates = body(&circuit);
    let classical = gates.iter().all(is_classical);
    let (w, h) = (plot.width, plot.height);
    let regs = &qdp.registers;
    let xr = circuit.register(regs.x).clone();
    let yr = circuit.register(regs.y).clone();
    let v_wire = circuit.wire(circuit.register(regs.v).qubit(0));
    let anc_wires: Vec<usize> = regs
        .ancilla
        .map(|a| circuit.register(a).qubits().into_iter().map(|q| circuit.wire(q)).collect())
        .unwrap_or_default();

    // Compiled once, shared by every pixel run.
    let ops: Vec<statevector::Op> = if classical {
        Vec::new()
    } else {
        let mut ops = Vec::new();
        for g in gates.iter().filter(|g| !matches!(g.kind, GateKind::Measure { .. })) {
            ops.extend(statevector::compile_gate(&circuit, g)?);
        }
        ops
    };
    let x_wires: Vec<usize> = xr.qubits().into_iter().map(|q| circuit.wire(q)).collect();
    let y_wires: Vec<usize> = yr.qubits().into_iter().map(|q| circuit.wire(q)).collect();

    let run_pair = |k: usize| -> Result<Option<Counterexample>, SimError> {
        let (x, y) = (k % w, k / w);
        let expected = plot.pixel(x, y);
        let (got, ancilla_clean) = if classical {
            let mut pin = encoder::pin_gates(&xr, x as u64);
            pin.extend(encoder::pin_gates(&yr, y as u64));
            let mut s = ToffoliState::zero(&circuit);
            for g in pin.iter().chain(gates) {
                toffoli_apply(&circuit, &mut s, g)?;
            }
            (Some(s.bits[v_wire]), anc_wires.iter().all(|&a| !s.bits[a]))
        } else {
            let start = [(x, &x_wires), (y, &y_wires)]
                .iter()
                .flat_map(|&(v, wires)| wires.iter().enumerate().filter(move |(b, _)| v >> b & 1 == 1))
                .fold(0u64, |acc, (_, &wire)| acc | 1 << wire);
            let mut s = SparseState::basis(circuit.num_qubits(), start);
            for op in &ops {
                statevector::apply_op(&mut s, op);
            }
            match s.as_basis(1e-9) {
                Some(i) => (Some(i >> v_wire & 1 == 1), anc_wires.iter().all(|&a| i >> a & 1 == 0)),
                None => (None, false),
            }
        };
        Ok(if got == Some(expected) && ancilla_clean {
            None
        } else {
            Some(Counterexample {
                x,
                y,
                expected,
                got,
                note: (!ancilla_clean).then(|| "ancilla not restored".to_string()),
            })
        })
    };
    let results = parallel::map_indices(w * h, run_pair);
    let mut failures = 0u64;
    let mut counterexamples = Vec::new();
    for r in results {
        if let Some(ce) = r? {
            failures += 1;
            if counterexamples.len() < MAX_COUNTEREXAMPLES {
                counterexamples.push(ce);
            }
        }
    }
    Ok(ValidationReport {
        method: "method1".into(),
        passed: failures == 0,
        checks: (w * h) as u64,
        failures,
        counterexamples,
        chi_square: None,
        shots: None,
    })
}

/// Pearson χ² of `observed` against a uniform expectation.
pub fn chi_square_uniform(observed: &[u64]) -> Option<ChiSquareResult> {
    let cells = observed.len();
    if cells < 2 {
        return None;
    }
    let total: u64 = observed.iter().sum();
    let expected = total as f64 / cells as f64;
    let statistic = observed
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum::<f64>();
    let dof = cells - 1;
    let dist = ChiSquared::new(dof as f64).ok()?;
    Some(ChiSquareResult {
        statistic,
        degrees_of_freedom: dof,
        critical_value: dist.inverse_cdf(1.0 - CHI_SQUARE_ALPHA),
        p_value: 1.0 - dist.cdf(statistic),
        significance: CHI_SQUARE_ALPHA,
    })
}

/// Method 2 on the circuit built from `r`, `q` and `options`.
pub fn validate_method2(
    r: &SymbolSequence,
    q: &SymbolSequence,
    options: QdpOptions,
    shots: u64,
    seed: u64,
) -> Result<ValidationReport, ValidateError> {
    let qdp = encoder::build_qdp(r, q, options)?;
    validate_method2_circuit(&qdp, r, q, options.mcx_mode, shots, seed)
}

/// Method 2 against an existing dot-plot circuit. Classical bit 0 holds
/// `v`, then the `x` bits, then the `y` bits.
pub fn validate_method2_circuit(
    qdp: &QdpCircuit,
    r: &SymbolSequence,
    q: &SymbolSequence,
    mode: McxMode,
    shots: u64,
    seed: u64,
) -> Result<ValidationReport, ValidateError> {
    let mut circuit = decompose::decompose_circuit(&qdp.circuit, mode)?;
    let regs = &qdp.registers;
    let xq = circuit.register(regs.x).qubits();
    let yq = circuit.register(regs.y).qubits();
    let v = circuit.register(regs.v).qubit(0);
    let first = circuit.add_classical_bits(1 + xq.len() + yq.len());
    let mut measures = vec![Gate::measure(v, first)];
    measures.extend(xq.iter().enumerate().map(|(i, &q)| Gate::measure(q, first + 1 + i)));
    measures.extend(yq.iter().enumerate().map(|(i, &q)| Gate::measure(q, first + 1 + xq.len() + i)));
    circuit
        .append_stage(stage::MEASURE, measures)
        .map_err(EncoderError::from)?;
    let hist = statevector::sample(&circuit, shots, seed, statevector::DEFAULT_QUBIT_CAP)?;
    let plot = classical_dotplot(r, q);
    Ok(method2_report(&hist.counts, &plot, xq.len(), shots))
}

fn method2_report(
    counts: &std::collections::BTreeMap<u64, u64>,
    plot: &DotPlot,
    x_bits: usize,
    shots: u64,
) -> ValidationReport {
    let (w, h) = (plot.width, plot.height);
    let mut marginal = vec![0u64; w * h];
    let mut failures = 0u64;
    let mut counterexamples = Vec::new();
    for (&key, &n) in counts {
        let v = key & 1 == 1;
        let x = (key >> 1) as usize & ((1 << x_bits) - 1);
        let y = (key >> (1 + x_bits)) as usize;
        if x >= w || y >= h {
            failures += n;
            continue;
        }
        marginal[y * w + x] += n;
        let expected = plot.pixel(x, y);
        if v != expected {
            failures += n;
            if counterexamples.len() < MAX_COUNTEREXAMPLES {
                counterexamples.push(Counterexample {
                    x,
                    y,
                    expected,
                    got: Some(v),
                    note: Some(format!("{n} shots")),
                });
            }
        }
    }
    let chi = chi_square_uniform(&marginal);
    let uniform = chi.as_ref().is_none_or(|c| c.p_value > CHI_SQUARE_ALPHA);
    ValidationReport {
        method: "method2".into(),
        passed: failures == 0 && uniform,
        checks: shots,
        failures,
        counterexamples,
        chi_square: chi,
        shots: Some(shots),
    }
}
