//! Quantum dot-plot construction.
//!
//! Register layout, in declaration (and therefore wire) order:
//! `x` (reference index), `d_r` (reference data), `y` (query index),
//! `d_q` (query data), `v` (dot-plot pixel), then the ancilla pool.
//! The pixel index fed to the inverse QFT is `k = y * W + x`, i.e. the
//! qubit list `x[0..w] ++ y[0..h]` read least-significant first.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{stage, Circuit, CircuitError, Control, Gate, QubitRef, Register, RegisterId, RegisterRole};
use crate::logic::{self, LogicError, McxSpec};
use crate::sequence::SymbolSequence;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncoderError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("{what}: expected {expected} qubits, register has {actual}")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("sequences disagree on data width ({0} vs {1} bits); pad them as a pair first")]
    DataWidthMismatch(u32, u32),
    #[error("qubit list passed to the QFT is empty or has duplicates")]
    BadQftQubits,
    #[error("pinned index {index} out of range for a length-{len} sequence")]
    PinOutOfRange { index: usize, len: usize },
}

/// How multi-controlled X gates are decomposed, which fixes the ancilla pool.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum McxMode {
    #[default]
    #[serde(rename = "chain")]
    CcnotChain,
    #[serde(rename = "single-ancilla")]
    SingleAncilla,
}

impl McxMode {
    pub fn as_str(self) -> &'static str {
        match self {
            McxMode::CcnotChain => "chain",
            McxMode::SingleAncilla => "single-ancilla",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "chain" | "ccnot-chain" | "ccnot_chain" => Some(Self::CcnotChain),
            "single-ancilla" | "single_ancilla" | "single" => Some(Self::SingleAncilla),
            _ => None,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QdpOptions {
    pub use_minimizer: bool,
    pub mcx_mode: McxMode,
}

impl Default for QdpOptions {
    fn default() -> Self {
        Self {
            use_minimizer: true,
            mcx_mode: McxMode::CcnotChain,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QdpLayout {
    pub w: usize,
    pub h: usize,
    pub d: usize,
    pub mcx_mode: McxMode,
}

impl QdpLayout {
    pub fn for_pair(r: &SymbolSequence, q: &SymbolSequence, mcx_mode: McxMode) -> Result<Self, EncoderError> {
        if r.d() != q.d() {
            return Err(EncoderError::DataWidthMismatch(r.d(), q.d()));
        }
        Ok(Self {
            w: r.index_bits() as usize,
            h: q.index_bits() as usize,
            d: r.d() as usize,
            mcx_mode,
        })
    }

    /// Chain mode needs `c - 2` clean ancillas for the widest gate, which has
    /// `max(w, h)` controls in the encoders and `d` in the mark gate.
    /// Single-ancilla mode always reserves one.
    pub fn ancilla_count(&self) -> usize {
        match self.mcx_mode {
            McxMode::CcnotChain => self.w.max(self.h).max(self.d).saturating_sub(2),
            McxMode::SingleAncilla => 1,
        }
    }

    /// Qubits in the five data registers, ancillas excluded.
    pub fn base_qubits(&self) -> usize {
        self.w + self.h + 2 * self.d + 1
    }
}

/// Handles to the registers declared by [`init_registers`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QdpRegisters {
    pub x: RegisterId,
    pub d_r: RegisterId,
    pub y: RegisterId,
    pub d_q: RegisterId,
    pub v: RegisterId,
    pub ancilla: Option<RegisterId>,
}

/// A built circuit together with its layout.
#[derive(Clone, Debug, PartialEq)]
pub struct QdpCircuit {
    pub circuit: Circuit,
    pub layout: QdpLayout,
    pub registers: QdpRegisters,
}

impl QdpCircuit {
    /// Index qubits fed to the inverse QFT: `x` then `y`, least significant
    /// first, so the register value is `y * W + x`.
    pub fn pixel_qubits(&self) -> Vec<QubitRef> {
        let mut qs = self.circuit.register(self.registers.x).qubits();
        qs.extend(self.circuit.register(self.registers.y).qubits());
        qs
    }
}

fn declare(layout: &QdpLayout) -> Result<(Circuit, QdpRegisters), EncoderError> {
    let mut c = Circuit::new();
    let x = c.add_register("x", layout.w, RegisterRole::IndexX)?;
    let d_r = c.add_register("d_r", layout.d, RegisterRole::DataR)?;
    let y = c.add_register("y", layout.h, RegisterRole::IndexY)?;
    let d_q = c.add_register("d_q", layout.d, RegisterRole::DataQ)?;
    let v = c.add_register("v", 1, RegisterRole::ValueV)?;
    let anc = layout.ancilla_count();
    let ancilla = if anc > 0 {
        Some(c.add_register("anc", anc, RegisterRole::Ancilla)?)
    } else {
        None
    };
    Ok((
        c,
        QdpRegisters {
            x,
            d_r,
            y,
            d_q,
            v,
            ancilla,
        },
    ))
}

/// Declares all registers and puts `x` and `y` in uniform superposition.
pub fn init_registers(layout: &QdpLayout) -> Result<(Circuit, QdpRegisters), EncoderError> {
    let (mut c, regs) = declare(layout)?;
    let mut gates: Vec<Gate> = c.register(regs.x).qubits().into_iter().map(Gate::h).collect();
    gates.extend(c.register(regs.y).qubits().into_iter().map(Gate::h));
    c.append_stage(stage::INIT, gates)?;
    Ok((c, regs))
}

/// Like [`init_registers`] but sets `x = x_value`, `y = y_value` with X gates
/// instead of creating a superposition.
pub fn init_registers_pinned(
    layout: &QdpLayout,
    x_value: u64,
    y_value: u64,
) -> Result<(Circuit, QdpRegisters), EncoderError> {
    let (mut c, regs) = declare(layout)?;
    let mut gates = pin_gates(c.register(regs.x), x_value);
    gates.extend(pin_gates(c.register(regs.y), y_value));
    c.append_stage(stage::INIT, gates)?;
    Ok((c, regs))
}

/// X gates loading a basis value into a register.
pub fn pin_gates(reg: &Register, value: u64) -> Vec<Gate> {
    (0..reg.size)
        .filter(|&b| value >> b & 1 == 1)
        .map(|b| Gate::x(reg.qubit(b)))
        .collect()
}

fn mcx_gates(specs: &[McxSpec], index: &Register, data: &Register) -> Vec<Gate> {
    specs
        .iter()
        .map(|s| {
            let target = data.qubit(s.target);
            if s.controls.is_empty() {
                Gate::x(target)
            } else {
                let controls = s
                    .controls
                    .iter()
                    .map(|&(bit, polarity)| Control {
                        qubit: index.qubit(bit),
                        polarity,
                    })
                    .collect();
                Gate::mcx(controls, target)
            }
        })
        .collect()
}

/// Gate list writing `seq[i]` into `data` for every basis index `i` of
/// `index`, from the brute-force or minimized cover.
pub fn neqr_gates(
    seq: &SymbolSequence,
    index: &Register,
    data: &Register,
    use_minimizer: bool,
) -> Result<Vec<Gate>, EncoderError> {
    let bits = seq.index_bits() as usize;
    if index.size != bits {
        return Err(EncoderError::SizeMismatch {
            what: "index register",
            expected: bits,
            actual: index.size,
        });
    }
    if data.size != seq.d() as usize {
        return Err(EncoderError::SizeMismatch {
            what: "data register",
            expected: seq.d() as usize,
            actual: data.size,
        });
    }
    let table = logic::build_pla(seq)?;
    let specs = if use_minimizer {
        logic::cubes_to_mcx(&logic::d1merge_minimize(&table))
    } else {
        logic::brute_force_mcx(&table)?
    };
    Ok(mcx_gates(&specs, index, data))
}

/// Appends a `neqr` stage encoding `seq` into `(index, data)`. The data
/// register must be |0⟩ on entry.
pub fn encode_sequence(
    circuit: &mut Circuit,
    seq: &SymbolSequence,
    index: RegisterId,
    data: RegisterId,
    use_minimizer: bool,
) -> Result<(), EncoderError> {
    let gates = neqr_gates(
        seq,
        circuit.register(index),
        circuit.register(data),
        use_minimizer,
    )?;
    circuit.append_stage(stage::NEQR, gates)?;
    Ok(())
}

/// `d_q ← d_r ⊕ d_q`, one CNOT per bit.
pub fn quantum_xor(circuit: &mut Circuit, d_r: RegisterId, d_q: RegisterId) -> Result<(), EncoderError> {
    let (a, b) = (circuit.register(d_r).clone(), circuit.register(d_q).clone());
    if a.size != b.size {
        return Err(EncoderError::SizeMismatch {
            what: "xor operands",
            expected: a.size,
            actual: b.size,
        });
    }
    let gates = (0..a.size).map(|i| Gate::cnot(a.qubit(i), b.qubit(i)));
    circuit.append_stage(stage::DOTPLOT, gates)?;
    Ok(())
}

/// Flips `v` when every bit of `d_q` is zero.
pub fn mark_matches(circuit: &mut Circuit, d_q: RegisterId, v: RegisterId) -> Result<(), EncoderError> {
    let vr = circuit.register(v);
    if vr.size != 1 {
        return Err(EncoderError::SizeMismatch {
            what: "value register",
            expected: 1,
            actual: vr.size,
        });
    }
    let target = vr.qubit(0);
    let controls = circuit
        .register(d_q)
        .qubits()
        .into_iter()
        .map(Control::neg)
        .collect();
    circuit.append_stage(stage::DOTPLOT, vec![Gate::mcx(controls, target)])?;
    Ok(())
}

fn assemble(
    r: &SymbolSequence,
    q: &SymbolSequence,
    options: QdpOptions,
    pin: Option<(u64, u64)>,
) -> Result<QdpCircuit, EncoderError> {
    let layout = QdpLayout::for_pair(r, q, options.mcx_mode)?;
    let (mut circuit, registers) = match pin {
        Some((x, y)) => init_registers_pinned(&layout, x, y)?,
        None => init_registers(&layout)?,
    };
    encode_sequence(&mut circuit, r, registers.x, registers.d_r, options.use_minimizer)?;
    encode_sequence(&mut circuit, q, registers.y, registers.d_q, options.use_minimizer)?;
    quantum_xor(&mut circuit, registers.d_r, registers.d_q)?;
    mark_matches(&mut circuit, registers.d_q, registers.v)?;
    Ok(QdpCircuit {
        circuit,
        layout,
        registers,
    })
}

/// The dot-plot oracle: after it, `v = [r[x] == q[y]]` for every `(x, y)`
/// in the superposition.
pub fn build_qdp(r: &SymbolSequence, q: &SymbolSequence, options: QdpOptions) -> Result<QdpCircuit, EncoderError> {
    assemble(r, q, options, None)
}

/// [`build_qdp`] with `x` and `y` loaded as basis values.
pub fn build_qdp_pinned(
    r: &SymbolSequence,
    q: &SymbolSequence,
    options: QdpOptions,
    x: usize,
    y: usize,
) -> Result<QdpCircuit, EncoderError> {
    if x >= r.padded_length() {
        return Err(EncoderError::PinOutOfRange {
            index: x,
            len: r.padded_length(),
        });
    }
    if y >= q.padded_length() {
        return Err(EncoderError::PinOutOfRange {
            index: y,
            len: q.padded_length(),
        });
    }
    assemble(r, q, options, Some((x as u64, y as u64)))
}

/// Gates of the inverse QFT over `qubits` (least significant first). The
/// bit-reversal swaps come last.
pub fn inverse_qft_gates(qubits: &[QubitRef]) -> Result<Vec<Gate>, EncoderError> {
    let n = qubits.len();
    if n == 0 {
        return Err(EncoderError::BadQftQubits);
    }
    for (i, q) in qubits.iter().enumerate() {
        if qubits[..i].contains(q) {
            return Err(EncoderError::BadQftQubits);
        }
    }
    let rev = |i: usize| qubits[n - 1 - i];
    let mut gates = Vec::with_capacity(n * (n + 1) / 2 + n / 2);
    for j in 0..n {
        for k in 0..j {
            let angle = -PI / (1u64 << (j - k)) as f64;
            gates.push(Gate::cphase(angle, rev(k), rev(j)));
        }
        gates.push(Gate::h(rev(j)));
    }
    for i in 0..n / 2 {
        gates.push(Gate::swap(qubits[i], qubits[n - 1 - i]));
    }
    Ok(gates)
}

/// Appends a `qft` stage holding the inverse QFT over `qubits`.
pub fn inverse_qft(circuit: &mut Circuit, qubits: &[QubitRef]) -> Result<(), EncoderError> {
    let gates = inverse_qft_gates(qubits)?;
    circuit.append_stage(stage::QFT, gates)?;
    Ok(())
}

/// Full pattern-recognition circuit: dot-plot oracle, mid-circuit
/// measurement of `v` into classical bit 0, inverse QFT over the pixel index,
/// and measurement of the pixel index into bits `1..=w+h`.
pub fn build_qpr(r: &SymbolSequence, q: &SymbolSequence, options: QdpOptions) -> Result<QdpCircuit, EncoderError> {
    let mut qdp = build_qdp(r, q, options)?;
    let pixel = qdp.pixel_qubits();
    let c = &mut qdp.circuit;
    let v_bit = c.add_classical_bits(1 + pixel.len());
    let v = c.register(qdp.registers.v).qubit(0);
    c.append_stage(stage::MEASURE, vec![Gate::measure(v, v_bit)])?;
    inverse_qft(c, &pixel)?;
    let measures = pixel
        .iter()
        .enumerate()
        .map(|(i, &q)| Gate::measure(q, v_bit + 1 + i));
    c.append_stage(stage::MEASURE, measures)?;
    Ok(qdp)
}

/// A stand-alone NEQR circuit: index register in superposition (or pinned),
/// data register, and the encoding stage. Used by the `encode` command and
/// the single-sequence checks.
pub fn build_neqr(
    seq: &SymbolSequence,
    use_minimizer: bool,
    mcx_mode: McxMode,
    pin: Option<u64>,
) -> Result<(Circuit, RegisterId, RegisterId), EncoderError> {
    let w = seq.index_bits() as usize;
    let d = seq.d() as usize;
    let mut c = Circuit::new();
    let k = c.add_register("k", w, RegisterRole::IndexX)?;
    let data = c.add_register("data", d, RegisterRole::DataR)?;
    let anc = match mcx_mode {
        McxMode::CcnotChain => w.saturating_sub(2),
        McxMode::SingleAncilla => 1,
    };
    if anc > 0 {
        c.add_register("anc", anc, RegisterRole::Ancilla)?;
    }
    let init = match pin {
        Some(v) => pin_gates(c.register(k), v),
        None => c.register(k).qubits().into_iter().map(Gate::h).collect(),
    };
    c.append_stage(stage::INIT, init)?;
    encode_sequence(&mut c, seq, k, data, use_minimizer)?;
    Ok((c, k, data))
}
