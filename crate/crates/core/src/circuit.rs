//! Circuit intermediate representation.
//!
//! A [`Circuit`] is an ordered gate list over named qubit registers. Qubits are
//! addressed by [`QubitRef`] (register + offset); offset 0 is the
//! least-significant bit of its register. Registers occupy contiguous global
//! wire ranges in declaration order, which is also the bit order used by the
//! simulators (global wire 0 is the least-significant amplitude-index bit).
//!
//! Multi-controlled X gates carry their control polarity directly, so the
//! zero-literals produced by the logic minimizer survive in the IR until
//! lowering inserts the X sandwiches.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Well-known stage labels.
pub mod stage {
    pub const INIT: &str = "init";
    pub const NEQR: &str = "neqr";
    pub const DOTPLOT: &str = "dotplot";
    pub const QFT: &str = "qft";
    pub const MEASURE: &str = "measure";
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("register {0} is not declared in this circuit")]
    UnknownRegister(usize),
    #[error("offset {offset} out of range for register `{register}` of size {size}")]
    OffsetOutOfRange {
        register: String,
        offset: usize,
        size: usize,
    },
    #[error("register name `{0}` already declared")]
    DuplicateRegisterName(String),
    #[error("register `{0}` must hold at least one qubit")]
    EmptyRegister(String),
    #[error("qubit {0} appears more than once in a single gate")]
    DuplicateQubit(QubitRef),
    #[error("classical bit {bit} out of range ({available} declared)")]
    ClassicalBitOutOfRange { bit: usize, available: usize },
    #[error("malformed {kind} gate: {reason}")]
    MalformedGate { kind: String, reason: String },
}

pub type CircuitResult<T> = Result<T, CircuitError>;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RegisterId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegisterRole {
    IndexX,
    IndexY,
    DataR,
    DataQ,
    ValueV,
    Ancilla,
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub id: RegisterId,
    pub name: String,
    pub size: usize,
    pub role: RegisterRole,
}

impl Register {
    /// Reference to qubit `offset` of this register. Panics if out of range.
    pub fn qubit(&self, offset: usize) -> QubitRef {
        assert!(
            offset < self.size,
            "offset {offset} out of range for register `{}` of size {}",
            self.name,
            self.size
        );
        QubitRef {
            register: self.id,
            offset,
        }
    }

    /// All qubits, least-significant first.
    pub fn qubits(&self) -> Vec<QubitRef> {
        (0..self.size).map(|i| self.qubit(i)).collect()
    }
}

/// A wire inside a register.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QubitRef {
    pub register: RegisterId,
    pub offset: usize,
}

impl fmt::Display for QubitRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}[{}]", self.register.0, self.offset)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    /// Fires when the control is |1⟩.
    Positive,
    /// Fires when the control is |0⟩.
    Negative,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    pub qubit: QubitRef,
    pub polarity: Polarity,
}

impl Control {
    pub fn pos(qubit: QubitRef) -> Self {
        Self {
            qubit,
            polarity: Polarity::Positive,
        }
    }

    pub fn neg(qubit: QubitRef) -> Self {
        Self {
            qubit,
            polarity: Polarity::Negative,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.polarity == Polarity::Positive
    }
}

/// Exponent of a root-of-X gate, `±1 / 2^k` with `k ∈ {1, 2, 3}`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootExponent {
    negative: bool,
    log2_denominator: u8,
}

impl RootExponent {
    pub fn new(negative: bool, log2_denominator: u8) -> CircuitResult<Self> {
        if !(1..=3).contains(&log2_denominator) {
            return Err(CircuitError::MalformedGate {
                kind: "rootx".into(),
                reason: format!("exponent denominator 2^{log2_denominator} not in {{2, 4, 8}}"),
            });
        }
        Ok(Self {
            negative,
            log2_denominator,
        })
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn denominator(&self) -> u32 {
        1 << self.log2_denominator
    }

    pub fn value(&self) -> f64 {
        let v = 1.0 / self.denominator() as f64;
        if self.negative {
            -v
        } else {
            v
        }
    }

    pub fn inverse(self) -> Self {
        Self {
            negative: !self.negative,
            ..self
        }
    }

    /// Parses `"1/4"` or `"-1/8"`.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let (negative, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r.trim()),
            None => (false, s),
        };
        let (num, den) = rest.split_once('/')?;
        if num.trim() != "1" {
            return None;
        }
        let log2 = match den.trim() {
            "2" => 1,
            "4" => 2,
            "8" => 3,
            _ => return None,
        };
        Self::new(negative, log2).ok()
    }
}

impl fmt::Display for RootExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.negative { "-" } else { "" };
        write!(f, "{sign}1/{}", self.denominator())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    H,
    X,
    Cnot,
    Ccnot,
    Mcx,
    Swap,
    Phase(f64),
    ControlledPhase(f64),
    RootX(RootExponent),
    Measure { clbit: usize },
    Native { name: String, params: Vec<f64> },
}

impl GateKind {
    /// Short name used for gate counts and reports.
    pub fn name(&self) -> &str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Cnot => "cx",
            GateKind::Ccnot => "ccx",
            GateKind::Mcx => "mcx",
            GateKind::Swap => "swap",
            GateKind::Phase(_) => "p",
            GateKind::ControlledPhase(_) => "cp",
            GateKind::RootX(_) => "rootx",
            GateKind::Measure { .. } => "measure",
            GateKind::Native { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<QubitRef>,
    pub controls: Vec<Control>,
}

impl Gate {
    fn simple(kind: GateKind, targets: Vec<QubitRef>) -> Self {
        Self {
            kind,
            targets,
            controls: Vec::new(),
        }
    }

    pub fn h(q: QubitRef) -> Self {
        Self::simple(GateKind::H, vec![q])
    }

    pub fn x(q: QubitRef) -> Self {
        Self::simple(GateKind::X, vec![q])
    }

    pub fn cnot(control: QubitRef, target: QubitRef) -> Self {
        Self {
            kind: GateKind::Cnot,
            targets: vec![target],
            controls: vec![Control::pos(control)],
        }
    }

    pub fn ccnot(a: QubitRef, b: QubitRef, target: QubitRef) -> Self {
        Self {
            kind: GateKind::Ccnot,
            targets: vec![target],
            controls: vec![Control::pos(a), Control::pos(b)],
        }
    }

    /// Multi-controlled X. Specializes to CNOT / CCNOT when the controls are
    /// one or two positive wires and there is a single target.
    pub fn mcx(controls: Vec<Control>, target: QubitRef) -> Self {
        Self::mcx_multi(controls, vec![target])
    }

    pub fn mcx_multi(controls: Vec<Control>, targets: Vec<QubitRef>) -> Self {
        let all_pos = controls.iter().all(Control::is_positive);
        let kind = match (controls.len(), all_pos, targets.len()) {
            (1, true, 1) => GateKind::Cnot,
            (2, true, 1) => GateKind::Ccnot,
            _ => GateKind::Mcx,
        };
        Self {
            kind,
            targets,
            controls,
        }
    }

    pub fn swap(a: QubitRef, b: QubitRef) -> Self {
        Self::simple(GateKind::Swap, vec![a, b])
    }

    pub fn phase(angle: f64, q: QubitRef) -> Self {
        Self::simple(GateKind::Phase(angle), vec![q])
    }

    pub fn cphase(angle: f64, control: QubitRef, target: QubitRef) -> Self {
        Self {
            kind: GateKind::ControlledPhase(angle),
            targets: vec![target],
            controls: vec![Control::pos(control)],
        }
    }

    pub fn root_x(exponent: RootExponent, controls: Vec<Control>, target: QubitRef) -> Self {
        Self {
            kind: GateKind::RootX(exponent),
            targets: vec![target],
            controls,
        }
    }

    pub fn measure(q: QubitRef, clbit: usize) -> Self {
        Self::simple(GateKind::Measure { clbit }, vec![q])
    }

    pub fn native(name: impl Into<String>, params: Vec<f64>, qubits: Vec<QubitRef>) -> Self {
        Self::simple(
            GateKind::Native {
                name: name.into(),
                params,
            },
            qubits,
        )
    }

    /// Controls followed by targets.
    pub fn qubits(&self) -> impl Iterator<Item = QubitRef> + '_ {
        self.controls
            .iter()
            .map(|c| c.qubit)
            .chain(self.targets.iter().copied())
    }

    pub fn arity(&self) -> usize {
        self.controls.len() + self.targets.len()
    }

    /// True for X-type gates a classical bit simulator can execute.
    pub fn is_classical(&self) -> bool {
        matches!(
            self.kind,
            GateKind::X
                | GateKind::Cnot
                | GateKind::Ccnot
                | GateKind::Mcx
                | GateKind::Swap
                | GateKind::Measure { .. }
        )
    }

    pub fn clbit(&self) -> Option<usize> {
        match self.kind {
            GateKind::Measure { clbit } => Some(clbit),
            _ => None,
        }
    }

    fn malformed(&self, reason: impl Into<String>) -> CircuitError {
        CircuitError::MalformedGate {
            kind: self.kind.name().to_string(),
            reason: reason.into(),
        }
    }

    /// Structural checks that do not need the enclosing circuit.
    pub fn check_shape(&self) -> CircuitResult<()> {
        let n_t = self.targets.len();
        let n_c = self.controls.len();
        let all_pos = self.controls.iter().all(Control::is_positive);
        match &self.kind {
            GateKind::H | GateKind::X | GateKind::Measure { .. } => {
                if n_t != 1 || n_c != 0 {
                    return Err(self.malformed("expects one target and no controls"));
                }
            }
            GateKind::Phase(a) => {
                if n_t != 1 || n_c != 0 {
                    return Err(self.malformed("expects one target and no controls"));
                }
                if !a.is_finite() {
                    return Err(self.malformed("angle must be finite"));
                }
            }
            GateKind::ControlledPhase(a) => {
                if n_t != 1 || n_c != 1 || !all_pos {
                    return Err(self.malformed("expects one positive control and one target"));
                }
                if !a.is_finite() {
                    return Err(self.malformed("angle must be finite"));
                }
            }
            GateKind::Cnot => {
                if n_t != 1 || n_c != 1 || !all_pos {
                    return Err(self.malformed("expects one positive control and one target"));
                }
            }
            GateKind::Ccnot => {
                if n_t != 1 || n_c != 2 || !all_pos {
                    return Err(self.malformed("expects two positive controls and one target"));
                }
            }
            GateKind::Mcx => {
                if n_t == 0 || n_c == 0 {
                    return Err(self.malformed("expects at least one control and one target"));
                }
            }
            GateKind::Swap => {
                if n_t != 2 || n_c != 0 {
                    return Err(self.malformed("expects two targets and no controls"));
                }
            }
            GateKind::RootX(_) => {
                if n_t != 1 {
                    return Err(self.malformed("expects one target"));
                }
            }
            GateKind::Native { params, .. } => {
                if n_t == 0 {
                    return Err(self.malformed("expects at least one qubit"));
                }
                if params.iter().any(|p| !p.is_finite()) {
                    return Err(self.malformed("parameters must be finite"));
                }
            }
        }
        let mut seen: Vec<QubitRef> = Vec::with_capacity(self.arity());
        for q in self.qubits() {
            if seen.contains(&q) {
                return Err(CircuitError::DuplicateQubit(q));
            }
            seen.push(q);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageMark {
    pub gate_index: usize,
    pub label: String,
}

/// Ordered gate list over declared registers.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    registers: Vec<Register>,
    starts: Vec<usize>,
    num_qubits: usize,
    gates: Vec<Gate>,
    classical_bits: usize,
    stage_marks: Vec<StageMark>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_register(
        &mut self,
        name: impl Into<String>,
        size: usize,
        role: RegisterRole,
    ) -> CircuitResult<RegisterId> {
        let name = name.into();
        if size == 0 {
            return Err(CircuitError::EmptyRegister(name));
        }
        if self.registers.iter().any(|r| r.name == name) {
            return Err(CircuitError::DuplicateRegisterName(name));
        }
        let id = RegisterId(self.registers.len());
        self.starts.push(self.num_qubits);
        self.num_qubits += size;
        self.registers.push(Register {
            id,
            name,
            size,
            role,
        });
        Ok(id)
    }

    /// Declares `n` more classical bits and returns the index of the first.
    pub fn add_classical_bits(&mut self, n: usize) -> usize {
        let first = self.classical_bits;
        self.classical_bits += n;
        first
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, id: RegisterId) -> &Register {
        &self.registers[id.0]
    }

    pub fn register_by_name(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn registers_with_role(&self, role: RegisterRole) -> impl Iterator<Item = &Register> {
        self.registers.iter().filter(move |r| r.role == role)
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn classical_bits(&self) -> usize {
        self.classical_bits
    }

    pub fn stage_marks(&self) -> &[StageMark] {
        &self.stage_marks
    }

    /// Declared qubits across all registers.
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Global wire index of a qubit. The reference must be valid.
    pub fn wire(&self, q: QubitRef) -> usize {
        self.starts[q.register.0] + q.offset
    }

    /// Inverse of [`Circuit::wire`].
    pub fn qubit_at(&self, wire: usize) -> QubitRef {
        let reg = match self.starts.binary_search(&wire) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        QubitRef {
            register: RegisterId(reg),
            offset: wire - self.starts[reg],
        }
    }

    pub fn resolve(&self, q: QubitRef) -> CircuitResult<usize> {
        let reg = self
            .registers
            .get(q.register.0)
            .ok_or(CircuitError::UnknownRegister(q.register.0))?;
        if q.offset >= reg.size {
            return Err(CircuitError::OffsetOutOfRange {
                register: reg.name.clone(),
                offset: q.offset,
                size: reg.size,
            });
        }
        Ok(self.starts[q.register.0] + q.offset)
    }

    pub fn validate_gate(&self, gate: &Gate) -> CircuitResult<()> {
        gate.check_shape()?;
        for q in gate.qubits() {
            self.resolve(q)?;
        }
        if let Some(bit) = gate.clbit() {
            if bit >= self.classical_bits {
                return Err(CircuitError::ClassicalBitOutOfRange {
                    bit,
                    available: self.classical_bits,
                });
            }
        }
        Ok(())
    }

    /// Appends a single gate without touching the stage marks.
    pub fn push(&mut self, gate: Gate) -> CircuitResult<()> {
        self.validate_gate(&gate)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Records a stage mark at the current end of the gate list and appends
    /// `gates`. Either all gates are appended or none are.
    pub fn append_stage(
        &mut self,
        label: impl Into<String>,
        gates: impl IntoIterator<Item = Gate>,
    ) -> CircuitResult<()> {
        let gates: Vec<Gate> = gates.into_iter().collect();
        for g in &gates {
            self.validate_gate(g)?;
        }
        self.stage_marks.push(StageMark {
            gate_index: self.gates.len(),
            label: label.into(),
        });
        self.gates.extend(gates);
        Ok(())
    }

    /// Wires touched by at least one gate or measurement.
    pub fn touched_wires(&self) -> Vec<bool> {
        let mut touched = vec![false; self.num_qubits];
        for g in &self.gates {
            for q in g.qubits() {
                touched[self.wire(q)] = true;
            }
        }
        touched
    }

    /// Number of qubits touched by at least one gate.
    pub fn width(&self) -> usize {
        self.touched_wires().into_iter().filter(|&t| t).count()
    }

    /// Critical-path depth of the whole gate list.
    pub fn depth(&self) -> usize {
        self.depth_range(0..self.gates.len())
    }

    /// Critical-path depth of a sub-range of the gate list. Two gates conflict
    /// when they share a qubit or a classical bit; every gate is one step.
    pub fn depth_range(&self, range: Range<usize>) -> usize {
        let mut wire_level = vec![0usize; self.num_qubits];
        let mut bit_level = vec![0usize; self.classical_bits];
        let mut depth = 0;
        for g in &self.gates[range] {
            let mut level = 0;
            for q in g.qubits() {
                level = level.max(wire_level[self.wire(q)]);
            }
            if let Some(b) = g.clbit() {
                level = level.max(bit_level[b]);
            }
            level += 1;
            for q in g.qubits() {
                wire_level[self.wire(q)] = level;
            }
            if let Some(b) = g.clbit() {
                bit_level[b] = level;
            }
            depth = depth.max(level);
        }
        depth
    }

    pub fn gate_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for g in &self.gates {
            *counts.entry(g.kind.name().to_string()).or_insert(0) += 1;
        }
        counts
    }

    /// Gate ranges per stage. Consecutive marks sharing a label are merged.
    /// Gates before the first mark are not attributed to any stage.
    pub fn stage_ranges(&self) -> Vec<(String, Range<usize>)> {
        let mut out: Vec<(String, Range<usize>)> = Vec::new();
        for (i, mark) in self.stage_marks.iter().enumerate() {
            let end = self
                .stage_marks
                .get(i + 1)
                .map_or(self.gates.len(), |m| m.gate_index);
            match out.last_mut() {
                Some((label, range)) if *label == mark.label => range.end = end,
                _ => out.push((mark.label.clone(), mark.gate_index..end)),
            }
        }
        out
    }

    /// Depth of each stage computed independently. Labels that occur in
    /// several non-adjacent runs report the sum of their run depths.
    pub fn stage_depths(&self) -> BTreeMap<String, usize> {
        let mut depths = BTreeMap::new();
        for (label, range) in self.stage_ranges() {
            *depths.entry(label).or_insert(0) += self.depth_range(range);
        }
        depths
    }

    /// Same registers and classical bits, no gates.
    pub fn empty_like(&self) -> Self {
        Self {
            registers: self.registers.clone(),
            starts: self.starts.clone(),
            num_qubits: self.num_qubits,
            gates: Vec::new(),
            classical_bits: self.classical_bits,
            stage_marks: Vec::new(),
        }
    }

    /// Gate-by-gate rewrite. Each gate expands to a (possibly empty) list;
    /// stage marks are carried over to the start of the expansion of the gate
    /// they pointed at.
    pub fn rewrite<F, E>(&self, mut f: F) -> Result<Circuit, E>
    where
        F: FnMut(&Gate) -> Result<Vec<Gate>, E>,
        E: From<CircuitError>,
    {
        let mut out = self.empty_like();
        let mut marks = self.stage_marks.iter().peekable();
        for (i, g) in self.gates.iter().enumerate() {
            while let Some(m) = marks.next_if(|m| m.gate_index == i) {
                out.stage_marks.push(StageMark {
                    gate_index: out.gates.len(),
                    label: m.label.clone(),
                });
            }
            for ng in f(g)? {
                out.push(ng)?;
            }
        }
        for m in marks {
            out.stage_marks.push(StageMark {
                gate_index: out.gates.len(),
                label: m.label.clone(),
            });
        }
        Ok(out)
    }

    /// Replaces the gate list wholesale, keeping the given marks. Used by
    /// passes that build a new gate sequence directly.
    pub fn with_gates(&self, gates: Vec<Gate>, stage_marks: Vec<StageMark>) -> CircuitResult<Circuit> {
        let mut out = self.empty_like();
        for g in gates {
            out.push(g)?;
        }
        out.stage_marks = stage_marks;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> (Circuit, Register) {
        let mut c = Circuit::new();
        let id = c.add_register("q", n, RegisterRole::Other).unwrap();
        let r = c.register(id).clone();
        (c, r)
    }

    #[test]
    fn width_ignores_untouched_registers() {
        let mut c = Circuit::new();
        c.add_register("x", 3, RegisterRole::IndexX).unwrap();
        c.add_register("d_r", 2, RegisterRole::DataR).unwrap();
        assert_eq!(c.width(), 0);
        assert_eq!(c.depth(), 0);
        assert!(c.gate_counts().is_empty());
    }

    #[test]
    fn single_cnot_touches_two_wires() {
        let (mut c, q) = line(5);
        c.push(Gate::cnot(q.qubit(1), q.qubit(3))).unwrap();
        assert_eq!(c.width(), 2);
    }

    #[test]
    fn depth_examples() {
        let (mut c, q) = line(3);
        for i in 0..3 {
            c.push(Gate::h(q.qubit(i))).unwrap();
        }
        assert_eq!(c.depth(), 1);

        let (mut c, q) = line(2);
        c.push(Gate::h(q.qubit(0))).unwrap();
        c.push(Gate::cnot(q.qubit(0), q.qubit(1))).unwrap();
        c.push(Gate::x(q.qubit(1))).unwrap();
        assert_eq!(c.depth(), 3);
    }

    #[test]
    fn measurements_conflict_on_classical_bits() {
        let (mut c, q) = line(2);
        c.add_classical_bits(1);
        c.push(Gate::measure(q.qubit(0), 0)).unwrap();
        c.push(Gate::measure(q.qubit(1), 0)).unwrap();
        assert_eq!(c.depth(), 2);
    }

    #[test]
    fn mcx_specializes() {
        let (_, q) = line(4);
        assert_eq!(Gate::mcx(vec![Control::pos(q.qubit(0))], q.qubit(1)).kind, GateKind::Cnot);
        assert_eq!(
            Gate::mcx(vec![Control::pos(q.qubit(0)), Control::pos(q.qubit(2))], q.qubit(1)).kind,
            GateKind::Ccnot
        );
        assert_eq!(
            Gate::mcx(vec![Control::neg(q.qubit(0)), Control::pos(q.qubit(2))], q.qubit(1)).kind,
            GateKind::Mcx
        );
    }

    #[test]
    fn append_stage_records_marks() {
        let (mut c, q) = line(8);
        c.append_stage(stage::INIT, Vec::new()).unwrap();
        assert_eq!(c.len(), 0);
        assert_eq!(c.stage_marks().len(), 1);
        c.append_stage(stage::INIT, q.qubits().into_iter().map(Gate::h)).unwrap();
        assert_eq!(c.len(), 8);
        assert_eq!(c.stage_marks().len(), 2);
        assert_eq!(c.stage_ranges(), vec![("init".to_string(), 0..8)]);
    }

    #[test]
    fn append_stage_rejects_unknown_register() {
        let (mut c, q) = line(2);
        let bogus = QubitRef {
            register: RegisterId(7),
            offset: 0,
        };
        let err = c
            .append_stage("neqr", vec![Gate::h(q.qubit(0)), Gate::x(bogus)])
            .unwrap_err();
        assert_eq!(err, CircuitError::UnknownRegister(7));
        assert!(c.is_empty());
        assert!(c.stage_marks().is_empty());
    }

    #[test]
    fn duplicate_qubit_rejected() {
        let (mut c, q) = line(2);
        let g = Gate::mcx(vec![Control::pos(q.qubit(0))], q.qubit(0));
        assert!(matches!(c.push(g), Err(CircuitError::DuplicateQubit(_))));
    }

    #[test]
    fn duplicate_register_names_rejected() {
        let mut c = Circuit::new();
        c.add_register("a", 1, RegisterRole::Other).unwrap();
        assert!(c.add_register("a", 2, RegisterRole::Other).is_err());
        assert!(c.add_register("b", 0, RegisterRole::Other).is_err());
    }

    #[test]
    fn wire_roundtrip() {
        let mut c = Circuit::new();
        c.add_register("a", 3, RegisterRole::Other).unwrap();
        c.add_register("b", 2, RegisterRole::Other).unwrap();
        for w in 0..5 {
            assert_eq!(c.wire(c.qubit_at(w)), w);
        }
        assert_eq!(c.qubit_at(3).register, RegisterId(1));
    }

    #[test]
    fn root_exponent_parse_and_display() {
        for s in ["1/2", "-1/2", "1/4", "-1/4", "1/8", "-1/8"] {
            assert_eq!(RootExponent::parse(s).unwrap().to_string(), s);
        }
        assert!(RootExponent::parse("1/16").is_none());
        assert!(RootExponent::parse("3/4").is_none());
    }

    #[test]
    fn rewrite_moves_marks() {
        let (mut c, q) = line(2);
        c.append_stage("a", vec![Gate::h(q.qubit(0))]).unwrap();
        c.append_stage("b", vec![Gate::swap(q.qubit(0), q.qubit(1))]).unwrap();
        let r: Circuit = c
            .rewrite::<_, CircuitError>(|g| {
                Ok(match g.kind {
                    GateKind::Swap => vec![
                        Gate::cnot(q.qubit(0), q.qubit(1)),
                        Gate::cnot(q.qubit(1), q.qubit(0)),
                        Gate::cnot(q.qubit(0), q.qubit(1)),
                    ],
                    _ => vec![g.clone()],
                })
            })
            .unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!(
            r.stage_ranges(),
            vec![("a".to_string(), 0..1), ("b".to_string(), 1..4)]
        );
    }
}
