//! Two-level logic covers for sequence encoding.
//!
//! A sequence is turned into a PLA truth table (index bits in, element bits
//! out), optionally compressed by exhaustive distance-1 cube merging, and
//! then realized as multi-controlled X gates. Text forms are MSB-first: the
//! leftmost input character is the highest index bit and the leftmost output
//! character is the highest data bit.
//!
//! Gates realize XOR, covers are read as OR. The two agree because every
//! cover produced here keeps its cubes pairwise disjoint: it starts from
//! distinct minterms and a distance-1 merge replaces two disjoint cubes by
//! exactly their union.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Polarity;
use crate::parallel;
use crate::sequence::SymbolSequence;

pub const MAX_INPUTS: usize = 63;
pub const MAX_OUTPUTS: usize = 63;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("sequence length {0} is not a power of two")]
    Unpadded(usize),
    #[error("cube {0} contains a don't-care literal; expected a minterm")]
    NotMinterm(String),
    #[error("arity mismatch: {a_in}x{a_out} vs {b_in}x{b_out}")]
    ArityMismatch {
        a_in: usize,
        a_out: usize,
        b_in: usize,
        b_out: usize,
    },
    #[error("{0} inputs/outputs exceed the supported maximum")]
    TooWide(usize),
    #[error("PLA parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Literal {
    Zero,
    One,
    Dash,
}

impl Literal {
    fn rank(self) -> u8 {
        match self {
            Literal::Zero => 0,
            Literal::One => 1,
            Literal::Dash => 2,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Literal::Zero => '0',
            Literal::One => '1',
            Literal::Dash => '-',
        }
    }
}

/// An input pattern with an output mask. Bit `k` of `care`/`value` is index
/// bit `k`; a cleared `care` bit is a don't-care.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cube {
    care: u64,
    value: u64,
    output: u64,
}

impl Cube {
    /// `value` bits outside `care` are dropped.
    pub fn new(care: u64, value: u64, output: u64) -> Self {
        Self {
            care,
            value: value & care,
            output,
        }
    }

    pub fn minterm(n_inputs: usize, index: u64, output: u64) -> Self {
        Self::new(low_mask(n_inputs), index, output)
    }

    /// From MSB-first literals.
    pub fn from_literals(literals: &[Literal], output: u64) -> Self {
        let n = literals.len();
        let mut care = 0;
        let mut value = 0;
        for (i, lit) in literals.iter().enumerate() {
            let bit = 1u64 << (n - 1 - i);
            match lit {
                Literal::Zero => care |= bit,
                Literal::One => {
                    care |= bit;
                    value |= bit;
                }
                Literal::Dash => {}
            }
        }
        Self { care, value, output }
    }

    pub fn care(&self) -> u64 {
        self.care
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn output(&self) -> u64 {
        self.output
    }

    pub fn literal(&self, bit: usize) -> Literal {
        let m = 1u64 << bit;
        if self.care & m == 0 {
            Literal::Dash
        } else if self.value & m != 0 {
            Literal::One
        } else {
            Literal::Zero
        }
    }

    /// MSB-first literal vector.
    pub fn literals(&self, n_inputs: usize) -> Vec<Literal> {
        (0..n_inputs).rev().map(|b| self.literal(b)).collect()
    }

    pub fn is_minterm(&self, n_inputs: usize) -> bool {
        self.care == low_mask(n_inputs)
    }

    pub fn matches(&self, assignment: u64) -> bool {
        assignment & self.care == self.value
    }

    /// Every assignment matched by `self` is matched by `other`.
    pub fn is_contained_in(&self, other: &Cube) -> bool {
        other.care & !self.care == 0 && self.value & other.care == other.value
    }

    fn intersects(&self, other: &Cube) -> bool {
        let common = self.care & other.care;
        self.value & common == other.value & common
    }

    pub fn input_string(&self, n_inputs: usize) -> String {
        self.literals(n_inputs).into_iter().map(Literal::as_char).collect()
    }

    pub fn output_string(&self, n_outputs: usize) -> String {
        (0..n_outputs)
            .rev()
            .map(|b| if self.output >> b & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    fn lex_cmp(&self, other: &Cube, n_inputs: usize) -> Ordering {
        for b in (0..n_inputs).rev() {
            match self.literal(b).rank().cmp(&other.literal(b).rank()) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.output.cmp(&other.output)
    }
}

fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A single-valued two-level cover.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaTable {
    n_inputs: usize,
    n_outputs: usize,
    cubes: Vec<Cube>,
}

impl PlaTable {
    /// Cubes with an all-zero output are dropped.
    pub fn new(n_inputs: usize, n_outputs: usize, cubes: Vec<Cube>) -> Result<Self, LogicError> {
        if n_inputs == 0 || n_inputs > MAX_INPUTS {
            return Err(LogicError::TooWide(n_inputs));
        }
        if n_outputs == 0 || n_outputs > MAX_OUTPUTS {
            return Err(LogicError::TooWide(n_outputs));
        }
        let in_mask = low_mask(n_inputs);
        let out_mask = low_mask(n_outputs);
        let cubes = cubes
            .into_iter()
            .map(|c| Cube::new(c.care & in_mask, c.value, c.output & out_mask))
            .filter(|c| c.output != 0)
            .collect();
        Ok(Self {
            n_inputs,
            n_outputs,
            cubes,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// OR of the outputs of every cube matching `assignment`.
    pub fn eval(&self, assignment: u64) -> u64 {
        self.cubes
            .iter()
            .filter(|c| c.matches(assignment))
            .fold(0, |acc, c| acc | c.output)
    }

    /// True when no two cubes sharing an output bit overlap. Such covers can
    /// be realized with XOR-accumulating gates.
    pub fn is_disjoint(&self) -> bool {
        for (i, a) in self.cubes.iter().enumerate() {
            for b in &self.cubes[i + 1..] {
                if a.output & b.output != 0 && a.intersects(b) {
                    return false;
                }
            }
        }
        true
    }

    /// Cubes sorted lexicographically (MSB first, `0 < 1 < -`, then output).
    pub fn canonical(&self) -> Self {
        let mut cubes = self.cubes.clone();
        cubes.sort_by(|a, b| a.lex_cmp(b, self.n_inputs));
        cubes.dedup();
        Self {
            cubes,
            ..self.clone()
        }
    }

    /// Berkeley PLA text.
    pub fn to_pla_string(&self) -> String {
        let mut s = format!(
            ".i {}\n.o {}\n.p {}\n",
            self.n_inputs,
            self.n_outputs,
            self.cubes.len()
        );
        for c in &self.cubes {
            s.push_str(&c.input_string(self.n_inputs));
            s.push(' ');
            s.push_str(&c.output_string(self.n_outputs));
            s.push('\n');
        }
        s.push_str(".e\n");
        s
    }

    /// Parses Berkeley PLA text. `.ilb`, `.ob`, `.type` and comments are
    /// ignored; `.p`, when present, must match the cube count.
    pub fn parse_pla(text: &str) -> Result<Self, LogicError> {
        let mut n_in: Option<usize> = None;
        let mut n_out: Option<usize> = None;
        let mut declared: Option<(usize, usize)> = None;
        let mut cubes = Vec::new();
        let err = |line: usize, reason: String| LogicError::Parse { line, reason };
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(directive) = line.strip_prefix('.') {
                let mut parts = directive.split_whitespace();
                let key = parts.next().unwrap_or("");
                let arg = parts.next();
                let num = |a: Option<&str>| -> Result<usize, LogicError> {
                    a.and_then(|s| s.parse().ok())
                        .ok_or_else(|| err(line_no, format!("`.{key}` needs a number")))
                };
                match key {
                    "i" => n_in = Some(num(arg)?),
                    "o" => n_out = Some(num(arg)?),
                    "p" => declared = Some((num(arg)?, line_no)),
                    "e" | "end" => break,
                    "ilb" | "ob" | "type" => {}
                    other => return Err(err(line_no, format!("unsupported directive `.{other}`"))),
                }
                continue;
            }
            let (ni, no) = match (n_in, n_out) {
                (Some(i), Some(o)) => (i, o),
                _ => return Err(err(line_no, "cube before `.i`/`.o`".into())),
            };
            let mut parts = line.split_whitespace();
            let ins = parts.next().unwrap_or("");
            let outs = parts.next().ok_or_else(|| err(line_no, "missing output part".into()))?;
            if parts.next().is_some() {
                return Err(err(line_no, "trailing fields".into()));
            }
            if ins.len() != ni || outs.len() != no {
                return Err(err(line_no, format!("expected {ni} inputs and {no} outputs")));
            }
            let literals = ins
                .chars()
                .map(|ch| match ch {
                    '0' => Ok(Literal::Zero),
                    '1' => Ok(Literal::One),
                    '-' => Ok(Literal::Dash),
                    other => Err(err(line_no, format!("bad input character `{other}`"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut output = 0u64;
            for (i, ch) in outs.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => output |= 1 << (no - 1 - i),
                    other => return Err(err(line_no, format!("bad output character `{other}`"))),
                }
            }
            cubes.push(Cube::from_literals(&literals, output));
        }
        let (ni, no) = match (n_in, n_out) {
            (Some(i), Some(o)) => (i, o),
            _ => return Err(err(0, "missing `.i` or `.o`".into())),
        };
        if let Some((p, line)) = declared {
            if p != cubes.len() {
                return Err(err(line, format!("`.p {p}` but {} cubes present", cubes.len())));
            }
        }
        Self::new(ni, no, cubes)
    }
}

impl fmt::Display for PlaTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_pla_string())
    }
}

/// One multi-controlled X in terms of PLA bit positions. Controls are index
/// bits listed MSB first; an empty control list means an unconditional X.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McxSpec {
    pub controls: Vec<(usize, Polarity)>,
    pub target: usize,
}

/// One minterm per nonzero element; zero-valued indices are omitted.
pub fn build_pla(seq: &SymbolSequence) -> Result<PlaTable, LogicError> {
    let len = seq.padded_length();
    if !len.is_power_of_two() {
        return Err(LogicError::Unpadded(len));
    }
    let n_inputs = seq.index_bits() as usize;
    let cubes = seq
        .codes()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(i, &v)| Cube::minterm(n_inputs, i as u64, v as u64))
        .collect();
    PlaTable::new(n_inputs, seq.d() as usize, cubes)
}

fn cube_controls(cube: &Cube, n_inputs: usize) -> Vec<(usize, Polarity)> {
    (0..n_inputs)
        .rev()
        .filter_map(|b| match cube.literal(b) {
            Literal::Zero => Some((b, Polarity::Negative)),
            Literal::One => Some((b, Polarity::Positive)),
            Literal::Dash => None,
        })
        .collect()
}

fn emit_bits(controls: Vec<(usize, Polarity)>, output: u64, n_outputs: usize, out: &mut Vec<McxSpec>) {
    for bit in (0..n_outputs).rev() {
        if output >> bit & 1 == 1 {
            out.push(McxSpec {
                controls: controls.clone(),
                target: bit,
            });
        }
    }
}

/// One gate per (minterm, set output bit); every gate is controlled by all
/// index bits.
pub fn brute_force_mcx(table: &PlaTable) -> Result<Vec<McxSpec>, LogicError> {
    let mut out = Vec::new();
    for c in &table.cubes {
        if !c.is_minterm(table.n_inputs) {
            return Err(LogicError::NotMinterm(c.input_string(table.n_inputs)));
        }
        emit_bits(cube_controls(c, table.n_inputs), c.output, table.n_outputs, &mut out);
    }
    Ok(out)
}

/// Realizes any cover: non-dash literals become controls (zero literals
/// negative), cubes with identical literals share one control set, and each
/// set output bit gets its own gate.
pub fn cubes_to_mcx(table: &PlaTable) -> Vec<McxSpec> {
    let mut merged: Vec<Cube> = Vec::with_capacity(table.cubes.len());
    let mut slot: HashMap<(u64, u64), usize> = HashMap::new();
    for c in &table.cubes {
        match slot.get(&(c.care, c.value)) {
            Some(&i) => merged[i].output |= c.output,
            None => {
                slot.insert((c.care, c.value), merged.len());
                merged.push(*c);
            }
        }
    }
    let mut out = Vec::new();
    for c in &merged {
        emit_bits(cube_controls(c, table.n_inputs), c.output, table.n_outputs, &mut out);
    }
    out
}

/// Removes exact duplicates and cubes contained in another cube with the
/// same output mask.
fn remove_contained(cubes: &mut Vec<Cube>) {
    let mut keep = vec![true; cubes.len()];
    for i in 0..cubes.len() {
        if !keep[i] {
            continue;
        }
        for j in 0..cubes.len() {
            if i == j || !keep[j] || cubes[i].output != cubes[j].output {
                continue;
            }
            // j dies if it sits inside i; ties go to the earlier cube
            if cubes[j].is_contained_in(&cubes[i]) && (cubes[i] != cubes[j] || i < j) {
                keep[j] = false;
            }
        }
    }
    let mut k = 0;
    cubes.retain(|_| {
        let r = keep[k];
        k += 1;
        r
    });
}

/// Exhaustive distance-1 merging under equal output masks, to fixpoint.
///
/// Each pass walks the cubes in lexicographic order and merges every
/// unconsumed cube with its lexicographically first unconsumed partner (same
/// care set and output, values differing in one bit). Passes repeat until
/// none merges; duplicates and contained cubes are dropped between passes.
pub fn d1merge_minimize(table: &PlaTable) -> PlaTable {
    let n = table.n_inputs;
    let mut cubes = table.cubes.clone();
    loop {
        remove_contained(&mut cubes);
        cubes.sort_by(|a, b| a.lex_cmp(b, n));
        let index: HashMap<(u64, u64, u64), usize> = cubes
            .iter()
            .enumerate()
            .map(|(i, c)| ((c.output, c.care, c.value), i))
            .collect();
        let mut consumed = vec![false; cubes.len()];
        let mut next = Vec::with_capacity(cubes.len());
        let mut merged_any = false;
        for i in 0..cubes.len() {
            if consumed[i] {
                continue;
            }
            let c = cubes[i];
            let partner = (0..n)
                .filter(|&b| c.care >> b & 1 == 1)
                .filter_map(|b| index.get(&(c.output, c.care, c.value ^ (1 << b))).copied())
                .filter(|&j| !consumed[j])
                .min();
            match partner {
                Some(j) => {
                    consumed[i] = true;
                    consumed[j] = true;
                    let bit = (c.value ^ cubes[j].value) & c.care;
                    next.push(Cube::new(c.care & !bit, c.value, c.output));
                    merged_any = true;
                }
                None => {
                    consumed[i] = true;
                    next.push(c);
                }
            }
        }
        cubes = next;
        if !merged_any {
            break;
        }
    }
    remove_contained(&mut cubes);
    cubes.sort_by(|a, b| a.lex_cmp(b, n));
    PlaTable {
        cubes,
        ..table.clone()
    }
}

/// Exhaustive comparison of two covers over all `2^n_inputs` assignments.
pub fn functional_equal(a: &PlaTable, b: &PlaTable) -> Result<bool, LogicError> {
    if a.n_inputs != b.n_inputs || a.n_outputs != b.n_outputs {
        return Err(LogicError::ArityMismatch {
            a_in: a.n_inputs,
            a_out: a.n_outputs,
            b_in: b.n_inputs,
            b_out: b.n_outputs,
        });
    }
    if a.n_inputs > 32 {
        return Err(LogicError::TooWide(a.n_inputs));
    }
    let n = 1usize << a.n_inputs;
    Ok(parallel::all_indices(n, |x| a.eval(x as u64) == b.eval(x as u64)))
}

/// CCNOTs in the ancilla-chain realization: one per two-control gate and
/// `2(c - 2) + 1` per gate with `c >= 3` controls.
pub fn chain_ccnot_count(gates: &[McxSpec]) -> usize {
    gates
        .iter()
        .map(|g| match g.controls.len() {
            0 | 1 => 0,
            c => 2 * (c - 2) + 1,
        })
        .sum()
}
