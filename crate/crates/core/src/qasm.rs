//! OpenQASM 2.0 emission and a reader for the subset this crate emits.
//!
//! Phase, controlled phase, roots of X and the Ising coupling get small gate
//! definitions ahead of the register declarations. Stage marks travel as
//! `// stage: <label>` comments so a round trip keeps per-stage metrics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Control, Gate, GateKind, QubitRef, RegisterRole, RootExponent, StageMark};

#[derive(Debug, Error)]
pub enum QasmError {
    #[error("gate `{0}` cannot be written in OpenQASM 2.0; lower the circuit first")]
    Unexpressible(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

const PRELUDE_P: &str = "gate p(lambda) a { u1(lambda) a; }";
const PRELUDE_CP: &str = "gate cp(lambda) a,b { p(lambda/2) a; cx a,b; p(-lambda/2) b; cx a,b; p(lambda/2) b; }";
const PRELUDE_ROOTX: &str = "gate rootx(e) a { h a; u1(pi*e) a; h a; }";
const PRELUDE_CROOTX: &str = "gate crootx(e) a,b { h b; cp(pi*e) a,b; h b; }";
const PRELUDE_RXX: &str = "gate rxx(theta) a,b { h a; h b; cx a,b; u1(theta) b; cx a,b; h a; h b; }";

fn creg_name(circuit: &Circuit) -> &'static str {
    if circuit.register_by_name("c").is_some() {
        "clbits"
    } else {
        "c"
    }
}

fn fmt_params(params: &[f64]) -> String {
    params.iter().map(|p| format!("{p}")).collect::<Vec<_>>().join(",")
}

/// Renders `circuit` as an OpenQASM 2.0 program. Output depends only on the
/// circuit, so identical circuits give identical bytes.
pub fn emit_qasm(circuit: &Circuit) -> Result<String, QasmError> {
    let q = |r: QubitRef| format!("{}[{}]", circuit.register(r.register).name, r.offset);
    let mut needs = BTreeMap::new();
    let mut body = String::new();
    let creg = creg_name(circuit);
    let mut marks = circuit.stage_marks().iter().peekable();
    for (i, g) in circuit.gates().iter().enumerate() {
        while let Some(m) = marks.next_if(|m| m.gate_index == i) {
            writeln!(body, "// stage: {}", m.label).unwrap();
        }
        if g.controls.iter().any(|c| !c.is_positive()) {
            return Err(QasmError::Unexpressible(format!("{} with negative controls", g.kind.name())));
        }
        let ctl: Vec<String> = g.controls.iter().map(|c| q(c.qubit)).collect();
        let tgt: Vec<String> = g.targets.iter().map(|&t| q(t)).collect();
        let all = || [ctl.clone(), tgt.clone()].concat().join(",");
        let line = match &g.kind {
            GateKind::H => format!("h {};", tgt[0]),
            GateKind::X => format!("x {};", tgt[0]),
            GateKind::Cnot => format!("cx {};", all()),
            GateKind::Ccnot => format!("ccx {};", all()),
            GateKind::Swap => format!("swap {};", all()),
            GateKind::Mcx => return Err(QasmError::Unexpressible(format!("mcx with {} controls", ctl.len()))),
            GateKind::Phase(t) => {
                needs.insert(0, PRELUDE_P);
                format!("p({t}) {};", tgt[0])
            }
            GateKind::ControlledPhase(t) => {
                needs.insert(0, PRELUDE_P);
                needs.insert(1, PRELUDE_CP);
                format!("cp({t}) {};", all())
            }
            GateKind::RootX(e) if ctl.is_empty() => {
                needs.insert(2, PRELUDE_ROOTX);
                format!("rootx({e}) {};", tgt[0])
            }
            GateKind::RootX(e) if ctl.len() == 1 => {
                needs.insert(0, PRELUDE_P);
                needs.insert(1, PRELUDE_CP);
                needs.insert(3, PRELUDE_CROOTX);
                format!("crootx({e}) {};", all())
            }
            GateKind::RootX(_) => return Err(QasmError::Unexpressible("multi-controlled rootx".into())),
            GateKind::Measure { clbit } => format!("measure {} -> {creg}[{clbit}];", tgt[0]),
            GateKind::Native { name, params } => {
                if !ctl.is_empty() {
                    return Err(QasmError::Unexpressible(format!("controlled {name}")));
                }
                if name == "rxx" {
                    needs.insert(4, PRELUDE_RXX);
                }
                if params.is_empty() {
                    format!("{name} {};", tgt.join(","))
                } else {
                    format!("{name}({}) {};", fmt_params(params), tgt.join(","))
                }
            }
        };
        body.push_str(&line);
        body.push('\n');
    }
    for m in marks {
        writeln!(body, "// stage: {}", m.label).unwrap();
    }
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    for p in needs.values() {
        out.push_str(p);
        out.push('\n');
    }
    for r in circuit.registers() {
        writeln!(out, "qreg {}[{}];", r.name, r.size).unwrap();
    }
    if circuit.classical_bits() > 0 {
        writeln!(out, "creg {creg}[{}];", circuit.classical_bits()).unwrap();
    }
    out.push_str(&body);
    Ok(out)
}

pub fn write_qasm(circuit: &Circuit, path: &Path) -> Result<(), QasmError> {
    let text = emit_qasm(circuit)?;
    std::fs::write(path, text).map_err(|source| QasmError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Register role inferred from the names the encoder uses.
fn role_for(name: &str) -> RegisterRole {
    match name {
        "x" => RegisterRole::IndexX,
        "y" => RegisterRole::IndexY,
        "d_r" => RegisterRole::DataR,
        "d_q" => RegisterRole::DataQ,
        "v" => RegisterRole::ValueV,
        "anc" => RegisterRole::Ancilla,
        _ => RegisterRole::Other,
    }
}

/// Arithmetic over numbers, `pi`, `+ - * /`, unary minus and parentheses.
fn eval_expr(src: &str) -> Result<f64, String> {
    struct P<'a> {
        s: &'a [u8],
        i: usize,
    }
    impl P<'_> {
        fn ws(&mut self) {
            while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
                self.i += 1;
            }
        }
        fn peek(&mut self) -> Option<u8> {
            self.ws();
            self.s.get(self.i).copied()
        }
        fn expr(&mut self) -> Result<f64, String> {
            let mut v = self.term()?;
            while let Some(op @ (b'+' | b'-')) = self.peek() {
                self.i += 1;
                let r = self.term()?;
                v = if op == b'+' { v + r } else { v - r };
            }
            Ok(v)
        }
        fn term(&mut self) -> Result<f64, String> {
            let mut v = self.unary()?;
            while let Some(op @ (b'*' | b'/')) = self.peek() {
                self.i += 1;
                let r = self.unary()?;
                v = if op == b'*' { v * r } else { v / r };
            }
            Ok(v)
        }
        fn unary(&mut self) -> Result<f64, String> {
            match self.peek() {
                Some(b'-') => {
                    self.i += 1;
                    Ok(-self.unary()?)
                }
                Some(b'+') => {
                    self.i += 1;
                    self.unary()
                }
                _ => self.atom(),
            }
        }
        fn atom(&mut self) -> Result<f64, String> {
            match self.peek() {
                Some(b'(') => {
                    self.i += 1;
                    let v = self.expr()?;
                    if self.peek() != Some(b')') {
                        return Err("missing `)`".into());
                    }
                    self.i += 1;
                    Ok(v)
                }
                Some(c) if c.is_ascii_alphabetic() => {
                    let start = self.i;
                    while self.i < self.s.len() && self.s[self.i].is_ascii_alphanumeric() {
                        self.i += 1;
                    }
                    match &self.s[start..self.i] {
                        b"pi" => Ok(std::f64::consts::PI),
                        other => Err(format!("unknown identifier `{}`", String::from_utf8_lossy(other))),
                    }
                }
                Some(_) => {
                    let start = self.i;
                    while self.i < self.s.len() {
                        let c = self.s[self.i];
                        let exp_sign = (c == b'-' || c == b'+')
                            && self.i > start
                            && matches!(self.s[self.i - 1], b'e' | b'E');
                        if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                            self.i += 1;
                        } else {
                            break;
                        }
                    }
                    let text = std::str::from_utf8(&self.s[start..self.i]).unwrap();
                    text.parse::<f64>().map_err(|_| format!("bad number `{text}`"))
                }
                None => Err("unexpected end of expression".into()),
            }
        }
    }
    let mut p = P { s: src.as_bytes(), i: 0 };
    let v = p.expr()?;
    if p.peek().is_some() {
        return Err(format!("trailing input in `{src}`"));
    }
    Ok(v)
}

/// Splits on commas that are not inside parentheses.
fn split_top(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(s[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn root_from_value(v: f64) -> Option<RootExponent> {
    (1..=3u8).find_map(|k| {
        let mag = 1.0 / f64::from(1u32 << k);
        if (v.abs() - mag).abs() < 1e-12 {
            RootExponent::new(v < 0.0, k).ok()
        } else {
            None
        }
    })
}

struct Reader {
    circuit: Circuit,
    cregs: BTreeMap<String, (usize, usize)>,
    pending_marks: Vec<String>,
    marks: Vec<StageMark>,
    gates: Vec<Gate>,
}

impl Reader {
    fn qubit(&self, arg: &str) -> Result<QubitRef, String> {
        let (name, idx) = arg
            .trim()
            .strip_suffix(']')
            .and_then(|a| a.split_once('['))
            .ok_or_else(|| format!("expected `reg[i]`, got `{arg}`"))?;
        let reg = self
            .circuit
            .register_by_name(name.trim())
            .ok_or_else(|| format!("unknown register `{name}`"))?;
        let i: usize = idx.trim().parse().map_err(|_| format!("bad index in `{arg}`"))?;
        if i >= reg.size {
            return Err(format!("index {i} out of range for `{}`", reg.name));
        }
        Ok(reg.qubit(i))
    }

    fn clbit(&self, arg: &str) -> Result<usize, String> {
        let (name, idx) = arg
            .trim()
            .strip_suffix(']')
            .and_then(|a| a.split_once('['))
            .ok_or_else(|| format!("expected `creg[i]`, got `{arg}`"))?;
        let &(offset, size) = self.cregs.get(name.trim()).ok_or_else(|| format!("unknown creg `{name}`"))?;
        let i: usize = idx.trim().parse().map_err(|_| format!("bad index in `{arg}`"))?;
        if i >= size {
            return Err(format!("classical index {i} out of range"));
        }
        Ok(offset + i)
    }

    fn push(&mut self, g: Gate) {
        for label in self.pending_marks.drain(..) {
            self.marks.push(StageMark {
                gate_index: self.gates.len(),
                label,
            });
        }
        self.gates.push(g);
    }

    fn statement(&mut self, stmt: &str) -> Result<(), String> {
        let stmt = stmt.trim();
        if stmt.is_empty() || stmt.starts_with("OPENQASM") || stmt.starts_with("include") || stmt.starts_with("barrier") {
            return Ok(());
        }
        if let Some(rest) = stmt.strip_prefix("qreg") {
            let (name, size) = decl(rest)?;
            self.circuit
                .add_register(name.clone(), size, role_for(&name))
                .map_err(|e| e.to_string())?;
            return Ok(());
        }
        if let Some(rest) = stmt.strip_prefix("creg") {
            let (name, size) = decl(rest)?;
            let first = self.circuit.add_classical_bits(size);
            self.cregs.insert(name, (first, size));
            return Ok(());
        }
        if let Some(rest) = stmt.strip_prefix("measure") {
            let (q, c) = rest.split_once("->").ok_or("measure needs `->`")?;
            let g = Gate::measure(self.qubit(q)?, self.clbit(c)?);
            self.push(g);
            return Ok(());
        }
        // name[(params)] args
        let name_end = stmt
            .find(|c: char| c == '(' || c.is_whitespace())
            .ok_or_else(|| format!("cannot parse `{stmt}`"))?;
        let name = &stmt[..name_end];
        let mut rest = stmt[name_end..].trim_start();
        let mut params = Vec::new();
        if rest.starts_with('(') {
            let mut depth = 0;
            let close = rest
                .char_indices()
                .find(|&(_, c)| {
                    match c {
                        '(' => depth += 1,
                        ')' => depth -= 1,
                        _ => {}
                    }
                    depth == 0
                })
                .map(|(i, _)| i)
                .ok_or("unbalanced parentheses")?;
            for p in split_top(&rest[1..close]) {
                params.push(eval_expr(p)?);
            }
            rest = rest[close + 1..].trim_start();
        }
        let qs = split_top(rest)
            .into_iter()
            .map(|a| self.qubit(a))
            .collect::<Result<Vec<_>, _>>()?;
        let arity = |n: usize| -> Result<(), String> {
            if qs.len() == n {
                Ok(())
            } else {
                Err(format!("`{name}` takes {n} qubits, got {}", qs.len()))
            }
        };
        let p0 = || params.first().copied().ok_or_else(|| format!("`{name}` needs a parameter"));
        let g = match name {
            "h" => {
                arity(1)?;
                Gate::h(qs[0])
            }
            "x" => {
                arity(1)?;
                Gate::x(qs[0])
            }
            "cx" | "CX" => {
                arity(2)?;
                Gate::cnot(qs[0], qs[1])
            }
            "ccx" => {
                arity(3)?;
                Gate::ccnot(qs[0], qs[1], qs[2])
            }
            "swap" => {
                arity(2)?;
                Gate::swap(qs[0], qs[1])
            }
            "p" => {
                arity(1)?;
                Gate::phase(p0()?, qs[0])
            }
            "cp" => {
                arity(2)?;
                Gate::cphase(p0()?, qs[0], qs[1])
            }
            "rootx" | "crootx" => {
                let e = root_from_value(p0()?).ok_or_else(|| format!("unsupported root exponent {}", params[0]))?;
                if name == "rootx" {
                    arity(1)?;
                    Gate::root_x(e, vec![], qs[0])
                } else {
                    arity(2)?;
                    Gate::root_x(e, vec![Control::pos(qs[0])], qs[1])
                }
            }
            _ => Gate::native(name, params.clone(), qs.clone()),
        };
        self.circuit.validate_gate(&g).map_err(|e| e.to_string())?;
        self.push(g);
        Ok(())
    }
}

fn decl(rest: &str) -> Result<(String, usize), String> {
    let rest = rest.trim();
    let (name, size) = rest
        .strip_suffix(']')
        .and_then(|r| r.split_once('['))
        .ok_or_else(|| format!("bad declaration `{rest}`"))?;
    let size = size.trim().parse().map_err(|_| format!("bad size in `{rest}`"))?;
    Ok((name.trim().to_string(), size))
}

/// Reads a program written by [`emit_qasm`] (or any program using the same
/// statement forms). Gate definitions are skipped; their names are
/// recognised directly.
pub fn parse_qasm(text: &str) -> Result<Circuit, QasmError> {
    let mut reader = Reader {
        circuit: Circuit::new(),
        cregs: BTreeMap::new(),
        pending_marks: Vec::new(),
        marks: Vec::new(),
        gates: Vec::new(),
    };
    let mut in_gate_def = false;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let err = |reason: String| QasmError::Parse { line: line_no, reason };
        let (code, comment) = match raw.find("//") {
            Some(i) => (&raw[..i], Some(raw[i + 2..].trim())),
            None => (raw, None),
        };
        if let Some(label) = comment.and_then(|c| c.strip_prefix("stage:")) {
            reader.pending_marks.push(label.trim().to_string());
        }
        let mut code = code.trim();
        if in_gate_def || code.starts_with("gate ") || code.starts_with("opaque ") {
            if code.starts_with("opaque ") {
                continue;
            }
            in_gate_def = !code.contains('}');
            continue;
        }
        while !code.is_empty() {
            let (stmt, rest) = match code.find(';') {
                Some(i) => (&code[..i], &code[i + 1..]),
                None => return Err(err(format!("missing `;` after `{code}`"))),
            };
            reader.statement(stmt).map_err(err)?;
            code = rest.trim();
        }
    }
    for label in reader.pending_marks.drain(..) {
        reader.marks.push(StageMark {
            gate_index: reader.gates.len(),
            label,
        });
    }
    Ok(reader.circuit.with_gates(reader.gates, reader.marks)?)
}
