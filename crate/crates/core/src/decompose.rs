//! Multi-controlled X decomposition.
//!
//! Two strategies: a CCNOT ladder over `c - 2` clean ancillas, and a
//! Barenco-style network over controlled roots of X that borrows at most one
//! (possibly dirty) ancilla. Negative controls are removed first by X
//! sandwiches.

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Control, Gate, GateKind, QubitRef, RegisterRole, RootExponent, StageMark};
use crate::encoder::McxMode;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecomposeError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("gate with {controls} controls needs {needed} ancilla qubits, {available} available")]
    InsufficientAncillas {
        controls: usize,
        needed: usize,
        available: usize,
    },
    #[error("expected an X gate with at least one control, got `{0}`")]
    NotMcx(String),
    #[error("ancilla qubit is also an operand of the gate")]
    AncillaConflict,
}

fn ensure_mcx(gate: &Gate) -> Result<(), DecomposeError> {
    match gate.kind {
        GateKind::Cnot | GateKind::Ccnot | GateKind::Mcx if !gate.controls.is_empty() => Ok(()),
        _ => Err(DecomposeError::NotMcx(gate.kind.name().to_string())),
    }
}

/// X on every negative control, the all-positive gate, then the same X
/// gates again. Gates without negative controls come back unchanged.
pub fn rewrite_negative_controls(gate: &Gate) -> Vec<Gate> {
    let negs: Vec<QubitRef> = gate
        .controls
        .iter()
        .filter(|c| !c.is_positive())
        .map(|c| c.qubit)
        .collect();
    if negs.is_empty() {
        return vec![gate.clone()];
    }
    let controls = gate.controls.iter().map(|c| Control::pos(c.qubit)).collect();
    let positive = match gate.kind {
        GateKind::RootX(e) => Gate::root_x(e, controls, gate.targets[0]),
        _ => Gate::mcx_multi(controls, gate.targets.clone()),
    };
    let mut out: Vec<Gate> = negs.iter().map(|&q| Gate::x(q)).collect();
    out.push(positive);
    out.extend(negs.iter().map(|&q| Gate::x(q)));
    out
}

fn positive_controls(gate: &Gate) -> Result<Vec<QubitRef>, DecomposeError> {
    ensure_mcx(gate)?;
    if gate.controls.iter().any(|c| !c.is_positive()) {
        return Err(DecomposeError::NotMcx("mcx with negative controls".into()));
    }
    Ok(gate.controls.iter().map(|c| c.qubit).collect())
}

/// Ancilla-chain decomposition of an all-positive MCX.
///
/// `c <= 2` maps to CNOT/CCNOT. Otherwise controls are ANDed pairwise into
/// `ancillas[0..c-2]`, one CCNOT hits the target, and the ladder is
/// mirrored to return the ancillas to |0⟩: `2(c - 2) + 1` CCNOTs per
/// target.
pub fn decompose_mcx_chain(gate: &Gate, ancillas: &[QubitRef]) -> Result<Vec<Gate>, DecomposeError> {
    let ctl = positive_controls(gate)?;
    let c = ctl.len();
    if c <= 2 {
        return Ok(gate
            .targets
            .iter()
            .map(|&t| match c {
                1 => Gate::cnot(ctl[0], t),
                _ => Gate::ccnot(ctl[0], ctl[1], t),
            })
            .collect());
    }
    let needed = c - 2;
    if ancillas.len() < needed {
        return Err(DecomposeError::InsufficientAncillas {
            controls: c,
            needed,
            available: ancillas.len(),
        });
    }
    let anc = &ancillas[..needed];
    if anc.iter().any(|a| ctl.contains(a) || gate.targets.contains(a)) {
        return Err(DecomposeError::AncillaConflict);
    }
    let mut ladder = vec![Gate::ccnot(ctl[0], ctl[1], anc[0])];
    for i in 1..needed {
        ladder.push(Gate::ccnot(ctl[i + 1], anc[i - 1], anc[i]));
    }
    let mut out = ladder.clone();
    for &t in &gate.targets {
        out.push(Gate::ccnot(ctl[c - 1], anc[needed - 1], t));
    }
    out.extend(ladder.into_iter().rev());
    Ok(out)
}

/// `C^m(X^(1/2^k))` on `target` as a Gray-code walk over the nonempty
/// control subsets: each subset's parity is accumulated into its highest
/// control with CNOTs and drives a singly controlled `X^(±1/2^(k+m-1))`.
/// Every control is restored at the end.
fn gray_code_root(controls: &[QubitRef], target: QubitRef, log2_den: u8) -> Result<Vec<Gate>, DecomposeError> {
    let m = controls.len();
    let step = log2_den as usize + m - 1;
    let forward = RootExponent::new(false, step as u8)?;
    let mut out = Vec::new();
    let mut prev: usize = 0;
    for k in 1usize..(1 << m) {
        let g = k ^ (k >> 1);
        let lead = usize::BITS as usize - 1 - g.leading_zeros() as usize;
        if prev != 0 {
            let changed = (g ^ prev).trailing_zeros() as usize;
            if changed == lead {
                // new leading bit: previous code was the single bit below it
                out.push(Gate::cnot(controls[lead - 1], controls[lead]));
            } else {
                out.push(Gate::cnot(controls[changed], controls[lead]));
            }
        }
        let e = if g.count_ones() % 2 == 1 { forward } else { forward.inverse() };
        out.push(Gate::root_x(e, vec![Control::pos(controls[lead])], target));
        prev = g;
    }
    Ok(out)
}

fn single_ancilla_positive(
    ctl: &[QubitRef],
    target: QubitRef,
    ancilla: Option<QubitRef>,
) -> Result<Vec<Gate>, DecomposeError> {
    let c = ctl.len();
    match c {
        1 => Ok(vec![Gate::cnot(ctl[0], target)]),
        2 => Ok(vec![Gate::ccnot(ctl[0], ctl[1], target)]),
        3 => gray_code_root(ctl, target, 0),
        4 => {
            // C-√X, C3X, C-√X†, C3X, C3-√X with the last control as pivot
            let pivot = ctl[3];
            let half = RootExponent::new(false, 1)?;
            let c3x = gray_code_root(&ctl[..3], pivot, 0)?;
            let mut out = vec![Gate::root_x(half, vec![Control::pos(pivot)], target)];
            out.extend(c3x.iter().cloned());
            out.push(Gate::root_x(half.inverse(), vec![Control::pos(pivot)], target));
            out.extend(c3x);
            out.extend(gray_code_root(&ctl[..3], target, 1)?);
            Ok(out)
        }
        _ => {
            let a = ancilla.ok_or(DecomposeError::InsufficientAncillas {
                controls: c,
                needed: 1,
                available: 0,
            })?;
            let split = c.div_ceil(2);
            let (first, rest) = ctl.split_at(split);
            let mut second: Vec<QubitRef> = rest.to_vec();
            second.push(a);
            // each half borrows a wire it does not touch as its own dirty ancilla
            let block_a = single_ancilla_positive(first, a, Some(target))?;
            let block_b = single_ancilla_positive(&second, target, Some(first[0]))?;
            let mut out = Vec::with_capacity(2 * (block_a.len() + block_b.len()));
            out.extend(block_a.iter().cloned());
            out.extend(block_b.iter().cloned());
            out.extend(block_a);
            out.extend(block_b);
            Ok(out)
        }
    }
}

/// Single-ancilla decomposition of an all-positive MCX.
///
/// `c <= 2` maps to CNOT/CCNOT, `c = 3, 4` to controlled-root networks using
/// no ancilla, and `c >= 5` splits the controls in two halves around the
/// ancilla (compute, apply, uncompute, apply). The ancilla may start in any
/// basis state and is returned to it.
pub fn decompose_mcx_single_ancilla(gate: &Gate, ancilla: Option<QubitRef>) -> Result<Vec<Gate>, DecomposeError> {
    let ctl = positive_controls(gate)?;
    if let Some(a) = ancilla {
        if ctl.contains(&a) || gate.targets.contains(&a) {
            return Err(DecomposeError::AncillaConflict);
        }
    }
    let mut out = Vec::new();
    for &t in &gate.targets {
        out.extend(single_ancilla_positive(&ctl, t, ancilla)?);
    }
    Ok(out)
}

/// Gate kinds left after [`decompose_circuit`]: everything except MCX with
/// more than two or negative controls, and RootX with more than one control.
pub fn is_elementary(gate: &Gate) -> bool {
    match &gate.kind {
        GateKind::Mcx => false,
        GateKind::Cnot | GateKind::Ccnot => gate.controls.iter().all(|c| c.is_positive()),
        GateKind::RootX(_) => gate.controls.len() <= 1 && gate.controls.iter().all(|c| c.is_positive()),
        _ => true,
    }
}

/// Lowers every MCX (and negative-controlled CNOT/CCNOT) in `circuit`
/// according to `mode`, using the qubits of all ancilla-role registers, then
/// cancels adjacent X pairs.
pub fn decompose_circuit(circuit: &Circuit, mode: McxMode) -> Result<Circuit, DecomposeError> {
    let pool: Vec<QubitRef> = circuit
        .registers_with_role(RegisterRole::Ancilla)
        .flat_map(|r| r.qubits())
        .collect();
    let lowered = circuit.rewrite(|g| -> Result<Vec<Gate>, DecomposeError> {
        if is_elementary(g) {
            return Ok(vec![g.clone()]);
        }
        if let GateKind::RootX(_) = g.kind {
            return Err(DecomposeError::NotMcx("multi-controlled rootx".into()));
        }
        let mut out = Vec::new();
        for part in rewrite_negative_controls(g) {
            if part.kind == GateKind::X {
                out.push(part);
                continue;
            }
            let free: Vec<QubitRef> = pool
                .iter()
                .copied()
                .filter(|a| !part.qubits().any(|q| q == *a))
                .collect();
            match mode {
                McxMode::CcnotChain => out.extend(decompose_mcx_chain(&part, &free)?),
                McxMode::SingleAncilla => {
                    out.extend(decompose_mcx_single_ancilla(&part, free.first().copied())?)
                }
            }
        }
        Ok(out)
    })?;
    Ok(cancel_adjacent_x(&lowered))
}

/// Removes pairs of X gates on the same qubit with nothing touching that
/// qubit in between. Pairs never straddle a stage boundary.
pub fn cancel_adjacent_x(circuit: &Circuit) -> Circuit {
    let gates = circuit.gates();
    let mut stage_of = vec![0usize; gates.len()];
    for (s, (_, range)) in circuit.stage_ranges().into_iter().enumerate() {
        for i in range {
            stage_of[i] = s + 1;
        }
    }
    let mut keep = vec![true; gates.len()];
    // last live gate index per wire, if it is an X
    let mut pending: Vec<Option<usize>> = vec![None; circuit.num_qubits()];
    for (i, g) in gates.iter().enumerate() {
        if g.kind == GateKind::X && g.controls.is_empty() {
            let w = circuit.wire(g.targets[0]);
            match pending[w] {
                Some(j) if stage_of[j] == stage_of[i] => {
                    keep[i] = false;
                    keep[j] = false;
                    pending[w] = None;
                }
                _ => pending[w] = Some(i),
            }
        } else {
            for q in g.qubits() {
                pending[circuit.wire(q)] = None;
            }
        }
    }
    let mut new_index = Vec::with_capacity(gates.len() + 1);
    let mut kept = 0;
    for &k in &keep {
        new_index.push(kept);
        kept += usize::from(k);
    }
    new_index.push(kept);
    let marks = circuit
        .stage_marks()
        .iter()
        .map(|m| StageMark {
            gate_index: new_index[m.gate_index],
            label: m.label.clone(),
        })
        .collect();
    let new_gates = gates
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(g, _)| g.clone())
        .collect();
    circuit
        .with_gates(new_gates, marks)
        .expect("subset of a valid gate list is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::statevector::{circuit_unitary_columns, equal_up_to_phase};

    fn line(n: usize) -> (Circuit, Vec<QubitRef>) {
        let mut c = Circuit::new();
        let r = c.add_register("q", n, RegisterRole::Other).unwrap();
        let qs = c.register(r).qubits();
        (c, qs)
    }

    fn count(gates: &[Gate], kind: GateKind) -> usize {
        gates.iter().filter(|g| g.kind == kind).count()
    }

    #[test]
    fn chain_counts() {
        let (_, q) = line(12);
        for c in 3..=6 {
            let g = Gate::mcx(q[..c].iter().map(|&x| Control::pos(x)).collect(), q[c]);
            let out = decompose_mcx_chain(&g, &q[c + 1..]).unwrap();
            assert_eq!(out.len(), 2 * (c - 2) + 1);
            assert_eq!(count(&out, GateKind::Ccnot), out.len());
        }
        let g = Gate::mcx(q[..2].iter().map(|&x| Control::pos(x)).collect(), q[2]);
        assert_eq!(decompose_mcx_chain(&g, &[]).unwrap(), vec![Gate::ccnot(q[0], q[1], q[2])]);
        let g5 = Gate::mcx(q[..5].iter().map(|&x| Control::pos(x)).collect(), q[5]);
        assert!(matches!(
            decompose_mcx_chain(&g5, &q[6..8]),
            Err(DecomposeError::InsufficientAncillas { needed: 3, .. })
        ));
    }

    #[test]
    fn negative_sandwich() {
        let (_, q) = line(3);
        let g = Gate::mcx(vec![Control::neg(q[0]), Control::neg(q[1])], q[2]);
        let out = rewrite_negative_controls(&g);
        assert_eq!(out.len(), 5);
        assert_eq!(count(&out, GateKind::X), 4);
        assert_eq!(out[2], Gate::ccnot(q[0], q[1], q[2]));
        let pos = Gate::ccnot(q[0], q[1], q[2]);
        assert_eq!(rewrite_negative_controls(&pos), vec![pos]);
    }

    #[test]
    fn gray_code_three_controls_matches_mcx() {
        let (mut c, q) = line(4);
        let g = Gate::mcx(q[..3].iter().map(|&x| Control::pos(x)).collect(), q[3]);
        let net = decompose_mcx_single_ancilla(&g, None).unwrap();
        assert_eq!(net.len(), 13);
        let reference = {
            let mut r = c.clone();
            r.push(g).unwrap();
            circuit_unitary_columns(&r).unwrap()
        };
        for gate in net {
            c.push(gate).unwrap();
        }
        let got = circuit_unitary_columns(&c).unwrap();
        assert!(equal_up_to_phase(&reference, &got, 1e-10));
    }

    #[test]
    fn single_ancilla_matches_mcx_with_dirty_ancilla() {
        for c in 1..=6 {
            let (mut base, q) = line(c + 2);
            let g = Gate::mcx(q[..c].iter().map(|&x| Control::pos(x)).collect(), q[c]);
            let mut reference = base.clone();
            reference.push(g.clone()).unwrap();
            for gate in decompose_mcx_single_ancilla(&g, Some(q[c + 1])).unwrap() {
                base.push(gate).unwrap();
            }
            let want = circuit_unitary_columns(&reference).unwrap();
            let got = circuit_unitary_columns(&base).unwrap();
            assert!(equal_up_to_phase(&want, &got, 1e-10), "c = {c}");
        }
    }

    #[test]
    fn x_pairs_cancel_within_stage() {
        let (mut c, q) = line(2);
        c.append_stage("a", vec![Gate::x(q[0]), Gate::x(q[1]), Gate::x(q[0])]).unwrap();
        c.append_stage("b", vec![Gate::x(q[1])]).unwrap();
        let out = cancel_adjacent_x(&c);
        assert_eq!(out.len(), 2);
        assert_eq!(out.stage_ranges().len(), 2);
        let (mut c2, q2) = line(2);
        c2.push(Gate::x(q2[0])).unwrap();
        c2.push(Gate::cnot(q2[0], q2[1])).unwrap();
        c2.push(Gate::x(q2[0])).unwrap();
        assert_eq!(cancel_adjacent_x(&c2).len(), 3);
    }

    #[test]
    fn decompose_circuit_leaves_only_elementary_gates() {
        let (mut c, q) = line(8);
        let a = c.add_register("anc", 3, RegisterRole::Ancilla).unwrap();
        let a0 = c.register(a).qubit(0);
        c.push(Gate::mcx(
            vec![Control::neg(q[0]), Control::pos(q[1]), Control::pos(q[2]), Control::neg(q[3]), Control::pos(q[4])],
            q[5],
        ))
        .unwrap();
        for mode in [McxMode::CcnotChain, McxMode::SingleAncilla] {
            let out = decompose_circuit(&c, mode).unwrap();
            assert!(out.gates().iter().all(is_elementary), "{mode:?}");
            if mode == McxMode::SingleAncilla {
                assert!(out.gates().iter().any(|g| g.qubits().any(|x| x == a0)));
            }
        }
    }
}
