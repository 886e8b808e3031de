//! Lowering to backend gate sets, SWAP routing, and resource estimation.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{bfs_order, shortest_path, BackendModel};
use crate::circuit::{Circuit, CircuitError, Gate, GateKind, QubitRef, RegisterRole, StageMark};
use crate::decompose::{self, DecomposeError};
use crate::encoder::McxMode;
use crate::sim::gates::{self as mats, Mat2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TranspileError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error("circuit touches {needed} qubits, backend `{backend}` has {available}")]
    TooWide {
        backend: String,
        needed: usize,
        available: usize,
    },
    #[error("backend `{backend}` has no native route for gate `{gate}`")]
    Unreachable { backend: String, gate: String },
    #[error("routing needs gates on at most two qubits, found `{0}`")]
    NotRoutable(String),
    #[error("coupling map cannot connect physical qubits {0} and {1}")]
    Disconnected(usize, usize),
}

type Result<T> = std::result::Result<T, TranspileError>;

const EPS: f64 = 1e-12;

fn is_native(gate: &Gate, backend: &BackendModel) -> bool {
    if matches!(gate.kind, GateKind::Measure { .. }) {
        return true;
    }
    if gate.controls.iter().any(|c| !c.is_positive()) {
        return false;
    }
    backend.is_native(gate.kind.name())
}

/// Standard 6-CNOT Toffoli network (9 single-qubit gates).
pub fn toffoli_network(a: QubitRef, b: QubitRef, t: QubitRef) -> Vec<Gate> {
    let tg = |q| Gate::phase(FRAC_PI_4, q);
    let tdg = |q| Gate::phase(-FRAC_PI_4, q);
    vec![
        Gate::h(t),
        Gate::cnot(b, t),
        tdg(t),
        Gate::cnot(a, t),
        tg(t),
        Gate::cnot(b, t),
        tdg(t),
        Gate::cnot(a, t),
        tg(b),
        tg(t),
        Gate::h(t),
        Gate::cnot(a, b),
        tg(a),
        tdg(b),
        Gate::cnot(a, b),
    ]
}

/// CNOT from one Ising coupling and four axis rotations.
pub fn ion_cnot(c: QubitRef, t: QubitRef) -> Vec<Gate> {
    vec![
        Gate::native("ry", vec![FRAC_PI_2], vec![c]),
        Gate::native("rxx", vec![FRAC_PI_2], vec![c, t]),
        Gate::native("rx", vec![-FRAC_PI_2], vec![c]),
        Gate::native("rx", vec![-FRAC_PI_2], vec![t]),
        Gate::native("ry", vec![-FRAC_PI_2], vec![c]),
    ]
}

/// Native single-qubit gates equal to `m` up to global phase: one `u1`,
/// `u2` or `u3` on IBM-style sets, or an `rx ry rx` triple on ion sets.
pub fn synthesize_single(m: &Mat2, q: QubitRef, backend: &BackendModel) -> Result<Vec<Gate>> {
    let (theta, phi, lambda) = mats::zyz_angles(m);
    if backend.is_native("u3") || backend.is_native("u2") || backend.is_native("u1") {
        if theta.abs() < EPS && backend.is_native("u1") {
            return Ok(vec![Gate::native("u1", vec![mats::normalize_angle(phi + lambda)], vec![q])]);
        }
        if (theta - FRAC_PI_2).abs() < EPS && backend.is_native("u2") {
            return Ok(vec![Gate::native("u2", vec![phi, lambda], vec![q])]);
        }
        if backend.is_native("u3") {
            return Ok(vec![Gate::native("u3", vec![theta, phi, lambda], vec![q])]);
        }
    }
    if backend.is_native("rx") && backend.is_native("ry") {
        // H m H = Rz(a) Ry(b) Rz(c) gives m = Rx(a) Ry(-b) Rx(c)
        let h = mats::hadamard();
        let conj = mats::mul(&mats::mul(&h, m), &h);
        let (t, p, l) = mats::zyz_angles(&conj);
        let mut out = Vec::new();
        for (name, angle) in [("rx", l), ("ry", -t), ("rx", p)] {
            if angle.abs() > EPS {
                out.push(Gate::native(name, vec![angle], vec![q]));
            }
        }
        return Ok(out);
    }
    Err(TranspileError::Unreachable {
        backend: backend.name.clone(),
        gate: "single-qubit unitary".into(),
    })
}

/// Rewrites one elementary gate into natives of `backend`.
pub fn lower_gate(gate: &Gate, backend: &BackendModel) -> Result<Vec<Gate>> {
    if is_native(gate, backend) {
        return Ok(vec![gate.clone()]);
    }
    let unreachable = || TranspileError::Unreachable {
        backend: backend.name.clone(),
        gate: gate.kind.name().to_string(),
    };
    let expand: Vec<Gate> = match &gate.kind {
        GateKind::Ccnot if gate.controls.iter().all(|c| c.is_positive()) => {
            toffoli_network(gate.controls[0].qubit, gate.controls[1].qubit, gate.targets[0])
        }
        GateKind::Swap if gate.controls.is_empty() => {
            let (a, b) = (gate.targets[0], gate.targets[1]);
            vec![Gate::cnot(a, b), Gate::cnot(b, a), Gate::cnot(a, b)]
        }
        GateKind::ControlledPhase(theta) => {
            let (c, t) = (gate.controls[0].qubit, gate.targets[0]);
            vec![
                Gate::phase(theta / 2.0, c),
                Gate::cnot(c, t),
                Gate::phase(-theta / 2.0, t),
                Gate::cnot(c, t),
                Gate::phase(theta / 2.0, t),
            ]
        }
        GateKind::RootX(e) if gate.controls.len() == 1 && gate.controls[0].is_positive() => {
            let (c, t) = (gate.controls[0].qubit, gate.targets[0]);
            vec![Gate::h(t), Gate::cphase(PI * e.value(), c, t), Gate::h(t)]
        }
        GateKind::Cnot if gate.controls[0].is_positive() && backend.is_native("rxx") => {
            ion_cnot(gate.controls[0].qubit, gate.targets[0])
        }
        kind if gate.controls.is_empty() && gate.targets.len() == 1 => {
            let m = mats::target_matrix(kind).ok_or_else(unreachable)?;
            return synthesize_single(&m, gate.targets[0], backend);
        }
        _ => return Err(unreachable()),
    };
    let mut out = Vec::new();
    for g in &expand {
        out.extend(lower_gate(g, backend)?);
    }
    Ok(out)
}

/// Decomposes MCX gates per `mode`, then rewrites every gate into the
/// backend's native set. Semantics are preserved up to global phase.
pub fn lower_to_native(circuit: &Circuit, backend: &BackendModel, mode: McxMode) -> Result<Circuit> {
    let width = circuit.width();
    if width > backend.qubit_count {
        return Err(TranspileError::TooWide {
            backend: backend.name.clone(),
            needed: width,
            available: backend.qubit_count,
        });
    }
    let elementary = decompose::decompose_circuit(circuit, mode)?;
    elementary.rewrite(|g| lower_gate(g, backend))
}

/// A routed circuit together with where each logical wire ended up.
#[derive(Clone, Debug, PartialEq)]
pub struct Routed {
    pub circuit: Circuit,
    /// Physical qubit of each logical wire after the last gate; `None` for
    /// wires never touched. Absent when no routing was needed.
    pub final_layout: Option<Vec<Option<usize>>>,
    pub initial_layout: Option<Vec<Option<usize>>>,
    pub swaps_inserted: usize,
}

/// Places the circuit on the coupling map and inserts SWAPs so that every
/// two-qubit gate acts on a coupled pair.
///
/// Touched logical wires are placed, in wire order, on physical qubits in
/// breadth-first order from qubit 0. A gate on distant qubits moves its first
/// operand along a shortest path until adjacent. The output has one
/// register `phys` covering the whole device.
pub fn route(circuit: &Circuit, backend: &BackendModel) -> Result<Routed> {
    if backend.is_all_to_all() {
        return Ok(Routed {
            circuit: circuit.clone(),
            final_layout: None,
            initial_layout: None,
            swaps_inserted: 0,
        });
    }
    let touched = circuit.touched_wires();
    let needed = touched.iter().filter(|&&t| t).count();
    if needed > backend.qubit_count {
        return Err(TranspileError::TooWide {
            backend: backend.name.clone(),
            needed,
            available: backend.qubit_count,
        });
    }
    let adj = backend.adjacency();
    let order = bfs_order(&adj, 0);
    let mut phys_of: Vec<Option<usize>> = vec![None; circuit.num_qubits()];
    let mut log_of: Vec<Option<usize>> = vec![None; backend.qubit_count];
    for (slot, w) in (0..circuit.num_qubits()).filter(|&w| touched[w]).enumerate() {
        phys_of[w] = Some(order[slot]);
        log_of[order[slot]] = Some(w);
    }
    let initial_layout = phys_of.clone();

    let mut out = Circuit::new();
    let reg = out.add_register("phys", backend.qubit_count, RegisterRole::Other)?;
    out.add_classical_bits(circuit.classical_bits());
    let p = |i: usize| QubitRef { register: reg, offset: i };
    let mut gates = Vec::with_capacity(circuit.len());
    let mut start_of = Vec::with_capacity(circuit.len() + 1);
    let mut swaps = 0;
    let swap_gates = |a: usize, b: usize| -> Vec<Gate> {
        if backend.is_native("swap") {
            vec![Gate::swap(p(a), p(b))]
        } else {
            vec![Gate::cnot(p(a), p(b)), Gate::cnot(p(b), p(a)), Gate::cnot(p(a), p(b))]
        }
    };
    for g in circuit.gates() {
        start_of.push(gates.len());
        let wires: Vec<usize> = g.qubits().map(|q| circuit.wire(q)).collect();
        if wires.len() > 2 {
            return Err(TranspileError::NotRoutable(g.kind.name().to_string()));
        }
        if wires.len() == 2 {
            let (a, b) = (phys_of[wires[0]].unwrap(), phys_of[wires[1]].unwrap());
            if !backend.coupled(a, b) {
                let path = shortest_path(&adj, a, b).ok_or(TranspileError::Disconnected(a, b))?;
                for k in 0..path.len() - 2 {
                    let (u, v) = (path[k], path[k + 1]);
                    gates.extend(swap_gates(u, v));
                    swaps += 1;
                    log_of.swap(u, v);
                    for x in [u, v] {
                        if let Some(w) = log_of[x] {
                            phys_of[w] = Some(x);
                        }
                    }
                }
            }
        }
        let map = |q: QubitRef| p(phys_of[circuit.wire(q)].expect("touched wire is placed"));
        let mut ng = g.clone();
        ng.targets = g.targets.iter().map(|&q| map(q)).collect();
        for c in &mut ng.controls {
            c.qubit = map(c.qubit);
        }
        gates.push(ng);
    }
    start_of.push(gates.len());
    let marks = circuit
        .stage_marks()
        .iter()
        .map(|m| StageMark {
            gate_index: start_of[m.gate_index],
            label: m.label.clone(),
        })
        .collect();
    Ok(Routed {
        circuit: out.with_gates(gates, marks)?,
        final_layout: Some(phys_of),
        initial_layout: Some(initial_layout),
        swaps_inserted: swaps,
    })
}

/// Lowering followed by routing.
pub fn transpile(circuit: &Circuit, backend: &BackendModel, mode: McxMode) -> Result<Routed> {
    let lowered = lower_to_native(circuit, backend, mode)?;
    route(&lowered, backend)
}

/// `(2n + 2d + 1, 3n + 2d - 1)`: qubits with a single ancilla removed, and
/// with the full `n - 2` chain ancillas.
pub fn width_bounds(n: usize, d: usize) -> (usize, usize) {
    (2 * n + 2 * d + 1, (3 * n + 2 * d).saturating_sub(1))
}

/// `depth × gate time`, in seconds.
pub fn runtime_seconds(depth: usize, gate_time_ns: f64) -> f64 {
    depth as f64 * gate_time_ns * 1e-9
}

/// Rounds to a fixed number of decimal places.
pub fn round_decimals(x: f64, places: i32) -> f64 {
    let f = 10f64.powi(places);
    (x * f).round() / f
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub backend_name: String,
    pub mcx_mode: McxMode,
    pub width: usize,
    pub depth_per_stage: BTreeMap<String, usize>,
    pub total_depth: usize,
    pub gate_counts: BTreeMap<String, usize>,
    pub gate_total: usize,
    pub estimated_runtime_seconds: Option<f64>,
    pub swaps_inserted: usize,
    pub final_layout: Option<Vec<Option<usize>>>,
}

pub const CSV_HEADER: &str = "dataset,mcx_mode,backend,width,neqr_depth,qdp_depth,qft_depth,total_depth,runtime_s";

impl ResourceReport {
    /// Fills a report from an already transpiled circuit.
    pub fn from_circuit(circuit: &Circuit, backend: &BackendModel, mode: McxMode) -> Self {
        let total_depth = circuit.depth();
        Self {
            backend_name: backend.name.clone(),
            mcx_mode: mode,
            width: circuit.width(),
            depth_per_stage: circuit.stage_depths(),
            total_depth,
            gate_counts: circuit.gate_counts(),
            gate_total: circuit.len(),
            estimated_runtime_seconds: backend.gate_time_ns.map(|t| runtime_seconds(total_depth, t)),
            swaps_inserted: 0,
            final_layout: None,
        }
    }

    pub fn stage_depth(&self, label: &str) -> usize {
        self.depth_per_stage.get(label).copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn csv_row(&self, dataset: &str) -> String {
        let runtime = self
            .estimated_runtime_seconds
            .map_or_else(String::new, |r| format!("{:.4}", round_decimals(r, 4)));
        format!(
            "{},{},{},{},{},{},{},{},{}",
            dataset.replace(',', ";"),
            self.mcx_mode.as_str(),
            self.backend_name,
            self.width,
            self.stage_depth(crate::circuit::stage::NEQR),
            self.stage_depth(crate::circuit::stage::DOTPLOT),
            self.stage_depth(crate::circuit::stage::QFT),
            self.total_depth,
            runtime
        )
    }
}

/// Transpiles `circuit` for `backend` and reports its resources.
pub fn estimate(circuit: &Circuit, backend: &BackendModel, mode: McxMode) -> Result<(ResourceReport, Routed)> {
    let routed = transpile(circuit, backend, mode)?;
    let mut report = ResourceReport::from_circuit(&routed.circuit, backend, mode);
    report.swaps_inserted = routed.swaps_inserted;
    report.final_layout = routed.final_layout.clone();
    Ok((report, routed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Control;
    use crate::sim::statevector::{circuit_unitary_columns, equal_up_to_phase};

    fn line(n: usize) -> (Circuit, Vec<QubitRef>) {
        let mut c = Circuit::new();
        let r = c.add_register("q", n, RegisterRole::Other).unwrap();
        let qs = c.register(r).qubits();
        (c, qs)
    }

    fn same_unitary(a: &Circuit, b: &Circuit) -> bool {
        equal_up_to_phase(
            &circuit_unitary_columns(a).unwrap(),
            &circuit_unitary_columns(b).unwrap(),
            1e-10,
        )
    }

    #[test]
    fn toffoli_network_is_exact() {
        let (mut c, q) = line(3);
        c.push(Gate::ccnot(q[0], q[1], q[2])).unwrap();
        let sc = BackendModel::preset("superconducting-53").unwrap();
        let lowered = lower_to_native(&c, &sc, McxMode::CcnotChain).unwrap();
        let counts = lowered.gate_counts();
        assert_eq!(counts["cx"], 6);
        assert_eq!(lowered.len() - 6, 9);
        assert!(same_unitary(&c, &lowered));
    }

    #[test]
    fn ion_cnot_is_exact() {
        let (mut c, q) = line(2);
        c.push(Gate::cnot(q[0], q[1])).unwrap();
        let ion = BackendModel::preset("ion-40").unwrap();
        let lowered = lower_to_native(&c, &ion, McxMode::CcnotChain).unwrap();
        assert_eq!(lowered.gate_counts()["rxx"], 1);
        assert!(same_unitary(&c, &lowered));
    }

    #[test]
    fn native_superset_is_untouched() {
        let (mut c, q) = line(3);
        c.push(Gate::h(q[0])).unwrap();
        c.push(Gate::ccnot(q[0], q[1], q[2])).unwrap();
        c.push(Gate::cphase(0.25, q[1], q[2])).unwrap();
        let all = BackendModel::preset("allsim").unwrap();
        assert_eq!(lower_to_native(&c, &all, McxMode::CcnotChain).unwrap(), c);
    }

    #[test]
    fn lowering_preserves_mixed_circuit() {
        let (mut c, q) = line(4);
        c.push(Gate::h(q[0])).unwrap();
        c.push(Gate::mcx(vec![Control::neg(q[0]), Control::pos(q[1])], q[2])).unwrap();
        c.push(Gate::cphase(-0.7, q[2], q[3])).unwrap();
        c.push(Gate::swap(q[0], q[3])).unwrap();
        c.push(Gate::root_x(crate::circuit::RootExponent::new(true, 3).unwrap(), vec![Control::pos(q[1])], q[0]))
            .unwrap();
        for name in ["allsim", "superconducting-53", "ion-40"] {
            let b = BackendModel::preset(name).unwrap();
            let lowered = lower_to_native(&c, &b, McxMode::SingleAncilla).unwrap();
            assert!(lowered.gates().iter().all(|g| is_native(g, &b)), "{name}");
            assert!(same_unitary(&c, &lowered), "{name}");
        }
    }

    #[test]
    fn routing_on_a_line() {
        let text = r#"{"name":"line3","qubit_count":3,"native_gates":["cx","u3","measure"],"coupling_map":[[0,1],[1,2]],"gate_time_ns":10.0}"#;
        let b = BackendModel::from_json(text).unwrap();
        let (mut c, q) = line(3);
        c.push(Gate::native("u3", vec![0.1, 0.2, 0.3], vec![q[1]])).unwrap();
        c.push(Gate::cnot(q[0], q[2])).unwrap();
        let r = route(&c, &b).unwrap();
        assert_eq!(r.swaps_inserted, 1);
        assert_eq!(r.circuit.len(), 5);
        for g in r.circuit.gates().iter().filter(|g| g.arity() == 2) {
            let w: Vec<usize> = g.qubits().map(|x| r.circuit.wire(x)).collect();
            assert!(b.coupled(w[0], w[1]));
        }
        assert_eq!(r.final_layout.unwrap(), vec![Some(1), Some(0), Some(2)]);
        assert!(r.circuit.depth() >= c.depth());
    }

    #[test]
    fn bounds_and_runtime() {
        assert_eq!(width_bounds(8, 2), (21, 27));
        assert_eq!(width_bounds(10, 2), (25, 33));
        assert_eq!(width_bounds(12, 2), (29, 39));
        assert_eq!(round_decimals(runtime_seconds(127_315, 130.0), 4), 0.0166);
        assert_eq!(round_decimals(runtime_seconds(105_143, 20_000.0), 4), 2.1029);
        assert_eq!(runtime_seconds(0, 130.0), 0.0);
    }

    #[test]
    fn csv_row_shape() {
        let (mut c, q) = line(2);
        c.append_stage("neqr", vec![Gate::cnot(q[0], q[1])]).unwrap();
        let b = BackendModel::preset("ion-40").unwrap();
        let (r, _) = estimate(&c, &b, McxMode::CcnotChain).unwrap();
        let row = r.csv_row("demo");
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
        assert!(row.starts_with("demo,chain,ion-40,2,"));
        assert!(r.total_depth <= r.depth_per_stage.values().sum());
        assert_eq!(r.gate_counts.values().sum::<usize>(), r.gate_total);
    }
}
