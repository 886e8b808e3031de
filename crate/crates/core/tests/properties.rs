//! Randomized invariants across the library.

use num_complex::Complex64;
use proptest::prelude::*;
use qdp_core::backend::BackendModel;
use qdp_core::decompose;
use qdp_core::encoder::{self, McxMode, QdpOptions};
use qdp_core::logic::{self, Cube, PlaTable};
use qdp_core::qasm;
use qdp_core::sequence::{self, SymbolSequence};
use qdp_core::sim::statevector::{self, SparseState, Statevector};
use qdp_core::sim::toffoli::{self, ToffoliState};
use qdp_core::transpile;
use qdp_core::validate;
use qdp_core::{Circuit, Control, Gate, QubitRef, RegisterRole};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn table_strategy() -> impl Strategy<Value = PlaTable> {
    (1usize..=5, 1usize..=3).prop_flat_map(|(n, d)| {
        prop::collection::vec(0u64..(1 << d), 1 << n).prop_map(move |outs| {
            let cubes = outs
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(|(i, &v)| Cube::minterm(n, i as u64, v))
                .collect();
            PlaTable::new(n, d, cubes).unwrap()
        })
    })
}

fn codes(max_len: usize) -> impl Strategy<Value = SymbolSequence> {
    prop::collection::vec(0u32..4, 1..=max_len).prop_map(|c| SymbolSequence::from_codes(c, 2).unwrap())
}

/// Wires 0..6 live in one register `w`; the last three form the ancilla pool.
fn scratch_circuit() -> (Circuit, Vec<QubitRef>, Vec<QubitRef>) {
    let mut c = Circuit::new();
    let w = c.add_register("w", 6, RegisterRole::Other).unwrap();
    let a = c.add_register("anc", 3, RegisterRole::Ancilla).unwrap();
    let (w, a) = (c.register(w).qubits(), c.register(a).qubits());
    (c, w, a)
}

#[derive(Clone, Debug)]
enum Op {
    H(usize),
    X(usize),
    Cx(usize, usize),
    Ccx(usize, usize, usize),
    Swap(usize, usize),
    Phase(f64, usize),
    Cphase(f64, usize, usize),
    /// Controls as (wire, positive) and a target.
    Mcx(Vec<(usize, bool)>, usize),
}

fn distinct(k: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..6).collect::<Vec<usize>>()).prop_shuffle().prop_map(move |v| v[..k].to_vec())
}

fn op_strategy(classical: bool) -> BoxedStrategy<Op> {
    let angle = -6.3f64..6.3;
    let mcx = (1usize..=5)
        .prop_flat_map(|k| (distinct(k + 1), prop::collection::vec(any::<bool>(), k)))
        .prop_map(|(w, pol)| Op::Mcx(w[1..].iter().copied().zip(pol).collect(), w[0]));
    let mut options = vec![
        (0usize..6).prop_map(Op::X).boxed(),
        distinct(2).prop_map(|w| Op::Cx(w[0], w[1])).boxed(),
        distinct(3).prop_map(|w| Op::Ccx(w[0], w[1], w[2])).boxed(),
        distinct(2).prop_map(|w| Op::Swap(w[0], w[1])).boxed(),
        mcx.boxed(),
    ];
    if !classical {
        options.push((0usize..6).prop_map(Op::H).boxed());
        options.push((angle.clone(), 0usize..6).prop_map(|(a, q)| Op::Phase(a, q)).boxed());
        options.push((angle, distinct(2)).prop_map(|(a, w)| Op::Cphase(a, w[0], w[1])).boxed());
    }
    prop::strategy::Union::new(options).boxed()
}

fn to_gate(op: &Op, w: &[QubitRef]) -> Gate {
    match *op {
        Op::H(q) => Gate::h(w[q]),
        Op::X(q) => Gate::x(w[q]),
        Op::Cx(a, b) => Gate::cnot(w[a], w[b]),
        Op::Ccx(a, b, t) => Gate::ccnot(w[a], w[b], w[t]),
        Op::Swap(a, b) => Gate::swap(w[a], w[b]),
        Op::Phase(t, q) => Gate::phase(t, w[q]),
        Op::Cphase(t, a, b) => Gate::cphase(t, w[a], w[b]),
        Op::Mcx(ref ctl, t) => Gate::mcx(
            ctl.iter()
                .map(|&(q, pos)| if pos { Control::pos(w[q]) } else { Control::neg(w[q]) })
                .collect(),
            w[t],
        ),
    }
}

fn build(ops: &[Op]) -> Circuit {
    let (mut c, w, _) = scratch_circuit();
    c.append_stage("body", ops.iter().map(|o| to_gate(o, &w))).unwrap();
    c
}

fn dense_from(c: &Circuit, index: u64) -> Statevector {
    let mut s = Statevector::basis(c.num_qubits(), index, 16).unwrap();
    statevector::run_on(&mut s, c, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d1merge_preserves_the_function(table in table_strategy()) {
        let min = logic::d1merge_minimize(&table);
        prop_assert!(logic::functional_equal(&table, &min).unwrap());
        prop_assert!(min.len() <= table.len());
        prop_assert!(min.is_disjoint());
        let again = logic::d1merge_minimize(&min);
        prop_assert_eq!(again.canonical(), min.canonical());
    }

    #[test]
    fn minimized_gates_never_outnumber_brute_force(table in table_strategy()) {
        let brute = logic::brute_force_mcx(&table).unwrap();
        let min = logic::cubes_to_mcx(&logic::d1merge_minimize(&table));
        prop_assert!(min.len() <= brute.len());
        prop_assert!(logic::chain_ccnot_count(&min) <= logic::chain_ccnot_count(&brute));
    }

    #[test]
    fn pla_text_round_trips(table in table_strategy()) {
        let parsed = PlaTable::parse_pla(&table.to_pla_string()).unwrap();
        prop_assert_eq!(parsed.canonical(), table.canonical());
    }

    #[test]
    fn mcx_decompositions_match_on_clean_ancillas(
        ops in prop::collection::vec(op_strategy(true), 1..4),
    ) {
        let original = build(&ops);
        let reference = statevector::circuit_unitary_columns(&original).unwrap();
        for mode in [McxMode::CcnotChain, McxMode::SingleAncilla] {
            let lowered = decompose::decompose_circuit(&original, mode).unwrap();
            prop_assert!(lowered.gates().iter().all(decompose::is_elementary));
            let got = statevector::circuit_unitary_columns(&lowered).unwrap();
            // ancilla wires are 6..9; only inputs with them clear are promised
            for j in 0..64 {
                for (k, (a, b)) in reference[j].iter().zip(&got[j]).enumerate() {
                    prop_assert!((a - b).norm() < 1e-9, "{}: column {} row {}", mode.as_str(), j, k);
                }
            }
        }
    }

    #[test]
    fn engines_agree_on_classical_circuits(
        ops in prop::collection::vec(op_strategy(true), 1..24),
        input in 0u64..64,
    ) {
        let c = build(&ops);
        let mut t = ToffoliState::zero(&c);
        for w in 0..6 {
            t.set(&c, c.qubit_at(w), input >> w & 1 == 1);
        }
        let t = toffoli::toffoli_run(&c, t).unwrap();
        let expected: u64 = (0..c.num_qubits()).map(|w| (t.get(&c, c.qubit_at(w)) as u64) << w).sum();

        let mut sparse = SparseState::basis(c.num_qubits(), input);
        statevector::run_on(&mut sparse, &c, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        prop_assert_eq!(sparse.as_basis(1e-12), Some(expected));

        let dense = dense_from(&c, input);
        prop_assert!((dense.amplitudes()[expected as usize].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sparse_and_dense_agree_on_interference(
        ops in prop::collection::vec(op_strategy(false), 1..32),
        input in 0u64..64,
    ) {
        let c = build(&ops);
        let dense = dense_from(&c, input);
        let mut sparse = SparseState::basis(c.num_qubits(), input);
        statevector::run_on(&mut sparse, &c, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        for (i, a) in dense.amplitudes().iter().enumerate() {
            prop_assert!((a - sparse.amplitude(i as u64)).norm() < 1e-9);
        }
        approx::assert_relative_eq!(dense.norm_sqr(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn qasm_round_trip_keeps_the_operator(
        ops in prop::collection::vec(op_strategy(false), 0..24),
    ) {
        let lowered = decompose::decompose_circuit(&build(&ops), McxMode::CcnotChain).unwrap();
        let text = qasm::emit_qasm(&lowered).unwrap();
        let parsed = qasm::parse_qasm(&text).unwrap();
        prop_assert_eq!(parsed.num_qubits(), lowered.num_qubits());
        prop_assert_eq!(parsed.len(), lowered.len());
        prop_assert_eq!(qasm::emit_qasm(&parsed).unwrap(), text);
        let (a, b) = (
            statevector::circuit_unitary_columns(&lowered).unwrap(),
            statevector::circuit_unitary_columns(&parsed).unwrap(),
        );
        prop_assert!(statevector::equal_up_to_phase(&a, &b, 1e-9));
    }

    #[test]
    fn circuit_counts_are_consistent(ops in prop::collection::vec(op_strategy(false), 0..40)) {
        let c = build(&ops);
        prop_assert_eq!(c.gate_counts().values().sum::<usize>(), c.len());
        prop_assert!(c.depth() <= c.len());
        prop_assert!(c.width() <= c.num_qubits());
        prop_assert_eq!(c.stage_depths().values().sum::<usize>(), c.depth());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dot_plot_circuit_matches_classical_plot(
        r in codes(4),
        q in codes(4),
        minimize in any::<bool>(),
        single in any::<bool>(),
    ) {
        let (r, q) = sequence::pad_pair(&r, &q);
        let mode = if single { McxMode::SingleAncilla } else { McxMode::CcnotChain };
        let report = validate::validate_method1(&r, &q, QdpOptions { use_minimizer: minimize, mcx_mode: mode }).unwrap();
        prop_assert!(report.passed, "{:?}", report.counterexamples);
    }

    #[test]
    fn resource_reports_are_consistent(r in codes(8), q in codes(8), single in any::<bool>()) {
        let (r, q) = sequence::pad_pair(&r, &q);
        let mode = if single { McxMode::SingleAncilla } else { McxMode::CcnotChain };
        let qpr = encoder::build_qpr(&r, &q, QdpOptions { use_minimizer: true, mcx_mode: mode }).unwrap();
        for name in ["allsim", "superconducting-53"] {
            let backend = BackendModel::preset(name).unwrap();
            let (report, routed) = transpile::estimate(&qpr.circuit, &backend, mode).unwrap();
            prop_assert_eq!(report.gate_counts.values().sum::<usize>(), report.gate_total);
            prop_assert!(report.total_depth <= report.depth_per_stage.values().sum::<usize>());
            prop_assert!(report.width <= routed.circuit.num_qubits());
            prop_assert!(report.width <= backend.qubit_count);
            for g in routed.circuit.gates() {
                prop_assert!(backend.is_native(g.kind.name()) || g.kind.name() == "measure");
            }
        }
    }
}

#[test]
fn amplitude_helper_reads_missing_entries_as_zero() {
    let s = SparseState::basis(3, 5);
    assert_eq!(s.amplitude(5), Complex64::new(1.0, 0.0));
    assert_eq!(s.amplitude(4), Complex64::default());
}
