//! Same workloads on the rayon pool and inside `parallel::sequential`.
//! Without the `parallel` feature both arms run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qdp_core::encoder::{self, McxMode, QdpOptions};
use qdp_core::logic::{self, Cube, PlaTable};
use qdp_core::parallel;
use qdp_core::sequence::SymbolSequence;
use qdp_core::sim::statevector;
use qdp_core::validate;
use qdp_core::{Circuit, RegisterRole};

fn seq(len: usize, salt: u32) -> SymbolSequence {
    let codes = (0..len as u32).map(|i| (i.wrapping_mul(2654435761).wrapping_add(salt) >> 7) % 4).collect();
    SymbolSequence::from_codes(codes, 2).unwrap()
}

fn qft_circuit(n: usize) -> Circuit {
    let mut c = Circuit::new();
    let reg = c.add_register("k", n, RegisterRole::IndexX).unwrap();
    let qs = c.register(reg).qubits();
    c.append_stage("prep", qs.iter().map(|&q| qdp_core::Gate::h(q))).unwrap();
    encoder::inverse_qft(&mut c, &qs).unwrap();
    c
}

fn wide_table(n: usize) -> PlaTable {
    let cubes = (0..1u64 << n)
        .filter(|i| i.count_ones() % 3 == 0)
        .map(|i| Cube::minterm(n, i, 1 + i % 3))
        .collect();
    PlaTable::new(n, 2, cubes).unwrap()
}

fn arms<F: Fn() + Send + Sync>(c: &mut Criterion, group: &str, param: usize, work: F) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    g.bench_with_input(BenchmarkId::new("parallel", param), &param, |b, _| b.iter(&work));
    g.bench_with_input(BenchmarkId::new("sequential", param), &param, |b, _| {
        b.iter(|| parallel::sequential(&work))
    });
    g.finish();
}

fn benches(c: &mut Criterion) {
    let (r, q) = (seq(16, 1), seq(16, 7));
    arms(c, "method1_validation", 16, || {
        let opts = QdpOptions { use_minimizer: true, mcx_mode: McxMode::CcnotChain };
        black_box(validate::validate_method1(&r, &q, opts).unwrap());
    });

    let qft = qft_circuit(18);
    arms(c, "dense_inverse_qft", 18, || {
        black_box(statevector::statevector_run(&qft, 0, 18).unwrap());
    });

    let table = wide_table(14);
    let min = logic::d1merge_minimize(&table);
    arms(c, "cover_equivalence", 14, || {
        black_box(logic::functional_equal(&table, &min).unwrap());
    });
}

criterion_group!(group, benches);
criterion_main!(group);
