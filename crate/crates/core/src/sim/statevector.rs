//! Dense and sparse statevector engines with mid-circuit measurement.
//!
//! Amplitude index bit `k` is global wire `k` of the circuit, so register
//! offset 0 is the least significant bit of its slice.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gates::{self, Mat2};
use super::SimError;
use crate::circuit::{Circuit, Gate, GateKind};
use crate::parallel;

/// Default qubit cap of the dense engine (2^24 amplitudes, 256 MiB).
pub const DEFAULT_QUBIT_CAP: usize = 24;

const PRUNE: f64 = 1e-14;

/// Operations a state representation must support to run a circuit.
pub trait QuantumState {
    fn num_qubits(&self) -> usize;
    /// Applies `m` to wire `target` on every basis state with
    /// `index & cmask == cval`.
    fn apply_matrix(&mut self, target: usize, cmask: u64, cval: u64, m: &Mat2);
    /// Multiplies every amplitude whose index has all `mask` bits set by
    /// `factor`.
    fn apply_mask_phase(&mut self, mask: u64, factor: Complex64);
    /// Probability that wire `q` reads 1.
    fn prob_one(&self, q: usize) -> f64;
    /// Projects wire `q` onto `outcome` and renormalizes.
    fn collapse(&mut self, q: usize, outcome: bool);
}

/// Dense state over `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    pub fn zero(n: usize, cap: usize) -> Result<Self, SimError> {
        Self::basis(n, 0, cap)
    }

    pub fn basis(n: usize, index: u64, cap: usize) -> Result<Self, SimError> {
        if n > cap || n >= 63 {
            return Err(SimError::QubitCap { needed: n, cap });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        parallel::sum_by(&self.amps, |_, a| a.norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

impl QuantumState for Statevector {
    fn num_qubits(&self) -> usize {
        self.n
    }

    fn apply_matrix(&mut self, target: usize, cmask: u64, cval: u64, m: &Mat2) {
        let m = *m;
        let diagonal = m[0][1] == Complex64::new(0.0, 0.0) && m[1][0] == Complex64::new(0.0, 0.0);
        parallel::for_each_pair_mut(&mut self.amps, 1 << target, move |i, a, b| {
            if i as u64 & cmask != cval {
                return;
            }
            if diagonal {
                *a *= m[0][0];
                *b *= m[1][1];
            } else {
                let (x, y) = (*a, *b);
                *a = m[0][0] * x + m[0][1] * y;
                *b = m[1][0] * x + m[1][1] * y;
            }
        });
    }

    fn apply_mask_phase(&mut self, mask: u64, factor: Complex64) {
        parallel::for_each_indexed_mut(&mut self.amps, move |i, a| {
            if i as u64 & mask == mask {
                *a *= factor;
            }
        });
    }

    fn prob_one(&self, q: usize) -> f64 {
        parallel::sum_by(&self.amps, |i, a| if i >> q & 1 == 1 { a.norm_sqr() } else { 0.0 })
    }

    fn collapse(&mut self, q: usize, outcome: bool) {
        let p = if outcome { self.prob_one(q) } else { 1.0 - self.prob_one(q) };
        let scale = if p > 0.0 { 1.0 / p.sqrt() } else { 0.0 };
        let want = usize::from(outcome);
        parallel::for_each_indexed_mut(&mut self.amps, move |i, a| {
            if i >> q & 1 == want {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        });
    }
}

/// Sparse state: only nonzero amplitudes are stored, sorted by basis index.
/// Suited to circuits that start from a basis state and create little
/// superposition.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState {
    n: usize,
    amps: Vec<(u64, Complex64)>,
}

impl SparseState {
    pub fn basis(n: usize, index: u64) -> Self {
        Self {
            n,
            amps: vec![(index, Complex64::new(1.0, 0.0))],
        }
    }

    /// Nonzero amplitudes in ascending index order.
    pub fn amplitudes(&self) -> &[(u64, Complex64)] {
        &self.amps
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.amps
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(Complex64::default(), |k| self.amps[k].1)
    }

    /// The basis index when the state is (up to phase) a single basis state.
    pub fn as_basis(&self, tol: f64) -> Option<u64> {
        let mut it = self.amps.iter().filter(|(_, a)| a.norm() > tol);
        let &(i, a) = it.next()?;
        if it.next().is_none() && (a.norm() - 1.0).abs() < tol {
            Some(i)
        } else {
            None
        }
    }
}

impl QuantumState for SparseState {
    fn num_qubits(&self) -> usize {
        self.n
    }

    fn apply_matrix(&mut self, target: usize, cmask: u64, cval: u64, m: &Mat2) {
        let fires = |i: u64| i & cmask == cval;
        if !self.amps.iter().any(|&(i, _)| fires(i)) {
            return;
        }
        let tb = 1u64 << target;
        let zero = Complex64::default();
        if m[0][1] == zero && m[1][0] == zero {
            // diagonal: phases in place
            for (i, a) in &mut self.amps {
                if fires(*i) {
                    *a *= m[usize::from(*i & tb != 0)][usize::from(*i & tb != 0)];
                }
            }
            self.amps.retain(|(_, a)| a.norm_sqr() > PRUNE * PRUNE);
            return;
        }
        if m[0][0] == zero && m[1][1] == zero {
            // anti-diagonal: a permutation of indices with phases
            for (i, a) in &mut self.amps {
                if fires(*i) {
                    let bit = usize::from(*i & tb != 0);
                    *a *= m[1 - bit][bit];
                    *i ^= tb;
                }
            }
            self.amps.sort_unstable_by_key(|&(i, _)| i);
            return;
        }
        let mut out = Vec::with_capacity(self.amps.len() * 2);
        for &(i, a) in &self.amps {
            if !fires(i) {
                out.push((i, a));
                continue;
            }
            let bit = usize::from(i & tb != 0);
            let base = i & !tb;
            out.push((base, m[0][bit] * a));
            out.push((base | tb, m[1][bit] * a));
        }
        out.sort_unstable_by_key(|&(i, _)| i);
        let mut merged: Vec<(u64, Complex64)> = Vec::with_capacity(out.len());
        for (i, a) in out {
            match merged.last_mut() {
                Some((j, b)) if *j == i => *b += a,
                _ => merged.push((i, a)),
            }
        }
        merged.retain(|(_, a)| a.norm_sqr() > PRUNE * PRUNE);
        self.amps = merged;
    }

    fn apply_mask_phase(&mut self, mask: u64, factor: Complex64) {
        for (i, a) in &mut self.amps {
            if *i & mask == mask {
                *a *= factor;
            }
        }
    }

    fn prob_one(&self, q: usize) -> f64 {
        self.amps
            .iter()
            .filter(|(i, _)| i >> q & 1 == 1)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    fn collapse(&mut self, q: usize, outcome: bool) {
        self.amps.retain(|&(i, _)| (i >> q & 1 == 1) == outcome);
        let norm: f64 = self.amps.iter().map(|(_, a)| a.norm_sqr()).sum();
        if norm > 0.0 {
            let s = 1.0 / norm.sqrt();
            for (_, a) in &mut self.amps {
                *a *= s;
            }
        }
    }
}

fn control_masks(circuit: &Circuit, gate: &Gate) -> (u64, u64) {
    let mut mask = 0;
    let mut val = 0;
    for c in &gate.controls {
        let bit = 1u64 << circuit.wire(c.qubit);
        mask |= bit;
        if c.is_positive() {
            val |= bit;
        }
    }
    (mask, val)
}

/// A gate reduced to state-level primitives with wires already resolved.
#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    /// `m` on `target` wherever `index & cmask == cval`.
    Matrix { target: usize, cmask: u64, cval: u64, m: Mat2 },
    /// `factor` on every index with all `mask` bits set.
    MaskPhase { mask: u64, factor: Complex64 },
}

pub fn apply_op<S: QuantumState>(state: &mut S, op: &Op) {
    match op {
        Op::Matrix { target, cmask, cval, m } => state.apply_matrix(*target, *cmask, *cval, m),
        Op::MaskPhase { mask, factor } => state.apply_mask_phase(*mask, *factor),
    }
}

fn rxx_ops(a: usize, b: usize, theta: f64) -> Vec<Op> {
    // Rxx = (H ⊗ H) Rzz (H ⊗ H), Rzz = e^{-iθ/2} on even parity, e^{iθ/2} on odd
    let h = |t| Op::Matrix {
        target: t,
        cmask: 0,
        cval: 0,
        m: gates::hadamard(),
    };
    let ratio = Complex64::from_polar(1.0, theta);
    let phase = |mask, factor| Op::MaskPhase { mask, factor };
    vec![
        h(a),
        h(b),
        phase(0, Complex64::from_polar(1.0, -theta / 2.0)),
        phase(1 << a, ratio),
        phase(1 << b, ratio),
        phase((1 << a) | (1 << b), ratio.inv() * ratio.inv()),
        h(a),
        h(b),
    ]
}

/// Lowers one unitary gate to [`Op`]s. Measurements are rejected; callers
/// handle them.
pub fn compile_gate(circuit: &Circuit, gate: &Gate) -> Result<Vec<Op>, SimError> {
    let (cmask, cval) = control_masks(circuit, gate);
    let matrix = |target, cmask, cval, m| Op::Matrix { target, cmask, cval, m };
    Ok(match &gate.kind {
        GateKind::Swap => {
            let a = circuit.wire(gate.targets[0]);
            let b = circuit.wire(gate.targets[1]);
            let x = gates::pauli_x();
            let (ba, bb) = (1u64 << a, 1u64 << b);
            vec![
                matrix(b, cmask | ba, cval | ba, x),
                matrix(a, cmask | bb, cval | bb, x),
                matrix(b, cmask | ba, cval | ba, x),
            ]
        }
        GateKind::Phase(t) | GateKind::ControlledPhase(t) if cval == cmask => {
            let t_bit = 1u64 << circuit.wire(gate.targets[0]);
            vec![Op::MaskPhase {
                mask: cmask | t_bit,
                factor: Complex64::from_polar(1.0, *t),
            }]
        }
        GateKind::Measure { .. } => return Err(SimError::Unsupported("measure inside unitary section".into())),
        GateKind::Native { name, params } if name == "rxx" => {
            let theta = *params.first().ok_or_else(|| SimError::Unsupported("rxx without angle".into()))?;
            rxx_ops(circuit.wire(gate.targets[0]), circuit.wire(gate.targets[1]), theta)
        }
        GateKind::Native { name, params } if name == "cx" && params.is_empty() => {
            let c = 1u64 << circuit.wire(gate.targets[0]);
            vec![matrix(circuit.wire(gate.targets[1]), c, c, gates::pauli_x())]
        }
        kind => {
            let m = gates::target_matrix(kind).ok_or_else(|| SimError::Unsupported(kind.name().to_string()))?;
            if gate.targets.len() != 1 && !matches!(kind, GateKind::Mcx) {
                return Err(SimError::Unsupported(format!("{} on {} targets", kind.name(), gate.targets.len())));
            }
            gate.targets.iter().map(|&t| matrix(circuit.wire(t), cmask, cval, m)).collect()
        }
    })
}

/// Applies one unitary gate. Measurements are handled by the caller.
pub fn apply_unitary<S: QuantumState>(state: &mut S, circuit: &Circuit, gate: &Gate) -> Result<(), SimError> {
    for op in compile_gate(circuit, gate)? {
        apply_op(state, &op);
    }
    Ok(())
}

/// Runs `circuit` on `state`, sampling measurements with `rng`. Returns the
/// classical register.
pub fn run_on<S: QuantumState, R: Rng>(state: &mut S, circuit: &Circuit, rng: &mut R) -> Result<Vec<bool>, SimError> {
    let mut clbits = vec![false; circuit.classical_bits()];
    for g in circuit.gates() {
        if let GateKind::Measure { clbit } = g.kind {
            let q = circuit.wire(g.targets[0]);
            let p1 = state.prob_one(q).clamp(0.0, 1.0);
            let outcome = rng.gen::<f64>() < p1;
            state.collapse(q, outcome);
            clbits[clbit] = outcome;
        } else {
            apply_unitary(state, circuit, g)?;
        }
    }
    Ok(clbits)
}

/// Dense simulation from |0…0⟩ with a seeded generator.
pub fn statevector_run(circuit: &Circuit, seed: u64, cap: usize) -> Result<(Statevector, Vec<bool>), SimError> {
    let mut state = Statevector::zero(circuit.num_qubits(), cap)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clbits = run_on(&mut state, circuit, &mut rng)?;
    Ok((state, clbits))
}

/// Outcome counts keyed by the classical register read as an integer
/// (classical bit `i` is bit `i` of the key).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub shots: u64,
    pub classical_bits: usize,
    pub counts: BTreeMap<u64, u64>,
}

impl Histogram {
    pub fn get(&self, key: u64) -> u64 {
        self.counts.get(&key).copied().unwrap_or(0)
    }
}

fn clbits_key(bits: &[bool]) -> u64 {
    bits.iter().enumerate().fold(0, |k, (i, &b)| k | (u64::from(b) << i))
}

/// `true` when no gate touches a qubit after it is measured, so every
/// measurement can be deferred to the end without changing statistics.
pub fn measurements_deferrable(circuit: &Circuit) -> bool {
    let mut measured = vec![false; circuit.num_qubits()];
    for g in circuit.gates() {
        let is_measure = matches!(g.kind, GateKind::Measure { .. });
        for q in g.qubits() {
            let w = circuit.wire(q);
            if measured[w] {
                return false;
            }
            if is_measure {
                measured[w] = true;
            }
        }
    }
    true
}

/// Samples `shots` runs of `circuit`.
///
/// When measurements are deferrable the final state is computed once and
/// the measured marginal is sampled directly; otherwise the circuit is rerun
/// per shot, drawing from one seeded stream.
pub fn sample(circuit: &Circuit, shots: u64, seed: u64, cap: usize) -> Result<Histogram, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = Histogram {
        shots,
        classical_bits: circuit.classical_bits(),
        counts: BTreeMap::new(),
    };
    if !measurements_deferrable(circuit) {
        for _ in 0..shots {
            let mut state = Statevector::zero(circuit.num_qubits(), cap)?;
            let bits = run_on(&mut state, circuit, &mut rng)?;
            *hist.counts.entry(clbits_key(&bits)).or_insert(0) += 1;
        }
        return Ok(hist);
    }
    let mut state = Statevector::zero(circuit.num_qubits(), cap)?;
    // clbit → wire of its last measurement
    let mut reads: BTreeMap<usize, usize> = BTreeMap::new();
    for g in circuit.gates() {
        if let GateKind::Measure { clbit } = g.kind {
            reads.insert(clbit, circuit.wire(g.targets[0]));
        } else {
            apply_unitary(&mut state, circuit, g)?;
        }
    }
    let mut marginal: BTreeMap<u64, f64> = BTreeMap::new();
    for (i, a) in state.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let key = reads
            .iter()
            .fold(0u64, |k, (&bit, &w)| k | (((i >> w) & 1) as u64) << bit);
        *marginal.entry(key).or_insert(0.0) += p;
    }
    let keys: Vec<u64> = marginal.keys().copied().collect();
    let mut cdf = Vec::with_capacity(keys.len());
    let mut acc = 0.0;
    for p in marginal.values() {
        acc += p;
        cdf.push(acc);
    }
    for _ in 0..shots {
        let r = rng.gen::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c <= r).min(keys.len() - 1);
        *hist.counts.entry(keys[idx]).or_insert(0) += 1;
    }
    Ok(hist)
}

/// Columns of the unitary of a measurement-free circuit: column `j` is the
/// output state for basis input `j`. Reserved for small oracles.
pub fn circuit_unitary_columns(circuit: &Circuit) -> Result<Vec<Vec<Complex64>>, SimError> {
    let n = circuit.num_qubits();
    if n > 12 {
        return Err(SimError::QubitCap { needed: n, cap: 12 });
    }
    (0..1u64 << n)
        .map(|j| {
            let mut s = Statevector::basis(n, j, n)?;
            for g in circuit.gates() {
                apply_unitary(&mut s, circuit, g)?;
            }
            Ok(s.amps)
        })
        .collect()
}

/// Compares two operators given as column lists, ignoring one global phase.
pub fn equal_up_to_phase(a: &[Vec<Complex64>], b: &[Vec<Complex64>], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    for (ca, cb) in a.iter().zip(b) {
        if ca.len() != cb.len() {
            return false;
        }
    }
    // The phase is read off the largest entry of `b`, which is well
    // conditioned whatever the state's spread.
    let phase = a
        .iter()
        .zip(b)
        .flat_map(|(ca, cb)| ca.iter().zip(cb))
        .max_by(|(_, y1), (_, y2)| y1.norm().total_cmp(&y2.norm()))
        .filter(|(_, y)| y.norm() > 0.0)
        .map(|(x, y)| {
            let r = x / y;
            r / r.norm()
        });
    let ph = phase.unwrap_or(Complex64::new(1.0, 0.0));
    a.iter()
        .zip(b)
        .all(|(ca, cb)| ca.iter().zip(cb).all(|(x, y)| (x - ph * y).norm() < tol))
}

/// Compares two states ignoring global phase.
pub fn states_equal_up_to_phase(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    equal_up_to_phase(&[a.to_vec()], &[b.to_vec()], tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Control, RegisterRole};

    fn line(n: usize) -> (Circuit, Vec<crate::circuit::QubitRef>) {
        let mut c = Circuit::new();
        let r = c.add_register("q", n, RegisterRole::Other).unwrap();
        let qs = c.register(r).qubits();
        (c, qs)
    }

    #[test]
    fn fair_coin() {
        let (mut c, q) = line(1);
        let b = c.add_classical_bits(1);
        c.push(Gate::h(q[0])).unwrap();
        c.push(Gate::measure(q[0], b)).unwrap();
        let ones = (0..10_000u64)
            .filter(|&s| statevector_run(&c, s, 24).unwrap().1[0])
            .count();
        let f = ones as f64 / 10_000.0;
        assert!((0.48..=0.52).contains(&f), "{f}");
    }

    #[test]
    fn bell_state_collapse_and_norm() {
        let (mut c, q) = line(2);
        let b = c.add_classical_bits(2);
        c.push(Gate::h(q[0])).unwrap();
        c.push(Gate::cnot(q[0], q[1])).unwrap();
        c.push(Gate::measure(q[0], b)).unwrap();
        for seed in 0..20 {
            let (s, bits) = statevector_run(&c, seed, 24).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            let idx = if bits[0] { 3 } else { 0 };
            assert!((s.amplitudes()[idx].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_histogram() {
        let (mut c, q) = line(3);
        let b = c.add_classical_bits(3);
        for (i, &x) in q.iter().enumerate() {
            c.push(Gate::x(x)).unwrap();
            c.push(Gate::measure(x, b + i)).unwrap();
        }
        let h = sample(&c, 500, 1, 24).unwrap();
        assert_eq!(h.counts.len(), 1);
        assert_eq!(h.get(0b111), 500);
    }

    #[test]
    fn rerun_path_matches_deferred_statistics() {
        // measure then reuse the qubit forces the per-shot path
        let (mut c, q) = line(1);
        let b = c.add_classical_bits(2);
        c.push(Gate::h(q[0])).unwrap();
        c.push(Gate::measure(q[0], b)).unwrap();
        c.push(Gate::h(q[0])).unwrap();
        c.push(Gate::measure(q[0], b + 1)).unwrap();
        assert!(!measurements_deferrable(&c));
        let h = sample(&c, 4000, 9, 24).unwrap();
        assert_eq!(h.counts.len(), 4);
        for k in 0..4 {
            assert!((800..1200).contains(&h.get(k)), "{h:?}");
        }
        assert_eq!(h, sample(&c, 4000, 9, 24).unwrap());
    }

    #[test]
    fn sparse_matches_dense() {
        let (mut c, q) = line(4);
        c.push(Gate::h(q[0])).unwrap();
        c.push(Gate::cphase(0.4, q[0], q[2])).unwrap();
        c.push(Gate::mcx(vec![Control::pos(q[0]), Control::neg(q[1])], q[3])).unwrap();
        c.push(Gate::swap(q[0], q[1])).unwrap();
        c.push(Gate::native("rxx", vec![0.9], vec![q[2], q[3]])).unwrap();
        c.push(Gate::root_x(crate::circuit::RootExponent::new(true, 2).unwrap(), vec![Control::pos(q[1])], q[2]))
            .unwrap();
        for input in 0..16u64 {
            let mut d = Statevector::basis(4, input, 24).unwrap();
            let mut s = SparseState::basis(4, input);
            for g in c.gates() {
                apply_unitary(&mut d, &c, g).unwrap();
                apply_unitary(&mut s, &c, g).unwrap();
            }
            for (i, a) in d.amplitudes().iter().enumerate() {
                let b = s.amplitude(i as u64);
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rxx_matches_definition() {
        let (mut c, q) = line(2);
        let theta = 0.77;
        c.push(Gate::native("rxx", vec![theta], vec![q[0], q[1]])).unwrap();
        let cols = circuit_unitary_columns(&c).unwrap();
        let (s, co) = (theta / 2.0).sin_cos();
        for (j, col) in cols.iter().enumerate() {
            for (i, got) in col.iter().enumerate() {
                let want = if i == j {
                    Complex64::new(co, 0.0)
                } else if i == j ^ 3 {
                    Complex64::new(0.0, -s)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                assert!((got - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(Statevector::zero(25, 24), Err(SimError::QubitCap { .. })));
    }

    #[test]
    fn phase_comparison_handles_spread_states() {
        // no amplitude above 1/2: the reference entry must still be found
        let a: Vec<Complex64> = (0..16).map(|k| Complex64::from_polar(0.25, 0.3 * k as f64)).collect();
        let b: Vec<Complex64> = a.iter().map(|x| x * Complex64::new(0.0, -1.0)).collect();
        assert!(states_equal_up_to_phase(&a, &b, 1e-12));
        let mut c = b.clone();
        c[5] = -c[5];
        assert!(!states_equal_up_to_phase(&a, &c, 1e-12));
    }
}
