//! Gate matrices shared by the simulators and the single-qubit synthesis in
//! lowering.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::circuit::{GateKind, RootExponent};

pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub fn hadamard() -> Mat2 {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

pub fn pauli_x() -> Mat2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn phase(theta: f64) -> Mat2 {
    [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, theta)]]
}

/// `X^e = H diag(1, e^{iπe}) H`.
pub fn root_x(e: RootExponent) -> Mat2 {
    let w = Complex64::from_polar(1.0, std::f64::consts::PI * e.value());
    let p = (ONE + w) * 0.5;
    let m = (ONE - w) * 0.5;
    [[p, m], [m, p]]
}

pub fn u3(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
        [Complex64::from_polar(s, phi), Complex64::from_polar(c, phi + lambda)],
    ]
}

pub fn rx(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
        [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
    ]
}

pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

pub fn rz(theta: f64) -> Mat2 {
    [
        [Complex64::from_polar(1.0, -theta / 2.0), ZERO],
        [ZERO, Complex64::from_polar(1.0, theta / 2.0)],
    ]
}

pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `true` when `a = e^{iφ} b` for some φ, entrywise within `tol`.
pub fn equal_up_to_phase(a: &Mat2, b: &Mat2, tol: f64) -> bool {
    let flat_a = [a[0][0], a[0][1], a[1][0], a[1][1]];
    let flat_b = [b[0][0], b[0][1], b[1][0], b[1][1]];
    let k = (0..4).max_by(|&i, &j| flat_b[i].norm().total_cmp(&flat_b[j].norm())).unwrap();
    if flat_b[k].norm() < tol {
        return flat_a.iter().all(|x| x.norm() < tol);
    }
    let ph = flat_a[k] / flat_b[k];
    (0..4).all(|i| (flat_a[i] - ph * flat_b[i]).norm() < tol)
}

/// Matrix of a named single-qubit native gate, if known.
pub fn native_single(name: &str, params: &[f64]) -> Option<Mat2> {
    let p = |i: usize| params.get(i).copied();
    Some(match (name, params.len()) {
        ("h", 0) => hadamard(),
        ("x", 0) => pauli_x(),
        ("id", 0) => [[ONE, ZERO], [ZERO, ONE]],
        ("p" | "u1", 1) => phase(p(0)?),
        ("u2", 2) => u3(std::f64::consts::FRAC_PI_2, p(0)?, p(1)?),
        ("u3" | "u", 3) => u3(p(0)?, p(1)?, p(2)?),
        ("rx", 1) => rx(p(0)?),
        ("ry", 1) => ry(p(0)?),
        ("rz", 1) => rz(p(0)?),
        _ => return None,
    })
}

/// Matrix applied to the target of a gate that acts on a single target
/// (possibly under controls). `None` for multi-qubit-only kinds.
pub fn target_matrix(kind: &GateKind) -> Option<Mat2> {
    match kind {
        GateKind::H => Some(hadamard()),
        GateKind::X | GateKind::Cnot | GateKind::Ccnot | GateKind::Mcx => Some(pauli_x()),
        GateKind::Phase(t) | GateKind::ControlledPhase(t) => Some(phase(*t)),
        GateKind::RootX(e) => Some(root_x(*e)),
        GateKind::Native { name, params } => native_single(name, params),
        GateKind::Swap | GateKind::Measure { .. } => None,
    }
}

/// Angles `(θ, φ, λ)` with `u3(θ, φ, λ)` equal to `m` up to global phase.
pub fn zyz_angles(m: &Mat2) -> (f64, f64, f64) {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let s = det.sqrt();
    let v = [[m[0][0] / s, m[0][1] / s], [m[1][0] / s, m[1][1] / s]];
    let theta = 2.0 * v[1][0].norm().atan2(v[0][0].norm());
    let eps = 1e-12;
    let (sum, diff) = if v[1][0].norm() < eps {
        (2.0 * v[1][1].arg(), 0.0)
    } else if v[0][0].norm() < eps {
        (0.0, 2.0 * v[1][0].arg())
    } else {
        (2.0 * v[1][1].arg(), 2.0 * v[1][0].arg())
    };
    let phi = (sum + diff) / 2.0;
    let lambda = (sum - diff) / 2.0;
    (theta, normalize_angle(phi), normalize_angle(lambda))
}

/// Maps an angle into `(-π, π]`.
pub fn normalize_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut r = a.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    if r.abs() < 1e-15 {
        0.0
    } else {
        r
    }
}
