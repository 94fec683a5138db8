//! Named gates. Qubit 0 is the most significant index.

use alloc::vec;
#[allow(unused_imports)] // inherent on f64 only with std or newer toolchains
use num_traits::Float;

use crate::qmat::{herm_eig, ComplexMatrix};
use crate::C64;

fn real(n: usize, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_real(n, n, entries).expect("static gate table")
}

pub fn identity(qubits: usize) -> ComplexMatrix {
    ComplexMatrix::identity(1 << qubits)
}

pub fn pauli_x() -> ComplexMatrix {
    real(2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::new(
        2,
        2,
        vec![
            C64::new(0.0, 0.0),
            C64::new(0.0, -1.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, 0.0),
        ],
    )
    .expect("static gate table")
}

pub fn pauli_z() -> ComplexMatrix {
    real(2, &[1.0, 0.0, 0.0, -1.0])
}

pub fn hadamard() -> ComplexMatrix {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    real(2, &[h, h, h, -h])
}

/// `exp(i angle P)` for a Pauli matrix `P` (any matrix squaring to identity).
pub fn pauli_rotation(p: &ComplexMatrix, angle: f64) -> ComplexMatrix {
    let n = p.rows();
    let c = ComplexMatrix::identity(n).scale(angle.cos());
    let s = p.scale_c(C64::new(0.0, angle.sin()));
    &c + &s
}

/// Controlled-NOT with control qubit 0 and target qubit 1.
pub fn cnot() -> ComplexMatrix {
    real(
        4,
        &[
            1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.,
        ],
    )
}

pub fn cz() -> ComplexMatrix {
    real(
        4,
        &[
            1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 1., 0., 0., 0., 0., -1.,
        ],
    )
}

pub fn swap() -> ComplexMatrix {
    real(
        4,
        &[
            1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.,
        ],
    )
}

/// Toffoli with controls on qubits 0 and 1, target qubit 2.
pub fn toffoli() -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(8);
    m[(6, 6)] = C64::new(0.0, 0.0);
    m[(7, 7)] = C64::new(0.0, 0.0);
    m[(6, 7)] = C64::new(1.0, 0.0);
    m[(7, 6)] = C64::new(1.0, 0.0);
    m
}

/// `exp(i theta Z⊗Z)`.
pub fn zz(theta: f64) -> ComplexMatrix {
    let p = C64::new(theta.cos(), theta.sin());
    let m = p.conj();
    ComplexMatrix::from_diagonal(&[p, m, m, p])
}

/// `exp(i H)` with `H` the Hermitian part of `generator`.
pub fn unitary_from_generator(generator: &ComplexMatrix) -> ComplexMatrix {
    let h = generator.hermitian_part();
    let e = herm_eig(&h).expect("Hermitian part is Hermitian");
    let n = h.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &w) in e.values.iter().enumerate() {
        let phase = C64::new(w.cos(), w.sin());
        for r in 0..n {
            let vr = e.vectors[(r, k)] * phase;
            for c in 0..n {
                out[(r, c)] += vr * e.vectors[(c, k)].conj();
            }
        }
    }
    out
}
