//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use alloc::vec::Vec;
#[allow(unused_imports)] // inherent on f64 only with std or newer toolchains
use num_traits::Float;

use super::ComplexMatrix;
use crate::{Result, C64};

/// Eigendecomposition `h = V diag(values) V^dagger`.
#[derive(Clone, Debug)]
pub struct HermEig {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub vectors: ComplexMatrix,
}

impl HermEig {
    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Column `k` of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> ComplexMatrix {
        let n = self.vectors.rows();
        let amps: Vec<C64> = (0..n).map(|r| self.vectors[(r, k)]).collect();
        ComplexMatrix::column(&amps)
    }

    /// Rebuilds `V f(diag) V^dagger` for a function applied to the eigenvalues.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.vectors.rows();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &w) in self.values.iter().enumerate() {
            let fw = f(w);
            if fw == 0.0 {
                continue;
            }
            for r in 0..n {
                let vr = self.vectors[(r, k)] * fw;
                if vr == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    out[(r, c)] += vr * self.vectors[(c, k)].conj();
                }
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Inputs whose entrywise deviation from Hermiticity exceeds
/// [`super::HERMITIAN_TOL`] are rejected.
pub fn herm_eig(h: &ComplexMatrix) -> Result<HermEig> {
    h.ensure_hermitian()?;
    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    let scale = a.frobenius_norm();
    if n > 1 && scale > 0.0 {
        let tol = f64::EPSILON * f64::EPSILON * scale * scale;
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
                .map(|(r, c)| a[(r, c)].norm_sqr())
                .sum();
            if off <= tol {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .re
            .partial_cmp(&a[(i, i)].re)
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, new)] = v[(r, old)];
        }
    }
    Ok(HermEig { values, vectors })
}

/// One Jacobi rotation annihilating `a[p][q]`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Skip rotations that are below rounding of the diagonal.
    if r <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = C64::new(0.0, 0.0);
        a[(q, p)] = C64::new(0.0, 0.0);
        return;
    }
    let phase = apq / r; // e^{i phi}
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let e_minus = phase.conj(); // e^{-i phi}
    let n = a.rows();

    // columns: A <- A V with V[p][p]=c, V[p][q]=s, V[q][p]=-s e^{-i phi}, V[q][q]=c e^{-i phi}
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * (e_minus * s);
        a[(k, q)] = akp * s + akq * (e_minus * c);
    }
    // rows: A <- V^dagger A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * (phase * s);
        a[(q, k)] = apk * s + aqk * (phase * c);
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * (e_minus * s);
        v[(k, q)] = vkp * s + vkq * (e_minus * c);
    }
}
