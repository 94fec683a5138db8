//! One-sided (Hestenes) Jacobi SVD for complex matrices.

use alloc::vec::Vec;
#[allow(unused_imports)] // inherent on f64 only with std or newer toolchains
use num_traits::Float;

use super::ComplexMatrix;
use crate::C64;

/// Thin singular value decomposition `m = U diag(values) V^dagger`.
#[derive(Clone, Debug)]
pub struct Svd {
    /// Singular values in descending order, `min(rows, cols)` of them.
    pub values: Vec<f64>,
    /// `rows x k` matrix of left singular vectors. Columns belonging to zero
    /// singular values are zero.
    pub u: ComplexMatrix,
    /// `cols x k` matrix of right singular vectors (orthonormal columns).
    pub v: ComplexMatrix,
}

pub fn svd(m: &ComplexMatrix) -> Svd {
    if m.rows() < m.cols() {
        // m^dagger = V S U^dagger
        let t = svd(&m.adjoint());
        return Svd {
            values: t.values,
            u: t.v,
            v: t.u,
        };
    }
    let rows = m.rows();
    let cols = m.cols();
    // work column-major for cache-friendly column rotations
    let mut a: Vec<Vec<C64>> = (0..cols)
        .map(|c| (0..rows).map(|r| m[(r, c)]).collect())
        .collect();
    let mut v: Vec<Vec<C64>> = (0..cols)
        .map(|c| {
            (0..cols)
                .map(|r| {
                    if r == c {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect();

    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols.saturating_sub(1) {
            for q in p + 1..cols {
                let alpha: f64 = a[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = a[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = a[p].iter().zip(&a[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let tau = (beta - alpha) / (2.0 * g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let em = phase.conj();
                let (lo, hi) = a.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = xp * c - xq * (em * s);
                    *y = xp * s + xq * (em * c);
                }
                let (lo, hi) = v.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (xp, xq) = (*x, *y);
                    *x = xp * c - xq * (em * s);
                    *y = xp * s + xq * (em * c);
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = a
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| {
        norms[j]
            .partial_cmp(&norms[i])
            .unwrap_or(core::cmp::Ordering::Equal)
    });

    let mut u = ComplexMatrix::zeros(rows, cols);
    let mut vm = ComplexMatrix::zeros(cols, cols);
    let mut values = Vec::with_capacity(cols);
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        values.push(s);
        if s > 0.0 {
            for r in 0..rows {
                u[(r, k)] = a[j][r] / s;
            }
        }
        for r in 0..cols {
            vm[(r, k)] = v[j][r];
        }
    }
    Svd { values, u, v: vm }
}
