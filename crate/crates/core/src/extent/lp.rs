//! Minimal-l1 decompositions over a finite dictionary.
//!
//! The LP is `min sum (a+_i + a-_i) : sum (a+_i - a-_i) vec F_i = vec E`
//! with `vec` listing the real parameters of a Hermitian operator. Rows of
//! the equality system that depend on others are removed first; if such a
//! row disagrees with the target the target is outside the span and the
//! problem is infeasible.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent on f64 only with std or newer toolchains
use num_traits::Float;

use super::{require_optimal, Certificate, Dictionary, ExtentResult, Method, Residuals};
use crate::channel::{qpd_validate, ChoiChannel, Qpd, QpdTerm};
use crate::qmat::ComplexMatrix;
use crate::sdp::dense::{cholesky, cholesky_solve};
use crate::sdp::{solve, BlockKind, SdpProblem, SolveOptions, Var};
use crate::{Error, Result};

/// Relative size below which a row is a combination of earlier rows.
const RANK_TOL: f64 = 1e-9;
/// Coefficients below this fraction of the largest are dropped.
const SUPPORT_TOL: f64 = 1e-7;

/// Real parameters of a Hermitian matrix: diagonal, then real and
/// imaginary parts of the strict upper triangle.
fn hermitian_coords(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.rows();
    let mut out = Vec::with_capacity(n * n);
    for p in 0..n {
        out.push(m[(p, p)].re);
    }
    for p in 0..n {
        for q in p + 1..n {
            out.push(m[(p, q)].re);
            out.push(m[(p, q)].im);
        }
    }
    out
}

/// Indices of a maximal independent set of rows of `[a | b]`, judged on
/// the `a` part; `Err` if a dependent row is inconsistent with `b`.
fn independent_rows(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<usize>> {
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let bscale = b.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    // orthonormal basis of kept rows (a part), with the matching b combination
    let mut basis: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut keep = Vec::new();
    for (i, (row, &bi)) in a.iter().zip(b).enumerate() {
        let mut r = row.clone();
        let mut rb = bi;
        for _ in 0..2 {
            for (q, qb) in &basis {
                let c: f64 = r.iter().zip(q).map(|(x, y)| x * y).sum();
                for (x, y) in r.iter_mut().zip(q) {
                    *x -= c * y;
                }
                rb -= c * qb;
            }
        }
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > RANK_TOL * scale * (row.len() as f64).sqrt() {
            for x in r.iter_mut() {
                *x /= norm;
            }
            basis.push((r, rb / norm));
            keep.push(i);
        } else if rb.abs() > 1e-7 * bscale {
            return Err(Error::Infeasible(format!(
                "target lies outside the span of the dictionary (residual {:.3e} on row {i})",
                rb.abs()
            )));
        }
    }
    Ok(keep)
}

/// Least-norm correction of `x` on `support` towards `a x = b`.
fn polish(a: &[Vec<f64>], b: &[f64], x: &mut [f64], support: &[usize]) {
    let rows = a.len();
    let s = support.len();
    for _ in 0..4 {
        let r: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(row, bi)| bi - support.iter().map(|&k| row[k] * x[k]).sum::<f64>())
            .collect();
        // (A_S A_S^T + eps) u = r, x_S += A_S^T u
        let mut g = vec![0.0; rows * rows];
        for i in 0..rows {
            for j in 0..=i {
                let v: f64 = support.iter().map(|&k| a[i][k] * a[j][k]).sum();
                g[i * rows + j] = v;
                g[j * rows + i] = v;
            }
        }
        let ridge = 1e-13 * (0..rows).map(|i| g[i * rows + i]).fold(1.0, f64::max);
        for i in 0..rows {
            g[i * rows + i] += ridge;
        }
        if cholesky(&mut g, rows).is_err() || s == 0 {
            return;
        }
        let mut u = r;
        cholesky_solve(&g, rows, &mut u);
        for &k in support {
            x[k] += (0..rows).map(|i| a[i][k] * u[i]).sum::<f64>();
        }
    }
}

/// Minimal-l1 decomposition of `target` into dictionary entries, with the
/// explicit QPD as certificate. The reported value is the l1 norm of that
/// QPD.
pub fn synthesize_qpd_lp(
    target: &ChoiChannel,
    dict: &Dictionary,
    opts: &SolveOptions,
) -> Result<ExtentResult> {
    if target.dims() != dict.dims() {
        return Err(Error::DimensionMismatch(format!(
            "target dims {:?} differ from dictionary dims {:?}",
            target.dims(),
            dict.dims()
        )));
    }
    let columns: Vec<Vec<f64>> = dict
        .entries()
        .iter()
        .map(|e| hermitian_coords(e.effective_map().choi()))
        .collect();
    let b_full = hermitian_coords(target.choi());
    let n_cols = columns.len();
    let a_full: Vec<Vec<f64>> = (0..b_full.len())
        .map(|r| columns.iter().map(|c| c[r]).collect())
        .collect();
    let keep = independent_rows(&a_full, &b_full)?;
    let a: Vec<Vec<f64>> = keep.iter().map(|&r| a_full[r].clone()).collect();
    let b: Vec<f64> = keep.iter().map(|&r| b_full[r]).collect();

    let mut p = SdpProblem::new();
    let blk = p.add_block(BlockKind::Nonneg, 2 * n_cols);
    let plus = |i: usize| Var::Nonneg {
        block: blk,
        index: i,
    };
    let minus = |i: usize| Var::Nonneg {
        block: blk,
        index: n_cols + i,
    };
    p.add_objective((0..2 * n_cols).map(|i| {
        (
            Var::Nonneg {
                block: blk,
                index: i,
            },
            1.0,
        )
    }));
    for (row, &bi) in a.iter().zip(&b) {
        let terms = row
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .flat_map(|(i, &v)| [(plus(i), v), (minus(i), -v)])
            .collect();
        p.add_constraint(terms, bi);
    }
    let sol = solve(&p, opts)?;
    if sol.status == crate::sdp::SolveStatus::Infeasible {
        return Err(Error::Infeasible(
            "no decomposition over the dictionary".into(),
        ));
    }
    require_optimal(&sol)?;

    let mut coeffs: Vec<f64> = (0..n_cols)
        .map(|i| sol.value(plus(i)) - sol.value(minus(i)))
        .collect();
    let largest = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let support: Vec<usize> = (0..n_cols)
        .filter(|&i| coeffs[i].abs() > SUPPORT_TOL * largest)
        .collect();
    for (i, c) in coeffs.iter_mut().enumerate() {
        if !support.contains(&i) {
            *c = 0.0;
        }
    }
    polish(&a, &b, &mut coeffs, &support);

    let terms: Vec<QpdTerm> = support
        .iter()
        .map(|&i| QpdTerm {
            coeff: coeffs[i],
            branches: dict.entries()[i].branches.clone(),
        })
        .collect();
    let qpd = Qpd::new(target.clone(), terms)?;
    let report = qpd_validate(&qpd);
    let mut residuals = Residuals::of_solution(&sol);
    residuals.reconstruction_error = report.reconstruction_error;
    Ok(ExtentResult {
        value: report.l1,
        method: Method::Lp,
        certificate: Some(Certificate::Qpd(qpd)),
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Branch, ChoiDims};
    use crate::extent::DictEntry;
    use crate::gates;

    fn opts() -> SolveOptions {
        SolveOptions::default()
    }

    #[test]
    fn identity_uses_a_single_term() {
        let id = ChoiChannel::identity(ChoiDims::local(2, 2)).unwrap();
        let dep = ChoiChannel::depolarizing(id.dims());
        let entries = vec![
            DictEntry {
                label: "id".into(),
                branches: vec![Branch {
                    map: id.clone(),
                    weight: None,
                }],
            },
            DictEntry {
                label: "dep".into(),
                branches: vec![Branch {
                    map: dep,
                    weight: None,
                }],
            },
        ];
        let dict = Dictionary::new("tiny", id.dims(), entries).unwrap();
        let r = synthesize_qpd_lp(&id, &dict, &opts()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-7);
        let Some(Certificate::Qpd(q)) = r.certificate else {
            panic!()
        };
        assert_eq!(q.terms().len(), 1);
        assert!(qpd_validate(&q).is_valid(1e-7));
    }

    #[test]
    fn target_outside_span_is_infeasible() {
        let dep = ChoiChannel::depolarizing(ChoiDims::local(2, 2));
        let entries = vec![DictEntry {
            label: "dep".into(),
            branches: vec![Branch {
                map: dep.clone(),
                weight: None,
            }],
        }];
        let dict = Dictionary::new("dep", dep.dims(), entries).unwrap();
        let x = ChoiChannel::of_unitary(&gates::pauli_x(), dep.dims()).unwrap();
        assert!(matches!(
            synthesize_qpd_lp(&x, &dict, &opts()),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn cnot_over_local_operations_is_three() {
        let dict = Dictionary::lo_star_two_qubit();
        let e = ChoiChannel::of_unitary(&gates::cnot(), ChoiDims::bipartite(2, 2)).unwrap();
        let r = synthesize_qpd_lp(&e, &dict, &opts()).unwrap();
        assert!((r.value - 3.0).abs() < 1e-5, "{}", r.value);
        let Some(Certificate::Qpd(q)) = r.certificate else {
            panic!()
        };
        let rep = qpd_validate(&q);
        assert!(rep.is_valid(1e-7), "{}", rep.reconstruction_error);
        assert!(rep.term_flags.iter().all(|f| f.ppt));
    }

    #[test]
    fn zz_rotation_over_local_operations() {
        let theta = core::f64::consts::PI / 8.0;
        let e = ChoiChannel::of_unitary(&gates::zz(theta), ChoiDims::bipartite(2, 2)).unwrap();
        let r = synthesize_qpd_lp(&e, &Dictionary::lo_star_two_qubit(), &opts()).unwrap();
        let law = 1.0 + 2.0 * (2.0 * theta).sin();
        assert!((r.value - law).abs() < 1e-4, "{} vs {law}", r.value);
        assert!(r.residuals.reconstruction_error < 1e-7);
    }

    #[test]
    fn dependent_rows_are_dropped() {
        let a = vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(independent_rows(&a, &[1.0, 2.0, 3.0]).unwrap(), vec![0, 2]);
        assert!(independent_rows(&a, &[1.0, 3.0, 3.0]).is_err());
    }
}
