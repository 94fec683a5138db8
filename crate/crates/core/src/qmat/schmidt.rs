use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent on f64 only with std or newer toolchains
use num_traits::Float;

use super::{svd, ComplexMatrix};
use crate::{Error, Result};

/// Schmidt coefficients of a bipartite pure state on `dA x dB`.
///
/// `v` must be a unit column vector (tolerance 1e-10). The coefficients are
/// the singular values of the `dA x dB` reshaping of `v`, descending.
pub fn schmidt_coefficients(v: &ComplexMatrix, d_a: usize, d_b: usize) -> Result<Vec<f64>> {
    if v.cols() != 1 || v.rows() != d_a * d_b {
        return Err(Error::DimensionMismatch(format!(
            "state of shape {}x{} is not a vector on {d_a}x{d_b}",
            v.rows(),
            v.cols()
        )));
    }
    let norm = v.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm));
    }
    let m = ComplexMatrix::new(d_a, d_b, v.data().to_vec())?;
    Ok(svd(&m).values)
}

/// Operator-Schmidt decomposition `u = sum_k coeffs[k] left[k] ⊗ right[k]`.
#[derive(Clone, Debug)]
pub struct OperatorSchmidt {
    /// Nonzero coefficients, descending.
    pub coeffs: Vec<f64>,
    /// Hilbert-Schmidt orthonormal factors on the first party.
    pub left: Vec<ComplexMatrix>,
    /// Hilbert-Schmidt orthonormal factors on the second party.
    pub right: Vec<ComplexMatrix>,
}

impl OperatorSchmidt {
    /// Coefficients rescaled by `1/sqrt(dA dB)`; for a unitary whose factors
    /// are all proportional to unitaries these are the `|u_k|` with unit
    /// 2-norm.
    pub fn normalized(&self, d_a: usize, d_b: usize) -> Vec<f64> {
        let s = ((d_a * d_b) as f64).sqrt();
        self.coeffs.iter().map(|c| c / s).collect()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut acc: Option<ComplexMatrix> = None;
        for ((c, l), r) in self.coeffs.iter().zip(&self.left).zip(&self.right) {
            let term = super::kron(l, r).scale(*c);
            acc = Some(match acc {
                None => term,
                Some(a) => &a + &term,
            });
        }
        acc.unwrap_or_else(|| ComplexMatrix::zeros(1, 1))
    }
}

/// Operator-Schmidt decomposition of an operator on `dA ⊗ dB`.
///
/// Coefficients below `1e-12` times the largest one are dropped, so the
/// identity on two qubits yields the single coefficient 2.
pub fn operator_schmidt(u: &ComplexMatrix, d_a: usize, d_b: usize) -> Result<OperatorSchmidt> {
    let n = d_a * d_b;
    if !u.is_square() || u.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator of shape {}x{} does not act on {d_a}x{d_b}",
            u.rows(),
            u.cols()
        )));
    }
    // R[(a a'), (b b')] = u[(a b), (a' b')]
    let mut r = ComplexMatrix::zeros(d_a * d_a, d_b * d_b);
    for a in 0..d_a {
        for b in 0..d_b {
            for ap in 0..d_a {
                for bp in 0..d_b {
                    r[(a * d_a + ap, b * d_b + bp)] = u[(a * d_b + b, ap * d_b + bp)];
                }
            }
        }
    }
    let s = svd(&r);
    let cutoff = 1e-12 * s.values.first().copied().unwrap_or(0.0);
    let mut out = OperatorSchmidt {
        coeffs: Vec::new(),
        left: Vec::new(),
        right: Vec::new(),
    };
    for (k, &c) in s.values.iter().enumerate() {
        if c <= cutoff || c == 0.0 {
            continue;
        }
        let mut l = ComplexMatrix::zeros(d_a, d_a);
        for a in 0..d_a {
            for ap in 0..d_a {
                l[(a, ap)] = s.u[(a * d_a + ap, k)];
            }
        }
        let mut rt = ComplexMatrix::zeros(d_b, d_b);
        for b in 0..d_b {
            for bp in 0..d_b {
                rt[(b, bp)] = s.v[(b * d_b + bp, k)].conj();
            }
        }
        out.coeffs.push(c);
        out.left.push(l);
        out.right.push(rt);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;
    use crate::C64;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn product_and_bell_states() {
        let v = ComplexMatrix::basis(4, 0);
        let s = schmidt_coefficients(&v, 2, 2).unwrap();
        assert_eq!(s, vec![1.0, 0.0]);

        let h = core::f64::consts::FRAC_1_SQRT_2;
        let bell = ComplexMatrix::column(&[
            C64::new(h, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(h, 0.0),
        ]);
        let s = schmidt_coefficients(&bell, 2, 2).unwrap();
        assert!((s[0] - h).abs() < 1e-15 && (s[1] - h).abs() < 1e-15);

        let a = 0.9f64.sqrt();
        let b = 0.1f64.sqrt();
        let v = ComplexMatrix::column(&[
            C64::new(a, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(b, 0.0),
        ]);
        let s = schmidt_coefficients(&v, 2, 2).unwrap();
        assert!((s[0] - a).abs() < 1e-15 && (s[1] - b).abs() < 1e-15);
    }

    #[test]
    fn rejects_unnormalized() {
        let v = ComplexMatrix::basis(4, 0).scale(1.1);
        assert!(matches!(
            schmidt_coefficients(&v, 2, 2),
            Err(Error::NotNormalized(_))
        ));
        assert!(schmidt_coefficients(&ComplexMatrix::basis(4, 0), 2, 3).is_err());
    }

    #[test]
    fn identity_has_one_coefficient() {
        let d = operator_schmidt(&ComplexMatrix::identity(4), 2, 2).unwrap();
        assert_eq!(d.coeffs.len(), 1);
        assert!((d.coeffs[0] - 2.0).abs() < 1e-14);
        assert!(d.reconstruct().distance(&ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn cnot_and_swap_coefficients() {
        let d = operator_schmidt(&gates::cnot(), 2, 2).unwrap();
        assert_eq!(d.coeffs.len(), 2);
        for c in &d.coeffs {
            assert!((c - 2f64.sqrt()).abs() < 1e-12);
        }
        for u in d.normalized(2, 2) {
            assert!((u - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
        assert!(d.reconstruct().distance(&gates::cnot()) < 1e-12);

        let d = operator_schmidt(&gates::swap(), 2, 2).unwrap();
        assert_eq!(d.coeffs.len(), 4);
        for u in d.normalized(2, 2) {
            assert!((u - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_wrong_dims() {
        assert!(operator_schmidt(&ComplexMatrix::identity(4), 2, 3).is_err());
    }

    fn arb_unitary(n: usize) -> impl Strategy<Value = ComplexMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
            let m = ComplexMatrix::new(n, n, v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
                .unwrap();
            gates::unitary_from_generator(&m)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn reconstructs_random_unitaries(u in prop_oneof![arb_unitary(4), arb_unitary(9), arb_unitary(16)]) {
            let d = match u.rows() { 4 => 2, 9 => 3, _ => 4 };
            let os = operator_schmidt(&u, d, d).unwrap();
            prop_assert!(os.reconstruct().distance(&u) < 1e-8);
            let hs: f64 = os.coeffs.iter().map(|c| c * c).sum();
            prop_assert!((hs - u.frobenius_norm().powi(2)).abs() < 1e-8);
            for (i, l) in os.left.iter().enumerate() {
                for (j, m) in os.left.iter().enumerate() {
                    let ip = l.hs_inner(m);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((ip - C64::new(expect, 0.0)).norm() < 1e-8);
                }
            }
        }

        #[test]
        fn schmidt_squares_sum_to_one(v in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6)) {
            let m = ComplexMatrix::column(&v.iter().map(|&(a, b)| C64::new(a, b)).collect::<Vec<_>>());
            let n = m.norm();
            prop_assume!(n > 1e-3);
            let s = schmidt_coefficients(&m.scale(1.0 / n), 2, 3).unwrap();
            prop_assert!((s.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-8);
            prop_assert!(s.iter().all(|&x| x >= 0.0));
        }
    }
}
