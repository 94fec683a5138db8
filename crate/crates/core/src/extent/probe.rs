use alloc::format;
#[allow(unused_imports)] // inherent on f64 only with std or newer toolchains
use num_traits::Float;

use super::pure_state_extent;
use crate::channel::ChoiChannel;
use crate::qmat::{schmidt_coefficients, ComplexMatrix};
use crate::{Error, Result, C64};

/// Second Schmidt coefficient above which a probe counts as entangled.
const PRODUCT_TOL: f64 = 1e-7;

/// `|Φ_A>|Φ_B>` ordered `(A, Ã, B, B̃)` with ancillas `Ã = A` and `B̃ = B`.
pub fn maximally_entangled_probe(d_a: usize, d_b: usize) -> ComplexMatrix {
    let n = d_a * d_a * d_b * d_b;
    let amp = C64::new(1.0 / ((d_a * d_b) as f64).sqrt(), 0.0);
    let mut v = ComplexMatrix::zeros(n, 1);
    for a in 0..d_a {
        for b in 0..d_b {
            v[(((a * d_a + a) * d_b + b) * d_b + b, 0)] = amp;
        }
    }
    v
}

/// Extent of the pure output of `u ⊗ id` on a pure product probe ordered
/// `(A, Ã, B, B̃)` with ancilla dimensions `anc_a`, `anc_b`, across the cut
/// `A'Ã | B'B̃`. `u` must have a single Kraus operator so that the output
/// stays pure.
pub fn state_based_lower_bound(
    u: &ChoiChannel,
    probe: &ComplexMatrix,
    anc_a: usize,
    anc_b: usize,
) -> Result<f64> {
    let dims = u.dims();
    let n_in = dims.a * anc_a * dims.b * anc_b;
    if probe.cols() != 1 || probe.rows() != n_in {
        return Err(Error::DimensionMismatch(format!(
            "probe of shape {}x{} does not match ({}, {anc_a}, {}, {anc_b})",
            probe.rows(),
            probe.cols(),
            dims.a,
            dims.b
        )));
    }
    let s = schmidt_coefficients(probe, dims.a * anc_a, dims.b * anc_b)?;
    if s.get(1).copied().unwrap_or(0.0) > PRODUCT_TOL {
        return Err(Error::InvalidArgument(format!(
            "probe is entangled across the cut (second Schmidt coefficient {:.3e})",
            s[1]
        )));
    }
    let kraus = u.kraus(1e-10)?;
    if kraus.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "channel has Kraus rank {}, output would be mixed",
            kraus.len()
        )));
    }
    let k = &kraus[0];
    let (a, b, ap, bp) = (dims.a, dims.b, dims.ap, dims.bp);
    let mut out = ComplexMatrix::zeros(ap * anc_a * bp * anc_b, 1);
    for xa in 0..anc_a {
        for xb in 0..anc_b {
            for oa in 0..ap {
                for ob in 0..bp {
                    let mut acc = C64::new(0.0, 0.0);
                    for ia in 0..a {
                        for ib in 0..b {
                            acc += k[(oa * bp + ob, ia * b + ib)]
                                * probe[(((ia * anc_a + xa) * b + ib) * anc_b + xb, 0)];
                        }
                    }
                    out[(((oa * anc_a + xa) * bp + ob) * anc_b + xb, 0)] = acc;
                }
            }
        }
    }
    // renormalize against the O(tol) loss in the Kraus factorization
    let norm = out.norm();
    let out = out.scale(1.0 / norm);
    let coeffs = schmidt_coefficients(&out, ap * anc_a, bp * anc_b)?;
    pure_state_extent(&coeffs)
}

/// [`state_based_lower_bound`] with the maximally entangled probe, i.e. the
/// extent of the Choi state of `u`.
pub fn choi_state_lower_bound(u: &ChoiChannel) -> Result<f64> {
    let d = u.dims();
    state_based_lower_bound(u, &maximally_entangled_probe(d.a, d.b), d.a, d.b)
}
