//! Constructive quasiprobability decompositions.

use alloc::vec;
use alloc::vec::Vec;

use super::{ChoiChannel, Instrument, Qpd, QpdTerm, PREDICATE_TOL};
use crate::qmat::herm_eig;
use crate::{Error, Result};

/// Splits an HPTP map into the fully depolarizing channel and one more CPTP
/// map: `E = d lambda D - (d lambda - 1) F` with `d = d_in d_out` and
/// `lambda = max(lambda_max(J(E)), 1/d)`.
pub fn hptp_to_cptp_qpd(e: &ChoiChannel) -> Result<Qpd> {
    if !e.is_hp(PREDICATE_TOL) || !e.is_tp(PREDICATE_TOL) {
        return Err(Error::InvalidChannel(
            "expected a Hermitian-preserving, trace-preserving map".into(),
        ));
    }
    let dims = e.dims();
    let d = dims.total() as f64;
    let lambda = herm_eig(e.choi())?.max().max(1.0 / d);
    let dep = ChoiChannel::depolarizing(dims);
    let big = d * lambda;
    let rest = big - 1.0;
    let mut terms = vec![QpdTerm::single(big, dep.clone())];
    if rest > 1e-12 {
        let f = ChoiChannel::linear_combination(&[(big / rest, &dep), (-1.0 / rest, e)])?;
        terms.push(QpdTerm::single(-rest, f));
    } else {
        terms[0].coeff = 1.0;
    }
    Qpd::new(e.clone(), terms)
}

/// Splits an HP map along the sign of its Choi spectrum into at most two
/// CPTN maps with coefficients `(lambda+, -lambda-)`.
pub fn hp_to_cptn_qpd(e: &ChoiChannel) -> Result<Qpd> {
    if !e.is_hp(PREDICATE_TOL) {
        return Err(Error::InvalidChannel(
            "expected a Hermitian-preserving map".into(),
        ));
    }
    let dims = e.dims();
    let eig = herm_eig(e.choi())?;
    let scale = eig.values.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let cut = 1e-14 * scale;
    let pos = eig.reconstruct_with(|w| if w > cut { w } else { 0.0 });
    let neg = eig.reconstruct_with(|w| if w < -cut { -w } else { 0.0 });
    let d_in = dims.d_in() as f64;
    let mut terms = Vec::new();
    for (sign, part) in [(1.0, pos), (-1.0, neg)] {
        if part.max_abs() == 0.0 {
            continue;
        }
        let ch = ChoiChannel::new(part, dims, super::Normalization::TraceOne)?;
        let lam = herm_eig(&ch.input_marginal().hermitian_part())?.max() * d_in;
        if lam <= 0.0 {
            continue;
        }
        terms.push(QpdTerm::single(sign * lam, ch.scaled(1.0 / lam)));
    }
    if terms.is_empty() {
        return Err(Error::InvalidChannel(
            "the zero map has no decomposition into nonzero terms".into(),
        ));
    }
    Qpd::new(e.clone(), terms)
}

/// Regroups a two-instrument decomposition
/// `E = a+ (G_pp - G_pm) - a- (G_mp - G_mm)` into two channels,
/// `E = ((1+s)/2) P+ - ((s-1)/2) P-` with `s = a+ + a-`.
///
/// The target must be trace preserving; it need not satisfy `a+ - a- = 1`
/// literally, since only its trace condition enters.
pub fn regroup_star_qpd(
    a_plus: f64,
    g_pp: &ChoiChannel,
    g_pm: &ChoiChannel,
    a_minus: f64,
    g_mp: &ChoiChannel,
    g_mm: &ChoiChannel,
) -> Result<Qpd> {
    if !(a_plus.is_finite() && a_minus.is_finite()) || a_plus < 0.0 || a_minus < 0.0 {
        return Err(Error::InvalidArgument(
            "coefficients must be finite and nonnegative".into(),
        ));
    }
    let s = a_plus + a_minus;
    if s < 1.0 - 1e-12 {
        return Err(Error::InvalidArgument("a+ + a- must be at least 1".into()));
    }
    Instrument::new(vec![g_pp.clone(), g_pm.clone()])?;
    Instrument::new(vec![g_mp.clone(), g_mm.clone()])?;
    if g_pp.dims() != g_mp.dims() {
        return Err(Error::InvalidInstrument(
            "the two instruments act on different systems".into(),
        ));
    }
    let target = ChoiChannel::linear_combination(&[
        (a_plus, g_pp),
        (-a_plus, g_pm),
        (-a_minus, g_mp),
        (a_minus, g_mm),
    ])?;
    if !target.is_tp(PREDICATE_TOL) {
        return Err(Error::InvalidQpd(
            "the decomposed map is not trace preserving".into(),
        ));
    }
    let p_plus = ChoiChannel::linear_combination(&[(a_plus, g_pp), (a_minus, g_mm)])?
        .scaled(2.0 / (1.0 + s));
    let mut terms = vec![QpdTerm::single((1.0 + s) / 2.0, p_plus)];
    if s - 1.0 > 1e-12 {
        let p_minus = ChoiChannel::linear_combination(&[(a_plus, g_pm), (a_minus, g_mp)])?
            .scaled(2.0 / (s - 1.0));
        terms.push(QpdTerm::single(-(s - 1.0) / 2.0, p_minus));
    }
    Qpd::new(target, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChoiDims, Normalization};
    use crate::gates;
    use crate::qmat::{kron, ComplexMatrix};
    use crate::C64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_qubit_channel_costs_seven() {
        let id = ChoiChannel::identity(ChoiDims::local(2, 2)).unwrap();
        let q = hptp_to_cptp_qpd(&id).unwrap();
        assert_eq!(q.terms().len(), 2);
        assert!((q.terms()[0].coeff - 4.0).abs() < 1e-12);
        assert!((q.terms()[1].coeff + 3.0).abs() < 1e-12);
        assert!((q.l1_norm() - 7.0).abs() < 1e-12);
        let r = q.validate(1e-8);
        assert!(r.reconstruction_error < 1e-7);
        assert!(r.term_flags.iter().all(|f| f.cp && f.tp));
    }

    #[test]
    fn depolarizing_is_its_own_decomposition() {
        let dep = ChoiChannel::depolarizing(ChoiDims::bipartite(2, 2));
        let q = hptp_to_cptp_qpd(&dep).unwrap();
        assert_eq!(q.terms().len(), 1);
        assert!((q.l1_norm() - 1.0).abs() < 1e-12);
        assert!(q.validate(1e-8).reconstruction_error < 1e-12);
    }

    #[test]
    fn non_cp_hptp_map() {
        let d = ChoiDims::local(2, 2);
        let e = ChoiChannel::linear_combination(&[
            (2.0, &ChoiChannel::depolarizing(d)),
            (-1.0, &ChoiChannel::identity(d).unwrap()),
        ])
        .unwrap();
        assert!(!e.is_cp(1e-8));
        let q = hptp_to_cptp_qpd(&e).unwrap();
        let r = q.validate(1e-8);
        assert!(r.reconstruction_error < 1e-7);
        assert!(r.term_flags.iter().all(|f| f.cp && f.tp));
        let not_tp = ChoiChannel::identity(d).unwrap().scaled(0.5);
        assert!(hptp_to_cptp_qpd(&not_tp).is_err());
    }

    #[test]
    fn signed_measurement_splits_into_projectors() {
        // E = Pi_0 - Pi_1, Choi (|00><00| - |11><11|) / 2
        let mut choi = ComplexMatrix::zeros(4, 4);
        choi[(0, 0)] = C64::new(0.5, 0.0);
        choi[(3, 3)] = C64::new(-0.5, 0.0);
        let e = ChoiChannel::new(choi, ChoiDims::local(2, 2), Normalization::TraceOne).unwrap();
        let q = hp_to_cptn_qpd(&e).unwrap();
        assert_eq!(q.terms().len(), 2);
        assert!((q.terms()[0].coeff - 1.0).abs() < 1e-12);
        assert!((q.terms()[1].coeff + 1.0).abs() < 1e-12);
        let r = q.validate(1e-8);
        assert!(r.reconstruction_error < 1e-12);
        assert!(r.term_flags.iter().all(|f| f.cp && f.tn));
    }

    #[test]
    fn cp_map_gives_one_term() {
        let u = ChoiChannel::of_unitary(&gates::cnot(), ChoiDims::bipartite(2, 2)).unwrap();
        let q = hp_to_cptn_qpd(&u).unwrap();
        assert_eq!(q.terms().len(), 1);
        assert!((q.terms()[0].coeff - 1.0).abs() < 1e-10);
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let data = (0..n * n)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        ComplexMatrix::new(n, n, data).unwrap().hermitian_part()
    }

    /// Random HPTP map: a random Hermitian Choi corrected to the TP marginal.
    fn random_hptp(dims: ChoiDims, rng: &mut ChaCha8Rng) -> ChoiChannel {
        let n = dims.total();
        let h = random_hermitian(n, rng);
        let raw = ChoiChannel::new(h, dims, Normalization::TraceOne).unwrap();
        let marg = raw.input_marginal();
        let fix = &ComplexMatrix::identity(dims.d_in()).scale(1.0 / dims.d_in() as f64) - &marg;
        let corr = kron(
            &fix,
            &ComplexMatrix::identity(dims.d_out()).scale(1.0 / dims.d_out() as f64),
        );
        let io = crate::qmat::DimProfile::new(&[dims.a, dims.b, dims.ap, dims.bp]).unwrap();
        let corr = crate::qmat::permute_subsystems(&corr, &io, &[0, 2, 1, 3]).unwrap();
        ChoiChannel::new(raw.choi() + &corr, dims, Normalization::TraceOne).unwrap()
    }

    #[test]
    fn random_maps_always_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let shapes = [
            ChoiDims::local(2, 2),
            ChoiDims::local(2, 3),
            ChoiDims::bipartite(2, 2),
            ChoiDims::local(4, 2),
        ];
        for trial in 0..100 {
            let dims = shapes[trial % shapes.len()];
            let e = random_hptp(dims, &mut rng);
            assert!(e.is_tp(1e-10));
            let q = hptp_to_cptp_qpd(&e).unwrap();
            let r = q.validate(1e-8);
            assert!(r.reconstruction_error < 1e-7);
            assert!(r.term_flags.iter().all(|f| f.cp && f.tp), "trial {trial}");

            let h = ChoiChannel::new(
                random_hermitian(dims.total(), &mut rng),
                dims,
                Normalization::TraceOne,
            )
            .unwrap();
            let q = hp_to_cptn_qpd(&h).unwrap();
            let r = q.validate(1e-8);
            assert!(r.reconstruction_error < 1e-7);
            assert!(r.term_flags.iter().all(|f| f.cp && f.tn), "trial {trial}");
        }
    }

    #[test]
    fn regroup_degenerate_case_is_a_single_channel() {
        let d = ChoiDims::bipartite(2, 2);
        let e = ChoiChannel::depolarizing(d);
        let zero = ChoiChannel::zero(d);
        let q = regroup_star_qpd(1.0, &e, &zero, 0.0, &e, &zero).unwrap();
        assert_eq!(q.terms().len(), 1);
        assert!(q.terms()[0].branches[0].map.choi().distance(e.choi()) < 1e-15);
        assert!((q.l1_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn regroup_rejects_bad_inputs() {
        let d = ChoiDims::bipartite(2, 2);
        let e = ChoiChannel::depolarizing(d);
        let zero = ChoiChannel::zero(d);
        assert!(regroup_star_qpd(0.3, &e, &zero, 0.2, &e, &zero).is_err());
        assert!(regroup_star_qpd(1.0, &e, &e, 0.0, &e, &zero).is_err());
        assert!(regroup_star_qpd(-1.0, &e, &zero, 2.0, &e, &zero).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn hp_split_reconstructs(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dims = ChoiDims::bipartite(2, 2);
            let h = ChoiChannel::new(random_hermitian(16, &mut rng), dims, Normalization::TraceOne).unwrap();
            let q = hp_to_cptn_qpd(&h).unwrap();
            prop_assert!(q.validate(1e-8).reconstruction_error < 1e-7);
        }
    }
}
