//! Superoperators in Choi representation.
//!
//! A [`ChoiChannel`] stores the trace-one Choi operator
//! `J(E) = (id ⊗ E)(|Ψ><Ψ|)` of a map `AB -> A'B'` with the tensor factors
//! ordered `(A, A', B, B')`. Single-party maps use `B = B' = 1`.

mod construct;
mod instrument;
mod qpd;

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent on f64 only with std or newer toolchains
use num_traits::Float;

use crate::qmat::{
    herm_eig, kron, partial_trace, partial_transpose, permute_subsystems, ComplexMatrix, DimProfile,
};
use crate::{Error, Result, C64};

pub use construct::{hp_to_cptn_qpd, hptp_to_cptp_qpd, regroup_star_qpd};
pub use instrument::Instrument;
pub use qpd::{qpd_validate, Branch, Qpd, QpdReport, QpdTerm, TermFlags};

/// Default tolerance of the membership predicates.
pub const PREDICATE_TOL: f64 = 1e-8;

/// Subsystem dimensions of a bipartite map `AB -> A'B'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChoiDims {
    pub a: usize,
    pub ap: usize,
    pub b: usize,
    pub bp: usize,
}

impl ChoiDims {
    pub fn new(a: usize, ap: usize, b: usize, bp: usize) -> Result<Self> {
        if [a, ap, b, bp].contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "zero dimension in ({a}, {ap}, {b}, {bp})"
            )));
        }
        Ok(Self { a, ap, b, bp })
    }

    /// A single-party map `A -> A'`.
    pub fn local(a: usize, ap: usize) -> Self {
        Self { a, ap, b: 1, bp: 1 }
    }

    /// Bipartite map with `A' = A` and `B' = B`.
    pub fn bipartite(a: usize, b: usize) -> Self {
        Self { a, ap: a, b, bp: b }
    }

    pub fn d_in(&self) -> usize {
        self.a * self.b
    }

    pub fn d_out(&self) -> usize {
        self.ap * self.bp
    }

    pub fn total(&self) -> usize {
        self.d_in() * self.d_out()
    }

    /// Profile of the Choi operator, `(A, A', B, B')`.
    pub fn profile(&self) -> DimProfile {
        DimProfile::new(&[self.a, self.ap, self.b, self.bp]).expect("nonzero dims")
    }

    pub fn in_profile(&self) -> DimProfile {
        DimProfile::new(&[self.a, self.b]).expect("nonzero dims")
    }

    pub fn out_profile(&self) -> DimProfile {
        DimProfile::new(&[self.ap, self.bp]).expect("nonzero dims")
    }
}

/// Normalization convention of a Choi operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// `tr J = 1` for trace-preserving maps (canonical).
    TraceOne,
    /// `tr_out J = 1_in` for trace-preserving maps.
    TraceDin,
}

/// Hermitian-preserving superoperator in Choi representation.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiChannel {
    choi: ComplexMatrix,
    dims: ChoiDims,
}

impl ChoiChannel {
    /// Wraps a Choi operator given in the stated normalization; it is stored
    /// trace-one normalized.
    pub fn new(choi: ComplexMatrix, dims: ChoiDims, norm: Normalization) -> Result<Self> {
        if !choi.is_square() || choi.rows() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "Choi operator of size {}x{} does not match dims {:?}",
                choi.rows(),
                choi.cols(),
                dims
            )));
        }
        choi.ensure_hermitian()?;
        let choi = match norm {
            Normalization::TraceOne => choi,
            Normalization::TraceDin => choi.scale(1.0 / dims.d_in() as f64),
        };
        Ok(Self { choi, dims })
    }

    /// The all-zero map.
    pub fn zero(dims: ChoiDims) -> Self {
        Self {
            choi: ComplexMatrix::zeros(dims.total(), dims.total()),
            dims,
        }
    }

    /// Unitary channel `rho -> U rho U^dagger`; `u` maps `(A, B)` to `(A', B')`.
    pub fn of_unitary(u: &ComplexMatrix, dims: ChoiDims) -> Result<Self> {
        let dev = u.unitarity_deviation();
        if dev > 1e-8 {
            return Err(Error::NotUnitary(dev));
        }
        Self::of_kraus(core::slice::from_ref(u), dims)
    }

    /// Completely positive map with the given Kraus operators (`d_out x d_in`).
    pub fn of_kraus(kraus: &[ComplexMatrix], dims: ChoiDims) -> Result<Self> {
        let d_in = dims.d_in();
        let d_out = dims.d_out();
        let n = d_in * d_out;
        let mut j = ComplexMatrix::zeros(n, n);
        for k in kraus {
            if k.rows() != d_out || k.cols() != d_in {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {}x{} does not map dimension {d_in} to {d_out}",
                    k.rows(),
                    k.cols()
                )));
            }
            // |K>> = sum_i |i> ⊗ K|i>, ordered (in, out)
            let mut vec = ComplexMatrix::zeros(n, 1);
            for i in 0..d_in {
                for o in 0..d_out {
                    vec[(i * d_out + o, 0)] = k[(o, i)];
                }
            }
            j = &j + &ComplexMatrix::outer(&vec);
        }
        let j = j.scale(1.0 / d_in as f64);
        let io = DimProfile::new(&[dims.a, dims.b, dims.ap, dims.bp])?;
        let choi = permute_subsystems(&j, &io, &[0, 2, 1, 3])?;
        Ok(Self { choi, dims })
    }

    /// Identity channel on `(A, B)`.
    pub fn identity(dims: ChoiDims) -> Result<Self> {
        if dims.a != dims.ap || dims.b != dims.bp {
            return Err(Error::InvalidArgument(format!(
                "identity needs A = A' and B = B', got {dims:?}"
            )));
        }
        Self::of_unitary(&ComplexMatrix::identity(dims.d_in()), dims)
    }

    /// Fully depolarizing channel `rho -> tr(rho) 1/d_out`.
    pub fn depolarizing(dims: ChoiDims) -> Self {
        let n = dims.total();
        Self {
            choi: ComplexMatrix::identity(n).scale(1.0 / n as f64),
            dims,
        }
    }

    /// Product `F_A ⊗ G_B` of two single-party maps.
    pub fn local_product(fa: &ChoiChannel, gb: &ChoiChannel) -> Result<Self> {
        if fa.dims.b != 1 || fa.dims.bp != 1 || gb.dims.b != 1 || gb.dims.bp != 1 {
            return Err(Error::InvalidArgument(
                "local_product expects single-party maps".into(),
            ));
        }
        let dims = ChoiDims::new(fa.dims.a, fa.dims.ap, gb.dims.a, gb.dims.ap)?;
        Ok(Self {
            choi: kron(&fa.choi, &gb.choi),
            dims,
        })
    }

    /// `sum_k c_k E_k` over maps with identical dims.
    pub fn linear_combination(terms: &[(f64, &ChoiChannel)]) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?;
        let dims = first.1.dims;
        let mut acc = ComplexMatrix::zeros(dims.total(), dims.total());
        for (c, ch) in terms {
            if ch.dims != dims {
                return Err(Error::DimensionMismatch(format!(
                    "{:?} vs {:?}",
                    ch.dims, dims
                )));
            }
            for (a, b) in acc.data_mut().iter_mut().zip(ch.choi.data()) {
                *a += b * *c;
            }
        }
        Ok(Self { choi: acc, dims })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            choi: self.choi.scale(s),
            dims: self.dims,
        }
    }

    pub fn dims(&self) -> ChoiDims {
        self.dims
    }

    /// Trace-one normalized Choi operator ordered `(A, A', B, B')`.
    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    /// Choi operator in the requested normalization.
    pub fn choi_normalized(&self, norm: Normalization) -> ComplexMatrix {
        match norm {
            Normalization::TraceOne => self.choi.clone(),
            Normalization::TraceDin => self.choi.scale(self.dims.d_in() as f64),
        }
    }

    /// Choi operator reordered to `(A, B, A', B')`, i.e. (input, output).
    pub fn choi_in_out(&self) -> ComplexMatrix {
        permute_subsystems(&self.choi, &self.dims.profile(), &[0, 2, 1, 3])
            .expect("valid permutation")
    }

    /// `tr_out J`, an operator on `(A, B)`.
    pub fn input_marginal(&self) -> ComplexMatrix {
        partial_trace(&self.choi, &self.dims.profile(), &[0, 2]).expect("valid subsystems")
    }

    /// `J^{T_{BB'}}`.
    pub fn choi_partial_transpose(&self) -> ComplexMatrix {
        partial_transpose(&self.choi, &self.dims.profile(), &[2, 3]).expect("valid subsystems")
    }

    /// Applies the map: `E(rho) = d_in tr_in[(rho^T ⊗ 1) J]`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d_in = self.dims.d_in();
        let d_out = self.dims.d_out();
        if !rho.is_square() || rho.rows() != d_in {
            return Err(Error::DimensionMismatch(format!(
                "input of size {}x{} for a map on dimension {d_in}",
                rho.rows(),
                rho.cols()
            )));
        }
        let j = self.choi_in_out();
        let n = d_in * d_out;
        let mut out = ComplexMatrix::zeros(d_out, d_out);
        for i in 0..d_in {
            for k in 0..d_in {
                let r = rho[(i, k)];
                if r == C64::new(0.0, 0.0) {
                    continue;
                }
                let r = r * d_in as f64;
                for o in 0..d_out {
                    let row = &j.data()
                        [(i * d_out + o) * n + k * d_out..(i * d_out + o) * n + (k + 1) * d_out];
                    for (p, &x) in row.iter().enumerate() {
                        out[(o, p)] += r * x;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Kraus operators of a CP map (eigenvalues of `J` below `tol` dropped).
    pub fn kraus(&self, tol: f64) -> Result<Vec<ComplexMatrix>> {
        let d_in = self.dims.d_in();
        let d_out = self.dims.d_out();
        let e = herm_eig(&self.choi_in_out())?;
        if e.min() < -tol.max(1e-12) {
            return Err(Error::InvalidChannel(format!(
                "map is not completely positive (min eig {:.3e})",
                e.min()
            )));
        }
        let mut out = Vec::new();
        for (k, &w) in e.values.iter().enumerate() {
            if w <= tol {
                continue;
            }
            let s = (d_in as f64 * w).sqrt();
            let mut op = ComplexMatrix::zeros(d_out, d_in);
            for i in 0..d_in {
                for o in 0..d_out {
                    op[(o, i)] = e.vectors[(i * d_out + o, k)] * s;
                }
            }
            out.push(op);
        }
        Ok(out)
    }

    fn min_eig(m: &ComplexMatrix) -> f64 {
        herm_eig(m).map(|e| e.min()).unwrap_or(f64::NEG_INFINITY)
    }

    /// Completely positive: `J >= -tol`.
    pub fn is_cp(&self, tol: f64) -> bool {
        Self::min_eig(&self.choi) >= -tol
    }

    /// Trace preserving: `|| tr_out J - 1/d_in ||_F <= tol`.
    pub fn is_tp(&self, tol: f64) -> bool {
        let d = self.dims.d_in();
        let m = self.input_marginal();
        m.distance(&ComplexMatrix::identity(d).scale(1.0 / d as f64)) <= tol
    }

    /// Trace non-increasing: `tr_out J <= 1/d_in + tol`.
    pub fn is_tn(&self, tol: f64) -> bool {
        let d = self.dims.d_in();
        let gap = &self.input_marginal() - &ComplexMatrix::identity(d).scale(1.0 / d as f64);
        herm_eig(&gap.hermitian_part())
            .map(|e| e.max() <= tol)
            .unwrap_or(false)
    }

    /// Hermitian preserving: `J` Hermitian within `tol`.
    pub fn is_hp(&self, tol: f64) -> bool {
        self.choi.is_hermitian(tol)
    }

    /// PPT Choi operator: `J^{T_{BB'}} >= -tol`.
    pub fn is_ppt_choi(&self, tol: f64) -> bool {
        Self::min_eig(&self.choi_partial_transpose()) >= -tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;

    fn two_qubit(u: &ComplexMatrix) -> ChoiChannel {
        ChoiChannel::of_unitary(u, ChoiDims::bipartite(2, 2)).unwrap()
    }

    #[test]
    fn identity_qubit_choi_is_bell_projector() {
        let id = ChoiChannel::identity(ChoiDims::local(2, 2)).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let bell = ComplexMatrix::column(&[
            C64::new(h, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(h, 0.0),
        ]);
        assert!(id.choi().distance(&ComplexMatrix::outer(&bell)) < 1e-15);
    }

    #[test]
    fn unitary_choi_is_rank_one_with_unit_trace() {
        for u in [gates::cnot(), gates::swap(), gates::zz(0.3)] {
            let ch = two_qubit(&u);
            assert!((ch.choi().trace() - C64::new(1.0, 0.0)).norm() < 1e-14);
            let e = herm_eig(ch.choi()).unwrap();
            assert!((e.values[0] - 1.0).abs() < 1e-12);
            assert!(e.values[1].abs() < 1e-12);
            assert!(ch.is_tp(1e-12));
        }
        let t = ChoiChannel::of_unitary(&gates::toffoli(), ChoiDims::bipartite(2, 4)).unwrap();
        let marg = t.input_marginal();
        assert!(marg.distance(&ComplexMatrix::identity(8).scale(0.125)) < 1e-14);
    }

    #[test]
    fn rejects_non_unitary() {
        let m = ComplexMatrix::identity(4).scale(1.1);
        assert!(matches!(
            ChoiChannel::of_unitary(&m, ChoiDims::bipartite(2, 2)),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn apply_examples() {
        let id = ChoiChannel::identity(ChoiDims::bipartite(2, 2)).unwrap();
        let rho = ComplexMatrix::new(
            4,
            4,
            (0..16)
                .map(|k| C64::new((k % 5) as f64, (k % 3) as f64 - 1.0))
                .collect(),
        )
        .unwrap()
        .hermitian_part();
        assert!(id.apply(&rho).unwrap().distance(&rho) < 1e-13);

        let cnot = two_qubit(&gates::cnot());
        let ten = ComplexMatrix::outer(&ComplexMatrix::basis(4, 2));
        let eleven = ComplexMatrix::outer(&ComplexMatrix::basis(4, 3));
        assert!(cnot.apply(&ten).unwrap().distance(&eleven) < 1e-14);

        let dep = ChoiChannel::depolarizing(ChoiDims::bipartite(2, 2));
        let out = dep.apply(&ten).unwrap();
        assert!(out.distance(&ComplexMatrix::identity(4).scale(0.25)) < 1e-15);
        assert!(dep.apply(&ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn kraus_round_trip() {
        let ch = two_qubit(&gates::cnot());
        let k = ch.kraus(1e-12).unwrap();
        assert_eq!(k.len(), 1);
        let back = ChoiChannel::of_kraus(&k, ch.dims()).unwrap();
        assert!(back.choi().distance(ch.choi()) < 1e-12);
    }

    #[test]
    fn predicates_on_named_channels() {
        // identity on A ⊗ B with one qubit each: product of local identities, PPT
        let id = ChoiChannel::identity(ChoiDims::bipartite(2, 2)).unwrap();
        assert!(id.is_cp(1e-10) && id.is_tp(1e-10) && id.is_ppt_choi(1e-10));

        // a wire from A to B': maximally entangled across the cut
        let wire = ChoiChannel::of_unitary(
            &ComplexMatrix::identity(2),
            ChoiDims::new(2, 1, 1, 2).unwrap(),
        )
        .unwrap();
        assert!(wire.is_cp(1e-10) && wire.is_tp(1e-10));
        assert!(!wire.is_ppt_choi(1e-10));
        let w = herm_eig(&wire.choi_partial_transpose()).unwrap();
        assert!((w.min() + 0.5).abs() < 1e-12);

        let sw = two_qubit(&gates::swap());
        assert!(!sw.is_ppt_choi(1e-10));

        let dep = ChoiChannel::depolarizing(ChoiDims::bipartite(2, 2));
        assert!(dep.is_cp(1e-10) && dep.is_tp(1e-10) && dep.is_ppt_choi(1e-10) && dep.is_tn(1e-10));
    }

    #[test]
    fn entangling_unitaries_are_not_ppt() {
        let pi = core::f64::consts::PI;
        for u in [
            gates::cnot(),
            gates::cz(),
            gates::swap(),
            gates::zz(pi / 8.0),
            gates::zz(pi / 4.0),
        ] {
            assert!(!two_qubit(&u).is_ppt_choi(1e-8));
        }
        let h = gates::hadamard();
        let s = gates::pauli_rotation(&gates::pauli_z(), 0.3);
        for u in [
            kron(&h, &s),
            kron(&gates::pauli_x(), &gates::pauli_y()),
            ComplexMatrix::identity(4),
        ] {
            assert!(two_qubit(&u).is_ppt_choi(1e-8));
        }
    }

    #[test]
    fn trace_non_increasing() {
        let p0 = ComplexMatrix::outer(&ComplexMatrix::basis(2, 0));
        let meas = ChoiChannel::of_kraus(&[p0], ChoiDims::local(2, 2)).unwrap();
        assert!(meas.is_cp(1e-10) && meas.is_tn(1e-10) && !meas.is_tp(1e-10));
        let doubled = meas.scaled(2.5);
        assert!(!doubled.is_tn(1e-10));
    }

    #[test]
    fn normalization_conversion() {
        let id = ChoiChannel::identity(ChoiDims::local(2, 2)).unwrap();
        let raw = id.choi_normalized(Normalization::TraceDin);
        assert!((raw.trace() - C64::new(2.0, 0.0)).norm() < 1e-14);
        let back = ChoiChannel::new(raw, id.dims(), Normalization::TraceDin).unwrap();
        assert_eq!(back.choi(), id.choi());
        let bad = ComplexMatrix::from_real(4, 4, &[1.0; 16]).unwrap();
        assert!(ChoiChannel::new(bad, ChoiDims::local(2, 3), Normalization::TraceOne).is_err());
    }

    #[test]
    fn local_products_match_kron_of_unitaries() {
        let h = ChoiChannel::of_unitary(&gates::hadamard(), ChoiDims::local(2, 2)).unwrap();
        let x = ChoiChannel::of_unitary(&gates::pauli_x(), ChoiDims::local(2, 2)).unwrap();
        let prod = ChoiChannel::local_product(&h, &x).unwrap();
        let direct = two_qubit(&kron(&gates::hadamard(), &gates::pauli_x()));
        assert!(prod.choi().distance(direct.choi()) < 1e-14);
    }
}
