use alloc::format;
use alloc::vec::Vec;

use super::{ChoiChannel, ChoiDims, PREDICATE_TOL};
use crate::{Error, Result};

/// One outcome of the operation implementing a QPD term, with its classical
/// post-processing weight (`None` means weight 1).
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub map: ChoiChannel,
    pub weight: Option<f64>,
}

impl Branch {
    pub fn weight_or_one(&self) -> f64 {
        self.weight.unwrap_or(1.0)
    }
}

/// A term `coeff * sum_j w_j G_j`, implemented by the instrument-like family
/// `(G_j)` with side weights `w_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct QpdTerm {
    pub coeff: f64,
    pub branches: Vec<Branch>,
}

impl QpdTerm {
    pub fn single(coeff: f64, map: ChoiChannel) -> Self {
        Self {
            coeff,
            branches: alloc::vec![Branch { map, weight: None }],
        }
    }

    pub fn weighted(coeff: f64, map: ChoiChannel, weight: f64) -> Self {
        Self {
            coeff,
            branches: alloc::vec![Branch {
                map,
                weight: Some(weight)
            }],
        }
    }

    /// `sum_j w_j G_j`.
    pub fn effective_map(&self) -> ChoiChannel {
        let terms: Vec<(f64, &ChoiChannel)> = self
            .branches
            .iter()
            .map(|b| (b.weight_or_one(), &b.map))
            .collect();
        ChoiChannel::linear_combination(&terms).expect("validated dims")
    }

    /// `sum_j G_j`, the physical operation when outcomes are discarded.
    pub fn implemented_map(&self) -> ChoiChannel {
        let terms: Vec<(f64, &ChoiChannel)> = self.branches.iter().map(|b| (1.0, &b.map)).collect();
        ChoiChannel::linear_combination(&terms).expect("validated dims")
    }
}

/// A quasiprobability decomposition `target = sum_i a_i sum_j w_ij G_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct Qpd {
    target: ChoiChannel,
    terms: Vec<QpdTerm>,
}

impl Qpd {
    /// Checks shapes and weight ranges; the reconstruction itself is
    /// reported by [`qpd_validate`].
    pub fn new(target: ChoiChannel, terms: Vec<QpdTerm>) -> Result<Self> {
        let dims = target.dims();
        if terms.is_empty() {
            return Err(Error::InvalidQpd("no terms".into()));
        }
        for (i, t) in terms.iter().enumerate() {
            if !t.coeff.is_finite() {
                return Err(Error::InvalidQpd(format!(
                    "term {i} has a non-finite coefficient"
                )));
            }
            if t.branches.is_empty() {
                return Err(Error::InvalidQpd(format!("term {i} has no branches")));
            }
            for b in &t.branches {
                if b.map.dims() != dims {
                    return Err(Error::InvalidQpd(format!(
                        "term {i} acts on {:?}, target on {dims:?}",
                        b.map.dims()
                    )));
                }
                if let Some(w) = b.weight {
                    if !(w.is_finite() && w.abs() <= 1.0 + 1e-12) {
                        return Err(Error::InvalidQpd(format!(
                            "term {i} has side weight {w} outside [-1, 1]"
                        )));
                    }
                }
            }
        }
        Ok(Self { target, terms })
    }

    pub fn target(&self) -> &ChoiChannel {
        &self.target
    }

    pub fn terms(&self) -> &[QpdTerm] {
        &self.terms
    }

    pub fn dims(&self) -> ChoiDims {
        self.target.dims()
    }

    /// `sum_i |a_i|`.
    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    /// `sum_i a_i sum_j w_ij G_ij`.
    pub fn reconstruct(&self) -> ChoiChannel {
        let maps: Vec<ChoiChannel> = self.terms.iter().map(|t| t.effective_map()).collect();
        let terms: Vec<(f64, &ChoiChannel)> = self
            .terms
            .iter()
            .zip(&maps)
            .map(|(t, m)| (t.coeff, m))
            .collect();
        ChoiChannel::linear_combination(&terms).expect("validated dims")
    }

    pub fn validate(&self, tol: f64) -> QpdReport {
        let err = self.reconstruct().choi().distance(self.target.choi());
        let term_flags = self
            .terms
            .iter()
            .map(|t| {
                let implemented = t.implemented_map();
                TermFlags {
                    cp: t.branches.iter().all(|b| b.map.is_cp(tol)),
                    tp: implemented.is_tp(tol),
                    tn: implemented.is_tn(tol),
                    ppt: t.branches.iter().all(|b| b.map.is_ppt_choi(tol)),
                }
            })
            .collect();
        QpdReport {
            reconstruction_error: err,
            l1: self.l1_norm(),
            term_flags,
        }
    }
}

/// Predicate results for one term; `tp` and `tn` refer to the sum of its
/// branches, `cp` and `ppt` hold for every branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TermFlags {
    pub cp: bool,
    pub tp: bool,
    pub tn: bool,
    pub ppt: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QpdReport {
    /// Frobenius distance of the trace-one Choi operators.
    pub reconstruction_error: f64,
    pub l1: f64,
    pub term_flags: Vec<TermFlags>,
}

impl QpdReport {
    /// Reconstruction within `tol` and every term CP and TN.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.reconstruction_error <= tol && self.term_flags.iter().all(|f| f.cp && f.tn)
    }
}

/// [`Qpd::validate`] at the default predicate tolerance.
pub fn qpd_validate(q: &Qpd) -> QpdReport {
    q.validate(PREDICATE_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;
    use alloc::vec;

    #[test]
    fn identity_decomposes_as_itself() {
        let id = ChoiChannel::identity(ChoiDims::bipartite(2, 2)).unwrap();
        let q = Qpd::new(id.clone(), vec![QpdTerm::single(1.0, id)]).unwrap();
        let r = qpd_validate(&q);
        assert_eq!(r.reconstruction_error, 0.0);
        assert_eq!(r.l1, 1.0);
        assert!(r.is_valid(1e-7));
        assert_eq!(
            r.term_flags[0],
            TermFlags {
                cp: true,
                tp: true,
                tn: true,
                ppt: true
            }
        );
    }

    #[test]
    fn perturbed_coefficient_shows_in_error() {
        let u = ChoiChannel::of_unitary(&gates::cnot(), ChoiDims::bipartite(2, 2)).unwrap();
        let q = Qpd::new(u.clone(), vec![QpdTerm::single(1.01, u.clone())]).unwrap();
        let r = qpd_validate(&q);
        let expect = 0.01 * u.choi().frobenius_norm();
        assert!((r.reconstruction_error - expect).abs() < 1e-12);
    }

    #[test]
    fn side_weights_enter_linearly() {
        let p0 = crate::qmat::ComplexMatrix::outer(&crate::qmat::ComplexMatrix::basis(2, 0));
        let p1 = crate::qmat::ComplexMatrix::outer(&crate::qmat::ComplexMatrix::basis(2, 1));
        let d = ChoiDims::local(2, 2);
        let m0 = ChoiChannel::of_kraus(&[p0], d).unwrap();
        let m1 = ChoiChannel::of_kraus(&[p1], d).unwrap();
        let target = ChoiChannel::linear_combination(&[(1.0, &m0), (-1.0, &m1)]).unwrap();
        let term = QpdTerm {
            coeff: 1.0,
            branches: vec![
                Branch {
                    map: m0,
                    weight: Some(1.0),
                },
                Branch {
                    map: m1,
                    weight: Some(-1.0),
                },
            ],
        };
        let q = Qpd::new(target, vec![term]).unwrap();
        let r = qpd_validate(&q);
        assert!(r.reconstruction_error < 1e-15);
        assert!(r.term_flags[0].tp && r.term_flags[0].cp);
    }

    #[test]
    fn rejects_bad_weights_and_dims() {
        let id = ChoiChannel::identity(ChoiDims::local(2, 2)).unwrap();
        assert!(Qpd::new(id.clone(), vec![QpdTerm::weighted(1.0, id.clone(), 1.5)]).is_err());
        let other = ChoiChannel::identity(ChoiDims::bipartite(2, 2)).unwrap();
        assert!(Qpd::new(id.clone(), vec![QpdTerm::single(1.0, other)]).is_err());
        assert!(Qpd::new(id, vec![]).is_err());
    }
}
