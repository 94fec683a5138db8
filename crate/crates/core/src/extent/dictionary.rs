use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::channel::{Branch, ChoiChannel, ChoiDims, QpdTerm, PREDICATE_TOL};
use crate::gates;
use crate::qmat::ComplexMatrix;
use crate::{Error, Result, C64};

/// One admissible operation: a family of CP maps whose sum is trace
/// nonincreasing, each outcome carrying a side weight.
#[derive(Clone, Debug, PartialEq)]
pub struct DictEntry {
    pub label: String,
    pub branches: Vec<Branch>,
}

impl DictEntry {
    /// `sum_j w_j G_j`.
    pub fn effective_map(&self) -> ChoiChannel {
        QpdTerm {
            coeff: 1.0,
            branches: self.branches.clone(),
        }
        .effective_map()
    }

    fn implemented_map(&self) -> ChoiChannel {
        QpdTerm {
            coeff: 1.0,
            branches: self.branches.clone(),
        }
        .implemented_map()
    }
}

/// A finite decomposition set. All entries share the dims (and hence the
/// bipartition) of the targets they are used for.
#[derive(Clone, Debug, PartialEq)]
pub struct Dictionary {
    name: String,
    dims: ChoiDims,
    entries: Vec<DictEntry>,
}

impl Dictionary {
    /// Checks that every branch is CP, the branches of an entry sum to a TN
    /// map and all dims agree.
    pub fn new(name: impl Into<String>, dims: ChoiDims, entries: Vec<DictEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("empty dictionary".into()));
        }
        for e in &entries {
            if e.branches.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "entry {} has no branches",
                    e.label
                )));
            }
            for b in &e.branches {
                if b.map.dims() != dims {
                    return Err(Error::DimensionMismatch(format!(
                        "entry {} acts on {:?}",
                        e.label,
                        b.map.dims()
                    )));
                }
                if !b.map.is_cp(PREDICATE_TOL) {
                    return Err(Error::InvalidChannel(format!(
                        "entry {} is not completely positive",
                        e.label
                    )));
                }
                if let Some(w) = b.weight {
                    if !(w.is_finite() && w.abs() <= 1.0 + 1e-12) {
                        return Err(Error::InvalidArgument(format!(
                            "entry {} has side weight {w}",
                            e.label
                        )));
                    }
                }
            }
            if !e.implemented_map().is_tn(PREDICATE_TOL) {
                return Err(Error::InvalidChannel(format!(
                    "entry {} is not trace nonincreasing",
                    e.label
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            dims,
            entries,
        })
    }

    /// All products `F_A ⊗ G_B` of two single-party families; outcomes of
    /// a product pair up the outcomes of its factors and multiply weights.
    pub fn local_products(
        name: impl Into<String>,
        a: &[DictEntry],
        b: &[DictEntry],
    ) -> Result<Self> {
        let (fa, fb) = match (a.first(), b.first()) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(Error::InvalidArgument("empty local family".into())),
        };
        let da = fa.branches[0].map.dims();
        let db = fb.branches[0].map.dims();
        let dims = ChoiDims::new(da.a, da.ap, db.a, db.ap)?;
        let mut entries = Vec::with_capacity(a.len() * b.len());
        for ea in a {
            for eb in b {
                let mut branches = Vec::with_capacity(ea.branches.len() * eb.branches.len());
                for ba in &ea.branches {
                    for bb in &eb.branches {
                        let weight = match (ba.weight, bb.weight) {
                            (None, None) => None,
                            (x, y) => Some(x.unwrap_or(1.0) * y.unwrap_or(1.0)),
                        };
                        branches.push(Branch {
                            map: ChoiChannel::local_product(&ba.map, &bb.map)?,
                            weight,
                        });
                    }
                }
                entries.push(DictEntry {
                    label: format!("{}|{}", ea.label, eb.label),
                    branches,
                });
            }
        }
        Self::new(name, dims, entries)
    }

    /// Two-qubit local operations with classical side information: products
    /// of the 49 single-qubit operations of [`local_qubit_operations`].
    pub fn lo_star_two_qubit() -> Self {
        let local = local_qubit_operations();
        Self::local_products("lo-star-2q", &local, &local).expect("valid local operations")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dims(&self) -> ChoiDims {
        self.dims
    }

    pub fn entries(&self) -> &[DictEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn conj_entry(label: impl Into<String>, u: &ComplexMatrix) -> DictEntry {
    let map = ChoiChannel::of_unitary(u, ChoiDims::local(2, 2)).expect("unitary");
    DictEntry {
        label: label.into(),
        branches: vec![Branch { map, weight: None }],
    }
}

fn pauli_eigenstates() -> [(&'static str, ComplexMatrix); 6] {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let v = |a: C64, b: C64| ComplexMatrix::column(&[a, b]);
    let r = |x: f64| C64::new(x, 0.0);
    [
        ("+X", v(r(h), r(h))),
        ("-X", v(r(h), r(-h))),
        ("+Y", v(r(h), C64::new(0.0, h))),
        ("-Y", v(r(h), C64::new(0.0, -h))),
        ("+Z", v(r(1.0), r(0.0))),
        ("-Z", v(r(0.0), r(1.0))),
    ]
}

/// Single-qubit operations used by [`Dictionary::lo_star_two_qubit`]:
/// conjugation by `I, X, Y, Z` and by `exp(±iπ/4 P)` for `P = X, Y, Z`;
/// the Pauli measurements with outcome weights `±1`; and the 36
/// measure-and-prepare maps `rho -> <v|rho|v> |w><w|` over Pauli
/// eigenstates `v, w`.
pub fn local_qubit_operations() -> Vec<DictEntry> {
    let d = ChoiDims::local(2, 2);
    let paulis = [
        ("X", gates::pauli_x()),
        ("Y", gates::pauli_y()),
        ("Z", gates::pauli_z()),
    ];
    let mut out = vec![conj_entry("I", &gates::identity(1))];
    for (name, p) in &paulis {
        out.push(conj_entry(*name, p));
    }
    for (name, p) in &paulis {
        for (sign, angle) in [
            ("+", core::f64::consts::FRAC_PI_4),
            ("-", -core::f64::consts::FRAC_PI_4),
        ] {
            out.push(conj_entry(
                format!("R{sign}{name}"),
                &gates::pauli_rotation(p, angle),
            ));
        }
    }
    let states = pauli_eigenstates();
    for k in 0..3 {
        let (plus, minus) = (&states[2 * k].1, &states[2 * k + 1].1);
        let branch = |v: &ComplexMatrix, w: f64| Branch {
            map: ChoiChannel::of_kraus(&[ComplexMatrix::outer(v)], d).expect("projector"),
            weight: Some(w),
        };
        out.push(DictEntry {
            label: format!("M{}", paulis[k].0),
            branches: vec![branch(plus, 1.0), branch(minus, -1.0)],
        });
    }
    for (lv, v) in &states {
        for (lw, w) in &states {
            let kraus = w.matmul(&v.adjoint());
            let map = ChoiChannel::of_kraus(&[kraus], d).expect("rank-one Kraus");
            out.push(DictEntry {
                label: format!("P{lv}{lw}"),
                branches: vec![Branch { map, weight: None }],
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_family_has_expected_size_and_is_valid() {
        let local = local_qubit_operations();
        assert_eq!(local.len(), 49);
        let dict = Dictionary::new("local", ChoiDims::local(2, 2), local).unwrap();
        assert_eq!(dict.len(), 49);
    }

    #[test]
    fn product_weights_multiply() {
        let local = local_qubit_operations();
        let mz: Vec<DictEntry> = local.iter().filter(|e| e.label == "MZ").cloned().collect();
        let d = Dictionary::local_products("zz", &mz, &mz).unwrap();
        let weights: Vec<f64> = d.entries()[0]
            .branches
            .iter()
            .map(|b| b.weight_or_one())
            .collect();
        assert_eq!(weights, vec![1.0, -1.0, -1.0, 1.0]);
        // Z⊗Z measurement: effective map has Choi trace 0
        assert!(d.entries()[0].effective_map().choi().trace().norm() < 1e-14);
    }

    #[test]
    fn rejects_non_tn_entries() {
        let id = ChoiChannel::identity(ChoiDims::local(2, 2)).unwrap();
        let e = DictEntry {
            label: "2I".into(),
            branches: vec![Branch {
                map: id.scaled(2.0),
                weight: None,
            }],
        };
        assert!(Dictionary::new("bad", id.dims(), vec![e]).is_err());
    }
}
