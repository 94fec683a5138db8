//! Block semidefinite programs in primal standard form
//!
//! ```text
//! minimize    sum_k c_k v_k
//! subject to  sum_k a_ik v_k = b_i      for every constraint i
//!             each PSD block X_b is positive semidefinite
//!             each nonneg scalar is >= 0, free scalars unrestricted
//! ```
//!
//! where the scalar variables `v_k` are the upper-triangle entries `X_b[r, c]`
//! (`r <= c`) of the symmetric PSD blocks, the nonnegative scalars and the
//! free scalars. A coefficient on `X_b[r, c]` with `r != c` therefore pairs
//! with the matrix `A[r, c] = A[c, r] = a / 2` in trace form.
//!
//! Complex Hermitian variables are carried by realified blocks, see
//! [`HermitianBlock`] and [`realify`].

pub(crate) mod dense;
mod ipm;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::qmat::ComplexMatrix;
use crate::{Error, Result, C64};

pub use ipm::solve;

/// Largest admissible PSD block (after realification).
pub const MAX_BLOCK_SIZE: usize = 128;
/// Largest admissible number of equality constraints.
pub const MAX_CONSTRAINTS: usize = 5000;
/// Largest admissible number of nonnegative plus free scalars.
pub const MAX_SCALARS: usize = 5000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    /// Symmetric `size x size` matrix constrained PSD.
    Psd,
    /// `size` scalars constrained nonnegative.
    Nonneg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockKind,
    pub size: usize,
}

/// A scalar variable of the problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// Entry `(row, col)` of a PSD block; `(r, c)` and `(c, r)` are the same variable.
    Psd {
        block: usize,
        row: usize,
        col: usize,
    },
    Nonneg {
        block: usize,
        index: usize,
    },
    Free(usize),
}

impl Var {
    pub fn psd(block: usize, row: usize, col: usize) -> Self {
        Var::Psd {
            block,
            row: row.min(col),
            col: row.max(col),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(Var, f64)>,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<Block>,
    pub free_count: usize,
    pub objective: Vec<(Var, f64)>,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, kind: BlockKind, size: usize) -> usize {
        self.blocks.push(Block { kind, size });
        self.blocks.len() - 1
    }

    /// Adds `count` free scalars and returns the index of the first.
    pub fn add_free(&mut self, count: usize) -> usize {
        let start = self.free_count;
        self.free_count += count;
        start
    }

    /// Adds a realified PSD block carrying an `n x n` Hermitian matrix.
    pub fn add_hermitian_block(&mut self, n: usize) -> HermitianBlock {
        HermitianBlock {
            block: self.add_block(BlockKind::Psd, 2 * n),
            n,
        }
    }

    /// Adds `n^2` free scalars carrying an unrestricted Hermitian matrix.
    pub fn add_hermitian_free(&mut self, n: usize) -> HermitianFree {
        HermitianFree {
            start: self.add_free(n * n),
            n,
        }
    }

    pub fn add_objective(&mut self, terms: impl IntoIterator<Item = (Var, f64)>) {
        self.objective.extend(terms);
    }

    pub fn add_constraint(&mut self, terms: Vec<(Var, f64)>, rhs: f64) -> usize {
        self.constraints.push(Constraint { terms, rhs });
        self.constraints.len() - 1
    }

    /// Checks variable references, finiteness and the size caps.
    pub fn validate(&self) -> Result<()> {
        if self.constraints.is_empty() {
            return Err(Error::MalformedProblem("no constraints".into()));
        }
        if self.constraints.len() > MAX_CONSTRAINTS {
            return Err(Error::SizeCap(format!(
                "{} constraints exceed the cap of {MAX_CONSTRAINTS}",
                self.constraints.len()
            )));
        }
        let mut scalars = self.free_count;
        for (k, b) in self.blocks.iter().enumerate() {
            if b.size == 0 {
                return Err(Error::MalformedProblem(format!("block {k} has size 0")));
            }
            match b.kind {
                BlockKind::Psd if b.size > MAX_BLOCK_SIZE => {
                    return Err(Error::SizeCap(format!(
                        "PSD block {k} of size {} exceeds the cap of {MAX_BLOCK_SIZE}",
                        b.size
                    )))
                }
                BlockKind::Psd => {}
                BlockKind::Nonneg => scalars += b.size,
            }
        }
        if scalars > MAX_SCALARS {
            return Err(Error::SizeCap(format!(
                "{scalars} scalar variables exceed the cap of {MAX_SCALARS}"
            )));
        }
        let check = |v: &Var, c: f64| -> Result<()> {
            if !c.is_finite() {
                return Err(Error::NonFinite);
            }
            let ok = match *v {
                Var::Psd { block, row, col } => self
                    .blocks
                    .get(block)
                    .is_some_and(|b| b.kind == BlockKind::Psd && row < b.size && col < b.size),
                Var::Nonneg { block, index } => self
                    .blocks
                    .get(block)
                    .is_some_and(|b| b.kind == BlockKind::Nonneg && index < b.size),
                Var::Free(k) => k < self.free_count,
            };
            if ok {
                Ok(())
            } else {
                Err(Error::MalformedProblem(format!(
                    "undeclared variable {v:?}"
                )))
            }
        };
        for (v, c) in &self.objective {
            check(v, *c)?;
        }
        for (i, con) in self.constraints.iter().enumerate() {
            if !con.rhs.is_finite() {
                return Err(Error::NonFinite);
            }
            for (v, c) in &con.terms {
                check(v, *c).map_err(|e| match e {
                    Error::MalformedProblem(s) => {
                        Error::MalformedProblem(format!("constraint {i}: {s}"))
                    }
                    other => other,
                })?;
            }
        }
        Ok(())
    }
}

/// An `n x n` Hermitian matrix `H` stored in a realified PSD block `X` of
/// size `2n`, read as `Re H[p, q] = (X[p, q] + X[p+n, q+n]) / 2` and
/// `Im H[p, q] = (X[p+n, q] - X[p, q+n]) / 2`. `X >= 0` implies `H >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HermitianBlock {
    pub block: usize,
    pub n: usize,
}

impl HermitianBlock {
    /// Linear form of `Re H[p, q]`.
    pub fn re(&self, p: usize, q: usize) -> [(Var, f64); 2] {
        let n = self.n;
        [
            (Var::psd(self.block, p, q), 0.5),
            (Var::psd(self.block, p + n, q + n), 0.5),
        ]
    }

    /// Linear form of `Im H[p, q]` (cancels on the diagonal).
    pub fn im(&self, p: usize, q: usize) -> [(Var, f64); 2] {
        let n = self.n;
        [
            (Var::psd(self.block, p + n, q), 0.5),
            (Var::psd(self.block, p, q + n), -0.5),
        ]
    }

    /// Linear form of `tr(H K)` for Hermitian `K`.
    pub fn inner(&self, k: &ComplexMatrix) -> Vec<(Var, f64)> {
        hermitian_inner(
            k,
            |p, q| self.re(p, q).to_vec(),
            |p, q| self.im(p, q).to_vec(),
        )
    }

    /// Reads `H` back from a solution.
    pub fn extract(&self, sol: &SdpSolution) -> ComplexMatrix {
        let n = self.n;
        let mut h = ComplexMatrix::zeros(n, n);
        for p in 0..n {
            for q in 0..n {
                let re: f64 = self.re(p, q).iter().map(|(v, c)| c * sol.value(*v)).sum();
                let im: f64 = self.im(p, q).iter().map(|(v, c)| c * sol.value(*v)).sum();
                h[(p, q)] = C64::new(re, im);
            }
        }
        h
    }
}

/// An unrestricted `n x n` Hermitian matrix on `n^2` free scalars: the real
/// parts of the upper triangle followed by the strictly upper imaginary parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HermitianFree {
    pub start: usize,
    pub n: usize,
}

impl HermitianFree {
    fn upper_index(&self, p: usize, q: usize) -> usize {
        // position of (p, q), p <= q, in row-major upper-triangle order
        p * self.n - p * (p + 1) / 2 + q
    }

    pub fn re(&self, p: usize, q: usize) -> Vec<(Var, f64)> {
        let (p, q) = (p.min(q), p.max(q));
        vec![(Var::Free(self.start + self.upper_index(p, q)), 1.0)]
    }

    pub fn im(&self, p: usize, q: usize) -> Vec<(Var, f64)> {
        if p == q {
            return Vec::new();
        }
        let n = self.n;
        let (a, b, s) = if p < q { (p, q, 1.0) } else { (q, p, -1.0) };
        // strictly upper index
        let k = a * n - a * (a + 1) / 2 + (b - a - 1);
        vec![(Var::Free(self.start + n * (n + 1) / 2 + k), s)]
    }

    pub fn inner(&self, k: &ComplexMatrix) -> Vec<(Var, f64)> {
        hermitian_inner(k, |p, q| self.re(p, q), |p, q| self.im(p, q))
    }

    pub fn extract(&self, sol: &SdpSolution) -> ComplexMatrix {
        let n = self.n;
        let mut h = ComplexMatrix::zeros(n, n);
        for p in 0..n {
            for q in 0..n {
                let re: f64 = self.re(p, q).iter().map(|(v, c)| c * sol.value(*v)).sum();
                let im: f64 = self.im(p, q).iter().map(|(v, c)| c * sol.value(*v)).sum();
                h[(p, q)] = C64::new(re, im);
            }
        }
        h
    }
}

fn hermitian_inner(
    k: &ComplexMatrix,
    re: impl Fn(usize, usize) -> Vec<(Var, f64)>,
    im: impl Fn(usize, usize) -> Vec<(Var, f64)>,
) -> Vec<(Var, f64)> {
    // tr(H K) = sum_pq Re H[p,q] Re K[p,q] + Im H[p,q] Im K[p,q]
    let n = k.rows();
    let mut out = Vec::new();
    for p in 0..n {
        for q in p..n {
            let w = if p == q { 1.0 } else { 2.0 };
            let kv = k[(p, q)];
            if kv.re != 0.0 {
                out.extend(re(p, q).into_iter().map(|(v, c)| (v, c * w * kv.re)));
            }
            if p != q && kv.im != 0.0 {
                out.extend(im(p, q).into_iter().map(|(v, c)| (v, c * w * kv.im)));
            }
        }
    }
    out
}

/// The real symmetric embedding `[[Re h, -Im h], [Im h, Re h]]`.
pub fn realify(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    h.ensure_hermitian()?;
    let n = h.rows();
    let mut out = ComplexMatrix::zeros(2 * n, 2 * n);
    for p in 0..n {
        for q in 0..n {
            let z = h[(p, q)];
            out[(p, q)] = C64::new(z.re, 0.0);
            out[(p + n, q + n)] = C64::new(z.re, 0.0);
            out[(p, q + n)] = C64::new(-z.im, 0.0);
            out[(p + n, q)] = C64::new(z.im, 0.0);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Bound on `|p - d| / (1 + |p|)` and on the complementarity `<X, Z>`.
    pub gap_tol: f64,
    /// Bound on the relative primal and dual residuals.
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-7,
            feas_tol: 1e-7,
            max_iter: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    /// A primal or dual improving ray was found.
    Infeasible,
    IterationLimit,
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BlockValue {
    /// Row-major symmetric matrix.
    Psd {
        size: usize,
        data: Vec<f64>,
    },
    Nonneg(Vec<f64>),
}

/// Per-iteration progress.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub mu: f64,
    pub primal_step: f64,
    pub dual_step: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `|primal_objective - dual_objective|`.
    pub gap: f64,
    /// `||b - A(x)|| / (1 + ||b||)`.
    pub primal_infeasibility: f64,
    /// `||c - A^T y - z|| / (1 + ||c||)`.
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub primal_blocks: Vec<BlockValue>,
    pub free: Vec<f64>,
    /// Multipliers `y` of the equality constraints.
    pub dual: Vec<f64>,
    /// Dual slacks `z = c - A^T y`, per block.
    pub dual_slack: Vec<BlockValue>,
    pub trace: Vec<IterationRecord>,
}

impl SdpSolution {
    pub fn value(&self, v: Var) -> f64 {
        match v {
            Var::Psd { block, row, col } => match &self.primal_blocks[block] {
                BlockValue::Psd { size, data } => data[row * size + col],
                BlockValue::Nonneg(_) => f64::NAN,
            },
            Var::Nonneg { block, index } => match &self.primal_blocks[block] {
                BlockValue::Nonneg(x) => x[index],
                BlockValue::Psd { .. } => f64::NAN,
            },
            Var::Free(k) => self.free[k],
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::herm_eig;
    use proptest::prelude::*;

    #[test]
    fn realify_examples() {
        assert_eq!(
            realify(&ComplexMatrix::identity(2)).unwrap(),
            ComplexMatrix::identity(4)
        );
        let y = crate::gates::pauli_y();
        let r = realify(&y).unwrap();
        let w = herm_eig(&r).unwrap().values;
        let expect = [1.0, 1.0, -1.0, -1.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(realify(&ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn realify_preserves_spectrum(n in 1usize..7, v in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 36)) {
            let h = ComplexMatrix::new(n, n, v[..n * n].iter().map(|&(a, b)| C64::new(a, b)).collect()).unwrap().hermitian_part();
            let e = herm_eig(&h).unwrap().values;
            let r = herm_eig(&realify(&h).unwrap()).unwrap().values;
            for (k, w) in e.iter().enumerate() {
                prop_assert!((r[2 * k] - w).abs() < 1e-10 && (r[2 * k + 1] - w).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn hermitian_free_indexing_is_a_bijection() {
        let f = HermitianFree { start: 3, n: 4 };
        let mut seen = alloc::collections::BTreeSet::new();
        for p in 0..4 {
            for q in p..4 {
                for (v, _) in f.re(p, q) {
                    assert!(seen.insert(v));
                }
                for (v, _) in f.im(p, q) {
                    assert!(seen.insert(v));
                }
            }
        }
        assert_eq!(seen.len(), 16);
        assert_eq!(seen.first(), Some(&Var::Free(3)));
        assert_eq!(seen.last(), Some(&Var::Free(18)));
    }

    #[test]
    fn validate_rejects_bad_references_and_caps() {
        let mut p = SdpProblem::new();
        let b = p.add_block(BlockKind::Psd, 2);
        p.add_constraint(vec![(Var::psd(b, 0, 2), 1.0)], 1.0);
        assert!(matches!(p.validate(), Err(Error::MalformedProblem(_))));

        let mut p = SdpProblem::new();
        p.add_block(BlockKind::Psd, MAX_BLOCK_SIZE + 1);
        p.add_constraint(vec![], 0.0);
        assert!(matches!(p.validate(), Err(Error::SizeCap(_))));

        assert!(matches!(
            SdpProblem::new().validate(),
            Err(Error::MalformedProblem(_))
        ));
    }
}
