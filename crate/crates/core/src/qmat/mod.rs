//! Dense complex linear algebra on multipartite Hilbert spaces.
//!
//! Tensor indices are row-major: for subsystem dimensions `(d0, d1, ..)` the
//! basis state `|i0 i1 ..>` sits at index `i0 * (d1 * d2 * ..) + i1 * (..) + ..`.

mod eig;
mod schmidt;
mod svd;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};
#[allow(unused_imports)] // inherent on f64 only with std or newer toolchains
use num_traits::Float;

use crate::{Error, Result, C64};

pub use eig::{herm_eig, HermEig};
pub use schmidt::{operator_schmidt, schmidt_coefficients, OperatorSchmidt};
pub use svd::{svd, Svd};

/// Entrywise tolerance used to decide whether an input is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from separate real and imaginary parts.
    pub fn from_parts(rows: usize, cols: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::DimensionMismatch(format!(
                "real part has {} entries, imaginary part {}",
                re.len(),
                im.len()
            )));
        }
        let data = re.iter().zip(im).map(|(&r, &i)| C64::new(r, i)).collect();
        Self::new(rows, cols, data)
    }

    pub fn from_real(rows: usize, cols: usize, re: &[f64]) -> Result<Self> {
        let data = re.iter().map(|&r| C64::new(r, 0.0)).collect();
        Self::new(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// Column vector from amplitudes.
    pub fn column(amps: &[C64]) -> Self {
        Self {
            rows: amps.len(),
            cols: 1,
            data: amps.to_vec(),
        }
    }

    /// Computational basis column vector `|index>` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim, 1);
        v.data[index] = ONE;
        v
    }

    /// The projector `|v><v|` for a column vector (or any matrix `v v^dagger`).
    pub fn outer(v: &ComplexMatrix) -> Self {
        v.matmul(&v.adjoint())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_c(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    /// Matrix product. Panics on incompatible shapes.
    pub fn matmul(&self, rhs: &ComplexMatrix) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols))
            .map(|i| self.data[i * self.cols + i])
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance to `other`; panics on shape mismatch.
    pub fn distance(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Hilbert-Schmidt inner product `tr(self^dagger other)`.
    pub fn hs_inner(&self, other: &ComplexMatrix) -> C64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Largest entrywise deviation from the conjugate transpose.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev = 0.0f64;
        for r in 0..n {
            for c in r..n {
                let d = (self.data[r * n + c] - self.data[c * n + r].conj()).norm();
                dev = dev.max(d);
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let dev = self.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            Err(Error::NotHermitian(dev))
        } else {
            Ok(())
        }
    }

    /// Largest entrywise deviation of `U^dagger U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let p = self.adjoint().matmul(self);
        p.data
            .iter()
            .enumerate()
            .map(|(k, z)| {
                let target = if k / p.cols == k % p.cols { ONE } else { ZERO };
                (z - target).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Replaces the matrix by `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        let mut out = self.clone();
        for (o, a) in out.data.iter_mut().zip(&adj.data) {
            *o = (*o + a) * 0.5;
        }
        out
    }

    /// Euclidean norm of all entries (for vectors this is the vector norm).
    pub fn norm(&self) -> f64 {
        self.frobenius_norm()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        &mut self.data[r * self.cols + c]
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "add shape mismatch"
        );
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "sub shape mismatch"
        );
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.map(|z| -z)
    }
}

/// Subsystem dimensions of a tensor-product space.
///
/// Trivial (dimension one) factors are allowed so that single-party maps can
/// be described with the same `(A, A', B, B')` layout as bipartite ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimProfile {
    dims: Vec<usize>,
}

impl DimProfile {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "zero subsystem dimension in {dims:?}"
            )));
        }
        Ok(Self {
            dims: dims.to_vec(),
        })
    }

    pub fn qubits(n: usize) -> Self {
        Self { dims: vec![2; n] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.dims.len() {
            Err(Error::SubsystemOutOfRange {
                index,
                count: self.dims.len(),
            })
        } else {
            Ok(())
        }
    }

    fn check_square(&self, m: &ComplexMatrix) -> Result<()> {
        if !m.is_square() || m.rows() != self.total() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix does not match subsystem dims {:?} (total {})",
                m.rows(),
                m.cols(),
                self.dims,
                self.total()
            )));
        }
        Ok(())
    }

    /// Splits a flat index into per-subsystem digits.
    pub fn digits(&self, mut index: usize, out: &mut [usize]) {
        for k in (0..self.dims.len()).rev() {
            out[k] = index % self.dims[k];
            index /= self.dims[k];
        }
    }

    /// Inverse of [`DimProfile::digits`].
    pub fn flat(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let x = a.data[ar * a.cols + ac];
            if x == ZERO {
                continue;
            }
            for br in 0..b.rows {
                let row = ar * b.rows + br;
                let dst = &mut out.data[row * cols + ac * b.cols..row * cols + (ac + 1) * b.cols];
                let src = &b.data[br * b.cols..(br + 1) * b.cols];
                for (d, &s) in dst.iter_mut().zip(src) {
                    *d = x * s;
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of matrices, left to right.
pub fn kron_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    let mut acc = ComplexMatrix::identity(1);
    for f in factors {
        acc = kron(&acc, f);
    }
    acc
}

fn index_set(profile: &DimProfile, set: &[usize]) -> Result<Vec<bool>> {
    let mut mask = vec![false; profile.len()];
    for &k in set {
        profile.check_index(k)?;
        mask[k] = true;
    }
    Ok(mask)
}

/// Traces out every subsystem not listed in `keep`.
///
/// The kept subsystems appear in the result in their original order.
pub fn partial_trace(
    m: &ComplexMatrix,
    profile: &DimProfile,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    profile.check_square(m)?;
    let keep_mask = index_set(profile, keep)?;
    let n = profile.total();
    let k = profile.len();

    let mut kept_dim = 1;
    for (j, &d) in profile.dims.iter().enumerate() {
        if keep_mask[j] {
            kept_dim *= d;
        }
    }

    // Split every flat index into its (kept, traced) parts once.
    let mut kept_idx = vec![0usize; n];
    let mut traced_idx = vec![0usize; n];
    let mut digits = vec![0usize; k];
    for i in 0..n {
        profile.digits(i, &mut digits);
        let (mut kk, mut tt) = (0usize, 0usize);
        for j in 0..k {
            if keep_mask[j] {
                kk = kk * profile.dims[j] + digits[j];
            } else {
                tt = tt * profile.dims[j] + digits[j];
            }
        }
        kept_idx[i] = kk;
        traced_idx[i] = tt;
    }

    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for r in 0..n {
        for c in 0..n {
            if traced_idx[r] == traced_idx[c] {
                out.data[kept_idx[r] * kept_dim + kept_idx[c]] += m.data[r * n + c];
            }
        }
    }
    Ok(out)
}

/// Transposes the tensor indices of the subsystems listed in `flip`.
pub fn partial_transpose(
    m: &ComplexMatrix,
    profile: &DimProfile,
    flip: &[usize],
) -> Result<ComplexMatrix> {
    profile.check_square(m)?;
    let mask = index_set(profile, flip)?;
    let map = PartialTransposeMap::new(profile, &mask);
    let n = profile.total();
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let (r2, c2) = map.apply(r, c);
            out.data[r2 * n + c2] = m.data[r * n + c];
        }
    }
    Ok(out)
}

/// Index map of a partial transpose: entry `(r, c)` moves to `apply(r, c)`.
///
/// The map is an involution.
#[derive(Clone, Debug)]
pub struct PartialTransposeMap {
    // flat index -> (part on flipped subsystems, part on the rest), both as
    // offsets into the flat index so that recombination is a sum.
    flipped: Vec<usize>,
    rest: Vec<usize>,
}

impl PartialTransposeMap {
    pub fn new(profile: &DimProfile, mask: &[bool]) -> Self {
        let n = profile.total();
        let k = profile.len();
        let mut strides = vec![1usize; k];
        for j in (0..k.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * profile.dims[j + 1];
        }
        let mut flipped = vec![0; n];
        let mut rest = vec![0; n];
        let mut digits = vec![0usize; k];
        for i in 0..n {
            profile.digits(i, &mut digits);
            for j in 0..k {
                if mask[j] {
                    flipped[i] += digits[j] * strides[j];
                } else {
                    rest[i] += digits[j] * strides[j];
                }
            }
        }
        Self { flipped, rest }
    }

    /// Map for a list of subsystem indices; fails on out-of-range indices.
    pub fn for_subsystems(profile: &DimProfile, flip: &[usize]) -> Result<Self> {
        let mask = index_set(profile, flip)?;
        Ok(Self::new(profile, &mask))
    }

    #[inline]
    pub fn apply(&self, r: usize, c: usize) -> (usize, usize) {
        (
            self.rest[r] + self.flipped[c],
            self.rest[c] + self.flipped[r],
        )
    }
}

/// Reorders subsystems: subsystem `k` of the result is subsystem `perm[k]` of
/// the input. Works on square operators and on column vectors.
pub fn permute_subsystems(
    m: &ComplexMatrix,
    profile: &DimProfile,
    perm: &[usize],
) -> Result<ComplexMatrix> {
    let k = profile.len();
    let mut seen = vec![false; k];
    if perm.len() != k {
        return Err(Error::InvalidArgument(format!(
            "permutation {perm:?} has wrong length for {k} subsystems"
        )));
    }
    for &p in perm {
        profile.check_index(p)?;
        if seen[p] {
            return Err(Error::InvalidArgument(format!(
                "{perm:?} is not a permutation"
            )));
        }
        seen[p] = true;
    }
    let n = profile.total();
    let new_dims: Vec<usize> = perm.iter().map(|&p| profile.dims[p]).collect();
    let new_profile = DimProfile { dims: new_dims };
    // old flat index -> new flat index
    let mut map = vec![0usize; n];
    let mut digits = vec![0usize; k];
    let mut new_digits = vec![0usize; k];
    for (i, slot) in map.iter_mut().enumerate() {
        profile.digits(i, &mut digits);
        for j in 0..k {
            new_digits[j] = digits[perm[j]];
        }
        *slot = new_profile.flat(&new_digits);
    }

    if m.cols == 1 && m.rows == n {
        let mut out = ComplexMatrix::zeros(n, 1);
        for i in 0..n {
            out.data[map[i]] = m.data[i];
        }
        return Ok(out);
    }
    profile.check_square(m)?;
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out.data[map[r] * n + map[c]] = m.data[r * n + c];
        }
    }
    Ok(out)
}

/// Embeds an operator acting on the listed qubits into an `n`-qubit space
/// (identity elsewhere). `targets[0]` is the most significant qubit of `op`.
pub fn embed_qubit_operator(
    op: &ComplexMatrix,
    targets: &[usize],
    n: usize,
) -> Result<ComplexMatrix> {
    let k = targets.len();
    if op.rows() != 1 << k || !op.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "operator of size {} does not act on {k} qubits",
            op.rows()
        )));
    }
    let mut seen = vec![false; n];
    for &t in targets {
        if t >= n {
            return Err(Error::SubsystemOutOfRange { index: t, count: n });
        }
        if seen[t] {
            return Err(Error::InvalidArgument(format!("repeated qubit {t}")));
        }
        seen[t] = true;
    }
    let dim = 1usize << n;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            // untouched qubits must agree
            let mut agree = true;
            for q in 0..n {
                if !seen[q] && ((r >> (n - 1 - q)) & 1) != ((c >> (n - 1 - q)) & 1) {
                    agree = false;
                    break;
                }
            }
            if !agree {
                continue;
            }
            let (mut lr, mut lc) = (0usize, 0usize);
            for &t in targets {
                lr = (lr << 1) | ((r >> (n - 1 - t)) & 1);
                lc = (lc << 1) | ((c >> (n - 1 - t)) & 1);
            }
            out.data[r * dim + c] = op.data[lr * op.cols + lc];
        }
    }
    Ok(out)
}
