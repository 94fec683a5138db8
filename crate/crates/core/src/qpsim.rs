//! Density-matrix simulation of cut circuits and the Monte Carlo
//! quasiprobability estimator.
//!
//! Every operation is applied as a superoperator on the qubits it touches.
//! A cut gate carries a [`Qpd`] of the gate it replaces; per shot one term
//! is drawn with probability `|a_i| / ||a||_1` and the shot value picks up
//! `sign(a_i) ||a||_1` times the side weights of the outcomes that occur.
//!
//! Randomness comes from ChaCha8 keyed by the seed, with one stream per cut
//! gate and one for the readout, positioned by shot index. A shot therefore
//! consumes the same numbers regardless of how shots are scheduled.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent on f64 only with std or newer toolchains
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{qpd_validate, ChoiChannel, ChoiDims, Qpd};
use crate::qmat::{herm_eig, ComplexMatrix};
use crate::{Error, Result, C64};

pub const MAX_QUBITS: usize = 10;

/// Largest reconstruction error accepted for the QPD of a cut gate.
pub const CUT_QPD_TOL: f64 = 1e-6;

/// RNG words reserved per shot on each stream.
const WORDS_PER_SHOT: u128 = 16;

const READOUT_STREAM: u64 = u64::MAX;

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    /// A unitary on the listed qubits, `qubits[0]` most significant.
    Gate {
        u: ComplexMatrix,
        qubits: Vec<usize>,
    },
    /// A gate replaced by a QPD whose first party acts on `qa` and second on
    /// `qb`.
    Cut {
        qpd: Qpd,
        qa: Vec<usize>,
        qb: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    ops: Vec<Op>,
    observable: ComplexMatrix,
}

fn check_qubits(qubits: &[usize], n: usize) -> Result<()> {
    if qubits.is_empty() {
        return Err(Error::InvalidArgument("operation acts on no qubits".into()));
    }
    let mut seen = vec![false; n];
    for &q in qubits {
        if q >= n {
            return Err(Error::SubsystemOutOfRange { index: q, count: n });
        }
        if seen[q] {
            return Err(Error::InvalidArgument(format!("qubit {q} listed twice")));
        }
        seen[q] = true;
    }
    Ok(())
}

impl Circuit {
    /// An empty circuit on `n` qubits starting in `|0...0>`.
    pub fn new(n: usize, observable: ComplexMatrix) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "qubit count {n} outside 1..={MAX_QUBITS}"
            )));
        }
        let dim = 1usize << n;
        if !observable.is_square() || observable.rows() != dim {
            return Err(Error::DimensionMismatch(format!(
                "observable of size {}x{} on {n} qubits",
                observable.rows(),
                observable.cols()
            )));
        }
        observable.ensure_hermitian()?;
        Ok(Self {
            n,
            ops: Vec::new(),
            observable,
        })
    }

    pub fn add_gate(&mut self, u: ComplexMatrix, qubits: Vec<usize>) -> Result<&mut Self> {
        check_qubits(&qubits, self.n)?;
        if !u.is_square() || u.rows() != 1 << qubits.len() {
            return Err(Error::DimensionMismatch(format!(
                "gate of size {} on {} qubits",
                u.rows(),
                qubits.len()
            )));
        }
        let dev = u.unitarity_deviation();
        if dev > 1e-8 {
            return Err(Error::NotUnitary(dev));
        }
        self.ops.push(Op::Gate { u, qubits });
        Ok(self)
    }

    /// Adds a cut gate; the QPD must act on `(2^|qa|, 2^|qb|)` and
    /// reconstruct its target within [`CUT_QPD_TOL`] from CP, TN terms.
    pub fn add_cut(&mut self, qpd: Qpd, qa: Vec<usize>, qb: Vec<usize>) -> Result<&mut Self> {
        let all: Vec<usize> = qa.iter().chain(&qb).copied().collect();
        check_qubits(&all, self.n)?;
        if qa.is_empty() || qb.is_empty() {
            return Err(Error::InvalidArgument(
                "both sides of a cut need qubits".into(),
            ));
        }
        let want = ChoiDims::bipartite(1 << qa.len(), 1 << qb.len());
        if qpd.dims() != want {
            return Err(Error::DimensionMismatch(format!(
                "QPD dims {:?}, qubits need {want:?}",
                qpd.dims()
            )));
        }
        let report = qpd_validate(&qpd);
        if !report.is_valid(CUT_QPD_TOL) {
            return Err(Error::InvalidQpd(format!(
                "reconstruction error {:.3e} or a term that is not CP and TN",
                report.reconstruction_error
            )));
        }
        if qpd.l1_norm() == 0.0 {
            return Err(Error::InvalidQpd("all coefficients are zero".into()));
        }
        self.ops.push(Op::Cut { qpd, qa, qb });
        Ok(self)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn observable(&self) -> &ComplexMatrix {
        &self.observable
    }

    /// `prod_j ||a^(j)||_1` over the cut gates.
    pub fn l1_product(&self) -> f64 {
        self.ops
            .iter()
            .map(|op| match op {
                Op::Cut { qpd, .. } => qpd.l1_norm(),
                Op::Gate { .. } => 1.0,
            })
            .product()
    }

    /// Spectral norm of the observable.
    pub fn observable_norm(&self) -> f64 {
        herm_eig(&self.observable)
            .map(|e| e.values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .unwrap_or(f64::NAN)
    }
}

/// A linear map on the operators of `k` qubits embedded in `n`.
#[derive(Clone, Debug)]
struct LocalSuperop {
    /// `S[(o, o'), (i, i')]` with `E(|i><i'|) = sum S |o><o'|`.
    s: Vec<C64>,
    d: usize,
    /// Global index of local index `l` for an otherwise zero index.
    deposit: Vec<usize>,
    /// Global indices with all target bits zero.
    rest: Vec<usize>,
}

impl LocalSuperop {
    fn new(s: Vec<C64>, qubits: &[usize], n: usize) -> Self {
        let k = qubits.len();
        let d = 1usize << k;
        let deposit = (0..d)
            .map(|l| {
                qubits.iter().enumerate().fold(0usize, |g, (j, &q)| {
                    let bit = (l >> (k - 1 - j)) & 1;
                    g | (bit << (n - 1 - q))
                })
            })
            .collect();
        let mask = qubits.iter().fold(0usize, |m, &q| m | (1 << (n - 1 - q)));
        let rest = (0..1usize << n).filter(|g| g & mask == 0).collect();
        Self {
            s,
            d,
            deposit,
            rest,
        }
    }

    fn of_channel(map: &ChoiChannel, qubits: &[usize], n: usize) -> Self {
        let dims = map.dims();
        let (d_in, d_out) = (dims.d_in(), dims.d_out());
        let j = map.choi_in_out().scale(d_in as f64);
        let mut s = vec![C64::new(0.0, 0.0); d_out * d_out * d_in * d_in];
        for i in 0..d_in {
            for ip in 0..d_in {
                for o in 0..d_out {
                    for op in 0..d_out {
                        s[(o * d_out + op) * d_in * d_in + i * d_in + ip] =
                            j[(i * d_out + o, ip * d_out + op)];
                    }
                }
            }
        }
        Self::new(s, qubits, n)
    }

    fn of_unitary(u: &ComplexMatrix, qubits: &[usize], n: usize) -> Self {
        let d = u.rows();
        let mut s = vec![C64::new(0.0, 0.0); d * d * d * d];
        for o in 0..d {
            for op in 0..d {
                for i in 0..d {
                    for ip in 0..d {
                        s[(o * d + op) * d * d + i * d + ip] = u[(o, i)] * u[(op, ip)].conj();
                    }
                }
            }
        }
        Self::new(s, qubits, n)
    }

    fn apply(&self, rho: &[C64], dim: usize) -> Vec<C64> {
        let d = self.d;
        let dd = d * d;
        let mut out = vec![C64::new(0.0, 0.0); dim * dim];
        let mut block = vec![C64::new(0.0, 0.0); dd];
        for &rr in &self.rest {
            for &rc in &self.rest {
                for (li, gi) in self.deposit.iter().enumerate() {
                    for (lj, gj) in self.deposit.iter().enumerate() {
                        block[li * d + lj] = rho[(rr | gi) * dim + (rc | gj)];
                    }
                }
                for (lo, go) in self.deposit.iter().enumerate() {
                    for (lp, gp) in self.deposit.iter().enumerate() {
                        let row = &self.s[(lo * d + lp) * dd..(lo * d + lp + 1) * dd];
                        let v: C64 = row.iter().zip(&block).map(|(a, b)| a * b).sum();
                        out[(rr | go) * dim + (rc | gp)] = v;
                    }
                }
            }
        }
        out
    }
}

fn trace(rho: &[C64], dim: usize) -> f64 {
    (0..dim).map(|i| rho[i * dim + i].re).sum()
}

fn expectation(obs: &ComplexMatrix, rho: &[C64], dim: usize) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            acc += obs[(i, j)] * rho[j * dim + i];
        }
    }
    acc
}

fn initial_state(dim: usize) -> Vec<C64> {
    let mut rho = vec![C64::new(0.0, 0.0); dim * dim];
    rho[0] = C64::new(1.0, 0.0);
    rho
}

/// `tr[O E(|0><0|)]` with every cut gate replaced by its target.
pub fn exact_expectation(c: &Circuit) -> Result<f64> {
    let dim = 1usize << c.n;
    let mut rho = initial_state(dim);
    for op in &c.ops {
        let s = match op {
            Op::Gate { u, qubits } => LocalSuperop::of_unitary(u, qubits, c.n),
            Op::Cut { qpd, qa, qb } => {
                let q: Vec<usize> = qa.iter().chain(qb).copied().collect();
                LocalSuperop::of_channel(qpd.target(), &q, c.n)
            }
        };
        rho = s.apply(&rho, dim);
    }
    let v = expectation(&c.observable, &rho, dim);
    if v.im.abs() > 1e-9 {
        return Err(Error::NotHermitian(v.im.abs()));
    }
    Ok(v.re)
}

/// How a shot turns its final state into a number.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Readout {
    /// Carry `sum_j w_j G_j` of each sampled term as a linear map and read
    /// `tr[O rho]` of the unnormalized final operator.
    #[default]
    Expectation,
    /// Draw the outcome `j` of each sampled term by its Born probability
    /// (no outcome yields the value 0) and an eigenvalue of `O` at the end.
    Sampled,
}

struct CompiledTerm {
    sign_l1: f64,
    effective: LocalSuperop,
    branches: Vec<(f64, LocalSuperop)>,
}

enum CompiledOp {
    Gate(LocalSuperop),
    Cut {
        cumulative: Vec<f64>,
        terms: Vec<CompiledTerm>,
    },
}

struct Compiled {
    dim: usize,
    ops: Vec<CompiledOp>,
    obs_values: Vec<f64>,
    obs_vectors: ComplexMatrix,
}

fn compile(c: &Circuit) -> Result<Compiled> {
    let mut ops = Vec::with_capacity(c.ops.len());
    for op in &c.ops {
        ops.push(match op {
            Op::Gate { u, qubits } => CompiledOp::Gate(LocalSuperop::of_unitary(u, qubits, c.n)),
            Op::Cut { qpd, qa, qb } => {
                let q: Vec<usize> = qa.iter().chain(qb).copied().collect();
                let l1 = qpd.l1_norm();
                let mut cumulative = Vec::with_capacity(qpd.terms().len());
                let mut acc = 0.0;
                let mut terms = Vec::with_capacity(qpd.terms().len());
                for t in qpd.terms() {
                    acc += t.coeff.abs() / l1;
                    cumulative.push(acc);
                    terms.push(CompiledTerm {
                        sign_l1: t.coeff.signum() * l1,
                        effective: LocalSuperop::of_channel(&t.effective_map(), &q, c.n),
                        branches: t
                            .branches
                            .iter()
                            .map(|b| (b.weight_or_one(), LocalSuperop::of_channel(&b.map, &q, c.n)))
                            .collect(),
                    });
                }
                CompiledOp::Cut { cumulative, terms }
            }
        });
    }
    let eig = herm_eig(&c.observable)?;
    Ok(Compiled {
        dim: 1 << c.n,
        ops,
        obs_values: eig.values,
        obs_vectors: eig.vectors,
    })
}

fn pick(cumulative: &[f64], u: f64) -> usize {
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

fn stream(seed: u64, id: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng.set_word_pos(shot as u128 * WORDS_PER_SHOT);
    rng
}

impl Compiled {
    fn shot(&self, obs: &ComplexMatrix, seed: u64, shot: u64, readout: Readout) -> f64 {
        let dim = self.dim;
        let mut rho = initial_state(dim);
        let mut weight = 1.0;
        let mut cut_index = 0u64;
        for op in &self.ops {
            match op {
                CompiledOp::Gate(s) => rho = s.apply(&rho, dim),
                CompiledOp::Cut { cumulative, terms } => {
                    let mut rng = stream(seed, cut_index, shot);
                    cut_index += 1;
                    let term = &terms[pick(cumulative, rng.random::<f64>())];
                    weight *= term.sign_l1;
                    match readout {
                        Readout::Expectation => rho = term.effective.apply(&rho, dim),
                        Readout::Sampled => {
                            let u: f64 = rng.random();
                            let mut acc = 0.0;
                            let mut chosen = None;
                            for (w, s) in &term.branches {
                                let next = s.apply(&rho, dim);
                                let q = trace(&next, dim).max(0.0);
                                acc += q;
                                if u < acc {
                                    chosen = Some((*w, q, next));
                                    break;
                                }
                            }
                            let Some((w, q, next)) = chosen else {
                                return 0.0;
                            };
                            weight *= w;
                            rho = next.into_iter().map(|z| z / q).collect();
                        }
                    }
                }
            }
        }
        match readout {
            Readout::Expectation => weight * expectation(obs, &rho, dim).re,
            Readout::Sampled => {
                let mut rng = stream(seed, READOUT_STREAM, shot);
                let u: f64 = rng.random::<f64>() * trace(&rho, dim);
                let v = &self.obs_vectors;
                let mut acc = 0.0;
                let mut last = 0.0;
                for (k, &lam) in self.obs_values.iter().enumerate() {
                    let mut p = C64::new(0.0, 0.0);
                    for i in 0..dim {
                        for j in 0..dim {
                            p += v[(i, k)].conj() * rho[i * dim + j] * v[(j, k)];
                        }
                    }
                    acc += p.re;
                    last = lam;
                    if u < acc {
                        return weight * lam;
                    }
                }
                weight * last
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorReport {
    pub estimate: f64,
    pub shots: u64,
    /// Sample standard deviation over `sqrt(shots)`.
    pub empirical_std_err: f64,
    /// Unbiased sample variance of the shot values.
    pub variance: f64,
    pub l1_product: f64,
    pub seed: u64,
    pub observable_norm: f64,
    /// Largest `|value|` over all shots; never above `l1_product * observable_norm`.
    pub max_abs_value: f64,
    pub readout: Readout,
}

/// The value of every shot, in shot order.
pub fn qps_shot_values(c: &Circuit, shots: u64, seed: u64, readout: Readout) -> Result<Vec<f64>> {
    if shots == 0 {
        return Err(Error::InvalidArgument("at least one shot is needed".into()));
    }
    let compiled = compile(c)?;
    Ok((0..shots)
        .map(|s| compiled.shot(&c.observable, seed, s, readout))
        .collect())
}

/// Monte Carlo estimate of [`exact_expectation`] with the default readout.
pub fn qps_estimate(c: &Circuit, shots: u64, seed: u64) -> Result<EstimatorReport> {
    qps_estimate_with(c, shots, seed, Readout::default())
}

pub fn qps_estimate_with(
    c: &Circuit,
    shots: u64,
    seed: u64,
    readout: Readout,
) -> Result<EstimatorReport> {
    let values = qps_shot_values(c, shots, seed, readout)?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(EstimatorReport {
        estimate: mean,
        shots,
        empirical_std_err: (variance / n).sqrt(),
        variance,
        l1_product: c.l1_product(),
        seed,
        observable_norm: c.observable_norm(),
        max_abs_value: values.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        readout,
    })
}

/// `ceil(2 l1^2 / epsilon^2 * ln(2 / delta))`.
pub fn shots_needed(epsilon: f64, delta: f64, l1: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} must be positive"
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta {delta} outside (0, 1]"
        )));
    }
    if !(l1 >= 1.0 && l1.is_finite()) {
        return Err(Error::InvalidArgument(format!("l1 norm {l1} below 1")));
    }
    let x = 2.0 * l1 * l1 / (epsilon * epsilon) * (2.0 / delta).ln();
    // a relative 1e-12 slack absorbs rounding in ln(2/delta)
    Ok((x * (1.0 - 1e-12)).ceil() as u64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub cuts: usize,
    pub l1_product: f64,
    pub exact: f64,
    pub estimate: f64,
    pub variance: f64,
    pub std_err: f64,
}

/// Runs the estimator on `template(n)` for each `n` in `cut_counts`, all
/// with the same seed.
pub fn overhead_sweep(
    template: impl Fn(usize) -> Result<Circuit>,
    cut_counts: &[usize],
    shots_per_point: u64,
    seed: u64,
    readout: Readout,
) -> Result<Vec<SweepRow>> {
    cut_counts
        .iter()
        .map(|&n| {
            let c = template(n)?;
            let r = qps_estimate_with(&c, shots_per_point, seed, readout)?;
            Ok(SweepRow {
                cuts: n,
                l1_product: r.l1_product,
                exact: exact_expectation(&c)?,
                estimate: r.estimate,
                variance: r.variance,
                std_err: r.empirical_std_err,
            })
        })
        .collect()
}

/// Least-squares slope of `ln variance` against the cut count.
pub fn log_variance_slope(rows: &[SweepRow]) -> Result<f64> {
    if rows.len() < 2 || rows.iter().any(|r| r.variance <= 0.0) {
        return Err(Error::InvalidArgument(
            "need two rows with positive variance".into(),
        ));
    }
    let n = rows.len() as f64;
    let mx = rows.iter().map(|r| r.cuts as f64).sum::<f64>() / n;
    let my = rows.iter().map(|r| r.variance.ln()).sum::<f64>() / n;
    let sxy: f64 = rows
        .iter()
        .map(|r| (r.cuts as f64 - mx) * (r.variance.ln() - my))
        .sum();
    let sxx: f64 = rows.iter().map(|r| (r.cuts as f64 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("cut counts are all equal".into()));
    }
    Ok(sxy / sxx)
}

/// `H` on qubit 0 followed by `n` cut CNOTs from qubit 0 to qubit 1, read
/// out with `Z ⊗ Z`.
pub fn cut_cnot_chain(qpd: &Qpd, n: usize) -> Result<Circuit> {
    let mut c = Circuit::new(
        2,
        crate::qmat::kron(&crate::gates::pauli_z(), &crate::gates::pauli_z()),
    )?;
    c.add_gate(crate::gates::hadamard(), vec![0])?;
    for _ in 0..n {
        c.add_cut(qpd.clone(), vec![0], vec![1])?;
    }
    Ok(c)
}
