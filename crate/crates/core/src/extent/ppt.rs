//! PPT lower bounds by semidefinite programming.
//!
//! For a channel the bound is
//! `min 2c - 1 : X >= J, X^Γ >= 0, X^Γ >= J^Γ, tr_{A'B'} X = c 1_{AB}`
//! with `J` the Choi operator normalized to `tr_{A'B'} J = 1_{AB}` and `Γ`
//! the partial transpose on `(B, B')`. The solver receives the Lagrange
//! dual of this program,
//! `max <W1, J> + <W3, J^Γ> - 1 : W1 + W2^Γ + W3^Γ = Y ⊗ 1_{A'B'}, tr Y = 2`
//! over `W1, W2, W3 >= 0` and Hermitian `Y`, which has one equality per
//! real parameter of a Hermitian operator on `AA'BB'` instead of three. The
//! multipliers of its equalities recover `X` and `c`.

use alloc::vec::Vec;

use super::{require_optimal, Certificate, ExtentResult, Method, Residuals};
use crate::channel::{ChoiChannel, ChoiDims, Normalization, PREDICATE_TOL};
use crate::qmat::{
    herm_eig, partial_trace, partial_transpose, ComplexMatrix, DimProfile, PartialTransposeMap,
};
use crate::sdp::{solve, HermitianBlock, HermitianFree, SdpProblem, SolveOptions, Var};
use crate::{Error, Result};

/// Optimal variables of both programs for a channel bound.
#[derive(Clone, Debug, PartialEq)]
pub struct PptChannelCertificate {
    pub dims: ChoiDims,
    /// Primal `X`, ordered `(A, A', B, B')`, in the `tr_{A'B'} J = 1` units.
    pub x: ComplexMatrix,
    pub c: f64,
    pub w1: ComplexMatrix,
    pub w2: ComplexMatrix,
    pub w3: ComplexMatrix,
    /// Operator on `(A, B)`.
    pub y: ComplexMatrix,
}

/// Constraint violations of a [`PptChannelCertificate`] against a target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertificateViolations {
    /// Largest negative eigenvalue among the primal LMIs plus the error of
    /// the marginal condition.
    pub primal: f64,
    /// Largest negative eigenvalue among the `W_i` plus the errors of the
    /// dual equalities.
    pub dual: f64,
    /// `2c - 1`, an upper bound on the PPT extent.
    pub primal_value: f64,
    /// `<W1, J> + <W3, J^Γ> - 1`, a lower bound on the PPT extent.
    pub dual_value: f64,
}

impl PptChannelCertificate {
    /// Rechecks every constraint of both programs against `target`.
    pub fn violations(&self, target: &ChoiChannel) -> Result<CertificateViolations> {
        let dims = self.dims;
        if target.dims() != dims {
            return Err(Error::DimensionMismatch(
                "certificate and target dims differ".into(),
            ));
        }
        let prof = dims.profile();
        let j = target.choi_normalized(Normalization::TraceDin);
        let pt = |m: &ComplexMatrix| partial_transpose(m, &prof, &[2, 3]);
        let neg = |m: &ComplexMatrix| -> Result<f64> {
            Ok((-herm_eig(&m.hermitian_part())?.min()).max(0.0))
        };
        let jt = pt(&j)?;
        let xt = pt(&self.x)?;
        let marginal = partial_trace(&self.x, &prof, &[0, 2])?;
        let primal = neg(&(&self.x - &j))?.max(neg(&xt)?).max(neg(&(&xt - &jt))?)
            + marginal.distance(&ComplexMatrix::identity(dims.d_in()).scale(self.c));
        let lhs = &(&self.w1 + &pt(&self.w2)?) + &pt(&self.w3)?;
        let rhs = embed_input(&self.y, dims);
        let dual = neg(&self.w1)?.max(neg(&self.w2)?).max(neg(&self.w3)?)
            + lhs.distance(&rhs)
            + (self.y.trace().re - 2.0).abs();
        Ok(CertificateViolations {
            primal,
            dual,
            primal_value: 2.0 * self.c - 1.0,
            dual_value: self.w1.hs_inner(&j).re + self.w3.hs_inner(&jt).re - 1.0,
        })
    }
}

/// `Y ⊗ 1_{A'B'}` in the `(A, A', B, B')` ordering.
fn embed_input(y: &ComplexMatrix, dims: ChoiDims) -> ComplexMatrix {
    let prof = dims.profile();
    let n = dims.total();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut r = [0usize; 4];
    let mut c = [0usize; 4];
    for i in 0..n {
        prof.digits(i, &mut r);
        for k in 0..n {
            prof.digits(k, &mut c);
            if r[1] == c[1] && r[3] == c[3] {
                out[(i, k)] = y[(r[0] * dims.b + r[2], c[0] * dims.b + c[2])];
            }
        }
    }
    out
}

struct ChannelProgram {
    problem: SdpProblem,
    w1: HermitianBlock,
    w2: HermitianBlock,
    w3: HermitianBlock,
    y: HermitianFree,
    /// `(row, col, is_imaginary)` of every operator equality, in order.
    rows: Vec<(usize, usize, bool)>,
}

/// The program solved by [`gamma_ppt_channel`], in the solver's form.
pub fn ppt_channel_program(e: &ChoiChannel) -> Result<SdpProblem> {
    Ok(channel_program(e)?.problem)
}

fn channel_program(e: &ChoiChannel) -> Result<ChannelProgram> {
    if !e.is_tp(PREDICATE_TOL) {
        return Err(Error::InvalidChannel(
            "PPT extent needs a trace-preserving map".into(),
        ));
    }
    let dims = e.dims();
    let n = dims.total();
    let prof = dims.profile();
    let j = e.choi_normalized(Normalization::TraceDin);
    let jt = partial_transpose(&j, &prof, &[2, 3])?;
    let gamma = PartialTransposeMap::for_subsystems(&prof, &[2, 3])?;

    let mut p = SdpProblem::new();
    let w1 = p.add_hermitian_block(n);
    let w2 = p.add_hermitian_block(n);
    let w3 = p.add_hermitian_block(n);
    let y = p.add_hermitian_free(dims.d_in());
    p.add_objective(
        w1.inner(&j)
            .into_iter()
            .chain(w3.inner(&jt))
            .map(|(v, c)| (v, -c)),
    );

    let mut rd = [0usize; 4];
    let mut cd = [0usize; 4];
    let mut rows: Vec<(usize, usize, bool)> = Vec::with_capacity(n * n);
    for r in 0..n {
        prof.digits(r, &mut rd);
        for c in r..n {
            prof.digits(c, &mut cd);
            let (tr, tc) = gamma.apply(r, c);
            let same_out = rd[1] == cd[1] && rd[3] == cd[3];
            let (yr, yc) = (rd[0] * dims.b + rd[2], cd[0] * dims.b + cd[2]);
            for imag in [false, true] {
                if imag && r == c {
                    continue;
                }
                let mut terms: Vec<(Var, f64)> = Vec::with_capacity(8);
                let part = |b: &HermitianBlock, p: usize, q: usize| {
                    if imag {
                        b.im(p, q)
                    } else {
                        b.re(p, q)
                    }
                };
                terms.extend(part(&w1, r, c));
                terms.extend(part(&w2, tr, tc));
                terms.extend(part(&w3, tr, tc));
                if same_out {
                    let fy = if imag { y.im(yr, yc) } else { y.re(yr, yc) };
                    terms.extend(fy.into_iter().map(|(v, w)| (v, -w)));
                }
                p.add_constraint(terms, 0.0);
                rows.push((r, c, imag));
            }
        }
    }
    let trace_terms: Vec<(Var, f64)> = (0..dims.d_in()).flat_map(|k| y.re(k, k)).collect();
    p.add_constraint(trace_terms, 2.0);
    Ok(ChannelProgram {
        problem: p,
        w1,
        w2,
        w3,
        y,
        rows,
    })
}

/// PPT extent of an HPTP bipartite map; the split is the `(A, B)` grouping
/// of its [`ChoiDims`].
pub fn gamma_ppt_channel(e: &ChoiChannel, opts: &SolveOptions) -> Result<ExtentResult> {
    let ChannelProgram {
        problem,
        w1,
        w2,
        w3,
        y,
        rows,
    } = channel_program(e)?;
    let dims = e.dims();
    let n = dims.total();
    let sol = solve(&problem, opts)?;
    require_optimal(&sol)?;

    // X = -(multipliers), off-diagonal multipliers carry twice the entry
    let mut x = ComplexMatrix::zeros(n, n);
    for (&(r, c, imag), &m) in rows.iter().zip(&sol.dual) {
        if r == c {
            x[(r, r)].re = -m;
        } else if imag {
            x[(r, c)].im = -m / 2.0;
        } else {
            x[(r, c)].re = -m / 2.0;
        }
    }
    for r in 0..n {
        for c in 0..r {
            x[(r, c)] = x[(c, r)].conj();
        }
    }
    let c = -sol.dual[rows.len()];
    let cert = PptChannelCertificate {
        dims,
        x,
        c,
        w1: w1.extract(&sol),
        w2: w2.extract(&sol),
        w3: w3.extract(&sol),
        y: y.extract(&sol),
    };
    Ok(ExtentResult {
        value: -sol.primal_objective - 1.0,
        method: Method::Sdp,
        certificate: Some(Certificate::PptChannel(cert)),
        residuals: Residuals::of_solution(&sol),
    })
}

/// Optimal mixing state of a state bound: `rho = (1 + t) tau - t sigma`
/// with `tau = (rho + sigma_tilde) / (1 + t)` and `sigma = sigma_tilde / t`
/// both PPT, `t = tr sigma_tilde`.
#[derive(Clone, Debug, PartialEq)]
pub struct PptStateCertificate {
    pub sigma_tilde: ComplexMatrix,
    pub t: f64,
}

/// The program solved by [`gamma_ppt_state`], in the solver's form.
pub fn ppt_state_program(rho: &ComplexMatrix, d_a: usize, d_b: usize) -> Result<SdpProblem> {
    Ok(state_program(rho, d_a, d_b)?.0)
}

fn state_program(
    rho: &ComplexMatrix,
    d_a: usize,
    d_b: usize,
) -> Result<(SdpProblem, HermitianBlock)> {
    let n = d_a * d_b;
    if !rho.is_square() || rho.rows() != n {
        return Err(Error::DimensionMismatch(alloc::format!(
            "state of size {}x{} is not on {d_a}x{d_b}",
            rho.rows(),
            rho.cols()
        )));
    }
    rho.ensure_hermitian()?;
    let eig = herm_eig(rho)?;
    if eig.min() < -PREDICATE_TOL {
        return Err(Error::InvalidArgument(alloc::format!(
            "state has eigenvalue {:.3e}",
            eig.min()
        )));
    }
    if (rho.trace().re - 1.0).abs() > PREDICATE_TOL {
        return Err(Error::InvalidArgument(alloc::format!(
            "state has trace {}",
            rho.trace().re
        )));
    }
    let prof = DimProfile::new(&[d_a, d_b])?;
    let gamma = PartialTransposeMap::for_subsystems(&prof, &[1])?;
    let rho_t = partial_transpose(rho, &prof, &[1])?;

    let mut p = SdpProblem::new();
    let s1 = p.add_hermitian_block(n);
    let s2 = p.add_hermitian_block(n);
    let s3 = p.add_hermitian_block(n);
    p.add_objective((0..n).flat_map(|k| s1.re(k, k)));
    for r in 0..n {
        for c in r..n {
            let (tr, tc) = gamma.apply(r, c);
            for imag in [false, true] {
                if imag && r == c {
                    continue;
                }
                let part = |b: &HermitianBlock, p: usize, q: usize| {
                    if imag {
                        b.im(p, q)
                    } else {
                        b.re(p, q)
                    }
                };
                let value = if imag {
                    rho_t[(r, c)].im
                } else {
                    rho_t[(r, c)].re
                };
                let minus_s1 = part(&s1, tr, tc).map(|(v, w)| (v, -w));
                p.add_constraint(part(&s2, r, c).into_iter().chain(minus_s1).collect(), 0.0);
                p.add_constraint(part(&s3, r, c).into_iter().chain(minus_s1).collect(), value);
            }
        }
    }
    Ok((p, s1))
}

/// PPT extent `1 + 2 R_PPT(rho)` of a bipartite state on `d_a x d_b`.
pub fn gamma_ppt_state(
    rho: &ComplexMatrix,
    d_a: usize,
    d_b: usize,
    opts: &SolveOptions,
) -> Result<ExtentResult> {
    let (p, s1) = state_program(rho, d_a, d_b)?;
    let sol = solve(&p, opts)?;
    require_optimal(&sol)?;
    let t = sol.primal_objective;
    Ok(ExtentResult {
        value: 1.0 + 2.0 * t,
        method: Method::Sdp,
        certificate: Some(Certificate::PptState(PptStateCertificate {
            sigma_tilde: s1.extract(&sol),
            t,
        })),
        residuals: Residuals::of_solution(&sol),
    })
}
