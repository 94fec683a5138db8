//! Quasiprobability extents.
//!
//! Closed forms for pure states and for unitaries whose operator-Schmidt
//! factors are unitary, PPT lower bounds computed by semidefinite
//! programming, explicit decompositions found by linear programming over a
//! finite [`Dictionary`], and the state-based lower bound obtained by
//! feeding a product probe through a channel.
//!
//! Every result reports the residuals of the solver that produced it.

mod dictionary;
mod lp;
mod ppt;
mod probe;

use alloc::format;
#[allow(unused_imports)] // inherent on f64 only with std or newer toolchains
use num_traits::Float;

use crate::channel::Qpd;
use crate::sdp::{SdpSolution, SolveStatus};
use crate::{Error, Result};

pub use dictionary::{local_qubit_operations, DictEntry, Dictionary};
pub use lp::synthesize_qpd_lp;
pub use ppt::{
    gamma_ppt_channel, gamma_ppt_state, ppt_channel_program, ppt_state_program,
    CertificateViolations, PptChannelCertificate, PptStateCertificate,
};
pub use probe::{choi_state_lower_bound, maximally_entangled_probe, state_based_lower_bound};

/// Tolerance on the normalization of coefficient lists.
pub const NORMALIZATION_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Analytic,
    Sdp,
    Lp,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Sdp => "sdp",
            Method::Lp => "lp",
        }
    }
}

/// Evidence backing an extent value.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// An explicit decomposition whose l1 norm is the reported value.
    Qpd(Qpd),
    PptChannel(PptChannelCertificate),
    PptState(PptStateCertificate),
}

/// Feasibility report of the computation behind an extent value. All
/// fields are zero for closed-form values.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residuals {
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    /// `|primal - dual|` of the solver objectives.
    pub gap: f64,
    pub iterations: usize,
    /// Frobenius error of a certificate decomposition, when there is one.
    pub reconstruction_error: f64,
}

impl Residuals {
    pub(crate) fn of_solution(sol: &SdpSolution) -> Self {
        Self {
            primal_infeasibility: sol.primal_infeasibility,
            dual_infeasibility: sol.dual_infeasibility,
            gap: sol.gap,
            iterations: sol.iterations,
            reconstruction_error: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtentResult {
    pub value: f64,
    pub method: Method,
    pub certificate: Option<Certificate>,
    pub residuals: Residuals,
}

pub(crate) fn require_optimal(sol: &SdpSolution) -> Result<()> {
    match sol.status {
        SolveStatus::Optimal => Ok(()),
        s => Err(Error::Solver(s)),
    }
}

fn check_unit_list(coeffs: &[f64]) -> Result<f64> {
    if coeffs.is_empty() {
        return Err(Error::InvalidArgument("empty coefficient list".into()));
    }
    if let Some(c) = coeffs.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "coefficient {c} is not a nonnegative number"
        )));
    }
    let norm = coeffs.iter().map(|c| c * c).sum::<f64>();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(norm.sqrt()));
    }
    Ok(coeffs.iter().sum())
}

/// `2 (sum_i a_i)^2 - 1` for the Schmidt coefficients `a` of a pure state.
pub fn pure_state_extent(schmidt: &[f64]) -> Result<f64> {
    let s = check_unit_list(schmidt)?;
    Ok(2.0 * s * s - 1.0)
}

/// `1 + 2 sum_{k != k'} u_k u_k'` for the normalized operator-Schmidt
/// coefficients of a unitary with unitary factors.
pub fn kak_unitary_extent(u: &[f64]) -> Result<f64> {
    check_unit_list(u)?;
    let total: f64 = u.iter().sum();
    let cross = total * total - u.iter().map(|x| x * x).sum::<f64>();
    Ok(1.0 + 2.0 * cross)
}

/// Wraps a closed-form value.
pub fn analytic(value: f64) -> ExtentResult {
    ExtentResult {
        value,
        method: Method::Analytic,
        certificate: None,
        residuals: Residuals::default(),
    }
}
