//! Named gates accepted by `--gate builtin:<name>`.

use std::fmt;
use std::str::FromStr;

use qpdx_core::gates;
use qpdx_core::qmat::ComplexMatrix;

pub const PREFIX: &str = "builtin:";

/// `zz(theta)` is `exp(i theta Z⊗Z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BuiltinGate {
    Cnot,
    Cz,
    Swap,
    Toffoli,
    Zz(f64),
}

impl BuiltinGate {
    pub fn unitary(&self) -> ComplexMatrix {
        match *self {
            Self::Cnot => gates::cnot(),
            Self::Cz => gates::cz(),
            Self::Swap => gates::swap(),
            Self::Toffoli => gates::toffoli(),
            Self::Zz(theta) => gates::zz(theta),
        }
    }

    pub fn qubits(&self) -> usize {
        match self {
            Self::Toffoli => 3,
            _ => 2,
        }
    }
}

/// `Display` writes the shortest decimal that parses back to the same
/// angle, so the text form round-trips exactly.
impl fmt::Display for BuiltinGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Cnot => write!(f, "{PREFIX}cnot"),
            Self::Cz => write!(f, "{PREFIX}cz"),
            Self::Swap => write!(f, "{PREFIX}swap"),
            Self::Toffoli => write!(f, "{PREFIX}toffoli"),
            Self::Zz(theta) => write!(f, "{PREFIX}zz({theta})"),
        }
    }
}

impl FromStr for BuiltinGate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let name = s
            .strip_prefix(PREFIX)
            .ok_or_else(|| format!("`{s}` does not start with `{PREFIX}`"))?;
        match name {
            "cnot" => Ok(Self::Cnot),
            "cz" => Ok(Self::Cz),
            "swap" => Ok(Self::Swap),
            "toffoli" => Ok(Self::Toffoli),
            _ => {
                let arg = name
                    .strip_prefix("zz(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| {
                        format!(
                            "unknown gate `{name}`; expected cnot, cz, swap, toffoli or zz(theta)"
                        )
                    })?;
                let theta = parse_angle(arg)?;
                Ok(Self::Zz(theta))
            }
        }
    }
}

/// A decimal, or `[k*]pi[/m]` with decimal `k` and `m`.
fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let bad = || format!("cannot read angle `{s}`");
    let v = if let Some(pos) = s.find("pi") {
        let (head, tail) = (&s[..pos], &s[pos + 2..]);
        let k = match head.strip_suffix('*') {
            Some(k) => k.trim().parse::<f64>().map_err(|_| bad())?,
            None if head.trim().is_empty() => 1.0,
            None if head.trim() == "-" => -1.0,
            None => return Err(bad()),
        };
        let m = match tail.strip_prefix('/') {
            Some(m) => m.trim().parse::<f64>().map_err(|_| bad())?,
            None if tail.trim().is_empty() => 1.0,
            None => return Err(bad()),
        };
        k * std::f64::consts::PI / m
    } else {
        s.parse::<f64>().map_err(|_| bad())?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}
