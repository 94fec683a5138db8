//! JSON schemas for matrices, channels, QPDs, dictionaries and circuits.
//!
//! Every schema rejects unknown fields. Conversions into core types run the
//! core validation, so a file that parses is not yet known to be valid.

use std::fs;
use std::path::{Path, PathBuf};

use qpdx_core::channel::{Branch, ChoiChannel, ChoiDims, Normalization, Qpd, QpdTerm};
use qpdx_core::extent::{DictEntry, Dictionary};
use qpdx_core::qmat::ComplexMatrix;
use qpdx_core::qpsim::Circuit;
use qpdx_core::sdp::{BlockKind, SdpProblem, Var};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::report::sha256_hex;
use crate::CliError;

/// `{"rows", "cols", "re", "im"}`, row-major. A missing `im` means a real
/// matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            re: m.data().iter().map(|z| z.re).collect(),
            im: m.data().iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_matrix(&self) -> qpdx_core::Result<ComplexMatrix> {
        if self.im.is_empty() && !self.re.is_empty() {
            ComplexMatrix::from_real(self.rows, self.cols, &self.re)
        } else {
            ComplexMatrix::from_parts(self.rows, self.cols, &self.re, &self.im)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimsJson {
    #[serde(rename = "A")]
    pub a: usize,
    #[serde(rename = "Ap")]
    pub ap: usize,
    #[serde(rename = "B")]
    pub b: usize,
    #[serde(rename = "Bp")]
    pub bp: usize,
}

impl DimsJson {
    pub fn from_dims(d: ChoiDims) -> Self {
        Self {
            a: d.a,
            ap: d.ap,
            b: d.b,
            bp: d.bp,
        }
    }

    pub fn to_dims(self) -> qpdx_core::Result<ChoiDims> {
        ChoiDims::new(self.a, self.ap, self.b, self.bp)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormJson {
    /// `tr J = 1` for trace-preserving maps.
    #[serde(rename = "trace1")]
    TraceOne,
    /// `tr_out J = 1_in` for trace-preserving maps.
    #[serde(rename = "traceDin")]
    TraceDin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiJson {
    pub choi: MatrixJson,
    pub dims: DimsJson,
    pub norm: NormJson,
}

impl ChoiJson {
    pub fn from_channel(e: &ChoiChannel) -> Self {
        Self {
            choi: MatrixJson::from_matrix(e.choi()),
            dims: DimsJson::from_dims(e.dims()),
            norm: NormJson::TraceOne,
        }
    }

    pub fn to_channel(&self) -> qpdx_core::Result<ChoiChannel> {
        let norm = match self.norm {
            NormJson::TraceOne => Normalization::TraceOne,
            NormJson::TraceDin => Normalization::TraceDin,
        };
        ChoiChannel::new(self.choi.to_matrix()?, self.dims.to_dims()?, norm)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchJson {
    pub map: ChoiJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
}

impl BranchJson {
    fn from_branch(b: &Branch) -> Self {
        Self {
            map: ChoiJson::from_channel(&b.map),
            w: b.weight,
        }
    }

    fn to_branch(&self) -> qpdx_core::Result<Branch> {
        Ok(Branch {
            map: self.map.to_channel()?,
            weight: self.w,
        })
    }
}

/// A term is either `{"a", "b", "map"}` with `b` the side weight of its
/// single outcome (`null` for none), or `{"a", "branches"}` for an
/// instrument with several outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<ChoiJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branches: Option<Vec<BranchJson>>,
}

impl TermJson {
    fn from_term(t: &QpdTerm) -> Self {
        match t.branches.as_slice() {
            [single] => Self {
                a: t.coeff,
                b: single.weight,
                map: Some(ChoiJson::from_channel(&single.map)),
                branches: None,
            },
            many => Self {
                a: t.coeff,
                b: None,
                map: None,
                branches: Some(many.iter().map(BranchJson::from_branch).collect()),
            },
        }
    }

    fn to_term(&self, index: usize) -> qpdx_core::Result<QpdTerm> {
        let invalid = |msg: &str| qpdx_core::Error::InvalidQpd(format!("term {index}: {msg}"));
        match (&self.map, &self.branches) {
            (Some(map), None) => Ok(QpdTerm {
                coeff: self.a,
                branches: vec![Branch {
                    map: map.to_channel()?,
                    weight: self.b,
                }],
            }),
            (None, Some(branches)) => {
                if self.b.is_some() {
                    return Err(invalid("`b` belongs on the branches as `w`"));
                }
                Ok(QpdTerm {
                    coeff: self.a,
                    branches: branches
                        .iter()
                        .map(BranchJson::to_branch)
                        .collect::<qpdx_core::Result<_>>()?,
                })
            }
            _ => Err(invalid("exactly one of `map` and `branches` is required")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QpdJson {
    pub target: ChoiJson,
    pub terms: Vec<TermJson>,
}

impl QpdJson {
    pub fn from_qpd(q: &Qpd) -> Self {
        Self {
            target: ChoiJson::from_channel(q.target()),
            terms: q.terms().iter().map(TermJson::from_term).collect(),
        }
    }

    pub fn to_qpd(&self) -> qpdx_core::Result<Qpd> {
        let terms = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| t.to_term(i))
            .collect::<qpdx_core::Result<_>>()?;
        Qpd::new(self.target.to_channel()?, terms)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictEntryJson {
    pub label: String,
    pub branches: Vec<BranchJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionaryJson {
    pub name: String,
    pub dims: DimsJson,
    pub entries: Vec<DictEntryJson>,
}

impl DictionaryJson {
    pub fn from_dictionary(d: &Dictionary) -> Self {
        Self {
            name: d.name().to_string(),
            dims: DimsJson::from_dims(d.dims()),
            entries: d
                .entries()
                .iter()
                .map(|e| DictEntryJson {
                    label: e.label.clone(),
                    branches: e.branches.iter().map(BranchJson::from_branch).collect(),
                })
                .collect(),
        }
    }

    pub fn to_dictionary(&self) -> qpdx_core::Result<Dictionary> {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                Ok(DictEntry {
                    label: e.label.clone(),
                    branches: e
                        .branches
                        .iter()
                        .map(BranchJson::to_branch)
                        .collect::<qpdx_core::Result<_>>()?,
                })
            })
            .collect::<qpdx_core::Result<_>>()?;
        Dictionary::new(self.name.clone(), self.dims.to_dims()?, entries)
    }
}

/// A QPD given inline or as a path relative to the circuit file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CutRef {
    Path(String),
    Inline(Box<QpdJson>),
}

/// Either `{"u", "q"}` or `{"cut", "qa", "qb"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut: Option<CutRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qa: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qb: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitJson {
    pub n: usize,
    pub ops: Vec<OpJson>,
    pub obs: MatrixJson,
}

/// A file read from disk together with its SHA-256.
pub struct Loaded<T> {
    pub value: T,
    pub sha256: String,
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_bytes<T: DeserializeOwned>(path: &Path, bytes: &[u8]) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads and parses a JSON file, hashing the raw bytes.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<Loaded<T>, CliError> {
    let bytes = read_bytes(path)?;
    Ok(Loaded {
        value: parse_bytes(path, &bytes)?,
        sha256: sha256_hex(&bytes),
    })
}

/// Reads a QPD file. A `synth` report is accepted too; its certificate is
/// the QPD.
pub fn load_qpd(path: &Path) -> Result<Loaded<Qpd>, CliError> {
    let bytes = read_bytes(path)?;
    let raw: Value = parse_bytes(path, &bytes)?;
    let inner = match raw.pointer("/payload/result/certificate") {
        Some(cert) => cert.clone(),
        None => raw,
    };
    let q: QpdJson = serde_json::from_value(inner).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Loaded {
        value: q.to_qpd().map_err(|e| CliError::at(path, e))?,
        sha256: sha256_hex(&bytes),
    })
}

/// Reads a circuit and every QPD file it references. The returned hashes
/// are keyed by path, the circuit first.
pub fn load_circuit(path: &Path) -> Result<(Circuit, Vec<(PathBuf, String)>), CliError> {
    let loaded: Loaded<CircuitJson> = load_json(path)?;
    let mut hashes = vec![(path.to_path_buf(), loaded.sha256)];
    let cj = loaded.value;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let at = |e| CliError::at(path, e);
    let mut c = Circuit::new(cj.n, cj.obs.to_matrix().map_err(at)?).map_err(at)?;
    for (i, op) in cj.ops.iter().enumerate() {
        let bad = |msg: &str| CliError::Validation(format!("{}: ops[{i}]: {msg}", path.display()));
        match op {
            OpJson {
                u: Some(u),
                q: Some(q),
                cut: None,
                qa: None,
                qb: None,
            } => {
                c.add_gate(u.to_matrix().map_err(at)?, q.clone())
                    .map_err(|e| bad(&e.to_string()))?;
            }
            OpJson {
                u: None,
                q: None,
                cut: Some(cut),
                qa: Some(qa),
                qb: Some(qb),
            } => {
                let qpd = match cut {
                    CutRef::Path(p) => {
                        let full = base.join(p);
                        let l = load_qpd(&full)?;
                        hashes.push((full, l.sha256));
                        l.value
                    }
                    CutRef::Inline(j) => j.to_qpd().map_err(|e| bad(&e.to_string()))?,
                };
                c.add_cut(qpd, qa.clone(), qb.clone())
                    .map_err(|e| bad(&e.to_string()))?;
            }
            _ => return Err(bad("expected {\"u\", \"q\"} or {\"cut\", \"qa\", \"qb\"}")),
        }
    }
    Ok((c, hashes))
}

fn var_json(v: Var) -> Value {
    match v {
        Var::Psd { block, row, col } => json!({"block": block, "row": row, "col": col}),
        Var::Nonneg { block, index } => json!({"block": block, "index": index}),
        Var::Free(i) => json!({"free": i}),
    }
}

/// Self-describing dump of a solver problem for external cross-checks.
pub fn problem_dump(p: &SdpProblem) -> Value {
    let terms = |ts: &[(Var, f64)]| -> Vec<Value> {
        ts.iter()
            .map(|&(v, c)| json!({"var": var_json(v), "coeff": c}))
            .collect()
    };
    json!({
        "format": "qpdx-sdp-dump",
        "convention": "minimize sum(objective); each constraint sums coeff * var = rhs; \
            psd blocks are real symmetric with (row, col), row <= col, one variable; \
            nonneg blocks are scalars >= 0; free variables are unconstrained",
        "blocks": p.blocks.iter().map(|b| json!({
            "kind": match b.kind { BlockKind::Psd => "psd", BlockKind::Nonneg => "nonneg" },
            "size": b.size,
        })).collect::<Vec<_>>(),
        "free": p.free_count,
        "objective": terms(&p.objective),
        "constraints": p.constraints.iter().map(|c| json!({
            "terms": terms(&c.terms),
            "rhs": c.rhs,
        })).collect::<Vec<_>>(),
    })
}
