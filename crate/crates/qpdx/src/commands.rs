//! The subcommands. Each one records the settings it actually used and the
//! hashes of its inputs, and returns the `result` part of the report.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use qpdx_core::channel::{ChoiChannel, ChoiDims, PREDICATE_TOL};
use qpdx_core::extent::{
    analytic, choi_state_lower_bound, gamma_ppt_channel, gamma_ppt_state, kak_unitary_extent,
    ppt_channel_program, ppt_state_program, pure_state_extent, synthesize_qpd_lp, Certificate,
    Dictionary, ExtentResult, NORMALIZATION_TOL,
};
use qpdx_core::qmat::{operator_schmidt, ComplexMatrix};
use qpdx_core::qpsim::{
    cut_cnot_chain, exact_expectation, log_variance_slope, overhead_sweep, qps_estimate_with,
    Readout, CUT_QPD_TOL,
};
use qpdx_core::sdp::{SdpProblem, SolveOptions};
use qpdx_core::C64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::builtin::{BuiltinGate, PREFIX};
use crate::cli::{Command, Flags, ReadoutArg};
use crate::formats::{
    load_circuit, load_json, load_qpd, problem_dump, ChoiJson, DictionaryJson, Loaded, MatrixJson,
    QpdJson,
};
use crate::report::{sha256_hex, Payload, Tolerances, TOOL, VERSION};
use crate::CliError;

/// Name of the built-in two-qubit dictionary.
pub const LO_STAR: &str = "lo-star";
pub const DEFAULT_SHOTS: u64 = 100_000;
pub const DEFAULT_SWEEP_SHOTS: u64 = 200_000;
pub const DEFAULT_SWEEP_CUTS: [usize; 4] = [0, 1, 2, 3];

#[derive(Default)]
struct Ctx {
    inputs: BTreeMap<String, Value>,
    hashes: BTreeMap<String, String>,
}

impl Ctx {
    fn set(&mut self, key: &str, value: impl Serialize) {
        self.inputs.insert(
            key.to_string(),
            serde_json::to_value(value).expect("settings serialize"),
        );
    }

    fn hash(&mut self, key: impl Into<String>, sha256: String) {
        self.hashes.insert(key.into(), sha256);
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn solve_options(f: &Flags) -> Result<SolveOptions, CliError> {
    let d = SolveOptions::default();
    let opts = SolveOptions {
        gap_tol: f.tol_gap.unwrap_or(d.gap_tol),
        feas_tol: f.tol_feas.unwrap_or(d.feas_tol),
        max_iter: f.max_iter.unwrap_or(d.max_iter),
    };
    for (name, v) in [("--tol-gap", opts.gap_tol), ("--tol-feas", opts.feas_tol)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(format!("{name} must be positive, got {v}")));
        }
    }
    if opts.max_iter == 0 {
        return Err(invalid("--max-iter must be positive"));
    }
    Ok(opts)
}

/// Runs `command` with merged settings `f`.
pub fn run(command: &Command, f: &Flags) -> Result<Payload, CliError> {
    let opts = solve_options(f)?;
    let mut ctx = Ctx::default();
    let result = match command {
        Command::ExtentPpt(_) => extent_ppt(f, &opts, &mut ctx)?,
        Command::ExtentState(_) => extent_state(f, &opts, &mut ctx)?,
        Command::ExtentAnalytic(_) => extent_analytic(f, &mut ctx)?,
        Command::Synth(_) => synth(f, &opts, &mut ctx)?,
        Command::CutRun(_) => cut_run(f, &mut ctx)?,
        Command::Sweep(_) => sweep(f, &opts, &mut ctx)?,
    };
    Ok(Payload {
        tool: TOOL,
        version: VERSION,
        command: command.name().to_string(),
        inputs: ctx.inputs,
        input_hashes: ctx.hashes,
        tolerances: Tolerances {
            gap: opts.gap_tol,
            feas: opts.feas_tol,
            max_iter: opts.max_iter,
            predicate: PREDICATE_TOL,
            normalization: NORMALIZATION_TOL,
            cut_qpd: CUT_QPD_TOL,
        },
        seed: f.seed.unwrap_or(0),
        result,
    })
}

fn no_dump(f: &Flags, command: &str) -> Result<(), CliError> {
    match f.dump_sdp {
        Some(_) => Err(invalid(format!("--dump-sdp does not apply to {command}"))),
        None => Ok(()),
    }
}

fn write_dump(
    f: &Flags,
    problem: impl FnOnce() -> qpdx_core::Result<SdpProblem>,
) -> Result<(), CliError> {
    if let Some(path) = &f.dump_sdp {
        let text =
            serde_json::to_string_pretty(&problem_dump(&problem()?)).expect("dumps serialize");
        fs::write(path, text + "\n").map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(())
}

fn parse_pair(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || {
        invalid(format!(
            "--split expects `a:b` with positive integers, got `{s}`"
        ))
    };
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || b == 0 {
        return Err(bad());
    }
    Ok((a, b))
}

/// Reads `--gate`, recording its canonical name and hash.
fn load_gate(spec: &str, ctx: &mut Ctx) -> Result<ComplexMatrix, CliError> {
    if spec.starts_with(PREFIX) {
        let g: BuiltinGate = spec.parse().map_err(CliError::Validation)?;
        let u = g.unitary();
        let canonical = g.to_string();
        let text = serde_json::to_string(&MatrixJson::from_matrix(&u)).expect("matrices serialize");
        ctx.hash(canonical.clone(), sha256_hex(text.as_bytes()));
        ctx.set("gate", canonical);
        Ok(u)
    } else {
        let path = Path::new(spec);
        let l: Loaded<MatrixJson> = load_json(path)?;
        ctx.hash(spec, l.sha256);
        ctx.set("gate", spec);
        l.value.to_matrix().map_err(|e| CliError::at(path, e))
    }
}

fn qubit_count(u: &ComplexMatrix) -> Result<usize, CliError> {
    let d = u.rows();
    if !u.is_square() || d < 4 || !d.is_power_of_two() {
        return Err(invalid(format!(
            "gate of size {}x{} is not a unitary on two or more qubits",
            u.rows(),
            u.cols()
        )));
    }
    Ok(d.trailing_zeros() as usize)
}

/// Qubits on each side; the default puts the first `n / 2` qubits on `A`.
fn gate_split(split: Option<&str>, n: usize) -> Result<(usize, usize), CliError> {
    let (a, b) = match split {
        Some(s) => parse_pair(s)?,
        None => (n / 2, n - n / 2),
    };
    if a + b != n {
        return Err(invalid(format!(
            "--split {a}:{b} does not cover a {n}-qubit gate"
        )));
    }
    Ok((a, b))
}

/// The channel named by `--gate` or `--input`, with the unitary when it is
/// a gate.
fn target_channel(
    f: &Flags,
    ctx: &mut Ctx,
) -> Result<(ChoiChannel, Option<ComplexMatrix>), CliError> {
    match (&f.gate, &f.input) {
        (Some(spec), None) => {
            let u = load_gate(spec, ctx)?;
            let (a, b) = gate_split(f.split.as_deref(), qubit_count(&u)?)?;
            ctx.set("split", format!("{a}:{b}"));
            let e = ChoiChannel::of_unitary(&u, ChoiDims::bipartite(1 << a, 1 << b))?;
            Ok((e, Some(u)))
        }
        (None, Some(path)) => {
            if f.split.is_some() {
                return Err(invalid(
                    "--split applies to --gate; a channel file carries its own dims",
                ));
            }
            let l: Loaded<ChoiJson> = load_json(path)?;
            ctx.hash(path.display().to_string(), l.sha256);
            ctx.set("input", path.display().to_string());
            let e = l
                .value
                .to_channel()
                .map_err(|err| CliError::at(path, err))?;
            Ok((e, None))
        }
        _ => Err(invalid("give exactly one of --gate and --input")),
    }
}

fn residuals_json(r: &ExtentResult) -> Value {
    let s = &r.residuals;
    json!({
        "primal_infeasibility": s.primal_infeasibility,
        "dual_infeasibility": s.dual_infeasibility,
        "gap": s.gap,
        "iterations": s.iterations,
        "reconstruction_error": s.reconstruction_error,
    })
}

fn certificate_json(r: &ExtentResult, target: Option<&ChoiChannel>) -> Result<Value, CliError> {
    let m = MatrixJson::from_matrix;
    Ok(match &r.certificate {
        None => Value::Null,
        Some(Certificate::Qpd(q)) => {
            serde_json::to_value(QpdJson::from_qpd(q)).expect("qpds serialize")
        }
        Some(Certificate::PptChannel(c)) => {
            let violations = match target {
                Some(t) => {
                    let v = c.violations(t)?;
                    json!({
                        "primal": v.primal,
                        "dual": v.dual,
                        "primal_value": v.primal_value,
                        "dual_value": v.dual_value,
                    })
                }
                None => Value::Null,
            };
            json!({
                "kind": "ppt-channel",
                "c": c.c,
                "x": m(&c.x),
                "y": m(&c.y),
                "w1": m(&c.w1),
                "w2": m(&c.w2),
                "w3": m(&c.w3),
                "violations": violations,
            })
        }
        Some(Certificate::PptState(c)) => json!({
            "kind": "ppt-state",
            "t": c.t,
            "sigma_tilde": m(&c.sigma_tilde),
        }),
    })
}

fn extent_json(r: &ExtentResult, target: Option<&ChoiChannel>) -> Result<Value, CliError> {
    Ok(json!({
        "gamma": r.value,
        "method": r.method.as_str(),
        "residuals": residuals_json(r),
        "certificate": certificate_json(r, target)?,
    }))
}

fn extent_ppt(f: &Flags, opts: &SolveOptions, ctx: &mut Ctx) -> Result<Value, CliError> {
    let (e, u) = target_channel(f, ctx)?;
    write_dump(f, || ppt_channel_program(&e))?;
    let r = gamma_ppt_channel(&e, opts)?;
    let mut v = extent_json(&r, Some(&e))?;
    if u.is_some() {
        v["choi_state_bound"] = json!(choi_state_lower_bound(&e)?);
    }
    Ok(v)
}

fn extent_state(f: &Flags, opts: &SolveOptions, ctx: &mut Ctx) -> Result<Value, CliError> {
    let (rho, d_a, d_b) = match (&f.input, &f.schmidt) {
        (Some(path), None) => {
            let l: Loaded<MatrixJson> = load_json(path)?;
            ctx.hash(path.display().to_string(), l.sha256);
            ctx.set("input", path.display().to_string());
            let m = l.value.to_matrix().map_err(|e| CliError::at(path, e))?;
            let rho = if m.cols() == 1 {
                ComplexMatrix::outer(&m)
            } else {
                m
            };
            let n = rho.rows();
            let (d_a, d_b) = match f.split.as_deref() {
                Some(s) => parse_pair(s)?,
                None => {
                    let d = (1..=n).find(|d| d * d >= n).unwrap_or(1);
                    if d * d != n {
                        return Err(invalid(format!(
                            "give --split for a state of dimension {n}"
                        )));
                    }
                    (d, d)
                }
            };
            (rho, d_a, d_b)
        }
        (None, Some(s)) => {
            if f.split.is_some() {
                return Err(invalid("--split does not apply to --schmidt"));
            }
            ctx.set("schmidt", s);
            let d = s.len();
            let mut v = ComplexMatrix::zeros(d * d, 1);
            for (i, &c) in s.iter().enumerate() {
                v[(i * d + i, 0)] = C64::new(c, 0.0);
            }
            (ComplexMatrix::outer(&v), d, d)
        }
        _ => return Err(invalid("give exactly one of --input and --schmidt")),
    };
    ctx.set("split", format!("{d_a}:{d_b}"));
    write_dump(f, || ppt_state_program(&rho, d_a, d_b))?;
    extent_json(&gamma_ppt_state(&rho, d_a, d_b, opts)?, None)
}

fn extent_analytic(f: &Flags, ctx: &mut Ctx) -> Result<Value, CliError> {
    no_dump(f, "extent-analytic")?;
    match (&f.schmidt, &f.gate) {
        (Some(s), None) => {
            ctx.set("schmidt", s);
            extent_json(&analytic(pure_state_extent(s)?), None)
        }
        (None, Some(spec)) => {
            let u = load_gate(spec, ctx)?;
            if qubit_count(&u)? != 2 || f.split.as_deref().is_some_and(|s| s.trim() != "1:1") {
                return Err(invalid(
                    "closed forms exist for two-qubit gates split 1:1; use extent-ppt",
                ));
            }
            ctx.set("split", "1:1");
            let coeffs = operator_schmidt(&u, 2, 2)?.normalized(2, 2);
            let mut v = extent_json(&analytic(kak_unitary_extent(&coeffs)?), None)?;
            v["operator_schmidt"] = json!(coeffs);
            Ok(v)
        }
        _ => Err(invalid("give exactly one of --schmidt and --gate")),
    }
}

fn load_dictionary(f: &Flags, ctx: &mut Ctx) -> Result<Dictionary, CliError> {
    let name = f.dict.as_deref().unwrap_or(LO_STAR);
    ctx.set("dict", name);
    if name == LO_STAR {
        return Ok(Dictionary::lo_star_two_qubit());
    }
    let path = Path::new(name);
    let l: Loaded<DictionaryJson> = load_json(path)?;
    ctx.hash(name, l.sha256);
    l.value.to_dictionary().map_err(|e| CliError::at(path, e))
}

fn synth(f: &Flags, opts: &SolveOptions, ctx: &mut Ctx) -> Result<Value, CliError> {
    no_dump(f, "synth")?;
    let (e, _) = target_channel(f, ctx)?;
    let dict = load_dictionary(f, ctx)?;
    let r = synthesize_qpd_lp(&e, &dict, opts)?;
    let mut v = extent_json(&r, Some(&e))?;
    if let Some(Certificate::Qpd(q)) = &r.certificate {
        v["terms"] = json!(q.terms().len());
    }
    v["dictionary_size"] = json!(dict.len());
    Ok(v)
}

fn readout(f: &Flags, default: ReadoutArg, ctx: &mut Ctx) -> Readout {
    let r = f.readout.unwrap_or(default);
    ctx.set("readout", r.as_str());
    match r {
        ReadoutArg::Expectation => Readout::Expectation,
        ReadoutArg::Sampled => Readout::Sampled,
    }
}

fn cut_run(f: &Flags, ctx: &mut Ctx) -> Result<Value, CliError> {
    no_dump(f, "cut-run")?;
    let path = f
        .circuit
        .as_ref()
        .ok_or_else(|| invalid("cut-run needs --circuit"))?;
    let (c, hashes) = load_circuit(path)?;
    for (p, h) in hashes {
        ctx.hash(p.display().to_string(), h);
    }
    ctx.set("circuit", path.display().to_string());
    let shots = f.shots.unwrap_or(DEFAULT_SHOTS);
    let seed = f.seed.unwrap_or(0);
    ctx.set("shots", shots);
    ctx.set("seed", seed);
    let mode = readout(f, ReadoutArg::Expectation, ctx);
    let r = qps_estimate_with(&c, shots, seed, mode)?;
    Ok(json!({
        "estimate": r.estimate,
        "shots": r.shots,
        "empirical_std_err": r.empirical_std_err,
        "variance": r.variance,
        "l1_product": r.l1_product,
        "seed": r.seed,
        "observable_norm": r.observable_norm,
        "max_abs_value": r.max_abs_value,
        "readout": f.readout.unwrap_or(ReadoutArg::Expectation).as_str(),
        "exact": exact_expectation(&c)?,
    }))
}

fn sweep(f: &Flags, opts: &SolveOptions, ctx: &mut Ctx) -> Result<Value, CliError> {
    no_dump(f, "sweep")?;
    let qpd = match &f.qpd {
        Some(path) => {
            let l = load_qpd(path)?;
            ctx.hash(path.display().to_string(), l.sha256);
            ctx.set("qpd", path.display().to_string());
            l.value
        }
        None => {
            ctx.set("qpd", format!("synth {PREFIX}cnot over {LO_STAR}"));
            let cnot =
                ChoiChannel::of_unitary(&BuiltinGate::Cnot.unitary(), ChoiDims::bipartite(2, 2))?;
            match synthesize_qpd_lp(&cnot, &Dictionary::lo_star_two_qubit(), opts)?.certificate {
                Some(Certificate::Qpd(q)) => q,
                _ => unreachable!("the LP always returns its QPD"),
            }
        }
    };
    let cuts = f
        .cuts
        .clone()
        .unwrap_or_else(|| DEFAULT_SWEEP_CUTS.to_vec());
    if cuts.is_empty() {
        return Err(invalid("--cuts is empty"));
    }
    let shots = f.shots.unwrap_or(DEFAULT_SWEEP_SHOTS);
    let seed = f.seed.unwrap_or(0);
    ctx.set("cuts", &cuts);
    ctx.set("shots", shots);
    ctx.set("seed", seed);
    let mode = readout(f, ReadoutArg::Sampled, ctx);
    let rows = overhead_sweep(|n| cut_cnot_chain(&qpd, n), &cuts, shots, seed, mode)?;
    let l1 = qpd.l1_norm();
    Ok(json!({
        "rows": rows.iter().map(|r| json!({
            "cuts": r.cuts,
            "l1_product": r.l1_product,
            "exact": r.exact,
            "estimate": r.estimate,
            "variance": r.variance,
            "std_err": r.std_err,
        })).collect::<Vec<_>>(),
        "qpd_l1": l1,
        "log_variance_slope": log_variance_slope(&rows).ok(),
        "predicted_slope": 2.0 * l1.ln(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_parsing() {
        assert_eq!(parse_pair("1:2").unwrap(), (1, 2));
        assert!(
            parse_pair("0:2").is_err() && parse_pair("12").is_err() && parse_pair("a:b").is_err()
        );
        assert_eq!(gate_split(None, 3).unwrap(), (1, 2));
        assert_eq!(gate_split(None, 2).unwrap(), (1, 1));
        assert!(gate_split(Some("1:1"), 3).is_err());
    }

    #[test]
    fn qubit_count_needs_two_qubits() {
        assert_eq!(qubit_count(&BuiltinGate::Toffoli.unitary()).unwrap(), 3);
        assert!(qubit_count(&ComplexMatrix::identity(2)).is_err());
        assert!(qubit_count(&ComplexMatrix::identity(6)).is_err());
    }

    #[test]
    fn tolerances_are_checked() {
        let f = Flags {
            tol_gap: Some(-1.0),
            ..Flags::default()
        };
        assert!(solve_options(&f).is_err());
        let f = Flags {
            max_iter: Some(0),
            ..Flags::default()
        };
        assert!(solve_options(&f).is_err());
    }

    #[test]
    fn analytic_values() {
        let mut ctx = Ctx::default();
        let f = Flags {
            schmidt: Some(vec![std::f64::consts::FRAC_1_SQRT_2; 2]),
            ..Flags::default()
        };
        let v = extent_analytic(&f, &mut ctx).unwrap();
        assert!((v["gamma"].as_f64().unwrap() - 3.0).abs() < 1e-7);
        let f = Flags {
            gate: Some("builtin:swap".into()),
            ..Flags::default()
        };
        let v = extent_analytic(&f, &mut Ctx::default()).unwrap();
        assert!((v["gamma"].as_f64().unwrap() - 7.0).abs() < 1e-9);
        let f = Flags {
            gate: Some("builtin:toffoli".into()),
            ..Flags::default()
        };
        assert!(extent_analytic(&f, &mut Ctx::default()).is_err());
    }

    #[test]
    fn builtin_gates_are_hashed_by_canonical_name() {
        let mut ctx = Ctx::default();
        load_gate("builtin:zz(pi/8)", &mut ctx).unwrap();
        let key = BuiltinGate::Zz(std::f64::consts::PI / 8.0).to_string();
        assert_eq!(ctx.inputs["gate"], json!(key));
        assert_eq!(ctx.hashes[&key].len(), 64);
    }
}
