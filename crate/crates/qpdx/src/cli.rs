//! Argument parsing, config files and output.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::commands;
use crate::formats::load_json;
use crate::report::Report;
use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "qpdx",
    version,
    about = "Quasiprobability extents and cut-circuit estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// PPT lower bound on the extent of a bipartite channel (SDP).
    ExtentPpt(Flags),
    /// PPT extent of a bipartite state (SDP).
    ExtentState(Flags),
    /// Closed-form extent of a pure state or a two-qubit unitary.
    ExtentAnalytic(Flags),
    /// Minimal-l1 QPD over a dictionary of local operations (LP).
    Synth(Flags),
    /// Monte Carlo estimate of a cut circuit.
    CutRun(Flags),
    /// Estimator variance against the number of cut CNOTs.
    Sweep(Flags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ExtentPpt(_) => "extent-ppt",
            Self::ExtentState(_) => "extent-state",
            Self::ExtentAnalytic(_) => "extent-analytic",
            Self::Synth(_) => "synth",
            Self::CutRun(_) => "cut-run",
            Self::Sweep(_) => "sweep",
        }
    }

    fn flags(&self) -> &Flags {
        match self {
            Self::ExtentPpt(f)
            | Self::ExtentState(f)
            | Self::ExtentAnalytic(f)
            | Self::Synth(f)
            | Self::CutRun(f)
            | Self::Sweep(f) => f,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReadoutArg {
    Expectation,
    Sampled,
}

impl ReadoutArg {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Expectation => "expectation",
            Self::Sampled => "sampled",
        }
    }
}

/// Every setting, as a flag. A config file holds the same keys.
#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    /// JSON file with any of these settings; flags win over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `builtin:cnot|cz|swap|toffoli|zz(theta)` or a unitary matrix file.
    #[arg(long)]
    pub gate: Option<String>,
    /// Choi channel file (extent-ppt, synth) or state file (extent-state).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// `a:b`, qubits on each side for gates, local dimensions for states.
    #[arg(long)]
    pub split: Option<String>,
    /// Comma-separated Schmidt coefficients (amplitudes).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub schmidt: Option<Vec<f64>>,
    /// Circuit file (cut-run).
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// QPD file or synth report for the cut CNOT (sweep).
    #[arg(long)]
    pub qpd: Option<PathBuf>,
    /// `lo-star` or a dictionary file (synth).
    #[arg(long)]
    pub dict: Option<String>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated cut counts (sweep).
    #[arg(long, value_delimiter = ',')]
    pub cuts: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub readout: Option<ReadoutArg>,
    #[arg(long)]
    pub tol_gap: Option<f64>,
    #[arg(long)]
    pub tol_feas: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write the solver problem as JSON (extent-ppt, extent-state).
    #[arg(long)]
    pub dump_sdp: Option<PathBuf>,
}

/// The config file schema. Relative paths in it are resolved against the
/// directory of the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    /// Must name the subcommand being run, when present.
    pub command: Option<String>,
    pub gate: Option<String>,
    pub input: Option<PathBuf>,
    pub split: Option<String>,
    pub schmidt: Option<Vec<f64>>,
    pub circuit: Option<PathBuf>,
    pub qpd: Option<PathBuf>,
    pub dict: Option<String>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub cuts: Option<Vec<usize>>,
    pub readout: Option<ReadoutArg>,
    pub tol_gap: Option<f64>,
    pub tol_feas: Option<f64>,
    pub max_iter: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub dump_sdp: Option<PathBuf>,
}

impl ConfigFile {
    fn resolve_paths(mut self, base: &Path) -> Self {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p.as_mut() {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.input);
        fix(&mut self.circuit);
        fix(&mut self.qpd);
        fix(&mut self.out);
        fix(&mut self.dump_sdp);
        if let Some(g) = &self.gate {
            if !g.starts_with(crate::builtin::PREFIX) && Path::new(g).is_relative() {
                self.gate = Some(base.join(g).to_string_lossy().into_owned());
            }
        }
        if let Some(d) = &self.dict {
            if d != commands::LO_STAR && Path::new(d).is_relative() {
                self.dict = Some(base.join(d).to_string_lossy().into_owned());
            }
        }
        self
    }
}

/// Flags merged over the config file.
pub fn resolve(command: &Command) -> Result<Flags, CliError> {
    let flags = command.flags().clone();
    let Some(path) = flags.config.clone() else {
        return Ok(flags);
    };
    let cfg: ConfigFile = load_json(&path)?.value;
    if let Some(c) = &cfg.command {
        if c != command.name() {
            return Err(CliError::Validation(format!(
                "{}: config is for `{c}`, not `{}`",
                path.display(),
                command.name()
            )));
        }
    }
    let cfg = cfg.resolve_paths(path.parent().unwrap_or_else(|| Path::new(".")));
    Ok(Flags {
        config: flags.config,
        gate: flags.gate.or(cfg.gate),
        input: flags.input.or(cfg.input),
        split: flags.split.or(cfg.split),
        schmidt: flags.schmidt.or(cfg.schmidt),
        circuit: flags.circuit.or(cfg.circuit),
        qpd: flags.qpd.or(cfg.qpd),
        dict: flags.dict.or(cfg.dict),
        shots: flags.shots.or(cfg.shots),
        seed: flags.seed.or(cfg.seed),
        cuts: flags.cuts.or(cfg.cuts),
        readout: flags.readout.or(cfg.readout),
        tol_gap: flags.tol_gap.or(cfg.tol_gap),
        tol_feas: flags.tol_feas.or(cfg.tol_feas),
        max_iter: flags.max_iter.or(cfg.max_iter),
        out: flags.out.or(cfg.out),
        format: flags.format.or(cfg.format),
        dump_sdp: flags.dump_sdp.or(cfg.dump_sdp),
    })
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(command: &Command) -> Result<(), CliError> {
    let flags = resolve(command)?;
    let payload = commands::run(command, &flags)?;
    let report = Report::new(payload);
    let text = match flags.format.unwrap_or(Format::Json) {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv()?,
    };
    write_output(flags.out.as_deref(), &text)
}

/// Runs one command and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.exit_code() == 0 { 0 } else { 1 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
