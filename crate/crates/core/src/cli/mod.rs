//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation failure or engine error, 2 usage error (bad
//! flags, parameters outside a protocol's domain, no root).

mod format;

pub use format::fmt_g;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::montecarlo::{validate_against_exact, ShotConfig, Validation, DEFAULT_SHOTS};
use crate::protocols::{
    crossover_r, czcz_optical_closed_form, hybrid_optical_teleport_reflectivity, Protocol, ProtocolReport,
};
use format::num;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const CONFIG_SPEC_VERSION: &str = "1";
pub const DEFAULT_SEED: u64 = 20_251_015;
/// BS-scheme error level in units of `e^{-2r} V0`.
pub const REFERENCE_LEVEL: f64 = 2.0;

#[derive(Debug, Parser)]
#[command(name = "cvtel", version, about = "Continuous-variable teleportation simulator")]
pub struct Cli {
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write output to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Report variances in units of V0 instead of e^{-2r} V0.
    #[arg(long, global = true)]
    pub absolute: bool,
    /// JSON defaults file; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    Bs,
    Czcz,
    Hybrid,
    CzczOptical,
    HybridOptical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    G1,
    #[value(name = "R")]
    Reflectivity,
    R,
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Model {
    #[default]
    Engine,
    ClosedForm,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long = "r", allow_negative_numbers = true)]
    pub r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub g1: Option<f64>,
    /// Defaults to -g1 for czcz.
    #[arg(long, allow_negative_numbers = true)]
    pub g2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta2: Option<f64>,
    /// Beamsplitter reflectivity of the optical CZ.
    #[arg(long = "R", allow_negative_numbers = true)]
    pub reflectivity: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one protocol and print its report.
    Simulate {
        #[arg(value_enum)]
        protocol: ProtocolKind,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Evaluate a protocol over a parameter grid.
    Sweep {
        #[arg(value_enum)]
        protocol: ProtocolKind,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, allow_negative_numbers = true)]
        hi: f64,
        #[arg(long)]
        steps: usize,
        /// closed-form is only available for czcz-optical.
        #[arg(long, value_enum, default_value_t = Model::Engine)]
        model: Model,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Smallest optical CZ reflectivity at which the worst quadrature error reaches the threshold.
    Crossover {
        #[arg(long, default_value_t = REFERENCE_LEVEL, allow_negative_numbers = true)]
        threshold: f64,
    },
    /// Monte Carlo cross-check of the canonical protocols.
    Validate {
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long = "r")]
        r: Option<f64>,
        /// Add DELTA to every feedforward gain (debugging aid; validation should then fail).
        #[arg(long, value_name = "DELTA", allow_negative_numbers = true)]
        corrupt_gain: Option<f64>,
    },
}

/// Optional defaults read from `--config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub spec_version: String,
    #[serde(default)]
    pub format: Option<OutputFormat>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub absolute: Option<bool>,
    #[serde(default)]
    pub shots: Option<u64>,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub g1: Option<f64>,
    #[serde(default)]
    pub g2: Option<f64>,
    #[serde(default)]
    pub theta1: Option<f64>,
    #[serde(default)]
    pub theta2: Option<f64>,
    #[serde(default, rename = "R")]
    pub reflectivity: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: ConfigFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?;
        if cfg.spec_version != CONFIG_SPEC_VERSION {
            return Err(CliError::Usage(format!(
                "config spec_version {:?} unsupported (expected {CONFIG_SPEC_VERSION:?})",
                cfg.spec_version
            )));
        }
        Ok(cfg)
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::NoRoot(_) => CliError::Usage(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

/// Global settings after merging flags, config and defaults.
#[derive(Debug, Clone)]
struct Settings {
    format: OutputFormat,
    seed: u64,
    absolute: bool,
    config: ConfigFile,
}

impl ParamArgs {
    /// Fills unset flags from the config, skipping config values the protocol does not use
    /// (only an explicit flag is an error there).
    fn merged(&self, cfg: &ConfigFile, kind: ProtocolKind) -> ParamArgs {
        use ProtocolKind::*;
        let weights = matches!(kind, Czcz | Hybrid);
        let angles = kind == Hybrid;
        let optical = matches!(kind, CzczOptical | HybridOptical);
        let pick = |flag: Option<f64>, conf: Option<f64>, used: bool| flag.or(conf.filter(|_| used));
        ParamArgs {
            r: self.r.or(cfg.r),
            g1: pick(self.g1, cfg.g1, weights),
            g2: pick(self.g2, cfg.g2, kind == Czcz),
            theta1: pick(self.theta1, cfg.theta1, angles),
            theta2: pick(self.theta2, cfg.theta2, angles),
            reflectivity: pick(self.reflectivity, cfg.reflectivity, optical),
        }
    }

    fn protocol(&self, kind: ProtocolKind) -> Result<Protocol, CliError> {
        let r = self.r.unwrap_or(1.0);
        let g1 = self.g1.unwrap_or(1.0);
        let unused = |name: &str, set: bool| {
            if set {
                Err(CliError::Usage(format!("--{name} does not apply to {kind:?}")))
            } else {
                Ok(())
            }
        };
        let p = match kind {
            ProtocolKind::Bs => {
                unused("g1", self.g1.is_some())?;
                unused("g2", self.g2.is_some())?;
                unused("theta1/--theta2", self.theta1.is_some() || self.theta2.is_some())?;
                unused("R", self.reflectivity.is_some())?;
                Protocol::Bs { r }
            }
            ProtocolKind::Czcz => {
                unused("theta1/--theta2", self.theta1.is_some() || self.theta2.is_some())?;
                unused("R", self.reflectivity.is_some())?;
                Protocol::Czcz {
                    r,
                    g1,
                    g2: self.g2.unwrap_or(-g1),
                }
            }
            ProtocolKind::Hybrid => {
                unused("g2", self.g2.is_some())?;
                unused("R", self.reflectivity.is_some())?;
                Protocol::Hybrid {
                    r,
                    g1,
                    theta1: self.theta1.unwrap_or(-FRAC_PI_4),
                    theta2: self.theta2.unwrap_or(FRAC_PI_4),
                }
            }
            ProtocolKind::CzczOptical => {
                unused("g1/--g2", self.g1.is_some() || self.g2.is_some())?;
                unused("theta1/--theta2", self.theta1.is_some() || self.theta2.is_some())?;
                Protocol::CzczOptical {
                    r,
                    reflectivity: self.reflectivity.unwrap_or(0.25),
                }
            }
            ProtocolKind::HybridOptical => {
                unused("g1/--g2", self.g1.is_some() || self.g2.is_some())?;
                unused("theta1/--theta2", self.theta1.is_some() || self.theta2.is_some())?;
                Protocol::HybridOptical {
                    r,
                    reflectivity: self.reflectivity.unwrap_or_else(hybrid_optical_teleport_reflectivity),
                }
            }
        };
        Ok(p)
    }
}

/// JSON form of a [`ProtocolReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub protocol: String,
    pub params: BTreeMap<String, f64>,
    pub signal_gain: [[f64; 2]; 2],
    pub noise_terms: Vec<NoiseTermJson>,
    pub mse_x: f64,
    pub mse_y: f64,
    pub is_teleportation: bool,
    pub signal_sign: [f64; 2],
    pub units: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseTermJson {
    pub quadrature: String,
    pub symbol: String,
    pub coefficient: f64,
}

fn units(absolute: bool) -> &'static str {
    if absolute {
        "V0"
    } else {
        "e^-2r V0"
    }
}

fn scaled_mse(rep: &ProtocolReport, absolute: bool) -> (f64, f64) {
    if absolute {
        rep.absolute_mse()
    } else {
        (rep.mse_x, rep.mse_y)
    }
}

impl ReportJson {
    pub fn new(protocol: &Protocol, rep: &ProtocolReport, absolute: bool) -> Self {
        let (mse_x, mse_y) = scaled_mse(rep, absolute);
        ReportJson {
            protocol: protocol.name().into(),
            params: protocol.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            signal_gain: rep.signal_gain,
            noise_terms: rep
                .noise_terms
                .iter()
                .map(|t| NoiseTermJson {
                    quadrature: t.quadrature.to_string(),
                    symbol: t.symbol.clone(),
                    coefficient: t.coefficient,
                })
                .collect(),
            mse_x,
            mse_y,
            is_teleportation: rep.is_teleportation,
            signal_sign: rep.signal_sign,
            units: units(absolute).into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: String,
    pub value: f64,
    pub mse_x: f64,
    pub mse_y: f64,
    pub is_teleportation: bool,
    pub reference_level: f64,
}

pub const SWEEP_HEADER: &str = "param,value,mse_x,mse_y,is_teleportation,reference_level";

/// Parses `args` (including the program name), runs, and returns the exit code.
/// Normal output goes to `stdout` or `--out`; diagnostics to `stderr`.
pub fn run_with(args: impl IntoIterator<Item = String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok((text, code)) => {
            if let Err(e) = emit(&cli, &text, stdout) {
                let _ = writeln!(stderr, "error: {}", e.message());
                return e.exit_code();
            }
            code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn run_from_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args(), &mut stdout.lock(), &mut stderr.lock())
}

fn emit(cli: &Cli, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Failure(format!("cannot write output: {e}"))),
    }
}

fn settings(cli: &Cli) -> Result<Settings, CliError> {
    let config = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    Ok(Settings {
        format: cli.format.or(config.format).unwrap_or(OutputFormat::Json),
        seed: cli.seed.or(config.seed).unwrap_or(DEFAULT_SEED),
        absolute: cli.absolute || config.absolute.unwrap_or(false),
        config,
    })
}

/// Runs the parsed command; returns the rendered output and exit code.
pub fn execute(cli: &Cli) -> Result<(String, i32), CliError> {
    let s = settings(cli)?;
    match &cli.command {
        Command::Simulate { protocol, params } => {
            let p = params.merged(&s.config, *protocol).protocol(*protocol)?;
            let rep = p.run()?;
            Ok((render_report(&p, &rep, &s), EXIT_OK))
        }
        Command::Sweep {
            protocol,
            param,
            lo,
            hi,
            steps,
            model,
            params,
        } => {
            let rows = sweep(*protocol, *param, *lo, *hi, *steps, *model, &params.merged(&s.config, *protocol), s.absolute)?;
            Ok((render_sweep(&rows, s.format), EXIT_OK))
        }
        Command::Crossover { threshold } => {
            let r = crossover_r(*threshold)?;
            let text = match s.format {
                OutputFormat::Json => {
                    let v = serde_json::json!({ "threshold": threshold, "R": r });
                    format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
                }
                OutputFormat::Csv => format!("threshold,R\n{},{}\n", num(*threshold), num(r)),
            };
            Ok((text, EXIT_OK))
        }
        Command::Validate { shots, r, corrupt_gain } => {
            let shots = shots.or(s.config.shots).unwrap_or(DEFAULT_SHOTS);
            let r = r.or(s.config.r).unwrap_or(1.0);
            let results = Protocol::canonical(r)
                .into_iter()
                .map(|p| {
                    let mut c = ShotConfig::new(p, s.seed).with_shots(shots);
                    c.gain_perturbation = corrupt_gain.unwrap_or(0.0);
                    validate_against_exact(&c)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let code = if results.iter().all(|v| v.pass) { EXIT_OK } else { EXIT_FAILURE };
            Ok((render_validation(&results, s.format), code))
        }
    }
}

fn render_report(p: &Protocol, rep: &ProtocolReport, s: &Settings) -> String {
    let j = ReportJson::new(p, rep, s.absolute);
    match s.format {
        OutputFormat::Json => format!("{}\n", serde_json::to_string_pretty(&j).expect("json")),
        OutputFormat::Csv => {
            let mut out = String::from("field,value\n");
            out.push_str(&format!("protocol,{}\n", j.protocol));
            for (k, v) in p.params() {
                out.push_str(&format!("param.{k},{}\n", num(v)));
            }
            for (q, row) in ["x", "y"].iter().zip(&j.signal_gain) {
                for (c, v) in ["x", "y"].iter().zip(row) {
                    out.push_str(&format!("gain.{q}_out.{c}_in,{}\n", num(*v)));
                }
            }
            for t in &j.noise_terms {
                out.push_str(&format!("noise.{}_out.{},{}\n", t.quadrature, t.symbol, num(t.coefficient)));
            }
            out.push_str(&format!("mse_x,{}\nmse_y,{}\n", num(j.mse_x), num(j.mse_y)));
            out.push_str(&format!("is_teleportation,{}\nunits,{}\n", j.is_teleportation, j.units));
            out
        }
    }
}

fn param_name(p: SweepParam) -> &'static str {
    match p {
        SweepParam::G1 => "g1",
        SweepParam::Reflectivity => "R",
        SweepParam::R => "r",
        SweepParam::Theta => "theta",
    }
}

/// Evaluates the sweep grid `lo + k (hi - lo)/(steps - 1)`, in grid order.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    kind: ProtocolKind,
    param: SweepParam,
    lo: f64,
    hi: f64,
    steps: usize,
    model: Model,
    fixed: &ParamArgs,
    absolute: bool,
) -> Result<Vec<SweepRow>, CliError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::Usage(format!("sweep range needs lo < hi (got {lo}, {hi})")));
    }
    if steps < 2 {
        return Err(CliError::Usage("sweep needs at least 2 steps".into()));
    }
    let applicable = match param {
        SweepParam::R => true,
        SweepParam::G1 => matches!(kind, ProtocolKind::Czcz | ProtocolKind::Hybrid),
        SweepParam::Reflectivity => matches!(kind, ProtocolKind::CzczOptical | ProtocolKind::HybridOptical),
        SweepParam::Theta => kind == ProtocolKind::Hybrid,
    };
    if !applicable {
        return Err(CliError::Usage(format!("--param {} does not apply to {kind:?}", param_name(param))));
    }
    if model == Model::ClosedForm && kind != ProtocolKind::CzczOptical {
        return Err(CliError::Usage("--model closed-form is only available for czcz-optical".into()));
    }
    let name = param_name(param);
    (0..steps)
        .into_par_iter()
        .map(|k| {
            let value = if k == steps - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (steps - 1) as f64
            };
            let mut a = fixed.clone();
            match param {
                SweepParam::G1 => {
                    a.g1 = Some(value);
                    if kind == ProtocolKind::Czcz && fixed.g2.is_none() {
                        a.g2 = Some(-value);
                    }
                }
                SweepParam::Reflectivity => a.reflectivity = Some(value),
                SweepParam::R => a.r = Some(value),
                SweepParam::Theta => a.theta2 = Some(value),
            }
            let p = a.protocol(kind)?;
            let r = p.squeezing();
            let unit = if absolute {
                (-2.0 * r).exp() * crate::algebra::V0
            } else {
                1.0
            };
            let (mx, my, tele) = match (model, p) {
                (Model::ClosedForm, Protocol::CzczOptical { reflectivity, .. }) => {
                    crate::protocols::OpticalCzSpec::new(reflectivity, r)?;
                    let (x, y) = czcz_optical_closed_form(reflectivity);
                    (x, y, true)
                }
                _ => {
                    let rep = p.run()?;
                    (rep.mse_x, rep.mse_y, rep.is_teleportation)
                }
            };
            Ok(SweepRow {
                param: name.into(),
                value,
                mse_x: mx * unit,
                mse_y: my * unit,
                is_teleportation: tele,
                reference_level: REFERENCE_LEVEL * unit,
            })
        })
        .collect()
}

pub fn render_sweep(rows: &[SweepRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => format!("{}\n", serde_json::to_string_pretty(rows).expect("json")),
        OutputFormat::Csv => {
            let mut out = format!("{SWEEP_HEADER}\n");
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.param,
                    num(r.value),
                    num(r.mse_x),
                    num(r.mse_y),
                    r.is_teleportation,
                    num(r.reference_level)
                ));
            }
            out
        }
    }
}

fn render_validation(results: &[Validation], format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => format!("{}\n", serde_json::to_string_pretty(results).expect("json")),
        OutputFormat::Csv => {
            let mut out = String::from(
                "protocol,pass,shots,mse_x_exact,mse_x_mc,stderr_x,mse_y_exact,mse_y_mc,stderr_y,gain_z\n",
            );
            for v in results {
                let e = &v.estimate;
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    v.protocol.name(),
                    if v.pass { "pass" } else { "fail" },
                    e.n_shots,
                    num(v.exact_mse[0]),
                    num(e.mse_x),
                    num(e.stderr_x),
                    num(v.exact_mse[1]),
                    num(e.mse_y),
                    num(e.stderr_y),
                    num(v.gain_z)
                ));
            }
            out
        }
    }
}
