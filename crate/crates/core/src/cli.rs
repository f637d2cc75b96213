//! Command-line front end.
//!
//! Every JSON document has the shape `{"manifest": ..., "report": ...}`; CSV
//! output starts with a `# manifest: {...}` comment line. Exit codes: 0 ok,
//! 1 an asserted scan property failed, 2 invalid input, 3 unreadable or
//! unparsable file, 4 optimizer dimension cap exceeded.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bounds::{self, BoundsConfig, ScanConfig, ScanStepKind};
use crate::channels::{self, LedgerEntry};
use crate::distillsim::{self, CreationCost, Spectrum};
use crate::error::{Error, Result};
use crate::ipbopt::OptimizerConfig;
use crate::measures;
use crate::states::{self, DensityOperator, ParamValue, Params, StateSpec};
use crate::tolerances;

pub const CONFIG_ENV: &str = "LOCINFO_CONFIG";

#[derive(Parser, Debug)]
#[command(name = "locinfo", version, about = "Localizable information and deficit bounds")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the output to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Record wall time in the manifest (output is then not reproducible byte for byte).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Entropies and information content of a state.
    Info {
        #[command(flatten)]
        state: StateArgs,
    },
    /// Upper and lower bounds on localizable information and the deficit.
    Bounds {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Typical-subspace fidelity for a spectrum.
    Distill {
        /// Eigenvalues, comma separated (alternative to a state).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        spectrum: Option<Vec<f64>>,
        #[command(flatten)]
        state: StateArgs,
        /// Copy counts.
        #[arg(long = "n", value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Noise bits per copy.
        #[arg(long, value_delimiter = ',')]
        noise_rate: Vec<f64>,
        /// Report the minimal noise rate reaching this fidelity instead.
        #[arg(long, conflicts_with = "noise_rate")]
        target: Option<f64>,
    },
    /// Protocol files.
    Protocol {
        #[command(subcommand)]
        action: ProtocolAction,
    },
    /// Random search for steps that increase the monotone M.
    Scan {
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Step kinds, comma separated: local_unitary, partial_trace,
        /// local_dephasing, dephased_send, max_mixed_ancilla.
        #[arg(long, value_delimiter = ',')]
        kinds: Vec<String>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long, env = CONFIG_ENV)]
        config: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum ProtocolAction {
    /// Runs a protocol file and prints the information ledger.
    Run {
        #[arg(value_name = "PROTOCOL")]
        protocol_file: PathBuf,
        /// Input state overriding the file's `input`.
        #[command(flatten)]
        state: StateArgs,
    },
}

#[derive(Args, Debug, Default)]
struct StateArgs {
    /// Catalog state name.
    #[arg(long, conflicts_with = "file")]
    catalog: Option<String>,
    /// Catalog parameters `k=v,...`; list values use `;` (e.g. `weights=0.5;0.5`).
    #[arg(long, requires = "catalog")]
    params: Option<String>,
    /// Factor dimensions for max_mixed and product_pure.
    #[arg(long, value_delimiter = ',', requires = "catalog")]
    dims: Option<Vec<usize>>,
    /// State file (JSON).
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OptimizerArgs {
    /// Largest number of copies optimized jointly (1 or 2).
    #[arg(long)]
    copies: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON config file.
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
}

/// Contents of a config file; every section is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub optimizer: Option<OptimizerConfig>,
    pub max_copies: Option<usize>,
    pub scan: Option<ScanConfig>,
}

fn read_config(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        Some(p) => Ok(serde_json::from_str(&std::fs::read_to_string(p)?)?),
        None => Ok(ConfigFile::default()),
    }
}

/// Record embedded in every output.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub inputs: Value,
    pub config: Value,
    pub seed: Option<u64>,
    pub tolerances: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    /// SHA-256 of the compact JSON report.
    pub report_sha256: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn tolerance_echo() -> Value {
    Value::Object(
        tolerances::echo()
            .into_iter()
            .map(|(k, v)| (k.to_string(), json!(v)))
            .collect(),
    )
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Parse(_) => 3,
        Error::CapExceeded { .. } => 4,
        _ => 2,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Dimension(_) => "dimension",
        Error::NotHermitian { .. } => "not_hermitian",
        Error::NotUnitary { .. } => "not_unitary",
        Error::NotProjector { .. } => "not_projector",
        Error::InvalidState(_) => "invalid_state",
        Error::NotPure { .. } => "not_pure",
        Error::UnknownCatalog(_) => "unknown_catalog",
        Error::Parameter { .. } => "parameter",
        Error::Party(_) => "party",
        Error::CapExceeded { .. } => "cap_exceeded",
        Error::Infeasible(_) => "infeasible",
        Error::Step { .. } => "step",
        Error::Parse(_) => "parse",
        Error::Io(_) => "io",
    }
}

fn error_json(e: &Error) -> Value {
    let mut v = json!({
        "error": error_kind(e),
        "message": e.to_string(),
        "exit_code": exit_code(e),
    });
    if let Error::InvalidState(violations) = e {
        v["violations"] = json!(violations);
    }
    v
}

fn parse_params(text: &str) -> Result<Params> {
    let mut out = Params::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("parameter '{item}' is not of the form key=value")))?;
        let nums = v
            .split(';')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("parameter '{k}': '{x}' is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let value = if v.contains(';') {
            ParamValue::List(nums)
        } else {
            ParamValue::Number(nums[0])
        };
        out.insert(k.trim().to_string(), value);
    }
    Ok(out)
}

fn file_digest(path: &Path) -> Result<String> {
    Ok(hex(&Sha256::digest(std::fs::read(path)?)))
}

impl StateArgs {
    fn given(&self) -> bool {
        self.catalog.is_some() || self.file.is_some()
    }

    fn load(&self) -> Result<(DensityOperator, Value)> {
        if let Some(name) = &self.catalog {
            let mut params = match &self.params {
                Some(p) => parse_params(p)?,
                None => Params::new(),
            };
            if let Some(d) = &self.dims {
                params.insert("dims".into(), ParamValue::List(d.iter().map(|&x| x as f64).collect()));
            }
            let rho = states::catalog(name, &params)?;
            Ok((rho, json!({ "catalog": name, "params": params })))
        } else if let Some(path) = &self.file {
            let rho = states::load_state_file(path)?;
            Ok((rho, json!({ "file": path, "file_sha256": file_digest(path)? })))
        } else {
            Err(Error::Parameter {
                name: "state".into(),
                value: f64::NAN,
                reason: "give --catalog or --file".into(),
            })
        }
    }
}

struct Output {
    command: String,
    inputs: Value,
    config: Value,
    seed: Option<u64>,
    report: Value,
    csv: Option<String>,
    failed_assertion: bool,
}

#[derive(Serialize)]
struct PartyInfo {
    party: String,
    dim: usize,
    entropy: f64,
    min_entropy: f64,
}

#[derive(Serialize)]
struct InfoReport {
    n_bits: f64,
    entropy: f64,
    information: f64,
    min_entropy: f64,
    purity: f64,
    pure: bool,
    parties: Vec<PartyInfo>,
}

fn info(rho: &DensityOperator) -> Result<InfoReport> {
    let parties = rho
        .split()
        .parties()
        .iter()
        .map(|p| {
            let red = rho.reduced(p)?;
            Ok(PartyInfo {
                party: p.clone(),
                dim: red.dim(),
                entropy: measures::operator_entropy(&red)?,
                min_entropy: measures::operator_min_entropy(&red)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let s = measures::von_neumann_entropy(rho);
    Ok(InfoReport {
        n_bits: rho.n_bits(),
        entropy: s,
        information: rho.n_bits() - s,
        min_entropy: measures::min_entropy(rho),
        purity: rho.purity(),
        pure: rho.is_pure(),
        parties,
    })
}

#[derive(Serialize)]
struct DistillRow {
    n: usize,
    noise_rate: f64,
    fidelity: f64,
}

#[derive(Serialize)]
struct DistillReport {
    spectrum: Spectrum,
    entropy: f64,
    target: Option<f64>,
    rows: Vec<DistillRow>,
    creation_cost: Vec<CreationCost>,
}

#[derive(Serialize)]
struct ProtocolReport {
    name: String,
    provenance: String,
    steps: usize,
    ledger: Vec<LedgerEntry>,
    final_state: StateSpec,
}

fn execute(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Info { state } => {
            let (rho, inputs) = state.load()?;
            Ok(Output {
                command: "info".into(),
                inputs,
                config: Value::Null,
                seed: None,
                report: serde_json::to_value(info(&rho)?)?,
                csv: None,
                failed_assertion: false,
            })
        }
        Command::Bounds { state, opt } => {
            let (rho, inputs) = state.load()?;
            let file = read_config(opt.config.as_deref())?;
            let mut config = BoundsConfig::default();
            if let Some(o) = file.optimizer {
                config.optimizer = o;
            }
            if let Some(k) = opt.copies.or(file.max_copies) {
                config.max_copies = k;
            }
            if let Some(r) = opt.restarts {
                config.optimizer.restarts = r;
            }
            if let Some(s) = opt.seed {
                config.optimizer.seed = s;
            }
            let report = bounds::deficit_interval(&rho, &config)?;
            Ok(Output {
                command: "bounds".into(),
                inputs,
                seed: Some(config.optimizer.seed),
                config: serde_json::to_value(&config)?,
                report: serde_json::to_value(report)?,
                csv: None,
                failed_assertion: false,
            })
        }
        Command::Distill {
            spectrum,
            state,
            n,
            noise_rate,
            target,
        } => {
            let (spec, inputs) = match (spectrum, state.given()) {
                (Some(p), false) => (Spectrum::new(p.clone())?, json!({ "spectrum": p })),
                (None, true) => {
                    let (rho, inputs) = state.load()?;
                    (Spectrum::of_state(&rho)?, inputs)
                }
                _ => {
                    return Err(Error::Parameter {
                        name: "spectrum".into(),
                        value: f64::NAN,
                        reason: "give exactly one of --spectrum or a state".into(),
                    })
                }
            };
            let rows = match target {
                Some(t) => distillsim::rate_curve(&spec, n, *t)?
                    .into_iter()
                    .map(|p| DistillRow {
                        n: p.n,
                        noise_rate: p.rate,
                        fidelity: p.fidelity,
                    })
                    .collect(),
                None => {
                    if noise_rate.is_empty() {
                        return Err(Error::Parameter {
                            name: "noise_rate".into(),
                            value: f64::NAN,
                            reason: "give --noise-rate or --target".into(),
                        });
                    }
                    let mut rows = Vec::new();
                    for &k in n {
                        for &r in noise_rate {
                            rows.push(DistillRow {
                                n: k,
                                noise_rate: r,
                                fidelity: distillsim::typical_fidelity(&spec, k, r * k as f64)?,
                            });
                        }
                    }
                    rows
                }
            };
            let mut csv = String::from("n,noise_rate,fidelity\n");
            for r in &rows {
                csv.push_str(&format!("{},{},{}\n", r.n, r.noise_rate, r.fidelity));
            }
            let report = DistillReport {
                entropy: spec.entropy(),
                creation_cost: n
                    .iter()
                    .map(|&k| distillsim::creation_cost_of_spectrum(&spec, k))
                    .collect(),
                spectrum: spec,
                target: *target,
                rows,
            };
            Ok(Output {
                command: "distill".into(),
                inputs,
                config: json!({ "n": n, "noise_rate": noise_rate, "target": target }),
                seed: None,
                report: serde_json::to_value(report)?,
                csv: Some(csv),
                failed_assertion: false,
            })
        }
        Command::Protocol {
            action: ProtocolAction::Run { protocol_file, state },
        } => {
            let file = protocol_file;
            let pf = channels::load_protocol_file(file)?;
            let (rho, state_input) = if state.given() {
                state.load()?
            } else {
                match &pf.input {
                    Some(spec) => (spec.resolve()?, json!("file input")),
                    None => {
                        return Err(Error::Parameter {
                            name: "input".into(),
                            value: f64::NAN,
                            reason: "protocol file has no input state; give --catalog or --file".into(),
                        })
                    }
                }
            };
            let run = channels::run_protocol(&rho, &pf.protocol)?;
            let report = ProtocolReport {
                name: pf.protocol.name.clone(),
                provenance: pf.protocol.provenance.clone(),
                steps: pf.protocol.steps.len(),
                ledger: run.ledger,
                final_state: StateSpec::from_state(&run.final_state),
            };
            Ok(Output {
                command: "protocol run".into(),
                inputs: json!({ "protocol": file, "protocol_sha256": file_digest(file)?, "state": state_input }),
                config: Value::Null,
                seed: None,
                report: serde_json::to_value(report)?,
                csv: None,
                failed_assertion: false,
            })
        }
        Command::Scan {
            trials,
            seed,
            kinds,
            restarts,
            config,
        } => {
            let file = read_config(config.as_deref())?;
            let mut cfg = file.scan.unwrap_or_default();
            if let Some(t) = trials {
                cfg.trials = *t;
            }
            if let Some(s) = seed {
                cfg.seed = *s;
            }
            if let Some(r) = restarts {
                cfg.optimizer.restarts = *r;
            }
            if !kinds.is_empty() {
                cfg.kinds = kinds
                    .iter()
                    .map(|k| {
                        serde_json::from_value::<ScanStepKind>(json!(k))
                            .map_err(|_| Error::Parse(format!("unknown step kind '{k}'")))
                    })
                    .collect::<Result<_>>()?;
            }
            let report = bounds::monotonicity_scan(&cfg)?;
            Ok(Output {
                command: "scan".into(),
                inputs: Value::Null,
                seed: Some(cfg.seed),
                config: serde_json::to_value(&cfg)?,
                failed_assertion: !report.violations.is_empty(),
                report: serde_json::to_value(report)?,
                csv: None,
            })
        }
    }
}

fn render(cli: &Cli, out: Output, wall: Option<f64>) -> Result<String> {
    let compact = serde_json::to_vec(&out.report)?;
    let manifest = RunManifest {
        tool: "locinfo",
        version: env!("CARGO_PKG_VERSION"),
        command: out.command,
        inputs: out.inputs,
        config: out.config,
        seed: out.seed,
        tolerances: tolerance_echo(),
        wall_time_s: wall,
        report_sha256: hex(&Sha256::digest(&compact)),
    };
    let format = cli
        .format
        .unwrap_or(if out.csv.is_some() { Format::Csv } else { Format::Json });
    match (format, out.csv) {
        (Format::Csv, Some(csv)) => Ok(format!("# manifest: {}\n{csv}", serde_json::to_string(&manifest)?)),
        (Format::Csv, None) => Err(Error::Parameter {
            name: "format".into(),
            value: f64::NAN,
            reason: "csv output is only available for distill".into(),
        }),
        (Format::Json, _) => {
            let doc = json!({ "manifest": manifest, "report": out.report });
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                return 2;
            }
            let _ = stdout.write_all(text.as_bytes());
            return 0;
        }
    };
    let start = Instant::now();
    let result = execute(&cli).and_then(|out| {
        let failed = out.failed_assertion;
        let wall = cli.timing.then(|| start.elapsed().as_secs_f64());
        let text = render(&cli, out, wall)?;
        match &cli.out {
            Some(path) => std::fs::write(path, text.as_bytes())?,
            None => stdout.write_all(text.as_bytes())?,
        }
        Ok(failed)
    });
    match result {
        Ok(false) => 0,
        Ok(true) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "{}", error_json(&e));
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("locinfo").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn params_parse() {
        let p = parse_params("p=0.5, d=3,weights=0.5;0.5").unwrap();
        assert_eq!(p["p"], ParamValue::Number(0.5));
        assert_eq!(p["d"], ParamValue::Number(3.0));
        assert_eq!(p["weights"], ParamValue::List(vec![0.5, 0.5]));
        assert!(parse_params("p").is_err());
        assert!(parse_params("p=x").is_err());
    }

    #[test]
    fn info_bell() {
        let (code, out, _) = call(&["info", "--catalog", "bell"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!((v["report"]["information"].as_f64().unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(v["manifest"]["command"], "info");
    }

    #[test]
    fn info_max_mixed_dims() {
        let (code, out, _) = call(&["info", "--catalog", "max_mixed", "--dims", "2,2"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert!(v["report"]["information"].as_f64().unwrap().abs() < 1e-9);
    }

    #[test]
    fn exit_codes() {
        let (code, _, err) = call(&["info", "--catalog", "nonsense"]);
        assert_eq!(code, 2);
        let v: Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"], "unknown_catalog");
        let (code, _, _) = call(&["info", "--file", "/nonexistent/state.json"]);
        assert_eq!(code, 3);
        let (code, _, err) = call(&["bounds", "--catalog", "max_mixed", "--dims", "8,16", "--copies", "1"]);
        assert_eq!(code, 4, "{err}");
        let (code, _, _) = call(&["info", "--catalog", "werner", "--params", "p=1.5"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn distill_csv() {
        let (code, out, _) = call(&["distill", "--spectrum", "0.5,0.5", "--n", "4", "--noise-rate", "0.5,1"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert!(lines[0].starts_with("# manifest: "));
        assert_eq!(lines[1], "n,noise_rate,fidelity");
        assert_eq!(lines[2], "4,0.5,0.25");
        assert_eq!(lines[3], "4,1,1");
    }

    #[test]
    fn csv_rejected_for_json_commands() {
        let (code, _, _) = call(&["info", "--catalog", "bell", "--format", "csv"]);
        assert_eq!(code, 2);
    }
}
