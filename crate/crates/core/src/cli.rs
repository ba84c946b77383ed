use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::frseq::DEFAULT_TOLERANCE;
use crate::generator::suite::run_suite;
use crate::generator::{gen_infeasible, gen_weak, mess, GenError, GenParams};
use crate::instance::{CertificateBundle, Instance};
use crate::io::native::{read_native, write_native};
use crate::io::sdpa::{export_lmi, export_sdpa, import_sdpa};
use crate::io::{NativeDocument, ParseError, SIDECAR_EXTENSION};
use crate::linalg::Rat;
use crate::reduction::ramana::{build_ramana_dual, RamanaDual};
use crate::reduction::{facial_reduce_polyhedral, strictly_feasible_reformulation};
use crate::verifier::lp::{lp_feasibility_oracle, lp_feasibility_oracle_primal, LpVerdict};
use crate::verifier::{verify_bundle_tol, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_REJECTED: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse { .. } => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn config(e: impl ToString) -> CliError {
    CliError::Config(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "frcert", version, about = "Exact certificates for infeasible semidefinite systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Native,
    Sdpa,
}

#[derive(Args, Debug, Clone)]
pub struct GenArgs {
    /// named parameter set: m10 or m20
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    /// block sizes p_1,..,p_{k+1}
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<usize>>,
    /// block sizes q_1,..,q_{l+1}
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<usize>>,
    #[arg(long)]
    pub range: Option<i64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// apply random row operations and a congruence
    #[arg(long)]
    pub mess: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Native)]
    pub format: Format,
    /// omit certificates from the output
    #[arg(long)]
    pub no_certificates: bool,
}

impl GenArgs {
    fn params(&self) -> Result<GenParams, CliError> {
        let mut p = match &self.preset {
            Some(name) => {
                GenParams::preset(name).ok_or_else(|| config(format!("unknown preset '{name}' (use m10 or m20)")))?
            }
            None => GenParams { n: 0, m: 0, p: Vec::new(), q: Vec::new(), entry_range: 2, seed: 0, mess: false },
        };
        if let Some(n) = self.n {
            p.n = n;
        }
        if let Some(m) = self.m {
            p.m = m;
        }
        if let Some(v) = &self.p {
            p.p = v.clone();
        }
        if let Some(v) = &self.q {
            p.q = v.clone();
        }
        if let Some(r) = self.range {
            p.entry_range = r;
        }
        p.seed = self.seed;
        p.mess = self.mess;
        Ok(p)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// staircase infeasible dual system
    GenerateInfeasible(GenArgs),
    /// weakly infeasible dual system with both certificates
    GenerateWeak(GenArgs),
    /// scramble a dual instance and transform its certificates
    Mess {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// check every certificate attached to an instance
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// certificate sidecar; defaults to the input stem with a .cert extension when present
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Native)]
        format: Format,
        /// residual tolerance for the floating-point rotation path
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// facial reduction of a polyhedral dual system
    Reduce {
        #[arg(long = "in")]
        input: PathBuf,
        /// write the strictly feasible reformulation here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// extended dual of a primal psd system as an SDPA file
    RamanaDual {
        #[arg(long = "in")]
        input: PathBuf,
        /// number of reduction steps; defaults to n - 1
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// the eight generated categories with manifest
    Suite {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// native dual instance to SDPA, certificates to a sidecar
    Export {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// SDPA file to a native document
    Import {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn parse_native(path: &Path) -> Result<NativeDocument, CliError> {
    read_native(&read(path)?).map_err(|source| CliError::Parse { path: path.display().to_string(), source })
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension(SIDECAR_EXTENSION)
}

fn emit(out: &mut dyn Write, v: Value) -> Result<(), CliError> {
    writeln!(out, "{v}").map_err(|source| CliError::Io { path: "stdout".into(), source })
}

fn emit_text(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "stdout".into(), source })
}

fn strings(v: &[Rat]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn write_document(
    out: &mut dyn Write,
    doc: &NativeDocument,
    path: Option<&Path>,
    format: Format,
) -> Result<(), CliError> {
    match format {
        Format::Native => match path {
            Some(p) => write_file(p, &write_native(doc)),
            None => emit_text(out, &write_native(doc)),
        },
        Format::Sdpa => {
            let Some(Instance::Dual(inst)) = &doc.instance else {
                return Err(config("only dual psd instances have an SDPA form"));
            };
            let sdpa = export_sdpa(inst);
            match path {
                Some(p) => {
                    write_file(p, &sdpa.text)?;
                    if !doc.bundle.is_empty() {
                        let side = NativeDocument { instance: None, bundle: doc.bundle.clone() };
                        write_file(&sidecar_path(p), &write_native(&side))?;
                    }
                    Ok(())
                }
                None if doc.bundle.is_empty() => emit_text(out, &sdpa.text),
                None => Err(config("SDPA output with certificates needs --out for the sidecar file")),
            }
        }
    }
}

fn generate(out: &mut dyn Write, args: &GenArgs, weak: bool) -> Result<i32, CliError> {
    let params = args.params()?;
    let (inst, mut bundle) = if weak { gen_weak(&params)? } else { gen_infeasible(&params)? };
    if args.no_certificates {
        bundle = CertificateBundle { provenance: bundle.provenance, ..CertificateBundle::default() };
    }
    let doc = NativeDocument::new(Instance::Dual(inst), bundle);
    write_document(out, &doc, args.out.as_deref(), args.format)?;
    if let Some(p) = &args.out {
        emit(out, json!({"event": "generated", "path": p.display().to_string(), "seed": params.seed}))?;
    }
    Ok(EXIT_OK)
}

fn load_with_sidecar(input: &Path, cert: Option<&Path>, format: Format) -> Result<NativeDocument, CliError> {
    let mut doc = match format {
        Format::Native => parse_native(input)?,
        Format::Sdpa => {
            let inst = import_sdpa(&read(input)?)
                .map_err(|source| CliError::Parse { path: input.display().to_string(), source })?;
            NativeDocument::new(Instance::Dual(inst), CertificateBundle::default())
        }
    };
    let side = match cert {
        Some(p) => Some(p.to_path_buf()),
        None => Some(sidecar_path(input)).filter(|p| p.exists() && p != input),
    };
    if let Some(p) = side {
        doc.attach(parse_native(&p)?);
    }
    Ok(doc)
}

fn verdict_line(v: &Verdict) -> Value {
    let mut j = v.to_json();
    j["event"] = json!("verdict");
    j
}

fn verify(out: &mut dyn Write, doc: &NativeDocument, tolerance: f64) -> Result<i32, CliError> {
    let inst = doc.instance.as_ref().ok_or_else(|| config("the input holds no instance"))?;
    let verdicts = verify_bundle_tol(inst, &doc.bundle, tolerance).map_err(config)?;
    for v in &verdicts {
        emit(out, verdict_line(v))?;
    }
    let oracle = match inst {
        Instance::VectorDual(v) => Some(lp_feasibility_oracle(v).map_err(config)?),
        Instance::VectorPrimal(v) => Some(lp_feasibility_oracle_primal(v).map_err(config)?),
        _ => None,
    };
    if let Some(o) = &oracle {
        let line = match o {
            LpVerdict::Feasible(y) => json!({"event": "oracle", "status": "feasible", "point": strings(y)}),
            LpVerdict::StronglyInfeasible { alternative } => {
                json!({"event": "oracle", "status": "strongly infeasible", "alternative": strings(alternative)})
            }
        };
        emit(out, line)?;
    }
    let proven = !verdicts.is_empty() && verdicts.iter().all(Verdict::is_proven);
    emit(out, json!({"event": "summary", "instance": inst.kind(), "verdicts": verdicts.len(), "proven": proven}))?;
    Ok(if proven || (verdicts.is_empty() && oracle.is_some()) { EXIT_OK } else { EXIT_REJECTED })
}

fn reduce(out: &mut dyn Write, input: &Path, target: Option<&Path>) -> Result<i32, CliError> {
    let doc = parse_native(input)?;
    let Some(Instance::VectorDual(inst)) = &doc.instance else {
        return Err(config("reduce needs a dual-vector instance over orthant, zero and free blocks"));
    };
    let r = facial_reduce_polyhedral(inst).map_err(config)?;
    let f = strictly_feasible_reformulation(inst, &r).map_err(config)?;
    emit(
        out,
        json!({
            "event": "reduction",
            "steps": r.steps,
            "step_bound": crate::reduction::ReductionResult::step_bound(inst),
            "face_support": r.minimal_face.support,
            "sequence": r.sequence.iter().map(|y| strings(y)).collect::<Vec<_>>(),
            "interior_point": strings(&f.interior_point),
            "leading_zero_rows": f.leading_zero_rows,
        }),
    )?;
    if let Some(p) = target {
        let doc = NativeDocument::new(Instance::VectorDual(f.system), CertificateBundle::default());
        write_file(p, &write_native(&doc))?;
    }
    Ok(EXIT_OK)
}

fn ramana(out: &mut dyn Write, input: &Path, k: Option<usize>, target: Option<&Path>) -> Result<i32, CliError> {
    let doc = parse_native(input)?;
    let Some(Instance::Primal(inst)) = &doc.instance else {
        return Err(config("ramana-dual needs a primal-sdp instance"));
    };
    let k = k.unwrap_or(inst.n.saturating_sub(1));
    let rd = build_ramana_dual(inst, k).map_err(config)?;
    let (vars, eqs, blocks) = RamanaDual::expected_counts(inst.n, inst.m(), k);
    let sdpa = export_lmi(&rd.program);
    emit(
        out,
        json!({"event": "ramana-dual", "k": k, "variables": vars, "equalities": eqs, "psd_blocks": blocks, "lossy": sdpa.lossy}),
    )?;
    match target {
        Some(p) => write_file(p, &sdpa.text)?,
        None => emit_text(out, &sdpa.text)?,
    }
    Ok(EXIT_OK)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::GenerateInfeasible(a) => generate(out, &a, false),
        Command::GenerateWeak(a) => generate(out, &a, true),
        Command::Mess { input, seed, out: target } => {
            let doc = parse_native(&input)?;
            let Some(Instance::Dual(inst)) = &doc.instance else {
                return Err(config("mess needs a dual-sdp instance"));
            };
            let (inst, bundle) = mess(inst, &doc.bundle, seed)?;
            write_document(out, &NativeDocument::new(Instance::Dual(inst), bundle), target.as_deref(), Format::Native)?;
            Ok(EXIT_OK)
        }
        Command::Verify { input, cert, format, tolerance } => {
            if !(tolerance > 0.0 && tolerance.is_finite()) {
                return Err(config("tolerance must be positive"));
            }
            let doc = load_with_sidecar(&input, cert.as_deref(), format)?;
            verify(out, &doc, tolerance)
        }
        Command::Reduce { input, out: target } => reduce(out, &input, target.as_deref()),
        Command::RamanaDual { input, k, out: target } => ramana(out, &input, k, target.as_deref()),
        Command::Suite { out: dir, count, seed } => {
            let manifest = run_suite(&dir, count, seed).map_err(|e| match e {
                crate::generator::suite::SuiteError::Io { path, source } => {
                    CliError::Io { path: path.display().to_string(), source }
                }
                other => config(other),
            })?;
            let ok = manifest.all_verified();
            emit(
                out,
                json!({"event": "suite", "instances": manifest.entries.len(), "all_verified": ok, "dir": dir.display().to_string()}),
            )?;
            Ok(if ok { EXIT_OK } else { EXIT_REJECTED })
        }
        Command::Export { input, out: target } => {
            let doc = parse_native(&input)?;
            write_document(out, &doc, Some(&target), Format::Sdpa)?;
            Ok(EXIT_OK)
        }
        Command::Import { input, cert, out: target } => {
            let doc = load_with_sidecar(&input, cert.as_deref(), Format::Sdpa)?;
            write_document(out, &doc, target.as_deref(), Format::Native)?;
            Ok(EXIT_OK)
        }
    }
}

pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match run(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(out, "{}", json!({"event": "error", "message": e.to_string()}));
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
