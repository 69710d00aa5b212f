//! Command line front end. Every subcommand reads JSON inputs, runs one library
//! operation, writes JSON (or CSV) artifacts and prints a one-line summary to stderr.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::diagnostics::{
    blaschke_report, functional_necessary, kadison_condition, positive_necessary, shift_characterization, unitary_diag_condition,
    KadisonVerdict, NecessaryVerdict, ShiftVerdict, TailedSequence, Trend,
};
use crate::diagonal::{
    build_approx_diagonal, build_exact_diagonal_complex, build_power_diagonal, build_schatten_perturbation, verify_certificate,
    BuildKind, BuildOptions, Certificate, SpectralDisc,
};
use crate::error::{Error, Result};
use crate::foundation::{hermitian_parts, load_operator, parse_complex, parse_matrix, DenseSequence, Operator, OperatorSpec, OperatorTuple, C64};
use crate::io::FrameFile;
use crate::moments::{b_bound, circle_moment_decompose};
use crate::numrange::{numrange_boundary, we_model, ConvexRegion};
use crate::pinching::{pinch_blaschke, pinch_power_blaschke, verify_plan, PinchOptions, PinchingPlan};
use crate::SCHEMA;

#[derive(Parser, Debug)]
#[command(name = "blaschke-forge", version, about = "Constructive diagonals and pinchings with auditable certificates")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct BuildArgs {
    /// Operator spec (file or inline JSON).
    #[arg(long)]
    op: String,
    /// Region spec (file or inline JSON).
    #[arg(long)]
    region: Option<String>,
    /// JSON list of complex targets, cycled up to --steps.
    #[arg(long)]
    targets: String,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    groups: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    cert: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trace the boundary of W(T); optionally validate a declared model region.
    Numrange {
        #[arg(long)]
        op: String,
        #[arg(long, default_value_t = 720)]
        samples: usize,
        #[arg(long)]
        region: Option<String>,
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
        /// CSV output with theta,value,re,im columns.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decompose ε ∈ ℂⁿ as Σ α_j (μ_j, …, μ_jⁿ) with |μ_j| = ρ.
    Moment {
        #[arg(long)]
        eps: String,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact diagonal under the interior-distance condition.
    BuildDiag(BuildArgs),
    /// Approximate diagonal with residuals |α_k|.
    BuildApprox {
        #[command(flatten)]
        build: BuildArgs,
        /// JSON list of α_k; defaults to 1/k.
        #[arg(long)]
        alphas: Option<String>,
    },
    /// Power diagonal ⟨T^j u_k,u_k⟩ = λ_k^j, j ≤ n.
    BuildPower {
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Center of the disc inside the spectral hull, as [re, im].
        #[arg(long, default_value = "[0, 0]")]
        center: String,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Schatten-class perturbation making (λ_k) a diagonal.
    Perturb {
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Pinching onto prescribed contractions.
    Pinch(PinchArgs),
    /// Power pinching onto (C_k, …, C_kⁿ).
    PinchPower(PinchArgs),
    /// Necessary conditions and characterizations.
    Check {
        #[arg(long, value_enum)]
        kind: CheckKind,
        /// Sequence (file or inline JSON).
        #[arg(long)]
        seq: String,
        #[arg(long)]
        region: Option<String>,
        #[arg(long)]
        op: Option<String>,
        /// Functional coefficients (α₀, α₁, …).
        #[arg(long)]
        alphas: Option<String>,
        #[arg(long)]
        exponent: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-audit a frame with its certificate, or a pinching plan.
    Verify {
        #[arg(long)]
        op: String,
        #[arg(long)]
        frame: Option<PathBuf>,
        #[arg(long)]
        cert: Option<PathBuf>,
        #[arg(long)]
        plan: Option<PathBuf>,
    },
}

#[derive(clap::Args, Debug)]
struct PinchArgs {
    #[arg(long)]
    op: String,
    /// JSON list of square complex matrices.
    #[arg(long)]
    blocks: String,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    groups: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CheckKind {
    Blaschke,
    Positive,
    Functional,
    Shift,
    Unitary,
    Kadison,
}

/// Parse `argv` (including the program name) and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Inline JSON when the argument looks like JSON, otherwise a path to read.
fn read_json(arg: &str) -> Result<Value> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with(['[', '{']) || trimmed.parse::<f64>().is_ok() {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| Error::Input(format!("cannot read {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("malformed JSON in {arg}: {e}")))
}

fn from_value<T: serde::de::DeserializeOwned>(v: Value, what: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Input(format!("bad {what}: {e}")))
}

fn read_file<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("bad {what} in {}: {e}", path.display())))
}

fn load_op(arg: &str) -> Result<Operator> {
    load_operator(&from_value::<OperatorSpec>(read_json(arg)?, "operator spec")?)
}

fn load_region(arg: &str) -> Result<ConvexRegion> {
    let r: ConvexRegion = from_value(read_json(arg)?, "region spec")?;
    r.validate()?;
    Ok(r)
}

fn complex_list(v: &Value) -> Result<Vec<C64>> {
    match v {
        Value::Array(a) => a.iter().map(parse_complex).collect(),
        other => Ok(vec![parse_complex(other)?]),
    }
}

fn real_list(v: &Value) -> Result<Vec<f64>> {
    from_value(v.clone(), "real list")
}

/// Cycle `items` up to `steps` entries.
fn cycled<T: Clone>(items: Vec<T>, steps: Option<usize>) -> Result<Vec<T>> {
    if items.is_empty() {
        return Err(Error::Input("empty target list".into()));
    }
    let k = steps.unwrap_or(items.len());
    Ok(items.iter().cycle().take(k).cloned().collect())
}

fn pretty<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::Internal(format!("serialization failed: {e}")))
}

/// Write to `path`, or stdout when absent.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_schema<T: Serialize>(v: &T) -> Result<Value> {
    let mut val = serde_json::to_value(v).map_err(|e| Error::Internal(e.to_string()))?;
    if let Value::Object(m) = &mut val {
        m.insert("schema".into(), Value::String(SCHEMA.into()));
    }
    Ok(val)
}

fn write_build(args: &BuildArgs, dim: usize, frame: &crate::foundation::Frame, cert_json: Value) -> Result<()> {
    if let Some(p) = &args.out {
        emit(Some(p), &pretty(&FrameFile::new(frame, dim))?)?;
    }
    emit(args.cert.as_deref(), &pretty(&cert_json)?)
}

fn build_opts(args: &BuildArgs, seed: u64) -> BuildOptions {
    BuildOptions { groups: args.groups, seed, tol: None }
}

fn dispatch(cli: Cli) -> Result<i32> {
    let seed = cli.seed;
    match cli.command {
        Command::Numrange { op, samples, region, margin, out } => {
            let t = load_op(&op)?;
            let b = numrange_boundary(&t, samples)?;
            if let Some(p) = &out {
                emit(Some(p), &b.to_csv())?;
            }
            let model = match region {
                Some(r) => Some(we_model(&load_region(&r)?, &t, margin)?),
                None => None,
            };
            let summary = json!({
                "schema": SCHEMA,
                "samples": samples,
                "vertices": b.vertices(),
                "model": model,
            });
            if out.is_none() {
                emit(None, &pretty(&summary)?)?;
            }
            eprintln!("numrange: {samples} directions traced{}", if model.is_some() { ", model region accepted" } else { "" });
            Ok(0)
        }
        Command::Moment { eps, rho, n, out } => {
            let e = complex_list(&read_json(&eps)?)?;
            if let Some(n) = n {
                if n != e.len() {
                    return Err(Error::Input(format!("--n {n} but ε has {} entries", e.len())));
                }
            }
            if !(rho > 0.0) || e.is_empty() {
                return Err(Error::Input("need rho > 0 and a nonempty ε".into()));
            }
            let dec = circle_moment_decompose(&e, rho);
            let mut v = with_schema(&dec)?;
            v["residual"] = json!(dec.residual());
            v["total_weight"] = json!(dec.total_weight());
            v["b_bound"] = json!(b_bound(e.len(), rho));
            emit(out.as_deref(), &pretty(&v)?)?;
            eprintln!("moment: {} points, total weight {:.6e}, residual {:.3e}", dec.points.len(), dec.total_weight(), dec.residual());
            Ok(0)
        }
        Command::BuildDiag(args) => {
            let t = load_op(&args.op)?;
            let region = load_region(args.region.as_deref().ok_or_else(|| Error::Input("--region is required".into()))?)?;
            let targets = cycled(complex_list(&read_json(&args.targets)?)?, args.steps)?;
            let targets: Vec<Vec<C64>> = targets.into_iter().map(|z| vec![z]).collect();
            let dense = DenseSequence::standard(t.dim());
            let (frame, cert) =
                build_exact_diagonal_complex(&OperatorTuple::single(&t), &region, &targets, &dense, &build_opts(&args, seed))?;
            write_build(&args, t.dim(), &frame, serde_json::to_value(&cert).map_err(|e| Error::Internal(e.to_string()))?)?;
            eprintln!("build-diag: {} vectors, max residual {:.3e}", frame.len(), cert.max_residual());
            Ok(0)
        }
        Command::BuildApprox { build: args, alphas } => {
            let t = load_op(&args.op)?;
            let region = load_region(args.region.as_deref().ok_or_else(|| Error::Input("--region is required".into()))?)?;
            let targets = cycled(complex_list(&read_json(&args.targets)?)?, args.steps)?;
            let alphas = match alphas {
                Some(a) => real_list(&read_json(&a)?)?,
                None => (1..=targets.len()).map(|k| 1.0 / k as f64).collect(),
            };
            let targets: Vec<Vec<C64>> = targets.into_iter().map(|z| vec![z]).collect();
            let dense = DenseSequence::standard(t.dim());
            let (frame, cert) =
                build_approx_diagonal(&OperatorTuple::single(&t), &region, &targets, &alphas, &dense, &build_opts(&args, seed))?;
            write_build(&args, t.dim(), &frame, serde_json::to_value(&cert).map_err(|e| Error::Internal(e.to_string()))?)?;
            eprintln!("build-approx: {} vectors, max residual {:.3e}", frame.len(), cert.max_residual());
            Ok(0)
        }
        Command::BuildPower { build: args, n, center, radius } => {
            let t = load_op(&args.op)?;
            let lambdas = cycled(complex_list(&read_json(&args.targets)?)?, args.steps)?;
            let disc = SpectralDisc { center: parse_complex(&read_json(&center)?)?, radius };
            let dense = DenseSequence::standard(t.dim());
            let (frame, cert) = build_power_diagonal(&t, &lambdas, n, &disc, &dense, &build_opts(&args, seed))?;
            write_build(&args, t.dim(), &frame, serde_json::to_value(&cert).map_err(|e| Error::Internal(e.to_string()))?)?;
            eprintln!("build-power: {} vectors, n = {n}, max residual {:.3e}", frame.len(), cert.max_residual());
            Ok(0)
        }
        Command::Perturb { build: args, p } => {
            let t = load_op(&args.op)?;
            let region = load_region(args.region.as_deref().ok_or_else(|| Error::Input("--region is required".into()))?)?;
            let targets = cycled(complex_list(&read_json(&args.targets)?)?, args.steps)?;
            let targets: Vec<Vec<C64>> = targets.into_iter().map(|z| vec![z]).collect();
            let dense = DenseSequence::standard(t.dim());
            let (frame, report) =
                build_schatten_perturbation(&OperatorTuple::single(&t), &targets, p, &region, &dense, &build_opts(&args, seed))?;
            write_build(&args, t.dim(), &frame, with_schema(&report)?)?;
            let last = report.kappa_partial_sums.last().copied().unwrap_or(0.0);
            eprintln!("perturb: Σ‖κ_k‖^p = {last:.6e}, within bound: {}", report.within_bound);
            Ok(if report.within_bound { 0 } else { 1 })
        }
        Command::Pinch(a) => run_pinch(a, seed, false),
        Command::PinchPower(a) => run_pinch(a, seed, true),
        Command::Check { kind, seq, region, op, alphas, exponent, out } => {
            let seq = read_json(&seq)?;
            let (report, negative) = match kind {
                CheckKind::Blaschke => {
                    let region = load_region(region.as_deref().ok_or_else(|| Error::Input("--region is required".into()))?)?;
                    let points: Vec<Vec<f64>> = if region.ambient() == 2 {
                        complex_list(&seq)?.into_iter().map(|z| vec![z.re, z.im]).collect()
                    } else {
                        from_value(seq, "point list")?
                    };
                    let r = blaschke_report(&points, &region, exponent)?;
                    let neg = r.trend.trend == Trend::SummableTrend;
                    (with_schema(&r)?, neg)
                }
                CheckKind::Positive => {
                    let t = load_op(op.as_deref().ok_or_else(|| Error::Input("--op is required".into()))?)?;
                    let r = positive_necessary(&t, &real_list(&seq)?)?;
                    let neg = r.verdict == NecessaryVerdict::Infeasible;
                    (with_schema(&r)?, neg)
                }
                CheckKind::Functional => {
                    let t = load_op(op.as_deref().ok_or_else(|| Error::Input("--op is required".into()))?)?;
                    let a = real_list(&read_json(alphas.as_deref().ok_or_else(|| Error::Input("--alphas is required".into()))?)?)?;
                    let s = hermitian_parts(&OperatorTuple::single(&t));
                    let points: Vec<Vec<f64>> = complex_list(&seq)?.into_iter().map(|z| vec![z.re, z.im]).collect();
                    let r = functional_necessary(&s, &points, &a)?;
                    let neg = r.verdict == NecessaryVerdict::Infeasible;
                    (with_schema(&r)?, neg)
                }
                CheckKind::Shift => {
                    let r = shift_characterization(&complex_list(&seq)?)?;
                    let neg = r.verdict == ShiftVerdict::NotDiagonal;
                    (with_schema(&r)?, neg)
                }
                CheckKind::Unitary => {
                    let r = unitary_diag_condition(&complex_list(&seq)?)?;
                    let neg = !r.holds;
                    (with_schema(&r)?, neg)
                }
                CheckKind::Kadison => {
                    let s: TailedSequence = from_value(seq, "tailed sequence")?;
                    let r = kadison_condition(&s)?;
                    let neg = r.verdict == KadisonVerdict::Inadmissible;
                    (with_schema(&r)?, neg)
                }
            };
            emit(out.as_deref(), &pretty(&report)?)?;
            eprintln!("check {kind:?}: {}", if negative { "negative verdict" } else { "no obstruction found" });
            Ok(if negative { 1 } else { 0 })
        }
        Command::Verify { op, frame, cert, plan } => {
            let t = load_op(&op)?;
            let dense = DenseSequence::standard(t.dim());
            if let Some(p) = plan {
                let plan: PinchingPlan = read_file(&p, "plan")?;
                let audit = verify_plan(&plan, &t, &dense);
                emit(None, &pretty(&with_schema(&audit)?)?)?;
                eprintln!("verify plan: {}", if audit.passed { "passed" } else { "FAILED" });
                return Ok(if audit.passed { 0 } else { 1 });
            }
            let (Some(fp), Some(cp)) = (frame, cert) else {
                return Err(Error::Input("verify needs --plan or both --frame and --cert".into()));
            };
            let ff: FrameFile = read_file(&fp, "frame")?;
            if ff.dim != t.dim() {
                return Err(Error::Input(format!("frame dimension {} differs from the operator's {}", ff.dim, t.dim())));
            }
            let frame = ff.to_frame()?;
            let raw: Value = read_file(&cp, "certificate")?;
            // a perturbation report carries its certificate inside
            let cert: Certificate = match raw.get("certificate") {
                Some(c) => from_value(c.clone(), "certificate")?,
                None => from_value(raw, "certificate")?,
            };
            let powers = match cert.kind {
                BuildKind::Power => cert.s / 2,
                _ => 1,
            };
            let s = hermitian_parts(&OperatorTuple::powers(&t, powers.max(1)));
            let audit = verify_certificate(&cert, &frame, &s, &dense);
            emit(None, &pretty(&with_schema(&audit)?)?)?;
            eprintln!("verify certificate: {}", if audit.passed { "passed" } else { "FAILED" });
            Ok(if audit.passed { 0 } else { 1 })
        }
    }
}

fn run_pinch(a: PinchArgs, seed: u64, power: bool) -> Result<i32> {
    let t = load_op(&a.op)?;
    let blocks = match read_json(&a.blocks)? {
        Value::Array(items) => items.iter().map(parse_matrix).collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::Input("blocks must be a list of matrices".into())),
    };
    let dense = DenseSequence::standard(t.dim());
    let opts = PinchOptions { groups: a.groups, seed, ..PinchOptions::default() };
    let plan = if power {
        pinch_power_blaschke(&t, &blocks, a.n, &dense, &opts)?
    } else {
        if a.n != 1 {
            return Err(Error::Input("pinch covers n = 1; use pinch-power for higher powers".into()));
        }
        pinch_blaschke(&t, &blocks, &dense, &opts, None)?
    };
    emit(a.out.as_deref(), &pretty(&plan)?)?;
    eprintln!(
        "{}: {} blocks, max compression residual {:.3e}",
        if power { "pinch-power" } else { "pinch" },
        plan.blocks.len(),
        plan.max_compression_residual()
    );
    Ok(0)
}
