//! Command-line driver: reproducible experiments over the library layers
//! with machine-readable JSON reports (and CSV for tabular payloads).
//!
//! Every report embeds the tool version, the parsed configuration, the
//! effective seed, and wall-clock metadata; everything else is a
//! deterministic function of (config, seed). Exit status: 0 on success, 1 on
//! a hard inequality failure, 2 on precondition or usage errors.

use crate::bounds::{kl_polynomial_bound, lisse_count_bound, mext_count_bound};
use crate::characters::{AdditiveCharacter, MultiplicativeCharacter};
use crate::error::{precondition, Error, Result};
use crate::field::{field_build, FieldSpec};
use crate::normlab::{
    certificate_check, random_norm_experiment, tail_experiment, Distribution,
    RandomFunctionSpec,
};
use crate::orthogonality::{
    ask_family_scan, code_report, embed, injectivity_check, verify_gram,
};
use crate::poly::{Poly, RationalFunction};
use crate::sheaf::{
    check_supermorse, conductor_ask, conductor_supermorse, enumerate_ask_classes,
    fourier_transform, trace_ask, trace_supermorse, AskDescriptor, SheafDescriptor,
    SupermorseCheck, SupermorseDescriptor, TraceSample,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "tracecodes",
    version,
    about = "Trace-function families over finite fields: orthogonality, \
             spherical-code counting bounds, and trace-norm experiments"
)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the JSON report to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Counting bounds for spherical codes and kernel families.
    #[command(subcommand)]
    Bound(BoundCmd),
    /// Build a single kernel: trace values, conductor, Fourier transform.
    #[command(subcommand)]
    Family(FamilyCmd),
    /// Gram-matrix verification of the quasi-orthogonality bounds.
    Gram(GramArgs),
    /// Spherical-code embedding report for an enumerated family.
    Code(CodeArgs),
    /// Enumerate canonical rank-1 classes up to a conductor cap.
    Enumerate(EnumerateArgs),
    /// Injectivity check: non-isomorphic classes are non-proportional.
    Inject(InjectArgs),
    /// Random-function trace-norm experiments.
    #[command(subcommand)]
    Norm(NormCmd),
    /// Run the built-in verification suite.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum BoundCmd {
    /// Polynomial code-cardinality bound at cos phi <= gamma / sqrt(n).
    Kl {
        /// Code dimension.
        #[arg(long)]
        n: u64,
        /// Cosine scale gamma > 0.
        #[arg(long)]
        gamma: f64,
    },
    /// Kernel-counting bounds (per open set, or composed over all open sets).
    Count {
        /// Field size.
        #[arg(long)]
        q: u64,
        /// Conductor cap.
        #[arg(long)]
        c: u64,
        /// Rank cap (ignored with --mext, which uses r = c).
        #[arg(long, default_value_t = 1)]
        r: u64,
        /// Open-set size |U(k)| (default: q).
        #[arg(long)]
        u_size: Option<u64>,
        /// Admissibility constant in q >= constant * c^3 * r^6.
        #[arg(long, default_value_t = 1500)]
        constant: u64,
        /// Compose over all open sets of a genus-g curve.
        #[arg(long)]
        mext: bool,
        /// Curve genus for --mext.
        #[arg(long, default_value_t = 0)]
        g: u64,
        /// Compute the composed bound outside its admissible range
        /// (labeled non-theorem).
        #[arg(long)]
        raw: bool,
    },
}

/// Field selection: GF(p^n) with an optional explicit modulus.
#[derive(Args, Clone)]
struct FieldArgs {
    /// Field characteristic (prime).
    #[arg(long)]
    p: u64,
    /// Extension degree.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Monic irreducible modulus as comma-separated coefficients
    /// c0,c1,...,1 (default: searched).
    #[arg(long)]
    modulus: Option<String>,
}

#[derive(Args)]
struct AskArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Additive phase polynomial f1, comma-separated coefficient indices
    /// (for prime fields, just residues). Default 0.
    #[arg(long, default_value = "0")]
    f1: String,
    /// Numerator of the multiplicative argument f2 (same encoding).
    #[arg(long, default_value = "1")]
    f2_num: String,
    /// Denominator of f2.
    #[arg(long, default_value = "1")]
    f2_den: String,
    /// Additive-character twist a as element coefficients (default: 1).
    #[arg(long)]
    psi: Option<String>,
    /// Multiplicative-character index m in [0, q-2] (default: 0, trivial).
    #[arg(long, default_value_t = 0)]
    chi_index: u64,
    /// Write the trace sample as CSV (columns x, re, im).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum FamilyCmd {
    /// Rank-1 kernel psi(f1(x)) chi(f2(x)).
    Ask(AskArgs),
    /// Fiber-counting kernel of a polynomial with simple critical points.
    Supermorse {
        #[command(flatten)]
        field: FieldArgs,
        /// The polynomial f, comma-separated coefficient indices.
        #[arg(long)]
        f: String,
        /// Write the trace sample as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Normalized Fourier transform of a rank-1 kernel.
    Fourier {
        #[command(flatten)]
        ask: AskArgs,
        /// Twist element for the transform kernel (default: 1).
        #[arg(long)]
        psi_t: Option<String>,
    },
}

#[derive(Args)]
struct GramArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Conductor cap for the enumerated family.
    #[arg(long)]
    cmax: u64,
    /// Cap on the number of materialized classes for the dense Gram matrix.
    #[arg(long, default_value_t = 200)]
    limit: usize,
    /// Exact whole-family scan by difference classes (prime field, cmax = 3);
    /// covers every pair without materializing the Gram matrix.
    #[arg(long)]
    scan: bool,
    /// Allow comparing samples on different open sets via intersection.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct CodeArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Conductor cap for the enumerated family.
    #[arg(long)]
    cmax: u64,
    /// Cap on the number of materialized classes.
    #[arg(long, default_value_t = 200)]
    limit: usize,
    /// Write the pairwise cosine matrix as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Conductor cap.
    #[arg(long)]
    cmax: u64,
    /// Multiplicative-character index m (default: 0, trivial).
    #[arg(long, default_value_t = 0)]
    chi_index: u64,
    /// Maximum number of descriptors listed in the report (the count is
    /// always exact).
    #[arg(long, default_value_t = 1000)]
    limit: usize,
}

#[derive(Args)]
struct InjectArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Conductor cap for the enumerated family.
    #[arg(long)]
    cmax: u64,
    /// Cap on the number of materialized classes.
    #[arg(long, default_value_t = 200)]
    limit: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Rademacher,
    UniformCircle,
}

#[derive(Args)]
struct DistArgs {
    /// Value distribution of the random function.
    #[arg(long, value_enum, default_value_t = DistArg::Rademacher)]
    dist: DistArg,
    /// Atom table re:im:weight,re:im:weight,... (overrides --dist).
    #[arg(long)]
    atoms: Option<String>,
    /// RNG seed (overridden by TRACECODES_SEED).
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand)]
enum NormCmd {
    /// Alpha sweep of the norm lower-bound certificate over random trials.
    Random {
        /// Field size q = p^n (prime power).
        #[arg(long)]
        q: u64,
        /// Conductor cap of the kernel family.
        #[arg(long)]
        cmax: u64,
        /// Number of random trials.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[command(flatten)]
        dist: DistArgs,
    },
    /// Check the certificate hypotheses for an explicit phi and family.
    Certify {
        /// JSON file: array of values, each a number or [re, im].
        #[arg(long)]
        phi: PathBuf,
        /// JSON file: {"p":..,"n":..,"kernels":[descriptor,...]}.
        #[arg(long)]
        family: PathBuf,
        /// Amplitude constant A.
        #[arg(long)]
        a: f64,
        /// Exponent gamma in the q^{1-gamma} thresholds.
        #[arg(long)]
        gamma: f64,
        /// Conductor exponent s.
        #[arg(long)]
        s: f64,
    },
    /// Monte-Carlo tail of |sum K phi| against the subgaussian bound.
    Tail {
        /// JSON file: {"p":..,"n":..,"kernel":{descriptor}}.
        #[arg(long)]
        kernel: PathBuf,
        /// Threshold scale alpha.
        #[arg(long)]
        alpha: f64,
        /// Conductor exponent s >= 2.
        #[arg(long)]
        s: f64,
        /// Number of random trials.
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[command(flatten)]
        dist: DistArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Quick,
    Full,
}

#[derive(Args)]
struct VerifyArgs {
    /// quick: deterministic smoke subset; full: all ten criteria.
    #[arg(long, value_enum, default_value_t = Profile::Quick)]
    profile: Profile,
    /// Seed for the quick profile (overridden by TRACECODES_SEED).
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

/// Parses arguments, runs the command, writes the report, and returns the
/// process exit code.
pub fn run() -> u8 {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // ignore failure: the global pool may already exist (e.g. in tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let start = Instant::now();
    match execute(&cli.command) {
        Ok(outcome) => {
            let report = json!({
                "version": env!("CARGO_PKG_VERSION"),
                "command": outcome.command,
                "config": outcome.config,
                "seed": outcome.seed,
                "payload": outcome.payload,
                "wall_clock_seconds": start.elapsed().as_secs_f64(),
            });
            if let Err(e) = write_report(&report, cli.out.as_deref()) {
                eprintln!("error: {e}");
                return 2;
            }
            match outcome.hard_failure {
                Some(msg) => {
                    eprintln!("bound violated: {msg}");
                    1
                }
                None => 0,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::BoundViolation(_) => 1,
                _ => 2,
            }
        }
    }
}

struct Outcome {
    command: &'static str,
    config: Value,
    payload: Value,
    seed: Option<u64>,
    hard_failure: Option<String>,
}

fn write_report(report: &Value, out: Option<&std::path::Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    match out {
        Some(path) => {
            let mut f = File::create(path)?;
            writeln!(f, "{text}")?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            // a closed pipe downstream (e.g. under `head`) is not an error
            if let Err(e) = writeln!(stdout, "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(Error::Io(e));
                }
            }
        }
    }
    Ok(())
}

/// TRACECODES_SEED overrides any configured seed.
fn effective_seed(configured: u64) -> Result<u64> {
    match std::env::var("TRACECODES_SEED") {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map_err(|_| precondition(format!("TRACECODES_SEED is not a u64: {v:?}"))),
        Err(_) => Ok(configured),
    }
}

fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<u64>().map_err(|_| precondition(format!("bad integer {t:?}"))))
        .collect()
}

fn build_field(args: &FieldArgs) -> Result<Arc<FieldSpec>> {
    let modulus = args.modulus.as_deref().map(parse_u64_list).transpose()?;
    Ok(Arc::new(field_build(args.p, args.n, modulus.as_deref())?))
}

/// Polynomial from comma-separated field-element indices (coefficient of x^i
/// at position i). For prime fields an index is just the residue.
fn poly_from_indices(spec: &Arc<FieldSpec>, s: &str) -> Result<Poly> {
    let idxs = parse_u64_list(s)?;
    for &i in &idxs {
        if i >= spec.q() {
            return Err(precondition(format!("element index {i} >= q = {}", spec.q())));
        }
    }
    Ok(Poly::new(spec, idxs.iter().map(|&i| spec.element_from_index(i)).collect()))
}

fn build_psi(spec: &Arc<FieldSpec>, coeffs: Option<&str>) -> Result<AdditiveCharacter> {
    match coeffs {
        None => Ok(AdditiveCharacter::standard(spec.clone())),
        Some(s) => Ok(AdditiveCharacter::new(spec.clone(), spec.element(&parse_u64_list(s)?)?)),
    }
}

fn build_ask(args: &AskArgs) -> Result<(Arc<FieldSpec>, AskDescriptor)> {
    let spec = build_field(&args.field)?;
    let f1 = poly_from_indices(&spec, &args.f1)?;
    let f2 = RationalFunction::new(
        &spec,
        poly_from_indices(&spec, &args.f2_num)?,
        poly_from_indices(&spec, &args.f2_den)?,
    )?;
    let psi = build_psi(&spec, args.psi.as_deref())?;
    let chi = MultiplicativeCharacter::new(spec.clone(), args.chi_index);
    let desc = AskDescriptor::new(spec.clone(), f1, f2, psi, chi)?;
    Ok((spec, desc))
}

fn sample_summary(s: &TraceSample) -> Value {
    let sum: Complex64 = s.values.iter().sum();
    let max_abs = s.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    json!({
        "descriptor_id": s.descriptor_id,
        "q": s.spec.q(),
        "rank": s.rank,
        "conductor": s.conductor,
        "numeric_only": s.numeric_only,
        "domain_size": s.domain.len(),
        "sum": [sum.re, sum.im],
        "max_abs": max_abs,
    })
}

fn write_sample_csv(s: &TraceSample, path: &std::path::Path) -> Result<()> {
    s.write_csv(File::create(path)?)
}

/// Materializes the enumerated family (trivial chi, plus quadratic chi when
/// cmax >= 3 over an odd-order field) as trace samples, truncated to `limit`
/// with the budget split across the two character groups.
fn family_samples(
    spec: &Arc<FieldSpec>,
    cmax: u64,
    limit: usize,
) -> Result<(Vec<TraceSample>, u64, u64, bool)> {
    let chi0 = MultiplicativeCharacter::trivial(spec.clone());
    let mut trivial = enumerate_ask_classes(spec, cmax, &chi0)?;
    let mut quadratic = if cmax >= 3 && spec.q() % 2 == 1 {
        enumerate_ask_classes(spec, cmax, &MultiplicativeCharacter::quadratic(spec.clone()))?
    } else {
        Vec::new()
    };
    let total_trivial = trivial.len() as u64;
    let total_quadratic = quadratic.len() as u64;
    let truncated = trivial.len() + quadratic.len() > limit;
    if truncated {
        let half = if quadratic.is_empty() { limit } else { limit / 2 };
        trivial.truncate(half.min(limit));
        quadratic.truncate(limit - trivial.len());
    }
    let samples = trivial
        .into_iter()
        .chain(quadratic)
        .map(|d| trace_ask(&d))
        .collect::<Result<Vec<_>>>()?;
    Ok((samples, total_trivial, total_quadratic, truncated))
}

fn parse_phi_file(path: &std::path::Path) -> Result<Vec<Complex64>> {
    let v: Value = serde_json::from_reader(File::open(path)?)?;
    let arr = v
        .as_array()
        .ok_or_else(|| precondition("phi file must be a JSON array"))?;
    arr.iter()
        .map(|e| {
            if let Some(x) = e.as_f64() {
                return Ok(Complex64::new(x, 0.0));
            }
            let pair = e.as_array().filter(|a| a.len() == 2);
            match pair.and_then(|a| Some((a[0].as_f64()?, a[1].as_f64()?))) {
                Some((re, im)) => Ok(Complex64::new(re, im)),
                None => Err(precondition("phi entries must be numbers or [re, im] pairs")),
            }
        })
        .collect()
}

fn field_from_json(v: &Value) -> Result<Arc<FieldSpec>> {
    let p = v["p"].as_u64().ok_or_else(|| precondition("missing field characteristic p"))?;
    let n = v["n"].as_u64().unwrap_or(1) as usize;
    let modulus: Option<Vec<u64>> = v["modulus"]
        .as_array()
        .map(|a| a.iter().map(|x| x.as_u64().unwrap_or(0)).collect());
    Ok(Arc::new(field_build(p, n, modulus.as_deref())?))
}

fn poly_from_json(spec: &Arc<FieldSpec>, v: &Value) -> Result<Poly> {
    let arr = v
        .as_array()
        .ok_or_else(|| precondition("polynomial must be an array of coefficient arrays"))?;
    let coeffs = arr
        .iter()
        .map(|c| {
            let cs: Vec<u64> = c
                .as_array()
                .ok_or_else(|| precondition("coefficient must be an array of residues"))?
                .iter()
                .map(|x| x.as_u64().unwrap_or(0))
                .collect();
            spec.element(&cs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Poly::new(spec, coeffs))
}

/// Parses a descriptor in the report wire format ({"kind":"ask",...} or
/// {"kind":"supermorse",...}) and returns its trace sample.
fn sample_from_json(spec: &Arc<FieldSpec>, v: &Value) -> Result<TraceSample> {
    match v["kind"].as_str() {
        Some("ask") => {
            let f1 = poly_from_json(spec, &v["f1"])?;
            let f2 = RationalFunction::new(
                spec,
                poly_from_json(spec, &v["f2num"])?,
                poly_from_json(spec, &v["f2den"])?,
            )?;
            let a: Vec<u64> = v["psi_a"]
                .as_array()
                .ok_or_else(|| precondition("missing psi_a"))?
                .iter()
                .map(|x| x.as_u64().unwrap_or(0))
                .collect();
            let psi = AdditiveCharacter::new(spec.clone(), spec.element(&a)?);
            let m = v["chi_m"].as_u64().ok_or_else(|| precondition("missing chi_m"))?;
            let chi = MultiplicativeCharacter::new(spec.clone(), m);
            trace_ask(&AskDescriptor::new(spec.clone(), f1, f2, psi, chi)?)
        }
        Some("supermorse") => {
            let f = poly_from_json(spec, &v["f"])?;
            trace_supermorse(&SupermorseDescriptor::new(spec.clone(), f)?)
        }
        other => Err(precondition(format!("unknown descriptor kind {other:?}"))),
    }
}

fn build_rspec(dist: &DistArgs) -> Result<RandomFunctionSpec> {
    let seed = effective_seed(dist.seed)?;
    let distribution = match &dist.atoms {
        Some(s) => {
            let atoms = s
                .split(',')
                .map(|t| {
                    let parts: Vec<&str> = t.split(':').collect();
                    if parts.len() != 3 {
                        return Err(precondition("atoms must be re:im:weight triples"));
                    }
                    let nums: Vec<f64> = parts
                        .iter()
                        .map(|x| {
                            x.trim()
                                .parse::<f64>()
                                .map_err(|_| precondition(format!("bad number {x:?}")))
                        })
                        .collect::<Result<_>>()?;
                    Ok((nums[0], nums[1], nums[2]))
                })
                .collect::<Result<Vec<_>>>()?;
            Distribution::Atoms { atoms }
        }
        None => match dist.dist {
            DistArg::Rademacher => Distribution::Rademacher,
            DistArg::UniformCircle => Distribution::UniformCircle,
        },
    };
    RandomFunctionSpec::new(distribution, seed)
}

/// Decomposes a prime power q = p^n.
fn prime_power(q: u64) -> Result<(u64, usize)> {
    if q < 2 {
        return Err(precondition("q must be >= 2"));
    }
    let mut p = q;
    let mut d = 2u64;
    while d * d <= q {
        if q % d == 0 {
            p = d;
            break;
        }
        d += 1;
    }
    let mut n = 0usize;
    let mut rest = q;
    while rest % p == 0 {
        rest /= p;
        n += 1;
    }
    if rest != 1 {
        return Err(precondition(format!("q = {q} is not a prime power")));
    }
    Ok((p, n))
}

fn field_config(f: &FieldArgs) -> Value {
    json!({"p": f.p, "n": f.n, "modulus": f.modulus})
}

fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::Bound(BoundCmd::Kl { n, gamma }) => {
            let b = kl_polynomial_bound(*n, *gamma)?;
            Ok(Outcome {
                command: "bound kl",
                config: json!({"n": n, "gamma": gamma}),
                payload: serde_json::to_value(&b)?,
                seed: None,
                hard_failure: None,
            })
        }
        Command::Bound(BoundCmd::Count { q, c, r, u_size, constant, mext, g, raw }) => {
            let config = json!({
                "q": q, "c": c, "r": r, "u_size": u_size,
                "constant": constant, "mext": mext, "g": g, "raw": raw,
            });
            let payload = if *mext {
                serde_json::to_value(mext_count_bound(*q, *g, *c, *raw)?)?
            } else {
                serde_json::to_value(lisse_count_bound(
                    *q,
                    u_size.unwrap_or(*q),
                    *c,
                    *r,
                    *constant,
                )?)?
            };
            Ok(Outcome {
                command: "bound count",
                config,
                payload,
                seed: None,
                hard_failure: None,
            })
        }
        Command::Family(FamilyCmd::Ask(args)) => {
            let (_, desc) = build_ask(args)?;
            let report = conductor_ask(&desc)?;
            let sample = trace_ask(&desc)?;
            if let Some(path) = &args.csv {
                write_sample_csv(&sample, path)?;
            }
            Ok(Outcome {
                command: "family ask",
                config: json!({
                    "field": field_config(&args.field),
                    "f1": args.f1, "f2_num": args.f2_num, "f2_den": args.f2_den,
                    "psi": args.psi, "chi_index": args.chi_index,
                }),
                payload: json!({
                    "descriptor": desc.to_json(),
                    "descriptor_id": desc.descriptor_id()?,
                    "conductor_report": serde_json::to_value(&report)?,
                    "sample": sample_summary(&sample),
                }),
                seed: None,
                hard_failure: None,
            })
        }
        Command::Family(FamilyCmd::Supermorse { field, f, csv }) => {
            let spec = build_field(field)?;
            let poly = poly_from_indices(&spec, f)?;
            let config = json!({"field": field_config(field), "f": f});
            match check_supermorse(&spec, &poly)? {
                SupermorseCheck::Reject(reason) => Ok(Outcome {
                    command: "family supermorse",
                    config,
                    payload: json!({"supermorse": false, "reason": reason}),
                    seed: None,
                    hard_failure: None,
                }),
                SupermorseCheck::Ok { z_count, s_rational, .. } => {
                    let desc = SupermorseDescriptor::new(spec.clone(), poly)?;
                    let report = conductor_supermorse(&desc)?;
                    let sample = trace_supermorse(&desc)?;
                    if let Some(path) = csv {
                        write_sample_csv(&sample, path)?;
                    }
                    Ok(Outcome {
                        command: "family supermorse",
                        config,
                        payload: json!({
                            "supermorse": true,
                            "descriptor": desc.to_json(),
                            "descriptor_id": desc.descriptor_id(),
                            "critical_point_count": z_count,
                            "rational_critical_values":
                                s_rational.iter().map(|e| e.coeffs.clone()).collect::<Vec<_>>(),
                            "conductor_report": serde_json::to_value(&report)?,
                            "sample": sample_summary(&sample),
                        }),
                        seed: None,
                        hard_failure: None,
                    })
                }
            }
        }
        Command::Family(FamilyCmd::Fourier { ask, psi_t }) => {
            let (spec, desc) = build_ask(ask)?;
            let sample = trace_ask(&desc)?;
            let psi = build_psi(&spec, psi_t.as_deref())?;
            let transformed =
                fourier_transform(&sample, &psi, Some(&SheafDescriptor::Ask(desc.clone())))?;
            if let Some(path) = &ask.csv {
                write_sample_csv(&transformed, path)?;
            }
            Ok(Outcome {
                command: "family fourier",
                config: json!({
                    "field": field_config(&ask.field),
                    "f1": ask.f1, "f2_num": ask.f2_num, "f2_den": ask.f2_den,
                    "psi": ask.psi, "chi_index": ask.chi_index, "psi_t": psi_t,
                }),
                payload: json!({
                    "descriptor": desc.to_json(),
                    "input_sample": sample_summary(&sample),
                    "transformed_sample": sample_summary(&transformed),
                }),
                seed: None,
                hard_failure: None,
            })
        }
        Command::Gram(args) => {
            let config = json!({
                "field": field_config(&args.field), "cmax": args.cmax,
                "limit": args.limit, "scan": args.scan, "force": args.force,
            });
            if args.scan {
                if args.field.n != 1 || args.cmax != 3 {
                    return Err(precondition(
                        "the exact scan covers prime fields at cmax = 3",
                    ));
                }
                let report = ask_family_scan(args.field.p)?;
                let hard = (report.violations > 0).then(|| {
                    format!("{} pairs exceed the quasi-orthogonality bound", report.violations)
                });
                return Ok(Outcome {
                    command: "gram",
                    config,
                    payload: serde_json::to_value(&report)?,
                    seed: None,
                    hard_failure: hard,
                });
            }
            let spec = build_field(&args.field)?;
            let (samples, n_trivial, n_quadratic, truncated) =
                family_samples(&spec, args.cmax, args.limit)?;
            let report = verify_gram(&samples, &|_, _| false, args.force)?;
            let hard = (report.violations > 0)
                .then(|| format!("{} entries exceed their bound", report.violations));
            Ok(Outcome {
                command: "gram",
                config,
                payload: json!({
                    "total_trivial_classes": n_trivial,
                    "total_quadratic_classes": n_quadratic,
                    "truncated_to_limit": truncated,
                    "report": serde_json::to_value(&report)?,
                }),
                seed: None,
                hard_failure: hard,
            })
        }
        Command::Code(args) => {
            let spec = build_field(&args.field)?;
            let (samples, n_trivial, n_quadratic, truncated) =
                family_samples(&spec, args.cmax, args.limit)?;
            let report = code_report(&samples, args.cmax, 1, &|_, _| false)?;
            if let Some(path) = &args.csv {
                let code = embed(&samples)?;
                let mut w = csv::Writer::from_writer(File::create(path)?);
                for row in &code.cosines {
                    w.write_record(row.iter().map(|x| x.to_string()))?;
                }
                w.flush().map_err(Error::Io)?;
            }
            let mut hard = Vec::new();
            if report.violations > 0 {
                hard.push(format!("{} cosines exceed the bound", report.violations));
            }
            if !report.chain_holds {
                hard.push("the two-sided bound chain fails".into());
            }
            Ok(Outcome {
                command: "code",
                config: json!({
                    "field": field_config(&args.field), "cmax": args.cmax,
                    "limit": args.limit,
                }),
                payload: json!({
                    "total_trivial_classes": n_trivial,
                    "total_quadratic_classes": n_quadratic,
                    "truncated_to_limit": truncated,
                    "report": serde_json::to_value(&report)?,
                }),
                seed: None,
                hard_failure: (!hard.is_empty()).then(|| hard.join("; ")),
            })
        }
        Command::Enumerate(args) => {
            let spec = build_field(&args.field)?;
            let chi = MultiplicativeCharacter::new(spec.clone(), args.chi_index);
            let classes = enumerate_ask_classes(&spec, args.cmax, &chi)?;
            let listed = classes
                .iter()
                .take(args.limit)
                .map(|d| {
                    Ok(json!({
                        "descriptor_id": d.descriptor_id()?,
                        "descriptor": d.to_json(),
                        "conductor": conductor_ask(d)?.conductor,
                    }))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Outcome {
                command: "enumerate",
                config: json!({
                    "field": field_config(&args.field), "cmax": args.cmax,
                    "chi_index": args.chi_index, "limit": args.limit,
                }),
                payload: json!({
                    "count": classes.len(),
                    "chi_order": chi.order(),
                    "truncated": classes.len() > args.limit,
                    "classes": listed,
                }),
                seed: None,
                hard_failure: None,
            })
        }
        Command::Inject(args) => {
            let spec = build_field(&args.field)?;
            let (samples, n_trivial, n_quadratic, truncated) =
                family_samples(&spec, args.cmax, args.limit)?;
            let report = injectivity_check(&samples, &|_, _| false)?;
            let hard = (!report.proportional_pairs.is_empty()).then(|| {
                format!(
                    "{} non-isomorphic pairs are proportional",
                    report.proportional_pairs.len()
                )
            });
            Ok(Outcome {
                command: "inject",
                config: json!({
                    "field": field_config(&args.field), "cmax": args.cmax,
                    "limit": args.limit,
                }),
                payload: json!({
                    "total_trivial_classes": n_trivial,
                    "total_quadratic_classes": n_quadratic,
                    "truncated_to_limit": truncated,
                    "report": serde_json::to_value(&report)?,
                }),
                seed: None,
                hard_failure: hard,
            })
        }
        Command::Norm(NormCmd::Random { q, cmax, trials, dist }) => {
            let (p, n) = prime_power(*q)?;
            let spec = Arc::new(field_build(p, n, None)?);
            let rspec = build_rspec(dist)?;
            let summary = random_norm_experiment(&spec, *cmax, &rspec, *trials)?;
            Ok(Outcome {
                command: "norm random",
                config: json!({
                    "q": q, "cmax": cmax, "trials": trials,
                    "distribution": serde_json::to_value(&rspec.distribution)?,
                }),
                seed: Some(rspec.seed),
                payload: serde_json::to_value(&summary)?,
                hard_failure: None,
            })
        }
        Command::Norm(NormCmd::Certify { phi, family, a, gamma, s }) => {
            let fam: Value = serde_json::from_reader(File::open(family)?)?;
            let spec = field_from_json(&fam)?;
            let kernels = fam["kernels"]
                .as_array()
                .ok_or_else(|| precondition("family file must contain a kernels array"))?
                .iter()
                .map(|k| sample_from_json(&spec, k))
                .collect::<Result<Vec<_>>>()?;
            let phi_values = parse_phi_file(phi)?;
            if phi_values.len() != spec.q() as usize {
                return Err(precondition(format!(
                    "phi has {} values, field has {}",
                    phi_values.len(),
                    spec.q()
                )));
            }
            let cert = certificate_check(&phi_values, &spec, &kernels, *a, *gamma, *s)?;
            let hard =
                (!cert.certified).then(|| "certificate hypotheses do not all hold".to_string());
            Ok(Outcome {
                command: "norm certify",
                config: json!({
                    "phi": phi.display().to_string(),
                    "family": family.display().to_string(),
                    "a": a, "gamma": gamma, "s": s,
                }),
                payload: serde_json::to_value(&cert)?,
                seed: None,
                hard_failure: hard,
            })
        }
        Command::Norm(NormCmd::Tail { kernel, alpha, s, trials, dist }) => {
            let file: Value = serde_json::from_reader(File::open(kernel)?)?;
            let spec = field_from_json(&file)?;
            let sample = sample_from_json(&spec, &file["kernel"])?;
            let rspec = build_rspec(dist)?;
            let t = tail_experiment(&sample, &rspec, *alpha, *s, *trials)?;
            // three binomial standard errors of slack on the Monte-Carlo side
            let se = (t.theoretical_bound * (1.0 - t.theoretical_bound) / *trials as f64).sqrt();
            let hard = (t.empirical_frequency > t.theoretical_bound + 3.0 * se).then(|| {
                format!(
                    "empirical frequency {} exceeds the subgaussian bound {}",
                    t.empirical_frequency, t.theoretical_bound
                )
            });
            Ok(Outcome {
                command: "norm tail",
                config: json!({
                    "kernel": kernel.display().to_string(),
                    "alpha": alpha, "s": s, "trials": trials,
                    "distribution": serde_json::to_value(&rspec.distribution)?,
                }),
                seed: Some(rspec.seed),
                payload: serde_json::to_value(&t)?,
                hard_failure: hard,
            })
        }
        Command::Verify(args) => match args.profile {
            Profile::Quick => {
                let seed = effective_seed(args.seed)?;
                let payload = crate::acceptance::quick_payload(seed)?;
                let mut hard = Vec::new();
                if payload["scan_q101"]["violations"].as_u64() != Some(0) {
                    hard.push("quasi-orthogonality scan reported violations".to_string());
                }
                if payload["kl_exact"].as_str() != Some("1584") {
                    hard.push("polynomial bound mismatch".to_string());
                }
                let certified_8 = payload["norm_sweep"]
                    .as_array()
                    .and_then(|s| s.last())
                    .and_then(|e| e["certified_fraction"].as_f64())
                    .unwrap_or(0.0);
                if certified_8 < 0.99 {
                    hard.push("norm sweep certifies < 99% at alpha = 8".to_string());
                }
                Ok(Outcome {
                    command: "verify",
                    config: json!({"profile": "quick"}),
                    payload,
                    seed: Some(seed),
                    hard_failure: (!hard.is_empty()).then(|| hard.join("; ")),
                })
            }
            Profile::Full => {
                let results = crate::acceptance::run_all()?;
                for r in &results {
                    eprintln!(
                        "[{}] criterion {:>2} {:<28} ({:.2}s) {}",
                        if r.passed { "PASS" } else { "FAIL" },
                        r.index,
                        r.name,
                        r.seconds,
                        r.details
                    );
                }
                let failed: Vec<String> =
                    results.iter().filter(|r| !r.passed).map(|r| r.name.clone()).collect();
                Ok(Outcome {
                    command: "verify",
                    config: json!({"profile": "full"}),
                    payload: serde_json::to_value(&results)?,
                    seed: None,
                    hard_failure: (!failed.is_empty())
                        .then(|| format!("failed criteria: {}", failed.join(", "))),
                })
            }
        },
    }
}
