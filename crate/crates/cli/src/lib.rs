//! Command-line front end for `cmdual-core`.

pub mod fixtures;

use std::ffi::OsString;
use std::io::{self, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cmdual_core::cmdual::{
    brute_s0_s1, classify_special, derive_params, dual_representation, gen_sets, Branch, CmParams,
    FamilyKind, ThreeTermDual, ThreeTermVariant, UniversalDual,
};
use cmdual_core::gf3::parse_polynomial;
use cmdual_core::limits::brute_force_limit;
use cmdual_core::walsh::{extract_dual, is_bent_table, verify_weak_regularity, SpectrumReport};
use cmdual_core::{Error, FieldCtx, FieldElement};
use serde::Serialize;
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "cmdual",
    version,
    about = "Duals of the Coulter-Matthews bent functions Tr(a x^((3^k+1)/2)) over GF(3^n)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Bent,
    Dual,
    Universal,
    Threeterm,
    All,
}

#[derive(Args, Debug)]
struct FieldArgs {
    /// Extension degree.
    #[arg(long)]
    n: u32,
    /// Monic irreducible modulus, most significant coefficient first.
    #[arg(long)]
    modulus: Option<String>,
}

#[derive(Args, Debug)]
struct ParamArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
}

#[derive(Args, Debug)]
struct FunctionArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    k: u32,
    /// Coefficient as a digit string or `g^e`.
    #[arg(long, default_value = "g")]
    a: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the field context.
    Field(FieldArgs),
    /// Print w, the parity count and d.
    Params(ParamArgs),
    /// List the index sets and the sizes of S0/S1.
    Sets {
        #[command(flatten)]
        params: ParamArgs,
        /// Also list every member of S0 and S1.
        #[arg(long)]
        full: bool,
    },
    /// Print the trace representation of the dual.
    Dual(FunctionArgs),
    /// Check bentness and the dual identity.
    Verify {
        #[command(flatten)]
        function: FunctionArgs,
        #[arg(long, value_enum, default_value_t = Mode::All)]
        mode: Mode,
        /// Include every spectrum value in the output.
        #[arg(long)]
        dump_spectrum: bool,
    },
    /// Classify (n, k) into the special families.
    Predict(ParamArgs),
    /// Sweep w, parity and term count over a range of n.
    Table {
        #[arg(long, default_value_t = 2)]
        n_min: u32,
        #[arg(long)]
        n_max: u32,
    },
    /// Replay the worked examples.
    Examples,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

type CliResult = Result<i32, CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T, W, E>(args: I, out: &mut W, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write + Send,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
        {
            Ok(pool) => pool.install(|| dispatch(&cli, out)),
            Err(e) => Err(CliError::Usage(format!("thread pool: {e}"))),
        },
        None => dispatch(&cli, out),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILED
        }
    }
}

fn dispatch<W: Write>(cli: &Cli, out: &mut W) -> CliResult {
    let fmt = cli.format;
    match &cli.command {
        Command::Field(f) => cmd_field(f, fmt, out),
        Command::Params(p) => cmd_params(p, fmt, out),
        Command::Sets { params, full } => cmd_sets(params, *full, fmt, out),
        Command::Dual(f) => cmd_dual(f, fmt, out),
        Command::Verify {
            function,
            mode,
            dump_spectrum,
        } => cmd_verify(function, *mode, *dump_spectrum, fmt, out),
        Command::Predict(p) => cmd_predict(p, fmt, out),
        Command::Table { n_min, n_max } => cmd_table(*n_min, *n_max, fmt, out),
        Command::Examples => cmd_examples(fmt, out),
    }
}

fn reject_csv(fmt: Format, what: &str) -> Result<(), CliError> {
    if fmt == Format::Csv {
        return Err(CliError::Usage(format!(
            "--format csv is not supported by `{what}`"
        )));
    }
    Ok(())
}

fn build_field(f: &FieldArgs) -> Result<FieldCtx, CliError> {
    let ctx = match &f.modulus {
        Some(m) => FieldCtx::new(f.n, Some(&parse_polynomial(m)?))?,
        None => FieldCtx::new(f.n, None)?,
    };
    Ok(ctx)
}

fn resolve_a(ctx: &FieldCtx, s: &str) -> Result<FieldElement, CliError> {
    Ok(ctx.parse_element(s)?)
}

fn print_json<W: Write, T: Serialize>(out: &mut W, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_field<W: Write>(f: &FieldArgs, fmt: Format, out: &mut W) -> CliResult {
    reject_csv(fmt, "field")?;
    let ctx = build_field(f)?;
    match fmt {
        Format::Json => print_json(
            out,
            &json!({
                "n": ctx.n(),
                "modulus": ctx.modulus_string(),
                "generator": ctx.format(ctx.generator()),
                "group_order": ctx.group_order(),
                "order_factors": ctx.order_factors(),
            }),
        )?,
        _ => {
            writeln!(out, "n={}", ctx.n())?;
            writeln!(out, "modulus={}", ctx.modulus_string())?;
            writeln!(out, "generator={}", ctx.format(ctx.generator()))?;
            let factors: Vec<String> = ctx.order_factors().iter().map(u64::to_string).collect();
            writeln!(
                out,
                "group_order={} factors={}",
                ctx.group_order(),
                factors.join(",")
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_params<W: Write>(p: &ParamArgs, fmt: Format, out: &mut W) -> CliResult {
    reject_csv(fmt, "params")?;
    let params = derive_params(p.n, p.k)?;
    match fmt {
        Format::Json => print_json(
            out,
            &json!({
                "n": params.n,
                "k": params.k,
                "d": params.d,
                "w": params.w,
                "parity": params.parity_count,
                "branch": params.branch(),
                "terms": params.term_count(),
                "A": params.set_a(),
                "B": params.set_b(),
            }),
        )?,
        _ => {
            writeln!(
                out,
                "w={} parity={} d={}",
                params.w, params.parity_count, params.d
            )?;
            writeln!(
                out,
                "branch={} terms={}",
                params.branch().as_str(),
                params.term_count()
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn set_names(b: Branch) -> (&'static str, &'static str) {
    match b {
        Branch::Even => ("U0", "V0"),
        Branch::Odd => ("U1", "V1"),
    }
}

fn cmd_sets<W: Write>(p: &ParamArgs, full: bool, fmt: Format, out: &mut W) -> CliResult {
    reject_csv(fmt, "sets")?;
    let params = derive_params(p.n, p.k)?;
    let sets = gen_sets(&params);
    let brute = if full || params.n <= brute_force_limit() {
        Some(brute_s0_s1(&params)?)
    } else {
        None
    };
    let (un, vn) = set_names(sets.branch);
    let digits = |v: &[cmdual_core::TernaryIndex]| -> Vec<String> {
        v.iter().map(|j| j.to_digit_string()).collect()
    };
    let n = params.n;
    let as_digits = |s: &std::collections::BTreeSet<u64>| -> Vec<String> {
        s.iter()
            .map(|&j| {
                cmdual_core::TernaryIndex::new(j, n)
                    .unwrap()
                    .to_digit_string()
            })
            .collect()
    };
    match fmt {
        Format::Json => {
            let mut v = json!({
                "n": params.n,
                "k": params.k,
                "branch": sets.branch,
                "u_name": un,
                "u": digits(&sets.u),
                "v_name": vn,
                "v": digits(&sets.v),
            });
            if let Some((s0, s1)) = &brute {
                v["s0_len"] = json!(s0.len());
                v["s1_len"] = json!(s1.len());
                if full {
                    v["s0"] = json!(as_digits(s0));
                    v["s1"] = json!(as_digits(s1));
                }
            }
            print_json(out, &v)?;
        }
        _ => {
            writeln!(out, "branch={}", sets.branch.as_str())?;
            writeln!(out, "{un} ({}):", sets.u.len())?;
            for j in &sets.u {
                writeln!(out, "  {j}")?;
            }
            writeln!(out, "{vn} ({}):", sets.v.len())?;
            for j in &sets.v {
                writeln!(out, "  {j}")?;
            }
            if let Some((s0, s1)) = &brute {
                writeln!(out, "|S0|={} |S1|={}", s0.len(), s1.len())?;
                if full {
                    writeln!(out, "S0: {}", as_digits(s0).join(" "))?;
                    writeln!(out, "S1: {}", as_digits(s1).join(" "))?;
                }
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_dual<W: Write>(f: &FunctionArgs, fmt: Format, out: &mut W) -> CliResult {
    reject_csv(fmt, "dual")?;
    let ctx = build_field(&f.field)?;
    let a = resolve_a(&ctx, &f.a)?;
    let rep = dual_representation(&ctx, a, f.k)?;
    match fmt {
        Format::Json => print_json(out, &rep)?,
        _ => {
            writeln!(
                out,
                "a={} ({}) eta(a)={} modulus={}",
                f.a,
                ctx.format(a),
                rep.eta_a,
                ctx.modulus_string()
            )?;
            let p = &rep.params;
            writeln!(
                out,
                "n={} k={} d={} w={} parity={} branch={} terms={}",
                p.n,
                p.k,
                p.d,
                p.w,
                p.parity_count,
                p.branch().as_str(),
                rep.terms.len()
            )?;
            writeln!(out, "{}", rep.render())?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    /// `None` when the check does not apply to these parameters.
    passed: Option<bool>,
    detail: String,
}

fn cmd_verify<W: Write>(
    f: &FunctionArgs,
    mode: Mode,
    dump: bool,
    fmt: Format,
    out: &mut W,
) -> CliResult {
    reject_csv(fmt, "verify")?;
    let ctx = build_field(&f.field)?;
    let a = resolve_a(&ctx, &f.a)?;
    let params = derive_params(ctx.n(), f.k)?;
    let three = ThreeTermVariant::detect(params.n, params.k);
    if mode == Mode::Threeterm && three.is_none() {
        return Err(CliError::Usage(
            "threeterm mode requires n = 3t + 2 or n = 3t + 1 with k = 2t + 1".into(),
        ));
    }
    let rep = dual_representation(&ctx, a, params.k)?;
    let dual = rep.tabulate(&ctx);
    let wants = |m: Mode| mode == m || mode == Mode::All;
    let mut checks = Vec::new();
    let mut report: Option<SpectrumReport> = None;

    if wants(Mode::Bent) || wants(Mode::Dual) {
        let r = verify_weak_regularity(&ctx, a, params.k, &rep)?;
        if wants(Mode::Bent) {
            let bad = r.per_lambda.iter().filter(|x| !x.norm_ok).count();
            checks.push(Check {
                name: "bent",
                passed: Some(r.bent),
                detail: format!(
                    "{} of {} values with norm 3^{}",
                    r.per_lambda.len() - bad,
                    r.per_lambda.len(),
                    params.n
                ),
            });
        }
        if wants(Mode::Dual) {
            let extracted = extract_dual(&ctx, a, params.k).ok();
            let extracted_ok = extracted.as_deref() == Some(&dual[..]);
            let dual_bent = is_bent_table(&ctx, &dual)?;
            checks.push(Check {
                name: "dual",
                passed: Some(
                    r.dual_matches == Some(true) && r.weakly_regular && extracted_ok && dual_bent,
                ),
                detail: format!(
                    "identity mismatches={} weakly_regular={} extracted_agrees={} dual_bent={}",
                    r.mismatches.len(),
                    r.weakly_regular,
                    extracted_ok,
                    dual_bent
                ),
            });
        }
        report = Some(r);
    }
    if wants(Mode::Universal) {
        let universal = UniversalDual::new(&ctx, a, params.k)?;
        let mut mismatches = 0usize;
        for x in ctx.elements() {
            if universal.eval(x)? != dual[x.index() as usize] {
                mismatches += 1;
            }
        }
        checks.push(Check {
            name: "universal",
            passed: Some(mismatches == 0),
            detail: format!("{} exponents, mismatches={mismatches}", universal.len()),
        });
    }
    if wants(Mode::Threeterm) {
        match three {
            Some((variant, t)) => {
                let formula = ThreeTermDual::new(&ctx, a, variant, t)?;
                let mismatches = ctx
                    .elements()
                    .filter(|&x| formula.eval(x) != dual[x.index() as usize])
                    .count();
                checks.push(Check {
                    name: "threeterm",
                    passed: Some(mismatches == 0),
                    detail: format!("variant={variant:?} t={t} mismatches={mismatches}"),
                });
            }
            None => checks.push(Check {
                name: "threeterm",
                passed: None,
                detail: "not applicable".into(),
            }),
        }
    }

    let ok = checks.iter().all(|c| c.passed != Some(false));
    if let Some(r) = report.as_mut() {
        if !dump {
            r.per_lambda.clear();
        }
    }
    match fmt {
        Format::Json => print_json(
            out,
            &json!({
                "n": params.n,
                "k": params.k,
                "a_input": f.a,
                "a": ctx.format(a),
                "modulus": ctx.modulus_string(),
                "checks": checks,
                "verified": ok,
                "report": report,
            }),
        )?,
        _ => {
            writeln!(
                out,
                "n={} k={} a={} ({}) modulus={}",
                params.n,
                params.k,
                f.a,
                ctx.format(a),
                ctx.modulus_string()
            )?;
            if let Some(r) = &report {
                writeln!(
                    out,
                    "reference={} convention: {}",
                    r.reference_constant, r.convention
                )?;
            }
            for c in &checks {
                let status = match c.passed {
                    Some(true) => "PASS",
                    Some(false) => "FAIL",
                    None => "SKIP",
                };
                writeln!(out, "{}: {status} ({})", c.name, c.detail)?;
            }
            if let Some(r) = &report {
                for rec in &r.per_lambda {
                    let g = rec.dual_value.map_or("-".to_string(), |v| v.to_string());
                    writeln!(
                        out,
                        "{} {} norm_ok={} g={g}",
                        ctx.format(ctx.element(rec.lambda)),
                        rec.w,
                        rec.norm_ok
                    )?;
                }
            }
            writeln!(out, "{}", if ok { "verified" } else { "FAILED" })?;
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}

fn family_name(kind: &FamilyKind) -> String {
    match kind {
        FamilyKind::KDividesNPlus1 => "k|n+1".into(),
        FamilyKind::KDividesNMinus1 => "k|n-1".into(),
        FamilyKind::NMinusKDividesNPlus1 => "(n-k)|n+1".into(),
        FamilyKind::NMinusKDividesNMinus1 => "(n-k)|n-1".into(),
        FamilyKind::MtPlusMMinus1 { m, t } => format!("n=mt+m-1 (m={m}, t={t})"),
        FamilyKind::MtPlus1 { m, t } => format!("n=mt+1 (m={m}, t={t})"),
    }
}

fn cmd_predict<W: Write>(p: &ParamArgs, fmt: Format, out: &mut W) -> CliResult {
    reject_csv(fmt, "predict")?;
    let params = derive_params(p.n, p.k)?;
    let families = classify_special(p.n, p.k)?;
    let sets = gen_sets(&params);
    let enumerated = (sets.u.len() + sets.v.len()) as u64;
    let agrees: Vec<bool> = families
        .iter()
        .map(|f| {
            f.w == params.w
                && f.parity == params.parity_count
                && f.branch == params.branch()
                && f.terms == enumerated
        })
        .collect();
    let ok = agrees.iter().all(|&b| b);
    match fmt {
        Format::Json => {
            let fams: Vec<_> = families
                .iter()
                .zip(&agrees)
                .map(|(f, &m)| {
                    let mut v = serde_json::to_value(f).unwrap_or_default();
                    v["matches"] = json!(m);
                    v
                })
                .collect();
            print_json(
                out,
                &json!({
                    "n": params.n,
                    "k": params.k,
                    "direct": {
                        "w": params.w,
                        "parity": params.parity_count,
                        "branch": params.branch(),
                        "terms": enumerated,
                    },
                    "families": fams,
                }),
            )?
        }
        _ => {
            writeln!(
                out,
                "direct: w={} parity={} branch={} terms={}",
                params.w,
                params.parity_count,
                params.branch().as_str(),
                enumerated
            )?;
            if families.is_empty() {
                writeln!(out, "no special family applies")?;
            }
            for (f, m) in families.iter().zip(&agrees) {
                writeln!(
                    out,
                    "{}: w={} parity={} branch={} terms={} {}",
                    family_name(&f.kind),
                    f.w,
                    f.parity,
                    f.branch.as_str(),
                    f.terms,
                    if *m { "agrees" } else { "DISAGREES" }
                )?;
            }
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}

fn table_rows(n_min: u32, n_max: u32) -> Vec<CmParams> {
    (n_min..=n_max)
        .flat_map(|n| {
            (1..n)
                .step_by(2)
                .filter_map(move |k| derive_params(n, k).ok())
        })
        .collect()
}

fn cmd_table<W: Write>(n_min: u32, n_max: u32, fmt: Format, out: &mut W) -> CliResult {
    if n_min > n_max {
        return Err(CliError::Usage("n-min must not exceed n-max".into()));
    }
    derive_params(n_max, 1)?;
    let rows = table_rows(n_min.max(2), n_max);
    match fmt {
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|p| {
                    json!({
                        "n": p.n, "k": p.k, "w": p.w, "parityCount": p.parity_count,
                        "branch": p.branch(), "termCount": p.term_count(),
                    })
                })
                .collect();
            print_json(out, &v)?;
        }
        Format::Csv => {
            writeln!(out, "n,k,w,parityCount,branch,termCount")?;
            for p in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    p.n,
                    p.k,
                    p.w,
                    p.parity_count,
                    p.branch().as_str(),
                    p.term_count()
                )?;
            }
        }
        Format::Text => {
            writeln!(
                out,
                "{:>3} {:>3} {:>3} {:>6} {:>6} {:>12}",
                "n", "k", "w", "parity", "branch", "terms"
            )?;
            for p in &rows {
                writeln!(
                    out,
                    "{:>3} {:>3} {:>3} {:>6} {:>6} {:>12}",
                    p.n,
                    p.k,
                    p.w,
                    p.parity_count,
                    p.branch().as_str(),
                    p.term_count()
                )?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_examples<W: Write>(fmt: Format, out: &mut W) -> CliResult {
    reject_csv(fmt, "examples")?;
    let results = fixtures::run_fixtures();
    let ok = results.iter().all(|r| r.passed());
    match fmt {
        Format::Json => print_json(out, &json!({ "passed": ok, "fixtures": results }))?,
        _ => {
            for r in &results {
                if r.passed() {
                    writeln!(out, "{} (n={}, k={}): ok", r.id, r.n, r.k)?;
                } else {
                    writeln!(out, "{} (n={}, k={}): MISMATCH", r.id, r.n, r.k)?;
                    for d in &r.diffs {
                        writeln!(
                            out,
                            "  {}: expected {} got {}",
                            d.field, d.expected, d.actual
                        )?;
                    }
                }
            }
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_FAILED })
}
