//! Command-line front end. Exit codes: 0 when every verdict passes, 1 when a
//! mathematical verdict fails, 2 on usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::caot::{build_system, gradable_subspace, is_gradable, naturality_check, solve_kernel, GData};
use crate::chernalg::{lemma_valuation_checks, log_components, split_index};
use crate::chernbuild::{
    build_chern_classes, cartan_corpus, chern_monomial_rank, liftability_check, load_class_set,
    non_liftable_example, render_class_set, verify_cartan, verify_gradable, verify_power_congruence,
    verify_support, ChernClassSet, SuiteReport,
};
use crate::config::{parse_config, ConfigFile, JobConfig};
use crate::error::Error;
use crate::exactnum::format_rational;
use crate::fgl::{araki_residues, araki_v, check_height, check_morava_grading, MoravaLaw};
use crate::polyring::{partitions_of, Ring};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "morava-chern", version, about = "Chern classes from Morava K-theory to Chow groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct LawArgs {
    /// JSON file with keys p, n, a_seq, degree.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    n: Option<u32>,
    /// Comma-separated p-units a_1, a_2, ...; missing a_k default to a_1^k.
    #[arg(long = "a-seq", value_delimiter = ',', allow_hyphen_values = true)]
    a_seq: Option<Vec<String>>,
    #[arg(long)]
    degree: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Formal group law of K(n).
    Fgl {
        #[command(subcommand)]
        command: FglCommand,
    },
    /// The polynomials P_i and their valuations.
    Pi {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long)]
        i: Option<u32>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Additive operations to CH^m.
    SolveAdd {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long)]
        m: u32,
        #[arg(long, value_enum, default_value = "q")]
        ring: RingArg,
        #[arg(long)]
        gradable: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build or verify Chern classes.
    Chern {
        #[command(subcommand)]
        command: ChernCommand,
    },
    /// Same as `chern verify`.
    Verify(VerifyArgs),
}

#[derive(Subcommand, Debug)]
enum FglCommand {
    Show {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long, value_enum)]
        check: Vec<CheckArg>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum ChernCommand {
    Build {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long)]
        out: PathBuf,
    },
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    i: Option<u32>,
    #[arg(long, value_enum, default_value = "q")]
    ring: RingArg,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum RingArg {
    Q,
    Fp,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum CheckArg {
    Grading,
    Height,
    Araki,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Suite {
    Support,
    Cartan,
    Gradable,
    Power,
    Rank,
    Lift,
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Failure::Usage(e.to_string())
    }

    fn compute(e: impl std::fmt::Display) -> Self {
        Failure::Compute(e.to_string())
    }
}

type Outcome = std::result::Result<bool, Failure>;

/// Runs the CLI on `argv` (including the program name) with process stdout/stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Like [`run`], writing to the given streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return 0;
            }
            let _ = write!(err, "{}", e.render());
            return 2;
        }
    };
    let result = match cli.command {
        Command::Fgl {
            command: FglCommand::Show { law, check, report },
        } => fgl_show(&law, &check, report.as_deref(), out),
        Command::Pi { law, i, report } => pi(&law, i, report.as_deref(), out),
        Command::SolveAdd {
            law,
            m,
            ring,
            gradable,
            report,
        } => solve_add(&law, m, ring, gradable, report.as_deref(), out),
        Command::Chern {
            command: ChernCommand::Build { law, out: dir },
        } => chern_build(&law, &dir, out),
        Command::Chern {
            command: ChernCommand::Verify(v),
        }
        | Command::Verify(v) => verify(&v, out),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Compute(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn job(args: &LawArgs) -> std::result::Result<JobConfig, Failure> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            Some(parse_config(&text).map_err(Failure::usage)?)
        }
        None => None,
    };
    let flags = ConfigFile {
        p: args.p,
        n: args.n,
        a_seq: args.a_seq.clone(),
        degree: args.degree,
    };
    JobConfig::resolve(&flags, file.as_ref()).map_err(Failure::usage)
}

fn law_for(job: &JobConfig, bound: u32) -> std::result::Result<MoravaLaw, Failure> {
    MoravaLaw::new(job.p, job.n, &job.a_seq, bound).map_err(Failure::usage)
}

/// Writes to a sibling temporary file and renames it over `path`.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "no file name"))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

fn emit_report(path: Option<&Path>, report: Value) -> std::result::Result<(), Failure> {
    if let Some(path) = path {
        let mut text = serde_json::to_string_pretty(&report).expect("serializable");
        text.push('\n');
        write_atomic(path, &text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn line(out: &mut dyn Write, s: impl AsRef<str>) {
    let _ = writeln!(out, "{}", s.as_ref());
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn job_json(job: &JobConfig) -> Value {
    json!({
        "p": job.p.get(),
        "n": job.n,
        "a_seq": job.a_seq.iter().map(format_rational).collect::<Vec<_>>(),
        "degree": job.degree,
    })
}

fn fgl_show(args: &LawArgs, checks: &[CheckArg], report: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let job = job(args)?;
    let law = law_for(&job, job.degree)?;
    let f = law.fgl();
    line(out, format!("log(x) = {}", f.log().pretty()));
    line(out, format!("F(x, y) = {}", f.law().pretty()));
    let mut all = true;
    let mut results = serde_json::Map::new();
    for check in checks {
        match check {
            CheckArg::Grading => {
                let ok = check_morava_grading(f, law.p(), law.n());
                all &= ok;
                line(out, format!("grading: {}", verdict(ok)));
                results.insert("grading".into(), json!(ok));
            }
            CheckArg::Height => {
                let h = check_height(f, law.n()).map_err(Failure::usage)?;
                let a1 = crate::exactnum::reduce_mod_p(&law.a(1), law.p())
                    .map_err(Failure::compute)?
                    .value();
                let ok = h.holds && h.unit == a1;
                all &= ok;
                line(out, format!("height {}: unit {} (a_1 = {a1} mod p): {}", law.n(), h.unit, verdict(ok)));
                results.insert("height".into(), json!({"holds": ok, "unit": h.unit}));
            }
            CheckArg::Araki => {
                let up_to = 2 * law.n();
                let v = araki_v(&law, up_to).map_err(Failure::compute)?;
                let res = araki_residues(&v, law.p());
                let a1 = crate::exactnum::reduce_mod_p(&law.a(1), law.p())
                    .map_err(Failure::compute)?
                    .value();
                let ok = res.iter().enumerate().all(|(k, r)| {
                    let j = k as u32 + 1;
                    if !j.is_multiple_of(law.n()) {
                        r.is_zero()
                    } else if j == law.n() {
                        r.value() == a1
                    } else {
                        true
                    }
                });
                all &= ok;
                let shown: Vec<String> = res.iter().map(|r| r.value().to_string()).collect();
                line(out, format!("araki v_1..v_{up_to} mod p = [{}]: {}", shown.join(", "), verdict(ok)));
                results.insert(
                    "araki".into(),
                    json!({"holds": ok, "v": v.iter().map(format_rational).collect::<Vec<_>>()}),
                );
            }
        }
    }
    let terms = |poly: &crate::polyring::WeightedPoly| -> Vec<Value> {
        poly.terms()
            .map(|(m, c)| json!([m.exps(), format_rational(c)]))
            .collect()
    };
    emit_report(
        report,
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": "fgl show",
            "job": job_json(&job),
            "log": terms(f.log()),
            "exp": terms(f.exp()),
            "law": terms(f.law()),
            "checks": Value::Object(results),
        }),
    )?;
    Ok(all)
}

fn pi(args: &LawArgs, only: Option<u32>, report: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let job = job(args)?;
    if only.is_some_and(|i| i == 0 || i > job.degree) {
        return Err(Failure::usage(format!("--i must lie in 1..={}", job.degree)));
    }
    let law = law_for(&job, job.degree)?;
    let comps = log_components(law.fgl().log(), law.p(), job.degree).map_err(Failure::compute)?;
    let mut all = true;
    let mut rows = Vec::new();
    for c in comps.iter().filter(|c| only.is_none_or(|i| i == c.i)) {
        line(out, c.pretty_line());
        let lemma = lemma_valuation_checks(&law, &comps, c.i);
        let (ok, detail) = match &lemma {
            Ok(r) => (
                true,
                match r.scalar {
                    Some(s) => format!("k = {}, v = {}, scalar {s}", r.k, r.v),
                    None => format!("k = {}, v = {}", r.k, r.v),
                },
            ),
            Err(e) => (false, e.to_string()),
        };
        all &= ok;
        line(out, format!("lemma P_{}: {} ({detail})", c.i, verdict(ok)));
        rows.push(json!({
            "i": c.i,
            "p_i": c.p_i.pretty(),
            "nu": c.nu.to_string(),
            "mu": c.mu,
            "lemma": ok,
            "detail": detail,
        }));
    }
    emit_report(
        report,
        json!({"schema_version": SCHEMA_VERSION, "command": "pi", "job": job_json(&job), "components": rows}),
    )?;
    Ok(all)
}

fn gdata_json(g: &GData) -> Value {
    serde_json::to_value(g.to_json()).expect("serializable")
}

fn solve_add(
    args: &LawArgs,
    m: u32,
    ring: RingArg,
    gradable: bool,
    report: Option<&Path>,
    out: &mut dyn Write,
) -> Outcome {
    let job = job(args)?;
    if m == 0 || m > crate::config::MAX_DEGREE {
        return Err(Failure::usage(format!("--m must lie in 1..={}", crate::config::MAX_DEGREE)));
    }
    let law = law_for(&job, m)?;
    let r = match ring {
        RingArg::Q => Ring::Q,
        RingArg::Fp => Ring::Fp(law.p()),
    };
    let sys = build_system(law.fgl(), law.n(), m, r).map_err(Failure::compute)?;
    let basis = solve_kernel(&sys).map_err(Failure::compute)?;
    let mut natural = true;
    for g in &basis {
        natural &= naturality_check(g, law.fgl()).map_err(Failure::compute)?;
    }
    let mut all = natural;
    let ring_name = if ring == RingArg::Q { "q" } else { "fp" };
    line(out, format!("unknowns {}, equations {}", sys.variables().len(), sys.rows().len()));
    line(out, format!("kernel dimension {} over {ring_name}", basis.len()));
    line(out, format!("naturality of basis: {}", verdict(natural)));
    if ring == RingArg::Q {
        let ok = basis.len() == 1;
        all &= ok;
        line(out, format!("rational rank 1: {}", verdict(ok)));
    }
    let mut grad_json = Value::Null;
    if gradable {
        let grad = gradable_subspace(&basis).map_err(Failure::compute)?;
        let ok = grad.len() == 1 && grad.iter().all(is_gradable);
        all &= ok;
        line(out, format!("gradable dimension {}: {}", grad.len(), verdict(ok)));
        grad_json = Value::Array(grad.iter().map(gdata_json).collect());
    }
    emit_report(
        report,
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": "solve-add",
            "job": job_json(&job),
            "m": m,
            "ring": ring_name,
            "kernel_dimension": basis.len(),
            "basis": basis.iter().map(gdata_json).collect::<Vec<_>>(),
            "gradable_basis": grad_json,
            "natural": natural,
        }),
    )?;
    Ok(all)
}

fn chern_build(args: &LawArgs, dir: &Path, out: &mut dyn Write) -> Outcome {
    let job = job(args)?;
    let law = law_for(&job, job.degree)?;
    let cset = build_chern_classes(&law, job.degree).map_err(Failure::compute)?;
    std::fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
    let files = render_class_set(&cset);
    for (name, text) in &files {
        let path = dir.join(name);
        write_atomic(&path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    }
    let cert: crate::chernbuild::Certificate =
        serde_json::from_str(&files.last().expect("certificate").1).expect("just written");
    for c in &cert.classes {
        line(
            out,
            format!(
                "c_{}: mu = {}, beta = {}, integral {}, support {}, gradable {}",
                c.i,
                c.mu,
                c.beta,
                verdict(c.integral && c.unit_content),
                verdict(c.support),
                verdict(c.gradable)
            ),
        );
    }
    if cert.base_only {
        line(out, "degree below p^n: additive range only");
    }
    line(out, format!("certificate: {}", verdict(cert.passed())));
    Ok(cert.passed())
}

fn print_suite(out: &mut dyn Write, r: &SuiteReport) {
    for c in &r.checks {
        line(out, format!("{}: {} ({})", c.subject, verdict(c.pass), c.detail));
    }
}

fn verify(args: &VerifyArgs, out: &mut dyn Write) -> Outcome {
    let cset = match load_class_set(&args.input) {
        Ok(c) => c,
        Err(e @ Error::Io(_)) => return Err(Failure::usage(format!("{}: {e}", args.input.display()))),
        Err(e) => return Err(Failure::compute(e)),
    };
    let d = cset.degree();
    if args.i.is_some_and(|i| i == 0 || i > d) {
        return Err(Failure::usage(format!("--i must lie in 1..={d}")));
    }
    let report = match args.suite {
        Suite::Support => verify_support(&cset),
        Suite::Gradable => verify_gradable(&cset),
        Suite::Cartan => verify_cartan(&cset, &cartan_corpus()).map_err(Failure::compute)?,
        Suite::Power => power_suite(&cset, args.i)?,
        Suite::Rank => rank_suite(&cset, args.i, args.ring)?,
        Suite::Lift => lift_suite(&cset)?,
    };
    if args.suite == Suite::Rank {
        for c in &report.checks {
            line(out, &c.detail);
        }
    } else {
        print_suite(out, &report);
    }
    let name = format!("{:?}", args.suite).to_lowercase();
    line(out, format!("suite {name}: {}", verdict(report.passed())));
    emit_report(
        args.report.as_deref(),
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": "verify",
            "suite": name,
            "p": cset.p().get(),
            "n": cset.law().n(),
            "degree": d,
            "passed": report.passed(),
            "checks": serde_json::to_value(&report.checks).expect("serializable"),
        }),
    )?;
    Ok(report.passed())
}

fn suite(name: &str) -> SuiteReport {
    SuiteReport {
        suite: name.into(),
        checks: Vec::new(),
    }
}

fn push(r: &mut SuiteReport, subject: String, pass: bool, detail: String) {
    r.checks.push(crate::chernbuild::CheckResult { subject, pass, detail });
}

fn power_suite(cset: &ChernClassSet, only: Option<u32>) -> std::result::Result<SuiteReport, Failure> {
    let pn = cset.law().pn();
    let indices: Vec<u32> = match only {
        Some(i) if split_index(i, pn).0 == 0 => {
            return Err(Failure::usage(format!("p^n does not divide {i}")))
        }
        Some(i) => vec![i],
        None => (1..=cset.degree()).filter(|&i| split_index(i, pn).0 > 0).collect(),
    };
    let mut r = suite("power");
    for i in indices {
        let (k, v) = split_index(i, pn);
        match verify_power_congruence(cset, i) {
            Ok(a) => push(&mut r, format!("phi_{i}"), true, format!("v = {v}, k = {k}, a = {a}")),
            Err(e) => push(&mut r, format!("phi_{i}"), false, e.to_string()),
        }
    }
    Ok(r)
}

fn rank_suite(cset: &ChernClassSet, only: Option<u32>, ring: RingArg) -> std::result::Result<SuiteReport, Failure> {
    let ring = match ring {
        RingArg::Q => Ring::Q,
        RingArg::Fp => Ring::Fp(cset.p()),
    };
    let indices: Vec<u32> = match only {
        Some(i) => vec![i],
        None => (1..=cset.degree().min(6)).collect(),
    };
    let mut r = suite("rank");
    for i in indices {
        let rank = chern_monomial_rank(cset, i, ring).map_err(Failure::compute)?;
        let expected = partitions_of(i, None).len();
        let pass = rank == expected;
        push(
            &mut r,
            format!("i = {i}"),
            pass,
            format!("rank {rank} / expected p({i})={expected}: {}", verdict(pass)),
        );
    }
    Ok(r)
}

fn lift_suite(cset: &ChernClassSet) -> std::result::Result<SuiteReport, Failure> {
    let p = cset.p();
    let modulus = cset.law().modulus();
    let mut r = suite("lift");
    for e in cset.entries() {
        let phi = e.phi.to_ring(Ring::Fp(p)).map_err(Failure::compute)?;
        let ok = liftability_check(&phi, cset, e.i as u64 % modulus).map_err(Failure::compute)?;
        push(&mut r, format!("phi_{} mod p", e.i), ok, format!("liftable: {ok}"));
    }
    let law = cset.law();
    if p.get() > 2 && law.n() > 1 && cset.degree() as u64 > p.get() {
        let xi = non_liftable_example(cset).map_err(Failure::compute)?;
        let natural = naturality_check(&xi, law.fgl()).map_err(Failure::compute)?;
        let lifts = liftability_check(&xi, cset, 2).map_err(Failure::compute)?;
        let pass = natural && !xi.is_zero() && !lifts;
        push(
            &mut r,
            "Q o c_2".into(),
            pass,
            format!("natural: {natural}, nonzero: {}, liftable: {lifts}", !xi.is_zero()),
        );
    }
    Ok(r)
}
