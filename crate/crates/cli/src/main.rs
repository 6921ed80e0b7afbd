use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};
use vmrt_core::certify::{certify_structural, cross_validate, AxiomSet, CrossValidation, Limits, StructuralCertificate};
use vmrt_core::divisibility::{gd_bound_checked_to, CheckerSummary, DivisibilityVerdict, PairStatus, PairVerdict, DEFAULT_HEIGHT};
use vmrt_core::families::{build_family, FamilyExpr, SpaceSpec};
use vmrt_core::ring::{GradedRingModel, RingError};
use vmrt_core::splitting::{
    collapse_swaps, find_unit_factorizations, normalize_splitting_type, splitting_verdict, SplitError, SplitStatus,
    WhitneyPair,
};
use vmrt_core::table::{acceptance_rows, compute_table, default_rows, parse_rows, render_text, render_tsv};

const EXIT_EXPECTATION: u8 = 1;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NO_INPUT: u8 = 66;
const EXIT_CANT_CREATE: u8 = 73;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
    NoInput(String),
    Output(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::NoInput(_) => EXIT_NO_INPUT,
            CliError::Output(_) => EXIT_CANT_CREATE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::NoInput(m) | CliError::Output(m) => m,
        }
    }
}

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "vmrt", version, about = "Good-divisibility checks and certificates for Chow rings of VMRTs")]
struct Cli {
    /// Write the report to this file (atomically) instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Axioms {
    Paper,
    Checked,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Build or inspect ring models
    #[command(subcommand)]
    Ring(RingCmd),
    /// Decide good divisibility on a model
    #[command(subcommand)]
    Div(DivCmd),
    /// Structural bound for a family expression
    Certify(CertifyArgs),
    /// Compare the checker with both certified bounds
    Crossval(CrossvalArgs),
    /// Classification table with computed columns
    Table(TableArgs),
    /// Splitting verdicts and splitting types
    #[command(subcommand)]
    Split(SplitCmd),
    /// Nontrivial factorizations of 1 into two truncated Chern polynomials
    UnitFactor(UnitFactorArgs),
}

#[derive(Subcommand)]
enum RingCmd {
    /// Build a model and emit its ring file
    Build(BuildArgs),
    /// Print the rank vector
    Ranks(RingSource),
}

#[derive(Subcommand)]
enum DivCmd {
    /// Per-pair verdicts
    Check(DivArgs),
    /// Aggregate bound only
    Bound(DivArgs),
}

#[derive(Subcommand)]
enum SplitCmd {
    /// Whether uniform bundles of the given rank split
    Verdict(VerdictArgs),
    /// Normalize a splitting type given as comma-separated integers
    Normalize(NormalizeArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct RingSource {
    /// Ring file path or inline ring JSON
    #[arg(long)]
    ring: Option<String>,
    /// Family expression path or inline JSON
    #[arg(long)]
    family: Option<String>,
    /// VMRT of a space, e.g. G,2,5
    #[arg(long)]
    space: Option<String>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ExprSource {
    /// Family expression path or inline JSON
    #[arg(long)]
    family: Option<String>,
    /// VMRT of a space, e.g. OG,2,9
    #[arg(long)]
    space: Option<String>,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    source: ExprSource,
    /// Truncate the model to this degree
    #[arg(long)]
    cutoff: Option<usize>,
}

#[derive(Args)]
struct DivArgs {
    #[command(flatten)]
    source: RingSource,
    /// Largest total degree to check (default: cutoff + 1)
    #[arg(long)]
    max_degree: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_HEIGHT)]
    height: u32,
    /// Exit 1 unless the certified bound equals this value
    #[arg(long)]
    expect: Option<usize>,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    source: ExprSource,
    #[arg(long, value_enum, default_value = "both")]
    axioms: Axioms,
}

#[derive(Args)]
struct LimitArgs {
    /// Skip the checker above this cutoff
    #[arg(long, default_value_t = Limits::default().max_cutoff)]
    max_cutoff: usize,
    /// Skip the checker above this many structure constants
    #[arg(long, default_value_t = Limits::default().max_table_entries)]
    max_entries: usize,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        Limits { max_cutoff: self.max_cutoff, max_table_entries: self.max_entries }
    }
}

#[derive(Args)]
struct CrossvalArgs {
    #[command(flatten)]
    source: ExprSource,
    #[arg(long, default_value_t = DEFAULT_HEIGHT)]
    height: u32,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args)]
struct TableArgs {
    /// Semicolon-separated spaces, e.g. "P,5;Q,7;G,2,5"
    #[arg(long, conflicts_with = "acceptance")]
    rows: Option<String>,
    /// Only the odd-quadric acceptance row set
    #[arg(long)]
    acceptance: bool,
    #[arg(long, default_value_t = DEFAULT_HEIGHT)]
    height: u32,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args)]
struct VerdictArgs {
    /// Space, e.g. G,2,5
    #[arg(long)]
    space: String,
    #[arg(long)]
    rank: usize,
    #[arg(long, value_enum, default_value = "paper")]
    axioms: Axioms,
}

#[derive(Args)]
struct NormalizeArgs {
    /// Splitting type, e.g. 2,2,1,0
    #[arg(long = "type", value_delimiter = ',', allow_negative_numbers = true, required = true)]
    entries: Vec<i64>,
}

#[derive(Args)]
struct UnitFactorArgs {
    #[command(flatten)]
    source: RingSource,
    /// Length of the first factor
    #[arg(short)]
    k: usize,
    /// Length of the second factor
    #[arg(short)]
    l: usize,
    #[arg(long, default_value_t = DEFAULT_HEIGHT)]
    height: u32,
}

/// A rendered report plus the exit status it implies.
struct Outcome {
    body: String,
    code: u8,
    note: Option<String>,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome { body, code: 0, note: None }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            if let Err(e) = emit(cli.out.as_deref(), &outcome.body) {
                eprintln!("vmrt: {}", e.message());
                return ExitCode::from(e.code());
            }
            if let Some(note) = outcome.note {
                eprintln!("{note}");
            }
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("vmrt: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn emit(out: Option<&Path>, body: &str) -> CliResult<()> {
    let Some(path) = out else {
        let mut stdout = io::stdout().lock();
        return stdout.write_all(body.as_bytes()).map_err(|e| CliError::Output(format!("stdout: {e}")));
    };
    let fail = |e: io::Error| CliError::Output(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(body.as_bytes()).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    let format = cli.format;
    match &cli.command {
        Command::Ring(RingCmd::Build(a)) => ring_build(a, cli.out.is_some()),
        Command::Ring(RingCmd::Ranks(src)) => ring_ranks(src, format.unwrap_or(Format::Text)),
        Command::Div(DivCmd::Check(a)) => div(a, true, format.unwrap_or(Format::Text)),
        Command::Div(DivCmd::Bound(a)) => div(a, false, format.unwrap_or(Format::Text)),
        Command::Certify(a) => certify(a, format.unwrap_or(Format::Text)),
        Command::Crossval(a) => crossval(a, format.unwrap_or(Format::Text)),
        Command::Table(a) => table(a, format.unwrap_or(Format::Tsv)),
        Command::Split(SplitCmd::Verdict(a)) => verdict(a, format.unwrap_or(Format::Text)),
        Command::Split(SplitCmd::Normalize(a)) => normalize(a, format.unwrap_or(Format::Text)),
        Command::UnitFactor(a) => unit_factor(a, format.unwrap_or(Format::Text)),
    }
}

/// Inline JSON when the argument starts with `{`, otherwise a file path.
fn read_input(arg: &str) -> CliResult<String> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    fs::read_to_string(arg).map_err(|e| CliError::NoInput(format!("{arg}: {e}")))
}

fn parse_space(s: &str) -> CliResult<SpaceSpec> {
    SpaceSpec::from_str(s).map_err(|e| CliError::Usage(e.to_string()))
}

fn load_expr(src: &ExprSource) -> CliResult<FamilyExpr> {
    match (&src.family, &src.space) {
        (Some(f), _) => FamilyExpr::from_json(&read_input(f)?).map_err(|e| CliError::Usage(e.to_string())),
        (None, Some(s)) => Ok(FamilyExpr::Vmrt { space: parse_space(s)? }),
        (None, None) => Err(CliError::Usage("a family expression is required".into())),
    }
}

fn load_ring(src: &RingSource) -> CliResult<GradedRingModel> {
    if let Some(r) = &src.ring {
        return GradedRingModel::from_json(&read_input(r)?).map_err(|e| match e {
            RingError::Malformed(_) | RingError::Version(_) => CliError::Usage(e.to_string()),
            e => data_err(e),
        });
    }
    let expr = load_expr(&ExprSource { family: src.family.clone(), space: src.space.clone() })?;
    build_family(&expr).map_err(data_err)
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports always serialize");
    s.push('\n');
    s
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports always serialize")
}

/// Adds a `text` rendering to every serialized ring element in `v`.
fn decorate(ring: &GradedRingModel, v: &mut Value) {
    match v {
        Value::Object(map) => {
            if map.len() == 2 && map.contains_key("degree") && map.contains_key("coeffs") {
                if let Some(text) = describe_value(ring, map.get("degree"), map.get("coeffs")) {
                    map.insert("text".into(), Value::String(text));
                }
                return;
            }
            map.values_mut().for_each(|x| decorate(ring, x));
        }
        Value::Array(items) => items.iter_mut().for_each(|x| decorate(ring, x)),
        _ => {}
    }
}

fn describe_value(ring: &GradedRingModel, degree: Option<&Value>, coeffs: Option<&Value>) -> Option<String> {
    let degree = usize::try_from(degree?.as_u64()?).ok()?;
    let coeffs: Option<Vec<BigInt>> = coeffs?
        .as_array()?
        .iter()
        .map(|c| BigInt::from_str(&c.to_string()).ok())
        .collect();
    let e = ring.element(degree, coeffs?).ok()?;
    Some(ring.describe(&e))
}

fn ring_build(a: &BuildArgs, to_file: bool) -> CliResult<Outcome> {
    let expr = load_expr(&a.source)?;
    let mut ring = build_family(&expr).map_err(data_err)?;
    if let Some(c) = a.cutoff {
        ring = ring.truncate(c).map_err(data_err)?;
    }
    let mut body = ring.to_json();
    body.push('\n');
    let ranks = format!("ranks {}", join(ring.ranks()));
    // the ring file owns stdout unless --out is given
    if to_file {
        println!("{ranks}");
        Ok(Outcome::ok(body))
    } else {
        Ok(Outcome { body, code: 0, note: Some(ranks) })
    }
}

fn ring_ranks(src: &RingSource, format: Format) -> CliResult<Outcome> {
    let ring = load_ring(src)?;
    Ok(Outcome::ok(match format {
        Format::Json => pretty(&json!({ "cutoff": ring.cutoff(), "ranks": ring.ranks() })),
        _ => format!("{}\n", join(ring.ranks())),
    }))
}

fn witness_text(ring: &GradedRingModel, v: &PairVerdict) -> String {
    match &v.witness {
        Some(w) => format!("x = {}, y = {}", ring.describe(&w.x), ring.describe(&w.y)),
        None => "-".to_string(),
    }
}

fn summary_text(ring: &GradedRingModel, s: &CheckerSummary) -> String {
    let mut out = format!("certified up to {}", s.certified_up_to);
    out.push_str(if s.exact { " (exact)" } else { " (lower bound)" });
    if let Some(u) = s.unknown_from {
        let _ = write!(out, "; undecided from {u}");
    }
    if let Some(w) = &s.witness {
        let _ = write!(out, "; refuted at {} by ({},{}): {}", w.total_degree(), w.i, w.j, witness_text(ring, w));
    }
    out
}

fn status_str(s: PairStatus) -> &'static str {
    match s {
        PairStatus::Certified => "certified",
        PairStatus::Refuted => "refuted",
        PairStatus::Unknown => "unknown",
    }
}

fn pairs_text(ring: &GradedRingModel, v: &DivisibilityVerdict) -> String {
    let rows: Vec<[String; 4]> = v
        .pairs
        .iter()
        .map(|p| {
            [format!("({},{})", p.i, p.j), status_str(p.status).into(), p.method.as_str().into(), witness_text(ring, p)]
        })
        .collect();
    let header = ["pair".to_string(), "status".into(), "method".into(), "witness".into()];
    let mut widths = [0usize; 4];
    for r in std::iter::once(&header).chain(&rows) {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    for r in std::iter::once(&header).chain(&rows) {
        let line = format!("{:<w0$}  {:<w1$}  {:<w2$}  {}", r[0], r[1], r[2], r[3], w0 = widths[0], w1 = widths[1], w2 = widths[2]);
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn div(a: &DivArgs, per_pair: bool, format: Format) -> CliResult<Outcome> {
    let ring = load_ring(&a.source)?;
    let max_degree = a.max_degree.unwrap_or(ring.cutoff() + 1);
    let verdict = gd_bound_checked_to(&ring, max_degree, a.height).map_err(|e| CliError::Usage(e.to_string()))?;
    let summary = verdict.summary();
    let body = match format {
        Format::Json => {
            let mut v = if per_pair {
                json!({ "ranks": ring.ranks(), "verdict": to_value(&verdict) })
            } else {
                json!({ "ranks": ring.ranks(), "max_degree": max_degree, "height": a.height, "summary": to_value(&summary) })
            };
            decorate(&ring, &mut v);
            pretty(&v)
        }
        _ => {
            let mut out = format!("ranks {} (cutoff {})\n", join(ring.ranks()), ring.cutoff());
            if per_pair {
                out.push_str(&pairs_text(&ring, &verdict));
            }
            out.push_str(&summary_text(&ring, &summary));
            out.push('\n');
            out
        }
    };
    Ok(expect(body, a.expect, summary.certified_up_to))
}

fn expect(body: String, expected: Option<usize>, actual: usize) -> Outcome {
    match expected {
        Some(e) if e != actual => Outcome {
            body,
            code: EXIT_EXPECTATION,
            note: Some(format!("expectation failed: certified bound {actual}, expected {e}")),
        },
        _ => Outcome::ok(body),
    }
}

fn axiom_sets(a: Axioms) -> Vec<AxiomSet> {
    match a {
        Axioms::Paper => vec![AxiomSet::Paper],
        Axioms::Checked => vec![AxiomSet::Checked],
        Axioms::Both => vec![AxiomSet::Paper, AxiomSet::Checked],
    }
}

fn certify(a: &CertifyArgs, format: Format) -> CliResult<Outcome> {
    let expr = load_expr(&a.source)?;
    let certs: Vec<StructuralCertificate> = axiom_sets(a.axioms)
        .into_iter()
        .map(|ax| certify_structural(&expr, ax).map_err(|e| CliError::Usage(e.to_string())))
        .collect::<CliResult<_>>()?;
    let differ = certs.windows(2).any(|w| w[0].bound != w[1].bound);
    let body = match format {
        Format::Json => {
            let mut v = json!({ "expr": to_value(&expr) });
            for c in &certs {
                v[c.axioms.as_str()] = to_value(c);
            }
            if certs.len() > 1 {
                v["discrepancy"] = Value::Bool(differ);
            }
            pretty(&v)
        }
        _ => {
            let mut out = String::new();
            for c in &certs {
                let _ = writeln!(out, "{} axioms: bound {}", c.axioms, c.bound);
                out.push_str(&c.render_tree());
            }
            if differ {
                let _ = writeln!(out, "discrepancy: paper {} vs checked {}", certs[0].bound, certs[1].bound);
            }
            out
        }
    };
    Ok(Outcome::ok(body))
}

fn agreement_name(v: &Value) -> &str {
    v.as_str().unwrap_or("-")
}

fn crossval(a: &CrossvalArgs, format: Format) -> CliResult<Outcome> {
    let expr = load_expr(&a.source)?;
    let cv: CrossValidation = cross_validate(&expr, a.height, &a.limits.limits()).map_err(data_err)?;
    let ring = if cv.checker.is_some() { Some(build_family(&expr).map_err(data_err)?) } else { None };
    let mut v = to_value(&cv);
    if let Some(r) = &ring {
        decorate(r, &mut v);
    }
    let body = match format {
        Format::Json => pretty(&v),
        _ => {
            let mut out = format!("{expr}\npaper bound {}\nchecked bound {}\n", cv.paper, cv.checked);
            match (&cv.checker, &ring) {
                (Some(s), Some(r)) => {
                    let _ = writeln!(out, "checker: {}", summary_text(r, s));
                    let _ = writeln!(
                        out,
                        "agreement: paper {}, checked {}",
                        agreement_name(&v["paper_agreement"]),
                        agreement_name(&v["checked_agreement"])
                    );
                }
                _ => {
                    let _ = writeln!(out, "checker skipped: {}", cv.skipped.as_deref().unwrap_or("-"));
                }
            }
            if cv.discrepancy {
                out.push_str("discrepancy flagged\n");
            }
            out
        }
    };
    Ok(Outcome::ok(body))
}

fn table(a: &TableArgs, format: Format) -> CliResult<Outcome> {
    let spaces = match (&a.rows, a.acceptance) {
        (Some(r), _) => parse_rows(r).map_err(|e| CliError::Usage(e.to_string()))?,
        (None, true) => acceptance_rows(),
        (None, false) => default_rows(),
    };
    let rows = compute_table(&spaces, a.height, &a.limits.limits()).map_err(data_err)?;
    Ok(Outcome::ok(match format {
        Format::Tsv => render_tsv(&rows),
        Format::Text => render_text(&rows),
        Format::Json => pretty(&to_value(&rows)),
    }))
}

fn verdict(a: &VerdictArgs, format: Format) -> CliResult<Outcome> {
    let space = parse_space(&a.space)?;
    let axioms = match a.axioms {
        Axioms::Paper => AxiomSet::Paper,
        Axioms::Checked => AxiomSet::Checked,
        Axioms::Both => return Err(CliError::Usage("split verdict takes --axioms paper or checked".into())),
    };
    let v = splitting_verdict(&space, a.rank, axioms).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Outcome::ok(match format {
        Format::Json => pretty(&to_value(&v)),
        _ => {
            let status = match v.status {
                SplitStatus::Splits => "splits",
                SplitStatus::Unknown => "unknown",
            };
            format!("{space} rank {}: {status} (bound {}, {} axioms)\n", v.rank, v.bound, v.axioms)
        }
    }))
}

fn normalize(a: &NormalizeArgs, format: Format) -> CliResult<Outcome> {
    let t = normalize_splitting_type(&a.entries).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Outcome::ok(match format {
        Format::Json => pretty(&to_value(&t)),
        _ => {
            let entries: Vec<String> = t.entries.iter().map(i64::to_string).collect();
            format!("type ({}) twist {} k {}\n", entries.join(","), t.twist, t.k)
        }
    }))
}

fn pair_text(ring: &GradedRingModel, p: &WhitneyPair) -> String {
    let side = |comps: &[vmrt_core::ring::Element], mark: &str| -> Vec<String> {
        comps.iter().enumerate().map(|(i, c)| format!("c{mark}_{} = {}", i + 1, ring.describe(c))).collect()
    };
    let mut parts = side(&p.first, "");
    parts.extend(side(&p.second, "'"));
    parts.join("; ")
}

fn unit_factor(a: &UnitFactorArgs, format: Format) -> CliResult<Outcome> {
    let ring = load_ring(&a.source)?;
    let mut pairs = find_unit_factorizations(&ring, a.k, a.l, a.height).map_err(|e| match e {
        SplitError::Precondition(_) | SplitError::SearchTooLarge { .. } => CliError::Usage(e.to_string()),
        other => data_err(other),
    })?;
    if a.k == a.l {
        pairs = collapse_swaps(pairs);
    }
    Ok(Outcome::ok(match format {
        Format::Json => {
            let mut v = json!({ "k": a.k, "l": a.l, "height": a.height, "count": pairs.len(), "pairs": to_value(&pairs) });
            decorate(&ring, &mut v);
            pretty(&v)
        }
        _ => {
            let mut out = format!("{} nontrivial factorization(s)\n", pairs.len());
            for p in &pairs {
                out.push_str(&pair_text(&ring, p));
                out.push('\n');
            }
            out
        }
    }))
}
