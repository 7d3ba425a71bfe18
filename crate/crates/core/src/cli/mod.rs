//! Command-line driver: construct, verify, bruteforce, bound, survey and
//! selftest, with JSON, CSV or plain-text reports.

pub mod selftest;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{self, eval_bounds, ActionTag, BoundInstance, BoundReport};
use crate::classical::{Family, MatGroupSpec};
use crate::construct::{self, BaseCandidate, OrbitChoice, OrbitKind, PairKind};
use crate::error::{Error, Result};
use crate::gf::{Fe, Field};
use crate::linalg::{Subspace, Vector};
use crate::permgrp::{self, PermGroupSpec, DEFAULT_NODE_BUDGET, INDUCED_DEGREE_CAP};
use crate::verify::{self, BaseCertificate, Status, SymOrAlt, DEFAULT_ENUM_CAP};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "primbase", version, about = "Small explicit bases for primitive group actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Largest induced permutation degree.
    #[arg(long, global = true, default_value_t = INDUCED_DEGREE_CAP)]
    degree_cap: u64,
    /// Node budget of the exact base searches.
    #[arg(long, global = true, default_value_t = DEFAULT_NODE_BUDGET)]
    node_cap: u64,
    /// Node cap of the unit search in subspace verification.
    #[arg(long, global = true, default_value_t = DEFAULT_ENUM_CAP)]
    enum_cap: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Build a base candidate.
    Construct(Inst),
    /// Certify a candidate read from --input.
    Verify(Inst),
    /// Exact minimal base size by search on the induced action.
    Bruteforce(Inst),
    /// Evaluate the applicable inequalities.
    Bound(Inst),
    /// Run a JSON grid of instances.
    Survey(Inst),
    /// Run the embedded acceptance grid.
    Selftest(SelftestArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Construct(_) => "construct",
            Command::Verify(_) => "verify",
            Command::Bruteforce(_) => "bruteforce",
            Command::Bound(_) => "bound",
            Command::Survey(_) => "survey",
            Command::Selftest(_) => "selftest",
        }
    }
}

#[derive(Args, Debug, Clone, Default, Serialize)]
struct Inst {
    /// subsets, partitions, subspaces, vectors or subfield.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    action: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<u64>,
    /// sl, sp, su, o+, o-, oo (or o with --sign); for bound also
    /// sp-affine, subsets, partitions, lemma, ratio.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<String>,
    /// +, - or o, for --family o.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sign: Option<String>,
    /// all, nondeg, totsing or pairs.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    orbit: Option<String>,
    /// Which isometry type for --orbit nondeg, in the listed order.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    variant: Option<usize>,
    /// flag or complement, for --orbit pairs.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pair: Option<String>,
    /// Subfield degree for --action subfield.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<u32>,
    /// sym or alt.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    group: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<PathBuf>,
    /// Worker threads for survey.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    jobs: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SelftestArgs {
    /// Criteria to run (all by default).
    #[arg(long, value_delimiter = ',')]
    only: Vec<u32>,
}

/// A finished command: a JSON body plus flat rows for CSV and text.
struct Report {
    body: Value,
    rows: Vec<BTreeMap<String, String>>,
    exit: i32,
}

/// Failure with its exit status: 1 violation, 2 budget, 3 usage.
#[derive(Debug)]
struct Fail {
    exit: i32,
    msg: String,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        let exit = match e {
            Error::BudgetExceeded { .. } | Error::DegreeCapExceeded(..) | Error::SizeCapExceeded(_) => 2,
            Error::NotPrime(_)
            | Error::NotADivisor(..)
            | Error::InvalidParameters(_)
            | Error::IncompatibleParameters(_)
            | Error::MissingField(_)
            | Error::Parse(_)
            | Error::DimensionMismatch(_)
            | Error::EmptyInput
            | Error::KindMismatch(_)
            | Error::FormulaInapplicable(_) => 3,
            _ => 1,
        };
        Fail { exit, msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Fail {
    Fail { exit: 3, msg: msg.into() }
}

type CliResult<T> = std::result::Result<T, Fail>;

/// Parses `argv` (program name first), runs the command and writes the
/// report. Returns the exit status.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (header, result) = execute(&cli);
    match result {
        Ok(rep) => {
            let text = render(&header, &rep, cli.common.format);
            match &cli.common.out {
                Some(p) => {
                    if let Err(e) = fs::write(p, text) {
                        eprintln!("error: cannot write {}: {e}", p.display());
                        return 3;
                    }
                }
                None => print!("{text}"),
            }
            rep.exit
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            f.exit
        }
    }
}

fn execute(cli: &Cli) -> (Value, CliResult<Report>) {
    let c = &cli.common;
    let (params, result) = match &cli.command {
        Command::Construct(i) => (json!(i), cmd_construct(i, c)),
        Command::Verify(i) => (json!(i), cmd_verify(i, c)),
        Command::Bruteforce(i) => (json!(i), cmd_bruteforce(i, c)),
        Command::Bound(i) => (json!(i), cmd_bound(i, c)),
        Command::Survey(i) => (json!(i), cmd_survey(i, c)),
        Command::Selftest(s) => (json!(s), cmd_selftest(s)),
    };
    let header = json!({
        "tool": "primbase",
        "version": VERSION,
        "config": {
            "command": cli.command.name(),
            "params": params,
            "seed": c.seed,
            "degree_cap": c.degree_cap,
            "node_cap": c.node_cap,
            "enum_cap": c.enum_cap,
            "out": c.out.as_ref().map(|p| p.display().to_string()),
            "format": c.format,
        },
    });
    (header, result)
}

fn render(header: &Value, rep: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut v = json!({ "header": header });
            if let (Value::Object(o), Value::Object(b)) = (&mut v, &rep.body) {
                for (k, x) in b {
                    o.insert(k.clone(), x.clone());
                }
            }
            serde_json::to_string_pretty(&v).unwrap() + "\n"
        }
        Format::Csv => {
            let mut cols: Vec<String> = Vec::new();
            for r in &rep.rows {
                for k in r.keys() {
                    if !cols.contains(k) {
                        cols.push(k.clone());
                    }
                }
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            let _ = w.write_record(&cols);
            for r in &rep.rows {
                let _ = w.write_record(cols.iter().map(|c| r.get(c).map(String::as_str).unwrap_or("")));
            }
            let body = String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default();
            format!("# primbase {VERSION} {}\n{body}", serde_json::to_string(&header["config"]).unwrap())
        }
        Format::Text => {
            let mut s = format!("primbase {VERSION} {}\n", serde_json::to_string(&header["config"]).unwrap());
            for r in &rep.rows {
                let line: Vec<String> = r.iter().map(|(k, v)| format!("{k}={v}")).collect();
                s += &line.join(" ");
                s += "\n";
            }
            s
        }
    }
}

fn row<const N: usize>(kv: [(&str, String); N]) -> BTreeMap<String, String> {
    kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn need<T: Copy>(x: Option<T>, name: &str) -> CliResult<T> {
    x.ok_or_else(|| usage(format!("--{name} is required")))
}

// ---------------------------------------------------------------------------
// construct

fn parse_family(name: &str, sign: Option<&str>) -> CliResult<Family> {
    let n = name.to_ascii_lowercase();
    if n == "o" || n == "omega" {
        return match sign {
            Some("+") | Some("plus") => Ok(Family::OmegaPlus),
            Some("-") | Some("minus") => Ok(Family::OmegaMinus),
            Some("o") | Some("0") | Some("odd") => Ok(Family::OmegaOdd),
            _ => Err(usage("--family o needs --sign +, - or o")),
        };
    }
    Ok(Family::parse(&n)?)
}

fn group_spec(i: &Inst) -> CliResult<MatGroupSpec> {
    let fam = parse_family(i.family.as_deref().ok_or_else(|| usage("--family is required"))?, i.sign.as_deref())?;
    Ok(MatGroupSpec::of_order(fam, need(i.d, "d")?, need(i.q, "q")?)?)
}

fn orbit_choice(spec: &MatGroupSpec, k: usize, kind: OrbitKind, variant: Option<usize>, seed: u64) -> CliResult<OrbitChoice> {
    match kind {
        OrbitKind::All => Ok(OrbitChoice::All),
        OrbitKind::Totsing => Ok(OrbitChoice::Totsing),
        OrbitKind::Nondeg => {
            let types = construct::nondeg_types(spec, k, seed);
            let v = variant.unwrap_or(0);
            types
                .get(v)
                .map(|ty| OrbitChoice::Nondeg { ty: *ty })
                .ok_or_else(|| usage(format!("{} has {} nondegenerate {k}-subspace types, --variant {v} given", spec.name(), types.len())))
        }
        OrbitKind::Pairs => Err(usage("pairs is not a single orbit choice")),
    }
}

fn build_candidate(i: &Inst, c: &Common) -> CliResult<BaseCandidate> {
    let action = i.action.as_deref().unwrap_or(if i.family.is_some() { "subspaces" } else { "subsets" });
    Ok(match action {
        "subsets" => construct::subset_base(need(i.m, "m")?, need(i.k, "k")?)?,
        "partitions" => construct::partition_base(need(i.a, "a")?, need(i.b, "b")?, c.node_cap)?,
        "subspaces" => {
            let spec = group_spec(i)?;
            let k = need(i.k, "k")?;
            let kind = OrbitKind::parse(i.orbit.as_deref().unwrap_or(if spec.form.kind == crate::forms::FormKind::None { "all" } else { "totsing" }))?;
            if kind == OrbitKind::Pairs {
                let pair = match i.pair.as_deref().unwrap_or("flag") {
                    "flag" => PairKind::Flag,
                    "complement" => PairKind::Complement,
                    p => return Err(usage(format!("unknown pair kind {p}"))),
                };
                construct::pairs_base(spec.d, k, &spec.field, pair)?
            } else {
                let orbit = orbit_choice(&spec, k, kind, i.variant, c.seed)?;
                construct::construct_subspace(&spec, k, &orbit, c.seed, c.node_cap)?
            }
        }
        "vectors" => {
            let q = need(i.q, "q")?;
            construct::symplectic_vector_base(need(i.d, "d")?, &Field::of_order(q)?)?
        }
        "subfield" => construct::subfield_base(need(i.d, "d")?, &Field::of_order(need(i.q, "q")?)?, need(i.r, "r")?)?,
        a => return Err(usage(format!("unknown action {a}"))),
    })
}

fn cmd_construct(i: &Inst, c: &Common) -> CliResult<Report> {
    let cand = build_candidate(i, c)?;
    let rows = vec![row([
        ("action", serde_json::to_string(&cand.action).unwrap()),
        ("size", cand.size().to_string()),
        ("claimed_bound", cand.claimed_bound.to_string()),
        ("bound_ref", cand.bound_ref.clone()),
        ("flagged", cand.flagged.to_string()),
        ("seed", cand.seed.to_string()),
    ])];
    Ok(Report { body: json!({ "candidate": cand.to_json(), "bound_refs": [cand.bound_ref] }), rows, exit: 0 })
}

// ---------------------------------------------------------------------------
// verify

fn read_json(path: &Option<PathBuf>) -> CliResult<Value> {
    let p = path.as_ref().ok_or_else(|| usage("--input is required"))?;
    let text = fs::read_to_string(p).map_err(|e| usage(format!("cannot read {}: {e}", p.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", p.display())))
}

fn field_u64(v: &Value, key: &str) -> CliResult<u64> {
    v.get(key).and_then(Value::as_u64).ok_or_else(|| usage(format!("candidate field '{key}' missing")))
}

fn vectors_of(v: &Value) -> CliResult<Vec<Vector>> {
    let rows = v.as_array().ok_or_else(|| usage("expected a list of vectors"))?;
    rows.iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| usage("expected a vector"))?
                .iter()
                .map(|x| x.as_u64().map(|n| Fe(n as u32)).ok_or_else(|| usage("expected a field element code")))
                .collect()
        })
        .collect()
}

fn check_codes(f: &Field, vs: &[Vector], d: usize) -> CliResult<()> {
    if vs.iter().any(|v| v.len() != d || v.iter().any(|x| x.0 >= f.q())) {
        return Err(usage(format!("vectors must have {d} entries below {}", f.q())));
    }
    Ok(())
}

fn subspace_of(f: &Field, d: usize, v: &Value) -> CliResult<Subspace> {
    let vs = vectors_of(v)?;
    check_codes(f, &vs, d)?;
    Ok(Subspace::span(f, d, &vs))
}

/// `"Sp(6,2)"` into a group spec.
fn parse_group_name(s: &str) -> CliResult<MatGroupSpec> {
    let bad = || usage(format!("cannot parse group '{s}'"));
    let (fam, rest) = s.split_once('(').ok_or_else(bad)?;
    let (d, q) = rest.trim_end_matches(')').split_once(',').ok_or_else(bad)?;
    let d: usize = d.trim().parse().map_err(|_| bad())?;
    let q: u64 = q.trim().parse().map_err(|_| bad())?;
    Ok(MatGroupSpec::of_order(Family::parse(fam)?, d, q)?)
}

fn sets_of(v: &Value, m: usize) -> CliResult<Vec<Vec<u32>>> {
    let sets = v.as_array().ok_or_else(|| usage("expected a list of sets"))?;
    sets.iter()
        .map(|s| {
            s.as_array()
                .ok_or_else(|| usage("expected a set"))?
                .iter()
                .map(|x| match x.as_u64() {
                    Some(p) if p >= 1 && p as usize <= m => Ok(p as u32 - 1),
                    _ => Err(usage(format!("points must be 1..{m}"))),
                })
                .collect()
        })
        .collect()
}

fn exit_for(cert: &BaseCertificate) -> i32 {
    match cert.status {
        Status::StrongBase | Status::GroupBase | Status::AltOnlyBase => 0,
        Status::NotABase => 1,
        Status::Inconclusive(_) => 2,
    }
}

fn certify(cand: &Value, i: &Inst, c: &Common) -> CliResult<BaseCertificate> {
    let action = cand.get("action").ok_or_else(|| usage("candidate has no action"))?;
    let elems = cand.get("elements").ok_or_else(|| usage("candidate has no elements"))?;
    let kind = action.get("kind").and_then(Value::as_str).unwrap_or("");
    Ok(match kind {
        "subsets" => {
            let m = field_u64(action, "m")? as usize;
            let group = match i.group.as_deref().unwrap_or("sym") {
                "sym" => SymOrAlt::Sym,
                "alt" => SymOrAlt::Alt,
                g => return Err(usage(format!("unknown group {g}"))),
            };
            verify::verify_subset_base(m, &sets_of(elems, m)?, group)?
        }
        "partitions" => {
            let (a, b) = (field_u64(action, "a")? as usize, field_u64(action, "b")? as usize);
            let mut codes = Vec::new();
            for p in elems.as_array().ok_or_else(|| usage("expected a list of partitions"))? {
                let blocks = sets_of(p, a * b)?;
                if blocks.len() != a || blocks.iter().any(|bl| bl.len() != b) {
                    return Err(usage(format!("partitions must have {a} blocks of size {b}")));
                }
                codes.push(permgrp::partition_from_parts(a * b, &blocks));
            }
            verify::verify_partition_base(a, b, &codes, c.degree_cap)?
        }
        "subspaces" => {
            let spec = parse_group_name(action.get("group").and_then(Value::as_str).unwrap_or(""))?;
            let us: Vec<Subspace> = elems
                .as_array()
                .ok_or_else(|| usage("expected a list of subspaces"))?
                .iter()
                .map(|u| subspace_of(&spec.field, spec.d, u))
                .collect::<CliResult<_>>()?;
            verify::verify_subspace_base(&spec, &us, c.enum_cap)?
        }
        "pairs" => {
            let (d, q) = (field_u64(action, "d")? as usize, field_u64(action, "q")?);
            let spec = MatGroupSpec::of_order(Family::SL, d, q)?;
            let flag = action.get("pair").and_then(Value::as_str) == Some("flag");
            let mut firsts = Vec::new();
            for (n, p) in elems.as_array().ok_or_else(|| usage("expected a list of pairs"))?.iter().enumerate() {
                let u = subspace_of(&spec.field, d, p.get("u").ok_or_else(|| usage("pair without u"))?)?;
                let w = subspace_of(&spec.field, d, p.get("w").ok_or_else(|| usage("pair without w"))?)?;
                let ok = if flag {
                    w.contains_subspace(&u)?
                } else {
                    u.dim() + w.dim() == d && u.intersect(&w)?.dim() == 0
                };
                if !ok {
                    return Err(Fail { exit: 1, msg: format!("pair {} is not a {}", n + 1, if flag { "flag" } else { "complement" }) });
                }
                firsts.push(u);
            }
            verify::verify_subspace_base(&spec, &firsts, c.enum_cap)?
        }
        "vectors" => {
            let spec = parse_group_name(action.get("group").and_then(Value::as_str).unwrap_or(""))?;
            let vs = vectors_of(elems)?;
            check_codes(&spec.field, &vs, spec.d)?;
            verify::verify_vector_base(&spec, &vs, c.enum_cap)?
        }
        "subfield" => {
            let (d, q) = (field_u64(action, "d")? as usize, field_u64(action, "q")?);
            let f = Field::of_order(q)?;
            let vs = vectors_of(elems)?;
            check_codes(&f, &vs, d)?;
            verify::verify_subfield_vectors(&f, field_u64(action, "r")? as u32, &vs)?
        }
        "tensor" => {
            let (n1, n2) = (field_u64(action, "n1")? as usize, field_u64(action, "n2")? as usize);
            let f = Field::of_order(field_u64(action, "q")?)?;
            let vs = vectors_of(elems)?;
            check_codes(&f, &vs, n1 * n2)?;
            verify::verify_tensor_base(&f, n1, n2, &vs, c.enum_cap)?
        }
        k => return Err(usage(format!("unknown action kind '{k}'"))),
    })
}

fn cmd_verify(i: &Inst, c: &Common) -> CliResult<Report> {
    let v = read_json(&i.input)?;
    let cand = v.get("candidate").unwrap_or(&v);
    let cert = certify(cand, i, c)?;
    let size = cand.get("elements").and_then(Value::as_array).map_or(0, |a| a.len());
    let refs: Vec<Value> = cand.get("bound_ref").cloned().into_iter().collect();
    let rows = vec![row([
        ("status", serde_json::to_value(&cert.status).unwrap()["status"].as_str().unwrap_or("").to_string()),
        ("method", serde_json::to_value(cert.method).unwrap().as_str().unwrap_or("").to_string()),
        ("size", size.to_string()),
        ("algebra_dim", cert.algebra_dim.map(|x| x.to_string()).unwrap_or_default()),
    ])];
    let exit = exit_for(&cert);
    Ok(Report {
        body: json!({ "action": cand.get("action"), "size": size, "certificate": cert, "bound_refs": refs }),
        rows,
        exit,
    })
}

// ---------------------------------------------------------------------------
// bruteforce

fn cmd_bruteforce(i: &Inst, c: &Common) -> CliResult<Report> {
    let action = i.action.as_deref().unwrap_or(if i.family.is_some() { "subspaces" } else { "subsets" });
    let cap = c.degree_cap.min(INDUCED_DEGREE_CAP);
    let check_degree = |n: BigUint| -> CliResult<()> {
        if n > BigUint::from(cap) {
            return Err(Error::DegreeCapExceeded(n.try_into().unwrap_or(u64::MAX), cap).into());
        }
        Ok(())
    };
    let (b, witness, degree, order, nodes) = match action {
        "subsets" | "partitions" => {
            let alt = match i.group.as_deref().unwrap_or("sym") {
                "sym" => false,
                "alt" => true,
                g => return Err(usage(format!("unknown group {g}"))),
            };
            let m = if action == "subsets" { need(i.m, "m")? } else { need(i.a, "a")? * need(i.b, "b")? };
            if m < 3 {
                return Err(usage("need at least 3 points"));
            }
            let g = if alt { PermGroupSpec::alternating(m) } else { PermGroupSpec::symmetric(m) };
            let full = bounds::factorial(m as u64) / BigUint::from(if alt { 2u32 } else { 1 });
            if action == "subsets" {
                let k = need(i.k, "k")?;
                if k == 0 || 2 * k > m {
                    return Err(usage("need 1 <= k <= m/2"));
                }
                check_degree(bounds::binomial(m as u64, k as u64))?;
                let ind = permgrp::induce_k_subsets(&g, k)?;
                let mb = permgrp::min_base_bruteforce(&ind.group, Some(&full), c.node_cap)?;
                let w: Vec<Value> = mb.witness.iter().map(|&p| json!(ind.domain[p as usize].iter().map(|x| x + 1).collect::<Vec<_>>())).collect();
                (mb.b, w, ind.group.degree, full, mb.nodes)
            } else {
                let (a, bb) = (need(i.a, "a")?, need(i.b, "b")?);
                check_degree(bounds::partition_count(a as u64, bb as u64))?;
                let ind = permgrp::induce_partitions(&g, a, bb)?;
                let order = if (a, bb) == (2, 2) { full / BigUint::from(4u32) } else { full };
                let mb = permgrp::min_base_bruteforce(&ind.group, Some(&order), c.node_cap)?;
                let w: Vec<Value> = mb
                    .witness
                    .iter()
                    .map(|&p| {
                        json!(permgrp::partition_parts(&ind.domain[p as usize])
                            .into_iter()
                            .map(|bl| bl.into_iter().map(|x| x + 1).collect::<Vec<_>>())
                            .collect::<Vec<_>>())
                    })
                    .collect();
                (mb.b, w, ind.group.degree, order, mb.nodes)
            }
        }
        "subspaces" => {
            let spec = group_spec(i)?;
            let k = need(i.k, "k")?;
            let kind = OrbitKind::parse(i.orbit.as_deref().unwrap_or(if spec.form.kind == crate::forms::FormKind::None { "all" } else { "totsing" }))?;
            let orbit = orbit_choice(&spec, k, kind, i.variant, c.seed)?;
            check_degree(construct::orbit_length(&spec, &orbit, k, c.seed)?)?;
            let ind = construct::orbit_action(&spec, &orbit, k, c.seed, cap)?;
            let chain = permgrp::StabilizerChain::from_spec(&ind.group)?;
            let mb = permgrp::min_base_with_chain(&chain, c.node_cap)?;
            let rows = |u: &Subspace| -> Vec<Vec<u32>> { u.basis().iter().map(|v| v.iter().map(|x| x.0).collect()).collect() };
            let w: Vec<Value> = mb.witness.iter().map(|&p| json!(rows(&ind.domain[p as usize]))).collect();
            (mb.b, w, ind.group.degree, chain.order(), mb.nodes)
        }
        a => return Err(usage(format!("unknown action {a}"))),
    };
    let rows = vec![row([
        ("b", b.to_string()),
        ("degree", degree.to_string()),
        ("order", order.to_string()),
        ("nodes", nodes.to_string()),
    ])];
    Ok(Report {
        body: json!({ "b": b, "witness": witness, "degree": degree, "order": order.to_string(), "nodes": nodes, "bound_refs": [] }),
        rows,
        exit: 0,
    })
}

// ---------------------------------------------------------------------------
// bound

fn report_rows(r: &BoundReport) -> Vec<BTreeMap<String, String>> {
    r.bound_values
        .iter()
        .map(|(name, v)| {
            row([
                ("id", r.id.clone()),
                ("bound", name.clone()),
                ("side", serde_json::to_value(v.side).unwrap().as_str().unwrap_or("").to_string()),
                ("value", v.value.to_string()),
                ("b", r.b_exact.or(r.b_upper).map(|x| x.to_string()).unwrap_or_default()),
                ("holds", v.holds.to_string()),
            ])
        })
        .collect()
}

fn eval_many(insts: &[BoundInstance]) -> CliResult<Report> {
    let reports: Vec<BoundReport> = insts.iter().map(eval_bounds).collect::<Result<_>>()?;
    let exit = if reports.iter().all(BoundReport::ok) { 0 } else { 1 };
    let refs: Vec<&String> = {
        let mut v: Vec<&String> = reports.iter().flat_map(|r| r.bound_values.keys()).collect();
        v.sort();
        v.dedup();
        v
    };
    Ok(Report { rows: reports.iter().flat_map(report_rows).collect(), body: json!({ "reports": reports, "bound_refs": refs }), exit })
}

fn cmd_bound(i: &Inst, c: &Common) -> CliResult<Report> {
    if i.input.is_some() {
        let v = read_json(&i.input)?;
        let insts: Vec<BoundInstance> = if v.is_array() {
            serde_json::from_value(v).map_err(|e| usage(e.to_string()))?
        } else {
            vec![serde_json::from_value(v).map_err(|e| usage(e.to_string()))?]
        };
        return eval_many(&insts);
    }
    let fam = i.family.as_deref().ok_or_else(|| usage("--family or --input is required"))?;
    match fam {
        "sp-affine" => {
            let (d, q) = (need(i.d, "d")? as u64, need(i.q, "q")?);
            let id = bounds::sp_floor_identity(d, q)?;
            let inst = BoundInstance {
                id: format!("{q}^{d}:Sp({d},{q})"),
                family: "sp-affine".into(),
                order: bounds::sp_affine_order(d, q),
                degree: BigUint::from(q).pow(d as u32),
                b_exact: None,
                b_upper: Some(id.b),
                action: ActionTag::Affine { d, q },
                contains_alt: false,
            };
            let mut rep = eval_many(&[inst])?;
            rep.rows.push(row([
                ("id", format!("{q}^{d}:Sp({d},{q})")),
                ("bound", "sp_floor_identity".into()),
                ("side", "exact".into()),
                ("value", id.two_log_ratio.to_string()),
                ("b", id.b.to_string()),
                ("holds", id.holds.to_string()),
            ]));
            if !id.holds {
                rep.exit = 1;
            }
            if let Value::Object(o) = &mut rep.body {
                o.insert("sp_identity".into(), json!(id));
                if let Some(Value::Array(r)) = o.get_mut("bound_refs") {
                    r.push(json!("sp_floor_identity"));
                }
            }
            Ok(rep)
        }
        "subsets" => {
            let (m, k) = (need(i.m, "m")?, need(i.k, "k")?);
            let cand = construct::subset_base(m, k)?;
            let (m, k) = (m as u64, k as u64);
            eval_many(&[BoundInstance {
                id: format!("Sym({m}) on {k}-subsets"),
                family: "Sym".into(),
                order: bounds::factorial(m),
                degree: bounds::binomial(m, k),
                b_exact: None,
                b_upper: Some(cand.size() as u64),
                action: ActionTag::Subsets { m, k },
                contains_alt: false,
            }])
        }
        "partitions" => {
            let (a, b) = (need(i.a, "a")?, need(i.b, "b")?);
            let cand = construct::partition_base(a, b, c.node_cap)?;
            eval_many(&[BoundInstance {
                id: format!("Sym({}) on partitions ({a},{b})", a * b),
                family: "Sym".into(),
                order: verify::partition_action_order(a, b),
                degree: bounds::partition_count(a as u64, b as u64),
                b_exact: None,
                b_upper: Some(cand.size() as u64),
                action: ActionTag::Partitions { a: a as u64, b: b as u64 },
                contains_alt: false,
            }])
        }
        "lemma" => {
            let (m, k) = (need(i.m, "m")? as u64, need(i.k, "k")? as u64);
            let l = bounds::ratio_lemma_interval(m, k)?;
            let rows = vec![row([
                ("m", m.to_string()),
                ("k", k.to_string()),
                ("lower", l.lower.to_string()),
                ("actual", l.actual.to_string()),
                ("upper", l.upper.to_string()),
                ("holds", l.holds.to_string()),
            ])];
            let exit = if l.holds { 0 } else { 1 };
            Ok(Report { body: json!({ "lemma": l, "bound_refs": ["ratio_lemma_interval"] }), rows, exit })
        }
        "ratio" => {
            let (m, k) = (need(i.m, "m")? as u64, need(i.k, "k")? as u64);
            let pts = bounds::ratio_asymptotic(k, &[m])?;
            let rows = pts
                .iter()
                .map(|p| {
                    row([
                        ("m", p.m.to_string()),
                        ("b", p.b.to_string()),
                        ("ratio", p.ratio.to_string()),
                        ("target", p.target.to_string()),
                        ("deviation", p.deviation.to_string()),
                    ])
                })
                .collect();
            Ok(Report { body: json!({ "ratio": pts, "bound_refs": ["subset_ratio_limit"] }), rows, exit: 0 })
        }
        f => Err(usage(format!("unknown bound family {f}"))),
    }
}

// ---------------------------------------------------------------------------
// survey

fn instance_argv(inst: &Value, c: &Common) -> CliResult<Vec<String>> {
    let o = inst.as_object().ok_or_else(|| usage("grid entries must be objects"))?;
    let cmd = o.get("command").and_then(Value::as_str).unwrap_or("construct");
    if !["construct", "verify", "bruteforce", "bound"].contains(&cmd) {
        return Err(usage(format!("survey cannot run '{cmd}'")));
    }
    let mut argv = vec!["primbase".to_string(), cmd.to_string()];
    let mut has = std::collections::HashSet::new();
    for (k, v) in o {
        if k == "command" {
            continue;
        }
        has.insert(k.replace('_', "-"));
        argv.push(format!("--{}", k.replace('_', "-")));
        argv.push(match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        });
    }
    for (k, v) in [
        ("seed", c.seed.to_string()),
        ("degree-cap", c.degree_cap.to_string()),
        ("node-cap", c.node_cap.to_string()),
        ("enum-cap", c.enum_cap.to_string()),
    ] {
        if !has.contains(k) {
            argv.push(format!("--{k}"));
            argv.push(v);
        }
    }
    Ok(argv)
}

fn run_instance(inst: &Value, c: &Common) -> Value {
    let argv = match instance_argv(inst, c) {
        Ok(a) => a,
        Err(f) => return json!({ "instance": inst, "exit": f.exit, "error": f.msg }),
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => return json!({ "instance": inst, "exit": 3, "error": e.to_string().lines().next().unwrap_or("").to_string() }),
    };
    if matches!(cli.command, Command::Survey(_) | Command::Selftest(_)) {
        return json!({ "instance": inst, "exit": 3, "error": "nested survey" });
    }
    let (header, res) = execute(&cli);
    match res {
        Ok(r) => json!({ "instance": inst, "exit": r.exit, "config": header["config"], "report": r.body }),
        Err(f) => json!({ "instance": inst, "exit": f.exit, "config": header["config"], "error": f.msg }),
    }
}

fn cmd_survey(i: &Inst, c: &Common) -> CliResult<Report> {
    let grid = read_json(&i.input)?;
    let list = grid.as_array().ok_or_else(|| usage("grid file must be a JSON list"))?;
    let jobs = i.jobs.unwrap_or(1).max(1);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| usage(e.to_string()))?;
    let results: Vec<Value> = pool.install(|| list.par_iter().map(|inst| run_instance(inst, c)).collect());
    let worst = results.iter().map(|r| r["exit"].as_i64().unwrap_or(3) as i32).fold(0, |acc, e| match (acc, e) {
        (1, _) | (_, 1) => 1,
        (a, b) => a.max(b),
    });
    let rows = results
        .iter()
        .enumerate()
        .map(|(n, r)| {
            row([
                ("index", n.to_string()),
                ("instance", r["instance"].to_string()),
                ("exit", r["exit"].to_string()),
                ("size", r["report"]["candidate"]["size"].as_u64().or(r["report"]["b"].as_u64()).map(|x| x.to_string()).unwrap_or_default()),
                ("error", r["error"].as_str().unwrap_or("").to_string()),
            ])
        })
        .collect();
    let mut refs: Vec<Value> = results.iter().flat_map(|r| r["report"]["bound_refs"].as_array().cloned().unwrap_or_default()).collect();
    refs.sort_by_key(|v| v.to_string());
    refs.dedup();
    Ok(Report { body: json!({ "results": results, "bound_refs": refs }), rows, exit: worst })
}

// ---------------------------------------------------------------------------
// selftest

fn cmd_selftest(s: &SelftestArgs) -> CliResult<Report> {
    let outs = selftest::run_with(&s.only, |o| eprintln!("{}", o.line()));
    let rows = outs
        .iter()
        .map(|o| {
            row([
                ("criterion", o.id.to_string()),
                ("result", if o.pass { "PASS" } else { "FAIL" }.into()),
                ("title", o.title.clone()),
                ("checks", o.checked.to_string()),
                ("failures", o.failures.len().to_string()),
                ("excluded", o.excluded.len().to_string()),
            ])
        })
        .collect();
    let exit = if outs.iter().all(|o| o.pass) { 0 } else { 1 };
    Ok(Report { body: json!({ "criteria": outs, "bound_refs": [] }), rows, exit })
}
