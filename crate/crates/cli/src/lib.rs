//! Command-line front end: argument parsing, dispatch and report emission.
//!
//! Every report is a JSON object carrying `schema`, `version` and `command`;
//! on failure it carries an `error` object with a stable `kind`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use intcoh::coeffmod::{hom_complex, PolynomialModule};
use intcoh::congruence::CongruenceSubgroup;
use intcoh::cuspidal::cuspidal_cohomology;
use intcoh::cwdvf::{critical_complex, maximal_dvf, RegularCWComplex};
use intcoh::chaincx::FreeChainComplexZ;
use intcoh::hecke::{HeckeContext, HeckeMatrix};
use intcoh::quadring::{gamma0_index, l_ratio, torsion_ratio, volume_ratio, LogBase, QuadIdeal, QuadInt};
use intcoh::resolutions::{restrict_resolution, sl2z_resolution};
use intcoh::{AbelianInvariants, Error, Int};

pub const SCHEMA: &str = "intcoh-report/1";
pub const THREADS_ENV: &str = "INTCOH_THREADS";

#[derive(Parser, Debug)]
#[command(name = "intcoh", version, about = "Integral cohomology and Hecke operators for congruence subgroups of SL2(Z)")]
pub struct Cli {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Plain,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Index of the subgroup in SL2(Z), with cusp count
    Index(GroupArgs),
    /// Generators read off from the action on the cubic tree
    Generators(GroupArgs),
    /// H_n(Γ, Z) from the restricted resolution
    Homology(HomologyArgs),
    /// H^n(Γ, P(k))
    Cohomology(CohomologyArgs),
    /// Hecke operators T_m = [Γ diag(m,1) Γ] on H^n(Γ, P(k))
    Hecke(HeckeArgs),
    /// Kernel of restriction to the Borel–Serre boundary
    Cuspidal(CohomologyArgs),
    /// Maximal discrete vector field on a regular CW-complex
    Dvf(DvfArgs),
    /// Arithmetic in a quadratic ring of integers
    Quad(QuadArgs),
    /// Reduce a free chain complex by elementary collapses
    Contract(ContractArgs),
}

#[derive(Args, Debug, Clone)]
#[group(id = "group", required = true, multiple = false)]
pub struct GroupSpec {
    #[arg(long, group = "group", value_name = "N")]
    pub gamma0: Option<i64>,
    #[arg(long, group = "group", value_name = "N")]
    pub gamma1: Option<i64>,
    /// Principal congruence subgroup Γ(N)
    #[arg(long, group = "group", value_name = "N")]
    pub gamma: Option<i64>,
    #[arg(long, group = "group")]
    pub sl2z: bool,
}

impl GroupSpec {
    pub fn build(&self) -> Result<CongruenceSubgroup, Error> {
        match (self.gamma0, self.gamma1, self.gamma) {
            (Some(n), _, _) => CongruenceSubgroup::gamma0(n),
            (_, Some(n), _) => CongruenceSubgroup::gamma1(n),
            (_, _, Some(n)) => CongruenceSubgroup::principal(n),
            _ => Ok(CongruenceSubgroup::full()),
        }
    }
}

#[derive(Args, Debug)]
pub struct GroupArgs {
    #[command(flatten)]
    pub group: GroupSpec,
}

#[derive(Args, Debug)]
pub struct HomologyArgs {
    #[command(flatten)]
    pub group: GroupSpec,
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    /// Resolution length; defaults to degree + 1
    #[arg(long)]
    pub depth: Option<usize>,
    /// Skip the collapse of the tensored complex
    #[arg(long)]
    pub no_contract: bool,
}

#[derive(Args, Debug, Clone)]
#[group(id = "coeffs", multiple = false)]
pub struct ModuleSpec {
    /// Weight k+2 of P(k), homogeneous polynomials of degree k in x, y
    #[arg(long, group = "coeffs")]
    pub weight: Option<usize>,
    /// Degree k of P(k) directly
    #[arg(long, group = "coeffs")]
    pub module_degree: Option<usize>,
}

impl ModuleSpec {
    pub fn build(&self) -> Result<PolynomialModule, Error> {
        match (self.weight, self.module_degree) {
            (Some(w), _) if w < 2 => Err(Error::Invalid(format!("weight {w} is below 2"))),
            (Some(w), _) => Ok(PolynomialModule::new(w - 2)),
            (_, Some(k)) => Ok(PolynomialModule::new(k)),
            _ => Ok(PolynomialModule::trivial()),
        }
    }
}

#[derive(Args, Debug)]
pub struct CohomologyArgs {
    #[command(flatten)]
    pub group: GroupSpec,
    #[command(flatten)]
    pub module: ModuleSpec,
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    /// Resolution length; defaults to degree + 1
    #[arg(long)]
    pub depth: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Eigenvalues,
    Matrix,
    Charpoly,
}

#[derive(Args, Debug)]
pub struct HeckeArgs {
    #[command(flatten)]
    pub group: GroupSpec,
    #[command(flatten)]
    pub module: ModuleSpec,
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    #[arg(long)]
    pub depth: Option<usize>,
    /// Comma-separated indices m of T_m
    #[arg(long, value_delimiter = ',', required = true)]
    pub ops: Vec<u64>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "eigenvalues")]
    pub emit: Vec<Emit>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    BingsHouse,
    Circle,
    Interval,
}

#[derive(Args, Debug)]
#[group(id = "source", required = true, multiple = false)]
pub struct DvfArgs {
    /// CW-complex in the `cells ...` text format
    #[arg(long, group = "source")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, group = "source")]
    pub fixture: Option<Fixture>,
    /// List the arrows of the field
    #[arg(long)]
    pub arrows: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Report {
    Norm,
    Prime,
    Index,
    LRatio,
    TorsionRatio,
    VolumeRatio,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Base {
    #[value(name = "10")]
    Ten,
    #[value(name = "e")]
    E,
}

#[derive(Args, Debug)]
pub struct QuadArgs {
    /// Squarefree d of Q(√d)
    #[arg(long, allow_hyphen_values = true)]
    pub d: i64,
    /// Comma-separated generators, e.g. "41+56i" or "2,1+w"
    #[arg(long, allow_hyphen_values = true)]
    pub ideal: String,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "norm,prime,index")]
    pub report: Vec<Report>,
    /// Comma-separated torsion orders of H_1 for the ratio reports
    #[arg(long, value_delimiter = ',')]
    pub torsion: Vec<String>,
    #[arg(long, value_enum, default_value = "10")]
    pub log_base: Base,
}

#[derive(Args, Debug)]
pub struct ContractArgs {
    /// Chain complex in the ranks-then-matrices text format
    #[arg(long)]
    pub input: PathBuf,
    /// Include the reduced complex in the report
    #[arg(long)]
    pub emit_complex: bool,
}

/// Failure of a run: bad configuration or a computation error.
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Compute(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> RunError {
        RunError::Compute(e)
    }
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Compute(e) => e.kind(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Compute(_) => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => f.write_str(m),
            RunError::Compute(e) => write!(f, "{e}"),
        }
    }
}

type Out = Result<Value, RunError>;

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Index(_) => "index",
            Command::Generators(_) => "generators",
            Command::Homology(_) => "homology",
            Command::Cohomology(_) => "cohomology",
            Command::Hecke(_) => "hecke",
            Command::Cuspidal(_) => "cuspidal",
            Command::Dvf(_) => "dvf",
            Command::Quad(_) => "quad",
            Command::Contract(_) => "contract",
        }
    }
}

/// Runs one command and returns the exit status with the full report.
pub fn run(cli: &Cli) -> (i32, Value) {
    let result = configure_threads().and_then(|_| dispatch(&cli.command));
    let mut report = json!({
        "schema": SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
    });
    match result {
        Ok(v) => {
            report["result"] = v;
            (0, report)
        }
        Err(e) => {
            report["error"] = json!({ "kind": e.kind(), "message": e.to_string() });
            (e.exit_code(), report)
        }
    }
}

fn configure_threads() -> Result<(), RunError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| RunError::Config(format!("{THREADS_ENV}={v} is not a count")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn dispatch(cmd: &Command) -> Out {
    match cmd {
        Command::Index(a) => index(a),
        Command::Generators(a) => generators(a),
        Command::Homology(a) => homology(a),
        Command::Cohomology(a) => cohomology(a),
        Command::Hecke(a) => hecke(a),
        Command::Cuspidal(a) => cuspidal(a),
        Command::Dvf(a) => dvf(a),
        Command::Quad(a) => quad(a),
        Command::Contract(a) => contract(a),
    }
}

fn invariants(a: &AbelianInvariants) -> Value {
    json!({ "free_rank": a.free_rank, "torsion": a.torsion, "text": a.to_string() })
}

fn depth(degree: usize, depth: Option<usize>) -> Result<usize, RunError> {
    match depth {
        None => Ok(degree + 1),
        Some(d) if d > degree => Ok(d),
        Some(d) => Err(RunError::Config(format!("depth {d} must exceed the degree {degree}"))),
    }
}

fn index(a: &GroupArgs) -> Out {
    let g = a.group.build()?;
    let tr = g.preferred_transversal();
    Ok(json!({
        "group": g.to_string(),
        "index": tr.len(),
        "index_formula": g.index_formula(),
        "cusps": g.cusp_count(),
    }))
}

fn generators(a: &GroupArgs) -> Out {
    let g = a.group.build()?;
    let gens = g.generators();
    Ok(json!({ "group": g.to_string(), "count": gens.len(), "generators": gens }))
}

fn homology(a: &HomologyArgs) -> Out {
    let g = a.group.build()?;
    let r = Arc::new(sl2z_resolution(depth(a.degree, a.depth)?)?);
    let rg = restrict_resolution(r, Arc::new(g.preferred_transversal()));
    let c = rg.tensor_with_z();
    let ranks = c.ranks().to_vec();
    let reduced = if a.no_contract { c } else { c.contract() };
    let h = reduced.homology(a.degree)?;
    Ok(json!({
        "group": g.to_string(),
        "degree": a.degree,
        "ranks": ranks,
        "reduced_ranks": reduced.ranks(),
        "homology": invariants(&h),
    }))
}

fn cohomology(a: &CohomologyArgs) -> Out {
    let g = a.group.build()?;
    let m = a.module.build()?;
    let r = Arc::new(sl2z_resolution(depth(a.degree, a.depth)?)?);
    let rg = restrict_resolution(r, Arc::new(g.preferred_transversal()));
    let c = hom_complex(&rg, &m);
    let h = c.cohomology(a.degree)?;
    Ok(json!({
        "group": g.to_string(),
        "degree": a.degree,
        "module_degree": m.degree(),
        "ranks": c.ranks(),
        "cohomology": invariants(&h),
    }))
}

fn hecke(a: &HeckeArgs) -> Out {
    if a.ops.contains(&0) {
        return Err(RunError::Config("Hecke indices must be positive".into()));
    }
    let g = a.group.build()?;
    let m = a.module.build()?;
    let r = Arc::new(sl2z_resolution(depth(a.degree, a.depth)?)?);
    let ctx = HeckeContext::with_resolution(&g, a.degree, m.clone(), r)?;
    let mats: Vec<(u64, HeckeMatrix)> =
        a.ops.par_iter().map(|&n| ctx.t(n).map(|t| (n, t))).collect::<Result<_, _>>()?;
    let ops: Vec<Value> = mats
        .iter()
        .map(|(n, t)| {
            let mut o = json!({ "n": n, "g": t.g });
            for e in &a.emit {
                match e {
                    Emit::Eigenvalues => {
                        let s = t.spectrum();
                        o["eigenvalues"] = json!(s.eigenvalues());
                        o["splits"] = json!(s.splits());
                        o["residual"] = json!(s.residual);
                    }
                    Emit::Matrix => {
                        o["matrix"] = json!(t.free);
                        o["torsion_orders"] = json!(t.torsion_orders);
                        o["torsion_matrix"] = json!(t.torsion);
                    }
                    Emit::Charpoly => o["charpoly"] = json!(t.charpoly()),
                }
            }
            o
        })
        .collect();
    Ok(json!({
        "group": g.to_string(),
        "degree": a.degree,
        "module_degree": m.degree(),
        "cohomology": invariants(&ctx.cohomology()),
        "operators": ops,
    }))
}

fn cuspidal(a: &CohomologyArgs) -> Out {
    if a.depth.is_some() {
        return Err(RunError::Config("cuspidal uses its own resolution; --depth is not accepted".into()));
    }
    let g = a.group.build()?;
    let m = a.module.build()?;
    let res = cuspidal_cohomology(&g, a.degree, m.clone())?;
    Ok(json!({
        "group": g.to_string(),
        "degree": a.degree,
        "module_degree": m.degree(),
        "ambient": invariants(&res.ambient),
        "boundary": invariants(&res.boundary),
        "cuspidal": invariants(&res.kernel),
        "restriction": res.restriction,
    }))
}

fn dvf(a: &DvfArgs) -> Out {
    let x = match (&a.input, a.fixture) {
        (Some(p), _) => RegularCWComplex::parse(&read(p)?)?,
        (_, Some(Fixture::BingsHouse)) => RegularCWComplex::bings_house(),
        (_, Some(Fixture::Circle)) => RegularCWComplex::circle(4),
        _ => RegularCWComplex::interval(),
    };
    let v = maximal_dvf(&x);
    let crit = critical_complex(&x, &v)?;
    let mut out = json!({
        "cells": x.counts(),
        "arrows": v.arrows().len(),
        "critical": v.critical_cells(&x).iter().map(Vec::len).collect::<Vec<_>>(),
        "critical_total": v.critical_count(&x),
        "homology": x.chain_complex().homology_all()?.iter().map(invariants).collect::<Vec<_>>(),
        "critical_homology": crit.homology_all()?.iter().map(invariants).collect::<Vec<_>>(),
    });
    if a.arrows {
        out["arrow_list"] = v.arrows().iter().map(|r| json!([r.dim, r.source, r.target])).collect();
    }
    Ok(out)
}

fn quad(a: &QuadArgs) -> Out {
    let gens = a
        .ideal
        .split(',')
        .map(|s| QuadInt::parse(s, a.d))
        .collect::<Result<Vec<_>, _>>()?;
    let ideal = QuadIdeal::from_generators(&gens)?;
    let orders = || -> Result<Vec<Int>, RunError> {
        if a.torsion.is_empty() {
            return Err(RunError::Config("ratio reports need --torsion".into()));
        }
        a.torsion
            .iter()
            .map(|s| s.trim().parse::<Int>().map_err(|_| RunError::Config(format!("bad torsion order {s:?}"))))
            .collect()
    };
    let mut out = BTreeMap::new();
    out.insert("d", json!(a.d));
    out.insert("ideal", json!(ideal.to_string()));
    for r in &a.report {
        let (k, v) = match r {
            Report::Norm => ("norm", json!(ideal.norm())),
            Report::Prime => ("prime", json!(ideal.is_prime())),
            Report::Index => ("index", json!(gamma0_index(&ideal)?)),
            Report::LRatio => ("l_ratio", json!(l_ratio(a.d)?)),
            Report::TorsionRatio => {
                let base = if a.log_base == Base::Ten { LogBase::Ten } else { LogBase::Natural };
                ("torsion_ratio", json!(torsion_ratio(&orders()?, &ideal.norm(), base)?))
            }
            Report::VolumeRatio => ("volume_ratio", json!(volume_ratio(&orders()?, &ideal)?)),
        };
        out.insert(k, v);
    }
    Ok(json!(out))
}

fn contract(a: &ContractArgs) -> Out {
    let c = FreeChainComplexZ::parse(&read(&a.input)?)?;
    let r = c.contract();
    let mut out = json!({
        "ranks": c.ranks(),
        "reduced_ranks": r.ranks(),
        "homology": r.homology_all()?.iter().map(invariants).collect::<Vec<_>>(),
    });
    if a.emit_complex {
        out["complex"] = json!(r.to_text());
    }
    Ok(out)
}

fn read(p: &PathBuf) -> Result<String, RunError> {
    std::fs::read_to_string(p).map_err(|e| RunError::Config(format!("{}: {e}", p.display())))
}

/// Plain rendering: one `key: value` line per scalar field, nested objects
/// flattened with dotted keys.
pub fn render_plain(report: &Value) -> String {
    let mut lines = Vec::new();
    flatten("", report, &mut lines);
    lines.join("\n")
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(xs) if xs.iter().any(|x| x.is_object()) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) if s.contains('\n') => out.push(format!("{prefix}:\n{s}")),
        Value::String(s) => out.push(format!("{prefix}: {s}")),
        _ => out.push(format!("{prefix}: {v}")),
    }
}
