//! Command-line front end: subcommands over site files, human or JSON output.
//!
//! Exit codes: 0 success, 1 property refuted (with a witness), 2 inconclusive
//! or out of budget, 3 input error.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::chase::{
    family_jointly_covers, separate_subobjects, BranchStatus, Chase, ChaseBranch, CoverVerdict, SeparationOutcome,
    Strategy,
};
use crate::eventual::{build_ctilde, delta, delta_iso_check, eta_component_check, EventualError};
use crate::fincat::{enumerate_nat, FinCategory, MorId, NatTrans, ObjId, SetFunctor};
use crate::format::{parse_file, SiteFile};
use crate::lattice::{birkhoff_embed, model_embed, verify_embedding, Embedding, LatticeError};
use crate::models::{enumerate_models, eta_check, iso_classes, Model, ModelBound};
use crate::presheaf::{factor_through_cover, is_sheaf, verify_factorization, AyTable};
use crate::site::{generate_sieve_topology, is_pullback_stable, tree_saturation, Family, SiteSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

/// Largest materialized category of lex functors `delta-check` will build.
const MAX_CTILDE_OBJECTS: usize = 512;

#[derive(Debug, Parser)]
#[command(name = "finsite", version, about = "Finite sites, sheaves and their models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Bound on model carriers.
    #[arg(long, global = true, default_value_t = 1)]
    pub bound: usize,
    /// Chase step budget per branch.
    #[arg(long, global = true, default_value_t = 64)]
    pub budget: usize,
    /// Maximum branching explored per cotree node.
    #[arg(long, global = true)]
    pub width: Option<usize>,
    /// `first-leg` or `choices=i,j,...`.
    #[arg(long, global = true, default_value = "first-leg", value_parser = parse_strategy)]
    pub strategy: Strategy,
    /// Emit one JSON document instead of a summary.
    #[arg(long, global = true)]
    pub json: bool,
    /// Accepted for compatibility; every operation is deterministic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Record wall-clock timings in the JSON output.
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a site file and summarize it.
    Check { file: PathBuf },
    /// Close the covers under pullback and pasting; list covering sieves.
    Saturate { file: PathBuf },
    /// Enumerate models with carriers at most --bound.
    Models {
        file: PathBuf,
        /// Also group the models into isomorphism classes.
        #[arg(long)]
        iso_classes: bool,
    },
    /// Run one chase branch, explore the cotree, or decide a cover.
    Chase {
        file: PathBuf,
        #[arg(long)]
        object: Option<String>,
        /// Comma-separated arrows with a common codomain.
        #[arg(long)]
        family: Option<String>,
        /// Explore the whole cotree instead of one branch.
        #[arg(long)]
        cotree: bool,
    },
    /// Find a model separating two subobjects of an object.
    Separate {
        file: PathBuf,
        #[arg(long)]
        object: String,
        /// Arrow name, or an object with a unique arrow into --object.
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
    },
    /// Sheafify the representables.
    Sheafify {
        file: PathBuf,
        #[arg(long)]
        object: Option<String>,
    },
    /// Factor every map ay(x) => ay(y) through a cover of x.
    Factor {
        file: PathBuf,
        #[arg(long)]
        object: String,
        #[arg(long)]
        into: String,
    },
    /// Embed a distributive lattice into a powerset.
    LatticeEmbed { file: PathBuf },
    /// Lex functors as limits of representables.
    DeltaCheck { file: PathBuf },
    /// Unit and co-Yoneda checks for the models.
    EtaCheck { file: PathBuf },
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    if s == "first-leg" {
        return Ok(Strategy::FirstLeg);
    }
    let list = s.strip_prefix("choices=").ok_or("expected first-leg or choices=i,j,...")?;
    if list.is_empty() {
        return Ok(Strategy::Choices(Vec::new()));
    }
    list.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("bad choice `{t}`: {e}")))
        .collect::<Result<_, _>>()
        .map(Strategy::Choices)
}

/// What a run printed and how it ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Report {
    code: i32,
    result: Value,
    witnesses: Vec<Value>,
    summary: Vec<String>,
}

impl Report {
    fn new(code: i32, result: Value) -> Self {
        Report { code, result, witnesses: Vec::new(), summary: Vec::new() }
    }

    fn line(mut self, s: impl Into<String>) -> Self {
        self.summary.push(s.into());
        self
    }
}

struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let (name, file) = command_file(&cli.command);
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => return input_error(&format!("{}: {e}", file.display())),
    };
    let parsed = match parse_file(&text) {
        Ok(p) => p,
        Err(e) => return input_error(&e.to_string()),
    };
    let start = Instant::now();
    let report = match dispatch(&cli, &parsed) {
        Ok(r) => r,
        Err(InputError(msg)) => return input_error(&msg),
    };
    let elapsed = start.elapsed();
    let stdout = if cli.common.json {
        let mut timings = Map::new();
        if cli.common.timings {
            timings.insert("total_ms".into(), json!(elapsed.as_secs_f64() * 1e3));
        }
        let doc = json!({
            "command": name,
            "input_digest": hex::encode(Sha256::digest(text.as_bytes())),
            "result": report.result,
            "witnesses": report.witnesses,
            "timings": timings,
        });
        serde_json::to_string_pretty(&doc).expect("JSON values serialize") + "\n"
    } else {
        let mut s = report.summary.join("\n");
        s.push('\n');
        if cli.common.timings {
            s.push_str(&format!("time: {:.3} ms\n", elapsed.as_secs_f64() * 1e3));
        }
        s
    };
    Outcome { code: report.code, stdout, stderr: String::new() }
}

fn input_error(msg: &str) -> Outcome {
    Outcome { code: EXIT_INPUT, stdout: String::new(), stderr: format!("error: {msg}\n") }
}

fn command_file(c: &Command) -> (&'static str, &PathBuf) {
    match c {
        Command::Check { file } => ("check", file),
        Command::Saturate { file } => ("saturate", file),
        Command::Models { file, .. } => ("models", file),
        Command::Chase { file, .. } => ("chase", file),
        Command::Separate { file, .. } => ("separate", file),
        Command::Sheafify { file, .. } => ("sheafify", file),
        Command::Factor { file, .. } => ("factor", file),
        Command::LatticeEmbed { file } => ("lattice-embed", file),
        Command::DeltaCheck { file } => ("delta-check", file),
        Command::EtaCheck { file } => ("eta-check", file),
    }
}

fn dispatch(cli: &Cli, file: &SiteFile) -> Result<Report, InputError> {
    let site = &file.site;
    let c = &cli.common;
    match &cli.command {
        Command::Check { .. } => check(file),
        Command::Saturate { .. } => saturate(site),
        Command::Models { iso_classes, .. } => models(site, c.bound, *iso_classes),
        Command::Chase { object, family: Some(fam), .. } => {
            if object.is_some() {
                return Err(InputError("--object and --family are exclusive".into()));
            }
            chase_cover(site, fam, c.budget)
        }
        Command::Chase { object: Some(obj), cotree: true, .. } => chase_cotree(site, obj, c),
        Command::Chase { object: Some(obj), .. } => chase_branch(site, obj, c),
        Command::Chase { .. } => Err(InputError("chase needs --object or --family".into())),
        Command::Separate { object, u, v, .. } => separate(site, object, u, v, c.budget),
        Command::Sheafify { object, .. } => sheafify(site, object.as_deref()),
        Command::Factor { object, into, .. } => factor(site, object, into),
        Command::LatticeEmbed { .. } => lattice_embed(file, c.budget),
        Command::DeltaCheck { .. } => delta_check(site, c.bound),
        Command::EtaCheck { .. } => eta(site, c.bound),
    }
}

fn object(cat: &FinCategory, name: &str) -> Result<ObjId, InputError> {
    cat.object_by_name(name).ok_or_else(|| InputError(format!("unknown object `{name}`")))
}

fn arrow(cat: &FinCategory, name: &str) -> Result<MorId, InputError> {
    cat.morphism_by_name(name).ok_or_else(|| InputError(format!("unknown arrow `{name}`")))
}

fn bound(b: usize) -> Result<ModelBound, InputError> {
    Ok(ModelBound::new(b)?)
}

fn names(cat: &FinCategory, arrows: &[MorId]) -> Vec<String> {
    arrows.iter().map(|&f| cat.morphism_name(f).to_string()).collect()
}

fn family_json(cat: &FinCategory, fam: &Family) -> Value {
    json!({ "codomain": cat.object_name(fam.codomain), "legs": names(cat, &fam.legs) })
}

/// `{carriers: {obj: n}, actions: {mor: [images]}}`
pub fn functor_json(cat: &FinCategory, m: &SetFunctor) -> Value {
    let carriers: Map<String, Value> =
        cat.objects().map(|x| (cat.object_name(x).to_string(), json!(m.carriers[x]))).collect();
    let actions: Map<String, Value> =
        cat.morphism_ids().map(|f| (cat.morphism_name(f).to_string(), json!(m.actions[f]))).collect();
    json!({ "carriers": carriers, "actions": actions })
}

fn nat_json(cat: &FinCategory, alpha: &NatTrans) -> Value {
    let comps: Map<String, Value> =
        cat.objects().map(|x| (cat.object_name(x).to_string(), json!(alpha.components[x]))).collect();
    Value::Object(comps)
}

fn carriers_line(cat: &FinCategory, m: &SetFunctor) -> String {
    cat.objects().map(|x| format!("{}={}", cat.object_name(x), m.carriers[x])).collect::<Vec<_>>().join(" ")
}

fn check(file: &SiteFile) -> Result<Report, InputError> {
    let site = &file.site;
    let cat = &site.base;
    let topology = generate_sieve_topology(site);
    let violations = topology.axiom_violations(cat);
    let stable = is_pullback_stable(site)?;
    let terminal = cat.terminal().map(|t| cat.object_name(t).to_string());
    let mut result = json!({
        "objects": cat.num_objects(),
        "morphisms": cat.num_morphisms(),
        "terminal": terminal,
        "covers": site.covers.len(),
        "pullback_stable": stable,
        "topology_violations": violations,
    });
    let mut report_lines = vec![
        format!("category: {} objects, {} morphisms", cat.num_objects(), cat.num_morphisms()),
        format!("terminal: {}", terminal.as_deref().unwrap_or("none")),
        format!("covers: {} (pullback-stable: {stable})", site.covers.len()),
    ];
    if let Some(l) = &file.lattice {
        let d = l.is_distributive();
        result["distributive"] = json!(d);
        report_lines.push(format!("lattice: {} elements, distributive: {d}", l.len()));
    }
    let code = if violations.is_empty() { EXIT_OK } else { EXIT_REFUTED };
    report_lines.push(format!("topology axioms: {}", if violations.is_empty() { "ok" } else { "violated" }));
    let mut r = Report::new(code, result);
    r.summary = report_lines;
    r.witnesses = violations.into_iter().map(Value::String).collect();
    Ok(r)
}

fn saturate(site: &SiteSpec) -> Result<Report, InputError> {
    let cat = &site.base;
    let sat = tree_saturation(site)?;
    let topology = generate_sieve_topology(site);
    let sieves: Vec<Value> = cat
        .objects()
        .flat_map(|x| {
            topology
                .covering_sieves(x)
                .map(move |s| json!({ "object": cat.object_name(x), "arrows": names(cat, &s.arrows) }))
                .collect::<Vec<_>>()
        })
        .collect();
    let total = sieves.len();
    let result = json!({
        "rounds": sat.rounds,
        "families": sat.families.iter().map(|f| family_json(cat, f)).collect::<Vec<_>>(),
        "covering_sieves": sieves,
        "num_covering_sieves": total,
    });
    let mut r = Report::new(EXIT_OK, result)
        .line(format!("saturated families: {} after {} rounds", sat.families.len(), sat.rounds))
        .line(format!("covering sieves: {total}"));
    for x in cat.objects() {
        r = r.line(format!("  {}: {}", cat.object_name(x), topology.num_covering(x)));
    }
    Ok(r)
}

fn models(site: &SiteSpec, b: usize, with_classes: bool) -> Result<Report, InputError> {
    let cat = &site.base;
    let list = enumerate_models(site, bound(b)?, true);
    let mut result = json!({ "bound": b, "count": list.len() });
    let mut r_lines = vec![format!("models with carriers <= {b}: {}", list.len())];
    for m in &list {
        r_lines.push(format!("  {}", carriers_line(cat, &m.functor)));
    }
    if with_classes {
        let classes = iso_classes(cat, &list);
        r_lines.push(format!("isomorphism classes: {}", classes.len()));
        result["iso_classes"] = json!(classes);
    }
    let mut r = Report::new(EXIT_OK, result);
    r.summary = r_lines;
    r.witnesses = list.iter().map(|m| functor_json(cat, &m.functor)).collect();
    Ok(r)
}

fn status_name(s: Option<BranchStatus>) -> &'static str {
    match s {
        Some(BranchStatus::Stabilized) => "STABILIZED",
        Some(BranchStatus::Dead) => "DEAD",
        Some(BranchStatus::BudgetExceeded) => "BUDGET_EXCEEDED",
        None => "OPEN",
    }
}

fn branch_json(site: &SiteSpec, b: &ChaseBranch) -> Value {
    let cat = &site.base;
    let steps: Vec<Value> = b
        .steps
        .iter()
        .map(|s| {
            json!({
                "row": s.row,
                "column": s.column,
                "task": s.task.map(|t| json!({
                    "stage": t.stage,
                    "arrow": cat.morphism_name(t.arrow),
                    "family": family_json(cat, &site.covers[t.family]),
                })),
                "leg": s.leg,
                "identity": s.identity,
            })
        })
        .collect();
    json!({
        "root": cat.object_name(b.root),
        "status": status_name(b.status),
        "chain": b.chain.iter().map(|&(x, _)| cat.object_name(x)).collect::<Vec<_>>(),
        "choices": b.choices,
        "steps": steps,
    })
}

fn chase_branch(site: &SiteSpec, obj: &str, c: &Common) -> Result<Report, InputError> {
    let cat = &site.base;
    let root = object(cat, obj)?;
    let chase = Chase::new(site);
    let b = chase.run_branch(root, &c.strategy, c.budget)?;
    let status = status_name(b.status);
    let mut r = Report::new(
        if b.status == Some(BranchStatus::BudgetExceeded) { EXIT_INCONCLUSIVE } else { EXIT_OK },
        branch_json(site, &b),
    )
    .line(format!("branch from {obj}: {status} after {} steps", b.steps.len()))
    .line(format!("chain: {}", b.chain.iter().map(|&(x, _)| cat.object_name(x)).collect::<Vec<_>>().join(" <- ")));
    if b.status == Some(BranchStatus::Stabilized) {
        let m = chase.branch_colimit(&b)?;
        r = r.line(format!("colimit model: {}", carriers_line(cat, &m.functor)));
        r.witnesses.push(functor_json(cat, &m.functor));
    }
    Ok(r)
}

fn chase_cotree(site: &SiteSpec, obj: &str, c: &Common) -> Result<Report, InputError> {
    let cat = &site.base;
    let root = object(cat, obj)?;
    let chase = Chase::new(site);
    let tree = chase.explore_cotree(root, c.budget, c.width.unwrap_or(usize::MAX))?;
    let s = tree.summary;
    let leaves: Vec<Value> = tree
        .branches
        .iter()
        .map(|(node, b)| json!({ "node": node, "object": cat.object_name(b.current()), "status": status_name(b.status), "choices": b.choices }))
        .collect();
    let result = json!({
        "nodes": tree.nodes.len(),
        "stabilized": s.stabilized,
        "dead": s.dead,
        "budget_exceeded": s.budget_exceeded,
        "truncated": s.truncated,
        "capped": s.capped,
        "leaves": leaves,
    });
    let code = if s.complete() { EXIT_OK } else { EXIT_INCONCLUSIVE };
    let mut r = Report::new(code, result)
        .line(format!("cotree from {obj}: {} nodes", tree.nodes.len()))
        .line(format!("leaves: {} stabilized, {} dead, {} over budget", s.stabilized, s.dead, s.budget_exceeded));
    for (_, b) in &tree.branches {
        if b.status == Some(BranchStatus::Stabilized) {
            r.witnesses.push(functor_json(cat, &chase.branch_colimit(b)?.functor));
        }
    }
    Ok(r)
}

fn chase_cover(site: &SiteSpec, fam: &str, budget: usize) -> Result<Report, InputError> {
    let cat = &site.base;
    let legs: Vec<MorId> =
        fam.split(',').map(|s| s.trim()).filter(|s| !s.is_empty()).map(|s| arrow(cat, s)).collect::<Result<_, _>>()?;
    let x = match legs.first() {
        Some(&l) => cat.cod(l),
        None => return Err(InputError("--family needs at least one arrow".into())),
    };
    let family = Family::new(cat, x, legs)?;
    let topology = generate_sieve_topology(site);
    let table = AyTable::new(cat, &topology);
    Ok(match family_jointly_covers(site, &table, &topology, &family, budget)? {
        CoverVerdict::Covers { sheaf_confirmed } => Report::new(
            EXIT_OK,
            json!({ "family": family_json(cat, &family), "covers": true, "sheaf_confirmed": sheaf_confirmed }),
        )
        .line(format!("covers: yes (sheaf check agrees: {sheaf_confirmed})")),
        CoverVerdict::Refuted(b, m) => {
            let mut r = Report::new(
                EXIT_REFUTED,
                json!({ "family": family_json(cat, &family), "covers": false, "branch": branch_json(site, &b) }),
            )
            .line("covers: no")
            .line(format!("countermodel: {}", carriers_line(cat, &m.functor)));
            r.witnesses.push(functor_json(cat, &m.functor));
            r
        }
        CoverVerdict::Inconclusive(why) => Report::new(
            EXIT_INCONCLUSIVE,
            json!({ "family": family_json(cat, &family), "covers": null, "reason": why }),
        )
        .line(format!("INCONCLUSIVE: {why}")),
    })
}

/// An arrow name, or an object with exactly one arrow into `x`.
fn subobject(cat: &FinCategory, x: ObjId, name: &str) -> Result<MorId, InputError> {
    if let Some(f) = cat.morphism_by_name(name) {
        return Ok(f);
    }
    let y = object(cat, name).map_err(|_| InputError(format!("`{name}` is neither an arrow nor an object")))?;
    match cat.hom(y, x) {
        [f] => Ok(*f),
        hom => Err(InputError(format!("{} arrows from {name} to {}; name one", hom.len(), cat.object_name(x)))),
    }
}

fn separate(site: &SiteSpec, obj: &str, u: &str, v: &str, budget: usize) -> Result<Report, InputError> {
    let cat = &site.base;
    let x = object(cat, obj)?;
    let (fu, fv) = (subobject(cat, x, u)?, subobject(cat, x, v)?);
    let head = json!({ "object": obj, "u": cat.morphism_name(fu), "v": cat.morphism_name(fv) });
    let mut result = head;
    Ok(match separate_subobjects(site, x, fu, fv, budget)? {
        SeparationOutcome::Contained => {
            result["contained"] = json!(true);
            Report::new(EXIT_OK, result).line(format!("{u} <= {v} in {obj}: contained"))
        }
        SeparationOutcome::Witness(sep) => {
            result["contained"] = json!(false);
            result["element"] = json!(sep.element);
            result["branch"] = branch_json(site, &sep.branch);
            let mut r = Report::new(EXIT_REFUTED, result)
                .line(format!("{u} <= {v} in {obj}: separated"))
                .line(format!("model: {}", carriers_line(cat, &sep.model.functor)));
            r.witnesses.push(functor_json(cat, &sep.model.functor));
            r
        }
        SeparationOutcome::Inconclusive(why) => {
            result["contained"] = Value::Null;
            result["reason"] = json!(why);
            Report::new(EXIT_INCONCLUSIVE, result).line(format!("INCONCLUSIVE: {why}"))
        }
    })
}

fn sheafify(site: &SiteSpec, only: Option<&str>) -> Result<Report, InputError> {
    let cat = &site.base;
    let topology = generate_sieve_topology(site);
    let table = AyTable::new(cat, &topology);
    let objects: Vec<ObjId> = match only {
        Some(name) => vec![object(cat, name)?],
        None => cat.objects().collect(),
    };
    let mut entries = Vec::new();
    let mut r = Report::new(EXIT_OK, Value::Null);
    for x in objects {
        let rep_is_sheaf = is_sheaf(cat, &SetFunctor::representable(cat, x), &topology);
        let a = table.sheaf(x);
        entries.push(json!({
            "object": cat.object_name(x),
            "representable_is_sheaf": rep_is_sheaf,
            "sheaf": functor_json(cat, a),
        }));
        r = r.line(format!(
            "ay({}): {}{}",
            cat.object_name(x),
            carriers_line(cat, a),
            if rep_is_sheaf { " (already a sheaf)" } else { "" }
        ));
    }
    r.result = json!({ "sheaves": entries });
    Ok(r)
}

fn factor(site: &SiteSpec, from: &str, into: &str) -> Result<Report, InputError> {
    let cat = &site.base;
    let (x, y) = (object(cat, from)?, object(cat, into)?);
    let topology = generate_sieve_topology(site);
    let table = AyTable::new(cat, &topology);
    let maps = enumerate_nat(cat, table.sheaf(x), table.sheaf(y));
    let mut entries = Vec::new();
    let mut all = true;
    for alpha in &maps {
        let fac = factor_through_cover(cat, &table, x, y, alpha)?;
        let ok = verify_factorization(cat, &topology, &table, alpha, &fac);
        all &= ok;
        entries.push(json!({
            "alpha": nat_json(cat, alpha),
            "cover": family_json(cat, &fac.family),
            "legs": fac.legs.iter().map(|&(f, g)| json!([cat.morphism_name(f), cat.morphism_name(g)])).collect::<Vec<_>>(),
            "verified": ok,
        }));
    }
    let code = if all { EXIT_OK } else { EXIT_REFUTED };
    let result = json!({ "from": from, "into": into, "count": maps.len(), "factorizations": entries });
    Ok(Report::new(code, result)
        .line(format!("maps ay({from}) => ay({into}): {}", maps.len()))
        .line(format!("factorizations verified: {all}")))
}

fn embedding_json(l: &crate::lattice::FinLattice, e: &Embedding) -> Value {
    json!({
        "points": e.points,
        "sets": l.names.iter().zip(&e.sets).map(|(n, s)| (n.clone(), json!(s))).collect::<Map<String, Value>>(),
    })
}

fn lattice_embed(file: &SiteFile, budget: usize) -> Result<Report, InputError> {
    let l = file.lattice.as_ref().ok_or_else(|| InputError("lattice-embed needs a `lattice` block".into()))?;
    let pre = &file.prescribed;
    let b = match birkhoff_embed(l, pre) {
        Err(LatticeError::NonDistributive) => {
            return Ok(Report::new(EXIT_REFUTED, json!({ "distributive": false }))
                .line("NON_DISTRIBUTIVE: no embedding into a powerset exists"));
        }
        other => other?,
    };
    let b_report = verify_embedding(l, &b, pre);
    let mut result = json!({
        "distributive": true,
        "birkhoff": { "embedding": embedding_json(l, &b), "ok": b_report.ok() },
    });
    let mut r_lines = vec![format!("birkhoff: {} points, ok: {}", b.points.len(), b_report.ok())];
    let mut code = if b_report.ok() { EXIT_OK } else { EXIT_REFUTED };
    match model_embed(l, pre, budget) {
        Ok(m) => {
            let rep = verify_embedding(l, &m, pre);
            result["models"] = json!({ "embedding": embedding_json(l, &m), "ok": rep.ok() });
            r_lines.push(format!("two-valued models: {} points, ok: {}", m.points.len(), rep.ok()));
            if !rep.ok() {
                code = EXIT_REFUTED;
            }
        }
        Err(LatticeError::Inconclusive(why)) => {
            result["models"] = json!({ "reason": why });
            r_lines.push(format!("two-valued models: INCONCLUSIVE: {why}"));
            if code == EXIT_OK {
                code = EXIT_INCONCLUSIVE;
            }
        }
        Err(e) => return Err(e.into()),
    }
    let mut r = Report::new(code, result);
    r.summary = r_lines;
    Ok(r)
}

fn delta_check(site: &SiteSpec, b: usize) -> Result<Report, InputError> {
    let cat = &site.base;
    let ct = match build_ctilde(site, bound(b)?, MAX_CTILDE_OBJECTS) {
        Ok(ct) => ct,
        Err(e @ (EventualError::Budget(..) | EventualError::RepresentableTooLarge(_))) => {
            return Ok(Report::new(EXIT_INCONCLUSIVE, json!({ "bound": b, "reason": e.to_string() }))
                .line(format!("INCONCLUSIVE: {e}")));
        }
        Err(e) => return Err(e.into()),
    };
    let ff = ct.phi_fully_faithful(cat);
    let models: Vec<Model> = enumerate_models(site, bound(b)?, true);
    let functors: Vec<SetFunctor> = models.iter().map(|m| m.functor.clone()).collect();
    let mut certificates = Vec::new();
    let mut failed_certificates = 0;
    for (i, m) in functors.iter().enumerate() {
        let cert = delta(cat, &ct, m)?;
        if !cert.limiting {
            failed_certificates += 1;
        }
        certificates.push(json!({ "model": i, "object": cert.object, "limiting": cert.limiting }));
    }
    let mut failures = Vec::new();
    for (i, m) in functors.iter().enumerate() {
        for (j, n) in functors.iter().enumerate() {
            if !delta_iso_check(cat, &functors, m, n) {
                failures.push(json!([i, j]));
            }
        }
    }
    let code = if !ff || !failures.is_empty() {
        EXIT_REFUTED
    } else if failed_certificates > 0 {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };
    let result = json!({
        "bound": b,
        "lex_functors": ct.functors.len(),
        "morphisms": ct.category.num_morphisms(),
        "phi_fully_faithful": ff,
        "certificates": certificates,
        "pairs": functors.len() * functors.len(),
        "iso_failures": failures,
    });
    let mut r = Report::new(code, result)
        .line(format!(
            "lex functors with carriers <= {b}: {} ({} maps)",
            ct.functors.len(),
            ct.category.num_morphisms()
        ))
        .line(format!("phi fully faithful: {ff}"))
        .line(format!("limit certificates: {}/{} verified", functors.len() - failed_certificates, functors.len()))
        .line(format!("delta isomorphism: {}/{} pairs", functors.len().pow(2) - failures.len(), functors.len().pow(2)));
    r.witnesses = functors.iter().map(|m| functor_json(cat, m)).collect();
    Ok(r)
}

fn eta(site: &SiteSpec, b: usize) -> Result<Report, InputError> {
    let cat = &site.base;
    let topology = generate_sieve_topology(site);
    let table = AyTable::new(cat, &topology);
    let models = enumerate_models(site, bound(b)?, true);
    let functors: Vec<SetFunctor> = models.iter().map(|m| m.functor.clone()).collect();
    let unit: Vec<bool> = functors.iter().map(|m| eta_check(cat, &topology, &table, m)).collect();
    let components: Map<String, Value> = cat
        .objects()
        .map(|v| (cat.object_name(v).to_string(), json!(eta_component_check(cat, &functors, v))))
        .collect();
    let ok = unit.iter().all(|&u| u) && components.values().all(|v| v == &json!(true));
    let mut r = Report::new(
        if ok { EXIT_OK } else { EXIT_REFUTED },
        json!({ "bound": b, "models": functors.len(), "unit": unit, "co_yoneda": components }),
    )
    .line(format!("models with carriers <= {b}: {}", functors.len()))
    .line(format!("unit bijective: {}/{}", unit.iter().filter(|&&u| u).count(), unit.len()))
    .line(format!(
        "co-Yoneda comparison bijective at every object: {}",
        components.values().all(|v| v == &json!(true))
    ));
    r.witnesses = functors.iter().zip(&unit).filter(|(_, &u)| !u).map(|(m, _)| functor_json(cat, m)).collect();
    Ok(r)
}
