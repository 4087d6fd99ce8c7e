//! The chase: chains of pullback refinements scheduled fairly over a task
//! table, whose colimits of representables are models. Used to separate
//! subobjects and to decide whether a family covers.

use std::ops::ControlFlow;

use thiserror::Error;

use crate::fincat::{FinCategory, MorId, NatTrans, ObjId, SetFunctor, Variance};
use crate::limits;
use crate::models::{is_lex, preserves_covers, LexStructure, Model};
use crate::presheaf::{extremal_epi_in_sh, AyTable};
use crate::site::{Family, SiteSpec};

/// Explored nodes per search before giving up.
pub const DEFAULT_NODE_CAP: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChaseError {
    #[error("MISSING_PULLBACK: no pullback of {0} along {1}")]
    MissingPullback(String, String),
    #[error("branch did not terminate within its budget")]
    NotTerminated,
    #[error("{0} is not a monomorphism into the given object")]
    NotMonoInto(String),
}

/// Cantor pairing `(α, β) ↦ (α+β)(α+β+1)/2 + β`; always `≥ β`.
pub fn pairing(alpha: u64, beta: u64) -> u64 {
    let s = alpha + beta;
    s * (s + 1) / 2 + beta
}

pub fn unpairing(n: u64) -> (u64, u64) {
    // largest s with s(s+1)/2 <= n
    let mut s = (((8 * n + 1) as f64).sqrt() as u64).saturating_sub(1) / 2;
    while (s + 1) * (s + 2) / 2 <= n {
        s += 1;
    }
    while s * (s + 1) / 2 > n {
        s -= 1;
    }
    let beta = n - s * (s + 1) / 2;
    (s - beta, beta)
}

/// A diagram `u_stage -> y <- legs`, the family being an index into the
/// site's covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Task {
    pub stage: usize,
    pub arrow: MorId,
    pub family: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchStatus {
    Stabilized,
    Dead,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    FirstLeg,
    /// leg indices consumed at tasks whose family has at least two legs;
    /// leg 0 once exhausted
    Choices(Vec<usize>),
}

/// One step: the scheduled cell, the task found there and the leg used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepRecord {
    pub row: u64,
    pub column: usize,
    pub task: Option<Task>,
    pub leg: Option<usize>,
    pub identity: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChaseBranch {
    pub root: ObjId,
    /// `(u_k, u_k -> u_{k-1})`; stage 0 carries the identity of the root
    pub chain: Vec<(ObjId, MorId)>,
    pub steps: Vec<StepRecord>,
    /// leg indices taken at branching tasks
    pub choices: Vec<usize>,
    pub status: Option<BranchStatus>,
}

impl ChaseBranch {
    pub fn current(&self) -> ObjId {
        self.chain.last().expect("chain has a root").0
    }

    /// `u_n -> u_stage` through the connecting maps.
    pub fn composite_to(&self, cat: &FinCategory, stage: usize) -> MorId {
        let n = self.chain.len() - 1;
        let mut p = cat.id(self.chain[n].0);
        for k in (stage + 1..=n).rev() {
            p = cat.comp(self.chain[k].1, p);
        }
        p
    }

    /// Objects of the task table columns filled so far.
    pub fn columns(&self) -> Vec<ObjId> {
        self.chain.iter().take(self.steps.len() + 1).map(|s| s.0).collect()
    }
}

/// Scheduling data shared by all branches over one site.
pub struct Chase<'a> {
    pub site: &'a SiteSpec,
    /// `T_u` per object, ordered by (arrow id, family index)
    pub tasks: Vec<Vec<(MorId, usize)>>,
    dead: Vec<bool>,
}

impl<'a> Chase<'a> {
    pub fn new(site: &'a SiteSpec) -> Self {
        let cat = &site.base;
        let tasks = cat
            .objects()
            .map(|u| {
                let mut t = Vec::new();
                for h in cat.out_of(u) {
                    for (i, fam) in site.covers.iter().enumerate() {
                        if !fam.is_empty() && fam.codomain == cat.cod(h) {
                            t.push((h, i));
                        }
                    }
                }
                t.sort_unstable();
                t
            })
            .collect();
        let initial = limits::strict_initial(cat);
        let dead = cat
            .objects()
            .map(|u| {
                // a strict initial that is also terminal gives C(u, -) = 1 anyway
                (Some(u) == initial && cat.terminal() != Some(u))
                    || site.covers.iter().any(|f| f.is_empty() && !cat.hom(u, f.codomain).is_empty())
            })
            .collect();
        Chase { site, tasks, dead }
    }

    pub fn is_dead(&self, u: ObjId) -> bool {
        self.dead[u]
    }

    fn cat(&self) -> &FinCategory {
        &self.site.base
    }

    pub fn start(&self, root: ObjId) -> ChaseBranch {
        let mut b = ChaseBranch {
            root,
            chain: vec![(root, self.cat().id(root))],
            steps: Vec::new(),
            choices: Vec::new(),
            status: None,
        };
        if self.is_dead(root) {
            b.status = Some(BranchStatus::Dead);
        }
        b
    }

    /// The task at the cell scheduled for the next step, if the column is
    /// nonempty.
    pub fn scheduled(&self, b: &ChaseBranch) -> (u64, usize, Option<Task>) {
        let (row, col) = unpairing(b.steps.len() as u64);
        let col = col as usize;
        let list = &self.tasks[b.chain[col].0];
        let task = if list.is_empty() {
            None
        } else {
            let (arrow, family) = list[(row % list.len() as u64) as usize];
            Some(Task { stage: col, arrow, family })
        };
        (row, col, task)
    }

    /// `h ∘ (u_n -> u_stage)`.
    pub fn composite(&self, b: &ChaseBranch, task: &Task) -> MorId {
        self.cat().comp(task.arrow, b.composite_to(self.cat(), task.stage))
    }

    /// Leg options after collapsing every leg the composite already factors
    /// through into the least such leg.
    pub fn options(&self, b: &ChaseBranch, task: &Task) -> Vec<usize> {
        let c = self.composite(b, task);
        let legs = &self.site.covers[task.family].legs;
        let mut out = Vec::new();
        let mut seen_factor = false;
        for (i, &l) in legs.iter().enumerate() {
            if self.cat().factors_through(c, l) {
                if !seen_factor {
                    out.push(i);
                    seen_factor = true;
                }
            } else {
                out.push(i);
            }
        }
        out
    }

    /// Solves the scheduled task with the given leg and updates the status.
    pub fn step(&self, b: &mut ChaseBranch, leg: usize) -> Result<(), ChaseError> {
        let cat = self.cat();
        let (row, column, task) = self.scheduled(b);
        let u = b.current();
        let (next, identity) = match task {
            None => ((u, cat.id(u)), true),
            Some(task) => {
                let l = self.site.covers[task.family].legs[leg];
                let c = self.composite(b, &task);
                if cat.factors_through(c, l) {
                    ((u, cat.id(u)), true)
                } else {
                    match limits::pullback(cat, c, l).expect("common codomain") {
                        Some(sq) => ((sq.apex, sq.left), false),
                        None => {
                            return Err(ChaseError::MissingPullback(
                                cat.morphism_name(l).to_string(),
                                cat.morphism_name(c).to_string(),
                            ))
                        }
                    }
                }
            }
        };
        b.chain.push(next);
        b.steps.push(StepRecord { row, column, task, leg: task.map(|_| leg), identity });
        if self.is_dead(next.0) {
            b.status = Some(BranchStatus::Dead);
        } else if identity && self.stable_at(next.0) {
            b.status = Some(BranchStatus::Stabilized);
        }
        Ok(())
    }

    /// Every arrow out of `u` factors through some leg of every nonempty
    /// cover on its codomain.
    pub fn stable_at(&self, u: ObjId) -> bool {
        let cat = self.cat();
        self.tasks[u].iter().all(|&(h, fam)| self.site.covers[fam].legs.iter().any(|&l| cat.factors_through(h, l)))
    }

    fn is_branching(&self, task: &Option<Task>) -> bool {
        task.is_some_and(|t| self.site.covers[t.family].legs.len() >= 2)
    }

    pub fn run_branch(&self, root: ObjId, strategy: &Strategy, budget: usize) -> Result<ChaseBranch, ChaseError> {
        let mut b = self.start(root);
        let mut next_choice = 0;
        while b.status.is_none() {
            if b.steps.len() >= budget {
                b.status = Some(BranchStatus::BudgetExceeded);
                break;
            }
            let (_, _, task) = self.scheduled(&b);
            let mut leg = 0;
            if self.is_branching(&task) {
                if let Strategy::Choices(seq) = strategy {
                    if let Some(&c) = seq.get(next_choice) {
                        leg = c % self.site.covers[task.expect("branching").family].legs.len();
                    }
                    next_choice += 1;
                }
                b.choices.push(leg);
            }
            self.step(&mut b, leg)?;
        }
        Ok(b)
    }

    /// Depth-first walk over the cotree of all collapsed leg choices, at most
    /// `width` children per node. `visit` sees every terminated or
    /// budget-exceeded branch and may stop the walk.
    pub fn walk(
        &self,
        root: ObjId,
        budget: usize,
        width: usize,
        node_cap: usize,
        visit: &mut dyn FnMut(&ChaseBranch) -> ControlFlow<()>,
    ) -> Result<WalkSummary, ChaseError> {
        let mut summary = WalkSummary::default();
        let start = self.start(root);
        let _ = self.walk_rec(start, budget, width, node_cap, &mut summary, &mut |b| visit(b), None)?;
        Ok(summary)
    }

    #[allow(clippy::too_many_arguments)]
    fn walk_rec(
        &self,
        mut b: ChaseBranch,
        budget: usize,
        width: usize,
        node_cap: usize,
        summary: &mut WalkSummary,
        visit: &mut dyn FnMut(&ChaseBranch) -> ControlFlow<()>,
        mut tree: Option<(&mut Cotree, usize)>,
    ) -> Result<ControlFlow<()>, ChaseError> {
        loop {
            if summary.nodes >= node_cap {
                summary.capped = true;
                return Ok(ControlFlow::Break(()));
            }
            if b.status.is_none() && b.steps.len() >= budget {
                b.status = Some(BranchStatus::BudgetExceeded);
            }
            if let Some(status) = b.status {
                summary.nodes += 1;
                match status {
                    BranchStatus::Stabilized => summary.stabilized += 1,
                    BranchStatus::Dead => summary.dead += 1,
                    BranchStatus::BudgetExceeded => summary.budget_exceeded += 1,
                }
                if let Some((tree, node)) = tree.as_mut() {
                    tree.nodes[*node].status = Some(status);
                    tree.nodes[*node].object = b.current();
                    tree.branches.push((*node, b.clone()));
                }
                return Ok(visit(&b));
            }
            let (_, _, task) = self.scheduled(&b);
            if !self.is_branching(&task) {
                self.step(&mut b, 0)?;
                continue;
            }
            let task = task.expect("branching");
            let options = self.options(&b, &task);
            summary.nodes += 1;
            if options.len() > width {
                summary.truncated = true;
            }
            if let Some((tree, node)) = tree.as_mut() {
                tree.nodes[*node].object = b.current();
                tree.nodes[*node].options = options.clone();
            }
            for &leg in options.iter().take(width) {
                let mut child = b.clone();
                child.choices.push(leg);
                self.step(&mut child, leg)?;
                let sub = match tree.as_mut() {
                    Some((tree, node)) => {
                        let id = tree.nodes.len();
                        tree.nodes.push(CotreeNode {
                            parent: Some(*node),
                            leg: Some(leg),
                            object: child.current(),
                            options: Vec::new(),
                            status: None,
                        });
                        self.walk_rec(child, budget, width, node_cap, summary, visit, Some((tree, id)))?
                    }
                    None => self.walk_rec(child, budget, width, node_cap, summary, visit, None)?,
                };
                if sub.is_break() {
                    return Ok(sub);
                }
            }
            return Ok(ControlFlow::Continue(()));
        }
    }

    pub fn explore_cotree(&self, root: ObjId, budget: usize, width: usize) -> Result<Cotree, ChaseError> {
        let mut tree = Cotree {
            nodes: vec![CotreeNode { parent: None, leg: None, object: root, options: Vec::new(), status: None }],
            branches: Vec::new(),
            summary: WalkSummary::default(),
        };
        let mut summary = WalkSummary::default();
        let _ = self.walk_rec(
            self.start(root),
            budget,
            width,
            DEFAULT_NODE_CAP,
            &mut summary,
            &mut |_| ControlFlow::Continue(()),
            Some((&mut tree, 0)),
        )?;
        tree.summary = summary;
        Ok(tree)
    }

    /// The colimit of the chain of representables.
    pub fn branch_colimit(&self, b: &ChaseBranch) -> Result<Model, ChaseError> {
        let cat = self.cat();
        let functor = match b.status {
            Some(BranchStatus::Dead) => SetFunctor::terminal(cat, Variance::Covariant),
            Some(BranchStatus::Stabilized) => SetFunctor::corepresentable(cat, b.current()),
            _ => return Err(ChaseError::NotTerminated),
        };
        let lex = LexStructure::new(cat);
        Ok(Model::new(self.site, &lex, functor))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WalkSummary {
    pub nodes: usize,
    pub stabilized: usize,
    pub dead: usize,
    pub budget_exceeded: usize,
    /// some node had more options than the width allowed
    pub truncated: bool,
    /// the node cap stopped the walk
    pub capped: bool,
}

impl WalkSummary {
    /// Every branch terminated and nothing was cut off.
    pub fn complete(&self) -> bool {
        self.budget_exceeded == 0 && !self.truncated && !self.capped
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CotreeNode {
    pub parent: Option<usize>,
    /// leg taken from the parent
    pub leg: Option<usize>,
    pub object: ObjId,
    /// collapsed leg options, for branching nodes
    pub options: Vec<usize>,
    /// set on leaves
    pub status: Option<BranchStatus>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cotree {
    pub nodes: Vec<CotreeNode>,
    /// leaf node and the branch ending there
    pub branches: Vec<(usize, ChaseBranch)>,
    pub summary: WalkSummary,
}

impl Cotree {
    /// When every branch terminated, some branch is not dead unless the root
    /// itself is.
    pub fn has_live_branch(&self) -> bool {
        self.branches.iter().any(|(_, b)| b.status == Some(BranchStatus::Stabilized))
    }
}

/// Model `M` with `M(u)` not landing inside `M(v)` in `M(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Separation {
    pub branch: ChaseBranch,
    pub model: Model,
    /// the element of `M(dom u)` whose image escapes `M(v)`
    pub element: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeparationOutcome {
    Contained,
    Witness(Box<Separation>),
    Inconclusive(String),
}

/// Image of `M(m)` in `M(cod m)`.
fn image(m: &SetFunctor, f: MorId) -> Vec<usize> {
    let mut v = m.actions[f].clone();
    v.sort_unstable();
    v.dedup();
    v
}

/// Checks a witness against the model tables: lex, nonempty covers
/// preserved, and `M(u)` escapes `M(v)` at the given element.
pub fn verify_separation(site: &SiteSpec, u: MorId, v: MorId, sep: &Separation) -> bool {
    let cat = &site.base;
    let m = &sep.model.functor;
    let lex = LexStructure::new(cat);
    let nonempty = SiteSpec::with_covers_unchecked(cat.clone(), site.nonempty_covers().cloned().collect());
    m.is_functor(cat)
        && is_lex(cat, &lex, m)
        && preserves_covers(&nonempty, m)
        && sep.element < m.carriers[cat.dom(u)]
        && !image(m, v).contains(&m.apply(u, sep.element))
}

pub fn separate_subobjects(
    site: &SiteSpec,
    x: ObjId,
    u: MorId,
    v: MorId,
    budget: usize,
) -> Result<SeparationOutcome, ChaseError> {
    let cat = &site.base;
    for m in [u, v] {
        if cat.cod(m) != x || !cat.is_mono(m).unwrap_or(false) {
            return Err(ChaseError::NotMonoInto(cat.morphism_name(m).to_string()));
        }
    }
    if cat.factors_through(u, v) {
        return Ok(SeparationOutcome::Contained);
    }
    let chase = Chase::new(site);
    let mut found = None;
    let mut failure = None;
    let summary = chase.walk(cat.dom(u), budget, usize::MAX, DEFAULT_NODE_CAP, &mut |b| {
        if b.status != Some(BranchStatus::Stabilized) {
            return ControlFlow::Continue(());
        }
        let p = b.composite_to(cat, 0);
        if cat.factors_through(cat.comp(u, p), v) {
            return ControlFlow::Continue(());
        }
        match chase.branch_colimit(b) {
            Ok(model) => {
                let element = crate::fincat::position(cat.hom(b.current(), cat.dom(u)), p);
                found = Some(Separation { branch: b.clone(), model, element });
                ControlFlow::Break(())
            }
            Err(e) => {
                failure = Some(e);
                ControlFlow::Break(())
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    match found {
        Some(sep) if verify_separation(site, u, v, &sep) => Ok(SeparationOutcome::Witness(Box::new(sep))),
        Some(_) => Ok(SeparationOutcome::Inconclusive("witness failed verification".into())),
        None if summary.complete() => {
            Ok(SeparationOutcome::Inconclusive("every branch terminated without separating".into()))
        }
        None => Ok(SeparationOutcome::Inconclusive(format!(
            "search cut off ({} budget-exceeded branches, truncated: {}, capped: {})",
            summary.budget_exceeded, summary.truncated, summary.capped
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverVerdict {
    /// every terminating branch hits `[1_x]`; the flag records agreement of
    /// the sheaf-side check
    Covers {
        sheaf_confirmed: bool,
    },
    /// countermodel: a stabilized branch whose `[1_x]` misses every leg
    Refuted(Box<ChaseBranch>, Model),
    Inconclusive(String),
}

pub fn family_jointly_covers(
    site: &SiteSpec,
    table: &AyTable,
    topology: &crate::site::SieveTopology,
    fam: &Family,
    budget: usize,
) -> Result<CoverVerdict, ChaseError> {
    let cat = &site.base;
    let x = fam.codomain;
    let chase = Chase::new(site);
    let mut counter = None;
    let summary = chase.walk(x, budget, usize::MAX, DEFAULT_NODE_CAP, &mut |b| {
        if b.status != Some(BranchStatus::Stabilized) {
            return ControlFlow::Continue(());
        }
        let p = b.composite_to(cat, 0);
        if fam.legs.iter().any(|&l| cat.factors_through(p, l)) {
            ControlFlow::Continue(())
        } else {
            counter = Some(b.clone());
            ControlFlow::Break(())
        }
    })?;
    if let Some(b) = counter {
        let model = chase.branch_colimit(&b)?;
        return Ok(CoverVerdict::Refuted(Box::new(b), model));
    }
    if !summary.complete() {
        return Ok(CoverVerdict::Inconclusive(format!("{} branches exceeded the budget", summary.budget_exceeded)));
    }
    let maps: Vec<NatTrans> = fam.legs.iter().map(|&l| table.map(cat, topology, l)).collect();
    let refs: Vec<&NatTrans> = maps.iter().collect();
    let sheaf_confirmed = extremal_epi_in_sh(cat, topology, &refs, table.sheaf(x));
    Ok(CoverVerdict::Covers { sheaf_confirmed })
}
