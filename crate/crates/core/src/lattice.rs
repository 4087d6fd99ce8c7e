//! Finite lattices, distributivity, and embeddings of distributive lattices
//! into powersets preserving meets and prescribed joins: one through
//! join-irreducibles, one through two-valued models found by the chase.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::chase::{separate_subobjects, ChaseError, SeparationOutcome};
use crate::fincat::{CategoryError, FinCategory};
use crate::site::{Family, SiteError, SiteSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("the order is not a lattice: {0}")]
    NotALattice(String),
    #[error("NON_DISTRIBUTIVE")]
    NonDistributive,
    #[error("some element has no complement")]
    MissingComplements,
    #[error("element index {0} out of range")]
    UnknownElement(usize),
    #[error("INCONCLUSIVE: {0}")]
    Inconclusive(String),
    #[error(transparent)]
    Chase(#[from] ChaseError),
    #[error(transparent)]
    Site(#[from] SiteError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinLattice {
    pub names: Vec<String>,
    pub leq: Vec<Vec<bool>>,
    pub meet: Vec<Vec<usize>>,
    pub join: Vec<Vec<usize>>,
    pub bottom: usize,
    pub top: usize,
}

impl FinLattice {
    /// Builds the lattice of a partial order, failing when a pair lacks a
    /// meet or a join (or the order is empty).
    pub fn from_order(names: Vec<String>, leq: Vec<Vec<bool>>) -> Result<Self, LatticeError> {
        let n = names.len();
        if n == 0 {
            return Err(LatticeError::NotALattice("no elements".into()));
        }
        let bound = |a: usize, b: usize, up: bool| -> Option<usize> {
            let le = |x: usize, y: usize| if up { leq[x][y] } else { leq[y][x] };
            let candidates: Vec<usize> = (0..n).filter(|&c| le(a, c) && le(b, c)).collect();
            candidates.iter().copied().find(|&c| candidates.iter().all(|&d| le(c, d)))
        };
        let mut meet = vec![vec![0; n]; n];
        let mut join = vec![vec![0; n]; n];
        for a in 0..n {
            for b in 0..n {
                meet[a][b] = bound(a, b, false)
                    .ok_or_else(|| LatticeError::NotALattice(format!("{} and {} have no meet", names[a], names[b])))?;
                join[a][b] = bound(a, b, true)
                    .ok_or_else(|| LatticeError::NotALattice(format!("{} and {} have no join", names[a], names[b])))?;
            }
        }
        let bottom = (1..n).fold(0, |acc, x| meet[acc][x]);
        let top = (1..n).fold(0, |acc, x| join[acc][x]);
        Ok(FinLattice { names, leq, meet, join, bottom, top })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn join_all(&self, set: &[usize]) -> usize {
        set.iter().fold(self.bottom, |acc, &x| self.join[acc][x])
    }

    pub fn meet_all(&self, set: &[usize]) -> usize {
        set.iter().fold(self.top, |acc, &x| self.meet[acc][x])
    }

    pub fn is_distributive(&self) -> bool {
        let n = self.len();
        (0..n).all(|a| {
            (0..n).all(|b| (0..n).all(|c| self.meet[a][self.join[b][c]] == self.join[self.meet[a][b]][self.meet[a][c]]))
        })
    }

    /// Complement table, when every element has one (the least one is taken).
    pub fn complements(&self) -> Option<Vec<usize>> {
        (0..self.len())
            .map(|a| (0..self.len()).find(|&c| self.meet[a][c] == self.bottom && self.join[a][c] == self.top))
            .collect()
    }

    /// Elements with exactly one lower cover.
    pub fn join_irreducibles(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| {
                let below: Vec<usize> = (0..self.len()).filter(|&x| x != j && self.leq[x][j]).collect();
                let covers = below.iter().filter(|&&x| !below.iter().any(|&y| y != x && self.leq[x][y])).count();
                covers == 1
            })
            .collect()
    }

    /// The lattice as a poset category, element ids kept.
    pub fn category(&self) -> FinCategory {
        FinCategory::from_order(self.names.clone(), &self.leq).expect("a lattice order is a valid poset")
    }

    /// The poset site whose covers are the prescribed joins.
    pub fn site(&self, prescribed: &[Vec<usize>]) -> Result<SiteSpec, LatticeError> {
        let cat = self.category();
        let mut covers = Vec::new();
        for set in prescribed {
            let j = self.join_all(set);
            let legs = set.iter().map(|&a| cat.hom(a, j)[0]);
            covers.push(Family::new(&cat, j, legs)?);
        }
        Ok(SiteSpec::new(cat, covers)?)
    }

    fn check(&self, prescribed: &[Vec<usize>]) -> Result<(), LatticeError> {
        match prescribed.iter().flatten().find(|&&a| a >= self.len()) {
            Some(&a) => Err(LatticeError::UnknownElement(a)),
            None => Ok(()),
        }
    }
}

impl From<CategoryError> for LatticeError {
    fn from(e: CategoryError) -> Self {
        LatticeError::Site(SiteError::Category(e))
    }
}

/// `⋂_i (b_i0 ∨ b_i1) = ⋁_{h: I -> 2} ⋀_i b_{i,h(i)}` for the given pairs.
pub fn is_2_distributive_identity(l: &FinLattice, pairs: &[(usize, usize)]) -> Result<bool, LatticeError> {
    if l.complements().is_none() {
        return Err(LatticeError::MissingComplements);
    }
    if let Some(&(a, b)) = pairs.iter().find(|&&(a, b)| a.max(b) >= l.len()) {
        return Err(LatticeError::UnknownElement(a.max(b)));
    }
    let lhs = pairs.iter().fold(l.top, |acc, &(a, b)| l.meet[acc][l.join[a][b]]);
    let mut rhs = l.bottom;
    for h in 0u64..(1u64 << pairs.len()) {
        let term =
            pairs.iter().enumerate().fold(l.top, |acc, (i, &(a, b))| l.meet[acc][if h >> i & 1 == 0 { a } else { b }]);
        rhs = l.join[rhs][term];
    }
    Ok(lhs == rhs)
}

/// A map from lattice elements to subsets of `points`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub points: Vec<String>,
    /// sorted point indices per element
    pub sets: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbeddingReport {
    pub injective: bool,
    pub order_embedding: bool,
    pub preserves_meets: bool,
    pub preserves_prescribed_joins: bool,
}

impl EmbeddingReport {
    pub fn ok(&self) -> bool {
        self.injective && self.order_embedding && self.preserves_meets && self.preserves_prescribed_joins
    }
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect::<BTreeSet<_>>().into_iter().collect()
}

fn intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| b.contains(x)).collect()
}

pub fn verify_embedding(l: &FinLattice, e: &Embedding, prescribed: &[Vec<usize>]) -> EmbeddingReport {
    let n = l.len();
    let distinct: BTreeSet<&Vec<usize>> = e.sets.iter().collect();
    let all: Vec<usize> = (0..e.points.len()).collect();
    let subset = |a: &[usize], b: &[usize]| a.iter().all(|x| b.contains(x));
    EmbeddingReport {
        injective: distinct.len() == n,
        order_embedding: (0..n).all(|a| (0..n).all(|b| l.leq[a][b] == subset(&e.sets[a], &e.sets[b]))),
        preserves_meets: e.sets[l.top] == all
            && (0..n).all(|a| (0..n).all(|b| e.sets[l.meet[a][b]] == intersection(&e.sets[a], &e.sets[b]))),
        preserves_prescribed_joins: prescribed.iter().all(|set| {
            let image = set.iter().fold(Vec::new(), |acc, &a| union(&acc, &e.sets[a]));
            e.sets[l.join_all(set)] == image
        }),
    }
}

/// `a ↦ {p join-irreducible : p ≤ a}`.
pub fn birkhoff_embed(l: &FinLattice, prescribed: &[Vec<usize>]) -> Result<Embedding, LatticeError> {
    l.check(prescribed)?;
    if !l.is_distributive() {
        return Err(LatticeError::NonDistributive);
    }
    let irr = l.join_irreducibles();
    Ok(Embedding {
        points: irr.iter().map(|&p| l.names[p].clone()).collect(),
        sets: (0..l.len())
            .map(|a| irr.iter().enumerate().filter(|(_, &p)| l.leq[p][a]).map(|(i, _)| i).collect())
            .collect(),
    })
}

/// Points are the two-valued models `C(w, -)` that the chase produces when
/// separating each pair `a ≰ b` below the top; `a ↦ {w : w ≤ a}`.
pub fn model_embed(l: &FinLattice, prescribed: &[Vec<usize>], budget: usize) -> Result<Embedding, LatticeError> {
    l.check(prescribed)?;
    if !l.is_distributive() {
        return Err(LatticeError::NonDistributive);
    }
    let site = l.site(prescribed)?;
    let cat = &site.base;
    let mut witnesses = BTreeSet::new();
    for a in 0..l.len() {
        for b in 0..l.len() {
            if l.leq[a][b] {
                continue;
            }
            let (u, v) = (cat.hom(a, l.top)[0], cat.hom(b, l.top)[0]);
            match separate_subobjects(&site, l.top, u, v, budget)? {
                SeparationOutcome::Witness(w) => {
                    witnesses.insert(w.branch.current());
                }
                SeparationOutcome::Contained => {
                    return Err(LatticeError::Inconclusive(format!("{} reported below {}", l.names[a], l.names[b])))
                }
                SeparationOutcome::Inconclusive(why) => return Err(LatticeError::Inconclusive(why)),
            }
        }
    }
    let points: Vec<usize> = witnesses.into_iter().collect();
    Ok(Embedding {
        points: points.iter().map(|&w| format!("C({},-)", l.names[w])).collect(),
        sets: (0..l.len())
            .map(|a| points.iter().enumerate().filter(|(_, &w)| l.leq[w][a]).map(|(i, _)| i).collect())
            .collect(),
    })
}

/// All lattices with at most `max_n` elements up to isomorphism, by size and
/// then canonical order matrix.
pub fn catalogue(max_n: usize) -> Vec<FinLattice> {
    let mut out = Vec::new();
    if max_n >= 1 {
        out.push(FinLattice::from_order(vec!["0".into()], vec![vec![true]]).expect("one element"));
    }
    for n in 2..=max_n {
        let k = n - 2;
        let mut seen = BTreeSet::new();
        for middle in labeled_posets(k) {
            // bottom 0, middle 1..=k, top n-1
            let mut leq = vec![vec![false; n]; n];
            for i in 0..n {
                leq[0][i] = true;
                leq[i][n - 1] = true;
                leq[i][i] = true;
            }
            for i in 0..k {
                for j in 0..k {
                    leq[i + 1][j + 1] = middle[i][j];
                }
            }
            let canon = canonical(&leq);
            if !seen.insert(canon.clone()) {
                continue;
            }
            let names = lattice_names(n);
            if let Ok(l) = FinLattice::from_order(names, canon) {
                out.push(l);
            }
        }
    }
    out
}

fn lattice_names(n: usize) -> Vec<String> {
    let mut names = vec!["0".to_string()];
    names.extend((0..n - 2).map(|i| ((b'a' + i as u8) as char).to_string()));
    names.push("1".into());
    names
}

/// Partial orders on `0..k`, as relation matrices.
fn labeled_posets(k: usize) -> Vec<Vec<Vec<bool>>> {
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let mut r = vec![vec![false; k]; k];
        for (i, row) in r.iter_mut().enumerate() {
            row[i] = true;
        }
        for (bit, &(i, j)) in pairs.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                r[i][j] = true;
            }
        }
        let antisym = (0..k).all(|i| (0..k).all(|j| i == j || !(r[i][j] && r[j][i])));
        let trans = (0..k).all(|i| (0..k).all(|j| (0..k).all(|l| !(r[i][j] && r[j][l]) || r[i][l])));
        if antisym && trans {
            out.push(r);
        }
    }
    out
}

/// The lexicographically least relation matrix over relabelings of the
/// middle elements that keep a linear extension (i < j whenever i < j in the
/// order), so that ids ascend along the order.
fn canonical(leq: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = leq.len();
    let middle: Vec<usize> = (1..n - 1).collect();
    let mut best: Option<Vec<Vec<bool>>> = None;
    permute(&middle, &mut Vec::new(), &mut |perm| {
        // perm[i] is the new label of middle element i + 1
        let mut map = vec![0; n];
        map[n - 1] = n - 1;
        for (i, &p) in perm.iter().enumerate() {
            map[i + 1] = p;
        }
        let mut r = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                r[map[i]][map[j]] = leq[i][j];
            }
        }
        let linear = (0..n).all(|i| (0..n).all(|j| !r[i][j] || i <= j));
        if linear && best.as_ref().is_none_or(|b| r < *b) {
            best = Some(r);
        }
    });
    best.expect("some relabeling is a linear extension")
}

fn permute(items: &[usize], prefix: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if prefix.len() == items.len() {
        visit(prefix);
        return;
    }
    for &x in items {
        if !prefix.contains(&x) {
            prefix.push(x);
            permute(items, prefix, visit);
            prefix.pop();
        }
    }
}
