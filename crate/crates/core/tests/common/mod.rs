//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the library's own limit, sieve, sheaf or enumeration code.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use finsite::fincat::{FinCategory, MorId, NatTrans, ObjId, SetFunctor, Variance};
use finsite::format::{parse_file, SiteFile};
use finsite::site::Family;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn load(name: &str) -> SiteFile {
    parse_file(&fixture_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Every shipped `.site` and `.lattice` file, by name.
pub fn all_fixtures() -> Vec<(String, SiteFile)> {
    let mut names: Vec<String> = std::fs::read_dir(fixture_dir())
        .expect("fixture directory")
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".site") || n.ends_with(".lattice"))
        .collect();
    names.sort();
    names.into_iter().map(|n| (n.clone(), load(&n))).collect()
}

// ---------------------------------------------------------------- categories

pub fn composable(cat: &FinCategory, g: MorId, f: MorId) -> bool {
    cat.morphism(f).cod == cat.morphism(g).dom
}

/// Identity, endpoint and associativity laws read straight off the table.
pub fn category_laws_hold(cat: &FinCategory) -> bool {
    let ids = cat.identities();
    let m = cat.num_morphisms();
    let table = cat.comp_table();
    let c = |g: MorId, f: MorId| table[g * m + f];
    for (x, &i) in ids.iter().enumerate() {
        if cat.morphism(i).dom != x || cat.morphism(i).cod != x {
            return false;
        }
    }
    for f in 0..m {
        let (d, e) = (cat.morphism(f).dom, cat.morphism(f).cod);
        if c(ids[e], f) != Some(f) || c(f, ids[d]) != Some(f) {
            return false;
        }
        for g in 0..m {
            match c(g, f) {
                Some(h) if composable(cat, g, f) => {
                    if cat.morphism(h).dom != d || cat.morphism(h).cod != cat.morphism(g).cod {
                        return false;
                    }
                    for k in 0..m {
                        if composable(cat, k, g) && c(k, h) != c(k, g).and_then(|kg| c(kg, f)) {
                            return false;
                        }
                    }
                }
                None if !composable(cat, g, f) => {}
                _ => return false,
            }
        }
    }
    true
}

pub fn arrows_between(cat: &FinCategory, x: ObjId, y: ObjId) -> Vec<MorId> {
    (0..cat.num_morphisms()).filter(|&f| cat.morphism(f).dom == x && cat.morphism(f).cod == y).collect()
}

pub fn arrows_into(cat: &FinCategory, y: ObjId) -> Vec<MorId> {
    (0..cat.num_morphisms()).filter(|&f| cat.morphism(f).cod == y).collect()
}

pub fn oracle_mono(cat: &FinCategory, f: MorId) -> bool {
    let d = cat.morphism(f).dom;
    let into = arrows_into(cat, d);
    into.iter().all(|&g| {
        into.iter().all(|&h| cat.morphism(g).dom != cat.morphism(h).dom || g == h || cat.comp(f, g) != cat.comp(f, h))
    })
}

pub fn oracle_factors(cat: &FinCategory, u: MorId, v: MorId) -> bool {
    arrows_between(cat, cat.morphism(u).dom, cat.morphism(v).dom).iter().any(|&h| cat.comp(v, h) == u)
}

pub fn oracle_terminal(cat: &FinCategory) -> Option<ObjId> {
    (0..cat.num_objects()).find(|&t| (0..cat.num_objects()).all(|x| arrows_between(cat, x, t).len() == 1))
}

/// `(apex, to dom f, to dom g)` by scanning every commuting square.
pub fn oracle_pullback(cat: &FinCategory, f: MorId, g: MorId) -> Option<(ObjId, MorId, MorId)> {
    let (x, y) = (cat.morphism(f).dom, cat.morphism(g).dom);
    let cones: Vec<(ObjId, MorId, MorId)> = (0..cat.num_objects())
        .flat_map(|p| {
            let ax = arrows_between(cat, p, x);
            let ay = arrows_between(cat, p, y);
            ax.into_iter().flat_map(move |a| ay.clone().into_iter().map(move |b| (p, a, b))).collect::<Vec<_>>()
        })
        .filter(|&(_, a, b)| cat.comp(f, a) == cat.comp(g, b))
        .collect();
    cones.iter().copied().find(|&(p, a, b)| {
        cones.iter().all(|&(q, c, d)| {
            arrows_between(cat, q, p).iter().filter(|&&h| cat.comp(a, h) == c && cat.comp(b, h) == d).count() == 1
        })
    })
}

// ---------------------------------------------------------------- functors

/// Source and target of the action of `f`.
pub fn ends(cat: &FinCategory, variance: Variance, f: MorId) -> (ObjId, ObjId) {
    match variance {
        Variance::Covariant => (cat.morphism(f).dom, cat.morphism(f).cod),
        Variance::Contravariant => (cat.morphism(f).cod, cat.morphism(f).dom),
    }
}

/// Laws of a set-valued functor straight from its tables.
pub fn functor_laws_hold(cat: &FinCategory, p: &SetFunctor) -> bool {
    let m = cat.num_morphisms();
    let src = |f: MorId| ends(cat, p.variance, f).0;
    let tgt = |f: MorId| ends(cat, p.variance, f).1;
    if p.carriers.len() != cat.num_objects() || p.actions.len() != m {
        return false;
    }
    for f in 0..m {
        if p.actions[f].len() != p.carriers[src(f)] || p.actions[f].iter().any(|&v| v >= p.carriers[tgt(f)]) {
            return false;
        }
    }
    for (x, &i) in cat.identities().iter().enumerate() {
        if p.actions[i] != (0..p.carriers[x]).collect::<Vec<_>>() {
            return false;
        }
    }
    for f in 0..m {
        for g in 0..m {
            if !composable(cat, g, f) {
                continue;
            }
            let h = cat.comp(g, f);
            let ok = (0..p.carriers[src(h)]).all(|e| match p.variance {
                Variance::Covariant => p.actions[h][e] == p.actions[g][p.actions[f][e]],
                Variance::Contravariant => p.actions[h][e] == p.actions[f][p.actions[g][e]],
            });
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Every functor with carriers at most `max`, by trying every table.
pub fn slow_functors(cat: &FinCategory, variance: Variance, max: usize) -> Vec<SetFunctor> {
    let n = cat.num_objects();
    let m = cat.num_morphisms();
    let nonid: Vec<MorId> = (0..m).filter(|f| !cat.identities().contains(f)).collect();
    let mut out = Vec::new();
    let mut carriers = vec![0; n];
    loop {
        let ends = |f: MorId| ends(cat, variance, f);
        let mut tables: Vec<Vec<usize>> = nonid.iter().map(|&f| vec![0; carriers[ends(f).0]]).collect();
        let feasible = nonid.iter().all(|&f| carriers[ends(f).0] == 0 || carriers[ends(f).1] > 0);
        if feasible {
            loop {
                let mut actions: Vec<Vec<usize>> = (0..m).map(|f| (0..carriers[ends(f).0]).collect()).collect();
                for (k, &f) in nonid.iter().enumerate() {
                    actions[f] = tables[k].clone();
                }
                let p = SetFunctor { variance, carriers: carriers.clone(), actions };
                if functor_laws_hold(cat, &p) {
                    out.push(p);
                }
                // odometer over all tables
                let mut advanced = false;
                'outer: for k in (0..nonid.len()).rev() {
                    let width = carriers[ends(nonid[k]).1];
                    for i in (0..tables[k].len()).rev() {
                        if tables[k][i] + 1 < width {
                            tables[k][i] += 1;
                            for v in &mut tables[k][i + 1..] {
                                *v = 0;
                            }
                            for t in &mut tables[k + 1..] {
                                t.iter_mut().for_each(|v| *v = 0);
                            }
                            advanced = true;
                            break 'outer;
                        }
                    }
                }
                if !advanced {
                    break;
                }
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                out.sort();
                return out;
            }
            i -= 1;
            if carriers[i] < max {
                carriers[i] += 1;
                for c in &mut carriers[i + 1..] {
                    *c = 0;
                }
                break;
            }
        }
    }
}

pub fn oracle_is_lex(cat: &FinCategory, m: &SetFunctor) -> bool {
    if let Some(t) = oracle_terminal(cat) {
        if m.carriers[t] != 1 {
            return false;
        }
    }
    for f in 0..cat.num_morphisms() {
        for g in 0..cat.num_morphisms() {
            if cat.morphism(f).cod != cat.morphism(g).cod {
                continue;
            }
            let Some((p, a, b)) = oracle_pullback(cat, f, g) else { continue };
            let (x, y) = (cat.morphism(f).dom, cat.morphism(g).dom);
            let mut pairs = Vec::new();
            for s in 0..m.carriers[x] {
                for t in 0..m.carriers[y] {
                    if m.actions[f][s] == m.actions[g][t] {
                        pairs.push((s, t));
                    }
                }
            }
            let mut image: Vec<(usize, usize)> =
                (0..m.carriers[p]).map(|e| (m.actions[a][e], m.actions[b][e])).collect();
            image.sort_unstable();
            let before = image.len();
            image.dedup();
            if image.len() != before || image.len() != pairs.len() {
                return false;
            }
        }
    }
    true
}

/// Each cover is sent to a jointly surjective family; empty covers to empty
/// sets when `empty_too` is set.
pub fn oracle_preserves(covers: &[Family], m: &SetFunctor, empty_too: bool) -> bool {
    covers.iter().filter(|f| empty_too || !f.legs.is_empty()).all(|fam| {
        (0..m.carriers[fam.codomain]).all(|b| fam.legs.iter().any(|&l| m.actions[l].contains(&b)))
            && !(fam.legs.is_empty() && m.carriers[fam.codomain] > 0)
    })
}

pub fn oracle_nats(cat: &FinCategory, s: &SetFunctor, t: &SetFunctor) -> Vec<NatTrans> {
    let n = cat.num_objects();
    let mut comps: Vec<Vec<usize>> = (0..n).map(|x| vec![0; s.carriers[x]]).collect();
    if (0..n).any(|x| s.carriers[x] > 0 && t.carriers[x] == 0) {
        return Vec::new();
    }
    let mut out = Vec::new();
    loop {
        let alpha = NatTrans { components: comps.clone() };
        let natural = (0..cat.num_morphisms()).all(|f| {
            let (src, tgt_obj) = ends(cat, s.variance, f);
            (0..s.carriers[src])
                .all(|e| alpha.components[tgt_obj][s.actions[f][e]] == t.actions[f][alpha.components[src][e]])
        });
        if natural {
            out.push(alpha);
        }
        let mut advanced = false;
        'outer: for x in (0..n).rev() {
            for i in (0..comps[x].len()).rev() {
                if comps[x][i] + 1 < t.carriers[x] {
                    comps[x][i] += 1;
                    for v in &mut comps[x][i + 1..] {
                        *v = 0;
                    }
                    for c in &mut comps[x + 1..] {
                        c.iter_mut().for_each(|v| *v = 0);
                    }
                    advanced = true;
                    break 'outer;
                }
            }
        }
        if !advanced {
            return out;
        }
    }
}

/// `second ∘ first`, componentwise.
pub fn compose_nat(second: &NatTrans, first: &NatTrans) -> NatTrans {
    NatTrans {
        components: first
            .components
            .iter()
            .zip(&second.components)
            .map(|(f, s)| f.iter().map(|&e| s[e]).collect())
            .collect(),
    }
}

/// Every subfunctor as per-object element subsets, by scanning subsets of
/// the elements.
pub fn oracle_subfunctors(cat: &FinCategory, p: &SetFunctor) -> Vec<Vec<Vec<usize>>> {
    let elements: Vec<(ObjId, usize)> =
        (0..cat.num_objects()).flat_map(|x| (0..p.carriers[x]).map(move |e| (x, e))).collect();
    assert!(elements.len() <= 20, "too many elements for a subset scan");
    let mut out = Vec::new();
    for mask in 0u32..(1 << elements.len()) {
        let member = |x: ObjId, e: usize| {
            let i = elements.iter().position(|&q| q == (x, e)).expect("element");
            mask & (1 << i) != 0
        };
        let closed = (0..cat.num_morphisms()).all(|f| {
            let (s, t) = ends(cat, p.variance, f);
            (0..p.carriers[s]).all(|e| !member(s, e) || member(t, p.actions[f][e]))
        });
        if closed {
            out.push((0..cat.num_objects()).map(|x| (0..p.carriers[x]).filter(|&e| member(x, e)).collect()).collect());
        }
    }
    out
}

/// The subfunctor on `subsets` with its inclusion.
pub fn restrict(cat: &FinCategory, p: &SetFunctor, subsets: &[Vec<usize>]) -> (SetFunctor, NatTrans) {
    let index = |x: ObjId, e: usize| subsets[x].iter().position(|&v| v == e).expect("closed subset");
    let actions = (0..cat.num_morphisms())
        .map(|f| {
            let (s, t) = ends(cat, p.variance, f);
            subsets[s].iter().map(|&e| index(t, p.actions[f][e])).collect()
        })
        .collect();
    let sub = SetFunctor { variance: p.variance, carriers: subsets.iter().map(Vec::len).collect(), actions };
    (sub, NatTrans { components: subsets.to_vec() })
}

// ---------------------------------------------------------------- topology

/// Sieves on every object and which of them cover, from the covers by
/// closing under maximality, pullback, supersets and local character.
pub struct OracleTopology {
    pub sieves: Vec<Vec<BTreeSet<MorId>>>,
    pub covering: Vec<Vec<bool>>,
}

impl OracleTopology {
    pub fn new(cat: &FinCategory, covers: &[Family]) -> Self {
        let n = cat.num_objects();
        let sieves: Vec<Vec<BTreeSet<MorId>>> = (0..n)
            .map(|x| {
                let into = arrows_into(cat, x);
                assert!(into.len() <= 16, "too many arrows for a sieve scan");
                (0u32..(1 << into.len()))
                    .map(|mask| {
                        into.iter()
                            .enumerate()
                            .filter(|(i, _)| mask & (1 << i) != 0)
                            .map(|(_, &f)| f)
                            .collect::<BTreeSet<_>>()
                    })
                    .filter(|s| {
                        s.iter().all(|&f| {
                            arrows_into(cat, cat.morphism(f).dom).iter().all(|&g| s.contains(&cat.comp(f, g)))
                        })
                    })
                    .collect()
            })
            .collect();
        let mut covering: Vec<Vec<bool>> = sieves.iter().map(|v| vec![false; v.len()]).collect();
        let find = |x: ObjId, s: &BTreeSet<MorId>| sieves[x].iter().position(|t| t == s).expect("a sieve");
        for x in 0..n {
            covering[x][find(x, &arrows_into(cat, x).into_iter().collect())] = true;
        }
        for fam in covers {
            let x = fam.codomain;
            let generated: BTreeSet<MorId> = arrows_into(cat, x)
                .into_iter()
                .filter(|&h| fam.legs.iter().any(|&l| oracle_factors(cat, h, l)))
                .collect();
            covering[x][find(x, &generated)] = true;
        }
        let pull = |h: MorId, s: &BTreeSet<MorId>| -> BTreeSet<MorId> {
            arrows_into(cat, cat.morphism(h).dom).into_iter().filter(|&k| s.contains(&cat.comp(h, k))).collect()
        };
        loop {
            let mut changed = false;
            for x in 0..n {
                for i in 0..sieves[x].len() {
                    if covering[x][i] {
                        continue;
                    }
                    let r = &sieves[x][i];
                    let superset = (0..sieves[x].len()).any(|j| covering[x][j] && sieves[x][j].is_subset(r));
                    let local = (0..sieves[x].len()).any(|j| {
                        covering[x][j]
                            && sieves[x][j].iter().all(|&f| {
                                let y = cat.morphism(f).dom;
                                covering[y][find(y, &pull(f, r))]
                            })
                    });
                    let pulled = (0..n).any(|z| {
                        arrows_between(cat, x, z)
                            .iter()
                            .any(|&h| (0..sieves[z].len()).any(|j| covering[z][j] && pull(h, &sieves[z][j]) == *r))
                    });
                    if superset || local || pulled {
                        covering[x][i] = true;
                        changed = true;
                    }
                }
            }
            if !changed {
                return OracleTopology { sieves, covering };
            }
        }
    }

    pub fn covers(&self, x: ObjId, s: &BTreeSet<MorId>) -> bool {
        let i = self.sieves[x].iter().position(|t| t == s).expect("a sieve");
        self.covering[x][i]
    }

    pub fn covering_sieves(&self, x: ObjId) -> impl Iterator<Item = &BTreeSet<MorId>> {
        self.sieves[x].iter().zip(&self.covering[x]).filter(|(_, &c)| c).map(|(s, _)| s)
    }
}

/// Every matching family over every covering sieve has exactly one
/// amalgamation.
pub fn oracle_is_sheaf(cat: &FinCategory, topo: &OracleTopology, p: &SetFunctor) -> bool {
    for x in 0..cat.num_objects() {
        for sieve in topo.covering_sieves(x) {
            let arrows: Vec<MorId> = sieve.iter().copied().collect();
            let mut assignment = vec![0usize; arrows.len()];
            let index: HashMap<MorId, usize> = arrows.iter().enumerate().map(|(i, &f)| (f, i)).collect();
            if arrows.iter().any(|&f| p.carriers[cat.morphism(f).dom] == 0) {
                // no matching families, and functoriality already empties P(x)
                continue;
            }
            loop {
                let matching = arrows.iter().enumerate().all(|(i, &f)| {
                    arrows_into(cat, cat.morphism(f).dom)
                        .into_iter()
                        .all(|g| p.actions[g][assignment[i]] == assignment[index[&cat.comp(f, g)]])
                });
                if matching {
                    let amalgamations = (0..p.carriers[x])
                        .filter(|&e| arrows.iter().enumerate().all(|(i, &f)| p.actions[f][e] == assignment[i]))
                        .count();
                    if amalgamations != 1 {
                        return false;
                    }
                }
                let mut advanced = false;
                for i in (0..arrows.len()).rev() {
                    if assignment[i] + 1 < p.carriers[cat.morphism(arrows[i]).dom] {
                        assignment[i] += 1;
                        for v in &mut assignment[i + 1..] {
                            *v = 0;
                        }
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    break;
                }
            }
        }
    }
    true
}

/// `F ⊗ M` class count and the class of each `(x, s, m)`, by repeatedly
/// merging labels until nothing changes.
pub fn oracle_tensor(cat: &FinCategory, m: &SetFunctor, f: &SetFunctor) -> HashMap<(ObjId, usize, usize), usize> {
    let mut label: HashMap<(ObjId, usize, usize), usize> = HashMap::new();
    for x in 0..cat.num_objects() {
        for s in 0..f.carriers[x] {
            for e in 0..m.carriers[x] {
                let next = label.len();
                label.insert((x, s, e), next);
            }
        }
    }
    loop {
        let mut changed = false;
        for g in 0..cat.num_morphisms() {
            let (x, y) = (cat.morphism(g).dom, cat.morphism(g).cod);
            for s in 0..f.carriers[y] {
                for e in 0..m.carriers[x] {
                    let a = label[&(x, f.actions[g][s], e)];
                    let b = label[&(y, s, m.actions[g][e])];
                    if a != b {
                        let (lo, hi) = (a.min(b), a.max(b));
                        for v in label.values_mut() {
                            if *v == hi {
                                *v = lo;
                            }
                        }
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return label;
        }
    }
}

pub fn class_count(label: &HashMap<(ObjId, usize, usize), usize>) -> usize {
    label.values().collect::<BTreeSet<_>>().len()
}
