//! Presheaves on a finite site: matching families, the plus construction,
//! sheafification, sheafified representables and the cover-factorization
//! results for maps between them.

use std::collections::HashMap;

use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::fincat::{check_nat, position, FinCategory, MorId, NatTrans, ObjId, SetFunctor, Variance};
use crate::site::{Family, Sieve, SieveTopology};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresheafError {
    #[error("FAILED: the given transformation is not natural")]
    NotNatural,
    #[error("the given transformation is not pointwise injective")]
    NotMono,
    #[error("the given presheaf is not a sheaf")]
    NotSheaf,
}

/// Compatible assignments `s_f ∈ P(dom f)` for `f` in the sieve, indexed by
/// the position of `f` in `sieve.arrows`, in lexicographic order.
pub fn matching_families(cat: &FinCategory, p: &SetFunctor, sieve: &Sieve) -> Vec<Vec<usize>> {
    let arrows = &sieve.arrows;
    let n = arrows.len();
    // (i, g, j) with arrows[i] ∘ g = arrows[j], checked at position max(i, j)
    let mut checks: Vec<Vec<(usize, MorId, usize)>> = vec![Vec::new(); n];
    for (i, &f) in arrows.iter().enumerate() {
        for g in cat.into_object(cat.dom(f)) {
            if cat.is_identity(g) {
                continue;
            }
            let j = position(arrows, cat.comp(f, g));
            checks[i.max(j)].push((i, g, j));
        }
    }
    let mut out = Vec::new();
    let mut assignment = Vec::with_capacity(n);
    match_rec(cat, p, arrows, &checks, &mut assignment, &mut out);
    out
}

fn match_rec(
    cat: &FinCategory,
    p: &SetFunctor,
    arrows: &[MorId],
    checks: &[Vec<(usize, MorId, usize)>],
    assignment: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let t = assignment.len();
    if t == arrows.len() {
        out.push(assignment.clone());
        return;
    }
    for v in 0..p.carriers[cat.dom(arrows[t])] {
        assignment.push(v);
        if checks[t].iter().all(|&(i, g, j)| p.apply(g, assignment[i]) == assignment[j]) {
            match_rec(cat, p, arrows, checks, assignment, out);
        }
        assignment.pop();
    }
}

/// `(P(f)(e))_f` for `f` in the sieve.
pub fn restrict_element(p: &SetFunctor, sieve: &Sieve, e: usize) -> Vec<usize> {
    sieve.arrows.iter().map(|&f| p.apply(f, e)).collect()
}

/// Restriction of a matching family on `sieve` to the sieve `h*sieve`.
fn pull_assignment(cat: &FinCategory, sieve: &Sieve, assignment: &[usize], h: MorId, pulled: &Sieve) -> Vec<usize> {
    pulled.arrows.iter().map(|&g| assignment[position(&sieve.arrows, cat.comp(h, g))]).collect()
}

/// Restriction to a smaller sieve `r ⊆ s`.
fn shrink_assignment(s: &Sieve, assignment: &[usize], r: &Sieve) -> Vec<usize> {
    r.arrows.iter().map(|&f| assignment[position(&s.arrows, f)]).collect()
}

/// `P⁺` with its unit, and the classification of every matching family.
#[derive(Debug, Clone)]
pub struct PlusConstruction {
    pub result: SetFunctor,
    pub unit: NatTrans,
    /// canonical representative (sieve index, assignment) per element
    pub representatives: Vec<Vec<(usize, Vec<usize>)>>,
    lookup: Vec<HashMap<(usize, Vec<usize>), usize>>,
}

impl PlusConstruction {
    /// The element of `P⁺(x)` represented by a matching family on the sieve
    /// with the given index in `topology.sieves[x]`.
    pub fn classify(&self, x: ObjId, sieve: usize, assignment: &[usize]) -> usize {
        self.lookup[x][&(sieve, assignment.to_vec())]
    }
}

pub fn plus(cat: &FinCategory, p: &SetFunctor, topology: &SieveTopology) -> PlusConstruction {
    assert_eq!(p.variance, Variance::Contravariant);
    let n = cat.num_objects();
    let mut representatives = Vec::with_capacity(n);
    let mut lookup = Vec::with_capacity(n);
    for x in cat.objects() {
        // nodes in (sieve order, assignment order), so the first node of each
        // class is its canonical representative
        let mut nodes: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut by_sieve: Vec<Option<Vec<Vec<usize>>>> = vec![None; topology.sieves[x].len()];
        for (si, s) in topology.sieves[x].iter().enumerate() {
            if topology.covering[x][si] {
                let ms = matching_families(cat, p, s);
                nodes.extend(ms.iter().map(|m| (si, m.clone())));
                by_sieve[si] = Some(ms);
            }
        }
        let index: HashMap<(usize, Vec<usize>), usize> =
            nodes.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        let mut uf = UnionFind::<usize>::new(nodes.len());
        for (si, s) in topology.sieves[x].iter().enumerate() {
            let Some(ms) = &by_sieve[si] else { continue };
            for (ri, r) in topology.sieves[x].iter().enumerate() {
                if ri == si || by_sieve[ri].is_none() || !r.is_subset(s) {
                    continue;
                }
                for m in ms {
                    let a = index[&(si, m.clone())];
                    let b = index[&(ri, shrink_assignment(s, m, r))];
                    uf.union(a, b);
                }
            }
        }
        let mut class_of_root: HashMap<usize, usize> = HashMap::new();
        let mut reps = Vec::new();
        let mut table = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.into_iter().enumerate() {
            let root = uf.find_mut(i);
            let class = *class_of_root.entry(root).or_insert_with(|| {
                reps.push(node.clone());
                reps.len() - 1
            });
            table.insert(node, class);
        }
        representatives.push(reps);
        lookup.push(table);
    }
    let carriers: Vec<usize> = representatives.iter().map(Vec::len).collect();
    let actions = cat
        .morphism_ids()
        .map(|h| {
            let (x, y) = (cat.cod(h), cat.dom(h));
            representatives[x]
                .iter()
                .map(|(si, m)| {
                    let s = &topology.sieves[x][*si];
                    let pulled = s.pullback(cat, h);
                    let assignment = pull_assignment(cat, s, m, h, &pulled);
                    lookup[y][&(topology.index_of(&pulled), assignment)]
                })
                .collect()
        })
        .collect();
    let result = SetFunctor { variance: Variance::Contravariant, carriers, actions };
    let unit = NatTrans {
        components: cat
            .objects()
            .map(|x| {
                let max = Sieve::maximal(cat, x);
                let mi = topology.index_of(&max);
                (0..p.carriers[x]).map(|e| lookup[x][&(mi, restrict_element(p, &max, e))]).collect()
            })
            .collect(),
    };
    PlusConstruction { result, unit, representatives, lookup }
}

/// `α⁺: P⁺ ⇒ Q⁺` sending `[S, m]` to `[S, α ∘ m]`.
pub fn plus_map(
    cat: &FinCategory,
    topology: &SieveTopology,
    source: &PlusConstruction,
    target: &PlusConstruction,
    alpha: &NatTrans,
) -> NatTrans {
    NatTrans {
        components: cat
            .objects()
            .map(|x| {
                source.representatives[x]
                    .iter()
                    .map(|(si, m)| {
                        let s = &topology.sieves[x][*si];
                        let image: Vec<usize> =
                            s.arrows.iter().zip(m).map(|(&f, &v)| alpha.components[cat.dom(f)][v]).collect();
                        target.classify(x, *si, &image)
                    })
                    .collect()
            })
            .collect(),
    }
}

/// `aP = (P⁺)⁺` together with both plus passes.
#[derive(Debug, Clone)]
pub struct Sheafification {
    pub first: PlusConstruction,
    pub second: PlusConstruction,
    /// `P ⇒ aP`
    pub unit: NatTrans,
}

impl Sheafification {
    pub fn sheaf(&self) -> &SetFunctor {
        &self.second.result
    }
}

pub fn sheafify(cat: &FinCategory, p: &SetFunctor, topology: &SieveTopology) -> Sheafification {
    let first = plus(cat, p, topology);
    let second = plus(cat, &first.result, topology);
    let unit = second.unit.after(&first.unit);
    Sheafification { first, second, unit }
}

/// `aα: aP ⇒ aQ`.
pub fn sheafify_map(
    cat: &FinCategory,
    topology: &SieveTopology,
    source: &Sheafification,
    target: &Sheafification,
    alpha: &NatTrans,
) -> NatTrans {
    let once = plus_map(cat, topology, &source.first, &target.first, alpha);
    plus_map(cat, topology, &source.second, &target.second, &once)
}

/// For every covering sieve, restriction `P(x) → Match(S, P)` is bijective.
pub fn is_sheaf(cat: &FinCategory, p: &SetFunctor, topology: &SieveTopology) -> bool {
    cat.objects().all(|x| topology.covering_sieves(x).all(|s| restriction_is_bijective(cat, p, s)))
}

fn restriction_is_bijective(cat: &FinCategory, p: &SetFunctor, s: &Sieve) -> bool {
    let matches = matching_families(cat, p, s);
    let mut images: Vec<Vec<usize>> = (0..p.carriers[s.target]).map(|e| restrict_element(p, s, e)).collect();
    images.sort();
    images.dedup();
    images.len() == p.carriers[s.target] && images.len() == matches.len()
}

/// Sheaf condition for each family directly: compatible tuples on the legs,
/// compatibility tested over every commuting square `l_i ∘ g = l_j ∘ h`.
pub fn is_sheaf_for_families(cat: &FinCategory, p: &SetFunctor, families: &[Family]) -> bool {
    families.iter().all(|fam| {
        let legs = &fam.legs;
        let mut squares = Vec::new();
        for (i, &li) in legs.iter().enumerate() {
            for (j, &lj) in legs.iter().enumerate().skip(i) {
                for w in cat.objects() {
                    for &g in cat.hom(w, cat.dom(li)) {
                        for &h in cat.hom(w, cat.dom(lj)) {
                            if cat.comp(li, g) == cat.comp(lj, h) {
                                squares.push((i, g, j, h));
                            }
                        }
                    }
                }
            }
        }
        let mut count = 0usize;
        let mut tuple = vec![0usize; legs.len()];
        let sizes: Vec<usize> = legs.iter().map(|&l| p.carriers[cat.dom(l)]).collect();
        if sizes.iter().all(|&k| k > 0) || legs.is_empty() {
            loop {
                if squares.iter().all(|&(i, g, j, h)| p.apply(g, tuple[i]) == p.apply(h, tuple[j])) {
                    count += 1;
                }
                if !next_tuple(&mut tuple, &sizes) {
                    break;
                }
            }
        }
        let mut images: Vec<Vec<usize>> =
            (0..p.carriers[fam.codomain]).map(|e| legs.iter().map(|&l| p.apply(l, e)).collect()).collect();
        images.sort();
        images.dedup();
        images.len() == p.carriers[fam.codomain] && images.len() == count
    })
}

fn next_tuple(tuple: &mut [usize], sizes: &[usize]) -> bool {
    for i in (0..tuple.len()).rev() {
        if tuple[i] + 1 < sizes[i] {
            tuple[i] += 1;
            for v in &mut tuple[i + 1..] {
                *v = 0;
            }
            return true;
        }
    }
    false
}

/// `a(y(x))` for every object `x`, computed once.
#[derive(Debug, Clone)]
pub struct AyTable {
    pub ay: Vec<Sheafification>,
}

impl AyTable {
    pub fn new(cat: &FinCategory, topology: &SieveTopology) -> Self {
        AyTable { ay: cat.objects().map(|x| ay(cat, topology, x)).collect() }
    }

    pub fn sheaf(&self, x: ObjId) -> &SetFunctor {
        self.ay[x].sheaf()
    }

    /// `η(h)`: the image in `ay(cod h)(dom h)` of the arrow `h`.
    pub fn eta(&self, cat: &FinCategory, h: MorId) -> usize {
        let (u, x) = (cat.dom(h), cat.cod(h));
        self.ay[x].unit.components[u][position(cat.hom(u, x), h)]
    }

    /// `a(f_*): ay(dom f) ⇒ ay(cod f)`.
    pub fn map(&self, cat: &FinCategory, topology: &SieveTopology, f: MorId) -> NatTrans {
        let (x, y) = (cat.dom(f), cat.cod(f));
        sheafify_map(cat, topology, &self.ay[x], &self.ay[y], &yoneda_map(cat, f))
    }
}

pub fn ay(cat: &FinCategory, topology: &SieveTopology, x: ObjId) -> Sheafification {
    sheafify(cat, &SetFunctor::representable(cat, x), topology)
}

/// Postcomposition `f_*: y(dom f) ⇒ y(cod f)`.
pub fn yoneda_map(cat: &FinCategory, f: MorId) -> NatTrans {
    let (x, y) = (cat.dom(f), cat.cod(f));
    NatTrans {
        components: cat
            .objects()
            .map(|u| cat.hom(u, x).iter().map(|&g| position(cat.hom(u, y), cat.comp(f, g))).collect())
            .collect(),
    }
}

/// The map `y(u) ⇒ P` picking `e ∈ P(u)`.
pub fn yoneda_element(cat: &FinCategory, p: &SetFunctor, u: ObjId, e: usize) -> NatTrans {
    NatTrans { components: cat.objects().map(|v| cat.hom(v, u).iter().map(|&h| p.apply(h, e)).collect()).collect() }
}

/// Whether the images of `legs` (maps into `g`) jointly cover `g` locally:
/// every element restricts into their union along a covering sieve.
pub fn extremal_epi_in_sh(cat: &FinCategory, topology: &SieveTopology, legs: &[&NatTrans], g: &SetFunctor) -> bool {
    let mut hit: Vec<Vec<bool>> = g.carriers.iter().map(|&n| vec![false; n]).collect();
    for leg in legs {
        for (x, comp) in leg.components.iter().enumerate() {
            for &e in comp {
                hit[x][e] = true;
            }
        }
    }
    covered_locally(cat, topology, g, &hit)
}

fn covered_locally(cat: &FinCategory, topology: &SieveTopology, g: &SetFunctor, hit: &[Vec<bool>]) -> bool {
    cat.objects().all(|x| {
        (0..g.carriers[x]).all(|s| {
            let arrows = cat.into_object(x).into_iter().filter(|&f| hit[cat.dom(f)][g.apply(f, s)]).collect();
            topology.covers(&Sieve { target: x, arrows })
        })
    })
}

/// A covering family on `x` with arrows `g_i: dom f_i -> x'` such that
/// `α ∘ a(f_i*) = a(g_i*)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverFactorization {
    pub family: Family,
    /// `(f_i, g_i)` per leg
    pub legs: Vec<(MorId, MorId)>,
}

/// Factors `α: ay(x) ⇒ ay(x')` through a cover of `x` by sheafified
/// postcompositions.
pub fn factor_through_cover(
    cat: &FinCategory,
    table: &AyTable,
    x: ObjId,
    x2: ObjId,
    alpha: &NatTrans,
) -> Result<CoverFactorization, PresheafError> {
    if !check_nat(cat, table.sheaf(x), table.sheaf(x2), alpha).unwrap_or(false) {
        return Err(PresheafError::NotNatural);
    }
    let lift = |h: MorId| -> Option<MorId> {
        let u = cat.dom(h);
        let target = alpha.components[u][table.eta(cat, h)];
        cat.hom(u, x2).iter().copied().find(|&g| table.eta(cat, g) == target)
    };
    let working: Vec<(MorId, MorId)> = cat.into_object(x).into_iter().filter_map(|h| lift(h).map(|g| (h, g))).collect();
    if let Some(&(_, g)) = working.iter().find(|(h, _)| *h == cat.id(x)) {
        let family = Family::identity(cat, x);
        return Ok(CoverFactorization { family, legs: vec![(cat.id(x), g)] });
    }
    let generators: Vec<(MorId, MorId)> = working
        .iter()
        .copied()
        .filter(|&(h, _)| {
            !working.iter().any(|&(k, _)| {
                k != h && cat.hom(cat.dom(h), cat.dom(k)).iter().any(|&m| !cat.is_iso(m) && cat.comp(k, m) == h)
            })
        })
        .collect();
    let w_sieve: Vec<MorId> = working.iter().map(|&(h, _)| h).collect();
    let gen_legs: Vec<MorId> = generators.iter().map(|&(h, _)| h).collect();
    let generated = Sieve::generated(cat, x, &gen_legs);
    let legs = if generated.arrows == w_sieve { generators } else { working };
    let family = Family { codomain: x, legs: legs.iter().map(|&(h, _)| h).collect() };
    Ok(CoverFactorization { family, legs })
}

/// Checks `α ∘ a(f_i*) = a(g_i*)` per leg, table for table, and that the
/// family covers.
pub fn verify_factorization(
    cat: &FinCategory,
    topology: &SieveTopology,
    table: &AyTable,
    alpha: &NatTrans,
    result: &CoverFactorization,
) -> bool {
    topology.covers(&result.family.sieve(cat))
        && result.legs.iter().all(|&(f, g)| alpha.after(&table.map(cat, topology, f)) == table.map(cat, topology, g))
}

/// One piece of a cover of a subsheaf of `ay(x)` by sheafified representables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepresentableCover {
    pub object: ObjId,
    /// `β: ay(object) ⇒ F`
    pub beta: NatTrans,
    /// `g: object -> x` with `ι ∘ β = a(g_*)`
    pub arrow: MorId,
}

/// Covers the subsheaf `ι: F ⇒ ay(x)` by sheafified representables.
pub fn cover_mono_by_representables(
    cat: &FinCategory,
    topology: &SieveTopology,
    table: &AyTable,
    f: &SetFunctor,
    x: ObjId,
    iota: &NatTrans,
) -> Result<Vec<RepresentableCover>, PresheafError> {
    if !check_nat(cat, f, table.sheaf(x), iota).unwrap_or(false) {
        return Err(PresheafError::NotNatural);
    }
    if !iota.is_pointwise_injective() {
        return Err(PresheafError::NotMono);
    }
    if !is_sheaf(cat, f, topology) {
        return Err(PresheafError::NotSheaf);
    }
    let af = sheafify(cat, f, topology);
    // F is a sheaf, so its unit is invertible
    let unit_inverse: Vec<Vec<usize>> = af
        .unit
        .components
        .iter()
        .zip(&af.sheaf().carriers)
        .map(|(c, &n)| {
            let mut inv = vec![0; n];
            for (e, &v) in c.iter().enumerate() {
                inv[v] = e;
            }
            inv
        })
        .collect();
    let unit_inverse = NatTrans { components: unit_inverse };
    let generated = |u: ObjId, s: usize| -> Vec<(ObjId, usize)> {
        let mut out: Vec<(ObjId, usize)> =
            cat.into_object(u).into_iter().map(|h| (cat.dom(h), f.apply(h, s))).collect();
        out.sort_unstable();
        out.dedup();
        out
    };
    let mut hit: Vec<Vec<bool>> = f.carriers.iter().map(|&n| vec![false; n]).collect();
    let mut chosen: Vec<(ObjId, usize)> = Vec::new();
    while !covered_locally(cat, topology, f, &hit) {
        let best = f
            .elements()
            .into_iter()
            .max_by_key(|&(u, s)| {
                let gain = generated(u, s).iter().filter(|&&(v, t)| !hit[v][t]).count();
                (gain, std::cmp::Reverse((u, s)))
            })
            .expect("an uncovered element exists");
        for (v, t) in generated(best.0, best.1) {
            hit[v][t] = true;
        }
        chosen.push(best);
    }
    let mut out = Vec::new();
    for (u, s) in chosen {
        let y_beta = yoneda_element(cat, f, u, s);
        let beta = unit_inverse.after(&sheafify_map(cat, topology, &table.ay[u], &af, &y_beta));
        let fac = factor_through_cover(cat, table, u, x, &iota.after(&beta))?;
        for (leg, g) in fac.legs {
            out.push(RepresentableCover {
                object: cat.dom(leg),
                beta: beta.after(&table.map(cat, topology, leg)),
                arrow: g,
            });
        }
    }
    Ok(out)
}

/// Every subpresheaf of `p` as per-object subsets closed under the action.
pub fn subpresheaves(cat: &FinCategory, p: &SetFunctor) -> Vec<Vec<Vec<usize>>> {
    let elements = p.elements();
    let index: HashMap<(ObjId, usize), usize> = elements.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let closure: Vec<Vec<usize>> = elements
        .iter()
        .map(|&(u, s)| cat.into_object(u).into_iter().map(|h| index[&(cat.dom(h), p.apply(h, s))]).collect())
        .collect();
    let mut seen = std::collections::BTreeSet::new();
    let mut stack = vec![vec![false; elements.len()]];
    seen.insert(stack[0].clone());
    while let Some(sub) = stack.pop() {
        for i in 0..elements.len() {
            if sub[i] {
                continue;
            }
            let mut next = sub.clone();
            for &j in &closure[i] {
                next[j] = true;
            }
            if seen.insert(next.clone()) {
                stack.push(next);
            }
        }
    }
    seen.into_iter()
        .map(|mask| {
            let mut subsets = vec![Vec::new(); p.carriers.len()];
            for (i, &(x, e)) in elements.iter().enumerate() {
                if mask[i] {
                    subsets[x].push(e);
                }
            }
            subsets
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::site::SiteSpec;

    fn poset(names: &[&str], rel: &[(usize, usize)]) -> FinCategory {
        let n = names.len();
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(i, j) in rel {
            leq[i][j] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if leq[i][k] && leq[k][j] {
                        leq[i][j] = true;
                    }
                }
            }
        }
        FinCategory::from_order(names.iter().map(|s| s.to_string()).collect(), &leq).unwrap()
    }

    fn diamond() -> SiteSpec {
        let c = poset(&["0", "a", "b", "1"], &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        let cover = Family::new(&c, 3, [c.hom(1, 3)[0], c.hom(2, 3)[0]]).unwrap();
        SiteSpec::new(c, vec![cover]).unwrap()
    }

    fn subterminal(c: &FinCategory, present: &[bool]) -> SetFunctor {
        SetFunctor {
            variance: Variance::Contravariant,
            carriers: present.iter().map(|&b| b as usize).collect(),
            actions: c.morphism_ids().map(|f| if present[c.cod(f)] { vec![0] } else { vec![] }).collect(),
        }
    }

    #[test]
    fn plus_glues_missing_top_section() {
        let s = diamond();
        let t = s.topology();
        let p = subterminal(&s.base, &[true, true, true, false]);
        assert!(!is_sheaf(&s.base, &p, &t));
        let pp = plus(&s.base, &p, &t);
        assert_eq!(pp.result.carriers, vec![1, 1, 1, 1]);
        let a = sheafify(&s.base, &p, &t);
        assert_eq!(a.sheaf().carriers[3], 1);
        assert!(is_sheaf(&s.base, a.sheaf(), &t));
    }

    #[test]
    fn empty_presheaf_plus() {
        let c = poset(&["0", "m", "1"], &[(0, 1), (1, 2)]);
        let s = SiteSpec::new(c, vec![Family { codomain: 0, legs: vec![] }]).unwrap();
        let t = s.topology();
        let e = SetFunctor::empty(&s.base, Variance::Contravariant);
        assert_eq!(plus(&s.base, &e, &t).result.carriers, vec![1, 0, 0]);
        let ay0 = ay(&s.base, &t, 0);
        assert_eq!(ay0.sheaf().carriers, vec![1, 0, 0]);
    }

    #[test]
    fn representables_on_diamond_are_sheaves() {
        let s = diamond();
        let t = s.topology();
        for x in s.base.objects() {
            let y = SetFunctor::representable(&s.base, x);
            assert!(is_sheaf(&s.base, &y, &t));
            let a = ay(&s.base, &t, x);
            assert!(a.unit.is_pointwise_bijective(a.sheaf()));
        }
    }

    #[test]
    fn discrepancy_presheaf_is_not_separated() {
        let s = diamond();
        let t = s.topology();
        let mut p = subterminal(&s.base, &[true, true, true, true]);
        p.carriers[3] = 2;
        for f in s.base.morphism_ids() {
            if s.base.cod(f) == 3 {
                p.actions[f] = if s.base.dom(f) == 3 { vec![0, 1] } else { vec![0, 0] };
            }
        }
        assert!(p.is_functor(&s.base));
        assert!(!is_sheaf(&s.base, &p, &t));
        let trivial =
            SieveTopology::from_predicate(&s.base, |sv| sv.arrows.len() == s.base.into_object(sv.target).len());
        assert!(is_sheaf(&s.base, &p, &trivial));
    }

    #[test]
    fn ay_preserves_the_cover() {
        let s = diamond();
        let t = s.topology();
        let table = AyTable::new(&s.base, &t);
        let (a1, b1) = (s.base.hom(1, 3)[0], s.base.hom(2, 3)[0]);
        let (ma, mb) = (table.map(&s.base, &t, a1), table.map(&s.base, &t, b1));
        assert!(extremal_epi_in_sh(&s.base, &t, &[&ma, &mb], table.sheaf(3)));
        assert!(!extremal_epi_in_sh(&s.base, &t, &[&ma], table.sheaf(3)));
        let id = NatTrans::identity(table.sheaf(2));
        assert!(extremal_epi_in_sh(&s.base, &t, &[&id], table.sheaf(2)));
    }

    #[test]
    fn factor_a_into_top() {
        let s = diamond();
        let (c, t) = (&s.base, s.topology());
        let table = AyTable::new(c, &t);
        let alphas = crate::fincat::enumerate_nat(c, table.sheaf(1), table.sheaf(3));
        assert_eq!(alphas.len(), 1);
        let fac = factor_through_cover(c, &table, 1, 3, &alphas[0]).unwrap();
        assert_eq!(fac.legs, vec![(c.id(1), c.hom(1, 3)[0])]);
        assert!(verify_factorization(c, &t, &table, &alphas[0], &fac));
    }

    #[test]
    fn identity_mono_is_one_piece() {
        let s = diamond();
        let (c, t) = (&s.base, s.topology());
        let table = AyTable::new(c, &t);
        let id = NatTrans::identity(table.sheaf(3));
        let cover = cover_mono_by_representables(c, &t, &table, table.sheaf(3), 3, &id).unwrap();
        assert_eq!(cover.len(), 1);
        assert_eq!((cover[0].object, cover[0].arrow), (3, c.id(3)));
        let empty = SetFunctor::empty(c, Variance::Contravariant);
        let none = NatTrans { components: vec![vec![]; 4] };
        assert!(cover_mono_by_representables(c, &t, &table, &empty, 3, &none).unwrap().is_empty());
    }

    #[test]
    fn subpresheaves_of_top_representable() {
        let s = diamond();
        let y1 = SetFunctor::representable(&s.base, 3);
        // down-sets of the diamond
        assert_eq!(subpresheaves(&s.base, &y1).len(), 6);
    }
}
