//! Sites, covering families, sieves and the Grothendieck topology a family
//! set generates.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::fincat::{CategoryError, FinCategory, FunctorData, MorId, ObjId};
use crate::limits::{self, Diagram};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SiteError {
    #[error(transparent)]
    Category(#[from] CategoryError),
    #[error("MISSING_PULLBACK: no pullback of {0} along {1}")]
    MissingPullback(String, String),
    #[error("family leg {leg} does not have codomain {codomain}")]
    BadLeg { codomain: String, leg: String },
}

/// A set of arrows with a common codomain, legs sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Family {
    pub codomain: ObjId,
    pub legs: Vec<MorId>,
}

impl Family {
    pub fn new(cat: &FinCategory, codomain: ObjId, legs: impl IntoIterator<Item = MorId>) -> Result<Self, SiteError> {
        cat.check_object(codomain)?;
        let mut legs: Vec<MorId> = legs.into_iter().collect();
        for &l in &legs {
            cat.check_morphism(l)?;
            if cat.cod(l) != codomain {
                return Err(SiteError::BadLeg {
                    codomain: cat.object_name(codomain).to_string(),
                    leg: cat.morphism_name(l).to_string(),
                });
            }
        }
        legs.sort_unstable();
        legs.dedup();
        Ok(Family { codomain, legs })
    }

    fn from_sorted(codomain: ObjId, mut legs: Vec<MorId>) -> Self {
        legs.sort_unstable();
        legs.dedup();
        Family { codomain, legs }
    }

    pub fn identity(cat: &FinCategory, x: ObjId) -> Self {
        Family { codomain: x, legs: vec![cat.id(x)] }
    }

    pub fn is_empty(&self) -> bool {
        self.legs.is_empty()
    }

    /// The sieve of all composites `leg ∘ g`.
    pub fn sieve(&self, cat: &FinCategory) -> Sieve {
        Sieve::generated(cat, self.codomain, &self.legs)
    }

    /// Pullback of every leg along `h`: the family of left projections on `dom h`.
    pub fn pullback_along(&self, cat: &FinCategory, h: MorId) -> Result<Family, SiteError> {
        let mut legs = Vec::with_capacity(self.legs.len());
        for &l in &self.legs {
            match limits::pullback(cat, h, l).expect("common codomain") {
                Some(sq) => legs.push(sq.left),
                None => {
                    return Err(SiteError::MissingPullback(
                        cat.morphism_name(l).to_string(),
                        cat.morphism_name(h).to_string(),
                    ))
                }
            }
        }
        Ok(Family::from_sorted(cat.dom(h), legs))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteSpec {
    pub base: FinCategory,
    pub covers: Vec<Family>,
}

impl SiteSpec {
    /// Validates the base and adds the identity family on the terminal object
    /// when it is not already listed.
    pub fn new(base: FinCategory, covers: Vec<Family>) -> Result<Self, SiteError> {
        let violations = base.validate();
        if !violations.is_empty() {
            return Err(CategoryError::Invalid(violations).into());
        }
        let mut covers = covers;
        if let Some(t) = base.terminal() {
            covers.push(Family::identity(&base, t));
        }
        let covers: BTreeSet<Family> = covers.into_iter().collect();
        Ok(SiteSpec { base, covers: covers.into_iter().collect() })
    }

    /// The covers exactly as given, without the terminal identity family.
    pub fn with_covers_unchecked(base: FinCategory, covers: Vec<Family>) -> Self {
        SiteSpec { base, covers }
    }

    /// Nonempty covers, the families the chase schedules.
    pub fn nonempty_covers(&self) -> impl Iterator<Item = &Family> {
        self.covers.iter().filter(|f| !f.is_empty())
    }

    pub fn covers_on(&self, x: ObjId) -> impl Iterator<Item = &Family> {
        self.covers.iter().filter(move |f| f.codomain == x)
    }

    pub fn topology(&self) -> SieveTopology {
        generate_sieve_topology(self)
    }
}

/// All pullbacks of covering families along arrows into their codomains.
pub fn pullback_closure(site: &SiteSpec) -> Result<Vec<Family>, SiteError> {
    let cat = &site.base;
    let mut out = BTreeSet::new();
    for fam in &site.covers {
        for h in cat.into_object(fam.codomain) {
            out.insert(fam.pullback_along(cat, h)?);
        }
    }
    Ok(out.into_iter().collect())
}

/// Whether every pullback of every cover is still extremal epimorphic.
pub fn is_pullback_stable(site: &SiteSpec) -> Result<bool, SiteError> {
    for fam in pullback_closure(site)? {
        if !limits::is_extremal_epi_family(&site.base, fam.codomain, &fam.legs).expect("common codomain") {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Result of the pasting fixpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Saturation {
    pub families: Vec<Family>,
    pub rounds: usize,
}

impl Saturation {
    pub fn contains(&self, fam: &Family) -> bool {
        self.families.binary_search(fam).is_ok()
    }
}

/// Replace leg `l` of `fam` by the composites with `inner`, a family on `dom l`.
pub fn paste(cat: &FinCategory, fam: &Family, l: MorId, inner: &Family) -> Family {
    let mut legs: Vec<MorId> = fam.legs.iter().copied().filter(|&k| k != l).collect();
    legs.extend(inner.legs.iter().map(|&g| cat.comp(l, g)));
    Family::from_sorted(fam.codomain, legs)
}

/// Least set of families containing the pullback closure and all singleton
/// iso families, closed under pasting.
pub fn tree_saturation(site: &SiteSpec) -> Result<Saturation, SiteError> {
    let seeds = pullback_closure(site)?;
    Ok(saturate_families(&site.base, seeds))
}

pub fn saturate_families(cat: &FinCategory, seeds: Vec<Family>) -> Saturation {
    let mut families: BTreeSet<Family> = seeds.into_iter().collect();
    for f in cat.morphism_ids().filter(|&f| cat.is_iso(f)) {
        families.insert(Family { codomain: cat.cod(f), legs: vec![f] });
    }
    let mut rounds = 0;
    loop {
        let mut by_codomain: Vec<Vec<&Family>> = vec![Vec::new(); cat.num_objects()];
        for f in &families {
            by_codomain[f.codomain].push(f);
        }
        let mut fresh = Vec::new();
        for fam in &families {
            for &l in &fam.legs {
                for inner in &by_codomain[cat.dom(l)] {
                    let p = paste(cat, fam, l, inner);
                    if !families.contains(&p) {
                        fresh.push(p);
                    }
                }
            }
        }
        if fresh.is_empty() {
            break;
        }
        rounds += 1;
        families.extend(fresh);
    }
    Saturation { families: families.into_iter().collect(), rounds }
}

/// A set of arrows into `target` closed under precomposition, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sieve {
    pub target: ObjId,
    pub arrows: Vec<MorId>,
}

impl Sieve {
    pub fn maximal(cat: &FinCategory, x: ObjId) -> Self {
        Sieve { target: x, arrows: cat.into_object(x) }
    }

    pub fn empty(x: ObjId) -> Self {
        Sieve { target: x, arrows: Vec::new() }
    }

    pub fn generated(cat: &FinCategory, x: ObjId, legs: &[MorId]) -> Self {
        let mut arrows: Vec<MorId> =
            cat.into_object(x).into_iter().filter(|&f| legs.iter().any(|&l| cat.factors_through(f, l))).collect();
        arrows.sort_unstable();
        Sieve { target: x, arrows }
    }

    pub fn contains(&self, f: MorId) -> bool {
        self.arrows.binary_search(&f).is_ok()
    }

    pub fn is_subset(&self, other: &Sieve) -> bool {
        self.arrows.iter().all(|&f| other.contains(f))
    }

    pub fn is_closed(&self, cat: &FinCategory) -> bool {
        self.arrows.iter().all(|&f| cat.into_object(cat.dom(f)).into_iter().all(|g| self.contains(cat.comp(f, g))))
    }

    /// `h*S = { g : h ∘ g ∈ S }`.
    pub fn pullback(&self, cat: &FinCategory, h: MorId) -> Sieve {
        let arrows = cat.into_object(cat.dom(h)).into_iter().filter(|&g| self.contains(cat.comp(h, g))).collect();
        Sieve { target: cat.dom(h), arrows }
    }
}

/// Every sieve on `x`, in ascending order of the sorted arrow lists.
pub fn all_sieves(cat: &FinCategory, x: ObjId) -> Vec<Sieve> {
    let into = cat.into_object(x);
    let principal: Vec<Vec<MorId>> = into.iter().map(|&f| Sieve::generated(cat, x, &[f]).arrows).collect();
    let mut seen: BTreeSet<Vec<MorId>> = BTreeSet::new();
    seen.insert(Vec::new());
    let mut stack = vec![Vec::new()];
    while let Some(s) = stack.pop() {
        for (i, &f) in into.iter().enumerate() {
            if s.binary_search(&f).is_ok() {
                continue;
            }
            let mut u: Vec<MorId> = s.iter().chain(&principal[i]).copied().collect();
            u.sort_unstable();
            u.dedup();
            if seen.insert(u.clone()) {
                stack.push(u);
            }
        }
    }
    seen.into_iter().map(|arrows| Sieve { target: x, arrows }).collect()
}

/// Per-object covering flags over the full list of sieves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SieveTopology {
    pub sieves: Vec<Vec<Sieve>>,
    pub covering: Vec<Vec<bool>>,
    index: Vec<HashMap<Vec<MorId>, usize>>,
}

impl SieveTopology {
    /// Topology with the given covering predicate, no closure applied.
    pub fn from_predicate(cat: &FinCategory, mut covers: impl FnMut(&Sieve) -> bool) -> Self {
        let sieves: Vec<Vec<Sieve>> = cat.objects().map(|x| all_sieves(cat, x)).collect();
        let index =
            sieves.iter().map(|list| list.iter().enumerate().map(|(i, s)| (s.arrows.clone(), i)).collect()).collect();
        let covering = sieves.iter().map(|list| list.iter().map(&mut covers).collect()).collect();
        SieveTopology { sieves, covering, index }
    }

    pub fn index_of(&self, s: &Sieve) -> usize {
        self.index[s.target][&s.arrows]
    }

    pub fn covers(&self, s: &Sieve) -> bool {
        self.covering[s.target][self.index_of(s)]
    }

    pub fn covering_sieves(&self, x: ObjId) -> impl Iterator<Item = &Sieve> {
        self.sieves[x].iter().zip(&self.covering[x]).filter(|(_, &c)| c).map(|(s, _)| s)
    }

    pub fn num_covering(&self, x: ObjId) -> usize {
        self.covering[x].iter().filter(|&&c| c).count()
    }

    /// Violations of the three Grothendieck-topology axioms.
    pub fn axiom_violations(&self, cat: &FinCategory) -> Vec<String> {
        let mut out = Vec::new();
        for x in cat.objects() {
            if !self.covers(&Sieve::maximal(cat, x)) {
                out.push(format!("maximal sieve on {} does not cover", cat.object_name(x)));
            }
            for s in self.covering_sieves(x) {
                for h in cat.into_object(x) {
                    if !self.covers(&s.pullback(cat, h)) {
                        out.push(format!("pullback of {:?} along {} does not cover", s.arrows, cat.morphism_name(h)));
                    }
                }
            }
            for r in &self.sieves[x] {
                if self.covers(r) {
                    continue;
                }
                let local = self.covering_sieves(x).any(|s| s.arrows.iter().all(|&f| self.covers(&r.pullback(cat, f))));
                if local {
                    out.push(format!("{:?} on {} is locally covering but not covering", r.arrows, cat.object_name(x)));
                }
            }
        }
        out
    }
}

/// Least Grothendieck topology in which every cover generates a covering sieve.
pub fn generate_sieve_topology(site: &SiteSpec) -> SieveTopology {
    let cat = &site.base;
    let seeds: Vec<Sieve> = site.covers.iter().map(|f| f.sieve(cat)).collect();
    close_topology(cat, &seeds)
}

pub fn close_topology(cat: &FinCategory, seeds: &[Sieve]) -> SieveTopology {
    let mut t = SieveTopology::from_predicate(cat, |s| s.arrows.len() == cat.into_object(s.target).len());
    for s in seeds {
        let i = t.index_of(s);
        t.covering[s.target][i] = true;
    }
    loop {
        let mut changed = false;
        for x in cat.objects() {
            for i in 0..t.sieves[x].len() {
                if !t.covering[x][i] {
                    continue;
                }
                let s = t.sieves[x][i].clone();
                for r in 0..t.sieves[x].len() {
                    if !t.covering[x][r] && s.is_subset(&t.sieves[x][r]) {
                        t.covering[x][r] = true;
                        changed = true;
                    }
                }
                for h in cat.into_object(x) {
                    let p = s.pullback(cat, h);
                    let j = t.index_of(&p);
                    if !t.covering[p.target][j] {
                        t.covering[p.target][j] = true;
                        changed = true;
                    }
                }
            }
            for r in 0..t.sieves[x].len() {
                if t.covering[x][r] {
                    continue;
                }
                let rs = &t.sieves[x][r];
                let local = t.covering_sieves(x).any(|s| s.arrows.iter().all(|&f| t.covers(&rs.pullback(cat, f))));
                if local {
                    t.covering[x][r] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return t;
        }
    }
}

/// Topology whose covering sieves are those containing the sieve of some
/// family in `families`.
pub fn topology_from_families(cat: &FinCategory, families: &[Family]) -> SieveTopology {
    let generated: Vec<Sieve> = families.iter().map(|f| f.sieve(cat)).collect();
    SieveTopology::from_predicate(cat, |s| generated.iter().any(|g| g.target == s.target && g.is_subset(s)))
}

pub fn family_covers(site: &SiteSpec, topology: &SieveTopology, fam: &Family) -> bool {
    topology.covers(&fam.sieve(&site.base))
}

/// Every finite-limit diagram of the generating shapes (terminal, binary
/// products, equalizers, pullbacks) that has a limit in `cat`.
fn generating_diagrams(cat: &FinCategory) -> Vec<Diagram> {
    let mut out = vec![Diagram::empty()];
    for x in cat.objects() {
        for y in cat.objects() {
            out.push(Diagram::pair(cat, x, y));
            let hom = cat.hom(x, y);
            for &f in hom {
                for &g in hom {
                    out.push(Diagram::parallel(cat, f, g));
                }
            }
        }
    }
    for f in cat.morphism_ids() {
        for g in cat.morphism_ids() {
            if cat.cod(f) == cat.cod(g) {
                out.push(Diagram::cospan(cat, f, g));
            }
        }
    }
    out
}

/// A functor preserving the generating finite limits and sending covers to
/// covering families of the target.
pub fn is_site_morphism(functor: &FunctorData, source: &SiteSpec, target: &SiteSpec) -> bool {
    let (c, d) = (&source.base, &target.base);
    if !functor.is_valid(c, d) {
        return false;
    }
    for diag in generating_diagrams(c) {
        if let Some(cone) = limits::limit(c, &diag).expect("valid diagram") {
            let image = limits::Cone {
                apex: functor.obj_map[cone.apex],
                legs: cone.legs.iter().map(|&l| functor.mor_map[l]).collect(),
            };
            if !limits::is_limit_cone(d, &diag.map(functor), &image) {
                return false;
            }
        }
    }
    let topology = target.topology();
    source.covers.iter().all(|fam| {
        let image =
            Family::from_sorted(functor.obj_map[fam.codomain], fam.legs.iter().map(|&l| functor.mor_map[l]).collect());
        family_covers(target, &topology, &image)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn point() -> SiteSpec {
        SiteSpec::new(poset(&["*"], &[]), vec![]).unwrap()
    }

    #[test]
    fn terminal_identity_family_is_added() {
        assert_eq!(point().covers, vec![Family { codomain: 0, legs: vec![0] }]);
        assert_eq!(diamond().covers.len(), 2);
    }

    #[test]
    fn pullback_closure_of_diamond() {
        let s = diamond();
        let c = &s.base;
        let pb = pullback_closure(&s).unwrap();
        let on_a = Family::new(c, 1, [c.id(1), c.hom(0, 1)[0]]).unwrap();
        assert!(pb.contains(&on_a));
        assert!(pb.contains(&s.covers[1]));
        assert_eq!(pullback_closure(&point()).unwrap(), point().covers);
        let fam = &s.covers[1];
        assert_eq!(&fam.pullback_along(c, c.id(3)).unwrap(), fam);
    }

    #[test]
    fn missing_pullback_is_reported() {
        let c = poset(&["a", "b", "1"], &[(0, 2), (1, 2)]);
        let cover = Family::new(&c, 2, [c.hom(0, 2)[0]]).unwrap();
        let s = SiteSpec::new(c, vec![cover]).unwrap();
        assert!(matches!(pullback_closure(&s), Err(SiteError::MissingPullback(..))));
    }

    #[test]
    fn point_saturation_and_topology() {
        let s = point();
        let sat = tree_saturation(&s).unwrap();
        assert_eq!(sat.families, s.covers);
        let t = s.topology();
        assert_eq!(t.num_covering(0), 1);
    }

    #[test]
    fn diamond_topology() {
        let s = diamond();
        let c = &s.base;
        let t = s.topology();
        assert!(t.axiom_violations(c).is_empty());
        assert_eq!(t.num_covering(3), 2);
        assert!(t.covers(&s.covers[0].sieve(c)));
        let single = Family::new(c, 3, [c.hom(1, 3)[0]]).unwrap();
        assert!(!family_covers(&s, &t, &single));
        // on a: the maximal sieve only, as {id_a, 0<a} generates it
        assert_eq!(t.num_covering(1), 1);
        assert_eq!(t.num_covering(0), 1);
    }

    #[test]
    fn empty_cover_makes_every_sieve_cover() {
        let c = poset(&["0", "m", "1"], &[(0, 1), (1, 2)]);
        let empty = Family::new(&c, 0, []).unwrap();
        let s = SiteSpec::new(c, vec![empty]).unwrap();
        let t = s.topology();
        assert!(t.covering[0].iter().all(|&b| b));
        assert!(t.axiom_violations(&s.base).is_empty());
    }

    #[test]
    fn saturation_is_closed_and_covers() {
        let s = diamond();
        let sat = tree_saturation(&s).unwrap();
        assert!(sat.rounds <= s.base.num_morphisms());
        let again = saturate_families(&s.base, sat.families.clone());
        assert_eq!(again.families, sat.families);
        let t = s.topology();
        for f in &sat.families {
            assert!(family_covers(&s, &t, f));
        }
    }

    #[test]
    fn site_morphisms() {
        let s = diamond();
        assert!(is_site_morphism(&FunctorData::identity(&s.base), &s, &s));
        let p = point();
        let collapse = FunctorData { obj_map: vec![0; 4], mor_map: vec![0; s.base.num_morphisms()] };
        assert!(is_site_morphism(&collapse, &s, &p));
        // identity into the diamond without covers: the cover is no longer covering
        let bare = SiteSpec::new(s.base.clone(), vec![]).unwrap();
        assert!(!is_site_morphism(&FunctorData::identity(&s.base), &s, &bare));
    }
}
