//! Finite categories stored as explicit composition tables, together with
//! functors between them, finite-set-valued functors and natural
//! transformations.
//!
//! Object and morphism ids are dense indices. Every listing produced here is
//! in ascending id order so results are reproducible run to run.

use std::fmt;

use thiserror::Error;

pub type ObjId = usize;
pub type MorId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CategoryError {
    #[error("unknown object id {0}")]
    UnknownObject(ObjId),
    #[error("unknown morphism id {0}")]
    UnknownMorphism(MorId),
    #[error("natural transformation is missing a component for object {0}")]
    ComponentMissing(ObjId),
    #[error("set-valued functors have different variance or base")]
    Mismatch,
    #[error("category violates {} law(s): {}", .0.len(), format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// The category laws checked by [`FinCategory::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Law {
    EndpointOutOfRange,
    IdentityMissing,
    IdentityNotEndo,
    CompNotClosed,
    CompUndefined,
    CompSpurious,
    CompEndpoints,
    LeftIdentity,
    RightIdentity,
    Associativity,
}

impl Law {
    pub fn name(self) -> &'static str {
        match self {
            Law::EndpointOutOfRange => "endpoint out of range",
            Law::IdentityMissing => "identity missing",
            Law::IdentityNotEndo => "identity not an endomorphism",
            Law::CompNotClosed => "comp not closed",
            Law::CompUndefined => "comp undefined on composable pair",
            Law::CompSpurious => "comp defined on non-composable pair",
            Law::CompEndpoints => "comp endpoints",
            Law::LeftIdentity => "left identity",
            Law::RightIdentity => "right identity",
            Law::Associativity => "associativity",
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub law: Law,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.law, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Morphism {
    pub name: String,
    pub dom: ObjId,
    pub cod: ObjId,
}

/// A finite category given by its full composition table.
///
/// `comp[g * n + f]` holds `g ∘ f`; `None` marks an undefined entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinCategory {
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
    identity: Vec<MorId>,
    comp: Vec<Option<MorId>>,
    homs: Vec<Vec<MorId>>,
}

impl FinCategory {
    /// Builds a category from raw tables without checking any law. Use
    /// [`FinCategory::validate`] (or [`FinCategory::new`]) before relying on it.
    pub fn from_tables(
        objects: Vec<String>,
        morphisms: Vec<Morphism>,
        identity: Vec<MorId>,
        comp: Vec<Option<MorId>>,
    ) -> Self {
        let n_obj = objects.len();
        let mut homs = vec![Vec::new(); n_obj * n_obj];
        for (f, m) in morphisms.iter().enumerate() {
            if m.dom < n_obj && m.cod < n_obj {
                homs[m.dom * n_obj + m.cod].push(f);
            }
        }
        FinCategory { objects, morphisms, identity, comp, homs }
    }

    pub fn new(
        objects: Vec<String>,
        morphisms: Vec<Morphism>,
        identity: Vec<MorId>,
        comp: Vec<Option<MorId>>,
    ) -> Result<Self, CategoryError> {
        let cat = Self::from_tables(objects, morphisms, identity, comp);
        let report = cat.validate();
        if report.is_empty() {
            Ok(cat)
        } else {
            Err(CategoryError::Invalid(report))
        }
    }

    /// Builds the poset category on `n` elements from a reflexive, transitive,
    /// antisymmetric relation `leq`. Identities get ids `0..n`; the strict
    /// arrows follow in ascending `(dom, cod)` order and are named `x<y`.
    pub fn from_order(names: Vec<String>, leq: &[Vec<bool>]) -> Result<Self, CategoryError> {
        let n = names.len();
        let mut morphisms: Vec<Morphism> =
            (0..n).map(|x| Morphism { name: format!("id_{}", names[x]), dom: x, cod: x }).collect();
        let mut arrow = vec![None; n * n];
        for x in 0..n {
            arrow[x * n + x] = Some(x);
        }
        for x in 0..n {
            for y in 0..n {
                if x != y && leq[x][y] {
                    arrow[x * n + y] = Some(morphisms.len());
                    morphisms.push(Morphism { name: format!("{}<{}", names[x], names[y]), dom: x, cod: y });
                }
            }
        }
        let m = morphisms.len();
        let mut comp = vec![None; m * m];
        for (g, mg) in morphisms.iter().enumerate() {
            for (f, mf) in morphisms.iter().enumerate() {
                if mf.cod == mg.dom {
                    comp[g * m + f] = arrow[mf.dom * n + mg.cod];
                }
            }
        }
        Self::new(names, morphisms, (0..n).collect(), comp)
    }

    /// The discrete category on `n` objects.
    pub fn discrete(n: usize) -> Self {
        let names = (0..n).map(|i| i.to_string()).collect();
        let leq: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
        Self::from_order(names, &leq).expect("discrete category is valid")
    }

    /// The cospan shape `0 -> 2 <- 1`.
    pub fn cospan() -> Self {
        let names = vec!["0".into(), "1".into(), "2".into()];
        let leq = vec![vec![true, false, true], vec![false, true, true], vec![false, false, true]];
        Self::from_order(names, &leq).expect("cospan shape is valid")
    }

    /// Two parallel arrows `p, q : 0 -> 1`.
    pub fn parallel_pair() -> Self {
        let morphisms = vec![
            Morphism { name: "id_0".into(), dom: 0, cod: 0 },
            Morphism { name: "id_1".into(), dom: 1, cod: 1 },
            Morphism { name: "p".into(), dom: 0, cod: 1 },
            Morphism { name: "q".into(), dom: 0, cod: 1 },
        ];
        let mut comp = vec![None; 16];
        let set = |comp: &mut Vec<Option<MorId>>, g: usize, f: usize, h: usize| comp[g * 4 + f] = Some(h);
        set(&mut comp, 0, 0, 0);
        set(&mut comp, 1, 1, 1);
        for p in [2, 3] {
            set(&mut comp, p, 0, p);
            set(&mut comp, 1, p, p);
        }
        Self::new(vec!["0".into(), "1".into()], morphisms, vec![0, 1], comp).expect("parallel pair is valid")
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_morphisms(&self) -> usize {
        self.morphisms.len()
    }

    pub fn objects(&self) -> std::ops::Range<ObjId> {
        0..self.objects.len()
    }

    pub fn morphism_ids(&self) -> std::ops::Range<MorId> {
        0..self.morphisms.len()
    }

    pub fn object_name(&self, x: ObjId) -> &str {
        &self.objects[x]
    }

    pub fn object_names(&self) -> &[String] {
        &self.objects
    }

    pub fn morphism(&self, f: MorId) -> &Morphism {
        &self.morphisms[f]
    }

    pub fn morphisms(&self) -> &[Morphism] {
        &self.morphisms
    }

    pub fn morphism_name(&self, f: MorId) -> &str {
        &self.morphisms[f].name
    }

    pub fn object_by_name(&self, name: &str) -> Option<ObjId> {
        self.objects.iter().position(|o| o == name)
    }

    pub fn morphism_by_name(&self, name: &str) -> Option<MorId> {
        self.morphisms.iter().position(|m| m.name == name)
    }

    pub fn dom(&self, f: MorId) -> ObjId {
        self.morphisms[f].dom
    }

    pub fn cod(&self, f: MorId) -> ObjId {
        self.morphisms[f].cod
    }

    pub fn id(&self, x: ObjId) -> MorId {
        self.identity[x]
    }

    pub fn identities(&self) -> &[MorId] {
        &self.identity
    }

    pub fn comp_table(&self) -> &[Option<MorId>] {
        &self.comp
    }

    pub fn is_identity(&self, f: MorId) -> bool {
        self.identity[self.dom(f)] == f
    }

    /// `g ∘ f`, or `None` when the pair is not composable.
    pub fn compose(&self, g: MorId, f: MorId) -> Option<MorId> {
        if self.cod(f) != self.dom(g) {
            return None;
        }
        self.comp[g * self.morphisms.len() + f]
    }

    /// `g ∘ f` for a pair known to be composable.
    pub fn comp(&self, g: MorId, f: MorId) -> MorId {
        self.compose(g, f)
            .unwrap_or_else(|| panic!("{} ∘ {} is not composable", self.morphisms[g].name, self.morphisms[f].name))
    }

    /// Composes a path given first-to-last: `[f, g, h]` yields `h ∘ g ∘ f`.
    pub fn comp_path(&self, path: &[MorId]) -> MorId {
        let mut it = path.iter();
        let first = *it.next().expect("non-empty path");
        it.fold(first, |acc, &g| self.comp(g, acc))
    }

    /// Morphisms `x -> y` in ascending id order (unchecked ids).
    pub fn hom(&self, x: ObjId, y: ObjId) -> &[MorId] {
        &self.homs[x * self.objects.len() + y]
    }

    pub fn hom_set(&self, x: ObjId, y: ObjId) -> Result<Vec<MorId>, CategoryError> {
        self.check_object(x)?;
        self.check_object(y)?;
        Ok(self.hom(x, y).to_vec())
    }

    /// All morphisms with codomain `y`, ascending.
    pub fn into_object(&self, y: ObjId) -> Vec<MorId> {
        self.morphism_ids().filter(|&f| self.cod(f) == y).collect()
    }

    /// All morphisms with domain `x`, ascending.
    pub fn out_of(&self, x: ObjId) -> Vec<MorId> {
        self.morphism_ids().filter(|&f| self.dom(f) == x).collect()
    }

    pub fn check_object(&self, x: ObjId) -> Result<(), CategoryError> {
        if x < self.objects.len() {
            Ok(())
        } else {
            Err(CategoryError::UnknownObject(x))
        }
    }

    pub fn check_morphism(&self, f: MorId) -> Result<(), CategoryError> {
        if f < self.morphisms.len() {
            Ok(())
        } else {
            Err(CategoryError::UnknownMorphism(f))
        }
    }

    /// Some `k` with `l ∘ k = h`, the least such id.
    pub fn factor_through(&self, h: MorId, l: MorId) -> Option<MorId> {
        if self.cod(h) != self.cod(l) {
            return None;
        }
        self.hom(self.dom(h), self.dom(l)).iter().copied().find(|&k| self.comp(l, k) == h)
    }

    pub fn factors_through(&self, h: MorId, l: MorId) -> bool {
        self.factor_through(h, l).is_some()
    }

    pub fn inverse(&self, f: MorId) -> Option<MorId> {
        let (x, y) = (self.dom(f), self.cod(f));
        self.hom(y, x).iter().copied().find(|&g| self.comp(g, f) == self.id(x) && self.comp(f, g) == self.id(y))
    }

    pub fn is_iso(&self, f: MorId) -> bool {
        self.inverse(f).is_some()
    }

    pub fn is_mono(&self, f: MorId) -> Result<bool, CategoryError> {
        self.check_morphism(f)?;
        let x = self.dom(f);
        for w in self.objects() {
            let hs = self.hom(w, x);
            for (i, &g) in hs.iter().enumerate() {
                for &h in &hs[i + 1..] {
                    if self.comp(f, g) == self.comp(f, h) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    pub fn is_epi(&self, f: MorId) -> Result<bool, CategoryError> {
        self.check_morphism(f)?;
        let y = self.cod(f);
        for z in self.objects() {
            let hs = self.hom(y, z);
            for (i, &g) in hs.iter().enumerate() {
                for &h in &hs[i + 1..] {
                    if self.comp(g, f) == self.comp(h, f) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Least terminal object, if any.
    pub fn terminal(&self) -> Option<ObjId> {
        self.objects().find(|&t| self.objects().all(|x| self.hom(x, t).len() == 1))
    }

    /// Least initial object, if any.
    pub fn initial(&self) -> Option<ObjId> {
        self.objects().find(|&i| self.objects().all(|x| self.hom(i, x).len() == 1))
    }

    /// True when every hom-set has at most one element.
    pub fn is_thin(&self) -> bool {
        self.homs.iter().all(|h| h.len() <= 1)
    }

    /// Scans every law and returns the violated instances (empty iff valid).
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n_obj = self.objects.len();
        let n = self.morphisms.len();
        let mut push = |law: Law, detail: String| out.push(Violation { law, detail });

        for (f, m) in self.morphisms.iter().enumerate() {
            if m.dom >= n_obj || m.cod >= n_obj {
                push(Law::EndpointOutOfRange, format!("morphism {} ({})", f, m.name));
            }
        }
        if self.identity.len() != n_obj {
            push(Law::IdentityMissing, format!("{} identities for {} objects", self.identity.len(), n_obj));
        }
        for (x, &i) in self.identity.iter().enumerate() {
            if i >= n {
                push(Law::IdentityMissing, format!("identity of object {x} is {i}"));
            } else if self.morphisms[i].dom != x || self.morphisms[i].cod != x {
                push(Law::IdentityNotEndo, format!("identity of object {x} is {}", self.morphisms[i].name));
            }
        }
        if self.comp.len() != n * n {
            push(Law::CompNotClosed, format!("table has {} entries, expected {}", self.comp.len(), n * n));
        }
        if !out.is_empty() {
            return out;
        }

        let mut table_ok = true;
        for g in 0..n {
            for f in 0..n {
                let composable = self.morphisms[f].cod == self.morphisms[g].dom;
                match self.comp[g * n + f] {
                    None if composable => {
                        table_ok = false;
                        out.push(Violation {
                            law: Law::CompUndefined,
                            detail: format!("{} ∘ {}", self.morphisms[g].name, self.morphisms[f].name),
                        });
                    }
                    Some(h) if !composable => {
                        table_ok = false;
                        out.push(Violation {
                            law: Law::CompSpurious,
                            detail: format!("{} ∘ {} = {h}", self.morphisms[g].name, self.morphisms[f].name),
                        });
                    }
                    Some(h) if h >= n => {
                        table_ok = false;
                        out.push(Violation {
                            law: Law::CompNotClosed,
                            detail: format!("{} ∘ {} = {h}", self.morphisms[g].name, self.morphisms[f].name),
                        });
                    }
                    Some(h) => {
                        let (mh, mf, mg) = (&self.morphisms[h], &self.morphisms[f], &self.morphisms[g]);
                        if mh.dom != mf.dom || mh.cod != mg.cod {
                            table_ok = false;
                            out.push(Violation {
                                law: Law::CompEndpoints,
                                detail: format!("{} ∘ {} = {}", mg.name, mf.name, mh.name),
                            });
                        }
                    }
                    None => {}
                }
            }
        }
        if !table_ok {
            return out;
        }

        for f in 0..n {
            let m = &self.morphisms[f];
            if self.comp[self.identity[m.cod] * n + f] != Some(f) {
                out.push(Violation { law: Law::LeftIdentity, detail: m.name.clone() });
            }
            if self.comp[f * n + self.identity[m.dom]] != Some(f) {
                out.push(Violation { law: Law::RightIdentity, detail: m.name.clone() });
            }
        }
        for f in 0..n {
            for g in self.out_of(self.morphisms[f].cod) {
                let gf = self.comp[g * n + f].expect("checked");
                for h in self.out_of(self.morphisms[g].cod) {
                    let hg = self.comp[h * n + g].expect("checked");
                    if self.comp[h * n + gf] != self.comp[hg * n + f] {
                        out.push(Violation {
                            law: Law::Associativity,
                            detail: format!(
                                "{}, {}, {}",
                                self.morphisms[h].name, self.morphisms[g].name, self.morphisms[f].name
                            ),
                        });
                    }
                }
            }
        }
        out
    }
}

/// A functor between finite categories given by its object and morphism maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctorData {
    pub obj_map: Vec<ObjId>,
    pub mor_map: Vec<MorId>,
}

impl FunctorData {
    pub fn identity(cat: &FinCategory) -> Self {
        FunctorData { obj_map: cat.objects().collect(), mor_map: cat.morphism_ids().collect() }
    }

    /// Checks dom/cod, identity and composition preservation by full scan.
    pub fn is_valid(&self, source: &FinCategory, target: &FinCategory) -> bool {
        if self.obj_map.len() != source.num_objects() || self.mor_map.len() != source.num_morphisms() {
            return false;
        }
        if self.obj_map.iter().any(|&y| y >= target.num_objects())
            || self.mor_map.iter().any(|&g| g >= target.num_morphisms())
        {
            return false;
        }
        for f in source.morphism_ids() {
            let g = self.mor_map[f];
            if target.dom(g) != self.obj_map[source.dom(f)] || target.cod(g) != self.obj_map[source.cod(f)] {
                return false;
            }
        }
        for x in source.objects() {
            if self.mor_map[source.id(x)] != target.id(self.obj_map[x]) {
                return false;
            }
        }
        for f in source.morphism_ids() {
            for g in source.out_of(source.cod(f)) {
                let gf = source.comp(g, f);
                if target.compose(self.mor_map[g], self.mor_map[f]) != Some(self.mor_map[gf]) {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variance {
    Covariant,
    Contravariant,
}

/// A finite-set-valued functor. Elements of the carrier at `x` are
/// `0..carriers[x]`; `actions[f][e]` is the image of `e` under the action of
/// `f` (from `dom f` to `cod f` for covariant functors, the other way for
/// contravariant ones).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetFunctor {
    pub variance: Variance,
    pub carriers: Vec<usize>,
    pub actions: Vec<Vec<usize>>,
}

impl SetFunctor {
    /// Source object of the action of `f`.
    pub fn action_source(&self, cat: &FinCategory, f: MorId) -> ObjId {
        match self.variance {
            Variance::Covariant => cat.dom(f),
            Variance::Contravariant => cat.cod(f),
        }
    }

    pub fn action_target(&self, cat: &FinCategory, f: MorId) -> ObjId {
        match self.variance {
            Variance::Covariant => cat.cod(f),
            Variance::Contravariant => cat.dom(f),
        }
    }

    pub fn apply(&self, f: MorId, e: usize) -> usize {
        self.actions[f][e]
    }

    /// The constant singleton functor.
    pub fn terminal(cat: &FinCategory, variance: Variance) -> Self {
        SetFunctor { variance, carriers: vec![1; cat.num_objects()], actions: vec![vec![0]; cat.num_morphisms()] }
    }

    /// The constant empty functor.
    pub fn empty(cat: &FinCategory, variance: Variance) -> Self {
        SetFunctor { variance, carriers: vec![0; cat.num_objects()], actions: vec![Vec::new(); cat.num_morphisms()] }
    }

    /// `C(x, -)`: elements of the carrier at `y` index `hom(x, y)` ascending.
    pub fn corepresentable(cat: &FinCategory, x: ObjId) -> Self {
        let carriers = cat.objects().map(|y| cat.hom(x, y).len()).collect();
        let actions = cat
            .morphism_ids()
            .map(|f| {
                let target = cat.hom(x, cat.cod(f));
                cat.hom(x, cat.dom(f)).iter().map(|&g| position(target, cat.comp(f, g))).collect()
            })
            .collect();
        SetFunctor { variance: Variance::Covariant, carriers, actions }
    }

    /// `C(-, x)`: elements of the carrier at `y` index `hom(y, x)` ascending.
    pub fn representable(cat: &FinCategory, x: ObjId) -> Self {
        let carriers = cat.objects().map(|y| cat.hom(y, x).len()).collect();
        let actions = cat
            .morphism_ids()
            .map(|f| {
                let target = cat.hom(cat.dom(f), x);
                cat.hom(cat.cod(f), x).iter().map(|&g| position(target, cat.comp(g, f))).collect()
            })
            .collect();
        SetFunctor { variance: Variance::Contravariant, carriers, actions }
    }

    /// Lists the functoriality problems of this table (empty iff a functor).
    pub fn validate(&self, cat: &FinCategory) -> Vec<String> {
        let mut out = Vec::new();
        if self.carriers.len() != cat.num_objects() || self.actions.len() != cat.num_morphisms() {
            out.push("table shape does not match the base category".to_string());
            return out;
        }
        for f in cat.morphism_ids() {
            let (s, t) = (self.action_source(cat, f), self.action_target(cat, f));
            let act = &self.actions[f];
            if act.len() != self.carriers[s] || act.iter().any(|&e| e >= self.carriers[t]) {
                out.push(format!("action of {} is not a function", cat.morphism_name(f)));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for x in cat.objects() {
            let act = &self.actions[cat.id(x)];
            if act.iter().enumerate().any(|(i, &e)| i != e) {
                out.push(format!("identity of {} acts non-trivially", cat.object_name(x)));
            }
        }
        for f in cat.morphism_ids() {
            for g in cat.out_of(cat.cod(f)) {
                let gf = cat.comp(g, f);
                let ok = match self.variance {
                    Variance::Covariant => (0..self.carriers[cat.dom(f)])
                        .all(|e| self.actions[gf][e] == self.actions[g][self.actions[f][e]]),
                    Variance::Contravariant => (0..self.carriers[cat.cod(g)])
                        .all(|e| self.actions[gf][e] == self.actions[f][self.actions[g][e]]),
                };
                if !ok {
                    out.push(format!("composition {} ∘ {} not respected", cat.morphism_name(g), cat.morphism_name(f)));
                }
            }
        }
        out
    }

    pub fn is_functor(&self, cat: &FinCategory) -> bool {
        self.validate(cat).is_empty()
    }

    /// Elements `(x, e)` in ascending `(x, e)` order.
    pub fn elements(&self) -> Vec<(ObjId, usize)> {
        self.carriers.iter().enumerate().flat_map(|(x, &n)| (0..n).map(move |e| (x, e))).collect()
    }

    pub fn total_size(&self) -> usize {
        self.carriers.iter().sum()
    }

    /// The subfunctor on the given per-object subsets (which must be closed
    /// under the action), with elements renumbered in ascending order. Also
    /// returns the inclusion as a natural transformation into `self`.
    pub fn restrict_to(&self, cat: &FinCategory, subsets: &[Vec<usize>]) -> (SetFunctor, NatTrans) {
        let index: Vec<Vec<Option<usize>>> = subsets
            .iter()
            .zip(&self.carriers)
            .map(|(sub, &n)| {
                let mut idx = vec![None; n];
                for (i, &e) in sub.iter().enumerate() {
                    idx[e] = Some(i);
                }
                idx
            })
            .collect();
        let actions = cat
            .morphism_ids()
            .map(|f| {
                let (s, t) = (self.action_source(cat, f), self.action_target(cat, f));
                subsets[s].iter().map(|&e| index[t][self.actions[f][e]].expect("subset closed under action")).collect()
            })
            .collect();
        let sub = SetFunctor { variance: self.variance, carriers: subsets.iter().map(Vec::len).collect(), actions };
        (sub, NatTrans { components: subsets.to_vec() })
    }
}

pub(crate) fn position(list: &[usize], item: usize) -> usize {
    list.iter().position(|&v| v == item).expect("element present")
}

/// A natural transformation between two set-valued functors on the same base;
/// `components[x][e]` is the image of element `e` at object `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NatTrans {
    pub components: Vec<Vec<usize>>,
}

impl NatTrans {
    pub fn identity(f: &SetFunctor) -> Self {
        NatTrans { components: f.carriers.iter().map(|&n| (0..n).collect()).collect() }
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &NatTrans) -> NatTrans {
        NatTrans {
            components: first
                .components
                .iter()
                .zip(&self.components)
                .map(|(a, b)| a.iter().map(|&e| b[e]).collect())
                .collect(),
        }
    }

    pub fn is_pointwise_injective(&self) -> bool {
        self.components.iter().all(|c| {
            let mut seen = c.clone();
            seen.sort_unstable();
            seen.windows(2).all(|w| w[0] != w[1])
        })
    }

    pub fn is_pointwise_surjective(&self, target: &SetFunctor) -> bool {
        self.components.iter().zip(&target.carriers).all(|(c, &n)| {
            let mut hit = vec![false; n];
            for &e in c {
                hit[e] = true;
            }
            hit.into_iter().all(|h| h)
        })
    }

    pub fn is_pointwise_bijective(&self, target: &SetFunctor) -> bool {
        self.is_pointwise_injective() && self.is_pointwise_surjective(target)
    }

    /// Per-object images, sorted.
    pub fn images(&self) -> Vec<Vec<usize>> {
        self.components
            .iter()
            .map(|c| {
                let mut v = c.clone();
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect()
    }
}

/// True iff every naturality square of `alpha: source => target` commutes.
pub fn check_nat(
    cat: &FinCategory,
    source: &SetFunctor,
    target: &SetFunctor,
    alpha: &NatTrans,
) -> Result<bool, CategoryError> {
    if source.variance != target.variance
        || source.carriers.len() != cat.num_objects()
        || target.carriers.len() != cat.num_objects()
    {
        return Err(CategoryError::Mismatch);
    }
    for x in cat.objects() {
        match alpha.components.get(x) {
            Some(c) if c.len() == source.carriers[x] => {
                if c.iter().any(|&e| e >= target.carriers[x]) {
                    return Ok(false);
                }
            }
            _ => return Err(CategoryError::ComponentMissing(x)),
        }
    }
    for f in cat.morphism_ids() {
        let (s, t) = (source.action_source(cat, f), source.action_target(cat, f));
        for e in 0..source.carriers[s] {
            if alpha.components[t][source.actions[f][e]] != target.actions[f][alpha.components[s][e]] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Every natural transformation `source => target`, in lexicographic order of
/// component tables.
pub fn enumerate_nat(cat: &FinCategory, source: &SetFunctor, target: &SetFunctor) -> Vec<NatTrans> {
    let n = cat.num_objects();
    // squares checked once both endpoint components are fixed
    let mut checks: Vec<Vec<MorId>> = vec![Vec::new(); n];
    for f in cat.morphism_ids() {
        let (s, t) = (source.action_source(cat, f), source.action_target(cat, f));
        checks[s.max(t)].push(f);
    }
    let mut out = Vec::new();
    let mut comps: Vec<Vec<usize>> = Vec::with_capacity(n);
    nat_rec(cat, source, target, &checks, &mut comps, &mut out);
    out
}

fn nat_rec(
    cat: &FinCategory,
    source: &SetFunctor,
    target: &SetFunctor,
    checks: &[Vec<MorId>],
    comps: &mut Vec<Vec<usize>>,
    out: &mut Vec<NatTrans>,
) {
    let x = comps.len();
    if x == source.carriers.len() {
        out.push(NatTrans { components: comps.clone() });
        return;
    }
    let (m, k) = (source.carriers[x], target.carriers[x]);
    if m > 0 && k == 0 {
        return;
    }
    let mut func = vec![0usize; m];
    loop {
        comps.push(func.clone());
        let ok = checks[x].iter().all(|&f| {
            let (s, t) = (source.action_source(cat, f), source.action_target(cat, f));
            (0..source.carriers[s]).all(|e| comps[t][source.actions[f][e]] == target.actions[f][comps[s][e]])
        });
        if ok {
            nat_rec(cat, source, target, checks, comps, out);
        }
        comps.pop();
        if !next_function(&mut func, k) {
            break;
        }
    }
}

/// Advances `func` to the next function `len -> k` in lexicographic order.
pub(crate) fn next_function(func: &mut [usize], k: usize) -> bool {
    for i in (0..func.len()).rev() {
        if func[i] + 1 < k {
            func[i] += 1;
            for v in &mut func[i + 1..] {
                *v = 0;
            }
            return true;
        }
    }
    false
}

/// Visits every set-valued functor of the given variance whose carrier at `x`
/// ranges over `sizes[x]`, in lexicographic order of (carriers, actions).
/// Functoriality is enforced during the search.
pub fn for_each_set_functor(
    cat: &FinCategory,
    variance: Variance,
    sizes: &[Vec<usize>],
    mut visit: impl FnMut(&SetFunctor),
) {
    let order: Vec<MorId> = cat.morphism_ids().filter(|&f| !cat.is_identity(f)).collect();
    // composition triples (g, f, g∘f) among non-identities, checked at the
    // position of whichever member is assigned last
    let rank: Vec<usize> = {
        let mut r = vec![usize::MAX; cat.num_morphisms()];
        for (i, &f) in order.iter().enumerate() {
            r[f] = i;
        }
        r
    };
    let mut triples: Vec<Vec<(MorId, MorId, MorId)>> = vec![Vec::new(); order.len()];
    for &f in &order {
        for g in cat.out_of(cat.cod(f)) {
            if cat.is_identity(g) {
                continue;
            }
            let h = cat.comp(g, f);
            let last = if cat.is_identity(h) { rank[f].max(rank[g]) } else { rank[f].max(rank[g]).max(rank[h]) };
            triples[last].push((g, f, h));
        }
    }
    let mut carriers = vec![0usize; cat.num_objects()];
    carrier_rec(cat, variance, sizes, &order, &triples, &mut carriers, 0, &mut visit);
}

#[allow(clippy::too_many_arguments)]
fn carrier_rec(
    cat: &FinCategory,
    variance: Variance,
    sizes: &[Vec<usize>],
    order: &[MorId],
    triples: &[Vec<(MorId, MorId, MorId)>],
    carriers: &mut Vec<usize>,
    x: usize,
    visit: &mut impl FnMut(&SetFunctor),
) {
    if x == carriers.len() {
        let mut functor = SetFunctor {
            variance,
            carriers: carriers.clone(),
            actions: cat
                .morphism_ids()
                .map(|f| if cat.is_identity(f) { (0..carriers[cat.dom(f)]).collect() } else { Vec::new() })
                .collect(),
        };
        action_rec(cat, order, triples, &mut functor, 0, visit);
        return;
    }
    for &n in &sizes[x] {
        carriers[x] = n;
        carrier_rec(cat, variance, sizes, order, triples, carriers, x + 1, visit);
    }
}

fn action_rec(
    cat: &FinCategory,
    order: &[MorId],
    triples: &[Vec<(MorId, MorId, MorId)>],
    functor: &mut SetFunctor,
    i: usize,
    visit: &mut impl FnMut(&SetFunctor),
) {
    if i == order.len() {
        visit(functor);
        return;
    }
    let f = order[i];
    let (s, t) = (functor.action_source(cat, f), functor.action_target(cat, f));
    let (m, k) = (functor.carriers[s], functor.carriers[t]);
    if m > 0 && k == 0 {
        return;
    }
    let mut func = vec![0usize; m];
    loop {
        functor.actions[f] = func.clone();
        let ok = triples[i].iter().all(|&(g, f1, h)| composition_holds(cat, functor, g, f1, h));
        if ok {
            action_rec(cat, order, triples, functor, i + 1, visit);
        }
        if !next_function(&mut func, k) {
            break;
        }
    }
    functor.actions[f] = Vec::new();
}

fn composition_holds(cat: &FinCategory, fun: &SetFunctor, g: MorId, f: MorId, h: MorId) -> bool {
    match fun.variance {
        Variance::Covariant => {
            (0..fun.carriers[cat.dom(f)]).all(|e| fun.actions[h][e] == fun.actions[g][fun.actions[f][e]])
        }
        Variance::Contravariant => {
            (0..fun.carriers[cat.cod(g)]).all(|e| fun.actions[h][e] == fun.actions[f][fun.actions[g][e]])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point() -> FinCategory {
        FinCategory::from_order(vec!["*".into()], &[vec![true]]).unwrap()
    }

    fn diamond() -> FinCategory {
        let names = ["0", "a", "b", "1"].map(String::from).to_vec();
        let rel = [(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)];
        let mut leq = vec![vec![false; 4]; 4];
        for i in 0..4 {
            leq[i][i] = true;
        }
        for (i, j) in rel {
            leq[i][j] = true;
        }
        FinCategory::from_order(names, &leq).unwrap()
    }

    /// Two parallel arrows f, g: X -> Y and q: Y -> Z with q∘f = q∘g = r.
    fn coequalized_pair() -> FinCategory {
        let objects = vec!["X".into(), "Y".into(), "Z".into()];
        let mk = |name: &str, dom, cod| Morphism { name: name.into(), dom, cod };
        let morphisms = vec![
            mk("id_X", 0, 0),
            mk("id_Y", 1, 1),
            mk("id_Z", 2, 2),
            mk("f", 0, 1),
            mk("g", 0, 1),
            mk("q", 1, 2),
            mk("r", 0, 2),
        ];
        let n = morphisms.len();
        let mut comp = vec![None; n * n];
        for (a, m) in morphisms.iter().enumerate() {
            comp[morphisms.iter().position(|k| k.dom == m.cod && k.cod == m.cod).unwrap() * n + a] = Some(a);
            comp[a * n + morphisms.iter().position(|k| k.dom == m.dom && k.cod == m.dom).unwrap()] = Some(a);
        }
        comp[5 * n + 3] = Some(6);
        comp[5 * n + 4] = Some(6);
        FinCategory::new(objects, morphisms, vec![0, 1, 2], comp).unwrap()
    }

    #[test]
    fn point_validates() {
        assert!(point().validate().is_empty());
    }

    #[test]
    fn redirected_identity_composite_is_not_closed() {
        let p = point();
        let mut comp = p.comp_table().to_vec();
        comp[0] = Some(7);
        let bad = FinCategory::from_tables(p.object_names().to_vec(), p.morphisms().to_vec(), vec![0], comp);
        let report = bad.validate();
        assert!(report.iter().any(|v| v.law.name() == "comp not closed"));
    }

    #[test]
    fn diamond_validates_and_has_poset_homs() {
        let d = diamond();
        assert!(d.validate().is_empty());
        assert_eq!(d.hom_set(0, 1).unwrap().len(), 1);
        assert!(d.hom_set(1, 0).unwrap().is_empty());
        assert_eq!(d.hom_set(3, 3).unwrap(), vec![d.id(3)]);
        assert_eq!(d.hom_set(0, 9), Err(CategoryError::UnknownObject(9)));
    }

    #[test]
    fn hom_sets_partition_morphisms() {
        let d = coequalized_pair();
        let mut seen = vec![0; d.num_morphisms()];
        for x in d.objects() {
            for y in d.objects() {
                for f in d.hom_set(x, y).unwrap() {
                    seen[f] += 1;
                }
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn mono_and_epi() {
        let d = diamond();
        for f in d.morphism_ids() {
            assert!(d.is_mono(f).unwrap());
            assert!(d.is_epi(f).unwrap());
        }
        let c = coequalized_pair();
        let q = c.morphism_by_name("q").unwrap();
        assert!(!c.is_mono(q).unwrap());
        assert!(c.is_epi(q).unwrap());
        assert!(c.is_mono(c.id(1)).unwrap());
        assert_eq!(c.is_mono(99), Err(CategoryError::UnknownMorphism(99)));
    }

    #[test]
    fn identity_nat_and_forced_violation() {
        let d = diamond();
        let rep = SetFunctor::corepresentable(&d, 0);
        assert!(rep.is_functor(&d));
        assert!(check_nat(&d, &rep, &rep, &NatTrans::identity(&rep)).unwrap());

        // two-element constant functor, swap at one object only
        let two = SetFunctor {
            variance: Variance::Covariant,
            carriers: vec![2; 4],
            actions: d.morphism_ids().map(|_| vec![0, 1]).collect(),
        };
        let mut alpha = NatTrans::identity(&two);
        alpha.components[1] = vec![1, 0];
        assert!(!check_nat(&d, &two, &two, &alpha).unwrap());

        let short = NatTrans { components: vec![vec![0, 1]] };
        assert_eq!(check_nat(&d, &two, &two, &short), Err(CategoryError::ComponentMissing(1)));
    }

    #[test]
    fn representables_are_functors() {
        let c = coequalized_pair();
        for x in c.objects() {
            assert!(SetFunctor::corepresentable(&c, x).is_functor(&c));
            assert!(SetFunctor::representable(&c, x).is_functor(&c));
        }
    }

    #[test]
    fn functor_enumeration_matches_filtered_product() {
        let d = diamond();
        let sizes = vec![vec![0, 1, 2]; 4];
        let mut fast = Vec::new();
        for_each_set_functor(&d, Variance::Contravariant, &sizes, |f| fast.push(f.clone()));
        // naive: all tables, then filter
        let mut slow = Vec::new();
        let arrows: Vec<MorId> = d.morphism_ids().filter(|&f| !d.is_identity(f)).collect();
        for code in 0..81usize {
            let carriers: Vec<usize> = (0..4).map(|i| (code / 3usize.pow(i)) % 3).collect();
            let domains: Vec<(usize, usize)> =
                arrows.iter().map(|&f| (carriers[d.cod(f)], carriers[d.dom(f)])).collect();
            let counts: Vec<usize> = domains.iter().map(|&(m, k)| k.pow(m as u32)).collect();
            let total: usize = counts.iter().product();
            for mut idx in 0..total {
                let mut actions: Vec<Vec<usize>> =
                    d.morphism_ids().map(|f| (0..carriers[d.dom(f)]).collect()).collect();
                for (j, &f) in arrows.iter().enumerate() {
                    let (m, k) = domains[j];
                    let mut code_f = idx % counts[j];
                    idx /= counts[j];
                    actions[f] = (0..m)
                        .map(|_| {
                            let v = code_f % k;
                            code_f /= k;
                            v
                        })
                        .collect();
                }
                let cand = SetFunctor { variance: Variance::Contravariant, carriers: carriers.clone(), actions };
                if cand.is_functor(&d) {
                    slow.push(cand);
                }
            }
        }
        fast.sort();
        slow.sort();
        assert_eq!(fast, slow);
    }

    #[test]
    fn nat_enumeration_agrees_with_brute_force() {
        let d = diamond();
        let sizes = vec![vec![1, 2], vec![0, 1], vec![1], vec![1]];
        let mut fs = Vec::new();
        for_each_set_functor(&d, Variance::Covariant, &sizes, |f| fs.push(f.clone()));
        for src in fs.iter().take(6) {
            for tgt in fs.iter().take(6) {
                let nats = enumerate_nat(&d, src, tgt);
                for a in &nats {
                    assert!(check_nat(&d, src, tgt, a).unwrap());
                }
                // brute force count
                let mut count = 0;
                let per: Vec<usize> = (0..4).map(|x| tgt.carriers[x].pow(src.carriers[x] as u32)).collect();
                let total: usize = per.iter().product();
                for mut code in 0..total {
                    let mut comps = Vec::new();
                    for x in 0..4 {
                        let mut c = code % per[x];
                        code /= per[x];
                        comps.push(
                            (0..src.carriers[x])
                                .map(|_| {
                                    let v = c % tgt.carriers[x];
                                    c /= tgt.carriers[x].max(1);
                                    v
                                })
                                .collect(),
                        );
                    }
                    if check_nat(&d, src, tgt, &NatTrans { components: comps }).unwrap() {
                        count += 1;
                    }
                }
                assert_eq!(nats.len(), count);
            }
        }
    }
}
