//! Models of a site: lex, cover-preserving, finite-set-valued functors.
//! Bounded enumeration, natural transformations as limits over the category
//! of elements, the lex hull of a subset and the tensor product with a
//! presheaf.

use std::collections::HashMap;

use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::fincat::{
    enumerate_nat, for_each_set_functor, FinCategory, MorId, Morphism, NatTrans, ObjId, SetFunctor, Variance,
};
use crate::limits::{self, PullbackSquare};
use crate::presheaf::AyTable;
use crate::site::{SieveTopology, SiteSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("model bound must be at least 1")]
    ZeroBound,
    #[error("subset is not contained in the model")]
    NotASubset,
}

/// Largest allowed carrier size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelBound(usize);

impl ModelBound {
    pub fn new(b: usize) -> Result<Self, ModelError> {
        if b == 0 {
            Err(ModelError::ZeroBound)
        } else {
            Ok(ModelBound(b))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// Terminal object and every existing pullback square, the limits a lex
/// functor must preserve.
#[derive(Debug, Clone)]
pub struct LexStructure {
    pub terminal: Option<ObjId>,
    /// `(f, g, square)` for each cospan with `f <= g` that has a pullback
    pub squares: Vec<(MorId, MorId, PullbackSquare)>,
}

impl LexStructure {
    pub fn new(cat: &FinCategory) -> Self {
        let mut squares = Vec::new();
        for f in cat.morphism_ids() {
            for g in f..cat.num_morphisms() {
                if cat.cod(f) == cat.cod(g) {
                    if let Some(sq) = limits::pullback(cat, f, g).expect("common codomain") {
                        squares.push((f, g, sq));
                    }
                }
            }
        }
        LexStructure { terminal: cat.terminal(), squares }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub functor: SetFunctor,
    pub is_lex: bool,
    pub preserves_covers: bool,
}

impl Model {
    pub fn new(site: &SiteSpec, lex: &LexStructure, functor: SetFunctor) -> Self {
        Model { is_lex: is_lex(&site.base, lex, &functor), preserves_covers: preserves_covers(site, &functor), functor }
    }

    pub fn carrier(&self, x: ObjId) -> usize {
        self.functor.carriers[x]
    }
}

/// Terminal preserved and every pullback square sent to a pullback of sets.
pub fn is_lex(cat: &FinCategory, lex: &LexStructure, m: &SetFunctor) -> bool {
    if let Some(t) = lex.terminal {
        if m.carriers[t] != 1 {
            return false;
        }
    }
    lex.squares.iter().all(|&(f, g, sq)| preserves_square(cat, m, f, g, sq))
}

fn preserves_square(cat: &FinCategory, m: &SetFunctor, f: MorId, g: MorId, sq: PullbackSquare) -> bool {
    let (a, b) = (cat.dom(f), cat.dom(g));
    let mut fibered = 0;
    for x in 0..m.carriers[a] {
        for y in 0..m.carriers[b] {
            if m.apply(f, x) == m.apply(g, y) {
                fibered += 1;
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> =
        (0..m.carriers[sq.apex]).map(|e| (m.apply(sq.left, e), m.apply(sq.right, e))).collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs.len() == m.carriers[sq.apex] && pairs.len() == fibered
}

/// Every cover is sent to a jointly surjective family; an empty cover forces
/// an empty carrier.
pub fn preserves_covers(site: &SiteSpec, m: &SetFunctor) -> bool {
    let cat = &site.base;
    site.covers.iter().all(|fam| {
        let mut hit = vec![false; m.carriers[fam.codomain]];
        for &l in &fam.legs {
            for e in 0..m.carriers[cat.dom(l)] {
                hit[m.apply(l, e)] = true;
            }
        }
        hit.iter().all(|&h| h)
    })
}

/// Every model with carriers at most `bound`, in lexicographic order of
/// (carriers, actions). With `require_covers` false, all lex functors.
pub fn enumerate_models(site: &SiteSpec, bound: ModelBound, require_covers: bool) -> Vec<Model> {
    let cat = &site.base;
    let lex = LexStructure::new(cat);
    let sizes: Vec<Vec<usize>> =
        cat.objects().map(|x| if Some(x) == lex.terminal { vec![1] } else { (0..=bound.get()).collect() }).collect();
    let mut out = Vec::new();
    for_each_set_functor(cat, Variance::Covariant, &sizes, |m| {
        if is_lex(cat, &lex, m) {
            let covers = preserves_covers(site, m);
            if covers || !require_covers {
                out.push(Model { functor: m.clone(), is_lex: true, preserves_covers: covers });
            }
        }
    });
    out
}

pub fn nat_transformations(cat: &FinCategory, m: &SetFunctor, n: &SetFunctor) -> Vec<NatTrans> {
    enumerate_nat(cat, m, n)
}

/// The category of elements of a covariant functor. Objects are the elements
/// `(x, p)` in ascending order; morphisms `(f, p): (x, p) -> (y, M(f)p)`.
#[derive(Debug, Clone)]
pub struct Elements {
    pub category: FinCategory,
    pub objects: Vec<(ObjId, usize)>,
    /// underlying arrow of each morphism
    pub arrow: Vec<MorId>,
}

pub fn category_of_elements(cat: &FinCategory, m: &SetFunctor) -> Elements {
    let objects = m.elements();
    let index: HashMap<(ObjId, usize), usize> = objects.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut morphisms = Vec::new();
    let mut arrow = Vec::new();
    let mut ids: HashMap<(MorId, usize), usize> = HashMap::new();
    // identities first, so that object i has identity i
    for &(x, p) in &objects {
        ids.insert((cat.id(x), p), morphisms.len());
        morphisms.push(Morphism {
            name: format!("id_({},{})", cat.object_name(x), p),
            dom: index[&(x, p)],
            cod: index[&(x, p)],
        });
        arrow.push(cat.id(x));
    }
    for f in cat.morphism_ids().filter(|&f| !cat.is_identity(f)) {
        for p in 0..m.carriers[cat.dom(f)] {
            ids.insert((f, p), morphisms.len());
            morphisms.push(Morphism {
                name: format!("({},{})", cat.morphism_name(f), p),
                dom: index[&(cat.dom(f), p)],
                cod: index[&(cat.cod(f), m.apply(f, p))],
            });
            arrow.push(f);
        }
    }
    let k = morphisms.len();
    let mut comp = vec![None; k * k];
    for (a, ma) in morphisms.iter().enumerate() {
        for (b, mb) in morphisms.iter().enumerate() {
            if mb.cod == ma.dom {
                let p = objects[mb.dom].1;
                comp[a * k + b] = Some(ids[&(cat.comp(arrow[a], arrow[b]), p)]);
            }
        }
    }
    let identity = (0..objects.len()).collect();
    let names = objects.iter().map(|&(x, p)| format!("({},{})", cat.object_name(x), p)).collect();
    Elements { category: FinCategory::from_tables(names, morphisms, identity, comp), objects, arrow }
}

/// `Nat(M, N)` computed two ways and matched: brute-force transformations and
/// the limit over `∫M` of `N(x)`.
#[derive(Debug, Clone)]
pub struct NatLimit {
    pub nats: Vec<NatTrans>,
    /// compatible families indexed by the objects of `∫M`
    pub limit: Vec<Vec<usize>>,
    /// `(nat index, limit index)`
    pub pairing: Vec<(usize, usize)>,
}

impl NatLimit {
    pub fn is_bijective(&self) -> bool {
        let mut a: Vec<usize> = self.pairing.iter().map(|p| p.0).collect();
        let mut b: Vec<usize> = self.pairing.iter().map(|p| p.1).collect();
        a.sort_unstable();
        a.dedup();
        b.sort_unstable();
        b.dedup();
        self.nats.len() == self.limit.len()
            && self.pairing.len() == self.nats.len()
            && a.len() == self.nats.len()
            && b.len() == self.limit.len()
    }
}

pub fn nat_via_limit(cat: &FinCategory, m: &SetFunctor, n: &SetFunctor) -> NatLimit {
    let el = category_of_elements(cat, m);
    let composite = SetFunctor {
        variance: Variance::Covariant,
        carriers: el.objects.iter().map(|&(x, _)| n.carriers[x]).collect(),
        actions: el.arrow.iter().map(|&f| n.actions[f].clone()).collect(),
    };
    let limit = limits::set_limit(&el.category, &composite);
    let nats = nat_transformations(cat, m, n);
    let index: HashMap<&[usize], usize> = limit.iter().enumerate().map(|(i, t)| (t.as_slice(), i)).collect();
    let pairing = nats
        .iter()
        .enumerate()
        .filter_map(|(i, alpha)| {
            let tuple: Vec<usize> = el.objects.iter().map(|&(x, p)| alpha.components[x][p]).collect();
            index.get(tuple.as_slice()).map(|&j| (i, j))
        })
        .collect();
    NatLimit { nats, limit, pairing }
}

/// The least subfunctor of the model `m` containing `seed` and closed under
/// images, canonical cover preimages (least element of the least leg that
/// has one) and the elements of terminal and pullback limits.
pub fn lex_hull(
    site: &SiteSpec,
    lex: &LexStructure,
    m: &SetFunctor,
    seed: &[Vec<usize>],
) -> Result<(SetFunctor, NatTrans), ModelError> {
    let cat = &site.base;
    let mut member: Vec<Vec<bool>> = m.carriers.iter().map(|&k| vec![false; k]).collect();
    for (x, sub) in seed.iter().enumerate() {
        for &e in sub {
            *member.get_mut(x).and_then(|v| v.get_mut(e)).ok_or(ModelError::NotASubset)? = true;
        }
    }
    let mut changed = true;
    let add = |member: &mut Vec<Vec<bool>>, x: ObjId, e: usize, changed: &mut bool| {
        if !member[x][e] {
            member[x][e] = true;
            *changed = true;
        }
    };
    while changed {
        changed = false;
        if let Some(t) = lex.terminal {
            if m.carriers[t] > 0 {
                add(&mut member, t, 0, &mut changed);
            }
        }
        for f in cat.morphism_ids() {
            for e in 0..m.carriers[cat.dom(f)] {
                if member[cat.dom(f)][e] {
                    add(&mut member, cat.cod(f), m.apply(f, e), &mut changed);
                }
            }
        }
        for fam in site.nonempty_covers() {
            for b in 0..m.carriers[fam.codomain] {
                if !member[fam.codomain][b] {
                    continue;
                }
                let pre = fam
                    .legs
                    .iter()
                    .find_map(|&l| (0..m.carriers[cat.dom(l)]).find(|&e| m.apply(l, e) == b).map(|e| (cat.dom(l), e)));
                if let Some((u, e)) = pre {
                    add(&mut member, u, e, &mut changed);
                }
            }
        }
        for &(f, g, sq) in &lex.squares {
            for e in 0..m.carriers[sq.apex] {
                let (a, b) = (m.apply(sq.left, e), m.apply(sq.right, e));
                if member[cat.dom(f)][a] && member[cat.dom(g)][b] {
                    add(&mut member, sq.apex, e, &mut changed);
                }
            }
        }
    }
    let subsets: Vec<Vec<usize>> =
        member.iter().map(|v| v.iter().enumerate().filter(|(_, &b)| b).map(|(e, _)| e).collect()).collect();
    Ok(m.restrict_to(cat, &subsets))
}

/// `F ⊗ M`: the quotient of `⊔_x F(x) × M(x)` by `(x, F(f)s, m) ~ (x', s, M(f)m)`.
#[derive(Debug, Clone)]
pub struct Tensor {
    pub size: usize,
    /// class of `(x, s, m)` at `classes[x][s * |M(x)| + m]`
    pub classes: Vec<Vec<usize>>,
    widths: Vec<usize>,
}

impl Tensor {
    pub fn class(&self, x: ObjId, s: usize, m: usize) -> usize {
        self.classes[x][s * self.widths[x] + m]
    }
}

/// Left Kan extension of `m` along `ay`, evaluated at the presheaf `f`.
pub fn lan_ay(cat: &FinCategory, m: &SetFunctor, f: &SetFunctor) -> Tensor {
    let mut offset = Vec::with_capacity(cat.num_objects());
    let mut total = 0;
    for x in cat.objects() {
        offset.push(total);
        total += f.carriers[x] * m.carriers[x];
    }
    let widths: Vec<usize> = m.carriers.clone();
    let node = |x: ObjId, s: usize, e: usize| offset[x] + s * widths[x] + e;
    let mut uf = UnionFind::<usize>::new(total);
    for g in cat.morphism_ids() {
        let (x, y) = (cat.dom(g), cat.cod(g));
        for s in 0..f.carriers[y] {
            for e in 0..m.carriers[x] {
                uf.union(node(x, f.apply(g, s), e), node(y, s, m.apply(g, e)));
            }
        }
    }
    let mut class_of_root = HashMap::new();
    let classes = cat
        .objects()
        .map(|x| {
            (0..f.carriers[x] * m.carriers[x])
                .map(|i| {
                    let root = uf.find_mut(offset[x] + i);
                    let next = class_of_root.len();
                    *class_of_root.entry(root).or_insert(next)
                })
                .collect()
        })
        .collect();
    Tensor { size: class_of_root.len(), classes, widths }
}

/// `α ⊗ M: F ⊗ M -> G ⊗ M`.
pub fn lan_map(
    cat: &FinCategory,
    source: &Tensor,
    target: &Tensor,
    m: &SetFunctor,
    f: &SetFunctor,
    alpha: &NatTrans,
) -> Vec<usize> {
    let mut out = vec![usize::MAX; source.size];
    for x in cat.objects() {
        for s in 0..f.carriers[x] {
            for e in 0..m.carriers[x] {
                out[source.class(x, s, e)] = target.class(x, alpha.components[x][s], e);
            }
        }
    }
    out
}

/// `m ↦ [(x, η(id_x), m)]` is a bijection `M(x) -> Lan_ay M (ay x)` natural in
/// `x`, for every object.
pub fn eta_check(cat: &FinCategory, topology: &SieveTopology, table: &AyTable, m: &SetFunctor) -> bool {
    let tensors: Vec<Tensor> = cat.objects().map(|x| lan_ay(cat, m, table.sheaf(x))).collect();
    let eta: Vec<Vec<usize>> = cat
        .objects()
        .map(|x| {
            let top = table.eta(cat, cat.id(x));
            (0..m.carriers[x]).map(|e| tensors[x].class(x, top, e)).collect()
        })
        .collect();
    let bijective = cat.objects().all(|x| {
        let mut v = eta[x].clone();
        v.sort_unstable();
        v.dedup();
        v.len() == m.carriers[x] && v.len() == tensors[x].size
    });
    bijective
        && cat.morphism_ids().all(|f| {
            let (x, y) = (cat.dom(f), cat.cod(f));
            let map = table.map(cat, topology, f);
            let lan = lan_map(cat, &tensors[x], &tensors[y], m, table.sheaf(x), &map);
            (0..m.carriers[x]).all(|e| lan[eta[x][e]] == eta[y][m.apply(f, e)])
        })
}

/// Partition of `models` into isomorphism classes, each listed by index.
pub fn iso_classes(cat: &FinCategory, models: &[Model]) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, m) in models.iter().enumerate() {
        let found = classes.iter_mut().find(|class| {
            let r = &models[class[0]].functor;
            r.carriers == m.functor.carriers
                && nat_transformations(cat, r, &m.functor).iter().any(|a| a.is_pointwise_bijective(&m.functor))
        });
        match found {
            Some(class) => class.push(i),
            None => classes.push(vec![i]),
        }
    }
    classes
}

/// `C(x, -)` as the model it is when `x` has no proper covers to preserve.
pub fn representable_model(site: &SiteSpec, lex: &LexStructure, x: ObjId) -> Model {
    Model::new(site, lex, SetFunctor::corepresentable(&site.base, x))
}
