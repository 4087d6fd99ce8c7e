//! Finite limits by exhaustive cone search, subobject lattices, extremal and
//! effective epimorphisms, and image factorization in set-valued functor
//! categories.

use thiserror::Error;

use crate::fincat::{FinCategory, FunctorData, MorId, NatTrans, ObjId, SetFunctor, Variance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LimitError {
    #[error("diagram labeling is not a functor into the ambient category")]
    InvalidDiagram,
    #[error("cospan legs have different codomains ({0} and {1})")]
    MismatchedCodomains(MorId, MorId),
    #[error("family legs do not share the codomain {0}")]
    MixedCodomains(ObjId),
    #[error("morphism {0} is not a monomorphism")]
    NotMono(MorId),
}

/// A diagram `shape -> C`.
#[derive(Debug, Clone)]
pub struct Diagram {
    pub shape: FinCategory,
    pub labeling: FunctorData,
}

impl Diagram {
    pub fn empty() -> Self {
        Diagram { shape: FinCategory::discrete(0), labeling: FunctorData { obj_map: vec![], mor_map: vec![] } }
    }

    /// The discrete diagram on two objects.
    pub fn pair(cat: &FinCategory, x: ObjId, y: ObjId) -> Self {
        Diagram {
            shape: FinCategory::discrete(2),
            labeling: FunctorData { obj_map: vec![x, y], mor_map: vec![cat.id(x), cat.id(y)] },
        }
    }

    /// The cospan `f -> . <- g`.
    pub fn cospan(cat: &FinCategory, f: MorId, g: MorId) -> Self {
        let shape = FinCategory::cospan();
        // shape morphisms: id_0, id_1, id_2, 0<2, 1<2
        let c = cat.cod(f);
        Diagram {
            shape,
            labeling: FunctorData {
                obj_map: vec![cat.dom(f), cat.dom(g), c],
                mor_map: vec![cat.id(cat.dom(f)), cat.id(cat.dom(g)), cat.id(c), f, g],
            },
        }
    }

    /// The parallel pair `f, g : x -> y`.
    pub fn parallel(cat: &FinCategory, f: MorId, g: MorId) -> Self {
        Diagram {
            shape: FinCategory::parallel_pair(),
            labeling: FunctorData {
                obj_map: vec![cat.dom(f), cat.cod(f)],
                mor_map: vec![cat.id(cat.dom(f)), cat.id(cat.cod(f)), f, g],
            },
        }
    }

    pub fn is_valid(&self, cat: &FinCategory) -> bool {
        self.labeling.is_valid(&self.shape, cat)
    }

    /// The image of this diagram under a functor `cat -> target`.
    pub fn map(&self, functor: &FunctorData) -> Diagram {
        Diagram {
            shape: self.shape.clone(),
            labeling: FunctorData {
                obj_map: self.labeling.obj_map.iter().map(|&x| functor.obj_map[x]).collect(),
                mor_map: self.labeling.mor_map.iter().map(|&f| functor.mor_map[f]).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cone {
    pub apex: ObjId,
    pub legs: Vec<MorId>,
}

/// All cones on `d` with the given apex, in lexicographic leg order.
pub fn cones_at(cat: &FinCategory, d: &Diagram, apex: ObjId) -> Vec<Vec<MorId>> {
    let n = d.shape.num_objects();
    let mut out = Vec::new();
    let mut legs = Vec::with_capacity(n);
    cone_rec(cat, d, apex, &mut legs, &mut out);
    out
}

fn cone_rec(cat: &FinCategory, d: &Diagram, apex: ObjId, legs: &mut Vec<MorId>, out: &mut Vec<Vec<MorId>>) {
    let j = legs.len();
    if j == d.shape.num_objects() {
        out.push(legs.clone());
        return;
    }
    for &leg in cat.hom(apex, d.labeling.obj_map[j]) {
        legs.push(leg);
        // shape morphisms whose endpoints are both assigned, with one of them j
        let ok = d.shape.morphism_ids().all(|s| {
            let (a, b) = (d.shape.dom(s), d.shape.cod(s));
            if a.max(b) != j {
                return true;
            }
            cat.comp(d.labeling.mor_map[s], legs[a]) == legs[b]
        });
        if ok {
            cone_rec(cat, d, apex, legs, out);
        }
        legs.pop();
    }
}

pub fn is_cone(cat: &FinCategory, d: &Diagram, cone: &Cone) -> bool {
    cone.legs.len() == d.shape.num_objects()
        && cone.legs.iter().enumerate().all(|(j, &l)| cat.dom(l) == cone.apex && cat.cod(l) == d.labeling.obj_map[j])
        && d.shape
            .morphism_ids()
            .all(|s| cat.comp(d.labeling.mor_map[s], cone.legs[d.shape.dom(s)]) == cone.legs[d.shape.cod(s)])
}

/// Mediating morphisms `apex(other) -> apex(limit)` that commute with the legs.
fn mediators(cat: &FinCategory, limit: &Cone, other_apex: ObjId, other_legs: &[MorId]) -> usize {
    cat.hom(other_apex, limit.apex)
        .iter()
        .filter(|&&u| limit.legs.iter().zip(other_legs).all(|(&l, &k)| cat.comp(l, u) == k))
        .count()
}

/// True iff `cone` is a cone on `d` through which every cone factors uniquely.
pub fn is_limit_cone(cat: &FinCategory, d: &Diagram, cone: &Cone) -> bool {
    if !is_cone(cat, d, cone) {
        return false;
    }
    cat.objects().all(|k| cones_at(cat, d, k).iter().all(|legs| mediators(cat, cone, k, legs) == 1))
}

/// The terminal cone on `d`, or `None` when no cone is terminal. The first
/// limiting cone in (apex, legs) order is returned.
pub fn limit(cat: &FinCategory, d: &Diagram) -> Result<Option<Cone>, LimitError> {
    if !d.is_valid(cat) {
        return Err(LimitError::InvalidDiagram);
    }
    let all: Vec<Cone> =
        cat.objects().flat_map(|a| cones_at(cat, d, a).into_iter().map(move |legs| Cone { apex: a, legs })).collect();
    Ok(all.iter().find(|cand| all.iter().all(|k| mediators(cat, cand, k.apex, &k.legs) == 1)).cloned())
}

/// A pullback square: `f ∘ left = g ∘ right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PullbackSquare {
    pub apex: ObjId,
    /// projection to `dom f`
    pub left: MorId,
    /// projection to `dom g`
    pub right: MorId,
}

pub fn pullback(cat: &FinCategory, f: MorId, g: MorId) -> Result<Option<PullbackSquare>, LimitError> {
    if cat.cod(f) != cat.cod(g) {
        return Err(LimitError::MismatchedCodomains(f, g));
    }
    let (a, b) = (cat.dom(f), cat.dom(g));
    let mut cones = Vec::new();
    for p in cat.objects() {
        for &l in cat.hom(p, a) {
            for &r in cat.hom(p, b) {
                if cat.comp(f, l) == cat.comp(g, r) {
                    cones.push(PullbackSquare { apex: p, left: l, right: r });
                }
            }
        }
    }
    Ok(cones
        .iter()
        .find(|cand| {
            cones.iter().all(|k| {
                cat.hom(k.apex, cand.apex)
                    .iter()
                    .filter(|&&u| cat.comp(cand.left, u) == k.left && cat.comp(cand.right, u) == k.right)
                    .count()
                    == 1
            })
        })
        .copied())
}

/// Subobjects of `object`, one representative mono per class (the least
/// mor id in the class), with `leq[i][j]` iff subobject `i` factors through `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubobjectLattice {
    pub object: ObjId,
    pub subobjects: Vec<MorId>,
    pub leq: Vec<Vec<bool>>,
}

impl SubobjectLattice {
    /// Index of the class containing the mono `m`.
    pub fn class_of(&self, cat: &FinCategory, m: MorId) -> Option<usize> {
        self.subobjects.iter().position(|&r| cat.factors_through(m, r) && cat.factors_through(r, m))
    }

    pub fn top(&self, cat: &FinCategory) -> usize {
        self.class_of(cat, cat.id(self.object)).expect("identity is a subobject")
    }
}

pub fn subobject_lattice(cat: &FinCategory, x: ObjId) -> SubobjectLattice {
    let monos: Vec<MorId> = cat.into_object(x).into_iter().filter(|&m| cat.is_mono(m).expect("known id")).collect();
    let mut reps: Vec<MorId> = Vec::new();
    for m in monos {
        if !reps.iter().any(|&r| cat.factors_through(m, r) && cat.factors_through(r, m)) {
            reps.push(m);
        }
    }
    let leq = reps.iter().map(|&u| reps.iter().map(|&v| cat.factors_through(u, v)).collect()).collect();
    SubobjectLattice { object: x, subobjects: reps, leq }
}

/// True iff the only subobject of `y` through which every leg factors is `y`
/// itself. The empty family is allowed.
pub fn is_extremal_epi_family(cat: &FinCategory, y: ObjId, legs: &[MorId]) -> Result<bool, LimitError> {
    if legs.iter().any(|&l| cat.cod(l) != y) {
        return Err(LimitError::MixedCodomains(y));
    }
    let lattice = subobject_lattice(cat, y);
    Ok(lattice
        .subobjects
        .iter()
        .filter(|&&m| !cat.is_iso(m))
        .all(|&m| !legs.iter().all(|&l| cat.factors_through(l, m))))
}

/// The object through which `f` is the coequalizer of its kernel pair.
/// `None` when the kernel pair or the required coequalizer test cannot be
/// carried out (missing pullback).
pub fn is_effective_epi(cat: &FinCategory, f: MorId) -> Option<bool> {
    let kernel = pullback(cat, f, f).ok()??;
    let (p, q) = (kernel.left, kernel.right);
    let (x, y) = (cat.dom(f), cat.cod(f));
    for z in cat.objects() {
        for &g in cat.hom(x, z) {
            if cat.comp(g, p) != cat.comp(g, q) {
                continue;
            }
            let through = cat.hom(y, z).iter().filter(|&&u| cat.comp(u, f) == g).count();
            if through != 1 {
                return Some(false);
            }
        }
    }
    Some(true)
}

/// Factors `f = mono ∘ epi` with `epi` effective; returns `(epi, mono)` for
/// the least mono id admitting such a factorization.
pub fn image_factorization(cat: &FinCategory, f: MorId) -> Option<(MorId, MorId)> {
    let (x, y) = (cat.dom(f), cat.cod(f));
    for m in cat.into_object(y) {
        if !cat.is_mono(m).expect("known id") {
            continue;
        }
        for &e in cat.hom(x, cat.dom(m)) {
            if cat.comp(m, e) == f && is_effective_epi(cat, e) == Some(true) {
                return Some((e, m));
            }
        }
    }
    None
}

/// Least strict initial object: initial, and every morphism into it is iso.
pub fn strict_initial(cat: &FinCategory) -> Option<ObjId> {
    cat.objects().find(|&i| {
        cat.objects().all(|x| cat.hom(i, x).len() == 1) && cat.into_object(i).into_iter().all(|f| cat.is_iso(f))
    })
}

/// Pointwise image factorization of `alpha: source => target`: the image
/// subfunctor together with the surjective and injective parts.
pub fn set_image_factorization(
    cat: &FinCategory,
    target: &SetFunctor,
    alpha: &NatTrans,
) -> (SetFunctor, NatTrans, NatTrans) {
    let images = alpha.images();
    let (image, mono) = target.restrict_to(cat, &images);
    let epi = NatTrans {
        components: alpha
            .components
            .iter()
            .zip(&images)
            .map(|(c, img)| c.iter().map(|e| img.binary_search(e).expect("in image")).collect())
            .collect(),
    };
    (image, epi, mono)
}

/// Limit of a covariant set-valued functor on a finite shape: the compatible
/// tuples `(a_j)_j` with `F(s)(a_dom s) = a_cod s`, in lexicographic order.
pub fn set_limit(shape: &FinCategory, functor: &SetFunctor) -> Vec<Vec<usize>> {
    assert_eq!(functor.variance, Variance::Covariant);
    let mut out = Vec::new();
    let mut tuple = Vec::with_capacity(shape.num_objects());
    set_limit_rec(shape, functor, &mut tuple, &mut out);
    out
}

fn set_limit_rec(shape: &FinCategory, functor: &SetFunctor, tuple: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let j = tuple.len();
    if j == shape.num_objects() {
        out.push(tuple.clone());
        return;
    }
    for a in 0..functor.carriers[j] {
        tuple.push(a);
        let ok = shape.morphism_ids().all(|s| {
            let (d, c) = (shape.dom(s), shape.cod(s));
            d.max(c) != j || functor.actions[s][tuple[d]] == tuple[c]
        });
        if ok {
            set_limit_rec(shape, functor, tuple, out);
        }
        tuple.pop();
    }
}
