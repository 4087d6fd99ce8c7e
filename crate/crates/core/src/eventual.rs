//! The category of small lex functors, opposite-oriented, with the embedding
//! `φ(x) = C(x, -)`; models as limits of representables over their category
//! of elements, and the co-Yoneda colimit of evaluation functors.

use std::collections::HashMap;

use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::fincat::{enumerate_nat, FinCategory, FunctorData, MorId, Morphism, NatTrans, ObjId, SetFunctor};
use crate::limits::{self, Cone, Diagram};
use crate::models::{category_of_elements, enumerate_models, nat_via_limit, ModelBound};
use crate::site::SiteSpec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EventualError {
    #[error("enumeration budget exceeded: {0} lex functors, at most {1} allowed")]
    Budget(usize, usize),
    #[error("the representable at {0} has a carrier above the bound")]
    RepresentableTooLarge(String),
    #[error("functor is not an object of the materialized category")]
    UnknownObject,
}

/// Lex functors with carriers at most `B`; `Hom(N, M) = Nat(M, N)`.
#[derive(Debug, Clone)]
pub struct CTilde {
    pub category: FinCategory,
    pub functors: Vec<SetFunctor>,
    /// underlying transformation of each morphism (`cod => dom`)
    pub nat: Vec<NatTrans>,
    pub phi_obj: Vec<ObjId>,
    pub phi_mor: Vec<MorId>,
    index: HashMap<(ObjId, ObjId, NatTrans), MorId>,
}

impl CTilde {
    pub fn object_of(&self, m: &SetFunctor) -> Option<ObjId> {
        self.functors.iter().position(|f| f == m)
    }

    /// The morphism `i -> j` whose transformation is `alpha: M_j => M_i`.
    pub fn morphism(&self, i: ObjId, j: ObjId, alpha: &NatTrans) -> Option<MorId> {
        self.index.get(&(i, j, alpha.clone())).copied()
    }

    /// `φ` is a functor and bijective on every hom-set.
    pub fn phi_fully_faithful(&self, cat: &FinCategory) -> bool {
        let phi = FunctorData { obj_map: self.phi_obj.clone(), mor_map: self.phi_mor.clone() };
        phi.is_valid(cat, &self.category)
            && cat.objects().all(|x| {
                cat.objects().all(|y| {
                    let mut images: Vec<MorId> = cat.hom(x, y).iter().map(|&f| self.phi_mor[f]).collect();
                    images.sort_unstable();
                    images.dedup();
                    images.len() == cat.hom(x, y).len()
                        && images.len() == self.category.hom(self.phi_obj[x], self.phi_obj[y]).len()
                })
            })
    }
}

/// Precomposition `f^*: C(y, -) => C(x, -)` for `f: x -> y`.
pub fn precomposition(cat: &FinCategory, f: MorId) -> NatTrans {
    let (x, y) = (cat.dom(f), cat.cod(f));
    NatTrans {
        components: cat
            .objects()
            .map(|z| cat.hom(y, z).iter().map(|&g| crate::fincat::position(cat.hom(x, z), cat.comp(g, f))).collect())
            .collect(),
    }
}

pub fn build_ctilde(site: &SiteSpec, bound: ModelBound, max_objects: usize) -> Result<CTilde, EventualError> {
    let cat = &site.base;
    let functors: Vec<SetFunctor> = enumerate_models(site, bound, false).into_iter().map(|m| m.functor).collect();
    if functors.len() > max_objects {
        return Err(EventualError::Budget(functors.len(), max_objects));
    }
    let k = functors.len();
    let mut morphisms = Vec::new();
    let mut nat = Vec::new();
    let mut index = HashMap::new();
    let mut identity = vec![0; k];
    for i in 0..k {
        for j in 0..k {
            for alpha in enumerate_nat(cat, &functors[j], &functors[i]) {
                let id = morphisms.len();
                if i == j && alpha == NatTrans::identity(&functors[i]) {
                    identity[i] = id;
                }
                morphisms.push(Morphism { name: format!("t{id}"), dom: i, cod: j });
                index.insert((i, j, alpha.clone()), id);
                nat.push(alpha);
            }
        }
    }
    let m = morphisms.len();
    let mut comp = vec![None; m * m];
    for (a, ma) in morphisms.iter().enumerate() {
        for (b, mb) in morphisms.iter().enumerate() {
            if mb.cod == ma.dom {
                // a ∘ b in the opposite orientation is nat[b] ∘ nat[a]
                let t = nat[b].after(&nat[a]);
                comp[a * m + b] = Some(index[&(mb.dom, ma.cod, t)]);
            }
        }
    }
    let names = (0..k).map(|i| format!("M{i}")).collect();
    let category = FinCategory::from_tables(names, morphisms, identity, comp);
    let mut phi_obj = Vec::new();
    for x in cat.objects() {
        let rep = SetFunctor::corepresentable(cat, x);
        match functors.iter().position(|f| *f == rep) {
            Some(i) => phi_obj.push(i),
            None => return Err(EventualError::RepresentableTooLarge(cat.object_name(x).to_string())),
        }
    }
    let phi_mor = cat
        .morphism_ids()
        .map(|f| index[&(phi_obj[cat.dom(f)], phi_obj[cat.cod(f)], precomposition(cat, f))])
        .collect();
    Ok(CTilde { category, functors, nat, phi_obj, phi_mor, index })
}

/// `M` as the apex of the cone `π_(x,p): M -> φx` over `∫M`, and whether that
/// cone is limiting in the materialized category.
#[derive(Debug, Clone)]
pub struct DeltaCertificate {
    pub object: ObjId,
    pub diagram: Diagram,
    pub cone: Cone,
    pub limiting: bool,
}

pub fn delta(cat: &FinCategory, ct: &CTilde, m: &SetFunctor) -> Result<DeltaCertificate, EventualError> {
    let object = ct.object_of(m).ok_or(EventualError::UnknownObject)?;
    let el = category_of_elements(cat, m);
    let labeling = FunctorData {
        obj_map: el.objects.iter().map(|&(x, _)| ct.phi_obj[x]).collect(),
        mor_map: el.arrow.iter().map(|&f| ct.phi_mor[f]).collect(),
    };
    let diagram = Diagram { shape: el.category, labeling };
    let legs = el
        .objects
        .iter()
        .map(|&(x, p)| {
            // C(x, -) => M picking p
            let pick = NatTrans {
                components: cat.objects().map(|z| cat.hom(x, z).iter().map(|&g| m.apply(g, p)).collect()).collect(),
            };
            ct.morphism(object, ct.phi_obj[x], &pick).expect("Yoneda transformation is natural")
        })
        .collect();
    let cone = Cone { apex: object, legs };
    let limiting = limits::is_limit_cone(&ct.category, &diagram, &cone);
    Ok(DeltaCertificate { object, diagram, cone, limiting })
}

/// `lim_{∫M} N ≅ Nat(M, N)` is a bijection, natural in `N` along every
/// transformation out of `N` and in `M` along every transformation into `M`,
/// with all other functors drawn from `family`.
pub fn delta_iso_check(cat: &FinCategory, family: &[SetFunctor], m: &SetFunctor, n: &SetFunctor) -> bool {
    let base = nat_via_limit(cat, m, n);
    if !base.is_bijective() {
        return false;
    }
    let el_m = category_of_elements(cat, m);
    let delta_of = |alpha: &NatTrans, el: &[(ObjId, usize)]| -> Vec<usize> {
        el.iter().map(|&(x, p)| alpha.components[x][p]).collect()
    };
    for other in family {
        // along beta: N => N'
        for beta in enumerate_nat(cat, n, other) {
            for alpha in &base.nats {
                let moved: Vec<usize> = delta_of(alpha, &el_m.objects)
                    .iter()
                    .zip(&el_m.objects)
                    .map(|(&a, &(x, _))| beta.components[x][a])
                    .collect();
                if moved != delta_of(&beta.after(alpha), &el_m.objects) {
                    return false;
                }
            }
        }
        // along gamma: M' => M
        let el_o = category_of_elements(cat, other);
        for gamma in enumerate_nat(cat, other, m) {
            for alpha in &base.nats {
                let t = delta_of(alpha, &el_m.objects);
                let moved: Vec<usize> = el_o
                    .objects
                    .iter()
                    .map(|&(x, q)| {
                        let p = gamma.components[x][q];
                        t[el_m.objects.iter().position(|&e| e == (x, p)).expect("element of M")]
                    })
                    .collect();
                if moved != delta_of(&alpha.after(&gamma), &el_o.objects) {
                    return false;
                }
            }
        }
    }
    true
}

/// For the object `v`: for every `N` among `models`, the comparison from
/// `colim_{(M,p) ∈ ∫ev_v} Nat(M, N)` to `N(v)` is bijective.
pub fn eta_component_check(cat: &FinCategory, models: &[SetFunctor], v: ObjId) -> bool {
    let k = models.len();
    let nats: Vec<Vec<Vec<NatTrans>>> =
        (0..k).map(|i| (0..k).map(|j| enumerate_nat(cat, &models[i], &models[j])).collect()).collect();
    let lookup: Vec<Vec<HashMap<&NatTrans, usize>>> = nats
        .iter()
        .map(|row| row.iter().map(|list| list.iter().enumerate().map(|(i, a)| (a, i)).collect()).collect())
        .collect();
    (0..k).all(|target| {
        // nodes (M, p, beta) with beta: M => N
        let mut offset = vec![vec![0; 0]; k];
        let mut total = 0;
        for i in 0..k {
            offset[i] = (0..models[i].carriers[v])
                .map(|_| {
                    let o = total;
                    total += nats[i][target].len();
                    o
                })
                .collect();
        }
        let mut uf = UnionFind::<usize>::new(total);
        for i in 0..k {
            for j in 0..k {
                for alpha in &nats[i][j] {
                    for p in 0..models[i].carriers[v] {
                        let q = alpha.components[v][p];
                        for (b, beta) in nats[j][target].iter().enumerate() {
                            let composite = beta.after(alpha);
                            let c = lookup[i][target][&composite];
                            uf.union(offset[i][p] + c, offset[j][q] + b);
                        }
                    }
                }
            }
        }
        let mut image_of_root: HashMap<usize, usize> = HashMap::new();
        for i in 0..k {
            for p in 0..models[i].carriers[v] {
                for (b, beta) in nats[i][target].iter().enumerate() {
                    let root = uf.find_mut(offset[i][p] + b);
                    let value = beta.components[v][p];
                    if *image_of_root.entry(root).or_insert(value) != value {
                        return false;
                    }
                }
            }
        }
        let mut values: Vec<usize> = image_of_root.values().copied().collect();
        values.sort_unstable();
        values.dedup();
        values.len() == image_of_root.len() && values.len() == models[target].carriers[v]
    })
}
