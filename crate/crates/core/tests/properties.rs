mod common;

use finsite::chase::{pairing, unpairing};
use finsite::fincat::{FinCategory, NatTrans, ObjId, SetFunctor, Variance};
use finsite::limits::{is_limit_cone, limit, pullback, set_image_factorization, Diagram};
use finsite::models::{enumerate_models, lex_hull, LexStructure, ModelBound};
use finsite::presheaf::{is_sheaf, sheafify};
use finsite::site::{generate_sieve_topology, paste, saturate_families, tree_saturation, Family, SiteSpec};
use proptest::prelude::*;

fn poset(n: usize, bits: &[bool]) -> FinCategory {
    let mut leq = vec![vec![false; n]; n];
    let mut k = 0;
    for i in 0..n {
        leq[i][i] = true;
        for j in i + 1..n {
            leq[i][j] = bits[k];
            k += 1;
        }
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                if leq[i][m] && leq[m][j] {
                    leq[i][j] = true;
                }
            }
        }
    }
    FinCategory::from_order((0..n).map(|i| format!("x{i}")).collect(), &leq).unwrap()
}

/// Same as `poset` with a top element appended.
fn topped(n: usize, bits: &[bool]) -> FinCategory {
    let mut full = Vec::new();
    let mut k = 0;
    for i in 0..=n {
        for j in i + 1..=n {
            if j == n {
                full.push(true);
            } else {
                full.push(bits[k]);
                k += 1;
            }
        }
    }
    poset(n + 1, &full)
}

fn site(cat: FinCategory, picks: &[(usize, u8)]) -> SiteSpec {
    let covers = picks
        .iter()
        .map(|&(x, mask)| {
            let x = x % cat.num_objects();
            let into = cat.into_object(x);
            let legs = into.iter().enumerate().filter(|(i, _)| mask >> (i % 8) & 1 == 1).map(|(_, &f)| f);
            Family::new(&cat, x, legs).unwrap()
        })
        .collect();
    SiteSpec::new(cat, covers).unwrap()
}

/// `⊔_i y(x_i)` on a poset, elements at `z` listed by summand.
fn sum_of_representables(cat: &FinCategory, xs: &[ObjId]) -> (SetFunctor, Vec<Vec<usize>>) {
    let summands: Vec<Vec<usize>> =
        cat.objects().map(|z| (0..xs.len()).filter(|&i| !cat.hom(z, xs[i]).is_empty()).collect()).collect();
    let actions = cat
        .morphism_ids()
        .map(|f| {
            let (z, w) = (cat.dom(f), cat.cod(f));
            summands[w].iter().map(|i| summands[z].binary_search(i).unwrap()).collect()
        })
        .collect();
    let p =
        SetFunctor { variance: Variance::Contravariant, carriers: summands.iter().map(Vec::len).collect(), actions };
    (p, summands)
}

fn close(cat: &FinCategory, p: &SetFunctor, seed: &[(ObjId, usize)]) -> Vec<Vec<usize>> {
    let mut member: Vec<Vec<bool>> = p.carriers.iter().map(|&k| vec![false; k]).collect();
    let mut stack: Vec<(ObjId, usize)> = seed.to_vec();
    while let Some((x, e)) = stack.pop() {
        if member[x][e] {
            continue;
        }
        member[x][e] = true;
        for f in cat.morphism_ids().filter(|&f| p.action_source(cat, f) == x) {
            stack.push((p.action_target(cat, f), p.apply(f, e)));
        }
    }
    member.iter().map(|v| (0..v.len()).filter(|&e| v[e]).collect()).collect()
}

/// A presheaf: a random subpresheaf of a sum of representables.
fn presheaf(cat: &FinCategory, xs: &[usize], keep: &[bool]) -> SetFunctor {
    let xs: Vec<ObjId> = xs.iter().map(|&x| x % cat.num_objects()).collect();
    let (p, _) = sum_of_representables(cat, &xs);
    let seed: Vec<(ObjId, usize)> =
        p.elements().into_iter().enumerate().filter(|(i, _)| keep[i % keep.len()]).map(|(_, el)| el).collect();
    p.restrict_to(cat, &close(cat, &p, &seed)).0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pairing_round_trips(a in 0u64..1 << 20, b in 0u64..1 << 20) {
        let n = pairing(a, b);
        prop_assert_eq!(unpairing(n), (a, b));
        prop_assert!(n >= a && n >= b);
    }

    #[test]
    fn homs_partition_morphisms(n in 1usize..6, bits in prop::collection::vec(any::<bool>(), 15)) {
        let cat = poset(n, &bits);
        let mut seen = vec![0; cat.num_morphisms()];
        for x in cat.objects() {
            for y in cat.objects() {
                prop_assert_eq!(cat.hom(x, y).to_vec(), common::arrows_between(&cat, x, y));
                for &f in cat.hom(x, y) {
                    seen[f] += 1;
                }
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert!(common::category_laws_hold(&cat));
    }

    #[test]
    fn binary_limits_are_meets(n in 1usize..6, bits in prop::collection::vec(any::<bool>(), 15), x in 0usize..6, y in 0usize..6) {
        let cat = poset(n, &bits);
        let (x, y) = (x % n, y % n);
        let d = Diagram::pair(&cat, x, y);
        let first = limit(&cat, &d).unwrap();
        prop_assert_eq!(&first, &limit(&cat, &d).unwrap());
        let lower: Vec<ObjId> = cat.objects().filter(|&z| !cat.hom(z, x).is_empty() && !cat.hom(z, y).is_empty()).collect();
        let meet = lower.iter().copied().find(|&m| lower.iter().all(|&z| !cat.hom(z, m).is_empty()));
        prop_assert_eq!(first.as_ref().map(|c| c.apex), meet);
        if let Some(cone) = first {
            prop_assert!(is_limit_cone(&cat, &d, &cone));
        }
    }

    #[test]
    fn pullbacks_match_oracle(n in 1usize..6, bits in prop::collection::vec(any::<bool>(), 15), f in 0usize..40, g in 0usize..40) {
        let cat = poset(n, &bits);
        let z = cat.cod(f % cat.num_morphisms());
        let into = cat.into_object(z);
        let (f, g) = (into[f % into.len()], into[g % into.len()]);
        let ours = pullback(&cat, f, g).unwrap().map(|sq| (sq.apex, sq.left, sq.right));
        prop_assert_eq!(ours, common::oracle_pullback(&cat, f, g));
    }

    #[test]
    fn image_factorization(
        n in 1usize..5,
        bits in prop::collection::vec(any::<bool>(), 10),
        xs in prop::collection::vec(0usize..5, 1..4),
        ys in prop::collection::vec(0usize..5, 1..4),
        keep in prop::collection::vec(any::<bool>(), 1..12),
        choice in prop::collection::vec(any::<usize>(), 4),
    ) {
        let cat = poset(n, &bits);
        let xs: Vec<ObjId> = xs.iter().map(|&x| x % n).collect();
        let (p, summands) = sum_of_representables(&cat, &xs);
        let q = presheaf(&cat, &ys, &keep);
        // a map out of a sum of representables is a choice of elements
        prop_assume!(xs.iter().all(|&x| q.carriers[x] > 0));
        let picked: Vec<usize> = xs.iter().zip(&choice).map(|(&x, &c)| c % q.carriers[x]).collect();
        let alpha = NatTrans {
            components: cat
                .objects()
                .map(|z| summands[z].iter().map(|&i| q.apply(cat.hom(z, xs[i])[0], picked[i])).collect())
                .collect(),
        };
        prop_assert!(common::oracle_nats(&cat, &p, &q).contains(&alpha));
        let (image, epi, mono) = set_image_factorization(&cat, &q, &alpha);
        prop_assert!(common::functor_laws_hold(&cat, &image));
        prop_assert!(epi.is_pointwise_surjective(&image));
        prop_assert!(mono.is_pointwise_injective());
        prop_assert_eq!(common::compose_nat(&mono, &epi), alpha);
        prop_assert!(common::oracle_nats(&cat, &image, &q).contains(&mono));
    }

    #[test]
    fn generated_topologies_satisfy_axioms(
        n in 1usize..5,
        bits in prop::collection::vec(any::<bool>(), 10),
        picks in prop::collection::vec((0usize..5, any::<u8>()), 0..4),
    ) {
        let s = site(poset(n, &bits), &picks);
        let topology = generate_sieve_topology(&s);
        prop_assert!(topology.axiom_violations(&s.base).is_empty());
        let oracle = common::OracleTopology::new(&s.base, &s.covers);
        for x in s.base.objects() {
            let ours: Vec<Vec<usize>> = topology.covering_sieves(x).map(|sv| sv.arrows.clone()).collect();
            let theirs: Vec<Vec<usize>> = oracle.covering_sieves(x).map(|sv| sv.iter().copied().collect()).collect();
            prop_assert_eq!(ours.len(), theirs.len());
            for sv in ours {
                prop_assert!(theirs.contains(&sv));
            }
        }
    }

    #[test]
    fn saturation_is_closed_under_pasting(
        n in 1usize..5,
        bits in prop::collection::vec(any::<bool>(), 10),
        picks in prop::collection::vec((0usize..5, any::<u8>()), 0..3),
    ) {
        let s = site(topped(n, &bits), &picks);
        let mut runs = vec![saturate_families(&s.base, s.covers.clone())];
        runs.extend(tree_saturation(&s).ok());
        for sat in runs {
            for fam in &s.covers {
                prop_assert!(sat.contains(fam));
            }
            for fam in &sat.families {
                for &l in &fam.legs {
                    for inner in sat.families.iter().filter(|i| i.codomain == s.base.dom(l)) {
                        prop_assert!(sat.contains(&paste(&s.base, fam, l, inner)));
                    }
                }
            }
        }
    }

    #[test]
    fn lex_hull_is_a_closed_subfunctor(
        n in 1usize..4,
        bits in prop::collection::vec(any::<bool>(), 6),
        picks in prop::collection::vec((0usize..4, any::<u8>()), 0..3),
        which in any::<usize>(),
        seed_at in any::<usize>(),
    ) {
        let s = site(topped(n, &bits), &picks);
        let models = enumerate_models(&s, ModelBound::new(2).unwrap(), false);
        let m = &models[which % models.len()].functor;
        let elements = m.elements();
        let mut seed: Vec<Vec<usize>> = vec![Vec::new(); m.carriers.len()];
        if !elements.is_empty() {
            let (x, e) = elements[seed_at % elements.len()];
            seed[x].push(e);
        }
        let lex = LexStructure::new(&s.base);
        let (hull, incl) = lex_hull(&s, &lex, m, &seed).unwrap();
        prop_assert!(common::functor_laws_hold(&s.base, &hull));
        prop_assert!(incl.is_pointwise_injective());
        prop_assert!(common::oracle_nats(&s.base, &hull, m).contains(&incl));
        let images = incl.images();
        for (x, sub) in seed.iter().enumerate() {
            prop_assert!(sub.iter().all(|e| images[x].contains(e)));
        }
        let (again, _) = lex_hull(&s, &lex, m, &images).unwrap();
        prop_assert_eq!(again, hull);
    }

    #[test]
    fn sheafification_is_idempotent(
        n in 1usize..5,
        bits in prop::collection::vec(any::<bool>(), 10),
        picks in prop::collection::vec((0usize..5, any::<u8>()), 0..3),
        xs in prop::collection::vec(0usize..5, 1..3),
        keep in prop::collection::vec(any::<bool>(), 1..8),
    ) {
        let s = site(poset(n, &bits), &picks);
        let topology = generate_sieve_topology(&s);
        let oracle = common::OracleTopology::new(&s.base, &s.covers);
        let p = presheaf(&s.base, &xs, &keep);
        prop_assert_eq!(is_sheaf(&s.base, &p, &topology), common::oracle_is_sheaf(&s.base, &oracle, &p));
        let a = sheafify(&s.base, &p, &topology);
        let sheaf = a.sheaf();
        prop_assert!(common::functor_laws_hold(&s.base, sheaf));
        prop_assert!(common::oracle_is_sheaf(&s.base, &oracle, sheaf));
        prop_assert!(common::oracle_nats(&s.base, &p, sheaf).contains(&a.unit));
        let twice = sheafify(&s.base, sheaf, &topology);
        prop_assert!(twice.unit.is_pointwise_bijective(twice.sheaf()));
        if is_sheaf(&s.base, &p, &topology) {
            prop_assert!(a.unit.is_pointwise_bijective(sheaf));
        }
    }
}
