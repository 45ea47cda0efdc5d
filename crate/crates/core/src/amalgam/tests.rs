use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use super::*;
use crate::linear::Subspace;
use crate::module::check_phi1;
use crate::ring::{ideal_generated, FiniteRing};

fn labels(pairs: &[(Name, Label)]) -> BTreeMap<Name, Label> {
    pairs.iter().copied().collect()
}

#[test]
fn equivalence_amalgam_examples() {
    // J classes {a},{b}; K classes {a},{c}; a=0, b=1, c=2
    let j = labels(&[(0, 0), (1, 1)]);
    let k = labels(&[(0, 5), (2, 6)]);
    let ell: BTreeMap<Label, Label> = [(0, 5), (1, 6)].into_iter().collect();
    let e = amalgamate_equivalence(&j, &k, &ell).unwrap();
    assert_eq!(e[&1], e[&2]);
    assert_ne!(e[&0], e[&1]);

    // K = I: nothing new, E_ℓ = E^J up to labels
    let j = labels(&[(0, 0), (1, 0), (2, 1)]);
    let k = labels(&[(0, 3), (1, 3), (2, 4)]);
    let ell: BTreeMap<Label, Label> = [(0, 3), (1, 4)].into_iter().collect();
    assert_eq!(amalgamate_equivalence(&j, &k, &ell).unwrap(), k);

    // not permissible at the shared point 0
    let j = labels(&[(0, 0), (1, 1)]);
    let k = labels(&[(0, 5), (2, 6)]);
    let bad: BTreeMap<Label, Label> = [(0, 6), (1, 5)].into_iter().collect();
    assert!(matches!(amalgamate_equivalence(&j, &k, &bad), Err(AmalgamError::NotPermissible(0))));
}

/// All set partitions of `xs` as label maps.
fn partitions(xs: &[Name]) -> Vec<BTreeMap<Name, Label>> {
    if xs.is_empty() {
        return vec![BTreeMap::new()];
    }
    let mut out = Vec::new();
    for p in partitions(&xs[1..]) {
        let used: BTreeSet<Label> = p.values().copied().collect();
        for l in used.iter().copied().chain([used.len() as Label]) {
            let mut q = p.clone();
            q.insert(xs[0], l);
            out.push(q);
        }
    }
    out
}

fn same(p: &BTreeMap<Name, Label>, x: Name, y: Name) -> bool {
    p[&x] == p[&y]
}

proptest! {
    #[test]
    fn equivalence_amalgam_is_the_unique_compatible_relation(
        jl in proptest::collection::vec(0u32..3, 4),
        kl in proptest::collection::vec(0u32..3, 4),
        shared in 0usize..3,
        seed in 0u64..1000,
    ) {
        // J = {0..4}, K = {0..shared} ∪ {10..}, shared points carry J's pattern in K
        let j: BTreeMap<Name, Label> = (0..4).map(|x| (x as Name, jl[x])).collect();
        let mut k: BTreeMap<Name, Label> = BTreeMap::new();
        let mut ell: BTreeMap<Label, Label> = BTreeMap::new();
        for x in 0..shared {
            let lk = ell.entry(jl[x]).or_insert(10 + jl[x]);
            k.insert(x as Name, *lk);
        }
        for (i, &l) in kl.iter().enumerate() {
            k.insert(10 + i as Name, 10 + l);
        }
        // optionally match one further J-class to an unused K-class
        let used: BTreeSet<Label> = ell.values().copied().collect();
        let spare_k: Vec<Label> = k.values().copied().filter(|l| !used.contains(l)).collect::<BTreeSet<_>>().into_iter().collect();
        let spare_j: Vec<Label> = j.values().copied().filter(|l| !ell.contains_key(l)).collect::<BTreeSet<_>>().into_iter().collect();
        if seed % 2 == 0 && !spare_k.is_empty() && !spare_j.is_empty() {
            ell.insert(spare_j[seed as usize % spare_j.len()], spare_k[seed as usize % spare_k.len()]);
        }
        let e = amalgamate_equivalence(&j, &k, &ell).unwrap();
        let all: Vec<Name> = e.keys().copied().collect();
        let compatible: Vec<_> = partitions(&all)
            .into_iter()
            .filter(|p| {
                all.iter().all(|&x| all.iter().all(|&y| {
                    let want = match (j.get(&x), k.get(&y), j.get(&y), k.get(&x)) {
                        _ if j.contains_key(&x) && j.contains_key(&y) => Some(j[&x] == j[&y]),
                        _ if k.contains_key(&x) && k.contains_key(&y) => Some(k[&x] == k[&y]),
                        (Some(lj), Some(lk), _, _) => Some(ell.get(lj) == Some(lk)),
                        (_, _, Some(lj), Some(lk)) => Some(ell.get(lj) == Some(lk)),
                        _ => None,
                    };
                    want.is_none_or(|w| w == same(p, x, y))
                }))
            })
            .collect();
        prop_assert_eq!(compatible.len(), 1);
        for &x in &all {
            for &y in &all {
                prop_assert_eq!(same(&compatible[0], x, y), same(&e, x, y));
            }
        }
    }
}

fn f2() -> TaggedClass {
    TaggedClass::prime_field(2)
}

fn single(name: Name) -> KModel {
    KModel { basis: vec![name], tags: Vec::new() }
}

#[test]
fn amalgam_of_two_lines_over_f2() {
    let c = f2();
    let n = c.disjoint_amalgamate(&c.seed(), &single(0), &single(1)).unwrap();
    assert_eq!(n.dim(), 2);
    let t = c.to_tagged_module(&n).unwrap();
    assert!(check_phi1(&t, &c.basis_elements(&n), &c.ideal).unwrap());
    let m = single(0);
    assert_eq!(c.disjoint_amalgamate(&m, &m, &m).unwrap(), m);
}

#[test]
fn amalgam_over_z4_modulo_two() {
    let z4 = FiniteRing::zmod(4);
    let i = ideal_generated(&z4, &[2]);
    let c = TaggedClass::new(z4, i.clone()).unwrap();
    let n = c.disjoint_amalgamate(&c.seed(), &single(0), &single(1)).unwrap();
    let t = c.to_tagged_module(&n).unwrap();
    assert_eq!(t.module.size(), 4);
    assert!(check_phi1(&t, &c.basis_elements(&n), &i).unwrap());
}

/// Element-level substructure test on the explicit modules: the basis map carries the small
/// model's tags exactly onto the traces of the big model's tags.
fn explicit_substructure(c: &TaggedClass, small: &KModel, big: &KModel) -> bool {
    let k = &c.field;
    let place: Vec<usize> = small.basis.iter().map(|&x| big.position(x).unwrap()).collect();
    let ts = c.to_tagged_module(small).unwrap();
    let tb = c.to_tagged_module(big).unwrap();
    let image = |i: usize| -> usize {
        let v = k.vector(i, small.dim());
        let mut w = vec![0u8; big.dim()];
        for (j, &p) in place.iter().enumerate() {
            w[p] = v[j];
        }
        k.index(&w)
    };
    let img_all: BTreeSet<usize> = (0..ts.module.size()).map(image).collect();
    (0..small.tags.len().max(big.tags.len())).all(|n| {
        let a: BTreeSet<usize> = ts.tag(n).iter().map(|&i| image(i)).collect();
        let b: BTreeSet<usize> = tb.tag(n).iter().copied().filter(|i| img_all.contains(i)).collect();
        a == b
    })
}

/// Any tag list becomes a member after dropping tags that meet a basis line and covering
/// every remaining problematic line by a new tag.
fn make_member(c: &TaggedClass, basis: Vec<Name>, raw: &[Vec<Vec<u8>>]) -> KModel {
    let k = &c.field;
    let d = basis.len();
    let mut tags: Vec<Subspace> = raw
        .iter()
        .map(|gens| Subspace::span(k, d, &gens.iter().map(|g| g[..d].to_vec()).collect::<Vec<_>>()))
        .map(|t| if (0..d).any(|i| t.contains(k, &k.unit(i, d))) { Subspace::zero(d) } else { t })
        .collect();
    for idx in 1..k.order().pow(d as u32) {
        let v = k.vector(idx, d);
        if v.iter().filter(|&&x| x != 0).count() > 1 && !tags.iter().any(|t| t.contains(k, &v)) {
            tags.push(Subspace::span(k, d, &[v]));
        }
    }
    KModel { basis, tags }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn amalgam_is_member_and_contains_inputs(
        raw in proptest::collection::vec(proptest::collection::vec(proptest::collection::vec(0u8..2, 3), 1..3), 0..3),
        shared_mask in 0u8..8,
        mode in 0u8..2,
    ) {
        let c = f2();
        let b = make_member(&c, vec![0, 1, 2], &raw);
        prop_assert!(c.check(&b).unwrap());
        let shared: Vec<Name> = (0..3).filter(|i| shared_mask >> i & 1 == 1).collect();
        let a = c.substructure(&b, &shared);
        let other = if mode == 0 {
            let rho: NameMap = (0..3).map(|x| (x, if shared.contains(&x) { x } else { 10 + x })).collect();
            c.rename(&b, &rho)
        } else {
            c.grow(&c.grow(&a, 20).unwrap(), 21).unwrap()
        };
        let d = c.disjoint_amalgamate(&a, &b, &other).unwrap();
        let t = c.to_tagged_module(&d).unwrap();
        prop_assert!(check_phi1(&t, &c.basis_elements(&d), &c.ideal).unwrap());
        prop_assert!(explicit_substructure(&c, &b, &d));
        prop_assert!(explicit_substructure(&c, &other, &d));
    }

    #[test]
    fn membership_agrees_with_explicit_phi1(raw in proptest::collection::vec(proptest::collection::vec(proptest::collection::vec(0u8..3, 3), 1..3), 0..4)) {
        let c = TaggedClass::prime_field(3);
        let d = 3;
        let k = &c.field;
        let m = KModel { basis: vec![0, 1, 2], tags: raw.iter().map(|g| Subspace::span(k, d, g)).collect() };
        let t = c.to_tagged_module(&m).unwrap();
        prop_assert_eq!(c.check(&m).unwrap(), check_phi1(&t, &c.basis_elements(&m), &c.ideal).unwrap());
    }
}

fn tag_indices(c: &TaggedClass, t: &Subspace) -> Vec<usize> {
    let mut v: Vec<usize> = t.elements(&c.field).iter().map(|v| c.field.index(v)).collect();
    v.sort_unstable();
    v
}

#[test]
fn f2_chain_stages() {
    let c = f2();
    let opts = BigOptions::default();
    let chain = build_chain(&c, 4, opts).unwrap();
    verify_chain(&c, &chain, opts).unwrap();
    let dims: Vec<usize> = chain.stages.iter().map(|s| s.base.dim()).collect();
    assert_eq!(dims, vec![0, 1, 2, 3, 4]);
    let tags = |m: usize| -> Vec<Vec<usize>> { chain.stages[m].base.tags.iter().map(|t| tag_indices(&c, t)).collect() };
    assert_eq!(tags(2), vec![vec![0, 3]]);
    assert_eq!(tags(3), vec![vec![0, 3, 5, 6], vec![0, 7]]);
    assert_eq!(tags(4), vec![vec![0, 3, 5, 6, 9, 10, 12, 15], vec![0, 7, 11, 12], vec![0, 13], vec![0, 14]]);
    for s in &chain.stages {
        let t = c.to_tagged_module(&s.base).unwrap();
        assert!(check_phi1(&t, &c.basis_elements(&s.base), &c.ideal).unwrap());
    }
}

#[test]
fn seed_extension_is_one_grow() {
    let c = f2();
    let seed = EqStructure { base: c.seed(), labels: BTreeMap::new() };
    let big = make_big_extension(&c, &seed, BigOptions::default()).unwrap();
    assert_eq!(big.extension.base.dim(), 1);
    assert_eq!(big.certificate.len(), 1);
    assert_eq!(big.amalgamation_steps, 0);
}

#[test]
fn two_class_stage_certifies_the_swap() {
    let c = f2();
    let chain = build_chain(&c, 2, BigOptions::default()).unwrap();
    let b = &chain.stages[2];
    let big = make_big_extension(&c, b, BigOptions::default()).unwrap();
    let swap: BTreeMap<Label, Label> = [(0, 1), (1, 0)].into_iter().collect();
    let e = big.certificate.iter().find(|e| e.a_gens.is_empty() && e.h == swap).unwrap();
    assert!(verify_entry(&c, b, &big.extension, e));
    assert!(big.certificate.iter().all(|e| verify_entry(&c, b, &big.extension, e)));
}

#[test]
fn non_homogeneous_stage_needs_copy_steps() {
    // over F₅ the swap of x0, x1 exchanges the lines of x0+2x1 and x0+3x1, which sit at
    // different tag indices, so B has no nontrivial automorphism
    let c = TaggedClass::prime_field(5);
    let k = &c.field;
    let lines = [vec![1, 2], vec![1, 3], vec![1, 1], vec![1, 4]];
    let base = KModel { basis: vec![0, 1], tags: lines.iter().map(|v| Subspace::span(k, 2, &[v.clone()])).collect() };
    assert!(c.check(&base).unwrap());
    let b = EqStructure { base, labels: labels(&[(0, 0), (1, 1)]) };
    let big = make_big_extension(&c, &b, BigOptions::default()).unwrap();
    assert_eq!(big.amalgamation_steps, 3);
    assert_eq!(big.extension.base.dim(), 7);
    assert_eq!(big.extension.class_labels().len(), 3);
    assert!(big.certificate.iter().all(|e| verify_entry(&c, &b, &big.extension, e)));
    let chain = LimitChain { stages: vec![b.clone(), big.extension.clone()], certificates: vec![big.certificate.clone()] };
    verify_chain(&c, &chain, BigOptions::default()).unwrap();
    // the certified swap lands in the copy, not inside B
    let swap: BTreeMap<Label, Label> = [(0, 1), (1, 0)].into_iter().collect();
    assert!(matches!(lift_permutation(&c, &chain, 0, &swap), Err(AmalgamError::Budget(_))));
}

#[test]
fn extension_respects_the_weight_guard() {
    let c = f2();
    let k = &c.field;
    let lines = [vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1], vec![1, 1, 1]];
    let base = KModel { basis: vec![0, 1, 2], tags: lines.iter().map(|v| Subspace::span(k, 3, &[v.clone()])).collect() };
    let b = EqStructure { base, labels: labels(&[(0, 0), (1, 1), (2, 2)]) };
    let r = make_big_extension(&c, &b, BigOptions { max_weight: 5, ..BigOptions::default() });
    assert!(matches!(r, Err(AmalgamError::Guard(_))));
}

fn all_perms(ls: &[Label]) -> Vec<BTreeMap<Label, Label>> {
    use itertools::Itertools;
    ls.iter().copied().permutations(ls.len()).map(|p| ls.iter().copied().zip(p).collect()).collect()
}

#[test]
fn permutations_lift_on_early_stages() {
    let c = f2();
    let chain = build_chain(&c, 3, BigOptions::default()).unwrap();
    // a transposition at stage 1 with a chain of length 3
    let id: BTreeMap<Label, Label> = [(0, 0)].into_iter().collect();
    assert_eq!(lift_permutation(&c, &chain, 1, &id).unwrap(), [(0, 0)].into_iter().collect());
    let chain = build_chain(&c, 4, BigOptions::default()).unwrap();
    let mut counts = Vec::new();
    for m in 1..=3 {
        let stage = &chain.stages[m];
        let perms = all_perms(&stage.class_labels());
        for h in &perms {
            let sigma = lift_permutation(&c, &chain, m, h).unwrap();
            assert!(c.is_embedding(&stage.base, &stage.base, &sigma));
            for (x, y) in &sigma {
                assert_eq!(stage.labels[y], h[&stage.labels[x]]);
            }
        }
        counts.push(perms.len());
    }
    assert_eq!(counts, vec![1, 2, 6]);
    let h: BTreeMap<Label, Label> = (0..4).map(|l| (l, l)).collect();
    assert!(matches!(lift_permutation(&c, &chain, 4, &h), Err(AmalgamError::Budget(_))));
}

#[test]
fn bare_sets_chain_lifts_everything() {
    let chain = build_chain(&BareSets, 4, BigOptions::default()).unwrap();
    verify_chain(&BareSets, &chain, BigOptions::default()).unwrap();
    for m in 0..4 {
        for h in all_perms(&chain.stages[m].class_labels()) {
            lift_permutation(&BareSets, &chain, m, &h).unwrap();
        }
    }
}

#[test]
fn tampered_certificate_is_rejected() {
    let c = f2();
    let mut chain = build_chain(&c, 3, BigOptions::default()).unwrap();
    let e = chain.certificates[2].iter_mut().find(|e| e.a_gens.is_empty() && e.h.iter().any(|(a, b)| a != b)).unwrap();
    e.g = e.g.keys().map(|&x| (x, x)).collect();
    assert!(verify_chain(&c, &chain, BigOptions::default()).is_err());
}
