use super::*;
use crate::ring::{ideal_generated, Ideal};
use proptest::prelude::*;

fn z4() -> FiniteRing {
    FiniteRing::zmod(4)
}

/// F₂^k as a module over ℤ/4 (odd scalars act as 1, even as 0), elements as bit vectors.
fn f2_space_over_z4(k: u32) -> FiniteModule {
    FiniteModule::from_fns(&z4(), 1 << k, |a, b| a ^ b, |r, a| if r % 2 == 1 { a } else { 0 }, 0).unwrap()
}

/// F₂^k over F₂.
fn f2_space(k: u32) -> FiniteModule {
    FiniteModule::from_fns(&FiniteRing::zmod(2), 1 << k, |a, b| a ^ b, |r, a| r * a, 0).unwrap()
}

fn zero_ideal(r: &FiniteRing) -> Ideal {
    ideal_generated(r, &[])
}

#[test]
fn submodule_examples() {
    let m = FiniteModule::regular(&z4());
    assert_eq!(m.submodule_generated(&[2]), vec![0, 2]);
    assert_eq!(m.submodule_generated(&[]), vec![0]);
    assert_eq!(f2_space(2).submodule_generated(&[1]), vec![0, 1]);
}

#[test]
fn independence_examples() {
    let i = ideal_generated(&z4(), &[2]);
    let v = f2_space_over_z4(2);
    assert_eq!(is_i_independent(&v, &i, &[1, 2]).unwrap(), Independence::Independent);
    let m = FiniteModule::regular(&z4());
    match is_i_independent(&m, &i, &[1]).unwrap() {
        Independence::Violation(c) => assert_eq!(c, vec![2]),
        other => panic!("{other:?}"),
    }
    assert_eq!(is_i_independent(&m, &i, &[]).unwrap(), Independence::Independent);
}

#[test]
fn independence_guard_is_a_refusal() {
    let v = f2_space_over_z4(3);
    let i = ideal_generated(&z4(), &[2]);
    let err = is_i_independent_with_guard(&v, &i, &[1, 2, 4], 10).unwrap_err();
    assert!(matches!(err, ModuleError::Guard(_)));
}

#[test]
fn delta_and_r_star_examples() {
    let i = ideal_generated(&z4(), &[2]);
    assert_eq!(delta_set(&f2_space_over_z4(2), &i), vec![1, 2, 3]);
    let zero_mod = FiniteModule::from_fns(&z4(), 1, |_, _| 0, |_, _| 0, 0).unwrap();
    assert!(delta_set(&zero_mod, &i).is_empty());
    let m = FiniteModule::regular(&z4());
    assert_eq!(delta_set(&m, &i), vec![2]);
    assert_eq!(r_star(&m, &[1]), vec![1, 2, 3]);
    assert!(r_star(&m, &[0]).is_empty());
    assert_eq!(r_star(&f2_space(2), &[1, 3]), vec![1, 3]);
}

#[test]
fn sim_examples() {
    let m = FiniteModule::regular(&z4());
    assert_eq!(sim_classes(&m, &[1, 2, 3]), vec![vec![1, 3], vec![2]]);
    assert_eq!(sim_classes(&m, &[2]), vec![vec![2]]);
    assert_eq!(sim_classes(&f2_space(2), &[1, 2, 3]), vec![vec![1], vec![2], vec![3]]);
}

#[test]
fn phi1_examples() {
    let f2 = FiniteRing::zmod(2);
    let i = zero_ideal(&f2);
    let v = TaggedModule::new(f2_space(2), vec![vec![0]]).unwrap();
    // Δ ∖ ⋃tags contains e₀+e₁, which is not in R*X
    assert!(!check_phi1(&v, &[1, 2], &i).unwrap());
    let v = TaggedModule::new(f2_space(2), vec![vec![0, 3]]).unwrap();
    assert!(check_phi1(&v, &[1, 2], &i).unwrap());
    let v = TaggedModule::new(f2_space(2), vec![vec![0, 1]]).unwrap();
    assert!(!check_phi1(&v, &[1, 2], &i).unwrap());
    let zero_mod = FiniteModule::from_fns(&f2, 1, |_, _| 0, |_, _| 0, 0).unwrap();
    assert!(check_phi1(&TaggedModule::new(zero_mod, vec![]).unwrap(), &[], &i).unwrap());
}

#[test]
fn phi0_failures_are_errors() {
    let f2 = FiniteRing::zmod(2);
    let i = zero_ideal(&f2);
    let v = TaggedModule::new(f2_space(2), vec![]).unwrap();
    assert!(matches!(check_phi1(&v, &[1], &i), Err(ModuleError::Phi0(_))));
    assert!(matches!(check_phi1(&v, &[1, 1], &i), Err(ModuleError::Phi0(_))));
    let z4i = zero_ideal(&z4());
    let w = TaggedModule::new(f2_space_over_z4(1), vec![]).unwrap();
    assert!(matches!(check_phi1(&w, &[1], &z4i), Err(ModuleError::Phi0(_))));
}

#[test]
fn iso_examples() {
    let a = TaggedModule::new(f2_space(2), vec![vec![0, 1]]).unwrap();
    let b = TaggedModule::new(f2_space(2), vec![vec![0, 3]]).unwrap();
    let f = brute_force_isomorphic(&a, &a).unwrap().unwrap();
    assert!(verify_isomorphism(&a, &a, &f));
    let f = brute_force_isomorphic(&a, &b).unwrap().unwrap();
    assert_eq!(f[1], 3);
    let inv: Vec<Elem> = (0..4).map(|y| f.iter().position(|&x| x == y).unwrap()).collect();
    assert!(verify_isomorphism(&b, &a, &inv));
    let c = TaggedModule::new(FiniteModule::regular(&z4()), vec![]).unwrap();
    let d = TaggedModule::new(f2_space_over_z4(2), vec![]).unwrap();
    assert_eq!(brute_force_isomorphic(&c, &d).unwrap(), None);
    let e = TaggedModule::new(f2_space(2), vec![vec![0, 1], vec![0, 1]]).unwrap();
    assert_eq!(brute_force_isomorphic(&a, &e).unwrap(), None);
}

#[test]
fn iso_guard_is_a_refusal() {
    let a = TaggedModule::new(f2_space(4), vec![]).unwrap();
    let b = TaggedModule::new(f2_space(4), vec![vec![0, 1]]).unwrap();
    // same profiles impossible here, so use two copies of a with a tiny guard
    assert!(brute_force_isomorphic(&a, &b).unwrap().is_none());
    assert!(matches!(brute_force_isomorphic_with_guard(&a, &a, 1), Err(ModuleError::Guard(_)) | Ok(Some(_))));
    assert!(matches!(brute_force_isomorphic_with_guard(&a, &a, 0), Err(ModuleError::Guard(_))));
}

#[test]
fn file_round_trip() {
    let a = TaggedModule::new(f2_space_over_z4(2), vec![vec![0, 3]]).unwrap();
    let json = serde_json::to_string(&a.to_file()).unwrap();
    let back = TaggedModule::from_file(&serde_json::from_str(&json).unwrap()).unwrap();
    assert_eq!(a, back);
}

/// Random F₂-subspace of F₂^k given by a generator list.
fn subspace_gens(k: u32) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(1usize..(1 << k), 0..3)
}

fn independent_subset(v: &FiniteModule, xs: &[Elem], i: &Ideal) -> bool {
    matches!(is_i_independent(v, i, xs), Ok(Independence::Independent))
}

proptest! {
    #[test]
    fn rstar_meets_span(k in 1u32..4, picks in proptest::collection::vec(0usize..16, 1..4), ymask in 0u8..16) {
        let v = f2_space_over_z4(k);
        let i = ideal_generated(&z4(), &[2]);
        let mut xs: Vec<Elem> = picks.into_iter().map(|p| p % (1 << k)).filter(|&p| p != 0).collect();
        xs.sort_unstable();
        xs.dedup();
        prop_assume!(independent_subset(&v, &xs, &i));
        let ys: Vec<Elem> = xs.iter().enumerate().filter(|(j, _)| ymask >> j & 1 == 1).map(|(_, &x)| x).collect();
        let rx = r_star(&v, &xs);
        let ry_span = v.submodule_generated(&ys);
        let lhs: Vec<Elem> = rx.into_iter().filter(|a| ry_span.contains(a)).collect();
        prop_assert_eq!(lhs, r_star(&v, &ys));
    }

    #[test]
    fn delta_cyclics_equal_or_disjoint(k in 1u32..4) {
        for (v, i) in [(f2_space_over_z4(k), ideal_generated(&z4(), &[2]))] {
            let d = delta_set(&v, &i);
            for &a in &d {
                for &b in &d {
                    let (ra, rb) = (v.cyclic(a), v.cyclic(b));
                    let meet = ra.iter().filter(|x| rb.contains(x)).count();
                    prop_assert!(ra == rb || meet == 1);
                }
            }
        }
    }

    #[test]
    fn basis_gives_coordinate_isomorphism(k in 1u32..4) {
        // X = standard basis of F₂^k over ℤ/4; the map Σ rᵢxᵢ ↦ (rᵢ + I) is a bijection onto (ℤ/4 / (2))^k
        let v = f2_space_over_z4(k);
        let i = ideal_generated(&z4(), &[2]);
        let xs: Vec<Elem> = (0..k).map(|j| 1 << j).collect();
        prop_assert!(independent_subset(&v, &xs, &i));
        prop_assert_eq!(v.submodule_generated(&xs).len(), v.size());
        let mut coords = vec![None; v.size()];
        for tuple in 0..(4usize.pow(k)) {
            let cs: Vec<usize> = (0..k).map(|j| tuple / 4usize.pow(j) % 4).collect();
            let a = cs.iter().zip(&xs).fold(0, |acc, (&c, &x)| v.add(acc, v.act(c, x)));
            let image: Vec<usize> = cs.iter().map(|c| c % 2).collect();
            match &coords[a] {
                None => coords[a] = Some(image),
                Some(prev) => prop_assert_eq!(prev, &image),
            }
        }
        let mut images: Vec<_> = coords.into_iter().map(Option::unwrap).collect();
        images.sort();
        images.dedup();
        prop_assert_eq!(images.len(), v.size());
    }

    #[test]
    fn iso_is_symmetric(k in 1u32..4, t1 in subspace_gens(3), t2 in subspace_gens(3)) {
        let v = f2_space(k);
        let clip = |g: Vec<usize>| v.submodule_generated(&g.into_iter().map(|x| x % v.size()).collect::<Vec<_>>());
        let a = TaggedModule::new(v.clone(), vec![clip(t1.clone())]).unwrap();
        let b = TaggedModule::new(v.clone(), vec![clip(t2.clone())]).unwrap();
        let ab = brute_force_isomorphic(&a, &b).unwrap();
        let ba = brute_force_isomorphic(&b, &a).unwrap();
        prop_assert_eq!(ab.is_some(), ba.is_some());
        // F₂-subspaces of equal dimension are GL-conjugate
        prop_assert_eq!(ab.is_some(), a.tags[0].len() == b.tags[0].len());
        if let Some(f) = ab {
            let inv: Vec<Elem> = (0..v.size()).map(|y| f.iter().position(|&x| x == y).unwrap()).collect();
            prop_assert!(verify_isomorphism(&b, &a, &inv));
        }
    }

    #[test]
    fn phi1_agrees_with_set_identity(tag_gens in proptest::collection::vec(subspace_gens(3), 0..3)) {
        let v = f2_space(3);
        let i = zero_ideal(&FiniteRing::zmod(2));
        let tags: Vec<Vec<Elem>> = tag_gens.into_iter().map(|g| v.submodule_generated(&g)).collect();
        let t = TaggedModule::new(v.clone(), tags).unwrap();
        // check_phi1 errors on disagreement, so Ok(_) is the agreement property
        let holds = check_phi1(&t, &[1, 2, 4], &i).unwrap();
        let mark = t.union_of_tags();
        let direct = (1..8).all(|a: usize| (a.count_ones() == 1) != mark[a]);
        prop_assert_eq!(holds, direct);
    }
}
