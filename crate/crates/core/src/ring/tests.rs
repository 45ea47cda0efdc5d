use super::*;
use proptest::prelude::*;

/// Every subset that passes the ideal test, ordered canonically. Independent of the
/// closure-based enumeration.
fn subset_scan_ideals(r: &FiniteRing) -> Vec<Vec<Elem>> {
    let n = r.size();
    let mut out: Vec<Vec<Elem>> = (0u32..1 << n)
        .map(|mask| (0..n).filter(|&i| mask >> i & 1 == 1).collect::<Vec<_>>())
        .filter(|s| is_ideal(r, s))
        .collect();
    out.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    out
}

fn elems(v: &[Ideal]) -> Vec<Vec<Elem>> {
    v.iter().map(|i| i.elements().to_vec()).collect()
}

#[test]
fn axioms_pass_on_modular_rings() {
    for n in [1, 2, 4, 6] {
        assert!(check_ring_axioms(&FiniteRing::zmod(n).tables()).unwrap().passed());
    }
}

#[test]
fn corrupted_table_reports_a_violation() {
    let mut t = FiniteRing::zmod(4).tables();
    t.mul[3][3] = 0;
    match check_ring_axioms(&t).unwrap() {
        AxiomReport::Fail { axiom, witness } => {
            assert!(!witness.is_empty(), "{axiom}");
            // the reported triple really violates the named law
            let (m, a) = (&t.mul, &t.add);
            let ok = match (axiom, witness.as_slice()) {
                ("multiplicative associativity", &[x, y, z]) => m[m[x][y]][z] != m[x][m[y][z]],
                ("distributivity", &[x, y, z]) => m[x][a[y][z]] != a[m[x][y]][m[x][z]],
                _ => false,
            };
            assert!(ok, "{axiom} {witness:?}");
        }
        AxiomReport::Pass => panic!("corrupted table accepted"),
    }
}

#[test]
fn shape_errors_are_not_axiom_failures() {
    let mut t = FiniteRing::zmod(3).tables();
    t.add[1].pop();
    assert!(matches!(check_ring_axioms(&t), Err(RingError::Shape(_))));
    let mut t = FiniteRing::zmod(3).tables();
    t.mul[0][0] = 7;
    assert!(matches!(check_ring_axioms(&t), Err(RingError::Shape(_))));
}

#[test]
fn ideal_generation_examples() {
    let z4 = FiniteRing::zmod(4);
    assert_eq!(ideal_generated(&z4, &[2]).elements(), &[0, 2]);
    assert_eq!(ideal_generated(&z4, &[]).elements(), &[0]);
    let r = FiniteRing::f2_xy();
    assert_eq!(ideal_generated(&r, &[2]).elements(), &[0, 2]);
}

#[test]
fn ideal_lattices_match_subset_scan() {
    for (name, r) in catalog() {
        assert_eq!(elems(&all_ideals(&r).unwrap()), subset_scan_ideals(&r), "{name}");
    }
    assert_eq!(elems(&all_ideals(&FiniteRing::zmod(4)).unwrap()), vec![vec![0], vec![0, 2], vec![0, 1, 2, 3]]);
    assert_eq!(all_ideals(&FiniteRing::zmod(6)).unwrap().len(), 4);
    assert_eq!(all_ideals(&FiniteRing::zmod(2)).unwrap().len(), 2);
}

#[test]
fn ideal_lattice_guard_refuses() {
    let r = FiniteRing::zmod(70);
    assert!(matches!(all_ideals(&r), Err(RingError::Guard(_))));
    assert!(all_ideals_with_limit(&r, 128).is_ok());
}

#[test]
fn annihilator_examples() {
    let z4 = FiniteRing::zmod(4);
    assert_eq!(annihilator(&z4, &[2]).elements(), &[0, 2]);
    assert_eq!(annihilator(&z4, &[1]).elements(), &[0]);
    let r = FiniteRing::f2_xy();
    assert_eq!(annihilator(&r, &[2]).elements(), &[0, 2, 4, 6]);
}

#[test]
fn triple_annihilator_is_annihilator() {
    for (name, r) in catalog() {
        for mask in 0u32..(1 << r.size()).min(1 << 10) {
            let xs: Vec<Elem> = (0..r.size()).filter(|&i| mask >> i & 1 == 1).collect();
            let a1 = annihilator(&r, &xs);
            let a3 = annihilator(&r, annihilator(&r, a1.elements()).elements());
            assert_eq!(a1, a3, "{name} {xs:?}");
        }
    }
}

#[test]
fn quotients() {
    let z4 = FiniteRing::zmod(4);
    let (q, p) = quotient_ring(&z4, &ideal_generated(&z4, &[2])).unwrap();
    assert!(brute_force_ring_iso(&q, &FiniteRing::zmod(2)).is_some());
    assert_eq!(p, vec![0, 1, 0, 1]);
    let (q, p) = quotient_ring(&z4, &ideal_generated(&z4, &[])).unwrap();
    assert_eq!(q, z4);
    assert_eq!(p, vec![0, 1, 2, 3]);
    let z6 = FiniteRing::zmod(6);
    let (q, _) = quotient_ring(&z6, &ideal_generated(&z6, &[3])).unwrap();
    assert!(brute_force_ring_iso(&q, &FiniteRing::zmod(3)).is_some());
    let (q, _) = quotient_ring(&z6, &ideal_generated(&z6, &[1])).unwrap();
    assert!(q.is_trivial());
    assert!(quotient_ring(&z6, &Ideal::from_sorted(vec![0, 1])).is_err());
}

#[test]
fn quotient_kernel_and_tables() {
    for (name, r) in catalog() {
        for i in all_ideals(&r).unwrap() {
            let (q, p) = quotient_ring(&r, &i).unwrap();
            let kernel: Vec<Elem> = r.elements().filter(|&a| p[a] == q.zero()).collect();
            assert_eq!(kernel, i.elements(), "{name}");
            assert!(is_ring_hom(&r, &q, &p), "{name}");
            assert_eq!(q.size() * i.len(), r.size());
        }
    }
}

#[test]
fn products() {
    let p = product_ring(&[FiniteRing::zmod(2), FiniteRing::zmod(3)]);
    assert!(brute_force_ring_iso(&p, &FiniteRing::zmod(6)).is_some());
    let single = product_ring(&[FiniteRing::zmod(5)]);
    assert_eq!(single, FiniteRing::zmod(5));
    let p = product_ring(&[FiniteRing::zmod(2), FiniteRing::zmod(2)]);
    assert_eq!(p.idempotents().len(), 4);
    assert!(product_ring(&[]).is_trivial());
    assert!(brute_force_ring_iso(&FiniteRing::zmod(4), &p).is_none());
}

#[test]
fn spectrum_examples() {
    let s = spectrum(&FiniteRing::zmod(6)).unwrap();
    assert_eq!(elems(&s.maximal), vec![vec![0, 3], vec![0, 2, 4]]);
    assert_eq!(s.nilradical.elements(), &[0]);
    assert_eq!(s.idempotents, vec![0, 1, 3, 4]);
    let s = spectrum(&FiniteRing::zmod(4)).unwrap();
    assert_eq!(s.nilradical.elements(), &[0, 2]);
    assert_eq!(s.jacobson.elements(), &[0, 2]);
    assert_eq!(s.idempotents, vec![0, 1]);
    let s = spectrum(&FiniteRing::zmod(7)).unwrap();
    assert_eq!(elems(&s.maximal), vec![vec![0]]);
    assert!(s.jacobson_is_nilradical);
}

#[test]
fn spectrum_matches_scan() {
    for (name, r) in catalog() {
        let s = spectrum(&r).unwrap();
        let ideals = subset_scan_ideals(&r);
        let n = r.size();
        let proper: Vec<&Vec<Elem>> = ideals.iter().filter(|i| i.len() < n).collect();
        let maximal: Vec<Vec<Elem>> = proper
            .iter()
            .filter(|i| !proper.iter().any(|j| j.len() > i.len() && i.iter().all(|x| j.contains(x))))
            .map(|i| (*i).clone())
            .collect();
        assert_eq!(elems(&s.maximal), maximal, "{name}");
        // finite rings: every prime is maximal, jacobson = nilradical
        assert_eq!(s.prime, s.maximal, "{name}");
        assert!(s.jacobson_is_nilradical, "{name}");
        let nil: Vec<Elem> = r.elements().filter(|&a| (1..=n as u32).any(|k| r.pow(a, k) == 0)).collect();
        assert_eq!(s.nilradical.elements(), nil.as_slice());
    }
}

#[test]
fn crt_examples() {
    let z12 = FiniteRing::zmod(12);
    let c = crt_split(&z12);
    assert_eq!(c.idempotents, vec![4, 9]);
    assert!(brute_force_ring_iso(&c.factors[0], &FiniteRing::zmod(3)).is_some());
    assert!(brute_force_ring_iso(&c.factors[1], &FiniteRing::zmod(4)).is_some());
    let c = crt_split(&FiniteRing::zmod(4));
    assert_eq!(c.idempotents, vec![1]);
    assert_eq!(c.to_product, vec![0, 1, 2, 3]);
    let c = crt_split(&FiniteRing::zmod(6));
    assert_eq!(c.factors.len(), 2);
    assert!(c.factors.iter().all(FiniteRing::is_field));
}

#[test]
fn crt_split_is_an_isomorphism() {
    for (name, r) in catalog() {
        let c = crt_split(&r);
        let es = &c.idempotents;
        for (i, &e) in es.iter().enumerate() {
            for &f in &es[i + 1..] {
                assert_eq!(r.mul(e, f), r.zero(), "{name}");
            }
        }
        assert_eq!(es.iter().fold(r.zero(), |acc, &e| r.add(acc, e)), r.one(), "{name}");
        for f in &c.factors {
            assert_eq!(spectrum(f).unwrap().maximal.len(), 1, "{name} factor not local");
        }
        let prod = product_ring(&c.factors);
        assert!(is_ring_hom(&r, &prod, &c.to_product), "{name}");
        let mut img = c.to_product.clone();
        img.sort_unstable();
        img.dedup();
        assert_eq!(img.len(), r.size());
    }
}

#[test]
fn every_element_unit_or_zero_divisor() {
    for (name, r) in catalog() {
        for a in r.elements().filter(|&a| a != r.zero()) {
            assert!(r.is_unit(a) ^ r.is_zero_divisor(a), "{name} {a}");
        }
    }
}

#[test]
fn presented_rings() {
    let z = PresentedRing::Z;
    assert!(!z.is_unit(&PElem::int(2)).unwrap());
    assert!(z.is_unit(&PElem::int(-1)).unwrap());
    assert!(!z.is_zero_divisor(&PElem::int(2)).unwrap());
    let f4 = PresentedRing::PolyQuot { n: 2, modulus: vec![1, 1, 1] };
    let t = f4.to_finite().unwrap();
    assert!(t.is_field());
    let z4 = PresentedRing::Zmod { n: 4 };
    assert!(z4.is_zero_divisor(&PElem::int(2)).unwrap());
    assert_eq!(z4.to_finite().unwrap(), FiniteRing::zmod(4));
    let bad = PresentedRing::PolyQuot { n: 2, modulus: vec![1, 2] };
    assert!(bad.validate().is_err());
    let json: PresentedRing = serde_json::from_str(r#"{"kind":"polyquot","n":2,"modulus":[1,1,1]}"#).unwrap();
    assert_eq!(json, f4);
    let json: PresentedRing = serde_json::from_str(r#"{"kind":"Z"}"#).unwrap();
    assert_eq!(json, PresentedRing::Z);
}

#[test]
fn structure_constant_numbering() {
    let r = FiniteRing::f2_xy();
    assert_eq!(r.size(), 8);
    assert_eq!(r.mul(2, 2), 0);
    assert_eq!(r.mul(2, 4), 0);
    assert_eq!(r.add(2, 4), 6);
    assert_eq!(r.mul(3, 3), 1); // (1+x)² = 1
}

fn small_presented() -> impl Strategy<Value = PresentedRing> {
    prop_oneof![
        Just(PresentedRing::Z),
        (2u64..10).prop_map(|n| PresentedRing::Zmod { n }),
        (2u64..5, proptest::collection::vec(-3i64..4, 1..3)).prop_map(|(n, mut m)| {
            m.push(1);
            PresentedRing::PolyQuot { n, modulus: m }
        }),
    ]
}

proptest! {
    #[test]
    fn presented_arithmetic_is_a_ring(
        r in small_presented(),
        a in proptest::collection::vec(-20i64..20, 0..4),
        b in proptest::collection::vec(-20i64..20, 0..4),
        c in proptest::collection::vec(-20i64..20, 0..4),
    ) {
        let el = |v: &Vec<i64>| r.normalize(&PElem(v.iter().map(|&x| x.into()).collect()));
        let (a, b, c) = (el(&a), el(&b), el(&c));
        prop_assert_eq!(r.normalize(&a), a.clone());
        prop_assert_eq!(r.add(&a, &b), r.add(&b, &a));
        prop_assert_eq!(r.mul(&a, &b), r.mul(&b, &a));
        prop_assert_eq!(r.mul(&r.mul(&a, &b), &c), r.mul(&a, &r.mul(&b, &c)));
        prop_assert_eq!(r.mul(&a, &r.add(&b, &c)), r.add(&r.mul(&a, &b), &r.mul(&a, &c)));
        prop_assert_eq!(r.mul(&a, &r.one()), a.clone());
        prop_assert!(r.is_zero(&r.add(&a, &r.neg(&a))));
    }

    #[test]
    fn ideal_closure_invariants(idx in 0usize..17, g in proptest::collection::vec(0usize..16, 0..3)) {
        let (_, r) = catalog().swap_remove(idx);
        let gens: Vec<Elem> = g.into_iter().map(|x| x % r.size()).collect();
        let i = ideal_generated(&r, &gens);
        prop_assert!(is_ideal(&r, i.elements()));
        prop_assert!(gens.iter().all(|&x| i.contains(x)));
    }
}
