use super::{Elem, FiniteRing};

pub fn is_ring_hom(a: &FiniteRing, b: &FiniteRing, f: &[Elem]) -> bool {
    f.len() == a.size()
        && f[a.one()] == b.one()
        && a.elements().all(|x| {
            a.elements()
                .all(|y| f[a.add(x, y)] == b.add(f[x], f[y]) && f[a.mul(x, y)] == b.mul(f[x], f[y]))
        })
}

fn profile(r: &FiniteRing, x: Elem) -> (usize, bool, bool, bool) {
    (r.additive_order(x), r.is_unit(x), r.is_idempotent(x), r.is_nilpotent(x))
}

/// Ring isomorphism by search over images of an additive generating set.
pub fn brute_force_ring_iso(a: &FiniteRing, b: &FiniteRing) -> Option<Vec<Elem>> {
    if a.size() != b.size() {
        return None;
    }
    let pa: Vec<_> = a.elements().map(|x| profile(a, x)).collect();
    let pb: Vec<_> = b.elements().map(|x| profile(b, x)).collect();
    let (mut sa, mut sb) = (pa.clone(), pb.clone());
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return None;
    }

    // greedy additive generators of maximal order
    let mut gens = Vec::new();
    let mut span = vec![false; a.size()];
    span[a.zero()] = true;
    while let Some(g) = a
        .elements()
        .filter(|&x| !span[x])
        .max_by_key(|&x| (pa[x].0, std::cmp::Reverse(x)))
    {
        gens.push(g);
        let current: Vec<Elem> = a.elements().filter(|&x| span[x]).collect();
        let mut m = g;
        while m != a.zero() {
            for &s in &current {
                span[a.add(s, m)] = true;
            }
            m = a.add(m, g);
        }
    }

    let mut map = vec![usize::MAX; a.size()];
    map[a.zero()] = b.zero();
    search(a, b, &gens, 0, &mut map, &pa, &pb).then_some(map)
}

fn search(
    a: &FiniteRing,
    b: &FiniteRing,
    gens: &[Elem],
    k: usize,
    map: &mut Vec<Elem>,
    pa: &[(usize, bool, bool, bool)],
    pb: &[(usize, bool, bool, bool)],
) -> bool {
    if k == gens.len() {
        let mut seen = vec![false; b.size()];
        return map.iter().all(|&y| !std::mem::replace(&mut seen[y], true)) && is_ring_hom(a, b, map);
    }
    let g = gens[k];
    for h in b.elements().filter(|&h| pb[h] == pa[g]) {
        let saved = map.clone();
        if extend(a, b, map, g, h) && search(a, b, gens, k + 1, map, pa, pb) {
            return true;
        }
        *map = saved;
    }
    false
}

/// Extend an additive partial map defined on a subgroup S to S + ⟨g⟩ with g ↦ h.
fn extend(a: &FiniteRing, b: &FiniteRing, map: &mut [Elem], g: Elem, h: Elem) -> bool {
    let domain: Vec<Elem> = a.elements().filter(|&x| map[x] != usize::MAX).collect();
    let (mut m, mut mh) = (g, h);
    loop {
        for &s in &domain {
            let x = a.add(s, m);
            let y = b.add(map[s], mh);
            if map[x] == usize::MAX {
                map[x] = y;
            } else if map[x] != y {
                return false;
            }
        }
        m = a.add(m, g);
        mh = b.add(mh, h);
        if m == a.zero() {
            return mh == b.zero();
        }
    }
}
