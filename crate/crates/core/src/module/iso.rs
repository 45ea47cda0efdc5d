use super::{ModuleError, TaggedModule};
use crate::error::GuardError;
use crate::ring::Elem;

pub const DEFAULT_ISO_GUARD: u128 = 10_000_000;

type Profile = (usize, Vec<u64>, Vec<u64>);

fn bits(n: usize, f: impl Fn(usize) -> bool) -> Vec<u64> {
    let mut v = vec![0u64; n.div_ceil(64)];
    for i in 0..n {
        if f(i) {
            v[i / 64] |= 1 << (i % 64);
        }
    }
    v
}

fn profiles(t: &TaggedModule, ntags: usize) -> Vec<Profile> {
    let m = &t.module;
    let mut membership = vec![vec![false; ntags]; m.size()];
    for k in 0..ntags {
        for &a in t.tag(k).iter() {
            membership[a][k] = true;
        }
    }
    m.elements()
        .map(|a| {
            let ann = bits(m.ring().size(), |r| m.act(r, a) == m.zero());
            (m.additive_order(a), ann, bits(ntags, |k| membership[a][k]))
        })
        .collect()
}

/// Checks that `f` is a bijective module homomorphism carrying every tag of `a` onto the
/// same-index tag of `b`.
pub fn verify_isomorphism(a: &TaggedModule, b: &TaggedModule, f: &[Elem]) -> bool {
    let (ma, mb) = (&a.module, &b.module);
    if ma.ring() != mb.ring() || ma.size() != mb.size() || f.len() != ma.size() {
        return false;
    }
    let mut hit = vec![false; mb.size()];
    for &y in f {
        if y >= mb.size() || std::mem::replace(&mut hit[y], true) {
            return false;
        }
    }
    if !ma.is_homomorphism(mb, f) {
        return false;
    }
    let ntags = a.tags.len().max(b.tags.len());
    (0..ntags).all(|k| {
        let mut img: Vec<Elem> = a.tag(k).iter().map(|&x| f[x]).collect();
        img.sort_unstable();
        img.as_slice() == &*b.tag(k)
    })
}

pub fn brute_force_isomorphic(a: &TaggedModule, b: &TaggedModule) -> Result<Option<Vec<Elem>>, ModuleError> {
    brute_force_isomorphic_with_guard(a, b, DEFAULT_ISO_GUARD)
}

/// Search for a tagged-module isomorphism by backtracking over images of a greedy generating
/// set. `guard` bounds the number of search nodes; exceeding it is an error, never a "no".
pub fn brute_force_isomorphic_with_guard(
    a: &TaggedModule,
    b: &TaggedModule,
    guard: u128,
) -> Result<Option<Vec<Elem>>, ModuleError> {
    let (ma, mb) = (&a.module, &b.module);
    if ma.ring() != mb.ring() {
        return Err(ModuleError::Shape("modules over different rings".into()));
    }
    if ma.size() != mb.size() {
        return Ok(None);
    }
    let ntags = a.tags.len().max(b.tags.len());
    let pa = profiles(a, ntags);
    let pb = profiles(b, ntags);
    {
        let (mut sa, mut sb) = (pa.clone(), pb.clone());
        sa.sort();
        sb.sort();
        if sa != sb {
            return Ok(None);
        }
    }

    // generators: greedy by maximal additive order, ties to the smaller index
    let mut gens = Vec::new();
    let mut span = vec![ma.zero()];
    while span.len() < ma.size() {
        let mut inside = vec![false; ma.size()];
        for &s in &span {
            inside[s] = true;
        }
        let g = ma
            .elements()
            .filter(|&x| !inside[x])
            .max_by_key(|&x| (pa[x].0, std::cmp::Reverse(x)))
            .expect("span is proper");
        gens.push(g);
        let mut with = span.clone();
        with.push(g);
        span = ma.submodule_generated(&with);
    }

    let mut st = Search {
        a,
        b,
        pa: &pa,
        pb: &pb,
        gens: &gens,
        map: vec![usize::MAX; ma.size()],
        inv: vec![usize::MAX; mb.size()],
        nodes: 0,
        guard,
    };
    st.map[ma.zero()] = mb.zero();
    st.inv[mb.zero()] = ma.zero();
    if st.go(0)? {
        debug_assert!(verify_isomorphism(a, b, &st.map));
        if verify_isomorphism(a, b, &st.map) {
            return Ok(Some(st.map));
        }
        return Err(ModuleError::Inconsistent("search produced a map that fails verification".into()));
    }
    Ok(None)
}

struct Search<'a> {
    a: &'a TaggedModule,
    b: &'a TaggedModule,
    pa: &'a [Profile],
    pb: &'a [Profile],
    gens: &'a [Elem],
    map: Vec<Elem>,
    inv: Vec<Elem>,
    nodes: u128,
    guard: u128,
}

impl Search<'_> {
    fn go(&mut self, k: usize) -> Result<bool, ModuleError> {
        if k == self.gens.len() {
            return Ok(true);
        }
        let g = self.gens[k];
        let mb = &self.b.module;
        for h in mb.elements() {
            if self.inv[h] != usize::MAX || self.pb[h] != self.pa[g] {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.guard {
                return Err(GuardError::new("isomorphism search nodes", self.nodes, self.guard).into());
            }
            let mut added = Vec::new();
            if self.extend(g, h, &mut added) && self.go(k + 1)? {
                return Ok(true);
            }
            for x in added {
                self.inv[self.map[x]] = usize::MAX;
                self.map[x] = usize::MAX;
            }
        }
        Ok(false)
    }

    /// Extend the map from the current domain S to S + Rg with g ↦ h. Records newly mapped
    /// points in `added` so the caller can undo.
    fn extend(&mut self, g: Elem, h: Elem, added: &mut Vec<Elem>) -> bool {
        let (ma, mb) = (&self.a.module, &self.b.module);
        let domain: Vec<Elem> = ma.elements().filter(|&x| self.map[x] != usize::MAX).collect();
        for r in ma.ring().elements() {
            let (rg, rh) = (ma.act(r, g), mb.act(r, h));
            for &s in &domain {
                let x = ma.add(s, rg);
                let y = mb.add(self.map[s], rh);
                if self.map[x] == usize::MAX {
                    if self.inv[y] != usize::MAX || self.pa[x] != self.pb[y] {
                        return false;
                    }
                    self.map[x] = y;
                    self.inv[y] = x;
                    added.push(x);
                } else if self.map[x] != y {
                    return false;
                }
            }
        }
        true
    }
}
