use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::ClassifierError;
use crate::error::GuardError;
use crate::module::{brute_force_isomorphic, FiniteModule, TaggedModule};
use crate::ring::{Elem, FiniteRing};

#[derive(Debug, Clone, Copy)]
pub struct CensusOptions {
    pub max_order: usize,
    /// Largest number of generator assignments tried for one abelian group.
    pub max_assignments: u128,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions { max_order: 16, max_assignments: 5_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub order: usize,
    /// Module structures found (action tables, before identifying isomorphic ones).
    pub structures: usize,
    pub classes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub rows: Vec<CensusRow>,
}

impl Census {
    pub fn classes(&self, order: usize) -> usize {
        self.rows.iter().find(|r| r.order == order).map_or(0, |r| r.classes)
    }

    pub fn render(&self) -> String {
        let mut out = String::from("order\tclasses\tstructures\n");
        for r in &self.rows {
            out.push_str(&format!("{}\t{}\t{}\n", r.order, r.classes, r.structures));
        }
        out
    }
}

fn factorize(mut n: usize) -> Vec<(usize, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn partitions(n: u32, max: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    (1..=n.min(max)).rev().flat_map(|k| partitions(n - k, k).into_iter().map(move |mut p| {
        p.insert(0, k);
        p
    })).collect()
}

/// Abelian groups of order n up to isomorphism, each as its list of cyclic prime-power orders.
pub fn abelian_groups(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for (p, e) in factorize(n) {
        let parts = partitions(e, e);
        out = out
            .into_iter()
            .flat_map(|g| {
                parts.iter().map(move |part| {
                    let mut g = g.clone();
                    g.extend(part.iter().map(|&k| p.pow(k)));
                    g
                })
            })
            .collect();
    }
    out
}

/// ⊕ ℤ/dᵢ with elements in mixed radix, least significant coordinate first.
struct Group {
    d: Vec<usize>,
    n: usize,
}

impl Group {
    fn digits(&self, mut a: usize) -> Vec<usize> {
        self.d.iter().map(|&d| {
            let x = a % d;
            a /= d;
            x
        }).collect()
    }

    fn join(&self, xs: &[usize]) -> usize {
        xs.iter().zip(&self.d).rev().fold(0, |acc, (&x, &d)| acc * d + x % d)
    }

    fn add(&self, a: usize, b: usize) -> usize {
        let (x, y) = (self.digits(a), self.digits(b));
        self.join(&x.iter().zip(&y).map(|(p, q)| p + q).collect::<Vec<_>>())
    }

    fn times(&self, k: usize, a: usize) -> usize {
        self.join(&self.digits(a).iter().map(|x| x * k).collect::<Vec<_>>())
    }

    /// Every endomorphism, as its full table.
    fn endomorphisms(&self) -> Vec<Vec<usize>> {
        let choices: Vec<Vec<usize>> = self.d.iter().map(|&d| (0..self.n).filter(|&a| self.times(d, a) == 0).collect()).collect();
        let mut out = vec![vec![]];
        for c in &choices {
            out = out.into_iter().flat_map(|imgs: Vec<usize>| c.iter().map(move |&x| {
                let mut v = imgs.clone();
                v.push(x);
                v
            })).collect();
        }
        out.into_iter()
            .map(|imgs| {
                (0..self.n)
                    .map(|a| self.digits(a).iter().zip(&imgs).fold(0, |acc, (&k, &img)| self.add(acc, self.times(k, img))))
                    .collect()
            })
            .collect()
    }
}

/// A small set generating the ring under +, · and 1.
fn ring_generators(ring: &FiniteRing) -> Vec<Elem> {
    let close = |gens: &[Elem]| {
        let mut inside = vec![false; ring.size()];
        let mut list = vec![ring.zero(), ring.one()];
        list.extend_from_slice(gens);
        list.sort_unstable();
        list.dedup();
        for &a in &list {
            inside[a] = true;
        }
        let mut k = 0;
        while k < list.len() {
            let a = list[k];
            k += 1;
            for i in 0..k {
                let b = list[i];
                for c in [ring.add(a, b), ring.mul(a, b)] {
                    if !inside[c] {
                        inside[c] = true;
                        list.push(c);
                    }
                }
            }
        }
        inside
    };
    let mut gens = Vec::new();
    loop {
        let inside = close(&gens);
        match inside.iter().position(|&x| !x) {
            Some(a) => gens.push(a),
            None => return gens,
        }
    }
}

/// The ring actions on ⊕ ℤ/dᵢ: unital ring maps R → End(A), found by choosing images of ring
/// generators and closing up.
pub fn module_structures(ring: &FiniteRing, d: &[usize], max_assignments: u128) -> Result<Vec<FiniteModule>, ClassifierError> {
    let g = Group { d: d.to_vec(), n: d.iter().product() };
    let char_r = ring.characteristic();
    if d.iter().any(|&di| char_r % di != 0) {
        return Ok(vec![]);
    }
    let ends = g.endomorphisms();
    let gens = ring_generators(ring);
    let total = (ends.len() as u128).checked_pow(gens.len() as u32).unwrap_or(u128::MAX);
    GuardError::check("module census assignments", total, max_assignments)?;
    let n = g.n;
    let add_map = |f: &[usize], h: &[usize]| (0..n).map(|a| g.add(f[a], h[a])).collect::<Vec<_>>();
    let compose = |f: &[usize], h: &[usize]| (0..n).map(|a| f[h[a]]).collect::<Vec<_>>();
    let id: Vec<usize> = (0..n).collect();
    let zero_map = vec![g.join(&vec![0; d.len()]); n];
    let mut out = Vec::new();
    let mut choice = vec![0usize; gens.len()];
    'outer: loop {
        let mut rho: Vec<Option<Vec<usize>>> = vec![None; ring.size()];
        rho[ring.zero()] = Some(zero_map.clone());
        rho[ring.one()] = Some(id.clone());
        let mut known = vec![ring.zero(), ring.one()];
        let mut ok = true;
        for (&x, &c) in gens.iter().zip(&choice) {
            rho[x] = Some(ends[c].clone());
            known.push(x);
        }
        let mut k = 0;
        while k < known.len() && ok {
            let a = known[k];
            k += 1;
            for i in 0..k {
                let b = known[i];
                let (fa, fb) = (rho[a].clone().unwrap(), rho[b].clone().unwrap());
                for (c, v) in [(ring.add(a, b), add_map(&fa, &fb)), (ring.mul(a, b), compose(&fa, &fb))] {
                    match &rho[c] {
                        Some(w) if *w != v => ok = false,
                        Some(_) => {}
                        None => {
                            rho[c] = Some(v);
                            known.push(c);
                        }
                    }
                }
            }
        }
        if ok {
            let rho: Vec<Vec<usize>> = rho.into_iter().map(|r| r.expect("generators generate")).collect();
            let hom = ring.elements().all(|a| {
                ring.elements().all(|b| rho[ring.add(a, b)] == add_map(&rho[a], &rho[b]) && rho[ring.mul(a, b)] == compose(&rho[a], &rho[b]))
            });
            if hom {
                let zero = g.join(&vec![0; d.len()]);
                out.push(FiniteModule::from_fns_trusted(ring, n, |a, b| g.add(a, b), |r, a| rho[r][a], zero));
            }
        }
        for slot in choice.iter_mut() {
            *slot += 1;
            if *slot < ends.len() {
                continue 'outer;
            }
            *slot = 0;
        }
        break;
    }
    Ok(out)
}

/// Cheap isomorphism invariant: for each ring element, the number of fixed points and the size
/// of the kernel of its action, plus the additive order profile.
fn bucket_key(m: &FiniteModule) -> Vec<usize> {
    let mut key: Vec<usize> = {
        let mut orders: Vec<usize> = m.elements().map(|a| m.additive_order(a)).collect();
        orders.sort_unstable();
        orders
    };
    for r in m.ring().elements() {
        key.push(m.elements().filter(|&a| m.act(r, a) == a).count());
        key.push(m.elements().filter(|&a| m.act(r, a) == m.zero()).count());
    }
    key
}

/// Isomorphism classes of modules of each order 1..=bound.
pub fn count_modules_upto(ring: &FiniteRing, bound: usize, opts: &CensusOptions) -> Result<Census, ClassifierError> {
    GuardError::check("census order bound", bound as u128, opts.max_order as u128)?;
    let mut rows = Vec::new();
    for order in 1..=bound {
        let mut structures = 0;
        let mut classes = 0;
        for d in abelian_groups(order) {
            let mods = module_structures(ring, &d, opts.max_assignments)?;
            structures += mods.len();
            let mut buckets: HashMap<Vec<usize>, Vec<TaggedModule>> = HashMap::new();
            for m in mods {
                let t = TaggedModule::new(m, vec![])?;
                let reps = buckets.entry(bucket_key(&t.module)).or_default();
                let mut seen = false;
                for r in reps.iter() {
                    if brute_force_isomorphic(r, &t)?.is_some() {
                        seen = true;
                        break;
                    }
                }
                if !seen {
                    reps.push(t);
                }
            }
            classes += buckets.values().map(Vec::len).sum::<usize>();
        }
        rows.push(CensusRow { order, structures, classes });
    }
    Ok(Census { rows })
}
