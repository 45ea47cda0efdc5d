//! The small constructive reductions: pulling modules back along a quotient, endomorphism
//! structures and the four-submodule coding, modules over R[x]/(g) as endomorphism structures,
//! the free-like normalization, and the coder/decoder for incomparable principal ideals.

mod freelike;
mod theorem_b;

pub use freelike::{
    freelike_normalize, freelike_recover, is_free_summand, lemma_split, universe_free, verify_freelike, FreeLikeOptions, FreeLikeTagged, Handles,
    Scalars, Split, StepOne,
};
pub use theorem_b::{theorem_b_code, theorem_b_decode, theorem_b_residue, verify_claims, ClaimReport, CodedB};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Failure, FailureKind, GuardError};
use crate::lattice::LatticeError;
use crate::module::{FiniteModule, ModuleError, ModuleFile, TaggedModule};
use crate::ring::{quotient_ring, Elem, FiniteRing, Ideal, RingError};

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("input: {0}")]
    Input(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("decode failed: {0}")]
    Decode(String),
    #[error(transparent)]
    Guard(#[from] GuardError),
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

impl Failure for ReductionError {
    fn kind(&self) -> FailureKind {
        match self {
            ReductionError::Input(_) => FailureKind::Input,
            ReductionError::Precondition(_) => FailureKind::Precondition,
            ReductionError::Decode(_) => FailureKind::Decode,
            ReductionError::Guard(_) => FailureKind::Guard,
            ReductionError::Module(e) => e.kind(),
            ReductionError::Ring(e) => e.kind(),
            ReductionError::Lattice(e) => e.kind(),
        }
    }
}

/// An R/I-module seen as an R-module through the projection. Returns the module over R and
/// the projection R → R/I used.
pub fn pullback_module(ring: &FiniteRing, ideal: &Ideal, m: &FiniteModule) -> Result<FiniteModule, ReductionError> {
    let (q, proj) = quotient_ring(ring, ideal)?;
    if m.ring() != &q {
        return Err(ReductionError::Input("module is not over the quotient ring R/I in its canonical numbering".into()));
    }
    let out = m.pull_back(ring, &proj);
    out.check_axioms()?;
    Ok(out)
}

/// The submodule on a sorted element list, renumbered in list order.
pub(crate) fn sub_module(m: &FiniteModule, set: &[Elem]) -> FiniteModule {
    let pos: BTreeMap<Elem, usize> = set.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    FiniteModule::from_fns_trusted(m.ring(), set.len(), |a, b| pos[&m.add(set[a], set[b])], |r, a| pos[&m.act(r, set[a])], pos[&m.zero()])
}

/// A module with an endomorphism T, given as an index map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndoStructure {
    pub module: FiniteModule,
    pub t: Vec<Elem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndoFile {
    #[serde(flatten)]
    pub module: ModuleFile,
    #[serde(rename = "T")]
    pub t: Vec<Elem>,
}

impl EndoStructure {
    pub fn new(module: FiniteModule, t: Vec<Elem>) -> Result<EndoStructure, ReductionError> {
        if !module.is_homomorphism(&module, &t) {
            return Err(ReductionError::Input("T is not additive and action-commuting".into()));
        }
        Ok(EndoStructure { module, t })
    }

    pub fn from_file(f: &EndoFile) -> Result<EndoStructure, ReductionError> {
        let (m, _) = FiniteModule::from_file(&f.module)?;
        EndoStructure::new(m, f.t.clone())
    }

    pub fn to_file(&self) -> EndoFile {
        EndoFile { module: self.module.to_file(&[]), t: self.t.clone() }
    }

    pub fn size(&self) -> usize {
        self.module.size()
    }
}

/// Generating set chosen greedily in index order.
fn generators(m: &FiniteModule) -> Vec<Elem> {
    let mut gens = Vec::new();
    let mut span = m.submodule_generated(&[]);
    for a in m.elements() {
        if span.binary_search(&a).is_err() {
            gens.push(a);
            span = m.submodule_generated(&gens);
        }
    }
    gens
}

/// Every homomorphism a → b, by images of a greedy generating set.
pub fn all_homomorphisms(a: &FiniteModule, b: &FiniteModule, guard: u128) -> Result<Vec<Vec<Elem>>, ReductionError> {
    let gens = generators(a);
    let total = (b.size() as u128).checked_pow(gens.len() as u32).unwrap_or(u128::MAX);
    GuardError::check("homomorphism candidates", total, guard)?;
    let mut out = Vec::new();
    let mut images = vec![0usize; gens.len()];
    'outer: loop {
        if let Some(f) = extend_on_generators(a, b, &gens, &images) {
            out.push(f);
        }
        for i in 0..images.len() {
            images[i] += 1;
            if images[i] < b.size() {
                continue 'outer;
            }
            images[i] = 0;
        }
        break;
    }
    Ok(out)
}

fn extend_on_generators(a: &FiniteModule, b: &FiniteModule, gens: &[Elem], images: &[Elem]) -> Option<Vec<Elem>> {
    let mut f = vec![usize::MAX; a.size()];
    f[a.zero()] = b.zero();
    let mut frontier = vec![a.zero()];
    while let Some(x) = frontier.pop() {
        for (&g, &h) in gens.iter().zip(images) {
            for r in a.ring().elements() {
                let y = a.add(x, a.act(r, g));
                let fy = b.add(f[x], b.act(r, h));
                if f[y] == usize::MAX {
                    f[y] = fy;
                    frontier.push(y);
                } else if f[y] != fy {
                    return None;
                }
            }
        }
    }
    a.is_homomorphism(b, &f).then_some(f)
}

/// Isomorphism of endomorphism structures by brute force over module isomorphisms.
pub fn endo_isomorphism(a: &EndoStructure, b: &EndoStructure, guard: u128) -> Result<Option<Vec<Elem>>, ReductionError> {
    if a.size() != b.size() || a.module.ring() != b.module.ring() {
        return Ok(None);
    }
    for f in all_homomorphisms(&a.module, &b.module, guard)? {
        let mut seen = vec![false; b.size()];
        if f.iter().any(|&y| std::mem::replace(&mut seen[y], true)) {
            continue;
        }
        if a.module.elements().all(|x| f[a.t[x]] == b.t[f[x]]) {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

/// W = V × V with U₀ = V×0, U₁ = 0×V, U₂ the diagonal and U₃ the graph of T.
pub fn endo_to_four_submodules(s: &EndoStructure) -> TaggedModule {
    let v = &s.module;
    let n = v.size();
    let w = FiniteModule::product(v, v);
    let z = v.zero();
    let pair = |a: Elem, b: Elem| a + n * b;
    let u0 = v.elements().map(|a| pair(a, z)).collect();
    let u1 = v.elements().map(|b| pair(z, b)).collect();
    let u2 = v.elements().map(|a| pair(a, a)).collect();
    let u3 = v.elements().map(|a| pair(a, s.t[a])).collect();
    TaggedModule::new(w, vec![u0, u1, u2, u3]).expect("the four sets are submodules")
}

/// Inverse of the four-submodule coding: V is U₀, U₂ identifies U₀ with U₁, and T is read off
/// the graph U₃.
pub fn four_submodules_decode(w: &TaggedModule) -> Result<EndoStructure, ReductionError> {
    let m = &w.module;
    if w.tags.len() > 4 {
        return Err(ReductionError::Decode(format!("expected 4 tags, found {}", w.tags.len())));
    }
    let tag = |i: usize| w.tag(i).into_owned();
    let (u0, u1, u2, u3) = (tag(0), tag(1), tag(2), tag(3));
    let meets_trivially = |a: &[Elem], b: &[Elem]| a.iter().filter(|x| b.binary_search(x).is_ok()).count() == 1;
    if !meets_trivially(&u0, &u1) || u0.len() * u1.len() != m.size() {
        return Err(ReductionError::Decode("U₀ ⊕ U₁ is not the whole module".into()));
    }
    if !meets_trivially(&u2, &u0) || !meets_trivially(&u2, &u1) || u2.len() != u0.len() || u1.len() != u0.len() {
        return Err(ReductionError::Decode("U₂ is not complementary to both U₀ and U₁".into()));
    }
    if !meets_trivially(&u3, &u1) || u3.len() != u0.len() {
        return Err(ReductionError::Decode("U₃ is not the graph of a map on U₀".into()));
    }
    let mut split = vec![(0, 0); m.size()];
    for &a in &u0 {
        for &b in &u1 {
            split[m.add(a, b)] = (a, b);
        }
    }
    let iota: BTreeMap<Elem, Elem> = u2.iter().map(|&u| split[u]).collect();
    let back: BTreeMap<Elem, Elem> = iota.iter().map(|(&a, &b)| (b, a)).collect();
    let pos: BTreeMap<Elem, usize> = u0.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let mut t = vec![usize::MAX; u0.len()];
    for &u in &u3 {
        let (a, c) = split[u];
        t[pos[&a]] = pos[&back[&c]];
    }
    if t.contains(&usize::MAX) {
        return Err(ReductionError::Decode("U₃ misses part of U₀".into()));
    }
    EndoStructure::new(sub_module(m, &u0), t).map_err(|e| ReductionError::Decode(format!("decoded T: {e}")))
}

/// R[x]/(g) for monic g over a finite ring R. Elements are coefficient vectors c₀..c_{d−1}
/// with index Σ cᵢ|R|ⁱ.
#[derive(Debug, Clone)]
pub struct PolyQuotient {
    pub base: FiniteRing,
    /// Coefficients of g, lowest degree first, leading coefficient one.
    pub g: Vec<Elem>,
    pub ring: FiniteRing,
    /// R → R[x]/(g) on constants.
    pub embed: Vec<Elem>,
    pub x: Elem,
}

impl PolyQuotient {
    pub fn new(base: &FiniteRing, g: &[Elem], max_size: usize) -> Result<PolyQuotient, ReductionError> {
        let d = g.len().checked_sub(1).filter(|&d| d >= 1).ok_or_else(|| ReductionError::Input("g must have degree ≥ 1".into()))?;
        if g[d] != base.one() || g.iter().any(|&c| c >= base.size()) {
            return Err(ReductionError::Input("g must be monic with coefficients in R".into()));
        }
        let q = base.size();
        let size = q.checked_pow(d as u32).unwrap_or(usize::MAX);
        GuardError::check("polynomial quotient size", size as u128, max_size as u128)?;
        let digits = |mut a: usize| -> Vec<Elem> {
            (0..d)
                .map(|_| {
                    let c = a % q;
                    a /= q;
                    c
                })
                .collect()
        };
        let index = |c: &[Elem]| c.iter().rev().fold(0, |acc, &x| acc * q + x);
        let mul = |a: usize, b: usize| -> usize {
            let (ca, cb) = (digits(a), digits(b));
            let mut c = vec![base.zero(); 2 * d - 1];
            for i in 0..d {
                for j in 0..d {
                    c[i + j] = base.add(c[i + j], base.mul(ca[i], cb[j]));
                }
            }
            for k in (d..c.len()).rev() {
                let lead = c[k];
                c[k] = base.zero();
                for i in 0..d {
                    c[k - d + i] = base.sub(c[k - d + i], base.mul(lead, g[i]));
                }
            }
            index(&c[..d])
        };
        let add = |a: usize, b: usize| -> usize {
            let (ca, cb) = (digits(a), digits(b));
            index(&ca.iter().zip(&cb).map(|(&x, &y)| base.add(x, y)).collect::<Vec<_>>())
        };
        let constant = |r: Elem| -> usize {
            let mut c = vec![base.zero(); d];
            c[0] = r;
            index(&c)
        };
        let ring = FiniteRing::from_fns(size, add, mul, constant(base.zero()), constant(base.one()))?;
        let embed = base.elements().map(constant).collect();
        let x = if d == 1 {
            constant(base.neg(g[0]))
        } else {
            let mut c = vec![base.zero(); d];
            c[1] = base.one();
            index(&c)
        };
        Ok(PolyQuotient { base: base.clone(), g: g.to_vec(), ring, embed, x })
    }
}

/// The underlying R-module of an R[x]/(g)-module together with T = multiplication by x.
pub fn endo_from_poly_module(pq: &PolyQuotient, m: &FiniteModule) -> Result<EndoStructure, ReductionError> {
    if m.ring() != &pq.ring {
        return Err(ReductionError::Input("module is not over R[x]/(g)".into()));
    }
    let v = m.pull_back(&pq.base, &pq.embed);
    let t = m.elements().map(|a| m.act(pq.x, a)).collect();
    EndoStructure::new(v, t)
}

/// The R[x]/(g)-module on V in which x acts as T. Needs g(T) = 0.
pub fn poly_module_from_endo(pq: &PolyQuotient, s: &EndoStructure) -> Result<FiniteModule, ReductionError> {
    let v = &s.module;
    if v.ring() != &pq.base {
        return Err(ReductionError::Input("endomorphism structure is not over R".into()));
    }
    let d = pq.g.len() - 1;
    let q = pq.base.size();
    // powers[i][a] = Tⁱ(a)
    let mut powers = vec![v.elements().collect::<Vec<_>>()];
    for i in 1..=d {
        let prev = &powers[i - 1];
        powers.push(prev.iter().map(|&a| s.t[a]).collect());
    }
    let eval = |coeffs: &[Elem], a: Elem| -> Elem {
        coeffs.iter().enumerate().fold(v.zero(), |acc, (i, &c)| v.add(acc, v.act(c, powers[i][a])))
    };
    if v.elements().any(|a| eval(&pq.g, a) != v.zero()) {
        return Err(ReductionError::Precondition("g(T) ≠ 0, so x cannot act as T".into()));
    }
    let digits = |mut p: usize| -> Vec<Elem> {
        (0..d)
            .map(|_| {
                let c = p % q;
                p /= q;
                c
            })
            .collect()
    };
    let m = FiniteModule::from_fns(&pq.ring, v.size(), |a, b| v.add(a, b), |p, a| eval(&digits(p), a), v.zero())?;
    Ok(m)
}
