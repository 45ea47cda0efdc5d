//! The class K at a residue field: vector spaces over k = R/I with a named basis X and a list of
//! subspace tags, subject to "a nonzero vector is a multiple of a basis vector iff it lies in
//! no tag".

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{AmalgamError, Name, NameMap, SuitableClass};
use crate::error::GuardError;
use crate::linear::{FiniteField, Subspace, Vector};
use crate::module::{FiniteModule, TaggedModule};
use crate::ring::{FiniteRing, Ideal, RingError};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KModel {
    pub basis: Vec<Name>,
    pub tags: Vec<Subspace>,
}

impl KModel {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Trailing zero tags are implicit.
    pub fn normalized(&self) -> KModel {
        let mut m = self.clone();
        while m.tags.last().is_some_and(|t| t.rank() == 0) {
            m.tags.pop();
        }
        m
    }

    pub fn position(&self, x: Name) -> Option<usize> {
        self.basis.iter().position(|&b| b == x)
    }
}

#[derive(Debug, Clone)]
pub struct TaggedClass {
    pub ring: FiniteRing,
    pub ideal: Ideal,
    pub field: FiniteField,
    /// R → k
    pub proj: Vec<u8>,
    /// Largest dimension for which whole-space scans are attempted.
    pub max_dim: usize,
}

impl TaggedClass {
    pub fn new(ring: FiniteRing, ideal: Ideal) -> Result<TaggedClass, RingError> {
        let (field, proj) = FiniteField::residue(&ring, &ideal)?;
        Ok(TaggedClass { ring, ideal, field, proj, max_dim: 20 })
    }

    pub fn prime_field(p: usize) -> TaggedClass {
        let ring = FiniteRing::zmod(p);
        let ideal = crate::ring::ideal_generated(&ring, &[0]);
        TaggedClass::new(ring, ideal).expect("prime field")
    }

    fn scan_guard(&self, d: usize) -> Result<(), GuardError> {
        GuardError::check("vector-space scan dimension", d as u128, self.max_dim as u128)
    }

    fn is_basis_multiple(v: &[u8]) -> bool {
        v.iter().filter(|&&c| c != 0).count() == 1
    }

    /// Nonzero vectors that are neither basis multiples nor in any tag, one per line, in
    /// increasing index order.
    fn problematic(&self, m: &KModel) -> Result<Vec<Vector>, GuardError> {
        let k = &self.field;
        let d = m.dim();
        self.scan_guard(d)?;
        let mut covered = vec![false; k.order().pow(d as u32)];
        for t in &m.tags {
            for v in t.elements(k) {
                covered[k.index(&v)] = true;
            }
        }
        let mut out: Vec<Vector> = Vec::new();
        for idx in 1..covered.len() {
            if covered[idx] {
                continue;
            }
            let v = k.vector(idx, d);
            if Self::is_basis_multiple(&v) {
                continue;
            }
            for c in 1..k.order() as u8 {
                covered[k.index(&k.scale(c, &v))] = true;
            }
            out.push(v);
        }
        Ok(out)
    }

    fn tag_hits_basis(&self, t: &Subspace) -> bool {
        (0..t.dim).any(|i| t.contains(&self.field, &self.field.unit(i, t.dim)))
    }

    /// Membership, evaluated by a whole-space scan.
    pub fn check(&self, m: &KModel) -> Result<bool, AmalgamError> {
        let d = m.dim();
        let distinct: BTreeSet<Name> = m.basis.iter().copied().collect();
        if distinct.len() != d || m.tags.iter().any(|t| t.dim != d) {
            return Ok(false);
        }
        if m.tags.iter().any(|t| self.tag_hits_basis(t)) {
            return Ok(false);
        }
        Ok(self.problematic(m)?.is_empty())
    }

    /// Explicit R-module: carrier k^d indexed by Σ vᵢ qⁱ, r acting through R → k.
    pub fn to_tagged_module(&self, m: &KModel) -> Result<TaggedModule, AmalgamError> {
        let k = &self.field;
        let d = m.dim();
        self.scan_guard(d)?;
        let n = k.order().pow(d as u32);
        let vecs: Vec<Vector> = (0..n).map(|i| k.vector(i, d)).collect();
        let module = FiniteModule::from_fns_trusted(
            &self.ring,
            n,
            |a, b| k.index(&k.vadd(&vecs[a], &vecs[b])),
            |r, a| k.index(&k.scale(self.proj[r], &vecs[a])),
            0,
        );
        let tags = m.tags.iter().map(|t| t.elements(k).iter().map(|v| k.index(v)).collect()).collect();
        TaggedModule::new(module, tags).map_err(|e| AmalgamError::Contract(e.to_string()))
    }

    /// Carrier indices of the basis vectors, in basis order.
    pub fn basis_elements(&self, m: &KModel) -> Vec<usize> {
        (0..m.dim()).map(|i| self.field.index(&self.field.unit(i, m.dim()))).collect()
    }

    fn place(m: &KModel, into: &KModel) -> Option<Vec<usize>> {
        m.basis.iter().map(|&x| into.position(x)).collect()
    }
}

impl SuitableClass for TaggedClass {
    type S = KModel;

    fn seed(&self) -> KModel {
        KModel { basis: Vec::new(), tags: Vec::new() }
    }

    fn is_member(&self, s: &KModel) -> Result<bool, AmalgamError> {
        self.check(s)
    }

    fn x_set(&self, s: &KModel) -> Vec<Name> {
        s.basis.clone()
    }

    /// Span of the named basis vectors, tags intersected with it, trailing zero tags dropped.
    fn substructure(&self, s: &KModel, gens: &[Name]) -> KModel {
        let k = &self.field;
        let mark: Vec<bool> = s.basis.iter().map(|x| gens.contains(x)).collect();
        let keep: Vec<usize> = gens.iter().map(|&x| s.position(x).expect("generator in X")).collect();
        let mut tags: Vec<Subspace> = s.tags.iter().map(|t| t.meet_coordinates(k, &mark).restrict(k, &keep)).collect();
        while tags.last().is_some_and(|t| t.rank() == 0) {
            tags.pop();
        }
        KModel { basis: gens.to_vec(), tags }
    }

    fn is_embedding(&self, a: &KModel, b: &KModel, f: &NameMap) -> bool {
        let k = &self.field;
        let Some(place) = a.basis.iter().map(|x| f.get(x).and_then(|&y| b.position(y))).collect::<Option<Vec<usize>>>()
        else {
            return false;
        };
        if place.iter().collect::<BTreeSet<_>>().len() != place.len() {
            return false;
        }
        let mut mark = vec![false; b.dim()];
        for &p in &place {
            mark[p] = true;
        }
        let zero_a = Subspace::zero(a.dim());
        let zero_b = Subspace::zero(b.dim());
        (0..a.tags.len().max(b.tags.len())).all(|n| {
            let ta = a.tags.get(n).unwrap_or(&zero_a).embed(k, b.dim(), &place);
            let tb = b.tags.get(n).unwrap_or(&zero_b).meet_coordinates(k, &mark);
            ta == tb
        })
    }

    fn rename(&self, s: &KModel, f: &NameMap) -> KModel {
        KModel { basis: s.basis.iter().map(|x| f[x]).collect(), tags: s.tags.clone() }
    }

    fn disjoint_amalgamate(&self, a: &KModel, b: &KModel, c: &KModel) -> Result<KModel, AmalgamError> {
        let k = &self.field;
        let bx: BTreeSet<Name> = b.basis.iter().copied().collect();
        let cx: BTreeSet<Name> = c.basis.iter().copied().collect();
        let ax: BTreeSet<Name> = a.basis.iter().copied().collect();
        if bx.intersection(&cx).copied().collect::<BTreeSet<_>>() != ax {
            return Err(AmalgamError::Precondition("X^B ∩ X^C ≠ X^A".into()));
        }
        if !self.is_substructure(a, b) || !self.is_substructure(a, c) {
            return Err(AmalgamError::Precondition("A is not a substructure of both sides".into()));
        }
        if !self.check(b)? || !self.check(c)? {
            return Err(AmalgamError::Precondition("an input is not in the class".into()));
        }
        let mut basis = b.basis.clone();
        basis.extend(c.basis.iter().copied().filter(|x| !bx.contains(x)));
        let mut out = KModel { basis, tags: Vec::new() };
        let d = out.dim();
        let pb = Self::place(b, &out).unwrap();
        let pc = Self::place(c, &out).unwrap();
        for n in 0..b.tags.len().max(c.tags.len()) {
            let mut t = Subspace::zero(d);
            if let Some(tb) = b.tags.get(n) {
                t = t.join(k, &tb.embed(k, d, &pb));
            }
            if let Some(tc) = c.tags.get(n) {
                t = t.join(k, &tc.embed(k, d, &pc));
            }
            out.tags.push(t);
        }
        // repair: one fresh tag per problematic line, at the next unused index
        for e in self.problematic(&out)? {
            out.tags.push(Subspace::span(k, d, &[e]));
        }
        if !self.check(&out)? || !self.is_substructure(b, &out) || !self.is_substructure(c, &out) {
            return Err(AmalgamError::Contract("amalgam fails the class or substructure check".into()));
        }
        Ok(out)
    }

    /// Adjoin a basis vector, then cover each problematic line by enlarging the first tag that
    /// stays clear of the basis and keeps its trace on the old space; otherwise open a new tag.
    fn grow(&self, s: &KModel, fresh: Name) -> Result<KModel, AmalgamError> {
        let k = &self.field;
        if s.position(fresh).is_some() {
            return Err(AmalgamError::Precondition(format!("name {fresh} is not fresh")));
        }
        let old = s.dim();
        let d = old + 1;
        let place: Vec<usize> = (0..old).collect();
        let mut out = KModel {
            basis: s.basis.iter().copied().chain([fresh]).collect(),
            tags: s.tags.iter().map(|t| t.embed(k, d, &place)).collect(),
        };
        let original = out.tags.len();
        let mut covered = vec![false; k.order().pow(d as u32)];
        for t in &out.tags {
            for v in t.elements(k) {
                covered[k.index(&v)] = true;
            }
        }
        let mut modified = vec![false; original];
        // Every problematic e has a nonzero last coordinate c and a nonzero old part w. For an
        // untouched old tag V, V + Re meets the old space in V and contains the new basis vector
        // iff w ∈ V. A tag that already absorbed a line, with p in it having last coordinate 1,
        // would gain the old vector e - c·p, which lies outside V since e is uncovered; tags
        // opened during this step fail the same way. So each old tag absorbs at most one line.
        for e in self.problematic(&out)? {
            if covered[k.index(&e)] {
                continue;
            }
            let slot = (0..original).find(|&n| !modified[n] && !s.tags[n].contains(k, &e[..old]));
            let n = match slot {
                Some(n) => {
                    out.tags[n] = out.tags[n].with(k, &e);
                    modified[n] = true;
                    n
                }
                None => {
                    out.tags.push(Subspace::span(k, d, &[e]));
                    out.tags.len() - 1
                }
            };
            for v in out.tags[n].elements(k) {
                covered[k.index(&v)] = true;
            }
        }
        if !self.check(&out)? || !self.is_substructure(s, &out) {
            return Err(AmalgamError::Contract("grow fails the class or substructure check".into()));
        }
        Ok(out)
    }

    fn weight(&self, s: &KModel) -> usize {
        s.dim()
    }

    fn is_substructure(&self, small: &KModel, big: &KModel) -> bool {
        small.basis.iter().all(|&x| big.position(x).is_some())
            && self.substructure(big, &small.basis).normalized() == small.normalized()
    }
}
