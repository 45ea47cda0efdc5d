//! Finite modules over a `FiniteRing`, tagged modules, and the I-basis vocabulary.

mod basis;
mod iso;

pub use basis::{
    check_phi1, delta_set, is_i_independent, is_i_independent_with_guard, r_star, sim_classes,
    Independence, DEFAULT_TUPLE_GUARD,
};
pub use iso::{brute_force_isomorphic, brute_force_isomorphic_with_guard, verify_isomorphism, DEFAULT_ISO_GUARD};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Failure, FailureKind, GuardError};
use crate::ring::{Elem, FiniteRing, Ideal, RingError, RingTables};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModuleError {
    #[error("malformed module: {0}")]
    Shape(String),
    #[error("module axiom `{0}` fails")]
    Axiom(String),
    #[error("basis hypotheses fail: {0}")]
    Phi0(String),
    #[error("internal cross-check disagrees: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Guard(#[from] GuardError),
}

impl Failure for ModuleError {
    fn kind(&self) -> FailureKind {
        match self {
            ModuleError::Guard(_) => FailureKind::Guard,
            ModuleError::Phi0(_) | ModuleError::Inconsistent(_) => FailureKind::Precondition,
            ModuleError::Ring(e) => e.kind(),
            _ => FailureKind::Input,
        }
    }
}

/// A finite module. Elements are `0..size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteModule {
    ring: FiniteRing,
    n: usize,
    add: Vec<Elem>,
    action: Vec<Elem>,
    neg: Vec<Elem>,
    zero: Elem,
}

/// On-disk module format; `tags` is empty for a bare module.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleFile {
    pub ring: RingTables,
    pub size: usize,
    pub add: Vec<Vec<Elem>>,
    /// action[r][a] = r·a
    pub action: Vec<Vec<Elem>>,
    #[serde(default)]
    pub zero: Option<Elem>,
    #[serde(default)]
    pub tags: Vec<Vec<Elem>>,
}

impl FiniteModule {
    pub fn from_fns(
        ring: &FiniteRing,
        n: usize,
        add: impl Fn(Elem, Elem) -> Elem,
        act: impl Fn(Elem, Elem) -> Elem,
        zero: Elem,
    ) -> Result<FiniteModule, ModuleError> {
        if n == 0 || zero >= n {
            return Err(ModuleError::Shape("empty carrier or zero out of range".into()));
        }
        let r = ring.size();
        let mut addt = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let c = add(a, b);
                if c >= n {
                    return Err(ModuleError::Shape(format!("{a}+{b} = {c} out of range")));
                }
                addt.push(c);
            }
        }
        let mut actt = Vec::with_capacity(r * n);
        for s in 0..r {
            for a in 0..n {
                let c = act(s, a);
                if c >= n {
                    return Err(ModuleError::Shape(format!("{s}·{a} = {c} out of range")));
                }
                actt.push(c);
            }
        }
        let m = Self::assemble(ring.clone(), n, addt, actt, zero)?;
        m.check_axioms()?;
        Ok(m)
    }

    fn assemble(ring: FiniteRing, n: usize, add: Vec<Elem>, action: Vec<Elem>, zero: Elem) -> Result<FiniteModule, ModuleError> {
        let mut neg = vec![usize::MAX; n];
        for a in 0..n {
            if let Some(b) = (0..n).find(|&b| add[a * n + b] == zero) {
                neg[a] = b;
            } else {
                return Err(ModuleError::Axiom(format!("{a} has no additive inverse")));
            }
        }
        Ok(FiniteModule { ring, n, add, action, neg, zero })
    }

    /// Construct without the exhaustive axiom scan. For internal constructions that are
    /// modules by design (products, quotients, coordinate spaces).
    pub(crate) fn from_fns_trusted(
        ring: &FiniteRing,
        n: usize,
        add: impl Fn(Elem, Elem) -> Elem,
        act: impl Fn(Elem, Elem) -> Elem,
        zero: Elem,
    ) -> FiniteModule {
        let addt = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| add(a, b)).collect();
        let actt = (0..ring.size())
            .flat_map(|s| (0..n).map(move |a| (s, a)))
            .map(|(s, a)| act(s, a))
            .collect();
        Self::assemble(ring.clone(), n, addt, actt, zero).expect("trusted construction")
    }

    pub fn from_file(f: &ModuleFile) -> Result<(FiniteModule, Vec<Vec<Elem>>), ModuleError> {
        let ring = FiniteRing::from_tables(&f.ring)?;
        let n = f.size;
        if f.add.len() != n || f.add.iter().any(|r| r.len() != n) {
            return Err(ModuleError::Shape("add table is not size×size".into()));
        }
        if f.action.len() != ring.size() || f.action.iter().any(|r| r.len() != n) {
            return Err(ModuleError::Shape("action table is not ring-size×size".into()));
        }
        let zero = match f.zero {
            Some(z) => z,
            None => (0..n)
                .find(|&z| (0..n).all(|a| f.add[z][a] == a))
                .ok_or_else(|| ModuleError::Axiom("no additive identity".into()))?,
        };
        let m = FiniteModule::from_fns(&ring, n, |a, b| f.add[a][b], |s, a| f.action[s][a], zero)?;
        for (i, t) in f.tags.iter().enumerate() {
            if t.iter().any(|&a| a >= n) {
                return Err(ModuleError::Shape(format!("tag {i} has an element out of range")));
            }
        }
        Ok((m, f.tags.clone()))
    }

    pub fn to_file(&self, tags: &[Vec<Elem>]) -> ModuleFile {
        let n = self.n;
        ModuleFile {
            ring: self.ring.tables(),
            size: n,
            add: self.add.chunks(n).map(|r| r.to_vec()).collect(),
            action: self.action.chunks(n).map(|r| r.to_vec()).collect(),
            zero: Some(self.zero),
            tags: tags
                .iter()
                .map(|t| {
                    let mut t = t.clone();
                    t.sort_unstable();
                    t
                })
                .collect(),
        }
    }

    pub fn check_axioms(&self) -> Result<(), ModuleError> {
        let r = &self.ring;
        let n = self.n;
        let ax = |s: &str, w: String| Err(ModuleError::Axiom(format!("{s} at {w}")));
        for a in 0..n {
            if self.add(a, self.zero) != a {
                return ax("additive identity", format!("{a}"));
            }
            if self.act(r.one(), a) != a {
                return ax("unit action", format!("{a}"));
            }
            for b in 0..n {
                if self.add(a, b) != self.add(b, a) {
                    return ax("additive commutativity", format!("({a},{b})"));
                }
                for c in 0..n {
                    if self.add(self.add(a, b), c) != self.add(a, self.add(b, c)) {
                        return ax("additive associativity", format!("({a},{b},{c})"));
                    }
                }
            }
        }
        for s in r.elements() {
            for a in 0..n {
                for t in r.elements() {
                    if self.act(r.add(s, t), a) != self.add(self.act(s, a), self.act(t, a)) {
                        return ax("(r+s)a = ra+sa", format!("({s},{t},{a})"));
                    }
                    if self.act(r.mul(s, t), a) != self.act(s, self.act(t, a)) {
                        return ax("(rs)a = r(sa)", format!("({s},{t},{a})"));
                    }
                }
                for b in 0..n {
                    if self.act(s, self.add(a, b)) != self.add(self.act(s, a), self.act(s, b)) {
                        return ax("r(a+b) = ra+rb", format!("({s},{a},{b})"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn ring(&self) -> &FiniteRing {
        &self.ring
    }
    pub fn size(&self) -> usize {
        self.n
    }
    pub fn zero(&self) -> Elem {
        self.zero
    }
    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.n
    }
    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.add[a * self.n + b]
    }
    #[inline]
    pub fn act(&self, r: Elem, a: Elem) -> Elem {
        self.action[r * self.n + a]
    }
    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a]
    }
    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg[b])
    }

    pub fn additive_order(&self, a: Elem) -> usize {
        let (mut x, mut k) = (a, 1);
        while x != self.zero {
            x = self.add(x, a);
            k += 1;
        }
        k
    }

    /// Ann(a) as an ideal of the ring.
    pub fn annihilator(&self, a: Elem) -> Ideal {
        Ideal::from_sorted(self.ring.elements().filter(|&r| self.act(r, a) == self.zero).collect())
    }

    /// Ra, sorted.
    pub fn cyclic(&self, a: Elem) -> Vec<Elem> {
        let mut v: Vec<Elem> = self.ring.elements().map(|r| self.act(r, a)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Smallest submodule containing `gens`, sorted.
    pub fn submodule_generated(&self, gens: &[Elem]) -> Vec<Elem> {
        let mut atoms: Vec<Elem> = gens.iter().flat_map(|&g| self.cyclic(g)).filter(|&a| a != self.zero).collect();
        atoms.sort_unstable();
        atoms.dedup();
        let mut seen = vec![false; self.n];
        seen[self.zero] = true;
        let mut frontier = vec![self.zero];
        while let Some(x) = frontier.pop() {
            for &g in &atoms {
                let y = self.add(x, g);
                if !seen[y] {
                    seen[y] = true;
                    frontier.push(y);
                }
            }
        }
        self.elements().filter(|&a| seen[a]).collect()
    }

    pub fn is_submodule(&self, set: &[Elem]) -> bool {
        let mut mark = vec![false; self.n];
        for &a in set {
            if a >= self.n {
                return false;
            }
            mark[a] = true;
        }
        mark[self.zero]
            && set.iter().all(|&a| set.iter().all(|&b| mark[self.add(a, b)]))
            && set.iter().all(|&a| self.ring.elements().all(|r| mark[self.act(r, a)]))
    }

    /// The regular module R over itself.
    pub fn regular(ring: &FiniteRing) -> FiniteModule {
        FiniteModule::from_fns_trusted(ring, ring.size(), |a, b| ring.add(a, b), |r, a| ring.mul(r, a), ring.zero())
    }

    /// Direct product; element (a, b) has index a + |A|·b.
    pub fn product(a: &FiniteModule, b: &FiniteModule) -> FiniteModule {
        let na = a.size();
        FiniteModule::from_fns_trusted(
            &a.ring,
            na * b.size(),
            |x, y| a.add(x % na, y % na) + na * b.add(x / na, y / na),
            |r, x| a.act(r, x % na) + na * b.act(r, x / na),
            a.zero + na * b.zero,
        )
    }

    /// Module over a ring given by an action through a ring homomorphism `proj: ring → self.ring`.
    pub fn pull_back(&self, ring: &FiniteRing, proj: &[Elem]) -> FiniteModule {
        FiniteModule::from_fns_trusted(ring, self.n, |a, b| self.add(a, b), |r, a| self.act(proj[r], a), self.zero)
    }

    /// Additive-and-action-preserving test for an index map.
    pub fn is_homomorphism(&self, other: &FiniteModule, f: &[Elem]) -> bool {
        f.len() == self.n
            && f.iter().all(|&y| y < other.n)
            && self.elements().all(|a| {
                self.elements().all(|b| f[self.add(a, b)] == other.add(f[a], f[b]))
                    && self.ring.elements().all(|r| f[self.act(r, a)] == other.act(r, f[a]))
            })
    }
}

/// A module with an ordered list of distinguished submodules; missing indices mean {0}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedModule {
    pub module: FiniteModule,
    pub tags: Vec<Vec<Elem>>,
}

impl TaggedModule {
    /// Validates that every tag is a submodule; tags are stored sorted.
    pub fn new(module: FiniteModule, tags: Vec<Vec<Elem>>) -> Result<TaggedModule, ModuleError> {
        let mut clean = Vec::with_capacity(tags.len());
        for (i, mut t) in tags.into_iter().enumerate() {
            t.sort_unstable();
            t.dedup();
            if !module.is_submodule(&t) {
                return Err(ModuleError::Shape(format!("tag {i} is not a submodule")));
            }
            clean.push(t);
        }
        Ok(TaggedModule { module, tags: clean })
    }

    pub fn from_file(f: &ModuleFile) -> Result<TaggedModule, ModuleError> {
        let (m, tags) = FiniteModule::from_file(f)?;
        TaggedModule::new(m, tags)
    }

    pub fn to_file(&self) -> ModuleFile {
        self.module.to_file(&self.tags)
    }

    /// Tag n, with the all-{0} tail convention.
    pub fn tag(&self, n: usize) -> std::borrow::Cow<'_, [Elem]> {
        match self.tags.get(n) {
            Some(t) => std::borrow::Cow::Borrowed(t),
            None => std::borrow::Cow::Owned(vec![self.module.zero()]),
        }
    }

    pub fn union_of_tags(&self) -> Vec<bool> {
        let mut mark = vec![false; self.module.size()];
        mark[self.module.zero()] = true;
        for t in &self.tags {
            for &a in t {
                mark[a] = true;
            }
        }
        mark
    }
}

#[cfg(test)]
mod tests;
