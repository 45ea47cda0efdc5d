//! Amalgamation classes with a distinguished set X, equivalence relations on X, big
//! extensions with replayable certificates, finite limit chains and lifting of class
//! permutations.

mod tagged;

pub use tagged::{KModel, TaggedClass};

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Failure, FailureKind, GuardError};

pub type Name = u32;
pub type Label = u32;
pub type NameMap = BTreeMap<Name, Name>;

#[derive(Debug, Error)]
pub enum AmalgamError {
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("ℓ is not permissible at {0}")]
    NotPermissible(Name),
    #[error("class callback broke its contract: {0}")]
    Contract(String),
    #[error("budget: {0}")]
    Budget(String),
    #[error(transparent)]
    Guard(#[from] GuardError),
}

impl Failure for AmalgamError {
    fn kind(&self) -> FailureKind {
        match self {
            AmalgamError::Guard(_) | AmalgamError::Budget(_) => FailureKind::Guard,
            AmalgamError::Contract(_) => FailureKind::Decode,
            _ => FailureKind::Precondition,
        }
    }
}

/// A class of finitely generated structures with a distinguished generating set X of named
/// points. Structures are identified with their names: A ⊆ B means X^A ⊆ X^B and A is the
/// substructure of B generated by X^A.
pub trait SuitableClass {
    type S: Clone + PartialEq + std::fmt::Debug;

    fn seed(&self) -> Self::S;
    fn is_member(&self, s: &Self::S) -> Result<bool, AmalgamError>;
    fn x_set(&self, s: &Self::S) -> Vec<Name>;
    fn substructure(&self, s: &Self::S, gens: &[Name]) -> Self::S;
    /// `f` maps X^a injectively into X^b.
    fn is_embedding(&self, a: &Self::S, b: &Self::S, f: &NameMap) -> bool;
    fn rename(&self, s: &Self::S, f: &NameMap) -> Self::S;
    /// Amalgamate b and c over a, where X^b ∩ X^c = X^a.
    fn disjoint_amalgamate(&self, a: &Self::S, b: &Self::S, c: &Self::S) -> Result<Self::S, AmalgamError>;
    /// A proper extension with the single new point `fresh`.
    fn grow(&self, s: &Self::S, fresh: Name) -> Result<Self::S, AmalgamError>;
    /// Size measure used by guards.
    fn weight(&self, s: &Self::S) -> usize {
        self.x_set(s).len()
    }

    fn is_substructure(&self, small: &Self::S, big: &Self::S) -> bool {
        let xs = self.x_set(small);
        let big_x: BTreeSet<Name> = self.x_set(big).into_iter().collect();
        xs.iter().all(|x| big_x.contains(x)) && &self.substructure(big, &xs) == small
    }
}

/// Plain finite sets: every injection is an embedding.
#[derive(Debug, Clone, Copy, Default)]
pub struct BareSets;

impl SuitableClass for BareSets {
    type S = BTreeSet<Name>;
    fn seed(&self) -> Self::S {
        BTreeSet::new()
    }
    fn is_member(&self, _: &Self::S) -> Result<bool, AmalgamError> {
        Ok(true)
    }
    fn x_set(&self, s: &Self::S) -> Vec<Name> {
        s.iter().copied().collect()
    }
    fn substructure(&self, _: &Self::S, gens: &[Name]) -> Self::S {
        gens.iter().copied().collect()
    }
    fn is_embedding(&self, a: &Self::S, b: &Self::S, f: &NameMap) -> bool {
        let img: BTreeSet<Name> = a.iter().filter_map(|x| f.get(x).copied()).collect();
        a.iter().all(|x| f.contains_key(x)) && img.len() == a.len() && img.is_subset(b)
    }
    fn rename(&self, s: &Self::S, f: &NameMap) -> Self::S {
        s.iter().map(|x| f[x]).collect()
    }
    fn disjoint_amalgamate(&self, a: &Self::S, b: &Self::S, c: &Self::S) -> Result<Self::S, AmalgamError> {
        if &b.intersection(c).copied().collect::<BTreeSet<_>>() != a {
            return Err(AmalgamError::Precondition("X^B ∩ X^C ≠ X^A".into()));
        }
        Ok(b.union(c).copied().collect())
    }
    fn grow(&self, s: &Self::S, fresh: Name) -> Result<Self::S, AmalgamError> {
        let mut t = s.clone();
        if !t.insert(fresh) {
            return Err(AmalgamError::Precondition(format!("name {fresh} is not fresh")));
        }
        Ok(t)
    }
}

/// A class member together with an equivalence relation E on X, held as a class label per
/// point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqStructure<S> {
    pub base: S,
    pub labels: BTreeMap<Name, Label>,
}

impl<S> EqStructure<S> {
    /// E-classes ordered by label.
    pub fn classes(&self) -> BTreeMap<Label, Vec<Name>> {
        let mut out: BTreeMap<Label, Vec<Name>> = BTreeMap::new();
        for (&x, &l) in &self.labels {
            out.entry(l).or_default().push(x);
        }
        out
    }

    pub fn class_labels(&self) -> Vec<Label> {
        self.labels.values().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }

    fn fresh_name(&self) -> Name {
        self.labels.keys().next_back().map_or(0, |&m| m + 1)
    }

    fn fresh_label(&self) -> Label {
        self.labels.values().max().map_or(0, |&m| m + 1)
    }
}

pub fn check_eq_structure<C: SuitableClass>(class: &C, e: &EqStructure<C::S>) -> Result<(), AmalgamError> {
    let xs: BTreeSet<Name> = class.x_set(&e.base).into_iter().collect();
    let labelled: BTreeSet<Name> = e.labels.keys().copied().collect();
    if xs != labelled {
        return Err(AmalgamError::Precondition("E's blocks do not partition X".into()));
    }
    if !class.is_member(&e.base)? {
        return Err(AmalgamError::Precondition("base structure is not a class member".into()));
    }
    Ok(())
}

/// E_ℓ on J ∪ K from equivalence relations on J and K (as label maps) and an injective map ℓ
/// from J-classes to K-classes that is permissible on the shared points. Output labels are
/// K's labels; J-classes outside the domain of ℓ receive fresh labels in label order.
pub fn amalgamate_equivalence(
    j: &BTreeMap<Name, Label>,
    k: &BTreeMap<Name, Label>,
    ell: &BTreeMap<Label, Label>,
) -> Result<BTreeMap<Name, Label>, AmalgamError> {
    if ell.values().collect::<BTreeSet<_>>().len() != ell.len() {
        return Err(AmalgamError::Precondition("ℓ is not injective".into()));
    }
    for (x, lj) in j {
        if let Some(lk) = k.get(x) {
            if ell.get(lj) != Some(lk) {
                return Err(AmalgamError::NotPermissible(*x));
            }
        }
    }
    let mut next = k.values().max().map_or(0, |&m| m + 1);
    let mut fresh: BTreeMap<Label, Label> = BTreeMap::new();
    for l in j.values().collect::<BTreeSet<_>>() {
        if !ell.contains_key(l) {
            fresh.insert(*l, next);
            next += 1;
        }
    }
    let mut out = k.clone();
    for (x, lj) in j {
        out.entry(*x).or_insert_with(|| ell.get(lj).copied().unwrap_or_else(|| fresh[lj]));
    }

    // the displayed formula, evaluated pair by pair, must agree with the labelling
    let related = |x: Name, y: Name| -> bool {
        let in_j = |a: Name, b: Name| j.contains_key(&a) && j.contains_key(&b) && j[&a] == j[&b];
        let in_k = |a: Name, b: Name| k.contains_key(&a) && k.contains_key(&b) && k[&a] == k[&b];
        let cross = |a: Name, b: Name| j.get(&a).and_then(|l| ell.get(l)).is_some_and(|l| k.get(&b) == Some(l));
        x == y || in_j(x, y) || in_k(x, y) || cross(x, y) || cross(y, x)
    };
    for (&x, &lx) in &out {
        for (&y, &ly) in &out {
            if related(x, y) != (lx == ly) {
                return Err(AmalgamError::Contract(format!("E_ℓ is not an equivalence relation at ({x}, {y})")));
            }
        }
    }
    Ok(out)
}

/// One bigness constraint (A, f, h) with its witness g.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertEntry {
    pub a_gens: Vec<Name>,
    pub f: NameMap,
    pub h: BTreeMap<Label, Label>,
    pub g: NameMap,
}

#[derive(Debug, Clone, Copy)]
pub struct BigOptions {
    pub max_weight: usize,
    pub max_constraints: u128,
    pub max_nodes: u128,
}

impl Default for BigOptions {
    fn default() -> Self {
        BigOptions { max_weight: 14, max_constraints: 200_000, max_nodes: 2_000_000 }
    }
}

#[derive(Debug, Clone)]
pub struct BigExtension<S> {
    pub extension: EqStructure<S>,
    pub certificate: Vec<CertEntry>,
    /// Number of copy-and-amalgamate steps that were needed.
    pub amalgamation_steps: usize,
}

/// Every constraint (A, f, h): A generated by a subset of X^B (by size, then lexicographic),
/// f: A → B an embedding preserving and reflecting E, h a class permutation extending f/E.
pub fn enumerate_constraints<C: SuitableClass>(
    class: &C,
    b: &EqStructure<C::S>,
    limit: u128,
) -> Result<Vec<(Vec<Name>, NameMap, BTreeMap<Label, Label>)>, AmalgamError> {
    let xs = class.x_set(&b.base);
    let labels = b.class_labels();
    let mut out = Vec::new();
    for size in 0..=xs.len() {
        for gens in xs.iter().copied().combinations(size) {
            let a = class.substructure(&b.base, &gens);
            for img in xs.iter().copied().permutations(size) {
                let f: NameMap = gens.iter().copied().zip(img.iter().copied()).collect();
                if !class.is_embedding(&a, &b.base, &f) {
                    continue;
                }
                // E preserved and reflected on the generators; collect f/E
                let mut fe: BTreeMap<Label, Label> = BTreeMap::new();
                let mut ok = true;
                for (&x, &y) in &f {
                    let (lx, ly) = (b.labels[&x], b.labels[&y]);
                    match fe.get(&lx) {
                        Some(&l) if l != ly => ok = false,
                        _ => {
                            fe.insert(lx, ly);
                        }
                    }
                }
                if !ok || fe.values().collect::<BTreeSet<_>>().len() != fe.len() {
                    continue;
                }
                let free_src: Vec<Label> = labels.iter().copied().filter(|l| !fe.contains_key(l)).collect();
                let used: BTreeSet<Label> = fe.values().copied().collect();
                let free_dst: Vec<Label> = labels.iter().copied().filter(|l| !used.contains(l)).collect();
                for perm in free_dst.iter().copied().permutations(free_src.len()) {
                    let mut h = fe.clone();
                    h.extend(free_src.iter().copied().zip(perm));
                    out.push((gens.clone(), f.clone(), h));
                    GuardError::check("bigness constraints", out.len() as u128, limit)?;
                }
            }
        }
    }
    Ok(out)
}

/// Re-check one certificate entry against B ⊆ C.
pub fn verify_entry<C: SuitableClass>(class: &C, b: &EqStructure<C::S>, c: &EqStructure<C::S>, e: &CertEntry) -> bool {
    let a = class.substructure(&b.base, &e.a_gens);
    if !class.is_embedding(&a, &b.base, &e.f) || !class.is_embedding(&b.base, &c.base, &e.g) {
        return false;
    }
    let labels = b.class_labels();
    let h_ok = labels.iter().all(|l| e.h.get(l).is_some_and(|m| labels.contains(m)))
        && e.h.len() == labels.len()
        && e.h.values().collect::<BTreeSet<_>>().len() == labels.len();
    h_ok && e.f.iter().all(|(x, y)| e.g.get(x) == Some(y))
        && b.labels.iter().all(|(x, l)| e.g.get(x).and_then(|y| c.labels.get(y)) == Some(&e.h[l]))
        && e.g.keys().copied().eq(b.labels.keys().copied())
}

struct WitnessSearch<'a, C: SuitableClass> {
    class: &'a C,
    b: &'a EqStructure<C::S>,
    c: &'a EqStructure<C::S>,
    free: Vec<Name>,
    h: &'a BTreeMap<Label, Label>,
    nodes: u128,
    limit: u128,
}

impl<C: SuitableClass> WitnessSearch<'_, C> {
    fn go(&mut self, i: usize, g: &mut NameMap, used: &mut BTreeSet<Name>) -> Result<bool, AmalgamError> {
        self.nodes += 1;
        GuardError::check("witness search nodes", self.nodes, self.limit)?;
        if i == self.free.len() {
            return Ok(self.class.is_embedding(&self.b.base, &self.c.base, g));
        }
        let x = self.free[i];
        let want = self.h[&self.b.labels[&x]];
        let candidates: Vec<Name> =
            self.c.labels.iter().filter(|(y, &l)| l == want && !used.contains(*y)).map(|(&y, _)| y).collect();
        for y in candidates {
            g.insert(x, y);
            used.insert(y);
            if self.go(i + 1, g, used)? {
                return Ok(true);
            }
            used.remove(&y);
            g.remove(&x);
        }
        Ok(false)
    }
}

fn find_witness<C: SuitableClass>(
    class: &C,
    b: &EqStructure<C::S>,
    c: &EqStructure<C::S>,
    f: &NameMap,
    h: &BTreeMap<Label, Label>,
    limit: u128,
) -> Result<Option<NameMap>, AmalgamError> {
    let free: Vec<Name> = b.labels.keys().copied().filter(|x| !f.contains_key(x)).collect();
    let mut s = WitnessSearch { class, b, c, free, h, nodes: 0, limit };
    let mut g = f.clone();
    let mut used: BTreeSet<Name> = f.values().copied().collect();
    Ok(if s.go(0, &mut g, &mut used)? { Some(g) } else { None })
}

/// Build C ⊇ B that is B-big and has one more E-class. Constraints already witnessed inside
/// the current extension are recorded directly; each remaining one is met by amalgamating a
/// renamed copy of B over f[A] and gluing classes along h. A final grow step adds the new
/// class.
pub fn make_big_extension<C: SuitableClass>(
    class: &C,
    b: &EqStructure<C::S>,
    opts: BigOptions,
) -> Result<BigExtension<C::S>, AmalgamError> {
    check_eq_structure(class, b)?;
    let constraints = enumerate_constraints(class, b, opts.max_constraints)?;
    let mut c = b.clone();
    let mut entries = Vec::with_capacity(constraints.len());
    let mut steps = 0;
    for (a_gens, f, h) in constraints {
        if let Some(g) = find_witness(class, b, &c, &f, &h, opts.max_nodes)? {
            entries.push(CertEntry { a_gens, f, h, g });
            continue;
        }
        let projected = class.weight(&c.base) + b.labels.len() - a_gens.len();
        GuardError::check("extension weight", projected as u128, opts.max_weight as u128)?;
        // copy of B over f[A]
        let mut next = c.fresh_name();
        let mut rho = NameMap::new();
        for &x in b.labels.keys() {
            let y = f.get(&x).copied().unwrap_or_else(|| {
                next += 1;
                next - 1
            });
            rho.insert(x, y);
        }
        let copy = class.rename(&b.base, &rho);
        let shared: Vec<Name> = a_gens.iter().map(|x| f[x]).collect();
        let base = class.substructure(&c.base, &shared);
        let d = class
            .disjoint_amalgamate(&base, &c.base, &copy)
            .map_err(|e| AmalgamError::Contract(format!("amalgamation step: {e}")))?;
        GuardError::check("extension weight", class.weight(&d) as u128, opts.max_weight as u128)?;
        let j: BTreeMap<Name, Label> = b.labels.iter().map(|(x, &l)| (rho[x], l)).collect();
        let labels = amalgamate_equivalence(&j, &c.labels, &h)?;
        c = EqStructure { base: d, labels };
        steps += 1;
        let entry = CertEntry { a_gens, f, h, g: rho };
        if !verify_entry(class, b, &c, &entry) {
            return Err(AmalgamError::Contract("copy step produced an invalid witness".into()));
        }
        entries.push(entry);
    }
    let fresh = c.fresh_name();
    let label = c.fresh_label();
    let grown = class.grow(&c.base, fresh)?;
    GuardError::check("extension weight", class.weight(&grown) as u128, opts.max_weight as u128)?;
    let mut labels = c.labels.clone();
    labels.insert(fresh, label);
    let ext = EqStructure { base: grown, labels };
    check_eq_structure(class, &ext).map_err(|e| AmalgamError::Contract(format!("grow: {e}")))?;
    for e in &entries {
        if !verify_entry(class, b, &ext, e) {
            return Err(AmalgamError::Contract("certificate entry invalid after final grow".into()));
        }
    }
    Ok(BigExtension { extension: ext, certificate: entries, amalgamation_steps: steps })
}

/// Finite stages A₀ ⊆ … ⊆ Aₙ, each A_{k+1} being A_k-big via `certificates[k]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitChain<S> {
    pub stages: Vec<EqStructure<S>>,
    pub certificates: Vec<Vec<CertEntry>>,
}

pub fn build_chain<C: SuitableClass>(class: &C, n: usize, opts: BigOptions) -> Result<LimitChain<C::S>, AmalgamError> {
    let mut stages = vec![EqStructure { base: class.seed(), labels: BTreeMap::new() }];
    let mut certificates = Vec::new();
    for _ in 0..n {
        let big = make_big_extension(class, stages.last().unwrap(), opts)?;
        stages.push(big.extension);
        certificates.push(big.certificate);
    }
    Ok(LimitChain { stages, certificates })
}

/// Re-check every stage, every inclusion and every certificate, including that each
/// certificate covers all constraints.
pub fn verify_chain<C: SuitableClass>(class: &C, chain: &LimitChain<C::S>, opts: BigOptions) -> Result<(), AmalgamError> {
    if chain.certificates.len() + 1 != chain.stages.len() {
        return Err(AmalgamError::Precondition("certificate count does not match stages".into()));
    }
    for s in &chain.stages {
        check_eq_structure(class, s)?;
    }
    for (k, w) in chain.stages.windows(2).enumerate() {
        let (a, b) = (&w[0], &w[1]);
        if !class.is_substructure(&a.base, &b.base) || a.labels.iter().any(|(x, l)| b.labels.get(x) != Some(l)) {
            return Err(AmalgamError::Contract(format!("stage {k} is not a substructure of stage {}", k + 1)));
        }
        if b.class_labels().len() <= a.class_labels().len() {
            return Err(AmalgamError::Contract(format!("stage {} adds no class", k + 1)));
        }
        let wanted = enumerate_constraints(class, a, opts.max_constraints)?;
        let have: Vec<_> = chain.certificates[k].iter().map(|e| (e.a_gens.clone(), e.f.clone(), e.h.clone())).collect();
        if wanted != have {
            return Err(AmalgamError::Contract(format!("certificate {k} does not cover every constraint")));
        }
        if let Some(i) = chain.certificates[k].iter().position(|e| !verify_entry(class, a, b, e)) {
            return Err(AmalgamError::Contract(format!("certificate {k} entry {i} fails replay")));
        }
    }
    Ok(())
}

/// Lift a permutation h of the stage-m classes to an automorphism of stage m. The witness for
/// the constraint (∅, ∅, h) of stage m + 1 is used; if it leaves stage m the chain is reported
/// as too short rather than returning a map that is not an automorphism.
pub fn lift_permutation<C: SuitableClass>(
    class: &C,
    chain: &LimitChain<C::S>,
    m: usize,
    h: &BTreeMap<Label, Label>,
) -> Result<NameMap, AmalgamError> {
    if m + 1 >= chain.stages.len() {
        return Err(AmalgamError::Budget(format!(
            "lifting at stage {m} needs a chain of length at least {}, have {}",
            m + 1,
            chain.stages.len() - 1
        )));
    }
    let stage = &chain.stages[m];
    let labels = stage.class_labels();
    let is_perm = h.len() == labels.len()
        && labels.iter().all(|l| h.get(l).is_some_and(|t| labels.contains(t)))
        && h.values().collect::<BTreeSet<_>>().len() == labels.len();
    if !is_perm {
        return Err(AmalgamError::Precondition("h is not a permutation of the stage classes".into()));
    }
    let entry = chain.certificates[m]
        .iter()
        .find(|e| e.a_gens.is_empty() && &e.h == h)
        .ok_or_else(|| AmalgamError::Budget("no certificate entry for this permutation".into()))?;
    if !verify_entry(class, stage, &chain.stages[m + 1], entry) {
        return Err(AmalgamError::Contract("certificate entry fails replay".into()));
    }
    let sigma = entry.g.clone();
    if sigma.values().any(|y| !stage.labels.contains_key(y)) {
        return Err(AmalgamError::Budget(format!("the stage-{} witness leaves stage {m}; a longer chain is needed", m + 1)));
    }
    if !class.is_embedding(&stage.base, &stage.base, &sigma) {
        return Err(AmalgamError::Contract("lift is not an automorphism".into()));
    }
    Ok(sigma)
}

#[cfg(test)]
mod tests;
