use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::{Elem, FiniteRing, RingError};
use crate::error::GuardError;

pub const DEFAULT_CARRIER_LIMIT: usize = 64;

/// A set of ring elements, sorted ascending. Constructors in this module only
/// hand out sets that are actually ideals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ideal(Vec<Elem>);

impl Ideal {
    pub fn elements(&self) -> &[Elem] {
        &self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn contains(&self, a: Elem) -> bool {
        self.0.binary_search(&a).is_ok()
    }
    pub fn is_zero(&self) -> bool {
        self.0.len() == 1
    }
    pub fn is_subset(&self, other: &Ideal) -> bool {
        self.0.iter().all(|&a| other.contains(a))
    }
    pub fn intersection(&self, other: &Ideal) -> Ideal {
        Ideal(self.0.iter().copied().filter(|&a| other.contains(a)).collect())
    }
    pub fn sum(&self, ring: &FiniteRing, other: &Ideal) -> Ideal {
        let mut gens = self.0.clone();
        gens.extend_from_slice(&other.0);
        additive_closure(ring, gens)
    }
    /// Canonical order: cardinality, then element list.
    pub fn canonical_key(&self) -> (usize, &[Elem]) {
        (self.0.len(), &self.0)
    }
    /// Unchecked wrap; used by callers that already verified closure.
    pub(crate) fn from_sorted(v: Vec<Elem>) -> Ideal {
        Ideal(v)
    }
}

fn additive_closure(ring: &FiniteRing, seeds: Vec<Elem>) -> Ideal {
    let mut seen = vec![false; ring.size()];
    seen[ring.zero()] = true;
    let atoms: Vec<Elem> = {
        let mut s: Vec<Elem> = seeds.into_iter().filter(|&a| a != ring.zero()).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let mut frontier = vec![ring.zero()];
    while let Some(x) = frontier.pop() {
        for &g in &atoms {
            let y = ring.add(x, g);
            if !seen[y] {
                seen[y] = true;
                frontier.push(y);
            }
        }
    }
    Ideal(ring.elements().filter(|&a| seen[a]).collect())
}

/// Smallest ideal containing `gens`: the additive closure of all r·g.
pub fn ideal_generated(ring: &FiniteRing, gens: &[Elem]) -> Ideal {
    let atoms = gens
        .iter()
        .flat_map(|&g| ring.elements().map(move |r| (r, g)))
        .map(|(r, g)| ring.mul(r, g))
        .collect();
    additive_closure(ring, atoms)
}

pub fn is_ideal(ring: &FiniteRing, set: &[Elem]) -> bool {
    let s: HashSet<Elem> = set.iter().copied().collect();
    s.contains(&ring.zero())
        && s.iter().all(|&a| s.iter().all(|&b| s.contains(&ring.add(a, b))))
        && s.iter().all(|&a| ring.elements().all(|r| s.contains(&ring.mul(r, a))))
}

pub fn annihilator(ring: &FiniteRing, xs: &[Elem]) -> Ideal {
    Ideal(
        ring.elements()
            .filter(|&a| xs.iter().all(|&x| ring.mul(a, x) == ring.zero()))
            .collect(),
    )
}

pub fn all_ideals(ring: &FiniteRing) -> Result<Vec<Ideal>, RingError> {
    all_ideals_with_limit(ring, DEFAULT_CARRIER_LIMIT)
}

/// Every ideal once, in canonical order. Grown from {0} by repeatedly adding a
/// principal ideal until nothing new appears.
pub fn all_ideals_with_limit(ring: &FiniteRing, limit: usize) -> Result<Vec<Ideal>, RingError> {
    GuardError::check("ideal lattice", ring.size() as u128, limit as u128)?;
    let principal: Vec<Ideal> = ring.elements().map(|a| ideal_generated(ring, &[a])).collect();
    let zero = Ideal(vec![ring.zero()]);
    let mut found: BTreeSet<Ideal> = BTreeSet::new();
    found.insert(zero.clone());
    let mut work = vec![zero];
    while let Some(j) = work.pop() {
        for a in ring.elements() {
            if j.contains(a) {
                continue;
            }
            let k = j.sum(ring, &principal[a]);
            if found.insert(k.clone()) {
                work.push(k);
            }
        }
    }
    let mut out: Vec<Ideal> = found.into_iter().collect();
    out.sort_by(|a, b| a.canonical_key().cmp(&b.canonical_key()));
    Ok(out)
}

/// Cosets of `ideal`, numbered by their least representative.
/// Returns the quotient ring and the projection R → R/I.
pub fn quotient_ring(ring: &FiniteRing, ideal: &Ideal) -> Result<(FiniteRing, Vec<Elem>), RingError> {
    if !is_ideal(ring, ideal.elements()) {
        return Err(RingError::NotAnIdeal(format!("{:?}", ideal.elements())));
    }
    let n = ring.size();
    let mut coset_min = vec![usize::MAX; n];
    for a in 0..n {
        if coset_min[a] != usize::MAX {
            continue;
        }
        for &i in ideal.elements() {
            coset_min[ring.add(a, i)] = a;
        }
    }
    let reps: Vec<Elem> = (0..n).filter(|&a| coset_min[a] == a).collect();
    let mut index_of = vec![0; n];
    for (k, &r) in reps.iter().enumerate() {
        index_of[r] = k;
    }
    let proj: Vec<Elem> = (0..n).map(|a| index_of[coset_min[a]]).collect();
    let q = FiniteRing::from_fns(
        reps.len(),
        |a, b| proj[ring.add(reps[a], reps[b])],
        |a, b| proj[ring.mul(reps[a], reps[b])],
        proj[ring.zero()],
        proj[ring.one()],
    )?;
    Ok((q, proj))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Spectrum {
    pub maximal: Vec<Ideal>,
    pub prime: Vec<Ideal>,
    pub nilradical: Ideal,
    pub jacobson: Ideal,
    pub idempotents: Vec<Elem>,
    pub jacobson_is_nilradical: bool,
}

pub fn spectrum(ring: &FiniteRing) -> Result<Spectrum, RingError> {
    spectrum_with_limit(ring, DEFAULT_CARRIER_LIMIT)
}

pub fn spectrum_with_limit(ring: &FiniteRing, limit: usize) -> Result<Spectrum, RingError> {
    let ideals = all_ideals_with_limit(ring, limit)?;
    let n = ring.size();
    let proper: Vec<&Ideal> = ideals.iter().filter(|i| i.len() < n).collect();
    let maximal: Vec<Ideal> = proper
        .iter()
        .filter(|i| !proper.iter().any(|j| j.len() > i.len() && i.is_subset(j)))
        .map(|i| (*i).clone())
        .collect();
    let prime: Vec<Ideal> = proper
        .iter()
        .filter(|p| {
            ring.elements().all(|a| {
                p.contains(a)
                    || ring.elements().all(|b| p.contains(b) || !p.contains(ring.mul(a, b)))
            })
        })
        .map(|p| (*p).clone())
        .collect();
    let nilradical = Ideal(ring.elements().filter(|&a| ring.is_nilpotent(a)).collect());
    let jacobson = maximal
        .iter()
        .fold(Ideal(ring.elements().collect()), |acc, m| acc.intersection(m));
    let jacobson_is_nilradical = jacobson == nilradical;
    Ok(Spectrum {
        maximal,
        prime,
        nilradical,
        jacobson,
        idempotents: ring.idempotents(),
        jacobson_is_nilradical,
    })
}
