//! Truncated completions: R = ℤ with a nonunit r ≥ 2, elements of R̂ known modulo rᵐ, the Γ
//! family σ_s, bounded algebraic-independence certificates, r-pure closures of formal
//! generator sets, and the coding of free-like tagged ℤ-modules into single ℤ-modules.

mod tfab;

pub use tfab::{tfab_code, TfabOptions, TfabPresentation};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coder::CoderError;
use crate::error::{Failure, FailureKind, GuardError};
use crate::lattice::{Lattice, LatticeError, Row};
use crate::reductions::{is_free_summand, ReductionError};

#[derive(Debug, Error)]
pub enum RadicError {
    #[error("input: {0}")]
    Input(String),
    #[error("depth mismatch: {0} vs {1}")]
    DepthMismatch(u32, u32),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("integer overflow while {0}")]
    Overflow(&'static str),
    #[error(transparent)]
    Guard(#[from] GuardError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Coder(#[from] CoderError),
}

impl Failure for RadicError {
    fn kind(&self) -> FailureKind {
        match self {
            RadicError::Input(_) | RadicError::DepthMismatch(..) => FailureKind::Input,
            RadicError::Precondition(_) => FailureKind::Precondition,
            RadicError::Overflow(_) | RadicError::Guard(_) => FailureKind::Guard,
            RadicError::Lattice(e) => e.kind(),
            RadicError::Reduction(e) => e.kind(),
            RadicError::Coder(e) => e.kind(),
        }
    }
}

/// rᵐ, kept below 2⁶⁴ so products of residues fit in u128.
pub fn modulus(r: u64, depth: u32) -> Result<u128, RadicError> {
    if r < 2 {
        return Err(RadicError::Input("r must be a nonunit, nonzero integer ≥ 2".into()));
    }
    let m = (r as u128).checked_pow(depth).filter(|&m| m <= 1u128 << 64);
    m.ok_or_else(|| RadicError::Input(format!("{r}^{depth} exceeds 2^64")))
}

/// An element of ℤ/(rᵐ) standing in for an element of the completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Truncated {
    pub r: u64,
    pub depth: u32,
    pub value: u128,
}

impl Truncated {
    pub fn new(r: u64, depth: u32, value: i128) -> Result<Truncated, RadicError> {
        let m = modulus(r, depth)?;
        Ok(Truncated { r, depth, value: value.rem_euclid(m as i128) as u128 })
    }

    pub fn from_representative(r: u64, depth: u32, rep: u128) -> Result<Truncated, RadicError> {
        Ok(Truncated { r, depth, value: rep % modulus(r, depth)? })
    }

    fn m(&self) -> u128 {
        (self.r as u128).pow(self.depth)
    }

    fn check(&self, o: &Truncated) -> Result<u128, RadicError> {
        if self.r != o.r {
            return Err(RadicError::Input(format!("different r: {} vs {}", self.r, o.r)));
        }
        if self.depth != o.depth {
            return Err(RadicError::DepthMismatch(self.depth, o.depth));
        }
        Ok(self.m())
    }

    pub fn add(&self, o: &Truncated) -> Result<Truncated, RadicError> {
        let m = self.check(o)?;
        Ok(Truncated { value: (self.value + o.value) % m, ..*self })
    }

    pub fn neg(&self) -> Truncated {
        let m = self.m();
        Truncated { value: (m - self.value) % m, ..*self }
    }

    pub fn sub(&self, o: &Truncated) -> Result<Truncated, RadicError> {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Truncated) -> Result<Truncated, RadicError> {
        let m = self.check(o)?;
        Ok(Truncated { value: self.value * o.value % m, ..*self })
    }

    /// The image at depth k ≤ m.
    pub fn project(&self, k: u32) -> Result<Truncated, RadicError> {
        if k > self.depth {
            return Err(RadicError::DepthMismatch(k, self.depth));
        }
        Truncated::from_representative(self.r, k, self.value)
    }

    /// Largest v with rᵛ dividing the value; None for 0 at this depth.
    pub fn valuation(&self) -> Option<u32> {
        if self.value == 0 {
            return None;
        }
        let (mut v, mut x) = (0, self.value);
        while x % self.r as u128 == 0 {
            x /= self.r as u128;
            v += 1;
        }
        Some(v)
    }

    /// Membership in rⁿR̂, read off the value mod rⁿ.
    pub fn divisible_by_power(&self, n: u32) -> Result<bool, RadicError> {
        if n > self.depth {
            return Err(RadicError::DepthMismatch(n, self.depth));
        }
        Ok(self.value % (self.r as u128).pow(n) == 0)
    }

    /// δ with rⁿδ = self, known to depth m − n.
    pub fn divide_by_power(&self, n: u32) -> Result<Truncated, RadicError> {
        if !self.divisible_by_power(n)? {
            return Err(RadicError::Input(format!("{} is not divisible by {}^{n}", self.value, self.r)));
        }
        Truncated::from_representative(self.r, self.depth - n, self.value / (self.r as u128).pow(n))
    }

    /// A representative value + rᵐ·t of the coset.
    pub fn representative(&self, t: u64) -> u128 {
        self.value + self.m() * t as u128
    }
}

/// σ_s for a finite s ⊆ ω: at depth m its value is Σ_{i ∈ s, i < m} rⁱ.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GammaElement {
    pub s: BTreeSet<u32>,
}

impl GammaElement {
    pub fn new(s: impl IntoIterator<Item = u32>) -> GammaElement {
        GammaElement { s: s.into_iter().collect() }
    }

    pub fn value(&self, r: u64, depth: u32) -> Result<Truncated, RadicError> {
        let m = modulus(r, depth)?;
        let v = self.s.iter().filter(|&&i| i < depth).fold(0u128, |acc, &i| (acc + (r as u128).pow(i)) % m);
        Ok(Truncated { r, depth, value: v })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    /// Total degree.
    pub degree: u32,
    /// Largest absolute value of a coefficient.
    pub height: u32,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { degree: 2, height: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CertOptions {
    pub r: u64,
    pub depth: u32,
    pub bounds: Bounds,
    /// Largest half-table the meet-in-the-middle search may build.
    pub max_half: u128,
}

impl Default for CertOptions {
    fn default() -> Self {
        CertOptions { r: 2, depth: 16, bounds: Bounds::default(), max_half: 1 << 22 }
    }
}

/// Monomials in n variables of total degree ≤ d, as sorted variable lists, constant first.
pub fn monomials(n: usize, d: u32) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut layer: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::new();
        for mono in &layer {
            let from = mono.last().copied().unwrap_or(0);
            for v in from..n {
                let mut m = mono.clone();
                m.push(v);
                next.push(m);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certificate {
    /// No nonzero polynomial within the bounds vanishes mod rᵐ.
    Certified { r: u64, depth: u32, bounds: Bounds, size: usize, polynomials: u128 },
    /// A nonzero polynomial within the bounds that vanishes mod rᵐ.
    Counterexample { monomials: Vec<Vec<usize>>, coefficients: Vec<i64> },
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certificate::Certified { .. })
    }
}

/// Every coefficient vector in [−H, H]^len with its value Σ cᵢ·vᵢ mod m.
fn half_values(vals: &[u128], h: i64, m: u128) -> impl Iterator<Item = (Vec<i64>, u128)> + '_ {
    let width = (2 * h + 1) as u128;
    let total = width.pow(vals.len() as u32);
    (0..total).map(move |mut k| {
        let mut cs = Vec::with_capacity(vals.len());
        let mut acc = 0u128;
        for &v in vals {
            let c = (k % width) as i64 - h;
            k /= width;
            cs.push(c);
            let term = v * c.unsigned_abs() as u128 % m;
            acc = if c >= 0 { (acc + term) % m } else { (acc + m - term) % m };
        }
        (cs, acc)
    })
}

/// Bounded independence by meet in the middle: p = p_A + p_B over a split of the monomials
/// vanishes iff p_A ≡ −p_B, so one half is tabulated and the other scanned.
pub fn independence_certificate(gammas: &[GammaElement], opts: &CertOptions) -> Result<Certificate, RadicError> {
    let m = modulus(opts.r, opts.depth)?;
    let monos = monomials(gammas.len(), opts.bounds.degree);
    let vals: Vec<Truncated> = gammas.iter().map(|g| g.value(opts.r, opts.depth)).collect::<Result<_, _>>()?;
    let mono_vals: Vec<u128> = monos.iter().map(|mo| mo.iter().fold(1u128 % m, |acc, &i| acc * vals[i].value % m)).collect();
    let h = opts.bounds.height as i64;
    let width = (2 * h + 1) as u128;
    let split = mono_vals.len() / 2;
    let (a, b) = mono_vals.split_at(split);
    let big = width.checked_pow(b.len() as u32).unwrap_or(u128::MAX);
    GuardError::check("certificate half-table", big, opts.max_half)?;
    let mut table: HashMap<u128, Vec<Vec<i64>>> = HashMap::new();
    for (cs, v) in half_values(a, h, m) {
        let slot = table.entry(v).or_default();
        if slot.len() < 2 {
            slot.push(cs);
        }
    }
    for (cb, v) in half_values(b, h, m) {
        let want = (m - v) % m;
        if let Some(cands) = table.get(&want) {
            for ca in cands {
                if ca.iter().chain(&cb).any(|&c| c != 0) {
                    let coefficients = ca.iter().chain(&cb).copied().collect();
                    return Ok(Certificate::Counterexample { monomials: monos, coefficients });
                }
            }
        }
    }
    Ok(Certificate::Certified {
        r: opts.r,
        depth: opts.depth,
        bounds: opts.bounds,
        size: gammas.len(),
        polynomials: width.pow(mono_vals.len() as u32) - 1,
    })
}

/// Candidate s-patterns with growing gaps: start, start + g, start + g + (g+1), … below the
/// depth, for g = 1, 2, … and start = 0, 1.
pub fn gamma_candidates(depth: u32) -> Vec<GammaElement> {
    let mut out = Vec::new();
    for start in 0..2 {
        for g in 1..=depth {
            let mut s = Vec::new();
            let (mut p, mut gap) = (start, g);
            while p < depth {
                s.push(p);
                p += gap;
                gap += 1;
            }
            let e = GammaElement::new(s);
            if !out.contains(&e) {
                out.push(e);
            }
        }
    }
    out
}

/// Γ₀ grown one element at a time, each step certified together with the earlier ones.
pub fn greedy_gamma(size: usize, opts: &CertOptions) -> Result<Vec<GammaElement>, RadicError> {
    let cands = gamma_candidates(opts.depth);
    let mut chosen: Vec<GammaElement> = Vec::new();
    while chosen.len() < size {
        let mut found = None;
        for c in &cands {
            if chosen.contains(c) {
                continue;
            }
            let mut trial = chosen.clone();
            trial.push(c.clone());
            if independence_certificate(&trial, opts)?.is_certified() {
                found = Some(c.clone());
                break;
            }
        }
        match found {
            Some(c) => chosen.push(c),
            None => {
                return Err(RadicError::Precondition(format!(
                    "no candidate extends a certified set of {} at degree {}, height {}, depth {}",
                    chosen.len(),
                    opts.bounds.degree,
                    opts.bounds.height,
                    opts.depth
                )))
            }
        }
    }
    Ok(chosen)
}

/// r^{−denom} Σ_μ γ^μ·v_μ, an element of ⊕R̂ written through the formal γ's. Monomials are
/// sorted lists of γ indices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FormalVector {
    pub denom: u32,
    pub terms: BTreeMap<Vec<usize>, Vec<i128>>,
}

impl FormalVector {
    pub fn constant(v: &[i128]) -> FormalVector {
        FormalVector { denom: 0, terms: [(vec![], v.to_vec())].into_iter().collect() }
    }

    pub fn gamma_times(n: usize, v: &[i128]) -> FormalVector {
        FormalVector { denom: 0, terms: [(vec![n], v.to_vec())].into_iter().collect() }
    }

    fn scaled_terms(&self, k: i128) -> Result<BTreeMap<Vec<usize>, Vec<i128>>, RadicError> {
        self.terms
            .iter()
            .map(|(mo, v)| {
                let w = v.iter().map(|&x| x.checked_mul(k).ok_or(RadicError::Overflow("scaling a formal vector"))).collect::<Result<_, _>>()?;
                Ok((mo.clone(), w))
            })
            .collect()
    }

    /// k·self + l·other, over the larger denominator.
    pub fn combine(&self, k: i128, other: &FormalVector, l: i128, r: u64) -> Result<FormalVector, RadicError> {
        let d = self.denom.max(other.denom);
        let up = |e: u32| (r as i128).checked_pow(d - e).ok_or(RadicError::Overflow("aligning denominators"));
        let a = self.scaled_terms(k.checked_mul(up(self.denom)?).ok_or(RadicError::Overflow("aligning denominators"))?)?;
        let b = other.scaled_terms(l.checked_mul(up(other.denom)?).ok_or(RadicError::Overflow("aligning denominators"))?)?;
        let mut terms = a;
        for (mo, v) in b {
            let e = terms.entry(mo).or_insert_with(|| vec![0; v.len()]);
            for (x, y) in e.iter_mut().zip(v) {
                *x = x.checked_add(y).ok_or(RadicError::Overflow("adding formal vectors"))?;
            }
        }
        terms.retain(|_, v| v.iter().any(|&x| x != 0));
        Ok(FormalVector { denom: d, terms })
    }

    /// γ_n·self.
    pub fn times_gamma(&self, n: usize) -> FormalVector {
        let terms = self
            .terms
            .iter()
            .map(|(mo, v)| {
                let mut m = mo.clone();
                m.push(n);
                m.sort_unstable();
                (m, v.clone())
            })
            .collect();
        FormalVector { denom: self.denom, terms }
    }

    fn rank(&self) -> Option<usize> {
        self.terms.values().next().map(Vec::len)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    /// rʲa lies in the generator span.
    In { j: u32 },
    /// No power of r brings a into the span.
    Out,
    /// Not decidable at this depth and budget.
    Unknown { reason: String },
}

/// A membership answer with the (depth, budget) it was computed at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub membership: Membership,
    pub depth: u32,
    pub budget: u32,
}

impl Answer {
    pub fn is_in(&self) -> bool {
        matches!(self.membership, Membership::In { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self.membership, Membership::Unknown { .. })
    }
}

/// The smallest r-pure submodule of ⊕R̂ (rank k) containing the ℤ-span of formal generators,
/// with γ values known to depth m.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PureSubmoduleRep {
    pub r: u64,
    pub depth: u32,
    pub rank: usize,
    pub gammas: Vec<GammaElement>,
    /// The integers used for the γ's; any representatives of their cosets mod rᵐ.
    pub gamma_reps: Vec<u128>,
    pub generators: Vec<FormalVector>,
    pub budget: u32,
    pub certificate: Option<Certificate>,
}

impl PureSubmoduleRep {
    pub fn new(r: u64, depth: u32, rank: usize, gammas: Vec<GammaElement>, generators: Vec<FormalVector>, budget: u32) -> Result<PureSubmoduleRep, RadicError> {
        if generators.iter().any(|g| g.denom != 0 || g.terms.values().any(|v| v.len() != rank)) {
            return Err(RadicError::Input("generators must be integral vectors of the ambient rank".into()));
        }
        let gamma_reps = gammas.iter().map(|g| g.value(r, depth).map(|t| t.value)).collect::<Result<_, _>>()?;
        Ok(PureSubmoduleRep { r, depth, rank, gammas, gamma_reps, generators, budget, certificate: None })
    }

    /// Numeric generator vectors mod rᵐ.
    pub fn numeric_generators(&self) -> Result<Vec<Vec<u128>>, RadicError> {
        self.generators.iter().map(|g| self.evaluate(g, self.depth)).collect()
    }

    /// Value of the numerator mod r^k (the denominator is ignored).
    pub fn evaluate(&self, x: &FormalVector, k: u32) -> Result<Vec<u128>, RadicError> {
        if k > self.depth {
            return Err(RadicError::DepthMismatch(k, self.depth));
        }
        let m = (self.r as u128).pow(k);
        let mut out = vec![0u128; self.rank];
        for (mo, v) in &x.terms {
            if mo.iter().any(|&i| i >= self.gamma_reps.len()) {
                return Err(RadicError::Input(format!("monomial {mo:?} uses an unknown γ")));
            }
            let g = mo.iter().fold(1 % m, |acc, &i| acc * (self.gamma_reps[i] % m) % m);
            for (o, &c) in out.iter_mut().zip(v) {
                let t = c.unsigned_abs() % m * g % m;
                *o = if c >= 0 { (*o + t) % m } else { (*o + m - t) % m };
            }
        }
        Ok(out)
    }
}

/// Coordinates of formal vectors over a fixed monomial list.
fn flatten(monos: &[Vec<usize>], rank: usize, x: &FormalVector) -> Row {
    let mut row = vec![0; monos.len() * rank];
    for (mo, v) in &x.terms {
        let i = monos.iter().position(|m| m == mo).expect("monomial listed");
        row[i * rank..(i + 1) * rank].copy_from_slice(v);
    }
    row
}

/// Whether some rʲa (j ≤ budget) lies in the ℤ-span of the generators. a must lie in ⊕R̂: its
/// numerator is checked divisible by r^denom at the truncation depth.
pub fn pure_closure_membership(g: &PureSubmoduleRep, a: &FormalVector, budget: u32) -> Result<Answer, RadicError> {
    let answer = |membership| Ok(Answer { membership, depth: g.depth, budget });
    if a.rank().is_some_and(|k| k != g.rank) {
        return Err(RadicError::Input("vector of the wrong rank".into()));
    }
    if a.denom > g.depth {
        return answer(Membership::Unknown { reason: format!("denominator r^{} exceeds the depth", a.denom) });
    }
    if g.evaluate(a, a.denom)?.iter().any(|&x| x != 0) {
        return Err(RadicError::Input(format!("the numerator is not divisible by r^{}, so the vector is not in ⊕R̂", a.denom)));
    }
    let mut monos: Vec<Vec<usize>> = g.generators.iter().chain([a]).flat_map(|x| x.terms.keys().cloned()).collect();
    monos.sort();
    monos.dedup();
    let dim = monos.len() * g.rank;
    if dim == 0 {
        return answer(Membership::In { j: 0 });
    }
    let gens: Vec<Row> = g.generators.iter().map(|x| flatten(&monos, g.rank, x)).collect();
    let span = Lattice::span(0, dim, &gens)?;
    let n = flatten(&monos, g.rank, a);
    let r = g.r as i128;
    // rʲ·r^{−e}·n ∈ span
    let test = |j: u32| -> Result<bool, RadicError> {
        if j >= a.denom {
            let k = r.checked_pow(j - a.denom).ok_or(RadicError::Overflow("powers of r"))?;
            let v: Row = n.iter().map(|&x| x.checked_mul(k).ok_or(RadicError::Overflow("scaling"))).collect::<Result<_, _>>()?;
            Ok(span.contains(&v)?)
        } else {
            let k = r.pow(a.denom - j);
            if n.iter().any(|&x| x % k != 0) {
                return Ok(false);
            }
            Ok(span.contains(&n.iter().map(|&x| x / k).collect::<Vec<_>>())?)
        }
    };
    for j in 0..=budget {
        if test(j)? {
            return answer(Membership::In { j });
        }
    }
    // if any power works, r^J does, J the r-part of the pivot product plus the denominator
    let big_j = a.denom
        + span
            .pivots()
            .iter()
            .map(|&(_, p)| {
                let (mut v, mut p) = (0, p);
                while p % r == 0 {
                    p /= r;
                    v += 1;
                }
                v
            })
            .sum::<u32>();
    if big_j > budget && test(big_j)? {
        return answer(Membership::Unknown { reason: format!("needs more than {budget} divisions by r") });
    }
    answer(Membership::Out)
}

/// G(M̄) for a free-like tagged ℤ-module given by its tag lattices in ℤᵏ, tag 0 the whole
/// module: generators eᵢ and γₙ·g for the canonical rows g of Mₙ. Γ₀ must be certified.
pub fn code_freelike(rank: usize, tags: &[Lattice], gammas: &[GammaElement], opts: &CertOptions, budget: u32) -> Result<PureSubmoduleRep, RadicError> {
    if tags.first() != Some(&Lattice::full(0, rank)) {
        return Err(RadicError::Precondition("tag 0 must be the whole free module".into()));
    }
    if gammas.len() != tags.len() {
        return Err(RadicError::Input(format!("{} γ's for {} tags", gammas.len(), tags.len())));
    }
    for (i, t) in tags.iter().enumerate() {
        if t.modulus != 0 || t.dim != rank {
            return Err(RadicError::Input(format!("tag {i} is not a sublattice of ℤ^{rank}")));
        }
        if !is_free_summand(t)? {
            return Err(RadicError::Precondition(format!("tag {i} is not a summand with free complement")));
        }
    }
    let cert = independence_certificate(gammas, opts)?;
    if !cert.is_certified() {
        return Err(RadicError::Precondition(format!("Γ₀ is not certified independent: {cert:?}")));
    }
    let mut gens: Vec<FormalVector> = (0..rank).map(|i| FormalVector::constant(&crate::lattice::unit(rank, i))).collect();
    for (n, t) in tags.iter().enumerate() {
        gens.extend(t.rows().iter().map(|row| FormalVector::gamma_times(n, row)));
    }
    let mut g = PureSubmoduleRep::new(opts.r, opts.depth, rank, gammas.to_vec(), gens, budget)?;
    g.certificate = Some(cert);
    Ok(g)
}

/// a ∈ Mₙ read through the coding: whether γₙ·a lies in G(M̄).
pub fn mkchar_test(g: &PureSubmoduleRep, n: usize, a: &[i128], budget: u32) -> Result<Answer, RadicError> {
    if n >= g.gammas.len() {
        return Err(RadicError::Input(format!("no tag {n}")));
    }
    let x = FormalVector::constant(a);
    if !pure_closure_membership(g, &x, budget)?.is_in() {
        return Err(RadicError::Precondition("a is not a member of G".into()));
    }
    pure_closure_membership(g, &x.times_gamma(n), budget)
}
