//! The dichotomy for finite commutative rings: a product of chain rings with its ideal census,
//! or an explicit witness of Borel completeness. Witnesses can also be checked on presented rings.

mod census;

pub use census::{abelian_groups, count_modules_upto, module_structures, Census, CensusOptions, CensusRow};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Failure, FailureKind, GuardError};
use crate::module::ModuleError;
use crate::ring::{
    all_ideals, annihilator, crt_split, ideal_generated, is_ideal, quotient_ring, Elem, FiniteRing, Ideal, PElem, PresentedRing,
    RingError,
};

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("input: {0}")]
    Input(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error(transparent)]
    Guard(#[from] GuardError),
}

impl Failure for ClassifierError {
    fn kind(&self) -> FailureKind {
        match self {
            ClassifierError::Input(_) => FailureKind::Input,
            ClassifierError::Ring(e) => e.kind(),
            ClassifierError::Module(e) => e.kind(),
            ClassifierError::Guard(_) => FailureKind::Guard,
        }
    }
}

/// A ring element as written in a witness: the table index for rings given by tables, the
/// coefficient list (lowest degree first) for presented rings.
pub type Coeffs = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum WitnessKind {
    ThmA { r: Coeffs },
    ThmB {
        x: Coeffs,
        y: Coeffs,
        /// Ann(x) + Ann(y), informational.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        ideal: Vec<Coeffs>,
    },
    /// Iₙ = Ann(cₙ) for the listed cₙ.
    ThmC { generators: Vec<Coeffs> },
    /// The ideal generated by the listed elements.
    NonMaximalPrime { generators: Vec<Coeffs> },
    InfOrthIdempotents { family: Vec<Coeffs> },
}

/// A witness in the ring reached from the input by the listed quotients, each ideal given by
/// its elements in the ring before it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub path: Vec<Vec<Elem>>,
    #[serde(flatten)]
    pub kind: WitnessKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorReport {
    /// The primitive idempotent cutting out the factor.
    pub idempotent: Elem,
    pub size: usize,
    pub chain: bool,
    /// x with 𝔪 = (x), in the factor's numbering.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<Elem>,
    /// (x⁰) ⊋ (x¹) ⊋ … ⊋ (xᵏ) = 0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub census: Option<Vec<Vec<Elem>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    #[serde(rename = "PIR")]
    ArtinianPir,
    BorelComplete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub verdict: VerdictKind,
    pub factors: Vec<FactorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub transcript: Vec<String>,
}

fn is_chain(ideals: &[Ideal]) -> bool {
    let mut by_size: Vec<&Ideal> = ideals.iter().collect();
    by_size.sort_by_key(|i| i.len());
    by_size.windows(2).all(|w| w[0].is_subset(w[1]))
}

fn principal_chain(f: &FiniteRing, ideals: &[Ideal]) -> Option<(Elem, Vec<Ideal>)> {
    let n = f.size();
    let m = ideals.iter().filter(|i| i.len() < n).max_by_key(|i| i.len())?;
    let x = f.elements().find(|&x| &ideal_generated(f, &[x]) == m)?;
    let mut chain = vec![ideal_generated(f, &[f.one()])];
    let mut p = f.one();
    while !chain.last().unwrap().is_zero() {
        p = f.mul(p, x);
        chain.push(ideal_generated(f, &[p]));
    }
    Some((x, chain))
}

pub fn classify_finite(ring: &FiniteRing) -> Result<Verdict, ClassifierError> {
    if ring.is_trivial() {
        return Err(ClassifierError::Input("the zero ring has no modules worth classifying".into()));
    }
    let split = crt_split(ring);
    let mut transcript = vec![format!("{} local factor(s) of sizes {:?}", split.factors.len(), split.factors.iter().map(FiniteRing::size).collect::<Vec<_>>())];
    let mut factors = Vec::new();
    for (k, (f, &e)) in split.factors.iter().zip(&split.idempotents).enumerate() {
        let ideals = all_ideals(f)?;
        if !is_chain(&ideals) {
            transcript.push(format!("factor {k} (idempotent {e}): ideals not linearly ordered"));
            factors.push(FactorReport { idempotent: e, size: f.size(), chain: false, generator: None, census: None });
            let witness = thm_b_witness(ring, &split.idempotents, k, &mut transcript)?;
            return Ok(Verdict { verdict: VerdictKind::BorelComplete, factors, witness: Some(witness), transcript });
        }
        let (x, chain) = principal_chain(f, &ideals).expect("a finite chain ring has a principal maximal ideal");
        let mut census: Vec<&Ideal> = chain.iter().collect();
        census.sort();
        let mut all: Vec<&Ideal> = ideals.iter().collect();
        all.sort();
        assert_eq!(census, all, "the powers of a generator of 𝔪 are all the ideals of a chain ring");
        transcript.push(format!("factor {k} (idempotent {e}): chain ring, 𝔪 = ({x}), {} ideals", chain.len()));
        factors.push(FactorReport {
            idempotent: e,
            size: f.size(),
            chain: true,
            generator: Some(x),
            census: Some(chain.iter().map(|i| i.elements().to_vec()).collect()),
        });
    }
    Ok(Verdict { verdict: VerdictKind::ArtinianPir, factors, witness: None, transcript })
}

/// Incomparable I, J in factor k, reached as R/(1 − e)R, then r ∈ I∖J and s ∈ J∖I in the
/// quotient by I ∩ J.
fn thm_b_witness(ring: &FiniteRing, idem: &[Elem], k: usize, transcript: &mut Vec<String>) -> Result<Witness, ClassifierError> {
    let mut path = Vec::new();
    let mut q = ring.clone();
    if idem.len() > 1 {
        let comp = ideal_generated(ring, &[ring.sub(ring.one(), idem[k])]);
        path.push(comp.elements().to_vec());
        q = quotient_ring(ring, &comp)?.0;
        transcript.push(format!("pass to R/(1 − {})R", idem[k]));
    }
    let ideals = all_ideals(&q)?;
    let mut best: Option<(usize, &Ideal, &Ideal)> = None;
    for (a, i) in ideals.iter().enumerate() {
        for j in &ideals[a + 1..] {
            if !i.is_subset(j) && !j.is_subset(i) {
                let size = i.intersection(j).len();
                if best.map_or(true, |(s, ..)| size < s) {
                    best = Some((size, i, j));
                }
            }
        }
    }
    let (_, i, j) = best.expect("a non-chain lattice has incomparable ideals");
    let r = *i.elements().iter().find(|&&a| !j.contains(a)).unwrap();
    let s = *j.elements().iter().find(|&&a| !i.contains(a)).unwrap();
    transcript.push(format!("incomparable ideals {:?} and {:?}; r = {r}, s = {s}", i.elements(), j.elements()));
    let meet = i.intersection(j);
    let (q2, proj) = if meet.is_zero() {
        (q.clone(), q.elements().collect::<Vec<_>>())
    } else {
        path.push(meet.elements().to_vec());
        transcript.push(format!("pass to the quotient by I ∩ J = {:?}", meet.elements()));
        quotient_ring(&q, &meet)?
    };
    let (x, y) = (proj[r], proj[s]);
    let ann = annihilator(&q2, &[x]).sum(&q2, &annihilator(&q2, &[y]));
    transcript.push(format!("witness (x, y) = ({x}, {y}), Ann(x) + Ann(y) = {:?}", ann.elements()));
    let as_coeffs = |v: &[Elem]| v.iter().map(|&a| vec![a as i64]).collect();
    Ok(Witness { path, kind: WitnessKind::ThmB { x: vec![x as i64], y: vec![y as i64], ideal: as_coeffs(ann.elements()) } })
}

#[derive(Debug, Clone)]
pub enum RingInput {
    Finite(FiniteRing),
    Presented(PresentedRing),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Fails,
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub outcome: Outcome,
    pub transcript: Vec<String>,
}

impl WitnessCheck {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }
}

struct Log(Vec<String>);

impl Log {
    /// Record a checked condition and pass its value through.
    fn check(&mut self, what: &str, ok: bool) -> bool {
        self.0.push(format!("{what}: {}", if ok { "yes" } else { "no" }));
        ok
    }

    fn done(self, ok: bool) -> WitnessCheck {
        WitnessCheck { outcome: if ok { Outcome::Holds } else { Outcome::Fails }, transcript: self.0 }
    }
}

pub fn verify_witness(ring: &RingInput, w: &Witness) -> Result<WitnessCheck, ClassifierError> {
    match ring {
        RingInput::Finite(f) => verify_finite(f, w, &|c: &Coeffs| table_elem(f, c)),
        RingInput::Presented(p) => {
            p.validate()?;
            match p.size() {
                None => verify_integers(w),
                Some(n) if n > 4096 => Ok(WitnessCheck {
                    outcome: Outcome::Unsupported,
                    transcript: vec![format!("presented ring of order {n} is too large for exhaustive checks")],
                }),
                Some(_) => {
                    let f = p.to_finite()?;
                    verify_finite(&f, w, &|c: &Coeffs| {
                        let e = PElem(c.iter().map(|&k| BigInt::from(k)).collect());
                        Ok(p.index_of(&e).expect("finite presented ring"))
                    })
                }
            }
        }
    }
}

fn table_elem(f: &FiniteRing, c: &Coeffs) -> Result<Elem, ClassifierError> {
    match c.as_slice() {
        [k] if *k >= 0 && (*k as usize) < f.size() => Ok(*k as usize),
        _ => Err(ClassifierError::Input(format!("{c:?} is not an element index of a ring of order {}", f.size()))),
    }
}

fn verify_finite(ring: &FiniteRing, w: &Witness, elem: &dyn Fn(&Coeffs) -> Result<Elem, ClassifierError>) -> Result<WitnessCheck, ClassifierError> {
    let mut log = Log(Vec::new());
    let f = replay_path(ring, &w.path)?;
    if !w.path.is_empty() {
        log.0.push(format!("{} quotient step(s), landing in a ring of order {}", w.path.len(), f.size()));
    }
    // after a quotient, elements are read in the quotient's numbering
    let get = |c: &Coeffs| if w.path.is_empty() { elem(c) } else { table_elem(&f, c) };
    let ok = match &w.kind {
        WitnessKind::ThmA { r } => {
            let r = get(r)?;
            let nonunit = log.check("r is not a unit", !f.is_unit(r));
            let nzd = log.check("r is not a zero divisor", r != f.zero() && !f.is_zero_divisor(r));
            nonunit && nzd
        }
        WitnessKind::ThmB { x, y, .. } => {
            let (x, y) = (get(x)?, get(y)?);
            let meet = ideal_generated(&f, &[x]).intersection(&ideal_generated(&f, &[y]));
            let c1 = log.check("(x) ∩ (y) = 0", meet.is_zero());
            let i = annihilator(&f, &[x]).sum(&f, &annihilator(&f, &[y]));
            log.0.push(format!("Ann(x) + Ann(y) = {:?}", i.elements()));
            let c2 = log.check("1 ∉ Ann(x) + Ann(y)", !i.contains(f.one()));
            c1 && c2
        }
        WitnessKind::ThmC { generators } => {
            let anns: Vec<Ideal> = generators.iter().map(|c| get(c).map(|c| annihilator(&f, &[c]))).collect::<Result<_, _>>()?;
            log.check("every listed Ann(cₙ) is nonzero", anns.iter().all(|i| !i.is_zero()));
            log.check("the listed ideals descend strictly", anns.windows(2).all(|p| p[1].is_subset(&p[0]) && p[1] != p[0]));
            log.check("a finite ring has an infinite strictly descending chain", false)
        }
        WitnessKind::NonMaximalPrime { generators } => {
            let gens: Vec<Elem> = generators.iter().map(get).collect::<Result<_, _>>()?;
            let p = ideal_generated(&f, &gens);
            let proper = p.len() < f.size();
            let prime = proper && f.elements().all(|a| p.contains(a) || f.elements().all(|b| p.contains(b) || !p.contains(f.mul(a, b))));
            let prime = log.check("the ideal is prime", prime);
            let maximal = prime && all_ideals(&f)?.iter().all(|j| j.len() == f.size() || !p.is_subset(j) || *j == p);
            let not_max = log.check("the ideal is not maximal", !maximal);
            prime && not_max
        }
        WitnessKind::InfOrthIdempotents { family } => {
            let es: Vec<Elem> = family.iter().map(get).collect::<Result<_, _>>()?;
            log.check("the listed elements are nonzero idempotents", es.iter().all(|&e| e != f.zero() && f.is_idempotent(e)));
            log.check("pairwise orthogonal", es.iter().enumerate().all(|(i, &a)| es[i + 1..].iter().all(|&b| f.mul(a, b) == f.zero())));
            log.check("a finite ring has infinitely many idempotents", false)
        }
    };
    Ok(log.done(ok))
}

fn integer(c: &Coeffs) -> Result<BigInt, ClassifierError> {
    match c.as_slice() {
        [k] => Ok(BigInt::from(*k)),
        [] => Ok(BigInt::zero()),
        _ => Err(ClassifierError::Input(format!("{c:?} is not an integer"))),
    }
}

fn is_prime(n: &BigInt) -> bool {
    match n.abs().to_u64() {
        Some(n) if n >= 2 => (2..).take_while(|d| d * d <= n).all(|d| n % d != 0),
        _ => false,
    }
}

/// ℤ: every check is decided symbolically.
fn verify_integers(w: &Witness) -> Result<WitnessCheck, ClassifierError> {
    if !w.path.is_empty() {
        return Err(ClassifierError::Input("quotient paths are only supported on finite rings".into()));
    }
    let mut log = Log(Vec::new());
    let ann_is_everything = |a: &BigInt| a.is_zero();
    let ok = match &w.kind {
        WitnessKind::ThmA { r } => {
            let r = integer(r)?;
            let nonunit = log.check("r is not a unit", r.abs() != BigInt::from(1));
            let nzd = log.check("r is not a zero divisor", !r.is_zero());
            nonunit && nzd
        }
        WitnessKind::ThmB { x, y, .. } => {
            let (x, y) = (integer(x)?, integer(y)?);
            let c1 = log.check("(x) ∩ (y) = 0", x.is_zero() || y.is_zero());
            let c2 = log.check("1 ∉ Ann(x) + Ann(y)", !ann_is_everything(&x) && !ann_is_everything(&y));
            c1 && c2
        }
        WitnessKind::ThmC { generators } => {
            log.0.push("in ℤ, Ann(c) is ℤ for c = 0 and 0 otherwise".into());
            let gs: Vec<BigInt> = generators.iter().map(integer).collect::<Result<_, _>>()?;
            log.check("every listed Ann(cₙ) is nonzero", gs.iter().all(BigInt::is_zero));
            log.check("the listed ideals descend strictly", gs.len() < 2);
            log.check("ℤ has an infinite strictly descending chain of nonzero annihilators", false)
        }
        WitnessKind::NonMaximalPrime { generators } => {
            let g = generators.iter().map(integer).try_fold(BigInt::zero(), |acc, c| c.map(|c| num_integer::Integer::gcd(&acc, &c)))?;
            log.0.push(format!("the ideal is ({g})"));
            let prime = log.check("the ideal is prime", g.is_zero() || is_prime(&g));
            let not_max = log.check("the ideal is not maximal", g.is_zero());
            prime && not_max
        }
        WitnessKind::InfOrthIdempotents { family } => {
            let es: Vec<BigInt> = family.iter().map(integer).collect::<Result<_, _>>()?;
            let one = BigInt::from(1);
            log.check("the listed elements are nonzero idempotents", es.iter().all(|e| *e == one));
            log.check("ℤ has infinitely many idempotents", false)
        }
    };
    Ok(log.done(ok))
}

/// Every ideal principal, by a direct scan.
pub fn every_ideal_principal(ring: &FiniteRing) -> Result<bool, ClassifierError> {
    let principal: std::collections::BTreeSet<Ideal> = ring.elements().map(|a| ideal_generated(ring, &[a])).collect();
    Ok(all_ideals(ring)?.iter().all(|i| principal.contains(i)))
}

/// Replays a witness path, returning the ring it lands in.
pub fn replay_path(ring: &FiniteRing, path: &[Vec<Elem>]) -> Result<FiniteRing, ClassifierError> {
    let mut f = ring.clone();
    for step in path {
        if step.iter().any(|&a| a >= f.size()) || !is_ideal(&f, step) {
            return Err(ClassifierError::Input(format!("path step {step:?} is not an ideal")));
        }
        f = quotient_ring(&f, &ideal_generated(&f, step))?.0;
    }
    Ok(f)
}
