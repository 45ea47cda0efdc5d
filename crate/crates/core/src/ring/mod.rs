//! Finite commutative rings given by operation tables.

mod crt;
mod ideal;
mod iso;
mod presented;

pub use crt::{crt_split, product_ring, CrtSplit};
pub use ideal::{
    all_ideals, all_ideals_with_limit, annihilator, ideal_generated, is_ideal, quotient_ring,
    spectrum, spectrum_with_limit, Ideal, Spectrum, DEFAULT_CARRIER_LIMIT,
};
pub use iso::{brute_force_ring_iso, is_ring_hom};
pub use presented::{PElem, PresentedRing};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Failure, FailureKind, GuardError};

pub type Elem = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("malformed ring tables: {0}")]
    Shape(String),
    #[error("ring axiom `{axiom}` fails at {witness:?}")]
    Axiom { axiom: &'static str, witness: Vec<Elem> },
    #[error("not an ideal: {0}")]
    NotAnIdeal(String),
    #[error("bad presented ring: {0}")]
    Presentation(String),
    #[error(transparent)]
    Guard(#[from] GuardError),
}

impl Failure for RingError {
    fn kind(&self) -> FailureKind {
        match self {
            RingError::Guard(_) => FailureKind::Guard,
            RingError::NotAnIdeal(_) => FailureKind::Precondition,
            _ => FailureKind::Input,
        }
    }
}

/// Raw, unvalidated tables. This is also the on-disk ring format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingTables {
    pub size: usize,
    pub add: Vec<Vec<Elem>>,
    pub mul: Vec<Vec<Elem>>,
    pub zero: Elem,
    pub one: Elem,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomReport {
    Pass,
    Fail { axiom: &'static str, witness: Vec<Elem> },
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        matches!(self, AxiomReport::Pass)
    }
}

fn check_shape(t: &RingTables) -> Result<(), RingError> {
    let n = t.size;
    if n == 0 {
        return Err(RingError::Shape("size must be positive".into()));
    }
    for (name, tab) in [("add", &t.add), ("mul", &t.mul)] {
        if tab.len() != n {
            return Err(RingError::Shape(format!("{name} has {} rows, expected {n}", tab.len())));
        }
        for (i, row) in tab.iter().enumerate() {
            if row.len() != n {
                return Err(RingError::Shape(format!("{name} row {i} has length {}", row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= n) {
                return Err(RingError::Shape(format!("{name} row {i} holds {bad}, out of range")));
            }
        }
    }
    if t.zero >= n || t.one >= n {
        return Err(RingError::Shape("zero/one out of range".into()));
    }
    Ok(())
}

/// Exhaustive scan of the commutative-ring-with-unit axioms.
///
/// Shape problems come back as `Err`; a well-shaped table that is not a ring
/// gives `Ok(Fail)` with the first violating tuple in scan order.
pub fn check_ring_axioms(t: &RingTables) -> Result<AxiomReport, RingError> {
    check_shape(t)?;
    let n = t.size;
    let (add, mul, z, o) = (&t.add, &t.mul, t.zero, t.one);
    let fail = |axiom, witness: Vec<Elem>| Ok(AxiomReport::Fail { axiom, witness });
    for a in 0..n {
        if add[a][z] != a || add[z][a] != a {
            return fail("additive identity", vec![a]);
        }
        if !(0..n).any(|b| add[a][b] == z) {
            return fail("additive inverse", vec![a]);
        }
        if mul[a][o] != a || mul[o][a] != a {
            return fail("multiplicative identity", vec![a]);
        }
        for b in 0..n {
            if add[a][b] != add[b][a] {
                return fail("additive commutativity", vec![a, b]);
            }
            if mul[a][b] != mul[b][a] {
                return fail("multiplicative commutativity", vec![a, b]);
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if add[add[a][b]][c] != add[a][add[b][c]] {
                    return fail("additive associativity", vec![a, b, c]);
                }
                if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                    return fail("multiplicative associativity", vec![a, b, c]);
                }
                if mul[a][add[b][c]] != add[mul[a][b]][mul[a][c]] {
                    return fail("distributivity", vec![a, b, c]);
                }
            }
        }
    }
    Ok(AxiomReport::Pass)
}

/// A validated finite commutative ring. Elements are `0..size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteRing {
    n: usize,
    add: Vec<Elem>,
    mul: Vec<Elem>,
    neg: Vec<Elem>,
    zero: Elem,
    one: Elem,
}

impl FiniteRing {
    pub fn from_tables(t: &RingTables) -> Result<FiniteRing, RingError> {
        match check_ring_axioms(t)? {
            AxiomReport::Pass => Ok(Self::from_tables_unchecked(t)),
            AxiomReport::Fail { axiom, witness } => Err(RingError::Axiom { axiom, witness }),
        }
    }

    fn from_tables_unchecked(t: &RingTables) -> FiniteRing {
        let n = t.size;
        let add: Vec<Elem> = t.add.iter().flatten().copied().collect();
        let mul: Vec<Elem> = t.mul.iter().flatten().copied().collect();
        let neg = (0..n)
            .map(|a| (0..n).find(|&b| add[a * n + b] == t.zero).unwrap())
            .collect();
        FiniteRing { n, add, mul, neg, zero: t.zero, one: t.one }
    }

    /// Build from closures; used by the constructors below, which are correct by construction
    /// but still go through the axiom scan.
    pub fn from_fns(
        n: usize,
        add: impl Fn(Elem, Elem) -> Elem,
        mul: impl Fn(Elem, Elem) -> Elem,
        zero: Elem,
        one: Elem,
    ) -> Result<FiniteRing, RingError> {
        let t = RingTables {
            size: n,
            add: (0..n).map(|a| (0..n).map(|b| add(a, b)).collect()).collect(),
            mul: (0..n).map(|a| (0..n).map(|b| mul(a, b)).collect()).collect(),
            zero,
            one,
        };
        Self::from_tables(&t)
    }

    pub fn tables(&self) -> RingTables {
        let n = self.n;
        RingTables {
            size: n,
            add: self.add.chunks(n).map(|r| r.to_vec()).collect(),
            mul: self.mul.chunks(n).map(|r| r.to_vec()).collect(),
            zero: self.zero,
            one: self.one,
        }
    }

    /// ℤ/n with element k at index k.
    pub fn zmod(n: usize) -> FiniteRing {
        assert!(n > 0, "zmod(0) is not finite");
        FiniteRing::from_fns(n, |a, b| (a + b) % n, |a, b| (a * b) % n, 0, 1 % n)
            .expect("ℤ/n tables are a ring")
    }

    /// Commutative F_p-algebra with basis b_0 = 1, b_1, …, b_{d-1} and
    /// b_i b_j = Σ_k c[i][j][k] b_k. Element Σ a_k b_k has index Σ a_k p^k.
    pub fn from_structure_constants(p: usize, consts: &[Vec<Vec<usize>>]) -> Result<FiniteRing, RingError> {
        let d = consts.len();
        let n = p.checked_pow(d as u32).ok_or_else(|| RingError::Shape("algebra too large".into()))?;
        let digits = |mut a: usize| -> Vec<usize> {
            (0..d)
                .map(|_| {
                    let r = a % p;
                    a /= p;
                    r
                })
                .collect()
        };
        let index = |v: &[usize]| v.iter().rev().fold(0, |acc, &c| acc * p + c % p);
        for (i, row) in consts.iter().enumerate() {
            if row.len() != d || row.iter().any(|c| c.len() != d) {
                return Err(RingError::Shape(format!("structure constants row {i} is ill-shaped")));
            }
        }
        FiniteRing::from_fns(
            n,
            |a, b| {
                let (x, y) = (digits(a), digits(b));
                index(&x.iter().zip(&y).map(|(s, t)| s + t).collect::<Vec<_>>())
            },
            |a, b| {
                let (x, y) = (digits(a), digits(b));
                let mut out = vec![0usize; d];
                for i in 0..d {
                    for j in 0..d {
                        let c = x[i] * y[j] % p;
                        if c == 0 {
                            continue;
                        }
                        for k in 0..d {
                            out[k] = (out[k] + c * consts[i][j][k]) % p;
                        }
                    }
                }
                index(&out)
            },
            0,
            if d == 0 { 0 } else { 1 },
        )
    }

    /// F₂[x,y]/(x², xy, y²): basis 1, x, y, so x = 2, y = 4, x+y = 6.
    pub fn f2_xy() -> FiniteRing {
        let e = |k: usize| (0..3).map(|i| usize::from(i == k)).collect::<Vec<_>>();
        let z = vec![0; 3];
        let consts = vec![
            vec![e(0), e(1), e(2)],
            vec![e(1), z.clone(), z.clone()],
            vec![e(2), z.clone(), z],
        ];
        FiniteRing::from_structure_constants(2, &consts).expect("local algebra")
    }

    pub fn size(&self) -> usize {
        self.n
    }
    pub fn zero(&self) -> Elem {
        self.zero
    }
    pub fn one(&self) -> Elem {
        self.one
    }
    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.n
    }
    pub fn is_trivial(&self) -> bool {
        self.n == 1
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.add[a * self.n + b]
    }
    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a * self.n + b]
    }
    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a]
    }
    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg[b])
    }

    pub fn pow(&self, a: Elem, k: u32) -> Elem {
        (0..k).fold(self.one, |acc, _| self.mul(acc, a))
    }

    /// k·a for a non-negative integer k.
    pub fn times(&self, k: usize, a: Elem) -> Elem {
        (0..k).fold(self.zero, |acc, _| self.add(acc, a))
    }

    pub fn additive_order(&self, a: Elem) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.zero {
            x = self.add(x, a);
            k += 1;
        }
        k
    }

    pub fn characteristic(&self) -> usize {
        self.additive_order(self.one)
    }

    pub fn is_unit(&self, a: Elem) -> bool {
        self.elements().any(|b| self.mul(a, b) == self.one)
    }

    pub fn inverse(&self, a: Elem) -> Option<Elem> {
        self.elements().find(|&b| self.mul(a, b) == self.one)
    }

    /// Nonzero a with ab = 0 for some nonzero b.
    pub fn is_zero_divisor(&self, a: Elem) -> bool {
        a != self.zero && self.elements().any(|b| b != self.zero && self.mul(a, b) == self.zero)
    }

    pub fn is_idempotent(&self, a: Elem) -> bool {
        self.mul(a, a) == a
    }

    pub fn is_nilpotent(&self, a: Elem) -> bool {
        let mut x = a;
        for _ in 0..=self.n {
            if x == self.zero {
                return true;
            }
            x = self.mul(x, a);
        }
        false
    }

    pub fn units(&self) -> Vec<Elem> {
        self.elements().filter(|&a| self.is_unit(a)).collect()
    }

    pub fn idempotents(&self) -> Vec<Elem> {
        self.elements().filter(|&a| self.is_idempotent(a)).collect()
    }

    pub fn is_field(&self) -> bool {
        self.n > 1 && self.elements().all(|a| a == self.zero || self.is_unit(a))
    }
}

#[cfg(test)]
mod tests;

/// Named rings of order ≤ 16 used by tests, the acceptance suite and the command line.
pub fn catalog() -> Vec<(&'static str, FiniteRing)> {
    let pq = |n, m: &[i64]| {
        PresentedRing::PolyQuot { n, modulus: m.to_vec() }
            .to_finite()
            .expect("catalog presentation")
    };
    let e = |k: usize, d: usize| (0..d).map(|i| usize::from(i == k)).collect::<Vec<_>>();
    // F₂[x,y]/(x², y²): basis 1, x, y, xy
    let z4 = vec![0; 4];
    let xy_sq = FiniteRing::from_structure_constants(
        2,
        &[
            vec![e(0, 4), e(1, 4), e(2, 4), e(3, 4)],
            vec![e(1, 4), z4.clone(), e(3, 4), z4.clone()],
            vec![e(2, 4), e(3, 4), z4.clone(), z4.clone()],
            vec![e(3, 4), z4.clone(), z4.clone(), z4.clone()],
        ],
    )
    .expect("local algebra");
    vec![
        ("Z/2", FiniteRing::zmod(2)),
        ("Z/3", FiniteRing::zmod(3)),
        ("Z/4", FiniteRing::zmod(4)),
        ("Z/6", FiniteRing::zmod(6)),
        ("Z/8", FiniteRing::zmod(8)),
        ("Z/9", FiniteRing::zmod(9)),
        ("Z/12", FiniteRing::zmod(12)),
        ("Z/16", FiniteRing::zmod(16)),
        ("F4", pq(2, &[1, 1, 1])),
        ("F2[x]/(x^2)", pq(2, &[0, 0, 1])),
        ("F2[x]/(x^3)", pq(2, &[0, 0, 0, 1])),
        ("F2[x,y]/(x^2,xy,y^2)", FiniteRing::f2_xy()),
        ("F2[x,y]/(x^2,y^2)", xy_sq),
        ("Z/4[x]/(x^2+x+1)", pq(4, &[1, 1, 1])),
        ("Z/4[x]/(x^2)", pq(4, &[0, 0, 1])),
        ("Z/2xZ/2", product_ring(&[FiniteRing::zmod(2), FiniteRing::zmod(2)])),
        ("Z/2xZ/4", product_ring(&[FiniteRing::zmod(2), FiniteRing::zmod(4)])),
    ]
}
