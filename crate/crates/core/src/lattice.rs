//! Submodules of (ℤ/n)^k and ℤ^k in canonical echelon form: the Howell form for n > 0, the
//! Hermite normal form for n = 0. Every row has a leading column with a positive pivot (a
//! divisor of n when n > 0), entries above a pivot lie in [0, pivot), and the rows whose
//! leading column is at least c span the vectors that vanish on the first c coordinates.

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Failure, FailureKind};

pub type Row = Vec<i128>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("integer overflow while {0}")]
    Overflow(&'static str),
    #[error("shape: {0}")]
    Shape(String),
}

impl Failure for LatticeError {
    fn kind(&self) -> FailureKind {
        match self {
            LatticeError::Overflow(_) => FailureKind::Guard,
            LatticeError::Shape(_) => FailureKind::Input,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lattice {
    /// 0 for ℤ.
    pub modulus: u64,
    pub dim: usize,
    rows: Vec<Row>,
}

struct Arith {
    n: i128,
}

impl Arith {
    fn norm(&self, x: i128) -> i128 {
        if self.n > 0 {
            x.rem_euclid(self.n)
        } else {
            x
        }
    }

    fn mul(&self, a: i128, b: i128) -> Result<i128, LatticeError> {
        Ok(self.norm(a.checked_mul(b).ok_or(LatticeError::Overflow("multiplying"))?))
    }

    /// s·x + t·y, normalized.
    fn lin(&self, s: i128, x: &[i128], t: i128, y: &[i128]) -> Result<Row, LatticeError> {
        x.iter()
            .zip(y)
            .map(|(&a, &b)| {
                let v = self.mul(s, a)?.checked_add(self.mul(t, b)?).ok_or(LatticeError::Overflow("adding"))?;
                Ok(self.norm(v))
            })
            .collect()
    }

    fn scale(&self, s: i128, x: &[i128]) -> Result<Row, LatticeError> {
        x.iter().map(|&a| self.mul(s, a)).collect()
    }

    /// A unit w with w·a ≡ gcd(a, n) (mod n); for ℤ the sign of a.
    fn normalizer(&self, a: i128) -> i128 {
        if self.n == 0 {
            return a.signum();
        }
        let d = a.gcd(&self.n);
        let (a1, n1) = (a / d, self.n / d);
        let w0 = if n1 == 1 { 0 } else { a1.extended_gcd(&n1).x.rem_euclid(n1) };
        (0..)
            .map(|k| w0 + k * n1)
            .find(|w| w.gcd(&self.n) == 1)
            .expect("a unit exists in every residue class coprime to n/d")
    }
}

fn lead(r: &[i128]) -> Option<usize> {
    r.iter().position(|&x| x != 0)
}

fn echelonize(modulus: u64, dim: usize, gens: &[Row]) -> Result<Vec<Row>, LatticeError> {
    let ar = Arith { n: modulus as i128 };
    let mut work: Vec<Row> = Vec::new();
    for g in gens {
        if g.len() != dim {
            return Err(LatticeError::Shape(format!("generator of length {} in dimension {dim}", g.len())));
        }
        let r: Row = g.iter().map(|&x| ar.norm(x)).collect();
        if lead(&r).is_some() {
            work.push(r);
        }
    }
    let mut out: Vec<Row> = Vec::new();
    for c in 0..dim {
        let mut pivot: Option<Row> = None;
        let mut rest = Vec::with_capacity(work.len());
        for row in work.drain(..) {
            if row[c] == 0 {
                rest.push(row);
                continue;
            }
            pivot = Some(match pivot {
                None => row,
                Some(p) => {
                    let (a, b) = (p[c], row[c]);
                    let e = a.extended_gcd(&b);
                    let (g, s, t) = if e.gcd < 0 { (-e.gcd, -e.x, -e.y) } else { (e.gcd, e.x, e.y) };
                    let (u, v) = (a / g, b / g);
                    let np = ar.lin(s, &p, t, &row)?;
                    let nr = ar.lin(u, &row, -v, &p)?;
                    if lead(&nr).is_some() {
                        rest.push(nr);
                    }
                    np
                }
            });
        }
        if let Some(p) = pivot {
            let p = ar.scale(ar.normalizer(p[c]), &p)?;
            if modulus > 0 {
                let ann = ar.scale(ar.n / p[c], &p)?;
                if lead(&ann).is_some() {
                    rest.push(ann);
                }
            }
            out.push(p);
        }
        work = rest;
    }
    for i in 0..out.len() {
        for j in i + 1..out.len() {
            let c = lead(&out[j]).unwrap();
            let q = out[i][c].div_euclid(out[j][c]);
            if q != 0 {
                let rj = out[j].clone();
                out[i] = ar.lin(1, &out[i], -q, &rj)?;
            }
        }
    }
    Ok(out)
}

impl Lattice {
    pub fn zero(modulus: u64, dim: usize) -> Lattice {
        Lattice { modulus, dim, rows: Vec::new() }
    }

    pub fn full(modulus: u64, dim: usize) -> Lattice {
        let rows = if modulus == 1 { Vec::new() } else { (0..dim).map(|i| unit(dim, i)).collect() };
        Lattice { modulus, dim, rows }
    }

    pub fn span(modulus: u64, dim: usize, gens: &[Row]) -> Result<Lattice, LatticeError> {
        Ok(Lattice { modulus, dim, rows: echelonize(modulus, dim, gens)? })
    }

    /// The span of the coordinate vectors at `coords`.
    pub fn coordinates(modulus: u64, dim: usize, coords: impl IntoIterator<Item = usize>) -> Lattice {
        let gens: Vec<Row> = coords.into_iter().map(|i| unit(dim, i)).collect();
        Lattice::span(modulus, dim, &gens).expect("unit vectors")
    }

    /// The sublattice of ℤ^dim generated by `gens` and d·ℤ^dim, computed through the Howell
    /// form over ℤ/d, which keeps every entry below d.
    pub fn over_z_containing(d: u64, dim: usize, gens: &[Row]) -> Result<Lattice, LatticeError> {
        if d == 0 {
            return Err(LatticeError::Shape("the multiple must be positive".into()));
        }
        let h = Lattice::span(d, dim, gens)?;
        let mut rows = Vec::with_capacity(dim);
        let mut k = 0;
        for c in 0..dim {
            match h.rows.get(k) {
                Some(r) if lead(r) == Some(c) => {
                    rows.push(r.clone());
                    k += 1;
                }
                _ => {
                    let mut r = vec![0; dim];
                    r[c] = d as i128;
                    rows.push(r);
                }
            }
        }
        Ok(Lattice { modulus: 0, dim, rows })
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// (leading column, pivot) of each row.
    pub fn pivots(&self) -> Vec<(usize, i128)> {
        self.rows.iter().map(|r| {
            let c = lead(r).unwrap();
            (c, r[c])
        }).collect()
    }

    /// Canonical remainder of v, reducing only by rows whose leading column is below `upto`.
    pub fn reduce_prefix(&self, v: &[i128], upto: usize) -> Result<Row, LatticeError> {
        if v.len() != self.dim {
            return Err(LatticeError::Shape(format!("vector of length {} in dimension {}", v.len(), self.dim)));
        }
        let ar = Arith { n: self.modulus as i128 };
        let mut w: Row = v.iter().map(|&x| ar.norm(x)).collect();
        for r in &self.rows {
            let c = lead(r).unwrap();
            if c >= upto {
                break;
            }
            let q = w[c].div_euclid(r[c]);
            if q != 0 {
                w = ar.lin(1, &w, -q, r)?;
            }
        }
        Ok(w)
    }

    pub fn reduce(&self, v: &[i128]) -> Result<Row, LatticeError> {
        self.reduce_prefix(v, self.dim)
    }

    pub fn contains(&self, v: &[i128]) -> Result<bool, LatticeError> {
        Ok(self.reduce(v)?.iter().all(|&x| x == 0))
    }

    pub fn is_subset(&self, other: &Lattice) -> Result<bool, LatticeError> {
        for r in &self.rows {
            if !other.contains(r)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn join(&self, other: &Lattice) -> Result<Lattice, LatticeError> {
        let gens: Vec<Row> = self.rows.iter().chain(&other.rows).cloned().collect();
        Lattice::span(self.modulus, self.dim, &gens)
    }

    /// The same lattice with coordinate `perm[i]` moved to position i.
    pub fn permuted(&self, perm: &[usize]) -> Result<Lattice, LatticeError> {
        let gens: Vec<Row> = self.rows.iter().map(|r| perm.iter().map(|&j| r[j]).collect()).collect();
        Lattice::span(self.modulus, self.dim, &gens)
    }

    /// Number of elements (modulus > 0), or the index in ℤ^dim (modulus 0, full rank).
    pub fn count(&self) -> Option<u128> {
        let n = self.modulus as u128;
        if self.modulus == 0 {
            if self.rows.len() != self.dim {
                return None;
            }
            return self.pivots().iter().try_fold(1u128, |acc, &(_, p)| acc.checked_mul(p as u128));
        }
        self.pivots().iter().try_fold(1u128, |acc, &(_, p)| acc.checked_mul(n / p as u128))
    }

    /// Number of cosets in the ambient module.
    pub fn index(&self) -> Option<u128> {
        if self.modulus == 0 {
            return self.count();
        }
        let total = (self.modulus as u128).checked_pow(self.dim as u32)?;
        Some(total / self.count()?)
    }
}

pub fn unit(dim: usize, i: usize) -> Row {
    let mut v = vec![0; dim];
    v[i] = 1;
    v
}

/// Whether `rows` is a basis of the ambient free module: as many rows as coordinates, and
/// their span is everything.
pub fn is_basis(modulus: u64, dim: usize, rows: &[Row]) -> Result<bool, LatticeError> {
    Ok(rows.len() == dim && Lattice::span(modulus, dim, rows)? == Lattice::full(modulus, dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// All elements of the span, by closing under addition of generators.
    fn brute_span(n: i128, dim: usize, gens: &[Row]) -> std::collections::BTreeSet<Row> {
        let mut set = std::collections::BTreeSet::new();
        set.insert(vec![0; dim]);
        loop {
            let mut grew = false;
            for v in set.clone() {
                for g in gens {
                    let w: Row = v.iter().zip(g).map(|(a, b)| (a + b).rem_euclid(n)).collect();
                    grew |= set.insert(w);
                }
            }
            if !grew {
                return set;
            }
        }
    }

    #[test]
    fn howell_examples() {
        // over ℤ/4, (2,1) alone: the Howell form also records 2·(2,1) = (0,2)
        let l = Lattice::span(4, 2, &[vec![2, 1]]).unwrap();
        assert_eq!(l.rows(), &[vec![2, 1], vec![0, 2]]);
        assert_eq!(l.count(), Some(4));
        assert!(l.contains(&[0, 2]).unwrap());
        assert!(!l.contains(&[0, 1]).unwrap());
        // units are normalized away
        assert_eq!(Lattice::span(4, 1, &[vec![3]]).unwrap(), Lattice::full(4, 1));
        // over ℤ
        let z = Lattice::span(0, 2, &[vec![4, 6], vec![6, 9]]).unwrap();
        assert_eq!(z.rows(), &[vec![2, 3]]);
        let z = Lattice::over_z_containing(4, 2, &[vec![2, 1]]).unwrap();
        assert_eq!(z.rows(), &[vec![2, 1], vec![0, 2]]);
        assert_eq!(z.index(), Some(4));
    }

    proptest! {
        #[test]
        fn howell_form_is_canonical_and_decides_membership(
            n in prop::sample::select(vec![2u64, 4, 6, 8, 9, 12]),
            gens in prop::collection::vec(prop::collection::vec(0i128..12, 3), 0..4),
            perm_seed in 0usize..6,
        ) {
            let dim = 3;
            let l = Lattice::span(n, dim, &gens).unwrap();
            let set = brute_span(n as i128, dim, &gens);
            prop_assert_eq!(l.count(), Some(set.len() as u128));
            for v in itertools::Itertools::multi_cartesian_product((0..dim).map(|_| 0..n as i128)) {
                prop_assert_eq!(l.contains(&v).unwrap(), set.contains(&v));
            }
            // same span from shuffled, rescaled generators gives the same form
            let mut g2: Vec<Row> = set.iter().cloned().collect();
            let k = perm_seed % g2.len().max(1);
            g2.rotate_left(k);
            prop_assert_eq!(Lattice::span(n, dim, &g2).unwrap(), l.clone());
            // rows below a column span exactly the vectors vanishing there
            for c in 0..=dim {
                let below: Vec<Row> = l.rows().iter().filter(|r| lead(r).unwrap() >= c).cloned().collect();
                let want: std::collections::BTreeSet<Row> = set.iter().filter(|v| v[..c].iter().all(|&x| x == 0)).cloned().collect();
                prop_assert_eq!(brute_span(n as i128, dim, &below), want);
            }
        }

        #[test]
        fn hnf_matches_howell_lift(gens in prop::collection::vec(prop::collection::vec(-5i128..6, 3), 0..4), d in 1u64..9) {
            let mut all = gens.clone();
            for i in 0..3 {
                let mut r = vec![0; 3];
                r[i] = d as i128;
                all.push(r);
            }
            prop_assert_eq!(Lattice::over_z_containing(d, 3, &gens).unwrap(), Lattice::span(0, 3, &all).unwrap());
        }
    }
}
