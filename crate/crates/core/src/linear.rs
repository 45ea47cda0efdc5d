//! Dense linear algebra over a small finite field, used for modules that are vector spaces
//! over a residue field R/I.

use serde::{Deserialize, Serialize};

use crate::ring::{quotient_ring, Elem, FiniteRing, Ideal, RingError};

/// A finite field relabelled so that 0 is zero and 1 is one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteField {
    q: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

pub type Vector = Vec<u8>;

impl FiniteField {
    pub fn from_ring(f: &FiniteRing) -> Result<FiniteField, RingError> {
        if !f.is_field() || f.size() > 256 {
            return Err(RingError::Shape("not a field of order ≤ 256".into()));
        }
        let mut order = vec![f.zero(), f.one()];
        order.extend(f.elements().filter(|&a| a != f.zero() && a != f.one()));
        let mut label = vec![0u8; f.size()];
        for (i, &a) in order.iter().enumerate() {
            label[a] = i as u8;
        }
        let q = f.size();
        let tab = |op: &dyn Fn(Elem, Elem) -> Elem| -> Vec<u8> {
            (0..q * q).map(|ij| label[op(order[ij / q], order[ij % q])]).collect()
        };
        let add = tab(&|a, b| f.add(a, b));
        let mul = tab(&|a, b| f.mul(a, b));
        let neg = (0..q).map(|i| label[f.neg(order[i])]).collect();
        let inv = (0..q)
            .map(|i| if i == 0 { 0 } else { label[f.inverse(order[i]).unwrap()] })
            .collect();
        Ok(FiniteField { q, add, mul, neg, inv })
    }

    /// Residue field R/I together with the map R → field labels.
    pub fn residue(ring: &FiniteRing, ideal: &Ideal) -> Result<(FiniteField, Vec<u8>), RingError> {
        let (k, proj) = quotient_ring(ring, ideal)?;
        let field = FiniteField::from_ring(&k)?;
        // from_ring relabels; recompute labels through the same ordering
        let mut order = vec![k.zero(), k.one()];
        order.extend(k.elements().filter(|&a| a != k.zero() && a != k.one()));
        let mut label = vec![0u8; k.size()];
        for (i, &a) in order.iter().enumerate() {
            label[a] = i as u8;
        }
        Ok((field, proj.iter().map(|&c| label[c]).collect()))
    }

    pub fn prime(p: usize) -> FiniteField {
        FiniteField::from_ring(&FiniteRing::zmod(p)).expect("prime field")
    }

    pub fn order(&self) -> usize {
        self.q
    }
    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q + b as usize]
    }
    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q + b as usize]
    }
    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }
    #[inline]
    pub fn inv(&self, a: u8) -> u8 {
        self.inv[a as usize]
    }

    pub fn axpy(&self, c: u8, x: &[u8], y: &mut [u8]) {
        if c == 0 {
            return;
        }
        for (yi, &xi) in y.iter_mut().zip(x) {
            *yi = self.add(*yi, self.mul(c, xi));
        }
    }

    pub fn scale(&self, c: u8, x: &[u8]) -> Vector {
        x.iter().map(|&xi| self.mul(c, xi)).collect()
    }

    pub fn vadd(&self, x: &[u8], y: &[u8]) -> Vector {
        x.iter().zip(y).map(|(&a, &b)| self.add(a, b)).collect()
    }

    /// Vector index Σ vᵢ qⁱ.
    pub fn index(&self, v: &[u8]) -> usize {
        v.iter().rev().fold(0, |acc, &c| acc * self.q + c as usize)
    }

    pub fn vector(&self, mut idx: usize, dim: usize) -> Vector {
        (0..dim)
            .map(|_| {
                let c = (idx % self.q) as u8;
                idx /= self.q;
                c
            })
            .collect()
    }

    pub fn unit(&self, i: usize, dim: usize) -> Vector {
        let mut v = vec![0; dim];
        v[i] = 1;
        v
    }
}

/// A subspace of kᵈ held as a reduced row echelon basis, which is canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subspace {
    pub dim: usize,
    pub rows: Vec<Vector>,
}

fn pivot(v: &[u8]) -> Option<usize> {
    v.iter().position(|&c| c != 0)
}

impl Subspace {
    pub fn zero(dim: usize) -> Subspace {
        Subspace { dim, rows: Vec::new() }
    }

    pub fn full(k: &FiniteField, dim: usize) -> Subspace {
        Subspace { dim, rows: (0..dim).map(|i| k.unit(i, dim)).collect() }
    }

    pub fn span(k: &FiniteField, dim: usize, gens: &[Vector]) -> Subspace {
        let mut rows: Vec<Vector> = Vec::new();
        for g in gens {
            debug_assert_eq!(g.len(), dim);
            let r = reduce(k, &rows, g);
            if let Some(p) = pivot(&r) {
                let r = k.scale(k.inv(r[p]), &r);
                for row in rows.iter_mut() {
                    let c = row[p];
                    if c != 0 {
                        k.axpy(k.neg(c), &r, row);
                    }
                }
                rows.push(r);
                rows.sort_by_key(|r| pivot(r));
            }
        }
        Subspace { dim, rows }
    }

    /// Span of the coordinate vectors eᵢ for the marked coordinates.
    pub fn coordinates(k: &FiniteField, dim: usize, mark: &[bool]) -> Subspace {
        Subspace { dim, rows: (0..dim).filter(|&i| mark[i]).map(|i| k.unit(i, dim)).collect() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn contains(&self, k: &FiniteField, v: &[u8]) -> bool {
        pivot(&reduce(k, &self.rows, v)).is_none()
    }

    pub fn join(&self, k: &FiniteField, other: &Subspace) -> Subspace {
        let mut gens = self.rows.clone();
        gens.extend(other.rows.iter().cloned());
        Subspace::span(k, self.dim, &gens)
    }

    pub fn with(&self, k: &FiniteField, v: &[u8]) -> Subspace {
        let mut gens = self.rows.clone();
        gens.push(v.to_vec());
        Subspace::span(k, self.dim, &gens)
    }

    pub fn is_subspace_of(&self, k: &FiniteField, other: &Subspace) -> bool {
        self.rows.iter().all(|r| other.contains(k, r))
    }

    /// self ∩ span{eᵢ : mark[i]}: eliminate the unmarked coordinates first.
    pub fn meet_coordinates(&self, k: &FiniteField, mark: &[bool]) -> Subspace {
        let perm: Vec<usize> = (0..self.dim).filter(|&i| !mark[i]).chain((0..self.dim).filter(|&i| mark[i])).collect();
        let permuted: Vec<Vector> = self.rows.iter().map(|r| perm.iter().map(|&i| r[i]).collect()).collect();
        let ech = Subspace::span(k, self.dim, &permuted);
        let free = perm.iter().filter(|&&i| !mark[i]).count();
        let kept: Vec<Vector> = ech
            .rows
            .into_iter()
            .filter(|r| pivot(r).is_some_and(|p| p >= free))
            .map(|r| {
                let mut v = vec![0; self.dim];
                for (j, &i) in perm.iter().enumerate() {
                    v[i] = r[j];
                }
                v
            })
            .collect();
        Subspace::span(k, self.dim, &kept)
    }

    pub fn elements(&self, k: &FiniteField) -> Vec<Vector> {
        let q = k.order();
        let total = q.pow(self.rows.len() as u32);
        (0..total)
            .map(|mut idx| {
                let mut v = vec![0u8; self.dim];
                for r in &self.rows {
                    k.axpy((idx % q) as u8, r, &mut v);
                    idx /= q;
                }
                v
            })
            .collect()
    }

    /// Re-express in a larger ambient space: coordinate i goes to position `place[i]`.
    pub fn embed(&self, k: &FiniteField, new_dim: usize, place: &[usize]) -> Subspace {
        let gens: Vec<Vector> = self
            .rows
            .iter()
            .map(|r| {
                let mut v = vec![0; new_dim];
                for (i, &c) in r.iter().enumerate() {
                    v[place[i]] = c;
                }
                v
            })
            .collect();
        Subspace::span(k, new_dim, &gens)
    }

    /// Restrict to the coordinates listed in `keep` (the subspace must live inside them).
    pub fn restrict(&self, k: &FiniteField, keep: &[usize]) -> Subspace {
        let gens: Vec<Vector> = self.rows.iter().map(|r| keep.iter().map(|&i| r[i]).collect()).collect();
        Subspace::span(k, keep.len(), &gens)
    }
}

fn reduce(k: &FiniteField, rows: &[Vector], v: &[u8]) -> Vector {
    let mut r = v.to_vec();
    for row in rows {
        let p = pivot(row).expect("echelon rows are nonzero");
        let c = r[p];
        if c != 0 {
            k.axpy(k.neg(c), row, &mut r);
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn residue_field_of_z4() {
        let z4 = FiniteRing::zmod(4);
        let i = crate::ring::ideal_generated(&z4, &[2]);
        let (k, proj) = FiniteField::residue(&z4, &i).unwrap();
        assert_eq!(k.order(), 2);
        assert_eq!(proj, vec![0, 1, 0, 1]);
    }

    #[test]
    fn f4_arithmetic() {
        let f4 = crate::ring::PresentedRing::PolyQuot { n: 2, modulus: vec![1, 1, 1] }.to_finite().unwrap();
        let k = FiniteField::from_ring(&f4).unwrap();
        for a in 1..4u8 {
            assert_eq!(k.mul(a, k.inv(a)), 1);
        }
    }

    proptest! {
        #[test]
        fn span_membership_matches_enumeration(gens in proptest::collection::vec(proptest::collection::vec(0u8..3, 4), 0..4)) {
            let k = FiniteField::prime(3);
            let s = Subspace::span(&k, 4, &gens);
            let elems = s.elements(&k);
            prop_assert_eq!(elems.len(), 3usize.pow(s.rank() as u32));
            // brute-force span by all coefficient tuples
            let mut brute = std::collections::BTreeSet::new();
            for idx in 0..3usize.pow(gens.len() as u32) {
                let mut v = vec![0u8; 4];
                let mut t = idx;
                for g in &gens {
                    k.axpy((t % 3) as u8, g, &mut v);
                    t /= 3;
                }
                brute.insert(v);
            }
            let mine: std::collections::BTreeSet<Vector> = elems.into_iter().collect();
            prop_assert_eq!(&mine, &brute);
            for idx in 0..81 {
                let v = k.vector(idx, 4);
                prop_assert_eq!(s.contains(&k, &v), brute.contains(&v));
            }
        }

        #[test]
        fn meet_coordinates_matches_enumeration(gens in proptest::collection::vec(proptest::collection::vec(0u8..2, 5), 0..4), mask in 0u8..32) {
            let k = FiniteField::prime(2);
            let s = Subspace::span(&k, 5, &gens);
            let mark: Vec<bool> = (0..5).map(|i| mask >> i & 1 == 1).collect();
            let m = s.meet_coordinates(&k, &mark);
            let brute: Vec<Vector> = s.elements(&k).into_iter().filter(|v| v.iter().enumerate().all(|(i, &c)| c == 0 || mark[i])).collect();
            prop_assert_eq!(m.elements(&k).len(), brute.len());
            prop_assert!(brute.iter().all(|v| m.contains(&k, v)));
        }
    }
}
