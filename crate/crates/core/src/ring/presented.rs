use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{FiniteRing, RingError};

/// A small catalog of rings with normal-form arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PresentedRing {
    Z,
    Zmod { n: u64 },
    /// (ℤ/n)[x] modulo a monic polynomial, coefficients lowest degree first.
    #[serde(rename = "polyquot")]
    PolyQuot { n: u64, modulus: Vec<i64> },
}

/// Element as a coefficient vector; for ℤ and ℤ/n only the first entry is used.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PElem(pub Vec<BigInt>);

impl PElem {
    pub fn int(k: i64) -> PElem {
        PElem(vec![BigInt::from(k)])
    }
}

impl PresentedRing {
    pub fn validate(&self) -> Result<(), RingError> {
        match self {
            PresentedRing::Z => Ok(()),
            PresentedRing::Zmod { n } if *n == 0 => {
                Err(RingError::Presentation("ℤ/0 is ℤ; use kind Z".into()))
            }
            PresentedRing::Zmod { .. } => Ok(()),
            PresentedRing::PolyQuot { n, modulus } => {
                if *n == 0 {
                    return Err(RingError::Presentation("coefficient ring must be finite".into()));
                }
                match modulus.last() {
                    Some(&1) if modulus.len() >= 2 => Ok(()),
                    _ => Err(RingError::Presentation("modulus must be monic of degree ≥ 1".into())),
                }
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, PresentedRing::Z)
    }

    fn degree(&self) -> usize {
        match self {
            PresentedRing::PolyQuot { modulus, .. } => modulus.len() - 1,
            _ => 1,
        }
    }

    pub fn normalize(&self, a: &PElem) -> PElem {
        match self {
            PresentedRing::Z => PElem(vec![a.0.first().cloned().unwrap_or_default()]),
            PresentedRing::Zmod { n } => {
                let n = BigInt::from(*n);
                PElem(vec![a.0.first().cloned().unwrap_or_default().mod_floor(&n)])
            }
            PresentedRing::PolyQuot { n, modulus } => {
                let nb = BigInt::from(*n);
                let d = modulus.len() - 1;
                let mut c: Vec<BigInt> = a.0.clone();
                // reduce by the monic modulus from the top down
                while c.len() > d {
                    let lead = c.pop().unwrap();
                    let shift = c.len() - d;
                    for (i, &m) in modulus[..d].iter().enumerate() {
                        c[shift + i] -= &lead * m;
                    }
                }
                c.resize(d, BigInt::zero());
                PElem(c.into_iter().map(|x| x.mod_floor(&nb)).collect())
            }
        }
    }

    pub fn zero(&self) -> PElem {
        self.normalize(&PElem(vec![]))
    }

    pub fn one(&self) -> PElem {
        self.normalize(&PElem::int(1))
    }

    pub fn from_int(&self, k: i64) -> PElem {
        self.normalize(&PElem::int(k))
    }

    pub fn add(&self, a: &PElem, b: &PElem) -> PElem {
        let len = a.0.len().max(b.0.len());
        let get = |v: &PElem, i: usize| v.0.get(i).cloned().unwrap_or_default();
        self.normalize(&PElem((0..len).map(|i| get(a, i) + get(b, i)).collect()))
    }

    pub fn neg(&self, a: &PElem) -> PElem {
        self.normalize(&PElem(a.0.iter().map(|x| -x).collect()))
    }

    pub fn mul(&self, a: &PElem, b: &PElem) -> PElem {
        match self {
            PresentedRing::PolyQuot { .. } => {
                if a.0.is_empty() || b.0.is_empty() {
                    return self.zero();
                }
                let mut c = vec![BigInt::zero(); a.0.len() + b.0.len() - 1];
                for (i, x) in a.0.iter().enumerate() {
                    for (j, y) in b.0.iter().enumerate() {
                        c[i + j] += x * y;
                    }
                }
                self.normalize(&PElem(c))
            }
            _ => {
                let x = a.0.first().cloned().unwrap_or_default();
                let y = b.0.first().cloned().unwrap_or_default();
                self.normalize(&PElem(vec![x * y]))
            }
        }
    }

    pub fn size(&self) -> Option<u64> {
        match self {
            PresentedRing::Z => None,
            PresentedRing::Zmod { n } => Some(*n),
            PresentedRing::PolyQuot { n, .. } => n.checked_pow(self.degree() as u32),
        }
    }

    /// Index of a normal form in the table numbering used by `to_finite`:
    /// Σ c_i n^i.
    pub fn index_of(&self, a: &PElem) -> Option<usize> {
        let n = match self {
            PresentedRing::Z => return None,
            PresentedRing::Zmod { n } | PresentedRing::PolyQuot { n, .. } => *n as usize,
        };
        let a = self.normalize(a);
        a.0.iter().rev().try_fold(0usize, |acc, c| Some(acc * n + c.to_usize()?))
    }

    pub fn element_at(&self, mut idx: usize) -> Option<PElem> {
        let n = match self {
            PresentedRing::Z => return None,
            PresentedRing::Zmod { n } | PresentedRing::PolyQuot { n, .. } => *n as usize,
        };
        let d = self.degree();
        let c = (0..d)
            .map(|_| {
                let r = idx % n;
                idx /= n;
                BigInt::from(r)
            })
            .collect();
        Some(PElem(c))
    }

    /// Operation tables of a finite member of the catalog.
    pub fn to_finite(&self) -> Result<FiniteRing, RingError> {
        self.validate()?;
        let size = self
            .size()
            .ok_or_else(|| RingError::Presentation("ℤ has no finite table".into()))?;
        let size = usize::try_from(size)
            .ok()
            .filter(|&s| s <= 4096)
            .ok_or_else(|| RingError::Presentation("presented ring too large for tables".into()))?;
        let elems: Vec<PElem> = (0..size).map(|i| self.element_at(i).unwrap()).collect();
        let idx = |e: &PElem| self.index_of(e).unwrap();
        FiniteRing::from_fns(
            size,
            |a, b| idx(&self.add(&elems[a], &elems[b])),
            |a, b| idx(&self.mul(&elems[a], &elems[b])),
            idx(&self.zero()),
            idx(&self.one()),
        )
    }

    /// Unit test that is exact on the whole catalog.
    pub fn is_unit(&self, a: &PElem) -> Result<bool, RingError> {
        match self {
            PresentedRing::Z => Ok(self.normalize(a).0[0].abs().is_one()),
            _ => {
                let f = self.to_finite()?;
                Ok(f.is_unit(self.index_of(a).unwrap()))
            }
        }
    }

    /// Zero-divisor test (nonzero a with ab = 0 for some nonzero b); exact on the catalog.
    pub fn is_zero_divisor(&self, a: &PElem) -> Result<bool, RingError> {
        match self {
            PresentedRing::Z => Ok(false),
            _ => {
                let f = self.to_finite()?;
                Ok(f.is_zero_divisor(self.index_of(a).unwrap()))
            }
        }
    }

    pub fn is_zero(&self, a: &PElem) -> bool {
        self.normalize(a) == self.zero()
    }

    pub fn value_i64(&self, a: &PElem) -> Option<i64> {
        self.normalize(a).0.first().and_then(|x| x.to_i64())
    }
}
