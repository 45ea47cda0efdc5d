use serde::Serialize;

use super::{Elem, FiniteRing};

/// Componentwise product. Mixed radix, first factor least significant.
/// The empty product is the one-element ring.
pub fn product_ring(factors: &[FiniteRing]) -> FiniteRing {
    let sizes: Vec<usize> = factors.iter().map(FiniteRing::size).collect();
    let n: usize = sizes.iter().product();
    let split = |mut a: usize| -> Vec<Elem> {
        sizes
            .iter()
            .map(|&s| {
                let r = a % s;
                a /= s;
                r
            })
            .collect()
    };
    let join = |v: &[Elem]| v.iter().zip(&sizes).rev().fold(0, |acc, (&c, &s)| acc * s + c);
    let lift = |op: &dyn Fn(&FiniteRing, Elem, Elem) -> Elem, a: Elem, b: Elem| {
        let (x, y) = (split(a), split(b));
        let v: Vec<Elem> = factors.iter().enumerate().map(|(i, f)| op(f, x[i], y[i])).collect();
        join(&v)
    };
    let zero = join(&factors.iter().map(FiniteRing::zero).collect::<Vec<_>>());
    let one = join(&factors.iter().map(FiniteRing::one).collect::<Vec<_>>());
    FiniteRing::from_fns(
        n,
        |a, b| lift(&|f, x, y| f.add(x, y), a, b),
        |a, b| lift(&|f, x, y| f.mul(x, y), a, b),
        zero,
        one,
    )
    .expect("product of rings is a ring")
}

/// Decomposition of a finite ring into local factors along its primitive idempotents.
#[derive(Debug, Clone, Serialize)]
pub struct CrtSplit {
    /// Primitive idempotents, ascending; pairwise orthogonal, summing to one.
    pub idempotents: Vec<Elem>,
    /// Factor i is e_i R with unit e_i; `carriers[i][k]` is the element of R at factor index k.
    #[serde(skip)]
    pub factors: Vec<FiniteRing>,
    pub carriers: Vec<Vec<Elem>>,
    /// R → product_ring(factors), a ring isomorphism.
    pub to_product: Vec<Elem>,
}

pub fn crt_split(ring: &FiniteRing) -> CrtSplit {
    let zero = ring.zero();
    let nonzero_idem: Vec<Elem> = ring.idempotents().into_iter().filter(|&e| e != zero).collect();
    let idempotents: Vec<Elem> = nonzero_idem
        .iter()
        .copied()
        .filter(|&e| !nonzero_idem.iter().any(|&f| f != e && ring.mul(f, e) == f))
        .collect();

    let mut factors = Vec::new();
    let mut carriers = Vec::new();
    for &e in &idempotents {
        let mut carrier: Vec<Elem> = ring.elements().map(|a| ring.mul(e, a)).collect();
        carrier.sort_unstable();
        carrier.dedup();
        let pos = |x: Elem| carrier.binary_search(&x).expect("closed under e·");
        let f = FiniteRing::from_fns(
            carrier.len(),
            |a, b| pos(ring.add(carrier[a], carrier[b])),
            |a, b| pos(ring.mul(carrier[a], carrier[b])),
            pos(zero),
            pos(e),
        )
        .expect("corner ring eR is a ring");
        factors.push(f);
        carriers.push(carrier);
    }

    let sizes: Vec<usize> = factors.iter().map(FiniteRing::size).collect();
    let to_product = ring
        .elements()
        .map(|a| {
            idempotents
                .iter()
                .zip(&carriers)
                .zip(&sizes)
                .rev()
                .fold(0, |acc, ((&e, c), &s)| {
                    acc * s + c.binary_search(&ring.mul(e, a)).expect("e·a ∈ eR")
                })
        })
        .collect();
    CrtSplit { idempotents, factors, carriers, to_product }
}
