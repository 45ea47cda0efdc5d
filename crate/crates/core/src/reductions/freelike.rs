use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ReductionError;
use crate::error::GuardError;
use crate::lattice::{is_basis, unit, Lattice, Row};
use crate::module::{FiniteModule, TaggedModule};
use crate::ring::FiniteRing;

/// Scalars of the free module: ℤ/n itself, or ℤ acting through ℤ → ℤ/n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scalars {
    Residues,
    Integers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeLikeOptions {
    /// Copies of each e_a; the ω factor of ⊕_{M×ω} R, truncated.
    pub omega: usize,
    pub max_rank: usize,
    pub scalars: Scalars,
}

impl Default for FreeLikeOptions {
    fn default() -> Self {
        FreeLikeOptions { omega: 2, max_rank: 4096, scalars: Scalars::Residues }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Handles {
    /// n, for the ring ℤ/n the input module lives over.
    pub ring_order: u64,
    pub carrier: usize,
    pub omega: usize,
    /// Number of e coordinates, |M|·omega. e_{a,j} sits at a + |M|·j.
    pub e_rank: usize,
    /// Coordinate range [start, end) of the d's belonging to each Tₙ (T₀ = ker δ first).
    pub blocks: Vec<(usize, usize)>,
}

/// A free module of finite rank with tags [U_*, U₀, V₀, U₁, V₁, …], every tag a direct
/// summand with free complement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeLikeTagged {
    pub scalars: Scalars,
    pub rank: usize,
    pub tags: Vec<Lattice>,
    pub handles: Handles,
}

/// The tagged free module (M*, ker δ, δ⁻¹M₁, …) of the first step, before the tags are made
/// into summands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepOne {
    pub e_rank: usize,
    pub tags: Vec<Lattice>,
}

/// The reduction works over ℤ/n, numbered as FiniteRing::zmod numbers it.
fn check_ring(ring: &FiniteRing) -> Result<(), ReductionError> {
    let n = ring.size();
    if n < 2 || ring != &FiniteRing::zmod(n) {
        return Err(ReductionError::Input("the free-like reduction needs a nontrivial ring ℤ/n in its standard numbering".into()));
    }
    Ok(())
}

fn span(scalars: Scalars, n: u64, dim: usize, gens: &[Row]) -> Result<Lattice, ReductionError> {
    Ok(match scalars {
        Scalars::Residues => Lattice::span(n, dim, gens)?,
        Scalars::Integers => Lattice::over_z_containing(n, dim, gens)?,
    })
}

/// M* free on e_{a,j} (a ∈ M, j < omega), δ(e_{a,j}) = a, tags ker δ and δ⁻¹Mᵢ.
pub fn universe_free(m: &TaggedModule, opts: &FreeLikeOptions) -> Result<StepOne, ReductionError> {
    let module = &m.module;
    check_ring(module.ring())?;
    let n = module.ring().size() as u64;
    let c = module.size();
    if opts.omega == 0 {
        return Err(ReductionError::Input("omega must be at least 1".into()));
    }
    let e_rank = c.checked_mul(opts.omega).unwrap_or(usize::MAX);
    GuardError::check("free-like e rank", e_rank as u128, opts.max_rank as u128)?;
    let e = |a: usize, j: usize| a + c * j;
    let mut kernel: Vec<Row> = Vec::new();
    for a in module.elements() {
        for b in module.elements() {
            if a <= b {
                let mut v = vec![0; e_rank];
                v[e(a, 0)] += 1;
                v[e(b, 0)] += 1;
                v[e(module.add(a, b), 0)] -= 1;
                kernel.push(v);
            }
        }
        for j in 1..opts.omega {
            let mut v = unit(e_rank, e(a, j));
            v[e(a, 0)] -= 1;
            kernel.push(v);
        }
    }
    let mut tags = vec![span(opts.scalars, n, e_rank, &kernel)?];
    for t in &m.tags {
        let mut gens = kernel.clone();
        gens.extend(t.iter().map(|&a| unit(e_rank, e(a, 0))));
        tags.push(span(opts.scalars, n, e_rank, &gens)?);
    }
    Ok(StepOne { e_rank, tags })
}

/// Both steps. Each Tₙ gets one d per canonical row; d ↦ row is εₙ, Uₙ is the span of the d's
/// and Vₙ = {b − εₙ(b) : b ∈ Uₙ}.
pub fn freelike_normalize(m: &TaggedModule, opts: &FreeLikeOptions) -> Result<FreeLikeTagged, ReductionError> {
    let step = universe_free(m, opts)?;
    let n = m.module.ring().size() as u64;
    let e_rank = step.e_rank;
    let mut blocks = Vec::new();
    let mut start = e_rank;
    for t in &step.tags {
        blocks.push((start, start + t.len()));
        start += t.len();
    }
    let rank = start;
    GuardError::check("free-like rank", rank as u128, opts.max_rank as u128)?;
    let modulus = match opts.scalars {
        Scalars::Residues => n,
        Scalars::Integers => 0,
    };
    let mut tags = vec![Lattice::coordinates(modulus, rank, 0..e_rank)];
    for (t, &(lo, hi)) in step.tags.iter().zip(&blocks) {
        tags.push(Lattice::coordinates(modulus, rank, lo..hi));
        let gens: Vec<Row> = t
            .rows()
            .iter()
            .enumerate()
            .map(|(j, row)| {
                let mut v: Row = row.iter().map(|&x| -x).collect();
                v.resize(rank, 0);
                v[lo + j] = 1;
                v
            })
            .collect();
        tags.push(Lattice::span(modulus, rank, &gens)?);
    }
    Ok(FreeLikeTagged {
        scalars: opts.scalars,
        rank,
        tags,
        handles: Handles { ring_order: n, carrier: m.module.size(), omega: opts.omega, e_rank, blocks },
    })
}

fn decode(msg: impl Into<String>) -> ReductionError {
    ReductionError::Decode(msg.into())
}

/// εₙ read back from Uₙ and Vₙ: for each d, the unique c ∈ U_* with d − c ∈ Vₙ.
fn recover_epsilon(f: &FreeLikeTagged, v: &Lattice, lo: usize, hi: usize) -> Result<Vec<Row>, ReductionError> {
    let (rank, e_rank) = (f.rank, f.handles.e_rank);
    let tail = rank - e_rank;
    let perm: Vec<usize> = (e_rank..rank).chain(0..e_rank).collect();
    let vp = v.permuted(&perm)?;
    if vp.pivots().iter().any(|&(c, _)| c >= tail) {
        return Err(decode("the recovered graph is not a function: Vₙ meets U_*"));
    }
    let mut out = Vec::new();
    for d in lo..hi {
        let b = unit(rank, d);
        let bp: Row = perm.iter().map(|&j| b[j]).collect();
        let r = vp.reduce_prefix(&bp, tail)?;
        if r[..tail].iter().any(|&x| x != 0) {
            return Err(decode(format!("coordinate {d} has no image under ε: the graph is not total")));
        }
        out.push(r[tail..].to_vec());
    }
    Ok(out)
}

/// Inverse of freelike_normalize: each Tₙ is the image of the recovered εₙ, M is U_*/T₀ with
/// the coset of e_{a,0} numbered a, and the tags are Tₙ/T₀.
pub fn freelike_recover(f: &FreeLikeTagged) -> Result<TaggedModule, ReductionError> {
    let h = &f.handles;
    let modulus = match f.scalars {
        Scalars::Residues => h.ring_order,
        Scalars::Integers => 0,
    };
    if h.ring_order < 2 || h.blocks.is_empty() || f.tags.len() != 1 + 2 * h.blocks.len() {
        return Err(decode("tag list does not have the shape [U_*, U₀, V₀, …]"));
    }
    if h.e_rank != h.carrier * h.omega || f.tags.iter().any(|t| t.dim != f.rank || t.modulus != modulus) {
        return Err(decode("tags and handles disagree on rank or scalars"));
    }
    if f.tags[0] != Lattice::coordinates(modulus, f.rank, 0..h.e_rank) {
        return Err(decode("U_* is not the span of the e coordinates"));
    }
    let mut expect = h.e_rank;
    let mut images = Vec::new();
    for (i, &(lo, hi)) in h.blocks.iter().enumerate() {
        if lo != expect || hi < lo || hi > f.rank || f.tags[1 + 2 * i] != Lattice::coordinates(modulus, f.rank, lo..hi) {
            return Err(decode(format!("U_{i} is not the span of its block of d coordinates")));
        }
        expect = hi;
        let cs = recover_epsilon(f, &f.tags[2 + 2 * i], lo, hi)?;
        images.push(match f.scalars {
            Scalars::Residues => Lattice::span(modulus, h.e_rank, &cs)?,
            Scalars::Integers => Lattice::span(0, h.e_rank, &cs)?,
        });
    }
    if expect != f.rank {
        return Err(decode("blocks do not cover the rank"));
    }
    let t0 = &images[0];
    if t0.index() != Some(h.carrier as u128) {
        return Err(decode(format!("U_*/T₀ has {:?} elements, expected {}", t0.index(), h.carrier)));
    }
    let keys: Vec<Row> = (0..h.carrier).map(|a| t0.reduce(&unit(h.e_rank, a))).collect::<Result<_, _>>()?;
    let back: BTreeMap<&Row, usize> = keys.iter().enumerate().map(|(a, k)| (k, a)).collect();
    if back.len() != h.carrier {
        return Err(decode("the e_{a,0} do not represent distinct cosets of T₀"));
    }
    let n = h.ring_order as i128;
    let lookup = |v: Row| -> usize { back.get(&t0.reduce(&v).expect("shape")).copied().unwrap_or(usize::MAX) };
    let add = |a: usize, b: usize| lookup(keys[a].iter().zip(&keys[b]).map(|(x, y)| x + y).collect());
    let act = |r: usize, a: usize| lookup(keys[a].iter().map(|x| x * (r as i128 % n)).collect());
    let ring = FiniteRing::zmod(h.ring_order as usize);
    let add_table: Vec<usize> = (0..h.carrier * h.carrier).map(|i| add(i % h.carrier, i / h.carrier)).collect();
    if add_table.contains(&usize::MAX) {
        return Err(decode("sums leave the recovered carrier"));
    }
    let module = FiniteModule::from_fns(&ring, h.carrier, |a, b| add_table[a + h.carrier * b], act, lookup(vec![0; h.e_rank]))
        .map_err(|e| decode(format!("recovered module: {e}")))?;
    let mut tags = Vec::new();
    for t in &images[1..] {
        if !t0.is_subset(t)? {
            return Err(decode("a recovered tag does not contain T₀"));
        }
        let mut set = Vec::new();
        for a in 0..h.carrier {
            if t.contains(&keys[a])? {
                set.push(a);
            }
        }
        tags.push(set);
    }
    TaggedModule::new(module, tags).map_err(|e| decode(format!("recovered tags: {e}")))
}

/// A tag L is a summand with free complement when, in some coordinate order, its canonical
/// rows all have pivot 1: those rows together with the unit vectors off the pivot columns form
/// a basis. The natural order and its reverse are tried; the basis is returned in the original
/// coordinates.
fn free_summand_split(l: &Lattice) -> Result<Option<Vec<Row>>, ReductionError> {
    let dim = l.dim;
    for perm in [(0..dim).collect::<Vec<_>>(), (0..dim).rev().collect()] {
        let lp = l.permuted(&perm)?;
        let piv = lp.pivots();
        if piv.iter().any(|&(_, p)| p != 1) {
            continue;
        }
        let cols: Vec<usize> = piv.iter().map(|&(c, _)| c).collect();
        let mut basis: Vec<Row> = lp.rows().to_vec();
        basis.extend((0..dim).filter(|c| !cols.contains(c)).map(|c| unit(dim, c)));
        let back: Vec<Row> = basis
            .iter()
            .map(|r| {
                let mut v = vec![0; dim];
                for (i, &j) in perm.iter().enumerate() {
                    v[j] = r[i];
                }
                v
            })
            .collect();
        if is_basis(l.modulus, dim, &back)? {
            return Ok(Some(back));
        }
    }
    Ok(None)
}

/// Over ℤ this is exact: the independent canonical rows A extend to a basis iff the columns
/// of A span ℤ^rank. Over ℤ/n the coordinate-order split is used.
pub fn is_free_summand(l: &Lattice) -> Result<bool, ReductionError> {
    if l.modulus == 0 {
        let r = l.len();
        let cols: Vec<Row> = (0..l.dim).map(|c| l.rows().iter().map(|row| row[c]).collect()).collect();
        return Ok(Lattice::span(0, r, &cols)? == Lattice::full(0, r));
    }
    Ok(free_summand_split(l)?.is_some())
}

/// Every tag checked to be a free summand with free quotient by an explicit basis split.
pub fn verify_freelike(f: &FreeLikeTagged) -> Result<bool, ReductionError> {
    for t in &f.tags {
        if !is_free_summand(t)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The splitting M = N ⊕ M₁ for M = M₀ ⊕ M₁ free and h: M₀ → M₁, with N = {a − h(a)}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub n_basis: Vec<Row>,
    /// Images of the unit vectors under f*(a + b) = a − h(a) + b.
    pub f_star: Vec<Row>,
}

/// M₀ is the first m0 coordinates, M₁ the next m1; h[i] is h(eᵢ) in M₁-coordinates.
pub fn lemma_split(modulus: u64, m0: usize, m1: usize, h: &[Row]) -> Result<Split, ReductionError> {
    if h.len() != m0 || h.iter().any(|r| r.len() != m1) {
        return Err(ReductionError::Input("h must be an m0 × m1 matrix".into()));
    }
    let dim = m0 + m1;
    let n_basis: Vec<Row> = h
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = unit(dim, i);
            for (k, &x) in r.iter().enumerate() {
                v[m0 + k] = -x;
            }
            v
        })
        .collect();
    let mut f_star = n_basis.clone();
    f_star.extend((m0..dim).map(|c| unit(dim, c)));
    if !is_basis(modulus, dim, &f_star)? {
        return Err(ReductionError::Precondition("f* is not invertible".into()));
    }
    Ok(Split { n_basis, f_star })
}
