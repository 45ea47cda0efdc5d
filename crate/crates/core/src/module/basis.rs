use super::{FiniteModule, ModuleError, TaggedModule};
use crate::error::GuardError;
use crate::ring::{is_ideal, quotient_ring, Elem, Ideal};

pub const DEFAULT_TUPLE_GUARD: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Independence {
    Independent,
    /// A coefficient tuple on which "Σ rᵢxᵢ = 0 iff every rᵢ ∈ I" fails.
    Violation(Vec<Elem>),
}

pub fn is_i_independent(m: &FiniteModule, ideal: &Ideal, xs: &[Elem]) -> Result<Independence, ModuleError> {
    is_i_independent_with_guard(m, ideal, xs, DEFAULT_TUPLE_GUARD)
}

/// Full enumeration of the |R|^|X| coefficient tuples.
pub fn is_i_independent_with_guard(
    m: &FiniteModule,
    ideal: &Ideal,
    xs: &[Elem],
    guard: u128,
) -> Result<Independence, ModuleError> {
    let q = m.ring().size() as u128;
    let tuples = q.checked_pow(xs.len() as u32).unwrap_or(u128::MAX);
    GuardError::check("I-independence tuples", tuples, guard)?;
    let r = m.ring();
    let mut coeffs = vec![r.zero(); xs.len()];
    loop {
        let sum = coeffs
            .iter()
            .zip(xs)
            .fold(m.zero(), |acc, (&c, &x)| m.add(acc, m.act(c, x)));
        let all_in_i = coeffs.iter().all(|&c| ideal.contains(c));
        if (sum == m.zero()) != all_in_i {
            return Ok(Independence::Violation(coeffs));
        }
        // odometer
        let mut i = 0;
        loop {
            if i == coeffs.len() {
                return Ok(Independence::Independent);
            }
            coeffs[i] += 1;
            if coeffs[i] < r.size() {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}

/// Δ(V): elements whose annihilator is exactly I.
pub fn delta_set(m: &FiniteModule, ideal: &Ideal) -> Vec<Elem> {
    m.elements().filter(|&a| &m.annihilator(a) == ideal).collect()
}

/// R*Y = { ry : r ∈ R, y ∈ Y, ry ≠ 0 }, sorted.
pub fn r_star(m: &FiniteModule, ys: &[Elem]) -> Vec<Elem> {
    let mut out: Vec<Elem> = ys
        .iter()
        .flat_map(|&y| m.ring().elements().map(move |r| m.act(r, y)))
        .filter(|&a| a != m.zero())
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Partition of S by equality of cyclic submodules Ra; blocks in order of first element.
pub fn sim_classes(m: &FiniteModule, set: &[Elem]) -> Vec<Vec<Elem>> {
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut blocks: Vec<(Vec<Elem>, Vec<Elem>)> = Vec::new();
    for a in sorted {
        let span = m.cyclic(a);
        match blocks.iter_mut().find(|(s, _)| *s == span) {
            Some((_, b)) => b.push(a),
            None => blocks.push((span, vec![a])),
        }
    }
    blocks.into_iter().map(|(_, b)| b).collect()
}

fn check_phi0(v: &TaggedModule, xs: &[Elem], ideal: &Ideal) -> Result<(), ModuleError> {
    let m = &v.module;
    let r = m.ring();
    if !is_ideal(r, ideal.elements()) {
        return Err(ModuleError::Phi0("I is not an ideal".into()));
    }
    let (q, _) = quotient_ring(r, ideal)?;
    if !q.is_field() {
        return Err(ModuleError::Phi0("I is not maximal".into()));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != xs.len() || xs.iter().any(|&x| x >= m.size()) {
        return Err(ModuleError::Phi0("X has repeats or out-of-range elements".into()));
    }
    if let Independence::Violation(c) = is_i_independent(m, ideal, xs)? {
        return Err(ModuleError::Phi0(format!("X is not I-independent, coefficients {c:?}")));
    }
    if m.submodule_generated(xs).len() != m.size() {
        return Err(ModuleError::Phi0("X does not span V".into()));
    }
    if let Some(i) = v.tags.iter().position(|t| !m.is_submodule(t)) {
        return Err(ModuleError::Phi0(format!("tag {i} is not a submodule")));
    }
    Ok(())
}

/// Evaluates "a ∈ R*X iff a lies in no tag" over Δ(V).
///
/// Also computes R*X and R*(Δ(V) ∖ ⋃ tags) separately; when the biconditional holds the two
/// must coincide, and a disagreement is reported as an error.
pub fn check_phi1(v: &TaggedModule, xs: &[Elem], ideal: &Ideal) -> Result<bool, ModuleError> {
    check_phi0(v, xs, ideal)?;
    let m = &v.module;
    let in_tag = v.union_of_tags();
    let rx = r_star(m, xs);
    let mut in_rx = vec![false; m.size()];
    for &a in &rx {
        in_rx[a] = true;
    }
    let delta = delta_set(m, ideal);
    let holds = delta.iter().all(|&a| in_rx[a] != in_tag[a]);

    let outside: Vec<Elem> = delta.iter().copied().filter(|&a| !in_tag[a]).collect();
    if holds && r_star(m, &outside) != rx {
        return Err(ModuleError::Inconsistent("R*X differs from R*(Δ ∖ ⋃ tags)".into()));
    }
    Ok(holds)
}
