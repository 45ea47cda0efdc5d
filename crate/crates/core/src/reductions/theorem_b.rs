use serde::{Deserialize, Serialize};

use super::{pullback_module, EndoStructure, ReductionError};
use crate::error::GuardError;
use crate::module::FiniteModule;
use crate::ring::{annihilator, ideal_generated, quotient_ring, Elem, FiniteRing, Ideal};

/// I = Ann(x) + Ann(y) and S = R/I with its projection, after checking (x) ∩ (y) = 0 and 1 ∉ I.
pub fn theorem_b_residue(ring: &FiniteRing, x: Elem, y: Elem) -> Result<(Ideal, FiniteRing, Vec<Elem>), ReductionError> {
    if x >= ring.size() || y >= ring.size() {
        return Err(ReductionError::Input("x or y is not a ring element".into()));
    }
    if !ideal_generated(ring, &[x]).intersection(&ideal_generated(ring, &[y])).is_zero() {
        return Err(ReductionError::Precondition("condition (1) fails: (x) ∩ (y) ≠ 0".into()));
    }
    let i = annihilator(ring, &[x]).sum(ring, &annihilator(ring, &[y]));
    if i.contains(ring.one()) {
        return Err(ReductionError::Precondition("condition (2) fails: 1 ∈ Ann(x) + Ann(y)".into()));
    }
    assert_eq!(ring.mul(x, y), ring.zero(), "xy = 0 follows from (x) ∩ (y) = 0");
    assert!(i.contains(x) && i.contains(y), "x and y lie in Ann(x) + Ann(y)");
    let (s, proj) = quotient_ring(ring, &i)?;
    Ok((i, s, proj))
}

/// M(V,T) with the data needed to check it: π(v) is the class of (v, 0).
#[derive(Debug, Clone)]
pub struct CodedB {
    pub module: FiniteModule,
    pub pi: Vec<Elem>,
    /// |W| before the quotient.
    pub w_size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub pi_injective: bool,
    pub image_is_x_m: bool,
    pub graph_formula: bool,
}

impl ClaimReport {
    pub fn passed(&self) -> bool {
        self.pi_injective && self.image_is_x_m && self.graph_formula
    }
}

/// W = V ⊕ ⊕_V R, J generated by x·e_v − v and y·e_v − T(v), output W/J. W is stored implicitly:
/// (v, c) has index v + |V|·Σ c_u |R|^u.
pub fn theorem_b_code(ring: &FiniteRing, x: Elem, y: Elem, s: &EndoStructure, max_w: usize) -> Result<CodedB, ReductionError> {
    let (ideal, q, _) = theorem_b_residue(ring, x, y)?;
    if s.module.ring() != &q {
        return Err(ReductionError::Input("V is not a module over R/(Ann(x) + Ann(y))".into()));
    }
    let v = pullback_module(ring, &ideal, &s.module)?;
    let (nv, nr) = (v.size(), ring.size());
    let w_size = nr.checked_pow(nv as u32).and_then(|p| p.checked_mul(nv)).unwrap_or(usize::MAX);
    GuardError::check("|W| = |V|·|R|^|V|", w_size as u128, max_w as u128)?;
    let pow: Vec<usize> = (0..nv).map(|u| nr.pow(u as u32)).collect();
    let coeff = |w: usize, u: usize| (w / nv) / pow[u] % nr;
    let join = |vv: usize, cs: &dyn Fn(usize) -> usize| vv + nv * (0..nv).map(|u| cs(u) * pow[u]).sum::<usize>();
    let add = |a: usize, b: usize| join(v.add(a % nv, b % nv), &|u| ring.add(coeff(a, u), coeff(b, u)));
    let act = |r: Elem, a: usize| join(v.act(r, a % nv), &|u| ring.mul(r, coeff(a, u)));
    let basis_times = |r: Elem, u: usize, minus: Elem| join(v.neg(minus), &|k| if k == u { r } else { ring.zero() });
    let gens: Vec<usize> = (0..nv).flat_map(|u| [basis_times(x, u, u), basis_times(y, u, s.t[u])]).collect();

    // J by closure under adding r·g
    let mut in_j = vec![false; w_size];
    let zero = join(v.zero(), &|_| ring.zero());
    in_j[zero] = true;
    let mut j = vec![zero];
    let mut k = 0;
    while k < j.len() {
        let a = j[k];
        k += 1;
        for &g in &gens {
            for r in ring.elements() {
                let b = add(a, act(r, g));
                if !in_j[b] {
                    in_j[b] = true;
                    j.push(b);
                }
            }
        }
    }
    let mut label = vec![usize::MAX; w_size];
    let mut reps = Vec::new();
    for w in 0..w_size {
        if label[w] == usize::MAX {
            for &i in &j {
                label[add(w, i)] = reps.len();
            }
            reps.push(w);
        }
    }
    // a quotient of a module by a submodule needs no axiom re-check
    let module = FiniteModule::from_fns_trusted(ring, reps.len(), |a, b| label[add(reps[a], reps[b])], |r, a| label[act(r, reps[a])], label[zero]);
    let pi = (0..nv).map(|u| label[join(u, &|_| ring.zero())]).collect();
    Ok(CodedB { module, pi, w_size })
}

/// π injective, π[V] = xM, and T(v) = w iff some c has xc = π(v) and yc = π(w).
pub fn verify_claims(coded: &CodedB, x: Elem, y: Elem, s: &EndoStructure) -> ClaimReport {
    let m = &coded.module;
    let mut image = coded.pi.clone();
    image.sort_unstable();
    image.dedup();
    let pi_injective = image.len() == coded.pi.len();
    let mut xm: Vec<Elem> = m.elements().map(|c| m.act(x, c)).collect();
    xm.sort_unstable();
    xm.dedup();
    let image_is_x_m = image == xm;
    let pairs: std::collections::BTreeSet<(Elem, Elem)> = m.elements().map(|c| (m.act(x, c), m.act(y, c))).collect();
    let graph_formula = s.module.elements().all(|v| {
        s.module.elements().all(|w| pairs.contains(&(coded.pi[v], coded.pi[w])) == (s.t[v] == w))
    });
    ClaimReport { pi_injective, image_is_x_m, graph_formula }
}

/// V = xM as an R/I-module and T(a) = the unique b ∈ xM with xc = a and yc = b for some c.
pub fn theorem_b_decode(ring: &FiniteRing, x: Elem, y: Elem, m: &FiniteModule) -> Result<EndoStructure, ReductionError> {
    let (_, q, proj) = theorem_b_residue(ring, x, y)?;
    if m.ring() != ring {
        return Err(ReductionError::Input("module is not over R".into()));
    }
    let mut xm: Vec<Elem> = m.elements().map(|c| m.act(x, c)).collect();
    xm.sort_unstable();
    xm.dedup();
    let pos = |a: Elem| xm.binary_search(&a).ok();
    let mut t = vec![None; xm.len()];
    for c in m.elements() {
        let a = pos(m.act(x, c)).expect("xc lies in xM");
        let b = pos(m.act(y, c)).ok_or_else(|| {
            ReductionError::Decode(format!("the relation is not total on xM: y·c leaves xM for c = {c}"))
        })?;
        match t[a] {
            None => t[a] = Some(b),
            Some(b0) if b0 != b => {
                return Err(ReductionError::Decode(format!("the relation is not a function: element {} has two images", xm[a])));
            }
            _ => {}
        }
    }
    let t: Vec<Elem> = t.into_iter().map(|b| b.expect("every a ∈ xM is some xc")).collect();
    let lift: Vec<Elem> = q.elements().map(|sv| proj.iter().position(|&p| p == sv).unwrap()).collect();
    for r in ring.elements() {
        for &a in &xm {
            if m.act(r, a) != m.act(lift[proj[r]], a) {
                return Err(ReductionError::Decode("Ann(x) + Ann(y) does not kill xM".into()));
            }
        }
    }
    let v = FiniteModule::from_fns(
        &q,
        xm.len(),
        |a, b| pos(m.add(xm[a], xm[b])).unwrap(),
        |sv, a| pos(m.act(lift[sv], xm[a])).unwrap(),
        pos(m.zero()).unwrap(),
    )
    .map_err(|e| ReductionError::Decode(format!("xM: {e}")))?;
    EndoStructure::new(v, t).map_err(|e| ReductionError::Decode(format!("decoded T: {e}")))
}
