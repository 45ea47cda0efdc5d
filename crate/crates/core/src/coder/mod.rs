//! Coding graphs into tagged modules: the doubled engine N built from amalgam stages, the coder
//! G ↦ (N, U_G), the invariant-chasing decoder, and lifting of graph isomorphisms.

mod graph;

pub use graph::Graph;

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amalgam::{lift_permutation, AmalgamError, BigOptions, EqStructure, KModel, Label, LimitChain, Name, SuitableClass, TaggedClass};
use crate::error::{Failure, FailureKind, GuardError};
use crate::linear::{Subspace, Vector};
use crate::module::{delta_set, r_star, sim_classes, verify_isomorphism, ModuleError, ModuleFile, TaggedModule};
use crate::ring::{Elem, FiniteRing, RingError, RingTables};

#[derive(Debug, Error)]
pub enum CoderError {
    #[error("input: {0}")]
    Input(String),
    #[error("size: {0}")]
    Size(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("decode failed at {stage}: {msg}")]
    Decode { stage: &'static str, msg: String },
    #[error(transparent)]
    Amalgam(#[from] AmalgamError),
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Guard(#[from] GuardError),
}

impl Failure for CoderError {
    fn kind(&self) -> FailureKind {
        match self {
            CoderError::Input(_) | CoderError::Ring(_) => FailureKind::Input,
            CoderError::Size(_) | CoderError::Guard(_) => FailureKind::Guard,
            CoderError::Decode { .. } => FailureKind::Decode,
            CoderError::Precondition(_) => FailureKind::Precondition,
            CoderError::Amalgam(e) => e.kind(),
            CoderError::Module(e) => e.kind(),
        }
    }
}

fn decode_err(stage: &'static str, msg: impl Into<String>) -> CoderError {
    CoderError::Decode { stage, msg: msg.into() }
}

/// Which tag indices of a coded module play which role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeContext {
    pub first_sort: usize,
    pub second_sort: usize,
    pub first_sort_tags: Vec<usize>,
    pub second_sort_tags: Vec<usize>,
    pub rq: usize,
    pub rt: usize,
    pub ug: usize,
    pub vertices: usize,
    pub ideal: Vec<Elem>,
    pub stage_depth: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodedModule {
    pub context: DecodeContext,
    pub module: ModuleFile,
}

/// Serialized engine recipe: the chain and which stages feed the two sorts. V₁ may be a chain
/// stage grown a few more times without certificates, in which case isomorphisms cannot be
/// lifted through it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EngineFile {
    pub ring: RingTables,
    pub ideal: Vec<Elem>,
    pub chain: LimitChain<KModel>,
    pub v0_stage: usize,
    pub v1_stage: usize,
    pub v1_grows: usize,
}

pub struct EngineN {
    pub class: TaggedClass,
    pub recipe: EngineFile,
    pub v0: EqStructure<KModel>,
    pub v1: EqStructure<KModel>,
    /// Offset added to V₁ names inside the doubled model.
    pub offset: Name,
    /// V × V with tags V×0, 0×V, V₀-tags×0, 0×V₁-tags, RQ, RT.
    pub doubled: KModel,
    /// E₀- and E₁-classes (doubled names) in label order.
    pub e0: Vec<Vec<Name>>,
    pub e1: Vec<Vec<Name>>,
    /// k₀: unordered pair of X₀ names ↦ index into `e1`.
    pub k0: BTreeMap<(Name, Name), usize>,
    pub context: DecodeContext,
}

fn relabel_classes(eq: &EqStructure<KModel>, shift: Name) -> Vec<Vec<Name>> {
    eq.classes().into_values().map(|c| c.into_iter().map(|x| x + shift).collect()).collect()
}

impl EngineN {
    pub fn from_file(recipe: EngineFile) -> Result<EngineN, CoderError> {
        let ring = FiniteRing::from_tables(&recipe.ring)?;
        let ideal = crate::ring::ideal_generated(&ring, &recipe.ideal);
        if ideal.elements() != recipe.ideal.as_slice() {
            return Err(CoderError::Input("ideal list is not an ideal".into()));
        }
        let class = TaggedClass::new(ring, ideal)?;
        let n = recipe.chain.stages.len();
        if recipe.v0_stage >= n || recipe.v1_stage >= n {
            return Err(CoderError::Input(format!("stage index beyond chain of {n} stages")));
        }
        let v0 = recipe.chain.stages[recipe.v0_stage].clone();
        let mut v1 = recipe.chain.stages[recipe.v1_stage].clone();
        for _ in 0..recipe.v1_grows {
            let fresh = v1.labels.keys().next_back().map_or(0, |&m| m + 1);
            let label = v1.labels.values().max().map_or(0, |&m| m + 1);
            v1.base = class.grow(&v1.base, fresh)?;
            v1.labels.insert(fresh, label);
        }
        let offset = v0.labels.keys().next_back().map_or(0, |&m| m + 1);
        let e0 = relabel_classes(&v0, 0);
        let e1 = relabel_classes(&v1, offset);
        let x0: Vec<Name> = v0.base.basis.clone();
        let pairs: Vec<(Name, Name)> = x0.iter().copied().tuple_combinations().collect();
        if pairs.len() > e1.len() {
            return Err(CoderError::Size(format!(
                "{} pairs of X₀ but only {} E₁-classes; grow the second sort by {} more classes",
                pairs.len(),
                e1.len(),
                pairs.len() - e1.len()
            )));
        }
        let k0: BTreeMap<(Name, Name), usize> = pairs.iter().copied().zip(0..).collect();

        let k = &class.field;
        let (d0, d1) = (v0.base.dim(), v1.base.dim());
        let d = d0 + d1;
        let basis: Vec<Name> = v0.base.basis.iter().copied().chain(v1.base.basis.iter().map(|x| x + offset)).collect();
        let first: Vec<usize> = (0..d0).collect();
        let second: Vec<usize> = (d0..d).collect();
        let mut tags = vec![
            Subspace::coordinates(k, d, &(0..d).map(|i| i < d0).collect::<Vec<_>>()),
            Subspace::coordinates(k, d, &(0..d).map(|i| i >= d0).collect::<Vec<_>>()),
        ];
        tags.extend(v0.base.tags.iter().map(|t| t.embed(k, d, &first)));
        tags.extend(v1.base.tags.iter().map(|t| t.embed(k, d, &second)));
        let pos = |x: Name| basis.iter().position(|&b| b == x).unwrap();

        // T and Q from the displayed definitions
        let mut t_gens: Vec<Vector> = Vec::new();
        let mut q_gens: Vec<Vector> = Vec::new();
        let e0_of: BTreeMap<Name, usize> = e0.iter().enumerate().flat_map(|(i, c)| c.iter().map(move |&x| (x, i))).collect();
        for (&(x, y), &c) in &k0 {
            for &z in &e1[c] {
                for s in 1..k.order() as u8 {
                    let mut v = vec![0u8; d];
                    v[pos(x)] = 1;
                    v[pos(y)] = 1;
                    v[pos(z)] = s;
                    t_gens.push(v);
                }
                if e0_of[&x] == e0_of[&y] {
                    q_gens.push(k.unit(pos(z), d));
                }
            }
        }
        let rq = tags.len();
        tags.push(Subspace::span(k, d, &q_gens));
        let rt = tags.len();
        tags.push(Subspace::span(k, d, &t_gens));
        let context = DecodeContext {
            first_sort: 0,
            second_sort: 1,
            first_sort_tags: (2..2 + v0.base.tags.len()).collect(),
            second_sort_tags: (2 + v0.base.tags.len()..rq).collect(),
            rq,
            rt,
            ug: rt + 1,
            vertices: 0,
            ideal: class.ideal.elements().to_vec(),
            stage_depth: recipe.v0_stage.max(recipe.v1_stage) + recipe.v1_grows,
        };
        Ok(EngineN { class, v0, v1, offset, doubled: KModel { basis, tags }, e0, e1, k0, context, recipe })
    }

    /// The F₂ engine with `classes` vertex classes: a chain of length 4, the first sort at stage
    /// `classes`, the second sort grown until it has a class per pair.
    pub fn standard(classes: usize) -> Result<EngineN, CoderError> {
        let class = TaggedClass::prime_field(2);
        let chain = crate::amalgam::build_chain(&class, 4, BigOptions::default())?;
        EngineN::from_chain(&class, chain, classes)
    }

    pub fn from_chain(class: &TaggedClass, chain: LimitChain<KModel>, classes: usize) -> Result<EngineN, CoderError> {
        let depth = chain.stages.len() - 1;
        if classes > depth {
            return Err(CoderError::Size(format!("{classes} classes need a chain of length {classes}, have {depth}")));
        }
        let stage = &chain.stages[classes];
        let d = stage.base.dim();
        let v1_grows = (d * d.saturating_sub(1) / 2).saturating_sub(stage.class_labels().len());
        EngineN::from_file(EngineFile {
            ring: class.ring.tables(),
            ideal: class.ideal.elements().to_vec(),
            chain,
            v0_stage: classes,
            v1_stage: classes,
            v1_grows,
        })
    }

    pub fn x0(&self) -> &[Name] {
        &self.v0.base.basis
    }

    /// k₀ on an unordered pair of X₀ names, as an index into `e1`.
    pub fn pair_class(&self, x: Name, y: Name) -> Option<usize> {
        self.k0.get(&(x.min(y), x.max(y))).copied()
    }

    pub fn vertex_classes(&self) -> usize {
        self.e0.len()
    }

    fn pos(&self, x: Name) -> usize {
        self.doubled.position(x).expect("name in the doubled basis")
    }

    /// Q_G: second-sort basis vectors coding a pair that lies over an edge of G.
    pub fn q_of(&self, g: &Graph) -> Result<Vec<Name>, CoderError> {
        if g.n > self.e0.len() {
            return Err(CoderError::Size(format!("{} vertices but only {} E₀-classes", g.n, self.e0.len())));
        }
        let vertex: BTreeMap<Name, usize> = self.e0.iter().enumerate().flat_map(|(i, c)| c.iter().map(move |&x| (x, i))).collect();
        let mut q = BTreeSet::new();
        for (&(x, y), &c) in &self.k0 {
            let (u, v) = (vertex[&x], vertex[&y]);
            if u < g.n && v < g.n && g.has_edge(u, v) {
                q.extend(self.e1[c].iter().copied());
            }
        }
        Ok(q.into_iter().collect())
    }

    pub fn code_model(&self, g: &Graph) -> Result<KModel, CoderError> {
        let k = &self.class.field;
        let d = self.doubled.dim();
        let gens: Vec<Vector> = self.q_of(g)?.into_iter().map(|z| k.unit(self.pos(z), d)).collect();
        let mut m = self.doubled.clone();
        m.tags.push(Subspace::span(k, d, &gens));
        Ok(m)
    }

    pub fn code_graph(&self, g: &Graph) -> Result<TaggedModule, CoderError> {
        let m = self.code_model(g)?;
        Ok(self.class.to_tagged_module(&m)?)
    }

    pub fn context_for(&self, g: &Graph) -> DecodeContext {
        DecodeContext { vertices: g.n, ..self.context.clone() }
    }

    pub fn code_graph_file(&self, g: &Graph) -> Result<CodedModule, CoderError> {
        let t = self.code_graph(g)?;
        Ok(CodedModule { context: self.context_for(g), module: t.to_file() })
    }

    /// Lift a graph isomorphism h: G → G' to an isomorphism (N, U_G) → (N, U_G') of the explicit
    /// modules, as a carrier index map.
    pub fn lift_graph_iso(&self, g: &Graph, g2: &Graph, h: &[usize]) -> Result<Vec<Elem>, CoderError> {
        if !g.is_isomorphism(g2, h) {
            return Err(CoderError::Precondition("h is not a graph isomorphism".into()));
        }
        if g.n > self.e0.len() {
            return Err(CoderError::Size(format!("{} vertices but only {} E₀-classes", g.n, self.e0.len())));
        }
        if self.recipe.v1_grows > 0 {
            return Err(AmalgamError::Budget("the second sort was grown past the chain; no certificates to lift through".into()).into());
        }
        let labels0 = self.v0.class_labels();
        let h0: BTreeMap<Label, Label> =
            labels0.iter().enumerate().map(|(i, &l)| (l, if i < g.n { labels0[h[i]] } else { l })).collect();
        let sigma0 = lift_permutation(&self.class, &self.recipe.chain, self.recipe.v0_stage, &h0)?;
        let labels1 = self.v1.class_labels();
        let mut h1: BTreeMap<Label, Label> = labels1.iter().map(|&l| (l, l)).collect();
        for (&(x, y), &c) in &self.k0 {
            let (a, b) = (sigma0[&x], sigma0[&y]);
            let c2 = self.k0[&(a.min(b), a.max(b))];
            h1.insert(labels1[c], labels1[c2]);
        }
        let sigma1 = lift_permutation(&self.class, &self.recipe.chain, self.recipe.v1_stage, &h1)?;
        let mut sigma: BTreeMap<Name, Name> = sigma0.clone();
        sigma.extend(sigma1.iter().map(|(&x, &y)| (x + self.offset, y + self.offset)));
        let k = &self.class.field;
        let d = self.doubled.dim();
        let target: Vec<usize> = self.doubled.basis.iter().map(|x| self.pos(sigma[x])).collect();
        let f: Vec<Elem> = (0..k.order().pow(d as u32))
            .map(|i| {
                let v = k.vector(i, d);
                let mut w = vec![0u8; d];
                for (j, &t) in target.iter().enumerate() {
                    w[t] = v[j];
                }
                k.index(&w)
            })
            .collect();
        let (a, b) = (self.code_graph(g)?, self.code_graph(g2)?);
        if !verify_isomorphism(&a, &b, &f) {
            return Err(AmalgamError::Contract("lifted map fails verification".into()).into());
        }
        Ok(f)
    }
}

/// Every intermediate set computed by the decoder, for inspection and invariance tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeTrace {
    pub rx0: Vec<Elem>,
    pub rx1: Vec<Elem>,
    pub sim0: Vec<Vec<Elem>>,
    pub sim1: Vec<Vec<Elem>>,
    pub rt_star: Vec<Elem>,
    /// (i, j, c) over indices into sim0, sim0, sim1.
    pub k: BTreeSet<(usize, usize, usize)>,
    /// E₁ as a partition of sim1 indices that code a pair.
    pub e1: Vec<Vec<usize>>,
    /// E₀ as a partition of sim0 indices, ordered by least element.
    pub e0: Vec<Vec<usize>>,
    pub graph: Graph,
}

pub fn recover_graph(coded: &TaggedModule, ctx: &DecodeContext) -> Result<Graph, CoderError> {
    Ok(decode_trace(coded, ctx)?.graph)
}

pub fn decode_file(file: &CodedModule) -> Result<Graph, CoderError> {
    let t = TaggedModule::from_file(&file.module)?;
    recover_graph(&t, &file.context)
}

/// The decoding pipeline: Δ of each sort, R*X₀ and R*X₁ from the sort tags, ∼-classes, R*T via
/// the projection to the second sort, K on ∼-classes, E₁ from K⁻¹ fibres, E₀ = K⁻¹(R*Q), and the
/// edges K⁻¹(U_G ∩ R*X₁).
pub fn decode_trace(coded: &TaggedModule, ctx: &DecodeContext) -> Result<DecodeTrace, CoderError> {
    let m = &coded.module;
    let r = m.ring();
    let max_tag = [ctx.first_sort, ctx.second_sort, ctx.rq, ctx.rt, ctx.ug]
        .into_iter()
        .chain(ctx.first_sort_tags.iter().copied())
        .chain(ctx.second_sort_tags.iter().copied())
        .max()
        .unwrap_or(0);
    if max_tag >= coded.tags.len() {
        return Err(decode_err("context", format!("tag {max_tag} named but only {} tags", coded.tags.len())));
    }
    let ideal = crate::ring::ideal_generated(r, &ctx.ideal);
    if ideal.elements() != ctx.ideal.as_slice() {
        return Err(decode_err("context", "ideal list is not an ideal"));
    }
    let delta = delta_set(m, &ideal);
    let mask = |set: &[Elem]| -> Vec<bool> {
        let mut v = vec![false; m.size()];
        for &a in set {
            v[a] = true;
        }
        v
    };
    let sort0 = mask(&coded.tags[ctx.first_sort]);
    let sort1 = mask(&coded.tags[ctx.second_sort]);

    // R*X_i = R*(Δ(sort_i) ∖ ⋃ sort tags)
    let rstar_basis = |sort: &[bool], tag_ids: &[usize]| -> Vec<Elem> {
        let mut covered = vec![false; m.size()];
        for &t in tag_ids {
            for &a in &coded.tags[t] {
                covered[a] = true;
            }
        }
        let outside: Vec<Elem> = delta.iter().copied().filter(|&a| sort[a] && !covered[a]).collect();
        r_star(m, &outside)
    };
    let rx0 = rstar_basis(&sort0, &ctx.first_sort_tags);
    let rx1 = rstar_basis(&sort1, &ctx.second_sort_tags);
    if rx0.is_empty() {
        return Err(decode_err("R*X₀", "first sort has no basis multiples"));
    }
    let sim0 = sim_classes(m, &rx0);
    let sim1 = sim_classes(m, &rx1);

    // projection to the second sort along the first
    let mut pi1 = vec![usize::MAX; m.size()];
    for a in m.elements().filter(|&a| sort0[a]) {
        for b in m.elements().filter(|&b| sort1[b]) {
            let w = m.add(a, b);
            if pi1[w] != usize::MAX {
                return Err(decode_err("π₁", "the two sorts intersect nontrivially"));
            }
            pi1[w] = b;
        }
    }
    if pi1.contains(&usize::MAX) {
        return Err(decode_err("π₁", "the two sorts do not span the module"));
    }
    let in_rx1 = mask(&rx1);
    let rt_star: Vec<Elem> = coded.tags[ctx.rt].iter().copied().filter(|&w| in_rx1[pi1[w]]).collect();
    let in_rt_star = mask(&rt_star);

    // K on ∼-class representatives
    let mut kset = BTreeSet::new();
    for (i, ci) in sim0.iter().enumerate() {
        for (j, cj) in sim0.iter().enumerate() {
            for (c, cc) in sim1.iter().enumerate() {
                let (a, b, z) = (ci[0], cj[0], cc[0]);
                let hit = r.elements().any(|s| {
                    let sa = m.act(s, a);
                    r.elements().any(|t| {
                        let sb = m.add(sa, m.act(t, b));
                        r.elements().any(|u| in_rt_star[m.add(sb, m.act(u, z))])
                    })
                });
                if hit {
                    kset.insert((i, j, c));
                }
            }
        }
    }

    // pair-function check and E₁ from K⁻¹ singletons
    let fibre = |c: usize| -> BTreeSet<(usize, usize)> { kset.iter().filter(|t| t.2 == c).map(|t| (t.0, t.1)).collect() };
    let fibres: Vec<BTreeSet<(usize, usize)>> = (0..sim1.len()).map(fibre).collect();
    let mut e1: BTreeMap<BTreeSet<(usize, usize)>, Vec<usize>> = BTreeMap::new();
    for (c, f) in fibres.iter().enumerate() {
        if !f.is_empty() {
            e1.entry(f.clone()).or_default().push(c);
        }
    }
    for f in e1.keys() {
        let (i, j) = *f.iter().next().unwrap();
        let want: BTreeSet<(usize, usize)> = [(i, j), (j, i)].into_iter().collect();
        if i == j || f != &want {
            return Err(decode_err("K", "K is not the graph of a function on unordered pairs of distinct ∼-classes"));
        }
    }
    for (i, j) in (0..sim0.len()).tuple_combinations() {
        if !e1.keys().any(|f| f.contains(&(i, j))) {
            return Err(decode_err("K", format!("pair ({i}, {j}) of ∼-classes has no value")));
        }
    }
    let e1_blocks: Vec<Vec<usize>> = e1.values().cloned().collect();

    // E₀ = K⁻¹(R*Q) with R*Q = RQ ∩ R*X₁
    let through = |tag: usize| -> BTreeSet<(usize, usize)> {
        let hit: BTreeSet<usize> = (0..sim1.len()).filter(|&c| coded.tags[tag].binary_search(&sim1[c][0]).is_ok()).collect();
        kset.iter().filter(|t| hit.contains(&t.2)).map(|t| (t.0, t.1)).collect()
    };
    let e0_rel = through(ctx.rq);
    let n0 = sim0.len();
    let related = |i: usize, j: usize| i == j || e0_rel.contains(&(i, j));
    for (i, j, l) in (0..n0).flat_map(|i| (0..n0).flat_map(move |j| (0..n0).map(move |l| (i, j, l)))) {
        if related(i, j) && related(j, l) && !related(i, l) {
            return Err(decode_err("E₀", "K⁻¹(R*Q) is not transitive"));
        }
    }
    let mut e0: Vec<Vec<usize>> = Vec::new();
    for i in 0..n0 {
        match e0.iter_mut().find(|b| related(b[0], i)) {
            Some(b) => b.push(i),
            None => e0.push(vec![i]),
        }
    }
    let class_of: Vec<usize> = (0..n0).map(|i| e0.iter().position(|b| b.contains(&i)).unwrap()).collect();

    // edges: K⁻¹(U_G ∩ R*X₁), which must be a union of E₀-class pairs
    let hits = through(ctx.ug);
    let mut edges = BTreeSet::new();
    for (u, v) in (0..e0.len()).tuple_combinations() {
        let cells: Vec<bool> =
            e0[u].iter().flat_map(|&i| e0[v].iter().map(move |&j| (i, j))).map(|p| hits.contains(&p)).collect();
        if cells.iter().any(|&b| b) {
            if !cells.iter().all(|&b| b) {
                return Err(decode_err("edges", "U_G does not respect E₀"));
            }
            edges.insert((u, v));
        }
    }
    if hits.iter().any(|&(i, j)| class_of[i] == class_of[j]) {
        return Err(decode_err("edges", "U_G codes a loop"));
    }

    // trim isolated classes from the end down to the recorded vertex count
    let mut n = e0.len();
    let full = Graph { n, edges };
    if ctx.vertices > n {
        return Err(decode_err("trim", format!("{} vertices recorded but {n} E₀-classes found", ctx.vertices)));
    }
    let mut keep: Vec<usize> = (0..n).collect();
    while keep.len() > ctx.vertices {
        match keep.iter().rposition(|&v| full.degree(v) == 0) {
            Some(p) => {
                keep.remove(p);
            }
            None => return Err(decode_err("trim", "more non-isolated classes than recorded vertices")),
        }
    }
    n = keep.len();
    let idx: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let graph = Graph::new(n, full.edges.iter().map(|&(u, v)| (idx[&u], idx[&v])))?;
    Ok(DecodeTrace { rx0, rx1, sim0, sim1, rt_star, k: kset, e1: e1_blocks, e0, graph })
}

#[cfg(test)]
mod tests;
