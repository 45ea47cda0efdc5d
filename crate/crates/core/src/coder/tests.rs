use std::collections::BTreeSet;
use std::sync::OnceLock;

use super::*;
use crate::amalgam::build_chain;
use crate::module::brute_force_isomorphic;

fn engine3() -> &'static EngineN {
    static E: OnceLock<EngineN> = OnceLock::new();
    E.get_or_init(|| EngineN::standard(3).unwrap())
}

fn engine4() -> &'static EngineN {
    static E: OnceLock<EngineN> = OnceLock::new();
    E.get_or_init(|| EngineN::standard(4).unwrap())
}

#[test]
fn engine_shapes() {
    let e = engine3();
    assert_eq!(e.vertex_classes(), 3);
    assert_eq!(e.class.to_tagged_module(&e.doubled).unwrap().module.size(), 64);
    let e = engine4();
    assert_eq!(e.vertex_classes(), 4);
    assert_eq!(e.e1.len(), 6);
    assert_eq!(e.doubled.dim(), 10);
}

#[test]
fn too_many_vertices_is_a_size_error() {
    let c = TaggedClass::prime_field(2);
    let chain = build_chain(&c, 1, BigOptions::default()).unwrap();
    let e = EngineN::from_chain(&c, chain, 1).unwrap();
    let r = e.code_graph(&Graph::complete(2));
    assert!(matches!(r, Err(CoderError::Size(_))));
    assert_eq!(r.unwrap_err().kind(), FailureKind::Guard);
}

/// U_G by scanning every second-sort vector: the basis multiples coding a pair over an edge,
/// closed under sums.
fn ug_oracle(e: &EngineN, g: &Graph) -> BTreeSet<usize> {
    let k = &e.class.field;
    let d = e.doubled.dim();
    let d0 = e.v0.base.dim();
    let class_of = |x: Name| e.e0.iter().position(|c| c.contains(&x)).unwrap();
    let coded: Vec<usize> = (d0..d)
        .filter(|&p| {
            let z = e.doubled.basis[p];
            e.k0.iter().any(|(&(x, y), &c)| {
                let (u, v) = (class_of(x), class_of(y));
                e.e1[c].contains(&z) && u < g.n && v < g.n && g.has_edge(u, v)
            })
        })
        .collect();
    (0..k.order().pow(d as u32))
        .filter(|&i| {
            let v = k.vector(i, d);
            (0..d).all(|p| v[p] == 0 || coded.contains(&p))
        })
        .collect()
}

#[test]
fn spec_examples() {
    let e = engine3();
    let last = |g: &Graph| e.code_graph(g).unwrap().tags.last().unwrap().clone();
    assert_eq!(last(&Graph::empty(3)), vec![0]);
    let one = Graph::new(3, [(0, 1)]).unwrap();
    assert_eq!(last(&one).into_iter().collect::<BTreeSet<_>>(), ug_oracle(e, &one));
    assert_eq!(last(&one).len(), 2);
    // K3 codes every pair
    let k3 = Graph::complete(3);
    assert_eq!(last(&k3).len(), 8);
    assert_eq!(last(&k3).into_iter().collect::<BTreeSet<_>>(), ug_oracle(e, &k3));
    assert_eq!(recover_graph(&e.code_graph(&k3).unwrap(), &e.context_for(&k3)).unwrap(), k3);
}

#[test]
fn round_trip_on_the_four_class_engine() {
    let e = engine4();
    for n in 0..=4 {
        for g in Graph::all_on(n) {
            let coded = e.code_graph(&g).unwrap();
            assert_eq!(recover_graph(&coded, &e.context_for(&g)).unwrap(), g, "graph {g}");
        }
    }
}

#[test]
fn file_round_trip() {
    let e = engine3();
    let g = Graph::path(3);
    let f = e.code_graph_file(&g).unwrap();
    let text = serde_json::to_string(&f).unwrap();
    let back: CodedModule = serde_json::from_str(&text).unwrap();
    assert_eq!(decode_file(&back).unwrap(), g);
    let recipe: EngineFile = serde_json::from_str(&serde_json::to_string(&e.recipe).unwrap()).unwrap();
    let e2 = EngineN::from_file(recipe).unwrap();
    assert_eq!(e2.doubled, e.doubled);
}

/// Pairs (G, G', coded isomorphic?, graphs isomorphic?) over all graphs on at most 3 vertices.
fn iso_table(e: &EngineN) -> Vec<(Graph, Graph, bool, bool)> {
    let mut out = Vec::new();
    for n in 0..=3 {
        let graphs = Graph::all_on(n);
        let coded: Vec<TaggedModule> = graphs.iter().map(|g| e.code_graph(g).unwrap()).collect();
        for (i, g) in graphs.iter().enumerate() {
            for (j, g2) in graphs.iter().enumerate() {
                let oracle = brute_force_isomorphic(&coded[i], &coded[j]).unwrap().is_some();
                out.push((g.clone(), g2.clone(), oracle, g.is_isomorphic(g2)));
            }
        }
    }
    out
}

#[test]
fn coded_isomorphism_iff_graph_isomorphism() {
    let e = engine3();
    for (g, g2, coded, graphs) in iso_table(e) {
        assert_eq!(coded, graphs, "{g} vs {g2}");
        if let Some(h) = g.isomorphism(&g2) {
            let f = e.lift_graph_iso(&g, &g2, &h).unwrap();
            assert!(verify_isomorphism(&e.code_graph(&g).unwrap(), &e.code_graph(&g2).unwrap(), &f));
        }
    }
}

#[test]
fn four_class_stage_reflects_but_does_not_preserve_isomorphism() {
    let table = iso_table(engine4());
    assert!(table.iter().all(|(_, _, coded, graphs)| !coded || *graphs));
    // the stage has no automorphism moving the first three classes, so relabelled edges differ
    let broken: Vec<_> = table.iter().filter(|(_, _, coded, graphs)| *graphs && !coded).collect();
    assert!(broken.iter().any(|(g, g2, _, _)| g == &Graph::new(3, [(0, 1)]).unwrap() && g2 == &Graph::new(3, [(0, 2)]).unwrap()));
}

#[test]
fn four_class_engine_cannot_lift() {
    let e = engine4();
    let g = Graph::path(3);
    let r = e.lift_graph_iso(&g, &g, &[2, 1, 0]);
    assert!(matches!(r, Err(CoderError::Amalgam(AmalgamError::Budget(_)))));
}

#[test]
fn non_isomorphism_is_rejected() {
    let e = engine3();
    let r = e.lift_graph_iso(&Graph::path(3), &Graph::complete(3), &[0, 1, 2]);
    assert!(matches!(r, Err(CoderError::Precondition(_))));
}

#[test]
fn full_module_as_u_g_reads_as_complete() {
    let e = engine3();
    let g = Graph::complete(3);
    let mut t = e.code_graph(&g).unwrap();
    let last = t.tags.len() - 1;
    t.tags[last] = t.module.elements().collect();
    // every pair is hit, so the decoder deterministically reads the complete graph
    assert_eq!(recover_graph(&t, &e.context_for(&g)).unwrap(), g);
    let ctx = DecodeContext { vertices: 2, ..e.context_for(&g) };
    assert!(matches!(recover_graph(&t, &ctx), Err(CoderError::Decode { stage: "trim", .. })));
}

#[test]
fn bad_context_is_a_decode_error() {
    let e = engine3();
    let g = Graph::path(2);
    let t = e.code_graph(&g).unwrap();
    let ctx = DecodeContext { ug: 99, ..e.context_for(&g) };
    assert!(matches!(recover_graph(&t, &ctx), Err(CoderError::Decode { .. })));
    let ctx = DecodeContext { vertices: 7, ..e.context_for(&g) };
    assert!(matches!(recover_graph(&t, &ctx), Err(CoderError::Decode { .. })));
}

fn assert_trace_moves(f: &[Elem], ta: &DecodeTrace, tb: &DecodeTrace) {
    let image = |xs: &[Elem]| -> Vec<Elem> {
        let mut v: Vec<Elem> = xs.iter().map(|&x| f[x]).collect();
        v.sort_unstable();
        v
    };
    assert_eq!(image(&ta.rx0), tb.rx0);
    assert_eq!(image(&ta.rx1), tb.rx1);
    assert_eq!(image(&ta.rt_star), tb.rt_star);
    let blocks = |s: &[Vec<Elem>]| -> BTreeSet<Vec<Elem>> { s.iter().map(|c| image(c)).collect() };
    assert_eq!(blocks(&ta.sim0), tb.sim0.iter().cloned().collect());
    assert_eq!(blocks(&ta.sim1), tb.sim1.iter().cloned().collect());
    assert_eq!(ta.k.len(), tb.k.len());
    assert_eq!(ta.e1.len(), tb.e1.len());
    assert!(ta.graph.is_isomorphic(&tb.graph));
}

/// The decoder's intermediate sets move with lifted isomorphisms and with isomorphisms found
/// by brute force.
#[test]
fn decoding_is_invariant_under_isomorphisms() {
    let e = engine3();
    let graphs = Graph::all_on(3);
    for g in &graphs {
        for g2 in &graphs {
            let (a, b) = (e.code_graph(g).unwrap(), e.code_graph(g2).unwrap());
            let Some(found) = brute_force_isomorphic(&a, &b).unwrap() else { continue };
            let h = g.isomorphism(g2).unwrap();
            let lifted = e.lift_graph_iso(g, g2, &h).unwrap();
            let (ta, tb) = (decode_trace(&a, &e.context_for(g)).unwrap(), decode_trace(&b, &e.context_for(g2)).unwrap());
            assert_trace_moves(&lifted, &ta, &tb);
            assert_trace_moves(&found, &ta, &tb);
        }
    }
}

#[test]
fn pair_class_is_symmetric() {
    let e = engine3();
    let x = e.x0();
    for &a in x {
        for &b in x {
            if a != b {
                assert_eq!(e.pair_class(a, b), e.pair_class(b, a));
            }
        }
    }
}

#[test]
fn graph_parse_and_print() {
    let g = Graph::parse("# a path\n3\n0 1\n\n1 2\n").unwrap();
    assert_eq!(g, Graph::path(3));
    assert_eq!(Graph::parse(&g.to_string()).unwrap(), g);
    assert!(Graph::parse("2\n1 0\n").is_err());
    assert!(Graph::parse("2\n0 2\n").is_err());
    assert!(Graph::parse("").is_err());
    assert_eq!(Graph::all_on(3).len(), 8);
}
