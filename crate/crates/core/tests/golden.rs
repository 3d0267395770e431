use conic_rigidity::decompose::{
    apply_swap_chain, decompose, select_swap_chain, DecompositionTrace,
};
use conic_rigidity::fixtures;
use conic_rigidity::flex::locate_second_intersection;
use conic_rigidity::framework::{is_decomposition_of, Decomposition};
use conic_rigidity::graph::{component_count, find_cycle, Edge, EuclideanGraph};
use conic_rigidity::matroid::IndependenceOracle;
use conic_rigidity::Error;

fn e(u: usize, w: usize) -> Edge {
    Edge::new(u, w)
}

fn edges(pairs: &[(usize, usize)]) -> Vec<Edge> {
    pairs.iter().map(|&(u, w)| e(u, w)).collect()
}

#[test]
fn five_agent_splits() {
    let o = IndependenceOracle::standard(5, 2).unwrap();
    let cg = fixtures::k5_with_double();
    for (dec, g_rigid, h_connected) in [
        (fixtures::k5_split_rigid(), true, true),
        (fixtures::k5_split_disconnected(), true, false),
        (fixtures::k5_split_flexible(), false, true),
    ] {
        assert!(is_decomposition_of(&dec, &cg));
        assert_eq!(
            o.is_independent_euclidean(&dec.g.edge_vec()).unwrap(),
            g_rigid
        );
        assert_eq!(dec.h.is_connected(), h_connected);
    }
    // The disconnected split: vertex 4 alone, a cycle through 1, 2, 3.
    let h2 = fixtures::k5_split_disconnected().h;
    assert_eq!(component_count(&h2), 2);
    assert_eq!(find_cycle(&h2).unwrap(), edges(&[(1, 2), (1, 3), (2, 3)]));

    let g2 = fixtures::k5_split_disconnected().g;
    let (uv, wz) = fixtures::K5_SWAP;
    let circuit = o.fundamental_circuit(g2.edges(), uv).unwrap();
    assert!(circuit.contains(&wz));
    assert_eq!(
        &o.swap(g2.edges(), uv, wz).unwrap(),
        fixtures::k5_split_rigid().g.edges()
    );
    // An edge of the disconnected split's G off the circuit cannot replace {1,2}.
    let off: Vec<Edge> = g2
        .edges()
        .iter()
        .copied()
        .filter(|x| !circuit.contains(x))
        .collect();
    for x in off {
        assert!(matches!(
            o.swap(g2.edges(), uv, x),
            Err(Error::NotInCircuit { .. })
        ));
    }
}

#[test]
fn five_agent_decomposition_trace() {
    let o = IndependenceOracle::standard(5, 2).unwrap();
    let out = decompose(&fixtures::k5_with_double(), &o).unwrap();
    let t = &out.trace;
    assert!(t.verdict);
    assert_eq!((t.numeric_rank, t.required), (11, 11));
    assert!(t.surplus.is_empty());
    assert!(t.fallback.is_none());
    let dec = out.decomposition.unwrap();
    assert_eq!(
        dec.g.edge_vec(),
        edges(&[(0, 1), (0, 3), (0, 4), (1, 2), (1, 4), (2, 3), (2, 4)])
    );
    assert_eq!(dec.h.edge_vec(), edges(&[(0, 2), (1, 3), (2, 3), (3, 4)]));
}

#[test]
fn seven_agent_chain() {
    let dec = fixtures::seven_agent_chain_split();
    let o = IndependenceOracle::standard(7, 2).unwrap();
    assert!(o.is_independent_euclidean(&dec.g.edge_vec()).unwrap());
    assert_eq!(dec.g.edge_count(), 11);
    assert_eq!(component_count(&dec.h), 2);

    let cycle = find_cycle(&dec.h).unwrap();
    assert_eq!(cycle, edges(&[(4, 5), (5, 6), (4, 6)]));
    let chain = select_swap_chain(&dec.g, &dec.h, &cycle, &o).unwrap();
    let summary: Vec<(Edge, Edge, usize, Vec<usize>)> = chain
        .iter()
        .map(|p| (p.uv, p.wz, p.z, p.u_set.clone()))
        .collect();
    assert_eq!(
        summary,
        vec![
            (e(2, 4), e(0, 1), 1, vec![0, 2, 3, 4, 5, 6]),
            (e(3, 6), e(0, 3), 0, vec![3, 4, 5, 6]),
            (e(4, 5), e(0, 4), 0, vec![4, 5, 6]),
        ]
    );

    let applied = apply_swap_chain(&dec.g, &dec.h, &chain, &o).unwrap();
    assert_eq!(applied.sigma, vec![2, 0]);
    assert_eq!(applied.after.len(), 2);
    for snap in &applied.after {
        assert!(o.is_independent_euclidean(&snap.g).unwrap());
        assert_eq!(snap.g.len(), 11);
    }
    // First exchange: {4,5} in, {0,4} out; H still split.
    let mid = Decomposition::new(
        EuclideanGraph::new(7, applied.after[0].g.iter().copied()).unwrap(),
        EuclideanGraph::new(7, applied.after[0].h.iter().copied()).unwrap(),
    )
    .unwrap();
    assert!(mid.g.contains(e(4, 5)) && !mid.g.contains(e(0, 4)));
    assert_eq!(component_count(&mid.h), 2);
    // Second exchange: {2,4} in, {0,1} out; H connected.
    assert!(applied.g.contains(e(2, 4)) && !applied.g.contains(e(0, 1)));
    assert!(applied.h.is_connected());
    let after = Decomposition::new(applied.g, applied.h).unwrap();
    assert!(is_decomposition_of(&after, &dec.union()));
}

/// The chain of the second round, applied as selected, removes an edge that
/// the first exchange made essential. `decompose` records this and finishes
/// with augmenting paths.
#[test]
fn literal_chain_breaks_on_stale_fixture() {
    let cg = fixtures::stale_chain_conic_graph();
    let o = IndependenceOracle::standard(8, 2).unwrap();
    let out = decompose(&cg, &o).unwrap();
    // Two surplus copies are set aside before the search.
    assert_eq!(cg.edge_count(), 22);
    assert_eq!(out.trace.surplus.len(), 2);
    let initial = out.trace.initial.clone().unwrap();
    let mut g = EuclideanGraph::new(8, initial.g.iter().copied()).unwrap();
    let mut h = EuclideanGraph::new(8, initial.h.iter().copied()).unwrap();
    let mut failure = None;
    for round in 0..8 {
        if h.is_connected() {
            break;
        }
        let cycle = find_cycle(&h).unwrap();
        let chain = select_swap_chain(&g, &h, &cycle, &o).unwrap();
        match apply_swap_chain(&g, &h, &chain, &o) {
            Ok(a) => {
                g = a.g;
                h = a.h;
            }
            Err(Error::Invariant(reason)) => {
                failure = Some((round, reason));
                break;
            }
            Err(other) => panic!("unexpected error {other}"),
        }
    }
    let (round, reason) = failure.expect("the literal chain fails on this fixture");
    assert_eq!(round, 1);
    assert!(reason.contains("broke minimal rigidity"), "{reason}");

    let fallback = out.trace.fallback.as_ref().unwrap();
    assert_eq!(fallback.round, 1);
    assert_eq!(fallback.reason, reason);
    assert_eq!(fallback.paths, vec![vec![e(3, 6), e(1, 4)]]);
    let dec = out.decomposition.unwrap();
    assert!(is_decomposition_of(&dec, &cg));
    assert_eq!(o.euclidean_rank(&dec.g.edge_vec()).unwrap(), o.full_rank());
    assert!(dec.h.is_connected());
}

#[test]
fn trace_json_shape() {
    let o = IndependenceOracle::standard(7, 2).unwrap();
    let out = decompose(&fixtures::seven_agent_chain_split().union(), &o).unwrap();
    let v = serde_json::to_value(&out.trace).unwrap();
    for key in [
        "n",
        "d",
        "surplus",
        "initial",
        "rounds",
        "fallback",
        "final",
        "verdict",
        "numeric_rank",
        "required",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    if let Some(round) = v["rounds"].as_array().and_then(|r| r.first()) {
        assert!(round["chain"][0]["u_set"].is_array());
        assert!(round["chain"][0]["uv"].is_array());
    }
    let back: DecompositionTrace = serde_json::from_value(v).unwrap();
    assert_eq!(back, out.trace);
}

#[test]
fn second_placement_of_fourth_agent() {
    let report = locate_second_intersection(&fixtures::four_agents_rigid()).unwrap();
    assert!(!report.tangent);
    assert_eq!(report.solutions.len(), 2);
    let second = report.second.unwrap();
    assert!((second.position[0] - 2.651821289).abs() < 1e-8);
    assert!((second.position[1] + 0.752545580).abs() < 1e-8);
    assert!((second.bias - 1.348590601).abs() < 1e-8);
    assert!(second.residual < 1e-12);

    let tangent = locate_second_intersection(&fixtures::four_agents_collinear()).unwrap();
    assert!(tangent.tangent && tangent.second.is_none());
}
