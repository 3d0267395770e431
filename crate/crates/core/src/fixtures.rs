//! Small frameworks and conic graphs shared by tests and demos.
//! Vertices are 0-based.

use crate::framework::{Configuration, ConicFramework, Decomposition};
use crate::graph::{ConicGraph, DirectedGraph, Edge, EuclideanGraph};

fn planar(positions: &[[f64; 2]], biases: &[f64], arcs: &[(usize, usize)]) -> ConicFramework {
    let config = Configuration::new(
        2,
        positions.iter().map(|x| x.to_vec()).collect(),
        biases.to_vec(),
    )
    .expect("fixture configuration is valid");
    let graph = DirectedGraph::from_pairs(positions.len(), arcs).expect("fixture arcs are valid");
    ConicFramework::new(graph, config).expect("fixture sizes agree")
}

const TRIANGLE: [[f64; 2]; 3] = [[0.0, 0.0], [4.0, 0.0], [1.0, 2.0]];
const TRIANGLE_BIASES: [f64; 3] = [0.0, 0.3, -0.1];

/// Double edge 0–1 and arcs 0→2, 1→2: agent 2 flexes along a hyperbola branch.
pub fn triangle_hyperbola() -> ConicFramework {
    planar(
        &TRIANGLE,
        &TRIANGLE_BIASES,
        &[(0, 1), (1, 0), (0, 2), (1, 2)],
    )
}

/// As [`triangle_hyperbola`] with the second single arc reversed: an ellipse.
pub fn triangle_ellipse() -> ConicFramework {
    planar(
        &TRIANGLE,
        &TRIANGLE_BIASES,
        &[(0, 1), (1, 0), (0, 2), (2, 1)],
    )
}

const RIGID_ARCS: [(usize, usize); 9] = [
    (0, 1),
    (1, 0),
    (0, 2),
    (2, 0),
    (1, 2),
    (2, 1),
    (0, 3),
    (1, 3),
    (3, 2),
];

/// Fully connected triangle 0,1,2 plus one arc between agent 3 and each of
/// them (two received, one emitted). Rigid.
pub fn four_agents_rigid() -> ConicFramework {
    planar(
        &[TRIANGLE[0], TRIANGLE[1], TRIANGLE[2], [3.0, 2.5]],
        &[
            TRIANGLE_BIASES[0],
            TRIANGLE_BIASES[1],
            TRIANGLE_BIASES[2],
            0.2,
        ],
        &RIGID_ARCS,
    )
}

/// [`four_agents_rigid`]'s graph with every agent on one line: the two placements of
/// agent 3 merge into one.
pub fn four_agents_collinear() -> ConicFramework {
    planar(
        &[[0.0, 0.0], [4.0, 0.0], [1.0, 0.0], [3.0, 0.0]],
        &[0.0, 0.3, -0.1, 0.2],
        &RIGID_ARCS,
    )
}

/// Unidimensional arcs `0→1, 1→0, 1→2, 2→0`.
pub const LINE_ARCS: [(usize, usize); 4] = [(0, 1), (1, 0), (1, 2), (2, 0)];

fn line(xs: &[f64]) -> ConicFramework {
    let config = Configuration::new(
        1,
        xs.iter().map(|&x| vec![x]).collect(),
        vec![0.0; xs.len()],
    )
    .expect("fixture configuration is valid");
    let graph = DirectedGraph::from_pairs(xs.len(), &LINE_ARCS).expect("fixture arcs are valid");
    ConicFramework::new(graph, config).expect("fixture sizes agree")
}

/// Ordering `x_1 < x_2 < x_0`: only `1→0` decreases, so the decreasing
/// graph is disconnected. Flexible.
pub fn line_flexible() -> ConicFramework {
    line(&[2.0, 0.0, 1.0])
}

/// Ordering `x_0 < x_1 < x_2`: both class graphs connected. Rigid.
pub fn line_rigid() -> ConicFramework {
    line(&[0.0, 1.0, 2.0])
}

fn edges(pairs: &[(usize, usize)]) -> Vec<Edge> {
    pairs.iter().map(|&(u, w)| Edge::new(u, w)).collect()
}

fn graph(n: usize, pairs: &[(usize, usize)]) -> EuclideanGraph {
    EuclideanGraph::from_pairs(n, pairs).expect("fixture edges are valid")
}

/// Complete graph on five vertices with the pair 2–3 doubled: 11 edge
/// copies, exactly `S(5,2)`.
pub fn k5_with_double() -> ConicGraph {
    let mut simple = Vec::new();
    for u in 0..5 {
        for w in u + 1..5 {
            if (u, w) != (2, 3) {
                simple.push(Edge::new(u, w));
            }
        }
    }
    ConicGraph::new(5, simple, edges(&[(2, 3)])).expect("fixture is valid")
}

/// Decomposition with `G` minimally rigid and `H` a spanning tree.
pub fn k5_split_rigid() -> Decomposition {
    Decomposition::new(
        graph(5, &[(0, 1), (0, 3), (0, 4), (1, 2), (1, 4), (2, 3), (3, 4)]),
        graph(5, &[(0, 2), (2, 3), (1, 3), (2, 4)]),
    )
    .expect("same vertex set")
}

/// Decomposition with `G` minimally rigid but vertex 4 isolated in `H`,
/// whose other part carries the cycle 1-2-3.
pub fn k5_split_disconnected() -> Decomposition {
    Decomposition::new(
        graph(5, &[(0, 1), (0, 3), (0, 4), (1, 4), (2, 3), (2, 4), (3, 4)]),
        graph(5, &[(0, 2), (1, 2), (2, 3), (1, 3)]),
    )
    .expect("same vertex set")
}

/// Decomposition with `H` connected but `G` a complete graph on four
/// vertices plus a pendant edge: not rigid.
pub fn k5_split_flexible() -> Decomposition {
    Decomposition::new(
        graph(5, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (3, 4)]),
        graph(5, &[(2, 3), (0, 4), (1, 4), (2, 4)]),
    )
    .expect("same vertex set")
}

/// Exchange turning the disconnected split into the rigid one: `{1,2}` enters `G`, `{2,4}` leaves.
pub const K5_SWAP: (Edge, Edge) = (Edge::new(1, 2), Edge::new(2, 4));

/// Decomposition whose repair round needs a chain of three exchange pairs,
/// of which the last and the first are applied.
pub fn seven_agent_chain_split() -> Decomposition {
    Decomposition::new(graph(7, &CHAIN_G), graph(7, &CHAIN_H)).expect("same vertex set")
}

const CHAIN_G: [(usize, usize); 11] = [
    (0, 1),
    (0, 2),
    (0, 3),
    (0, 4),
    (1, 2),
    (1, 4),
    (1, 5),
    (2, 3),
    (2, 6),
    (3, 5),
    (4, 6),
];
const CHAIN_H: [(usize, usize); 6] = [(0, 2), (2, 4), (3, 6), (4, 5), (4, 6), (5, 6)];

/// Conic graph on which the exchange chain, applied exactly as selected,
/// breaks the rigidity of `G`.
pub fn stale_chain_conic_graph() -> ConicGraph {
    ConicGraph::new(
        8,
        edges(&[
            (0, 2),
            (0, 4),
            (0, 5),
            (0, 6),
            (1, 4),
            (1, 5),
            (1, 7),
            (2, 7),
            (3, 4),
            (3, 5),
            (3, 6),
            (4, 5),
            (4, 6),
            (5, 6),
        ]),
        edges(&[(2, 3), (2, 5), (2, 6), (4, 7)]),
    )
    .expect("fixture is valid")
}
