//! Graph primitives: directed constraint graphs, simple undirected
//! ("Euclidean") graphs and conic multigraphs, plus the handful of
//! classical algorithms the rigidity tests lean on.
//!
//! Vertices are dense indices `0..n`. Arc order is insertion order and is
//! never reshuffled, since rigidity-matrix rows are keyed by arc index.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unordered vertex pair, stored with the smaller index first.
///
/// The derived ordering is lexicographic on `(min, max)`, which is the scan
/// order used by every greedy procedure in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Edge {
    lo: usize,
    hi: usize,
}

impl Edge {
    pub const fn new(u: usize, w: usize) -> Self {
        if u <= w {
            Edge { lo: u, hi: w }
        } else {
            Edge { lo: w, hi: u }
        }
    }

    pub fn lo(self) -> usize {
        self.lo
    }

    pub fn hi(self) -> usize {
        self.hi
    }

    pub fn endpoints(self) -> (usize, usize) {
        (self.lo, self.hi)
    }

    pub fn has_endpoint(self, v: usize) -> bool {
        self.lo == v || self.hi == v
    }

    /// The endpoint opposite to `v`, if `v` is an endpoint.
    pub fn other(self, v: usize) -> Option<usize> {
        if v == self.lo {
            Some(self.hi)
        } else if v == self.hi {
            Some(self.lo)
        } else {
            None
        }
    }
}

impl From<[usize; 2]> for Edge {
    fn from(pair: [usize; 2]) -> Self {
        Edge::new(pair[0], pair[1])
    }
}

impl From<Edge> for [usize; 2] {
    fn from(e: Edge) -> Self {
        [e.lo, e.hi]
    }
}

impl From<(usize, usize)> for Edge {
    fn from((u, w): (usize, usize)) -> Self {
        Edge::new(u, w)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.lo, self.hi)
    }
}

/// Ordered pair `(tail, head)`: a pseudo-range measured from `tail` to `head`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
}

impl Arc {
    pub fn new(tail: usize, head: usize) -> Self {
        Arc { tail, head }
    }

    pub fn reversed(self) -> Self {
        Arc {
            tail: self.head,
            head: self.tail,
        }
    }

    pub fn edge(self) -> Edge {
        Edge::new(self.tail, self.head)
    }
}

impl From<[usize; 2]> for Arc {
    fn from(pair: [usize; 2]) -> Self {
        Arc::new(pair[0], pair[1])
    }
}

impl From<Arc> for [usize; 2] {
    fn from(a: Arc) -> Self {
        [a.tail, a.head]
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.tail, self.head)
    }
}

fn check_vertex(v: usize, n: usize) -> Result<()> {
    if v >= n {
        Err(Error::VertexOutOfRange { vertex: v, n })
    } else {
        Ok(())
    }
}

/// Simple directed graph. Antiparallel arcs may coexist.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedGraph {
    n: usize,
    arcs: Vec<Arc>,
}

impl DirectedGraph {
    pub fn new(n: usize, arcs: impl IntoIterator<Item = Arc>) -> Result<Self> {
        let mut g = DirectedGraph {
            n,
            arcs: Vec::new(),
        };
        for a in arcs {
            g.push_arc(a)?;
        }
        Ok(g)
    }

    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, pairs.iter().map(|&(u, w)| Arc::new(u, w)))
    }

    pub fn push_arc(&mut self, arc: Arc) -> Result<()> {
        check_vertex(arc.tail, self.n)?;
        check_vertex(arc.head, self.n)?;
        if arc.tail == arc.head {
            return Err(Error::SelfLoop(arc.tail));
        }
        if self.arcs.contains(&arc) {
            return Err(Error::DuplicateArc(arc.tail, arc.head));
        }
        self.arcs.push(arc);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn contains(&self, arc: Arc) -> bool {
        self.arcs.contains(&arc)
    }

    /// Copy of the graph with arc `index` reversed, in place.
    ///
    /// Fails if the reversed arc already exists (the result would not be simple).
    pub fn with_flipped_arc(&self, index: usize) -> Result<Self> {
        let flipped = self.arcs[index].reversed();
        if self.arcs.contains(&flipped) {
            return Err(Error::DuplicateArc(flipped.tail, flipped.head));
        }
        let mut arcs = self.arcs.clone();
        arcs[index] = flipped;
        Ok(DirectedGraph { n: self.n, arcs })
    }

    /// Underlying simple undirected graph (antiparallel pairs collapse).
    pub fn shadow(&self) -> EuclideanGraph {
        EuclideanGraph {
            n: self.n,
            edges: self.arcs.iter().map(|a| a.edge()).collect(),
        }
    }
}

/// Simple undirected graph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EuclideanGraph {
    n: usize,
    edges: BTreeSet<Edge>,
}

impl EuclideanGraph {
    pub fn empty(n: usize) -> Self {
        EuclideanGraph {
            n,
            edges: BTreeSet::new(),
        }
    }

    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let mut g = Self::empty(n);
        for e in edges {
            if !g.insert(e)? {
                return Err(Error::DuplicateArc(e.lo, e.hi));
            }
        }
        Ok(g)
    }

    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, pairs.iter().map(|&p| Edge::from(p)))
    }

    /// Inserts an edge; returns `false` if it was already present.
    pub fn insert(&mut self, e: Edge) -> Result<bool> {
        check_vertex(e.hi, self.n)?;
        if e.lo == e.hi {
            return Err(Error::SelfLoop(e.lo));
        }
        Ok(self.edges.insert(e))
    }

    pub fn remove(&mut self, e: Edge) -> bool {
        self.edges.remove(&e)
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edges.contains(&e)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn edge_vec(&self) -> Vec<Edge> {
        self.edges.iter().copied().collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sorted neighbor lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.lo].push(e.hi);
            adj[e.hi].push(e.lo);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Subgraph keeping only the edges with both endpoints in `vertices`.
    /// The vertex set (and indexing) is unchanged.
    pub fn restricted_to(&self, vertices: &BTreeSet<usize>) -> EuclideanGraph {
        EuclideanGraph {
            n: self.n,
            edges: self
                .edges
                .iter()
                .copied()
                .filter(|e| vertices.contains(&e.lo) && vertices.contains(&e.hi))
                .collect(),
        }
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || component_count(self) == 1
    }
}

/// Undirected multigraph with simple edges `E_S` and double edges `E_D`:
/// the equivalence class of directed graphs under arc reversal.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConicGraph {
    n: usize,
    simple: BTreeSet<Edge>,
    double: BTreeSet<Edge>,
}

impl ConicGraph {
    pub fn empty(n: usize) -> Self {
        ConicGraph {
            n,
            simple: BTreeSet::new(),
            double: BTreeSet::new(),
        }
    }

    pub fn new(
        n: usize,
        simple: impl IntoIterator<Item = Edge>,
        double: impl IntoIterator<Item = Edge>,
    ) -> Result<Self> {
        let mut g = Self::empty(n);
        for e in simple {
            g.validate(e)?;
            g.simple.insert(e);
        }
        for e in double {
            g.validate(e)?;
            if g.simple.contains(&e) {
                return Err(Error::OverlappingEdgeSets(e));
            }
            g.double.insert(e);
        }
        Ok(g)
    }

    fn validate(&self, e: Edge) -> Result<()> {
        check_vertex(e.hi, self.n)?;
        if e.lo == e.hi {
            return Err(Error::SelfLoop(e.lo));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn simple_edges(&self) -> &BTreeSet<Edge> {
        &self.simple
    }

    pub fn double_edges(&self) -> &BTreeSet<Edge> {
        &self.double
    }

    /// `|E_S| + 2 |E_D|`
    pub fn edge_count(&self) -> usize {
        self.simple.len() + 2 * self.double.len()
    }

    /// Multiplicity of `e`: 0, 1 or 2.
    pub fn multiplicity(&self, e: Edge) -> usize {
        if self.double.contains(&e) {
            2
        } else if self.simple.contains(&e) {
            1
        } else {
            0
        }
    }

    /// Adds one copy of `e`: absent becomes simple, simple becomes double.
    pub fn add_copy(&mut self, e: Edge) -> Result<()> {
        self.validate(e)?;
        if self.double.contains(&e) {
            return Err(Error::DuplicateArc(e.lo, e.hi));
        }
        if self.simple.remove(&e) {
            self.double.insert(e);
        } else {
            self.simple.insert(e);
        }
        Ok(())
    }

    /// Removes one copy of `e`; returns `false` if absent.
    pub fn remove_copy(&mut self, e: Edge) -> bool {
        if self.double.remove(&e) {
            self.simple.insert(e);
            true
        } else {
            self.simple.remove(&e)
        }
    }

    /// Every distinct vertex pair carrying at least one edge, sorted.
    pub fn support(&self) -> BTreeSet<Edge> {
        self.simple.union(&self.double).copied().collect()
    }
}

/// Maximal connected vertex sets, each sorted, ordered by smallest vertex.
pub fn connected_components(g: &EuclideanGraph) -> Vec<Vec<usize>> {
    let adj = g.adjacency();
    let mut seen = vec![false; g.n()];
    let mut components = Vec::new();
    for start in 0..g.n() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components
}

pub fn component_count(g: &EuclideanGraph) -> usize {
    let mut uf = UnionFind::new(g.n());
    let mut count = g.n();
    for e in g.edges() {
        if uf.union(e.lo, e.hi) {
            count -= 1;
        }
    }
    count
}

/// The connected component containing `v`, as a vertex set.
pub fn component_of(g: &EuclideanGraph, v: usize) -> BTreeSet<usize> {
    connected_components(g)
        .into_iter()
        .find(|c| c.binary_search(&v).is_ok())
        .map(|c| c.into_iter().collect())
        .unwrap_or_default()
}

/// Acyclic subgraph with the same components, built by scanning edges in
/// lexicographic order.
pub fn spanning_forest(g: &EuclideanGraph) -> EuclideanGraph {
    let mut uf = UnionFind::new(g.n());
    let edges = g
        .edges()
        .iter()
        .copied()
        .filter(|e| uf.union(e.lo, e.hi))
        .collect();
    EuclideanGraph { n: g.n(), edges }
}

/// First cycle met by a DFS that starts from the smallest vertex and visits
/// neighbors in ascending order. Edges are returned as a closed walk.
pub fn find_cycle(g: &EuclideanGraph) -> Option<Vec<Edge>> {
    let adj = g.adjacency();
    let n = g.n();
    let mut parent = vec![usize::MAX; n];
    let mut state = vec![0u8; n]; // 0 new, 1 on stack, 2 done

    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        state[root] = 1;
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next == adj[v].len() {
                state[v] = 2;
                stack.pop();
                continue;
            }
            let w = adj[v][*next];
            *next += 1;
            if w == parent[v] {
                continue;
            }
            match state[w] {
                0 => {
                    parent[w] = v;
                    state[w] = 1;
                    stack.push((w, 0));
                }
                1 => {
                    // back edge v -> ancestor w
                    let mut path = vec![v];
                    let mut x = v;
                    while x != w {
                        x = parent[x];
                        path.push(x);
                    }
                    path.reverse();
                    let mut cycle: Vec<Edge> =
                        path.windows(2).map(|p| Edge::new(p[0], p[1])).collect();
                    cycle.push(Edge::new(v, w));
                    return Some(cycle);
                }
                _ => {}
            }
        }
    }
    None
}

/// Vertices of a cycle given as an edge list.
pub fn cycle_vertices(cycle: &[Edge]) -> BTreeSet<usize> {
    cycle.iter().flat_map(|e| [e.lo, e.hi]).collect()
}

/// Transposed incidence matrix `B(Γ)`: one row per arc, `-1` at the tail
/// column and `+1` at the head column.
pub fn incidence_transpose(g: &DirectedGraph) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(g.arc_count(), g.n());
    for (row, a) in g.arcs().iter().enumerate() {
        b[(row, a.tail)] = -1.0;
        b[(row, a.head)] = 1.0;
    }
    b
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; `false` if they were already merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, pairs: &[(usize, usize)]) -> EuclideanGraph {
        EuclideanGraph::from_pairs(n, pairs).unwrap()
    }

    #[test]
    fn components_of_path_and_empty() {
        assert_eq!(
            connected_components(&graph(3, &[(0, 1), (1, 2)])),
            vec![vec![0, 1, 2]]
        );
        assert_eq!(
            connected_components(&graph(3, &[])),
            vec![vec![0], vec![1], vec![2]]
        );
    }

    #[test]
    fn single_edge_among_five_vertices_leaves_four_components() {
        let g = graph(5, &[(3, 4)]);
        assert_eq!(
            connected_components(&g),
            vec![vec![0], vec![1], vec![2], vec![3, 4]]
        );
        assert_eq!(component_count(&g), 4);
    }

    #[test]
    fn spanning_forest_breaks_triangle() {
        let f = spanning_forest(&graph(3, &[(0, 1), (1, 2), (0, 2)]));
        assert_eq!(f.edge_vec(), vec![Edge::new(0, 1), Edge::new(0, 2)]);
        let forest = graph(5, &[(0, 1), (2, 3)]);
        assert_eq!(spanning_forest(&forest), forest);
    }

    #[test]
    fn spanning_forest_of_connected_graph_is_tree() {
        let mut pairs = Vec::new();
        for u in 0..6 {
            for w in u + 1..6 {
                pairs.push((u, w));
            }
        }
        assert_eq!(spanning_forest(&graph(6, &pairs)).edge_count(), 5);
    }

    #[test]
    fn cycle_detection() {
        assert!(find_cycle(&graph(4, &[(0, 1), (1, 2), (1, 3)])).is_none());
        let c = find_cycle(&graph(3, &[(0, 1), (1, 2), (0, 2)])).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(cycle_vertices(&c).len(), 3);
        // n - 1 edges but disconnected: a cycle must exist
        let h = graph(5, &[(1, 2), (2, 3), (1, 3), (0, 1)]);
        let c = find_cycle(&h).unwrap();
        assert_eq!(cycle_vertices(&c), [1, 2, 3].into_iter().collect());
    }

    #[test]
    fn cycle_is_closed_walk() {
        let g = graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 1), (4, 5)]);
        let c = find_cycle(&g).unwrap();
        let mut degree = std::collections::HashMap::new();
        for e in &c {
            *degree.entry(e.lo()).or_insert(0) += 1;
            *degree.entry(e.hi()).or_insert(0) += 1;
        }
        assert!(degree.values().all(|&d| d == 2));
        assert_eq!(degree.len(), c.len());
    }

    #[test]
    fn incidence_sign_convention() {
        let g = DirectedGraph::from_pairs(2, &[(0, 1), (1, 0)]).unwrap();
        let b = incidence_transpose(&g);
        assert_eq!(
            b.row(0).iter().copied().collect::<Vec<_>>(),
            vec![-1.0, 1.0]
        );
        assert_eq!(
            b.row(1).iter().copied().collect::<Vec<_>>(),
            vec![1.0, -1.0]
        );
    }

    #[test]
    fn directed_graph_rejects_loops_and_duplicates() {
        assert!(matches!(
            DirectedGraph::from_pairs(2, &[(0, 0)]),
            Err(Error::SelfLoop(0))
        ));
        assert!(matches!(
            DirectedGraph::from_pairs(2, &[(0, 1), (0, 1)]),
            Err(Error::DuplicateArc(0, 1))
        ));
        assert!(DirectedGraph::from_pairs(2, &[(0, 2)]).is_err());
    }

    #[test]
    fn conic_graph_rejects_overlap() {
        let e = Edge::new(0, 1);
        assert!(matches!(
            ConicGraph::new(2, [e], [e]),
            Err(Error::OverlappingEdgeSets(_))
        ));
    }

    #[test]
    fn conic_copy_bookkeeping() {
        let mut cg = ConicGraph::empty(3);
        let e = Edge::new(2, 0);
        cg.add_copy(e).unwrap();
        cg.add_copy(e).unwrap();
        assert_eq!(cg.multiplicity(e), 2);
        assert_eq!(cg.edge_count(), 2);
        assert!(cg.add_copy(e).is_err());
        assert!(cg.remove_copy(e));
        assert_eq!(cg.multiplicity(e), 1);
    }
}
