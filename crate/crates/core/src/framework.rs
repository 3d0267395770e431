//! Configurations, conic frameworks and the union/decomposition algebra
//! linking directed graphs, conic graphs and pairs of Euclidean graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Arc, ConicGraph, DirectedGraph, Edge, EuclideanGraph};

/// Spatial positions `x_u ∈ ℝ^d` and clock biases `β_u` (length units).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    d: usize,
    positions: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

impl Configuration {
    /// Builds a configuration whose agents occupy pairwise distinct positions.
    pub fn new(d: usize, positions: Vec<Vec<f64>>, biases: Vec<f64>) -> Result<Self> {
        let c = Self::allowing_coincident(d, positions, biases)?;
        if let Some((u, w)) = c.first_coincident_pair() {
            return Err(Error::CoincidentPositions(u, w));
        }
        Ok(c)
    }

    /// Same shape checks as [`Configuration::new`] but tolerates agents at
    /// the same position. Only meaningful for unidimensional inputs, where
    /// null arcs are part of the combinatorial characterization.
    pub fn allowing_coincident(
        d: usize,
        positions: Vec<Vec<f64>>,
        biases: Vec<f64>,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument(
                "dimension must be at least 1".into(),
            ));
        }
        if positions.len() != biases.len() {
            return Err(Error::VertexCountMismatch {
                left: positions.len(),
                right: biases.len(),
            });
        }
        for (u, x) in positions.iter().enumerate() {
            if x.len() != d {
                return Err(Error::Input(format!(
                    "agent {u} has {} coordinates, expected {d}",
                    x.len()
                )));
            }
            if x.iter().any(|c| !c.is_finite()) || !biases[u].is_finite() {
                return Err(Error::NonFinite);
            }
        }
        Ok(Configuration {
            d,
            positions,
            biases,
        })
    }

    pub fn first_coincident_pair(&self) -> Option<(usize, usize)> {
        for u in 0..self.n() {
            for w in u + 1..self.n() {
                if self.positions[u] == self.positions[w] {
                    return Some((u, w));
                }
            }
        }
        None
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn position(&self, u: usize) -> &[f64] {
        &self.positions[u]
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    pub fn bias(&self, u: usize) -> f64 {
        self.biases[u]
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn set_agent(&mut self, u: usize, position: Vec<f64>, bias: f64) {
        assert_eq!(position.len(), self.d);
        self.positions[u] = position;
        self.biases[u] = bias;
    }

    pub fn distance(&self, u: usize, w: usize) -> f64 {
        distance(&self.positions[u], &self.positions[w])
    }

    /// Pseudo-range measured from `emitter` to `receiver`.
    pub fn pseudo_range(&self, emitter: usize, receiver: usize) -> Result<f64> {
        pseudo_range(
            &self.positions[emitter],
            self.biases[emitter],
            &self.positions[receiver],
            self.biases[receiver],
        )
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `‖x_e − x_r‖ + β_r − β_e`. Requires distinct spatial positions.
pub fn pseudo_range(x_e: &[f64], beta_e: f64, x_r: &[f64], beta_r: f64) -> Result<f64> {
    if x_e.len() != x_r.len() {
        return Err(Error::VertexCountMismatch {
            left: x_e.len(),
            right: x_r.len(),
        });
    }
    if x_e == x_r {
        return Err(Error::InvalidArgument(
            "pseudo-range undefined for coincident positions".into(),
        ));
    }
    Ok(distance(x_e, x_r) + beta_r - beta_e)
}

/// A directed constraint graph together with a configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConicFramework {
    graph: DirectedGraph,
    config: Configuration,
}

impl ConicFramework {
    pub fn new(graph: DirectedGraph, config: Configuration) -> Result<Self> {
        if graph.n() != config.n() {
            return Err(Error::VertexCountMismatch {
                left: graph.n(),
                right: config.n(),
            });
        }
        Ok(ConicFramework { graph, config })
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn config_mut(&mut self) -> &mut Configuration {
        &mut self.config
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn d(&self) -> usize {
        self.config.d()
    }

    /// Pseudo-range along every arc, in arc order.
    pub fn measurements(&self) -> Result<Vec<f64>> {
        self.graph
            .arcs()
            .iter()
            .map(|a| self.config.pseudo_range(a.tail, a.head))
            .collect()
    }
}

/// Pair `(G, H)` of Euclidean graphs on the same vertex set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub g: EuclideanGraph,
    pub h: EuclideanGraph,
}

impl Decomposition {
    pub fn new(g: EuclideanGraph, h: EuclideanGraph) -> Result<Self> {
        if g.n() != h.n() {
            return Err(Error::VertexCountMismatch {
                left: g.n(),
                right: h.n(),
            });
        }
        Ok(Decomposition { g, h })
    }

    pub fn union(&self) -> ConicGraph {
        union(&self.g, &self.h).expect("decomposition halves share a vertex set")
    }
}

/// Conic graph of a directed graph: antiparallel pairs become double edges.
pub fn conic_class(g: &DirectedGraph) -> ConicGraph {
    let mut simple = Vec::new();
    let mut double = Vec::new();
    for a in g.arcs() {
        if g.contains(a.reversed()) {
            if a.tail < a.head {
                double.push(a.edge());
            }
        } else {
            simple.push(a.edge());
        }
    }
    ConicGraph::new(g.n(), simple, double).expect("arcs of a simple digraph are valid")
}

/// `E_S = E₁ △ E₂`, `E_D = E₁ ∩ E₂`.
pub fn union(g1: &EuclideanGraph, g2: &EuclideanGraph) -> Result<ConicGraph> {
    if g1.n() != g2.n() {
        return Err(Error::VertexCountMismatch {
            left: g1.n(),
            right: g2.n(),
        });
    }
    let simple: Vec<Edge> = g1
        .edges()
        .symmetric_difference(g2.edges())
        .copied()
        .collect();
    let double: Vec<Edge> = g1.edges().intersection(g2.edges()).copied().collect();
    ConicGraph::new(g1.n(), simple, double)
}

pub fn is_decomposition_of(dec: &Decomposition, cg: &ConicGraph) -> bool {
    dec.g.n() == dec.h.n() && union(&dec.g, &dec.h).map(|u| &u == cg).unwrap_or(false)
}

/// Representative directed graph of a conic graph: both arcs for a double
/// edge, `low → high` for a simple edge, scanning pairs lexicographically.
pub fn orient(cg: &ConicGraph) -> DirectedGraph {
    let mut arcs = Vec::with_capacity(cg.edge_count());
    for e in cg.support() {
        arcs.push(Arc::new(e.lo(), e.hi()));
        if cg.double_edges().contains(&e) {
            arcs.push(Arc::new(e.hi(), e.lo()));
        }
    }
    DirectedGraph::new(cg.n(), arcs).expect("orientation of a conic graph is simple")
}

pub fn orient_decomposition(dec: &Decomposition) -> DirectedGraph {
    orient(&dec.union())
}

/// Positions i.i.d. uniform on `[0,1)^d`, biases uniform on `[0,1)`.
/// Deterministic in `seed`; coincident draws are resampled.
pub fn random_generic_configuration(n: usize, d: usize, seed: u64) -> Configuration {
    assert!(d >= 1, "dimension must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions: Vec<Vec<f64>> = Vec::with_capacity(n);
    while positions.len() < n {
        let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        if !positions.contains(&x) {
            positions.push(x);
        }
    }
    let biases = (0..n).map(|_| rng.random::<f64>()).collect();
    Configuration {
        d,
        positions,
        biases,
    }
}
