//! Exact rigidity test for unidimensional conic frameworks.
//!
//! The coordinate ordering splits the arcs into increasing and decreasing
//! ones; the framework is infinitesimally rigid iff the undirected graphs
//! of both classes are connected. The test is purely combinatorial and
//! holds for any configuration, generic or not.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::ConicFramework;
use crate::graph::{connected_components, Arc, EuclideanGraph};

/// Coordinate gap below which a strict-ordering warning is logged.
pub const NEAR_TIE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcSplit {
    /// `x_u < x_w`
    pub increasing: Vec<Arc>,
    /// `x_u > x_w`
    pub decreasing: Vec<Arc>,
    /// `x_u = x_w`; such arcs constrain nothing.
    pub null_arcs: Vec<Arc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnidimensionalVerdict {
    pub rigid: bool,
    pub split: ArcSplit,
    pub increasing_components: Vec<Vec<usize>>,
    pub decreasing_components: Vec<Vec<usize>>,
    /// Arcs whose endpoints differ by less than [`NEAR_TIE`] without being equal.
    pub near_ties: Vec<Arc>,
}

fn require_1d(fw: &ConicFramework) -> Result<()> {
    if fw.d() != 1 {
        return Err(Error::WrongDimension {
            expected: "1".into(),
            found: fw.d(),
        });
    }
    Ok(())
}

fn coordinate(fw: &ConicFramework, u: usize) -> f64 {
    fw.config().position(u)[0]
}

pub fn split_arcs(fw: &ConicFramework) -> Result<ArcSplit> {
    require_1d(fw)?;
    let mut split = ArcSplit {
        increasing: Vec::new(),
        decreasing: Vec::new(),
        null_arcs: Vec::new(),
    };
    for &a in fw.graph().arcs() {
        let (xu, xw) = (coordinate(fw, a.tail), coordinate(fw, a.head));
        if xu < xw {
            split.increasing.push(a);
        } else if xu > xw {
            split.decreasing.push(a);
        } else {
            split.null_arcs.push(a);
        }
    }
    Ok(split)
}

fn class_graph(n: usize, arcs: &[Arc]) -> EuclideanGraph {
    let mut g = EuclideanGraph::empty(n);
    for a in arcs {
        g.insert(a.edge())
            .expect("arc endpoints are valid vertices");
    }
    g
}

pub fn is_rigid_1d(fw: &ConicFramework) -> Result<UnidimensionalVerdict> {
    let split = split_arcs(fw)?;
    let n = fw.n();
    let increasing_components = connected_components(&class_graph(n, &split.increasing));
    let decreasing_components = connected_components(&class_graph(n, &split.decreasing));
    let near_ties: Vec<Arc> = split
        .increasing
        .iter()
        .chain(&split.decreasing)
        .copied()
        .filter(|a| (coordinate(fw, a.tail) - coordinate(fw, a.head)).abs() < NEAR_TIE)
        .collect();
    for a in &near_ties {
        log::warn!("arc {a}: endpoint coordinates differ by less than {NEAR_TIE:e}");
    }
    Ok(UnidimensionalVerdict {
        rigid: increasing_components.len() <= 1 && decreasing_components.len() <= 1,
        split,
        increasing_components,
        decreasing_components,
        near_ties,
    })
}

/// Non-trivial admissible velocity when the framework is flexible.
///
/// With `U` the component of vertex 0 in a disconnected class graph, each
/// agent of `U` gets `(v, α) = (1, −1)` if the decreasing graph is the
/// disconnected one, `(1, +1)` otherwise; agents outside `U` stay at rest.
/// Vector layout matches the rigidity matrix: `[v_0 … v_{n−1}, α_0 … α_{n−1}]`.
pub fn flex_witness_1d(fw: &ConicFramework) -> Result<Option<DVector<f64>>> {
    let verdict = is_rigid_1d(fw)?;
    let (side, bias_rate) = if verdict.decreasing_components.len() > 1 {
        (&verdict.decreasing_components[0], -1.0)
    } else if verdict.increasing_components.len() > 1 {
        (&verdict.increasing_components[0], 1.0)
    } else {
        return Ok(None);
    };
    let n = fw.n();
    let mut q = DVector::zeros(2 * n);
    for &u in side {
        q[u] = 1.0;
        q[n + u] = bias_rate;
    }
    Ok(Some(q))
}
