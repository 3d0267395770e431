//! JSON file formats for frameworks and conic graphs, and CSV export of
//! flex samples. Vertex ids are strings; bare integers are accepted too.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::flex::FlexSample;
use crate::framework::{Configuration, ConicFramework};
use crate::graph::{Arc, ConicGraph, DirectedGraph, Edge};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct VertexId(pub String);

impl<'de> Deserialize<'de> for VertexId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Integer(u64),
        }
        Ok(match Raw::deserialize(deserializer)? {
            Raw::Text(s) => VertexId(s),
            Raw::Integer(k) => VertexId(k.to_string()),
        })
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_string())
    }
}

impl std::fmt::Display for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: VertexId,
    pub position: Vec<f64>,
    pub bias: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameworkFile {
    pub dimension: usize,
    pub vertices: Vec<VertexRecord>,
    pub arcs: Vec<[VertexId; 2]>,
}

/// A parsed framework together with the id of every vertex index.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledFramework {
    pub framework: ConicFramework,
    pub ids: Vec<VertexId>,
}

fn index_ids(ids: &[VertexId]) -> Result<HashMap<&VertexId, usize>> {
    let mut index = HashMap::with_capacity(ids.len());
    for (k, id) in ids.iter().enumerate() {
        if index.insert(id, k).is_some() {
            return Err(Error::Input(format!("duplicate vertex id {id:?}")));
        }
    }
    Ok(index)
}

fn resolve(index: &HashMap<&VertexId, usize>, id: &VertexId) -> Result<usize> {
    index
        .get(id)
        .copied()
        .ok_or_else(|| Error::Input(format!("unknown vertex id {id:?}")))
}

impl FrameworkFile {
    pub fn to_framework(&self) -> Result<LabeledFramework> {
        let ids: Vec<VertexId> = self.vertices.iter().map(|v| v.id.clone()).collect();
        let index = index_ids(&ids)?;
        for v in &self.vertices {
            if v.position.len() != self.dimension {
                return Err(Error::Input(format!(
                    "vertex {:?} has {} coordinates, dimension is {}",
                    v.id,
                    v.position.len(),
                    self.dimension
                )));
            }
        }
        let config = Configuration::new(
            self.dimension,
            self.vertices.iter().map(|v| v.position.clone()).collect(),
            self.vertices.iter().map(|v| v.bias).collect(),
        )?;
        let arcs = self
            .arcs
            .iter()
            .map(|[a, b]| Ok(Arc::new(resolve(&index, a)?, resolve(&index, b)?)))
            .collect::<Result<Vec<_>>>()?;
        let graph = DirectedGraph::new(ids.len(), arcs)?;
        Ok(LabeledFramework {
            framework: ConicFramework::new(graph, config)?,
            ids,
        })
    }

    pub fn from_framework(fw: &ConicFramework, ids: &[VertexId]) -> Result<Self> {
        if ids.len() != fw.n() {
            return Err(Error::VertexCountMismatch {
                left: ids.len(),
                right: fw.n(),
            });
        }
        index_ids(ids)?;
        let p = fw.config();
        Ok(FrameworkFile {
            dimension: fw.d(),
            vertices: (0..fw.n())
                .map(|u| VertexRecord {
                    id: ids[u].clone(),
                    position: p.position(u).to_vec(),
                    bias: p.bias(u),
                })
                .collect(),
            arcs: fw
                .graph()
                .arcs()
                .iter()
                .map(|a| [ids[a.tail].clone(), ids[a.head].clone()])
                .collect(),
        })
    }
}

/// Vertex ids `"0"`, `"1"`, …
pub fn numeric_ids(n: usize) -> Vec<VertexId> {
    (0..n).map(|k| VertexId(k.to_string())).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConicGraphFile {
    /// Vertex count when ids are `0..n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<VertexId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default)]
    pub simple_edges: Vec<[VertexId; 2]>,
    #[serde(default)]
    pub double_edges: Vec<[VertexId; 2]>,
    /// One orientation realizing the conic graph.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suggested_arcs: Option<Vec<[VertexId; 2]>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledConicGraph {
    pub graph: ConicGraph,
    pub ids: Vec<VertexId>,
    pub dimension: Option<usize>,
}

impl ConicGraphFile {
    pub fn ids(&self) -> Result<Vec<VertexId>> {
        match (&self.vertices, self.n) {
            (Some(v), Some(n)) if v.len() != n => Err(Error::Input(format!(
                "n = {n} but {} vertex ids listed",
                v.len()
            ))),
            (Some(v), _) => Ok(v.clone()),
            (None, Some(n)) => Ok(numeric_ids(n)),
            (None, None) => Err(Error::Input("either n or vertices is required".into())),
        }
    }

    pub fn to_conic_graph(&self) -> Result<LabeledConicGraph> {
        let ids = self.ids()?;
        let index = index_ids(&ids)?;
        let convert = |list: &[[VertexId; 2]]| -> Result<Vec<Edge>> {
            let mut seen = BTreeSet::new();
            list.iter()
                .map(|[a, b]| {
                    let (u, w) = (resolve(&index, a)?, resolve(&index, b)?);
                    if u == w {
                        return Err(Error::SelfLoop(u));
                    }
                    let e = Edge::new(u, w);
                    if !seen.insert(e) {
                        return Err(Error::Input(format!("edge {a}-{b} listed twice")));
                    }
                    Ok(e)
                })
                .collect()
        };
        let simple = convert(&self.simple_edges)?;
        let double = convert(&self.double_edges)?;
        Ok(LabeledConicGraph {
            graph: ConicGraph::new(ids.len(), simple, double)?,
            ids,
            dimension: self.dimension,
        })
    }

    pub fn from_conic_graph(
        cg: &ConicGraph,
        ids: &[VertexId],
        dimension: Option<usize>,
        suggested: Option<&DirectedGraph>,
    ) -> Result<Self> {
        if ids.len() != cg.n() {
            return Err(Error::VertexCountMismatch {
                left: ids.len(),
                right: cg.n(),
            });
        }
        let pair = |e: &Edge| [ids[e.lo()].clone(), ids[e.hi()].clone()];
        let numeric = ids == numeric_ids(cg.n()).as_slice();
        Ok(ConicGraphFile {
            n: Some(cg.n()),
            vertices: (!numeric).then(|| ids.to_vec()),
            dimension,
            simple_edges: cg.simple_edges().iter().map(pair).collect(),
            double_edges: cg.double_edges().iter().map(pair).collect(),
            suggested_arcs: suggested.map(|g| {
                g.arcs()
                    .iter()
                    .map(|a| [ids[a.tail].clone(), ids[a.head].clone()])
                    .collect()
            }),
        })
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline. Floats use the shortest decimal
/// form that reads back to the same double.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)?)?;
    Ok(())
}

/// `t,x,y,beta` rows.
pub fn samples_to_csv(samples: &[FlexSample]) -> String {
    let mut out = String::from("t,x,y,beta\n");
    for s in samples {
        writeln!(
            out,
            "{:?},{:?},{:?},{:?}",
            s.t, s.position[0], s.position[1], s.bias
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn framework_round_trip() {
        for fw in [
            fixtures::triangle_hyperbola(),
            fixtures::four_agents_rigid(),
            fixtures::line_flexible(),
        ] {
            let file = FrameworkFile::from_framework(&fw, &numeric_ids(fw.n())).unwrap();
            let text = to_json(&file).unwrap();
            let back: FrameworkFile = serde_json::from_str(&text).unwrap();
            assert_eq!(back, file);
            assert_eq!(back.to_framework().unwrap().framework, fw);
        }
    }

    #[test]
    fn integer_and_string_ids() {
        let text = r#"{"dimension": 1,
            "vertices": [{"id": 7, "position": [0.0], "bias": 0.5},
                         {"id": "b", "position": [1.0], "bias": 0.0}],
            "arcs": [[7, "b"]]}"#;
        let file: FrameworkFile = serde_json::from_str(text).unwrap();
        let lf = file.to_framework().unwrap();
        assert_eq!(lf.ids, vec![VertexId::from("7"), VertexId::from("b")]);
        assert_eq!(lf.framework.graph().arcs(), &[Arc::new(0, 1)]);
    }

    #[test]
    fn malformed_frameworks_are_rejected() {
        let bad = [
            r#"{"dimension": 2, "vertices": [{"id": "a", "position": [0.0], "bias": 0.0}], "arcs": []}"#,
            r#"{"dimension": 1, "vertices": [{"id": "a", "position": [0.0], "bias": 0.0},
                {"id": "a", "position": [1.0], "bias": 0.0}], "arcs": []}"#,
            r#"{"dimension": 1, "vertices": [{"id": "a", "position": [0.0], "bias": 0.0}], "arcs": [["a", "z"]]}"#,
            r#"{"dimension": 1, "vertices": [{"id": "a", "position": [0.0], "bias": 0.0},
                {"id": "b", "position": [0.0], "bias": 0.0}], "arcs": []}"#,
            r#"{"dimension": 1, "vertices": [{"id": "a", "position": [0.0], "bias": 0.0},
                {"id": "b", "position": [1.0], "bias": 0.0}], "arcs": [["a", "b"], ["a", "b"]]}"#,
        ];
        for text in bad {
            let file: FrameworkFile = serde_json::from_str(text).unwrap();
            assert!(file.to_framework().is_err(), "{text}");
        }
    }

    #[test]
    fn conic_graph_round_trip() {
        let cg = fixtures::k5_with_double();
        let file = ConicGraphFile::from_conic_graph(&cg, &numeric_ids(5), Some(2), None).unwrap();
        assert!(file.vertices.is_none());
        let back: ConicGraphFile = serde_json::from_str(&to_json(&file).unwrap()).unwrap();
        let parsed = back.to_conic_graph().unwrap();
        assert_eq!(parsed.graph, cg);
        assert_eq!(parsed.dimension, Some(2));
    }

    #[test]
    fn conic_graph_validation() {
        let overlap = r#"{"n": 3, "simple_edges": [[0, 1]], "double_edges": [[1, 0]]}"#;
        let f: ConicGraphFile = serde_json::from_str(overlap).unwrap();
        assert!(f.to_conic_graph().is_err());
        let looped = r#"{"vertices": ["a", "b"], "simple_edges": [["a", "a"]]}"#;
        let f: ConicGraphFile = serde_json::from_str(looped).unwrap();
        assert!(matches!(f.to_conic_graph(), Err(Error::SelfLoop(0))));
        let neither = r#"{"simple_edges": []}"#;
        let f: ConicGraphFile = serde_json::from_str(neither).unwrap();
        assert!(f.to_conic_graph().is_err());
    }

    #[test]
    fn csv_layout() {
        let s = FlexSample {
            t: 0.5,
            position: [1.0, -2.0],
            bias: 0.25,
        };
        assert_eq!(samples_to_csv(&[s]), "t,x,y,beta\n0.5,1.0,-2.0,0.25\n");
    }
}
