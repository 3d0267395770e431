//! Generic rigidity matroid oracle.
//!
//! Euclidean queries go through the pebble game in the plane and through
//! numeric rank at stored random configurations otherwise. Conic queries
//! are always numeric. Ranks are memoized per edge set.

use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::{orient, random_generic_configuration, Configuration};
use crate::graph::{ConicGraph, Edge};
use crate::laman::{laman_rank, PebbleGame};
use crate::numeric::{
    conic_matrix_for, edge_rows, euclidean_rigidity_matrix, numeric_rank, s_euclidean, seed_set,
    TolerancePolicy,
};

/// Default number of random configurations per numeric rank query.
pub const DEFAULT_TRIALS: usize = 5;
pub const DEFAULT_BASE_SEED: u64 = 42;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Pebble,
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum RankKey {
    Euclidean(Vec<Edge>),
    Conic(Vec<Edge>, Vec<Edge>),
}

#[derive(Debug)]
pub struct IndependenceOracle {
    d: usize,
    n: usize,
    backend: Backend,
    seeds: Vec<u64>,
    policy: TolerancePolicy,
    configs: Vec<Configuration>,
    cache: Mutex<HashMap<RankKey, usize>>,
}

impl IndependenceOracle {
    /// Pebble backend for `d = 2`, numeric otherwise.
    pub fn new(n: usize, d: usize, seeds: Vec<u64>, policy: TolerancePolicy) -> Result<Self> {
        let backend = if d == 2 {
            Backend::Pebble
        } else {
            Backend::Numeric
        };
        Self::with_backend(n, d, backend, seeds, policy)
    }

    pub fn with_backend(
        n: usize,
        d: usize,
        backend: Backend,
        seeds: Vec<u64>,
        policy: TolerancePolicy,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if backend == Backend::Pebble && d != 2 {
            return Err(Error::WrongDimension {
                expected: "2 for the pebble backend".into(),
                found: d,
            });
        }
        if seeds.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one seed is required".into(),
            ));
        }
        let configs = seeds
            .iter()
            .map(|&s| random_generic_configuration(n, d, s))
            .collect();
        Ok(IndependenceOracle {
            d,
            n,
            backend,
            seeds,
            policy,
            configs,
            cache: Mutex::new(HashMap::new()),
        })
    }

    /// Default seeds `42..47` and tolerance.
    pub fn standard(n: usize, d: usize) -> Result<Self> {
        Self::new(
            n,
            d,
            seed_set(DEFAULT_BASE_SEED, DEFAULT_TRIALS),
            TolerancePolicy::default(),
        )
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    pub fn policy(&self) -> TolerancePolicy {
        self.policy
    }

    /// `S_e(n, d)`, the size of every basis.
    pub fn full_rank(&self) -> usize {
        s_euclidean(self.n, self.d)
    }

    fn check_edges<'a>(&self, edges: impl IntoIterator<Item = &'a Edge>) -> Result<()> {
        for e in edges {
            if e.hi() >= self.n {
                return Err(Error::VertexOutOfRange {
                    vertex: e.hi(),
                    n: self.n,
                });
            }
            if e.lo() == e.hi() {
                return Err(Error::SelfLoop(e.lo()));
            }
        }
        Ok(())
    }

    fn cached(&self, key: RankKey, compute: impl FnOnce() -> Result<usize>) -> Result<usize> {
        if let Some(&r) = self.cache.lock().expect("rank cache poisoned").get(&key) {
            return Ok(r);
        }
        let r = compute()?;
        self.cache
            .lock()
            .expect("rank cache poisoned")
            .insert(key, r);
        Ok(r)
    }

    /// Rank of the edge set in the generic `d`-dimensional rigidity matroid.
    pub fn euclidean_rank(&self, edges: &[Edge]) -> Result<usize> {
        self.check_edges(edges)?;
        let set: BTreeSet<Edge> = edges.iter().copied().collect();
        let key: Vec<Edge> = set.into_iter().collect();
        match self.backend {
            Backend::Pebble => Ok(laman_rank(self.n, &key)),
            Backend::Numeric => {
                let rows = edge_rows(&key);
                self.cached(RankKey::Euclidean(key), || {
                    let mut best = 0;
                    for p in &self.configs {
                        let m = euclidean_rigidity_matrix(&rows, p)?.matrix;
                        best = best.max(numeric_rank(&m, &self.policy)?.rank);
                    }
                    Ok(best)
                })
            }
        }
    }

    pub fn is_independent_euclidean(&self, edges: &[Edge]) -> Result<bool> {
        let distinct: BTreeSet<Edge> = edges.iter().copied().collect();
        if distinct.len() != edges.len() {
            return Ok(false);
        }
        Ok(self.euclidean_rank(edges)? == edges.len())
    }

    /// Generic rank of the conic rigidity matrix of an orientation of `cg`.
    pub fn conic_rank(&self, cg: &ConicGraph) -> Result<usize> {
        if cg.n() != self.n {
            return Err(Error::VertexCountMismatch {
                left: cg.n(),
                right: self.n,
            });
        }
        let key = RankKey::Conic(
            cg.simple_edges().iter().copied().collect(),
            cg.double_edges().iter().copied().collect(),
        );
        self.cached(key, || {
            let g = orient(cg);
            let mut best = 0;
            for p in &self.configs {
                let m = conic_matrix_for(&g, p)?.matrix;
                best = best.max(numeric_rank(&m, &self.policy)?.rank);
            }
            Ok(best)
        })
    }

    pub fn is_independent_conic(&self, cg: &ConicGraph) -> Result<bool> {
        if self.d < 2 {
            return Err(Error::WrongDimension {
                expected: "at least 2".into(),
                found: self.d,
            });
        }
        Ok(self.conic_rank(cg)? == cg.edge_count())
    }

    /// Greedy matroid extension of `seed` by `pool` edges scanned in
    /// lexicographic order, stopping at `S_e(n, d)` edges.
    pub fn extend_to_minimally_rigid(
        &self,
        seed: &[Edge],
        pool: &[Edge],
    ) -> Result<BTreeSet<Edge>> {
        self.check_edges(seed.iter().chain(pool))?;
        if !self.is_independent_euclidean(seed)? {
            return Err(Error::DependentSeed);
        }
        let required = self.full_rank();
        let mut basis: BTreeSet<Edge> = seed.iter().copied().collect();
        let candidates: BTreeSet<Edge> = pool
            .iter()
            .copied()
            .filter(|e| !basis.contains(e))
            .collect();
        match self.backend {
            Backend::Pebble => {
                let mut game = PebbleGame::new(self.n);
                for &e in &basis {
                    game.try_insert(e);
                }
                for e in candidates {
                    if basis.len() == required {
                        break;
                    }
                    if game.try_insert(e) {
                        basis.insert(e);
                    }
                }
            }
            Backend::Numeric => {
                for e in candidates {
                    if basis.len() == required {
                        break;
                    }
                    let mut trial: Vec<Edge> = basis.iter().copied().collect();
                    trial.push(e);
                    if self.is_independent_euclidean(&trial)? {
                        basis.insert(e);
                    }
                }
            }
        }
        if basis.len() < required {
            return Err(Error::InsufficientRank {
                achieved: basis.len(),
                required,
            });
        }
        Ok(basis)
    }

    fn require_basis(&self, basis: &BTreeSet<Edge>) -> Result<()> {
        let edges: Vec<Edge> = basis.iter().copied().collect();
        let rank = self.euclidean_rank(&edges)?;
        let required = self.full_rank();
        if rank != edges.len() || rank != required {
            return Err(Error::NotMinimallyRigid {
                rank,
                edges: edges.len(),
                required,
            });
        }
        Ok(())
    }

    /// Edges of `basis` lying on the unique circuit of `basis + uv`.
    pub fn fundamental_circuit(&self, basis: &BTreeSet<Edge>, uv: Edge) -> Result<BTreeSet<Edge>> {
        self.check_edges([&uv])?;
        if basis.contains(&uv) {
            return Err(Error::EdgeInBasis(uv));
        }
        self.require_basis(basis)?;
        let mut circuit = BTreeSet::new();
        for &e in basis {
            let trial: Vec<Edge> = basis
                .iter()
                .copied()
                .filter(|&f| f != e)
                .chain([uv])
                .collect();
            if self.is_independent_euclidean(&trial)? {
                circuit.insert(e);
            }
        }
        Ok(circuit)
    }

    /// `(basis − wz) + uv`, valid when `wz` lies on the circuit of `uv`.
    pub fn swap(&self, basis: &BTreeSet<Edge>, uv: Edge, wz: Edge) -> Result<BTreeSet<Edge>> {
        if !basis.contains(&wz) {
            return Err(Error::EdgeNotInBasis(wz));
        }
        let circuit = self.fundamental_circuit(basis, uv)?;
        if !circuit.contains(&wz) {
            return Err(Error::NotInCircuit { uv, wz });
        }
        let mut next = basis.clone();
        next.remove(&wz);
        next.insert(uv);
        let edges: Vec<Edge> = next.iter().copied().collect();
        if !self.is_independent_euclidean(&edges)? || edges.len() != self.full_rank() {
            return Err(Error::Invariant(format!(
                "swapping {wz} for {uv} did not yield a basis"
            )));
        }
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edges(pairs: &[(usize, usize)]) -> Vec<Edge> {
        pairs.iter().map(|&(u, w)| Edge::new(u, w)).collect()
    }

    fn k(n: usize) -> Vec<Edge> {
        let mut out = Vec::new();
        for u in 0..n {
            for w in u + 1..n {
                out.push(Edge::new(u, w));
            }
        }
        out
    }

    fn numeric(n: usize, d: usize) -> IndependenceOracle {
        IndependenceOracle::with_backend(
            n,
            d,
            Backend::Numeric,
            seed_set(DEFAULT_BASE_SEED, DEFAULT_TRIALS),
            TolerancePolicy::default(),
        )
        .unwrap()
    }

    #[test]
    fn euclidean_independence_examples() {
        let planar = IndependenceOracle::standard(4, 2).unwrap();
        assert!(planar.is_independent_euclidean(&edges(&[(0, 1)])).unwrap());
        assert!(!planar.is_independent_euclidean(&k(4)).unwrap());
        assert!(!numeric(4, 2).is_independent_euclidean(&k(4)).unwrap());
        let spatial = IndependenceOracle::standard(4, 3).unwrap();
        assert_eq!(spatial.backend(), Backend::Numeric);
        assert!(spatial.is_independent_euclidean(&k(4)).unwrap());
    }

    #[test]
    fn pebble_backend_needs_the_plane() {
        assert!(IndependenceOracle::with_backend(
            4,
            3,
            Backend::Pebble,
            vec![1],
            TolerancePolicy::default()
        )
        .is_err());
    }

    #[test]
    fn conic_independence() {
        let o = IndependenceOracle::standard(4, 2).unwrap();
        assert!(o.is_independent_conic(&ConicGraph::empty(4)).unwrap());
        // K4 with two double edges: 8 = S(4,2)
        let cg = ConicGraph::new(
            4,
            edges(&[(0, 2), (0, 3), (1, 2), (1, 3)]),
            edges(&[(0, 1), (2, 3)]),
        )
        .unwrap();
        assert_eq!(cg.edge_count(), 8);
        assert!(o.is_independent_conic(&cg).unwrap());
        let line = IndependenceOracle::standard(3, 1).unwrap();
        assert!(line.is_independent_conic(&ConicGraph::empty(3)).is_err());
    }

    #[test]
    fn dependent_double_edges_make_conic_graph_dependent() {
        // double K4 in the plane: doubles alone are Euclidean-dependent
        let o = IndependenceOracle::standard(4, 2).unwrap();
        let cg = ConicGraph::new(4, Vec::new(), k(4)).unwrap();
        assert!(!o.is_independent_conic(&cg).unwrap());
    }

    #[test]
    fn extension_examples() {
        let o = IndependenceOracle::standard(4, 2).unwrap();
        let basis = o.extend_to_minimally_rigid(&[], &k(4)).unwrap();
        assert_eq!(
            basis,
            edges(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
                .into_iter()
                .collect()
        );
        let tri = edges(&[(0, 1), (0, 2), (1, 2)]);
        let star = edges(&[(0, 3), (1, 3), (2, 3)]);
        let basis = o.extend_to_minimally_rigid(&tri, &star).unwrap();
        assert_eq!(
            basis,
            edges(&[(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)])
                .into_iter()
                .collect()
        );
        let full = o
            .extend_to_minimally_rigid(&basis.iter().copied().collect::<Vec<_>>(), &k(4))
            .unwrap();
        assert_eq!(full, basis);
        assert!(matches!(
            o.extend_to_minimally_rigid(&k(4), &[]),
            Err(Error::DependentSeed)
        ));
        assert!(matches!(
            o.extend_to_minimally_rigid(&[], &tri),
            Err(Error::InsufficientRank {
                achieved: 3,
                required: 5
            })
        ));
    }

    #[test]
    fn numeric_extension_matches_pebble_extension() {
        let pool = k(6);
        let a = IndependenceOracle::standard(6, 2)
            .unwrap()
            .extend_to_minimally_rigid(&[], &pool)
            .unwrap();
        let b = numeric(6, 2).extend_to_minimally_rigid(&[], &pool).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn circuit_and_swap() {
        let o = IndependenceOracle::standard(4, 2).unwrap();
        let basis: BTreeSet<Edge> = edges(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
            .into_iter()
            .collect();
        let uv = Edge::new(2, 3);
        let circuit = o.fundamental_circuit(&basis, uv).unwrap();
        assert_eq!(circuit, basis);
        assert!(matches!(
            o.fundamental_circuit(&basis, Edge::new(0, 1)),
            Err(Error::EdgeInBasis(_))
        ));
        let swapped = o.swap(&basis, uv, Edge::new(0, 1)).unwrap();
        let back = o.swap(&swapped, Edge::new(0, 1), uv).unwrap();
        assert_eq!(back, basis);

        // triangle plus pendant path: the circuit of 12 is the triangle-free part
        let o5 = IndependenceOracle::standard(5, 2).unwrap();
        let b5: BTreeSet<Edge> = edges(&[(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 4), (3, 4)])
            .into_iter()
            .collect();
        let c = o5.fundamental_circuit(&b5, Edge::new(0, 4)).unwrap();
        for &e in &c {
            let mut t = b5.clone();
            t.remove(&e);
            t.insert(Edge::new(0, 4));
            assert!(o5
                .is_independent_euclidean(&t.into_iter().collect::<Vec<_>>())
                .unwrap());
        }
        let not_in: Vec<Edge> = b5.difference(&c).copied().collect();
        for e in not_in {
            assert!(matches!(
                o5.swap(&b5, Edge::new(0, 4), e),
                Err(Error::NotInCircuit { .. })
            ));
        }
    }

    #[test]
    fn circuit_requires_a_basis() {
        let o = IndependenceOracle::standard(4, 2).unwrap();
        let not_basis: BTreeSet<Edge> = edges(&[(0, 1), (1, 2)]).into_iter().collect();
        assert!(matches!(
            o.fundamental_circuit(&not_basis, Edge::new(2, 3)),
            Err(Error::NotMinimallyRigid { .. })
        ));
    }
}
