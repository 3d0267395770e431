//! Constructive rigidity test for conic graphs in dimension `d ≥ 2`.
//!
//! A conic graph is rigid iff it splits into a rigid Euclidean graph `G`
//! and a connected Euclidean graph `H`. The search starts from a greedy
//! split with `G` minimally rigid and repairs `H` one component at a time
//! by chains of basis exchanges between `G` and `H`.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::{is_decomposition_of, orient, Decomposition};
use crate::graph::{
    component_count, component_of, cycle_vertices, find_cycle, spanning_forest, ConicGraph, Edge,
    EuclideanGraph,
};
use crate::matroid::IndependenceOracle;
use crate::numeric::{generic_conic_rank, s_conic};

/// Edge sets of a decomposition as sorted lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub g: Vec<Edge>,
    pub h: Vec<Edge>,
}

impl Snapshot {
    fn of(g: &EuclideanGraph, h: &EuclideanGraph) -> Self {
        Snapshot {
            g: g.edge_vec(),
            h: h.edge_vec(),
        }
    }
}

/// One exchange candidate of a chain: `uv` leaves `H` for `G`, `wz` leaves
/// `G` for `H`, with `u, v, w ∈ U` and `z ∉ U`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapPair {
    pub step: usize,
    pub uv: Edge,
    pub wz: Edge,
    pub w: usize,
    pub z: usize,
    pub u_set: Vec<usize>,
    /// Generating edges of `uv` in `G`.
    pub circuit: Vec<Edge>,
}

/// One repair round: merges two components of `H`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainRound {
    pub cycle: Vec<Edge>,
    pub chain: Vec<SwapPair>,
    /// Chain indices in the order the exchanges were applied.
    pub sigma: Vec<usize>,
    /// Decomposition after each applied exchange.
    pub after: Vec<Snapshot>,
    pub components_before: usize,
    pub components_after: usize,
}

/// Record of a completion by matroid-partition augmenting paths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fallback {
    /// Index of the round whose chain failed.
    pub round: usize,
    pub reason: String,
    pub failed_chain: Vec<SwapPair>,
    /// Edges moved along each augmenting path, starting edge first.
    pub paths: Vec<Vec<Edge>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionTrace {
    pub n: usize,
    pub d: usize,
    /// Edge copies set aside before the search and re-attached at the end.
    pub surplus: Vec<Edge>,
    pub initial: Option<Snapshot>,
    pub rounds: Vec<ChainRound>,
    /// Set when an exchange chain broke the rigidity of `G`; the remaining
    /// components were then merged by augmenting paths.
    pub fallback: Option<Fallback>,
    #[serde(rename = "final")]
    pub final_decomposition: Option<Snapshot>,
    pub verdict: bool,
    /// Generic numeric rank of an orientation, used as a cross-check.
    pub numeric_rank: usize,
    pub required: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecomposeOutcome {
    pub decomposition: Option<Decomposition>,
    pub trace: DecompositionTrace,
}

/// Result of applying a chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainApplication {
    pub g: EuclideanGraph,
    pub h: EuclideanGraph,
    pub sigma: Vec<usize>,
    pub after: Vec<Snapshot>,
}

fn require_planar_or_higher(oracle: &IndependenceOracle) -> Result<()> {
    if oracle.d() < 2 {
        return Err(Error::WrongDimension {
            expected: "at least 2".into(),
            found: oracle.d(),
        });
    }
    Ok(())
}

fn require_n(cg_n: usize, oracle: &IndependenceOracle) -> Result<()> {
    if cg_n != oracle.n() {
        return Err(Error::VertexCountMismatch {
            left: cg_n,
            right: oracle.n(),
        });
    }
    Ok(())
}

/// Greedy split with `G` minimally rigid: the double edges are completed
/// to a basis with simple edges and everything else goes to `H`.
/// `None` when no such split exists.
pub fn initial_decomposition(
    cg: &ConicGraph,
    oracle: &IndependenceOracle,
) -> Result<Option<Decomposition>> {
    require_planar_or_higher(oracle)?;
    require_n(cg.n(), oracle)?;
    let doubles: Vec<Edge> = cg.double_edges().iter().copied().collect();
    let simples: Vec<Edge> = cg.simple_edges().iter().copied().collect();
    let basis = match oracle.extend_to_minimally_rigid(&doubles, &simples) {
        Ok(b) => b,
        Err(Error::DependentSeed | Error::InsufficientRank { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let h_edges: Vec<Edge> = doubles
        .iter()
        .copied()
        .chain(simples.iter().copied().filter(|e| !basis.contains(e)))
        .collect();
    let g = EuclideanGraph::new(cg.n(), basis)?;
    let h = EuclideanGraph::new(cg.n(), h_edges)?;
    Ok(Some(Decomposition::new(g, h)?))
}

fn without(h: &EuclideanGraph, e: Edge) -> EuclideanGraph {
    let mut out = h.clone();
    out.remove(e);
    out
}

/// Whether `e` lies on a cycle of `h`.
fn on_cycle(h: &EuclideanGraph, e: Edge) -> bool {
    h.contains(e) && component_of(&without(h, e), e.lo()).contains(&e.hi())
}

/// Builds the exchange chain for one repair round, shrinking `U` from the
/// component of `cycle` in `H` until the chosen `H` edge lies on a cycle.
pub fn select_swap_chain(
    g: &EuclideanGraph,
    h: &EuclideanGraph,
    cycle: &[Edge],
    oracle: &IndependenceOracle,
) -> Result<Vec<SwapPair>> {
    let c_vertices = cycle_vertices(cycle);
    let anchor = *c_vertices
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty cycle".into()))?;
    if cycle.iter().any(|e| !h.contains(*e)) {
        return Err(Error::InvalidArgument("cycle is not contained in H".into()));
    }
    let basis: BTreeSet<Edge> = g.edges().clone();
    let mut u_set = component_of(h, anchor);
    let mut chain = Vec::new();
    loop {
        let h_u = h.restricted_to(&u_set);
        if component_of(&h_u, anchor) != u_set || find_cycle(&h_u).is_none() {
            return Err(Error::Invariant(format!(
                "H restricted to {u_set:?} is not connected with a cycle"
            )));
        }
        if u_set.len() == g.n() {
            return Err(Error::Invariant(
                "exchange set U covers every vertex".into(),
            ));
        }
        let mut found = None;
        for &uv in h_u.edges() {
            if g.contains(uv) {
                continue;
            }
            let circuit = oracle.fundamental_circuit(&basis, uv)?;
            let exit = circuit.iter().copied().find_map(|wz| {
                let (a, b) = wz.endpoints();
                match (u_set.contains(&a), u_set.contains(&b)) {
                    (true, false) => Some((wz, a, b)),
                    (false, true) => Some((wz, b, a)),
                    _ => None,
                }
            });
            if let Some((wz, w, z)) = exit {
                found = Some((uv, wz, w, z, circuit));
                break;
            }
        }
        let Some((uv, wz, w, z, circuit)) = found else {
            return Err(Error::Invariant(format!(
                "no exchangeable pair leaves U = {u_set:?}"
            )));
        };
        if h.contains(wz) {
            return Err(Error::Invariant(format!("{wz} already belongs to H")));
        }
        chain.push(SwapPair {
            step: chain.len(),
            uv,
            wz,
            w,
            z,
            u_set: u_set.iter().copied().collect(),
            circuit: circuit.into_iter().collect(),
        });
        if on_cycle(h, uv) {
            return Ok(chain);
        }
        let next = component_of(&without(&h_u, uv), anchor);
        if next.len() >= u_set.len() || !c_vertices.is_subset(&next) {
            return Err(Error::Invariant(format!(
                "exchange sets stopped shrinking at {u_set:?}"
            )));
        }
        u_set = next;
    }
}

/// Applies the chain from its last pair backwards, each time jumping to the
/// deepest set still containing the previous `z`, until `z` leaves `U₀`.
/// Every exchange uses the pair exactly as selected against the original `G`.
pub fn apply_swap_chain(
    g: &EuclideanGraph,
    h: &EuclideanGraph,
    chain: &[SwapPair],
    oracle: &IndependenceOracle,
) -> Result<ChainApplication> {
    apply_chain(g, h, chain, oracle)
}

fn apply_chain(
    g: &EuclideanGraph,
    h: &EuclideanGraph,
    chain: &[SwapPair],
    oracle: &IndependenceOracle,
) -> Result<ChainApplication> {
    let first = chain
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty swap chain".into()))?;
    let u0: BTreeSet<usize> = first.u_set.iter().copied().collect();
    let components_before = component_count(h);
    let mut g = g.clone();
    let mut h = h.clone();
    let mut sigma = Vec::new();
    let mut after = Vec::new();
    let mut i = chain.len() - 1;
    loop {
        let pair = &chain[i];
        sigma.push(i);
        let (wz, z) = (pair.wz, pair.z);
        if h.contains(wz) || !g.remove(wz) || !h.remove(pair.uv) {
            return Err(Error::Invariant(format!(
                "pair {} / {wz} is no longer exchangeable",
                pair.uv
            )));
        }
        g.insert(pair.uv)?;
        h.insert(wz)?;
        let edges = g.edge_vec();
        if edges.len() != oracle.full_rank() || !oracle.is_independent_euclidean(&edges)? {
            return Err(Error::Invariant(format!(
                "exchanging {wz} for {} broke minimal rigidity of G",
                pair.uv
            )));
        }
        after.push(Snapshot::of(&g, &h));
        if !u0.contains(&z) {
            break;
        }
        let next = chain
            .iter()
            .rposition(|p| p.u_set.binary_search(&z).is_ok())
            .expect("z lies in U₀");
        if next >= i {
            return Err(Error::Invariant("exchange order did not decrease".into()));
        }
        i = next;
    }
    let components_after = component_count(&h);
    if components_after + 1 != components_before {
        return Err(Error::Invariant(format!(
            "H went from {components_before} to {components_after} components"
        )));
    }
    Ok(ChainApplication { g, h, sigma, after })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Part {
    Basis,
    Forest,
    Spare,
}

/// Path of forest elements joining `a` and `b`, or `None` if they lie in
/// different trees.
fn forest_path(elems: &[Edge], part: &[Part], n: usize, a: usize, b: usize) -> Option<Vec<usize>> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, e) in elems.iter().enumerate() {
        if part[i] == Part::Forest {
            adj[e.lo()].push((e.hi(), i));
            adj[e.hi()].push((e.lo(), i));
        }
    }
    let mut via = vec![None; n];
    let mut seen = vec![false; n];
    seen[a] = true;
    let mut queue = VecDeque::from([a]);
    while let Some(v) = queue.pop_front() {
        if v == b {
            let mut path = Vec::new();
            let mut x = b;
            while let Some((prev, i)) = via[x] {
                path.push(i);
                x = prev;
            }
            return Some(path);
        }
        for &(w, i) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                via[w] = Some((v, i));
                queue.push_back(w);
            }
        }
    }
    None
}

/// Completes a split with `G` minimally rigid into one with `H` connected
/// by matroid-partition augmenting paths between the rigidity matroid and
/// the graphic matroid. Each shortest path moves one spare `H` edge into
/// the spanning forest of `H`.
fn complete_by_augmentation(
    g: &EuclideanGraph,
    h: &EuclideanGraph,
    oracle: &IndependenceOracle,
) -> Result<(EuclideanGraph, EuclideanGraph, Vec<Vec<Edge>>)> {
    let n = g.n();
    let forest = spanning_forest(h);
    let mut elems: Vec<Edge> = Vec::new();
    let mut part: Vec<Part> = Vec::new();
    for &e in g.edges() {
        elems.push(e);
        part.push(Part::Basis);
    }
    for &e in h.edges() {
        elems.push(e);
        part.push(if forest.contains(e) {
            Part::Forest
        } else {
            Part::Spare
        });
    }
    let mut paths = Vec::new();
    while part.contains(&Part::Spare) {
        let mut augmented = false;
        let spares: Vec<usize> = (0..elems.len())
            .filter(|&i| part[i] == Part::Spare)
            .collect();
        for x in spares {
            if let Some(path) = augmenting_path(&elems, &part, n, x, oracle)? {
                let old: Vec<Part> = path.iter().map(|&i| part[i]).collect();
                for j in 0..path.len() - 1 {
                    part[path[j]] = old[j + 1];
                }
                part[*path.last().expect("non-empty path")] = Part::Forest;
                paths.push(path.iter().map(|&i| elems[i]).collect());
                augmented = true;
                break;
            }
        }
        if !augmented {
            return Err(Error::Invariant("no augmenting path connects H".into()));
        }
    }
    let pick = |p: Part| -> Result<EuclideanGraph> {
        let chosen: Vec<Edge> = (0..elems.len())
            .filter(|&i| part[i] == p)
            .map(|i| elems[i])
            .collect();
        let count = chosen.len();
        let graph = EuclideanGraph::new(n, chosen)?;
        if graph.edge_count() != count {
            return Err(Error::Invariant(
                "augmentation put parallel copies together".into(),
            ));
        }
        Ok(graph)
    };
    let (g2, h2) = (pick(Part::Basis)?, pick(Part::Forest)?);
    let basis = g2.edge_vec();
    if basis.len() != oracle.full_rank() || !oracle.is_independent_euclidean(&basis)? {
        return Err(Error::Invariant(
            "augmentation broke minimal rigidity of G".into(),
        ));
    }
    if !h2.is_connected() {
        return Err(Error::Invariant("augmentation left H disconnected".into()));
    }
    Ok((g2, h2, paths))
}

/// Shortest path in the exchange graph from spare element `x` to an element
/// that extends the forest.
fn augmenting_path(
    elems: &[Edge],
    part: &[Part],
    n: usize,
    x: usize,
    oracle: &IndependenceOracle,
) -> Result<Option<Vec<usize>>> {
    let basis: BTreeSet<Edge> = (0..elems.len())
        .filter(|&i| part[i] == Part::Basis)
        .map(|i| elems[i])
        .collect();
    let parallel_in = |y: usize, p: Part| {
        (0..elems.len()).find(|&i| i != y && part[i] == p && elems[i] == elems[y])
    };
    let mut pred: Vec<Option<usize>> = vec![None; elems.len()];
    let mut seen = vec![false; elems.len()];
    seen[x] = true;
    let mut queue = VecDeque::from([x]);
    while let Some(y) = queue.pop_front() {
        let mut next: Vec<usize> = Vec::new();
        if part[y] != Part::Forest {
            let (a, b) = elems[y].endpoints();
            if let Some(twin) = parallel_in(y, Part::Forest) {
                next.push(twin);
            } else if let Some(cycle) = forest_path(elems, part, n, a, b) {
                next.extend(cycle);
            } else {
                let mut path = vec![y];
                let mut cur = y;
                while let Some(p) = pred[cur] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Ok(Some(path));
            }
        }
        if part[y] != Part::Basis {
            if let Some(twin) = parallel_in(y, Part::Basis) {
                next.push(twin);
            } else {
                for e in oracle.fundamental_circuit(&basis, elems[y])? {
                    next.extend(
                        (0..elems.len()).filter(|&i| part[i] == Part::Basis && elems[i] == e),
                    );
                }
            }
        }
        next.sort_unstable();
        for w in next {
            if !seen[w] {
                seen[w] = true;
                pred[w] = Some(y);
                queue.push_back(w);
            }
        }
    }
    Ok(None)
}

/// Greedy maximal conic-independent subgraph over edge copies in
/// lexicographic order, plus the copies it left out.
fn extract_independent_core(
    cg: &ConicGraph,
    oracle: &IndependenceOracle,
) -> Result<(ConicGraph, Vec<Edge>)> {
    let target = s_conic(cg.n(), oracle.d());
    let mut core = ConicGraph::empty(cg.n());
    let mut surplus = Vec::new();
    for e in cg.support() {
        for _ in 0..cg.multiplicity(e) {
            if core.edge_count() == target {
                surplus.push(e);
                continue;
            }
            let mut trial = core.clone();
            trial.add_copy(e)?;
            if oracle.conic_rank(&trial)? == trial.edge_count() {
                core = trial;
            } else {
                surplus.push(e);
            }
        }
    }
    Ok((core, surplus))
}

/// Searches for a decomposition with `G` rigid and `H` connected.
///
/// Fails with [`Error::VerdictMismatch`] if the answer disagrees with the
/// generic numeric rank of an orientation of `cg`.
pub fn decompose(cg: &ConicGraph, oracle: &IndependenceOracle) -> Result<DecomposeOutcome> {
    require_planar_or_higher(oracle)?;
    require_n(cg.n(), oracle)?;
    let n = cg.n();
    let required = s_conic(n, oracle.d());
    let numeric_rank =
        generic_conic_rank(&orient(cg), oracle.d(), oracle.seeds(), &oracle.policy())?.rank;
    let mut trace = DecompositionTrace {
        n,
        d: oracle.d(),
        surplus: Vec::new(),
        initial: None,
        rounds: Vec::new(),
        fallback: None,
        final_decomposition: None,
        verdict: false,
        numeric_rank,
        required,
    };

    let decomposition = if cg.edge_count() < required {
        None
    } else {
        search(cg, oracle, &mut trace)?
    };
    trace.verdict = decomposition.is_some();
    if let Some(dec) = &decomposition {
        trace.final_decomposition = Some(Snapshot::of(&dec.g, &dec.h));
    }
    if trace.verdict != (numeric_rank == required) {
        return Err(Error::VerdictMismatch {
            decomposition: trace.verdict,
            rank: numeric_rank,
            required,
            trace: Box::new(trace),
        });
    }
    Ok(DecomposeOutcome {
        decomposition,
        trace,
    })
}

fn search(
    cg: &ConicGraph,
    oracle: &IndependenceOracle,
    trace: &mut DecompositionTrace,
) -> Result<Option<Decomposition>> {
    let (core, surplus) = if oracle.is_independent_conic(cg)? {
        (cg.clone(), Vec::new())
    } else {
        extract_independent_core(cg, oracle)?
    };
    trace.surplus = surplus.clone();
    if core.edge_count() < trace.required {
        return Ok(None);
    }
    let Some(Decomposition { mut g, mut h }) = initial_decomposition(&core, oracle)? else {
        return Err(Error::Invariant(
            "minimally rigid conic graph admits no initial split".into(),
        ));
    };
    trace.initial = Some(Snapshot::of(&g, &h));

    while !h.is_connected() {
        let cycle = find_cycle(&h).ok_or_else(|| {
            Error::Invariant("disconnected H of a minimally rigid conic graph has no cycle".into())
        })?;
        let components_before = component_count(&h);
        let chain = select_swap_chain(&g, &h, &cycle, oracle)?;
        let applied = match apply_swap_chain(&g, &h, &chain, oracle) {
            Ok(a) => a,
            Err(Error::Invariant(reason)) => {
                log::warn!("exchange chain failed ({reason}); completing by augmenting paths");
                let (g2, h2, paths) = complete_by_augmentation(&g, &h, oracle)?;
                trace.fallback = Some(Fallback {
                    round: trace.rounds.len(),
                    reason,
                    failed_chain: chain,
                    paths,
                });
                g = g2;
                h = h2;
                break;
            }
            Err(e) => return Err(e),
        };
        g = applied.g;
        h = applied.h;
        log::debug!(
            "round {}: chain of {} pairs, order {:?}",
            trace.rounds.len(),
            chain.len(),
            applied.sigma
        );
        trace.rounds.push(ChainRound {
            cycle,
            chain,
            sigma: applied.sigma,
            after: applied.after,
            components_before,
            components_after: component_count(&h),
        });
    }

    for e in surplus {
        if !g.contains(e) {
            g.insert(e)?;
        } else {
            h.insert(e)?;
        }
    }
    let dec = Decomposition::new(g, h)?;
    if !is_decomposition_of(&dec, cg) {
        return Err(Error::Invariant(
            "final split does not reproduce the conic graph".into(),
        ));
    }
    Ok(Some(dec))
}

/// Rigidity of every generic `d`-dimensional framework over `cg`.
pub fn is_conic_graph_rigid(cg: &ConicGraph, oracle: &IndependenceOracle) -> Result<bool> {
    Ok(decompose(cg, oracle)?.decomposition.is_some())
}
