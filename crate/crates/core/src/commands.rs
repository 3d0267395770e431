//! Command implementations behind the binary. Each returns the text meant
//! for stdout and the process exit code.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decompose::decompose;
use crate::error::{Error, Result};
use crate::fixtures;
use crate::flex::{
    build_flex_curve, locate_second_intersection, max_measurement_drift, sample_flex, sample_range,
};
use crate::framework::{orient, random_generic_configuration, ConicFramework};
use crate::graph::{
    spanning_forest, Arc, ConicGraph, DirectedGraph, Edge, EuclideanGraph, UnionFind,
};
use crate::io::{
    numeric_ids, read_json, samples_to_csv, to_json, ConicGraphFile, FrameworkFile, VertexId,
};
use crate::matroid::IndependenceOracle;
use crate::numeric::{
    conic_rigidity_matrix, generic_conic_rank, is_infinitesimally_rigid, nontrivial_flex,
    numeric_rank, s_conic, s_euclidean, seed_set, TolerancePolicy, DEFAULT_REL_TOL,
};
use crate::unidim::{flex_witness_1d, is_rigid_1d};

pub const EXIT_RIGID: i32 = 0;
pub const EXIT_FLEXIBLE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Global knobs shared by every command.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub policy: TolerancePolicy,
    pub trials: usize,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            policy: TolerancePolicy {
                rel_tol: DEFAULT_REL_TOL,
            },
            trials: 5,
            seed: 42,
        }
    }
}

impl Settings {
    pub fn seeds(&self) -> Vec<u64> {
        seed_set(self.seed, self.trials.max(1))
    }

    fn oracle(&self, n: usize, d: usize) -> Result<IndependenceOracle> {
        IndependenceOracle::new(n, d, self.seeds(), self.policy)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub code: i32,
}

impl Output {
    fn verdict(stdout: String, rigid: bool) -> Self {
        Output {
            stdout,
            code: if rigid { EXIT_RIGID } else { EXIT_FLEXIBLE },
        }
    }

    fn ok(stdout: String) -> Self {
        Output { stdout, code: 0 }
    }
}

fn fmt_component(ids: &[VertexId], comp: &[usize]) -> String {
    let names: Vec<&str> = comp.iter().map(|&u| ids[u].0.as_str()).collect();
    format!("{{{}}}", names.join(","))
}

fn fmt_components(ids: &[VertexId], comps: &[Vec<usize>]) -> String {
    comps
        .iter()
        .map(|c| fmt_component(ids, c))
        .collect::<Vec<_>>()
        .join(" ")
}

fn fmt_edges(ids: &[VertexId], edges: &[Edge]) -> String {
    edges
        .iter()
        .map(|e| format!("{}-{}", ids[e.lo()], ids[e.hi()]))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn cmd_check(path: &Path, settings: &Settings) -> Result<Output> {
    let file: FrameworkFile = read_json(path)?;
    let labeled = file.to_framework()?;
    check_framework(&labeled.framework, &labeled.ids, settings)
}

pub fn check_framework(
    fw: &ConicFramework,
    ids: &[VertexId],
    settings: &Settings,
) -> Result<Output> {
    let (n, d) = (fw.n(), fw.d());
    let required = s_conic(n, d);
    let mut out = String::new();
    if d == 1 {
        let verdict = is_rigid_1d(fw)?;
        let rank = numeric_rank(&conic_rigidity_matrix(fw)?.matrix, &settings.policy)?.rank;
        if verdict.rigid {
            writeln!(out, "RIGID: G+ and G- connected").unwrap();
        } else {
            let mut parts = Vec::new();
            if verdict.decreasing_components.len() > 1 {
                parts.push(format!(
                    "G- disconnected, components {}",
                    fmt_components(ids, &verdict.decreasing_components)
                ));
            }
            if verdict.increasing_components.len() > 1 {
                parts.push(format!(
                    "G+ disconnected, components {}",
                    fmt_components(ids, &verdict.increasing_components)
                ));
            }
            writeln!(out, "FLEXIBLE: {}", parts.join("; ")).unwrap();
            if let Some(q) = flex_witness_1d(fw)? {
                let moving: Vec<usize> = (0..n).filter(|&u| q[u] != 0.0).collect();
                writeln!(
                    out,
                    "witness: agents {} move with unit velocity, bias rate {}",
                    fmt_component(ids, &moving),
                    q[n + moving[0]]
                )
                .unwrap();
            }
        }
        if !verdict.split.null_arcs.is_empty() {
            writeln!(out, "null arcs: {}", verdict.split.null_arcs.len()).unwrap();
        }
        writeln!(
            out,
            "matrix rank {rank} / S({n},1)={required} (combinatorial verdict is authoritative)"
        )
        .unwrap();
        return Ok(Output::verdict(out, verdict.rigid));
    }

    let verdict = is_infinitesimally_rigid(fw, &settings.policy)?;
    let rank = verdict.report.rank;
    let word = if verdict.rigid { "RIGID" } else { "FLEXIBLE" };
    writeln!(out, "{word}, rank {rank} / S({n},{d})={required}").unwrap();
    writeln!(
        out,
        "tolerance {:.3e}, gap ratio {:.3e}{}",
        verdict.report.tolerance_used,
        verdict.report.gap_ratio,
        if verdict.report.ill_conditioned {
            ", ILL-CONDITIONED"
        } else {
            ""
        }
    )
    .unwrap();
    let generic = generic_conic_rank(fw.graph(), d, &settings.seeds(), &settings.policy)?;
    writeln!(
        out,
        "generic rank of the graph: {} over {} random configurations",
        generic.rank, generic.trials
    )
    .unwrap();
    if !verdict.rigid {
        if let Some(q) = nontrivial_flex(fw, &settings.policy)? {
            let mut speeds: Vec<(usize, f64)> = (0..n)
                .map(|u| {
                    let v: f64 =
                        (0..d).map(|i| q[d * u + i].powi(2)).sum::<f64>() + q[d * n + u].powi(2);
                    (u, v.sqrt())
                })
                .collect();
            speeds.sort_by(|a, b| b.1.total_cmp(&a.1));
            let summary: Vec<String> = speeds
                .iter()
                .filter(|(_, s)| *s > 1e-9)
                .map(|(u, s)| format!("{}:{:.3}", ids[*u], s))
                .collect();
            writeln!(out, "flex direction (agent:speed): {}", summary.join(" ")).unwrap();
        }
    }
    Ok(Output::verdict(out, verdict.rigid))
}

pub fn cmd_decompose(
    path: &Path,
    d: Option<usize>,
    trace: Option<&Path>,
    settings: &Settings,
) -> Result<Output> {
    let file: ConicGraphFile = read_json(path)?;
    let labeled = file.to_conic_graph()?;
    let d = d
        .or(labeled.dimension)
        .ok_or_else(|| Error::Input("dimension missing: pass --d".into()))?;
    decompose_graph(&labeled.graph, &labeled.ids, d, trace, settings)
}

pub fn decompose_graph(
    cg: &ConicGraph,
    ids: &[VertexId],
    d: usize,
    trace_path: Option<&Path>,
    settings: &Settings,
) -> Result<Output> {
    if d < 2 {
        return Err(Error::WrongDimension {
            expected: "at least 2 (use `check` on a framework file for d = 1)".into(),
            found: d,
        });
    }
    let n = cg.n();
    let required = s_conic(n, d);
    let oracle = settings.oracle(n, d)?;
    let outcome = decompose(cg, &oracle)?;
    if let Some(p) = trace_path {
        std::fs::write(p, to_json(&outcome.trace)?)?;
    }
    let mut out = String::new();
    let count = cg.edge_count();
    match &outcome.decomposition {
        Some(dec) => {
            writeln!(out, "RIGID: {count} edges, S({n},{d})={required}").unwrap();
            writeln!(out, "E_G: {}", fmt_edges(ids, &dec.g.edge_vec())).unwrap();
            writeln!(out, "E_H: {}", fmt_edges(ids, &dec.h.edge_vec())).unwrap();
            if !outcome.trace.surplus.is_empty() {
                writeln!(out, "surplus: {}", fmt_edges(ids, &outcome.trace.surplus)).unwrap();
            }
            writeln!(out, "rounds: {}", outcome.trace.rounds.len()).unwrap();
            if let Some(f) = &outcome.trace.fallback {
                writeln!(
                    out,
                    "augmenting-path completion after round {}: {}",
                    f.round, f.reason
                )
                .unwrap();
            }
        }
        None if count < required => {
            writeln!(out, "NOT RIGID: {count} edges < S({n},{d})={required}").unwrap();
        }
        None => {
            writeln!(
                out,
                "NOT RIGID: generic rank {} < S({n},{d})={required}",
                outcome.trace.numeric_rank
            )
            .unwrap();
        }
    }
    Ok(Output::verdict(out, outcome.decomposition.is_some()))
}

/// A minimally rigid conic graph on `n` vertices: a rigidity basis `G`
/// plus a spanning tree `H` sharing as few edges with `G` as possible.
pub fn design(n: usize, d: usize, settings: &Settings) -> Result<(ConicGraph, DirectedGraph)> {
    if n < 2 || d < 2 {
        return Err(Error::InvalidArgument(
            "design needs n ≥ 2 and d ≥ 2".into(),
        ));
    }
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(settings.seed));
    let oracle = settings.oracle(n, d)?;
    let mut pool = Vec::new();
    for u in 0..n {
        for w in u + 1..n {
            pool.push(Edge::new(u, w));
        }
    }
    let canonical = oracle.extend_to_minimally_rigid(&[], &pool)?;
    let g = EuclideanGraph::new(
        n,
        canonical
            .iter()
            .map(|e| Edge::new(labels[e.lo()], labels[e.hi()])),
    )?;

    let mut uf = UnionFind::new(n);
    let mut tree = Vec::new();
    let fresh = pool.iter().filter(|e| !g.contains(**e));
    let reused = pool.iter().filter(|e| g.contains(**e));
    for &e in fresh.chain(reused) {
        if uf.union(e.lo(), e.hi()) {
            tree.push(e);
        }
    }
    let h = spanning_forest(&EuclideanGraph::new(n, tree)?);
    let cg = crate::framework::union(&g, &h)?;
    let arcs = orient(&cg);
    Ok((cg, arcs))
}

pub fn cmd_design(
    n: usize,
    d: usize,
    out_path: Option<&Path>,
    settings: &Settings,
) -> Result<Output> {
    let (cg, arcs) = design(n, d, settings)?;
    let file = ConicGraphFile::from_conic_graph(&cg, &numeric_ids(n), Some(d), Some(&arcs))?;
    let se = s_euclidean(n, d);
    let summary = format!(
        "{} arcs for n={n}, d={d} (S_e={se} + {}); two-way ranging needs {}; savings {:.1}%\n",
        arcs.arc_count(),
        n - 1,
        2 * se,
        savings(n, d) * 100.0
    );
    match out_path {
        Some(p) => {
            std::fs::write(p, to_json(&file)?)?;
            Ok(Output::ok(summary))
        }
        None => {
            eprint!("{summary}");
            Ok(Output::ok(to_json(&file)?))
        }
    }
}

/// `1 − S(n,d) / (2 S_e(n,d))`
pub fn savings(n: usize, d: usize) -> f64 {
    let twr = 2 * s_euclidean(n, d);
    if twr == 0 {
        return 0.0;
    }
    1.0 - s_conic(n, d) as f64 / twr as f64
}

/// Limit of [`savings`] as `n → ∞`: `1 − (d+1)/(2d)`.
pub fn asymptotic_savings(d: usize) -> f64 {
    1.0 - (d + 1) as f64 / (2 * d) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub n: usize,
    pub d: usize,
    pub s_euclidean: usize,
    pub s_conic: usize,
    pub two_way_ranging: usize,
    pub savings_percent: f64,
    pub asymptotic_savings_percent: f64,
}

pub fn compare(n: usize, d: usize) -> Result<CompareRow> {
    if n < 2 || d < 1 {
        return Err(Error::InvalidArgument(
            "compare needs n ≥ 2 and d ≥ 1".into(),
        ));
    }
    Ok(CompareRow {
        n,
        d,
        s_euclidean: s_euclidean(n, d),
        s_conic: s_conic(n, d),
        two_way_ranging: 2 * s_euclidean(n, d),
        savings_percent: savings(n, d) * 100.0,
        asymptotic_savings_percent: asymptotic_savings(d) * 100.0,
    })
}

pub fn cmd_compare(n: usize, d: usize) -> Result<Output> {
    let r = compare(n, d)?;
    let mut out = String::new();
    writeln!(out, "n\td\tS_e\tS\t2*S_e\tsavings\tasymptotic").unwrap();
    writeln!(
        out,
        "{}\t{}\t{}\t{}\t{}\t{:.1}%\t{:.1}%",
        r.n,
        r.d,
        r.s_euclidean,
        r.s_conic,
        r.two_way_ranging,
        r.savings_percent,
        r.asymptotic_savings_percent
    )
    .unwrap();
    Ok(Output::ok(out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlexDemo {
    Hyperbola,
    Ellipse,
    Intersection,
}

pub fn cmd_flex_demo(which: FlexDemo, samples: usize, out_path: Option<&Path>) -> Result<Output> {
    let mut out = String::new();
    let (csv, residual) = match which {
        FlexDemo::Hyperbola | FlexDemo::Ellipse => {
            let fw = if which == FlexDemo::Hyperbola {
                fixtures::triangle_hyperbola()
            } else {
                fixtures::triangle_ellipse()
            };
            let curve = build_flex_curve(&fw)?;
            let pts = if which == FlexDemo::Hyperbola {
                sample_flex(&curve, samples)?
            } else {
                sample_range(&curve, 0.0, std::f64::consts::TAU, samples.max(2))?
            };
            let mut worst: f64 = 0.0;
            for s in &pts {
                worst = worst.max(max_measurement_drift(&fw, &curve.framework_at(s))?);
            }
            writeln!(out, "{:?} with constant {:.6}", curve.kind, curve.constant).unwrap();
            if which == FlexDemo::Ellipse {
                let (a, b) = (&pts[0], &pts[pts.len() - 1]);
                let gap = crate::framework::distance(&a.position, &b.position)
                    .max((a.bias - b.bias).abs());
                writeln!(out, "closure gap between t=0 and t=2pi: {gap:.3e}").unwrap();
            }
            (samples_to_csv(&pts), worst)
        }
        FlexDemo::Intersection => {
            let fw = fixtures::four_agents_rigid();
            let report = locate_second_intersection(&fw)?;
            let mut csv = String::from("label,x,y,beta,residual\n");
            writeln!(
                out,
                "original: x = ({:.9}, {:.9}), beta = {:.9}",
                report.original.position[0], report.original.position[1], report.original.bias
            )
            .unwrap();
            writeln!(
                csv,
                "original,{:?},{:?},{:?},{:?}",
                report.original.position[0],
                report.original.position[1],
                report.original.bias,
                report.original.residual
            )
            .unwrap();
            match &report.second {
                Some(s) => {
                    writeln!(
                        out,
                        "second:   x = ({:.9}, {:.9}), beta = {:.9}",
                        s.position[0], s.position[1], s.bias
                    )
                    .unwrap();
                    writeln!(
                        csv,
                        "second,{:?},{:?},{:?},{:?}",
                        s.position[0], s.position[1], s.bias, s.residual
                    )
                    .unwrap();
                }
                None => writeln!(out, "single placement (tangent intersection)").unwrap(),
            }
            let worst = report
                .solutions
                .iter()
                .map(|s| s.residual)
                .fold(0.0, f64::max);
            (csv, worst)
        }
    };
    writeln!(out, "max constraint residual: {residual:.3e}").unwrap();
    match out_path {
        Some(p) => {
            std::fs::write(p, csv)?;
            Ok(Output::ok(out))
        }
        None => {
            eprint!("{out}");
            Ok(Output::ok(csv))
        }
    }
}

/// Random framework with `m` distinct arcs, deterministic in `seed`.
pub fn random_framework(n: usize, d: usize, m: usize, seed: u64) -> Result<ConicFramework> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let all = n * n.saturating_sub(1);
    if m > all {
        return Err(Error::InvalidArgument(format!(
            "{m} arcs requested, at most {all} exist on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs: Vec<Arc> = Vec::with_capacity(all);
    for u in 0..n {
        for w in 0..n {
            if u != w {
                arcs.push(Arc::new(u, w));
            }
        }
    }
    arcs.shuffle(&mut rng);
    arcs.truncate(m);
    arcs.sort();
    let config = random_generic_configuration(n, d, seed);
    ConicFramework::new(DirectedGraph::new(n, arcs)?, config)
}

pub fn cmd_random(
    n: usize,
    d: usize,
    m: usize,
    out_path: Option<&Path>,
    settings: &Settings,
) -> Result<Output> {
    let fw = random_framework(n, d, m, settings.seed)?;
    let file = FrameworkFile::from_framework(&fw, &numeric_ids(n))?;
    let text = to_json(&file)?;
    match out_path {
        Some(p) => {
            std::fs::write(p, text)?;
            Ok(Output::ok(format!(
                "wrote {m} arcs on {n} agents to {}\n",
                p.display()
            )))
        }
        None => Ok(Output::ok(text)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compare_table() {
        let r = compare(4, 2).unwrap();
        assert_eq!((r.s_euclidean, r.s_conic, r.two_way_ranging), (5, 8, 10));
        let big = compare(100, 2).unwrap();
        assert_eq!((big.s_conic, big.two_way_ranging), (296, 394));
        assert!((big.savings_percent - 24.87).abs() < 0.01);
        assert_eq!(format!("{:.1}", asymptotic_savings(2) * 100.0), "25.0");
        assert_eq!(format!("{:.1}", asymptotic_savings(3) * 100.0), "33.3");
        assert!(compare(1, 2).is_err());
    }

    #[test]
    fn design_is_minimally_rigid() {
        let settings = Settings::default();
        let (cg, arcs) = design(4, 2, &settings).unwrap();
        assert_eq!(arcs.arc_count(), 8);
        assert_eq!(cg.edge_count(), 8);
        let out = decompose_graph(&cg, &numeric_ids(4), 2, None, &settings).unwrap();
        assert_eq!(out.code, EXIT_RIGID);
    }

    #[test]
    fn random_is_deterministic() {
        let a = random_framework(5, 2, 7, 3).unwrap();
        let b = random_framework(5, 2, 7, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.graph().arc_count(), 7);
        assert!(random_framework(3, 2, 7, 0).is_err());
    }

    #[test]
    fn check_reports() {
        let s = Settings::default();
        let ids = numeric_ids(4);
        let rigid = check_framework(&fixtures::four_agents_rigid(), &ids, &s).unwrap();
        assert_eq!(rigid.code, EXIT_RIGID);
        assert!(rigid.stdout.starts_with("RIGID, rank 8 / S(4,2)=8"));
        let flex = check_framework(&fixtures::triangle_hyperbola(), &ids[..3], &s).unwrap();
        assert_eq!(flex.code, EXIT_FLEXIBLE);
        assert!(flex.stdout.starts_with("FLEXIBLE, rank 4 / S(3,2)=5"));
        let line = check_framework(&fixtures::line_flexible(), &ids[..3], &s).unwrap();
        assert!(
            line.stdout
                .starts_with("FLEXIBLE: G- disconnected, components {0,1} {2}"),
            "{}",
            line.stdout
        );
    }

    #[test]
    fn decompose_rejects_the_line() {
        let cg = fixtures::k5_with_double();
        assert!(decompose_graph(&cg, &numeric_ids(5), 1, None, &Settings::default()).is_err());
    }
}
