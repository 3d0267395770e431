//! Rigidity matrices, SVD-based numeric rank and the trivial-motion space.
//!
//! Column layout of a conic rigidity matrix: the spatial block (`d·n`
//! columns, agent-major, so agent `u` owns columns `d·u .. d·u + d`)
//! followed by the bias block (`n` columns, agent `u` at `d·n + u`).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::{random_generic_configuration, Configuration, ConicFramework};
use crate::graph::{Arc, DirectedGraph, Edge};

pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Ratio between the smallest kept and the largest discarded singular value
/// below which a rank verdict is flagged as ill-conditioned.
pub const ILL_CONDITIONED_GAP: f64 = 1e3;

/// `τ = rel_tol · σ_max · max(rows, cols)`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub rel_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

impl TolerancePolicy {
    pub fn threshold(&self, sigma_max: f64, rows: usize, cols: usize) -> f64 {
        self.rel_tol * sigma_max * rows.max(cols) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub tolerance_used: f64,
    pub trials: usize,
    /// Smallest kept singular value over the largest discarded one (or over
    /// the tolerance when nothing was discarded). Infinite for rank 0.
    pub gap_ratio: f64,
    pub ill_conditioned: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixKind {
    Euclidean,
    Conic,
}

/// Dense rigidity matrix with one labeled row per arc.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidityMatrix {
    pub kind: MatrixKind,
    pub d: usize,
    pub n: usize,
    pub rows: Vec<Arc>,
    pub matrix: DMatrix<f64>,
}

impl RigidityMatrix {
    pub fn spatial_block(&self) -> DMatrix<f64> {
        self.matrix.columns(0, self.d * self.n).into_owned()
    }

    /// Empty for Euclidean matrices.
    pub fn bias_block(&self) -> DMatrix<f64> {
        match self.kind {
            MatrixKind::Euclidean => DMatrix::zeros(self.rows.len(), 0),
            MatrixKind::Conic => self.matrix.columns(self.d * self.n, self.n).into_owned(),
        }
    }
}

pub fn edge_rows(edges: &[Edge]) -> Vec<Arc> {
    edges.iter().map(|e| Arc::new(e.lo(), e.hi())).collect()
}

fn check_endpoints(arc: Arc, p: &Configuration) -> Result<()> {
    if arc.tail >= p.n() || arc.head >= p.n() {
        return Err(Error::VertexOutOfRange {
            vertex: arc.tail.max(arc.head),
            n: p.n(),
        });
    }
    if p.position(arc.tail) == p.position(arc.head) {
        return Err(Error::CoincidentPositions(arc.tail, arc.head));
    }
    Ok(())
}

/// Row for `(u, w)`: `(x_u − x_w)ᵀ` in block `u`, `(x_w − x_u)ᵀ` in block `w`.
pub fn euclidean_rigidity_matrix(rows: &[Arc], p: &Configuration) -> Result<RigidityMatrix> {
    let (d, n) = (p.d(), p.n());
    let mut m = DMatrix::zeros(rows.len(), d * n);
    for (r, &a) in rows.iter().enumerate() {
        check_endpoints(a, p)?;
        let (xu, xw) = (p.position(a.tail), p.position(a.head));
        for i in 0..d {
            m[(r, d * a.tail + i)] = xu[i] - xw[i];
            m[(r, d * a.head + i)] = xw[i] - xu[i];
        }
    }
    Ok(RigidityMatrix {
        kind: MatrixKind::Euclidean,
        d,
        n,
        rows: rows.to_vec(),
        matrix: m,
    })
}

/// `D(Γ,p)·B(Γ)`: row for `(u, w)` holds `−‖x_u − x_w‖` at `u` and
/// `+‖x_u − x_w‖` at `w`.
pub fn bias_matrix(rows: &[Arc], p: &Configuration) -> Result<DMatrix<f64>> {
    let mut b = DMatrix::zeros(rows.len(), p.n());
    for (r, &a) in rows.iter().enumerate() {
        check_endpoints(a, p)?;
        let dist = p.distance(a.tail, a.head);
        b[(r, a.tail)] = -dist;
        b[(r, a.head)] = dist;
    }
    Ok(b)
}

/// `M(Γ,p) = [M_e(Γ,p) | B(Γ,p)]`
pub fn conic_rigidity_matrix(fw: &ConicFramework) -> Result<RigidityMatrix> {
    conic_matrix_for(fw.graph(), fw.config())
}

pub(crate) fn conic_matrix_for(g: &DirectedGraph, p: &Configuration) -> Result<RigidityMatrix> {
    if g.n() != p.n() {
        return Err(Error::VertexCountMismatch {
            left: g.n(),
            right: p.n(),
        });
    }
    let spatial = euclidean_rigidity_matrix(g.arcs(), p)?;
    let bias = bias_matrix(g.arcs(), p)?;
    let (d, n) = (p.d(), p.n());
    let mut m = DMatrix::zeros(g.arc_count(), (d + 1) * n);
    m.columns_mut(0, d * n).copy_from(&spatial.matrix);
    m.columns_mut(d * n, n).copy_from(&bias);
    Ok(RigidityMatrix {
        kind: MatrixKind::Conic,
        d,
        n,
        rows: g.arcs().to_vec(),
        matrix: m,
    })
}

fn sorted_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn report_from_spectrum(
    singular_values: Vec<f64>,
    rows: usize,
    cols: usize,
    policy: &TolerancePolicy,
) -> RankReport {
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let tol = policy.threshold(sigma_max, rows, cols);
    let rank = singular_values.iter().filter(|&&s| s > tol).count();
    let gap_ratio = if rank == 0 {
        f64::INFINITY
    } else {
        let kept = singular_values[rank - 1];
        let below = singular_values.get(rank).copied().unwrap_or(tol);
        if below > 0.0 {
            kept / below
        } else {
            f64::INFINITY
        }
    };
    RankReport {
        rank,
        singular_values,
        tolerance_used: tol,
        trials: 1,
        gap_ratio,
        ill_conditioned: gap_ratio < ILL_CONDITIONED_GAP,
    }
}

pub fn numeric_rank(m: &DMatrix<f64>, policy: &TolerancePolicy) -> Result<RankReport> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(report_from_spectrum(
        sorted_singular_values(m),
        m.nrows(),
        m.ncols(),
        policy,
    ))
}

/// Orthonormal basis (as columns) of the numeric kernel of `m`.
pub fn null_space(
    m: &DMatrix<f64>,
    policy: &TolerancePolicy,
) -> Result<(DMatrix<f64>, RankReport)> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (rows, cols) = (m.nrows(), m.ncols());
    if cols == 0 {
        return Ok((
            DMatrix::zeros(0, 0),
            report_from_spectrum(Vec::new(), rows, cols, policy),
        ));
    }
    // Zero-padding to a tall matrix makes the thin SVD return a full V.
    let padded = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.rows_mut(0, rows).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let report = {
        sv.sort_by(|a, b| b.total_cmp(a));
        sv.truncate(rows.min(cols));
        report_from_spectrum(sv, rows, cols, policy)
    };
    let kernel: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|&(_, &s)| s <= report.tolerance_used)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    let basis = if kernel.is_empty() {
        DMatrix::zeros(cols, 0)
    } else {
        DMatrix::from_columns(&kernel)
    };
    Ok((basis, report))
}

fn binom2(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Maximal rank of a `d`-dimensional Euclidean rigidity matrix on `n` agents.
pub fn s_euclidean(n: usize, d: usize) -> usize {
    if n > d {
        d * n - binom2(d + 1)
    } else {
        binom2(n)
    }
}

/// Maximal rank of a conic rigidity matrix: `S_e(n,d) + n − 1`.
pub fn s_conic(n: usize, d: usize) -> usize {
    if n == 0 {
        return 0;
    }
    s_euclidean(n, d) + n - 1
}

/// Orthonormal columns spanning the trivial velocities at `p`: spatial
/// translations, infinitesimal rotations and the uniform bias shift.
pub fn trivial_space_basis(p: &Configuration) -> DMatrix<f64> {
    let (d, n) = (p.d(), p.n());
    let dim = (d + 1) * n;
    let mut generators: Vec<DVector<f64>> = Vec::new();
    for i in 0..d {
        let mut v = DVector::zeros(dim);
        for u in 0..n {
            v[d * u + i] = 1.0;
        }
        generators.push(v);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut v = DVector::zeros(dim);
            for u in 0..n {
                let x = p.position(u);
                v[d * u + i] = x[j];
                v[d * u + j] = -x[i];
            }
            generators.push(v);
        }
    }
    let mut bias = DVector::zeros(dim);
    for u in 0..n {
        bias[d * n + u] = 1.0;
    }
    generators.push(bias);

    let gen = DMatrix::from_columns(&generators);
    let svd = gen.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let sigma_max = svd.singular_values.max();
    let tol = TolerancePolicy::default().threshold(sigma_max, gen.nrows(), gen.ncols());
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|&(_, &s)| s > tol)
        .map(|(k, _)| u.column(k).into_owned())
        .collect();
    DMatrix::from_columns(&cols)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidityVerdict {
    pub rigid: bool,
    pub report: RankReport,
    /// `S(n,d)`
    pub required: usize,
    pub kernel_dim: usize,
    pub trivial_dim: usize,
}

impl RigidityVerdict {
    /// Whether the kernel-dimension criterion agrees with the rank criterion.
    pub fn criteria_agree(&self) -> bool {
        self.rigid == (self.kernel_dim == self.trivial_dim)
    }
}

pub fn is_infinitesimally_rigid(
    fw: &ConicFramework,
    policy: &TolerancePolicy,
) -> Result<RigidityVerdict> {
    let m = conic_rigidity_matrix(fw)?;
    let report = numeric_rank(&m.matrix, policy)?;
    let required = s_conic(fw.n(), fw.d());
    let kernel_dim = m.matrix.ncols() - report.rank;
    let trivial_dim = trivial_space_basis(fw.config()).ncols();
    if report.ill_conditioned {
        log::warn!(
            "ill-conditioned rank verdict: singular-value gap ratio {:.3e}",
            report.gap_ratio
        );
    }
    Ok(RigidityVerdict {
        rigid: report.rank == required,
        report,
        required,
        kernel_dim,
        trivial_dim,
    })
}

/// A unit admissible velocity orthogonal to every trivial motion, or `None`
/// when the framework is infinitesimally rigid.
pub fn nontrivial_flex(
    fw: &ConicFramework,
    policy: &TolerancePolicy,
) -> Result<Option<DVector<f64>>> {
    let m = conic_rigidity_matrix(fw)?;
    let report = numeric_rank(&m.matrix, policy)?;
    if report.rank == s_conic(fw.n(), fw.d()) {
        return Ok(None);
    }
    let (kernel, _) = null_space(&m.matrix, policy)?;
    if kernel.ncols() == 0 {
        return Ok(None);
    }
    let trivial = trivial_space_basis(fw.config());
    let projected = &kernel - &trivial * (trivial.transpose() * &kernel);
    let svd = projected.svd(true, false);
    let (k, &sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty kernel");
    if sigma <= 1e-8 {
        return Ok(None);
    }
    let mut q = svd.u.expect("requested U").column(k).into_owned();
    // deterministic sign: largest-magnitude entry positive
    let imax = q.iamax();
    if q[imax] < 0.0 {
        q = -q;
    }
    Ok(Some(q))
}

/// Largest conic rank over the sampled configurations (generic rank).
pub fn generic_conic_rank(
    g: &DirectedGraph,
    d: usize,
    seeds: &[u64],
    policy: &TolerancePolicy,
) -> Result<RankReport> {
    let configs: Vec<Configuration> = seeds
        .iter()
        .map(|&s| random_generic_configuration(g.n(), d, s))
        .collect();
    max_rank_over(
        &configs,
        seeds.len(),
        |p| Ok(conic_matrix_for(g, p)?.matrix),
        policy,
    )
}

/// Largest Euclidean rank of `edges` over the sampled configurations.
pub fn generic_euclidean_rank(
    n: usize,
    edges: &[Edge],
    d: usize,
    seeds: &[u64],
    policy: &TolerancePolicy,
) -> Result<RankReport> {
    let rows = edge_rows(edges);
    let configs: Vec<Configuration> = seeds
        .iter()
        .map(|&s| random_generic_configuration(n, d, s))
        .collect();
    max_rank_over(
        &configs,
        seeds.len(),
        |p| Ok(euclidean_rigidity_matrix(&rows, p)?.matrix),
        policy,
    )
}

pub(crate) fn max_rank_over<F>(
    configs: &[Configuration],
    trials: usize,
    build: F,
    policy: &TolerancePolicy,
) -> Result<RankReport>
where
    F: Fn(&Configuration) -> Result<DMatrix<f64>>,
{
    let mut best: Option<RankReport> = None;
    for p in configs {
        let r = numeric_rank(&build(p)?, policy)?;
        if best.as_ref().is_none_or(|b| r.rank > b.rank) {
            best = Some(r);
        }
    }
    let mut best =
        best.ok_or_else(|| Error::InvalidArgument("no configurations sampled".into()))?;
    best.trials = trials;
    Ok(best)
}

/// Seeds `base, base + 1, …` used for multi-configuration rank trials.
pub fn seed_set(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|k| base.wrapping_add(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::DirectedGraph;

    #[test]
    fn counting_formulas() {
        assert_eq!(s_euclidean(4, 2), 5);
        assert_eq!(s_euclidean(3, 2), 3);
        assert_eq!(s_euclidean(2, 3), 1);
        assert_eq!(s_euclidean(1, 1), 0);
        assert_eq!(s_euclidean(5, 1), 4);
        assert_eq!(s_conic(4, 2), 8);
        assert_eq!(s_conic(3, 2), 5);
        assert_eq!(s_conic(100, 2), 296);
        assert_eq!(2 * s_euclidean(100, 2), 394);
    }

    #[test]
    fn rank_of_trivial_matrices() {
        let p = TolerancePolicy::default();
        assert_eq!(numeric_rank(&DMatrix::zeros(3, 4), &p).unwrap().rank, 0);
        assert_eq!(numeric_rank(&DMatrix::identity(3, 3), &p).unwrap().rank, 3);
        assert_eq!(numeric_rank(&DMatrix::zeros(0, 4), &p).unwrap().rank, 0);
        let mut bad = DMatrix::identity(2, 2);
        bad[(0, 1)] = f64::NAN;
        assert!(matches!(numeric_rank(&bad, &p), Err(Error::NonFinite)));
    }

    #[test]
    fn axis_aligned_edge_row() {
        let p =
            Configuration::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![0.0, 0.0]).unwrap();
        let m = euclidean_rigidity_matrix(&[Arc::new(0, 1)], &p).unwrap();
        assert_eq!(
            m.matrix.row(0).iter().copied().collect::<Vec<_>>(),
            vec![-1.0, 0.0, 1.0, 0.0]
        );
    }

    #[test]
    fn bias_row_scaled_by_distance() {
        let p =
            Configuration::new(2, vec![vec![0.0, 0.0], vec![3.0, 4.0]], vec![0.0, 0.0]).unwrap();
        let b = bias_matrix(&[Arc::new(0, 1), Arc::new(1, 0)], &p).unwrap();
        assert_eq!(
            b.row(0).iter().copied().collect::<Vec<_>>(),
            vec![-5.0, 5.0]
        );
        assert_eq!(
            b.row(1).iter().copied().collect::<Vec<_>>(),
            vec![5.0, -5.0]
        );
    }

    #[test]
    fn bias_block_factors_through_incidence() {
        let p = random_generic_configuration(4, 2, 3);
        let g = DirectedGraph::from_pairs(4, &[(0, 1), (2, 1), (3, 0), (1, 3)]).unwrap();
        let b = bias_matrix(g.arcs(), &p).unwrap();
        let dists = DVector::from_iterator(4, g.arcs().iter().map(|a| p.distance(a.tail, a.head)));
        let expected = DMatrix::from_diagonal(&dists) * crate::graph::incidence_transpose(&g);
        assert!((b - expected).abs().max() < 1e-15);
    }

    #[test]
    fn triangle_has_full_euclidean_rank() {
        let p = random_generic_configuration(3, 2, 11);
        let rows = edge_rows(&[Edge::new(0, 1), Edge::new(1, 2), Edge::new(0, 2)]);
        let m = euclidean_rigidity_matrix(&rows, &p).unwrap();
        assert_eq!(
            numeric_rank(&m.matrix, &TolerancePolicy::default())
                .unwrap()
                .rank,
            3
        );
    }

    #[test]
    fn coincident_endpoints_rejected() {
        let p = Configuration::allowing_coincident(
            2,
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            vec![0.0, 0.0],
        )
        .unwrap();
        assert!(matches!(
            euclidean_rigidity_matrix(&[Arc::new(0, 1)], &p),
            Err(Error::CoincidentPositions(0, 1))
        ));
        assert!(bias_matrix(&[Arc::new(0, 1)], &p).is_err());
    }

    #[test]
    fn trivial_space_dimensions() {
        assert_eq!(
            trivial_space_basis(&random_generic_configuration(3, 2, 1)).ncols(),
            4
        );
        assert_eq!(
            trivial_space_basis(&random_generic_configuration(1, 2, 1)).ncols(),
            3
        );
        assert_eq!(
            trivial_space_basis(&random_generic_configuration(5, 3, 1)).ncols(),
            7
        );
        let t = trivial_space_basis(&random_generic_configuration(4, 2, 9));
        let gram = t.transpose() * &t;
        assert!((gram - DMatrix::identity(4, 4)).abs().max() < 1e-12);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let (k, r) = null_space(&m, &TolerancePolicy::default()).unwrap();
        assert_eq!(r.rank, 1);
        assert_eq!(k.ncols(), 2);
        assert!((&m * &k).abs().max() < 1e-14);
    }

    #[test]
    fn gap_ratio_flags_near_rank_deficiency() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e-6]));
        let r = numeric_rank(&m, &TolerancePolicy::default()).unwrap();
        assert_eq!(r.rank, 2);
        assert!(!r.ill_conditioned);
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e-6, 1e-8]));
        let r = numeric_rank(&m, &TolerancePolicy::default()).unwrap();
        assert_eq!(r.rank, 3);
        assert!(r.ill_conditioned);
    }
}
