//! Closed-form flexes of the three-agent planar frameworks with one double
//! edge and two single arcs, and the alternative placement of a fourth
//! agent tied to a rigid triangle by three single arcs.
//!
//! For a single arc between agent `i` and the moving agent `m`, the
//! measurement fixes `‖x_i − x_m‖ = c_i + s_i β_m` with `s_i = +1` when the
//! arc leaves `m` and `−1` when it enters `m`.

use nalgebra::{DMatrix, DVector, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::{distance, ConicFramework};
use crate::graph::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    HyperbolaBranch,
    Ellipse,
}

/// Single arc joining a fixed agent to the moving one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcConstraint {
    pub fixed: usize,
    /// `+1` if the arc is emitted by the moving agent, `−1` if received.
    pub sign: f64,
    /// `c_i` in `‖x_i − x_m‖ = c_i + s_i β_m`.
    pub offset: f64,
}

fn arc_constraint(fw: &ConicFramework, arc: Arc, moving: usize) -> Result<ArcConstraint> {
    let p = fw.config();
    let rho = p.pseudo_range(arc.tail, arc.head)?;
    if arc.tail == moving {
        // rho = d + β_fixed − β_m
        Ok(ArcConstraint {
            fixed: arc.head,
            sign: 1.0,
            offset: rho - p.bias(arc.head),
        })
    } else {
        // rho = d + β_m − β_fixed
        Ok(ArcConstraint {
            fixed: arc.tail,
            sign: -1.0,
            offset: rho + p.bias(arc.tail),
        })
    }
}

/// Locus of the moving agent: a conic with foci at the two fixed agents,
/// plus the bias it must carry at each point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConicCurveFlex {
    pub kind: CurveKind,
    pub foci: [Vec<f64>; 2],
    /// Distance difference (hyperbola) or sum (ellipse) to the foci.
    pub constant: f64,
    pub moving: usize,
    pub constraints: [ArcConstraint; 2],
    pub center: [f64; 2],
    /// Unit vector from the first focus to the second.
    pub axis: [f64; 2],
    pub normal: [f64; 2],
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Curve parameter of the framework's current position.
    pub base_parameter: f64,
    framework: ConicFramework,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlexSample {
    pub t: f64,
    pub position: [f64; 2],
    pub bias: f64,
}

/// Expected structure: agents 0 and 1 joined in both directions, agent 2
/// joined to each of them by exactly one arc.
fn check_three_agent_pattern(fw: &ConicFramework) -> Result<(Arc, Arc)> {
    if fw.d() != 2 {
        return Err(Error::WrongDimension {
            expected: "2".into(),
            found: fw.d(),
        });
    }
    let g = fw.graph();
    let mismatch = |why: &str| Error::PatternMismatch(why.to_string());
    if g.n() != 3 || g.arc_count() != 4 {
        return Err(mismatch("expected 3 agents and 4 arcs"));
    }
    if !g.contains(Arc::new(0, 1)) || !g.contains(Arc::new(1, 0)) {
        return Err(mismatch("agents 0 and 1 must measure each other"));
    }
    let single = |i: usize| -> Result<Arc> {
        match (g.contains(Arc::new(i, 2)), g.contains(Arc::new(2, i))) {
            (true, false) => Ok(Arc::new(i, 2)),
            (false, true) => Ok(Arc::new(2, i)),
            _ => Err(mismatch("agent 2 needs exactly one arc to each of 0 and 1")),
        }
    };
    Ok((single(0)?, single(1)?))
}

/// The curve kind predicted by arc directions: the hyperbola when both
/// arcs enter or both leave the moving agent, the ellipse otherwise.
pub fn predicted_kind(first: Arc, second: Arc, moving: usize) -> CurveKind {
    if (first.tail == moving) == (second.tail == moving) {
        CurveKind::HyperbolaBranch
    } else {
        CurveKind::Ellipse
    }
}

pub fn build_flex_curve(fw: &ConicFramework) -> Result<ConicCurveFlex> {
    let (a0, a1) = check_three_agent_pattern(fw)?;
    let moving = 2;
    let k0 = arc_constraint(fw, a0, moving)?;
    let k1 = arc_constraint(fw, a1, moving)?;
    let p = fw.config();
    let f0 = Vector2::from_column_slice(p.position(0));
    let f1 = Vector2::from_column_slice(p.position(1));
    let x = Vector2::from_column_slice(p.position(moving));
    let center = (f0 + f1) / 2.0;
    let half_gap = (f1 - f0).norm() / 2.0;
    let axis = (f1 - f0).normalize();
    let normal = Vector2::new(-axis.y, axis.x);
    let (u, v) = ((x - center).dot(&axis), (x - center).dot(&normal));

    let kind = predicted_kind(a0, a1, moving);
    // Eliminating β_m: s0 = s1 leaves a fixed difference, s0 = −s1 a fixed sum.
    let (constant, semi_major, semi_minor, base) = match kind {
        CurveKind::HyperbolaBranch => {
            let k = k0.offset - k1.offset;
            let a = k.abs() / 2.0;
            let b = (half_gap * half_gap - a * a).sqrt();
            (k, a, b, (v / b).asinh())
        }
        CurveKind::Ellipse => {
            let k = k0.offset + k1.offset;
            let a = k / 2.0;
            let b = (a * a - half_gap * half_gap).sqrt();
            (k, a, b, (v / b).atan2(u / a))
        }
    };
    if !(semi_minor.is_finite() && semi_minor > 0.0) {
        return Err(Error::PatternMismatch("degenerate conic locus".into()));
    }
    Ok(ConicCurveFlex {
        kind,
        foci: [f0.as_slice().to_vec(), f1.as_slice().to_vec()],
        constant,
        moving,
        constraints: [k0, k1],
        center: [center.x, center.y],
        axis: [axis.x, axis.y],
        normal: [normal.x, normal.y],
        semi_major,
        semi_minor,
        base_parameter: base,
        framework: fw.clone(),
    })
}

impl ConicCurveFlex {
    pub fn framework(&self) -> &ConicFramework {
        &self.framework
    }

    fn frame(&self) -> (Vector2<f64>, Vector2<f64>, Vector2<f64>) {
        (
            Vector2::from(self.center),
            Vector2::from(self.axis),
            Vector2::from(self.normal),
        )
    }

    pub fn point(&self, t: f64) -> [f64; 2] {
        let (m, e, n) = self.frame();
        let (a, b) = (self.semi_major, self.semi_minor);
        let x = match self.kind {
            // d0 − d1 > 0 means the branch around the second focus
            CurveKind::HyperbolaBranch => {
                m + self.constant.signum() * a * t.cosh() * e + b * t.sinh() * n
            }
            CurveKind::Ellipse => m + a * t.cos() * e + b * t.sin() * n,
        };
        [x.x, x.y]
    }

    pub fn point_derivative(&self, t: f64) -> [f64; 2] {
        let (_, e, n) = self.frame();
        let (a, b) = (self.semi_major, self.semi_minor);
        let dx = match self.kind {
            CurveKind::HyperbolaBranch => {
                self.constant.signum() * a * t.sinh() * e + b * t.cosh() * n
            }
            CurveKind::Ellipse => -a * t.sin() * e + b * t.cos() * n,
        };
        [dx.x, dx.y]
    }

    /// Bias of the moving agent at a point of the curve, from the first arc.
    pub fn bias_at(&self, x: [f64; 2]) -> f64 {
        let k = &self.constraints[0];
        k.sign * (distance(&x, &self.foci[0]) - k.offset)
    }

    pub fn sample_at(&self, t: f64) -> FlexSample {
        let position = self.point(t);
        FlexSample {
            t,
            position,
            bias: self.bias_at(position),
        }
    }

    /// Copy of the framework with the moving agent placed by `s`.
    pub fn framework_at(&self, s: &FlexSample) -> ConicFramework {
        let mut fw = self.framework.clone();
        fw.config_mut()
            .set_agent(self.moving, s.position.to_vec(), s.bias);
        fw
    }

    /// Velocity of the full configuration along the curve at `t`, in the
    /// rigidity-matrix column layout.
    pub fn tangent(&self, t: f64) -> DVector<f64> {
        let n = self.framework.n();
        let x = self.point(t);
        let dx = self.point_derivative(t);
        let k = &self.constraints[0];
        let f = &self.foci[0];
        let r = distance(&x, f);
        let dr = ((x[0] - f[0]) * dx[0] + (x[1] - f[1]) * dx[1]) / r;
        let mut q = DVector::zeros(3 * n);
        q[2 * self.moving] = dx[0];
        q[2 * self.moving + 1] = dx[1];
        q[2 * n + self.moving] = k.sign * dr;
        q
    }
}

/// `k` samples evenly spread over `[t0 − 0.5, t0 + 0.5]` around the current
/// parameter `t0`; a single sample sits at `t0`.
pub fn sample_flex(curve: &ConicCurveFlex, k: usize) -> Result<Vec<FlexSample>> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "sample count must be positive".into(),
        ));
    }
    let t0 = curve.base_parameter;
    if k == 1 {
        return Ok(vec![curve.sample_at(t0)]);
    }
    sample_range(curve, t0 - 0.5, t0 + 0.5, k)
}

/// `k ≥ 2` samples from `start` to `end` inclusive.
pub fn sample_range(
    curve: &ConicCurveFlex,
    start: f64,
    end: f64,
    k: usize,
) -> Result<Vec<FlexSample>> {
    if k < 2 {
        return Err(Error::InvalidArgument(
            "a range needs at least 2 samples".into(),
        ));
    }
    let step = (end - start) / (k - 1) as f64;
    Ok((0..k)
        .map(|j| curve.sample_at(start + step * j as f64))
        .collect())
}

/// Largest absolute change of any arc measurement between two frameworks
/// on the same directed graph.
pub fn max_measurement_drift(reference: &ConicFramework, moved: &ConicFramework) -> Result<f64> {
    let before = reference.measurements()?;
    let after = moved.measurements()?;
    Ok(before
        .iter()
        .zip(&after)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Placements of the fourth agent compatible with all its measurements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub original: FourthAgent,
    /// Every real placement found, the original included.
    pub solutions: Vec<FourthAgent>,
    /// The placement distinct from the original, if any.
    pub second: Option<FourthAgent>,
    /// The two intersections coincide.
    pub tangent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourthAgent {
    pub position: [f64; 2],
    pub bias: f64,
    /// Largest absolute measurement residual of the three single arcs.
    pub residual: f64,
}

fn check_four_agent_pattern(fw: &ConicFramework) -> Result<[Arc; 3]> {
    if fw.d() != 2 {
        return Err(Error::WrongDimension {
            expected: "2".into(),
            found: fw.d(),
        });
    }
    let g = fw.graph();
    let mismatch = |why: &str| Error::PatternMismatch(why.to_string());
    if g.n() != 4 || g.arc_count() != 9 {
        return Err(mismatch("expected 4 agents and 9 arcs"));
    }
    for (u, w) in [(0, 1), (0, 2), (1, 2)] {
        if !g.contains(Arc::new(u, w)) || !g.contains(Arc::new(w, u)) {
            return Err(mismatch("agents 0, 1, 2 must all measure each other"));
        }
    }
    let mut singles = [Arc::new(0, 3); 3];
    for (i, slot) in singles.iter_mut().enumerate() {
        *slot = match (g.contains(Arc::new(i, 3)), g.contains(Arc::new(3, i))) {
            (true, false) => Arc::new(i, 3),
            (false, true) => Arc::new(3, i),
            _ => return Err(mismatch("agent 3 needs exactly one arc to each of 0, 1, 2")),
        };
    }
    Ok(singles)
}

/// Relative size of the quadratic discriminant under which the two
/// intersections are treated as one.
const TANGENCY_TOL: f64 = 1e-10;

/// All placements `(x, β)` of agent 3 satisfying its three measurements.
///
/// Squaring `‖x_i − x‖ = c_i + s_i β` and writing `τ = ‖x‖² − β²` gives
/// three linear equations in `(x, y, β, τ)`; their solution line meets the
/// quadric `τ = ‖x‖² − β²` in at most two points, polished by Newton steps
/// on the unsquared equations and kept when every `c_i + s_i β ≥ 0`.
pub fn locate_second_intersection(fw: &ConicFramework) -> Result<IntersectionReport> {
    let arcs = check_four_agent_pattern(fw)?;
    let moving = 3;
    let cons: Vec<ArcConstraint> = arcs
        .iter()
        .map(|&a| arc_constraint(fw, a, moving))
        .collect::<Result<_>>()?;
    let p = fw.config();
    let anchors: Vec<Vector2<f64>> = cons
        .iter()
        .map(|k| Vector2::from_column_slice(p.position(k.fixed)))
        .collect();

    // −2 x_i·x − 2 c_i s_i β + τ = c_i² − ‖x_i‖²
    // padded with a zero row so the SVD also returns the null direction
    let mut a = DMatrix::zeros(4, 4);
    let mut rhs = DVector::zeros(4);
    for (i, k) in cons.iter().enumerate() {
        let xi = anchors[i];
        a[(i, 0)] = -2.0 * xi.x;
        a[(i, 1)] = -2.0 * xi.y;
        a[(i, 2)] = -2.0 * k.offset * k.sign;
        a[(i, 3)] = 1.0;
        rhs[i] = k.offset * k.offset - xi.norm_squared();
    }
    let svd = a.clone().svd(true, true);
    let v_t = svd.v_t.as_ref().expect("requested V");
    let sigma = &svd.singular_values;
    let smax = sigma.max();
    let rank = sigma.iter().filter(|&&s| s > 1e-12 * smax).count();
    if rank < 3 {
        return Err(Error::RootFinding(
            "the three measurement equations are linearly dependent".into(),
        ));
    }
    let particular = svd
        .solve(&rhs, 1e-12 * smax)
        .map_err(|e| Error::RootFinding(e.to_string()))?;
    // the right singular vector of the zero singular value spans the line
    let null_index = (0..4)
        .min_by(|&i, &j| sigma[i].total_cmp(&sigma[j]))
        .expect("four singular values");
    let dir = v_t.row(null_index).transpose();
    let base = Vector4::from_column_slice(particular.as_slice());
    let dir = Vector4::from_column_slice(dir.as_slice());

    // (x0 + λ dx)² + (y0 + λ dy)² − (β0 + λ dβ)² − (τ0 + λ dτ) = 0
    let qa = dir[0] * dir[0] + dir[1] * dir[1] - dir[2] * dir[2];
    let qb = 2.0 * (base[0] * dir[0] + base[1] * dir[1] - base[2] * dir[2]) - dir[3];
    let qc = base[0] * base[0] + base[1] * base[1] - base[2] * base[2] - base[3];
    let magnitude = base[0] * base[0] + base[1] * base[1] + base[2] * base[2] + base[3].abs();
    let scale = qb * qb + 4.0 * qa.abs() * magnitude;
    let disc = qb * qb - 4.0 * qa * qc;
    let mut lambdas = Vec::new();
    let mut tangent = false;
    if qa.abs() < 1e-14 * (qb.abs() + qc.abs()).max(1e-300) {
        if qb.abs() > 0.0 {
            lambdas.push(-qc / qb);
        }
    } else if disc.abs() <= TANGENCY_TOL * scale {
        tangent = true;
        lambdas.push(-qb / (2.0 * qa));
    } else if disc > 0.0 {
        let root = disc.sqrt();
        // numerically stable pair
        let q = -0.5 * (qb + qb.signum() * root);
        lambdas.push(q / qa);
        if q != 0.0 {
            lambdas.push(qc / q);
        }
    }

    let residual_at = |x: Vector2<f64>, beta: f64| -> f64 {
        cons.iter()
            .zip(&anchors)
            .map(|(k, xi)| ((xi - x).norm() - k.offset - k.sign * beta).abs())
            .fold(0.0, f64::max)
    };
    let mut solutions: Vec<FourthAgent> = Vec::new();
    for lambda in lambdas {
        let s = base + lambda * dir;
        let (x, beta) = polish(Vector2::new(s[0], s[1]), s[2], &cons, &anchors);
        if cons.iter().any(|k| k.offset + k.sign * beta < -1e-9) {
            continue;
        }
        let candidate = FourthAgent {
            position: [x.x, x.y],
            bias: beta,
            residual: residual_at(x, beta),
        };
        let duplicate = solutions.iter().any(|o| {
            distance(&o.position, &candidate.position) < 1e-9
                && (o.bias - candidate.bias).abs() < 1e-9
        });
        if !duplicate {
            solutions.push(candidate);
        }
    }
    if solutions.is_empty() {
        return Err(Error::RootFinding(format!(
            "no real placement found (discriminant {disc:e})"
        )));
    }
    if let Some(worst) = solutions.iter().map(|s| s.residual).reduce(f64::max) {
        if worst > 1e-8 {
            return Err(Error::RootFinding(format!(
                "residual {worst:e} after polishing"
            )));
        }
    }
    let x4 = Vector2::from_column_slice(p.position(moving));
    let original = FourthAgent {
        position: [x4.x, x4.y],
        bias: p.bias(moving),
        residual: residual_at(x4, p.bias(moving)),
    };
    let second = solutions
        .iter()
        .find(|s| distance(&s.position, &original.position) > 1e-7)
        .cloned();
    if let Some(s) = &second {
        for k in &cons {
            let d_orig = distance(&original.position, p.position(k.fixed));
            let d_new = distance(&s.position, p.position(k.fixed));
            if (d_orig - d_new).abs() > 1e-7 && (s.bias - original.bias).abs() < 1e-12 {
                return Err(Error::Invariant(
                    "distances differ but the second bias equals the first".into(),
                ));
            }
        }
    }
    Ok(IntersectionReport {
        original,
        solutions,
        second,
        tangent,
    })
}

/// Gauss-Newton refinement of `(x, β)` on `‖x_i − x‖ − c_i − s_i β = 0`.
fn polish(
    mut x: Vector2<f64>,
    mut beta: f64,
    cons: &[ArcConstraint],
    anchors: &[Vector2<f64>],
) -> (Vector2<f64>, f64) {
    for _ in 0..8 {
        let mut jac = DMatrix::zeros(cons.len(), 3);
        let mut res = DVector::zeros(cons.len());
        for (i, (k, xi)) in cons.iter().zip(anchors).enumerate() {
            let diff = x - xi;
            let r = diff.norm();
            if r == 0.0 {
                return (x, beta);
            }
            res[i] = r - k.offset - k.sign * beta;
            jac[(i, 0)] = diff.x / r;
            jac[(i, 1)] = diff.y / r;
            jac[(i, 2)] = -k.sign;
        }
        if res.amax() < 1e-15 {
            break;
        }
        let Ok(step) = jac.svd(true, true).solve(&res, 1e-12) else {
            break;
        };
        x -= Vector2::new(step[0], step[1]);
        beta -= step[2];
    }
    (x, beta)
}
