//! Riesz projections by trapezoidal quadrature of the resolvent on circles,
//! component projections along a branch, and their limits at `t = 0`.

use serde::{Deserialize, Serialize};

use crate::branch::Branch;
use crate::error::{Error, Result};
use crate::extrapolate::richardson;
use crate::linalg::{self, r, CMat, C64};
use crate::pencil::MatrixTuple;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ContourSpec {
    pub center: C64,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QuadratureOptions {
    pub initial_nodes: usize,
    pub max_nodes: usize,
    pub rel_tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            initial_nodes: 16,
            max_nodes: 1 << 14,
            rel_tol: 1e-10,
        }
    }
}

/// Sum of `r e^{i theta} (c + r e^{i theta} - M)^{-1}` over the given angles.
fn resolvent_sum(m: &CMat, contour: &ContourSpec, thetas: impl Iterator<Item = f64>) -> Result<CMat> {
    let n = m.nrows();
    let mut acc = CMat::zeros(n, n);
    for theta in thetas {
        let w = C64::from_polar(contour.radius, theta);
        let shifted = linalg::identity(n) * (contour.center + w) - m;
        let inv = shifted
            .lu()
            .try_inverse()
            .ok_or(Error::EigenvalueOnContour { distance: 0.0 })?;
        acc += inv * w;
    }
    Ok(acc)
}

/// `(1 / 2 pi i) \oint (z - M)^{-1} dz` over the circle, doubling the node
/// count with nested midpoints until successive estimates agree to
/// `rel_tol * max(1, ||P||)`.
pub fn riesz_projection(m: &CMat, contour: &ContourSpec, opts: &QuadratureOptions) -> Result<CMat> {
    if contour.radius <= 0.0 || opts.initial_nodes == 0 {
        return Err(Error::InvalidInput("contour needs a positive radius and node count".into()));
    }
    let scale = linalg::op_norm(m).max(1.0);
    let guard = 10.0 * f64::EPSILON * scale;
    for e in linalg::eigenvalues(m)? {
        let d = ((e - contour.center).norm() - contour.radius).abs();
        if d <= guard {
            return Err(Error::EigenvalueOnContour { distance: d });
        }
    }
    let mut nodes = opts.initial_nodes;
    let step = |k: usize, nodes: usize| std::f64::consts::TAU * k as f64 / nodes as f64;
    let mut sum = resolvent_sum(m, contour, (0..nodes).map(|k| step(k, nodes)))?;
    let mut p = &sum / r(nodes as f64);
    loop {
        if 2 * nodes > opts.max_nodes {
            return Err(Error::Quadrature {
                nodes,
                change: f64::NAN,
            });
        }
        let mid = resolvent_sum(m, contour, (0..nodes).map(|k| step(2 * k + 1, 2 * nodes)))?;
        sum += mid;
        nodes *= 2;
        let next = &sum / r(nodes as f64);
        let change = linalg::op_norm(&(&next - &p));
        let tol = opts.rel_tol * linalg::op_norm(&next).max(1.0);
        p = next;
        if change <= tol {
            return Ok(p);
        }
        if 2 * nodes > opts.max_nodes {
            return Err(Error::Quadrature { nodes, change });
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComponentProjection {
    pub t: f64,
    /// Branch value (`x_1` or `x_{n+1}`) at `t`.
    pub value: C64,
    pub projection: CMat,
    pub contour: ContourSpec,
    /// `||P^2 - P||`.
    pub idempotency_residual: f64,
    /// Rounded trace.
    pub rank: usize,
}

/// Riesz projection of the pencil matrix at the branch point `t xhat` onto
/// the eigenvalue `1` (or `0` for the `lambda = 0` chart), with the radius set
/// to half the distance to the nearest excluded eigenvalue.
pub fn component_projection(
    tuple: &MatrixTuple,
    branch: &Branch,
    t: f64,
    opts: &QuadratureOptions,
) -> Result<ComponentProjection> {
    let value = branch.evaluate(tuple, t)?;
    let m = branch.pencil_matrix(tuple, t, value)?;
    let center = branch.contour_center();
    let mut eig = linalg::eigenvalues(&m)?;
    eig.sort_by(|a, b| (a - center).norm().partial_cmp(&(b - center).norm()).unwrap());
    let k = branch.root_count.min(eig.len());
    let inner = eig[..k].iter().map(|e| (e - center).norm()).fold(0.0, f64::max);
    let scale = linalg::op_norm(&m).max(1.0);
    let outer = eig.get(k).map_or(f64::INFINITY, |e| (e - center).norm());
    if !outer.is_finite() {
        // everything is inside; any radius enclosing the spectrum works
        let radius = 2.0 * eig.iter().map(|e| (e - center).norm()).fold(1.0, f64::max);
        return finish(t, value, &m, ContourSpec { center, radius }, opts);
    }
    if outer <= 1e-12 * scale || outer <= 4.0 * inner {
        return Err(Error::Separation { distance: outer });
    }
    let contour = ContourSpec {
        center,
        radius: 0.5 * outer,
    };
    finish(t, value, &m, contour, opts)
}

fn finish(t: f64, value: C64, m: &CMat, contour: ContourSpec, opts: &QuadratureOptions) -> Result<ComponentProjection> {
    let projection = riesz_projection(m, &contour, opts)?;
    let idempotency_residual = linalg::op_norm(&(&projection * &projection - &projection));
    let rank = projection.trace().re.round().max(0.0) as usize;
    Ok(ComponentProjection {
        t,
        value,
        projection,
        contour,
        idempotency_residual,
        rank,
    })
}

/// `(t, ||P(t)||)` along the given parameters.
pub fn projection_norm_profile(
    tuple: &MatrixTuple,
    branch: &Branch,
    ts: &[f64],
    opts: &QuadratureOptions,
) -> Result<Vec<(f64, f64)>> {
    ts.iter()
        .map(|&t| {
            let p = component_projection(tuple, branch, t, opts)?;
            Ok((t, linalg::op_norm(&p.projection)))
        })
        .collect()
}

/// Least-squares slope of `log ||P||` against `log |t|`.
pub fn fit_exponent(profile: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = profile
        .iter()
        .filter(|(t, v)| *t != 0.0 && *v > 0.0)
        .map(|(t, v)| (t.abs().ln(), v.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// `n` log-spaced parameters from `hi` down to `lo`.
pub fn log_ladder(hi: f64, lo: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![hi];
    }
    let (a, b) = (hi.ln(), lo.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitOptions {
    pub t_max: f64,
    pub samples: usize,
    pub quadrature: QuadratureOptions,
    /// Profile exponents below this are reported as a blow-up.
    pub blowup_exponent: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        Self {
            t_max: 1e-2,
            samples: 8,
            quadrature: QuadratureOptions::default(),
            blowup_exponent: -0.5,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitProjection {
    pub projection: CMat,
    pub derivative: CMat,
    pub second_derivative: CMat,
    pub error: f64,
    pub derivative_error: f64,
    pub second_derivative_error: f64,
    pub idempotency_residual: f64,
    pub rank: usize,
    pub norm_exponent: f64,
}

/// Limit `P(0)` with first and second `t`-derivatives, from symmetric
/// combinations of `P(+-t_k)` on the geometric ladder.
pub fn limit_projection(tuple: &MatrixTuple, branch: &Branch, opts: &LimitOptions) -> Result<LimitProjection> {
    if opts.samples < 3 {
        return Err(Error::InvalidInput("limit projection needs at least 3 ladder samples".into()));
    }
    let ladder: Vec<f64> = (0..opts.samples)
        .map(|k| opts.t_max / 2f64.powi(k as i32))
        .collect();
    let profile = projection_norm_profile(tuple, branch, &ladder, &opts.quadrature)?;
    let norm_exponent = fit_exponent(&profile);
    if norm_exponent < opts.blowup_exponent {
        return Err(Error::BlowUp { exponent: norm_exponent });
    }
    let mut sums = Vec::with_capacity(ladder.len());
    let mut diffs = Vec::with_capacity(ladder.len());
    for &t in &ladder {
        let plus = component_projection(tuple, branch, t, &opts.quadrature)?.projection;
        let minus = component_projection(tuple, branch, -t, &opts.quadrature)?.projection;
        sums.push((&plus + &minus) * r(0.5));
        diffs.push((plus - minus) * r(0.5 / t));
    }
    let p0 = richardson(&sums, 2).expect("non-empty ladder");
    let p1 = richardson(&diffs, 2).expect("non-empty ladder");
    let curv: Vec<CMat> = sums
        .iter()
        .zip(&ladder)
        .map(|(s, &t)| (s - &p0.value) * r(2.0 / (t * t)))
        .collect();
    // the finest levels of the curvature ladder are dominated by rounding
    let p2 = richardson(&curv, 2).expect("non-empty ladder");
    let idempotency_residual = linalg::op_norm(&(&p0.value * &p0.value - &p0.value));
    let rank = p0.value.trace().re.round().max(0.0) as usize;
    Ok(LimitProjection {
        projection: p0.value,
        derivative: p1.value,
        second_derivative: p2.value,
        error: p0.error,
        derivative_error: p1.error,
        second_derivative_error: p2.error,
        idempotency_residual,
        rank,
        norm_exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::{local_branches, BranchOptions};
    use crate::fixtures;
    use crate::linalg::{from_real_rows, max_abs, real_diag};

    #[test]
    fn projection_of_diagonal_matrix() {
        let m = real_diag(&[1.0, 3.0, 1.0]);
        let c = ContourSpec {
            center: r(1.0),
            radius: 1.0,
        };
        let p = riesz_projection(&m, &c, &QuadratureOptions::default()).unwrap();
        assert!(max_abs(&(p - real_diag(&[1.0, 0.0, 1.0]))) < 1e-12);
    }

    #[test]
    fn oblique_projection_of_jordan_free_matrix() {
        // eigenprojection for eigenvalue 1 of [[1, a], [0, b]] is [[1, a/(1-b)], [0, 0]]
        let m = from_real_rows(&[&[1.0, 0.9], &[0.0, 0.8]]);
        let c = ContourSpec {
            center: r(1.0),
            radius: 0.1,
        };
        let p = riesz_projection(&m, &c, &QuadratureOptions::default()).unwrap();
        let expect = from_real_rows(&[&[1.0, 4.5], &[0.0, 0.0]]);
        assert!(max_abs(&(p - expect)) < 1e-10);
    }

    #[test]
    fn contour_through_eigenvalue_is_refused() {
        let m = real_diag(&[1.0, 2.0]);
        let c = ContourSpec {
            center: r(1.0),
            radius: 1.0,
        };
        assert!(matches!(
            riesz_projection(&m, &c, &QuadratureOptions::default()),
            Err(Error::EigenvalueOnContour { .. })
        ));
    }

    #[test]
    fn node_cap_is_reported() {
        let m = real_diag(&[1.0, 1.999]);
        let c = ContourSpec {
            center: r(1.0),
            radius: 0.998,
        };
        let opts = QuadratureOptions {
            max_nodes: 64,
            ..Default::default()
        };
        assert!(matches!(riesz_projection(&m, &c, &opts), Err(Error::Quadrature { .. })));
    }

    #[test]
    fn exponent_fit() {
        let prof: Vec<(f64, f64)> = log_ladder(1e-1, 1e-4, 7).into_iter().map(|t| (t, 3.0 / t)).collect();
        assert!((fit_exponent(&prof) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn nonnormal_pair_blows_up() {
        let t = fixtures::nonnormal_pair();
        let br = local_branches(&t, r(1.0), &[r(1.0)], &BranchOptions::default()).unwrap();
        let p = component_projection(&t, &br[0], 0.1, &QuadratureOptions::default()).unwrap();
        let expect = from_real_rows(&[&[1.0, 4.5], &[0.0, 0.0]]);
        assert!(max_abs(&(p.projection - expect)) < 1e-10);
        assert!(matches!(
            limit_projection(&t, &br[0], &LimitOptions::default()),
            Err(Error::BlowUp { .. })
        ));
    }

    #[test]
    fn diagonal_variant_limits() {
        let t = fixtures::diagonal_pair();
        let br = local_branches(&t, r(1.0), &[r(1.0)], &BranchOptions::default()).unwrap();
        let l0 = limit_projection(&t, &br[0], &LimitOptions::default()).unwrap();
        let l1 = limit_projection(&t, &br[1], &LimitOptions::default()).unwrap();
        // x1 = 1 - t solves (x1 - 1) + t = 0 on the +1 eigenvector of A_2
        assert!(max_abs(&(&l0.projection - real_diag(&[1.0, 0.0]))) < 1e-10);
        assert!(max_abs(&(&l1.projection - real_diag(&[0.0, 1.0]))) < 1e-10);
        assert!(max_abs(&l0.derivative) < 1e-8);
        assert_eq!(l0.rank, 1);
    }

    #[test]
    fn dihedral_limit_is_idempotent() {
        let t = fixtures::dihedral_pair(std::f64::consts::PI / 4.0);
        let br = local_branches(&t, r(1.0), &[r(1.0)], &BranchOptions::default()).unwrap();
        let l = limit_projection(&t, &br[0], &LimitOptions::default()).unwrap();
        assert!(l.idempotency_residual < 1e-8);
        assert_eq!(l.rank, 1);
    }
}
