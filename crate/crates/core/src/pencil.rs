//! Matrix tuples and their proper joint spectrum.
//!
//! A tuple `(A_1, ..., A_n)` of `N x N` complex matrices defines the pencil
//! `x_1 A_1 + ... + x_n A_n - I`; the proper joint spectrum is the set of
//! points `x` where that pencil is singular.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, r, CMat, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTuple {
    matrices: Vec<CMat>,
}

impl MatrixTuple {
    pub fn new(matrices: Vec<CMat>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::InvalidInput("a tuple needs at least one matrix".into()))?;
        let dim = first.nrows();
        if dim == 0 {
            return Err(Error::InvalidInput("matrices must be at least 1x1".into()));
        }
        for (k, m) in matrices.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "matrix {} is {}x{}, expected {dim}x{dim}",
                    k + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Self { matrices })
    }

    /// Real-valued convenience constructor; each matrix is given row-major.
    pub fn from_real(mats: &[&[&[f64]]]) -> Result<Self> {
        Self::new(mats.iter().map(|rows| linalg::from_real_rows(rows)).collect())
    }

    pub fn n(&self) -> usize {
        self.matrices.len()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.matrices
    }

    pub fn get(&self, k: usize) -> &CMat {
        &self.matrices[k]
    }

    pub fn first(&self) -> &CMat {
        &self.matrices[0]
    }

    /// `sum_k d_k A_{k+2}` for a direction in coordinates `2..=n`.
    pub fn directional(&self, direction: &[C64]) -> Result<CMat> {
        if direction.len() + 1 != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "direction has {} coordinates, tuple needs {}",
                direction.len(),
                self.n() - 1
            )));
        }
        let mut out = CMat::zeros(self.dim(), self.dim());
        for (d, a) in direction.iter().zip(&self.matrices[1..]) {
            out += a * *d;
        }
        Ok(out)
    }

    /// The tuple `(A_1, A_1 A_2, ..., A_1 A_n)`.
    pub fn with_products(&self) -> Self {
        let a1 = self.first();
        let mut mats = vec![a1.clone()];
        mats.extend(self.matrices[1..].iter().map(|a| a1 * a));
        Self { matrices: mats }
    }

    /// The extended tuple `(A_1, ..., A_n, A_1 A_2, ..., A_1 A_n)`.
    pub fn extended(&self) -> Self {
        let a1 = self.first();
        let mut mats = self.matrices.clone();
        mats.extend(self.matrices[1..].iter().map(|a| a1 * a));
        Self { matrices: mats }
    }

    /// `U A_k U*` for every matrix.
    pub fn conjugated(&self, u: &CMat) -> Self {
        let uh = u.adjoint();
        Self {
            matrices: self.matrices.iter().map(|a| u * a * &uh).collect(),
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch(format!(
                "cannot sum tuples of lengths {} and {}",
                self.n(),
                other.n()
            )));
        }
        Self::new(
            self.matrices
                .iter()
                .zip(&other.matrices)
                .map(|(a, b)| linalg::direct_sum(&[a.clone(), b.clone()]))
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PencilPoint(pub Vec<C64>);

impl PencilPoint {
    pub fn real(coords: &[f64]) -> Self {
        Self(coords.iter().map(|&x| r(x)).collect())
    }

    pub fn coords(&self) -> &[C64] {
        &self.0
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalityReport {
    pub commutator_norm: f64,
    pub is_normal: bool,
    pub is_diagonalizable: bool,
}

/// Normality of a matrix at a relative tolerance (`tol * ||A||^2` on the commutator).
/// Diagonalizability is tested numerically by the conditioning of the
/// eigenvector matrix assembled from null vectors of `A - mu I`.
pub fn normality(a: &CMat, tol: f64) -> NormalityReport {
    let scale = linalg::op_norm(a).max(1.0);
    let commutator_norm = linalg::commutator_norm(a);
    let is_normal = commutator_norm <= tol * scale * scale;
    let is_diagonalizable = is_normal || numerically_diagonalizable(a, tol);
    NormalityReport {
        commutator_norm,
        is_normal,
        is_diagonalizable,
    }
}

fn numerically_diagonalizable(a: &CMat, tol: f64) -> bool {
    let n = a.nrows();
    let Ok(ev) = linalg::eigenvalues(a) else {
        return false;
    };
    let scale = linalg::op_norm(a).max(1.0);
    let groups = linalg::cluster_points(&ev, 1e-6 * scale);
    let mut vectors = Vec::new();
    for g in groups {
        let mu = g.iter().map(|&i| ev[i]).sum::<C64>() / r(g.len() as f64);
        let shifted = a - CMat::identity(n, n) * mu;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested v_t");
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| {
            svd.singular_values[i]
                .partial_cmp(&svd.singular_values[j])
                .unwrap_or(Ordering::Equal)
        });
        let kernel: Vec<usize> = idx
            .into_iter()
            .take_while(|&i| svd.singular_values[i] <= tol.sqrt() * scale)
            .collect();
        if kernel.len() < g.len() {
            return false;
        }
        vectors.extend(kernel.into_iter().take(g.len()).map(|i| v_t.row(i).adjoint()));
    }
    let v = linalg::columns_to_matrix(n, &vectors);
    let sv = v.svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    smin > 0.0 && smax / smin < 1.0 / tol.sqrt()
}

/// `x_1 A_1 + ... + x_n A_n`.
pub fn evaluate_pencil(t: &MatrixTuple, x: &PencilPoint) -> Result<CMat> {
    if x.0.len() != t.n() {
        return Err(Error::DimensionMismatch(format!(
            "point has {} coordinates, tuple has {} matrices",
            x.0.len(),
            t.n()
        )));
    }
    let mut out = CMat::zeros(t.dim(), t.dim());
    for (xk, a) in x.0.iter().zip(t.matrices()) {
        out += a * *xk;
    }
    Ok(out)
}

/// `det(x_1 A_1 + ... + x_n A_n - I)`.
pub fn det_proper(t: &MatrixTuple, x: &PencilPoint) -> Result<C64> {
    let m = evaluate_pencil(t, x)? - linalg::identity(t.dim());
    Ok(linalg::determinant(&m))
}

/// `det(x_1 A_1 + ... + x_n A_n - x_{n+1} I)` in homogeneous coordinates.
pub fn det_projective(t: &MatrixTuple, x: &PencilPoint, x_last: C64) -> Result<C64> {
    let m = evaluate_pencil(t, x)? - linalg::identity(t.dim()) * x_last;
    Ok(linalg::determinant(&m))
}

/// Membership in the proper joint spectrum, judged by the smallest singular
/// value of the pencil relative to `1 + ||sum x_k A_k||`.
pub fn is_spectral_point(t: &MatrixTuple, x: &PencilPoint, tol: f64) -> Result<bool> {
    if tol <= 0.0 {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    Ok(spectral_residual(t, x)? <= tol)
}

/// `sigma_min(sum x_k A_k - I) / (1 + ||sum x_k A_k||)`.
pub fn spectral_residual(t: &MatrixTuple, x: &PencilPoint) -> Result<f64> {
    let a = evaluate_pencil(t, x)?;
    let scale = 1.0 + linalg::op_norm(&a);
    let m = a - linalg::identity(t.dim());
    Ok(linalg::min_singular_value(&m) / scale)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SliceRoots {
    /// Finite roots with multiplicity, sorted by real then imaginary part.
    pub finite: Vec<C64>,
    /// Number of roots at infinity.
    pub infinite: usize,
}

const SHIFTS: [(f64, f64); 6] = [
    (0.0, 0.0),
    (0.37, 0.21),
    (-0.53, 0.61),
    (1.71, -0.43),
    (-2.3, -1.1),
    (0.11, 3.7),
];

/// Roots `s` of `det(E + s F) = 0`, via a shift-and-invert reduction of the
/// generalized eigenproblem `E v = -s F v` to a standard one.
pub fn pencil_line_roots(e: &CMat, f: &CMat) -> Result<SliceRoots> {
    let n = e.nrows();
    let scale = linalg::op_norm(e) + linalg::op_norm(f);
    for &(sr, si) in &SHIFTS {
        let sigma = C64::new(sr, si);
        let shifted = e + f * sigma;
        if linalg::min_singular_value(&shifted) <= 1e-8 * scale.max(1.0) {
            continue;
        }
        let lu = shifted.lu();
        let k = lu
            .solve(f)
            .ok_or_else(|| Error::Eigensolver("shifted pencil is singular".into()))?;
        let knorm = k.norm();
        let nus = linalg::eigenvalues(&k)?;
        let mut finite = Vec::with_capacity(n);
        let mut infinite = 0;
        for nu in nus {
            if nu.norm() <= 64.0 * f64::EPSILON * knorm.max(f64::MIN_POSITIVE) || knorm == 0.0 {
                infinite += 1;
            } else {
                finite.push(sigma - C64::new(1.0, 0.0) / nu);
            }
        }
        sort_complex(&mut finite);
        return Ok(SliceRoots { finite, infinite });
    }
    Err(Error::Eigensolver(
        "pencil is singular for every trial shift (determinant vanishes identically)".into(),
    ))
}

/// Solves `det(x_1 A_1 + scale * sum_k d_k A_k - I) = 0` for `x_1`, where `d`
/// is a direction in coordinates `2..=n`.
pub fn slice_roots(t: &MatrixTuple, direction: &[C64], scale: C64) -> Result<SliceRoots> {
    let b = t.directional(direction)?;
    let e = b * scale - linalg::identity(t.dim());
    pencil_line_roots(&e, t.first())
}

pub fn sort_complex(v: &mut [C64]) {
    v.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
    });
}

/// Real rectangle `[x1_min, x1_max] x [x2_min, x2_max]`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Window {
    pub x1: (f64, f64),
    pub x2: (f64, f64),
}

impl Window {
    pub fn square(half: f64) -> Self {
        Self {
            x1: (-half, half),
            x2: (-half, half),
        }
    }
}

const MAX_NEWTON_STEPS: usize = 5;

/// Samples the real slice of the proper joint spectrum of a pair on a grid.
///
/// Each grid cell starts a Newton iteration on `det_proper` in `x_1` (with
/// `x_2` fixed at the cell row). A cell contributes a point only when Newton
/// converges within five steps to a root inside the cell that passes
/// `is_spectral_point` at `1e-8`.
pub fn sample_spectrum_curve(
    t: &MatrixTuple,
    window: Window,
    grid: (usize, usize),
) -> Result<Vec<PencilPoint>> {
    if t.n() != 2 {
        return Err(Error::InvalidInput(format!(
            "curve sampling needs a pair, got {} matrices",
            t.n()
        )));
    }
    let (n1, n2) = grid;
    if n1 == 0 || n2 == 0 {
        return Ok(Vec::new());
    }
    let w1 = (window.x1.1 - window.x1.0) / n1 as f64;
    let w2 = if n2 > 1 {
        (window.x2.1 - window.x2.0) / (n2 - 1) as f64
    } else {
        0.0
    };
    let dim = t.dim();
    let a1 = t.get(0);
    let a2 = t.get(1);
    let mut out = Vec::new();
    for j in 0..n2 {
        let x2 = r(window.x2.0 + w2 * j as f64);
        let base = a2 * x2 - linalg::identity(dim);
        for i in 0..n1 {
            let lo = window.x1.0 + w1 * i as f64;
            let hi = lo + w1;
            let mut x1 = r(lo + 0.5 * w1);
            let mut converged = false;
            for _ in 0..MAX_NEWTON_STEPS {
                let m = a1 * x1 + &base;
                // d/dx1 log det(M) = tr(M^{-1} A_1)
                let Some(sol) = m.lu().solve(a1) else {
                    converged = true;
                    break;
                };
                let dlog = sol.trace();
                if dlog.norm() == 0.0 {
                    break;
                }
                let step = C64::new(1.0, 0.0) / dlog;
                x1 -= step;
                if step.norm() <= 1e-12 * (1.0 + x1.norm()) {
                    converged = true;
                    break;
                }
            }
            if !converged || x1.re < lo || x1.re >= hi || x1.im.abs() > 1e-9 {
                continue;
            }
            let p = PencilPoint(vec![x1, x2]);
            if is_spectral_point(t, &p, 1e-8)? {
                out.push(p);
            }
        }
    }
    out.sort_by(|a, b| lex_cmp(a.coords(), b.coords()));
    Ok(out)
}

fn lex_cmp(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x
            .re
            .partial_cmp(&y.re)
            .unwrap_or(Ordering::Equal)
            .then(x.im.partial_cmp(&y.im).unwrap_or(Ordering::Equal));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::{c, max_abs};

    #[test]
    fn evaluate_zero_point_is_zero() {
        let t = MatrixTuple::new(vec![linalg::identity(2), linalg::identity(2)]).unwrap();
        let m = evaluate_pencil(&t, &PencilPoint::real(&[0.0, 0.0])).unwrap();
        assert_eq!(max_abs(&m), 0.0);
    }

    #[test]
    fn evaluate_picks_first_matrix() {
        let t = fixtures::nonnormal_pair();
        let m = evaluate_pencil(&t, &PencilPoint::real(&[1.0, 0.0])).unwrap();
        assert_eq!(m, *t.first());
    }

    #[test]
    fn dimension_errors() {
        let t = fixtures::nonnormal_pair();
        assert!(matches!(
            evaluate_pencil(&t, &PencilPoint::real(&[1.0])),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(MatrixTuple::new(vec![linalg::identity(2), linalg::identity(3)]).is_err());
        assert!(MatrixTuple::new(vec![]).is_err());
    }

    #[test]
    fn det_of_scalar_pencil() {
        let t = MatrixTuple::new(vec![linalg::identity(2), linalg::identity(2)]).unwrap();
        for (x1, x2) in [(0.3, -1.2), (2.0, 0.5), (-0.7, 0.1)] {
            let d = det_proper(&t, &PencilPoint::real(&[x1, x2])).unwrap();
            let want = (x1 + x2 - 1.0f64).powi(2);
            assert!((d - r(want)).norm() < 1e-13);
        }
    }

    #[test]
    fn det_of_nonnormal_example_factors_into_lines() {
        let t = fixtures::nonnormal_pair();
        for (x1, x2) in [(0.3, -1.2), (2.0, 0.5), (-0.7, 0.1)] {
            let d = det_proper(&t, &PencilPoint::real(&[x1, x2])).unwrap();
            let want = (x1 + x2 - 1.0) * (x1 - x2 - 1.0);
            assert!((d - r(want)).norm() < 1e-13);
        }
    }

    #[test]
    fn det_of_dihedral_irrep_is_ellipse() {
        let alpha = std::f64::consts::PI / 5.0;
        let t = fixtures::dihedral_pair(alpha);
        let z = PencilPoint(vec![c(0.3, 0.2), c(-1.1, 0.4)]);
        let d = det_proper(&t, &z).unwrap();
        let (x1, x2) = (z.0[0], z.0[1]);
        let ellipse = x1 * x1 + x1 * x2 * (2.0 * alpha.cos()) + x2 * x2 - r(1.0);
        assert!((d + ellipse).norm() < 1e-13);
    }

    #[test]
    fn spectral_membership() {
        let t = fixtures::nonnormal_pair();
        assert!(is_spectral_point(&t, &PencilPoint::real(&[0.5, 0.5]), 1e-10).unwrap());
        // det = (0.5 + 0.4 - 1)(0.5 - 0.4 - 1) = 0.09
        let d = det_proper(&t, &PencilPoint::real(&[0.5, 0.4])).unwrap();
        assert!((d - r(0.09)).norm() < 1e-14);
        assert!(!is_spectral_point(&t, &PencilPoint::real(&[0.5, 0.4]), 1e-10).unwrap());
        let id = MatrixTuple::new(vec![linalg::identity(2), linalg::identity(2)]).unwrap();
        assert!(is_spectral_point(&id, &PencilPoint::real(&[1.0, 0.0]), 1e-12).unwrap());
        assert!(is_spectral_point(&id, &PencilPoint::real(&[1.0, 0.0]), 0.0).is_err());
    }

    #[test]
    fn slice_roots_of_lines() {
        let t = fixtures::nonnormal_pair();
        let s = slice_roots(&t, &[r(1.0)], r(0.3)).unwrap();
        assert_eq!(s.infinite, 0);
        assert!((s.finite[0] - r(0.7)).norm() < 1e-13);
        assert!((s.finite[1] - r(1.3)).norm() < 1e-13);
    }

    #[test]
    fn slice_roots_of_dihedral() {
        let t = fixtures::dihedral_pair(std::f64::consts::PI / 3.0);
        let s = slice_roots(&t, &[r(1.0)], r(0.0)).unwrap();
        assert!((s.finite[0] - r(-1.0)).norm() < 1e-13);
        assert!((s.finite[1] - r(1.0)).norm() < 1e-13);
        // quadratic-formula oracle for x^2 + 0.2 x + 0.04 - 1 = 0
        let disc: f64 = 0.2 * 0.2 - 4.0 * (0.04 - 1.0);
        let lo = (-0.2 - disc.sqrt()) / 2.0;
        let hi = (-0.2 + disc.sqrt()) / 2.0;
        let s = slice_roots(&t, &[r(1.0)], r(0.2)).unwrap();
        assert!((s.finite[0] - r(lo)).norm() < 1e-13);
        assert!((s.finite[1] - r(hi)).norm() < 1e-13);
    }

    #[test]
    fn slice_roots_reports_infinite_roots() {
        let t = MatrixTuple::new(vec![linalg::real_diag(&[2.0, 0.0]), linalg::identity(2)])
            .unwrap();
        let s = slice_roots(&t, &[r(1.0)], r(0.0)).unwrap();
        assert_eq!(s.infinite, 1);
        assert_eq!(s.finite.len(), 1);
        assert!((s.finite[0] - r(0.5)).norm() < 1e-14);
    }

    #[test]
    fn sampled_lines() {
        let t = fixtures::nonnormal_pair();
        let pts = sample_spectrum_curve(&t, Window::square(2.0), (40, 41)).unwrap();
        assert!(pts.len() > 40);
        for p in &pts {
            let (x1, x2) = (p.0[0].re, p.0[1].re);
            let dist = (x1 + x2 - 1.0).abs().min((x1 - x2 - 1.0).abs());
            assert!(dist < 1e-8, "point ({x1}, {x2}) off both lines");
        }
    }

    #[test]
    fn sampled_circle() {
        let t = fixtures::dihedral_pair(std::f64::consts::FRAC_PI_2);
        let pts = sample_spectrum_curve(&t, Window::square(2.0), (40, 41)).unwrap();
        assert!(pts.len() > 20);
        for p in &pts {
            let (x1, x2) = (p.0[0], p.0[1]);
            assert!((x1 * x1 + x2 * x2 - r(1.0)).norm() < 1e-8);
        }
    }

    #[test]
    fn zero_tuple_has_empty_curve() {
        let t = MatrixTuple::new(vec![CMat::zeros(3, 3), CMat::zeros(3, 3)]).unwrap();
        assert!(sample_spectrum_curve(&t, Window::square(2.0), (20, 20))
            .unwrap()
            .is_empty());
    }
}
