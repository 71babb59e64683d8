//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Promotes a real row-major matrix to a complex one.
pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| r(rows[i][j]))
}

pub fn real_diag(d: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(d.len(), d.iter().map(|&x| r(x))))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Spectral (operator 2-) norm.
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    sv.iter().cloned().fold(0.0, f64::max)
}

pub fn min_singular_value(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    sv.iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn determinant(m: &CMat) -> C64 {
    if m.is_empty() {
        return r(1.0);
    }
    m.clone().lu().determinant()
}

/// Complex Schur form `m = Q T Q*` with `T` upper triangular.
pub fn schur(m: &CMat) -> Result<(CMat, CMat)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((CMat::zeros(0, 0), CMat::zeros(0, 0)));
    }
    let scale = max_abs(m).max(1.0);
    let s = Schur::try_new(m.clone(), f64::EPSILON * scale, 10_000 * n.max(1))
        .ok_or(Error::Eigensolver("Schur iteration did not converge".into()))?;
    Ok(s.unpack())
}

/// All eigenvalues, with multiplicity, read from the diagonal of the Schur form.
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    let (_, t) = schur(m)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Right null vector of a (numerically) singular matrix: the right singular
/// vector of the smallest singular value.
pub fn null_vector(m: &CMat) -> CVec {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    v_t.row(k).adjoint()
}

/// Orthonormal basis for the column span of `cols` (modified Gram-Schmidt with
/// one reorthogonalisation pass); columns below `tol` after projection are dropped.
pub fn orthonormalize(cols: &[CVec], tol: f64) -> Vec<CVec> {
    let mut basis: Vec<CVec> = Vec::new();
    for v in cols {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let coef = q.dotc(&w);
                w -= q * coef;
            }
        }
        let nrm = w.norm();
        if nrm > tol {
            basis.push(w / r(nrm));
        }
    }
    basis
}

pub fn columns_to_matrix(n: usize, cols: &[CVec]) -> CMat {
    let mut m = CMat::zeros(n, cols.len());
    for (j, col) in cols.iter().enumerate() {
        m.set_column(j, col);
    }
    m
}

/// Integer power by repeated squaring.
pub fn mat_pow(m: &CMat, mut k: u32) -> CMat {
    let mut acc = identity(m.nrows());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            acc = &acc * &base;
        }
        base = &base * &base;
        k >>= 1;
    }
    acc
}

/// Block-diagonal direct sum.
pub fn direct_sum(blocks: &[CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(n, n);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

pub fn commutator_norm(a: &CMat) -> f64 {
    let ah = a.adjoint();
    op_norm(&(a * &ah - &ah * a))
}

/// Groups points whose distance is within `tol` (single linkage), preserving
/// first-appearance order. Returns the index lists of each group.
pub fn cluster_points(points: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut label = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if label[i] != usize::MAX {
            continue;
        }
        let g = groups.len();
        label[i] = g;
        let mut members = vec![i];
        let mut k = 0;
        while k < members.len() {
            let p = members[k];
            for j in 0..n {
                if label[j] == usize::MAX && (points[p] - points[j]).norm() <= tol {
                    label[j] = g;
                    members.push(j);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        groups.push(members);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schur_of_complex_rotation_is_triangular() {
        let m = from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let (q, t) = schur(&m).unwrap();
        assert!(t[(1, 0)].norm() < 1e-14);
        let back = &q * &t * q.adjoint();
        assert!(max_abs(&(back - &m)) < 1e-13);
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-13);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-13);
    }

    #[test]
    fn op_norm_of_diagonal() {
        assert!((op_norm(&real_diag(&[3.0, -5.0, 1.0])) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn clustering_is_transitive() {
        let pts = [r(0.0), r(1.0), r(0.5e-9), r(1e-9), r(1.0 + 1e-12)];
        let g = cluster_points(&pts, 0.6e-9);
        assert_eq!(g, vec![vec![0, 2, 3], vec![1, 4]]);
    }

    #[test]
    fn mat_pow_matches_repeated_product() {
        let m = from_real_rows(&[&[0.0, 1.0], &[-1.0, 1.0]]);
        let p = mat_pow(&m, 6);
        assert!(max_abs(&(p - identity(2))) < 1e-12);
    }
}
