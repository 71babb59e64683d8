//! Named matrix tuples used by tests, the CLI demos and the benchmarks, plus
//! seeded random instance generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::coxeter::DihedralIrrep;
use crate::linalg::{self, c, r, CMat, CVec, C64};
use crate::pencil::MatrixTuple;

/// `A_1 = [[1, 1], [0, 1]]`, `A_2 = diag(1, -1)`: reducible spectrum
/// `{x1 + x2 = 1} u {x1 - x2 = 1}` with non-normal `A_1`, whose component
/// projections blow up like `1/t`.
pub fn nonnormal_pair() -> MatrixTuple {
    MatrixTuple::from_real(&[&[&[1.0, 1.0], &[0.0, 1.0]], &[&[1.0, 0.0], &[0.0, -1.0]]])
        .expect("static fixture")
}

/// Commuting diagonal variant `A_1 = I_2`, `A_2 = diag(1, -1)`.
pub fn diagonal_pair() -> MatrixTuple {
    MatrixTuple::new(vec![linalg::real_diag(&[1.0, 1.0]), linalg::real_diag(&[1.0, -1.0])])
        .expect("static fixture")
}

/// Canonical two-dimensional dihedral irrep with rotation angle `alpha`.
pub fn dihedral_pair(alpha: f64) -> MatrixTuple {
    DihedralIrrep::two_dim(alpha).tuple()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMat {
    CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * (scale / std::f64::consts::SQRT_2)
    })
}

/// Haar-ish random unitary from the QR factorisation of a complex Gaussian
/// matrix, with the phases of `R`'s diagonal folded back into `Q`.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let g = random_complex(rng, n, 1.0);
    let qr = g.qr();
    let (mut q, rr) = qr.unpack();
    for j in 0..n {
        let d = rr[(j, j)];
        let phase = if d.norm() > 0.0 { d / r(d.norm()) } else { r(1.0) };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}

/// `U diag(eigenvalues) U*` with a random unitary `U`.
pub fn random_normal<R: Rng>(rng: &mut R, eigenvalues: &[C64]) -> CMat {
    let n = eigenvalues.len();
    let u = random_unitary(rng, n);
    let d = CMat::from_diagonal(&CVec::from_column_slice(eigenvalues));
    &u * d * u.adjoint()
}

/// Random pair `(A_1, A_2)` with normal `A_1` whose spectrum has repeated
/// eigenvalues (so the joint spectrum is reducible at their reciprocals) and a
/// dense complex `A_2`. With `with_zero`, `0` is a double eigenvalue of `A_1`.
pub fn random_pair_instance(seed: u64, dim: usize, with_zero: bool) -> MatrixTuple {
    assert!(dim >= 2, "random instances need N >= 2");
    let mut g = rng(seed);
    let mut eig: Vec<C64> = Vec::with_capacity(dim);
    if with_zero {
        eig.extend([r(0.0), r(0.0)]);
    }
    while eig.len() < dim {
        // keep distinct eigenvalues well separated from each other and from 0
        let candidate = loop {
            let mag = 0.7 + 0.8 * g.random::<f64>();
            let ang = std::f64::consts::TAU * g.random::<f64>();
            let z = C64::from_polar(mag, ang);
            if eig.iter().all(|e| (e - z).norm() > 0.35) {
                break z;
            }
        };
        let mult = if dim - eig.len() >= 2 && g.random::<f64>() < 0.6 { 2 } else { 1 };
        for _ in 0..mult {
            eig.push(candidate);
        }
    }
    let a1 = random_normal(&mut g, &eig);
    let a2 = random_complex(&mut g, dim, 0.6);
    MatrixTuple::new(vec![a1, a2]).expect("square matrices of equal size")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_unitary_is_unitary() {
        let mut g = rng(7);
        let u = random_unitary(&mut g, 5);
        let e = &u * u.adjoint() - linalg::identity(5);
        assert!(linalg::max_abs(&e) < 1e-13);
    }

    #[test]
    fn random_instances_are_seeded_and_normal() {
        let a = random_pair_instance(11, 6, true);
        let b = random_pair_instance(11, 6, true);
        assert_eq!(a, b);
        assert!(linalg::commutator_norm(a.first()) < 1e-12);
        let ev = linalg::eigenvalues(a.first()).unwrap();
        assert_eq!(ev.iter().filter(|z| z.norm() < 1e-10).count(), 2);
    }
}
