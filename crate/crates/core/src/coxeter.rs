//! Coxeter and dihedral representations, the spectral catalog of dihedral
//! irreps, and sampled checks of the rigidity hypotheses and conclusions.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures;
use crate::linalg::{self, r, CMat, CVec, C64};
use crate::pencil::{self, MatrixTuple, PencilPoint};

/// Symmetric Coxeter matrix; `None` off the diagonal encodes `m_ij = infinity`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoxeterMatrix {
    m: Vec<Vec<Option<u32>>>,
}

impl CoxeterMatrix {
    pub fn new(m: Vec<Vec<Option<u32>>>) -> Result<Self> {
        let n = m.len();
        if n == 0 {
            return Err(Error::InvalidInput("Coxeter matrix is empty".into()));
        }
        for (i, row) in m.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput("Coxeter matrix is not square".into()));
            }
            for (j, &e) in row.iter().enumerate() {
                if e != m[j][i] {
                    return Err(Error::InvalidInput(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
                match (i == j, e) {
                    (true, Some(1)) => {}
                    (true, _) => return Err(Error::InvalidInput("diagonal entries must be 1".into())),
                    (false, Some(k)) if k < 2 => {
                        return Err(Error::InvalidInput("off-diagonal entries must be at least 2".into()))
                    }
                    _ => {}
                }
            }
        }
        Ok(Self { m })
    }

    /// Dihedral group of order `2m`.
    pub fn dihedral(m: Option<u32>) -> Result<Self> {
        Self::new(vec![vec![Some(1), m], vec![m, Some(1)]])
    }

    /// Type `A_n` (the symmetric group on `n + 1` letters).
    pub fn type_a(n: usize) -> Self {
        let m = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match i.abs_diff(j) {
                        0 => Some(1),
                        1 => Some(3),
                        _ => Some(2),
                    })
                    .collect()
            })
            .collect();
        Self { m }
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> Option<u32> {
        self.m[i][j]
    }

    pub fn rows(&self) -> &[Vec<Option<u32>>] {
        &self.m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IrrepKind {
    /// `rho(g_1) = rho(g_2) = 1`.
    OneDimPp,
    /// `rho(g_1) = rho(g_2) = -1`.
    OneDimMm,
    /// `rho(g_1) = 1, rho(g_2) = -1`.
    OneDimPm,
    /// `rho(g_1) = -1, rho(g_2) = 1`.
    OneDimMp,
    TwoDim,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DihedralIrrep {
    pub kind: IrrepKind,
    /// Rotation angle of `rho(g_1) rho(g_2)`, in `(0, pi)`, for two-dimensional irreps.
    pub angle: Option<f64>,
}

impl DihedralIrrep {
    pub fn two_dim(alpha: f64) -> Self {
        Self {
            kind: IrrepKind::TwoDim,
            angle: Some(alpha),
        }
    }

    pub fn one_dim(kind: IrrepKind) -> Self {
        assert!(kind != IrrepKind::TwoDim, "use two_dim for two-dimensional irreps");
        Self { kind, angle: None }
    }

    pub fn dim(&self) -> usize {
        if self.kind == IrrepKind::TwoDim {
            2
        } else {
            1
        }
    }

    fn signs(&self) -> Option<(f64, f64)> {
        match self.kind {
            IrrepKind::OneDimPp => Some((1.0, 1.0)),
            IrrepKind::OneDimMm => Some((-1.0, -1.0)),
            IrrepKind::OneDimPm => Some((1.0, -1.0)),
            IrrepKind::OneDimMp => Some((-1.0, 1.0)),
            IrrepKind::TwoDim => None,
        }
    }

    pub fn generators(&self) -> (CMat, CMat) {
        match self.signs() {
            Some((a, b)) => (linalg::real_diag(&[a]), linalg::real_diag(&[b])),
            None => {
                let alpha = self.angle.expect("two-dimensional irrep carries an angle");
                let (s, co) = alpha.sin_cos();
                (
                    linalg::real_diag(&[1.0, -1.0]),
                    linalg::from_real_rows(&[&[co, s], &[s, -co]]),
                )
            }
        }
    }

    pub fn tuple(&self) -> MatrixTuple {
        let (a, b) = self.generators();
        MatrixTuple::new(vec![a, b]).expect("generators share a size")
    }

    /// Smallest `m` with `(rho(g_1) rho(g_2))^m = 1`, if the angle is a
    /// rational multiple of `2 pi` with denominator at most `cap`.
    pub fn order(&self, cap: u32) -> Option<u32> {
        match self.kind {
            IrrepKind::OneDimPp | IrrepKind::OneDimMm => Some(1),
            IrrepKind::OneDimPm | IrrepKind::OneDimMp => Some(2),
            IrrepKind::TwoDim => rotation_order(self.angle.unwrap_or(0.0), cap),
        }
    }
}

/// Denominator of `theta / 2 pi` when it is rational with denominator `<= cap`.
pub fn rotation_order(theta: f64, cap: u32) -> Option<u32> {
    let frac = theta / std::f64::consts::TAU;
    (1..=cap).find(|&q| {
        let x = frac * q as f64;
        (x - x.round()).abs() <= 1e-8 * q as f64
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// `a x_1 + b x_2 = 1`.
    Line,
    /// `x_1^2 + 2 cos(alpha) x_1 x_2 + x_2^2 = 1`.
    Ellipse,
    /// `a x_1 + a b x_2 = 1` for the pair `(rho(g_1), rho(g_1) rho(g_2))`.
    GenLine,
    /// `x_1^2 - x_2^2 + 2 cos(alpha) x_2 = 1`.
    GenEllipseZ,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumComponentDescriptor {
    pub shape: Shape,
    /// Coefficients `(a, b)` of lines.
    pub signs: Option<(f64, f64)>,
    pub cos_alpha: Option<f64>,
}

impl SpectrumComponentDescriptor {
    /// Defining polynomial at `(x_1, x_2)`.
    pub fn evaluate(&self, x1: C64, x2: C64) -> C64 {
        let one = r(1.0);
        match self.shape {
            Shape::Line | Shape::GenLine => {
                let (a, b) = self.signs.unwrap_or((1.0, 1.0));
                x1 * a + x2 * b - one
            }
            Shape::Ellipse => {
                let co = self.cos_alpha.unwrap_or(0.0);
                x1 * x1 + x1 * x2 * (2.0 * co) + x2 * x2 - one
            }
            Shape::GenEllipseZ => {
                let co = self.cos_alpha.unwrap_or(0.0);
                x1 * x1 - x2 * x2 + x2 * (2.0 * co) - one
            }
        }
    }

    /// Points of the component over the given `x_2` values, every `x_1`
    /// solution included.
    pub fn points_over(&self, x2s: &[C64]) -> Vec<[C64; 2]> {
        let mut out = Vec::new();
        for &x2 in x2s {
            match self.shape {
                Shape::Line | Shape::GenLine => {
                    let (a, b) = self.signs.unwrap_or((1.0, 1.0));
                    out.push([(r(1.0) - x2 * b) / a, x2]);
                }
                Shape::Ellipse => {
                    let co = self.cos_alpha.unwrap_or(0.0);
                    // x_1 = -c x_2 +- sqrt(1 - (1 - c^2) x_2^2)
                    let root = (r(1.0) - x2 * x2 * (1.0 - co * co)).sqrt();
                    out.push([-x2 * co + root, x2]);
                    out.push([-x2 * co - root, x2]);
                }
                Shape::GenEllipseZ => {
                    let co = self.cos_alpha.unwrap_or(0.0);
                    let root = (r(1.0) + x2 * x2 - x2 * (2.0 * co)).sqrt();
                    out.push([root, x2]);
                    out.push([-root, x2]);
                }
            }
        }
        out
    }
}

/// Descriptors of the joint spectra of `(rho(g_1), rho(g_2))` and
/// `(rho(g_1), rho(g_1) rho(g_2))`.
pub fn dihedral_component_catalog(irrep: &DihedralIrrep) -> (SpectrumComponentDescriptor, SpectrumComponentDescriptor) {
    match irrep.signs() {
        Some((a, b)) => (
            SpectrumComponentDescriptor {
                shape: Shape::Line,
                signs: Some((a, b)),
                cos_alpha: None,
            },
            SpectrumComponentDescriptor {
                shape: Shape::GenLine,
                signs: Some((a, a * b)),
                cos_alpha: None,
            },
        ),
        None => {
            let co = irrep.angle.unwrap_or(0.0).cos();
            (
                SpectrumComponentDescriptor {
                    shape: Shape::Ellipse,
                    signs: None,
                    cos_alpha: Some(co),
                },
                SpectrumComponentDescriptor {
                    shape: Shape::GenEllipseZ,
                    signs: None,
                    cos_alpha: Some(co),
                },
            )
        }
    }
}

/// Irreducible summand of a Coxeter representation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Summand {
    /// Every generator acts by `1`.
    Trivial,
    /// Every generator acts by `-1`.
    Sign,
    /// The reflection representation of a finite Coxeter group.
    Geometric,
    /// A dihedral irrep; two-generator groups only.
    Dihedral { irrep: DihedralIrrep },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoxeterRep {
    pub matrix: CoxeterMatrix,
    pub summands: Vec<Summand>,
    pub conjugation_seed: Option<u64>,
    pub generators: Vec<CMat>,
}

impl CoxeterRep {
    pub fn dim(&self) -> usize {
        self.generators.first().map_or(0, |g| g.nrows())
    }

    pub fn tuple(&self) -> MatrixTuple {
        MatrixTuple::new(self.generators.clone()).expect("generators share a size")
    }

    /// Largest `||(g_i g_j)^{m_ij} - I||` and `||g_i^2 - I||`.
    pub fn relation_residual(&self) -> f64 {
        relation_residual(&self.generators, &self.matrix)
    }
}

pub fn relation_residual(gens: &[CMat], cm: &CoxeterMatrix) -> f64 {
    let n = gens.first().map_or(0, |g| g.nrows());
    let id = linalg::identity(n);
    let mut worst = 0.0f64;
    for i in 0..gens.len() {
        for j in i..gens.len() {
            if let Some(m) = cm.entry(i, j) {
                let p = linalg::mat_pow(&(&gens[i] * &gens[j]), m);
                worst = worst.max(linalg::op_norm(&(p - &id)));
            }
        }
    }
    worst
}

/// Reflection representation made orthogonal through the square root of the
/// Gram matrix `B_ij = -cos(pi / m_ij)`.
fn geometric_generators(cm: &CoxeterMatrix) -> Result<Vec<CMat>> {
    let n = cm.n();
    let mut b = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = match cm.entry(i, j) {
                Some(m) => -(std::f64::consts::PI / m as f64).cos(),
                None => -1.0,
            };
        }
    }
    let eig = nalgebra::SymmetricEigen::new(b.clone());
    if eig.eigenvalues.iter().any(|&e| e <= 1e-10) {
        return Err(Error::InconsistentAssignment(
            "the geometric representation of an infinite group is not unitary".into(),
        ));
    }
    let sqrt_d = nalgebra::DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let inv_sqrt_d = nalgebra::DMatrix::from_diagonal(&eig.eigenvalues.map(|e| 1.0 / e.sqrt()));
    let half = &eig.eigenvectors * sqrt_d * eig.eigenvectors.transpose();
    let inv_half = &eig.eigenvectors * inv_sqrt_d * eig.eigenvectors.transpose();
    let mut gens = Vec::with_capacity(n);
    for i in 0..n {
        // sigma_i(v) = v - 2 B(alpha_i, v) alpha_i in the root basis
        let mut s = nalgebra::DMatrix::<f64>::identity(n, n);
        for k in 0..n {
            s[(i, k)] -= 2.0 * b[(i, k)];
        }
        let o = &half * s * &inv_half;
        gens.push(o.map(r));
    }
    Ok(gens)
}

fn summand_generators(cm: &CoxeterMatrix, s: &Summand) -> Result<Vec<CMat>> {
    let n = cm.n();
    match s {
        Summand::Trivial => Ok(vec![linalg::identity(1); n]),
        Summand::Sign => Ok(vec![linalg::identity(1) * r(-1.0); n]),
        Summand::Geometric => geometric_generators(cm),
        Summand::Dihedral { irrep } => {
            if n != 2 {
                return Err(Error::InconsistentAssignment(
                    "dihedral summands need a two-generator Coxeter matrix".into(),
                ));
            }
            if let Some(alpha) = irrep.angle {
                if irrep.kind == IrrepKind::TwoDim && !(alpha > 0.0 && alpha < std::f64::consts::PI) {
                    return Err(Error::InconsistentAssignment(format!("angle {alpha} is outside (0, pi)")));
                }
            }
            let (a, b) = irrep.generators();
            Ok(vec![a, b])
        }
    }
}

/// Direct sum of the summands, optionally conjugated by a seeded random
/// unitary. Fails when the result violates a Coxeter relation.
pub fn build_representation(cm: &CoxeterMatrix, summands: &[Summand], conjugation_seed: Option<u64>) -> Result<CoxeterRep> {
    if summands.is_empty() {
        return Err(Error::InconsistentAssignment("no summands".into()));
    }
    let n = cm.n();
    let mut blocks: Vec<Vec<CMat>> = vec![Vec::new(); n];
    for s in summands {
        for (k, g) in summand_generators(cm, s)?.into_iter().enumerate() {
            blocks[k].push(g);
        }
    }
    let mut generators: Vec<CMat> = blocks.iter().map(|b| linalg::direct_sum(b)).collect();
    let resid = relation_residual(&generators, cm);
    if resid > 1e-10 {
        return Err(Error::InconsistentAssignment(format!(
            "summands violate the Coxeter relations (residual {resid:.3e})"
        )));
    }
    if let Some(seed) = conjugation_seed {
        let dim = generators[0].nrows();
        let u = fixtures::random_unitary(&mut fixtures::rng(seed), dim);
        generators = generators.iter().map(|g| &u * g * u.adjoint()).collect();
    }
    Ok(CoxeterRep {
        matrix: cm.clone(),
        summands: summands.to_vec(),
        conjugation_seed,
        generators,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IrrepCount {
    pub kind: IrrepKind,
    pub angle: Option<f64>,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairDecomposition {
    /// Generator indices `(0, i)`.
    pub pair: (usize, usize),
    pub components: Vec<IrrepCount>,
    pub multiplicity_free: bool,
}

const THETA_TOL: f64 = 1e-8;

/// Decomposes `(g_a, g_b)` into dihedral irreps through the eigenvalues of
/// the rotation `g_a g_b` and the action of `g_a` on its `+-1` eigenspaces.
pub fn decompose_pair(ga: &CMat, gb: &CMat) -> Result<Vec<IrrepCount>> {
    let rot = ga * gb;
    let n = rot.nrows();
    let (q, t) = linalg::schur(&rot)?;
    let diag: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let groups = linalg::cluster_points(&diag, THETA_TOL);
    let mut out = Vec::new();
    let mut by_angle: Vec<(f64, usize)> = Vec::new();
    for g in &groups {
        let mu = g.iter().map(|&i| diag[i]).sum::<C64>() / r(g.len() as f64);
        if (mu.norm() - 1.0).abs() > 1e-6 {
            return Err(Error::Eigensolver(format!("pair product is not unitary (eigenvalue {mu})")));
        }
        let theta = mu.arg();
        if theta.abs() <= THETA_TOL || (theta.abs() - std::f64::consts::PI).abs() <= THETA_TOL {
            let cols: Vec<CVec> = g.iter().map(|&i| q.column(i).into_owned()).collect();
            let basis = linalg::columns_to_matrix(n, &cols);
            let tr = (basis.adjoint() * ga * &basis).trace().re;
            let dim = g.len() as f64;
            let plus = ((dim + tr) / 2.0).round() as usize;
            let minus = g.len() - plus;
            let (kp, km) = if theta.abs() <= THETA_TOL {
                (IrrepKind::OneDimPp, IrrepKind::OneDimMm)
            } else {
                (IrrepKind::OneDimPm, IrrepKind::OneDimMp)
            };
            for (kind, m) in [(kp, plus), (km, minus)] {
                if m > 0 {
                    out.push(IrrepCount {
                        kind,
                        angle: None,
                        multiplicity: m,
                    });
                }
            }
        } else if theta > 0.0 {
            by_angle.push((theta, g.len()));
        }
    }
    by_angle.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for (theta, m) in by_angle {
        out.push(IrrepCount {
            kind: IrrepKind::TwoDim,
            angle: Some(theta),
            multiplicity: m,
        });
    }
    Ok(out)
}

/// Multiplicity-freeness of every pair `(g_1, g_i)`.
pub fn check_condition_star(rep: &CoxeterRep) -> Result<Vec<PairDecomposition>> {
    let g = &rep.generators;
    (1..g.len())
        .map(|i| {
            let components = decompose_pair(&g[0], &g[i])?;
            let multiplicity_free = components.iter().all(|c| c.multiplicity <= 1);
            Ok(PairDecomposition {
                pair: (0, i),
                components,
                multiplicity_free,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InclusionReport {
    pub holds: bool,
    pub seed: u64,
    pub lines: usize,
    pub points_checked: usize,
    pub failures: usize,
    pub max_residual: f64,
    pub witness: Option<Vec<C64>>,
}

fn gaussian_vec(rng: &mut ChaCha8Rng, k: usize) -> Vec<C64> {
    let m = fixtures::random_complex(rng, k.max(1), 1.0);
    (0..k).map(|i| m[(i, 0)]).collect()
}

const MEMBERSHIP_TOL: f64 = 1e-8;

/// Checks that every sampled point of `sigma_p(from)` lies in `sigma_p(into)`.
/// Points come from slices through random complex directions.
pub fn sampled_inclusion(from: &MatrixTuple, into: &MatrixTuple, lines: usize, seed: u64) -> Result<InclusionReport> {
    if from.n() != into.n() {
        return Err(Error::DimensionMismatch("tuples have different lengths".into()));
    }
    let mut rng = fixtures::rng(seed);
    let mut rep = InclusionReport {
        holds: true,
        seed,
        lines,
        points_checked: 0,
        failures: 0,
        max_residual: 0.0,
        witness: None,
    };
    let k = from.n() - 1;
    for _ in 0..lines {
        let dir = gaussian_vec(&mut rng, k);
        let scale: C64 = gaussian_vec(&mut rng, 1)[0];
        let roots = if k == 0 {
            pencil::pencil_line_roots(&(linalg::identity(from.dim()) * r(-1.0)), from.first())?
        } else {
            pencil::slice_roots(from, &dir, scale)?
        };
        for x1 in roots.finite {
            if x1.norm() > 1e6 {
                continue;
            }
            let mut coords = vec![x1];
            coords.extend(dir.iter().map(|d| d * scale));
            let p = PencilPoint(coords);
            let res = pencil::spectral_residual(into, &p)?;
            rep.points_checked += 1;
            rep.max_residual = rep.max_residual.max(res);
            if res > MEMBERSHIP_TOL {
                rep.failures += 1;
                rep.holds = false;
                if rep.witness.is_none() {
                    rep.witness = Some(p.0);
                }
            }
        }
    }
    Ok(rep)
}

/// `sigma_p(A_1, ..., A_n) \supset sigma_p(rho(g_1), ..., rho(g_n))` by sampling.
pub fn check_condition_i(t: &MatrixTuple, rep: &CoxeterRep, lines: usize, seed: u64) -> Result<InclusionReport> {
    sampled_inclusion(&rep.tuple(), t, lines, seed)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalMatch {
    /// Coordinate index `j` (0-based) and sign of `zeta_j^{+-}`.
    pub coordinate: usize,
    pub sign: i8,
    pub holds: bool,
    /// Sampled points of the tuple spectrum inside the ball, and of the
    /// representation spectrum inside the ball.
    pub tuple_points: usize,
    pub rep_points: usize,
    pub witness: Option<Vec<C64>>,
}

/// Points of `sigma_p(t)` on random complex lines through random base
/// points of the `epsilon`-ball around `center`, kept when inside the ball.
fn ball_points(t: &MatrixTuple, center: &[C64], epsilon: f64, lines: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<C64>>> {
    let k = center.len();
    let n = t.dim();
    let mut out = Vec::new();
    for _ in 0..lines {
        let mut offset = gaussian_vec(rng, k);
        let on: f64 = offset.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let radius = 0.5 * epsilon * rng.random::<f64>();
        for z in &mut offset {
            *z *= radius / on;
        }
        let base: Vec<C64> = center.iter().zip(&offset).map(|(c, o)| c + o).collect();
        let dir = gaussian_vec(rng, k);
        let mut e = -linalg::identity(n);
        let mut f = CMat::zeros(n, n);
        for ((b, d), a) in base.iter().zip(&dir).zip(t.matrices()) {
            e += a * *b;
            f += a * *d;
        }
        let roots = match pencil::pencil_line_roots(&e, &f) {
            Ok(r) => r,
            Err(_) => continue,
        };
        for s in roots.finite {
            let x: Vec<C64> = base.iter().zip(&dir).map(|(b, d)| b + d * s).collect();
            let dist: f64 = x.iter().zip(center).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            if dist < epsilon {
                out.push(x);
            }
        }
    }
    Ok(out)
}

/// Two-sided local equality of the extended spectra near every `zeta_j^{+-}`.
pub fn check_condition_ii(t: &MatrixTuple, rep: &CoxeterRep, epsilon: f64, lines: usize, seed: u64) -> Result<Vec<LocalMatch>> {
    if t.n() != rep.generators.len() {
        return Err(Error::DimensionMismatch("tuple and representation have different lengths".into()));
    }
    let ta = t.extended();
    let tr = rep.tuple().extended();
    let m = ta.n();
    let mut rng = fixtures::rng(seed);
    let mut out = Vec::new();
    for j in 0..t.n() {
        for sign in [1i8, -1] {
            let mut center = vec![r(0.0); m];
            center[j] = r(sign as f64);
            let from_tuple = ball_points(&ta, &center, epsilon, lines, &mut rng)?;
            let from_rep = ball_points(&tr, &center, epsilon, lines, &mut rng)?;
            let mut witness = None;
            for (pts, other) in [(&from_tuple, &tr), (&from_rep, &ta)] {
                for p in pts.iter() {
                    let res = pencil::spectral_residual(other, &PencilPoint(p.clone()))?;
                    if res > MEMBERSHIP_TOL && witness.is_none() {
                        witness = Some(p.clone());
                    }
                }
            }
            out.push(LocalMatch {
                coordinate: j,
                sign,
                holds: witness.is_none(),
                tuple_points: from_tuple.len(),
                rep_points: from_rep.len(),
                witness,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InvariantSubspace {
    /// Orthonormal columns spanning `L`.
    pub basis: CMat,
    pub dim: usize,
    /// `||(I - Pi_L) A_j Pi_L||` for each `j`.
    pub invariance_residuals: Vec<f64>,
    /// `Q* A_j Q`.
    pub restricted: Vec<CMat>,
}

fn kernel(m: &CMat, tol: f64) -> Vec<CVec> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    (0..n)
        .filter(|&i| svd.singular_values[i] <= tol)
        .map(|i| v_t.row(i).adjoint())
        .collect()
}

/// `L` = span of the `+1` and `-1` eigenvectors of `A_1`.
pub fn extract_invariant_subspace(t: &MatrixTuple) -> Result<InvariantSubspace> {
    let a1 = t.first();
    let n = t.dim();
    let tol = 1e-8 * linalg::op_norm(a1).max(1.0);
    let id = linalg::identity(n);
    let mut vecs = kernel(&(a1 - &id), tol);
    vecs.extend(kernel(&(a1 + &id), tol));
    let vecs = linalg::orthonormalize(&vecs, 1e-10);
    if vecs.is_empty() {
        return Err(Error::EmptySubspace);
    }
    let q = linalg::columns_to_matrix(n, &vecs);
    let proj = &q * q.adjoint();
    let comp = &id - &proj;
    let invariance_residuals = t.matrices().iter().map(|a| linalg::op_norm(&(&comp * a * &proj))).collect();
    let restricted = t.matrices().iter().map(|a| q.adjoint() * a * &q).collect();
    Ok(InvariantSubspace {
        dim: vecs.len(),
        basis: q,
        invariance_residuals,
        restricted,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairExponent {
    pub pair: (usize, usize),
    pub expected: Option<u32>,
    pub recovered: Option<u32>,
    /// Every order up to the cap consistent with the recovered angles.
    pub consistent: Vec<u32>,
    pub ambiguous: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RestrictionReport {
    pub unitary_residual: f64,
    pub self_adjoint_residual: f64,
    pub relation_residual: f64,
    pub spectra_match: bool,
    pub forward_inclusion: InclusionReport,
    pub backward_inclusion: InclusionReport,
    pub exponents: Vec<PairExponent>,
    pub exponents_recovered: bool,
}

pub const EXPONENT_CAP: u32 = 64;

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Order of `g_i g_j` read off the joint spectrum of `(g_i, g_i g_j)` on the
/// axis `x_1 = 0`, where the roots are the reciprocal eigenvalues.
pub fn recover_exponent(gi: &CMat, gj: &CMat, cap: u32) -> Result<Option<u32>> {
    let n = gi.nrows();
    let roots = pencil::pencil_line_roots(&(-linalg::identity(n)), &(gi * gj))?;
    let mut order = 1u32;
    for x in roots.finite {
        let theta = -x.arg();
        match rotation_order(theta, cap) {
            Some(q) => {
                order = order / gcd(order, q) * q;
                if order > cap {
                    return Ok(None);
                }
            }
            None => return Ok(None),
        }
    }
    Ok(Some(order))
}

/// Residual and spectral checks on the restricted generators.
pub fn verify_restriction(restricted: &[CMat], cm: &CoxeterMatrix, rep: &CoxeterRep, lines: usize, seed: u64) -> Result<RestrictionReport> {
    let k = restricted.first().map_or(0, |g| g.nrows());
    let id = linalg::identity(k);
    let mut unitary_residual = 0.0f64;
    let mut self_adjoint_residual = 0.0f64;
    for g in restricted {
        unitary_residual = unitary_residual.max(linalg::op_norm(&(g.adjoint() * g - &id)));
        self_adjoint_residual = self_adjoint_residual.max(linalg::op_norm(&(g - g.adjoint())));
    }
    let relation = relation_residual(restricted, cm);
    let tr = MatrixTuple::new(restricted.to_vec())?;
    let forward = sampled_inclusion(&tr, &rep.tuple(), lines, seed)?;
    let backward = sampled_inclusion(&rep.tuple(), &tr, lines, seed.wrapping_add(1))?;
    let mut exponents = Vec::new();
    for i in 0..restricted.len() {
        for j in i + 1..restricted.len() {
            let recovered = recover_exponent(&restricted[i], &restricted[j], EXPONENT_CAP)?;
            let consistent: Vec<u32> = match recovered {
                Some(q) => (1..=EXPONENT_CAP / q).map(|s| s * q).collect(),
                None => Vec::new(),
            };
            let expected = cm.entry(i, j);
            exponents.push(PairExponent {
                pair: (i, j),
                expected,
                recovered,
                ambiguous: recovered != expected && consistent.len() > 1,
                consistent,
            });
        }
    }
    let exponents_recovered = exponents.iter().all(|e| e.recovered == e.expected);
    Ok(RestrictionReport {
        unitary_residual,
        self_adjoint_residual,
        relation_residual: relation,
        spectra_match: forward.holds && backward.holds,
        forward_inclusion: forward,
        backward_inclusion: backward,
        exponents,
        exponents_recovered,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquivalenceEvidence {
    pub word_length_cap: usize,
    pub words_compared: usize,
    pub max_discrepancy: f64,
    pub worst_word: Vec<usize>,
}

/// Compares traces of all reduced generator words (no letter repeated
/// consecutively) up to the cap.
pub fn equivalence_evidence(lhs: &[CMat], rhs: &[CMat], word_length_cap: usize) -> Result<EquivalenceEvidence> {
    if lhs.len() != rhs.len() {
        return Err(Error::DimensionMismatch("generator counts differ".into()));
    }
    let mut ev = EquivalenceEvidence {
        word_length_cap,
        words_compared: 0,
        max_discrepancy: 0.0,
        worst_word: Vec::new(),
    };
    let (Some(l0), Some(r0)) = (lhs.first(), rhs.first()) else {
        return Ok(ev);
    };
    let mut frontier: Vec<(Vec<usize>, CMat, CMat)> =
        vec![(Vec::new(), linalg::identity(l0.nrows()), linalg::identity(r0.nrows()))];
    for _ in 0..word_length_cap {
        let mut next = Vec::new();
        for (word, lm, rm) in &frontier {
            for g in 0..lhs.len() {
                if word.last() == Some(&g) {
                    continue;
                }
                let lm2 = lm * &lhs[g];
                let rm2 = rm * &rhs[g];
                let d = (lm2.trace() - rm2.trace()).norm();
                let mut w = word.clone();
                w.push(g);
                ev.words_compared += 1;
                if d > ev.max_discrepancy {
                    ev.max_discrepancy = d;
                    ev.worst_word = w.clone();
                }
                next.push((w, lm2, rm2));
            }
        }
        frontier = next;
    }
    Ok(ev)
}

/// `A_i = U (rho(g_i) + B_i) U*` with the given extra blocks.
pub fn plant(rep: &CoxeterRep, blocks: &[CMat], seed: u64) -> Result<MatrixTuple> {
    if blocks.len() != rep.generators.len() {
        return Err(Error::DimensionMismatch("one block per generator is required".into()));
    }
    let mats: Vec<CMat> = rep
        .generators
        .iter()
        .zip(blocks)
        .map(|(g, b)| linalg::direct_sum(&[g.clone(), b.clone()]))
        .collect();
    let dim = mats[0].nrows();
    let u = fixtures::random_unitary(&mut fixtures::rng(seed), dim);
    Ok(MatrixTuple::new(mats)?.conjugated(&u))
}

/// Random blocks of size `extra` with operator norm `norm`; the first block
/// is normal so that `A_1` stays normal.
pub fn random_blocks(count: usize, extra: usize, norm: f64, seed: u64) -> Vec<CMat> {
    let mut g = fixtures::rng(seed);
    let mut out = Vec::with_capacity(count);
    let eig: Vec<C64> = (0..extra)
        .map(|_| C64::from_polar(norm * (0.3 + 0.7 * g.random::<f64>()), std::f64::consts::TAU * g.random::<f64>()))
        .collect();
    out.push(fixtures::random_normal(&mut g, &eig));
    for _ in 1..count {
        let m = fixtures::random_complex(&mut g, extra, 1.0);
        let s = linalg::op_norm(&m);
        out.push(m * r(norm / s));
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RigidityOptions {
    pub epsilon: f64,
    pub lines: usize,
    pub seed: u64,
    pub word_length_cap: usize,
    pub tol: f64,
}

impl Default for RigidityOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.15,
            lines: 24,
            seed: 0,
            word_length_cap: 8,
            tol: 1e-7,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RigidityReport {
    pub options: RigidityOptions,
    /// `||A_j||` for every `j`; the hypotheses ask for norm one.
    pub norms: Vec<f64>,
    pub condition_star: bool,
    pub star_pairs: Vec<PairDecomposition>,
    /// Condition b) of the branch analysis at `lambda = 1` for each pair `(A_1, A_i)`.
    pub regularity_at_one: Vec<Option<bool>>,
    pub condition_i: bool,
    pub inclusion: InclusionReport,
    pub condition_ii: bool,
    pub local_matches: Vec<LocalMatch>,
    pub dim_l: usize,
    pub l_basis: Option<CMat>,
    pub invariance_residuals: Vec<f64>,
    pub restriction: Option<RestrictionReport>,
    pub equivalence: Option<EquivalenceEvidence>,
    pub subspace_error: Option<String>,
}

impl RigidityReport {
    pub fn hypotheses_hold(&self) -> bool {
        self.condition_star && self.condition_i && self.condition_ii
    }

    /// All hypotheses and every conclusion check pass at the report tolerance.
    pub fn all_pass(&self, rep_dim: usize) -> bool {
        let tol = self.options.tol;
        self.hypotheses_hold()
            && self.dim_l == rep_dim
            && self.invariance_residuals.iter().all(|&x| x <= tol)
            && self.restriction.as_ref().is_some_and(|r| {
                r.unitary_residual <= tol
                    && r.self_adjoint_residual <= tol
                    && r.relation_residual <= tol
                    && r.spectra_match
                    && r.exponents_recovered
            })
            && self.equivalence.as_ref().is_some_and(|e| e.max_discrepancy <= 1e-6)
    }
}

/// Runs every hypothesis check and, whatever their outcome, the subspace
/// extraction and the conclusion checks.
pub fn check_rigidity(t: &MatrixTuple, rep: &CoxeterRep, opts: &RigidityOptions) -> Result<RigidityReport> {
    if t.n() != rep.generators.len() {
        return Err(Error::DimensionMismatch("tuple and representation have different lengths".into()));
    }
    let norms = t.matrices().iter().map(linalg::op_norm).collect();
    let star_pairs = check_condition_star(rep)?;
    let condition_star = star_pairs.iter().all(|p| p.multiplicity_free);
    let regularity_at_one = (1..t.n())
        .map(|i| {
            let pair = MatrixTuple::new(vec![t.first().clone(), t.get(i).clone()]).ok()?;
            crate::branch::check_regularity(&pair, r(1.0), &[r(1.0)], &Default::default())
                .ok()
                .map(|rep| rep.condition_a && rep.condition_b)
        })
        .collect();
    let inclusion = check_condition_i(t, rep, opts.lines, opts.seed)?;
    let local_matches = check_condition_ii(t, rep, opts.epsilon, opts.lines, opts.seed.wrapping_add(17))?;
    let condition_ii = local_matches.iter().all(|m| m.holds);
    let mut report = RigidityReport {
        options: opts.clone(),
        norms,
        condition_star,
        star_pairs,
        regularity_at_one,
        condition_i: inclusion.holds,
        inclusion,
        condition_ii,
        local_matches,
        dim_l: 0,
        l_basis: None,
        invariance_residuals: Vec::new(),
        restriction: None,
        equivalence: None,
        subspace_error: None,
    };
    match extract_invariant_subspace(t) {
        Ok(sub) => {
            report.dim_l = sub.dim;
            report.invariance_residuals = sub.invariance_residuals.clone();
            if sub.dim == rep.dim() {
                report.restriction = Some(verify_restriction(
                    &sub.restricted,
                    &rep.matrix,
                    rep,
                    opts.lines,
                    opts.seed.wrapping_add(31),
                )?);
                report.equivalence = Some(equivalence_evidence(&sub.restricted, &rep.generators, opts.word_length_cap)?);
            } else {
                report.subspace_error = Some(format!("dim L = {} but the representation has dimension {}", sub.dim, rep.dim()));
            }
            report.l_basis = Some(sub.basis);
        }
        Err(e) => report.subspace_error = Some(e.to_string()),
    }
    Ok(report)
}
