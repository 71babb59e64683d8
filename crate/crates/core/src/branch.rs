//! Local analysis of the joint spectrum near `(1/lambda, 0, ..., 0)`.
//!
//! For an eigenvalue `lambda != 0` of `A_1`, each spectral component through
//! `(1/lambda, 0, ..., 0)` is locally a graph `x_1 = x_1(t xhat)`; for
//! `lambda = 0` the components through the origin of the chart `x_1 = 1` are
//! graphs `x_{n+1} = x_{n+1}(t xhat)`, i.e. eigenvalues of `A_1 + t B` near 0.
//! Components are never factored: a tracked branch of roots stands in for its
//! component.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrapolate::richardson;
use crate::linalg::{self, r, CMat, C64};
use crate::pencil::{self, MatrixTuple};
use crate::riesz;

/// `A_1 = sum_lambda lambda P_lambda` for normal `A_1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralResolution {
    pub eigenvalues: Vec<C64>,
    pub projections: Vec<CMat>,
    pub multiplicities: Vec<usize>,
    pub cluster_tol: f64,
}

impl SpectralResolution {
    pub fn index_of(&self, lambda: C64) -> Option<usize> {
        let tol = self.cluster_tol.max(1e-12);
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, e)| (*e - lambda).norm() <= tol)
            .min_by(|a, b| {
                (a.1 - lambda)
                    .norm()
                    .partial_cmp(&(b.1 - lambda).norm())
                    .unwrap()
            })
            .map(|(i, _)| i)
    }

    pub fn projection(&self, lambda: C64) -> Result<&CMat> {
        self.index_of(lambda)
            .map(|i| &self.projections[i])
            .ok_or(Error::UnknownEigenvalue { lambda })
    }

    pub fn multiplicity(&self, lambda: C64) -> Result<usize> {
        self.index_of(lambda)
            .map(|i| self.multiplicities[i])
            .ok_or(Error::UnknownEigenvalue { lambda })
    }

    pub fn dim(&self) -> usize {
        self.projections.first().map_or(0, |p| p.nrows())
    }
}

/// Default clustering tolerance `1e-8 * ||A_1||`.
pub fn default_cluster_tol(a1: &CMat) -> f64 {
    1e-8 * linalg::op_norm(a1).max(1.0)
}

const NORMALITY_TOL: f64 = 1e-8;

pub fn spectral_resolution(a1: &CMat, cluster_tol: f64) -> Result<SpectralResolution> {
    let report = pencil::normality(a1, NORMALITY_TOL);
    if !report.is_normal {
        return Err(Error::NotNormal {
            commutator_norm: report.commutator_norm,
        });
    }
    let n = a1.nrows();
    let (q, t) = linalg::schur(a1)?;
    let diag: Vec<C64> = (0..n).map(|i| t[(i, i)]).collect();
    let mut groups = linalg::cluster_points(&diag, cluster_tol);
    let mean = |g: &Vec<usize>| g.iter().map(|&i| diag[i]).sum::<C64>() / r(g.len() as f64);
    groups.sort_by(|a, b| {
        let (ma, mb) = (mean(a), mean(b));
        ma.re
            .partial_cmp(&mb.re)
            .unwrap()
            .then(ma.im.partial_cmp(&mb.im).unwrap())
    });
    let mut eigenvalues = Vec::new();
    let mut projections = Vec::new();
    let mut multiplicities = Vec::new();
    for g in &groups {
        let cols: Vec<_> = g.iter().map(|&i| q.column(i).into_owned()).collect();
        let basis = linalg::columns_to_matrix(n, &cols);
        projections.push(&basis * basis.adjoint());
        eigenvalues.push(mean(g));
        multiplicities.push(g.len());
    }
    Ok(SpectralResolution {
        eigenvalues,
        projections,
        multiplicities,
        cluster_tol,
    })
}

/// Reduced resolvent `T_lambda = sum_{mu != lambda} P_mu / (lambda - mu)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TOperator {
    pub base_eigenvalue: C64,
    pub matrix: CMat,
}

pub fn t_operator(res: &SpectralResolution, lambda: C64) -> Result<TOperator> {
    let k = res.index_of(lambda).ok_or(Error::UnknownEigenvalue { lambda })?;
    let lam = res.eigenvalues[k];
    let n = res.dim();
    let mut m = CMat::zeros(n, n);
    for (i, (mu, p)) in res.eigenvalues.iter().zip(&res.projections).enumerate() {
        if i != k {
            m += p * (r(1.0) / (lam - mu));
        }
    }
    Ok(TOperator {
        base_eigenvalue: lam,
        matrix: m,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    /// `x_1(t)` near `1/lambda`.
    NonzeroLambda,
    /// `x_{n+1}(t)` near `0` in the chart `x_1 = 1`.
    ZeroLambda,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BranchOptions {
    pub t_max: f64,
    pub samples: usize,
    /// Absolute clustering tolerance for eigenvalues of `A_1`; `None` uses
    /// `1e-8 * ||A_1||`.
    pub cluster_tol: Option<f64>,
    /// A match is accepted only if the second-nearest candidate is this many
    /// times farther than the nearest.
    pub match_ratio: f64,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            t_max: 1e-2,
            samples: 8,
            cluster_tol: None,
            match_ratio: 4.0,
        }
    }
}

impl BranchOptions {
    /// `t_k = t_max 2^{-k}`, coarse to fine.
    pub fn ladder(&self) -> Vec<f64> {
        (0..self.samples)
            .map(|k| self.t_max / 2f64.powi(k as i32))
            .collect()
    }

    fn cluster_tol_for(&self, a1: &CMat) -> f64 {
        self.cluster_tol.unwrap_or_else(|| default_cluster_tol(a1))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Branch {
    pub lambda: C64,
    pub kind: BranchKind,
    pub direction: Vec<C64>,
    pub index: usize,
    /// `(t, value)` on the ladder, both signs of `t`, sorted by `t`.
    pub samples: Vec<(f64, C64)>,
    /// Relative pencil residual at each sample.
    pub residuals: Vec<f64>,
    pub d1: C64,
    pub d2: C64,
    pub d1_error: f64,
    pub d2_error: f64,
    /// Number of coincident roots tracked together.
    pub root_count: usize,
    /// Rank of the component projection at a regular sample.
    pub multiplicity: usize,
    /// Fitted `d_j` in `|value(t) - base| <= d_j |t|`.
    pub slope_bound: f64,
}

impl Branch {
    /// `1/lambda` or `0`.
    pub fn base_value(&self) -> C64 {
        base_value(self.kind, self.lambda)
    }

    /// Taylor prediction `base + d1 t + d2 t^2 / 2`.
    pub fn predict(&self, t: f64) -> C64 {
        self.base_value() + self.d1 * t + self.d2 * (0.5 * t * t)
    }

    /// Re-solves for the branch value at an arbitrary real `t` near the
    /// ladder, picking the `root_count` roots nearest the Taylor prediction.
    pub fn evaluate(&self, tuple: &MatrixTuple, t: f64) -> Result<C64> {
        let roots = branch_roots(tuple, self.kind, &self.direction, t)?;
        let pred = self.predict(t);
        let mut by_dist: Vec<C64> = roots;
        by_dist.sort_by(|a, b| (a - pred).norm().partial_cmp(&(b - pred).norm()).unwrap());
        if by_dist.len() < self.root_count {
            return Err(Error::Tracking(format!(
                "only {} roots available at t = {t:e}",
                by_dist.len()
            )));
        }
        let picked = &by_dist[..self.root_count];
        Ok(picked.iter().sum::<C64>() / r(self.root_count as f64))
    }

    /// The matrix whose eigenvalue at the contour centre the branch tracks:
    /// `x_1(t) A_1 + t B` (centre 1) or `A_1 + t B - x_{n+1}(t) I` (centre 0).
    pub fn pencil_matrix(&self, tuple: &MatrixTuple, t: f64, value: C64) -> Result<CMat> {
        let b = tuple.directional(&self.direction)?;
        Ok(match self.kind {
            BranchKind::NonzeroLambda => tuple.first() * value + b * r(t),
            BranchKind::ZeroLambda => {
                tuple.first() + b * r(t) - linalg::identity(tuple.dim()) * value
            }
        })
    }

    pub fn contour_center(&self) -> C64 {
        match self.kind {
            BranchKind::NonzeroLambda => r(1.0),
            BranchKind::ZeroLambda => r(0.0),
        }
    }
}

fn base_value(kind: BranchKind, lambda: C64) -> C64 {
    match kind {
        BranchKind::NonzeroLambda => r(1.0) / lambda,
        BranchKind::ZeroLambda => r(0.0),
    }
}

fn kind_for(lambda: C64, scale: f64) -> BranchKind {
    if lambda.norm() <= 1e-12 * scale.max(1.0) {
        BranchKind::ZeroLambda
    } else {
        BranchKind::NonzeroLambda
    }
}

/// Finite roots at parameter `t`: slice roots `x_1` (nonzero kind) or
/// eigenvalues of `A_1 + t B` (zero kind).
fn branch_roots(tuple: &MatrixTuple, kind: BranchKind, direction: &[C64], t: f64) -> Result<Vec<C64>> {
    match kind {
        BranchKind::NonzeroLambda => Ok(pencil::slice_roots(tuple, direction, r(t))?.finite),
        BranchKind::ZeroLambda => {
            let b = tuple.directional(direction)?;
            linalg::eigenvalues(&(tuple.first() + b * r(t)))
        }
    }
}

fn residual_at(tuple: &MatrixTuple, kind: BranchKind, direction: &[C64], t: f64, value: C64) -> Result<f64> {
    let b = tuple.directional(direction)?;
    let n = tuple.dim();
    Ok(match kind {
        BranchKind::NonzeroLambda => {
            let a = tuple.first() * value + &b * r(t);
            let scale = 1.0 + linalg::op_norm(&a);
            linalg::min_singular_value(&(a - linalg::identity(n))) / scale
        }
        BranchKind::ZeroLambda => {
            let a = tuple.first() + &b * r(t);
            let scale = 1.0 + linalg::op_norm(&a);
            linalg::min_singular_value(&(a - linalg::identity(n) * value)) / scale
        }
    })
}

/// Roots near the base value at one ladder level, grouped into coincident
/// clusters, before tracking.
struct Seed {
    values: Vec<C64>,
    counts: Vec<usize>,
}

fn seed_groups(roots: &[C64], base: C64, count: usize, t: f64) -> Result<Seed> {
    if roots.len() < count {
        return Err(Error::Tracking(format!(
            "expected {count} roots near {base}, found only {} finite roots",
            roots.len()
        )));
    }
    let mut sorted = roots.to_vec();
    sorted.sort_by(|a, b| (a - base).norm().partial_cmp(&(b - base).norm()).unwrap());
    if let Some(next) = sorted.get(count) {
        let far = (next - base).norm();
        let near = (sorted[count - 1] - base).norm();
        if far <= 2.0 * near {
            return Err(Error::Tracking(format!(
                "roots near {base} are not separated from the rest at t = {t:e}"
            )));
        }
    }
    let near = &sorted[..count];
    let group_tol = 1e-4 * t.abs() * (1.0 + base.norm());
    let groups = linalg::cluster_points(near, group_tol);
    let mut pairs: Vec<(C64, usize)> = groups
        .iter()
        .map(|g| (g.iter().map(|&i| near[i]).sum::<C64>() / r(g.len() as f64), g.len()))
        .collect();
    // order branches by slope so that indices are reproducible
    pairs.sort_by(|a, b| {
        let (sa, sb) = ((a.0 - base) / r(t), (b.0 - base) / r(t));
        sa.re
            .partial_cmp(&sb.re)
            .unwrap()
            .then(sa.im.partial_cmp(&sb.im).unwrap())
    });
    Ok(Seed {
        values: pairs.iter().map(|p| p.0).collect(),
        counts: pairs.iter().map(|p| p.1).collect(),
    })
}

/// One step of predictor / nearest-neighbour matching. `preds[g]` is the
/// linear prediction of group `g`; each group claims its `counts[g]` nearest
/// roots, subject to the separation ratio.
fn match_level(
    roots: &[C64],
    preds: &[C64],
    counts: &[usize],
    ratio: f64,
    t: f64,
) -> Result<Vec<C64>> {
    let mut claimed = vec![false; roots.len()];
    let mut out = Vec::with_capacity(preds.len());
    for (pred, &m) in preds.iter().zip(counts) {
        let mut idx: Vec<usize> = (0..roots.len()).collect();
        idx.sort_by(|&a, &b| (roots[a] - pred).norm().partial_cmp(&(roots[b] - pred).norm()).unwrap());
        if idx.len() < m {
            return Err(Error::Tracking(format!("ran out of roots at t = {t:e}")));
        }
        let near = (roots[idx[m - 1]] - pred).norm();
        if let Some(&second) = idx.get(m) {
            let far = (roots[second] - pred).norm();
            let floor = 1e-13 * (1.0 + pred.norm());
            if far < ratio * near.max(floor) {
                return Err(Error::BranchCollision {
                    t,
                    ratio: far / near.max(f64::MIN_POSITIVE),
                });
            }
        }
        let mut acc = r(0.0);
        for &i in &idx[..m] {
            if claimed[i] {
                return Err(Error::BranchCollision { t, ratio: 1.0 });
            }
            claimed[i] = true;
            acc += roots[i];
        }
        out.push(acc / r(m as f64));
    }
    Ok(out)
}

/// Tracks every branch through `(1/lambda, 0, ..., 0)` (or through the
/// origin for `lambda = 0`) along `t xhat` on the geometric ladder.
pub fn local_branches(
    tuple: &MatrixTuple,
    lambda: C64,
    direction: &[C64],
    opts: &BranchOptions,
) -> Result<Vec<Branch>> {
    if opts.samples < 5 {
        return Err(Error::InvalidInput("branch tracking needs at least 5 ladder samples".into()));
    }
    if direction.iter().all(|d| d.norm() == 0.0) {
        return Err(Error::InvalidInput("direction must be nonzero".into()));
    }
    let a1 = tuple.first();
    let a1_norm = linalg::op_norm(a1);
    let kind = kind_for(lambda, a1_norm);
    let base = base_value(kind, lambda);
    let cluster_tol = opts.cluster_tol_for(a1);
    let eig = linalg::eigenvalues(a1)?;
    let m_lambda = eig.iter().filter(|e| (*e - lambda).norm() <= cluster_tol.max(1e-12)).count();
    if m_lambda == 0 {
        return Err(Error::UnknownEigenvalue { lambda });
    }

    let ladder = opts.ladder();
    let t_min = *ladder.last().unwrap();
    let seed = seed_groups(&branch_roots(tuple, kind, direction, t_min)?, base, m_lambda, t_min)?;
    let groups = seed.values.len();

    let mut traces: Vec<Vec<(f64, C64)>> = vec![Vec::new(); groups];
    for sign in [1.0, -1.0] {
        let mut prev_t = t_min;
        let mut prev: Vec<C64> = seed.values.clone();
        if sign < 0.0 {
            // mirror the first-order term to seed the negative side
            let t = -t_min;
            let roots = branch_roots(tuple, kind, direction, t)?;
            let preds: Vec<C64> = prev.iter().map(|v| base - (v - base)).collect();
            prev = match_level(&roots, &preds, &seed.counts, opts.match_ratio, t)?;
            prev_t = t;
        }
        for (g, v) in prev.iter().enumerate() {
            traces[g].push((prev_t, *v));
        }
        for &tk in ladder.iter().rev().skip(1) {
            let t = sign * tk;
            let roots = branch_roots(tuple, kind, direction, t)?;
            let preds: Vec<C64> = prev.iter().map(|v| base + (v - base) * (t / prev_t)).collect();
            let vals = match_level(&roots, &preds, &seed.counts, opts.match_ratio, t)?;
            for (g, v) in vals.iter().enumerate() {
                traces[g].push((t, *v));
            }
            prev = vals;
            prev_t = t;
        }
    }

    let mut branches = Vec::with_capacity(groups);
    for (g, mut samples) in traces.into_iter().enumerate() {
        samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let value = |t: f64| -> C64 {
            samples
                .iter()
                .find(|s| (s.0 - t).abs() <= 1e-15 * t.abs())
                .map(|s| s.1)
                .expect("ladder sample present")
        };
        let central: Vec<C64> = ladder
            .iter()
            .map(|&h| (value(h) - value(-h)) / r(2.0 * h))
            .collect();
        let second: Vec<C64> = ladder
            .iter()
            .map(|&h| (value(h) - base * 2.0 + value(-h)) / r(h * h))
            .collect();
        let e1 = richardson(&central, 2).expect("non-empty ladder");
        let e2 = richardson(&second, 2).expect("non-empty ladder");
        let scale1 = 1.0 + e1.value.norm();
        let scale2 = 1.0 + e2.value.norm();
        if e1.error > 1e-4 * scale1 {
            return Err(Error::Extrapolation { estimate: e1.error });
        }
        if e2.error > 1e-2 * scale2 {
            return Err(Error::Extrapolation { estimate: e2.error });
        }
        let residuals = samples
            .iter()
            .map(|&(t, v)| residual_at(tuple, kind, direction, t, v))
            .collect::<Result<Vec<_>>>()?;
        let slope_bound = samples
            .iter()
            .map(|&(t, v)| (v - base).norm() / t.abs())
            .fold(0.0, f64::max);
        branches.push(Branch {
            lambda,
            kind,
            direction: direction.to_vec(),
            index: g,
            samples,
            residuals,
            d1: e1.value,
            d2: e2.value,
            d1_error: e1.error,
            d2_error: e2.error,
            root_count: seed.counts[g],
            multiplicity: seed.counts[g],
            slope_bound,
        });
    }
    measure_multiplicities(tuple, &mut branches, &ladder);
    Ok(branches)
}

/// Replaces the root count by the rank of the component projection at a
/// mid-ladder sample when that projection can be formed.
fn measure_multiplicities(tuple: &MatrixTuple, branches: &mut [Branch], ladder: &[f64]) {
    let t = ladder[ladder.len() / 2];
    for b in branches.iter_mut() {
        if let Ok(p) = riesz::component_projection(tuple, b, t, &riesz::QuadratureOptions::default()) {
            b.multiplicity = p.rank.max(1);
        }
    }
}

/// `(d1, d2)` of a branch from its stored symmetric ladder samples.
pub fn branch_derivatives(b: &Branch) -> Result<(C64, C64)> {
    let positive: Vec<(f64, C64)> = b.samples.iter().filter(|s| s.0 > 0.0).rev().cloned().collect();
    if positive.len() < 5 {
        return Err(Error::InvalidInput("need at least 5 ladder samples".into()));
    }
    let base = b.base_value();
    let lookup = |t: f64| -> Result<C64> {
        b.samples
            .iter()
            .find(|s| (s.0 - t).abs() <= 1e-15 * t.abs())
            .map(|s| s.1)
            .ok_or_else(|| Error::InvalidInput(format!("missing mirrored sample at t = {t:e}")))
    };
    let mut central = Vec::new();
    let mut second = Vec::new();
    for &(h, v) in &positive {
        let m = lookup(-h)?;
        central.push((v - m) / r(2.0 * h));
        second.push((v - base * 2.0 + m) / r(h * h));
    }
    let e1 = richardson(&central, 2).expect("non-empty");
    let e2 = richardson(&second, 2).expect("non-empty");
    if e1.error > 1e-4 * (1.0 + e1.value.norm()) {
        return Err(Error::Extrapolation { estimate: e1.error });
    }
    if e2.error > 1e-2 * (1.0 + e2.value.norm()) {
        return Err(Error::Extrapolation { estimate: e2.error });
    }
    Ok((e1.value, e2.value))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegularityReport {
    pub lambda: C64,
    pub direction: Vec<C64>,
    pub condition_a: bool,
    pub condition_b: bool,
    /// `min_{i != j} |d1_i - d1_j|` over roots counted with multiplicity;
    /// `None` with fewer than two roots.
    pub branch_derivative_gaps: Option<f64>,
    /// Fitted `a` in `|x_i(t) - x_j(t)| >= a |t|`.
    pub tangency_margin: Option<f64>,
    /// Set when the margin falls below the regularity tolerance.
    pub tangency_flag: bool,
    /// Fitted exponent `p` in `max_j |x_j(t) - base| ~ t^p` at the finest levels.
    pub root_exponent: f64,
    pub branch_count: usize,
    pub root_count: usize,
    pub note: Option<String>,
}

const GAP_TOL: f64 = 1e-6;

/// Regularity conditions a), b) (or their `lambda = 0` analogues) along one
/// direction.
pub fn check_regularity(
    tuple: &MatrixTuple,
    lambda: C64,
    direction: &[C64],
    opts: &BranchOptions,
) -> Result<RegularityReport> {
    let a1 = tuple.first();
    let kind = kind_for(lambda, linalg::op_norm(a1));
    let base = base_value(kind, lambda);
    let cluster_tol = opts.cluster_tol_for(a1);
    let eig = linalg::eigenvalues(a1)?;
    let m_lambda = eig.iter().filter(|e| (*e - lambda).norm() <= cluster_tol.max(1e-12)).count();
    if m_lambda == 0 {
        return Err(Error::UnknownEigenvalue { lambda });
    }

    // a): every root near the base is finite and departs linearly in t
    let ladder = opts.ladder();
    let k = ladder.len();
    let mut spreads = Vec::new();
    let mut condition_a = true;
    for &t in &ladder[k - 3..] {
        let mut roots = branch_roots(tuple, kind, direction, t)?;
        if roots.len() < m_lambda {
            condition_a = false;
            break;
        }
        roots.sort_by(|a, b| (a - base).norm().partial_cmp(&(b - base).norm()).unwrap());
        spreads.push((t, (roots[m_lambda - 1] - base).norm()));
    }
    let mut root_exponent = 1.0;
    if condition_a {
        let (t0, s0) = spreads[0];
        let (t2, s2) = spreads[2];
        let floor = 1e-12 * (1.0 + base.norm());
        if s0 > floor && s2 > floor {
            root_exponent = (s0 / s2).ln() / (t0 / t2).ln();
        }
        condition_a = root_exponent > 0.85;
    }

    let mut report = RegularityReport {
        lambda,
        direction: direction.to_vec(),
        condition_a,
        condition_b: false,
        branch_derivative_gaps: None,
        tangency_margin: None,
        tangency_flag: false,
        root_exponent,
        branch_count: 0,
        root_count: m_lambda,
        note: None,
    };
    let branches = match local_branches(tuple, lambda, direction, opts) {
        Ok(b) => b,
        Err(e) => {
            report.note = Some(e.to_string());
            return Ok(report);
        }
    };
    report.branch_count = branches.len();
    let repeated = branches.iter().any(|b| b.root_count > 1);
    let d1_scale = 1.0 + branches.iter().map(|b| b.d1.norm()).fold(0.0, f64::max);
    let mut gap = if repeated { Some(0.0) } else { None };
    let mut margin: Option<f64> = if repeated { Some(0.0) } else { None };
    for i in 0..branches.len() {
        for j in i + 1..branches.len() {
            let g = (branches[i].d1 - branches[j].d1).norm();
            gap = Some(gap.map_or(g, |x: f64| x.min(g)));
            let a = branches[i]
                .samples
                .iter()
                .zip(&branches[j].samples)
                .map(|(si, sj)| (si.1 - sj.1).norm() / si.0.abs())
                .fold(f64::INFINITY, f64::min);
            margin = Some(margin.map_or(a, |x: f64| x.min(a)));
        }
    }
    report.branch_derivative_gaps = gap;
    report.tangency_margin = margin;
    report.condition_b = !repeated && gap.is_none_or(|g| g > GAP_TOL * d1_scale);
    report.tangency_flag = margin.is_some_and(|a| a <= GAP_TOL * d1_scale);
    if repeated {
        report.note = Some("a component is tracked with coincident roots".into());
    }
    Ok(report)
}

/// Runs [`check_regularity`] along several directions; for `n > 2` agreement
/// across directions is necessary, not sufficient, for gradient
/// non-proportionality.
pub fn check_regularity_directions(
    tuple: &MatrixTuple,
    lambda: C64,
    directions: &[Vec<C64>],
    opts: &BranchOptions,
) -> Result<Vec<RegularityReport>> {
    directions
        .iter()
        .map(|d| check_regularity(tuple, lambda, d, opts))
        .collect()
}
