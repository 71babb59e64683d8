//! Numerical checks of the projection identities satisfied by limit
//! projections of spectral components.
//!
//! The identities are stated for `lambda = 1`; the checks use the forms
//! obtained by rescaling `A_1 -> A_1 / lambda`, which reduce to the stated
//! ones at `lambda = 1`. For `n > 2` the directional matrix
//! `B = sum_k xhat_k A_{k+1}` plays the role of `A_2`.

use serde::{Deserialize, Serialize};

use crate::branch::{self, Branch, BranchKind, BranchOptions, SpectralResolution, TOperator};
use crate::error::{Error, Result};
use crate::linalg::{self, r, CMat, C64};
use crate::pencil::MatrixTuple;
use crate::riesz::{self, LimitOptions, LimitProjection};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationId {
    Orthogonality,
    Resolution,
    CrossMomentZero,
    FirstMoment,
    FirstMomentZeroCase,
    SecondMoment,
    SecondMomentZeroCase,
    PrimeRelation1,
    PrimeRelation2,
    PrimeRelation3,
    PrimeRelation4,
    SameProjectionLemma,
    SquareRelation,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelationReport {
    pub relation: RelationId,
    pub lambda: C64,
    pub branches: Vec<usize>,
    /// Operator norm of `LHS - RHS`.
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// `false` when the relation was evaluated although the hypotheses of the
    /// underlying identity were not confirmed; `pass` is then no claim.
    pub hypotheses_met: bool,
}

impl RelationReport {
    fn new(relation: RelationId, lambda: C64, branches: Vec<usize>, residual: f64, tolerance: f64) -> Self {
        Self {
            relation,
            lambda,
            branches,
            residual,
            tolerance,
            pass: residual <= tolerance,
            hypotheses_met: true,
        }
    }
}

/// A tracked branch together with its limit projection.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchData {
    pub branch: Branch,
    pub limit: LimitProjection,
}

fn norm(m: &CMat) -> f64 {
    linalg::op_norm(m)
}

fn same_direction(items: &[&BranchData]) -> Result<()> {
    if let Some(first) = items.first() {
        for it in items {
            let d = &it.branch.direction;
            let same = d.len() == first.branch.direction.len()
                && d.iter().zip(&first.branch.direction).all(|(a, b)| (a - b).norm() <= 1e-14);
            if !same || (it.branch.lambda - first.branch.lambda).norm() > 1e-12 {
                return Err(Error::InvalidInput(
                    "branches must share the eigenvalue and the direction".into(),
                ));
            }
        }
    }
    Ok(())
}

fn require_simple(b: &BranchData) -> Result<()> {
    if b.branch.multiplicity != 1 {
        return Err(Error::Multiplicity {
            multiplicity: b.branch.multiplicity,
        });
    }
    Ok(())
}

/// `||P_i P_j||` for `i != j` and `||sum_j P_j - P_lambda||`.
pub fn verify_orthogonality_and_resolution(
    data: &[BranchData],
    res: &SpectralResolution,
    lambda: C64,
    tol: f64,
) -> Result<Vec<RelationReport>> {
    let refs: Vec<&BranchData> = data.iter().collect();
    same_direction(&refs)?;
    let p_lambda = res.projection(lambda)?;
    let mut out = Vec::new();
    for (i, a) in data.iter().enumerate() {
        for (j, b) in data.iter().enumerate() {
            if i != j {
                let resid = norm(&(&a.limit.projection * &b.limit.projection));
                out.push(RelationReport::new(RelationId::Orthogonality, lambda, vec![i, j], resid, tol));
            }
        }
    }
    let mut sum = CMat::zeros(p_lambda.nrows(), p_lambda.ncols());
    for d in data {
        sum += &d.limit.projection;
    }
    let resid = norm(&(sum - p_lambda));
    out.push(RelationReport::new(
        RelationId::Resolution,
        lambda,
        (0..data.len()).collect(),
        resid,
        tol,
    ));
    Ok(out)
}

/// `||P_j B P_i||` for `i != j`.
pub fn verify_cross_moment_zero(pi: &BranchData, pj: &BranchData, b: &CMat, tol: f64) -> Result<RelationReport> {
    same_direction(&[pi, pj])?;
    if pi.branch.index == pj.branch.index {
        return Err(Error::InvalidInput("cross moment needs two distinct branches".into()));
    }
    let resid = norm(&(&pj.limit.projection * b * &pi.limit.projection));
    Ok(RelationReport::new(
        RelationId::CrossMomentZero,
        pi.branch.lambda,
        vec![pj.branch.index, pi.branch.index],
        resid,
        tol,
    ))
}

/// `P B P + lambda x'(0) P = 0`, or `P B P - x'(0) P = 0` in the `lambda = 0` chart.
pub fn verify_first_moment(d: &BranchData, b: &CMat, tol: f64) -> Result<RelationReport> {
    require_simple(d)?;
    let p = &d.limit.projection;
    let pbp = p * b * p;
    let (id, resid) = match d.branch.kind {
        BranchKind::NonzeroLambda => (
            RelationId::FirstMoment,
            norm(&(pbp + p * (d.branch.lambda * d.branch.d1))),
        ),
        BranchKind::ZeroLambda => (RelationId::FirstMomentZeroCase, norm(&(pbp - p * d.branch.d1))),
    };
    Ok(RelationReport::new(id, d.branch.lambda, vec![d.branch.index], resid, tol))
}

/// `P B T B P + (x''(0)/2) P = 0`, or `P B T_0 B P - (x''(0)/2) P = 0`.
pub fn verify_second_moment(d: &BranchData, b: &CMat, t_op: &TOperator, tol: f64) -> Result<RelationReport> {
    require_simple(d)?;
    if (t_op.base_eigenvalue - d.branch.lambda).norm() > 1e-8 * (1.0 + d.branch.lambda.norm()) {
        return Err(Error::InvalidInput("reduced resolvent belongs to another eigenvalue".into()));
    }
    let p = &d.limit.projection;
    let lhs = p * b * &t_op.matrix * b * p;
    let half = d.branch.d2 * 0.5;
    let (id, resid) = match d.branch.kind {
        BranchKind::NonzeroLambda => (RelationId::SecondMoment, norm(&(lhs + p * half))),
        BranchKind::ZeroLambda => (RelationId::SecondMomentZeroCase, norm(&(lhs - p * half))),
    };
    Ok(RelationReport::new(id, d.branch.lambda, vec![d.branch.index], resid, tol))
}

/// Relations between `P_j`, its derivative `P'_j` and the other limit
/// projections of the same eigenvalue. For `lambda != 0`:
/// `P'_j (x'_j A_1 + B) P_j = P_j (x'_j A_1 + B) P'_j = -(lambda x''_j / 2) P_j`
/// and `P'_j (x'_j A_1 + B) P_i = P_i (x'_j A_1 + B) P'_j = 0` for `i != j`.
/// For `lambda = 0`: `P'_j (B - x'_j) P_j = P_j (B - x'_j) P'_j = (x''_j / 2) P_j`
/// and `P'_j (B - x'_j) P_i = P_i (B - x'_j) P'_j = 0`.
pub fn verify_prime_relations(
    data: &[BranchData],
    j: usize,
    a1: &CMat,
    b: &CMat,
    tol: f64,
) -> Result<Vec<RelationReport>> {
    let refs: Vec<&BranchData> = data.iter().collect();
    same_direction(&refs)?;
    let dj = data
        .get(j)
        .ok_or_else(|| Error::InvalidInput(format!("no branch with index {j}")))?;
    require_simple(dj)?;
    let br = &dj.branch;
    let p = &dj.limit.projection;
    let dp = &dj.limit.derivative;
    let n = a1.nrows();
    let (k, diag_rhs, id_same, id_cross) = match br.kind {
        BranchKind::NonzeroLambda => (
            a1 * br.d1 + b,
            p * (-(br.lambda * br.d2) * 0.5),
            RelationId::PrimeRelation1,
            RelationId::PrimeRelation3,
        ),
        BranchKind::ZeroLambda => (
            b - linalg::identity(n) * br.d1,
            p * (br.d2 * 0.5),
            RelationId::PrimeRelation2,
            RelationId::PrimeRelation4,
        ),
    };
    let mut out = Vec::new();
    let left = norm(&(dp * &k * p - &diag_rhs));
    let right = norm(&(p * &k * dp - &diag_rhs));
    out.push(RelationReport::new(id_same, br.lambda, vec![j], left.max(right), tol));
    for (i, di) in data.iter().enumerate() {
        if i == j {
            continue;
        }
        let pi = &di.limit.projection;
        let resid = norm(&(dp * &k * pi)).max(norm(&(pi * &k * dp)));
        out.push(RelationReport::new(id_cross, br.lambda, vec![j, i], resid, tol));
    }
    Ok(out)
}

/// Branches and limit projections of the pair `(A_1, A_1 B)` at `lambda`.
pub fn product_pair(tuple: &MatrixTuple, direction: &[C64]) -> Result<MatrixTuple> {
    let b = tuple.directional(direction)?;
    MatrixTuple::new(vec![tuple.first().clone(), tuple.first() * b])
}

/// Pairs each `x`-branch with the `z`-branch of `(A_1, A_1 B)` whose slope is
/// `lambda x'(0)`.
pub fn pair_branches(x: &[BranchData], z: &[BranchData]) -> Result<Vec<usize>> {
    let scale = 1.0 + z.iter().map(|d| d.branch.d1.norm()).fold(0.0, f64::max);
    let tol = 1e-6 * scale;
    x.iter()
        .map(|xd| {
            let target = xd.branch.lambda * xd.branch.d1;
            let hits: Vec<usize> = z
                .iter()
                .enumerate()
                .filter(|(_, zd)| (zd.branch.d1 - target).norm() <= tol)
                .map(|(k, _)| k)
                .collect();
            match hits.as_slice() {
                [k] => Ok(*k),
                [] => Err(Error::Pairing(format!("no z-branch with slope {target}"))),
                _ => Err(Error::Pairing(format!("{} z-branches with slope {target}", hits.len()))),
            }
        })
        .collect()
}

/// `max_j ||P_j - Q_{pi(j)}||` under the slope pairing.
pub fn verify_same_projection_lemma(x: &[BranchData], z: &[BranchData], tol: f64) -> Result<RelationReport> {
    let first = x.first().ok_or_else(|| Error::InvalidInput("no branches".into()))?;
    if first.branch.kind == BranchKind::ZeroLambda {
        return Err(Error::InvalidInput("the same-projection check needs lambda != 0".into()));
    }
    for d in x.iter().chain(z) {
        require_simple(d)?;
    }
    let pairing = pair_branches(x, z)?;
    let resid = x
        .iter()
        .zip(&pairing)
        .map(|(xd, &k)| norm(&(&xd.limit.projection - &z[k].limit.projection)))
        .fold(0.0, f64::max);
    Ok(RelationReport::new(
        RelationId::SameProjectionLemma,
        first.branch.lambda,
        (0..x.len()).collect(),
        resid,
        tol,
    ))
}

/// Coefficient `(z'' + 2 lambda^3 x'^2 - lambda^2 x'') / (2 lambda)` of `P` in
/// `P B^2 P`.
pub fn square_coefficient(lambda: C64, d1: C64, d2: C64, z2: C64) -> C64 {
    (z2 + lambda.powu(3) * d1 * d1 * 2.0 - lambda * lambda * d2) / (lambda * 2.0)
}

pub fn verify_square_relation(xd: &BranchData, zd: &BranchData, b: &CMat, tol: f64) -> Result<RelationReport> {
    if xd.branch.kind == BranchKind::ZeroLambda {
        return Err(Error::InvalidInput("the square relation needs lambda != 0".into()));
    }
    require_simple(xd)?;
    require_simple(zd)?;
    let lam = xd.branch.lambda;
    let coef = square_coefficient(lam, xd.branch.d1, xd.branch.d2, zd.branch.d2);
    let p = &xd.limit.projection;
    let resid = norm(&(p * b * b * p - p * coef));
    Ok(RelationReport::new(
        RelationId::SquareRelation,
        lam,
        vec![xd.branch.index, zd.branch.index],
        resid,
        tol,
    ))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub tol: f64,
    pub branch: BranchOptions,
    pub limit: LimitOptions,
    /// Evaluate relations even when regularity fails somewhere on `sigma(A_1)`.
    pub run_anyway: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            branch: BranchOptions::default(),
            limit: LimitOptions::default(),
            run_anyway: false,
        }
    }
}

impl VerifyOptions {
    pub fn with_ladder(mut self, t_max: f64, samples: usize) -> Self {
        self.branch.t_max = t_max;
        self.branch.samples = samples;
        self.limit.t_max = t_max;
        self.limit.samples = samples;
        self
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchSummary {
    pub index: usize,
    pub d1: C64,
    pub d2: C64,
    pub multiplicity: usize,
    pub limit_error: f64,
    pub idempotency_residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenvalueVerification {
    pub lambda: C64,
    pub kind: BranchKind,
    pub branches: Vec<BranchSummary>,
    pub product_branches: Vec<BranchSummary>,
    pub reports: Vec<RelationReport>,
    pub skipped: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verification {
    pub direction: Vec<C64>,
    pub hypotheses_met: bool,
    pub regularity: Vec<branch::RegularityReport>,
    pub eigenvalues: Vec<EigenvalueVerification>,
}

impl Verification {
    pub fn reports(&self) -> impl Iterator<Item = &RelationReport> {
        self.eigenvalues.iter().flat_map(|e| e.reports.iter())
    }

    pub fn all_pass(&self) -> bool {
        self.hypotheses_met && self.reports().all(|r| r.pass)
    }
}

/// Tracks every branch at `lambda` and computes its limit projection.
pub fn branch_data(tuple: &MatrixTuple, lambda: C64, direction: &[C64], opts: &VerifyOptions) -> Result<Vec<BranchData>> {
    branch::local_branches(tuple, lambda, direction, &opts.branch)?
        .into_iter()
        .map(|b| {
            let limit = riesz::limit_projection(tuple, &b, &opts.limit)?;
            Ok(BranchData { branch: b, limit })
        })
        .collect()
}

fn summarize(d: &[BranchData]) -> Vec<BranchSummary> {
    d.iter()
        .map(|x| BranchSummary {
            index: x.branch.index,
            d1: x.branch.d1,
            d2: x.branch.d2,
            multiplicity: x.branch.multiplicity,
            limit_error: x.limit.error,
            idempotency_residual: x.limit.idempotency_residual,
        })
        .collect()
}

fn collect(out: &mut Vec<RelationReport>, skipped: &mut Vec<String>, what: &str, r: Result<Vec<RelationReport>>) {
    match r {
        Ok(v) => out.extend(v),
        Err(e) => skipped.push(format!("{what}: {e}")),
    }
}

/// Runs every relation at every eigenvalue of `A_1` along `direction`.
pub fn verify_tuple(tuple: &MatrixTuple, direction: &[C64], opts: &VerifyOptions) -> Result<Verification> {
    let a1 = tuple.first();
    let res = branch::spectral_resolution(a1, opts.branch.cluster_tol.unwrap_or_else(|| branch::default_cluster_tol(a1)))?;
    let b = tuple.directional(direction)?;
    let mut regularity = Vec::new();
    for &lam in &res.eigenvalues {
        regularity.push(branch::check_regularity(tuple, lam, direction, &opts.branch)?);
    }
    let hypotheses_met = regularity.iter().all(|r| r.condition_a && r.condition_b);
    if !hypotheses_met && !opts.run_anyway {
        let bad: Vec<String> = regularity
            .iter()
            .filter(|r| !(r.condition_a && r.condition_b))
            .map(|r| format!("{}", r.lambda))
            .collect();
        return Err(Error::Hypotheses(format!(
            "regularity fails at eigenvalue(s) {}",
            bad.join(", ")
        )));
    }
    let pair = product_pair(tuple, direction)?;
    let one = [r(1.0)];
    let mut eigenvalues = Vec::new();
    for &lam in &res.eigenvalues {
        let data = branch_data(tuple, lam, direction, opts)?;
        let kind = data[0].branch.kind;
        let mut reports = Vec::new();
        let mut skipped = Vec::new();
        collect(
            &mut reports,
            &mut skipped,
            "orthogonality",
            verify_orthogonality_and_resolution(&data, &res, lam, opts.tol),
        );
        for i in 0..data.len() {
            for j in 0..data.len() {
                if i != j {
                    collect(
                        &mut reports,
                        &mut skipped,
                        "cross moment",
                        verify_cross_moment_zero(&data[i], &data[j], &b, opts.tol).map(|r| vec![r]),
                    );
                }
            }
        }
        let t_op = branch::t_operator(&res, lam)?;
        for (j, d) in data.iter().enumerate() {
            collect(&mut reports, &mut skipped, "first moment", verify_first_moment(d, &b, opts.tol).map(|r| vec![r]));
            collect(
                &mut reports,
                &mut skipped,
                "second moment",
                verify_second_moment(d, &b, &t_op, opts.tol).map(|r| vec![r]),
            );
            collect(&mut reports, &mut skipped, "prime relations", verify_prime_relations(&data, j, a1, &b, opts.tol));
        }
        let mut product_branches = Vec::new();
        if kind == BranchKind::NonzeroLambda {
            match branch_data(&pair, lam, &one, opts) {
                Ok(z) => {
                    collect(
                        &mut reports,
                        &mut skipped,
                        "same projection",
                        verify_same_projection_lemma(&data, &z, opts.tol).map(|r| vec![r]),
                    );
                    match pair_branches(&data, &z) {
                        Ok(pairing) => {
                            for (xd, &k) in data.iter().zip(&pairing) {
                                collect(
                                    &mut reports,
                                    &mut skipped,
                                    "square relation",
                                    verify_square_relation(xd, &z[k], &b, opts.tol).map(|r| vec![r]),
                                );
                            }
                        }
                        Err(e) => skipped.push(format!("square relation: {e}")),
                    }
                    product_branches = summarize(&z);
                }
                Err(e) => skipped.push(format!("product pair: {e}")),
            }
        }
        if !hypotheses_met {
            for r in &mut reports {
                r.hypotheses_met = false;
            }
        }
        eigenvalues.push(EigenvalueVerification {
            lambda: lam,
            kind,
            branches: summarize(&data),
            product_branches,
            reports,
            skipped,
        });
    }
    Ok(Verification {
        direction: direction.to_vec(),
        hypotheses_met,
        regularity,
        eigenvalues,
    })
}
