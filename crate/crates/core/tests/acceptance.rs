//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line; the
//! process exits non-zero when any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use jointspec::branch::{self, BranchKind, BranchOptions};
use jointspec::coxeter::{
    self, build_representation, check_rigidity, CoxeterMatrix, DihedralIrrep, RigidityOptions, RigidityReport, Summand,
};
use jointspec::fixtures;
use jointspec::linalg::{self, from_real_rows, max_abs, op_norm, real_diag, CMat, C64};
use jointspec::moments::{self, BranchData, RelationId, Verification, VerifyOptions};
use jointspec::pencil::{self, MatrixTuple};
use jointspec::riesz::{self, QuadratureOptions};

const ALPHAS: [f64; 5] = [PI / 3.0, PI / 4.0, PI / 5.0, 2.0 * PI / 5.0, PI / 2.0];

fn one() -> [C64; 1] {
    [C64::new(1.0, 0.0)]
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }

    fn error(e: impl std::fmt::Display) -> Self {
        Self::new(false, format!("error: {e}"))
    }
}

fn timed(budget: Option<Duration>, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let mut v = f();
    let took = start.elapsed();
    v.detail = format!("{}; {:.2}s", v.detail, took.as_secs_f64());
    if let Some(b) = budget {
        if took > b {
            v.pass = false;
            v.detail = format!("{} exceeds the {:.0}s budget", v.detail, b.as_secs_f64());
        }
    }
    v
}

/// `x_1 = 1 - t` branch of the non-normal pair: the eigenprojection of
/// `[[1, 1 - t], [0, 1 - 2t]]` for the eigenvalue 1 is `[[1, (1 - t)/(2t)], [0, 0]]`.
fn nonnormal_oracle(t: f64) -> CMat {
    from_real_rows(&[&[1.0, (1.0 - t) / (2.0 * t)], &[0.0, 0.0]])
}

fn criterion_1() -> Verdict {
    let run = || -> jointspec::Result<Verdict> {
        let t = fixtures::nonnormal_pair();
        let branches = branch::local_branches(&t, re(1.0), &one(), &BranchOptions::default())?;
        let br = branches
            .iter()
            .find(|b| (b.d1 + re(1.0)).norm() < 1e-6)
            .expect("x1 = 1 - t branch");
        let q = QuadratureOptions::default();
        let p = riesz::component_projection(&t, br, 0.1, &q)?;
        let err = max_abs(&(&p.projection - from_real_rows(&[&[1.0, 4.5], &[0.0, 0.0]])));
        let ladder = riesz::log_ladder(1e-1, 1e-4, 13);
        let profile = riesz::projection_norm_profile(&t, br, &ladder, &q)?;
        let mut ladder_err: f64 = 0.0;
        for &s in &ladder {
            let ps = riesz::component_projection(&t, br, s, &q)?;
            let o = nonnormal_oracle(s);
            ladder_err = ladder_err.max(max_abs(&(&ps.projection - &o)) / max_abs(&o));
        }
        let exponent = riesz::fit_exponent(&profile);
        let pass = err <= 1e-10 && (exponent + 1.0).abs() <= 0.05 && ladder_err <= 1e-9;
        Ok(Verdict::new(
            pass,
            format!("|P(0.1) - oracle| = {err:.1e}, exponent {exponent:.4}, ladder rel. error {ladder_err:.1e}"),
        ))
    };
    run().unwrap_or_else(Verdict::error)
}

fn criterion_2() -> Verdict {
    let run = || -> jointspec::Result<Verdict> {
        let mut worst_x: f64 = 0.0;
        let mut worst_z: f64 = 0.0;
        let mut points = 0;
        for alpha in ALPHAS {
            let c = alpha.cos();
            let t = fixtures::dihedral_pair(alpha);
            let z = moments::product_pair(&t, &one())?;
            let x_curve = |x1: C64, x2: C64| x1 * x1 + x1 * x2 * (2.0 * c) + x2 * x2 - 1.0;
            let z_curve = |x1: C64, x2: C64| x1 * x1 - x2 * x2 + x2 * (2.0 * c) - 1.0;
            let mut x_pts = 0;
            let mut z_pts = 0;
            for k in 0..100 {
                let x2 = re(-1.8 + 3.6 * (k as f64 + 0.5) / 100.0);
                for x1 in pencil::slice_roots(&t, &one(), x2)?.finite {
                    worst_x = worst_x.max(x_curve(x1, x2).norm());
                    x_pts += 1;
                }
                for x1 in pencil::slice_roots(&z, &one(), x2)?.finite {
                    worst_z = worst_z.max(z_curve(x1, x2).norm());
                    z_pts += 1;
                }
            }
            if x_pts != 200 || z_pts != 200 {
                return Ok(Verdict::new(false, format!("alpha {alpha:.4}: only {x_pts}/{z_pts} points")));
            }
            points += x_pts + z_pts;
        }
        Ok(Verdict::new(
            worst_x <= 1e-9 && worst_z <= 1e-9,
            format!("{points} points, max residual {worst_x:.1e} (pair), {worst_z:.1e} (product pair)"),
        ))
    };
    run().unwrap_or_else(Verdict::error)
}

fn criterion_3() -> Verdict {
    let run = || -> jointspec::Result<Verdict> {
        let opts = BranchOptions::default();
        let mut worst: f64 = 0.0;
        for alpha in ALPHAS {
            let c = alpha.cos();
            let t = fixtures::dihedral_pair(alpha);
            let x = branch::local_branches(&t, re(1.0), &one(), &opts)?;
            let z = branch::local_branches(&moments::product_pair(&t, &one())?, re(1.0), &one(), &opts)?;
            if x.len() != 1 || z.len() != 1 {
                return Ok(Verdict::new(false, format!("alpha {alpha:.4}: unexpected branch count")));
            }
            worst = worst
                .max((x[0].d1 - re(-c)).norm())
                .max((x[0].d2 - re(-1.0 + c * c)).norm())
                .max((z[0].d2 - re(1.0 - c * c)).norm());
        }
        Ok(Verdict::new(worst <= 1e-7, format!("max derivative error {worst:.1e}")))
    };
    run().unwrap_or_else(Verdict::error)
}

struct Instance {
    seed: u64,
    dim: usize,
    with_zero: bool,
    tuple: MatrixTuple,
    verification: Verification,
}

struct Suite {
    instances: Vec<Instance>,
    rejected: usize,
}

/// Seeded random instances, keeping those whose regularity checks pass.
fn random_suite(count: usize, with_zero: bool, first_seed: u64) -> Suite {
    let mut instances = Vec::new();
    let mut rejected = 0;
    let mut seed = first_seed;
    while instances.len() < count {
        let dim = 4 + (seed as usize % 5);
        let tuple = fixtures::random_pair_instance(seed, dim, with_zero);
        match moments::verify_tuple(&tuple, &one(), &VerifyOptions::default()) {
            Ok(verification) => instances.push(Instance {
                seed,
                dim,
                with_zero,
                tuple,
                verification,
            }),
            Err(_) => rejected += 1,
        }
        seed += 1;
    }
    Suite { instances, rejected }
}

fn worst(suite: &[&Instance], ids: &[RelationId]) -> (f64, usize) {
    let mut w: f64 = 0.0;
    let mut n = 0;
    for inst in suite {
        for rep in inst.verification.reports().filter(|r| ids.contains(&r.relation)) {
            w = w.max(rep.residual);
            n += 1;
        }
    }
    (w, n)
}

fn skipped(suite: &[&Instance]) -> Vec<String> {
    suite
        .iter()
        .flat_map(|i| {
            i.verification
                .eigenvalues
                .iter()
                .flat_map(move |e| e.skipped.iter().map(move |s| format!("seed {} N={}: {s}", i.seed, i.dim)))
        })
        .collect()
}

fn criterion_4(main: &Suite, zero: &Suite) -> Verdict {
    let all: Vec<&Instance> = main.instances.iter().chain(&zero.instances).collect();
    let missing = skipped(&all);
    let (w1, n1) = worst(&all, &[RelationId::FirstMoment]);
    let (w2, n2) = worst(&all, &[RelationId::SecondMoment]);
    let (w3, n3) = worst(&all, &[RelationId::FirstMomentZeroCase]);
    let (w4, n4) = worst(&all, &[RelationId::SecondMomentZeroCase]);
    let zero_ok = zero.instances.iter().all(|i| i.with_zero) && n3 > 0 && n4 > 0;
    let pass = missing.is_empty() && zero_ok && n1 > 0 && n2 > 0 && w1.max(w2).max(w3).max(w4) <= 1e-5;
    let mut detail = format!(
        "{} + {} instances ({} + {} rejected); first {w1:.1e} ({n1}), second {w2:.1e} ({n2}), zero-case first {w3:.1e} ({n3}), second {w4:.1e} ({n4})",
        main.instances.len(),
        zero.instances.len(),
        main.rejected,
        zero.rejected
    );
    if !missing.is_empty() {
        detail = format!("{detail}; skipped: {}", missing.join("; "));
    }
    Verdict::new(pass, detail)
}

fn zero_fixture() -> MatrixTuple {
    MatrixTuple::new(vec![
        real_diag(&[0.0, 2.0]),
        from_real_rows(&[&[0.3, -0.7], &[0.45, 0.2]]),
    ])
    .expect("fixture")
}

fn fixture_tuples() -> Vec<(String, MatrixTuple)> {
    let mut v = vec![
        ("diagonal".to_string(), fixtures::diagonal_pair()),
        ("zero eigenvalue".to_string(), zero_fixture()),
    ];
    for alpha in ALPHAS {
        v.push((format!("dihedral {alpha:.4}"), fixtures::dihedral_pair(alpha)));
    }
    v
}

fn criterion_5(main: &Suite, zero: &Suite) -> Verdict {
    let run = || -> jointspec::Result<Verdict> {
        let mut w: f64 = 0.0;
        let mut n = 0;
        for (_, t) in fixture_tuples() {
            let v = moments::verify_tuple(&t, &one(), &VerifyOptions::default())?;
            for rep in v.reports() {
                if matches!(rep.relation, RelationId::Orthogonality | RelationId::Resolution) {
                    w = w.max(rep.residual);
                    n += 1;
                }
            }
        }
        let all: Vec<&Instance> = main.instances.iter().chain(&zero.instances).collect();
        let (wr, nr) = worst(&all, &[RelationId::Orthogonality, RelationId::Resolution]);
        Ok(Verdict::new(
            n > 0 && nr > 0 && w.max(wr) <= 1e-7,
            format!("fixtures {w:.1e} ({n} checks), random {wr:.1e} ({nr} checks)"),
        ))
    };
    run().unwrap_or_else(Verdict::error)
}

fn criterion_6(main: &Suite, zero: &Suite) -> Verdict {
    let run = || -> jointspec::Result<Verdict> {
        let all: Vec<&Instance> = main.instances.iter().chain(&zero.instances).collect();
        let (wl, nl) = worst(&all, &[RelationId::SameProjectionLemma]);
        let (ws, ns) = worst(&all, &[RelationId::SquareRelation]);
        let opts = VerifyOptions::default();
        let mut coef_err: f64 = 0.0;
        let mut dihedral_resid: f64 = 0.0;
        for alpha in ALPHAS {
            let t = fixtures::dihedral_pair(alpha);
            let b = t.get(1);
            // A_2 is an involution, so P B^2 P = P and the coefficient is 1
            assert!(max_abs(&(b * b - linalg::identity(2))) < 1e-15);
            for lam in [re(1.0), re(-1.0)] {
                let x = moments::branch_data(&t, lam, &one(), &opts)?;
                let z = moments::branch_data(&moments::product_pair(&t, &one())?, lam, &one(), &opts)?;
                let pairing = moments::pair_branches(&x, &z)?;
                for (xd, &k) in x.iter().zip(&pairing) {
                    let k_val = moments::square_coefficient(lam, xd.branch.d1, xd.branch.d2, z[k].branch.d2);
                    coef_err = coef_err.max((k_val - re(1.0)).norm());
                    let rep = moments::verify_square_relation(xd, &z[k], b, 1e-8)?;
                    dihedral_resid = dihedral_resid.max(rep.residual);
                }
            }
        }
        let pass = nl > 0 && ns > 0 && wl <= 1e-5 && ws <= 1e-5 && coef_err <= 1e-8 && dihedral_resid <= 1e-8;
        Ok(Verdict::new(
            pass,
            format!(
                "same projection {wl:.1e} ({nl}), square {ws:.1e} ({ns}); dihedral coefficient error {coef_err:.1e}, residual {dihedral_resid:.1e}"
            ),
        ))
    };
    run().unwrap_or_else(Verdict::error)
}

struct Planted {
    name: String,
    report: RigidityReport,
    rep_dim: usize,
}

fn planted(
    name: &str,
    cm: &CoxeterMatrix,
    summands: &[Summand],
    blocks: Option<Vec<CMat>>,
    seed: u64,
) -> jointspec::Result<Planted> {
    let rep = build_representation(cm, summands, Some(seed))?;
    let blocks = blocks.unwrap_or_else(|| coxeter::random_blocks(cm.n(), 2, 0.4, seed + 100));
    let t = coxeter::plant(&rep, &blocks, seed + 200)?;
    let report = check_rigidity(&t, &rep, &RigidityOptions::default())?;
    Ok(Planted {
        name: name.into(),
        report,
        rep_dim: rep.dim(),
    })
}

fn dihedral_summands(irreps: &[DihedralIrrep]) -> Vec<Summand> {
    irreps.iter().map(|&irrep| Summand::Dihedral { irrep }).collect()
}

fn criterion_7() -> Verdict {
    let run = || -> jointspec::Result<Verdict> {
        let two = |a: f64| DihedralIrrep::two_dim(a);
        let d = |m: u32| CoxeterMatrix::dihedral(Some(m)).expect("valid");
        let positives = vec![
            planted("D3", &d(3), &dihedral_summands(&[two(2.0 * PI / 3.0)]), None, 1)?,
            planted("D4", &d(4), &dihedral_summands(&[two(PI / 2.0)]), None, 2)?,
            planted("D5", &d(5), &dihedral_summands(&[two(2.0 * PI / 5.0)]), None, 3)?,
            planted(
                "D5 two irreps",
                &d(5),
                &dihedral_summands(&[two(2.0 * PI / 5.0), two(4.0 * PI / 5.0)]),
                None,
                4,
            )?,
            planted("A3 geometric", &CoxeterMatrix::type_a(3), &[Summand::Geometric], None, 5)?,
        ];
        let mut failures = Vec::new();
        for p in &positives {
            if !p.report.all_pass(p.rep_dim) {
                failures.push(p.name.clone());
            }
        }

        let dup = planted(
            "D3 duplicated irrep",
            &d(3),
            &dihedral_summands(&[two(2.0 * PI / 3.0), two(2.0 * PI / 3.0)]),
            None,
            6,
        )?;
        let dup_ok = !dup.report.condition_star && dup.report.condition_i && dup.report.condition_ii;

        // an extra sheet through (1, 0): B_1 has eigenvalue 1
        let mut g = fixtures::rng(77);
        let mut blocks = coxeter::random_blocks(2, 2, 0.4, 107);
        blocks[0] = fixtures::random_normal(&mut g, &[re(1.0), C64::new(0.1, 0.2)]);
        let sheet = planted("D3 extra sheet", &d(3), &dihedral_summands(&[two(2.0 * PI / 3.0)]), Some(blocks), 7)?;
        let sheet_ok = sheet.report.condition_star && sheet.report.condition_i && !sheet.report.condition_ii;

        let worst_restriction = positives
            .iter()
            .filter_map(|p| p.report.restriction.as_ref())
            .map(|r| r.unitary_residual.max(r.self_adjoint_residual).max(r.relation_residual))
            .fold(0.0, f64::max);
        let worst_char = positives
            .iter()
            .filter_map(|p| p.report.equivalence.as_ref())
            .map(|e| e.max_discrepancy)
            .fold(0.0, f64::max);
        let pass = failures.is_empty() && dup_ok && sheet_ok;
        Ok(Verdict::new(
            pass,
            format!(
                "{} planted tuples, failing [{}]; restriction residual {worst_restriction:.1e}, character discrepancy {worst_char:.1e}; duplicate control {}, extra-sheet control {}",
                positives.len(),
                failures.join(", "),
                if dup_ok { "flips (*) only" } else { "wrong" },
                if sheet_ok { "flips (II) only" } else { "wrong" },
            ),
        ))
    };
    run().unwrap_or_else(Verdict::error)
}

/// Eigenprojection `v w* / (w* v)` for the eigenvalue of `m` nearest `center`.
fn direct_eigenprojection(m: &CMat, center: C64) -> CMat {
    let eig = linalg::eigenvalues(m).expect("eigenvalues");
    let mu = *eig
        .iter()
        .min_by(|a, b| (*a - center).norm().partial_cmp(&(*b - center).norm()).unwrap())
        .expect("nonempty");
    let shifted = m - linalg::identity(m.nrows()) * mu;
    let v = linalg::null_vector(&shifted);
    let w = linalg::null_vector(&shifted.adjoint());
    let denom = (w.adjoint() * &v)[(0, 0)];
    (&v * w.adjoint()) / denom
}

fn oracle_limit(t: &MatrixTuple, d: &BranchData, h: f64) -> jointspec::Result<CMat> {
    let b = &d.branch;
    let mut sum = CMat::zeros(t.dim(), t.dim());
    for s in [h, -h] {
        let value = b.evaluate(t, s)?;
        sum += direct_eigenprojection(&b.pencil_matrix(t, s, value)?, b.contour_center());
    }
    Ok(sum / re(2.0))
}

fn criterion_8(main: &Suite) -> Verdict {
    let run = || -> jointspec::Result<Verdict> {
        let mut tuples = fixture_tuples();
        for inst in main.instances.iter().take(6) {
            tuples.push((format!("random seed {}", inst.seed), inst.tuple.clone()));
        }
        let opts = VerifyOptions::default();
        let mut w: f64 = 0.0;
        let mut n = 0;
        let mut kinds = [0usize; 2];
        for (_, t) in &tuples {
            let res = branch::spectral_resolution(t.first(), branch::default_cluster_tol(t.first()))?;
            for &lam in &res.eigenvalues {
                for d in moments::branch_data(t, lam, &one(), &opts)? {
                    if d.branch.multiplicity != 1 {
                        continue;
                    }
                    let o = oracle_limit(t, &d, 1e-6)?;
                    w = w.max(op_norm(&(&d.limit.projection - o)));
                    n += 1;
                    kinds[usize::from(d.branch.kind == BranchKind::ZeroLambda)] += 1;
                }
            }
        }
        Ok(Verdict::new(
            n > 0 && kinds[1] > 0 && w <= 1e-6,
            format!(
                "{n} branches on {} tuples ({} with lambda = 0), max |limit - oracle| {w:.1e}",
                tuples.len(),
                kinds[1]
            ),
        ))
    };
    run().unwrap_or_else(Verdict::error)
}

fn main() {
    let secs = Duration::from_secs;
    let mut verdicts = Vec::new();
    verdicts.push(("1 non-normal blow-up", timed(Some(secs(1)), criterion_1)));
    verdicts.push(("2 dihedral catalog", timed(Some(secs(5)), criterion_2)));
    verdicts.push(("3 branch derivatives", timed(None, criterion_3)));
    let start = Instant::now();
    let main_suite = random_suite(20, false, 1000);
    let zero_suite = random_suite(6, true, 5000);
    let build = start.elapsed();
    verdicts.push((
        "4 moment relations",
        timed(None, || {
            let mut v = criterion_4(&main_suite, &zero_suite);
            if build > secs(60) {
                v.pass = false;
            }
            v.detail = format!("{}; suite built in {:.2}s", v.detail, build.as_secs_f64());
            v
        }),
    ));
    verdicts.push(("5 orthogonality and resolution", timed(None, || criterion_5(&main_suite, &zero_suite))));
    verdicts.push(("6 same projection and square relation", timed(None, || criterion_6(&main_suite, &zero_suite))));
    verdicts.push(("7 Coxeter rigidity", timed(Some(secs(120)), criterion_7)));
    verdicts.push(("8 limit vs direct eigenprojection", timed(None, || criterion_8(&main_suite))));

    let mut failed = 0;
    for (name, v) in &verdicts {
        println!("criterion {name}: {} ({})", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {}/{} criteria pass", verdicts.len() - failed, verdicts.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
