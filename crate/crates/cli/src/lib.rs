//! Command implementations behind the `jointspec` binary.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check fails,
//! 2 for unreadable or malformed input, 3 when the numerics refuse (blow-up,
//! non-normal `A_1`, failed tracking or quadrature).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use jointspec::branch::{self, BranchOptions, RegularityReport};
use jointspec::coxeter::{self, RigidityOptions};
use jointspec::io::{self, SCHEMA_VERSION};
use jointspec::linalg::C64;
use jointspec::moments::{self, VerifyOptions};
use jointspec::pencil::{self, MatrixTuple, Window};
use jointspec::riesz::{self, LimitOptions, QuadratureOptions};
use jointspec::{fixtures, Error};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Branches, regularity and limit projections at every eigenvalue of A_1.
    Analyze,
    /// Every projection identity at every eigenvalue of A_1.
    Verify,
    /// Rigidity hypotheses and conclusions for a Coxeter representation.
    CoxeterCheck,
    /// CSV (and optional SVG) samples of the real joint-spectrum curve of a pair.
    Plot,
    /// Norm profile of a component projection of the non-normal example.
    DemoBlowup,
}

#[derive(Clone, Debug, Parser, Serialize)]
#[command(name = "jointspec", version, about = "Proper joint spectra of matrix tuples")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Input JSON (a matrix tuple, or a Coxeter check description).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// SVG scatter plot path (plot only).
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
    /// Residual tolerance for relation checks.
    #[arg(long, global = true, default_value_t = 1e-5)]
    pub tol: f64,
    /// Largest parameter of the geometric ladder.
    #[arg(long = "t-max", global = true, default_value_t = 1e-2)]
    pub t_max: f64,
    /// Ladder levels (halving steps).
    #[arg(long, global = true, default_value_t = 8)]
    pub samples: usize,
    /// Seed for random lines and slices.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Ball radius around the coordinate points for the local match.
    #[arg(long, global = true, default_value_t = 0.15)]
    pub epsilon: f64,
    /// Upper bound on quadrature nodes per contour.
    #[arg(long = "quad-cap", global = true, default_value_t = 1 << 14)]
    pub quad_cap: usize,
    /// Evaluate relations even when regularity fails somewhere.
    #[arg(long = "run-anyway", global = true)]
    pub run_anyway: bool,
    /// Half-width of the square plot window.
    #[arg(long, global = true, default_value_t = 2.0)]
    pub window: f64,
    /// Grid cells per axis for plotting.
    #[arg(long, global = true, default_value_t = 200)]
    pub grid: usize,
}

#[derive(Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub message: String,
}

impl Outcome {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_REFUSED: i32 = 3;

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::DimensionMismatch(_) | Error::InvalidInput(_) => EXIT_PARSE,
        Error::Hypotheses(_) | Error::InconsistentAssignment(_) => EXIT_CHECK,
        _ => EXIT_REFUSED,
    }
}

fn fail(e: Error) -> Outcome {
    Outcome::new(exit_code(&e), e.to_string())
}

fn read(path: &Option<PathBuf>) -> Result<String, Outcome> {
    let p = path
        .as_ref()
        .ok_or_else(|| Outcome::new(EXIT_PARSE, "--input is required for this command"))?;
    fs::read_to_string(p).map_err(|e| Outcome::new(EXIT_PARSE, format!("cannot read {}: {e}", p.display())))
}

fn read_tuple(cfg: &RunConfig) -> Result<MatrixTuple, Outcome> {
    io::parse_tuple(&read(&cfg.input)?).map_err(fail)
}

fn write(path: Option<&Path>, text: &str) -> Result<(), Outcome> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Outcome::new(EXIT_PARSE, format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: Command,
    config: &'a RunConfig,
    pass: bool,
    report: T,
}

fn emit<T: Serialize>(cfg: &RunConfig, pass: bool, report: T) -> Result<(), Outcome> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command: cfg.command,
        config: cfg,
        pass,
        report,
    };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| Outcome::new(EXIT_REFUSED, e.to_string()))?;
    text.push('\n');
    write(cfg.out.as_deref(), &text)
}

fn validate(cfg: &RunConfig) -> Result<(), Outcome> {
    if [cfg.tol, cfg.t_max, cfg.epsilon].iter().any(|x| x.is_nan() || *x <= 0.0) {
        return Err(Outcome::new(EXIT_PARSE, "tolerances, --t-max and --epsilon must be positive"));
    }
    if cfg.samples < 5 {
        return Err(Outcome::new(EXIT_PARSE, "--samples must be at least 5"));
    }
    if cfg.quad_cap < 32 {
        return Err(Outcome::new(EXIT_PARSE, "--quad-cap must be at least 32"));
    }
    Ok(())
}

impl RunConfig {
    fn branch_options(&self) -> BranchOptions {
        BranchOptions {
            t_max: self.t_max,
            samples: self.samples,
            ..Default::default()
        }
    }

    fn limit_options(&self) -> LimitOptions {
        LimitOptions {
            t_max: self.t_max,
            samples: self.samples,
            quadrature: QuadratureOptions {
                max_nodes: self.quad_cap,
                ..Default::default()
            },
            ..Default::default()
        }
    }
}

pub fn run(cfg: &RunConfig) -> Outcome {
    if let Err(o) = validate(cfg) {
        return o;
    }
    let result = match cfg.command {
        Command::Analyze => analyze(cfg),
        Command::Verify => verify(cfg),
        Command::CoxeterCheck => coxeter_check(cfg),
        Command::Plot => plot(cfg),
        Command::DemoBlowup => demo_blowup(cfg),
    };
    result.unwrap_or_else(|o| o)
}

#[derive(Serialize)]
struct BranchEntry {
    index: usize,
    d1: C64,
    d2: C64,
    d1_error: f64,
    d2_error: f64,
    multiplicity: usize,
    max_residual: f64,
    limit: Option<riesz::LimitProjection>,
    limit_error: Option<String>,
}

#[derive(Serialize)]
struct EigenvalueEntry {
    lambda: C64,
    multiplicity: usize,
    regularity: RegularityReport,
    branches: Vec<BranchEntry>,
    error: Option<String>,
}

fn analyze(cfg: &RunConfig) -> Result<Outcome, Outcome> {
    let t = read_tuple(cfg)?;
    let direction = vec![C64::new(1.0, 0.0); t.n() - 1];
    let a1 = t.first();
    let res = branch::spectral_resolution(a1, branch::default_cluster_tol(a1)).map_err(fail)?;
    let bopts = cfg.branch_options();
    let lopts = cfg.limit_options();
    let mut entries = Vec::new();
    let mut pass = true;
    let mut refused = None;
    for (&lam, &mult) in res.eigenvalues.iter().zip(&res.multiplicities) {
        let regularity = branch::check_regularity(&t, lam, &direction, &bopts).map_err(fail)?;
        pass &= regularity.condition_a && regularity.condition_b;
        let mut entry = EigenvalueEntry {
            lambda: lam,
            multiplicity: mult,
            regularity,
            branches: Vec::new(),
            error: None,
        };
        match branch::local_branches(&t, lam, &direction, &bopts) {
            Ok(brs) => {
                for b in brs {
                    let (limit, limit_error) = match riesz::limit_projection(&t, &b, &lopts) {
                        Ok(l) => (Some(l), None),
                        Err(e) => {
                            if matches!(e, Error::BlowUp { .. }) {
                                refused = Some(e.to_string());
                            }
                            pass = false;
                            (None, Some(e.to_string()))
                        }
                    };
                    entry.branches.push(BranchEntry {
                        index: b.index,
                        d1: b.d1,
                        d2: b.d2,
                        d1_error: b.d1_error,
                        d2_error: b.d2_error,
                        multiplicity: b.multiplicity,
                        max_residual: b.residuals.iter().cloned().fold(0.0, f64::max),
                        limit,
                        limit_error,
                    });
                }
            }
            Err(e) => {
                pass = false;
                entry.error = Some(e.to_string());
            }
        }
        entries.push(entry);
    }
    emit(cfg, pass, &entries)?;
    Ok(match (refused, pass) {
        (Some(msg), _) => Outcome::new(EXIT_REFUSED, msg),
        (None, true) => Outcome::new(EXIT_OK, "all eigenvalues regular"),
        (None, false) => Outcome::new(EXIT_CHECK, "regularity or limit computation failed"),
    })
}

fn verify(cfg: &RunConfig) -> Result<Outcome, Outcome> {
    let t = read_tuple(cfg)?;
    let direction = vec![C64::new(1.0, 0.0); t.n() - 1];
    let mut opts = VerifyOptions {
        tol: cfg.tol,
        run_anyway: cfg.run_anyway,
        ..Default::default()
    }
    .with_ladder(cfg.t_max, cfg.samples);
    opts.limit.quadrature.max_nodes = cfg.quad_cap;
    let v = moments::verify_tuple(&t, &direction, &opts).map_err(fail)?;
    let pass = v.all_pass();
    let failed = v.reports().filter(|r| !r.pass).count();
    emit(cfg, pass, &v)?;
    Ok(if pass {
        Outcome::new(EXIT_OK, format!("{} relations pass", v.reports().count()))
    } else if !v.hypotheses_met {
        Outcome::new(EXIT_CHECK, "hypotheses not met; residuals reported without a claim")
    } else {
        Outcome::new(EXIT_CHECK, format!("{failed} relations exceed the tolerance"))
    })
}

fn coxeter_check(cfg: &RunConfig) -> Result<Outcome, Outcome> {
    let input = io::parse_coxeter_input(&read(&cfg.input)?).map_err(fail)?;
    let cm = input.matrix().map_err(fail)?;
    let rep = coxeter::build_representation(&cm, &input.summands, input.conjugation_seed).map_err(fail)?;
    let t = match (&input.tuple, &input.planted) {
        (Some(tj), _) => tj.to_tuple().map_err(fail)?,
        (None, Some(p)) => {
            let blocks = coxeter::random_blocks(cm.n(), p.extra_dim, p.block_norm, p.seed);
            coxeter::plant(&rep, &blocks, p.seed.wrapping_add(1)).map_err(fail)?
        }
        (None, None) => rep.tuple(),
    };
    let opts = RigidityOptions {
        epsilon: cfg.epsilon,
        seed: cfg.seed,
        tol: cfg.tol.min(1e-7),
        ..Default::default()
    };
    let report = coxeter::check_rigidity(&t, &rep, &opts).map_err(fail)?;
    let pass = report.all_pass(rep.dim());
    emit(cfg, pass, &report)?;
    Ok(if pass {
        Outcome::new(EXIT_OK, "hypotheses and conclusions verified")
    } else {
        Outcome::new(
            EXIT_CHECK,
            format!(
                "star: {}, I: {}, II: {}, dim L = {}",
                report.condition_star, report.condition_i, report.condition_ii, report.dim_l
            ),
        )
    })
}

fn plot(cfg: &RunConfig) -> Result<Outcome, Outcome> {
    let t = read_tuple(cfg)?;
    let window = Window::square(cfg.window);
    let pts = pencil::sample_spectrum_curve(&t, window, (cfg.grid, cfg.grid)).map_err(fail)?;
    write(cfg.out.as_deref(), &io::curve_csv(&pts))?;
    if let Some(svg) = &cfg.svg {
        write(Some(svg), &io::curve_svg(&pts, window.x1, window.x2))?;
    }
    Ok(Outcome::new(EXIT_OK, format!("{} curve samples", pts.len())))
}

#[derive(Serialize)]
struct BlowupReport {
    branch_slope: C64,
    projection_at_0_1: Vec<Vec<[f64; 2]>>,
    profile: Vec<(f64, f64)>,
    exponent: f64,
    refusal: Option<String>,
}

fn demo_blowup(cfg: &RunConfig) -> Result<Outcome, Outcome> {
    let t = match &cfg.input {
        Some(_) => read_tuple(cfg)?,
        None => fixtures::nonnormal_pair(),
    };
    let one = [C64::new(1.0, 0.0)];
    let brs = branch::local_branches(&t, one[0], &one, &cfg.branch_options()).map_err(fail)?;
    let b = &brs[0];
    let q = cfg.limit_options().quadrature;
    let p01 = riesz::component_projection(&t, b, 0.1, &q).map_err(fail)?;
    let ladder = riesz::log_ladder(1e-1, 1e-4, 13);
    let profile = riesz::projection_norm_profile(&t, b, &ladder, &q).map_err(fail)?;
    let exponent = riesz::fit_exponent(&profile);
    let refusal = riesz::limit_projection(&t, b, &cfg.limit_options()).err().map(|e| e.to_string());
    let report = BlowupReport {
        branch_slope: b.d1,
        projection_at_0_1: io::matrix_to_rows(&p01.projection),
        profile,
        exponent,
        refusal: refusal.clone(),
    };
    emit(cfg, refusal.is_none(), &report)?;
    Ok(match refusal {
        Some(msg) => Outcome::new(EXIT_REFUSED, format!("{msg}; fitted exponent {exponent:.4}")),
        None => Outcome::new(EXIT_OK, format!("bounded projections; fitted exponent {exponent:.4}")),
    })
}
