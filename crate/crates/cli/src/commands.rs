//! One function per subcommand. Each loads its inputs from the config,
//! runs one top-level operation, and writes the field files and a report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use curl_lambda::conjugate::{conjugate_from_scalar, conjugate_from_vector, ConjugateOptions};
use curl_lambda::domain::{build_domain, interior_eval_grid, sample, FieldSample};
use curl_lambda::fielddiff::{align, curl_fd, dirac_shift_fd, div_fd};
use curl_lambda::maxwell::{
    achiral_split_residuals, chiral_split_residuals, maxwell_residuals, solve_achiral, solve_chiral, MaxwellFields,
    MediumParams, SourceData,
};
use curl_lambda::neumann::{make_sphere_mesh_at, normal_trace, solve_neumann, NeumannOptions};
use curl_lambda::quaternion::ONE;
use curl_lambda::rightinverse::r_lambda;
use curl_lambda::verify::{run_suite, Suite, SuiteConfig};
use curl_lambda::{FieldKind, PointSet, Tolerances, VoxelDomain, C64};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{c2, Config, DomainConfig};
use crate::output;
use crate::sources::{expect_kind, resolve};
use crate::CliError;

pub struct Ctx {
    pub out: PathBuf,
    pub tol: Tolerances,
    pub profile: &'static str,
    pub threads: usize,
}

impl Ctx {
    fn path(&self, p: &Path) -> PathBuf {
        self.out.join(p)
    }
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'a str,
    tolerance_profile: &'a str,
    threads: usize,
    config: &'a Config,
    results: Value,
    outputs: Vec<String>,
    timings: Value,
}

struct Setup {
    domain: VoxelDomain,
    eval: PointSet,
    lambda: C64,
}

fn setup(cfg: &Config) -> Result<Setup, CliError> {
    let domain = build_domain(cfg.domain.shape(), cfg.domain.n())?;
    let eval = interior_eval_grid(&domain, cfg.eval.n, cfg.eval.margin)?;
    log::info!("{} source cells, {} evaluation points", domain.len(), eval.len());
    Ok(Setup {
        domain,
        eval,
        lambda: cfg.lambda.into(),
    })
}

fn rel(a: &FieldSample, b: &FieldSample) -> Result<f64, CliError> {
    let (a, b) = align(a, b)?;
    let s = b.norm_l2();
    let d = a.sub(&b)?.norm_l2();
    Ok(if s > 0.0 { d / s } else { d })
}

/// Writes the CSV (and VTK when requested) of one field; returns the paths.
fn write_field(ctx: &Ctx, cfg: &Config, f: &FieldSample, tag: Option<&str>) -> Result<Vec<String>, CliError> {
    let pick = |p: &Path| match tag {
        Some(t) => ctx.path(&output::tagged(p, t)),
        None => ctx.path(p),
    };
    let csv = pick(&cfg.output.csv);
    output::csv(f, &csv)?;
    let mut paths = vec![csv.display().to_string()];
    if let Some(v) = &cfg.output.vtk {
        let v = pick(v);
        output::vtk(f, &v, tag.unwrap_or("w"))?;
        paths.push(v.display().to_string());
    }
    Ok(paths)
}

fn finish(ctx: &Ctx, cfg: &Config, command: &str, results: Value, mut outputs: Vec<String>, start: Instant) -> Result<(), CliError> {
    let path = ctx.path(&cfg.output.csv).with_extension("report.json");
    outputs.push(path.display().to_string());
    let report = Report {
        command,
        tolerance_profile: ctx.profile,
        threads: ctx.threads,
        config: cfg,
        results,
        outputs,
        timings: json!({ "total_s": start.elapsed().as_secs_f64() }),
    };
    output::json(&report, &path)
}

pub fn solve_curl(cfg: &Config, ctx: &Ctx) -> Result<(), CliError> {
    let start = Instant::now();
    let s = setup(cfg)?;
    let g = resolve(&cfg.source, s.lambda)?;
    expect_kind(&g, FieldKind::Vector, "the solve-curl source")?;
    let r = r_lambda(&s.domain, &g, s.lambda, &s.eval)?;

    let cr = curl_fd(&r)?;
    let (cr, rr) = align(&cr, &r)?;
    let lhs = cr.lin_comb(ONE, &rr, s.lambda)?;
    let residual = rel(&lhs, &sample(&g, &lhs.point_set()))?;
    let div_target = div_fd(&sample(&g, &r.point_set()))?.scale(ONE / s.lambda);
    let divergence = rel(&div_fd(&r)?, &div_target)?;

    let outputs = write_field(ctx, cfg, &r, None)?;
    let results = json!({
        "eval_points": r.len(),
        "source_cells": s.domain.len(),
        "curl_residual": residual,
        "divergence_consistency": divergence,
    });
    finish(ctx, cfg, "solve-curl", results, outputs, start)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Direction {
    FromScalar,
    FromVector,
}

pub fn conjugate(cfg: &Config, ctx: &Ctx, dir: Direction) -> Result<(), CliError> {
    let start = Instant::now();
    let s = setup(cfg)?;
    let f = resolve(&cfg.source, s.lambda)?;
    let opts = ConjugateOptions {
        tol: ctx.tol.precondition,
        unchecked: false,
    };
    let (partner, report) = match dir {
        Direction::FromScalar => {
            expect_kind(&f, FieldKind::Scalar, "the from-scalar source")?;
            conjugate_from_scalar(&f, s.lambda, &s.eval, opts)?
        }
        Direction::FromVector => {
            expect_kind(&f, FieldKind::Vector, "the from-vector source")?;
            conjugate_from_vector(&f, s.lambda, &s.eval, opts)?
        }
    };
    let given = sample(&f, &partner.point_set());
    let values = partner
        .values
        .iter()
        .zip(&given.values)
        .map(|(a, b)| *a + *b)
        .collect();
    let w = FieldSample::new(partner.points.clone(), values, FieldKind::Full, partner.grid);
    let monogenic = dirac_shift_fd(&w, s.lambda)?.norm_l2() / w.norm_l2().max(f64::MIN_POSITIVE);

    let outputs = write_field(ctx, cfg, &w, None)?;
    let results = json!({
        "direction": match dir { Direction::FromScalar => "from-scalar", Direction::FromVector => "from-vector" },
        "eval_points": w.len(),
        "precheck": report,
        "monogenic_residual": monogenic,
    });
    finish(ctx, cfg, "conjugate", results, outputs, start)
}

fn medium(cfg: &Config, beta: Option<f64>) -> Result<MediumParams, CliError> {
    let mc = cfg.medium()?;
    let b = beta.map(|b| C64::new(b, 0.0)).unwrap_or(c2(mc.beta));
    let m = MediumParams::new(mc.omega, c2(mc.eps), c2(mc.mu), b)?;
    let lam: C64 = cfg.lambda.into();
    if (lam - m.lambda).norm() > 1e-9 * m.lambda.norm() {
        return Err(CliError::Input(format!(
            "lambda = {lam} does not match omega*sqrt(eps*mu) = {} from the medium block",
            m.lambda
        )));
    }
    Ok(m)
}

/// Maxwell solve; achiral when `β = 0`, chiral otherwise.
pub fn maxwell(cfg: &Config, ctx: &Ctx, beta: Option<f64>, command: &str) -> Result<(), CliError> {
    let start = Instant::now();
    let m = medium(cfg, beta)?;
    let s = setup(cfg)?;
    let j = resolve(&cfg.source, s.lambda)?;
    expect_kind(&j, FieldKind::Vector, "the current density")?;
    let src = || SourceData::new(&j);
    let chiral = m.beta != C64::new(0.0, 0.0);
    if command == "maxwell" && chiral && beta.is_none() {
        return Err(CliError::Input(
            "medium.beta is nonzero; use the chiral command or pass --chiral".into(),
        ));
    }
    let pre = ctx.tol.precondition;
    let f: MaxwellFields = if chiral || command == "chiral" {
        solve_chiral(&s.domain, src(), &m, None, None, &s.eval, pre)?
    } else {
        solve_achiral(&s.domain, src(), &m, None, None, &s.eval, pre)?
    };
    let res = maxwell_residuals(&f, src(), &m)?;
    let split = if chiral || command == "chiral" {
        chiral_split_residuals(&f, src(), &m)?
    } else {
        achiral_split_residuals(&f, src(), &m)?
    };
    let mut outputs = write_field(ctx, cfg, &f.e, Some("e"))?;
    outputs.extend(write_field(ctx, cfg, &f.h, Some("h"))?);
    let results = json!({
        "medium": m,
        "eval_points": f.e.len(),
        "residuals": {
            "ampere": res.ampere,
            "faraday": res.faraday,
            "div_h": res.div_h,
            "gauss": res.gauss,
        },
        "split_residuals": [split.0, split.1],
    });
    finish(ctx, cfg, command, results, outputs, start)
}

pub fn neumann(cfg: &Config, ctx: &Ctx) -> Result<(), CliError> {
    let start = Instant::now();
    let nc = cfg.neumann()?;
    let (center, radius) = match cfg.domain {
        DomainConfig::Ball { center, radius, .. } => (center, radius),
        _ => return Err(CliError::Input("the Neumann solver needs a ball domain".into())),
    };
    let s = setup(cfg)?;
    let mesh = make_sphere_mesh_at(center, radius, nc.mesh_level)?;
    let g = resolve(&cfg.source, s.lambda)?;
    expect_kind(&g, FieldKind::Vector, "the Neumann source")?;
    let b = resolve(&nc.boundary, s.lambda)?;
    expect_kind(&b, FieldKind::Vector, "the boundary field")?;
    let phi0 = normal_trace(&b, &mesh);
    let opts = NeumannOptions {
        compatibility_tol: ctx.tol.compatibility,
        solver: nc.solver,
    };
    let sol = solve_neumann(&s.domain, &g, &phi0, s.lambda, &mesh, &s.eval, opts)?;

    let mut outputs = write_field(ctx, cfg, &sol.w, None)?;
    let off = ctx.path(nc.mesh_off.as_deref().unwrap_or(Path::new("mesh.off")));
    let file = std::fs::File::create(&off).map_err(|e| CliError::Input(format!("cannot write {}: {e}", off.display())))?;
    mesh.write_off(std::io::BufWriter::new(file))?;
    outputs.push(off.display().to_string());
    let results = json!({
        "eval_points": sol.w.len(),
        "report": sol.report,
    });
    finish(ctx, cfg, "neumann", results, outputs, start)
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    suite: &'a str,
    preset: SuiteConfig,
    tolerance_profile: &'a str,
    tolerances: Tolerances,
    passed: usize,
    total: usize,
    checks: &'a [curl_lambda::verify::Check],
}

/// Prints one line per check to stdout; `Ok(false)` when any check fails.
pub fn verify(ctx: &Ctx, suite: Suite, preset: SuiteConfig, report: Option<&Path>) -> Result<bool, CliError> {
    let checks = run_suite(suite, &preset, &ctx.tol)?;
    for c in &checks {
        println!("{c}");
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    println!("{passed}/{} checks passed", checks.len());
    if let Some(p) = report {
        let r = VerifyReport {
            suite: suite.name(),
            preset,
            tolerance_profile: ctx.profile,
            tolerances: ctx.tol,
            passed,
            total: checks.len(),
            checks: &checks,
        };
        output::json(&r, &ctx.path(p))?;
    }
    Ok(passed == checks.len())
}
