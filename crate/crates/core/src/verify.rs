//! Named numerical checks grouped by module.
//!
//! Each check reports a measured residual (or ratio) against a bound. The
//! `verify` command and the acceptance tests both run these suites; the
//! output depends only on the configuration, never on timing or thread count.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conjugate::{conjugate_from_scalar, conjugate_from_vector_sample, ConjugateOptions};
use crate::domain::{
    build_domain, interior_eval_grid, sample, sample_on_domain, FieldKind, FieldSample, FnField, GridMeta, Point,
    PointSet, Shape, VoxelDomain,
};
use crate::error::{Error, Result};
use crate::fielddiff::{align, curl_fd, dirac_shift_fd, div_fd, grad_fd, helmholtz_fd, laplacian_fd};
use crate::forcefree::{beltrami_plane_wave, beltrami_shear, verify_forcefree, Superposition};
use crate::kernels::{theta, Sign};
use crate::maxwell::{
    achiral_split_residuals, chiral_split_residuals, homogeneous_residuals, maxwell_residuals, solve_achiral,
    solve_chiral, MaxwellFields, MediumParams, SourceData,
};
use crate::neumann::{
    assemble_bie, make_sphere_mesh, normal_trace, solve_neumann, surface_potential_scalar, trace_densities,
    BieOperator, NeumannOptions,
};
use crate::potentials::{newton_l, t0, t1, t2, teodorescu_t, teodorescu_t_signed};
use crate::quaternion::{mul, Biquaternion, CVec3, C64, I, ONE, ZERO};
use crate::rightinverse::{gauge_solve, r_lambda, r_lambda_alt};
use crate::tolerances::Tolerances;
use crate::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tol: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            tol,
            bound: Bound::AtMost,
            pass: measured <= tol,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            tol,
            bound: Bound::AtLeast,
            pass: measured >= tol,
        }
    }

    /// A yes/no check, reported as `1` (holds) or `0`.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        write!(
            f,
            "{}  {:<56} {:>12.4e} {} {:.1e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            op,
            self.tol
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Quaternion,
    Domain,
    Fielddiff,
    Kernels,
    Potentials,
    Rightinverse,
    Conjugate,
    Forcefree,
    Maxwell,
    Neumann,
    All,
}

impl Suite {
    pub const MODULES: [Suite; 10] = [
        Suite::Quaternion,
        Suite::Domain,
        Suite::Fielddiff,
        Suite::Kernels,
        Suite::Potentials,
        Suite::Rightinverse,
        Suite::Conjugate,
        Suite::Forcefree,
        Suite::Maxwell,
        Suite::Neumann,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Quaternion => "quaternion",
            Suite::Domain => "domain",
            Suite::Fielddiff => "fielddiff",
            Suite::Kernels => "kernels",
            Suite::Potentials => "potentials",
            Suite::Rightinverse => "rightinverse",
            Suite::Conjugate => "conjugate",
            Suite::Forcefree => "forcefree",
            Suite::Maxwell => "maxwell",
            Suite::Neumann => "neumann",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::MODULES
            .iter()
            .chain(&[Suite::All])
            .find(|m| m.name() == s)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite '{s}'")))
    }
}

/// Resolutions used by the suites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Source cells per axis for the volume potentials.
    pub n: usize,
    pub n_eval: usize,
    pub margin: usize,
    /// Resolutions of the refinement-ratio pair (with `n_eval = n`).
    pub ratio_coarse: usize,
    pub ratio_fine: usize,
    pub maxwell_n: usize,
    pub maxwell_n_eval: usize,
    /// Eval grid size of the conjugate round trip (`h = 2/n`).
    pub conjugate_n_eval: usize,
    pub neumann_level: usize,
    pub neumann_n: usize,
    pub neumann_n_eval: usize,
    /// Mesh level of the dense versus matrix-free comparison.
    pub neumann_assembly_level: usize,
}

impl SuiteConfig {
    /// Quick settings for interactive runs.
    pub fn desk() -> Self {
        SuiteConfig {
            n: 16,
            n_eval: 16,
            margin: 2,
            ratio_coarse: 12,
            ratio_fine: 24,
            maxwell_n: 24,
            maxwell_n_eval: 24,
            conjugate_n_eval: 32,
            neumann_level: 3,
            neumann_n: 12,
            neumann_n_eval: 12,
            neumann_assembly_level: 2,
        }
    }

    /// The resolutions at which the acceptance bounds are stated.
    pub fn reference() -> Self {
        SuiteConfig {
            n: 32,
            n_eval: 16,
            margin: 2,
            ratio_coarse: 16,
            ratio_fine: 32,
            maxwell_n: 32,
            maxwell_n_eval: 32,
            conjugate_n_eval: 32,
            neumann_level: 4,
            neumann_n: 24,
            neumann_n_eval: 12,
            neumann_assembly_level: 3,
        }
    }
}

impl FromStr for SuiteConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(SuiteConfig::desk()),
            "reference" => Ok(SuiteConfig::reference()),
            _ => Err(Error::InvalidParameter(format!("unknown preset '{s}' (desk, reference)"))),
        }
    }
}

/// Runs one suite (or all of them, in module order).
pub fn run_suite(suite: Suite, cfg: &SuiteConfig, tol: &Tolerances) -> Result<Vec<Check>> {
    let mut run = Run {
        cfg: *cfg,
        tol: *tol,
        checks: Vec::new(),
    };
    let list: Vec<Suite> = if suite == Suite::All {
        Suite::MODULES.to_vec()
    } else {
        vec![suite]
    };
    for s in list {
        let start = Instant::now();
        match s {
            Suite::Quaternion => run.quaternion(),
            Suite::Domain => run.domain()?,
            Suite::Fielddiff => run.fielddiff()?,
            Suite::Kernels => run.kernels()?,
            Suite::Potentials => run.potentials()?,
            Suite::Rightinverse => run.rightinverse()?,
            Suite::Conjugate => run.conjugate()?,
            Suite::Forcefree => run.forcefree()?,
            Suite::Maxwell => run.maxwell()?,
            Suite::Neumann => run.neumann()?,
            Suite::All => unreachable!(),
        }
        log::info!("suite {} finished in {:.1} s", s.name(), start.elapsed().as_secs_f64());
    }
    Ok(run.checks)
}

const LAMBDAS: [C64; 2] = [C64::new(2.0, 0.0), C64::new(1.0, 0.5)];
const NEUMANN_LAMBDA: C64 = C64::new(1.0, 0.5);
/// Bound on the relative vector-product defect of random biquaternions.
const PRODUCT_TOL: f64 = 1e-14;
/// Relative error of the unit-ball Newton potential at the center.
const CENTER_TOL: f64 = 0.01;
/// Mesh area and center single-layer value against the sphere.
const SPHERE_TOL: f64 = 0.01;
/// Each voxel-volume error may exceed its predecessor by this factor.
const VOLUME_SLACK: f64 = 1.1;
/// Minimum order-one residual expected from a precondition violation.
const NEGATIVE_MIN: f64 = 0.2;
/// Exponential decay of the fundamental solution in the Helmholtz annulus.
const DECAY_TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn lname(l: C64) -> String {
    if l.im == 0.0 {
        format!("{}", l.re)
    } else {
        format!("{}{:+}i", l.re, l.im)
    }
}

fn setup(n: usize, n_eval: usize, margin: usize) -> Result<(VoxelDomain, PointSet)> {
    let d = build_domain(Shape::unit_ball(), n)?;
    let g = interior_eval_grid(&d, n_eval, margin)?;
    Ok((d, g))
}

/// `‖a - b‖ / ‖b‖` on the common nodes.
fn rel(a: &FieldSample, b: &FieldSample) -> Result<f64> {
    let (a, b) = align(a, b)?;
    let s = b.norm_l2();
    let d = a.sub(&b)?.norm_l2();
    Ok(if s > 0.0 { d / s } else { d })
}

fn zip_values(a: &FieldSample, b: &FieldSample, kind: FieldKind, f: impl Fn(Biquaternion, Biquaternion) -> Biquaternion) -> Result<FieldSample> {
    let (a, b) = align(a, b)?;
    let values = a.values.iter().zip(&b.values).map(|(x, y)| f(*x, *y)).collect();
    Ok(FieldSample::new(a.points, values, kind, a.grid))
}

fn field_a() -> FnField {
    FnField::new(FieldKind::Full, |x| {
        Biquaternion::new(
            c((x[0] + x[1]).cos(), 0.3 * x[2]),
            c(x[1] * x[2], (x[0]).sin()),
            c(1.0 - x[0] * x[0], 0.0),
            c((x[2]).sin(), x[0] * x[1]),
        )
    })
}

fn field_b() -> FnField {
    FnField::new(FieldKind::Full, |x| {
        Biquaternion::new(
            c(x[0] * x[1], 1.0),
            c(0.5 * x[2].exp(), 0.0),
            c((x[0] - x[2]).cos(), 0.2 * x[1]),
            c(0.0, x[1] * x[1]),
        )
    })
}

/// Vector sources with their closed-form divergence.
fn g1() -> (FnField, fn(Point) -> C64) {
    (
        FnField::vector(|x| CVec3::new(c(x[1].cos(), 0.2), c(x[0] * x[2], x[1] * x[1]), c(0.0, (x[0] + x[1]).sin()))),
        |x| c(0.0, 2.0 * x[1]),
    )
}

fn g2() -> (FnField, fn(Point) -> C64) {
    (
        FnField::vector(|x| CVec3::new(c((x[0] * x[2]).sin(), 0.0), c(1.0 + x[1] * x[1], 0.0), c(0.0, x[0] * x[1].cos()))),
        |x| c(x[2] * (x[0] * x[2]).cos() + 2.0 * x[1], 0.0),
    )
}

/// Smooth current supported in the unit ball.
fn current() -> FnField {
    FnField::vector(|x| {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r >= 1.0 {
            return CVec3::ZERO;
        }
        let s = 0.5 * (1.0 + (PI * r).cos());
        CVec3::new(c(1.0 + x[1], 0.0), c(x[2], 0.5), c(x[0], 0.0)).scale_real(s)
    })
}

fn plane_wave_scalar(lambda: C64, k: Point) -> FnField {
    let phase = move |x: Point| (I * lambda * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2])).exp();
    FnField::scalar(phase).with_partials(move |x| {
        let e = phase(x);
        [0, 1, 2].map(|a| Biquaternion::scalar(I * lambda * k[a] * e))
    })
}

fn random_biq(rng: &mut ChaCha8Rng) -> Biquaternion {
    let mut r = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    Biquaternion::new(r(), r(), r(), r())
}

/// A random superposition of smooth trigonometric modes.
fn random_smooth(seed: u64) -> FnField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<([f64; 3], f64, Biquaternion)> = (0..4)
        .map(|_| {
            let k = [0; 3].map(|_| rng.gen_range(-2.0..2.0));
            (k, rng.gen_range(0.0..PI), random_biq(&mut rng))
        })
        .collect();
    FnField::new(FieldKind::Full, move |x| {
        let mut acc = Biquaternion::ZERO;
        for (k, p, a) in &modes {
            let s = (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + p).sin();
            acc += a.scale(c(s, 0.0));
        }
        acc
    })
}

struct Run {
    cfg: SuiteConfig,
    tol: Tolerances,
    checks: Vec<Check>,
}

impl Run {
    fn push(&mut self, c: Check) {
        log::info!("{c}");
        self.checks.push(c);
    }

    fn at_most(&mut self, name: impl Into<String>, measured: f64, tol: f64) {
        self.push(Check::at_most(name, measured, tol));
    }

    fn at_least(&mut self, name: impl Into<String>, measured: f64, tol: f64) {
        self.push(Check::at_least(name, measured, tol));
    }

    fn flag(&mut self, name: impl Into<String>, ok: bool) {
        self.push(Check::flag(name, ok));
    }

    fn quaternion(&mut self) {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut assoc, mut prod) = (0.0f64, 0.0f64);
        for _ in 0..1000 {
            let (a, b, q) = (random_biq(&mut rng), random_biq(&mut rng), random_biq(&mut rng));
            let l = mul(&mul(&a, &b), &q);
            let r = mul(&a, &mul(&b, &q));
            assoc = assoc.max((l - r).norm() / (a.norm() * b.norm() * q.norm()));
            let (u, v) = (a.vec(), b.vec());
            let p = mul(&Biquaternion::vector(u), &Biquaternion::vector(v));
            let d = (p.sc() + u.dot(&v)).norm() + (p.vec() - u.cross(&v)).norm();
            prod = prod.max(d / (u.norm() * v.norm()));
        }
        self.at_most("quaternion.associativity", assoc, self.tol.exact);
        self.at_most("quaternion.vector_product", prod, PRODUCT_TOL);
    }

    fn domain(&mut self) -> Result<()> {
        let exact = 4.0 * PI / 3.0;
        let errs: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&n| build_domain(Shape::unit_ball(), n).map(|d| (d.volume() - exact).abs() / exact))
            .collect::<Result<_>>()?;
        let growth = (errs[1] / errs[0]).max(errs[2] / errs[1]);
        self.at_most("domain.volume_monotone", growth, VOLUME_SLACK);
        self.at_most("domain.volume_n32", errs[2], 0.05);
        let a = build_domain(Shape::unit_ball(), 16)?;
        let b = build_domain(Shape::unit_ball(), 16)?;
        self.flag("domain.deterministic_ordering", a.centers == b.centers);
        Ok(())
    }

    fn fielddiff(&mut self) -> Result<()> {
        let (_, g) = setup(8, 16, 1)?;
        let h = g.grid.expect("eval grids are lattices").h;
        let w = sample(&random_smooth(3), &g);

        let gr = grad_fd(&w.sc_part())?;
        let cg = curl_fd(&gr)?;
        self.at_most("fielddiff.curl_grad", cg.norm_l2() * h / gr.norm_l2(), self.tol.exact);
        let cu = curl_fd(&w.vec_part())?;
        let dc = div_fd(&cu)?;
        self.at_most("fielddiff.div_curl", dc.norm_l2() * h / cu.norm_l2(), self.tol.exact);

        for l in LAMBDAS {
            let inner = dirac_shift_fd(&w, l)?;
            let lhs = dirac_shift_fd(&inner, -l)?.scale(-ONE);
            let rhs = helmholtz_fd(&w, l)?;
            let (lhs, rhs) = align(&lhs, &rhs)?;
            let (_, ww) = align(&lhs, &w)?;
            let scale = ww.norm_l2() * (1.0 / (h * h) + l.norm_sqr());
            self.at_most(
                format!("fielddiff.factorization[lambda={}]", lname(l)),
                lhs.sub(&rhs)?.norm_l2() / scale,
                self.tol.exact,
            );
        }

        let f = || FnField::scalar(|x| c((x[0] + 2.0 * x[1]).sin() * x[2].cos(), 0.0));
        let grad_exact = |x: Point| {
            let (s, co) = ((x[0] + 2.0 * x[1]).sin(), (x[0] + 2.0 * x[1]).cos());
            CVec3::from_real([co * x[2].cos(), 2.0 * co * x[2].cos(), -s * x[2].sin()])
        };
        let v = || FnField::vector(|x| CVec3::from_real([x[1].sin(), x[2].sin(), x[0].sin()]));
        let curl_exact = |x: Point| CVec3::from_real([-x[2].cos(), -x[0].cos(), -x[1].cos()]);
        let q = || FnField::vector(|x| CVec3::from_real([x[0].sin(), (2.0 * x[1]).sin(), x[2].sin()]));
        let div_exact = |x: Point| x[0].cos() + 2.0 * (2.0 * x[1]).cos() + x[2].cos();
        let mut errs = [[0.0; 4]; 2];
        for (slot, n_eval) in [16, 32].into_iter().enumerate() {
            let (_, g) = setup(8, n_eval, 1)?;
            let fs = sample(&f(), &g);
            let e = &mut errs[slot];
            let d = grad_fd(&fs)?;
            e[0] = rel(&d, &sample(&FnField::vector(grad_exact), &d.point_set()))?;
            let d = laplacian_fd(&fs)?;
            e[1] = rel(&d, &fs.scale(c(-6.0, 0.0)))?;
            let d = curl_fd(&sample(&v(), &g))?;
            e[2] = rel(&d, &sample(&FnField::vector(curl_exact), &d.point_set()))?;
            let d = div_fd(&sample(&q(), &g))?;
            e[3] = rel(&d, &sample(&FnField::scalar(move |x| c(div_exact(x), 0.0)), &d.point_set()))?;
        }
        for (k, op) in ["grad", "laplacian", "curl", "div"].iter().enumerate() {
            self.at_least(format!("fielddiff.order[{op}]"), errs[0][k] / errs[1][k], 3.5);
        }
        Ok(())
    }

    fn kernels(&mut self) -> Result<()> {
        let mut errs = [[0.0; 2]; 2];
        for (slot, h) in [0.05f64, 0.025].into_iter().enumerate() {
            let m = (1.2 / h).round() as i64;
            let meta = GridMeta {
                n: (2 * m + 1) as usize,
                h,
                origin: [-(m as f64) * h; 3],
            };
            let mut pts = Vec::new();
            for i in 0..=2 * m {
                for j in 0..=2 * m {
                    for k in 0..=2 * m {
                        let p = meta.node([i, j, k]);
                        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                        if (0.4..=1.2).contains(&r) {
                            pts.push(p);
                        }
                    }
                }
            }
            let set = PointSet {
                points: pts,
                grid: Some(meta),
            };
            for (li, l) in LAMBDAS.into_iter().enumerate() {
                let th: Vec<C64> = set.points.iter().map(|p| theta(*p, l)).collect::<Result<_>>()?;
                let s = FieldSample::scalar(&set, th);
                let r = helmholtz_fd(&s, l)?;
                let inner: Vec<bool> = r
                    .points
                    .iter()
                    .map(|p| {
                        let rr = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                        (0.5..=1.0).contains(&rr)
                    })
                    .collect();
                let keep = |f: &FieldSample| -> f64 {
                    f.values
                        .iter()
                        .zip(&inner)
                        .filter(|(_, k)| **k)
                        .map(|(v, _)| v.norm_sqr())
                        .sum::<f64>()
                        .sqrt()
                };
                let (_, ss) = align(&r, &s)?;
                errs[slot][li] = keep(&r) / (l.norm_sqr() * keep(&ss));
            }
        }
        for (li, l) in LAMBDAS.into_iter().enumerate() {
            self.at_least(
                format!("kernels.helmholtz_order[lambda={}]", lname(l)),
                errs[0][li] / errs[1][li],
                3.5,
            );
            self.at_most(
                format!("kernels.helmholtz_residual[lambda={}]", lname(l)),
                errs[1][li],
                self.tol.precondition,
            );
        }
        let l = c(1.0, 0.5);
        let (r1, r2) = (0.5, 2.0);
        let ratio = theta([r2, 0.0, 0.0], l)?.norm() / theta([0.0, r1, 0.0], l)?.norm();
        let expected = (-l.im * (r2 - r1)).exp() * r1 / r2;
        self.at_most("kernels.decay", (ratio / expected - 1.0).abs(), DECAY_TOL);
        Ok(())
    }

    fn potentials(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let rtol = self.tol.right_inverse;
        let (d, g) = setup(cfg.n, cfg.n_eval, cfg.margin)?;

        let one = FieldSample::scalar(&d.point_set(), vec![ONE; d.len()]);
        let center = PointSet::scattered(vec![[0.0; 3]]);
        let l0 = newton_l(&d, &one, ZERO, &center)?.values[0].w0;
        self.at_most("potentials.newton_center", (l0 - c(-0.5, 0.0)).norm() / 0.5, CENTER_TOL);

        let fields = [("A", field_a()), ("B", field_b())];
        for l in LAMBDAS {
            let ln = lname(l);
            for (fname, f) in &fields {
                let w = sample_on_domain(f, &d);
                let t = teodorescu_t(&d, &w, l, &g)?;
                let res = dirac_shift_fd(&t, l)?;
                let exact = sample(f, &res.point_set());
                self.at_most(format!("potentials.right_inverse[lambda={ln},field={fname}]"), rel(&res, &exact)?, rtol);
            }

            let wa = sample_on_domain(&fields[0].1, &d);
            let big_l = newton_l(&d, &wa, l, &g)?;
            let hres = helmholtz_fd(&big_l, l)?;
            self.at_most(
                format!("potentials.newton_helmholtz[lambda={ln}]"),
                rel(&hres, &sample(&fields[0].1, &hres.point_set()))?,
                rtol,
            );

            for sign in [Sign::Plus, Sign::Minus] {
                let sn = format!("lambda={ln},sign={}", if sign == Sign::Plus { "+" } else { "-" });
                let ls = sign.apply(l);
                let t = teodorescu_t_signed(&d, &wa, l, sign, &g)?;
                let a = t0(&d, &wa, l, sign, &g)?;
                let b = t1(&d, &wa.sc_part(), l, &g)?;
                let e = t2(&d, &wa.vec_part(), l, sign, &g)?;
                let sum = a.add(&b)?.add(&e)?;
                self.at_most(format!("potentials.decomposition[{sn}]"), rel(&t, &sum)?, self.tol.exact);

                let dl = div_fd(&big_l.vec_part())?;
                let (dl, ls0) = align(&dl, &big_l.sc_part())?;
                let t0_ref = dl.lin_comb(ONE, &ls0, ls)?;
                self.at_most(format!("potentials.t0_identity[{sn}]"), rel(&a, &t0_ref)?, rtol);

                let cl = curl_fd(&big_l.vec_part())?;
                let (cl, lv) = align(&cl, &big_l.vec_part())?;
                let t2_ref = cl.lin_comb(-ONE, &lv, ls)?;
                self.at_most(format!("potentials.t2_identity[{sn}]"), rel(&e, &t2_ref)?, rtol);

                let t_ref = dirac_shift_fd(&big_l, -ls)?.scale(-ONE);
                self.at_most(format!("potentials.newton_form[{sn}]"), rel(&t, &t_ref)?, rtol);
            }

            let b = t1(&d, &wa.sc_part(), l, &g)?;
            let gl = grad_fd(&big_l.sc_part())?.scale(-ONE);
            self.at_most(format!("potentials.t1_identity[lambda={ln}]"), rel(&b, &gl)?, rtol);
            let cb = curl_fd(&b)?;
            self.at_most(
                format!("potentials.t1_irrotational[lambda={ln}]"),
                cb.norm_l2() / align(&gl, &cb)?.0.norm_l2(),
                rtol,
            );

            let wv = wa.vec_part();
            let a = t0(&d, &wv, l, Sign::Plus, &g)?;
            let e = t2(&d, &wv, l, Sign::Plus, &g)?;
            let de = div_fd(&e)?;
            let (de, aa) = align(&de, &a)?;
            let la = aa.scale(l);
            self.at_most(
                format!("potentials.sol_membership[lambda={ln}]"),
                de.sub(&la)?.norm_l2() / la.norm_l2(),
                rtol,
            );

            let gs = FnField::vector(|x| CVec3::from_real([x[1].sin() + x[0] * x[0], x[0] * x[2].cos(), x[2] * x[0].sin()]));
            let dgs = |x: Point| 2.0 * x[0] + x[0].sin();
            let sol = FnField::new(FieldKind::Full, move |x| {
                Biquaternion::embed(c(-dgs(x), 0.0) / l, gs.eval(x).vec())
            });
            for (tag, src) in [("sol", sol), ("negative", FnField::new(FieldKind::Vector, move |x| sol_vec(x)))] {
                let s = sample_on_domain(&src, &d);
                let a = t0(&d, &s, l, Sign::Plus, &g)?;
                let hr = helmholtz_fd(&a, l)?;
                let scale = sample(&src, &hr.point_set()).norm_l2();
                let r = hr.norm_l2() / scale;
                if tag == "sol" {
                    self.at_most(format!("potentials.t0_sol_helmholtz[lambda={ln}]"), r, rtol);
                } else {
                    self.at_least(format!("potentials.t0_sol_negative[lambda={ln}]"), r, NEGATIVE_MIN);
                }
            }
        }

        for l in LAMBDAS {
            let mut errs = [0.0; 2];
            for (slot, n) in [cfg.ratio_coarse, cfg.ratio_fine].into_iter().enumerate() {
                let (d, g) = setup(n, n, cfg.margin)?;
                let f = field_a();
                let t = teodorescu_t(&d, &sample_on_domain(&f, &d), l, &g)?;
                let res = dirac_shift_fd(&t, l)?;
                errs[slot] = rel(&res, &sample(&f, &res.point_set()))?;
            }
            self.at_least(
                format!("potentials.refinement_ratio[lambda={}]", lname(l)),
                errs[0] / errs[1],
                self.tol.refinement_ratio,
            );
        }
        Ok(())
    }

    fn rightinverse(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let rtol = self.tol.right_inverse;
        let (d, g) = setup(cfg.n, cfg.n_eval, cfg.margin)?;
        let sources = [("g1", g1()), ("g2", g2())];
        for l in LAMBDAS {
            let ln = lname(l);
            let mut rs = Vec::new();
            for (gname, (gf, div)) in &sources {
                let r = r_lambda(&d, gf, l, &g)?;
                let cr = curl_fd(&r)?;
                let (cr, rr) = align(&cr, &r)?;
                let lhs = cr.lin_comb(ONE, &rr, l)?;
                self.at_most(
                    format!("rightinverse.residual[lambda={ln},source={gname}]"),
                    rel(&lhs, &sample(gf, &lhs.point_set()))?,
                    rtol,
                );
                let dr = div_fd(&r)?;
                let div = *div;
                let target = sample(&FnField::scalar(move |x| div(x) / l), &dr.point_set());
                self.at_most(
                    format!("rightinverse.divergence[lambda={ln},source={gname}]"),
                    rel(&dr, &target)?,
                    rtol,
                );
                rs.push(r);
            }
            let alt = r_lambda_alt(&d, &sources[0].1 .0, l, &g)?;
            self.at_most(format!("rightinverse.alt_form[lambda={ln}]"), rel(&alt, &rs[0])?, rtol);

            let (a, b) = (c(0.7, -0.2), c(-1.3, 0.4));
            let combo = FnField::vector(move |x| {
                let (p, q) = (g1().0.eval(x).vec(), g2().0.eval(x).vec());
                p.scale(a) + q.scale(b)
            });
            let rc = r_lambda(&d, &combo, l, &g)?;
            let lin = rs[0].lin_comb(a, &rs[1], b)?;
            self.at_most(format!("rightinverse.linearity[lambda={ln}]"), rel(&rc, &lin)?, self.tol.exact);

            let phi = FnField::scalar(|x| c(0.3 * x[0] + 0.2 * x[1] * x[2], 0.0));
            let grad_phi = |x: Point| CVec3::from_real([0.3, 0.2 * x[2], 0.2 * x[1]]);
            let h = &sources[0].1 .0;
            let v = gauge_solve(&d, h, &phi, l, &g)?;
            let cv = curl_fd(&v)?;
            let (cv, vv) = align(&cv, &v)?;
            let lhs = FieldSample::new(
                vv.points.clone(),
                vv.points
                    .iter()
                    .zip(cv.values.iter().zip(&vv.values))
                    .map(|(p, (cvv, vvv))| {
                        Biquaternion::vector(cvv.vec() + vvv.vec().scale(l) + grad_phi(*p).cross(&vvv.vec()))
                    })
                    .collect(),
                FieldKind::Vector,
                vv.grid,
            );
            self.at_most(
                format!("rightinverse.gauge[lambda={ln}]"),
                rel(&lhs, &sample(h, &lhs.point_set()))?,
                self.tol.gauge,
            );
        }

        for l in LAMBDAS {
            let mut errs = [0.0; 2];
            for (slot, n) in [cfg.ratio_coarse, cfg.ratio_fine].into_iter().enumerate() {
                let (d, g) = setup(n, n, cfg.margin)?;
                let gf = g1().0;
                let r = r_lambda(&d, &gf, l, &g)?;
                let cr = curl_fd(&r)?;
                let (cr, rr) = align(&cr, &r)?;
                let lhs = cr.lin_comb(ONE, &rr, l)?;
                errs[slot] = rel(&lhs, &sample(&gf, &lhs.point_set()))?;
            }
            self.at_least(
                format!("rightinverse.refinement_ratio[lambda={}]", lname(l)),
                errs[0] / errs[1],
                self.tol.refinement_ratio,
            );
        }
        Ok(())
    }

    fn conjugate(&mut self) -> Result<()> {
        let (_, g) = setup(8, self.cfg.conjugate_n_eval, 1)?;
        let opts = ConjugateOptions {
            tol: self.tol.precondition,
            unchecked: false,
        };
        let k = [0.48, 0.6, 0.64];
        for l in LAMBDAS {
            let ln = lname(l);
            let w0 = plane_wave_scalar(l, k);
            let (wv, _) = conjugate_from_scalar(&w0, l, &g, opts)?;
            let (back, _) = conjugate_from_vector_sample(&wv, l, opts)?;
            let exact = sample(&w0, &back.point_set());
            self.at_most(
                format!("conjugate.round_trip[lambda={ln}]"),
                rel(&back, &exact)?,
                self.tol.conjugate_round_trip,
            );

            let u = beltrami_shear(l, 2, 0.3)?;
            let full = zip_values(&wv, &sample(&w0, &wv.point_set()), FieldKind::Full, |v, s| {
                Biquaternion::embed(s.w0, v.vec())
            })?;
            let with_u = zip_values(&full, &sample(&u, &full.point_set()), FieldKind::Full, |a, b| a + b)?;
            let r = dirac_shift_fd(&with_u, l)?;
            self.at_most(
                format!("conjugate.monogenic_with_forcefree[lambda={ln}]"),
                r.norm_l2() / align(&with_u, &r)?.0.norm_l2(),
                self.tol.precondition,
            );

            let bad = FnField::scalar(|x| c(x[0] * x[0] + x[1] * x[1], 0.0));
            let rejected = matches!(conjugate_from_scalar(&bad, l, &g, opts), Err(Error::Precondition { .. }));
            self.flag(format!("conjugate.rejects_non_helmholtz_scalar[lambda={ln}]"), rejected);
            let bad = sample(&FnField::vector(|x| CVec3::from_real([x[1], 0.0, 0.0])), &g);
            let rejected = matches!(conjugate_from_vector_sample(&bad, l, opts), Err(Error::Precondition { .. }));
            self.flag(format!("conjugate.rejects_invalid_vector[lambda={ln}]"), rejected);
        }
        let rejected = matches!(
            conjugate_from_scalar(&plane_wave_scalar(ONE, k), ZERO, &g, opts),
            Err(Error::ZeroDivisor(_))
        );
        self.flag("conjugate.rejects_zero_lambda", rejected);
        Ok(())
    }

    fn forcefree(&mut self) -> Result<()> {
        let (_, g) = setup(8, 16, 1)?;
        let tol = self.tol.precondition;
        for l in LAMBDAS {
            let ln = lname(l);
            let shear = beltrami_shear(l, 2, 0.3)?;
            let r = verify_forcefree(&sample(&shear, &g), l, tol)?;
            self.at_most(format!("forcefree.shear[lambda={ln}]"), r.curl_residual.max(r.div_residual), tol);
            let wave = beltrami_plane_wave(l, [0.6, 0.0, 0.8])?;
            let r = verify_forcefree(&sample(&wave, &g), l, tol)?;
            self.at_most(format!("forcefree.plane_wave[lambda={ln}]"), r.curl_residual.max(r.div_residual), tol);
            let sum = Superposition(vec![
                Box::new(beltrami_shear(l, 0, 1.1)?),
                Box::new(beltrami_plane_wave(l, [0.0, 0.6, 0.8])?.with_amplitude(c(0.5, -0.5))),
            ]);
            let r = verify_forcefree(&sample(&sum, &g), l, tol)?;
            self.at_most(format!("forcefree.superposition[lambda={ln}]"), r.curl_residual.max(r.div_residual), tol);
            let r = verify_forcefree(&sample(&beltrami_shear(-l, 2, 0.3)?, &g), l, tol)?;
            self.flag(format!("forcefree.rejects_opposite_helicity[lambda={ln}]"), !r.pass);
        }
        Ok(())
    }

    fn maxwell(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let mtol = self.tol.maxwell;
        let (d, g) = setup(cfg.maxwell_n, cfg.maxwell_n_eval, cfg.margin)?;
        let j = current();
        let src = || SourceData::new(&j);
        let m = MediumParams::achiral(1.0, ONE, c(4.0, 0.0))?;
        let pre = self.tol.precondition;

        let f = solve_achiral(&d, src(), &m, None, None, &g, pre)?;
        self.residuals("maxwell.achiral", &f, src(), &m)?;
        let (sp, ss) = achiral_split_residuals(&f, src(), &m)?;
        self.at_most("maxwell.achiral.split_phi", sp, mtol);
        self.at_most("maxwell.achiral.split_psi", ss, mtol);

        let u = beltrami_shear(m.lambda, 2, 0.3)?;
        let v = beltrami_plane_wave(-m.lambda, [0.0, 0.6, 0.8])?;
        let f2 = solve_achiral(&d, src(), &m, Some(&u), Some(&v), &g, pre)?;
        let diff = MaxwellFields {
            e: f2.e.sub(&f.e)?,
            h: f2.h.sub(&f.h)?,
        };
        let (r1, r2) = homogeneous_residuals(&diff, &m)?;
        self.at_most("maxwell.achiral.gauge_difference", r1.max(r2), mtol);

        let m0 = MediumParams::new(1.0, ONE, c(4.0, 0.0), ZERO)?;
        let f0 = solve_chiral(&d, src(), &m0, None, None, &g, pre)?;
        self.at_most("maxwell.chiral.collapse_e", rel(&f0.e, &f.e)?, self.tol.collapse);
        self.at_most("maxwell.chiral.collapse_h", rel(&f0.h, &f.h)?, self.tol.collapse);

        let mc = MediumParams::new(1.0, ONE, c(4.0, 0.0), c(0.1, 0.0))?;
        let fc = solve_chiral(&d, src(), &mc, None, None, &g, pre)?;
        self.residuals("maxwell.chiral", &fc, src(), &mc)?;
        let (sp, ss) = chiral_split_residuals(&fc, src(), &mc)?;
        self.at_most("maxwell.chiral.split_phi", sp, mtol);
        self.at_most("maxwell.chiral.split_psi", ss, mtol);
        Ok(())
    }

    fn residuals(&mut self, prefix: &str, f: &MaxwellFields, src: SourceData, m: &MediumParams) -> Result<()> {
        let r = maxwell_residuals(f, src, m)?;
        let mtol = self.tol.maxwell;
        self.at_most(format!("{prefix}.ampere"), r.ampere, mtol);
        self.at_most(format!("{prefix}.faraday"), r.faraday, mtol);
        self.at_most(format!("{prefix}.div_h"), r.div_h, mtol);
        self.at_most(format!("{prefix}.gauss"), r.gauss, mtol);
        Ok(())
    }

    fn neumann(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let lam = NEUMANN_LAMBDA;

        let mesh3 = make_sphere_mesh(1.0, 3)?;
        self.at_most(
            "neumann.mesh_area",
            (mesh3.total_area() - 4.0 * PI).abs() / (4.0 * PI),
            SPHERE_TOL,
        );
        let outward = mesh3
            .centroids
            .iter()
            .zip(&mesh3.normals)
            .all(|(p, n)| p[0] * n[0] + p[1] * n[1] + p[2] * n[2] > 0.0);
        self.flag("neumann.outward_normals", outward);
        let s = surface_potential_scalar(&vec![ONE; mesh3.len()], &mesh3, ZERO, &PointSet::scattered(vec![[0.0; 3]]))?;
        self.at_most("neumann.single_layer_center", (s.values[0].w0 + 1.0).norm(), SPHERE_TOL);

        let mesh_a = make_sphere_mesh(1.0, cfg.neumann_assembly_level)?;
        let op = BieOperator::new(&mesh_a, lam);
        let a = assemble_bie(&mesh_a, lam);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<C64> = (0..op.dim()).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let y = op.apply(&x);
        let xd = nalgebra::DVector::from_vec(x);
        let yd = &a * &xd;
        let num: f64 = y.iter().zip(yd.iter()).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        self.at_most("neumann.dense_matches_matrix_free", num / yd.norm(), self.tol.exact);

        let mesh = make_sphere_mesh(1.0, cfg.neumann_level)?;
        let wave = beltrami_plane_wave(lam, [0.0, 0.0, 1.0])?;
        let (psi0, psi) = trace_densities(&wave, &mesh);
        let op = BieOperator::new(&mesh, lam);
        let bie = op.residual(&psi, &psi0);
        self.at_most("neumann.bie_residual_analytic", bie, self.tol.bie);
        self.at_most(
            "neumann.flux_identity",
            crate::neumann::flux_identity_defect(&psi0, lam, &mesh),
            self.tol.bie,
        );

        let (d, g) = setup(cfg.neumann_n, cfg.neumann_n_eval, cfg.margin)?;
        let opts = NeumannOptions {
            compatibility_tol: self.tol.compatibility,
            solver: crate::neumann::BieSolver::Auto,
        };
        let zero = FnField::vector(|_| CVec3::ZERO);
        let phi0 = normal_trace(&wave, &mesh);
        let sol = solve_neumann(&d, &zero, &phi0, lam, &mesh, &g, opts)?;
        let err = rel(&sol.w, &sample(&wave, &sol.w.point_set()))?;
        self.at_most("neumann.recovery_forcefree", err, self.tol.neumann_recovery);
        self.at_most("neumann.forcefree_residual", sol.report.forcefree_residual, 2.0 * bie.max(self.tol.exact));

        let (wx, gx) = manufactured(lam);
        let phi0 = normal_trace(&wx, &mesh);
        let sol = solve_neumann(&d, &gx, &phi0, lam, &mesh, &g, opts)?;
        let err = rel(&sol.w, &sample(&wx, &sol.w.point_set()))?;
        self.at_most("neumann.recovery_manufactured", err, self.tol.neumann_recovery);
        self.at_most("neumann.solver_residual", sol.report.solver.relative_residual, self.tol.bie);

        let shifted: Vec<C64> = phi0.iter().map(|p| p + 0.5).collect();
        let rejected = matches!(
            solve_neumann(&d, &gx, &shifted, lam, &mesh, &g, opts),
            Err(Error::Compatibility { .. })
        );
        self.flag("neumann.rejects_incompatible_data", rejected);
        Ok(())
    }
}

fn sol_vec(x: Point) -> Biquaternion {
    Biquaternion::vector(CVec3::from_real([x[1].sin() + x[0] * x[0], x[0] * x[2].cos(), x[2] * x[0].sin()]))
}

/// `w⃗ = (sin y, z², xz)` with `curl w⃗ = (-2z, -z, -cos y)`, and the source
/// `g⃗ = curl w⃗ + λw⃗`.
fn manufactured(lambda: C64) -> (FnField, FnField) {
    let w = |x: Point| CVec3::from_real([x[1].sin(), x[2] * x[2], x[0] * x[2]]);
    let cw = |x: Point| CVec3::from_real([-2.0 * x[2], -x[2], -x[1].cos()]);
    (
        FnField::vector(w),
        FnField::vector(move |x| cw(x) + w(x).scale(lambda)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::MODULES.iter().chain(&[Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), *s);
        }
        assert!("nope".parse::<Suite>().is_err());
        assert!("desk".parse::<SuiteConfig>().is_ok());
        assert!("huge".parse::<SuiteConfig>().is_err());
    }

    #[test]
    fn check_bounds() {
        assert!(Check::at_most("a", 0.1, 0.1).pass);
        assert!(!Check::at_most("a", 0.2, 0.1).pass);
        assert!(Check::at_least("a", 4.0, 3.5).pass);
        assert!(!Check::at_most("a", f64::NAN, 0.1).pass);
        assert!(!Check::flag("a", false).pass);
    }

    #[test]
    fn cheap_suites_pass() {
        let tol = Tolerances::default();
        for s in [Suite::Quaternion, Suite::Domain, Suite::Fielddiff, Suite::Kernels, Suite::Forcefree] {
            for c in run_suite(s, &SuiteConfig::desk(), &tol).unwrap() {
                assert!(c.pass, "{c}");
            }
        }
    }
}
