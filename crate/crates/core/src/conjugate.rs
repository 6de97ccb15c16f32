//! Metaharmonic conjugates: completing a Helmholtz solution to a
//! λ-monogenic biquaternion field `w₀ + w⃗` with `(D + λ)w = 0`.
//!
//! * scalar → vector: `w⃗ = -∇w₀/λ`, defined up to a force-free field;
//! * vector → scalar: `w₀ = div w⃗/λ`, unique, provided `curl(curl + λ)w⃗ = 0`.
//!
//! Preconditions are checked with the wide-stencil Helmholtz residual,
//! normalized as `‖(Δ + λ²)f‖₂ / (|λ|²‖f‖₂)` so it is dimensionless.

use serde::Serialize;

use crate::domain::{sample, Field, FieldSample, PointSet};
use crate::error::{Error, Result};
use crate::fielddiff::{align, curl_fd, div_fd, grad_fd, helmholtz_fd, rel_l2};
use crate::quaternion::{Biquaternion, CVec3, C64, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateOptions {
    pub tol: f64,
    /// Skip the precondition checks (exploratory use only).
    pub unchecked: bool,
}

impl Default for ConjugateOptions {
    fn default() -> Self {
        ConjugateOptions {
            tol: crate::tolerances::Tolerances::default().precondition,
            unchecked: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugateReport {
    pub helmholtz_residual: Option<f64>,
    pub curlcurl_residual: Option<f64>,
    /// `"analytic"` when closed-form derivatives were used, else `"fd"`.
    pub derivatives: &'static str,
    /// Relative difference between analytic and FD derivatives, when both exist.
    pub fd_crosscheck: Option<f64>,
}

fn nonzero(lambda: C64) -> Result<()> {
    if lambda == ZERO {
        Err(Error::ZeroDivisor("lambda must be nonzero for metaharmonic conjugates"))
    } else {
        Ok(())
    }
}

fn helmholtz_residual(f: &FieldSample, lambda: C64) -> Result<f64> {
    let r = helmholtz_fd(f, lambda)?;
    let (r, ff) = align(&r, f)?;
    let scale = lambda.norm_sqr() * ff.norm_l2();
    Ok(if scale == 0.0 { 0.0 } else { r.norm_l2() / scale })
}

fn curlcurl_residual(v: &FieldSample, lambda: C64) -> Result<f64> {
    let c = curl_fd(v)?;
    let (c, vv) = align(&c, v)?;
    let inner = c.lin_comb(ONE, &vv, lambda)?;
    let r = curl_fd(&inner)?;
    let (r, vv) = align(&r, &vv)?;
    let scale = lambda.norm_sqr() * vv.norm_l2();
    Ok(if scale == 0.0 { 0.0 } else { r.norm_l2() / scale })
}

fn check(name: &str, residual: f64, tol: f64) -> Result<()> {
    if residual > tol {
        Err(Error::Precondition {
            check: name.to_string(),
            residual,
            tol,
        })
    } else {
        Ok(())
    }
}

/// `w⃗ = -∇w₀/λ` from grid data (FD gradient, stencil interior).
pub fn conjugate_from_scalar_sample(
    w0: &FieldSample,
    lambda: C64,
    opts: ConjugateOptions,
) -> Result<(FieldSample, ConjugateReport)> {
    nonzero(lambda)?;
    let w0 = w0.sc_part();
    let mut report = ConjugateReport {
        helmholtz_residual: None,
        curlcurl_residual: None,
        derivatives: "fd",
        fd_crosscheck: None,
    };
    if !opts.unchecked {
        let r = helmholtz_residual(&w0, lambda)?;
        report.helmholtz_residual = Some(r);
        check("(laplacian + lambda^2) w0 = 0", r, opts.tol)?;
    }
    Ok((grad_fd(&w0)?.scale(-ONE / lambda), report))
}

/// `w⃗ = -∇w₀/λ` for an analytic `w₀`, using closed-form derivatives when the
/// field provides them (FD otherwise, and as a cross-check).
pub fn conjugate_from_scalar(
    w0: &dyn Field,
    lambda: C64,
    grid: &PointSet,
    opts: ConjugateOptions,
) -> Result<(FieldSample, ConjugateReport)> {
    let s = sample(w0, grid);
    let (fd, mut report) = conjugate_from_scalar_sample(&s, lambda, opts)?;
    if w0.partials(grid.points[0]).is_none() {
        return Ok((fd, report));
    }
    let values: Vec<Biquaternion> = fd
        .points
        .iter()
        .map(|p| {
            let d = w0.partials(*p).expect("partials available");
            Biquaternion::vector(CVec3([d[0].w0, d[1].w0, d[2].w0]).scale(-ONE / lambda))
        })
        .collect();
    let out = FieldSample::new(fd.points.clone(), values, crate::FieldKind::Vector, fd.grid);
    report.derivatives = "analytic";
    report.fd_crosscheck = Some(rel_l2(&fd, &out, out.norm_l2())?);
    Ok((out, report))
}

/// `w₀ = div w⃗/λ` from grid data.
pub fn conjugate_from_vector_sample(
    w: &FieldSample,
    lambda: C64,
    opts: ConjugateOptions,
) -> Result<(FieldSample, ConjugateReport)> {
    nonzero(lambda)?;
    let w = w.vec_part();
    let mut report = ConjugateReport {
        helmholtz_residual: None,
        curlcurl_residual: None,
        derivatives: "fd",
        fd_crosscheck: None,
    };
    if !opts.unchecked {
        let h = helmholtz_residual(&w, lambda)?;
        report.helmholtz_residual = Some(h);
        let cc = curlcurl_residual(&w, lambda)?;
        report.curlcurl_residual = Some(cc);
        check("(laplacian + lambda^2) w = 0", h, opts.tol)?;
        check("curl(curl + lambda) w = 0", cc, opts.tol)?;
    }
    Ok((div_fd(&w)?.scale(ONE / lambda), report))
}

/// `w₀ = div w⃗/λ` for an analytic `w⃗`.
pub fn conjugate_from_vector(
    w: &dyn Field,
    lambda: C64,
    grid: &PointSet,
    opts: ConjugateOptions,
) -> Result<(FieldSample, ConjugateReport)> {
    let s = sample(w, grid);
    let (fd, mut report) = conjugate_from_vector_sample(&s, lambda, opts)?;
    if w.partials(grid.points[0]).is_none() {
        return Ok((fd, report));
    }
    let values: Vec<Biquaternion> = fd
        .points
        .iter()
        .map(|p| {
            let d = w.partials(*p).expect("partials available");
            Biquaternion::scalar((d[0].w1 + d[1].w2 + d[2].w3) / lambda)
        })
        .collect();
    let out = FieldSample::new(fd.points.clone(), values, crate::FieldKind::Scalar, fd.grid);
    report.derivatives = "analytic";
    report.fd_crosscheck = Some(rel_l2(&fd, &out, out.norm_l2().max(f64::MIN_POSITIVE))?);
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, interior_eval_grid, FieldKind, FnField, Shape};
    use crate::fielddiff::dirac_shift_fd;
    use crate::forcefree::{beltrami_shear, Superposition};
    use crate::quaternion::I;

    fn grid(n: usize) -> PointSet {
        let d = build_domain(Shape::unit_ball(), n).unwrap();
        interior_eval_grid(&d, n, 1).unwrap()
    }

    fn plane_scalar(lam: C64) -> FnField {
        FnField::scalar(move |x| (I * lam * x[2]).exp())
    }

    fn monogenic_residual(w0: &FieldSample, wv: &FieldSample, lam: C64) -> f64 {
        let (a, b) = align(w0, wv).unwrap();
        let w = a.add(&b).unwrap();
        dirac_shift_fd(&w, lam).unwrap().norm_l2() / w.norm_l2()
    }

    #[test]
    fn plane_wave_from_scalar() {
        let lam = C64::new(1.0, 0.0);
        let g = grid(16);
        let (wv, rep) = conjugate_from_scalar_sample(&sample(&plane_scalar(lam), &g), lam, Default::default()).unwrap();
        assert_eq!(rep.derivatives, "fd");
        // central difference of e^{iz}: exact up to the factor sin(h)/h
        let h = 2.0 / 16.0;
        let bound = 1.0 - f64::sin(h) / h + 1e-12;
        for (p, v) in wv.points.iter().zip(&wv.values) {
            let exact = CVec3([ZERO, ZERO, -I * (I * lam * p[2]).exp()]);
            assert!((v.vec() - exact).norm() <= bound);
        }
        let res = monogenic_residual(&sample(&plane_scalar(lam), &g), &wv, lam);
        assert!(res <= h * h, "{res}");

        let z = FnField::scalar(|_| ZERO);
        let (zv, _) = conjugate_from_scalar(&z, lam, &g, Default::default()).unwrap();
        assert_eq!(zv.norm_max(), 0.0);
    }

    #[test]
    fn analytic_path_and_crosscheck() {
        let lam = C64::new(1.5, 0.2);
        let f = FnField::scalar(move |x| (lam * x[0]).sin()).with_partials(move |x| {
            [Biquaternion::scalar(lam * (lam * x[0]).cos()), Biquaternion::ZERO, Biquaternion::ZERO]
        });
        let g = grid(16);
        let (wv, rep) = conjugate_from_scalar(&f, lam, &g, Default::default()).unwrap();
        assert_eq!(rep.derivatives, "analytic");
        assert!(rep.fd_crosscheck.unwrap() < 0.01);
        // div w⃗ = λ w₀
        let d = div_fd(&wv).unwrap();
        let w0 = sample(&f, &d.point_set());
        let r = d.lin_comb(ONE, &w0, -lam).unwrap().norm_l2() / (lam.norm() * w0.norm_l2());
        assert!(r < 0.02, "{r}");
    }

    #[test]
    fn round_trip() {
        let lam = C64::new(1.0, 0.0);
        let g = grid(16);
        let w0 = plane_scalar(lam);
        let (wv, _) = conjugate_from_scalar(&w0, lam, &g, Default::default()).unwrap();
        let (back, _) = conjugate_from_vector_sample(&wv, lam, Default::default()).unwrap();
        let exact = sample(&w0, &back.point_set());
        let err = back.sub(&exact).unwrap().norm_l2() / exact.norm_l2();
        assert!(err <= 0.01, "{err}");
    }

    #[test]
    fn from_vector_examples() {
        let lam = C64::new(2.0, 0.0);
        let g = grid(16);
        let u = beltrami_shear(lam, 2, 0.3).unwrap();
        let (w0, rep) = conjugate_from_vector(&u, lam, &g, Default::default()).unwrap();
        assert_eq!(rep.derivatives, "analytic");
        assert!(w0.norm_max() < 1e-14);

        let l1 = C64::new(1.0, 0.0);
        let v = FnField::vector(move |x| CVec3([ZERO, ZERO, -I * (I * l1 * x[2]).exp()]));
        let (w0, _) = conjugate_from_vector(&v, l1, &g, Default::default()).unwrap();
        let exact = sample(&plane_scalar(l1), &w0.point_set());
        assert!(w0.sub(&exact).unwrap().norm_l2() / exact.norm_l2() < 0.01);
    }

    #[test]
    fn negative_controls() {
        let lam = C64::new(2.0, 0.0);
        let g = grid(16);
        let poly = FnField::scalar(|x| C64::new(x[0] * x[0], 0.0));
        assert!(matches!(
            conjugate_from_scalar(&poly, lam, &g, Default::default()),
            Err(Error::Precondition { .. })
        ));
        assert!(conjugate_from_scalar(&poly, ZERO, &g, Default::default()).is_err());

        // Helmholtz but not curl(curl+λ)-free
        let bad = FnField::vector(move |x| CVec3([(lam * x[1]).sin(), ZERO, ZERO]));
        match conjugate_from_vector(&bad, lam, &g, Default::default()) {
            Err(Error::Precondition { check, .. }) => assert!(check.contains("curl(curl")),
            other => panic!("expected precondition error, got {other:?}"),
        }
        let perturbed = FnField::vector(move |x| CVec3([(lam * x[1]).sin() + x[0] * x[0], ZERO, ZERO]));
        match conjugate_from_vector(&perturbed, lam, &g, Default::default()) {
            Err(Error::Precondition { check, .. }) => assert!(check.contains("laplacian")),
            other => panic!("expected precondition error, got {other:?}"),
        }
        let unchecked = ConjugateOptions {
            unchecked: true,
            ..Default::default()
        };
        assert!(conjugate_from_vector(&bad, lam, &g, unchecked).is_ok());
    }

    #[test]
    fn force_free_freedom_keeps_monogenicity() {
        let lam = C64::new(1.0, 0.0);
        let g = grid(16);
        let w0 = plane_scalar(lam);
        let (wv, _) = conjugate_from_scalar(&w0, lam, &g, Default::default()).unwrap();
        let u = Superposition(vec![Box::new(beltrami_shear(lam, 0, 0.5).unwrap())]);
        let shifted = wv.add(&sample(&u, &wv.point_set())).unwrap();
        let s0 = sample(&w0, &g);
        let res = monogenic_residual(&s0, &shifted, lam);
        assert!(res < 0.02, "{res}");
        assert_eq!(FieldKind::infer(&shifted.values), FieldKind::Vector);
    }
}
