//! The right inverse `R_λ = (1/λ)(I - curl T⃗₂,λ)` of `curl + λ`, the general
//! solution `w⃗ = R_λ[g⃗] + u⃗` of `curl w⃗ + λw⃗ = g⃗`, and the gauge-transformed
//! equation `curl v⃗ + λv⃗ + ∇φ × v⃗ = h⃗`.
//!
//! The curl of `T⃗₂` is taken by finite differences of the computed potential;
//! differentiating the kernel instead would produce a hypersingular integral.

use crate::domain::{sample, sample_on_domain, Field, FieldKind, FieldSample, Point, PointSet, VoxelDomain};
use crate::error::{Error, Result};
use crate::fielddiff::{align, curl_fd, curl_from_stencil, div_fd, grad_fd, stencil_points};
use crate::forcefree::verify_forcefree;
use crate::kernels::Sign;
use crate::potentials::{newton_l, quadrature, t2, T2};
use crate::quaternion::{Biquaternion, CVec3, C64, ONE, ZERO};

fn nonzero(lambda: C64) -> Result<()> {
    if lambda == ZERO {
        Err(Error::ZeroDivisor("lambda must be nonzero (the right inverse divides by lambda)"))
    } else {
        Ok(())
    }
}

/// `R_λ[g⃗] = (1/λ)(g⃗ - curl T⃗₂,λ[g⃗])` on the stencil interior of `eval`.
pub fn r_lambda(domain: &VoxelDomain, g: &dyn Field, lambda: C64, eval: &PointSet) -> Result<FieldSample> {
    nonzero(lambda)?;
    let src = sample_on_domain(g, domain).vec_part();
    let t = t2(domain, &src, lambda, Sign::Plus, eval)?;
    let ct = curl_fd(&t)?;
    let ge = sample(g, &ct.point_set()).vec_part();
    ge.lin_comb(ONE / lambda, &ct, -ONE / lambda)
}

/// The same operator written through the Newton potential,
/// `(1/λ) grad div L_λ[g⃗] + λL_λ[g⃗] - curl L_λ[g⃗]`.
pub fn r_lambda_alt(domain: &VoxelDomain, g: &dyn Field, lambda: C64, eval: &PointSet) -> Result<FieldSample> {
    nonzero(lambda)?;
    let src = sample_on_domain(g, domain).vec_part();
    let l = newton_l(domain, &src, lambda, eval)?;
    let gd = grad_fd(&div_fd(&l)?)?;
    let cl = curl_fd(&l)?;
    let (gd, l) = align(&gd, &l)?;
    let (gd, cl) = align(&gd, &cl)?;
    gd.lin_comb(ONE / lambda, &l, lambda)?.lin_comb(ONE, &cl, -ONE)
}

/// `R_λ[g⃗]` at arbitrary points, with the curl taken on a local stencil of
/// spacing `h_fd` around each point.
pub fn r_lambda_at_points(
    domain: &VoxelDomain,
    g: &dyn Field,
    lambda: C64,
    points: &[Point],
    h_fd: f64,
) -> Result<Vec<CVec3>> {
    nonzero(lambda)?;
    let ct = curl_t2_at(domain, g, lambda, points, h_fd)?;
    Ok(points
        .iter()
        .zip(&ct)
        .map(|(p, c)| (g.eval(*p).vec() - *c).scale(ONE / lambda))
        .collect())
}

fn curl_t2_at(domain: &VoxelDomain, g: &dyn Field, lambda: C64, points: &[Point], h_fd: f64) -> Result<Vec<CVec3>> {
    let src = sample_on_domain(g, domain).vec_part();
    let stencil: Vec<Point> = points.iter().flat_map(|p| stencil_points(*p, h_fd)).collect();
    let vals = quadrature(domain, &src, lambda, &stencil, &T2 { lambda_s: lambda })?;
    Ok(vals
        .chunks(6)
        .map(|c| {
            let v: [CVec3; 6] = std::array::from_fn(|k| c[k].vec());
            curl_from_stencil(&v, h_fd)
        })
        .collect())
}

/// `R_λ[g⃗]` at boundary points `x` with inward unit normals `-n`.
///
/// `curl T⃗₂` jumps across the boundary together with `g⃗`, so it is linearly
/// extrapolated from the interior points `x - 2h n` and `x - 4h n`, each
/// differenced on a stencil of the source spacing `h`.
pub fn r_lambda_boundary(
    domain: &VoxelDomain,
    g: &dyn Field,
    lambda: C64,
    points: &[Point],
    normals: &[Point],
) -> Result<Vec<CVec3>> {
    nonzero(lambda)?;
    let h = domain.h;
    let mut probes = Vec::with_capacity(2 * points.len());
    for (p, n) in points.iter().zip(normals) {
        for depth in [2.0 * h, 4.0 * h] {
            probes.push([p[0] - depth * n[0], p[1] - depth * n[1], p[2] - depth * n[2]]);
        }
    }
    let ct = curl_t2_at(domain, g, lambda, &probes, h)?;
    Ok(points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let c = ct[2 * i].scale(C64::new(2.0, 0.0)) - ct[2 * i + 1];
            (g.eval(*p).vec() - c).scale(ONE / lambda)
        })
        .collect())
}

/// `w⃗ = R_λ[g⃗] + u⃗`, where `u⃗` must pass the force-free check at `tol`.
pub fn general_solution(
    domain: &VoxelDomain,
    g: &dyn Field,
    lambda: C64,
    u: Option<&dyn Field>,
    eval: &PointSet,
    tol: f64,
) -> Result<FieldSample> {
    nonzero(lambda)?;
    if let Some(u) = u {
        let us = sample(u, eval);
        let rep = verify_forcefree(&us, lambda, tol)?;
        if !rep.pass {
            return Err(Error::Precondition {
                check: format!("u is force-free (div residual {:.3e})", rep.div_residual),
                residual: rep.curl_residual.max(rep.div_residual),
                tol,
            });
        }
    }
    let r = r_lambda(domain, g, lambda, eval)?;
    match u {
        None => Ok(r),
        Some(u) => r.add(&sample(u, &r.point_set()).vec_part()),
    }
}

/// `g₀ = -div g⃗ / λ`, making `g₀ + g⃗` satisfy `div g⃗ + λg₀ = 0` discretely.
pub fn compatibility_scalar(g: &FieldSample, lambda: C64) -> Result<FieldSample> {
    nonzero(lambda)?;
    Ok(div_fd(g)?.scale(-ONE / lambda))
}

struct GaugedSource<'a> {
    h: &'a dyn Field,
    phi: &'a dyn Field,
}

impl Field for GaugedSource<'_> {
    fn kind(&self) -> FieldKind {
        FieldKind::Vector
    }
    fn eval(&self, x: Point) -> Biquaternion {
        Biquaternion::vector(self.h.eval(x).vec().scale(self.phi.eval(x).w0.exp()))
    }
}

/// Solves `curl v⃗ + λv⃗ + ∇φ × v⃗ = h⃗` by `v⃗ = e^{-φ} R_λ[e^φ h⃗]`.
pub fn gauge_solve(
    domain: &VoxelDomain,
    h: &dyn Field,
    phi: &dyn Field,
    lambda: C64,
    eval: &PointSet,
) -> Result<FieldSample> {
    nonzero(lambda)?;
    let w = r_lambda(domain, &GaugedSource { h, phi }, lambda, eval)?;
    let values = w
        .points
        .iter()
        .zip(&w.values)
        .map(|(p, v)| v.scale((-phi.eval(*p).w0).exp()))
        .collect();
    Ok(FieldSample::new(w.points.clone(), values, FieldKind::Vector, w.grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, interior_eval_grid, FnField, Shape};
    use crate::fielddiff::rel_l2;
    use crate::forcefree::beltrami_shear;

    fn c(a: f64, b: f64) -> C64 {
        C64::new(a, b)
    }

    fn g_field() -> FnField {
        FnField::vector(|x| CVec3::new(c(x[1].cos(), 0.2), c(x[0] * x[2], 0.0), c(0.0, (x[0] + x[1]).sin())))
    }

    fn setup(n: usize) -> (VoxelDomain, PointSet) {
        let d = build_domain(Shape::unit_ball(), n).unwrap();
        let g = interior_eval_grid(&d, n, 2).unwrap();
        (d, g)
    }

    fn main_residual(r: &FieldSample, g: &dyn Field, lambda: C64) -> f64 {
        let cr = curl_fd(r).unwrap();
        let (cr, rr) = align(&cr, r).unwrap();
        let lhs = cr.lin_comb(ONE, &rr, lambda).unwrap();
        let ge = sample(g, &lhs.point_set()).vec_part();
        lhs.sub(&ge).unwrap().norm_l2() / ge.norm_l2()
    }

    #[test]
    fn zero_source_and_lambda_zero() {
        let (d, e) = setup(12);
        let z = FnField::vector(|_| CVec3::ZERO);
        assert_eq!(r_lambda(&d, &z, c(2.0, 0.0), &e).unwrap().norm_max(), 0.0);
        assert!(matches!(r_lambda(&d, &z, ZERO, &e), Err(Error::ZeroDivisor(_))));
        let s = sample(&g_field(), &e);
        assert!(compatibility_scalar(&s, ZERO).is_err());
    }

    #[test]
    fn right_inverse_and_alternative_form() {
        let (d, e) = setup(16);
        let g = g_field();
        let lam = c(2.0, 0.0);
        let r = r_lambda(&d, &g, lam, &e).unwrap();
        let res = main_residual(&r, &g, lam);
        assert!(res < 0.05, "residual {res}");
        let alt = r_lambda_alt(&d, &g, lam, &e).unwrap();
        let diff = rel_l2(&r, &alt, r.norm_l2()).unwrap();
        assert!(diff < 0.05, "alt diff {diff}");
    }

    #[test]
    fn general_solution_with_beltrami_freedom() {
        let (d, e) = setup(16);
        let g = g_field();
        let lam = c(2.0, 0.0);
        let u1 = beltrami_shear(lam, 2, 0.0).unwrap();
        let u2 = beltrami_shear(lam, 0, 1.0).unwrap();
        let w1 = general_solution(&d, &g, lam, Some(&u1), &e, 0.05).unwrap();
        let w2 = general_solution(&d, &g, lam, Some(&u2), &e, 0.05).unwrap();
        let w0 = general_solution(&d, &g, lam, None, &e, 0.05).unwrap();
        assert_eq!(w0, r_lambda(&d, &g, lam, &e).unwrap());
        assert!(main_residual(&w1, &g, lam) < 0.05);
        let du = sample(&u1, &w1.point_set()).sub(&sample(&u2, &w1.point_set())).unwrap();
        let dw = w1.sub(&w2).unwrap();
        assert!(dw.sub(&du).unwrap().norm_l2() <= 1e-12 * du.norm_l2());

        let bad = FnField::vector(|x| CVec3::from_real([x[0], 0.0, 0.0]));
        assert!(matches!(
            general_solution(&d, &g, lam, Some(&bad), &e, 0.05),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn compatibility_scalar_examples() {
        let (_, e) = setup(12);
        let lin = sample(&FnField::vector(|x| CVec3::from_real([x[0], 0.0, 0.0])), &e);
        let g0 = compatibility_scalar(&lin, c(2.0, 0.0)).unwrap();
        assert!(g0.values.iter().all(|v| (v.w0 - c(-0.5, 0.0)).norm() < 1e-12));
        let rotational = sample(&FnField::vector(|x| CVec3::from_real([-x[1], x[0], 0.0])), &e);
        assert!(compatibility_scalar(&rotational, c(2.0, 0.0)).unwrap().norm_max() < 1e-12);

        let lam = c(1.0, 0.5);
        let s = sample(&g_field(), &e);
        let g0 = compatibility_scalar(&s, lam).unwrap();
        let dv = div_fd(&s).unwrap();
        let defect = dv.lin_comb(ONE, &g0, lam).unwrap().norm_l2();
        assert!(defect <= 1e-13 * dv.norm_l2().max(1.0));
    }

    #[test]
    fn gauge_reduces_to_plain_solution_for_zero_phase() {
        let (d, e) = setup(10);
        let g = g_field();
        let zero = FnField::scalar(|_| ZERO);
        let lam = c(2.0, 0.0);
        let v = gauge_solve(&d, &g, &zero, lam, &e).unwrap();
        let r = r_lambda(&d, &g, lam, &e).unwrap();
        assert!(v.sub(&r).unwrap().norm_l2() <= 1e-14 * r.norm_l2());
    }

    #[test]
    fn linearity() {
        let (d, e) = setup(10);
        let lam = c(1.0, 0.5);
        let g1 = g_field();
        let g2 = FnField::vector(|x| CVec3::new(c(x[2], 0.0), c(1.0, x[1]), c(x[0] * x[0], 0.0)));
        let (a, b) = (c(0.5, -1.0), c(2.0, 0.3));
        let both = FnField::vector(move |x| g1_val(x).scale(a) + g2_val(x).scale(b));
        fn g1_val(x: Point) -> CVec3 {
            CVec3::new(C64::new(x[1].cos(), 0.2), C64::new(x[0] * x[2], 0.0), C64::new(0.0, (x[0] + x[1]).sin()))
        }
        fn g2_val(x: Point) -> CVec3 {
            CVec3::new(C64::new(x[2], 0.0), C64::new(1.0, x[1]), C64::new(x[0] * x[0], 0.0))
        }
        let r1 = r_lambda(&d, &g1, lam, &e).unwrap();
        let r2 = r_lambda(&d, &g2, lam, &e).unwrap();
        let r12 = r_lambda(&d, &both, lam, &e).unwrap();
        let comb = r1.lin_comb(a, &r2, b).unwrap();
        assert!(r12.sub(&comb).unwrap().norm_l2() <= 1e-12 * r12.norm_l2());
    }
}
