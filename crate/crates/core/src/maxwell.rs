//! Weak solutions of the nonhomogeneous time-harmonic Maxwell system
//!
//! ```text
//! curl H = -iωε E + j,   curl E = iωμ H,   div E = ρ/ε,   div H = 0
//! ```
//!
//! in achiral media, and of its chiral (Drude-Born-Fedorov) counterpart
//!
//! ```text
//! curl Ē = iωμ(H̄ + β curl H̄),   curl H̄ = -iωε(Ē + β curl Ē) + j̄.
//! ```
//!
//! Both are assembled from Newton potentials `L_k[j]`; every curl and
//! curl-curl is a finite difference of the computed potential on the
//! evaluation grid, so outputs live on the two-cell stencil interior.

use serde::Serialize;

use crate::domain::{sample, sample_on_domain, Field, FieldKind, FieldSample, PointSet, VoxelDomain};
use crate::error::{Error, Result};
use crate::fielddiff::{align, align_all, curl_fd, dirac_shift_fd, div_fd};
use crate::forcefree::verify_forcefree;
use crate::potentials::newton_l;
use crate::quaternion::{Biquaternion, C64, I, ONE, ZERO};

/// Medium parameters and the derived wave numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MediumParams {
    pub omega: f64,
    pub eps: C64,
    pub mu: C64,
    pub beta: C64,
    /// `ω√(εμ)` with `Im λ ≥ 0`.
    pub lambda: C64,
    /// `λ/(1 + λβ)`.
    pub alpha1: C64,
    /// `λ/(1 - λβ)`.
    pub alpha2: C64,
    /// Principal root of `ε`.
    pub sqrt_eps: C64,
    /// `λ/(ω√ε)`, the root of `μ` consistent with the branch of `λ`.
    pub sqrt_mu: C64,
}

impl MediumParams {
    pub fn new(omega: f64, eps: C64, mu: C64, beta: C64) -> Result<Self> {
        if !omega.is_finite() || !eps.is_finite() || !mu.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParameter("medium parameters must be finite".into()));
        }
        if omega == 0.0 || eps == ZERO || mu == ZERO {
            return Err(Error::ZeroDivisor("omega, eps and mu must be nonzero"));
        }
        let mut lambda = omega * (eps * mu).sqrt();
        if lambda.im < 0.0 {
            lambda = -lambda;
        }
        let (p, m) = (ONE + lambda * beta, ONE - lambda * beta);
        if p.norm() < 1e-14 || m.norm() < 1e-14 {
            return Err(Error::InvalidParameter(format!(
                "1 +- lambda*beta vanishes (lambda = {lambda}, beta = {beta})"
            )));
        }
        let sqrt_eps = eps.sqrt();
        Ok(MediumParams {
            omega,
            eps,
            mu,
            beta,
            lambda,
            alpha1: lambda / p,
            alpha2: lambda / m,
            sqrt_eps,
            sqrt_mu: lambda / (omega * sqrt_eps),
        })
    }

    pub fn achiral(omega: f64, eps: C64, mu: C64) -> Result<Self> {
        Self::new(omega, eps, mu, ZERO)
    }

    fn iwe(&self) -> C64 {
        I * self.omega * self.eps
    }

    fn iwm(&self) -> C64 {
        I * self.omega * self.mu
    }
}

/// Current density together with the charge density it implies.
#[derive(Clone, Copy)]
pub struct SourceData<'a> {
    pub j: &'a dyn Field,
}

impl<'a> SourceData<'a> {
    pub fn new(j: &'a dyn Field) -> Self {
        SourceData { j }
    }

    /// `ρ = div j / (iω)` by finite differences on `points`.
    pub fn rho(&self, points: &PointSet, omega: f64) -> Result<FieldSample> {
        Ok(div_fd(&sample(self.j, points).vec_part())?.scale(ONE / (I * omega)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxwellFields {
    pub e: FieldSample,
    pub h: FieldSample,
}

fn check_forcefree(name: &str, u: Option<&dyn Field>, lambda: C64, eval: &PointSet, tol: f64) -> Result<()> {
    let Some(u) = u else { return Ok(()) };
    let rep = verify_forcefree(&sample(u, eval), lambda, tol)?;
    if rep.pass {
        Ok(())
    } else {
        Err(Error::Precondition {
            check: format!("{name} is force-free for wave number {lambda}"),
            residual: rep.curl_residual.max(rep.div_residual),
            tol,
        })
    }
}

/// `(curl L, curl curl L)` on the common stencil interior.
fn curls(l: &FieldSample) -> Result<(FieldSample, FieldSample)> {
    let cl = curl_fd(l)?;
    let ccl = curl_fd(&cl)?;
    let (ccl, cl) = align(&ccl, &cl)?;
    Ok((cl, ccl))
}

fn sample_opt(f: Option<&dyn Field>, set: &PointSet) -> FieldSample {
    match f {
        Some(f) => sample(f, set).vec_part(),
        None => FieldSample::zeros(set, FieldKind::Vector),
    }
}

/// Achiral solution
/// `E = (j + curl curl L_λ[j])/(iωε) + (u - v)/(2iωε)`,
/// `H = -curl L_λ[j] + (u + v)/(2λ)`,
/// with `curl u + λu = 0` and `curl v - λv = 0`.
pub fn solve_achiral(
    domain: &VoxelDomain,
    src: SourceData,
    m: &MediumParams,
    u: Option<&dyn Field>,
    v: Option<&dyn Field>,
    eval: &PointSet,
    tol: f64,
) -> Result<MaxwellFields> {
    if m.beta != ZERO {
        return Err(Error::InvalidParameter("solve_achiral needs beta = 0; use solve_chiral".into()));
    }
    check_forcefree("u", u, m.lambda, eval, tol)?;
    check_forcefree("v", v, -m.lambda, eval, tol)?;
    let js = sample_on_domain(src.j, domain).vec_part();
    let l = newton_l(domain, &js, m.lambda, eval)?;
    let (cl, ccl) = curls(&l)?;
    let set = cl.point_set();
    let j = sample(src.j, &set).vec_part();
    let (us, vs) = (sample_opt(u, &set), sample_opt(v, &set));
    let iwe = m.iwe();
    let e = j
        .add(&ccl)?
        .lin_comb(ONE / iwe, &us.sub(&vs)?, ONE / (2.0 * iwe))?;
    let h = cl.lin_comb(-ONE, &us.add(&vs)?, ONE / (2.0 * m.lambda))?;
    Ok(MaxwellFields { e, h })
}

/// Chiral solution `(Ē, H̄)` for the current `j̄`:
///
/// ```text
/// Ē = -(i/2ωε)(2j̄ - α₁curl L₁ + α₂curl L₂ + curl curl(L₁ + L₂))[j̄] - (√μ/2)(u₁ + u₂)
/// H̄ = -(1/2λ)(α₁curl L₁ + α₂curl L₂ - curl curl(L₁ - L₂))[j̄] + (√ε/2i)(u₁ - u₂)
/// ```
///
/// where `L_k = L_{α_k}`, `curl u₁ + α₁u₁ = 0` and `curl u₂ - α₂u₂ = 0`.
pub fn solve_chiral(
    domain: &VoxelDomain,
    src: SourceData,
    m: &MediumParams,
    u1: Option<&dyn Field>,
    u2: Option<&dyn Field>,
    eval: &PointSet,
    tol: f64,
) -> Result<MaxwellFields> {
    check_forcefree("u1", u1, m.alpha1, eval, tol)?;
    check_forcefree("u2", u2, -m.alpha2, eval, tol)?;
    let js = sample_on_domain(src.j, domain).vec_part();
    let l1 = newton_l(domain, &js, m.alpha1, eval)?;
    let l2 = if m.alpha2 == m.alpha1 {
        l1.clone()
    } else {
        newton_l(domain, &js, m.alpha2, eval)?
    };
    let (cl1, ccl1) = curls(&l1)?;
    let (cl2, ccl2) = curls(&l2)?;
    let set = cl1.point_set();
    let j = sample(src.j, &set).vec_part();
    let (s1, s2) = (sample_opt(u1, &set), sample_opt(u2, &set));
    let (a1, a2) = (m.alpha1, m.alpha2);
    let two = C64::new(2.0, 0.0);

    let e_src = j
        .lin_comb(two, &cl1, -a1)?
        .lin_comb(ONE, &cl2, a2)?
        .lin_comb(ONE, &ccl1.add(&ccl2)?, ONE)?;
    let e = e_src.lin_comb(-I / (2.0 * m.omega * m.eps), &s1.add(&s2)?, -m.sqrt_mu / 2.0)?;

    let h_src = cl1
        .lin_comb(a1, &cl2, a2)?
        .lin_comb(ONE, &ccl1.sub(&ccl2)?, -ONE)?;
    let h = h_src.lin_comb(-ONE / (2.0 * m.lambda), &s1.sub(&s2)?, m.sqrt_eps / (2.0 * I))?;
    Ok(MaxwellFields { e, h })
}

/// `(E⃗, H⃗) = (-Ē/√μ, H̄/√ε)`, the fields in which the chiral system splits
/// into `φ⃗ = E⃗ + iH⃗` and `ψ⃗ = E⃗ - iH⃗`.
pub fn normalized_fields(f: &MaxwellFields, m: &MediumParams) -> MaxwellFields {
    MaxwellFields {
        e: f.e.scale(-ONE / m.sqrt_mu),
        h: f.h.scale(ONE / m.sqrt_eps),
    }
}

/// Inverse of [`normalized_fields`].
pub fn physical_fields(f: &MaxwellFields, m: &MediumParams) -> MaxwellFields {
    MaxwellFields {
        e: f.e.scale(-m.sqrt_mu),
        h: f.h.scale(m.sqrt_eps),
    }
}

fn diag_check(m: &MediumParams) -> Result<()> {
    if m.lambda == ZERO || m.eps == ZERO {
        Err(Error::ZeroDivisor("diagonalization needs lambda != 0 and omega*eps != 0"))
    } else {
        Ok(())
    }
}

/// `φ⃗ = -iωεE⃗ + λH⃗`, `ψ⃗ = iωεE⃗ + λH⃗`.
pub fn diagonalize(e: &FieldSample, h: &FieldSample, m: &MediumParams) -> Result<(FieldSample, FieldSample)> {
    diag_check(m)?;
    let iwe = m.iwe();
    Ok((e.lin_comb(-iwe, h, m.lambda)?, e.lin_comb(iwe, h, m.lambda)?))
}

/// `E⃗ = (ψ⃗ - φ⃗)/(2iωε)`, `H⃗ = (ψ⃗ + φ⃗)/(2λ)`.
pub fn undiagonalize(phi: &FieldSample, psi: &FieldSample, m: &MediumParams) -> Result<(FieldSample, FieldSample)> {
    diag_check(m)?;
    let a = ONE / (2.0 * m.iwe());
    let b = ONE / (2.0 * m.lambda);
    Ok((psi.lin_comb(a, phi, -a)?, psi.lin_comb(b, phi, b)?))
}

/// Relative residuals of the Maxwell system; `β` enters through the medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxwellResiduals {
    /// `‖curl H + iωε(E + β curl E) - j‖ / ‖j‖`.
    pub ampere: f64,
    /// `‖curl E - iωμ(H + β curl H)‖ / ‖j‖`.
    pub faraday: f64,
    /// `‖div H‖ / ‖j‖`.
    pub div_h: f64,
    /// `‖div E - ρ/ε‖ / ‖ρ/ε‖`, or over `|λ|‖j‖/|ωε|` when `ρ` vanishes.
    pub gauss: f64,
}

impl MaxwellResiduals {
    pub fn max(&self) -> f64 {
        self.ampere.max(self.faraday).max(self.div_h).max(self.gauss)
    }
}

pub fn maxwell_residuals(f: &MaxwellFields, src: SourceData, m: &MediumParams) -> Result<MaxwellResiduals> {
    let ce = curl_fd(&f.e)?;
    let ch = curl_fd(&f.h)?;
    let de = div_fd(&f.e)?;
    let dh = div_fd(&f.h)?;
    let v = align_all(&[&ce, &ch, &f.e, &f.h, &de, &dh])?;
    let (ce, ch, e, h, de, dh) = (&v[0], &v[1], &v[2], &v[3], &v[4], &v[5]);
    let set = ce.point_set();
    let j = sample(src.j, &set).vec_part();
    let jn = j.norm_l2();
    if jn == 0.0 {
        return Err(Error::InvalidParameter("residuals are normalized by the current, which vanishes".into()));
    }
    let rho_eps = src.rho(&f.e.point_set(), m.omega)?.scale(ONE / m.eps);
    let rho_eps = crate::fielddiff::restrict(&rho_eps, de)?;

    let ampere = ch
        .lin_comb(ONE, &e.lin_comb(ONE, ce, m.beta)?, m.iwe())?
        .sub(&j)?
        .norm_l2()
        / jn;
    let faraday = ce.lin_comb(ONE, &h.lin_comb(ONE, ch, m.beta)?, -m.iwm())?.norm_l2() / jn;
    let div_h = dh.norm_l2() / jn;
    let rn = rho_eps.norm_l2();
    let gscale = if rn > 0.0 { rn } else { m.lambda.norm() * jn / (m.omega * m.eps).norm() };
    let gauss = de.sub(&rho_eps)?.norm_l2() / gscale;
    Ok(MaxwellResiduals {
        ampere,
        faraday,
        div_h,
        gauss,
    })
}

/// Residuals of the homogeneous system for a field difference,
/// `(‖curl E - iωμH‖/‖ωμH‖, ‖curl H + iωεE‖/‖ωεE‖)`.
pub fn homogeneous_residuals(f: &MaxwellFields, m: &MediumParams) -> Result<(f64, f64)> {
    let ce = curl_fd(&f.e)?;
    let ch = curl_fd(&f.h)?;
    let v = align_all(&[&ce, &ch, &f.e, &f.h])?;
    let (ce, ch, e, h) = (&v[0], &v[1], &v[2], &v[3]);
    let hs = h.scale(m.iwm());
    let es = e.scale(m.iwe());
    let r1 = ce.sub(&hs)?.norm_l2() / hs.norm_l2();
    let r2 = ch.add(&es)?.norm_l2() / es.norm_l2();
    Ok((r1, r2))
}

/// Residuals of `(D - λ)φ⃗ = div j⃗ + λj⃗` and `(D + λ)ψ⃗ = -div j⃗ + λj⃗` for
/// the achiral diagonalization.
pub fn achiral_split_residuals(f: &MaxwellFields, src: SourceData, m: &MediumParams) -> Result<(f64, f64)> {
    let (phi, psi) = diagonalize(&f.e, &f.h, m)?;
    let lam = m.lambda;
    split_pair(&phi, &psi, src.j, (-lam, ONE, lam), (lam, -ONE, lam))
}

/// Residuals of `(D + α₁)φ⃗ = (i/λ)(-div j⃗ + α₁j⃗)` and
/// `(D - α₂)ψ⃗ = -(i/λ)(div j⃗ + α₂j⃗)` for `φ⃗, ψ⃗ = E⃗ ± iH⃗` built from the
/// chiral output, with `j⃗ = j̄/√ε`.
pub fn chiral_split_residuals(f: &MaxwellFields, src: SourceData, m: &MediumParams) -> Result<(f64, f64)> {
    let n = normalized_fields(f, m);
    let phi = n.e.lin_comb(ONE, &n.h, I)?;
    let psi = n.e.lin_comb(ONE, &n.h, -I)?;
    let k = I / m.lambda / m.sqrt_eps;
    split_pair(
        &phi,
        &psi,
        src.j,
        (m.alpha1, -k, k * m.alpha1),
        (-m.alpha2, -k, -k * m.alpha2),
    )
}

/// For each of `(f, (shift, a, b))` the residual
/// `‖(D + shift)f - (a div j + b j)‖ / ‖a div j + b j‖`.
fn split_pair(
    phi: &FieldSample,
    psi: &FieldSample,
    j: &dyn Field,
    p: (C64, C64, C64),
    q: (C64, C64, C64),
) -> Result<(f64, f64)> {
    let one = |f: &FieldSample, (shift, a, b): (C64, C64, C64)| -> Result<f64> {
        let lhs = dirac_shift_fd(f, shift)?;
        let js = sample(j, &f.point_set()).vec_part();
        let dj = div_fd(&js)?;
        let (lhs, dj) = align(&lhs, &dj)?;
        let js = crate::fielddiff::restrict(&js, &lhs)?;
        let rhs = FieldSample::new(
            lhs.points.clone(),
            dj.values
                .iter()
                .zip(&js.values)
                .map(|(d, v)| Biquaternion::embed(a * d.w0, v.vec().scale(b)))
                .collect(),
            FieldKind::Full,
            lhs.grid,
        );
        Ok(lhs.sub(&rhs)?.norm_l2() / rhs.norm_l2())
    };
    Ok((one(phi, p)?, one(psi, q)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, interior_eval_grid, FnField, Point, Shape};
    use crate::forcefree::{beltrami_plane_wave, beltrami_shear};
    use crate::quaternion::CVec3;

    fn c(a: f64, b: f64) -> C64 {
        C64::new(a, b)
    }

    /// Raised-cosine bump `(1 + cos πr)/2 · (1 + y, z + 0.5i, x)` supported in the
    /// closed unit ball.
    pub(crate) fn current() -> FnField {
        FnField::vector(|x: Point| {
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            if r >= 1.0 {
                return CVec3::ZERO;
            }
            let b = 0.5 * (1.0 + (std::f64::consts::PI * r).cos());
            CVec3::new(c(1.0 + x[1], 0.0), c(x[2], 0.5), c(x[0], 0.0)).scale_real(b)
        })
    }

    fn setup(n: usize) -> (VoxelDomain, PointSet) {
        let d = build_domain(Shape::unit_ball(), n).unwrap();
        let e = interior_eval_grid(&d, n, 2).unwrap();
        (d, e)
    }

    /// λ = 2 with ωε = 1, ωμ = 4.
    fn medium(beta: C64) -> MediumParams {
        MediumParams::new(1.0, ONE, c(4.0, 0.0), beta).unwrap()
    }

    #[test]
    fn medium_parameters() {
        let m = medium(ZERO);
        assert_eq!(m.lambda, c(2.0, 0.0));
        assert_eq!((m.alpha1, m.alpha2), (m.lambda, m.lambda));
        let lossy = MediumParams::new(2.0, c(1.0, 0.3), c(1.0, 0.1), c(0.05, 0.0)).unwrap();
        assert!(lossy.lambda.im >= 0.0);
        let neg = MediumParams::new(-1.0, ONE, ONE, ZERO).unwrap();
        assert_eq!(neg.lambda, c(-1.0, 0.0));
        for p in [m, lossy, neg] {
            assert!((p.omega * p.sqrt_eps * p.sqrt_mu - p.lambda).norm() < 1e-14);
            assert!((p.sqrt_mu * p.sqrt_mu - p.mu).norm() < 1e-13);
        }
        assert!(matches!(MediumParams::new(1.0, ONE, ONE, c(1.0, 0.0)), Err(Error::InvalidParameter(_))));
        assert!(MediumParams::new(0.0, ONE, ONE, ZERO).is_err());
        assert!(MediumParams::new(1.0, ZERO, ONE, ZERO).is_err());
    }

    #[test]
    fn diagonalization_round_trip() {
        let (_, e) = setup(8);
        let m = MediumParams::new(1.3, c(1.0, 0.2), c(2.0, 0.0), ZERO).unwrap();
        let ef = sample(&FnField::vector(|x| CVec3::new(c(x[0], 1.0), c(0.0, x[1]), c(x[2] * x[0], 0.0))), &e);
        let hf = sample(&FnField::vector(|x| CVec3::new(c(1.0, 0.0), c(x[2], x[0]), c(0.3, 0.0))), &e);
        let (phi, psi) = diagonalize(&ef, &hf, &m).unwrap();
        let (e2, h2) = undiagonalize(&phi, &psi, &m).unwrap();
        assert!(e2.sub(&ef).unwrap().norm_l2() <= 1e-14 * ef.norm_l2());
        assert!(h2.sub(&hf).unwrap().norm_l2() <= 1e-14 * hf.norm_l2());

        let zero = FieldSample::zeros(&e, FieldKind::Vector);
        let (phi, psi) = diagonalize(&zero, &hf, &m).unwrap();
        let lh = hf.scale(m.lambda);
        assert!(phi.sub(&lh).unwrap().norm_max() < 1e-15 && psi.sub(&lh).unwrap().norm_max() < 1e-15);
    }

    #[test]
    fn zero_data_gives_zero_fields() {
        let (d, e) = setup(12);
        let z = FnField::vector(|_| CVec3::ZERO);
        let f = solve_achiral(&d, SourceData::new(&z), &medium(ZERO), None, None, &e, 0.05).unwrap();
        assert_eq!(f.e.norm_max() + f.h.norm_max(), 0.0);
        let f = solve_chiral(&d, SourceData::new(&z), &medium(c(0.1, 0.0)), None, None, &e, 0.05).unwrap();
        assert_eq!(f.e.norm_max() + f.h.norm_max(), 0.0);
    }

    #[test]
    fn homogeneous_fields_from_beltrami_data() {
        let (d, e) = setup(16);
        let m = medium(ZERO);
        let z = FnField::vector(|_| CVec3::ZERO);
        let u = beltrami_plane_wave(m.lambda, [0.0, 0.6, 0.8]).unwrap();
        let v = beltrami_shear(-m.lambda, 0, 0.3).unwrap();
        let f = solve_achiral(&d, SourceData::new(&z), &m, Some(&u), Some(&v), &e, 0.05).unwrap();
        let (r1, r2) = homogeneous_residuals(&f, &m).unwrap();
        // plane-wave second-order FD error at h = 1/8, |λ| = 2
        assert!(r1 < 0.03 && r2 < 0.03, "{r1} {r2}");
        // v with the wrong handedness is rejected
        assert!(matches!(
            solve_achiral(&d, SourceData::new(&z), &m, Some(&u), Some(&u), &e, 0.05),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn achiral_residuals_and_split() {
        let (d, e) = setup(16);
        let m = medium(ZERO);
        let j = current();
        let src = SourceData::new(&j);
        let f = solve_achiral(&d, src, &m, None, None, &e, 0.05).unwrap();
        let r = maxwell_residuals(&f, src, &m).unwrap();
        // Ampere and the divergences hold to rounding for this assembly; the
        // Faraday residual is a triple FD curl (about 15% at n = 16, 5.5% at n = 32)
        assert!(r.ampere < 1e-12 && r.div_h < 1e-12 && r.gauss < 1e-12, "{r:?}");
        assert!(r.faraday < 0.2, "{r:?}");
        let (p, q) = achiral_split_residuals(&f, src, &m).unwrap();
        assert!(p < 0.1 && q < 0.1, "{p} {q}");
    }

    #[test]
    fn chiral_collapses_to_achiral() {
        let (d, e) = setup(12);
        let m = medium(ZERO);
        let j = current();
        let a = solve_achiral(&d, SourceData::new(&j), &m, None, None, &e, 0.05).unwrap();
        let b = solve_chiral(&d, SourceData::new(&j), &m, None, None, &e, 0.05).unwrap();
        assert!(a.e.sub(&b.e).unwrap().norm_l2() <= 1e-10 * a.e.norm_l2());
        assert!(a.h.sub(&b.h).unwrap().norm_l2() <= 1e-10 * a.h.norm_l2());
        let n = physical_fields(&normalized_fields(&b, &m), &m);
        assert!(n.e.sub(&b.e).unwrap().norm_l2() <= 1e-14 * b.e.norm_l2());
    }

    #[test]
    fn chiral_residuals_and_split() {
        let (d, e) = setup(16);
        let m = medium(c(0.1, 0.0));
        let j = current();
        let src = SourceData::new(&j);
        let u1 = beltrami_shear(m.alpha1, 2, 0.0).unwrap();
        let f = solve_chiral(&d, src, &m, Some(&u1), None, &e, 0.05).unwrap();
        let r = maxwell_residuals(&f, src, &m).unwrap();
        assert!(r.ampere < 0.02 && r.div_h < 1e-12 && r.gauss < 1e-12, "{r:?}");
        assert!(r.faraday < 0.2, "{r:?}");
        let (p, q) = chiral_split_residuals(&f, src, &m).unwrap();
        assert!(p < 0.1 && q < 0.1, "{p} {q}");
        let wrong = beltrami_shear(m.alpha2, 2, 0.0).unwrap();
        assert!(solve_chiral(&d, src, &m, None, Some(&wrong), &e, 0.05).is_err());
    }
}
