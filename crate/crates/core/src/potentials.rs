//! Volume potentials over a [`VoxelDomain`]: the Newton potential `L_λ`, the
//! Teodorescu transform `T_±λ` and its components `T₀`, `T⃗₁`, `T⃗₂`.
//!
//! All operators go through [`quadrature`], which evaluates `θ` and `∇θ` once
//! per source/target pair and hands them to a [`VolumeKernel`]. When the
//! target lies within half a cell of a source center, that cell is replaced
//! by the equal-volume ball, where the `θ` integral is known in closed form
//! and the `∇θ` integral vanishes.
//!
//! Targets are processed in parallel; each target sums its sources in index
//! order, so results do not depend on the thread count.

use rayon::prelude::*;

use crate::domain::{FieldKind, FieldSample, Point, PointSet, VoxelDomain};
use crate::error::{Error, Result};
use crate::kernels::{equivalent_radius, selfcell_theta, theta_and_grad, Sign};
use crate::quaternion::{mul, Biquaternion, CVec3, C64};

/// Integrand of a volume potential, written in terms of `θ(x-y)` and
/// `∇_x θ(x-y)`.
pub trait VolumeKernel: Sync {
    fn kind(&self) -> FieldKind;

    /// Contribution density at a regular pair.
    fn regular(&self, theta: C64, grad: CVec3, w: &Biquaternion) -> Biquaternion;

    /// Contribution of a singular cell, given `∫_ball θ` (the `∇θ` integral is zero).
    fn singular(&self, ball_theta: C64, w: &Biquaternion) -> Biquaternion;
}

/// `θ w` (componentwise).
pub struct Newton;

/// `E_±λ w = (±λθ - ∇θ) w` (quaternion product).
pub struct Teodorescu {
    pub lambda_s: C64,
}

/// `±λθ w₀ + ∇θ·w⃗`.
pub struct T0 {
    pub lambda_s: C64,
}

/// `-∇θ w₀`.
pub struct T1;

/// `±λθ w⃗ - ∇θ × w⃗`.
pub struct T2 {
    pub lambda_s: C64,
}

impl VolumeKernel for Newton {
    fn kind(&self) -> FieldKind {
        FieldKind::Full
    }
    fn regular(&self, theta: C64, _grad: CVec3, w: &Biquaternion) -> Biquaternion {
        w.scale(theta)
    }
    fn singular(&self, ball_theta: C64, w: &Biquaternion) -> Biquaternion {
        w.scale(ball_theta)
    }
}

impl VolumeKernel for Teodorescu {
    fn kind(&self) -> FieldKind {
        FieldKind::Full
    }
    fn regular(&self, theta: C64, grad: CVec3, w: &Biquaternion) -> Biquaternion {
        mul(&Biquaternion::embed(self.lambda_s * theta, -grad), w)
    }
    fn singular(&self, ball_theta: C64, w: &Biquaternion) -> Biquaternion {
        w.scale(self.lambda_s * ball_theta)
    }
}

impl VolumeKernel for T0 {
    fn kind(&self) -> FieldKind {
        FieldKind::Scalar
    }
    fn regular(&self, theta: C64, grad: CVec3, w: &Biquaternion) -> Biquaternion {
        Biquaternion::scalar(self.lambda_s * theta * w.w0 + grad.dot(&w.vec()))
    }
    fn singular(&self, ball_theta: C64, w: &Biquaternion) -> Biquaternion {
        Biquaternion::scalar(self.lambda_s * ball_theta * w.w0)
    }
}

impl VolumeKernel for T1 {
    fn kind(&self) -> FieldKind {
        FieldKind::Vector
    }
    fn regular(&self, _theta: C64, grad: CVec3, w: &Biquaternion) -> Biquaternion {
        Biquaternion::vector(-grad.scale(w.w0))
    }
    fn singular(&self, _ball_theta: C64, _w: &Biquaternion) -> Biquaternion {
        Biquaternion::ZERO
    }
}

impl VolumeKernel for T2 {
    fn kind(&self) -> FieldKind {
        FieldKind::Vector
    }
    fn regular(&self, theta: C64, grad: CVec3, w: &Biquaternion) -> Biquaternion {
        let v = w.vec();
        Biquaternion::vector(v.scale(self.lambda_s * theta) - grad.cross(&v))
    }
    fn singular(&self, ball_theta: C64, w: &Biquaternion) -> Biquaternion {
        Biquaternion::vector(w.vec().scale(self.lambda_s * ball_theta))
    }
}

fn check_source(domain: &VoxelDomain, w: &FieldSample) -> Result<()> {
    if domain.is_empty() {
        return Err(Error::EmptyDomain);
    }
    if w.len() != domain.len() {
        return Err(Error::Mismatch(format!(
            "source has {} values, domain has {} cells",
            w.len(),
            domain.len()
        )));
    }
    Ok(())
}

/// `Σ_j K(x - y_j) w_j · weight_j` at every target, with the self-cell
/// replaced by the equal-volume ball.
pub fn quadrature<K: VolumeKernel>(
    domain: &VoxelDomain,
    w: &FieldSample,
    lambda: C64,
    targets: &[Point],
    kernel: &K,
) -> Result<Vec<Biquaternion>> {
    check_source(domain, w)?;
    let h = domain.h;
    let half = 0.5 * h * (1.0 - 1e-9);
    let ball = selfcell_theta(equivalent_radius(h), lambda);
    let out = targets
        .par_iter()
        .map(|x| {
            let mut acc = Biquaternion::ZERO;
            for ((y, wt), wj) in domain.centers.iter().zip(&domain.weights).zip(&w.values) {
                let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
                if d[0].abs() < half && d[1].abs() < half && d[2].abs() < half {
                    acc += kernel.singular(ball, wj);
                    continue;
                }
                let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                let (t, g) = theta_and_grad(d, r, lambda);
                acc += kernel.regular(t, g, wj).scale(C64::new(*wt, 0.0));
            }
            acc
        })
        .collect();
    Ok(out)
}

fn run<K: VolumeKernel>(
    domain: &VoxelDomain,
    w: &FieldSample,
    lambda: C64,
    eval: &PointSet,
    kernel: &K,
) -> Result<FieldSample> {
    let values = quadrature(domain, w, lambda, &eval.points, kernel)?;
    Ok(FieldSample::on(eval, values, kernel.kind()))
}

/// Newton potential `L_λ[w](x) = ∫_Ω θ(x-y) w(y) dy`, componentwise.
pub fn newton_l(domain: &VoxelDomain, w: &FieldSample, lambda: C64, eval: &PointSet) -> Result<FieldSample> {
    let mut s = run(domain, w, lambda, eval, &Newton)?;
    s.kind = w.kind;
    Ok(s)
}

/// Teodorescu transform `T_λ[w](x) = ∫_Ω E_λ(x-y) w(y) dy`.
pub fn teodorescu_t(domain: &VoxelDomain, w: &FieldSample, lambda: C64, eval: &PointSet) -> Result<FieldSample> {
    teodorescu_t_signed(domain, w, lambda, Sign::Plus, eval)
}

/// `T_±λ[w]` with kernel `E_±λ = ±λθ - ∇θ`.
pub fn teodorescu_t_signed(
    domain: &VoxelDomain,
    w: &FieldSample,
    lambda: C64,
    sign: Sign,
    eval: &PointSet,
) -> Result<FieldSample> {
    run(domain, w, lambda, eval, &Teodorescu { lambda_s: sign.apply(lambda) })
}

/// `T₀,±λ[w] = ∫ (±λθ w₀ + ∇θ·w⃗)`.
pub fn t0(domain: &VoxelDomain, w: &FieldSample, lambda: C64, sign: Sign, eval: &PointSet) -> Result<FieldSample> {
    run(domain, w, lambda, eval, &T0 { lambda_s: sign.apply(lambda) })
}

/// `T⃗₁[w₀] = -∫ ∇θ w₀`; independent of the sign.
pub fn t1(domain: &VoxelDomain, w0: &FieldSample, lambda: C64, eval: &PointSet) -> Result<FieldSample> {
    run(domain, w0, lambda, eval, &T1)
}

/// `T⃗₂,±λ[w⃗] = ∫ (±λθ w⃗ - ∇θ × w⃗)`.
pub fn t2(domain: &VoxelDomain, w: &FieldSample, lambda: C64, sign: Sign, eval: &PointSet) -> Result<FieldSample> {
    run(domain, w, lambda, eval, &T2 { lambda_s: sign.apply(lambda) })
}
