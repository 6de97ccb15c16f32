//! Helmholtz fundamental solution `θ(x) = -e^{iλ|x|}/(4π|x|)`, its gradient,
//! the kernels `E_±λ = ±λθ - ∇θ` of `D ± λ`, and the equal-volume-ball
//! integrals that replace the singular cell in volume quadrature.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::Point;
use crate::error::{Error, Result};
use crate::quaternion::{embed, Biquaternion, CVec3, C64, I, ZERO};

/// Sign selector for the `±λ` operator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    /// `±λ`.
    pub fn apply(self, lambda: C64) -> C64 {
        lambda * self.value()
    }
}

fn radius(x: Point) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// `θ` and `∇θ` at a nonzero offset with precomputed `r = |x|`; the hot path
/// of every quadrature.
#[inline]
pub fn theta_and_grad(x: Point, r: f64, lambda: C64) -> (C64, CVec3) {
    let t = -(I * lambda * r).exp() / (4.0 * PI * r);
    let f = t * (I * lambda - 1.0 / r) / r;
    (t, CVec3([f * x[0], f * x[1], f * x[2]]))
}

#[inline]
pub fn theta_unchecked(r: f64, lambda: C64) -> C64 {
    -(I * lambda * r).exp() / (4.0 * PI * r)
}

pub fn theta(x: Point, lambda: C64) -> Result<C64> {
    let r = radius(x);
    if r == 0.0 {
        return Err(Error::Singularity);
    }
    Ok(theta_unchecked(r, lambda))
}

/// `∇θ(x) = θ(x)(iλ - 1/|x|) x/|x|`.
pub fn grad_theta(x: Point, lambda: C64) -> Result<CVec3> {
    let r = radius(x);
    if r == 0.0 {
        return Err(Error::Singularity);
    }
    Ok(theta_and_grad(x, r, lambda).1)
}

/// `E_±λ(x) = ±λθ(x) - ∇θ(x)`.
pub fn fundamental_e(x: Point, lambda: C64, sign: Sign) -> Result<Biquaternion> {
    let r = radius(x);
    if r == 0.0 {
        return Err(Error::Singularity);
    }
    let (t, g) = theta_and_grad(x, r, lambda);
    Ok(embed(sign.apply(lambda) * t, -g))
}

/// `∫_{B(r)} θ dV = -∫₀^r ρ e^{iλρ} dρ`.
///
/// Closed form `(e^{iλr}(iλr - 1) + 1)/λ²`; its Taylor series is used when
/// `|λr|` is small, where the closed form cancels catastrophically.
pub fn selfcell_theta(r_eq: f64, lambda: C64) -> C64 {
    let z = I * lambda * r_eq;
    if lambda == ZERO {
        return C64::new(-0.5 * r_eq * r_eq, 0.0);
    }
    if z.norm() < 0.5 {
        // -Σ (iλ)^k r^{k+2} / (k! (k+2))
        let mut term = C64::new(1.0, 0.0); // (iλr)^k / k!
        let mut acc = ZERO;
        for k in 0..40 {
            acc += term / (k as f64 + 2.0);
            term *= z / (k as f64 + 1.0);
            if term.norm() < 1e-18 {
                break;
            }
        }
        return -acc * r_eq * r_eq;
    }
    ((z.exp() * (z - 1.0)) + 1.0) / (lambda * lambda)
}

/// `∫_{B(r)} ∇θ dV`, zero by odd symmetry.
pub fn selfcell_gradtheta(_r_eq: f64, _lambda: C64) -> CVec3 {
    CVec3::ZERO
}

/// Radius of the ball with the volume of an `h`-cube.
pub fn equivalent_radius(h: f64) -> f64 {
    (3.0 * h * h * h / (4.0 * PI)).cbrt()
}
