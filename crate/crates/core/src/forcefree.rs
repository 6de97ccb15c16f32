//! Analytic force-free (Beltrami) fields, `curl u⃗ + λu⃗ = 0`, and a
//! finite-difference verifier.

use serde::Serialize;

use crate::domain::{Field, FieldKind, FieldSample, Point};
use crate::error::{Error, Result};
use crate::fielddiff::{align, curl_fd, div_fd};
use crate::quaternion::{Biquaternion, CVec3, C64, I, ONE, ZERO};

/// `u⃗ = sin(λx_a + phase) e_b - cos(λx_a + phase) e_c` with `(a, b, c)` a
/// cyclic permutation of the axes; for `a = z` this is
/// `(sin(λz + phase), -cos(λz + phase), 0)`.
#[derive(Debug, Clone, Copy)]
pub struct BeltramiShear {
    pub lambda: C64,
    pub axis: usize,
    pub phase: f64,
}

pub fn beltrami_shear(lambda: C64, axis: usize, phase: f64) -> Result<BeltramiShear> {
    if lambda == ZERO {
        return Err(Error::ZeroDivisor("force-free fields need lambda != 0"));
    }
    if axis > 2 {
        return Err(Error::InvalidParameter(format!("axis {axis} out of range 0..3")));
    }
    Ok(BeltramiShear { lambda, axis, phase })
}

impl BeltramiShear {
    fn frame(&self) -> (usize, usize, usize) {
        let a = self.axis;
        (a, (a + 1) % 3, (a + 2) % 3)
    }
}

impl Field for BeltramiShear {
    fn kind(&self) -> FieldKind {
        FieldKind::Vector
    }

    fn eval(&self, x: Point) -> Biquaternion {
        let (a, b, c) = self.frame();
        let s = self.lambda * x[a] + self.phase;
        let mut v = CVec3::ZERO;
        v[b] = s.sin();
        v[c] = -s.cos();
        Biquaternion::vector(v)
    }

    fn partials(&self, x: Point) -> Option<[Biquaternion; 3]> {
        let (a, b, c) = self.frame();
        let s = self.lambda * x[a] + self.phase;
        let mut d = CVec3::ZERO;
        d[b] = self.lambda * s.cos();
        d[c] = self.lambda * s.sin();
        let mut out = [Biquaternion::ZERO; 3];
        out[a] = Biquaternion::vector(d);
        Some(out)
    }
}

/// Circularly polarized plane wave `u⃗ = A p⃗ e^{iλ k̂·x}` with
/// `p⃗ = e₁ - i e₂`, `e₁ × e₂ = k̂`, so that `k̂ × p⃗ = i p⃗` and
/// `curl u⃗ = iλ k̂ × u⃗ = -λu⃗`.
#[derive(Debug, Clone, Copy)]
pub struct BeltramiPlaneWave {
    pub lambda: C64,
    pub k: Point,
    pub p: CVec3,
    pub amplitude: C64,
}

pub fn beltrami_plane_wave(lambda: C64, k: Point) -> Result<BeltramiPlaneWave> {
    if lambda == ZERO {
        return Err(Error::ZeroDivisor("force-free fields need lambda != 0"));
    }
    let norm = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("propagation direction must be a unit vector, |k| = {norm}")));
    }
    // e1: the coordinate axis least aligned with k, orthogonalized
    let mut a = 0;
    for j in 1..3 {
        if k[j].abs() < k[a].abs() {
            a = j;
        }
    }
    let mut e1 = [0.0; 3];
    e1[a] = 1.0;
    let kd = k[a];
    for j in 0..3 {
        e1[j] -= kd * k[j];
    }
    let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    for v in e1.iter_mut() {
        *v /= n1;
    }
    let e2 = [
        k[1] * e1[2] - k[2] * e1[1],
        k[2] * e1[0] - k[0] * e1[2],
        k[0] * e1[1] - k[1] * e1[0],
    ];
    let p = CVec3::from_real(e1) - CVec3::from_real(e2).scale(I);
    // guard: i k × p = -p
    let kp = CVec3::cross_from_real(k, &p).scale(I);
    if (kp + p).norm() > 1e-12 {
        return Err(Error::InvalidParameter("no circular eigenvector for this direction".into()));
    }
    Ok(BeltramiPlaneWave {
        lambda,
        k,
        p,
        amplitude: ONE,
    })
}

impl BeltramiPlaneWave {
    pub fn with_amplitude(mut self, a: C64) -> Self {
        self.amplitude = a;
        self
    }

    fn phase(&self, x: Point) -> C64 {
        let kx = self.k[0] * x[0] + self.k[1] * x[1] + self.k[2] * x[2];
        self.amplitude * (I * self.lambda * kx).exp()
    }
}

impl Field for BeltramiPlaneWave {
    fn kind(&self) -> FieldKind {
        FieldKind::Vector
    }

    fn eval(&self, x: Point) -> Biquaternion {
        Biquaternion::vector(self.p.scale(self.phase(x)))
    }

    fn partials(&self, x: Point) -> Option<[Biquaternion; 3]> {
        let u = self.p.scale(self.phase(x));
        let f = I * self.lambda;
        Some([0, 1, 2].map(|a| Biquaternion::vector(u.scale(f * self.k[a]))))
    }
}

/// Pointwise sum of fields.
pub struct Superposition(pub Vec<Box<dyn Field + Send>>);

impl Field for Superposition {
    fn kind(&self) -> FieldKind {
        let mut it = self.0.iter().map(|f| f.kind());
        let first = it.next().unwrap_or(FieldKind::Vector);
        it.fold(first, crate::domain::join_kind)
    }

    fn eval(&self, x: Point) -> Biquaternion {
        self.0.iter().fold(Biquaternion::ZERO, |acc, f| acc + f.eval(x))
    }

    fn partials(&self, x: Point) -> Option<[Biquaternion; 3]> {
        let mut acc = [Biquaternion::ZERO; 3];
        for f in &self.0 {
            let p = f.partials(x)?;
            for a in 0..3 {
                acc[a] += p[a];
            }
        }
        Some(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ForceFreeReport {
    /// `‖curl u⃗ + λu⃗‖₂ / ‖u⃗‖₂` on the stencil interior.
    pub curl_residual: f64,
    /// `‖div u⃗‖₂ / ‖u⃗‖₂`.
    pub div_residual: f64,
    pub tol: f64,
    pub pass: bool,
    /// Set when `u⃗` vanishes; such a field passes trivially.
    pub degenerate: bool,
}

/// Finite-difference check of `curl u⃗ + λu⃗ = 0` and `div u⃗ = 0`.
pub fn verify_forcefree(u: &FieldSample, lambda: C64, tol: f64) -> Result<ForceFreeReport> {
    let c = curl_fd(u)?;
    let (c, uu) = align(&c, &u.vec_part())?;
    let scale = uu.norm_l2();
    if scale == 0.0 {
        return Ok(ForceFreeReport {
            curl_residual: 0.0,
            div_residual: 0.0,
            tol,
            pass: true,
            degenerate: true,
        });
    }
    let curl_residual = c.lin_comb(ONE, &uu, lambda)?.norm_l2() / scale;
    let div_residual = div_fd(u)?.norm_l2() / scale;
    Ok(ForceFreeReport {
        curl_residual,
        div_residual,
        tol,
        pass: curl_residual <= tol && div_residual <= tol,
        degenerate: false,
    })
}
