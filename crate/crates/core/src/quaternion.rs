//! Biquaternions (complex quaternions) and complex 3-vectors.
//!
//! A [`Biquaternion`] is `w0 + w1 e1 + w2 e2 + w3 e3` with complex
//! coefficients. The imaginary unit of the coefficients is central: it
//! commutes with every `e_k`, while the quaternion units obey
//! `e1 e2 = e3`, `e2 e3 = e1`, `e3 e1 = e2`, `e_k^2 = -1`.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// A vector in `C^3`. The dot product is bilinear (no conjugation), matching
/// the vector calculus identities used for complex fields.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CVec3(pub [C64; 3]);

impl CVec3 {
    pub const ZERO: CVec3 = CVec3([ZERO; 3]);

    pub fn new(x: C64, y: C64, z: C64) -> Self {
        CVec3([x, y, z])
    }

    pub fn from_real(v: [f64; 3]) -> Self {
        CVec3([v[0].into(), v[1].into(), v[2].into()])
    }

    pub fn dot(&self, other: &CVec3) -> C64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn dot_real(&self, other: [f64; 3]) -> C64 {
        self.0[0] * other[0] + self.0[1] * other[1] + self.0[2] * other[2]
    }

    pub fn cross(&self, other: &CVec3) -> CVec3 {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = other.0;
        CVec3([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    /// `n x self` for a real vector `n`.
    pub fn cross_from_real(n: [f64; 3], v: &CVec3) -> CVec3 {
        let [b1, b2, b3] = v.0;
        CVec3([
            b3 * n[1] - b2 * n[2],
            b1 * n[2] - b3 * n[0],
            b2 * n[0] - b1 * n[1],
        ])
    }

    pub fn scale(&self, s: C64) -> CVec3 {
        CVec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    pub fn scale_real(&self, s: f64) -> CVec3 {
        CVec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }

    /// Square root of the sum of squared moduli.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }
}

impl Index<usize> for CVec3 {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVec3 {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl Add for CVec3 {
    type Output = CVec3;
    fn add(self, o: CVec3) -> CVec3 {
        CVec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for CVec3 {
    type Output = CVec3;
    fn sub(self, o: CVec3) -> CVec3 {
        CVec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl AddAssign for CVec3 {
    fn add_assign(&mut self, o: CVec3) {
        for k in 0..3 {
            self.0[k] += o.0[k];
        }
    }
}

impl SubAssign for CVec3 {
    fn sub_assign(&mut self, o: CVec3) {
        for k in 0..3 {
            self.0[k] -= o.0[k];
        }
    }
}

impl Neg for CVec3 {
    type Output = CVec3;
    fn neg(self) -> CVec3 {
        CVec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<C64> for CVec3 {
    type Output = CVec3;
    fn mul(self, s: C64) -> CVec3 {
        self.scale(s)
    }
}

/// Complex quaternion stored as `(w0, w1, w2, w3)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Biquaternion {
    pub w0: C64,
    pub w1: C64,
    pub w2: C64,
    pub w3: C64,
}

impl Biquaternion {
    pub const ZERO: Biquaternion = Biquaternion {
        w0: ZERO,
        w1: ZERO,
        w2: ZERO,
        w3: ZERO,
    };

    pub fn new(w0: C64, w1: C64, w2: C64, w3: C64) -> Self {
        Biquaternion { w0, w1, w2, w3 }
    }

    /// `s + v`.
    pub fn embed(s: C64, v: CVec3) -> Self {
        Biquaternion {
            w0: s,
            w1: v.0[0],
            w2: v.0[1],
            w3: v.0[2],
        }
    }

    pub fn scalar(s: C64) -> Self {
        Self::embed(s, CVec3::ZERO)
    }

    pub fn vector(v: CVec3) -> Self {
        Self::embed(ZERO, v)
    }

    /// Basis unit `e_k`, `k` in `1..=3`.
    pub fn unit(k: usize) -> Self {
        let mut v = CVec3::ZERO;
        v.0[k - 1] = ONE;
        Self::vector(v)
    }

    /// Scalar part `Sc w`.
    pub fn sc(&self) -> C64 {
        self.w0
    }

    /// Vector part `Vec w`.
    pub fn vec(&self) -> CVec3 {
        CVec3([self.w1, self.w2, self.w3])
    }

    pub fn components(&self) -> [C64; 4] {
        [self.w0, self.w1, self.w2, self.w3]
    }

    pub fn from_components(c: [C64; 4]) -> Self {
        Biquaternion::new(c[0], c[1], c[2], c[3])
    }

    pub fn scale(&self, s: C64) -> Self {
        Biquaternion::new(self.w0 * s, self.w1 * s, self.w2 * s, self.w3 * s)
    }

    /// Square root of the sum of squared moduli of the four components.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.w0.norm_sqr() + self.w1.norm_sqr() + self.w2.norm_sqr() + self.w3.norm_sqr()
    }

    pub fn is_scalar(&self) -> bool {
        self.w1 == ZERO && self.w2 == ZERO && self.w3 == ZERO
    }

    pub fn is_vector(&self) -> bool {
        self.w0 == ZERO
    }
}

/// Quaternion product with complex coefficients.
///
/// `(a0 + a)(b0 + b) = a0 b0 - a.b + a0 b + b0 a + a x b`
pub fn mul(a: &Biquaternion, b: &Biquaternion) -> Biquaternion {
    let av = a.vec();
    let bv = b.vec();
    let s = a.w0 * b.w0 - av.dot(&bv);
    let v = bv.scale(a.w0) + av.scale(b.w0) + av.cross(&bv);
    Biquaternion::embed(s, v)
}

pub fn sc(a: &Biquaternion) -> C64 {
    a.sc()
}

pub fn vec(a: &Biquaternion) -> CVec3 {
    a.vec()
}

pub fn embed(s: C64, v: CVec3) -> Biquaternion {
    Biquaternion::embed(s, v)
}

impl Mul for Biquaternion {
    type Output = Biquaternion;
    fn mul(self, o: Biquaternion) -> Biquaternion {
        mul(&self, &o)
    }
}

impl Mul<C64> for Biquaternion {
    type Output = Biquaternion;
    fn mul(self, s: C64) -> Biquaternion {
        self.scale(s)
    }
}

impl Add for Biquaternion {
    type Output = Biquaternion;
    fn add(self, o: Biquaternion) -> Biquaternion {
        Biquaternion::new(self.w0 + o.w0, self.w1 + o.w1, self.w2 + o.w2, self.w3 + o.w3)
    }
}

impl Sub for Biquaternion {
    type Output = Biquaternion;
    fn sub(self, o: Biquaternion) -> Biquaternion {
        Biquaternion::new(self.w0 - o.w0, self.w1 - o.w1, self.w2 - o.w2, self.w3 - o.w3)
    }
}

impl AddAssign for Biquaternion {
    fn add_assign(&mut self, o: Biquaternion) {
        self.w0 += o.w0;
        self.w1 += o.w1;
        self.w2 += o.w2;
        self.w3 += o.w3;
    }
}

impl Neg for Biquaternion {
    type Output = Biquaternion;
    fn neg(self) -> Biquaternion {
        Biquaternion::new(-self.w0, -self.w1, -self.w2, -self.w3)
    }
}
