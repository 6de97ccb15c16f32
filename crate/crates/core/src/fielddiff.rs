//! Central finite differences on lattice-tagged field samples.
//!
//! Every operator returns the subset of input points whose full stencil is
//! present in the sample (the "stencil interior"). No one-sided stencils are
//! used. All first-order operators share the same central difference, so
//! `curl∘grad`, `div∘curl` and the mixed terms of `D²` cancel exactly up to
//! rounding; [`laplacian_fd`] is the composed (wide) stencil so that
//! `-(D-λ)(D+λ) = Δ + λ²` holds as a discrete identity.

use std::collections::HashMap;

use crate::domain::{FieldKind, FieldSample, GridMeta, Point};
use crate::error::{Error, Result};
use crate::quaternion::{mul, Biquaternion, CVec3, C64};

const AXES: [[i64; 3]; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];

/// Hash lookup from lattice index to sample position.
pub struct GridIndex {
    pub meta: GridMeta,
    map: HashMap<[i64; 3], usize>,
    keys: Vec<[i64; 3]>,
}

impl GridIndex {
    pub fn new(sample: &FieldSample) -> Result<Self> {
        let meta = sample
            .grid
            .ok_or_else(|| Error::Mismatch("finite differences need a lattice-tagged sample".into()))?;
        let keys: Vec<[i64; 3]> = sample.points.iter().map(|p| meta.index_of(*p)).collect();
        let map = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        Ok(GridIndex { meta, map, keys })
    }

    pub fn get(&self, k: [i64; 3]) -> Option<usize> {
        self.map.get(&k).copied()
    }

    pub fn key(&self, i: usize) -> [i64; 3] {
        self.keys[i]
    }
}

fn shift(k: [i64; 3], d: [i64; 3], s: i64) -> [i64; 3] {
    [k[0] + s * d[0], k[1] + s * d[1], k[2] + s * d[2]]
}

/// Applies a stencil operator. `offsets` lists the neighbours required;
/// `op` receives a lookup closure over lattice offsets.
fn apply<F>(f: &FieldSample, offsets: &[[i64; 3]], kind: FieldKind, what: &str, op: F) -> Result<FieldSample>
where
    F: Fn(&dyn Fn([i64; 3]) -> Biquaternion, f64) -> Biquaternion,
{
    let idx = GridIndex::new(f)?;
    let h = idx.meta.h;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (i, p) in f.points.iter().enumerate() {
        let k = idx.key(i);
        if !offsets.iter().all(|d| idx.get(shift(k, *d, 1)).is_some()) {
            continue;
        }
        let look = |d: [i64; 3]| f.values[idx.map[&shift(k, d, 1)]];
        points.push(*p);
        values.push(op(&look, h));
    }
    if points.is_empty() {
        return Err(Error::EmptyGrid(format!("{what}: no point has a complete stencil")));
    }
    Ok(FieldSample::new(points, values, kind, f.grid))
}

fn first_order_offsets() -> Vec<[i64; 3]> {
    AXES.iter().flat_map(|a| [*a, shift([0; 3], *a, -1)]).collect()
}

fn wide_offsets() -> Vec<[i64; 3]> {
    let mut v = vec![[0; 3]];
    v.extend(AXES.iter().flat_map(|a| [shift([0; 3], *a, 2), shift([0; 3], *a, -2)]));
    v
}

fn compact_offsets() -> Vec<[i64; 3]> {
    let mut v = vec![[0; 3]];
    v.extend(first_order_offsets());
    v
}

/// Central difference `∂_axis w` from a lookup.
fn partial(look: &dyn Fn([i64; 3]) -> Biquaternion, axis: usize, h: f64) -> Biquaternion {
    let a = AXES[axis];
    (look(a) - look(shift([0; 3], a, -1))).scale(C64::new(0.5 / h, 0.0))
}

/// Gradient of the scalar part.
pub fn grad_fd(f: &FieldSample) -> Result<FieldSample> {
    apply(f, &first_order_offsets(), FieldKind::Vector, "grad", |look, h| {
        let g: Vec<C64> = (0..3).map(|a| partial(look, a, h).w0).collect();
        Biquaternion::vector(CVec3([g[0], g[1], g[2]]))
    })
}

/// Divergence of the vector part.
pub fn div_fd(v: &FieldSample) -> Result<FieldSample> {
    apply(v, &first_order_offsets(), FieldKind::Scalar, "div", |look, h| {
        let d = partial(look, 0, h).w1 + partial(look, 1, h).w2 + partial(look, 2, h).w3;
        Biquaternion::scalar(d)
    })
}

/// Curl of the vector part.
pub fn curl_fd(v: &FieldSample) -> Result<FieldSample> {
    apply(v, &first_order_offsets(), FieldKind::Vector, "curl", |look, h| {
        let d: Vec<CVec3> = (0..3).map(|a| partial(look, a, h).vec()).collect();
        Biquaternion::vector(curl_from_partials(&d))
    })
}

fn curl_from_partials(d: &[CVec3]) -> CVec3 {
    CVec3([d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]])
}

/// Moisil-Teodorescu operator `Dw = Σ e_k ∂_k w = -div w⃗ + grad w₀ + curl w⃗`.
pub fn dirac_fd(w: &FieldSample) -> Result<FieldSample> {
    apply(w, &first_order_offsets(), FieldKind::Full, "dirac", |look, h| {
        let mut acc = Biquaternion::ZERO;
        for a in 0..3 {
            acc += mul(&Biquaternion::unit(a + 1), &partial(look, a, h));
        }
        acc
    })
}

/// `(D + c) w` on the stencil interior.
pub fn dirac_shift_fd(w: &FieldSample, c: C64) -> Result<FieldSample> {
    let d = dirac_fd(w)?;
    let (d, w) = align(&d, w)?;
    d.lin_comb(C64::new(1.0, 0.0), &w, c)
}

/// Componentwise Laplacian with the composed stencil
/// `(f(x+2h e_k) - 2f(x) + f(x-2h e_k)) / (4h²)`, i.e. the square of the
/// central first difference.
pub fn laplacian_fd(f: &FieldSample) -> Result<FieldSample> {
    apply(f, &wide_offsets(), f.kind, "laplacian", |look, h| {
        let c = look([0; 3]);
        let mut acc = Biquaternion::ZERO;
        for a in AXES {
            acc += look(shift([0; 3], a, 2)) + look(shift([0; 3], a, -2)) - c - c;
        }
        acc.scale(C64::new(0.25 / (h * h), 0.0))
    })
}

/// Componentwise 7-point Laplacian `(f(x+h e_k) - 2f(x) + f(x-h e_k)) / h²`.
pub fn laplacian_compact_fd(f: &FieldSample) -> Result<FieldSample> {
    apply(f, &compact_offsets(), f.kind, "laplacian", |look, h| {
        let c = look([0; 3]);
        let mut acc = Biquaternion::ZERO;
        for a in AXES {
            acc += look(a) + look(shift([0; 3], a, -1)) - c - c;
        }
        acc.scale(C64::new(1.0 / (h * h), 0.0))
    })
}

/// `(Δ + λ²) f` with the wide Laplacian.
pub fn helmholtz_fd(f: &FieldSample, lambda: C64) -> Result<FieldSample> {
    let l = laplacian_fd(f)?;
    let (l, f) = align(&l, f)?;
    l.lin_comb(C64::new(1.0, 0.0), &f, lambda * lambda)
}

/// Restricts `a` and `b` to their common lattice nodes, in `a`'s order.
pub fn align(a: &FieldSample, b: &FieldSample) -> Result<(FieldSample, FieldSample)> {
    if a.points == b.points {
        return Ok((a.clone(), b.clone()));
    }
    let ga = a.grid.ok_or_else(|| Error::Mismatch("align: sample without lattice".into()))?;
    let gb = b.grid.ok_or_else(|| Error::Mismatch("align: sample without lattice".into()))?;
    let same = (ga.h - gb.h).abs() <= 1e-12 * ga.h
        && (0..3).all(|k| (ga.origin[k] - gb.origin[k]).abs() <= 1e-9 * ga.h.max(1.0));
    if !same {
        return Err(Error::Mismatch("align: samples on different lattices".into()));
    }
    let ib = GridIndex::new(b)?;
    let mut pts = Vec::new();
    let mut va = Vec::new();
    let mut vb = Vec::new();
    for (p, v) in a.points.iter().zip(&a.values) {
        if let Some(j) = ib.get(ga.index_of(*p)) {
            pts.push(*p);
            va.push(*v);
            vb.push(b.values[j]);
        }
    }
    if pts.is_empty() {
        return Err(Error::EmptyGrid("align: no common points".into()));
    }
    Ok((
        FieldSample::new(pts.clone(), va, a.kind, a.grid),
        FieldSample::new(pts, vb, b.kind, a.grid),
    ))
}

/// Restricts every sample to the lattice nodes common to all of them, in the
/// order of the first.
pub fn align_all(samples: &[&FieldSample]) -> Result<Vec<FieldSample>> {
    let Some(first) = samples.first() else {
        return Ok(Vec::new());
    };
    let mut base = (*first).clone();
    for s in &samples[1..] {
        base = align(&base, s)?.0;
    }
    samples.iter().map(|s| Ok(align(&base, s)?.1)).collect()
}

/// Restricts `a` to the points of `target` (which must all be present in `a`).
pub fn restrict(a: &FieldSample, target: &FieldSample) -> Result<FieldSample> {
    let (t, a2) = align(target, a)?;
    if t.len() != target.len() {
        return Err(Error::Mismatch("restrict: target points missing from source".into()));
    }
    Ok(a2)
}

/// `‖a - b‖₂ / ‖scale‖₂` over the common points of `a` and `b`.
pub fn rel_l2(a: &FieldSample, b: &FieldSample, scale: f64) -> Result<f64> {
    let (a, b) = align(a, b)?;
    let d = a.sub(&b)?.norm_l2();
    Ok(if scale > 0.0 { d / scale } else { d })
}

/// The six points `p ± h e_k`, ordered `+x, -x, +y, -y, +z, -z`.
pub fn stencil_points(p: Point, h: f64) -> [Point; 6] {
    let mut out = [p; 6];
    for a in 0..3 {
        out[2 * a][a] += h;
        out[2 * a + 1][a] -= h;
    }
    out
}

/// Central-difference curl from values at [`stencil_points`].
pub fn curl_from_stencil(v: &[CVec3; 6], h: f64) -> CVec3 {
    let s = C64::new(0.5 / h, 0.0);
    let d: Vec<CVec3> = (0..3).map(|a| (v[2 * a] - v[2 * a + 1]).scale(s)).collect();
    curl_from_partials(&d)
}
