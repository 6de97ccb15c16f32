//! Neumann problem for `curl w⃗ + λw⃗ = g⃗` in a ball with prescribed normal
//! trace `w⃗·n⃗ = φ₀`.
//!
//! The solution is `w⃗ = R_λ[g⃗] + u⃗` with the force-free part represented by
//! surface potentials of `ψ₀ = φ₀ - R_λ[g⃗]·n⃗` and a tangential density `ψ⃗`,
//!
//! ```text
//! u⃗ = -grad S[ψ₀] - (curl - λ) S[ψ⃗],    S[f](x) = ∫_∂Ω θ(x - y) f(y) ds_y,
//! ```
//!
//! where `ψ⃗` solves the boundary integral equation
//!
//! ```text
//! ½ψ⃗(x) + n⃗(x) × ∫_∂Ω (λθ ψ⃗ - ∇θ × ψ⃗) ds = n⃗(x) × ∫_∂Ω ∇θ ψ₀ ds.
//! ```
//!
//! Discretization: flat triangles of an icosahedral sphere mesh, centroid
//! collocation and centroid quadrature. The self-triangle contributes the
//! exact flat-triangle integral of the first two terms of `θ` to the `λθ`
//! part; the `∇θ` self terms vanish by symmetry and the right-hand side is
//! regularized by subtracting `ψ₀(x)` under the integral.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Field, FieldSample, Point, PointSet, VoxelDomain};
use crate::error::{Error, Result};
use crate::forcefree::verify_forcefree;
use crate::kernels::theta_and_grad;
use crate::quaternion::{CVec3, C64, I, ONE, ZERO};
use crate::rightinverse::{r_lambda, r_lambda_boundary};

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Point, b: Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

/// Triangulated closed surface with per-triangle geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub centroids: Vec<Point>,
    /// Outward unit normals of the flat triangles.
    pub normals: Vec<Point>,
    pub areas: Vec<f64>,
    pub center: Point,
    pub radius: f64,
    pub level: usize,
}

/// Icosphere of the given radius centered at the origin.
pub fn make_sphere_mesh(radius: f64, level: usize) -> Result<SurfaceMesh> {
    make_sphere_mesh_at([0.0; 3], radius, level)
}

/// Icosahedron refined `level` times by edge midpoints projected to the sphere.
pub fn make_sphere_mesh_at(center: Point, radius: f64, level: usize) -> Result<SurfaceMesh> {
    if level < 1 {
        return Err(Error::InvalidParameter("sphere mesh level must be >= 1".into()));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("sphere radius must be positive, got {radius}")));
    }
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let mut v: Vec<Point> = [
        [-1.0, p, 0.0],
        [1.0, p, 0.0],
        [-1.0, -p, 0.0],
        [1.0, -p, 0.0],
        [0.0, -1.0, p],
        [0.0, 1.0, p],
        [0.0, -1.0, -p],
        [0.0, 1.0, -p],
        [p, 0.0, -1.0],
        [p, 0.0, 1.0],
        [-p, 0.0, -1.0],
        [-p, 0.0, 1.0],
    ]
    .iter()
    .map(|x| {
        let n = norm(*x);
        [x[0] / n, x[1] / n, x[2] / n]
    })
    .collect();
    let mut tris: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, v: &mut Vec<Point>| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = [v[a][0] + v[b][0], v[a][1] + v[b][1], v[a][2] + v[b][2]];
                let n = norm(m);
                v.push([m[0] / n, m[1] / n, m[2] / n]);
                v.len() - 1
            })
        };
        let mut next = Vec::with_capacity(4 * tris.len());
        for &[a, b, c] in &tris {
            let ab = midpoint(a, b, &mut v);
            let bc = midpoint(b, c, &mut v);
            let ca = midpoint(c, a, &mut v);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        tris = next;
    }
    let vertices = v
        .iter()
        .map(|x| [center[0] + radius * x[0], center[1] + radius * x[1], center[2] + radius * x[2]])
        .collect();
    SurfaceMesh::from_parts(vertices, tris, center, radius, level)
}

impl SurfaceMesh {
    /// Computes centroids, areas and normals oriented away from `center`.
    pub fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        center: Point,
        radius: f64,
        level: usize,
    ) -> Result<Self> {
        let n = triangles.len();
        let (mut centroids, mut normals, mut areas) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for (t, tri) in triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|k| vertices[k]);
            let cr = cross(sub(b, a), sub(c, a));
            let twice = norm(cr);
            let scale = dot(sub(b, a), sub(b, a)).max(dot(sub(c, a), sub(c, a)));
            if !(twice > 1e-12 * scale) {
                return Err(Error::DegenerateTriangle(t));
            }
            let cen = [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0, (a[2] + b[2] + c[2]) / 3.0];
            let mut nn = [cr[0] / twice, cr[1] / twice, cr[2] / twice];
            if dot(nn, sub(cen, center)) < 0.0 {
                nn = [-nn[0], -nn[1], -nn[2]];
            }
            centroids.push(cen);
            normals.push(nn);
            areas.push(0.5 * twice);
        }
        Ok(SurfaceMesh {
            vertices,
            triangles,
            centroids,
            normals,
            areas,
            center,
            radius,
            level,
        })
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// Mean over triangles of the longest edge.
    pub fn mean_diameter(&self) -> f64 {
        let s: f64 = self
            .triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|k| self.vertices[k]);
                norm(sub(a, b)).max(norm(sub(b, c))).max(norm(sub(c, a)))
            })
            .sum();
        s / self.len() as f64
    }

    fn corners(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|k| self.vertices[k])
    }

    /// Object File Format (OFF) text export.
    pub fn write_off<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "OFF")?;
        writeln!(w, "{} {} 0", self.vertices.len(), self.triangles.len())?;
        for v in &self.vertices {
            writeln!(w, "{} {} {}", v[0], v[1], v[2])?;
        }
        for t in &self.triangles {
            writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

/// `∫_T 1/|p - y| ds_y` for `p` in the plane of the flat triangle `T`, inside it.
fn inv_r_triangle(p: Point, tri: [Point; 3]) -> f64 {
    let mut total = 0.0;
    for k in 0..3 {
        let (a, b) = (tri[k], tri[(k + 1) % 3]);
        let e = sub(b, a);
        let len = norm(e);
        let t = [e[0] / len, e[1] / len, e[2] / len];
        let sa = dot(sub(a, p), t);
        let sb = dot(sub(b, p), t);
        let ap = sub(a, p);
        let h = norm([ap[0] - sa * t[0], ap[1] - sa * t[1], ap[2] - sa * t[2]]);
        let (ra, rb) = (norm(sub(a, p)), norm(sub(b, p)));
        total += h * ((sb + rb) / (sa + ra)).ln();
    }
    total
}

/// `∫_T θ ds` over triangle `t` at its own centroid, from
/// `θ = -1/(4πr) - iλ/(4π) + O(r)`.
fn self_theta(mesh: &SurfaceMesh, t: usize, lambda: C64) -> C64 {
    let ir = inv_r_triangle(mesh.centroids[t], mesh.corners(t));
    C64::new(-ir / (4.0 * PI), 0.0) - I * lambda * (mesh.areas[t] / (4.0 * PI))
}

fn check_proximity(mesh: &SurfaceMesh, points: &[Point]) -> Result<()> {
    let min = 2.0 * mesh.mean_diameter();
    for (index, p) in points.iter().enumerate() {
        let distance = mesh.centroids.iter().map(|c| norm(sub(*p, *c))).fold(f64::INFINITY, f64::min);
        if distance < min {
            return Err(Error::TooCloseToSurface { index, distance, min });
        }
    }
    Ok(())
}

/// Surface potentials and their analytic derivatives at off-surface points.
struct SurfaceSums {
    s0: C64,
    grad_s0: CVec3,
    sv: CVec3,
    curl_sv: CVec3,
}

fn surface_sums(mesh: &SurfaceMesh, lambda: C64, psi0: &[C64], psi: &[CVec3], x: Point) -> SurfaceSums {
    let mut out = SurfaceSums {
        s0: ZERO,
        grad_s0: CVec3::ZERO,
        sv: CVec3::ZERO,
        curl_sv: CVec3::ZERO,
    };
    for t in 0..mesh.len() {
        let d = sub(x, mesh.centroids[t]);
        let (th, gt) = theta_and_grad(d, norm(d), lambda);
        let a = mesh.areas[t];
        let (th, gt) = (th * a, gt.scale_real(a));
        if !psi0.is_empty() {
            out.s0 += th * psi0[t];
            out.grad_s0 += gt.scale(psi0[t]);
        }
        if !psi.is_empty() {
            out.sv += psi[t].scale(th);
            out.curl_sv += gt.cross(&psi[t]);
        }
    }
    out
}

fn check_lengths(mesh: &SurfaceMesh, n: usize) -> Result<()> {
    if n != mesh.len() {
        return Err(Error::Mismatch(format!("{n} boundary values for {} triangles", mesh.len())));
    }
    Ok(())
}

/// Single-layer potential `S[ψ₀]` at points at least two mean triangle
/// diameters from the surface.
pub fn surface_potential_scalar(psi0: &[C64], mesh: &SurfaceMesh, lambda: C64, eval: &PointSet) -> Result<FieldSample> {
    check_lengths(mesh, psi0.len())?;
    check_proximity(mesh, &eval.points)?;
    let v = eval.points.par_iter().map(|x| surface_sums(mesh, lambda, psi0, &[], *x).s0).collect();
    Ok(FieldSample::scalar(eval, v))
}

/// Componentwise single-layer potential `S[ψ⃗]`.
pub fn surface_potential_vector(psi: &[CVec3], mesh: &SurfaceMesh, lambda: C64, eval: &PointSet) -> Result<FieldSample> {
    check_lengths(mesh, psi.len())?;
    check_proximity(mesh, &eval.points)?;
    let v = eval.points.par_iter().map(|x| surface_sums(mesh, lambda, &[], psi, *x).sv).collect();
    Ok(FieldSample::vector(eval, v))
}

/// `u⃗ = -grad S[ψ₀] - (curl - λ) S[ψ⃗]`.
pub fn representation(
    psi0: &[C64],
    psi: &[CVec3],
    mesh: &SurfaceMesh,
    lambda: C64,
    eval: &PointSet,
) -> Result<FieldSample> {
    check_lengths(mesh, psi0.len())?;
    check_lengths(mesh, psi.len())?;
    check_proximity(mesh, &eval.points)?;
    Ok(FieldSample::vector(eval, representation_unchecked(psi0, psi, mesh, lambda, &eval.points)))
}

fn representation_unchecked(psi0: &[C64], psi: &[CVec3], mesh: &SurfaceMesh, lambda: C64, points: &[Point]) -> Vec<CVec3> {
    points
        .par_iter()
        .map(|x| {
            let s = surface_sums(mesh, lambda, psi0, psi, *x);
            -s.grad_s0 - s.curl_sv + s.sv.scale(lambda)
        })
        .collect()
}

/// Collocated boundary integral operator acting on `ψ⃗` stored as
/// `[ψ₁x, ψ₁y, ψ₁z, ψ₂x, ...]`.
pub struct BieOperator<'a> {
    pub mesh: &'a SurfaceMesh,
    pub lambda: C64,
    self_theta: Vec<C64>,
}

impl<'a> BieOperator<'a> {
    pub fn new(mesh: &'a SurfaceMesh, lambda: C64) -> Self {
        let self_theta = (0..mesh.len()).map(|t| self_theta(mesh, t, lambda)).collect();
        BieOperator { mesh, lambda, self_theta }
    }

    pub fn dim(&self) -> usize {
        3 * self.mesh.len()
    }

    fn row(&self, i: usize, psi: &[CVec3]) -> CVec3 {
        let m = self.mesh;
        let ci = m.centroids[i];
        let mut inner = psi[i].scale(self.lambda * self.self_theta[i]);
        for j in 0..m.len() {
            if j == i {
                continue;
            }
            let d = sub(ci, m.centroids[j]);
            let (th, gt) = theta_and_grad(d, norm(d), self.lambda);
            let a = m.areas[j];
            inner += psi[j].scale(self.lambda * th * a) - gt.scale_real(a).cross(&psi[j]);
        }
        psi[i].scale_real(0.5) + CVec3::cross_from_real(m.normals[i], &inner)
    }

    /// Matrix-free application.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let psi = unpack(x);
        let rows: Vec<CVec3> = (0..self.mesh.len()).into_par_iter().map(|i| self.row(i, &psi)).collect();
        pack(&rows)
    }

    /// Dense `3N × 3N` matrix of the same operator.
    pub fn assemble_dense(&self) -> DMatrix<C64> {
        let m = self.mesh;
        let n = m.len();
        let blocks: Vec<Vec<[[C64; 3]; 3]>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let ni = m.normals[i];
                (0..n)
                    .map(|j| {
                        // column c of the 3x3 block is the image of e_c
                        let (th, gt) = if i == j {
                            (self.self_theta[i], CVec3::ZERO)
                        } else {
                            let d = sub(m.centroids[i], m.centroids[j]);
                            let (th, gt) = theta_and_grad(d, norm(d), self.lambda);
                            (th * m.areas[j], gt.scale_real(m.areas[j]))
                        };
                        let mut b = [[ZERO; 3]; 3];
                        for c in 0..3 {
                            let mut e = CVec3::ZERO;
                            e[c] = ONE;
                            let inner = e.scale(self.lambda * th) - gt.cross(&e);
                            let mut col = CVec3::cross_from_real(ni, &inner);
                            if i == j {
                                col[c] += 0.5;
                            }
                            for r in 0..3 {
                                b[r][c] = col[r];
                            }
                        }
                        b
                    })
                    .collect()
            })
            .collect();
        DMatrix::from_fn(3 * n, 3 * n, |r, c| blocks[r / 3][c / 3][r % 3][c % 3])
    }

    /// `n⃗(x_i) × Σ_j ∇θ(x_i - y_j)(ψ₀(y_j) - ψ₀(x_i)) a_j`.
    pub fn rhs(&self, psi0: &[C64]) -> Vec<C64> {
        let m = self.mesh;
        let rows: Vec<CVec3> = (0..m.len())
            .into_par_iter()
            .map(|i| {
                let mut acc = CVec3::ZERO;
                for j in 0..m.len() {
                    if j != i {
                        let d = sub(m.centroids[i], m.centroids[j]);
                        let (_, gt) = theta_and_grad(d, norm(d), self.lambda);
                        acc += gt.scale(m.areas[j] * (psi0[j] - psi0[i]));
                    }
                }
                CVec3::cross_from_real(m.normals[i], &acc)
            })
            .collect();
        pack(&rows)
    }

    /// `‖Aψ⃗ - b(ψ₀)‖ / ‖b(ψ₀)‖`, or the absolute residual when `b` vanishes.
    pub fn residual(&self, psi: &[CVec3], psi0: &[C64]) -> f64 {
        let b = self.rhs(psi0);
        let ax = self.apply(&pack(psi));
        let r = vnorm(&ax.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>());
        let bn = vnorm(&b);
        if bn > 0.0 {
            r / bn
        } else {
            r
        }
    }
}

/// Dense assembly of the boundary operator.
pub fn assemble_bie(mesh: &SurfaceMesh, lambda: C64) -> DMatrix<C64> {
    BieOperator::new(mesh, lambda).assemble_dense()
}

fn pack(v: &[CVec3]) -> Vec<C64> {
    v.iter().flat_map(|x| x.0).collect()
}

fn unpack(x: &[C64]) -> Vec<CVec3> {
    x.chunks(3).map(|c| CVec3::new(c[0], c[1], c[2])).collect()
}

fn vnorm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn cdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GmresInfo {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
    /// Ratio of extreme singular values of the first-cycle Hessenberg matrix,
    /// a lower bound for the condition number.
    pub condition_estimate: f64,
}

/// Restarted GMRES with modified Gram-Schmidt and Givens rotations.
pub fn gmres(
    apply: impl Fn(&[C64]) -> Vec<C64>,
    b: &[C64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> (Vec<C64>, GmresInfo) {
    let n = b.len();
    let mut x = vec![ZERO; n];
    let bn = vnorm(b);
    let mut info = GmresInfo {
        iterations: 0,
        relative_residual: 0.0,
        converged: true,
        condition_estimate: 1.0,
    };
    if bn == 0.0 {
        return (x, info);
    }
    let restart = restart.max(1).min(n.max(1));
    let mut first_cycle = true;
    loop {
        let ax = apply(&x);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = vnorm(&r);
        info.relative_residual = beta / bn;
        if info.relative_residual <= tol {
            info.converged = true;
            break;
        }
        if info.iterations >= max_iter {
            info.converged = false;
            break;
        }
        let mut v: Vec<Vec<C64>> = vec![r.iter().map(|z| z / beta).collect()];
        let mut h = DMatrix::<C64>::zeros(restart + 1, restart);
        let mut raw = DMatrix::<C64>::zeros(restart + 1, restart);
        let (mut cs, mut sn) = (vec![0.0; restart], vec![ZERO; restart]);
        let mut g = vec![ZERO; restart + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..restart {
            let mut w = apply(&v[k]);
            info.iterations += 1;
            for (i, vi) in v.iter().enumerate() {
                let hik = cdot(vi, &w);
                h[(i, k)] = hik;
                for (wj, vj) in w.iter_mut().zip(vi) {
                    *wj -= hik * vj;
                }
            }
            let wn = vnorm(&w);
            h[(k + 1, k)] = C64::new(wn, 0.0);
            for i in 0..=k + 1 {
                raw[(i, k)] = h[(i, k)];
            }
            for i in 0..k {
                let (a, bb) = (h[(i, k)], h[(i + 1, k)]);
                h[(i, k)] = a * cs[i] + sn[i] * bb;
                h[(i + 1, k)] = -sn[i].conj() * a + bb * cs[i];
            }
            let (a, bb) = (h[(k, k)], h[(k + 1, k)]);
            let rr = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            if a.norm() == 0.0 {
                cs[k] = 0.0;
                sn[k] = ONE;
            } else {
                cs[k] = a.norm() / rr;
                sn[k] = (a / a.norm()) * bb.conj() / rr;
            }
            h[(k, k)] = a * cs[k] + sn[k] * bb;
            h[(k + 1, k)] = ZERO;
            g[k + 1] = -sn[k].conj() * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            let res = g[k + 1].norm() / bn;
            if res <= tol || wn <= 1e-14 * bn || info.iterations >= max_iter {
                break;
            }
            v.push(w.iter().map(|z| z / wn).collect());
        }
        // back substitution
        let mut y = vec![ZERO; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[(i, j)] * y[j];
            }
            y[i] = s / h[(i, i)];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&v[j]) {
                *xi += yj * vi;
            }
        }
        if first_cycle {
            let sv = raw.view((0, 0), (k_used + 1, k_used)).into_owned().singular_values();
            let (mx, mn) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), s| (a.max(*s), b.min(*s)));
            info.condition_estimate = if mn > 0.0 { mx / mn } else { f64::INFINITY };
            first_cycle = false;
        }
    }
    (x, info)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BieSolver {
    /// Dense LU up to `DENSE_LIMIT` unknowns, GMRES beyond.
    #[default]
    Auto,
    DenseLu,
    Gmres,
}

/// Largest system solved by dense factorization under [`BieSolver::Auto`].
pub const DENSE_LIMIT: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveInfo {
    pub method: &'static str,
    pub iterations: usize,
    pub relative_residual: f64,
    pub condition_estimate: f64,
}

/// Solves the BIE for `ψ⃗` given `ψ₀` and projects the result onto the
/// tangent planes.
pub fn solve_bie(op: &BieOperator, psi0: &[C64], solver: BieSolver) -> Result<(Vec<CVec3>, SolveInfo)> {
    check_lengths(op.mesh, psi0.len())?;
    let b = op.rhs(psi0);
    let dense = match solver {
        BieSolver::Auto => op.dim() <= DENSE_LIMIT,
        BieSolver::DenseLu => true,
        BieSolver::Gmres => false,
    };
    let (x, mut info) = if dense {
        let a = op.assemble_dense();
        let sv = a.clone().singular_values();
        let (mx, mn) = sv.iter().fold((0.0f64, f64::INFINITY), |(p, q), s| (p.max(*s), q.min(*s)));
        let cond = if mn > 0.0 { mx / mn } else { f64::INFINITY };
        if !cond.is_finite() || cond > 1e14 {
            return Err(Error::Solver(format!("boundary system is singular (condition {cond:.3e})")));
        }
        let x = a
            .lu()
            .solve(&DVector::from_vec(b.clone()))
            .ok_or_else(|| Error::Solver("LU factorization failed".into()))?;
        (
            x.as_slice().to_vec(),
            SolveInfo {
                method: "dense-lu",
                iterations: 0,
                relative_residual: 0.0,
                condition_estimate: cond,
            },
        )
    } else {
        let (x, g) = gmres(|v| op.apply(v), &b, 1e-10, 100, 2000);
        if !g.converged {
            return Err(Error::Solver(format!(
                "GMRES stalled at relative residual {:.3e} after {} iterations (condition estimate {:.3e})",
                g.relative_residual, g.iterations, g.condition_estimate
            )));
        }
        (
            x,
            SolveInfo {
                method: "gmres",
                iterations: g.iterations,
                relative_residual: g.relative_residual,
                condition_estimate: g.condition_estimate,
            },
        )
    };
    let mut psi = unpack(&x);
    for (p, n) in psi.iter_mut().zip(&op.mesh.normals) {
        let pn = p.dot_real(*n);
        *p -= CVec3::from_real(*n).scale(pn);
    }
    info.relative_residual = op.residual(&psi, psi0);
    Ok((psi, info))
}

/// `|∫(g⃗·n⃗ - λφ₀) ds| / (∫|g⃗·n⃗| ds + |λ| ∫|φ₀| ds)` by centroid quadrature.
pub fn compatibility_defect(g: &dyn Field, phi0: &[C64], lambda: C64, mesh: &SurfaceMesh) -> Result<f64> {
    check_lengths(mesh, phi0.len())?;
    let (mut s, mut scale) = (ZERO, 0.0);
    for t in 0..mesh.len() {
        let gn = g.eval(mesh.centroids[t]).vec().dot_real(mesh.normals[t]);
        let a = mesh.areas[t];
        s += (gn - lambda * phi0[t]) * a;
        scale += (gn.norm() + lambda.norm() * phi0[t].norm()) * a;
    }
    Ok(if scale > 0.0 { s.norm() / scale } else { 0.0 })
}

/// `|∫ λψ₀ ds| / (|λ| ∫|ψ₀| ds)`; vanishes for admissible data.
pub fn flux_identity_defect(psi0: &[C64], lambda: C64, mesh: &SurfaceMesh) -> f64 {
    let s: C64 = psi0.iter().zip(&mesh.areas).map(|(p, a)| p * *a).sum();
    let scale: f64 = psi0.iter().zip(&mesh.areas).map(|(p, a)| p.norm() * a).sum();
    if scale > 0.0 {
        (lambda * s).norm() / (lambda.norm() * scale)
    } else {
        0.0
    }
}

/// `φ₀_t = u⃗(c_t)·n⃗_t` at the centroids.
pub fn normal_trace(u: &dyn Field, mesh: &SurfaceMesh) -> Vec<C64> {
    mesh.centroids
        .iter()
        .zip(&mesh.normals)
        .map(|(c, n)| u.eval(*c).vec().dot_real(*n))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeumannReport {
    pub triangles: usize,
    pub unknowns: usize,
    pub solver: SolveInfo,
    /// Residual of the discrete BIE at the computed density.
    pub bie_residual: f64,
    pub compatibility_defect: f64,
    pub flux_identity_defect: f64,
    /// `‖w⃗·n⃗ - φ₀‖ / ‖φ₀‖` with `u⃗` extrapolated to the centroids from
    /// two interior depths.
    pub boundary_residual: f64,
    /// Force-free residual of the reconstructed `u⃗` on the evaluation grid.
    pub forcefree_residual: f64,
}

#[derive(Debug, Clone)]
pub struct NeumannSolution {
    pub w: FieldSample,
    pub u: FieldSample,
    pub r: FieldSample,
    pub psi0: Vec<C64>,
    pub psi: Vec<CVec3>,
    pub report: NeumannReport,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeumannOptions {
    pub compatibility_tol: f64,
    pub solver: BieSolver,
}

impl Default for NeumannOptions {
    fn default() -> Self {
        NeumannOptions {
            compatibility_tol: crate::Tolerances::default().compatibility,
            solver: BieSolver::Auto,
        }
    }
}

/// Solves `curl w⃗ + λw⃗ = g⃗` in the ball bounded by `mesh` with
/// `w⃗·n⃗ = φ₀` at the triangle centroids.
pub fn solve_neumann(
    domain: &VoxelDomain,
    g: &dyn Field,
    phi0: &[C64],
    lambda: C64,
    mesh: &SurfaceMesh,
    eval: &PointSet,
    opts: NeumannOptions,
) -> Result<NeumannSolution> {
    let NeumannOptions {
        compatibility_tol,
        solver,
    } = opts;
    if lambda == ZERO {
        return Err(Error::ZeroDivisor("the Neumann solution divides by lambda"));
    }
    check_lengths(mesh, phi0.len())?;
    let defect = compatibility_defect(g, phi0, lambda, mesh)?;
    if defect > compatibility_tol {
        return Err(Error::Compatibility {
            defect,
            tol: compatibility_tol,
        });
    }
    let rb = r_lambda_boundary(domain, g, lambda, &mesh.centroids, &mesh.normals)?;
    let psi0: Vec<C64> = phi0
        .iter()
        .zip(&rb)
        .zip(&mesh.normals)
        .map(|((p, r), n)| p - r.dot_real(*n))
        .collect();
    let op = BieOperator::new(mesh, lambda);
    let (psi, info) = solve_bie(&op, &psi0, solver)?;

    let r = r_lambda(domain, g, lambda, eval)?;
    let set = r.point_set();
    let u = representation(&psi0, &psi, mesh, lambda, &set)?;
    let w = r.add(&u)?;

    let depth = 2.5 * mesh.mean_diameter();
    let probes: Vec<Point> = mesh
        .centroids
        .iter()
        .zip(&mesh.normals)
        .flat_map(|(c, n)| [1.0, 2.0].map(|k| [c[0] - k * depth * n[0], c[1] - k * depth * n[1], c[2] - k * depth * n[2]]))
        .collect();
    let up = representation_unchecked(&psi0, &psi, mesh, lambda, &probes);
    let mut num = 0.0;
    let mut den = 0.0;
    for t in 0..mesh.len() {
        let ub = up[2 * t].scale_real(2.0) - up[2 * t + 1];
        let wn = rb[t].dot_real(mesh.normals[t]) + ub.dot_real(mesh.normals[t]);
        num += (wn - phi0[t]).norm_sqr() * mesh.areas[t];
        den += phi0[t].norm_sqr() * mesh.areas[t];
    }
    let boundary_residual = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    let ff = verify_forcefree(&u, lambda, f64::INFINITY)?;

    let report = NeumannReport {
        triangles: mesh.len(),
        unknowns: op.dim(),
        bie_residual: info.relative_residual,
        solver: info,
        compatibility_defect: defect,
        flux_identity_defect: flux_identity_defect(&psi0, lambda, mesh),
        boundary_residual,
        forcefree_residual: ff.curl_residual,
    };
    Ok(NeumannSolution {
        w,
        u,
        r,
        psi0,
        psi,
        report,
    })
}

/// `ψ₀ = u⃗·n⃗` and `ψ⃗ = u⃗ × n⃗` at the centroids.
pub fn trace_densities(u: &dyn Field, mesh: &SurfaceMesh) -> (Vec<C64>, Vec<CVec3>) {
    let psi0 = normal_trace(u, mesh);
    let psi = mesh
        .centroids
        .iter()
        .zip(&mesh.normals)
        .map(|(c, n)| {
            let v = u.eval(*c).vec();
            v.cross(&CVec3::from_real(*n))
        })
        .collect();
    (psi0, psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, interior_eval_grid, sample, FnField, Shape};
    use crate::forcefree::beltrami_plane_wave;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(a: f64, b: f64) -> C64 {
        C64::new(a, b)
    }

    #[test]
    fn sphere_mesh_geometry() {
        let m1 = make_sphere_mesh(1.0, 1).unwrap();
        assert_eq!(m1.len(), 80);
        let m3 = make_sphere_mesh(1.0, 3).unwrap();
        assert_eq!(m3.len(), 1280);
        assert!((m3.total_area() / (4.0 * PI) - 1.0).abs() < 0.01);
        for (n, cen) in m3.normals.iter().zip(&m3.centroids) {
            assert!((norm(*n) - 1.0).abs() < 1e-12);
            assert!(dot(*n, *cen) > 0.0);
        }
        let m = make_sphere_mesh_at([1.0, 0.0, -2.0], 0.5, 2).unwrap();
        assert_eq!(m.len(), 320);
        assert!((m.total_area() / (PI) - 1.0).abs() < 0.02);
        assert!(m.normals.iter().zip(&m.centroids).all(|(n, c)| dot(*n, sub(*c, m.center)) > 0.0));
        assert!(make_sphere_mesh(1.0, 0).is_err());

        let mut off = Vec::new();
        m1.write_off(&mut off).unwrap();
        let text = String::from_utf8(off).unwrap();
        assert!(text.starts_with("OFF\n42 80 0\n"));
    }

    #[test]
    fn degenerate_triangle_is_rejected() {
        let v = vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        assert!(matches!(
            SurfaceMesh::from_parts(v, vec![[0, 1, 2]], [0.0; 3], 1.0, 0),
            Err(Error::DegenerateTriangle(0))
        ));
    }

    #[test]
    fn flat_triangle_inverse_distance_integral() {
        // polar oracle: ∫_T dA/r = ∮ ρ(θ) dθ with ρ the distance from p to
        // the boundary along direction θ
        let tri = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.2, 0.9, 0.0]];
        let p = [(0.0 + 1.0 + 0.2) / 3.0, 0.3, 0.0];
        let exact = inv_r_triangle(p, tri);
        let m = 200_000;
        let mut s = 0.0;
        for k in 0..m {
            let th = (k as f64 + 0.5) / m as f64 * 2.0 * PI;
            let d = [th.cos(), th.sin()];
            let mut rho = f64::INFINITY;
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                let ex = [b[0] - a[0], b[1] - a[1]];
                let den = d[0] * ex[1] - d[1] * ex[0];
                if den.abs() < 1e-15 {
                    continue;
                }
                let ap = [a[0] - p[0], a[1] - p[1]];
                let t = (ap[0] * ex[1] - ap[1] * ex[0]) / den;
                let u = (ap[0] * d[1] - ap[1] * d[0]) / den;
                if t > 0.0 && (0.0..=1.0).contains(&u) {
                    rho = rho.min(t);
                }
            }
            s += rho;
        }
        s *= 2.0 * PI / m as f64;
        assert!((exact - s).abs() < 1e-8 * s, "{exact} {s}");
    }

    #[test]
    fn single_layer_examples() {
        let mesh = make_sphere_mesh(1.0, 3).unwrap();
        let center = PointSet::scattered(vec![[0.0; 3]]);
        let ones = vec![ONE; mesh.len()];
        let v = surface_potential_scalar(&ones, &mesh, ZERO, &center).unwrap();
        assert!((v.values[0].w0 - c(-1.0, 0.0)).norm() < 0.01, "{:?}", v.values[0]);
        let zeros = vec![CVec3::ZERO; mesh.len()];
        let z = surface_potential_vector(&zeros, &mesh, c(2.0, 0.0), &center).unwrap();
        assert_eq!(z.norm_max(), 0.0);
        let near = PointSet::scattered(vec![[0.0, 0.0, 0.99]]);
        assert!(matches!(
            surface_potential_scalar(&ones, &mesh, ZERO, &near),
            Err(Error::TooCloseToSurface { .. })
        ));
    }

    #[test]
    fn single_layer_is_metaharmonic_off_surface() {
        let mesh = make_sphere_mesh(1.0, 2).unwrap();
        let lam = c(1.5, 0.2);
        let dens: Vec<C64> = mesh.centroids.iter().map(|x| c(x[0] + 0.3 * x[2], x[1])).collect();
        let h = 0.01;
        let x0 = [0.1, -0.2, 0.15];
        let mut pts = vec![x0];
        for a in 0..3 {
            for s in [1.0, -1.0] {
                let mut p = x0;
                p[a] += s * h;
                pts.push(p);
            }
        }
        let v = surface_potential_scalar(&dens, &mesh, lam, &PointSet::scattered(pts)).unwrap().scalars();
        let lap = (v[1..].iter().sum::<C64>() - 6.0 * v[0]) / (h * h);
        let res = (lap + lam * lam * v[0]).norm() / (lam.norm_sqr() * v[0].norm());
        assert!(res < 1e-3, "{res}");
    }

    #[test]
    fn dense_and_matrix_free_agree() {
        let mesh = make_sphere_mesh(1.0, 2).unwrap();
        let op = BieOperator::new(&mesh, c(1.0, 0.3));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi: Vec<CVec3> = mesh
            .normals
            .iter()
            .map(|n| {
                let v = CVec3::new(
                    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                );
                v - CVec3::from_real(*n).scale(v.dot_real(*n))
            })
            .collect();
        let x = pack(&psi);
        let mf = op.apply(&x);
        let a = op.assemble_dense();
        let dv = &a * DVector::from_vec(x);
        let diff: f64 = mf.iter().zip(dv.iter()).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        assert!(diff <= 1e-12 * vnorm(&mf), "{diff}");
    }

    #[test]
    fn manufactured_densities_satisfy_the_bie() {
        let mesh = make_sphere_mesh(1.0, 3).unwrap();
        let lam = c(1.0, 0.3);
        let u = beltrami_plane_wave(lam, [0.0, 0.0, 1.0]).unwrap();
        let (psi0, psi) = trace_densities(&u, &mesh);
        let op = BieOperator::new(&mesh, lam);
        let r = op.residual(&psi, &psi0);
        assert!(r < 0.06, "{r}");
        assert!(flux_identity_defect(&psi0, lam, &mesh) < 1e-2);
        let zero = op.residual(&vec![CVec3::ZERO; mesh.len()], &vec![ZERO; mesh.len()]);
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn gmres_matches_dense_solve() {
        let mesh = make_sphere_mesh(1.0, 1).unwrap();
        let lam = c(1.0, 0.3);
        let u = beltrami_plane_wave(lam, [0.6, 0.0, 0.8]).unwrap();
        let (psi0, _) = trace_densities(&u, &mesh);
        let op = BieOperator::new(&mesh, lam);
        let (a, ia) = solve_bie(&op, &psi0, BieSolver::DenseLu).unwrap();
        let (b, ib) = solve_bie(&op, &psi0, BieSolver::Gmres).unwrap();
        let d: f64 = a.iter().zip(&b).map(|(p, q)| (*p - *q).norm_sqr()).sum::<f64>().sqrt();
        let s: f64 = a.iter().map(|p| p.norm_sqr()).sum::<f64>().sqrt();
        assert!(d < 1e-8 * s, "{d}");
        assert!(ia.condition_estimate >= 1.0 && ib.condition_estimate >= 1.0);
        assert!(ib.iterations > 0 && ib.relative_residual < 1e-9);
    }

    #[test]
    fn force_free_recovery_and_compatibility() {
        let mesh = make_sphere_mesh(1.0, 3).unwrap();
        let d = build_domain(Shape::unit_ball(), 12).unwrap();
        let eval = interior_eval_grid(&d, 12, 2).unwrap();
        let lam = c(1.0, 0.3);
        let u = beltrami_plane_wave(lam, [0.0, 0.0, 1.0]).unwrap();
        let g = FnField::vector(|_| CVec3::ZERO);
        let phi0 = normal_trace(&u, &mesh);
        let sol = solve_neumann(&d, &g, &phi0, lam, &mesh, &eval, NeumannOptions::default()).unwrap();
        let exact = sample(&u, &sol.w.point_set());
        let err = sol.w.sub(&exact).unwrap().norm_l2() / exact.norm_l2();
        assert!(err < 0.1, "{err} {:?}", sol.report);
        assert_eq!(sol.report.solver.method, "gmres");

        let shifted: Vec<C64> = phi0.iter().map(|p| p + 0.5).collect();
        assert!(matches!(
            solve_neumann(&d, &g, &shifted, lam, &mesh, &eval, NeumannOptions::default()),
            Err(Error::Compatibility { .. })
        ));
    }
}
