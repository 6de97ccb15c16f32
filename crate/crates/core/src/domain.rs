//! Voxelized model domains, point sets and sampled fields.
//!
//! A [`VoxelDomain`] is the midpoint-rule quadrature of a model shape: the
//! bounding cube is split into `n³` cells and a cell contributes (with weight
//! `h³`) iff its center is inside the shape. Field values live in
//! [`FieldSample`]s, optionally tagged with the uniform lattice they were
//! taken on so that `fielddiff` can find stencil neighbours.

use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quaternion::{Biquaternion, CVec3, C64, ZERO};

pub type Point = [f64; 3];

/// Model shapes standing in for a smooth bounded domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Shape {
    Ball { center: Point, radius: f64 },
    Box { lo: Point, hi: Point },
    Ellipsoid { center: Point, semiaxes: Point },
}

impl Shape {
    pub fn unit_ball() -> Self {
        Shape::Ball {
            center: [0.0; 3],
            radius: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Shape::Ball { radius, .. } => *radius > 0.0 && radius.is_finite(),
            Shape::Box { lo, hi } => (0..3).all(|k| hi[k] > lo[k]),
            Shape::Ellipsoid { semiaxes, .. } => semiaxes.iter().all(|a| *a > 0.0 && a.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("shape parameters must be positive: {self:?}")))
        }
    }

    pub fn contains(&self, x: Point) -> bool {
        match self {
            Shape::Ball { center, radius } => dist2(x, *center) < radius * radius,
            Shape::Box { lo, hi } => (0..3).all(|k| x[k] > lo[k] && x[k] < hi[k]),
            Shape::Ellipsoid { center, semiaxes } => ellipsoid_rho2(x, *center, *semiaxes) < 1.0,
        }
    }

    /// A lower bound for the distance from an interior point to the boundary.
    pub fn boundary_distance(&self, x: Point) -> f64 {
        match self {
            Shape::Ball { center, radius } => radius - dist2(x, *center).sqrt(),
            Shape::Box { lo, hi } => (0..3)
                .map(|k| (x[k] - lo[k]).min(hi[k] - x[k]))
                .fold(f64::INFINITY, f64::min),
            Shape::Ellipsoid { center, semiaxes } => {
                let rho = ellipsoid_rho2(x, *center, *semiaxes).sqrt();
                let amin = semiaxes.iter().cloned().fold(f64::INFINITY, f64::min);
                (1.0 - rho) * amin
            }
        }
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        match self {
            Shape::Ball { center, radius } => (
                [center[0] - radius, center[1] - radius, center[2] - radius],
                [center[0] + radius, center[1] + radius, center[2] + radius],
            ),
            Shape::Box { lo, hi } => (*lo, *hi),
            Shape::Ellipsoid { center, semiaxes } => (
                [center[0] - semiaxes[0], center[1] - semiaxes[1], center[2] - semiaxes[2]],
                [center[0] + semiaxes[0], center[1] + semiaxes[1], center[2] + semiaxes[2]],
            ),
        }
    }

    /// Lower corner and edge length of the bounding cube.
    pub fn bounding_cube(&self) -> (Point, f64) {
        let (lo, hi) = self.bounding_box();
        let edge = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
        (lo, edge)
    }

    pub fn volume(&self) -> f64 {
        use std::f64::consts::PI;
        match self {
            Shape::Ball { radius, .. } => 4.0 / 3.0 * PI * radius.powi(3),
            Shape::Box { lo, hi } => (0..3).map(|k| hi[k] - lo[k]).product(),
            Shape::Ellipsoid { semiaxes, .. } => 4.0 / 3.0 * PI * semiaxes.iter().product::<f64>(),
        }
    }
}

fn dist2(a: Point, b: Point) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

fn ellipsoid_rho2(x: Point, c: Point, a: Point) -> f64 {
    (0..3).map(|k| ((x[k] - c[k]) / a[k]).powi(2)).sum()
}

/// Uniform lattice `origin + k·h`, `k ∈ ℤ³`. `n` is the nominal number of
/// nodes per axis of the grid the points were drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub n: usize,
    pub h: f64,
    pub origin: Point,
}

impl GridMeta {
    pub fn index_of(&self, x: Point) -> [i64; 3] {
        let mut k = [0i64; 3];
        for a in 0..3 {
            k[a] = ((x[a] - self.origin[a]) / self.h).round() as i64;
        }
        k
    }

    pub fn node(&self, k: [i64; 3]) -> Point {
        [
            self.origin[0] + k[0] as f64 * self.h,
            self.origin[1] + k[1] as f64 * self.h,
            self.origin[2] + k[2] as f64 * self.h,
        ]
    }
}

/// Evaluation points, optionally forming a subset of a uniform lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub points: Vec<Point>,
    pub grid: Option<GridMeta>,
}

impl PointSet {
    pub fn scattered(points: Vec<Point>) -> Self {
        PointSet { points, grid: None }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Voxel quadrature model of a bounded domain.
#[derive(Debug, Clone)]
pub struct VoxelDomain {
    pub shape: Shape,
    pub n: usize,
    pub h: f64,
    /// Lower corner of the bounding cube.
    pub origin: Point,
    pub centers: Vec<Point>,
    /// Lattice index `(i, j, k)` of each stored cell.
    pub cells: Vec<[usize; 3]>,
    pub weights: Vec<f64>,
}

/// Midpoint-rule voxelization of `shape` with `n` cells per axis of its
/// bounding cube.
pub fn build_domain(shape: Shape, n: usize) -> Result<VoxelDomain> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("n = {n}: need at least 4 cells per axis")));
    }
    shape.validate()?;
    let (origin, edge) = shape.bounding_cube();
    let h = edge / n as f64;
    let w = h * h * h;
    let mut centers = Vec::new();
    let mut cells = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let c = [
                    origin[0] + (i as f64 + 0.5) * h,
                    origin[1] + (j as f64 + 0.5) * h,
                    origin[2] + (k as f64 + 0.5) * h,
                ];
                if shape.contains(c) {
                    centers.push(c);
                    cells.push([i, j, k]);
                }
            }
        }
    }
    let weights = vec![w; centers.len()];
    Ok(VoxelDomain {
        shape,
        n,
        h,
        origin,
        centers,
        cells,
        weights,
    })
}

impl VoxelDomain {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Inside flags for all `n³` cells of the bounding cube, `(i, j, k)` row-major.
    pub fn inside_mask(&self) -> Vec<bool> {
        let n = self.n;
        let mut mask = vec![false; n * n * n];
        for c in &self.cells {
            mask[(c[0] * n + c[1]) * n + c[2]] = true;
        }
        mask
    }

    /// The cell centers as a lattice point set.
    pub fn point_set(&self) -> PointSet {
        PointSet {
            points: self.centers.clone(),
            grid: Some(self.lattice()),
        }
    }

    /// The lattice of cell centers.
    pub fn lattice(&self) -> GridMeta {
        GridMeta {
            n: self.n,
            h: self.h,
            origin: [
                self.origin[0] + 0.5 * self.h,
                self.origin[1] + 0.5 * self.h,
                self.origin[2] + 0.5 * self.h,
            ],
        }
    }
}

/// Cell-centered grid of `n_eval³` nodes over the bounding cube, keeping the
/// nodes farther than `(margin + 1)·h_eval` from the boundary, so that every
/// node's central stencil stays at least `margin·h_eval` inside.
///
/// The nodes coincide with a fixed sub-pattern of the source lattice when
/// the domain resolution `n` is a multiple of `n_eval`.
pub fn interior_eval_grid(domain: &VoxelDomain, n_eval: usize, margin: usize) -> Result<PointSet> {
    if margin < 1 {
        return Err(Error::InvalidParameter("eval grid margin must be at least 1".into()));
    }
    if n_eval == 0 {
        return Err(Error::InvalidParameter("n_eval must be positive".into()));
    }
    let (lo, edge) = domain.shape.bounding_cube();
    let h = edge / n_eval as f64;
    let meta = GridMeta {
        n: n_eval,
        h,
        origin: [lo[0] + 0.5 * h, lo[1] + 0.5 * h, lo[2] + 0.5 * h],
    };
    let need = (margin + 1) as f64 * h;
    let mut points = Vec::new();
    for i in 0..n_eval as i64 {
        for j in 0..n_eval as i64 {
            for k in 0..n_eval as i64 {
                let p = meta.node([i, j, k]);
                if domain.shape.boundary_distance(p) > need {
                    points.push(p);
                }
            }
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyGrid(format!(
            "no node of an n_eval = {n_eval} grid lies {margin}+1 cells inside the domain"
        )));
    }
    Ok(PointSet {
        points,
        grid: Some(meta),
    })
}

/// Which parts of a biquaternion field may be nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Scalar,
    Vector,
    Full,
}

impl FieldKind {
    pub fn project(self, w: Biquaternion) -> Biquaternion {
        match self {
            FieldKind::Scalar => Biquaternion::scalar(w.w0),
            FieldKind::Vector => Biquaternion::vector(w.vec()),
            FieldKind::Full => w,
        }
    }

    /// Smallest kind describing the value set.
    pub fn infer(values: &[Biquaternion]) -> FieldKind {
        let vec_zero = values.iter().all(|w| w.is_scalar());
        let sc_zero = values.iter().all(|w| w.is_vector());
        match (vec_zero, sc_zero) {
            (true, _) => FieldKind::Scalar,
            (false, true) => FieldKind::Vector,
            _ => FieldKind::Full,
        }
    }
}

/// A biquaternion-valued field sampled on a point set.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub points: Vec<Point>,
    pub values: Vec<Biquaternion>,
    pub kind: FieldKind,
    pub grid: Option<GridMeta>,
}

impl FieldSample {
    /// Builds a sample, projecting values onto `kind`.
    pub fn new(points: Vec<Point>, values: Vec<Biquaternion>, kind: FieldKind, grid: Option<GridMeta>) -> Self {
        assert_eq!(points.len(), values.len(), "points and values must have equal length");
        let values = values.into_iter().map(|w| kind.project(w)).collect();
        FieldSample {
            points,
            values,
            kind,
            grid,
        }
    }

    pub fn on(set: &PointSet, values: Vec<Biquaternion>, kind: FieldKind) -> Self {
        Self::new(set.points.clone(), values, kind, set.grid)
    }

    pub fn scalar(set: &PointSet, values: Vec<C64>) -> Self {
        Self::on(set, values.into_iter().map(Biquaternion::scalar).collect(), FieldKind::Scalar)
    }

    pub fn vector(set: &PointSet, values: Vec<CVec3>) -> Self {
        Self::on(set, values.into_iter().map(Biquaternion::vector).collect(), FieldKind::Vector)
    }

    pub fn zeros(set: &PointSet, kind: FieldKind) -> Self {
        Self::on(set, vec![Biquaternion::ZERO; set.len()], kind)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point_set(&self) -> PointSet {
        PointSet {
            points: self.points.clone(),
            grid: self.grid,
        }
    }

    pub fn scalars(&self) -> Vec<C64> {
        self.values.iter().map(|w| w.w0).collect()
    }

    pub fn vectors(&self) -> Vec<CVec3> {
        self.values.iter().map(|w| w.vec()).collect()
    }

    /// Scalar part as a scalar field.
    pub fn sc_part(&self) -> FieldSample {
        self.map_kind(FieldKind::Scalar, |w| w)
    }

    /// Vector part as a vector field.
    pub fn vec_part(&self) -> FieldSample {
        self.map_kind(FieldKind::Vector, |w| w)
    }

    pub fn map_kind(&self, kind: FieldKind, f: impl Fn(Biquaternion) -> Biquaternion) -> FieldSample {
        FieldSample::new(self.points.clone(), self.values.iter().map(|w| f(*w)).collect(), kind, self.grid)
    }

    pub fn scale(&self, s: C64) -> FieldSample {
        self.map_kind(self.kind, |w| w.scale(s))
    }

    /// `a·self + b·other` on identical point lists.
    pub fn lin_comb(&self, a: C64, other: &FieldSample, b: C64) -> Result<FieldSample> {
        if self.points != other.points {
            return Err(Error::Mismatch("linear combination of samples on different points".into()));
        }
        let kind = join_kind(self.kind, other.kind);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x.scale(a) + y.scale(b))
            .collect();
        Ok(FieldSample::new(self.points.clone(), values, kind, self.grid))
    }

    pub fn add(&self, other: &FieldSample) -> Result<FieldSample> {
        self.lin_comb(C64::new(1.0, 0.0), other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &FieldSample) -> Result<FieldSample> {
        self.lin_comb(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
    }

    /// Discrete L² norm `sqrt(Σ‖w(x_i)‖²)` (uniform grids make this
    /// proportional to the continuous one, which is all ratios need).
    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_max(&self) -> f64 {
        self.values.iter().map(|w| w.norm()).fold(0.0, f64::max)
    }
}

pub fn join_kind(a: FieldKind, b: FieldKind) -> FieldKind {
    if a == b {
        a
    } else {
        FieldKind::Full
    }
}

/// An analytically specified field.
pub trait Field: Sync {
    fn kind(&self) -> FieldKind;

    fn eval(&self, x: Point) -> Biquaternion;

    /// Closed-form partial derivatives `[∂₁w, ∂₂w, ∂₃w]`, if available.
    fn partials(&self, _x: Point) -> Option<[Biquaternion; 3]> {
        None
    }
}

impl<T: Field + ?Sized> Field for &T {
    fn kind(&self) -> FieldKind {
        (**self).kind()
    }
    fn eval(&self, x: Point) -> Biquaternion {
        (**self).eval(x)
    }
    fn partials(&self, x: Point) -> Option<[Biquaternion; 3]> {
        (**self).partials(x)
    }
}

impl<T: Field + ?Sized + Send> Field for Box<T> {
    fn kind(&self) -> FieldKind {
        (**self).kind()
    }
    fn eval(&self, x: Point) -> Biquaternion {
        (**self).eval(x)
    }
    fn partials(&self, x: Point) -> Option<[Biquaternion; 3]> {
        (**self).partials(x)
    }
}

type ValueFn = Box<dyn Fn(Point) -> Biquaternion + Send + Sync>;
type PartialsFn = Box<dyn Fn(Point) -> [Biquaternion; 3] + Send + Sync>;

/// A field given by closures.
pub struct FnField {
    kind: FieldKind,
    value: ValueFn,
    partials: Option<PartialsFn>,
}

impl FnField {
    pub fn new(kind: FieldKind, f: impl Fn(Point) -> Biquaternion + Send + Sync + 'static) -> Self {
        FnField {
            kind,
            value: Box::new(f),
            partials: None,
        }
    }

    pub fn scalar(f: impl Fn(Point) -> C64 + Send + Sync + 'static) -> Self {
        Self::new(FieldKind::Scalar, move |x| Biquaternion::scalar(f(x)))
    }

    pub fn vector(f: impl Fn(Point) -> CVec3 + Send + Sync + 'static) -> Self {
        Self::new(FieldKind::Vector, move |x| Biquaternion::vector(f(x)))
    }

    pub fn with_partials(mut self, d: impl Fn(Point) -> [Biquaternion; 3] + Send + Sync + 'static) -> Self {
        self.partials = Some(Box::new(d));
        self
    }
}

impl Field for FnField {
    fn kind(&self) -> FieldKind {
        self.kind
    }
    fn eval(&self, x: Point) -> Biquaternion {
        self.kind.project((self.value)(x))
    }
    fn partials(&self, x: Point) -> Option<[Biquaternion; 3]> {
        self.partials.as_ref().map(|d| {
            let p = d(x);
            [self.kind.project(p[0]), self.kind.project(p[1]), self.kind.project(p[2])]
        })
    }
}

/// Pointwise evaluation of an analytic field.
pub fn sample(f: &dyn Field, points: &PointSet) -> FieldSample {
    let values = points.points.iter().map(|&x| f.eval(x)).collect();
    FieldSample::on(points, values, f.kind())
}

/// Samples `f` at the cell centers of `domain`.
pub fn sample_on_domain(f: &dyn Field, domain: &VoxelDomain) -> FieldSample {
    sample(f, &domain.point_set())
}

pub const CSV_HEADER: [&str; 11] = [
    "x", "y", "z", "re_w0", "im_w0", "re_w1", "im_w1", "re_w2", "im_w2", "re_w3", "im_w3",
];

/// Writes one row per point; numbers use the shortest round-trip decimal form.
pub fn write_csv<W: Write>(sample: &FieldSample, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for (p, v) in sample.points.iter().zip(&sample.values) {
        let mut row: Vec<String> = p.iter().map(|c| c.to_string()).collect();
        for c in v.components() {
            row.push(c.re.to_string());
            row.push(c.im.to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a field CSV. The kind is inferred from which parts are nonzero; a
/// lattice is attached when the points sit on a uniform grid.
pub fn read_csv<R: Read>(reader: R) -> Result<FieldSample> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let nums: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
        if nums.len() != 11 {
            return Err(Error::Parse(format!("row {}: expected 11 columns", line + 1)));
        }
        points.push([nums[0], nums[1], nums[2]]);
        values.push(Biquaternion::new(
            C64::new(nums[3], nums[4]),
            C64::new(nums[5], nums[6]),
            C64::new(nums[7], nums[8]),
            C64::new(nums[9], nums[10]),
        ));
    }
    let kind = FieldKind::infer(&values);
    let grid = infer_lattice(&points);
    Ok(FieldSample::new(points, values, kind, grid))
}

/// Detects a common uniform lattice through all points, if there is one.
pub fn infer_lattice(points: &[Point]) -> Option<GridMeta> {
    if points.len() < 2 {
        return None;
    }
    let mut origin = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for a in 0..3 {
            origin[a] = origin[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let extent = (0..3).map(|a| hi[a] - origin[a]).fold(0.0, f64::max);
    let tol = 1e-9 * extent.max(1.0);
    let mut h = f64::INFINITY;
    for a in 0..3 {
        let mut c: Vec<f64> = points.iter().map(|p| p[a]).collect();
        c.sort_by(f64::total_cmp);
        for w in c.windows(2) {
            let d = w[1] - w[0];
            if d > tol {
                h = h.min(d);
            }
        }
    }
    if !h.is_finite() {
        return None;
    }
    let on_lattice = points.iter().all(|p| {
        (0..3).all(|a| {
            let t = (p[a] - origin[a]) / h;
            (t - t.round()).abs() * h <= 1e-6 * h
        })
    });
    if !on_lattice {
        return None;
    }
    let n = (extent / h).round() as usize + 1;
    Some(GridMeta { n, h, origin })
}

/// Trilinear interpolant of a lattice sample, used to turn CSV data into a
/// [`Field`]. Corners missing from the sample are dropped and the remaining
/// weights renormalized; with no corner present the value is zero.
pub struct LatticeField {
    kind: FieldKind,
    meta: GridMeta,
    nodes: HashMap<[i64; 3], Biquaternion>,
}

impl LatticeField {
    pub fn from_sample(sample: &FieldSample) -> Result<Self> {
        let meta = sample
            .grid
            .or_else(|| infer_lattice(&sample.points))
            .ok_or_else(|| Error::Parse("field sample does not lie on a uniform lattice".into()))?;
        let nodes = sample
            .points
            .iter()
            .zip(&sample.values)
            .map(|(p, v)| (meta.index_of(*p), *v))
            .collect();
        Ok(LatticeField {
            kind: sample.kind,
            meta,
            nodes,
        })
    }
}

impl Field for LatticeField {
    fn kind(&self) -> FieldKind {
        self.kind
    }

    fn eval(&self, x: Point) -> Biquaternion {
        let mut base = [0i64; 3];
        let mut t = [0.0; 3];
        for a in 0..3 {
            let s = (x[a] - self.meta.origin[a]) / self.meta.h;
            let r = s.round();
            // snap onto nodes to keep lattice-coincident samples exact
            let s = if (s - r).abs() < 1e-9 { r } else { s };
            base[a] = s.floor() as i64;
            t[a] = s - s.floor();
        }
        let mut acc = Biquaternion::ZERO;
        let mut wsum = 0.0;
        for corner in 0..8 {
            let off = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let mut wgt = 1.0;
            let mut k = base;
            for a in 0..3 {
                k[a] += off[a] as i64;
                wgt *= if off[a] == 1 { t[a] } else { 1.0 - t[a] };
            }
            if wgt == 0.0 {
                continue;
            }
            if let Some(v) = self.nodes.get(&k) {
                acc += v.scale(C64::new(wgt, 0.0));
                wsum += wgt;
            }
        }
        if wsum == 0.0 {
            Biquaternion::scalar(ZERO)
        } else {
            acc.scale(C64::new(1.0 / wsum, 0.0))
        }
    }
}
