//! Bodies in R^m: analytic primitives and voxel grids, with the geometric
//! queries the containment theorems need (membership, distance to the
//! complement, inradius, diameter, inner-parallel bodies).
//!
//! The signed distance is positive inside: `signed_distance(x)` returns
//! `dist(x, complement)` for interior points and `-dist(x, body)` outside.
//! Cone parameters (aperture, height) are declared inputs attached to a
//! body; built-in shapes carry defaults that are validated empirically by
//! sampling boundary points and testing cone containment.

use std::f64::consts::PI;

use thiserror::Error;

use crate::grid::VoxelBody;

#[derive(Debug, Error)]
pub enum BodyError {
    #[error("invalid shape: {field}: {reason}")]
    InvalidShape { field: &'static str, reason: String },
    #[error("inner-parallel radius must be non-negative")]
    NegativeRadius,
    #[error("cone validation failed: {0}")]
    ConeValidationFailed(String),
    #[error("unsupported dimension {0}: {1}")]
    UnsupportedDimension(usize, &'static str),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

/// Exterior cone guarantee: every boundary point of the body carries an
/// open cone of aperture `kappa` and height `delta` inside the complement.
/// `delta = +inf` encodes a half-space style cone.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ConeSpec {
    pub kappa: f64,
    pub delta: f64,
}

impl ConeSpec {
    pub fn new(kappa: f64, delta: f64) -> Result<Self, BodyError> {
        if !(kappa > 0.0 && kappa <= PI) {
            return Err(BodyError::InvalidShape {
                field: "ConeSpec.kappa",
                reason: format!("aperture must lie in (0, pi], got {kappa}"),
            });
        }
        if !(delta > 0.0) {
            return Err(BodyError::InvalidShape {
                field: "ConeSpec.delta",
                reason: format!("height must be positive (inf allowed), got {delta}"),
            });
        }
        Ok(ConeSpec { kappa, delta })
    }
}

#[derive(Debug, Clone)]
pub enum Shape {
    Ball { center: Vec<f64>, radius: f64 },
    Annulus { center: Vec<f64>, r_in: f64, r_out: f64 },
    /// Two unit-halfwidth blocks [-3,-1] x B^{m-1} and [1,3] x B^{m-1}
    /// joined by the bar [-1,1] x eps B^{m-1}; m = 2 only.
    Dumbbell { epsilon: f64 },
    /// Simple closed polygon, m = 2 only. Convexity is detected, not
    /// required.
    Polygon { vertices: Vec<[f64; 2]> },
    Voxel(VoxelBody),
}

#[derive(Debug, Clone)]
pub struct Body {
    pub dim: usize,
    pub shape: Shape,
    pub cone: ConeSpec,
    pub grid_resolution: usize,
    diameter: f64,
    inradius: f64,
    bbox_lo: [f64; 3],
    bbox_hi: [f64; 3],
    /// Boundary polygon used for signed distance (dumbbell, polygon).
    outline: Option<Vec<[f64; 2]>>,
    /// Convex hull vertices (m = 2 shapes with flat hulls).
    hull: Option<Vec<[f64; 2]>>,
}

pub const DEFAULT_GRID_RESOLUTION: usize = 512;

impl Body {
    pub fn ball(dim: usize, center: Vec<f64>, radius: f64) -> Result<Self, BodyError> {
        Builder::new(dim, Shape::Ball { center, radius }).build()
    }

    pub fn annulus(dim: usize, center: Vec<f64>, r_in: f64, r_out: f64) -> Result<Self, BodyError> {
        Builder::new(dim, Shape::Annulus { center, r_in, r_out }).build()
    }

    pub fn dumbbell(epsilon: f64) -> Result<Self, BodyError> {
        Builder::new(2, Shape::Dumbbell { epsilon }).build()
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self, BodyError> {
        Builder::new(2, Shape::Polygon { vertices }).build()
    }

    pub fn voxel(grid: VoxelBody) -> Result<Self, BodyError> {
        let dim = grid.dim;
        Builder::new(dim, Shape::Voxel(grid)).build()
    }

    pub fn builder(dim: usize, shape: Shape) -> Builder {
        Builder::new(dim, shape)
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    pub fn bbox(&self) -> ([f64; 3], [f64; 3]) {
        (self.bbox_lo, self.bbox_hi)
    }

    /// Cell edge of the default working grid for this body.
    pub fn cell_size(&self) -> f64 {
        let (lo, hi) = self.bbox();
        let longest = (0..self.dim).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
        longest / self.grid_resolution as f64
    }

    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.shape {
            Shape::Ball { center, radius } => radius - dist(x, center),
            Shape::Annulus { center, r_in, r_out } => {
                let d = dist(x, center);
                (d - r_in).min(r_out - d)
            }
            Shape::Dumbbell { .. } | Shape::Polygon { .. } => {
                polygon_signed_distance(self.outline.as_ref().unwrap(), x)
            }
            Shape::Voxel(g) => g.signed_distance(x),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.signed_distance(x) >= 0.0
    }

    pub fn inner_parallel_contains(&self, rho: f64, x: &[f64]) -> Result<bool, BodyError> {
        if rho < 0.0 {
            return Err(BodyError::NegativeRadius);
        }
        Ok(self.signed_distance(x) >= rho)
    }

    /// Membership in the convex hull of the body.
    pub fn hull_contains(&self, x: &[f64]) -> bool {
        match &self.shape {
            Shape::Ball { center, radius } => dist(x, center) <= *radius,
            Shape::Annulus { center, r_out, .. } => dist(x, center) <= *r_out,
            _ => {
                let hull = self.hull.as_ref().expect("flat shapes carry a hull");
                point_in_convex_polygon(hull, x)
            }
        }
    }

    pub fn hull_polygon(&self) -> Option<&[[f64; 2]]> {
        self.hull.as_deref()
    }

    /// Boundary polygon for the flat shapes (drawing, folding tests).
    pub fn outline_polygon(&self) -> Option<&[[f64; 2]]> {
        self.outline.as_deref()
    }

    /// Area/volume centroid on the working grid.
    pub fn centroid(&self) -> Vec<f64> {
        let (lo, hi) = self.bbox();
        let res = self.grid_resolution.min(256);
        let cell = (0..self.dim)
            .map(|a| hi[a] - lo[a])
            .fold(0.0, f64::max)
            / res as f64;
        let mut sums = vec![0.0; self.dim];
        let mut count = 0usize;
        let dims: Vec<usize> = (0..self.dim)
            .map(|a| (((hi[a] - lo[a]) / cell).ceil() as usize).max(1))
            .collect();
        let nz = if self.dim == 3 { dims[2] } else { 1 };
        for k in 0..nz {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let mut p = [0.0f64; 3];
                    p[0] = lo[0] + (i as f64 + 0.5) * cell;
                    p[1] = lo[1] + (j as f64 + 0.5) * cell;
                    p[2] = lo[2] + (k as f64 + 0.5) * cell;
                    if self.contains(&p[..self.dim]) {
                        for a in 0..self.dim {
                            sums[a] += p[a];
                        }
                        count += 1;
                    }
                }
            }
        }
        sums.iter().map(|s| s / count as f64).collect()
    }

    /// Rasterize this body onto a voxel grid at `resolution` cells along
    /// the longest bounding-box edge.
    pub fn rasterize(&self, resolution: usize) -> Result<VoxelBody, BodyError> {
        if self.dim > 3 {
            return Err(BodyError::UnsupportedDimension(self.dim, "no m > 3 grids"));
        }
        let (mut lo, mut hi) = self.bbox();
        // pad by two cells of complement so the distance transform sees
        // the outside even where the body touches its bounding box
        let longest = (0..self.dim).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
        let pad = 2.0 * longest / resolution as f64;
        for a in 0..self.dim {
            lo[a] -= pad;
            hi[a] += pad;
        }
        Ok(VoxelBody::rasterize(self.dim, lo, hi, resolution, |p| {
            self.signed_distance(p)
        })?)
    }
}

pub struct Builder {
    dim: usize,
    shape: Shape,
    cone: Option<ConeSpec>,
    grid_resolution: usize,
    validate_cone: bool,
}

impl Builder {
    pub fn new(dim: usize, shape: Shape) -> Self {
        Builder {
            dim,
            shape,
            cone: None,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
            validate_cone: true,
        }
    }

    pub fn cone(mut self, cone: ConeSpec) -> Self {
        self.cone = Some(cone);
        self
    }

    pub fn grid_resolution(mut self, res: usize) -> Self {
        self.grid_resolution = res;
        self
    }

    pub fn skip_cone_validation(mut self) -> Self {
        self.validate_cone = false;
        self
    }

    pub fn build(self) -> Result<Body, BodyError> {
        let dim = self.dim;
        if dim < 2 {
            return Err(BodyError::UnsupportedDimension(dim, "bodies need m >= 2"));
        }
        let user_cone = self.cone.is_some();
        let (diameter, inradius, bbox_lo, bbox_hi, outline, hull, default_cone) =
            analyze_shape(dim, &self.shape)?;
        let cone = match self.cone {
            Some(c) => c,
            None => default_cone,
        };
        ConeSpec::new(cone.kappa, cone.delta)?;
        let body = Body {
            dim,
            shape: self.shape,
            cone,
            grid_resolution: self.grid_resolution,
            diameter,
            inradius,
            bbox_lo,
            bbox_hi,
            outline,
            hull,
        };
        if self.validate_cone && !user_cone && dim <= 3 {
            validate_cone(&body)?;
        }
        Ok(body)
    }
}

type ShapeAnalysis = (
    f64,
    f64,
    [f64; 3],
    [f64; 3],
    Option<Vec<[f64; 2]>>,
    Option<Vec<[f64; 2]>>,
    ConeSpec,
);

fn analyze_shape(dim: usize, shape: &Shape) -> Result<ShapeAnalysis, BodyError> {
    match shape {
        Shape::Ball { center, radius } => {
            if *radius <= 0.0 {
                return Err(BodyError::InvalidShape {
                    field: "Ball.radius",
                    reason: format!("must be positive, got {radius}"),
                });
            }
            check_center(dim, center, "Ball.center")?;
            let (lo, hi) = pad_bbox(dim, center, *radius);
            Ok((
                2.0 * radius,
                *radius,
                lo,
                hi,
                None,
                None,
                ConeSpec { kappa: PI, delta: f64::INFINITY },
            ))
        }
        Shape::Annulus { center, r_in, r_out } => {
            if !(*r_in > 0.0 && r_in < r_out) {
                return Err(BodyError::InvalidShape {
                    field: "Annulus.r_in",
                    reason: format!("need 0 < r_in < r_out, got r_in={r_in}, r_out={r_out}"),
                });
            }
            check_center(dim, center, "Annulus.center")?;
            let (lo, hi) = pad_bbox(dim, center, *r_out);
            Ok((
                2.0 * r_out,
                (r_out - r_in) / 2.0,
                lo,
                hi,
                None,
                None,
                ConeSpec { kappa: PI / 2.0, delta: r_in / 2.0 },
            ))
        }
        Shape::Dumbbell { epsilon } => {
            if dim != 2 {
                return Err(BodyError::UnsupportedDimension(dim, "dumbbell is built for m = 2"));
            }
            if !(*epsilon > 0.0 && *epsilon <= 1.0) {
                return Err(BodyError::InvalidShape {
                    field: "Dumbbell.epsilon",
                    reason: format!("need 0 < epsilon <= 1, got {epsilon}"),
                });
            }
            let e = *epsilon;
            let outline = vec![
                [-3.0, -1.0],
                [-1.0, -1.0],
                [-1.0, -e],
                [1.0, -e],
                [1.0, -1.0],
                [3.0, -1.0],
                [3.0, 1.0],
                [1.0, 1.0],
                [1.0, e],
                [-1.0, e],
                [-1.0, 1.0],
                [-3.0, 1.0],
            ];
            let hull = convex_hull(&outline);
            Ok((
                (40.0f64).sqrt(), // 2*sqrt(10)
                1.0,
                [-3.0, -1.0, 0.0],
                [3.0, 1.0, 0.0],
                Some(outline),
                Some(hull),
                ConeSpec { kappa: PI / 2.0, delta: e / 2.0 },
            ))
        }
        Shape::Polygon { vertices } => {
            if dim != 2 {
                return Err(BodyError::UnsupportedDimension(dim, "polygons are m = 2"));
            }
            validate_polygon(vertices)?;
            let diam = vertices
                .iter()
                .flat_map(|a| vertices.iter().map(move |b| dist(a, b)))
                .fold(0.0, f64::max);
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            lo[2] = 0.0;
            hi[2] = 0.0;
            for v in vertices {
                for a in 0..2 {
                    lo[a] = lo[a].min(v[a]);
                    hi[a] = hi[a].max(v[a]);
                }
            }
            let outline = vertices.clone();
            let hull = convex_hull(vertices);
            let convex = hull.len() >= vertices.len() && is_convex(vertices);
            let inradius = polygon_inradius(vertices, lo, hi);
            let cone = if convex {
                ConeSpec { kappa: PI, delta: f64::INFINITY }
            } else {
                ConeSpec { kappa: PI / 2.0, delta: (inradius / 2.0).max(1e-3) }
            };
            Ok((diam, inradius, lo, hi, Some(outline), Some(hull), cone))
        }
        Shape::Voxel(g) => {
            let (lo, hi) = g.bbox();
            let mut max_sdf = 0.0f64;
            let mut pts: Vec<[f64; 2]> = Vec::new();
            let mut lo3 = [f64::INFINITY; 3];
            let mut hi3 = [f64::NEG_INFINITY; 3];
            let mut pts3: Vec<[f64; 3]> = Vec::new();
            for k in 0..g.dims[2] {
                for j in 0..g.dims[1] {
                    for i in 0..g.dims[0] {
                        if g.occ[g.index(i, j, k)] {
                            let c = g.cell_center(i, j, k);
                            max_sdf = max_sdf.max(g.signed_distance(&c[..g.dim]));
                            if g.dim == 2 {
                                pts.push([c[0], c[1]]);
                            } else {
                                pts3.push(c);
                            }
                            for a in 0..3 {
                                lo3[a] = lo3[a].min(c[a]);
                                hi3[a] = hi3[a].max(c[a]);
                            }
                        }
                    }
                }
            }
            let pad = g.cell * (g.dim as f64).sqrt();
            let diam = if g.dim == 2 {
                let hull = convex_hull(&pts);
                pairwise_max(&hull) + pad
            } else {
                support_diameter(&pts3) + pad
            };
            let hull2 = if g.dim == 2 {
                let mut h = convex_hull(&pts);
                h = inflate_hull(&h, 0.5 * g.cell);
                Some(h)
            } else {
                None
            };
            let cone = ConeSpec { kappa: PI / 2.0, delta: (2.0 * g.cell).max(1e-6) };
            Ok((diam, max_sdf + 0.5 * g.cell, lo, hi, None, hull2, cone))
        }
    }
}

fn check_center(dim: usize, center: &[f64], field: &'static str) -> Result<(), BodyError> {
    if center.len() != dim {
        return Err(BodyError::InvalidShape {
            field,
            reason: format!("expected {dim} coordinates, got {}", center.len()),
        });
    }
    if center.iter().any(|c| !c.is_finite()) {
        return Err(BodyError::InvalidShape { field, reason: "coordinates must be finite".into() });
    }
    Ok(())
}

fn pad_bbox(dim: usize, center: &[f64], radius: f64) -> ([f64; 3], [f64; 3]) {
    let mut lo = [0.0f64; 3];
    let mut hi = [0.0f64; 3];
    for a in 0..dim.min(3) {
        lo[a] = center[a] - radius;
        hi[a] = center[a] + radius;
    }
    (lo, hi)
}

fn validate_polygon(v: &[[f64; 2]]) -> Result<(), BodyError> {
    if v.len() < 3 {
        return Err(BodyError::InvalidShape {
            field: "Polygon.vertices",
            reason: format!("need at least 3 vertices, got {}", v.len()),
        });
    }
    if v.iter().flatten().any(|c| !c.is_finite()) {
        return Err(BodyError::InvalidShape {
            field: "Polygon.vertices",
            reason: "coordinates must be finite".into(),
        });
    }
    let n = v.len();
    // Signed area must be non-zero (non-degenerate, orientation irrelevant).
    let area: f64 = (0..n)
        .map(|i| {
            let a = v[i];
            let b = v[(i + 1) % n];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum();
    if area.abs() < 1e-12 {
        return Err(BodyError::InvalidShape {
            field: "Polygon.vertices",
            reason: "degenerate polygon (zero area)".into(),
        });
    }
    // Simplicity: non-adjacent edges must not cross.
    for i in 0..n {
        for j in i + 1..n {
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            if segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return Err(BodyError::InvalidShape {
                    field: "Polygon.vertices",
                    reason: format!("edges {i} and {j} intersect: polygon is not simple"),
                });
            }
        }
    }
    Ok(())
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let orient = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| -> f64 {
        (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    };
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn is_convex(v: &[[f64; 2]]) -> bool {
    let n = v.len();
    let mut sign = 0.0f64;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        let c = v[(i + 2) % n];
        let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if cross.abs() < 1e-12 {
            continue;
        }
        if sign == 0.0 {
            sign = cross.signum();
        } else if cross.signum() != sign {
            return false;
        }
    }
    true
}

/// Max inscribed-circle radius by coarse grid scan plus pattern-search
/// refinement of the (piecewise smooth) distance field.
fn polygon_inradius(v: &[[f64; 2]], lo: [f64; 3], hi: [f64; 3]) -> f64 {
    let res = 128;
    let cell = ((hi[0] - lo[0]).max(hi[1] - lo[1])) / res as f64;
    let mut best = (0.0f64, [0.0f64, 0.0]);
    let nx = (((hi[0] - lo[0]) / cell).ceil() as usize).max(1);
    let ny = (((hi[1] - lo[1]) / cell).ceil() as usize).max(1);
    for j in 0..ny {
        for i in 0..nx {
            let p = [lo[0] + (i as f64 + 0.5) * cell, lo[1] + (j as f64 + 0.5) * cell];
            let s = polygon_signed_distance(v, &p);
            if s > best.0 {
                best = (s, p);
            }
        }
    }
    // pattern search
    let mut step = cell;
    let mut p = best.1;
    let mut val = best.0;
    while step > 1e-9 {
        let mut improved = false;
        for d in [[step, 0.0], [-step, 0.0], [0.0, step], [0.0, -step]] {
            let q = [p[0] + d[0], p[1] + d[1]];
            let s = polygon_signed_distance(v, &q);
            if s > val {
                val = s;
                p = q;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    val
}

pub fn polygon_signed_distance(v: &[[f64; 2]], x: &[f64]) -> f64 {
    let n = v.len();
    let mut d2 = f64::INFINITY;
    let mut inside = false;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        d2 = d2.min(point_segment_dist2(x, a, b));
        // even-odd crossing test
        if (a[1] > x[1]) != (b[1] > x[1]) {
            let t = (x[1] - a[1]) / (b[1] - a[1]);
            if a[0] + t * (b[0] - a[0]) > x[0] {
                inside = !inside;
            }
        }
    }
    let d = d2.sqrt();
    if inside {
        d
    } else {
        -d
    }
}

fn point_segment_dist2(p: &[f64], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let dx = ap[0] - t * ab[0];
    let dy = ap[1] - t * ab[1];
    dx * dx + dy * dy
}

/// Andrew monotone chain; returns CCW hull without the closing vertex.
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for &p in pts.iter().chain(pts.iter().rev().skip(1)) {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn point_in_convex_polygon(hull: &[[f64; 2]], x: &[f64]) -> bool {
    if hull.len() < 3 {
        // segment or point: within tiny tolerance of it
        return match hull.len() {
            0 => false,
            1 => dist(&hull[0], x) <= 1e-12,
            _ => point_segment_dist2(x, hull[0], hull[1]) <= 1e-24,
        };
    }
    let n = hull.len();
    for i in 0..n {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        let cross = (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]);
        if cross < -1e-12 {
            return false;
        }
    }
    true
}

fn pairwise_max(pts: &[[f64; 2]]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            best = best.max(dist(a, b));
        }
    }
    best
}

/// Approximate diameter of a 3-D point cloud: support points over sampled
/// directions, then pairwise max over that small set.
fn support_diameter(pts: &[[f64; 3]]) -> f64 {
    if pts.is_empty() {
        return 0.0;
    }
    let mut support: Vec<[f64; 3]> = Vec::new();
    let n_dir = 512;
    for i in 0..n_dir {
        let v = fibonacci_direction(i, n_dir);
        let p = pts
            .iter()
            .max_by(|a, b| {
                let da = a[0] * v[0] + a[1] * v[1] + a[2] * v[2];
                let db = b[0] * v[0] + b[1] * v[1] + b[2] * v[2];
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        support.push(*p);
    }
    support.sort_by(|a, b| a.partial_cmp(b).unwrap());
    support.dedup();
    let mut best = 0.0f64;
    for (i, a) in support.iter().enumerate() {
        for b in &support[i + 1..] {
            let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
            best = best.max(d);
        }
    }
    best
}

pub fn fibonacci_direction(i: usize, n: usize) -> [f64; 3] {
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
    let r = (1.0 - z * z).sqrt();
    let phi = 2.0 * PI * (i as f64 / golden).fract();
    [r * phi.cos(), r * phi.sin(), z]
}

fn inflate_hull(hull: &[[f64; 2]], pad: f64) -> Vec<[f64; 2]> {
    if hull.len() < 3 {
        return hull.to_vec();
    }
    let cx = hull.iter().map(|p| p[0]).sum::<f64>() / hull.len() as f64;
    let cy = hull.iter().map(|p| p[1]).sum::<f64>() / hull.len() as f64;
    hull.iter()
        .map(|p| {
            let dx = p[0] - cx;
            let dy = p[1] - cy;
            let r = (dx * dx + dy * dy).sqrt().max(1e-12);
            [p[0] + pad * dx / r, p[1] + pad * dy / r]
        })
        .collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Empirical check that every boundary point admits an open cone of the
/// declared aperture/height inside the complement. Fails loudly rather
/// than silently shrinking the cone.
pub fn validate_cone(body: &Body) -> Result<(), BodyError> {
    let cell = body.cell_size().max(body.diameter() / 256.0);
    let tol = 2.0 * cell * (body.dim as f64).sqrt();
    let boundary = sample_boundary_points(body, cell, 200);
    let height = body.cone.delta.min(body.diameter());
    let dirs = candidate_directions(body.dim, if body.dim == 2 { 64 } else { 192 });
    for p in &boundary {
        let ok = dirs.iter().any(|v| cone_fits_in_complement(body, p, v, height, tol));
        if !ok {
            return Err(BodyError::ConeValidationFailed(format!(
                "no cone of aperture {:.4} and height {:.4} fits in the complement at boundary point {:?}",
                body.cone.kappa, height, p
            )));
        }
    }
    Ok(())
}

fn sample_boundary_points(body: &Body, cell: f64, max_points: usize) -> Vec<Vec<f64>> {
    let (lo, hi) = body.bbox();
    let mut pts = Vec::new();
    let dims: Vec<usize> = (0..body.dim)
        .map(|a| (((hi[a] - lo[a]) / cell).ceil() as usize).max(1))
        .collect();
    let nz = if body.dim == 3 { dims[2] } else { 1 };
    for k in 0..nz {
        for j in 0..dims[1] {
            for i in 0..dims[0] {
                let mut p = vec![0.0f64; body.dim];
                p[0] = lo[0] + (i as f64 + 0.5) * cell;
                p[1] = lo[1] + (j as f64 + 0.5) * cell;
                if body.dim == 3 {
                    p[2] = lo[2] + (k as f64 + 0.5) * cell;
                }
                if body.signed_distance(&p).abs() < 0.5 * cell {
                    pts.push(p);
                }
            }
        }
    }
    if pts.len() > max_points {
        let stride = pts.len() / max_points;
        pts = pts.into_iter().step_by(stride.max(1)).collect();
    }
    pts
}

fn candidate_directions(dim: usize, n: usize) -> Vec<Vec<f64>> {
    if dim == 2 {
        (0..n)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / n as f64;
                vec![a.cos(), a.sin()]
            })
            .collect()
    } else {
        (0..n).map(|i| fibonacci_direction(i, n).to_vec()).collect()
    }
}

fn cone_fits_in_complement(body: &Body, apex: &[f64], axis: &[f64], height: f64, tol: f64) -> bool {
    let half = body.cone.kappa / 2.0;
    // Radial and angular sample points inside the cone.
    for &rf in &[0.15, 0.4, 0.7, 0.95] {
        let rho = rf * height;
        for &af in &[0.0, 0.45, 0.9] {
            let ang = af * half;
            let dirs = rotated_directions(body.dim, axis, ang);
            for d in dirs {
                let q: Vec<f64> = apex.iter().zip(&d).map(|(x, v)| x + rho * v).collect();
                if body.signed_distance(&q) > tol {
                    return false;
                }
            }
        }
    }
    true
}

/// Unit vectors at angle `ang` off `axis` (both sides in 2-D, four
/// azimuths in 3-D).
fn rotated_directions(dim: usize, axis: &[f64], ang: f64) -> Vec<Vec<f64>> {
    if ang == 0.0 {
        return vec![axis.to_vec()];
    }
    if dim == 2 {
        let base = axis[1].atan2(axis[0]);
        [base + ang, base - ang]
            .iter()
            .map(|a| vec![a.cos(), a.sin()])
            .collect()
    } else {
        // Build an orthonormal frame around the axis.
        let a = [axis[0], axis[1], axis[2]];
        let helper = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let mut u = [
            a[1] * helper[2] - a[2] * helper[1],
            a[2] * helper[0] - a[0] * helper[2],
            a[0] * helper[1] - a[1] * helper[0],
        ];
        let un = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        for c in &mut u {
            *c /= un;
        }
        let w = [
            a[1] * u[2] - a[2] * u[1],
            a[2] * u[0] - a[0] * u[2],
            a[0] * u[1] - a[1] * u[0],
        ];
        (0..4)
            .map(|i| {
                let az = PI / 2.0 * i as f64;
                let (s, c) = ang.sin_cos();
                let (saz, caz) = az.sin_cos();
                (0..3)
                    .map(|j| c * a[j] + s * (caz * u[j] + saz * w[j]))
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ball_geometry() {
        let b = Body::ball(2, vec![0.0, 0.0], 1.0).unwrap();
        assert_relative_eq!(b.diameter(), 2.0);
        assert_relative_eq!(b.inradius(), 1.0);
        assert_relative_eq!(b.signed_distance(&[0.0, 0.0]), 1.0);
        assert_relative_eq!(b.signed_distance(&[2.0, 0.0]), -1.0);
        assert_eq!(b.cone.kappa, PI);
        assert!(b.cone.delta.is_infinite());
    }

    #[test]
    fn dumbbell_matches_reference_geometry() {
        let b = Body::dumbbell(0.2).unwrap();
        assert_relative_eq!(b.diameter(), 2.0 * 10.0f64.sqrt());
        assert_relative_eq!(b.inradius(), 1.0);
        // mid-block point: distance to complement >= 0.5
        assert!(b.signed_distance(&[1.5, 0.0]) >= 0.5);
        assert!(b.inner_parallel_contains(0.5, &[1.5, 0.0]).unwrap());
        // bar point
        assert!(b.contains(&[0.0, 0.0]));
        assert!(!b.contains(&[0.0, 0.5]));
    }

    #[test]
    fn annulus_reference_geometry() {
        let b = Body::annulus(2, vec![0.0, 0.0], 1.0, 3.0).unwrap();
        assert_relative_eq!(b.diameter(), 6.0);
        assert_relative_eq!(b.inradius(), 1.0);
        assert_relative_eq!(b.signed_distance(&[2.0, 0.0]), 1.0);
        assert!(!b.contains(&[0.0, 0.0]));
    }

    #[test]
    fn invalid_shapes_name_the_field() {
        let err = Body::ball(2, vec![0.0, 0.0], -1.0).unwrap_err();
        assert!(err.to_string().contains("Ball.radius"));
        let err = Body::annulus(2, vec![0.0, 0.0], 3.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("Annulus.r_in"));
        let err = ConeSpec::new(2.0 * PI, 1.0).unwrap_err();
        assert!(err.to_string().contains("ConeSpec.kappa"));
    }

    #[test]
    fn self_intersecting_polygon_rejected() {
        let err = Body::polygon(vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(err.is_err());
    }

    #[test]
    fn triangle_inradius_matches_incircle() {
        // (0,0),(4,0),(1,1): area 2, semiperimeter (4+sqrt2+sqrt10)/2
        let b = Body::polygon(vec![[0.0, 0.0], [4.0, 0.0], [1.0, 1.0]]).unwrap();
        let s = (4.0 + 2.0f64.sqrt() + 10.0f64.sqrt()) / 2.0;
        assert_relative_eq!(b.inradius(), 2.0 / s, epsilon = 1e-6);
        assert_relative_eq!(b.diameter(), 4.0);
    }

    #[test]
    fn inner_parallel_monotone() {
        let b = Body::ball(2, vec![0.0, 0.0], 1.0).unwrap();
        let x = [0.3, 0.1];
        assert!(b.inner_parallel_contains(0.2, &x).unwrap());
        assert!(b.inner_parallel_contains(0.1, &x).unwrap());
        assert!(b.inner_parallel_contains(-0.1, &x).is_err());
    }

    #[test]
    fn default_cones_validate() {
        // builders above already run validation; spot-check an explicit call
        let b = Body::dumbbell(0.2).unwrap();
        validate_cone(&b).unwrap();
        let a = Body::annulus(2, vec![0.0, 0.0], 1.0, 3.0).unwrap();
        validate_cone(&a).unwrap();
    }

    #[test]
    fn bad_cone_fails_validation() {
        // A half-space cone cannot fit in the complement of an annulus
        // at the inner boundary.
        let res = Body::builder(2, Shape::Annulus { center: vec![0.0, 0.0], r_in: 1.0, r_out: 3.0 })
            .cone(ConeSpec { kappa: PI, delta: f64::INFINITY })
            .build()
            .unwrap();
        assert!(validate_cone(&res).is_err());
    }

    #[test]
    fn voxel_body_round_trip_geometry() {
        let b = Body::ball(2, vec![0.0, 0.0], 1.0).unwrap();
        let g = b.rasterize(128).unwrap();
        let vb = Body::builder(2, Shape::Voxel(g)).skip_cone_validation().build().unwrap();
        assert!((vb.inradius() - 1.0).abs() < 0.03);
        assert!((vb.diameter() - 2.0).abs() < 0.05);
    }
}
