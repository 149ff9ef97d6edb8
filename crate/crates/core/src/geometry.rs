//! Structured triangulations of planar domains.
//!
//! Nodes sit on a square lattice of spacing `h`; every lattice cell is split
//! along its south-west/north-east diagonal into two right triangles. A node
//! is *interior* when its whole six-triangle star lies in the domain, a
//! *boundary* node when only part of it does (those carry the Dirichlet value
//! 0), and *exterior* otherwise.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::Stiffness;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Shape {
    /// Disk of the given radius centred at the origin.
    Disk { radius: f64 },
    /// `[0, width] × [0, height]`.
    Rect { width: f64, height: f64 },
    /// `[0, width] × [0, height]` with the top-right `cut × cut` square removed.
    LShape { width: f64, height: f64, cut: f64 },
    /// ASCII mask: `#` marks a node inside the domain, `.` one outside.
    /// The first line is the top row; node spacing is `1/resolution`.
    MaskFile { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub shape: Shape,
    /// Nodes per unit length, so `h = 1/resolution`.
    pub resolution: f64,
    /// Star-shapedness centre for the cone field; a shape-dependent default
    /// is used when absent.
    #[serde(default)]
    pub center: Option<[f64; 2]>,
}

impl ShapeSpec {
    pub fn disk(radius: f64, resolution: f64) -> Self {
        Self { shape: Shape::Disk { radius }, resolution, center: None }
    }

    pub fn rect(width: f64, height: f64, resolution: f64) -> Self {
        Self { shape: Shape::Rect { width, height }, resolution, center: None }
    }

    pub fn square(side: f64, resolution: f64) -> Self {
        Self::rect(side, side, resolution)
    }

    pub fn lshape(width: f64, height: f64, cut: f64, resolution: f64) -> Self {
        Self { shape: Shape::LShape { width, height, cut }, resolution, center: None }
    }

    pub fn mask_file(path: impl Into<PathBuf>, resolution: f64) -> Self {
        Self { shape: Shape::MaskFile { path: path.into() }, resolution, center: None }
    }

    pub fn with_center(mut self, center: [f64; 2]) -> Self {
        self.center = Some(center);
        self
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive and finite, got {x}")))
            }
        };
        positive("resolution", self.resolution)?;
        match &self.shape {
            Shape::Disk { radius } => positive("radius", *radius),
            Shape::Rect { width, height } => {
                positive("width", *width)?;
                positive("height", *height)
            }
            Shape::LShape { width, height, cut } => {
                positive("width", *width)?;
                positive("height", *height)?;
                positive("cut", *cut)?;
                if *cut >= width.min(*height) {
                    return Err(invalid("L-shape cut must be smaller than both sides"));
                }
                Ok(())
            }
            Shape::MaskFile { .. } => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Interior,
    Boundary,
    Exterior,
}

/// Sentinel in [`GridDomain::dof`] for nodes without a degree of freedom.
pub const NO_DOF: u32 = u32::MAX;

/// A triangulated planar domain. Immutable once built.
pub struct GridDomain {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    /// Coordinates of node `(0, 0)`.
    pub origin: [f64; 2],
    pub kinds: Vec<NodeKind>,
    /// Vertex triples `[right-angle vertex, x-neighbour, y-neighbour]`.
    pub triangles: Vec<[u32; 3]>,
    pub volume: f64,
    /// Interior node index for each node, or [`NO_DOF`].
    pub dof: Vec<u32>,
    /// Node index of each interior degree of freedom.
    pub interior: Vec<u32>,
    /// Bit 0: lower triangle of the cell kept; bit 1: upper triangle kept.
    cells: Vec<u8>,
    spec: ShapeSpec,
    scale: f64,
    pub(crate) stiffness: OnceLock<Arc<Stiffness>>,
}

impl fmt::Debug for GridDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridDomain")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("h", &self.h)
            .field("volume", &self.volume)
            .field("triangles", &self.triangles.len())
            .field("interior", &self.interior.len())
            .field("spec", &self.spec)
            .field("scale", &self.scale)
            .finish()
    }
}

impl GridDomain {
    pub fn node(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn node_ij(&self, node: usize) -> (usize, usize) {
        (node % self.nx, node / self.nx)
    }

    pub fn coords(&self, node: usize) -> [f64; 2] {
        let (ix, iy) = self.node_ij(node);
        [self.origin[0] + ix as f64 * self.h, self.origin[1] + iy as f64 * self.h]
    }

    pub fn n_nodes(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn triangle_area(&self) -> f64 {
        0.5 * self.h * self.h
    }

    pub fn is_interior(&self, node: usize) -> bool {
        self.kinds[node] == NodeKind::Interior
    }

    /// The specification this domain was built from, before scaling.
    pub fn spec(&self) -> &ShapeSpec {
        &self.spec
    }

    /// Product of all factors applied through [`scale_domain`].
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// The star-shapedness centre, in the scaled coordinates.
    pub fn center(&self) -> [f64; 2] {
        let c = self.spec.center.unwrap_or_else(|| default_center(&self.spec.shape, self));
        [c[0] * self.scale, c[1] * self.scale]
    }

    /// Lumped quadrature weights: a third of the incident triangle area per node.
    pub fn lumped_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.n_nodes()];
        let a = self.triangle_area() / 3.0;
        for t in &self.triangles {
            for &n in t {
                w[n as usize] += a;
            }
        }
        w
    }

    /// Whether the point lies in the closed union of the kept triangles.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let fx = (x - self.origin[0]) / self.h;
        let fy = (y - self.origin[1]) / self.h;
        if !(fx >= 0.0 && fy >= 0.0) {
            return false;
        }
        let (ci, cj) = (fx.floor() as usize, fy.floor() as usize);
        let probe = |ci: usize, cj: usize| -> bool {
            if ci + 1 >= self.nx || cj + 1 >= self.ny {
                return false;
            }
            let (lx, ly) = (fx - ci as f64, fy - cj as f64);
            let bits = self.cells[cj * (self.nx - 1) + ci];
            let eps = 1e-12;
            (bits & 1 != 0 && ly <= lx + eps) || (bits & 2 != 0 && ly + eps >= lx)
        };
        // points on cell edges belong to neighbouring cells as well
        probe(ci, cj)
            || (ci > 0 && fx == ci as f64 && probe(ci - 1, cj))
            || (cj > 0 && fy == cj as f64 && probe(ci, cj - 1))
            || (ci > 0 && cj > 0 && fx == ci as f64 && fy == cj as f64 && probe(ci - 1, cj - 1))
    }
}

fn default_center(shape: &Shape, d: &GridDomain) -> [f64; 2] {
    match shape {
        Shape::Disk { .. } => [0.0, 0.0],
        Shape::Rect { width, height } => [width / 2.0, height / 2.0],
        Shape::LShape { width, height, cut } => [(width - cut) / 2.0, (height - cut) / 2.0],
        Shape::MaskFile { .. } => {
            // interior node closest to the interior centroid, in unscaled units
            let n = d.interior.len() as f64;
            let (sx, sy) = d.interior.iter().fold((0.0, 0.0), |(sx, sy), &k| {
                let c = d.coords(k as usize);
                (sx + c[0], sy + c[1])
            });
            let (cx, cy) = (sx / n, sy / n);
            let best = d
                .interior
                .iter()
                .map(|&k| d.coords(k as usize))
                .min_by(|a, b| {
                    let da = (a[0] - cx).powi(2) + (a[1] - cy).powi(2);
                    let db = (b[0] - cx).powi(2) + (b[1] - cy).powi(2);
                    da.total_cmp(&db)
                })
                .unwrap_or([cx, cy]);
            [best[0] / d.scale, best[1] / d.scale]
        }
    }
}

/// Parses an ASCII mask into rows of inside-flags, top row first.
pub fn parse_mask(text: &str) -> Result<Vec<Vec<bool>>> {
    let rows: Vec<&str> = text.lines().map(str::trim_end).filter(|l| !l.is_empty()).collect();
    if rows.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let width = rows[0].chars().count();
    let mut out = Vec::with_capacity(rows.len());
    for (k, row) in rows.iter().enumerate() {
        if row.chars().count() != width {
            return Err(Error::Parse(format!("mask row {} has length {}, expected {width}", k + 1, row.chars().count())));
        }
        let flags = row
            .chars()
            .map(|c| match c {
                '#' => Ok(true),
                '.' => Ok(false),
                other => Err(Error::Parse(format!("unexpected mask character {other:?} in row {}", k + 1))),
            })
            .collect::<Result<Vec<bool>>>()?;
        out.push(flags);
    }
    Ok(out)
}

fn read_mask(path: &Path) -> Result<Vec<Vec<bool>>> {
    let text = std::fs::read_to_string(path)?;
    parse_mask(&text)
}

/// Builds the triangulated domain described by `spec`.
pub fn make_domain(spec: &ShapeSpec) -> Result<GridDomain> {
    spec.validate()?;
    let h = 1.0 / spec.resolution;
    let (i0, j0, nx, ny, inside): (i64, i64, usize, usize, Vec<bool>) = match &spec.shape {
        Shape::MaskFile { path } => {
            let rows = read_mask(path)?;
            // one ring of exterior nodes around the mask
            let (mw, mh) = (rows[0].len(), rows.len());
            let (nx, ny) = (mw + 2, mh + 2);
            let mut inside = vec![false; nx * ny];
            for (r, row) in rows.iter().enumerate() {
                let iy = mh - r;
                for (c, &flag) in row.iter().enumerate() {
                    inside[iy * nx + c + 1] = flag;
                }
            }
            (-1, -1, nx, ny, inside)
        }
        shape => {
            let (lo, hi) = bounding_box(shape);
            let i0 = (lo[0] / h).floor() as i64 - 1;
            let j0 = (lo[1] / h).floor() as i64 - 1;
            let i1 = (hi[0] / h).ceil() as i64 + 1;
            let j1 = (hi[1] / h).ceil() as i64 + 1;
            let (nx, ny) = ((i1 - i0 + 1) as usize, (j1 - j0 + 1) as usize);
            let mut inside = vec![false; nx * ny];
            for iy in 0..ny {
                for ix in 0..nx {
                    let x = (i0 + ix as i64) as f64 * h;
                    let y = (j0 + iy as i64) as f64 * h;
                    inside[iy * nx + ix] = point_in_shape(shape, x, y, h);
                }
            }
            (i0, j0, nx, ny, inside)
        }
    };
    let origin = [i0 as f64 * h, j0 as f64 * h];
    build(spec.clone(), h, origin, nx, ny, &inside)
}

fn bounding_box(shape: &Shape) -> ([f64; 2], [f64; 2]) {
    match shape {
        Shape::Disk { radius } => ([-radius, -radius], [*radius, *radius]),
        Shape::Rect { width, height } | Shape::LShape { width, height, .. } => ([0.0, 0.0], [*width, *height]),
        Shape::MaskFile { .. } => unreachable!("mask shapes have no analytic bounding box"),
    }
}

fn point_in_shape(shape: &Shape, x: f64, y: f64, h: f64) -> bool {
    let tol = 1e-9 * h;
    let in_rect = |w: f64, ht: f64| x >= -tol && y >= -tol && x <= w + tol && y <= ht + tol;
    match shape {
        Shape::Disk { radius } => (x * x + y * y).sqrt() <= radius + tol,
        Shape::Rect { width, height } => in_rect(*width, *height),
        Shape::LShape { width, height, cut } => {
            in_rect(*width, *height) && !(x > width - cut + tol && y > height - cut + tol)
        }
        Shape::MaskFile { .. } => unreachable!(),
    }
}

fn build(spec: ShapeSpec, h: f64, origin: [f64; 2], nx: usize, ny: usize, inside: &[bool]) -> Result<GridDomain> {
    let idx = |ix: usize, iy: usize| iy * nx + ix;
    let mut candidates: Vec<([u32; 3], usize, u8)> = Vec::new();
    let mut star = vec![0u8; nx * ny];
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let lower = [idx(i + 1, j), idx(i, j), idx(i + 1, j + 1)];
            let upper = [idx(i, j + 1), idx(i + 1, j + 1), idx(i, j)];
            for (tri, bit) in [(lower, 1u8), (upper, 2u8)] {
                if tri.iter().all(|&n| inside[n]) {
                    for &n in &tri {
                        star[n] += 1;
                    }
                    candidates.push(([tri[0] as u32, tri[1] as u32, tri[2] as u32], j * (nx - 1) + i, bit));
                }
            }
        }
    }
    let mut kinds: Vec<NodeKind> = star
        .iter()
        .map(|&s| match s {
            6 => NodeKind::Interior,
            0 => NodeKind::Exterior,
            _ => NodeKind::Boundary,
        })
        .collect();
    // triangles with no interior vertex carry the zero function only
    let mut cells = vec![0u8; (nx - 1) * (ny - 1)];
    let mut triangles = Vec::with_capacity(candidates.len());
    let mut kept_star = vec![0u8; nx * ny];
    for (tri, cell, bit) in candidates {
        if tri.iter().any(|&n| kinds[n as usize] == NodeKind::Interior) {
            for &n in &tri {
                kept_star[n as usize] += 1;
            }
            cells[cell] |= bit;
            triangles.push(tri);
        }
    }
    for (k, kind) in kinds.iter_mut().enumerate() {
        if *kind == NodeKind::Boundary && kept_star[k] == 0 {
            *kind = NodeKind::Exterior;
        }
    }
    let interior: Vec<u32> = (0..nx * ny).filter(|&k| kinds[k] == NodeKind::Interior).map(|k| k as u32).collect();
    if interior.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let mut dof = vec![NO_DOF; nx * ny];
    for (d, &n) in interior.iter().enumerate() {
        dof[n as usize] = d as u32;
    }
    let volume = triangles.len() as f64 * 0.5 * h * h;
    Ok(GridDomain {
        nx,
        ny,
        h,
        origin,
        kinds,
        triangles,
        volume,
        dof,
        interior,
        cells,
        spec,
        scale: 1.0,
        stiffness: OnceLock::new(),
    })
}

/// The same mesh dilated by `t`: spacing `t·h`, volume `t²·volume`.
pub fn scale_domain(d: &GridDomain, t: f64) -> Result<GridDomain> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("scale factor must be positive, got {t}")));
    }
    Ok(GridDomain {
        nx: d.nx,
        ny: d.ny,
        h: d.h * t,
        origin: [d.origin[0] * t, d.origin[1] * t],
        kinds: d.kinds.clone(),
        triangles: d.triangles.clone(),
        volume: d.volume * t * t,
        dof: d.dof.clone(),
        interior: d.interior.clone(),
        cells: d.cells.clone(),
        spec: d.spec.clone(),
        scale: d.scale * t,
        // the p = 2 stiffness matrix is scale free in two dimensions
        stiffness: d.stiffness.clone(),
    })
}

/// Rescales `d` so that its discrete volume is 1.
pub fn normalize_volume(d: &GridDomain) -> Result<GridDomain> {
    scale_domain(d, d.volume.sqrt().recip())
}

/// Radius of the disk with the same area as `d`.
pub fn schwarz_radius(d: &GridDomain) -> f64 {
    (d.volume / std::f64::consts::PI).sqrt()
}

/// The gauge function `ρ(x) = 1 − 1/r(x)`, where `r(x)` stretches the ray from
/// `center` through `x` until it leaves the domain. Non-interior nodes get 0.
pub fn cone_field(d: &Arc<GridDomain>, center: [f64; 2]) -> Result<crate::field_ops::ScalarField> {
    if !d.contains(center[0], center[1]) {
        return Err(invalid(format!("cone centre {center:?} is not inside the domain")));
    }
    let h = d.h;
    // Analytic shapes are cast against their exact boundary; casting against
    // the staircase mesh boundary would make the gauge oscillate from ray to ray.
    let shape = &d.spec().shape;
    let scale = d.scale();
    let inside = |x: f64, y: f64| match shape {
        Shape::MaskFile { .. } => d.contains(x, y),
        s => point_in_shape(s, x / scale, y / scale, 0.0),
    };
    let mut values = vec![0.0; d.n_nodes()];
    for &node in &d.interior {
        let x = d.coords(node as usize);
        let dir = [x[0] - center[0], x[1] - center[1]];
        let len = dir[0].hypot(dir[1]);
        if len < 1e-12 * h {
            values[node as usize] = 1.0;
            continue;
        }
        let at = |s: f64| inside(center[0] + s * dir[0], center[1] + s * dir[1]);
        // march outwards in steps of h/4, then bisect
        let step = 0.25 * h / len;
        let mut lo = 1.0;
        let mut hi = lo + step;
        while at(hi) {
            lo = hi;
            hi += step;
        }
        while (hi - lo) * len > 1e-9 * h {
            let mid = 0.5 * (lo + hi);
            if at(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        values[node as usize] = 1.0 - 1.0 / r;
    }
    crate::field_ops::ScalarField::new(d.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn arc(spec: ShapeSpec) -> Arc<GridDomain> {
        Arc::new(make_domain(&spec).unwrap())
    }

    #[test]
    fn disk_volume_converges() {
        let d = make_domain(&ShapeSpec::disk(1.0, 128.0)).unwrap();
        assert!(d.volume >= 0.98 * PI && d.volume <= 1.02 * PI, "{}", d.volume);
        let coarse = make_domain(&ShapeSpec::disk(1.0, 32.0)).unwrap();
        assert!((PI - coarse.volume) > (PI - d.volume));
    }

    #[test]
    fn square_volume_and_interior() {
        let d = make_domain(&ShapeSpec::square(1.0, 64.0)).unwrap();
        assert!(d.volume >= 0.96 && d.volume <= 1.0, "{}", d.volume);
        assert_eq!(d.n_interior(), 63 * 63);
        assert_eq!(d.triangle_area(), 0.5 / 64.0 / 64.0);
    }

    #[test]
    fn every_interior_node_has_triangles_and_boundary_zero() {
        let d = make_domain(&ShapeSpec::lshape(1.0, 1.0, 0.5, 16.0)).unwrap();
        let w = d.lumped_weights();
        for &n in &d.interior {
            assert!(w[n as usize] > 0.0);
        }
        for t in &d.triangles {
            assert!(t.iter().any(|&n| d.is_interior(n as usize)));
            assert!(t.iter().all(|&n| d.kinds[n as usize] != NodeKind::Exterior));
        }
    }

    #[test]
    fn lshape_volume() {
        let d = make_domain(&ShapeSpec::lshape(1.0, 1.0, 0.5, 64.0)).unwrap();
        assert!((d.volume - 0.75).abs() < 0.02, "{}", d.volume);
    }

    #[test]
    fn mask_parsing_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.txt");
        std::fs::write(&empty, "....\n....\n").unwrap();
        assert!(matches!(make_domain(&ShapeSpec::mask_file(&empty, 4.0)), Err(Error::EmptyDomain)));
        let missing = dir.path().join("missing.txt");
        assert!(matches!(make_domain(&ShapeSpec::mask_file(&missing, 4.0)), Err(Error::Io(_))));
        let ragged = dir.path().join("ragged.txt");
        std::fs::write(&ragged, "###\n##\n").unwrap();
        assert!(matches!(make_domain(&ShapeSpec::mask_file(&ragged, 4.0)), Err(Error::Parse(_))));

        let full = dir.path().join("full.txt");
        std::fs::write(&full, "#####\n#####\n#####\n#####\n#####\n").unwrap();
        let d = make_domain(&ShapeSpec::mask_file(&full, 4.0)).unwrap();
        assert_eq!(d.n_interior(), 9);
        assert!((d.volume - 1.0 + 2.0 * d.triangle_area()).abs() < 1e-15);
    }

    #[test]
    fn mask_top_row_is_first_line() {
        let rows = parse_mask("#..\n...\n").unwrap();
        assert_eq!(rows, vec![vec![true, false, false], vec![false, false, false]]);
        assert!(parse_mask("#x#\n").is_err());
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(make_domain(&ShapeSpec::disk(-1.0, 16.0)).is_err());
        assert!(make_domain(&ShapeSpec::disk(1.0, 0.0)).is_err());
        assert!(make_domain(&ShapeSpec::lshape(1.0, 1.0, 1.0, 16.0)).is_err());
        // too small to contain an interior node
        assert!(matches!(make_domain(&ShapeSpec::disk(0.01, 16.0)), Err(Error::EmptyDomain)));
    }

    #[test]
    fn scaling_is_exact() {
        let d = make_domain(&ShapeSpec::disk(1.0, 32.0)).unwrap();
        let d2 = scale_domain(&d, 2.0).unwrap();
        assert_eq!(d2.volume / d.volume, 4.0);
        assert_eq!(schwarz_radius(&d2), 2.0 * schwarz_radius(&d));
        let d1 = scale_domain(&d, 1.0).unwrap();
        assert_eq!(d1.volume, d.volume);
        assert_eq!(d1.h, d.h);
        assert_eq!(d1.triangles, d.triangles);
        let sq = make_domain(&ShapeSpec::square(1.0, 16.0)).unwrap();
        assert_eq!(scale_domain(&sq, 0.5).unwrap().volume / sq.volume, 0.25);
        assert!(scale_domain(&d, 0.0).is_err());
        assert!(scale_domain(&d, -1.0).is_err());
        let unit = normalize_volume(&d).unwrap();
        assert!((unit.volume - 1.0).abs() < 1e-14);
    }

    #[test]
    fn schwarz_radius_examples() {
        let sq = make_domain(&ShapeSpec::square(1.0, 128.0)).unwrap();
        assert!((schwarz_radius(&sq) - (1.0 / PI).sqrt()).abs() < 5e-3);
        let disk = make_domain(&ShapeSpec::disk(1.0, 128.0)).unwrap();
        assert!((schwarz_radius(&disk) - 1.0).abs() < 0.01);
    }

    #[test]
    fn cone_field_on_the_disk() {
        let d = arc(ShapeSpec::disk(1.0, 64.0));
        let rho = cone_field(&d, [0.0, 0.0]).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..d.n_nodes() {
            let v = rho.values[k];
            assert!((0.0..=1.0).contains(&v));
            if d.is_interior(k) {
                let c = d.coords(k);
                worst = worst.max((v - (1.0 - c[0].hypot(c[1]))).abs());
                assert!(v > 0.0);
                assert!(v < 1.0 || c[0].hypot(c[1]) < 1e-12);
            } else {
                assert_eq!(v, 0.0);
            }
        }
        assert!(worst < 2.0 * d.h, "max deviation {worst}");
        let centre = d.node(d.nx / 2, d.ny / 2);
        assert_eq!(d.coords(centre), [0.0, 0.0]);
        assert_eq!(rho.values[centre], 1.0);
    }

    #[test]
    fn cone_field_on_the_square() {
        let d = arc(ShapeSpec::square(1.0, 64.0));
        let rho = cone_field(&d, [0.5, 0.5]).unwrap();
        let node = (0..d.n_nodes())
            .find(|&k| {
                let c = d.coords(k);
                (c[0] - 0.75).abs() < 1e-12 && (c[1] - 0.5).abs() < 1e-12
            })
            .unwrap();
        assert!((rho.values[node] - 0.5).abs() < 2.0 * d.h);
        assert!(cone_field(&d, [2.0, 2.0]).is_err());
    }

    #[test]
    fn cone_level_sets_have_the_cone_measure() {
        let d = arc(ShapeSpec::disk(1.0, 128.0));
        let rho = cone_field(&d, [0.0, 0.0]).unwrap();
        let w = d.lumped_weights();
        for t in [0.25, 0.5, 0.75] {
            let m: f64 = (0..d.n_nodes()).filter(|&k| rho.values[k] > t).map(|k| w[k]).sum();
            let ratio = m / d.volume;
            assert!((ratio - (1.0 - t) * (1.0 - t)).abs() < 0.03, "t={t}: {ratio}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn scaled_volume_is_t_squared(t in 0.05f64..20.0, r in 0.3f64..1.5) {
            let d = make_domain(&ShapeSpec::disk(r, 16.0)).unwrap();
            let s = scale_domain(&d, t).unwrap();
            prop_assert_eq!(s.volume, d.volume * t * t);
            prop_assert_eq!(s.h, d.h * t);
            prop_assert_eq!(&s.kinds, &d.kinds);
        }

        #[test]
        fn cone_values_are_in_unit_interval(w in 0.5f64..2.0, ht in 0.5f64..2.0) {
            let d = arc(ShapeSpec::rect(w, ht, 12.0));
            let c = d.center();
            let rho = cone_field(&d, c).unwrap();
            for k in 0..d.n_nodes() {
                let v = rho.values[k];
                prop_assert!((0.0..=1.0).contains(&v));
                if !d.is_interior(k) { prop_assert_eq!(v, 0.0); }
                if d.is_interior(k) { prop_assert!(v > 0.0); }
            }
        }
    }
}
