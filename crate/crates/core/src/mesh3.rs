//! Closed triangulated surfaces in R^3: generators, OFF input/output, signed
//! scaling and clearance checks for a hole inside an outer surface.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;

pub const MAX_SUBDIVISIONS: u32 = 6;

/// Default clearance as a fraction of the outer surface's bounding radius.
pub const CLEARANCE_FRACTION: f64 = 0.02;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("cannot read or write {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed OFF at line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("triangle {triangle} references vertex {index}, but there are only {count} vertices")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        count: usize,
    },
    #[error("surface is open: edge {0:?} has no matching opposite edge")]
    OpenSurface((usize, usize)),
    #[error(
        "edge {0:?} is used twice with the same direction (non-manifold or inconsistent winding)"
    )]
    InconsistentWinding((usize, usize)),
    #[error("surface orientation is inverted (signed volume {volume:e})")]
    InvertedOrientation { volume: f64 },
    #[error("triangle {triangle} is degenerate (area {area:e})")]
    Degenerate { triangle: usize, area: f64 },
    #[error("subdivision level {requested} exceeds the budget of {MAX_SUBDIVISIONS}")]
    SubdivisionBudget { requested: u32 },
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("the {0} surface does not contain the origin")]
    OriginOutside(&'static str),
}

/// A closed, consistently outward-oriented triangulated surface.
#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
    centroids: Vec<Vec3>,
    normals: Vec<Vec3>,
    areas: Vec<f64>,
    diameters: Vec<f64>,
}

impl TriMesh {
    /// Validates closedness, winding consistency, outward orientation and
    /// non-degeneracy, then derives per-triangle data.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if vertices.is_empty() || triangles.is_empty() {
            return Err(MeshError::BadParameter(
                "mesh has no vertices or no triangles".into(),
            ));
        }
        if vertices.iter().any(|v| !v.iter().all(|x| x.is_finite())) {
            return Err(MeshError::BadParameter(
                "vertex coordinates must be finite".into(),
            ));
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &i in tri {
                if i >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange {
                        triangle: t,
                        index: i,
                        count: vertices.len(),
                    });
                }
            }
        }

        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &triangles {
            for k in 0..3 {
                let e = (tri[k], tri[(k + 1) % 3]);
                let c = edges.entry(e).or_insert(0);
                *c += 1;
                if *c > 1 {
                    return Err(MeshError::InconsistentWinding(e));
                }
            }
        }
        let mut open: Vec<_> = edges
            .keys()
            .filter(|&&(a, b)| !edges.contains_key(&(b, a)))
            .copied()
            .collect();
        if !open.is_empty() {
            open.sort_unstable();
            return Err(MeshError::OpenSurface(open[0]));
        }

        let (lo, hi) = vertices.iter().fold(
            (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY)),
            |(lo, hi), v| (lo.inf(v), hi.sup(v)),
        );
        let scale = (hi - lo).max();
        let min_area = 1e-14 * scale * scale;

        let mut centroids = Vec::with_capacity(triangles.len());
        let mut normals = Vec::with_capacity(triangles.len());
        let mut areas = Vec::with_capacity(triangles.len());
        let mut diameters = Vec::with_capacity(triangles.len());
        let mut volume = 0.0;
        for (t, tri) in triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|i| vertices[i]);
            let cross = (b - a).cross(&(c - a));
            let area = 0.5 * cross.norm();
            if !(area > min_area) {
                return Err(MeshError::Degenerate { triangle: t, area });
            }
            volume += a.cross(&b).dot(&c) / 6.0;
            centroids.push((a + b + c) / 3.0);
            normals.push(cross / (2.0 * area));
            areas.push(area);
            diameters.push((b - a).norm().max((c - b).norm()).max((a - c).norm()));
        }
        if !(volume > 0.0) {
            return Err(MeshError::InvertedOrientation { volume });
        }
        Ok(TriMesh {
            vertices,
            triangles,
            centroids,
            normals,
            areas,
            diameters,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn centroids(&self) -> &[Vec3] {
        &self.centroids
    }

    /// Outward unit normals.
    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    /// Longest edge of each triangle.
    pub fn diameters(&self) -> &[f64] {
        &self.diameters
    }

    pub fn corners(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|tri| {
                let [a, b, c] = tri.map(|i| self.vertices[i]);
                a.cross(&b).dot(&c) / 6.0
            })
            .sum()
    }

    /// Largest vertex distance from the origin.
    pub fn bounding_radius(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn mean_edge_length(&self) -> f64 {
        let mut sum = 0.0;
        for tri in &self.triangles {
            let [a, b, c] = tri.map(|i| self.vertices[i]);
            sum += (b - a).norm() + (c - b).norm() + (a - c).norm();
        }
        sum / (3 * self.triangles.len()) as f64
    }

    pub fn max_diameter(&self) -> f64 {
        self.diameters.iter().copied().fold(0.0, f64::max)
    }

    /// Ray-crossing inside test. Points on the surface give an unspecified
    /// answer.
    pub fn contains(&self, p: &Vec3) -> bool {
        // an arbitrary direction unlikely to graze edges of generated meshes
        let dir = Vec3::new(0.5773, 0.4109, 0.7055).normalize();
        let mut crossings = 0usize;
        for t in 0..self.len() {
            let [a, b, c] = self.corners(t);
            if ray_hits_triangle(p, &dir, &a, &b, &c) {
                crossings += 1;
            }
        }
        crossings % 2 == 1
    }

    /// Distance from `p` to the surface and the index of a nearest triangle.
    pub fn distance_to(&self, p: &Vec3) -> (f64, usize) {
        self.distance_below(p, f64::INFINITY)
            .expect("an unbounded search always finds a triangle")
    }

    /// Like [`TriMesh::distance_to`], but only reports distances below `cap`.
    fn distance_below(&self, p: &Vec3, cap: f64) -> Option<(f64, usize)> {
        let mut best = cap;
        let mut arg = None;
        for t in 0..self.len() {
            // the centroid is within one diameter of every point of the triangle
            if (p - self.centroids[t]).norm() - self.diameters[t] >= best {
                continue;
            }
            let [a, b, c] = self.corners(t);
            let d = (p - closest_point_on_triangle(p, &a, &b, &c)).norm();
            if d < best {
                best = d;
                arg = Some(t);
            }
        }
        arg.map(|t| (best, t))
    }

    /// Applies `x ↦ f(x)` to every vertex, keeping connectivity.
    fn map_vertices(&self, f: impl Fn(&Vec3) -> Vec3, flip: bool) -> Result<Self, MeshError> {
        let vertices = self.vertices.iter().map(f).collect();
        let triangles = if flip {
            self.triangles.iter().map(|&[a, b, c]| [a, c, b]).collect()
        } else {
            self.triangles.clone()
        };
        TriMesh::new(vertices, triangles)
    }

    /// Summary statistics for reports.
    pub fn stats(&self) -> MeshStats {
        MeshStats {
            vertices: self.vertices.len(),
            triangles: self.triangles.len(),
            total_area: self.total_area(),
            signed_volume: self.signed_volume(),
            mean_edge_length: self.mean_edge_length(),
            max_diameter: self.max_diameter(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub vertices: usize,
    pub triangles: usize,
    pub total_area: f64,
    pub signed_volume: f64,
    pub mean_edge_length: f64,
    pub max_diameter: f64,
}

fn ray_hits_triangle(o: &Vec3, d: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> bool {
    let e1 = b - a;
    let e2 = c - a;
    let h = d.cross(&e2);
    let det = e1.dot(&h);
    if det.abs() < 1e-300 {
        return false;
    }
    let s = o - a;
    let u = s.dot(&h) / det;
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let q = s.cross(&e1);
    let v = d.dot(&q) / det;
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    e2.dot(&q) / det > 0.0
}

/// Closest point of triangle abc to p, by Voronoi-region classification.
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Subdivided icosahedron projected onto the sphere of the given radius.
pub fn icosphere(radius: f64, subdivisions: u32) -> Result<TriMesh, MeshError> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(MeshError::BadParameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let (vertices, triangles) = unit_icosphere(subdivisions)?;
    TriMesh::new(
        vertices.into_iter().map(|v| v * radius).collect(),
        triangles,
    )
}

/// The unit icosphere mapped by diag(a, b, c).
pub fn ellipsoid(a: f64, b: f64, c: f64, subdivisions: u32) -> Result<TriMesh, MeshError> {
    for (name, x) in [("a", a), ("b", b), ("c", c)] {
        if !(x > 0.0) || !x.is_finite() {
            return Err(MeshError::BadParameter(format!(
                "semi-axis {name} must be positive, got {x}"
            )));
        }
    }
    let (vertices, triangles) = unit_icosphere(subdivisions)?;
    let scale = Vec3::new(a, b, c);
    TriMesh::new(
        vertices
            .into_iter()
            .map(|v| v.component_mul(&scale))
            .collect(),
        triangles,
    )
}

fn unit_icosphere(subdivisions: u32) -> Result<(Vec<Vec3>, Vec<[usize; 3]>), MeshError> {
    if subdivisions > MAX_SUBDIVISIONS {
        return Err(MeshError::SubdivisionBudget {
            requested: subdivisions,
        });
    }
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, g, 0.0),
        (1.0, g, 0.0),
        (-1.0, -g, 0.0),
        (1.0, -g, 0.0),
        (0.0, -1.0, g),
        (0.0, 1.0, g),
        (0.0, -1.0, -g),
        (0.0, 1.0, -g),
        (g, 0.0, -1.0),
        (g, 0.0, 1.0),
        (-g, 0.0, -1.0),
        (-g, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut triangles: Vec<[usize; 3]> = vec![
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
    for _ in 0..subdivisions {
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |i: usize, j: usize, vs: &mut Vec<Vec3>| -> usize {
            let key = (i.min(j), i.max(j));
            *mids.entry(key).or_insert_with(|| {
                vs.push(((vs[i] + vs[j]) * 0.5).normalize());
                vs.len() - 1
            })
        };
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for &[a, b, c] in &triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        triangles = next;
    }
    Ok((vertices, triangles))
}

/// Splits every triangle into four at its edge midpoints. The surface itself
/// is unchanged (no projection), so a polyhedron stays exactly the same shape.
pub fn refine(mesh: &TriMesh) -> Result<TriMesh, MeshError> {
    let mut vertices = mesh.vertices.clone();
    let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |i: usize, j: usize, vs: &mut Vec<Vec3>| -> usize {
        *mids.entry((i.min(j), i.max(j))).or_insert_with(|| {
            vs.push((vs[i] + vs[j]) * 0.5);
            vs.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let ab = mid(a, b, &mut vertices);
        let bc = mid(b, c, &mut vertices);
        let ca = mid(c, a, &mut vertices);
        triangles.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
    }
    TriMesh::new(vertices, triangles)
}

/// The image of `mesh` under x ↦ ε·x, with winding reversed for ε < 0 so that
/// normals stay outward.
pub fn scale_signed(mesh: &TriMesh, eps: f64) -> Result<TriMesh, MeshError> {
    if eps == 0.0 || !eps.is_finite() {
        return Err(MeshError::BadParameter(format!(
            "scale factor must be nonzero and finite, got {eps}"
        )));
    }
    mesh.map_vertices(|v| v * eps, eps < 0.0)
}

/// True when the vertex set is invariant under x ↦ −x (to 1e-9 relative).
pub fn is_point_symmetric(mesh: &TriMesh) -> bool {
    let scale = mesh.bounding_radius().max(f64::MIN_POSITIVE);
    let key = |v: &Vec3| -> [i64; 3] { [0, 1, 2].map(|k| (v[k] / scale * 1e9).round() as i64) };
    let keys: std::collections::HashSet<[i64; 3]> = mesh.vertices.iter().map(key).collect();
    mesh.vertices.iter().all(|v| keys.contains(&key(&-v)))
}

pub fn write_off(mesh: &TriMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "OFF");
    let _ = writeln!(s, "{} {} 0", mesh.vertices.len(), mesh.triangles.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:?} {:?} {:?}", v.x, v.y, v.z);
    }
    for [a, b, c] in &mesh.triangles {
        let _ = writeln!(s, "3 {a} {b} {c}");
    }
    s
}

pub fn save_off(mesh: &TriMesh, path: &Path) -> Result<(), MeshError> {
    std::fs::write(path, write_off(mesh)).map_err(|e| MeshError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn load_off(path: &Path) -> Result<TriMesh, MeshError> {
    let text = std::fs::read_to_string(path).map_err(|e| MeshError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_off(&text)
}

/// Strict ASCII OFF: "OFF", a counts line, vertex lines, then "3 i j k"
/// faces. Blank lines are the only thing tolerated between records.
pub fn parse_off(text: &str) -> Result<TriMesh, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let bad = |line: usize, message: &str| MeshError::Malformed {
        line,
        message: message.to_string(),
    };
    let eof = || bad(text.lines().count(), "unexpected end of file");

    let (ln, header) = lines.next().ok_or_else(eof)?;
    if header != "OFF" {
        return Err(bad(ln, "expected header \"OFF\""));
    }
    let (ln, counts) = lines.next().ok_or_else(eof)?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad(ln, "counts must be non-negative integers"))?;
    let [nv, nf, _ne] = counts[..] else {
        return Err(bad(ln, "counts line needs exactly three integers"));
    };

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(eof)?;
        let xs: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad(ln, "vertex coordinates must be numbers"))?;
        let [x, y, z] = xs[..] else {
            return Err(bad(ln, "vertex line needs exactly three coordinates"));
        };
        vertices.push(Vec3::new(x, y, z));
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, l) = lines.next().ok_or_else(eof)?;
        let ix: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad(ln, "face entries must be non-negative integers"))?;
        let [3, a, b, c] = ix[..] else {
            return Err(bad(ln, "face line must be \"3 i j k\""));
        };
        triangles.push([a, b, c]);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(bad(ln, "trailing content after the last face"));
    }
    TriMesh::new(vertices, triangles)
}

/// Distance between the surfaces ε·inner and outer, and whether the scaled
/// inner surface lies inside the outer one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClearanceReport {
    pub eps: f64,
    pub clearance: f64,
    pub clearance_min: f64,
    pub inside: bool,
    pub admissible: bool,
}

/// A unit-scale hole surface and an outer surface, both around the origin.
#[derive(Clone, Debug)]
pub struct GeometryPair {
    pub inner: TriMesh,
    pub outer: TriMesh,
    pub clearance_min: f64,
    pub eps_max: f64,
}

impl GeometryPair {
    pub fn new(inner: TriMesh, outer: TriMesh) -> Result<Self, MeshError> {
        let clearance_min = CLEARANCE_FRACTION * outer.bounding_radius();
        Self::with_clearance(inner, outer, clearance_min)
    }

    pub fn with_clearance(
        inner: TriMesh,
        outer: TriMesh,
        clearance_min: f64,
    ) -> Result<Self, MeshError> {
        let origin = Vec3::zeros();
        if !inner.contains(&origin) {
            return Err(MeshError::OriginOutside("inner"));
        }
        if !outer.contains(&origin) {
            return Err(MeshError::OriginOutside("outer"));
        }
        if !(clearance_min >= 0.0) {
            return Err(MeshError::BadParameter(format!(
                "clearance_min must be non-negative, got {clearance_min}"
            )));
        }
        let mut pair = GeometryPair {
            inner,
            outer,
            clearance_min,
            eps_max: 0.0,
        };
        pair.eps_max = pair.bisect_eps_max(1.0).min(pair.bisect_eps_max(-1.0));
        Ok(pair)
    }

    /// Largest |ε| with the given sign that still passes the clearance test.
    fn bisect_eps_max(&self, sign: f64) -> f64 {
        let inner_min = self
            .inner
            .vertices
            .iter()
            .map(|v| v.norm())
            .fold(f64::INFINITY, f64::min);
        let mut lo = 0.0;
        let mut hi = self.outer.bounding_radius() / inner_min;
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if self.admissibility(sign * mid).admissible {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Vertex-to-surface distances in both directions give the clearance.
    pub fn admissibility(&self, eps: f64) -> ClearanceReport {
        let fail = |clearance| ClearanceReport {
            eps,
            clearance,
            clearance_min: self.clearance_min,
            inside: false,
            admissible: false,
        };
        if eps == 0.0 || !eps.is_finite() {
            return fail(f64::NAN);
        }
        let first = self.inner.vertices[0] * eps;
        if !self.outer.contains(&first) {
            return fail(0.0);
        }
        let mut best = f64::INFINITY;
        for v in &self.inner.vertices {
            if let Some((d, _)) = self.outer.distance_below(&(v * eps), best) {
                best = d;
            }
        }
        let inv = 1.0 / eps;
        for v in &self.outer.vertices {
            // distances to ε·inner are |ε| times distances to inner at v/ε
            if let Some((d, _)) = self.inner.distance_below(&(v * inv), best / eps.abs()) {
                best = d * eps.abs();
            }
        }
        ClearanceReport {
            eps,
            clearance: best,
            clearance_min: self.clearance_min,
            inside: true,
            admissible: best >= self.clearance_min,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn icosahedron_counts() {
        let m = icosphere(1.0, 0).unwrap();
        assert_eq!((m.len(), m.vertices().len()), (20, 12));
        let m = icosphere(1.0, 2).unwrap();
        assert_eq!(m.len(), 320);
        assert!((m.total_area() / (4.0 * PI) - 1.0).abs() < 0.02);
        assert!(icosphere(1.0, 7).is_err());
        assert!(icosphere(0.0, 1).is_err());
    }

    #[test]
    fn midpoint_refinement_keeps_the_surface() {
        let m = icosphere(1.0, 0).unwrap();
        let r = refine(&m).unwrap();
        assert_eq!((r.len(), r.vertices().len()), (80, 42));
        assert!((r.total_area() - m.total_area()).abs() < 1e-12);
        assert!((r.signed_volume() - m.signed_volume()).abs() < 1e-12);
        assert!((r.mean_edge_length() / m.mean_edge_length() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn radius_scaling() {
        let a = icosphere(1.0, 1).unwrap();
        let b = icosphere(2.0, 1).unwrap();
        for (x, y) in a.areas().iter().zip(b.areas()) {
            assert!((y / x - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ellipsoid_volume() {
        let e = ellipsoid(2.0, 1.0, 1.0, 3).unwrap();
        let want = 4.0 / 3.0 * PI * 2.0;
        assert!((e.signed_volume() / want - 1.0).abs() < 0.02);
        assert_eq!(
            ellipsoid(1.0, 1.0, 1.0, 2).unwrap(),
            icosphere(1.0, 2).unwrap()
        );
        assert!(ellipsoid(0.0, 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn signed_scaling() {
        let m = icosphere(1.0, 2).unwrap();
        assert_eq!(scale_signed(&m, 1.0).unwrap(), m);
        let r = scale_signed(&m, -1.0).unwrap();
        assert!(r.signed_volume() > 0.0);
        let h = scale_signed(&m, 0.5).unwrap();
        assert!((h.total_area() / m.total_area() - 0.25).abs() < 1e-12);
        assert!(scale_signed(&m, 0.0).is_err());
        assert!(is_point_symmetric(&m));
        assert!(!is_point_symmetric(
            &icosphere(1.0, 0)
                .unwrap()
                .map_vertices(|v| v + Vec3::new(0.1, 0.0, 0.0), false)
                .unwrap()
        ));
    }

    #[test]
    fn off_round_trip_and_errors() {
        let m = icosphere(1.0, 1).unwrap();
        let back = parse_off(&write_off(&m)).unwrap();
        assert_eq!(back, m);

        let tet = "OFF\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n";
        assert!(parse_off(tet).is_ok());
        let open = "OFF\n4 3 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n";
        assert!(matches!(parse_off(open), Err(MeshError::OpenSurface(_))));
        let inverted =
            "OFF\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 2\n3 0 3 1\n3 0 2 3\n3 1 3 2\n";
        assert!(matches!(
            parse_off(inverted),
            Err(MeshError::InvertedOrientation { .. })
        ));
        assert!(matches!(
            parse_off("OFF\n1 0 0\n0 0\n"),
            Err(MeshError::Malformed { line: 3, .. })
        ));
        assert!(matches!(
            parse_off("COFF\n"),
            Err(MeshError::Malformed { line: 1, .. })
        ));
        let quad = "OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n4 0 1 2 3\n";
        assert!(matches!(
            parse_off(quad),
            Err(MeshError::Malformed { line: 7, .. })
        ));
        let oob = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 5\n";
        assert!(matches!(
            parse_off(oob),
            Err(MeshError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn inside_test_and_distance() {
        let m = icosphere(1.0, 2).unwrap();
        assert!(m.contains(&Vec3::zeros()));
        assert!(m.contains(&Vec3::new(0.3, -0.2, 0.5)));
        assert!(!m.contains(&Vec3::new(1.2, 0.0, 0.0)));
        let (d, _) = m.distance_to(&Vec3::new(0.0, 0.0, 2.0));
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clearance_of_unit_pair() {
        let pair =
            GeometryPair::new(icosphere(1.0, 3).unwrap(), icosphere(1.0, 3).unwrap()).unwrap();
        let rep = pair.admissibility(0.5);
        assert!(rep.admissible && (rep.clearance - 0.5).abs() < 0.01);
        let rep = pair.admissibility(-0.5);
        assert!(rep.admissible && (rep.clearance - 0.5).abs() < 0.01);
        let tight = GeometryPair::with_clearance(
            icosphere(1.0, 2).unwrap(),
            icosphere(1.0, 2).unwrap(),
            0.05,
        )
        .unwrap();
        assert!(!tight.admissibility(0.99).admissible);
        assert!(pair.eps_max > 0.95 && pair.eps_max < 0.99);
    }
}
