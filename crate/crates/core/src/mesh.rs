//! Affine triangular meshes: connectivity, face geometry, structured
//! generation, and rigid translation.
//!
//! Local face `f` of triangle `[v0, v1, v2]` runs from vertex `f` to vertex
//! `(f + 1) % 3`, matching the reference-element face numbering. Each face is
//! stored once, owned by its lower-index element, with the unit normal
//! pointing out of that element.

use crate::error::{Error, Result};
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
#[allow(unused_imports)] // redundant when num-traits is built with `std`
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryTag {
    Wall,
    Farfield,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Element { elem: usize, local_face: usize },
    Boundary(BoundaryTag),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub left: usize,
    pub left_face: usize,
    pub right: Neighbor,
    pub normal: [f64; 2],
    pub length: f64,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        matches!(self.right, Neighbor::Boundary(_))
    }
}

/// Geometry of the affine map `x = v0 + (r+1)/2 (v1-v0) + (s+1)/2 (v2-v0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    pub inradius: f64,
    /// `[[x_r, x_s], [y_r, y_s]]`.
    pub jacobian: [[f64; 2]; 2],
    /// `[[r_x, r_y], [s_x, s_y]]`.
    pub inverse: [[f64; 2]; 2],
    pub det: f64,
}

impl ElementGeometry {
    fn from_vertices(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Self {
        let xr = 0.5 * (b[0] - a[0]);
        let xs = 0.5 * (c[0] - a[0]);
        let yr = 0.5 * (b[1] - a[1]);
        let ys = 0.5 * (c[1] - a[1]);
        let det = xr * ys - xs * yr;
        let area = 2.0 * det;
        let perimeter = dist(a, b) + dist(b, c) + dist(c, a);
        ElementGeometry {
            area,
            inradius: 2.0 * area / perimeter,
            jacobian: [[xr, xs], [yr, ys]],
            inverse: [[ys / det, -xs / det], [-yr / det, xr / det]],
            det,
        }
    }

    /// Physical gradient from reference derivatives.
    pub fn physical_gradient(&self, dr: f64, ds: f64) -> [f64; 2] {
        let [[rx, ry], [sx, sy]] = self.inverse;
        [rx * dr + sx * ds, ry * dr + sy * ds]
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub faces: Vec<Face>,
    pub geometry: Vec<ElementGeometry>,
    /// Face id of each local face.
    pub element_faces: Vec<[usize; 3]>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Whether `p` lies strictly inside segment `ab`.
fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2;
    if t <= 1e-9 || t >= 1.0 - 1e-9 {
        return false;
    }
    let cross = (p[0] - a[0]) * dy - (p[1] - a[1]) * dx;
    cross.abs() <= 1e-9 * len2
}

impl Mesh {
    /// Builds connectivity from triangles and tagged boundary edges.
    /// Clockwise triangles are reoriented.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        tagged_edges: &[([usize; 2], BoundaryTag)],
    ) -> Result<Mesh> {
        if triangles.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let mut tris = triangles;
        for (k, t) in tris.iter_mut().enumerate() {
            if let Some(&v) = t.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::VertexIndex(v));
            }
            let [a, b, c] = t.map(|v| vertices[v]);
            let twice = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            let scale = dist(a, b).max(dist(b, c)).max(dist(c, a));
            if twice.abs() <= 1e-14 * scale * scale {
                return Err(Error::DegenerateElement(k));
            }
            if twice < 0.0 {
                t.swap(1, 2);
            }
        }

        let mut edges: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (k, t) in tris.iter().enumerate() {
            for f in 0..3 {
                edges
                    .entry(edge_key(t[f], t[(f + 1) % 3]))
                    .or_default()
                    .push((k, f));
            }
        }
        let mut tags: BTreeMap<(usize, usize), BoundaryTag> = BTreeMap::new();
        for &([a, b], tag) in tagged_edges {
            tags.insert(edge_key(a, b), tag);
        }
        for (&(a, b), owners) in &edges {
            if owners.len() > 2 {
                return Err(Error::OverSharedEdge(a, b));
            }
            if owners.len() == 1 {
                let (pa, pb) = (vertices[a], vertices[b]);
                if let Some(node) = (0..vertices.len())
                    .find(|&v| v != a && v != b && on_segment(vertices[v], pa, pb))
                {
                    return Err(Error::HangingNode { node, a, b });
                }
            }
        }
        if let Some((&(a, b), _)) = edges
            .iter()
            .find(|(e, o)| o.len() == 1 && !tags.contains_key(e))
        {
            return Err(Error::UntaggedBoundary(a, b));
        }
        for &(a, b) in tags.keys() {
            if edges.get(&(a, b)).is_none_or(|o| o.len() != 1) {
                return Err(Error::StrayTag(a, b));
            }
        }

        let geometry: Vec<ElementGeometry> = tris
            .iter()
            .map(|t| ElementGeometry::from_vertices(vertices[t[0]], vertices[t[1]], vertices[t[2]]))
            .collect();
        let mut faces = Vec::new();
        let mut element_faces = alloc::vec![[usize::MAX; 3]; tris.len()];
        for k in 0..tris.len() {
            for f in 0..3 {
                if element_faces[k][f] != usize::MAX {
                    continue;
                }
                let (a, b) = (tris[k][f], tris[k][(f + 1) % 3]);
                let owners = &edges[&edge_key(a, b)];
                let right = match owners.iter().find(|&&(e, _)| e != k) {
                    Some(&(elem, local_face)) => {
                        element_faces[elem][local_face] = faces.len();
                        Neighbor::Element { elem, local_face }
                    }
                    None => Neighbor::Boundary(tags[&edge_key(a, b)]),
                };
                element_faces[k][f] = faces.len();
                let (pa, pb) = (vertices[a], vertices[b]);
                let length = dist(pa, pb);
                let normal = [(pb[1] - pa[1]) / length, -(pb[0] - pa[0]) / length];
                faces.push(Face {
                    left: k,
                    left_face: f,
                    right,
                    normal,
                    length,
                });
            }
        }
        Ok(Mesh {
            vertices,
            triangles: tris,
            faces,
            geometry,
            element_faces,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.triangles.len()
    }

    /// Outward unit normal of local face `f` of element `k`.
    pub fn outward_normal(&self, k: usize, f: usize) -> [f64; 2] {
        let face = &self.faces[self.element_faces[k][f]];
        if face.left == k && face.left_face == f {
            face.normal
        } else {
            [-face.normal[0], -face.normal[1]]
        }
    }

    /// Physical position of reference point `rs` in element `k`.
    pub fn map_point(&self, k: usize, rs: [f64; 2]) -> [f64; 2] {
        let v0 = self.vertices[self.triangles[k][0]];
        let [[xr, xs], [yr, ys]] = self.geometry[k].jacobian;
        let (a, b) = (rs[0] + 1.0, rs[1] + 1.0);
        [v0[0] + xr * a + xs * b, v0[1] + yr * a + ys * b]
    }

    /// Reference coordinates of physical point `x` under element `k`'s map.
    pub fn inverse_map(&self, k: usize, x: [f64; 2]) -> [f64; 2] {
        let v0 = self.vertices[self.triangles[k][0]];
        let [[rx, ry], [sx, sy]] = self.geometry[k].inverse;
        let (dx, dy) = (x[0] - v0[0], x[1] - v0[1]);
        [rx * dx + ry * dy - 1.0, sx * dx + sy * dy - 1.0]
    }

    /// Element containing `x` (with tolerance `tol` in reference
    /// coordinates) and the reference coordinates of `x` in it.
    pub fn locate(&self, x: [f64; 2], tol: f64) -> Option<(usize, [f64; 2])> {
        (0..self.num_elements()).find_map(|k| {
            let rs = self.inverse_map(k, x);
            (rs[0] >= -1.0 - tol && rs[1] >= -1.0 - tol && rs[0] + rs[1] <= tol).then_some((k, rs))
        })
    }

    /// Sets every boundary face to `tag`.
    pub fn retag_boundary(&mut self, tag: BoundaryTag) {
        for face in &mut self.faces {
            if face.is_boundary() {
                face.right = Neighbor::Boundary(tag);
            }
        }
    }

    /// Shifts every vertex by `d`. Face and element geometry is left
    /// untouched, so it stays bitwise identical.
    pub fn translate(&mut self, d: [f64; 2]) {
        for v in &mut self.vertices {
            v[0] += d[0];
            v[1] += d[1];
        }
    }

    pub fn translated(&self, d: [f64; 2]) -> Mesh {
        let mut m = self.clone();
        m.translate(d);
        m
    }

    pub fn has_tag(&self, tag: BoundaryTag) -> bool {
        self.faces
            .iter()
            .any(|f| f.right == Neighbor::Boundary(tag))
    }

    /// Largest element diameter.
    pub fn max_diameter(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|v| self.vertices[v]);
                dist(a, b).max(dist(b, c)).max(dist(c, a))
            })
            .fold(0.0, f64::max)
    }
}

/// Rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect {
        x0: 0.0,
        x1: 1.0,
        y0: 0.0,
        y1: 1.0,
    };
}

/// Splits an `nx x ny` grid of rectangles into two triangles each along the
/// anti-diagonal. All boundary edges are tagged far-field. With
/// `skew_layer`, the middle row of cells is flattened to one eighth of the
/// smaller cell width (aspect ratio 8).
pub fn generate_structured(nx: usize, ny: usize, domain: Rect, skew_layer: bool) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidParameter("structured mesh needs nx, ny >= 1"));
    }
    let (w, h) = (domain.x1 - domain.x0, domain.y1 - domain.y0);
    if !(w > 0.0 && h > 0.0 && w.is_finite() && h.is_finite()) {
        return Err(Error::DegenerateDomain);
    }
    if skew_layer && ny < 2 {
        return Err(Error::InvalidParameter("skew layer needs ny >= 2"));
    }
    let xs: Vec<f64> = (0..=nx)
        .map(|i| domain.x0 + w * i as f64 / nx as f64)
        .collect();
    let ys: Vec<f64> = if skew_layer {
        let thin = (w / nx as f64).min(h / ny as f64) / 8.0;
        let regular = (h - thin) / (ny - 1) as f64;
        let layer = ny / 2;
        let mut y = domain.y0;
        let mut ys = alloc::vec![y];
        for j in 0..ny {
            y += if j == layer { thin } else { regular };
            ys.push(if j + 1 == ny { domain.y1 } else { y });
        }
        ys
    } else {
        (0..=ny)
            .map(|j| domain.y0 + h * j as f64 / ny as f64)
            .collect()
    };
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for &y in &ys {
        for &x in &xs {
            vertices.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            triangles.push([id(i, j), id(i + 1, j), id(i, j + 1)]);
            triangles.push([id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let mut tagged = Vec::new();
    for i in 0..nx {
        tagged.push(([id(i, 0), id(i + 1, 0)], BoundaryTag::Farfield));
        tagged.push(([id(i, ny), id(i + 1, ny)], BoundaryTag::Farfield));
    }
    for j in 0..ny {
        tagged.push(([id(0, j), id(0, j + 1)], BoundaryTag::Farfield));
        tagged.push(([id(nx, j), id(nx, j + 1)], BoundaryTag::Farfield));
    }
    Mesh::new(vertices, triangles, &tagged)
}
