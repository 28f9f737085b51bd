use std::collections::HashMap;
use std::sync::OnceLock;

use super::bvh::{Aabb, Bvh};
use super::Vec3;
use crate::{Error, Result};

/// Normalized meshes fit in `[-NORMALIZED_HALF_EXTENT, NORMALIZED_HALF_EXTENT]³`.
pub const NORMALIZED_HALF_EXTENT: f64 = 0.45;

/// Faces with area below this fraction of the squared bbox diagonal are
/// treated as degenerate and dropped.
const DEGENERATE_AREA_REL: f64 = 1e-14;

/// Indexed triangle mesh with cached per-face normals and areas.
///
/// The BVH is built lazily on first query and shared by all threads.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    face_normals: Vec<Vec3>,
    face_areas: Vec<f64>,
    bbox: Aabb,
    dropped_degenerate: usize,
    bvh: OnceLock<Bvh>,
}

impl Mesh {
    /// Builds a mesh, dropping zero-area faces. An empty face list is allowed.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Self> {
        let nv = vertices.len();
        if let Some(v) = vertices.iter().find(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::Parse(format!("non-finite vertex {v:?}")));
        }
        for f in &faces {
            if f.iter().any(|&i| i as usize >= nv) {
                return Err(Error::Parse(format!(
                    "face {f:?} references a vertex beyond {nv}"
                )));
            }
        }
        let bbox = Aabb::from_points(vertices.iter().copied());
        let diag2 = if nv == 0 { 0.0 } else { bbox.diagonal().norm_squared() };
        let area_floor = DEGENERATE_AREA_REL * diag2;

        let mut kept = Vec::with_capacity(faces.len());
        let mut normals = Vec::with_capacity(faces.len());
        let mut areas = Vec::with_capacity(faces.len());
        let mut dropped = 0;
        for f in faces {
            let [a, b, c] = f.map(|i| vertices[i as usize]);
            let cross = (b - a).cross(&(c - a));
            let len = cross.norm();
            let area = 0.5 * len;
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] || area <= area_floor || len == 0.0 {
                dropped += 1;
                continue;
            }
            kept.push(f);
            normals.push(cross / len);
            areas.push(area);
        }
        if dropped > 0 {
            log::warn!("dropped {dropped} degenerate face(s)");
        }
        Ok(Self {
            vertices,
            faces: kept,
            face_normals: normals,
            face_areas: areas,
            bbox,
            dropped_degenerate: dropped,
            bvh: OnceLock::new(),
        })
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), Vec::new()).expect("empty mesh is valid")
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn face_normals(&self) -> &[Vec3] {
        &self.face_normals
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    pub fn bbox(&self) -> Aabb {
        self.bbox
    }

    /// Number of zero-area faces removed at construction.
    pub fn dropped_degenerate(&self) -> usize {
        self.dropped_degenerate
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    #[inline]
    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        self.faces[face].map(|i| self.vertices[i as usize])
    }

    pub fn centroid(&self, face: usize) -> Vec3 {
        let [a, b, c] = self.triangle(face);
        (a + b + c) / 3.0
    }

    pub fn surface_area(&self) -> f64 {
        self.face_areas.iter().sum()
    }

    /// Enclosed volume by the divergence theorem; meaningful for closed,
    /// outward-oriented meshes.
    pub fn volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| self.vertices[i as usize]);
                a.dot(&b.cross(&c))
            })
            .sum::<f64>()
            / 6.0
    }

    pub fn bvh(&self) -> &Bvh {
        self.bvh.get_or_init(|| Bvh::build(self))
    }

    /// Returns a copy with every vertex mapped through `f`.
    pub fn map_vertices(&self, f: impl Fn(&Vec3) -> Vec3) -> Result<Mesh> {
        Mesh::new(self.vertices.iter().map(f).collect(), self.faces.clone())
    }

    pub fn translated(&self, t: Vec3) -> Result<Mesh> {
        self.map_vertices(|v| v + t)
    }

    pub fn scaled(&self, s: f64) -> Result<Mesh> {
        self.map_vertices(|v| v * s)
    }

    /// Concatenates two meshes into one vertex/face list.
    pub fn merged(&self, other: &Mesh) -> Result<Mesh> {
        let off = self.vertices.len() as u32;
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(other.faces.iter().map(|f| f.map(|i| i + off)));
        Mesh::new(vertices, faces)
    }

    /// Edge-manifoldness diagnostics.
    pub fn watertight_report(&self) -> WatertightReport {
        let mut directed: HashMap<(u32, u32), u32> = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                *directed.entry((f[k], f[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        let mut boundary_edges = 0;
        let mut non_manifold_edges = 0;
        let mut misoriented_edges = 0;
        for (&(a, b), &n) in &directed {
            if a > b && directed.contains_key(&(b, a)) {
                continue;
            }
            let back = directed.get(&(b, a)).copied().unwrap_or(0);
            match (n, back) {
                (1, 1) => {}
                (1, 0) | (0, 1) => boundary_edges += 1,
                (2, 0) | (0, 2) => misoriented_edges += 1,
                _ => non_manifold_edges += 1,
            }
        }
        WatertightReport {
            boundary_edges,
            non_manifold_edges,
            misoriented_edges,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WatertightReport {
    pub boundary_edges: usize,
    pub non_manifold_edges: usize,
    pub misoriented_edges: usize,
}

impl WatertightReport {
    pub fn is_watertight(&self) -> bool {
        self.boundary_edges == 0 && self.non_manifold_edges == 0 && self.misoriented_edges == 0
    }
}

/// Maps original coordinates `p` to `(p + translation) * scale`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormalizationTransform {
    pub translation: [f64; 3],
    pub scale: f64,
}

impl NormalizationTransform {
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        (p + Vec3::from(self.translation)) * self.scale
    }

    pub fn invert(&self, p: &Vec3) -> Vec3 {
        p / self.scale - Vec3::from(self.translation)
    }
}

/// Centers the bbox at the origin and scales the longest axis to
/// `[-0.45, 0.45]`.
pub fn normalize_mesh(mesh: &Mesh) -> Result<(Mesh, NormalizationTransform)> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    // Only vertices referenced by faces count toward the extent.
    let used = Aabb::from_points(mesh.faces.iter().flatten().map(|&i| mesh.vertices[i as usize]));
    let extent = used.max - used.min;
    let longest = extent.max();
    if longest <= 0.0 || !longest.is_finite() {
        return Err(Error::Degenerate("mesh has zero extent".into()));
    }
    let center = (used.min + used.max) * 0.5;
    let tf = NormalizationTransform {
        translation: (-center).into(),
        scale: 2.0 * NORMALIZED_HALF_EXTENT / longest,
    };
    let out = mesh.map_vertices(|v| tf.apply(v))?;
    Ok((out, tf))
}
