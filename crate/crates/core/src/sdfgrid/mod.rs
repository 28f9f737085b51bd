//! Signed-distance grids over [-0.5, 0.5]³ and marching-cubes extraction.

mod tables;

use std::collections::HashMap;

use ndarray::Array3;

pub use crate::geometry::{obj_string, write_obj};
use crate::geometry::{signed_distance, Mesh};
use crate::{Error, Result, Vec3};

use tables::TRI_TABLE;

/// Resolutions of the multiresolution stack.
pub const PYRAMID: [usize; 4] = [8, 16, 32, 64];

/// Signed distances sampled at the `R³` cell centers of [-0.5, 0.5]³.
#[derive(Debug, Clone, PartialEq)]
pub struct SdfGrid {
    values: Array3<f64>,
}

impl SdfGrid {
    /// Wraps an `R × R × R` tensor indexed `[x, y, z]`.
    pub fn from_values(values: Array3<f64>) -> Result<Self> {
        let (a, b, c) = values.dim();
        if a != b || b != c || a < 2 {
            return Err(Error::ShapeMismatch(format!("SDF grid must be cubic with R ≥ 2, got {a}×{b}×{c}")));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("SDF grid contains non-finite values"));
        }
        Ok(Self { values })
    }

    /// Grid of `f` evaluated at every cell center.
    pub fn from_fn(resolution: usize, f: impl Fn(Vec3) -> f64) -> Result<Self> {
        let h = 1.0 / resolution as f64;
        let o = -0.5 + 0.5 * h;
        Self::from_values(Array3::from_shape_fn((resolution, resolution, resolution), |(i, j, k)| {
            f(Vec3::new(o + i as f64 * h, o + j as f64 * h, o + k as f64 * h))
        }))
    }

    pub fn resolution(&self) -> usize {
        self.values.dim().0
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.resolution() as f64
    }

    /// Center of cell (0, 0, 0).
    pub fn origin(&self) -> Vec3 {
        Vec3::repeat(-0.5 + 0.5 * self.spacing())
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin() + Vec3::new(i as f64, j as f64, k as f64) * self.spacing()
    }

    pub fn values(&self) -> &Array3<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array3<f64> {
        self.values
    }

    /// Trilinear interpolation between cell centers; points beyond the
    /// outermost centers are clamped onto them.
    pub fn trilinear(&self, p: &Vec3) -> f64 {
        let r = self.resolution();
        let h = self.spacing();
        let coord = |x: f64| {
            let g = ((x - (-0.5 + 0.5 * h)) / h).clamp(0.0, (r - 1) as f64);
            let i = (g.floor() as usize).min(r - 2);
            (i, g - i as f64)
        };
        let (i, fx) = coord(p.x);
        let (j, fy) = coord(p.y);
        let (k, fz) = coord(p.z);
        let v = |a: usize, b: usize, c: usize| self.values[[i + a, j + b, k + c]];
        let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
        let x00 = lerp(v(0, 0, 0), v(1, 0, 0), fx);
        let x10 = lerp(v(0, 1, 0), v(1, 1, 0), fx);
        let x01 = lerp(v(0, 0, 1), v(1, 0, 1), fx);
        let x11 = lerp(v(0, 1, 1), v(1, 1, 1), fx);
        lerp(lerp(x00, x10, fy), lerp(x01, x11, fy), fz)
    }
}

/// Signed distance to `mesh` at every cell center (negative inside).
pub fn sample_sdf_grid(mesh: &Mesh, resolution: usize) -> Result<SdfGrid> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    if resolution < 2 {
        return Err(Error::invalid("grid resolution must be at least 2"));
    }
    let r = resolution;
    let h = 1.0 / r as f64;
    let o = -0.5 + 0.5 * h;
    let queries: Vec<Vec3> = (0..r * r * r)
        .map(|n| {
            let (i, j, k) = (n / (r * r), (n / r) % r, n % r);
            Vec3::new(o + i as f64 * h, o + j as f64 * h, o + k as f64 * h)
        })
        .collect();
    let d = signed_distance(mesh, &queries)?;
    SdfGrid::from_values(Array3::from_shape_vec((r, r, r), d).expect("r³ values"))
}

/// Cube corner offsets, Bourke numbering.
const CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

const EDGES: [[usize; 2]; 12] = [
    [0, 1],
    [1, 2],
    [2, 3],
    [3, 0],
    [4, 5],
    [5, 6],
    [6, 7],
    [7, 4],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
];

/// Marching cubes over the cell-center lattice. Corners with value `< iso`
/// count as inside; the surface is oriented with normals toward larger
/// values. Vertices on shared lattice edges are welded. A grid without a
/// crossing yields an empty mesh.
pub fn extract_mesh(grid: &SdfGrid, iso: f64) -> Result<Mesh> {
    if !iso.is_finite() {
        return Err(Error::invalid("iso level must be finite"));
    }
    let r = grid.resolution();
    let v = grid.values();
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut faces: Vec<[u32; 3]> = Vec::new();
    let mut welded: HashMap<(usize, usize, usize, u8), u32> = HashMap::new();
    for i in 0..r - 1 {
        for j in 0..r - 1 {
            for k in 0..r - 1 {
                let idx = |c: usize| [i + CORNERS[c][0], j + CORNERS[c][1], k + CORNERS[c][2]];
                let mut case = 0usize;
                for c in 0..8 {
                    if v[idx(c)] < iso {
                        case |= 1 << c;
                    }
                }
                let tris = &TRI_TABLE[case];
                if tris[0] < 0 {
                    continue;
                }
                let mut edge_vertex = |e: usize| -> u32 {
                    let (mut a, mut b) = (idx(EDGES[e][0]), idx(EDGES[e][1]));
                    if b < a {
                        std::mem::swap(&mut a, &mut b);
                    }
                    let axis = (0..3).find(|&d| a[d] != b[d]).expect("edge spans one axis") as u8;
                    *welded.entry((a[0], a[1], a[2], axis)).or_insert_with(|| {
                        let (va, vb) = (v[a], v[b]);
                        let t = if va == vb { 0.5 } else { ((iso - va) / (vb - va)).clamp(0.0, 1.0) };
                        let pa = grid.point(a[0], a[1], a[2]);
                        let pb = grid.point(b[0], b[1], b[2]);
                        vertices.push(pa + (pb - pa) * t);
                        (vertices.len() - 1) as u32
                    })
                };
                for t in tris.chunks(3).take_while(|t| t[0] >= 0) {
                    let a = edge_vertex(t[0] as usize);
                    let b = edge_vertex(t[1] as usize);
                    let c = edge_vertex(t[2] as usize);
                    faces.push([a, c, b]);
                }
            }
        }
    }
    if faces.is_empty() {
        return Ok(Mesh::empty());
    }
    Mesh::new(vertices, faces)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(r: f64, res: usize) -> SdfGrid {
        SdfGrid::from_fn(res, |p| p.norm() - r).unwrap()
    }

    #[test]
    fn sphere_extraction_is_closed_and_outward() {
        let m = extract_mesh(&sphere(0.3, 32), 0.0).unwrap();
        assert!(m.watertight_report().is_watertight(), "{:?}", m.watertight_report());
        let want = 4.0 / 3.0 * std::f64::consts::PI * 0.027;
        assert!((m.volume() - want).abs() < 0.02 * want, "{} vs {want}", m.volume());
    }

    #[test]
    fn halfspace_is_planar() {
        let g = SdfGrid::from_fn(16, |p| p.z).unwrap();
        let m = extract_mesh(&g, 0.0).unwrap();
        assert!(!m.is_empty());
        assert!(m.vertices().iter().all(|v| v.z.abs() < 1e-6));
    }

    #[test]
    fn no_crossing_gives_empty_mesh() {
        let g = SdfGrid::from_fn(8, |_| 1.0).unwrap();
        assert!(extract_mesh(&g, 0.0).unwrap().is_empty());
    }

    #[test]
    fn every_case_is_watertight_inside_a_padded_block() {
        // each 2×2×2 corner pattern, embedded in a grid padded with
        // outside values, must produce a closed surface
        for case in 1..255usize {
            let mut vals = Array3::from_elem((4, 4, 4), 1.0);
            for (c, off) in CORNERS.iter().enumerate() {
                if case & (1 << c) != 0 {
                    vals[[1 + off[0], 1 + off[1], 1 + off[2]]] = -1.0;
                }
            }
            let g = SdfGrid::from_values(vals).unwrap();
            let m = extract_mesh(&g, 0.0).unwrap();
            let rep = m.watertight_report();
            assert!(rep.is_watertight(), "case {case}: {rep:?}");
            assert!(m.volume() > 0.0, "case {case}");
        }
    }

    #[test]
    fn trilinear_reproduces_linear_fields() {
        let g = SdfGrid::from_fn(8, |p| 2.0 * p.x - p.y + 0.5 * p.z).unwrap();
        let p = Vec3::new(0.11, -0.23, 0.3);
        assert!((g.trilinear(&p) - (0.22 + 0.23 + 0.15)).abs() < 1e-12);
    }
}
