use rand::Rng;
use rayon::prelude::*;

use super::bvh::Hit;
use super::mesh::Mesh;
use super::{Ray, Vec3};
use crate::rng::seeded;
use crate::{Error, Result};

/// Minimum accepted ray parameter for hits.
pub const RAY_EPS: f64 = 1e-9;

/// Fixed directions for parity sign voting: the six axis directions plus
/// three skewed diagonals chosen to avoid passing through axis-aligned
/// edges.
pub const SIGN_RAY_DIRECTIONS: [[f64; 3]; 9] = [
    [1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, -1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0],
    [1.0, 0.866_025_403_784_438_6, 0.707_106_781_186_547_5],
    [-0.707_106_781_186_547_5, 1.0, 0.577_350_269_189_625_8],
    [0.618_033_988_749_894_8, -0.732_050_807_568_877_2, 1.0],
];

/// Two-sided Moller-Trumbore. Returns the ray parameter of the crossing.
#[inline]
pub fn ray_triangle(ray: &Ray, tri: &[Vec3; 3]) -> Option<f64> {
    ray_triangle_tol(ray, tri, 0.0)
}

/// Moller-Trumbore with barycentric bounds widened by `tol`, so rays
/// through shared edges and vertices hit at least one incident face.
#[inline]
pub(crate) fn ray_triangle_tol(ray: &Ray, tri: &[Vec3; 3], tol: f64) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = ray.direction.cross(&e2);
    let det = e1.dot(&p);
    if det == 0.0 {
        return None;
    }
    let inv = 1.0 / det;
    let s = ray.origin - tri[0];
    let u = s.dot(&p) * inv;
    if !(-tol..=1.0 + tol).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = ray.direction.dot(&q) * inv;
    if v < -tol || u + v > 1.0 + tol {
        return None;
    }
    Some(e2.dot(&q) * inv)
}

/// Closest point on a triangle (Voronoi-region walk).
pub fn closest_point_on_triangle(p: &Vec3, tri: &[Vec3; 3]) -> Vec3 {
    let [a, b, c] = *tri;
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

/// Nearest intersection with `t > 1e-9`.
pub fn ray_first_hit(mesh: &Mesh, ray: &Ray) -> Option<Hit> {
    mesh.bvh().first_hit(ray, RAY_EPS, f64::INFINITY, None)
}

/// Majority vote of ray-crossing parity over [`SIGN_RAY_DIRECTIONS`].
pub fn is_inside(mesh: &Mesh, p: &Vec3) -> bool {
    let bvh = mesh.bvh();
    if !mesh.bbox().contains(p) {
        return false;
    }
    let votes = SIGN_RAY_DIRECTIONS
        .iter()
        .filter(|d| {
            let ray = Ray::new(*p, Vec3::from(**d));
            bvh.count_hits(&ray, 0.0) % 2 == 1
        })
        .count();
    votes * 2 > SIGN_RAY_DIRECTIONS.len()
}

pub fn unsigned_distance(mesh: &Mesh, queries: &[Vec3]) -> Result<Vec<f64>> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let bvh = mesh.bvh();
    Ok(queries
        .par_iter()
        .map(|q| bvh.closest_point(q).map(|(_, _, d2)| d2.sqrt()).unwrap_or(f64::INFINITY))
        .collect())
}

/// Signed distance: negative inside, positive outside. The sign comes from
/// parity voting, so non-watertight meshes still get a best-effort sign.
pub fn signed_distance(mesh: &Mesh, queries: &[Vec3]) -> Result<Vec<f64>> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let report = mesh.watertight_report();
    if !report.is_watertight() {
        log::warn!(
            "signed distance on a non-watertight mesh ({} boundary, {} non-manifold, {} misoriented edges); signs are majority votes",
            report.boundary_edges,
            report.non_manifold_edges,
            report.misoriented_edges
        );
    }
    let bvh = mesh.bvh();
    Ok(queries
        .par_iter()
        .map(|q| {
            let d = bvh.closest_point(q).map(|(_, _, d2)| d2.sqrt()).unwrap_or(f64::INFINITY);
            if d > 0.0 && is_inside(mesh, q) {
                -d
            } else {
                d
            }
        })
        .collect())
}

/// Area-weighted uniform surface samples, deterministic per seed.
pub fn sample_surface(mesh: &Mesh, n: usize, seed: u64) -> Result<Vec<Vec3>> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let mut cdf = Vec::with_capacity(mesh.num_faces());
    let mut acc = 0.0;
    for &a in mesh.face_areas() {
        acc += a;
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = seeded(seed);
    let last = cdf.len() - 1;
    Ok((0..n)
        .map(|_| {
            let x: f64 = rng.random::<f64>() * total;
            let f = cdf.partition_point(|&c| c <= x).min(last);
            let [a, b, c] = mesh.triangle(f);
            let r1 = rng.random::<f64>().sqrt();
            let r2: f64 = rng.random();
            a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2)
        })
        .collect())
}
