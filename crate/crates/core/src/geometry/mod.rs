//! Mesh ingestion, normalization, surface sampling, ray queries and signed
//! distance evaluation.

mod bvh;
mod io;
mod mesh;
mod query;
pub mod shapes;

pub use bvh::{Aabb, Bvh, Hit};
pub use io::{load_mesh, obj_string, parse_obj, parse_off, parse_stl, write_obj};
pub use mesh::{normalize_mesh, Mesh, NormalizationTransform, WatertightReport, NORMALIZED_HALF_EXTENT};
pub use query::{
    closest_point_on_triangle, is_inside, ray_first_hit, ray_triangle, sample_surface,
    signed_distance, unsigned_distance, SIGN_RAY_DIRECTIONS,
};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Half-line used for visibility and parity queries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    /// Builds a ray, normalizing `direction`. Panics on a zero direction.
    pub fn new(origin: Vec3, direction: Vec3) -> Self {
        let n = direction.norm();
        assert!(n > 0.0 && n.is_finite(), "ray direction must be nonzero");
        Self {
            origin,
            direction: direction / n,
        }
    }

    #[inline]
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}
