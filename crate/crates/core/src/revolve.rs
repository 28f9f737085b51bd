//! Roll-symmetric shapes: radial profiles, surfaces of revolution and
//! half cross-section rasters.

use std::f64::consts::TAU;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::Mesh;
use crate::rng::seeded;
use crate::{Error, Result, Vec3};

/// Ordered `(r, z)` polyline of a half cross-section. A profile is closed
/// when both endpoints lie on the axis (`r = 0`); the region it bounds is
/// closed off by the axis segment between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct RadialProfile {
    points: Vec<[f64; 2]>,
}

impl TryFrom<Vec<[f64; 2]>> for RadialProfile {
    type Error = Error;
    fn try_from(points: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<RadialProfile> for Vec<[f64; 2]> {
    fn from(p: RadialProfile) -> Self {
        p.points
    }
}

fn segments_intersect(p: [f64; 2], q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    let orient = |o: [f64; 2], x: [f64; 2], y: [f64; 2]| (x[0] - o[0]) * (y[1] - o[1]) - (x[1] - o[1]) * (y[0] - o[0]);
    let on_seg = |o: [f64; 2], x: [f64; 2], y: [f64; 2]| {
        y[0] >= o[0].min(x[0]) && y[0] <= o[0].max(x[0]) && y[1] >= o[1].min(x[1]) && y[1] <= o[1].max(x[1])
    };
    let (d1, d2, d3, d4) = (orient(a, b, p), orient(a, b, q), orient(p, q, a), orient(p, q, b));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_seg(a, b, p))
        || (d2 == 0.0 && on_seg(a, b, q))
        || (d3 == 0.0 && on_seg(p, q, a))
        || (d4 == 0.0 && on_seg(p, q, b))
}

impl RadialProfile {
    /// Validates `r ≥ 0`, nondecreasing `z`, no consecutive duplicates and
    /// a nonzero width.
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidProfile(m));
        if points.len() < 2 {
            return bad(format!("need at least 2 points, got {}", points.len()));
        }
        for (i, p) in points.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return bad(format!("point {i} is not finite"));
            }
            if p[0] < 0.0 {
                return bad(format!("point {i} has negative radius {}", p[0]));
            }
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[1][1] < w[0][1] {
                return bad(format!("z decreases between points {i} and {}", i + 1));
            }
            if w[0] == w[1] {
                return bad(format!("points {i} and {} coincide", i + 1));
            }
        }
        if points.iter().all(|p| p[0] == 0.0) {
            return bad("profile has zero width (all r = 0)".into());
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.points[0][0] == 0.0 && self.points[self.points.len() - 1][0] == 0.0
    }

    /// Errors unless both endpoints lie on the axis.
    pub fn require_closed(&self) -> Result<()> {
        if self.is_closed() {
            Ok(())
        } else {
            Err(Error::InvalidProfile("profile is open (endpoints must have r = 0)".into()))
        }
    }

    /// Checks a closed profile for axis touches and crossings between
    /// polygon edges (including the closing axis segment).
    pub fn check_simple(&self) -> Result<()> {
        self.require_closed()?;
        let n = self.points.len();
        if self.points[1..n - 1].iter().any(|p| p[0] == 0.0) {
            return Err(Error::InvalidProfile("profile touches the axis at an interior point".into()));
        }
        // edges 0..n-1 along the polyline, edge n-1 closes along the axis
        let edge = |e: usize| (self.points[e], self.points[(e + 1) % n]);
        for e in 0..n {
            for f in e + 1..n {
                let adjacent = f == e + 1 || (e == 0 && f == n - 1);
                let (p, q) = edge(e);
                let (a, b) = edge(f);
                if adjacent {
                    // shared endpoint is fine; reject folding back over the same line
                    let (u, v) = if f == e + 1 { ((p, q), (q, b)) } else { ((q, p), (p, a)) };
                    let d1 = [u.1[0] - u.0[0], u.1[1] - u.0[1]];
                    let d2 = [v.1[0] - v.0[0], v.1[1] - v.0[1]];
                    let cross = d1[0] * d2[1] - d1[1] * d2[0];
                    let dot = d1[0] * d2[0] + d1[1] * d2[1];
                    if cross == 0.0 && dot < 0.0 {
                        return Err(Error::InvalidProfile(format!("edges {e} and {f} fold back on each other")));
                    }
                } else if segments_intersect(p, q, a, b) {
                    return Err(Error::InvalidProfile(format!("profile self-intersects (edges {e} and {f})")));
                }
            }
        }
        Ok(())
    }

    /// Even-odd containment of `(r, z)` in the region bounded by the
    /// profile and the axis.
    pub fn contains(&self, r: f64, z: f64) -> bool {
        let n = self.points.len();
        let mut inside = false;
        for e in 0..n {
            let a = self.points[e];
            let b = self.points[(e + 1) % n];
            if (a[1] > z) != (b[1] > z) {
                let x = a[0] + (z - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if r < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Area of the half cross-section (shoelace).
    pub fn area(&self) -> f64 {
        let n = self.points.len();
        let s: f64 = (0..n)
            .map(|e| {
                let a = self.points[e];
                let b = self.points[(e + 1) % n];
                a[0] * b[1] - b[0] * a[1]
            })
            .sum();
        0.5 * s.abs()
    }

    /// Volume of the solid of revolution (Pappus, per trapezoid segment).
    pub fn revolved_volume(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| {
                let ([r0, z0], [r1, z1]) = (w[0], w[1]);
                std::f64::consts::PI * (z1 - z0) * (r0 * r0 + r0 * r1 + r1 * r1) / 3.0
            })
            .sum()
    }
}

/// Parameters of the random frustum family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrustumParams {
    pub k_min: usize,
    pub k_max: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for FrustumParams {
    fn default() -> Self {
        Self { k_min: 2, k_max: 6, r_min: 0.05, r_max: 0.45 }
    }
}

/// Random profile with `K ~ U{k_min..k_max}` segments from `(0, 0)` to
/// `(0, 1)`; the `K - 1` interior points have distinct increasing `z` and
/// radii in `(0.05, 0.45]`.
pub fn sample_frustum_profile(k_range: (usize, usize), seed: u64) -> Result<RadialProfile> {
    sample_frustum_with(&FrustumParams { k_min: k_range.0, k_max: k_range.1, ..Default::default() }, seed)
}

pub fn sample_frustum_with(params: &FrustumParams, seed: u64) -> Result<RadialProfile> {
    let (lo, hi) = (params.k_min, params.k_max);
    if !(2 <= lo && lo <= hi && hi <= 8) {
        return Err(Error::invalid(format!("segment range ({lo}, {hi}) must satisfy 2 ≤ min ≤ max ≤ 8")));
    }
    if !(0.0 <= params.r_min && params.r_min < params.r_max) {
        return Err(Error::invalid("radius bounds must satisfy 0 ≤ r_min < r_max"));
    }
    let mut rng = seeded(seed);
    let k = rng.random_range(lo..=hi);
    let mut zs: Vec<f64> = Vec::with_capacity(k - 1);
    while zs.len() < k - 1 {
        let z: f64 = rng.random();
        if z > 0.0 && !zs.contains(&z) {
            zs.push(z);
        }
    }
    zs.sort_by(f64::total_cmp);
    let mut points = Vec::with_capacity(k + 1);
    points.push([0.0, 0.0]);
    for z in zs {
        let u: f64 = rng.random();
        points.push([params.r_max - (params.r_max - params.r_min) * u, z]);
    }
    points.push([0.0, 1.0]);
    RadialProfile::new(points)
}

/// Watertight surface of revolution about the z axis with outward normals.
/// Axis endpoints become single apex vertices.
pub fn revolve_to_mesh(profile: &RadialProfile, n_segments: usize) -> Result<Mesh> {
    profile.check_simple()?;
    if n_segments < 8 {
        return Err(Error::invalid("n_segments must be at least 8"));
    }
    let n = n_segments;
    let (sin, cos): (Vec<f64>, Vec<f64>) = (0..n).map(|j| (TAU * j as f64 / n as f64).sin_cos()).unzip();
    let mut vertices = Vec::new();
    // first vertex index of each profile point, and whether it is an apex
    let mut start = Vec::with_capacity(profile.len());
    for &[r, z] in profile.points() {
        start.push(vertices.len() as u32);
        if r == 0.0 {
            vertices.push(Vec3::new(0.0, 0.0, z));
        } else {
            vertices.extend((0..n).map(|j| Vec3::new(r * cos[j], r * sin[j], z)));
        }
    }
    let ring = |i: usize, j: usize| start[i] + (j % n) as u32;
    let mut faces = Vec::new();
    for i in 0..profile.len() - 1 {
        let (apex_lo, apex_hi) = (profile.points()[i][0] == 0.0, profile.points()[i + 1][0] == 0.0);
        for j in 0..n {
            match (apex_lo, apex_hi) {
                (true, false) => faces.push([start[i], ring(i + 1, j + 1), ring(i + 1, j)]),
                (false, true) => faces.push([ring(i, j), ring(i, j + 1), start[i + 1]]),
                (false, false) => {
                    let (a, b, c, d) = (ring(i, j), ring(i, j + 1), ring(i + 1, j + 1), ring(i + 1, j));
                    faces.push([a, b, c]);
                    faces.push([a, c, d]);
                }
                (true, true) => unreachable!("axis-only segment excluded by check_simple"),
            }
        }
    }
    Mesh::new(vertices, faces)
}

/// `resolution × resolution` occupancy of the half cross-section over
/// `r ∈ [0, 0.5]` (columns) and `z ∈ [0, 1]` (rows), sampled at pixel
/// centers.
pub fn rasterize_profile(profile: &RadialProfile, resolution: usize) -> Result<Array2<bool>> {
    profile.require_closed()?;
    if resolution == 0 {
        return Err(Error::invalid("resolution must be positive"));
    }
    let res = resolution as f64;
    Ok(Array2::from_shape_fn((resolution, resolution), |(i, j)| {
        profile.contains((j as f64 + 0.5) / res * 0.5, (i as f64 + 0.5) / res)
    }))
}
