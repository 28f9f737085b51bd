//! Shooting and bouncing rays.
//!
//! Each view launches a square grid of parallel rays from a plane
//! orthogonal to `û`. Every bounce whose facet faces the radar, and whose
//! return path is clear, radiates a ray-tube contribution
//! `(ik/√π) · A_tube · (n̂·û + n̂·(-d̂)) / (2|n̂·d̂|) · e^{ik(2D - path)}`
//! where `D` is the aperture offset and `path` the total travelled
//! distance back to the aperture. For a single bounce this reduces to the
//! physical-optics integrand sampled at the hit point, so flat convex
//! shapes converge to [`simulate_po`](super::simulate_po).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FrequencySweep, RadarResponse, ViewingGrid};
use crate::geometry::{Mesh, Ray};
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbrConfig {
    /// Rays per shortest wavelength along each aperture axis.
    pub rays_per_wavelength: f64,
    pub max_bounces: u32,
    /// Aperture enlargement on each side, as a fraction of the projected
    /// extent.
    pub aperture_margin: f64,
    /// Meters per model unit.
    pub scale: f64,
}

impl Default for SbrConfig {
    fn default() -> Self {
        Self {
            rays_per_wavelength: 4.0,
            max_bounces: 3,
            aperture_margin: 0.05,
            scale: super::po::DEFAULT_SCALE,
        }
    }
}

impl SbrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rays_per_wavelength >= 2.0) || !self.rays_per_wavelength.is_finite() {
            return Err(Error::invalid("rays_per_wavelength must be at least 2"));
        }
        if !(1..=8).contains(&self.max_bounces) {
            return Err(Error::invalid("max_bounces must be in 1..=8"));
        }
        if !(self.aperture_margin >= 0.0) || !self.aperture_margin.is_finite() {
            return Err(Error::invalid("aperture_margin must be non-negative"));
        }
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::invalid("physical scale must be positive"));
        }
        Ok(())
    }
}

/// A radiating bounce: effective area (m²) and phase distance `2D - path`
/// (m).
struct Contribution {
    area: f64,
    delay: f64,
}

/// Orthonormal pair spanning the plane orthogonal to `u`.
fn aperture_basis(u: &Vec3) -> (Vec3, Vec3) {
    let helper = if u.x.abs() <= u.y.abs() && u.x.abs() <= u.z.abs() {
        Vec3::x()
    } else if u.y.abs() <= u.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let e1 = u.cross(&helper).normalize();
    let e2 = u.cross(&e1);
    (e1, e2)
}

fn trace_view(mesh: &Mesh, u: &Vec3, cfg: &SbrConfig, spacing: f64, t_min: f64) -> Vec<Contribution> {
    let bvh = mesh.bvh();
    let (e1, e2) = aperture_basis(u);
    let corners = mesh.bbox().corners();
    let span = |e: &Vec3| {
        corners.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            let x = c.dot(e);
            (lo.min(x), hi.max(x))
        })
    };
    let (lo1, hi1) = span(&e1);
    let (lo2, hi2) = span(&e2);
    let (_, depth) = span(u);
    let pad1 = cfg.aperture_margin * (hi1 - lo1);
    let pad2 = cfg.aperture_margin * (hi2 - lo2);
    let (lo1, hi1, lo2, hi2) = (lo1 - pad1, hi1 + pad1, lo2 - pad2, hi2 + pad2);
    let n1 = (((hi1 - lo1) / spacing).ceil() as usize).max(1);
    let n2 = (((hi2 - lo2) / spacing).ceil() as usize).max(1);
    // center the ray lattice on the aperture
    let off1 = lo1 + 0.5 * ((hi1 - lo1) - (n1 - 1) as f64 * spacing);
    let off2 = lo2 + 0.5 * ((hi2 - lo2) - (n2 - 1) as f64 * spacing);
    let plane = depth + 1e-3 * (hi1 - lo1).max(hi2 - lo2).max(1e-12);
    let tube = (spacing * cfg.scale).powi(2);

    let mut out = Vec::new();
    for i2 in 0..n2 {
        for i1 in 0..n1 {
            let start = *u * plane + e1 * (off1 + i1 as f64 * spacing) + e2 * (off2 + i2 as f64 * spacing);
            let mut ray = Ray { origin: start, direction: -*u };
            let mut travelled = 0.0;
            let mut last = None;
            for bounce in 1..=cfg.max_bounces {
                let Some(hit) = bvh.first_hit(&ray, t_min, f64::INFINITY, last) else {
                    break;
                };
                let p = ray.at(hit.t);
                travelled += hit.t;
                let d = ray.direction;
                let mut n = mesh.face_normals()[hit.face];
                if n.dot(&d) > 0.0 {
                    n = -n;
                }
                let cos_in = -n.dot(&d);
                let cos_out = n.dot(u);
                if cos_out > 0.0 && cos_in > 0.0 {
                    let clear = bounce == 1 || !bvh.occluded(&Ray { origin: p, direction: *u }, t_min, f64::INFINITY, Some(hit.face));
                    if clear {
                        let back = plane - p.dot(u);
                        out.push(Contribution {
                            area: tube * (cos_out + cos_in) / (2.0 * cos_in),
                            delay: cfg.scale * (2.0 * plane - travelled - back),
                        });
                    }
                }
                let reflected = d - n * (2.0 * d.dot(&n));
                ray = Ray { origin: p, direction: reflected.normalize() };
                last = Some(hit.face);
            }
        }
    }
    out
}

/// Multi-bounce response. Rays for a view are traced once in raster order;
/// frequencies reuse the traced paths.
pub fn simulate_sbr(mesh: &Mesh, grid: &ViewingGrid, sweep: &FrequencySweep, cfg: &SbrConfig) -> Result<RadarResponse> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    cfg.validate()?;
    grid.validate()?;
    sweep.validate()?;
    let lambda_min = crate::SPEED_OF_LIGHT / sweep.f_max;
    let spacing = lambda_min / cfg.rays_per_wavelength / cfg.scale;
    let extent = mesh.bbox().diagonal().norm();
    let rays_per_axis = (extent * (1.0 + 2.0 * cfg.aperture_margin)) / spacing;
    if !rays_per_axis.is_finite() || rays_per_axis > 1e5 {
        return Err(Error::invalid(format!(
            "aperture needs ~{rays_per_axis:.0} rays per axis; lower rays_per_wavelength or the frequency"
        )));
    }
    let t_min = 1e-9 * extent.max(f64::MIN_POSITIVE);
    let ks = sweep.wavenumbers();
    let k0 = ks[0];
    let dk = if ks.len() > 1 { ks[1] - ks[0] } else { 0.0 };
    mesh.bvh();
    let rows = (0..grid.n_views())
        .into_par_iter()
        .map(|v| {
            let u = grid.direction(v);
            let contribs = trace_view(mesh, &u, cfg, spacing, t_min);
            let mut acc = vec![Complex64::new(0.0, 0.0); ks.len()];
            for c in &contribs {
                let (s, co) = (k0 * c.delay).sin_cos();
                let mut p = Complex64::new(co, s) * c.area;
                let (s, co) = (dk * c.delay).sin_cos();
                let step = Complex64::new(co, s);
                for slot in acc.iter_mut() {
                    *slot += p;
                    p *= step;
                }
            }
            for (slot, k) in acc.iter_mut().zip(&ks) {
                *slot *= Complex64::new(0.0, k / PI.sqrt());
            }
            acc
        })
        .collect();
    Ok(RadarResponse::from_rows(grid.clone(), *sweep, rows))
}
