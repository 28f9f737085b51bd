//! Physical-optics facet summation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{FrequencySweep, RadarResponse, ViewingGrid};
use crate::geometry::{Mesh, Ray};
use crate::{Error, Result, Vec3};

/// Below this phase spread across a facet the closed form loses digits and
/// the centroid Taylor expansion is used instead.
const SERIES_GAP: f64 = 1e-4;

/// Meters per model unit that give a normalized mesh (longest axis 0.9)
/// a physical extent of 1 m.
pub const DEFAULT_SCALE: f64 = 1.0 / 0.9;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PoConfig {
    /// Meters per model unit.
    pub scale: f64,
    pub shadowing: bool,
}

impl Default for PoConfig {
    fn default() -> Self {
        Self { scale: DEFAULT_SCALE, shadowing: true }
    }
}

#[inline]
fn cis(x: f64) -> Complex64 {
    let (s, c) = x.sin_cos();
    Complex64::new(c, s)
}

#[inline]
fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

/// `(e^{iy} - e^{ix}) / (i(y - x))` without the cancellation.
#[inline]
fn d1(x: f64, y: f64) -> Complex64 {
    cis(0.5 * (x + y)) * Complex64::new(0.0, -sinc(0.5 * (y - x)))
}

/// `∫_T e^{i a(r)} dA` for a triangle of the given area whose linear phase
/// takes the values `a` at its vertices.
pub(crate) fn phase_integral(area: f64, mut a: [f64; 3]) -> Complex64 {
    a.sort_by(f64::total_cmp);
    if a[2] - a[0] < SERIES_GAP {
        series(area, a)
    } else {
        closed(area, a)
    }
}

fn series(area: f64, [lo, mid, hi]: [f64; 3]) -> Complex64 {
    let m = (lo + mid + hi) / 3.0;
    let s = (lo - m).powi(2) + (mid - m).powi(2) + (hi - m).powi(2);
    cis(m) * (area * (1.0 - s / 24.0))
}

fn closed(area: f64, [lo, mid, hi]: [f64; 3]) -> Complex64 {
    (d1(mid, hi) - d1(lo, mid)) * (2.0 * area / (hi - lo))
}

/// Closed-form `∫_T e^{i w·r} dA` over the triangle `(v0, v1, v2)`.
pub fn facet_integral(v0: &Vec3, v1: &Vec3, v2: &Vec3, w: &Vec3) -> Result<Complex64> {
    let area = 0.5 * (v1 - v0).cross(&(v2 - v0)).norm();
    if !(area > 0.0) || !area.is_finite() {
        return Err(Error::Degenerate("facet has zero area".into()));
    }
    Ok(phase_integral(area, [w.dot(v0), w.dot(v1), w.dot(v2)]))
}

/// One illuminated facet seen from a fixed direction, in units where the
/// phase at vertex j is `k · b[j]`.
struct LitFacet {
    cos: f64,
    area: f64,
    center: f64,
    /// Sorted vertex phases relative to `center`.
    d: [f64; 3],
}

/// Adds `(n̂·û) ∫_T e^{i 2k û·r} dA` for every facet to `acc[i]`, one
/// frequency per slot, iterating facets in the given order. Phasors advance
/// by recurrence across the (uniform) wavenumber grid.
fn accumulate(facets: &[LitFacet], k0: f64, dk: f64, acc: &mut [Complex64]) {
    for f in facets {
        let [dl, dm, dh] = f.d;
        let spread = dh - dl;
        let step = |b: f64| cis(dk * b);
        let (sp, sl, sm, sh) = (step(f.center), step(0.5 * dl), step(0.5 * dm), step(0.5 * dh));
        let mut p = cis(k0 * f.center);
        let (mut ql, mut qm, mut qh) = (cis(0.5 * k0 * dl), cis(0.5 * k0 * dm), cis(0.5 * k0 * dh));
        let ss = dl * dl + dm * dm + dh * dh;
        for (i, slot) in acc.iter_mut().enumerate() {
            let k = k0 + dk * i as f64;
            let j = if k * spread < SERIES_GAP {
                Complex64::new(f.area * (1.0 - k * k * ss / 24.0), 0.0)
            } else {
                // -i e^{i(x+y)/2} sinc((y-x)/2) with half-angle phasors
                let half_sinc = |qx: Complex64, qy: Complex64, dx: f64, dy: f64| {
                    let t = 0.5 * k * (dy - dx);
                    let s = if t < 1e-4 { 1.0 - t * t / 6.0 } else { (qy * qx.conj()).im / t };
                    let e = qx * qy;
                    Complex64::new(e.im * s, -e.re * s)
                };
                let upper = half_sinc(qm, qh, dm, dh);
                let lower = half_sinc(ql, qm, dl, dm);
                (upper - lower) * (2.0 * f.area / (k * spread))
            };
            *slot += p * j * f.cos;
            p *= sp;
            ql *= sl;
            qm *= sm;
            qh *= sh;
        }
    }
}

fn lit_facets(mesh: &Mesh, u: &Vec3, scale: f64, shadowing: bool, t_min: f64) -> Vec<LitFacet> {
    let proj: Vec<f64> = mesh.vertices().iter().map(|v| 2.0 * scale * v.dot(u)).collect();
    let bvh = if shadowing { Some(mesh.bvh()) } else { None };
    let mut out = Vec::new();
    for (f, face) in mesh.faces().iter().enumerate() {
        let cos = mesh.face_normals()[f].dot(u);
        if cos <= 0.0 {
            continue;
        }
        if let Some(bvh) = bvh {
            let ray = Ray { origin: mesh.centroid(f), direction: *u };
            if bvh.occluded(&ray, t_min, f64::INFINITY, Some(f)) {
                continue;
            }
        }
        let mut b = [proj[face[0] as usize], proj[face[1] as usize], proj[face[2] as usize]];
        b.sort_by(f64::total_cmp);
        let center = (b[0] + b[1] + b[2]) / 3.0;
        let area = mesh.face_areas()[f] * scale * scale;
        out.push(LitFacet {
            cos,
            area,
            center,
            d: [b[0] - center, b[1] - center, b[2] - center],
        });
    }
    out
}

/// Physical-optics response: for every view and frequency,
/// `F = Σ (ik/√π)(n̂·û) ∫_T e^{i 2k û·r} dA` over facets facing the radar
/// (and, with shadowing, whose centroid has a clear line of sight).
pub fn simulate_po(mesh: &Mesh, grid: &ViewingGrid, sweep: &FrequencySweep, cfg: &PoConfig) -> Result<RadarResponse> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    if !(cfg.scale > 0.0) || !cfg.scale.is_finite() {
        return Err(Error::invalid("physical scale must be positive"));
    }
    grid.validate()?;
    sweep.validate()?;
    if cfg.shadowing {
        mesh.bvh();
    }
    let t_min = 1e-9 * mesh.bbox().diagonal().norm().max(f64::MIN_POSITIVE);
    let k0 = super::wavenumber(sweep.f_min);
    let dk = super::wavenumber(sweep.f_min + sweep.step()) - k0;
    let ks = sweep.wavenumbers();
    let rows: Vec<Vec<Complex64>> = (0..grid.n_views())
        .into_par_iter()
        .map(|v| {
            let u = grid.direction(v);
            let lit = lit_facets(mesh, &u, cfg.scale, cfg.shadowing, t_min);
            let mut acc = vec![Complex64::new(0.0, 0.0); sweep.n];
            accumulate(&lit, k0, dk, &mut acc);
            for (slot, k) in acc.iter_mut().zip(&ks) {
                *slot *= Complex64::new(0.0, k / PI.sqrt());
            }
            acc
        })
        .collect();
    Ok(RadarResponse::from_rows(grid.clone(), *sweep, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_wavevector_gives_area() {
        let (a, b, c) = (Vec3::new(0.1, 0.2, 0.3), Vec3::new(1.0, 0.0, 0.5), Vec3::new(0.0, 2.0, 0.0));
        let i = facet_integral(&a, &b, &c, &Vec3::zeros()).unwrap();
        let area = 0.5 * (b - a).cross(&(c - a)).norm();
        assert_eq!(i, Complex64::new(area, 0.0));
    }

    #[test]
    fn normal_wavevector_gives_constant_phase() {
        let (a, b, c) = (Vec3::new(0.0, 0.0, 0.7), Vec3::new(1.0, 0.0, 0.7), Vec3::new(0.0, 1.0, 0.7));
        let w = Vec3::new(0.0, 0.0, 40.0);
        let i = facet_integral(&a, &b, &c, &w).unwrap();
        let want = cis(w.dot(&a)) * 0.5;
        assert!((i - want).norm() < 1e-15);
    }

    #[test]
    fn degenerate_facet_rejected() {
        let a = Vec3::zeros();
        assert!(facet_integral(&a, &Vec3::new(1.0, 0.0, 0.0), &Vec3::new(2.0, 0.0, 0.0), &a).is_err());
    }

    #[test]
    fn series_and_closed_form_agree_at_switch() {
        for a in [[3.0, 3.00004, 3.0001], [-7.0, -7.0, -6.9999], [0.0, 1e-4, 1e-4]] {
            let d = series(1.0, a) - closed(1.0, a);
            assert!(d.norm() < 1e-11, "{a:?}: {d}");
        }
    }

    #[test]
    fn recurrence_matches_direct_evaluation() {
        let facets = [[0.0, 0.3, 1.7], [0.2, 0.2, 0.2], [-0.5, -0.5 + 1e-9, 0.9], [0.0, 1e-7, 2e-7]];
        let (k0, dk) = (150.0, 0.7);
        for b in facets {
            let c = (b[0] + b[1] + b[2]) / 3.0;
            let lit = LitFacet { cos: 0.5, area: 0.5, center: c, d: [b[0] - c, b[1] - c, b[2] - c] };
            let mut acc = vec![Complex64::new(0.0, 0.0); 128];
            accumulate(&[lit], k0, dk, &mut acc);
            for (i, got) in acc.iter().enumerate() {
                let k = k0 + dk * i as f64;
                let want = phase_integral(0.5, [k * b[0], k * b[1], k * b[2]]) * 0.5;
                assert!((got - want).norm() < 1e-11, "{b:?} {i}: {got} vs {want}");
            }
        }
    }
}
