//! Parametric scattering-center model.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FrequencySweep, RadarResponse, ViewingGrid};
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterKind {
    Point,
    Sphere,
    Ring,
}

/// A point, sphere or ring scatterer. Positions and radii are in meters.
/// `amplitude` defaults to 1 for points and rings and to `√(πr²)` for
/// spheres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringCenter {
    pub kind: CenterKind,
    pub position: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<[f64; 3]>,
}

impl ScatteringCenter {
    pub fn point(position: [f64; 3], amplitude: f64) -> Self {
        Self { kind: CenterKind::Point, position, amplitude: Some(amplitude), radius: None, axis: None }
    }

    pub fn sphere(position: [f64; 3], radius: f64) -> Self {
        Self { kind: CenterKind::Sphere, position, amplitude: None, radius: Some(radius), axis: None }
    }

    pub fn ring(position: [f64; 3], radius: f64, axis: [f64; 3], amplitude: f64) -> Self {
        Self {
            kind: CenterKind::Ring,
            position,
            amplitude: Some(amplitude),
            radius: Some(radius),
            axis: Some(axis),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::invalid(format!("{:?} center: {m}", self.kind)));
        if !self.position.iter().all(|x| x.is_finite()) {
            return bad("position must be finite");
        }
        if let Some(a) = self.amplitude {
            if !a.is_finite() {
                return bad("amplitude must be finite");
            }
        }
        match (self.kind, self.radius, self.axis) {
            (CenterKind::Point, None, None) => Ok(()),
            (CenterKind::Point, _, _) => bad("points take no radius or axis"),
            (CenterKind::Sphere, Some(r), None) if r > 0.0 && r.is_finite() => Ok(()),
            (CenterKind::Sphere, _, _) => bad("spheres need a positive radius and no axis"),
            (CenterKind::Ring, Some(r), Some(ax)) if r > 0.0 && r.is_finite() => {
                let n = Vec3::from(ax).norm();
                if (n - 1.0).abs() > 1e-6 {
                    bad("ring axis must be a unit vector")
                } else {
                    Ok(())
                }
            }
            (CenterKind::Ring, _, _) => bad("rings need a positive radius and a unit axis"),
        }
    }

    /// Response at wavenumber `k` for unit view direction `u`.
    fn response(&self, u: &Vec3, k: f64) -> Complex64 {
        let p = Vec3::from(self.position);
        let phase = |x: f64| {
            let (s, c) = x.sin_cos();
            Complex64::new(c, s)
        };
        match self.kind {
            CenterKind::Point => phase(2.0 * k * p.dot(u)) * self.amplitude.unwrap_or(1.0),
            CenterKind::Sphere => {
                let r = self.radius.expect("validated");
                let a = self.amplitude.unwrap_or_else(|| (PI * r * r).sqrt());
                phase(2.0 * k * (p.dot(u) + r)) * a
            }
            CenterKind::Ring => {
                let r = self.radius.expect("validated");
                let axis = Vec3::from(self.axis.expect("validated"));
                let cos = axis.dot(u).clamp(-1.0, 1.0);
                let sin = (1.0 - cos * cos).sqrt();
                let a = self.amplitude.unwrap_or(1.0);
                phase(2.0 * k * p.dot(u)) * (a * bessel_j0(2.0 * k * r * sin))
            }
        }
    }
}

/// Bessel function of the first kind, order zero, via the periodic
/// trapezoid rule on `(1/π)∫₀^π cos(x sin θ) dθ`. The node count grows
/// with `|x|` so the aliasing error stays below 1e-15.
pub fn bessel_j0(x: f64) -> f64 {
    let n = (x.abs() / 2.0).ceil() as usize + 24;
    let sum: f64 = (0..n).map(|j| (x * (PI * j as f64 / n as f64).sin()).cos()).sum();
    sum / n as f64
}

/// Sums the center responses, in list order, for every view and frequency.
pub fn simulate_centers(centers: &[ScatteringCenter], grid: &ViewingGrid, sweep: &FrequencySweep) -> Result<RadarResponse> {
    if centers.is_empty() {
        return Err(Error::invalid("scattering-center list is empty"));
    }
    for c in centers {
        c.validate()?;
    }
    grid.validate()?;
    sweep.validate()?;
    let ks = sweep.wavenumbers();
    let rows = (0..grid.n_views())
        .into_par_iter()
        .map(|v| {
            let u = grid.direction(v);
            ks.iter()
                .map(|&k| centers.iter().fold(Complex64::new(0.0, 0.0), |acc, c| acc + c.response(&u, k)))
                .collect()
        })
        .collect();
    Ok(RadarResponse::from_rows(grid.clone(), *sweep, rows))
}
