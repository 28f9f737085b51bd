//! Monostatic radar response simulation.
//!
//! Angles follow the aspect/roll convention: the unit vector toward the
//! radar is `u = (sin α cos φ, sin α sin φ, cos α)`. All simulators use the
//! round-trip phase `e^{i 2k (r·u)}`.

mod centers;
mod po;
mod sbr;

use std::f64::consts::{PI, TAU};

use ndarray::Array3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use centers::{bessel_j0, simulate_centers, CenterKind, ScatteringCenter};
pub use po::{facet_integral, simulate_po, PoConfig, DEFAULT_SCALE};
pub use sbr::{simulate_sbr, SbrConfig};

use crate::{Error, Result, Vec3};

/// Unit vector from the target toward the radar.
#[inline]
pub fn view_direction(aspect: f64, roll: f64) -> Vec3 {
    let (sa, ca) = aspect.sin_cos();
    let (sr, cr) = roll.sin_cos();
    Vec3::new(sa * cr, sa * sr, ca)
}

/// Aspect and roll sample angles (radians).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewingGrid {
    aspects: Vec<f64>,
    rolls: Vec<f64>,
}

impl ViewingGrid {
    pub fn new(aspects: Vec<f64>, rolls: Vec<f64>) -> Result<Self> {
        let g = Self { aspects, rolls };
        g.validate()?;
        Ok(g)
    }

    /// `n_aspect` bin centers over [0, π] and `n_roll` rolls starting at 0.
    pub fn uniform(n_aspect: usize, n_roll: usize) -> Result<Self> {
        if n_aspect == 0 || n_roll == 0 {
            return Err(Error::invalid("viewing grid needs at least one aspect and one roll"));
        }
        let aspects = (0..n_aspect)
            .map(|i| (i as f64 + 0.5) * PI / n_aspect as f64)
            .collect();
        let rolls = (0..n_roll).map(|j| TAU * j as f64 / n_roll as f64).collect();
        Self::new(aspects, rolls)
    }

    pub fn validate(&self) -> Result<()> {
        if self.aspects.is_empty() || self.rolls.is_empty() {
            return Err(Error::invalid("viewing grid needs at least one aspect and one roll"));
        }
        if !self.aspects.iter().all(|a| (0.0..=PI).contains(a)) {
            return Err(Error::invalid("aspects must lie in [0, π]"));
        }
        if !self.rolls.iter().all(|r| (0.0..TAU).contains(r)) {
            return Err(Error::invalid("rolls must lie in [0, 2π)"));
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&self.aspects) || !increasing(&self.rolls) {
            return Err(Error::invalid("grid angles must be strictly increasing"));
        }
        Ok(())
    }

    pub fn aspects(&self) -> &[f64] {
        &self.aspects
    }

    pub fn rolls(&self) -> &[f64] {
        &self.rolls
    }

    pub fn n_aspect(&self) -> usize {
        self.aspects.len()
    }

    pub fn n_roll(&self) -> usize {
        self.rolls.len()
    }

    pub fn n_views(&self) -> usize {
        self.aspects.len() * self.rolls.len()
    }

    /// Direction for flat view index `v = i·N_φ + j`.
    pub fn direction(&self, v: usize) -> Vec3 {
        let n = self.rolls.len();
        view_direction(self.aspects[v / n], self.rolls[v % n])
    }
}

/// Linearly spaced frequencies (Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencySweep {
    pub f_min: f64,
    pub f_max: f64,
    pub n: usize,
}

impl FrequencySweep {
    /// A single-frequency sweep is allowed with `f_min == f_max`.
    pub fn new(f_min: f64, f_max: f64, n: usize) -> Result<Self> {
        let s = Self { f_min, f_max, n };
        s.validate()?;
        Ok(s)
    }

    pub fn single(f: f64) -> Result<Self> {
        Self::new(f, f, 1)
    }

    /// 8–12 GHz, 128 frequencies.
    pub fn x_band() -> Self {
        Self { f_min: 8e9, f_max: 12e9, n: 128 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_min.is_finite() && self.f_max.is_finite()) || self.f_min <= 0.0 {
            return Err(Error::invalid("frequencies must be positive and finite"));
        }
        match self.n {
            0 => Err(Error::invalid("sweep needs at least one frequency")),
            1 if self.f_min == self.f_max => Ok(()),
            1 => Err(Error::invalid("a single-frequency sweep needs f_min == f_max")),
            _ if self.f_min < self.f_max => Ok(()),
            _ => Err(Error::invalid("sweep needs f_min < f_max")),
        }
    }

    pub fn bandwidth(&self) -> f64 {
        self.f_max - self.f_min
    }

    pub fn step(&self) -> f64 {
        if self.n > 1 {
            self.bandwidth() / (self.n - 1) as f64
        } else {
            0.0
        }
    }

    pub fn freq(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.f_max
        } else {
            self.f_min + self.bandwidth() * (i as f64 / (self.n - 1).max(1) as f64)
        }
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.freq(i)).collect()
    }

    /// Wavenumbers `2πf/c` (rad/m).
    pub fn wavenumbers(&self) -> Vec<f64> {
        self.freqs().into_iter().map(wavenumber).collect()
    }
}

#[inline]
pub fn wavenumber(f: f64) -> f64 {
    TAU * f / crate::SPEED_OF_LIGHT
}

/// Complex scattering amplitude (√m²) indexed by (aspect, roll, frequency).
#[derive(Debug, Clone, PartialEq)]
pub struct RadarResponse {
    pub grid: ViewingGrid,
    pub sweep: FrequencySweep,
    pub values: Array3<Complex64>,
}

impl RadarResponse {
    pub fn new(grid: ViewingGrid, sweep: FrequencySweep, values: Array3<Complex64>) -> Result<Self> {
        let want = (grid.n_aspect(), grid.n_roll(), sweep.n);
        if values.dim() != want {
            return Err(Error::ShapeMismatch(format!(
                "response tensor {:?} does not match grid × sweep {want:?}",
                values.dim()
            )));
        }
        if !values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::invalid("response contains non-finite values"));
        }
        Ok(Self { grid, sweep, values })
    }

    pub fn zeros(grid: ViewingGrid, sweep: FrequencySweep) -> Self {
        let values = Array3::zeros((grid.n_aspect(), grid.n_roll(), sweep.n));
        Self { grid, sweep, values }
    }

    /// Builds a response from per-view frequency rows in flat view order.
    pub(crate) fn from_rows(grid: ViewingGrid, sweep: FrequencySweep, rows: Vec<Vec<Complex64>>) -> Self {
        let (na, nr, nf) = (grid.n_aspect(), grid.n_roll(), sweep.n);
        let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
        let values = Array3::from_shape_vec((na, nr, nf), flat).expect("row count matches grid");
        Self { grid, sweep, values }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.values.dim()
    }
}
