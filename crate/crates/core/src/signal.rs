//! dB conversion, frequency blocks, observability masks and noise.

use ndarray::{concatenate, s, Array2, Array3, Axis};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rcs::{FrequencySweep, RadarResponse, ViewingGrid};
use crate::rng::{seeded, CounterRng};
use crate::{Error, Result};

/// Lowest representable amplitude (dB); also the default mask fill.
pub const DB_FLOOR: f64 = -300.0;

/// Largest masked fraction accepted by [`gen_mask`].
pub const MAX_COVERAGE: f64 = 0.7;

/// Real dB amplitude tensor over (aspect, roll, frequency).
#[derive(Debug, Clone, PartialEq)]
pub struct DbResponse {
    pub grid: ViewingGrid,
    pub sweep: FrequencySweep,
    pub values: Array3<f64>,
}

impl DbResponse {
    pub fn new(grid: ViewingGrid, sweep: FrequencySweep, values: Array3<f64>) -> Result<Self> {
        let want = (grid.n_aspect(), grid.n_roll(), sweep.n);
        if values.dim() != want {
            return Err(Error::ShapeMismatch(format!(
                "dB tensor {:?} does not match grid × sweep {want:?}",
                values.dim()
            )));
        }
        Ok(Self { grid, sweep, values })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.values.dim()
    }
}

/// `20 log10 |F|`, clamped below at [`DB_FLOOR`].
pub fn amplitude_db(v: Complex64) -> f64 {
    let db = 20.0 * v.norm().log10();
    if db.is_nan() || db < DB_FLOOR {
        DB_FLOOR
    } else {
        db
    }
}

pub fn to_db(response: &RadarResponse) -> DbResponse {
    DbResponse {
        grid: response.grid.clone(),
        sweep: response.sweep,
        values: response.values.mapv(amplitude_db),
    }
}

/// Splits the frequency axis into `l` equal consecutive blocks, lowest
/// frequencies first.
pub fn split_blocks(db: &DbResponse, l: usize) -> Result<Vec<DbResponse>> {
    let n = db.sweep.n;
    if l == 0 || !n.is_multiple_of(l) {
        return Err(Error::invalid(format!("{l} blocks do not divide {n} frequencies")));
    }
    let a = n / l;
    (0..l)
        .map(|b| {
            let (lo, hi) = (b * a, (b + 1) * a);
            let sweep = FrequencySweep::new(db.sweep.freq(lo), db.sweep.freq(hi - 1), a)?;
            Ok(DbResponse {
                grid: db.grid.clone(),
                sweep,
                values: db.values.slice(s![.., .., lo..hi]).to_owned(),
            })
        })
        .collect()
}

/// Joins blocks back along the frequency axis.
pub fn concat_blocks(blocks: &[DbResponse]) -> Result<DbResponse> {
    let first = blocks.first().ok_or_else(|| Error::invalid("no blocks to concatenate"))?;
    let views: Vec<_> = blocks.iter().map(|b| b.values.view()).collect();
    let values = concatenate(Axis(2), &views).map_err(|e| Error::ShapeMismatch(e.to_string()))?;
    let last = &blocks[blocks.len() - 1].sweep;
    let sweep = FrequencySweep::new(first.sweep.f_min, last.f_max, values.dim().2)?;
    DbResponse::new(first.grid.clone(), sweep, values)
}

/// Contiguous observed windows over the aspect and roll axes. The aspect
/// window never wraps; the roll window may wrap past the last bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityMask {
    pub n_aspect: usize,
    pub n_roll: usize,
    /// (start, length) in bins.
    pub aspect_window: (usize, usize),
    pub roll_window: (usize, usize),
    /// Requested masked fraction.
    pub coverage: f64,
}

impl ObservabilityMask {
    pub fn full(n_aspect: usize, n_roll: usize) -> Self {
        Self { n_aspect, n_roll, aspect_window: (0, n_aspect), roll_window: (0, n_roll), coverage: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let (a0, al) = self.aspect_window;
        let (r0, rl) = self.roll_window;
        if self.n_aspect == 0 || self.n_roll == 0 {
            return Err(Error::invalid("mask dimensions must be positive"));
        }
        if al == 0 || a0 + al > self.n_aspect {
            return Err(Error::invalid("aspect window must be nonempty and inside the axis"));
        }
        if rl == 0 || rl > self.n_roll || r0 >= self.n_roll {
            return Err(Error::invalid("roll window must be nonempty and inside the axis"));
        }
        Ok(())
    }

    pub fn aspect_observed(&self, i: usize) -> bool {
        let (a0, al) = self.aspect_window;
        i >= a0 && i < a0 + al
    }

    pub fn roll_observed(&self, j: usize) -> bool {
        let (r0, rl) = self.roll_window;
        (j + self.n_roll - r0) % self.n_roll < rl
    }

    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.aspect_observed(i) && self.roll_observed(j)
    }

    /// Observed cells as an (aspect, roll) boolean grid.
    pub fn observed(&self) -> Array2<bool> {
        Array2::from_shape_fn((self.n_aspect, self.n_roll), |(i, j)| self.is_observed(i, j))
    }

    /// Fraction of (aspect, roll) cells that are masked.
    pub fn masked_fraction(&self) -> f64 {
        1.0 - (self.aspect_window.1 * self.roll_window.1) as f64 / (self.n_aspect * self.n_roll) as f64
    }
}

/// Random contiguous windows hiding `coverage` of the (aspect, roll)
/// cells. The observed fraction `1 - coverage` is split multiplicatively
/// between the axes with an aspect share drawn uniformly from [0, 1]; a
/// single-roll grid is masked along aspect only (and vice versa).
pub fn gen_mask(n_aspect: usize, n_roll: usize, coverage: f64, seed: u64) -> Result<ObservabilityMask> {
    if !(0.0..=MAX_COVERAGE).contains(&coverage) {
        return Err(Error::invalid(format!("coverage {coverage} outside [0, {MAX_COVERAGE}]")));
    }
    if n_aspect == 0 || n_roll == 0 {
        return Err(Error::invalid("mask dimensions must be positive"));
    }
    let mut rng = seeded(seed);
    let observed = 1.0 - coverage;
    let share: f64 = if n_roll == 1 {
        1.0
    } else if n_aspect == 1 {
        0.0
    } else {
        rng.random()
    };
    let na = n_aspect as f64;
    let obs_a = ((observed.powf(share) * na).round() as usize).clamp(1, n_aspect);
    let obs_r = ((observed * na * n_roll as f64 / obs_a as f64).round() as usize).clamp(1, n_roll);
    let a0 = rng.random_range(0..=n_aspect - obs_a);
    let r0 = if obs_r == n_roll { 0 } else { rng.random_range(0..n_roll) };
    Ok(ObservabilityMask {
        n_aspect,
        n_roll,
        aspect_window: (a0, obs_a),
        roll_window: (r0, obs_r),
        coverage,
    })
}

/// Sets every masked (aspect, roll) cell to `fill` at all frequencies.
pub fn apply_mask(db: &DbResponse, mask: &ObservabilityMask, fill: f64) -> Result<DbResponse> {
    mask.validate()?;
    let (na, nr, _) = db.shape();
    if (na, nr) != (mask.n_aspect, mask.n_roll) {
        return Err(Error::ShapeMismatch(format!(
            "mask is {}×{} but response is {na}×{nr}",
            mask.n_aspect, mask.n_roll
        )));
    }
    let mut out = db.clone();
    for ((i, j, _), v) in out.values.indexed_iter_mut() {
        if !mask.is_observed(i, j) {
            *v = fill;
        }
    }
    Ok(out)
}

/// Adds circular complex Gaussian noise of power `10^(level_db/10)` (m²)
/// to each sample. Cell `c` (row-major) always draws the same variate for
/// a given seed.
pub fn add_noise(response: &RadarResponse, level_db: f64, seed: u64) -> Result<RadarResponse> {
    if !level_db.is_finite() {
        return Err(Error::invalid("noise level must be finite"));
    }
    let sigma = (10f64.powf(level_db / 10.0) / 2.0).sqrt();
    let stream = CounterRng::new(seed, "noise");
    let mut out = response.clone();
    for (c, v) in out.values.iter_mut().enumerate() {
        let (x, y) = stream.normal_pair_at(c as u64);
        *v += Complex64::new(sigma * x, sigma * y);
    }
    Ok(out)
}
