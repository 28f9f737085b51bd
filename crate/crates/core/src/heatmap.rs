//! Grayscale rendering of dB response slices as binary PGM.

use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::signal::DbResponse;
use crate::{Error, Result};

/// Two-dimensional cut through an (aspect, roll, frequency) tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Slice {
    /// Aspect × frequency at one roll index.
    Roll(usize),
    /// Aspect × roll at one frequency index.
    Frequency(usize),
}

impl std::str::FromStr for Slice {
    type Err = Error;

    /// `roll:<j>` or `freq:<k>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("slice {s:?} is not roll:<index> or freq:<index>"));
        let (kind, idx) = s.split_once(':').ok_or_else(bad)?;
        let idx: usize = idx.parse().map_err(|_| bad())?;
        match kind {
            "roll" => Ok(Slice::Roll(idx)),
            "freq" | "frequency" => Ok(Slice::Frequency(idx)),
            _ => Err(bad()),
        }
    }
}

/// 8-bit image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_pgm()).map_err(|e| Error::io(path, e))
    }
}

fn slice_view(db: &DbResponse, slice: Slice) -> Result<ArrayView2<'_, f64>> {
    let (_, nr, nf) = db.shape();
    match slice {
        Slice::Roll(j) if j < nr => Ok(db.values.index_axis(Axis(1), j)),
        Slice::Frequency(k) if k < nf => Ok(db.values.index_axis(Axis(2), k)),
        _ => Err(Error::invalid(format!("slice {slice:?} out of range for shape {:?}", db.shape()))),
    }
}

/// Linear map of `[min, max]` dB onto `[0, 255]`; rows are aspects. A
/// constant slice renders uniformly at 128.
pub fn render_heatmap(db: &DbResponse, slice: Slice) -> Result<GrayImage> {
    let v = slice_view(db, slice)?;
    if v.is_empty() {
        return Err(Error::invalid("empty slice"));
    }
    Ok(render_array(v))
}

pub fn render_array(v: ArrayView2<'_, f64>) -> GrayImage {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    let span = hi - lo;
    let px: Array2<u8> = v.mapv(|x| if span > 0.0 { ((x - lo) / span * 255.0).round() as u8 } else { 128 });
    GrayImage { width: v.ncols(), height: v.nrows(), pixels: px.iter().copied().collect() }
}
