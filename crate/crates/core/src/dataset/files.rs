//! Standalone response and SDF-grid files. A response is an `R2T1` tensor
//! (complex for raw responses, f64 for dB responses) with a `<file>.json`
//! sidecar holding its grid and sweep.

use std::path::{Path, PathBuf};

use ndarray::Array3;
use serde::{Deserialize, Serialize};

use super::tensor::{read_tensor, response_tensor, tensor_response, write_atomic, write_tensor, Tensor, TensorData};
use crate::rcs::{FrequencySweep, RadarResponse, ViewingGrid};
use crate::sdfgrid::SdfGrid;
use crate::signal::{to_db, DbResponse};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseMeta {
    pub grid: ViewingGrid,
    pub sweep: FrequencySweep,
}

pub fn sidecar_path(path: impl AsRef<Path>) -> PathBuf {
    let mut s = path.as_ref().as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_meta(path: &Path, grid: &ViewingGrid, sweep: &FrequencySweep) -> Result<()> {
    let meta = ResponseMeta { grid: grid.clone(), sweep: *sweep };
    let mut s = serde_json::to_string_pretty(&meta)?;
    s.push('\n');
    write_atomic(&sidecar_path(path), s.as_bytes())
}

fn read_meta(path: &Path) -> Result<ResponseMeta> {
    let p = sidecar_path(path);
    let s = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
    Ok(serde_json::from_str(&s)?)
}

fn array3(t: &Tensor, values: Vec<f64>) -> Result<Array3<f64>> {
    let &[a, b, c] = t.dims() else {
        return Err(Error::Tensor(format!("expected a rank-3 tensor, got rank {}", t.dims().len())));
    };
    Ok(Array3::from_shape_vec((a, b, c), values).expect("dims checked on construction"))
}

pub fn write_response_file(path: impl AsRef<Path>, r: &RadarResponse) -> Result<()> {
    write_tensor(path.as_ref(), &response_tensor(r))?;
    write_meta(path.as_ref(), &r.grid, &r.sweep)
}

pub fn read_response_file(path: impl AsRef<Path>) -> Result<RadarResponse> {
    let meta = read_meta(path.as_ref())?;
    tensor_response(&read_tensor(path)?, meta.grid, meta.sweep)
}

pub fn write_db_file(path: impl AsRef<Path>, db: &DbResponse) -> Result<()> {
    let (a, b, c) = db.shape();
    let t = Tensor::new(vec![a, b, c], TensorData::F64(db.values.iter().copied().collect()))?;
    write_tensor(path.as_ref(), &t)?;
    write_meta(path.as_ref(), &db.grid, &db.sweep)
}

/// Reads either kind of response file as dB; complex files are converted.
pub fn read_db_file(path: impl AsRef<Path>) -> Result<DbResponse> {
    let path = path.as_ref();
    let t = read_tensor(path)?;
    let meta = read_meta(path)?;
    match t.data() {
        TensorData::Complex32(_) => Ok(to_db(&tensor_response(&t, meta.grid, meta.sweep)?)),
        TensorData::F64(v) => DbResponse::new(meta.grid, meta.sweep, array3(&t, v.clone())?),
        _ => Err(Error::Tensor("responses must be complex or f64".into())),
    }
}

/// An `R × R × R` f64 tensor.
pub fn write_sdf_grid(path: impl AsRef<Path>, grid: &SdfGrid) -> Result<()> {
    let r = grid.resolution();
    let t = Tensor::new(vec![r, r, r], TensorData::F64(grid.values().iter().copied().collect()))?;
    write_tensor(path, &t)
}

pub fn read_sdf_grid(path: impl AsRef<Path>) -> Result<SdfGrid> {
    let t = read_tensor(path)?;
    let TensorData::F64(v) = t.data() else {
        return Err(Error::Tensor("SDF grids must be f64".into()));
    };
    SdfGrid::from_values(array3(&t, v.clone())?)
}
