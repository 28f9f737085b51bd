//! `R2T1` binary tensors: magic, dtype code, rank, little-endian `u64`
//! dims, then row-major little-endian data.

use std::path::Path;

use ndarray::Array3;
use num_complex::{Complex32, Complex64};

use crate::rcs::{FrequencySweep, RadarResponse, ViewingGrid};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"R2T1";

#[derive(Debug, Clone, PartialEq)]
pub enum TensorData {
    F32(Vec<f32>),
    F64(Vec<f64>),
    /// Stored as interleaved `(re, im)` f32 pairs.
    Complex32(Vec<Complex32>),
    U8(Vec<u8>),
}

impl TensorData {
    pub fn code(&self) -> u8 {
        match self {
            TensorData::F32(_) => 1,
            TensorData::F64(_) => 2,
            TensorData::Complex32(_) => 3,
            TensorData::U8(_) => 4,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            TensorData::F32(v) => v.len(),
            TensorData::F64(v) => v.len(),
            TensorData::Complex32(v) => v.len(),
            TensorData::U8(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Bytes per element of a dtype code.
pub fn element_size(code: u8) -> Option<usize> {
    match code {
        1 => Some(4),
        2 => Some(8),
        3 => Some(8),
        4 => Some(1),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: TensorData,
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: TensorData) -> Result<Self> {
        if dims.len() > u8::MAX as usize {
            return Err(Error::Tensor(format!("rank {} exceeds 255", dims.len())));
        }
        let n = dims
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .ok_or_else(|| Error::Tensor("dims overflow".into()))?;
        if n != data.len() {
            return Err(Error::Tensor(format!("dims {dims:?} hold {n} values, data has {}", data.len())));
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &TensorData {
        &self.data
    }

    pub fn into_data(self) -> TensorData {
        self.data
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let elem = element_size(self.data.code()).expect("known dtype");
        let mut out = Vec::with_capacity(6 + 8 * self.dims.len() + elem * self.data.len());
        out.extend_from_slice(MAGIC);
        out.push(self.data.code());
        out.push(self.dims.len() as u8);
        for d in &self.dims {
            out.extend_from_slice(&(*d as u64).to_le_bytes());
        }
        match &self.data {
            TensorData::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            TensorData::F64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
            TensorData::Complex32(v) => v.iter().for_each(|x| {
                out.extend_from_slice(&x.re.to_le_bytes());
                out.extend_from_slice(&x.im.to_le_bytes());
            }),
            TensorData::U8(v) => out.extend_from_slice(v),
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 6 || &bytes[..4] != MAGIC {
            return Err(Error::Tensor("missing R2T1 magic".into()));
        }
        let code = bytes[4];
        let elem = element_size(code).ok_or_else(|| Error::Tensor(format!("unknown dtype code {code}")))?;
        let ndim = bytes[5] as usize;
        let header = 6 + 8 * ndim;
        if bytes.len() < header {
            return Err(Error::Tensor("truncated header".into()));
        }
        let dims: Vec<usize> = bytes[6..header]
            .chunks_exact(8)
            .map(|c| usize::try_from(u64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Tensor("dimension does not fit in memory".into()))?;
        let n = dims
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .and_then(|n| n.checked_mul(elem).map(|b| (n, b)));
        let (n, nbytes) = n.ok_or_else(|| Error::Tensor("dims overflow".into()))?;
        let body = &bytes[header..];
        if body.len() != nbytes {
            return Err(Error::Tensor(format!("data section is {} bytes, expected {nbytes}", body.len())));
        }
        let f32s = || body.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")));
        let data = match code {
            1 => TensorData::F32(f32s().collect()),
            2 => TensorData::F64(body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect()),
            3 => {
                let v: Vec<f32> = f32s().collect();
                TensorData::Complex32(v.chunks_exact(2).map(|p| Complex32::new(p[0], p[1])).collect())
            }
            _ => TensorData::U8(body.to_vec()),
        };
        debug_assert_eq!(data.len(), n);
        Ok(Self { dims, data })
    }
}

/// Writes via a temporary sibling file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::invalid(format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_tensor(path: impl AsRef<Path>, tensor: &Tensor) -> Result<()> {
    write_atomic(path.as_ref(), &tensor.to_bytes())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    let path = path.as_ref();
    Tensor::from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

/// Complex response as a `[N_α, N_φ, N_f]` complex-f32 tensor.
pub fn response_tensor(r: &RadarResponse) -> Tensor {
    let (a, b, c) = r.shape();
    let data = r.values.iter().map(|v| Complex32::new(v.re as f32, v.im as f32)).collect();
    Tensor::new(vec![a, b, c], TensorData::Complex32(data)).expect("shape matches data")
}

/// Inverse of [`response_tensor`]; the grid and sweep come from the manifest.
pub fn tensor_response(t: &Tensor, grid: ViewingGrid, sweep: FrequencySweep) -> Result<RadarResponse> {
    let TensorData::Complex32(v) = t.data() else {
        return Err(Error::Tensor("response tensors must be complex".into()));
    };
    let &[a, b, c] = t.dims() else {
        return Err(Error::Tensor(format!("response tensor has rank {}", t.dims().len())));
    };
    let values = Array3::from_shape_vec((a, b, c), v.iter().map(|z| Complex64::new(z.re as f64, z.im as f64)).collect())
        .expect("dims checked on construction");
    RadarResponse::new(grid, sweep, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_arithmetic() {
        let t = Tensor::new(vec![2, 3], TensorData::F32(vec![0.0; 6])).unwrap();
        assert_eq!(t.to_bytes().len(), 46);
        let c = Tensor::new(vec![128], TensorData::Complex32(vec![Complex32::new(1.0, -1.0); 128])).unwrap();
        assert_eq!(c.to_bytes().len() - (6 + 8), 1024);
        assert!(Tensor::new(vec![2, 2], TensorData::U8(vec![1, 2, 3])).is_err());
    }

    #[test]
    fn round_trips_and_corruption() {
        let t = Tensor::new(vec![3, 1], TensorData::F64(vec![f64::NAN, -0.0, 1e300])).unwrap();
        let bytes = t.to_bytes();
        assert_eq!(Tensor::from_bytes(&bytes).unwrap().to_bytes(), bytes);
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Tensor::from_bytes(&bad).is_err());
        assert!(Tensor::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut huge = bytes.clone();
        huge[6..14].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(Tensor::from_bytes(&huge).is_err());
        let mut code = bytes;
        code[4] = 9;
        assert!(Tensor::from_bytes(&code).is_err());
    }
}
