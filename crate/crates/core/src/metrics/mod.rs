//! Reconstruction metrics: Chamfer distance, voxel IoU, F-score, profile
//! IoU and vertex matching, and radar-response IoU.

mod assignment;
mod kdtree;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use assignment::min_cost_assignment;
pub use kdtree::KdTree;

use crate::geometry::{sample_surface, signed_distance, unsigned_distance, Mesh};
use crate::revolve::{rasterize_profile, RadialProfile};
use crate::signal::DbResponse;
use crate::{Error, Result, Vec3};

/// Fewest surface samples accepted by the sampled metrics.
pub const MIN_SAMPLES: usize = 1000;
/// Cost of a profile vertex left without a partner in [`match_s`].
pub const UNMATCHED_PENALTY: f64 = 0.5;
/// Default response threshold relative to the ground-truth peak.
pub const IOU_R_THRESHOLD_DB: f64 = -60.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub chamfer_x1e3: f64,
    pub iou: f64,
    pub f_score_1pct: f64,
    pub iou_s: Option<f64>,
    pub iou_r: Option<f64>,
    pub match_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub samples: usize,
    pub seed: u64,
    pub voxel_resolution: usize,
    pub tau_fraction: f64,
    pub raster_resolution: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { samples: 10_000, seed: 0, voxel_resolution: 64, tau_fraction: 0.01, raster_resolution: 128 }
    }
}

fn check_samples(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::invalid(format!("need at least {MIN_SAMPLES} samples, got {n}")));
    }
    Ok(())
}

fn mean_nn_d2(from: &[Vec3], to: &KdTree) -> f64 {
    let s: f64 = from.par_iter().map(|p| to.nearest(p).map_or(f64::INFINITY, |(_, d2)| d2)).sum();
    s / from.len() as f64
}

/// `10³ ×` the average of the two directional mean squared
/// nearest-neighbour distances between point sets.
pub fn chamfer_points(a: &[Vec3], b: &[Vec3]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("chamfer needs nonempty point sets"));
    }
    let (ta, tb) = (KdTree::new(a), KdTree::new(b));
    Ok(1e3 * 0.5 * (mean_nn_d2(a, &tb) + mean_nn_d2(b, &ta)))
}

/// Chamfer distance between `n` surface samples of each mesh, both drawn
/// with `seed`.
pub fn chamfer(a: &Mesh, b: &Mesh, n: usize, seed: u64) -> Result<f64> {
    check_samples(n)?;
    chamfer_points(&sample_surface(a, n, seed)?, &sample_surface(b, n, seed)?)
}

fn occupancy(mesh: &Mesh, resolution: usize) -> Result<Vec<bool>> {
    let r = resolution;
    let h = 1.0 / r as f64;
    let c = |i: usize| -0.5 + (i as f64 + 0.5) * h;
    let q: Vec<Vec3> = (0..r * r * r).map(|n| Vec3::new(c(n / (r * r)), c((n / r) % r), c(n % r))).collect();
    Ok(signed_distance(mesh, &q)?.into_iter().map(|d| d < 0.0).collect())
}

fn binary_iou<'a>(a: impl IntoIterator<Item = &'a bool>, b: impl IntoIterator<Item = &'a bool>) -> Option<f64> {
    let (mut inter, mut union) = (0usize, 0usize);
    for (x, y) in a.into_iter().zip(b) {
        inter += (*x && *y) as usize;
        union += (*x || *y) as usize;
    }
    (union > 0).then(|| inter as f64 / union as f64)
}

/// IoU of the cell-center occupancies of two normalized meshes on an `R³`
/// grid. Two empty occupancies score 0.
pub fn voxel_iou(a: &Mesh, b: &Mesh, resolution: usize) -> Result<f64> {
    if resolution == 0 {
        return Err(Error::invalid("voxel resolution must be positive"));
    }
    let (oa, ob) = (occupancy(a, resolution)?, occupancy(b, resolution)?);
    Ok(binary_iou(&oa, &ob).unwrap_or_else(|| {
        log::warn!("both occupancy grids are empty; IoU defined as 0");
        0.0
    }))
}

/// F-score of `pred` against ground truth `gt` at `τ = tau_fraction ×`
/// the ground-truth bounding-box diagonal, using exact point-to-surface
/// distances.
pub fn f_score(pred: &Mesh, gt: &Mesh, tau_fraction: f64, n: usize, seed: u64) -> Result<f64> {
    check_samples(n)?;
    if !(tau_fraction > 0.0) {
        return Err(Error::invalid("tau fraction must be positive"));
    }
    if pred.is_empty() || gt.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let tau = tau_fraction * gt.bbox().diagonal().norm();
    let hits = |from: &Mesh, to: &Mesh| -> Result<f64> {
        let d = unsigned_distance(to, &sample_surface(from, n, seed)?)?;
        Ok(d.iter().filter(|d| **d < tau).count() as f64 / n as f64)
    };
    let precision = hits(pred, gt)?;
    let recall = hits(gt, pred)?;
    Ok(if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 })
}

/// IoU of the rasterized half cross-sections. Two empty rasters score 0.
pub fn iou_s(pred: &RadialProfile, gt: &RadialProfile, resolution: usize) -> Result<f64> {
    let (a, b) = (rasterize_profile(pred, resolution)?, rasterize_profile(gt, resolution)?);
    Ok(binary_iou(&a, &b).unwrap_or(0.0))
}

/// Optimal vertex matching in `(r / 0.5, z)` coordinates: total matched
/// Euclidean distance plus [`UNMATCHED_PENALTY`] per unmatched vertex,
/// divided by the larger vertex count.
pub fn match_s(pred: &RadialProfile, gt: &RadialProfile) -> Result<f64> {
    pred.require_closed()?;
    gt.require_closed()?;
    let norm = |p: &[f64; 2]| [p[0] / 0.5, p[1]];
    let (a, b) = (pred.points(), gt.points());
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|p| {
            let p = norm(p);
            b.iter()
                .map(|q| {
                    let q = norm(q);
                    (p[0] - q[0]).hypot(p[1] - q[1])
                })
                .collect()
        })
        .collect();
    let assign = min_cost_assignment(&cost);
    let matched: f64 = assign.iter().enumerate().filter_map(|(i, j)| j.map(|j| cost[i][j])).sum();
    let n = a.len().max(b.len());
    let unmatched = n - a.len().min(b.len());
    Ok((matched + UNMATCHED_PENALTY * unmatched as f64) / n as f64)
}

/// Binary IoU of the two responses thresholded at `gt peak + threshold_db`
/// (entries at or above the threshold are set).
pub fn iou_r(pred: &DbResponse, gt: &DbResponse, threshold_db: f64) -> Result<f64> {
    if pred.grid != gt.grid || pred.sweep != gt.sweep || pred.shape() != gt.shape() {
        return Err(Error::ShapeMismatch("responses use different grids or sweeps".into()));
    }
    let peak = gt.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let thr = peak + threshold_db;
    let bin = |v: &ndarray::Array3<f64>| v.mapv(|x| x >= thr);
    Ok(binary_iou(&bin(&pred.values), &bin(&gt.values)).unwrap_or(0.0))
}

/// Mesh metrics of `pred` against `gt`; the optional profile and response
/// metrics are left unset.
pub fn evaluate_meshes(pred: &Mesh, gt: &Mesh, cfg: &EvalConfig) -> Result<MetricReport> {
    Ok(MetricReport {
        chamfer_x1e3: chamfer(pred, gt, cfg.samples, cfg.seed)?,
        iou: voxel_iou(pred, gt, cfg.voxel_resolution)?,
        f_score_1pct: f_score(pred, gt, cfg.tau_fraction, cfg.samples, cfg.seed)?,
        iou_s: None,
        iou_r: None,
        match_s: None,
    })
}
