//! Multiresolution hash encoding, triplane scatter-mean / gather and the
//! Gaussian KL regularizer.

use ndarray::{Array2, Array3, ArrayView1, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{hash64, seeded};
use crate::{Error, Result, Vec3};

/// Spatial-hash primes, one per axis.
const PRIMES: [u64; 3] = [1, 2_654_435_761, 805_459_861];

/// Magnitude bound of the initial table entries.
pub const TABLE_INIT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HashEncodingConfig {
    pub levels: usize,
    pub features_per_level: usize,
    /// Entries per level; a power of two.
    pub table_size: usize,
    pub base_resolution: usize,
    pub growth: f64,
    pub seed: u64,
}

impl Default for HashEncodingConfig {
    fn default() -> Self {
        Self { levels: 4, features_per_level: 2, table_size: 1 << 14, base_resolution: 8, growth: 2.0, seed: 0 }
    }
}

impl HashEncodingConfig {
    pub fn level_resolution(&self, level: usize) -> usize {
        (self.base_resolution as f64 * self.growth.powi(level as i32)).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 || self.features_per_level == 0 {
            return Err(Error::invalid("hash encoding needs at least one level and one feature"));
        }
        if !self.table_size.is_power_of_two() {
            return Err(Error::invalid(format!("table size {} is not a power of two", self.table_size)));
        }
        if self.base_resolution == 0 || !(self.growth.is_finite()) {
            return Err(Error::invalid("base resolution must be positive and growth finite"));
        }
        for l in 1..self.levels {
            if self.level_resolution(l) <= self.level_resolution(l - 1) {
                return Err(Error::invalid("level resolutions must strictly increase"));
            }
        }
        Ok(())
    }
}

/// Per-level feature tables of a multiresolution hash grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HashEncoding {
    cfg: HashEncodingConfig,
    /// `tables[l]` is `table_size × features_per_level`.
    tables: Vec<Array2<f64>>,
}

fn check_domain(p: &Vec3) -> Result<()> {
    if p.iter().all(|c| (-0.5..=0.5).contains(c)) {
        Ok(())
    } else {
        Err(Error::invalid(format!("point ({}, {}, {}) outside [-0.5, 0.5]³", p.x, p.y, p.z)))
    }
}

impl HashEncoding {
    /// Tables drawn uniformly from `[-1e-4, 1e-4]`, one seeded stream per
    /// level.
    pub fn new(cfg: HashEncodingConfig) -> Result<Self> {
        cfg.validate()?;
        let tables = (0..cfg.levels)
            .map(|l| {
                let mut rng = seeded(hash64(cfg.seed, &l.to_string(), "hash-table"));
                Array2::from_shape_simple_fn((cfg.table_size, cfg.features_per_level), || {
                    rng.random_range(-TABLE_INIT..=TABLE_INIT)
                })
            })
            .collect();
        Ok(Self { cfg, tables })
    }

    /// Replaces the tables (e.g. with trained values).
    pub fn with_tables(cfg: HashEncodingConfig, tables: Vec<Array2<f64>>) -> Result<Self> {
        cfg.validate()?;
        if tables.len() != cfg.levels
            || tables.iter().any(|t| t.dim() != (cfg.table_size, cfg.features_per_level))
        {
            return Err(Error::ShapeMismatch("tables do not match the encoding config".into()));
        }
        Ok(Self { cfg, tables })
    }

    pub fn config(&self) -> &HashEncodingConfig {
        &self.cfg
    }

    pub fn table(&self, level: usize) -> ArrayView2<'_, f64> {
        self.tables[level].view()
    }

    /// Table slot of grid vertex `(i, j, k)` at `level`: dense row-major
    /// indexing when the level's `(N+1)³` vertices fit, spatial hash
    /// otherwise.
    pub fn slot(&self, level: usize, i: usize, j: usize, k: usize) -> usize {
        let n = self.cfg.level_resolution(level) + 1;
        if n * n * n <= self.cfg.table_size {
            i + n * (j + n * k)
        } else {
            let h = (i as u64).wrapping_mul(PRIMES[0])
                ^ (j as u64).wrapping_mul(PRIMES[1])
                ^ (k as u64).wrapping_mul(PRIMES[2]);
            (h & (self.cfg.table_size as u64 - 1)) as usize
        }
    }

    pub fn vertex_feature(&self, level: usize, i: usize, j: usize, k: usize) -> ArrayView1<'_, f64> {
        self.tables[level].row(self.slot(level, i, j, k))
    }

    /// Trilinear feature of one point at one level.
    pub fn encode_level(&self, level: usize, p: &Vec3) -> Vec<f64> {
        let n = self.cfg.level_resolution(level);
        let cell = |x: f64| {
            let g = (x + 0.5) * n as f64;
            let i = (g.floor() as usize).min(n - 1);
            (i, g - i as f64)
        };
        let (i, fx) = cell(p.x);
        let (j, fy) = cell(p.y);
        let (k, fz) = cell(p.z);
        let mut out = vec![0.0; self.cfg.features_per_level];
        for corner in 0..8 {
            let (dx, dy, dz) = (corner & 1, (corner >> 1) & 1, (corner >> 2) & 1);
            let w = (if dx == 1 { fx } else { 1.0 - fx })
                * (if dy == 1 { fy } else { 1.0 - fy })
                * (if dz == 1 { fz } else { 1.0 - fz });
            for (o, f) in out.iter_mut().zip(self.vertex_feature(level, i + dx, j + dy, k + dz)) {
                *o += w * f;
            }
        }
        out
    }
}

/// Per-point features, shape `(n, L, h)`.
pub fn hash_encode(points: &[Vec3], enc: &HashEncoding) -> Result<Array3<f64>> {
    for p in points {
        check_domain(p)?;
    }
    let (l, h) = (enc.cfg.levels, enc.cfg.features_per_level);
    let mut out = Array3::zeros((points.len(), l, h));
    for (n, p) in points.iter().enumerate() {
        for level in 0..l {
            for (c, v) in enc.encode_level(level, p).into_iter().enumerate() {
                out[[n, level, c]] = v;
            }
        }
    }
    Ok(out)
}

/// Axis-aligned feature plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Plane {
    Xy,
    Xz,
    Yz,
}

impl Plane {
    pub const ALL: [Plane; 3] = [Plane::Xy, Plane::Xz, Plane::Yz];

    /// Orthographic projection `(u, v)` of a point.
    pub fn project(self, p: &Vec3) -> [f64; 2] {
        match self {
            Plane::Xy => [p.x, p.y],
            Plane::Xz => [p.x, p.z],
            Plane::Yz => [p.y, p.z],
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Three `R × R × C` feature planes plus per-cell point counts. Empty cells
/// hold zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Triplane {
    pub level: usize,
    pub planes: [Array3<f64>; 3],
    pub counts: [Array2<u32>; 3],
}

impl Triplane {
    pub fn resolution(&self) -> usize {
        self.planes[0].dim().0
    }

    pub fn channels(&self) -> usize {
        self.planes[0].dim().2
    }

    pub fn plane(&self, p: Plane) -> &Array3<f64> {
        &self.planes[p.index()]
    }

    pub fn count(&self, p: Plane) -> &Array2<u32> {
        &self.counts[p.index()]
    }

    /// Bilinear sample of one plane at projected coordinates in
    /// [-0.5, 0.5]². Cell centers reproduce cell values exactly; outside
    /// the outermost centers the border value is held.
    pub fn sample(&self, plane: Plane, uv: [f64; 2]) -> Vec<f64> {
        let r = self.resolution();
        let grid = self.plane(plane);
        let axis = |x: f64| {
            let s = (x + 0.5) * r as f64 - 0.5;
            let i0 = s.floor();
            let f = s - i0;
            let clamp = |i: f64| i.clamp(0.0, (r - 1) as f64) as usize;
            (clamp(i0), clamp(i0 + 1.0), f)
        };
        let (u0, u1, fu) = axis(uv[0]);
        let (v0, v1, fv) = axis(uv[1]);
        (0..self.channels())
            .map(|c| {
                let a = grid[[u0, v0, c]] * (1.0 - fu) + grid[[u1, v0, c]] * fu;
                let b = grid[[u0, v1, c]] * (1.0 - fu) + grid[[u1, v1, c]] * fu;
                a * (1.0 - fv) + b * fv
            })
            .collect()
    }
}

/// Cell of coordinate `x ∈ [-0.5, 0.5]` at resolution `r`.
#[inline]
pub fn cell_index(x: f64, r: usize) -> usize {
    (((x + 0.5) * r as f64).floor().max(0.0) as usize).min(r - 1)
}

/// Mean of the features of the points projecting into each cell of the
/// XY, XZ and YZ planes, accumulated in point order.
pub fn triplane_scatter(features: ArrayView2<'_, f64>, points: &[Vec3], resolution: usize, level: usize) -> Result<Triplane> {
    if features.nrows() != points.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} feature rows for {} points",
            features.nrows(),
            points.len()
        )));
    }
    if resolution == 0 {
        return Err(Error::invalid("triplane resolution must be positive"));
    }
    for p in points {
        check_domain(p)?;
    }
    let c = features.ncols();
    let mut planes = [
        Array3::zeros((resolution, resolution, c)),
        Array3::zeros((resolution, resolution, c)),
        Array3::zeros((resolution, resolution, c)),
    ];
    let mut counts = [
        Array2::zeros((resolution, resolution)),
        Array2::zeros((resolution, resolution)),
        Array2::zeros((resolution, resolution)),
    ];
    for (p, f) in points.iter().zip(features.rows()) {
        for plane in Plane::ALL {
            let [u, v] = plane.project(p);
            let (iu, iv) = (cell_index(u, resolution), cell_index(v, resolution));
            counts[plane.index()][[iu, iv]] += 1;
            for (ch, x) in f.iter().enumerate() {
                planes[plane.index()][[iu, iv, ch]] += x;
            }
        }
    }
    for (grid, count) in planes.iter_mut().zip(&counts) {
        for ((iu, iv, _), x) in grid.indexed_iter_mut() {
            let n = count[[iu, iv]];
            if n > 0 {
                *x /= n as f64;
            }
        }
    }
    Ok(Triplane { level, planes, counts })
}

/// Per-query sum of the bilinear samples of all three planes over all
/// levels, shape `(n, C)`.
pub fn triplane_gather(triplanes: &[Triplane], queries: &[Vec3]) -> Result<Array2<f64>> {
    let first = triplanes.first().ok_or_else(|| Error::invalid("no triplanes to gather from"))?;
    let c = first.channels();
    if triplanes.iter().any(|t| t.channels() != c) {
        return Err(Error::ShapeMismatch("triplanes disagree on channel count".into()));
    }
    for q in queries {
        check_domain(q)?;
    }
    let mut out = Array2::zeros((queries.len(), c));
    for (n, q) in queries.iter().enumerate() {
        for t in triplanes {
            for plane in Plane::ALL {
                for (ch, x) in t.sample(plane, plane.project(q)).into_iter().enumerate() {
                    out[[n, ch]] += x;
                }
            }
        }
    }
    Ok(out)
}

/// Diagonal Gaussian posterior parameters, shape `(L, Z)` each.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentStats {
    pub mu: Array2<f64>,
    pub sigma2: Array2<f64>,
}

impl LatentStats {
    pub fn new(mu: Array2<f64>, sigma2: Array2<f64>) -> Result<Self> {
        if mu.dim() != sigma2.dim() {
            return Err(Error::ShapeMismatch("mu and sigma2 shapes differ".into()));
        }
        if !sigma2.iter().all(|s| *s > 0.0 && s.is_finite()) {
            return Err(Error::invalid("variances must be positive"));
        }
        Ok(Self { mu, sigma2 })
    }
}

/// Default prior variance of the latent space.
pub const KL_TARGET_VAR: f64 = 0.25;

/// `Σ KL(N(μ, σ²) ‖ N(0, target_var))` over all entries.
pub fn kl_regularizer(stats: &LatentStats, target_var: f64) -> Result<f64> {
    if !(target_var > 0.0) || !target_var.is_finite() {
        return Err(Error::invalid("target variance must be positive"));
    }
    if !stats.sigma2.iter().all(|s| *s > 0.0) {
        return Err(Error::invalid("variances must be positive"));
    }
    Ok(stats
        .mu
        .iter()
        .zip(stats.sigma2.iter())
        .map(|(m, s)| 0.5 * (target_var / s).ln() + (s + m * m) / (2.0 * target_var) - 0.5)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enc() -> HashEncoding {
        HashEncoding::new(HashEncodingConfig { table_size: 1 << 10, ..Default::default() }).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(HashEncodingConfig { table_size: 1000, ..Default::default() }.validate().is_err());
        assert!(HashEncodingConfig { growth: 1.0, ..Default::default() }.validate().is_err());
        assert!(HashEncodingConfig { levels: 0, ..Default::default() }.validate().is_err());
        let c = HashEncodingConfig::default();
        assert_eq!((0..4).map(|l| c.level_resolution(l)).collect::<Vec<_>>(), vec![8, 16, 32, 64]);
    }

    #[test]
    fn tables_are_small_and_seeded() {
        let e = enc();
        assert!(e.table(2).iter().all(|x| x.abs() <= TABLE_INIT));
        assert_eq!(e, enc());
    }

    #[test]
    fn vertex_and_cell_center() {
        let e = enc();
        // level 0: N = 8, vertex (2, 5, 7) sits at -0.5 + idx/8
        let p = Vec3::new(-0.25, 0.125, 0.375);
        let f = e.encode_level(0, &p);
        assert_eq!(f, e.vertex_feature(0, 2, 5, 7).to_vec());
        let c = Vec3::new(-0.5 + 2.5 / 8.0, -0.5 + 5.5 / 8.0, -0.5 + 0.5 / 8.0);
        let mean: Vec<f64> = (0..2)
            .map(|ch| {
                (0..8)
                    .map(|k| e.vertex_feature(0, 2 + (k & 1), 5 + ((k >> 1) & 1), (k >> 2) & 1)[ch])
                    .sum::<f64>()
                    / 8.0
            })
            .collect();
        for (a, b) in e.encode_level(0, &c).iter().zip(&mean) {
            assert!((a - b).abs() < 1e-18);
        }
        assert!(hash_encode(&[Vec3::new(0.6, 0.0, 0.0)], &e).is_err());
    }

    #[test]
    fn scatter_means() {
        let pts = [Vec3::new(0.01, 0.02, -0.3), Vec3::new(0.02, 0.03, 0.4)];
        let feats = ndarray::arr2(&[[1.0, 2.0], [3.0, 6.0]]);
        let t = triplane_scatter(feats.view(), &pts, 8, 0).unwrap();
        let (u, v) = (cell_index(0.01, 8), cell_index(0.02, 8));
        assert_eq!(t.plane(Plane::Xy)[[u, v, 0]], 2.0);
        assert_eq!(t.plane(Plane::Xy)[[u, v, 1]], 4.0);
        assert_eq!(t.count(Plane::Xy)[[u, v]], 2);
        assert_eq!(t.count(Plane::Xz).sum(), 2);
        let one = triplane_scatter(feats.slice(ndarray::s![0..1, ..]), &pts[..1], 8, 0).unwrap();
        for plane in Plane::ALL {
            let [a, b] = plane.project(&pts[0]);
            let cell = one.plane(plane).slice(ndarray::s![cell_index(a, 8), cell_index(b, 8), ..]).to_vec();
            assert_eq!(cell, vec![1.0, 2.0]);
        }
        assert!(triplane_scatter(feats.view(), &pts[..1], 8, 0).is_err());
    }

    #[test]
    fn gather_constant_and_center() {
        let mk = |r: usize| Triplane {
            level: 0,
            planes: [Array3::from_elem((r, r, 3), 0.5), Array3::from_elem((r, r, 3), 0.5), Array3::from_elem((r, r, 3), 0.5)],
            counts: [Array2::ones((r, r)), Array2::ones((r, r)), Array2::ones((r, r))],
        };
        let planes = [mk(8), mk(16), mk(32)];
        let g = triplane_gather(&planes, &[Vec3::new(0.1, -0.49, 0.5)]).unwrap();
        assert!(g.iter().all(|x| (x - 3.0 * 3.0 * 0.5).abs() < 1e-15));

        let mut t = mk(8);
        t.planes[0][[3, 4, 1]] = 7.0;
        let c = |i: usize| -0.5 + (i as f64 + 0.5) / 8.0;
        assert_eq!(t.sample(Plane::Xy, [c(3), c(4)])[1], 7.0);
    }

    #[test]
    fn kl_closed_form() {
        let zeros = Array2::zeros((2, 3));
        let s = LatentStats::new(zeros.clone(), Array2::from_elem((2, 3), 0.25)).unwrap();
        assert_eq!(kl_regularizer(&s, 0.25).unwrap(), 0.0);
        let s = LatentStats::new(ndarray::arr2(&[[0.5]]), ndarray::arr2(&[[0.25]])).unwrap();
        assert!((kl_regularizer(&s, 0.25).unwrap() - 0.5).abs() < 1e-15);
        assert!(LatentStats::new(zeros.clone(), zeros).is_err());
        assert!(kl_regularizer(&s, 0.0).is_err());
    }
}
