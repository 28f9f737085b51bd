//! Reproducible dataset generation: simulated responses, noise and mask
//! variants, manifests and mesh-grouped splits.
//!
//! Layout under the output directory: `manifest.json`,
//! `responses/<id>.r2t` and `meshes/<id>.obj`.

mod files;
mod tensor;

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use files::{
    read_db_file, read_response_file, read_sdf_grid, sidecar_path, write_db_file, write_response_file, write_sdf_grid,
    ResponseMeta,
};
pub use tensor::{
    element_size, read_tensor, response_tensor, tensor_response, write_atomic, write_tensor, Tensor, TensorData, MAGIC,
};

use crate::geometry::{load_mesh, normalize_mesh, obj_string, Mesh};
use crate::rcs::{simulate_po, simulate_sbr, FrequencySweep, PoConfig, RadarResponse, SbrConfig, ViewingGrid};
use crate::rng::{hash64, seeded};
use crate::signal::{add_noise, gen_mask, ObservabilityMask};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const MESH_EXTENSIONS: [&str; 3] = ["obj", "off", "stl"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Simulator {
    Po,
    Sbr,
    Centers,
}

impl std::str::FromStr for Simulator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "po" => Ok(Simulator::Po),
            "sbr" => Ok(Simulator::Sbr),
            "centers" => Ok(Simulator::Centers),
            _ => Err(Error::invalid(format!("unknown simulator {s:?} (po, sbr, centers)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub simulator: Simulator,
    pub grid: ViewingGrid,
    pub sweep: FrequencySweep,
    pub po: PoConfig,
    pub sbr: SbrConfig,
    pub seed: u64,
    /// Rescale each mesh into [-0.45, 0.45]³ before simulating.
    pub normalize: bool,
    /// One noisy variant per level; empty means clean responses only.
    pub noise_levels_db: Vec<f64>,
    /// One masked variant per coverage (per noise variant); empty means
    /// unmasked.
    pub mask_coverages: Vec<f64>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            simulator: Simulator::Po,
            grid: ViewingGrid::uniform(64, 64).expect("valid default grid"),
            sweep: FrequencySweep::x_band(),
            po: PoConfig::default(),
            sbr: SbrConfig::default(),
            seed: 0,
            normalize: true,
            noise_levels_db: Vec::new(),
            mask_coverages: Vec::new(),
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.sweep.validate()?;
        match self.simulator {
            Simulator::Po if !(self.po.scale > 0.0) => return Err(Error::invalid("PO scale must be positive")),
            Simulator::Sbr => self.sbr.validate()?,
            Simulator::Centers => {
                return Err(Error::invalid("dataset generation simulates meshes; use po or sbr"))
            }
            _ => {}
        }
        if self.noise_levels_db.iter().any(|l| !l.is_finite()) {
            return Err(Error::invalid("noise levels must be finite"));
        }
        for &c in &self.mask_coverages {
            gen_mask(1, 1, c, 0)?;
        }
        Ok(())
    }

    /// Runs the configured simulator on `mesh` as given (no normalization).
    pub fn simulate(&self, mesh: &Mesh) -> Result<RadarResponse> {
        match self.simulator {
            Simulator::Po => simulate_po(mesh, &self.grid, &self.sweep, &self.po),
            Simulator::Sbr => simulate_sbr(mesh, &self.grid, &self.sweep, &self.sbr),
            Simulator::Centers => Err(Error::invalid("centers simulator does not take meshes")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    #[default]
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub id: String,
    pub mesh_id: String,
    pub mesh_path: String,
    pub response_path: String,
    pub mask: Option<ObservabilityMask>,
    pub noise_level_db: Option<f64>,
    /// Global seed; stage seeds are `hash64(seed, variant id, stage)`.
    pub seed: u64,
    pub noise_seed: Option<u64>,
    pub mask_seed: Option<u64>,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub mesh_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    #[serde(flatten)]
    pub config: DatasetConfig,
    pub items: Vec<ItemRecord>,
    pub excluded: Vec<Exclusion>,
}

impl DatasetManifest {
    /// Unique ids, existing files and mask shapes matching the grid.
    pub fn validate(&self, root: impl AsRef<Path>) -> Result<()> {
        let root = root.as_ref();
        let mut seen = HashSet::new();
        for it in &self.items {
            if !seen.insert(it.id.as_str()) {
                return Err(Error::invalid(format!("duplicate item id {}", it.id)));
            }
            for p in [&it.mesh_path, &it.response_path] {
                if !root.join(p).is_file() {
                    return Err(Error::invalid(format!("item {} references missing file {p}", it.id)));
                }
            }
            if let Some(m) = &it.mask {
                m.validate()?;
                if (m.n_aspect, m.n_roll) != (self.config.grid.n_aspect(), self.config.grid.n_roll()) {
                    return Err(Error::ShapeMismatch(format!("mask of item {} does not match the grid", it.id)));
                }
            }
        }
        Ok(())
    }

    /// Response of one record, read back from its tensor file.
    pub fn load_response(&self, root: impl AsRef<Path>, item: &ItemRecord) -> Result<RadarResponse> {
        let t = read_tensor(root.as_ref().join(&item.response_path))?;
        tensor_response(&t, self.config.grid.clone(), self.config.sweep)
    }

    pub fn mesh_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.items.iter().map(|i| i.mesh_id.as_str()).collect();
        ids.dedup();
        ids
    }
}

pub fn write_manifest(path: impl AsRef<Path>, m: &DatasetManifest) -> Result<()> {
    let mut s = serde_json::to_string_pretty(m)?;
    s.push('\n');
    write_atomic(path.as_ref(), s.as_bytes())
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&s)?)
}

/// Mesh files (by extension) in a directory, keyed by file stem. Stems
/// shared by several files get the extension appended.
pub fn list_meshes(dir: impl AsRef<Path>) -> Result<Vec<(String, PathBuf)>> {
    let dir = dir.as_ref();
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| MESH_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    files.sort();
    let stem = |p: &Path| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for f in &files {
        *counts.entry(stem(f)).or_default() += 1;
    }
    Ok(files
        .into_iter()
        .map(|f| {
            let s = stem(&f);
            let id = if counts[&s] > 1 {
                format!("{s}_{}", f.extension().unwrap_or_default().to_string_lossy())
            } else {
                s
            };
            (id, f)
        })
        .collect())
}

/// Loads every mesh in `mesh_dir` and generates the dataset. Unreadable
/// meshes are excluded like failed simulations.
pub fn generate_dataset(mesh_dir: impl AsRef<Path>, cfg: &DatasetConfig, out_dir: impl AsRef<Path>) -> Result<DatasetManifest> {
    let files = list_meshes(&mesh_dir)?;
    if files.is_empty() {
        return Err(Error::invalid(format!("no mesh files in {}", mesh_dir.as_ref().display())));
    }
    let loaded: Vec<(String, Result<Mesh>)> = files.into_iter().map(|(id, p)| (id, load_mesh(p))).collect();
    generate_from_results(loaded, cfg, out_dir.as_ref())
}

/// Same as [`generate_dataset`] for meshes already in memory.
pub fn generate_from_meshes(meshes: Vec<(String, Mesh)>, cfg: &DatasetConfig, out_dir: impl AsRef<Path>) -> Result<DatasetManifest> {
    if meshes.is_empty() {
        return Err(Error::invalid("no meshes given"));
    }
    generate_from_results(meshes.into_iter().map(|(id, m)| (id, Ok(m))).collect(), cfg, out_dir.as_ref())
}

fn generate_from_results(meshes: Vec<(String, Result<Mesh>)>, cfg: &DatasetConfig, out: &Path) -> Result<DatasetManifest> {
    cfg.validate()?;
    let mut ids = HashSet::new();
    if let Some((dup, _)) = meshes.iter().find(|(id, _)| !ids.insert(id.as_str())) {
        return Err(Error::invalid(format!("duplicate mesh id {dup}")));
    }
    for sub in ["responses", "meshes"] {
        let d = out.join(sub);
        std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    let results: Vec<(String, Result<Vec<ItemRecord>>)> = meshes
        .into_par_iter()
        .map(|(id, mesh)| {
            let r = mesh.and_then(|m| generate_item(&id, &m, cfg, out));
            (id, r)
        })
        .collect();
    let mut items = Vec::new();
    let mut excluded = Vec::new();
    for (id, r) in results {
        match r {
            Ok(recs) => items.extend(recs),
            Err(e) => {
                log::warn!("excluding mesh {id}: {e}");
                excluded.push(Exclusion { mesh_id: id, reason: e.to_string() });
            }
        }
    }
    let manifest = DatasetManifest { schema_version: SCHEMA_VERSION, config: cfg.clone(), items, excluded };
    write_manifest(out.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

fn generate_item(id: &str, mesh: &Mesh, cfg: &DatasetConfig, out: &Path) -> Result<Vec<ItemRecord>> {
    let mesh = if cfg.normalize { normalize_mesh(mesh)?.0 } else { mesh.clone() };
    let clean = cfg.simulate(&mesh)?;
    let mesh_path = format!("meshes/{id}.obj");
    write_atomic(&out.join(&mesh_path), obj_string(&mesh).as_bytes())?;

    let noise: Vec<Option<f64>> = if cfg.noise_levels_db.is_empty() {
        vec![None]
    } else {
        cfg.noise_levels_db.iter().copied().map(Some).collect()
    };
    let masks: Vec<Option<f64>> = if cfg.mask_coverages.is_empty() {
        vec![None]
    } else {
        cfg.mask_coverages.iter().copied().map(Some).collect()
    };
    let (na, nr) = (cfg.grid.n_aspect(), cfg.grid.n_roll());
    let mut records = Vec::new();
    for level in noise {
        let (vid, resp, noise_seed) = match level {
            None => (id.to_string(), None, None),
            Some(l) => {
                let vid = format!("{id}__n{l}");
                let s = hash64(cfg.seed, &vid, "noise");
                (vid, Some(add_noise(&clean, l, s)?), Some(s))
            }
        };
        let response_path = format!("responses/{vid}.r2t");
        write_tensor(out.join(&response_path), &response_tensor(resp.as_ref().unwrap_or(&clean)))?;
        for &cov in &masks {
            let (rid, mask, mask_seed) = match cov {
                None => (vid.clone(), None, None),
                Some(c) => {
                    let rid = format!("{vid}__m{c}");
                    let s = hash64(cfg.seed, &rid, "mask");
                    (rid, Some(gen_mask(na, nr, c, s)?), Some(s))
                }
            };
            records.push(ItemRecord {
                id: rid,
                mesh_id: id.to_string(),
                mesh_path: mesh_path.clone(),
                response_path: response_path.clone(),
                mask,
                noise_level_db: level,
                seed: cfg.seed,
                noise_seed,
                mask_seed,
                split: Split::Train,
            });
        }
    }
    Ok(records)
}

/// Shuffles mesh ids with `seed` and marks `round(test_fraction × meshes)`
/// of them (at least one, leaving at least one for training) as test; every
/// variant follows its mesh.
pub fn split_manifest(manifest: &DatasetManifest, test_fraction: f64, seed: u64) -> Result<DatasetManifest> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!("test fraction {test_fraction} outside (0, 1)")));
    }
    let mut ids: Vec<&str> = manifest.items.iter().map(|i| i.mesh_id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() < 2 {
        return Err(Error::invalid("need at least two meshes to split"));
    }
    ids.shuffle(&mut seeded(seed));
    let n_test = ((test_fraction * ids.len() as f64).round() as usize).clamp(1, ids.len() - 1);
    let test: HashSet<&str> = ids[..n_test].iter().copied().collect();
    let mut out = manifest.clone();
    for it in &mut out.items {
        it.split = if test.contains(it.mesh_id.as_str()) { Split::Test } else { Split::Train };
    }
    Ok(out)
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global
/// pool when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::invalid(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
