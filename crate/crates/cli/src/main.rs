use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use r2s_core::dataset::{
    generate_dataset, read_db_file, read_response_file, read_sdf_grid, split_manifest, with_threads, write_db_file,
    write_manifest, write_response_file, write_sdf_grid, DatasetConfig, Simulator,
};
use r2s_core::geometry::{load_mesh, normalize_mesh, write_obj, Mesh};
use r2s_core::heatmap::{render_heatmap, Slice};
use r2s_core::metrics::{evaluate_meshes, iou_r, iou_s, match_s, EvalConfig, IOU_R_THRESHOLD_DB};
use r2s_core::rcs::{simulate_centers, simulate_po, simulate_sbr, PoConfig, SbrConfig, ScatteringCenter, DEFAULT_SCALE};
use r2s_core::revolve::{revolve_to_mesh, sample_frustum_profile, RadialProfile};
use r2s_core::rng::hash64;
use r2s_core::sdfgrid::{extract_mesh, sample_sdf_grid};
use r2s_core::signal::{add_noise, apply_mask, gen_mask, DB_FLOOR};
use r2s_core::{Error, FrequencySweep, ViewingGrid};

#[derive(Parser)]
#[command(name = "r2s", version, about = "Radar-to-shape benchmark toolkit")]
struct Cli {
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true, env = "R2S_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate the response of a mesh (or a JSON list of scattering centers).
    Simulate(SimulateArgs),
    /// Write random frustum profiles and their revolved meshes.
    GenFrusta(GenFrustaArgs),
    /// Simulate every mesh in a directory into a dataset.
    GenDataset(GenDatasetArgs),
    /// Mask a response to a random contiguous window; writes a dB response.
    Mask(MaskArgs),
    /// Add complex Gaussian noise to a response.
    Noise(NoiseArgs),
    /// Sample or extract signed-distance grids.
    #[command(subcommand)]
    Sdf(SdfCmd),
    /// Compare a predicted reconstruction against ground truth.
    Evaluate(EvaluateArgs),
    /// Render one slice of a response as a PGM heatmap.
    Plot(PlotArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Mesh file, or a JSON list of centers with `--sim centers`.
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long, default_value = "po")]
    sim: Simulator,
    #[arg(long, default_value_t = 8e9)]
    fmin: f64,
    #[arg(long, default_value_t = 12e9)]
    fmax: f64,
    #[arg(long, default_value_t = 128)]
    nfreq: usize,
    #[arg(long, default_value_t = 64)]
    naspect: usize,
    #[arg(long, default_value_t = 64)]
    nroll: usize,
    /// Meters per model unit.
    #[arg(long, default_value_t = DEFAULT_SCALE)]
    scale: f64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    shadowing: bool,
    #[arg(long, default_value_t = 4.0)]
    rays_per_wavelength: f64,
    #[arg(long, default_value_t = 3)]
    bounces: u32,
    /// Simulate the mesh as given instead of normalizing it first.
    #[arg(long)]
    no_normalize: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenFrustaArgs {
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    #[arg(long, default_value_t = 6)]
    k_max: usize,
    #[arg(long, default_value_t = 64)]
    segments: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenDatasetArgs {
    #[arg(long)]
    meshes: PathBuf,
    /// JSON dataset config; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Mark this fraction of meshes (and all their variants) as test.
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MaskArgs {
    #[arg(long)]
    response: PathBuf,
    #[arg(long)]
    coverage: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// dB value written into masked cells.
    #[arg(long, default_value_t = DB_FLOOR, allow_negative_numbers = true)]
    fill: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long)]
    response: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    level_db: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum SdfCmd {
    /// Sample a mesh's signed distance at cell centers of [-0.5, 0.5]³.
    Sample {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        #[arg(long)]
        no_normalize: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract the iso-surface of a grid as an OBJ mesh.
    Extract {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        iso: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    pred_mesh: PathBuf,
    #[arg(long)]
    gt_mesh: PathBuf,
    /// Ground-truth response; the prediction is simulated with `--sim-config`.
    #[arg(long, requires = "sim_config")]
    gt_response: Option<PathBuf>,
    /// Dataset config whose simulator, grid and sweep are used for IoU_R.
    #[arg(long, requires = "gt_response")]
    sim_config: Option<PathBuf>,
    #[arg(long, requires = "gt_profile")]
    pred_profile: Option<PathBuf>,
    #[arg(long, requires = "pred_profile")]
    gt_profile: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    voxel_resolution: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    response: PathBuf,
    /// `roll:<j>` (aspect × frequency) or `freq:<k>` (aspect × roll).
    #[arg(long, default_value = "roll:0")]
    slice: Slice,
    #[arg(long)]
    out: PathBuf,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> r2s_core::Result<T> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.into(), source: e })?;
    Ok(serde_json::from_str(&s)?)
}

fn write_json<T: serde::Serialize>(path: &Path, v: &T) -> r2s_core::Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    r2s_core::dataset::write_atomic(path, s.as_bytes())
}

fn load_normalized(path: &Path, normalize: bool) -> r2s_core::Result<Mesh> {
    let m = load_mesh(path)?;
    Ok(if normalize { normalize_mesh(&m)?.0 } else { m })
}

fn simulate(a: SimulateArgs) -> r2s_core::Result<()> {
    let grid = ViewingGrid::uniform(a.naspect, a.nroll)?;
    let sweep = FrequencySweep::new(a.fmin, a.fmax, a.nfreq)?;
    let r = match a.sim {
        Simulator::Centers => {
            let centers: Vec<ScatteringCenter> = read_json(&a.mesh)?;
            simulate_centers(&centers, &grid, &sweep)?
        }
        Simulator::Po => {
            let m = load_normalized(&a.mesh, !a.no_normalize)?;
            simulate_po(&m, &grid, &sweep, &PoConfig { scale: a.scale, shadowing: a.shadowing })?
        }
        Simulator::Sbr => {
            let m = load_normalized(&a.mesh, !a.no_normalize)?;
            let cfg = SbrConfig {
                rays_per_wavelength: a.rays_per_wavelength,
                max_bounces: a.bounces,
                scale: a.scale,
                ..SbrConfig::default()
            };
            simulate_sbr(&m, &grid, &sweep, &cfg)?
        }
    };
    write_response_file(&a.out, &r)?;
    println!("wrote {}", a.out.display());
    Ok(())
}

fn gen_frusta(a: GenFrustaArgs) -> r2s_core::Result<()> {
    std::fs::create_dir_all(&a.out).map_err(|e| Error::Io { path: a.out.clone(), source: e })?;
    for i in 0..a.count {
        let id = format!("frustum_{i:04}");
        let p = sample_frustum_profile((a.k_min, a.k_max), hash64(a.seed, &id, "frustum"))?;
        write_json(&a.out.join(format!("{id}.json")), &p)?;
        write_obj(&revolve_to_mesh(&p, a.segments)?, a.out.join(format!("{id}.obj")))?;
    }
    println!("wrote {} frusta to {}", a.count, a.out.display());
    Ok(())
}

fn gen_dataset(a: GenDatasetArgs) -> r2s_core::Result<()> {
    let mut cfg: DatasetConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => DatasetConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let mut m = generate_dataset(&a.meshes, &cfg, &a.out)?;
    if let Some(f) = a.test_fraction {
        m = split_manifest(&m, f, hash64(cfg.seed, "dataset", "split"))?;
        write_manifest(a.out.join("manifest.json"), &m)?;
    }
    println!("wrote {} items ({} meshes excluded) to {}", m.items.len(), m.excluded.len(), a.out.display());
    Ok(())
}

fn mask(a: MaskArgs) -> r2s_core::Result<()> {
    let db = read_db_file(&a.response)?;
    let (na, nr, _) = db.shape();
    let m = gen_mask(na, nr, a.coverage, a.seed)?;
    write_db_file(&a.out, &apply_mask(&db, &m, a.fill)?)?;
    println!("{}", serde_json::to_string(&m)?);
    Ok(())
}

fn noise(a: NoiseArgs) -> r2s_core::Result<()> {
    let r = read_response_file(&a.response)?;
    write_response_file(&a.out, &add_noise(&r, a.level_db, a.seed)?)?;
    println!("wrote {}", a.out.display());
    Ok(())
}

fn sdf(c: SdfCmd) -> r2s_core::Result<()> {
    match c {
        SdfCmd::Sample { mesh, resolution, no_normalize, out } => {
            let m = load_normalized(&mesh, !no_normalize)?;
            write_sdf_grid(&out, &sample_sdf_grid(&m, resolution)?)?;
            println!("wrote {}", out.display());
        }
        SdfCmd::Extract { grid, iso, out } => {
            let m = extract_mesh(&read_sdf_grid(&grid)?, iso)?;
            write_obj(&m, &out)?;
            println!("wrote {} ({} faces)", out.display(), m.num_faces());
        }
    }
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> r2s_core::Result<()> {
    let cfg = EvalConfig { samples: a.samples, seed: a.seed, voxel_resolution: a.voxel_resolution, ..EvalConfig::default() };
    let pred = load_mesh(&a.pred_mesh)?;
    let mut report = evaluate_meshes(&pred, &load_mesh(&a.gt_mesh)?, &cfg)?;
    if let (Some(p), Some(g)) = (&a.pred_profile, &a.gt_profile) {
        let (p, g): (RadialProfile, RadialProfile) = (read_json(p)?, read_json(g)?);
        report.iou_s = Some(iou_s(&p, &g, cfg.raster_resolution)?);
        report.match_s = Some(match_s(&p, &g)?);
    }
    if let (Some(r), Some(c)) = (&a.gt_response, &a.sim_config) {
        let sim: DatasetConfig = read_json(c)?;
        let gt = read_db_file(r)?;
        let pred_db = r2s_core::signal::to_db(&sim.simulate(&pred)?);
        report.iou_r = Some(iou_r(&pred_db, &gt, IOU_R_THRESHOLD_DB)?);
    }
    write_json(&a.out, &report)?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn plot(a: PlotArgs) -> r2s_core::Result<()> {
    let img = render_heatmap(&read_db_file(&a.response)?, a.slice)?;
    img.write_pgm(&a.out)?;
    println!("wrote {} ({}×{})", a.out.display(), img.width, img.height);
    Ok(())
}

fn run(cmd: Cmd) -> r2s_core::Result<()> {
    match cmd {
        Cmd::Simulate(a) => simulate(a),
        Cmd::GenFrusta(a) => gen_frusta(a),
        Cmd::GenDataset(a) => gen_dataset(a),
        Cmd::Mask(a) => mask(a),
        Cmd::Noise(a) => noise(a),
        Cmd::Sdf(c) => sdf(c),
        Cmd::Evaluate(a) => evaluate(a),
        Cmd::Plot(a) => plot(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = with_threads(cli.threads, || run(cli.cmd)).and_then(|r| r);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            // bad parameter values are usage errors, everything else is data
            if matches!(e, Error::InvalidArgument(_)) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
